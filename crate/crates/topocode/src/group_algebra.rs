//! Every-zero graphic groups, group-valued colorings of host graphs, network
//! growth under a moving encryption base, and two-level graph-based strings.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_core::{ColoredGraph, Graph};
use crate::string_algebra::{build_shift_group, DigitString, GroupMode, Ring, StringGroup};
use crate::topcode::{string_from_topcode, PermIndex, TopcodeMatrix};

/// Index domain of a graphic group: vertex/edge moduli for the two-index
/// family, or one modulus shifting vertices and edges together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Pair { p: u64, q: u64 },
    Single { m: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupIndex {
    Single(u64),
    Pair(u64, u64),
}

impl fmt::Display for GroupIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupIndex::Single(t) => write!(f, "{t}"),
            GroupIndex::Pair(s, k) => write!(f, "({s},{k})"),
        }
    }
}

impl std::str::FromStr for GroupIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let bad = || Error::Parse(format!("group index '{s}'"));
        match t.split_once(',') {
            Some((a, b)) => Ok(GroupIndex::Pair(
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            )),
            None => Ok(GroupIndex::Single(t.parse().map_err(|_| bad())?)),
        }
    }
}

impl Window {
    pub fn validate(self) -> Result<Self> {
        match self {
            Window::Pair { p, q } if p == 0 || q == 0 => Err(Error::InvalidParam("zero modulus".into())),
            Window::Single { m: 0 } => Err(Error::InvalidParam("zero modulus".into())),
            w => Ok(w),
        }
    }

    #[must_use]
    pub fn order(self) -> u64 {
        match self {
            Window::Pair { p, q } => p * q,
            Window::Single { m } => m,
        }
    }

    #[must_use]
    pub fn vertex_modulus(self) -> u64 {
        match self {
            Window::Pair { p, .. } => p,
            Window::Single { m } => m,
        }
    }

    #[must_use]
    pub fn edge_modulus(self) -> u64 {
        match self {
            Window::Pair { q, .. } => q,
            Window::Single { m } => m,
        }
    }

    #[must_use]
    pub fn zero_index(self) -> GroupIndex {
        match self {
            Window::Pair { .. } => GroupIndex::Pair(0, 0),
            Window::Single { .. } => GroupIndex::Single(0),
        }
    }

    /// All indices in ordinal order.
    #[must_use]
    pub fn indices(self) -> Vec<GroupIndex> {
        match self {
            Window::Pair { p, q } => (0..p).flat_map(|s| (0..q).map(move |k| GroupIndex::Pair(s, k))).collect(),
            Window::Single { m } => (0..m).map(GroupIndex::Single).collect(),
        }
    }

    pub fn check(self, i: GroupIndex) -> Result<GroupIndex> {
        let ok = match (self, i) {
            (Window::Pair { p, q }, GroupIndex::Pair(s, k)) => s < p && k < q,
            (Window::Single { m }, GroupIndex::Single(t)) => t < m,
            _ => false,
        };
        if ok {
            Ok(i)
        } else {
            Err(Error::IndexOutOfRange { index: self.ordinal(i) as i64, order: self.order() as usize })
        }
    }

    fn ordinal(self, i: GroupIndex) -> u64 {
        match (self, i) {
            (Window::Pair { q, .. }, GroupIndex::Pair(s, k)) => s * q + k,
            (_, GroupIndex::Single(t)) => t,
            (_, GroupIndex::Pair(s, _)) => s,
        }
    }

    /// Vertex and edge shift of an index.
    #[must_use]
    pub fn shifts(self, i: GroupIndex) -> (u64, u64) {
        match i {
            GroupIndex::Pair(s, k) => (s, k),
            GroupIndex::Single(t) => (t, t),
        }
    }

    /// `a ⊕ b ⊖ z`.
    pub fn op(self, a: GroupIndex, b: GroupIndex, z: GroupIndex) -> Result<GroupIndex> {
        for i in [a, b, z] {
            self.check(i)?;
        }
        let f = |x: u64, y: u64, w: u64, m: u64| (x + y + m - w) % m;
        Ok(match (self, a, b, z) {
            (Window::Pair { p, q }, GroupIndex::Pair(s, k), GroupIndex::Pair(i, j), GroupIndex::Pair(c, d)) => {
                GroupIndex::Pair(f(s, i, c, p), f(k, j, d, q))
            }
            (Window::Single { m }, GroupIndex::Single(x), GroupIndex::Single(y), GroupIndex::Single(w)) => {
                GroupIndex::Single(f(x, y, w, m))
            }
            _ => unreachable!("checked above"),
        })
    }

    /// Inverse of `a` under zero `z`: `2z − a`.
    pub fn inverse(self, a: GroupIndex, z: GroupIndex) -> Result<GroupIndex> {
        self.check(a)?;
        self.check(z)?;
        let f = |x: u64, w: u64, m: u64| (2 * w + m - x) % m;
        Ok(match (self, a, z) {
            (Window::Pair { p, q }, GroupIndex::Pair(s, k), GroupIndex::Pair(c, d)) => {
                GroupIndex::Pair(f(s, c, p), f(k, d, q))
            }
            (Window::Single { m }, GroupIndex::Single(x), GroupIndex::Single(w)) => GroupIndex::Single(f(x, w, m)),
            _ => unreachable!("checked above"),
        })
    }
}

/// A base total coloring and its shifted copies over a finite window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphicGroup {
    pub base: ColoredGraph,
    pub window: Window,
}

pub fn build_graphic_group(g: &ColoredGraph, window: Window) -> Result<GraphicGroup> {
    let window = window.validate()?;
    let ev = g.edge_colors()?;
    let (p, q) = (window.vertex_modulus() as i64, window.edge_modulus() as i64);
    let vcolors = g.vcolors.iter().map(|c| c.rem_euclid(p)).collect();
    let ecolors = ev.iter().map(|c| c.rem_euclid(q)).collect();
    let base = ColoredGraph::new(g.graph.clone(), vcolors, Some(ecolors))?;
    Ok(GraphicGroup { base, window })
}

impl GraphicGroup {
    #[must_use]
    pub fn order(&self) -> u64 {
        self.window.order()
    }

    pub fn element(&self, i: GroupIndex) -> Result<ColoredGraph> {
        let (s, k) = self.window.shifts(self.window.check(i)?);
        let (p, q) = (self.window.vertex_modulus() as i64, self.window.edge_modulus() as i64);
        let v = self.base.vcolors.iter().map(|c| (c + s as i64).rem_euclid(p)).collect();
        let e = self.base.edge_colors()?.iter().map(|c| (c + k as i64).rem_euclid(q)).collect();
        ColoredGraph::new(self.base.graph.clone(), v, Some(e))
    }

    /// Element-wise `[g_a(w) + g_b(w) − g_z(w)]` reduced by the vertex or edge modulus.
    pub fn compute(&self, a: GroupIndex, b: GroupIndex, z: GroupIndex) -> Result<ColoredGraph> {
        let (ga, gb, gz) = (self.element(a)?, self.element(b)?, self.element(z)?);
        let (p, q) = (self.window.vertex_modulus() as i64, self.window.edge_modulus() as i64);
        let mix = |x: &[i64], y: &[i64], w: &[i64], m: i64| {
            x.iter().zip(y).zip(w).map(|((a, b), c)| (a + b - c).rem_euclid(m)).collect::<Vec<_>>()
        };
        let v = mix(&ga.vcolors, &gb.vcolors, &gz.vcolors, p);
        let e = mix(ga.edge_colors()?, gb.edge_colors()?, gz.edge_colors()?, q);
        ColoredGraph::new(self.base.graph.clone(), v, Some(e))
    }

    /// Topcode-matrix of an element in stored edge orientation, so all
    /// elements share one cell layout.
    pub fn topcode(&self, i: GroupIndex) -> Result<TopcodeMatrix> {
        stored_topcode(&self.element(i)?)
    }
}

pub fn graphic_group_op(g: &GraphicGroup, a: GroupIndex, b: GroupIndex, zero: GroupIndex) -> Result<GroupIndex> {
    g.window.op(a, b, zero)
}

pub(crate) fn stored_topcode(g: &ColoredGraph) -> Result<TopcodeMatrix> {
    let ev = g.edge_colors()?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for &(u, v) in g.graph.edges() {
        x.push(g.vcolors[u]);
        y.push(g.vcolors[v]);
    }
    TopcodeMatrix::numeric(&x, ev, &y)
}

// ---------------------------------------------------------------------------
// Group laws

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct GroupLawReport {
    pub order: usize,
    pub zero: bool,
    pub closure: bool,
    pub inverse: bool,
    pub associative: bool,
    pub commutative: bool,
}

impl GroupLawReport {
    #[must_use]
    pub fn all(&self) -> bool {
        self.zero && self.closure && self.inverse && self.associative && self.commutative
    }
}

/// Exhaustive check of every every-zero law over all zeros; `op(a, b, z)` is
/// `a ⊕ b ⊖ z` over element positions `0..n`, `None` meaning "not an element".
pub fn check_group_laws<F>(n: usize, op: F) -> GroupLawReport
where
    F: Fn(usize, usize, usize) -> Option<usize>,
{
    let mut r = GroupLawReport { order: n, zero: true, closure: true, inverse: true, associative: true, commutative: true };
    for z in 0..n {
        for a in 0..n {
            r.zero &= op(a, z, z) == Some(a);
            r.inverse &= (0..n).any(|b| op(a, b, z) == Some(z));
            for b in 0..n {
                let ab = op(a, b, z);
                r.closure &= ab.is_some();
                r.commutative &= ab == op(b, a, z);
                if let Some(ab) = ab {
                    for c in 0..n {
                        let left = op(ab, c, z);
                        let right = op(b, c, z).and_then(|bc| op(a, bc, z));
                        r.associative &= left.is_some() && left == right;
                    }
                }
            }
        }
    }
    r
}

/// Laws of a graphic group checked on materialized elements: the element-wise
/// computation must land on a member, identified by its coloring.
pub fn graphic_group_laws(g: &GraphicGroup) -> Result<GroupLawReport> {
    if g.order() > 64 {
        return Err(Error::TooLarge("law check limited to order 64".into()));
    }
    let idx = g.window.indices();
    let elems: Vec<ColoredGraph> = idx.iter().map(|&i| g.element(i)).collect::<Result<_>>()?;
    let find = |c: &ColoredGraph| elems.iter().position(|e| e == c);
    let n = idx.len();
    let mut table = vec![None; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for z in 0..n {
                table[(a * n + b) * n + z] = find(&g.compute(idx[a], idx[b], idx[z])?);
            }
        }
    }
    Ok(check_group_laws(n, |a, b, z| table[(a * n + b) * n + z]))
}

/// Laws of a shift-generated string group (digit-wise evaluation).
pub fn string_group_laws(g: &StringGroup) -> Result<GroupLawReport> {
    let n = g.m;
    let mut table = vec![None; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for z in 0..n {
                let s = g.compute(a + 1, b + 1, z + 1, GroupMode::AddSub)?;
                let want = crate::string_algebra::group_op(g, a + 1, b + 1, z + 1, GroupMode::AddSub)?;
                if g.same(&s, g.element(want)?) {
                    table[(a * n + b) * n + z] = Some(want - 1);
                }
            }
        }
    }
    Ok(check_group_laws(n, |a, b, z| table[(a * n + b) * n + z]))
}

// ---------------------------------------------------------------------------
// GROUP-compound

/// Graphic group, its Topcode-matrices and the strings read under one order.
#[derive(Debug, Clone, Serialize)]
pub struct CompoundGroup {
    pub graphic: GraphicGroup,
    pub topcodes: Vec<TopcodeMatrix>,
    pub strings: Vec<DigitString>,
    /// Same strings as a shift group (one modulus per cell); present when
    /// every cell is a single digit, i.e. `m <= 10`.
    pub string_group: Option<StringGroup>,
    pub perm: PermIndex,
}

pub fn group_compound(g: &ColoredGraph, m: u64, perm: &PermIndex) -> Result<CompoundGroup> {
    if m < 2 {
        return Err(Error::InvalidParam("compound order must be >= 2".into()));
    }
    let graphic = build_graphic_group(g, Window::Single { m })?;
    let idx = graphic.window.indices();
    let topcodes: Vec<TopcodeMatrix> = idx.iter().map(|&i| graphic.topcode(i)).collect::<Result<_>>()?;
    let strings: Vec<DigitString> = topcodes.iter().map(|t| string_from_topcode(t, perm)).collect::<Result<_>>()?;
    let string_group = if m <= 10 {
        let cells = strings[0].len();
        Some(build_shift_group(&strings[0], 1, m as usize, None, Some(vec![m as u8; cells]))?)
    } else {
        None
    };
    Ok(CompoundGroup { graphic, topcodes, strings, string_group, perm: perm.clone() })
}

impl CompoundGroup {
    #[must_use]
    pub fn order(&self) -> usize {
        self.strings.len()
    }

    /// For every triple `(i, j, k)`: graphic, Topcode (cell-wise) and string
    /// (digit-wise, when single-digit) computations all land on index
    /// `i + j − k mod m`.
    pub fn verify_index_law(&self) -> Result<bool> {
        let w = self.graphic.window;
        let m = w.order();
        let cells: Vec<[Vec<i64>; 3]> = self.topcodes.iter().map(TopcodeMatrix::numeric_rows).collect::<Result<_>>()?;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let (a, b, z) = (GroupIndex::Single(i), GroupIndex::Single(j), GroupIndex::Single(k));
                    let GroupIndex::Single(l) = w.op(a, b, z)? else { unreachable!() };
                    if self.graphic.compute(a, b, z)? != self.graphic.element(GroupIndex::Single(l))? {
                        return Ok(false);
                    }
                    let mi = m as i64;
                    let (ci, cj, ck, cl) = (&cells[i as usize], &cells[j as usize], &cells[k as usize], &cells[l as usize]);
                    for r in 0..3 {
                        let ok = (0..ci[r].len()).all(|c| (ci[r][c] + cj[r][c] - ck[r][c]).rem_euclid(mi) == cl[r][c]);
                        if !ok {
                            return Ok(false);
                        }
                    }
                    if let Some(sg) = &self.string_group {
                        let s = sg.compute(i as usize + 1, j as usize + 1, k as usize + 1, GroupMode::AddSub)?;
                        if s.digits() != self.strings[l as usize].digits() {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// Group-valued colorings of a host graph

/// Host graph whose vertices and edges carry group indices; every edge keeps
/// the zero it was derived under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupColoring {
    pub host: Graph,
    pub window: Window,
    pub vertex: Vec<GroupIndex>,
    pub edge: Vec<GroupIndex>,
    pub edge_zero: Vec<GroupIndex>,
    /// Current zero (encryption base).
    pub zero: GroupIndex,
}

impl GroupColoring {
    /// Every edge satisfies `index(uv) = index(u) ⊕ index(v) ⊖ zero(uv)`.
    #[must_use]
    pub fn verify(&self) -> bool {
        self.vertex.len() == self.host.n()
            && self.edge.len() == self.host.q()
            && self.edge_zero.len() == self.host.q()
            && self.host.edges().iter().enumerate().all(|(i, &(u, v))| {
                self.window.op(self.vertex[u], self.vertex[v], self.edge_zero[i]).ok() == Some(self.edge[i])
            })
    }

    /// Adjacent vertices carry distinct indices.
    #[must_use]
    pub fn is_proper(&self) -> bool {
        self.host.edges().iter().all(|&(u, v)| self.vertex[u] != self.vertex[v])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexAssignment {
    Given(Vec<GroupIndex>),
    /// Smallest index (ordinal order) not used by an already-colored neighbor.
    Greedy,
}

pub fn color_host_by_group(
    host: &Graph,
    window: Window,
    zero: GroupIndex,
    assignment: &VertexAssignment,
    proper: bool,
) -> Result<GroupColoring> {
    let window = window.validate()?;
    window.check(zero)?;
    if proper && window.order() < host.max_degree() as u64 + 1 {
        return Err(Error::InvalidParam(format!(
            "group order {} below max degree + 1 = {}",
            window.order(),
            host.max_degree() + 1
        )));
    }
    let vertex = match assignment {
        VertexAssignment::Given(v) => {
            if v.len() != host.n() {
                return Err(Error::MissingColor(format!("{} indices for {} vertices", v.len(), host.n())));
            }
            for &i in v {
                window.check(i)?;
            }
            v.clone()
        }
        VertexAssignment::Greedy => {
            let all = window.indices();
            let adj = host.adjacency();
            let mut out: Vec<Option<GroupIndex>> = vec![None; host.n()];
            for v in 0..host.n() {
                let used: BTreeSet<GroupIndex> = adj[v].iter().filter_map(|&u| out[u]).collect();
                out[v] = all.iter().copied().find(|i| !used.contains(i));
            }
            out.into_iter().map(|i| i.expect("order exceeds degree")).collect()
        }
    };
    let edge = host
        .edges()
        .iter()
        .map(|&(u, v)| window.op(vertex[u], vertex[v], zero))
        .collect::<Result<Vec<_>>>()?;
    let c = GroupColoring { host: host.clone(), window, vertex, edge, edge_zero: vec![zero; host.q()], zero };
    if proper && !c.is_proper() {
        return Err(Error::Hypothesis("assignment is not proper on adjacent vertices".into()));
    }
    Ok(c)
}

// ---------------------------------------------------------------------------
// MULTIPLE-JOIN

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinStep {
    pub attach: Vec<usize>,
    pub zero: GroupIndex,
    /// Index drawn for the new vertex.
    pub index: GroupIndex,
}

/// Replayable record of a network grown one vertex at a time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinTranscript {
    pub seed: u64,
    pub initial: GroupColoring,
    pub steps: Vec<JoinStep>,
}

fn draw_index(window: Window, seed: u64, step: u64) -> GroupIndex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    match window {
        Window::Pair { p, q } => GroupIndex::Pair(rng.gen_range(0..p), rng.gen_range(0..q)),
        Window::Single { m } => GroupIndex::Single(rng.gen_range(0..m)),
    }
}

/// Start network: `host` with seeded random vertex indices under `zero`.
pub fn multiple_join_init(host: &Graph, window: Window, zero: GroupIndex, seed: u64) -> Result<JoinTranscript> {
    let window = window.validate()?;
    let vertex = (0..host.n() as u64).map(|v| draw_index(window, seed, v)).collect();
    let initial = color_host_by_group(host, window, zero, &VertexAssignment::Given(vertex), false)?;
    Ok(JoinTranscript { seed, initial, steps: Vec::new() })
}

/// Add vertex `u = n` joined to `attach`; the new vertex draws its index from
/// a stream keyed by its vertex number, so the step zero affects only the
/// new edges.
pub fn multiple_join_step(
    n: &GroupColoring,
    attach: &[usize],
    zero: GroupIndex,
    seed: u64,
) -> Result<(GroupColoring, JoinStep)> {
    if attach.is_empty() {
        return Err(Error::InvalidParam("attach set is empty".into()));
    }
    let set: BTreeSet<usize> = attach.iter().copied().collect();
    if set.len() != attach.len() {
        return Err(Error::InvalidParam("attach set repeats a vertex".into()));
    }
    if let Some(&x) = attach.iter().find(|&&x| x >= n.host.n()) {
        return Err(Error::InvalidGraph(format!("attach vertex {x} not in the network")));
    }
    let w = n.window;
    w.check(zero)?;
    let u = n.host.n();
    let index = draw_index(w, seed, u as u64);
    let mut edges = n.host.edges().to_vec();
    let mut out = n.clone();
    out.vertex.push(index);
    for &x in attach {
        edges.push((u, x));
        out.edge.push(w.op(index, n.vertex[x], zero)?);
        out.edge_zero.push(zero);
    }
    out.host = Graph::new(u + 1, edges)?;
    out.zero = zero;
    Ok((out, JoinStep { attach: attach.to_vec(), zero, index }))
}

impl JoinTranscript {
    pub fn grow(&mut self, current: &GroupColoring, attach: &[usize], zero: GroupIndex) -> Result<GroupColoring> {
        let (next, step) = multiple_join_step(current, attach, zero, self.seed)?;
        self.steps.push(step);
        Ok(next)
    }

    /// Re-run every step; indices must match the recorded ones.
    pub fn replay(&self) -> Result<GroupColoring> {
        let mut cur = self.initial.clone();
        for (t, s) in self.steps.iter().enumerate() {
            let (next, step) = multiple_join_step(&cur, &s.attach, s.zero, self.seed)?;
            if step != *s {
                return Err(Error::Hypothesis(format!("replay diverged at step {t}")));
            }
            cur = next;
        }
        Ok(cur)
    }
}

// ---------------------------------------------------------------------------
// Graph-based strings

/// Host whose vertices (and optionally edges) carry graphs from a palette.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphValuedColoring {
    pub host: Graph,
    pub palette: Vec<ColoredGraph>,
    pub vertex: Vec<usize>,
    #[serde(default)]
    pub edge: Option<Vec<usize>>,
}

impl GraphValuedColoring {
    /// Level-1 items: the vertex values in vertex order, or — for a total
    /// coloring — the 3q cells of the host Topcode-matrix (stored orientation).
    pub fn level1(&self) -> Result<Vec<usize>> {
        if self.vertex.len() != self.host.n() {
            return Err(Error::MissingColor("host vertices".into()));
        }
        let items = match &self.edge {
            None => self.vertex.clone(),
            Some(e) => {
                if e.len() != self.host.q() {
                    return Err(Error::MissingColor("host edges".into()));
                }
                let es = self.host.edges();
                let mut out: Vec<usize> = es.iter().map(|&(u, _)| self.vertex[u]).collect();
                out.extend(e.iter().copied());
                out.extend(es.iter().map(|&(_, v)| self.vertex[v]));
                out
            }
        };
        if let Some(&bad) = items.iter().find(|&&i| i >= self.palette.len()) {
            return Err(Error::InvalidParam(format!("palette has no graph {bad}")));
        }
        Ok(items)
    }
}

/// `depth = 1`: the level-1 sequence of graph identifiers (permuted by
/// `level1`). `depth = 2`: each identifier expands to its graph's Topcode
/// string read under `level2[id]` (row-major when absent).
pub fn graph_based_string(
    h: &GraphValuedColoring,
    depth: u32,
    level1: Option<&PermIndex>,
    level2: &[Option<PermIndex>],
) -> Result<DigitString> {
    if depth == 0 || depth > 2 {
        return Err(Error::TooLarge(format!("depth {depth}: only levels 1 and 2 are supported")));
    }
    let items = h.level1()?;
    let order: Vec<usize> = match level1 {
        Some(p) if p.sequence().len() != items.len() => {
            return Err(Error::LengthMismatch { left: p.sequence().len(), right: items.len() })
        }
        Some(p) => p.sequence().iter().map(|&i| items[i]).collect(),
        None => items,
    };
    let mut s = String::new();
    for id in order {
        if depth == 1 {
            s.push_str(&id.to_string());
            continue;
        }
        let g = &h.palette[id];
        let t = stored_topcode(g)?;
        let perm = level2.get(id).cloned().flatten().unwrap_or_else(|| PermIndex::row_major(t.q()));
        s.push_str(&string_from_topcode(&t, &perm)?.to_string());
    }
    DigitString::parse(&s, Ring::Mod10)
}
