//! W-constraint labelings and (k,d)-total colorings: verification, backtracking
//! search, magic-constraint interconversion, witnesses, twin/image/dual
//! pairings, indexed colors and string-colorings.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_core::{ColoredGraph, Graph};
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Graceful,
    OddGraceful,
    Harmonious,
    OddElegant,
    EdgeMagic,
    EdgeDifference,
    GracefulDifference,
    FelicitousDifference,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Graceful,
        Family::OddGraceful,
        Family::Harmonious,
        Family::OddElegant,
        Family::EdgeMagic,
        Family::EdgeDifference,
        Family::GracefulDifference,
        Family::FelicitousDifference,
    ];

    pub const MAGIC: [Family; 4] =
        [Family::EdgeMagic, Family::EdgeDifference, Family::GracefulDifference, Family::FelicitousDifference];

    #[must_use]
    pub fn is_magic(self) -> bool {
        Self::MAGIC.contains(&self)
    }

    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Family::Graceful => "graceful",
            Family::OddGraceful => "odd-graceful",
            Family::Harmonious => "harmonious",
            Family::OddElegant => "odd-elegant",
            Family::EdgeMagic => "edge-magic",
            Family::EdgeDifference => "edge-difference",
            Family::GracefulDifference => "graceful-difference",
            Family::FelicitousDifference => "felicitous-difference",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown family {s:?}")))
    }
}

/// What a coloring must satisfy.
///
/// Without `labeling` or `free` the (k,d)-total coloring reading applies:
/// bipartition (X,Y) with X colors in `{0,d,2d,…}` and Y/edge colors in
/// `{k,k+d,…}`, edge color set equal to `{k+jd}` (or `{k+2jd}` for odd-edge).
/// `labeling` swaps the value ranges for the classic clauses (injective
/// vertices, `[0, max edge]` with minimum 0). `pseudo` keeps the edge value
/// set but drops distinctness; `free` drops both edge-set and range clauses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub family: Family,
    pub set_ordered: bool,
    pub strongly: bool,
    pub labeling: bool,
    pub odd_edge: bool,
    pub pseudo: bool,
    pub free: bool,
    pub proper: bool,
    pub k: i64,
    pub d: i64,
    pub abc: Option<(i64, i64, i64)>,
    pub constant: Option<i64>,
}

impl ConstraintSpec {
    #[must_use]
    pub fn new(family: Family) -> Self {
        Self {
            family,
            set_ordered: false,
            strongly: false,
            labeling: false,
            odd_edge: false,
            pseudo: false,
            free: false,
            proper: false,
            k: 1,
            d: 1,
            abc: None,
            constant: None,
        }
    }

    /// Classic labeling at `(k,d) = (1,1)`.
    #[must_use]
    pub fn labeling(family: Family) -> Self {
        Self { labeling: true, ..Self::new(family) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 || self.k < 0 {
            return Err(Error::InvalidParam(format!("need d >= 1 and k >= 0, got k={} d={}", self.k, self.d)));
        }
        if let Some((a, b, c)) = self.abc {
            if a <= 0 || b <= 0 || c <= 0 {
                return Err(Error::InvalidParam("abc weights must be positive".into()));
            }
        }
        Ok(())
    }

    #[must_use]
    pub fn odd(&self) -> bool {
        self.odd_edge || matches!(self.family, Family::OddGraceful | Family::OddElegant)
    }

    /// Required edge value set for `q` edges.
    #[must_use]
    pub fn edge_targets(&self, q: usize) -> Vec<i64> {
        let step = if self.odd() { 2 * self.d } else { self.d };
        (0..q as i64).map(|j| self.k + j * step).collect()
    }

    #[must_use]
    pub fn max_edge(&self, q: usize) -> i64 {
        self.edge_targets(q).last().copied().unwrap_or(self.k)
    }

    fn weights(&self) -> (i64, i64, i64) {
        self.abc.unwrap_or((1, 1, 1))
    }

    fn kd_ranges(&self) -> bool {
        !self.labeling && !self.free
    }

    /// Edge color forced by the endpoint colors, for the non-magic families.
    #[must_use]
    pub fn induced_edge(&self, a: i64, b: i64, q: usize) -> Option<i64> {
        let q = q.max(1) as i64;
        match self.family {
            Family::Graceful | Family::OddGraceful => Some((a - b).abs()),
            Family::Harmonious => Some(self.k + (a + b - self.k).rem_euclid(q * self.d)),
            Family::OddElegant => Some(self.k + (a + b - self.k).rem_euclid(2 * q * self.d)),
            _ => None,
        }
    }

    /// Per-edge magic value (`a` is the first stored endpoint).
    #[must_use]
    pub fn magic_value(&self, a: i64, b: i64, e: i64) -> Option<i64> {
        let (wa, wb, wc) = self.weights();
        let v = match self.family {
            Family::EdgeMagic => wa * a + wb * b + wc * e,
            Family::EdgeDifference => wc * e + (wa * a - wb * b).abs(),
            Family::GracefulDifference => ((wa * a - wb * b).abs() - wc * e).abs(),
            Family::FelicitousDifference => (wa * a + wb * b - wc * e).abs(),
            _ => return None,
        };
        Some(v)
    }

    /// Edge colors compatible with endpoint colors `a`, `b` and constant `c`.
    fn magic_edges(&self, a: i64, b: i64, c: i64) -> Vec<i64> {
        let (wa, wb, wc) = self.weights();
        let raw: Vec<i64> = match self.family {
            Family::EdgeMagic => vec![c - wa * a - wb * b],
            Family::EdgeDifference => vec![c - (wa * a - wb * b).abs()],
            Family::GracefulDifference => {
                let t = (wa * a - wb * b).abs();
                vec![t - c, t + c]
            }
            Family::FelicitousDifference => {
                let t = wa * a + wb * b;
                vec![t - c, t + c]
            }
            _ => Vec::new(),
        };
        let mut out: Vec<i64> = raw.into_iter().filter(|v| v % wc == 0).map(|v| v / wc).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        for (on, name) in [
            (self.set_ordered, "set-ordered"),
            (self.strongly, "strongly"),
            (self.odd_edge, "odd-edge"),
            (self.pseudo, "pseudo"),
            (self.free, "free"),
            (self.proper, "proper"),
        ] {
            if on {
                write!(f, ";{name}")?;
            }
        }
        write!(f, ";k={};d={}", self.k, self.d)?;
        if let Some((a, b, c)) = self.abc {
            write!(f, ";abc={a},{b},{c}")?;
        }
        if let Some(c) = self.constant {
            write!(f, ";c={c}")?;
        }
        if self.labeling {
            write!(f, ";labeling")?;
        }
        Ok(())
    }
}

impl FromStr for ConstraintSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut family = None;
        let mut spec = ConstraintSpec::new(Family::Graceful);
        let int = |key: &str, v: &str| v.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad {key}: {v:?}")));
        for tok in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            if let Some((key, val)) = tok.split_once('=') {
                match key.trim() {
                    "k" => spec.k = int("k", val)?,
                    "d" => spec.d = int("d", val)?,
                    "c" => spec.constant = Some(int("c", val)?),
                    "abc" => {
                        let w: Vec<i64> = val.split(',').map(|v| int("abc", v)).collect::<Result<_>>()?;
                        if w.len() != 3 {
                            return Err(Error::Parse(format!("abc needs three weights: {val:?}")));
                        }
                        spec.abc = Some((w[0], w[1], w[2]));
                    }
                    other => return Err(Error::Parse(format!("unknown key {other:?}"))),
                }
                continue;
            }
            match tok {
                "set-ordered" => spec.set_ordered = true,
                "strongly" => spec.strongly = true,
                "labeling" => spec.labeling = true,
                "odd-edge" => spec.odd_edge = true,
                "pseudo" => spec.pseudo = true,
                "free" => spec.free = true,
                "proper" => spec.proper = true,
                other => {
                    if family.is_some() {
                        return Err(Error::Parse(format!("unexpected token {other:?}")));
                    }
                    family = Some(other.parse::<Family>()?);
                }
            }
        }
        spec.family = family.ok_or_else(|| Error::Parse("constraint spec names no family".into()))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub id: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    /// The per-edge W relation (and magic constant) held everywhere.
    pub w_ok: bool,
    pub violations: Vec<Violation>,
    pub constant: Option<i64>,
    pub vertex_colors: BTreeSet<i64>,
    pub edge_colors: BTreeSet<i64>,
}

impl VerifyReport {
    fn new(vertex_colors: BTreeSet<i64>, edge_colors: BTreeSet<i64>) -> Self {
        Self { pass: true, w_ok: true, violations: Vec::new(), constant: None, vertex_colors, edge_colors }
    }

    fn fail(&mut self, id: &str, detail: impl Into<String>) {
        self.pass = false;
        self.violations.push(Violation { id: id.to_string(), detail: detail.into() });
    }

    #[must_use]
    pub fn violated(&self, id: &str) -> bool {
        self.violations.iter().any(|v| v.id == id)
    }
}

/// Side of every vertex in a bipartite graph (each component's lowest vertex
/// on side `false`), or `None` when an odd cycle exists.
#[must_use]
pub fn two_coloring(g: &Graph) -> Option<Vec<bool>> {
    let adj = g.adjacency();
    let mut side: Vec<Option<bool>> = vec![None; g.n()];
    for s in 0..g.n() {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            let su = side[u].expect("visited");
            for &v in &adj[u] {
                match side[v] {
                    None => {
                        side[v] = Some(!su);
                        stack.push(v);
                    }
                    Some(t) if t == su => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(side.into_iter().map(|s| s.unwrap_or(false)).collect())
}

/// Unique perfect matching of a forest, if any.
#[must_use]
pub fn forest_perfect_matching(g: &Graph) -> Option<Vec<(usize, usize)>> {
    let adj = g.adjacency();
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for r in 0..n {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let mut stack = vec![r];
        while let Some(u) = stack.pop() {
            order.push(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    stack.push(v);
                }
            }
        }
    }
    let mut mate = vec![usize::MAX; n];
    for &v in order.iter().rev() {
        if mate[v] != usize::MAX {
            continue;
        }
        let p = parent[v];
        if p == usize::MAX || mate[p] != usize::MAX {
            return None;
        }
        mate[v] = p;
        mate[p] = v;
    }
    Some((0..n).filter(|&v| v < mate[v]).map(|v| (v, mate[v])).collect())
}

/// Edge colors of `g`, derived from the vertex colors for non-magic families.
fn edge_values(g: &ColoredGraph, spec: &ConstraintSpec) -> Result<Vec<i64>> {
    if let Some(e) = &g.ecolors {
        return Ok(e.clone());
    }
    if spec.family.is_magic() {
        return Err(Error::MissingColor(format!("edges ({} needs explicit edge colors)", spec.family)));
    }
    let q = g.graph.q();
    Ok(g.graph
        .edges()
        .iter()
        .map(|&(u, v)| spec.induced_edge(g.vcolors[u], g.vcolors[v], q).expect("induced family"))
        .collect())
}

fn set_ordered_sides(g: &Graph) -> Result<Vec<bool>> {
    g.bipartition()
        .ok_or_else(|| Error::InvalidGraph("set-ordered needs a connected bipartite graph".into()))
}

fn is_set_ordered(colors: &[i64], side: &[bool]) -> bool {
    [false, true].into_iter().any(|xs| {
        let max_x = (0..colors.len()).filter(|&v| side[v] == xs).map(|v| colors[v]).max();
        let min_y = (0..colors.len()).filter(|&v| side[v] != xs).map(|v| colors[v]).min();
        match (max_x, min_y) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    })
}

fn kd_failures(colors: &[i64], ev: &[i64], side: &[bool], xs: bool, spec: &ConstraintSpec) -> Vec<Violation> {
    let (k, d) = (spec.k, spec.d);
    let mut out = Vec::new();
    for (v, &c) in colors.iter().enumerate() {
        if side[v] == xs {
            if c < 0 || c % d != 0 {
                out.push(Violation { id: "KD-X".into(), detail: format!("vertex {v} color {c} not in {{0,{d},..}}") });
            }
        } else if c < k || (c - k) % d != 0 {
            out.push(Violation { id: "KD-Y".into(), detail: format!("vertex {v} color {c} not in {{{k},{k}+{d},..}}") });
        }
    }
    for (i, &e) in ev.iter().enumerate() {
        if e < k || (e - k) % d != 0 {
            out.push(Violation { id: "KD-E".into(), detail: format!("edge {i} color {e} not in {{{k},{k}+{d},..}}") });
        }
    }
    out
}

/// Check every clause `spec` switches on.
pub fn verify(g: &ColoredGraph, spec: &ConstraintSpec) -> Result<VerifyReport> {
    spec.validate()?;
    let graph = &g.graph;
    let q = graph.q();
    let vc = &g.vcolors;
    let ev = edge_values(g, spec)?;
    let mut rep = VerifyReport::new(vc.iter().copied().collect(), ev.iter().copied().collect());
    let so_side = if spec.set_ordered { Some(set_ordered_sides(graph)?) } else { None };

    // W relation.
    if spec.family.is_magic() {
        let mut constant = spec.constant;
        for (i, &(u, v)) in graph.edges().iter().enumerate() {
            let val = spec.magic_value(vc[u], vc[v], ev[i]).expect("magic family");
            match constant {
                None => constant = Some(val),
                Some(c) if c != val => {
                    rep.w_ok = false;
                    rep.fail("W", format!("edge {i} ({u}-{v}) gives {val}, expected constant {c}"));
                }
                Some(_) => {}
            }
        }
        rep.constant = constant;
    } else {
        for (i, &(u, v)) in graph.edges().iter().enumerate() {
            let want = spec.induced_edge(vc[u], vc[v], q).expect("induced family");
            if want != ev[i] {
                rep.w_ok = false;
                rep.fail("W", format!("edge {i} ({u}-{v}) colored {}, relation gives {want}", ev[i]));
            }
        }
    }

    // Edge value set.
    let edge_id = if spec.odd() { "C-5" } else { "C-4" };
    if !spec.free {
        let targets = spec.edge_targets(q);
        if spec.pseudo {
            let allowed: BTreeSet<i64> = targets.iter().copied().collect();
            if let Some((i, e)) = ev.iter().enumerate().find(|(_, e)| !allowed.contains(e)) {
                rep.fail(edge_id, format!("edge {i} color {e} outside the edge value set"));
            }
        } else {
            let mut sorted = ev.clone();
            sorted.sort_unstable();
            if sorted != targets {
                rep.fail(edge_id, format!("edge colors {sorted:?} differ from {targets:?}"));
            }
        }
    }

    // Value ranges.
    if spec.labeling {
        let distinct: HashSet<i64> = if spec.family.is_magic() {
            vc.iter().chain(&ev).copied().collect()
        } else {
            vc.iter().copied().collect()
        };
        let expect = if spec.family.is_magic() { vc.len() + ev.len() } else { vc.len() };
        if distinct.len() != expect {
            rep.fail("C-1", "colors are not pairwise distinct");
        }
        if !spec.family.is_magic() {
            let top = spec.max_edge(q);
            let range_id = if spec.odd() { "C-3" } else { "C-2" };
            if vc.iter().any(|&c| c < 0 || c > top) {
                rep.fail(range_id, format!("vertex colors leave [0,{top}]"));
            } else if !vc.is_empty() && !vc.contains(&0) {
                rep.fail(range_id, "no vertex colored 0");
            }
        }
    } else if spec.kd_ranges() {
        match two_coloring(graph) {
            None => rep.fail("KD-X", "graph is not bipartite"),
            Some(side) => {
                let a = kd_failures(vc, &ev, &side, false, spec);
                let b = kd_failures(vc, &ev, &side, true, spec);
                if !a.is_empty() && !b.is_empty() {
                    let worst = if a.len() <= b.len() { a } else { b };
                    rep.pass = false;
                    rep.violations.extend(worst);
                }
            }
        }
    }

    if let Some(side) = &so_side {
        if !is_set_ordered(vc, side) {
            rep.fail("C-6", "max f(X) is not below min f(Y)");
        }
    }

    if spec.strongly {
        let id = if spec.odd() { "C-8" } else { "C-7" };
        let sum = spec.max_edge(q);
        if !graph.is_tree() {
            rep.fail(id, "not a tree");
        } else {
            match forest_perfect_matching(graph) {
                None => rep.fail(id, "no perfect matching"),
                Some(m) => {
                    if let Some(&(x, y)) = m.iter().find(|&&(x, y)| vc[x] + vc[y] != sum) {
                        rep.fail(id, format!("matching edge {x}-{y} sums to {}, expected {sum}", vc[x] + vc[y]));
                    }
                }
            }
        }
    }

    if spec.proper {
        if let Some(detail) = improper(graph, vc, &ev) {
            rep.fail("PROPER", detail);
        }
    }
    Ok(rep)
}

fn improper(graph: &Graph, vc: &[i64], ev: &[i64]) -> Option<String> {
    for (i, &(u, v)) in graph.edges().iter().enumerate() {
        if vc[u] == vc[v] {
            return Some(format!("adjacent vertices {u},{v} share color {}", vc[u]));
        }
        if ev[i] == vc[u] || ev[i] == vc[v] {
            return Some(format!("edge {i} shares color {} with an end", ev[i]));
        }
    }
    let mut at: Vec<Vec<i64>> = vec![Vec::new(); graph.n()];
    for (i, &(u, v)) in graph.edges().iter().enumerate() {
        at[u].push(ev[i]);
        at[v].push(ev[i]);
    }
    for (v, cols) in at.iter_mut().enumerate() {
        let len = cols.len();
        cols.sort_unstable();
        cols.dedup();
        if cols.len() != len {
            return Some(format!("edges at vertex {v} repeat a color"));
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Search

pub const DEFAULT_EDGE_BOUND: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Node budget for each root branch (orientation × constant × first color).
    pub budget: u64,
    pub max_edges: usize,
    pub exec: Exec,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { budget: 5_000_000, max_edges: DEFAULT_EDGE_BOUND, exec: Exec::Auto }
    }
}

/// Parse a node budget such as `250000`, `500k` or `2m`.
pub fn parse_budget(s: &str) -> Result<u64> {
    let t = s.trim().to_ascii_lowercase();
    let (digits, mult) = match t.strip_suffix('k') {
        Some(d) => (d, 1_000),
        None => match t.strip_suffix('m') {
            Some(d) => (d, 1_000_000),
            None => (t.as_str(), 1),
        },
    };
    digits
        .parse::<u64>()
        .ok()
        .and_then(|v| v.checked_mul(mult))
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::Parse(format!("invalid budget {s:?}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SearchOutcome {
    Found(ColoredGraph),
    /// Every branch was explored without success.
    Exhausted,
    /// No solution seen, but some branch hit its node budget.
    BudgetExhausted,
}

impl SearchOutcome {
    #[must_use]
    pub fn found(self) -> Option<ColoredGraph> {
        match self {
            SearchOutcome::Found(g) => Some(g),
            _ => None,
        }
    }
}

enum Step {
    Found(ColoredGraph),
    None,
    Budget,
}

struct Ctx<'a> {
    g: &'a Graph,
    spec: &'a ConstraintSpec,
    order: Vec<usize>,
    back: Vec<Vec<usize>>,
    allowed: BTreeSet<i64>,
    side: Option<Vec<bool>>,
    x_is: bool,
    bound: i64,
    constant: Option<i64>,
    budget: u64,
}

struct State {
    vc: Vec<Option<i64>>,
    ec: Vec<Option<i64>>,
    used_e: BTreeMap<i64, u32>,
    used_all: BTreeMap<i64, u32>,
    nodes: u64,
}

fn bump(m: &mut BTreeMap<i64, u32>, v: i64) {
    *m.entry(v).or_insert(0) += 1;
}

fn drop_one(m: &mut BTreeMap<i64, u32>, v: i64) {
    if let Some(c) = m.get_mut(&v) {
        *c -= 1;
        if *c == 0 {
            m.remove(&v);
        }
    }
}

impl Ctx<'_> {
    fn on_x(&self, v: usize) -> Option<bool> {
        self.side.as_ref().map(|s| s[v] == self.x_is)
    }

    fn domain(&self, v: usize) -> Vec<i64> {
        let (k, d) = (self.spec.k, self.spec.d);
        if self.spec.kd_ranges() {
            let q = self.g.q() as i64;
            match self.on_x(v) {
                Some(true) => (0..=q).map(|j| j * d).collect(),
                _ => (0..=q).map(|j| k + j * d).collect(),
            }
        } else {
            (0..=self.bound).collect()
        }
    }

    fn vertex_ok(&self, st: &State, v: usize, x: i64) -> bool {
        let sp = self.spec;
        if sp.labeling && st.used_all.contains_key(&x) {
            return false;
        }
        if sp.set_ordered {
            let on_x = self.on_x(v).expect("sides known");
            for (w, c) in st.vc.iter().enumerate() {
                if let Some(c) = *c {
                    let w_x = self.on_x(w).expect("sides known");
                    if on_x && !w_x && x >= c || !on_x && w_x && x <= c {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn edge_ok(&self, st: &State, e: i64) -> bool {
        let sp = self.spec;
        if sp.free {
            if e < 0 {
                return false;
            }
        } else {
            if !self.allowed.contains(&e) {
                return false;
            }
            if !sp.pseudo && st.used_e.contains_key(&e) {
                return false;
            }
        }
        !(sp.labeling && sp.family.is_magic() && st.used_all.contains_key(&e))
    }

    fn edge_candidates(&self, st: &State, ei: usize) -> Vec<i64> {
        let (u, v) = self.g.edges()[ei];
        let (a, b) = (st.vc[u].expect("colored"), st.vc[v].expect("colored"));
        match self.constant {
            Some(c) => self.spec.magic_edges(a, b, c),
            None => self.spec.induced_edge(a, b, self.g.q()).into_iter().collect(),
        }
    }

    fn dfs(&self, st: &mut State, pos: usize, first: i64) -> Step {
        if pos == self.order.len() {
            return self.leaf(st);
        }
        let v = self.order[pos];
        let dom = if pos == 0 { vec![first] } else { self.domain(v) };
        for x in dom {
            st.nodes += 1;
            if st.nodes > self.budget {
                return Step::Budget;
            }
            if !self.vertex_ok(st, v, x) {
                continue;
            }
            st.vc[v] = Some(x);
            bump(&mut st.used_all, x);
            let r = self.edges(st, pos, 0, first);
            drop_one(&mut st.used_all, x);
            st.vc[v] = None;
            match r {
                Step::None => {}
                other => return other,
            }
        }
        Step::None
    }

    fn edges(&self, st: &mut State, pos: usize, j: usize, first: i64) -> Step {
        let v = self.order[pos];
        if j == self.back[v].len() {
            return self.dfs(st, pos + 1, first);
        }
        let ei = self.back[v][j];
        for e in self.edge_candidates(st, ei) {
            if !self.edge_ok(st, e) {
                continue;
            }
            st.ec[ei] = Some(e);
            let total = self.spec.family.is_magic();
            bump(&mut st.used_e, e);
            if total {
                bump(&mut st.used_all, e);
            }
            let r = self.edges(st, pos, j + 1, first);
            if total {
                drop_one(&mut st.used_all, e);
            }
            drop_one(&mut st.used_e, e);
            st.ec[ei] = None;
            match r {
                Step::None => {}
                other => return other,
            }
        }
        Step::None
    }

    fn leaf(&self, st: &State) -> Step {
        let vc: Vec<i64> = st.vc.iter().map(|c| c.expect("all colored")).collect();
        let ec: Vec<i64> = st.ec.iter().map(|c| c.expect("all colored")).collect();
        let cg = ColoredGraph::new(self.g.clone(), vc, Some(ec)).expect("sizes match");
        match verify(&cg, self.spec) {
            Ok(r) if r.pass => Step::Found(cg),
            _ => Step::None,
        }
    }
}

/// Vertex order: start at a maximum-degree vertex, then prefer vertices
/// touching already-placed ones, then higher degree, then lower id.
fn search_order(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let adj = g.adjacency();
    let deg = g.degrees();
    let mut placed = vec![false; n];
    let mut touching = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| (touching[v] > 0, deg[v], std::cmp::Reverse(v)))
            .expect("unplaced vertex");
        placed[v] = true;
        order.push(v);
        for &w in &adj[v] {
            touching[w] += 1;
        }
    }
    order
}

fn constant_range(spec: &ConstraintSpec, q: usize, vmax: i64) -> Vec<i64> {
    if let Some(c) = spec.constant {
        return vec![c];
    }
    let (wa, wb, wc) = spec.weights();
    let emax = spec.max_edge(q);
    let (lo, hi) = match spec.family {
        Family::EdgeMagic => (if spec.free { 0 } else { wc * emax }, (wa + wb) * vmax + wc * emax),
        Family::EdgeDifference => (if spec.free { 0 } else { wc * emax }, wc * emax + wa.max(wb) * vmax),
        Family::GracefulDifference => (0, wc * emax + wa.max(wb) * vmax),
        _ => (0, (wa + wb) * vmax + wc * emax),
    };
    (lo..=hi).collect()
}

/// Backtracking search for a coloring of `g` satisfying `spec`. Branches are
/// ordered by (orientation, magic constant, first vertex color) and the first
/// successful branch in that order wins, independent of scheduling.
pub fn search(g: &Graph, spec: &ConstraintSpec, cfg: &SearchConfig) -> Result<SearchOutcome> {
    spec.validate()?;
    let q = g.q();
    if q > cfg.max_edges {
        return Err(Error::TooLarge(format!("{q} edges exceeds search bound {}", cfg.max_edges)));
    }
    if g.n() == 0 {
        return Ok(SearchOutcome::Exhausted);
    }
    let side = if spec.set_ordered {
        Some(set_ordered_sides(g)?)
    } else if spec.kd_ranges() {
        match two_coloring(g) {
            Some(s) => Some(s),
            None => return Ok(SearchOutcome::Exhausted),
        }
    } else {
        None
    };
    let order = search_order(g);
    let mut rank = vec![0; g.n()];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut back = vec![Vec::new(); g.n()];
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        let later = if rank[u] > rank[v] { u } else { v };
        back[later].push(i);
    }
    let emax = spec.max_edge(q);
    let bound = if spec.family.is_magic() { emax + spec.d * g.n() as i64 } else { emax };
    let orientations: Vec<bool> = if side.is_some() { vec![false, true] } else { vec![false] };

    let base = Ctx {
        g,
        spec,
        order,
        back,
        allowed: spec.edge_targets(q).into_iter().collect(),
        side,
        x_is: false,
        bound,
        constant: None,
        budget: cfg.budget,
    };
    let mut branches: Vec<(bool, Option<i64>, i64)> = Vec::new();
    for &xs in &orientations {
        let ctx = Ctx { x_is: xs, ..base.clone_shallow() };
        let firsts = ctx.domain(ctx.order[0]);
        let vmax = if spec.kd_ranges() { spec.k + spec.d * q as i64 } else { bound };
        let constants: Vec<Option<i64>> = if spec.family.is_magic() {
            constant_range(spec, q, vmax).into_iter().map(Some).collect()
        } else {
            vec![None]
        };
        for c in constants {
            for &f in &firsts {
                branches.push((xs, c, f));
            }
        }
    }

    const BATCH: usize = 64;
    let mut hit_budget = false;
    for chunk in branches.chunks(BATCH) {
        let results = par::map_range(cfg.exec, chunk.len(), |i| {
            let (xs, c, first) = chunk[i];
            let ctx = Ctx { x_is: xs, constant: c, ..base.clone_shallow() };
            let mut st = State {
                vc: vec![None; g.n()],
                ec: vec![None; q],
                used_e: BTreeMap::new(),
                used_all: BTreeMap::new(),
                nodes: 0,
            };
            ctx.dfs(&mut st, 0, first)
        });
        for r in results {
            match r {
                Step::Found(cg) => return Ok(SearchOutcome::Found(cg)),
                Step::Budget => hit_budget = true,
                Step::None => {}
            }
        }
    }
    Ok(if hit_budget { SearchOutcome::BudgetExhausted } else { SearchOutcome::Exhausted })
}

impl<'a> Ctx<'a> {
    fn clone_shallow(&self) -> Ctx<'a> {
        Ctx {
            g: self.g,
            spec: self.spec,
            order: self.order.clone(),
            back: self.back.clone(),
            allowed: self.allowed.clone(),
            side: self.side.clone(),
            x_is: self.x_is,
            bound: self.bound,
            constant: self.constant,
            budget: self.budget,
        }
    }
}

// ---------------------------------------------------------------------------
// Magic interconversion

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformReport {
    pub from: Family,
    pub to: Family,
    pub from_constant: i64,
    /// `to`-value of each edge computed directly from its colors.
    pub direct: Vec<i64>,
    /// The same values from the closed forms in `from_constant`.
    pub closed_form: Vec<i64>,
    pub values: BTreeSet<i64>,
    pub report: VerifyReport,
}

fn sgn(v: i64) -> i64 {
    if v >= 0 {
        1
    } else {
        -1
    }
}

/// Closed form of the `to` value of an edge with smaller end color `a`,
/// larger end color `b` and edge color `e`, in terms of the `from` constant.
fn closed_form(from: Family, to: Family, c: i64, a: i64, b: i64, e: i64) -> i64 {
    use Family::*;
    let delta = b - a;
    match (from, to) {
        (EdgeMagic, EdgeDifference) => c - 2 * a,
        (EdgeMagic, FelicitousDifference) => (c - 2 * e).abs(),
        (EdgeMagic, GracefulDifference) => (c - 2 * b).abs(),
        (EdgeDifference, EdgeMagic) => c + 2 * a,
        (EdgeDifference, FelicitousDifference) => (c - 2 * b).abs(),
        (EdgeDifference, GracefulDifference) => (c - 2 * e).abs(),
        (FelicitousDifference, _) => {
            let s = sgn(a + b - e);
            match to {
                EdgeMagic => s * c + 2 * e,
                EdgeDifference => 2 * b - s * c,
                _ => {
                    if s > 0 {
                        (c - 2 * a).abs()
                    } else {
                        c + 2 * a
                    }
                }
            }
        }
        (GracefulDifference, _) => {
            let t = sgn(delta - e);
            match to {
                EdgeMagic => {
                    if t > 0 {
                        (c - 2 * b).abs()
                    } else {
                        c + 2 * b
                    }
                }
                EdgeDifference => {
                    if t > 0 {
                        c + 2 * e
                    } else {
                        (c - 2 * e).abs()
                    }
                }
                _ => {
                    if t > 0 {
                        c + 2 * a
                    } else {
                        (2 * a - c).abs()
                    }
                }
            }
        }
        _ => unreachable!("checked by caller"),
    }
}

/// Re-read a magic coloring under another magic constraint, checking the
/// closed forms edge by edge.
pub fn magic_transform(g: &ColoredGraph, from: Family, to: Family) -> Result<TransformReport> {
    if !from.is_magic() || !to.is_magic() || from == to {
        return Err(Error::InvalidParam(format!("{from} -> {to} is not a magic conversion")));
    }
    let spec = ConstraintSpec { free: true, ..ConstraintSpec::new(from) };
    let rep = verify(g, &spec)?;
    if !rep.w_ok {
        return Err(Error::Hypothesis(format!("input is not a {from} coloring with a single constant")));
    }
    let c = rep.constant.unwrap_or(0);
    let ev = g.edge_colors()?;
    let to_spec = ConstraintSpec::new(to);
    let mut direct = Vec::new();
    let mut closed = Vec::new();
    let mut report = VerifyReport::new(rep.vertex_colors.clone(), rep.edge_colors.clone());
    for (i, &(u, v)) in g.graph.edges().iter().enumerate() {
        let (a, b) = (g.vcolors[u].min(g.vcolors[v]), g.vcolors[u].max(g.vcolors[v]));
        let dv = to_spec.magic_value(a, b, ev[i]).expect("magic");
        let cv = closed_form(from, to, c, a, b, ev[i]);
        if dv != cv {
            report.fail("CLOSED-FORM", format!("edge {i}: direct {dv}, closed form {cv}"));
        }
        direct.push(dv);
        closed.push(cv);
    }
    let values: BTreeSet<i64> = direct.iter().copied().collect();
    if values.len() == 1 {
        report.constant = values.first().copied();
    }
    Ok(TransformReport { from, to, from_constant: c, direct, closed_form: closed, values, report })
}

// ---------------------------------------------------------------------------
// Witnesses

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessKind {
    Ema,
    Edi,
    Fdi,
    Gdi,
}

impl WitnessKind {
    #[must_use]
    pub fn family(self) -> Family {
        match self {
            WitnessKind::Ema => Family::EdgeMagic,
            WitnessKind::Edi => Family::EdgeDifference,
            WitnessKind::Fdi => Family::FelicitousDifference,
            WitnessKind::Gdi => Family::GracefulDifference,
        }
    }

    /// Smallest `m` with a witness: distinct positive triples summing to `m`
    /// need `m >= 6`; the difference families have their own lower bounds.
    #[must_use]
    pub fn min_m(self) -> i64 {
        match self {
            WitnessKind::Ema => 6,
            WitnessKind::Edi | WitnessKind::Fdi => 5,
            WitnessKind::Gdi => 0,
        }
    }

    /// Spec the witness satisfies for constant `m`.
    #[must_use]
    pub fn spec(self, m: i64) -> ConstraintSpec {
        ConstraintSpec { free: true, proper: true, constant: Some(m), ..ConstraintSpec::new(self.family()) }
    }
}

impl FromStr for WitnessKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ema" => Ok(WitnessKind::Ema),
            "edi" => Ok(WitnessKind::Edi),
            "fdi" => Ok(WitnessKind::Fdi),
            "gdi" => Ok(WitnessKind::Gdi),
            other => Err(Error::Parse(format!("unknown witness kind {other:?}"))),
        }
    }
}

/// Connected graph with a proper total coloring by distinct positive triples
/// meeting the family's constraint with constant `m`.
pub fn construct_witness(m: i64, kind: WitnessKind) -> Result<ColoredGraph> {
    if m < kind.min_m() {
        return Err(Error::InvalidParam(format!("{kind:?} needs m >= {}", kind.min_m())));
    }
    let g = match kind {
        WitnessKind::Ema => ema_star(m)?,
        _ => small_witness(m, kind)?,
    };
    debug_assert!(verify(&g, &kind.spec(m)).map(|r| r.pass).unwrap_or(false));
    Ok(g)
}

/// Star `K_{1,m-4}` with `f(u)=1`, `f(uv_i)=i+1`, `f(v_i)=m-2-i`; the leaf with
/// `i+1 = m-2-i` would clash with its own edge and is left out.
fn ema_star(m: i64) -> Result<ColoredGraph> {
    let leaves: Vec<i64> = (1..=m - 4).filter(|&i| 2 * i != m - 3).collect();
    let n = leaves.len() + 1;
    let g = Graph::new(n, (1..n).map(|v| (0, v)).collect())?;
    let mut vc = vec![1];
    vc.extend(leaves.iter().map(|&i| m - 2 - i));
    let ec = leaves.iter().map(|&i| i + 1).collect();
    ColoredGraph::new(g, vc, Some(ec))
}

/// Lexicographically least coloring of the path `P_3` (two edges) found by
/// exhaustive search over `[1, 2m+3]`.
fn small_witness(m: i64, kind: WitnessKind) -> Result<ColoredGraph> {
    let spec = kind.spec(m);
    let g = Graph::path(3);
    let top = 2 * m + 3;
    let distinct = |a: i64, b: i64, c: i64| a != b && b != c && a != c && a > 0 && b > 0 && c > 0;
    for x in 1..=top {
        for y in 1..=top {
            for e1 in spec.magic_edges(x, y, m) {
                if !distinct(x, y, e1) {
                    continue;
                }
                for z in 1..=top {
                    for e2 in spec.magic_edges(y, z, m) {
                        if !distinct(y, z, e2) {
                            continue;
                        }
                        let cg = ColoredGraph::new(g.clone(), vec![x, y, z], Some(vec![e1, e2]))?;
                        if verify(&cg, &spec)?.pass {
                            return Ok(cg);
                        }
                    }
                }
            }
        }
    }
    Err(Error::InvalidParam(format!("no {kind:?} witness for m={m}")))
}

// ---------------------------------------------------------------------------
// Twin / image / dual pairings

fn odd_graceful_set_ordered() -> ConstraintSpec {
    ConstraintSpec { set_ordered: true, ..ConstraintSpec::labeling(Family::OddGraceful) }
}

/// `h = f + 1` on the vertices of a set-ordered odd-graceful tree.
pub fn twin_shift(t: &ColoredGraph) -> Result<ColoredGraph> {
    if !t.graph.is_tree() {
        return Err(Error::Hypothesis("twin shift needs a tree".into()));
    }
    let rep = verify(t, &odd_graceful_set_ordered())?;
    if !rep.pass {
        return Err(Error::Hypothesis("input is not a set-ordered odd-graceful labeling".into()));
    }
    let vc: Vec<i64> = t.vcolors.iter().map(|c| c + 1).collect();
    Ok(ColoredGraph::with_difference_edges(t.graph.clone(), vc))
}

#[must_use]
pub fn vertex_overlap(a: &ColoredGraph, b: &ColoredGraph) -> BTreeSet<i64> {
    let sa: BTreeSet<i64> = a.vcolors.iter().copied().collect();
    b.vcolors.iter().copied().filter(|c| sa.contains(c)).collect()
}

/// The five clauses of a twin odd-graceful pair `⟨f,h⟩` on one tree.
pub fn check_twin_odd_graceful(f: &ColoredGraph, h: &ColoredGraph) -> Result<VerifyReport> {
    same_shape(f, h)?;
    let q = f.graph.q() as i64;
    let odd: Vec<i64> = (0..q).map(|j| 2 * j + 1).collect();
    let fe = edge_values(f, &ConstraintSpec::new(Family::OddGraceful))?;
    let he = edge_values(h, &ConstraintSpec::new(Family::OddGraceful))?;
    let mut rep = VerifyReport::new(
        f.vcolors.iter().chain(&h.vcolors).copied().collect(),
        fe.iter().chain(&he).copied().collect(),
    );
    if !verify(f, &ConstraintSpec::labeling(Family::OddGraceful))?.pass {
        rep.fail("TWIN-1", "f is not an odd-graceful labeling");
    }
    let sorted = |v: &[i64]| {
        let mut s = v.to_vec();
        s.sort_unstable();
        s
    };
    let h_w = verify(h, &ConstraintSpec { free: true, ..ConstraintSpec::new(Family::OddGraceful) })?.w_ok;
    if !h_w || sorted(&he) != odd || sorted(&fe) != sorted(&he) {
        rep.fail("TWIN-2", "h does not induce [1,2q-1]^o");
    }
    if rep.vertex_colors.iter().any(|&c| c < 0 || c > 2 * q) {
        rep.fail("TWIN-3", "f(V) ∪ h(V) leaves [0,2q]");
    }
    let overlap = vertex_overlap(f, h);
    if overlap.len() > 1 {
        rep.fail("TWIN-4", format!("overlap {overlap:?} has more than one color"));
    }
    let hv: HashSet<i64> = h.vcolors.iter().copied().collect();
    let side = set_ordered_sides(&h.graph)?;
    if hv.len() != h.vcolors.len() || !is_set_ordered(&h.vcolors, &side) {
        rep.fail("TWIN-5", "h is not an injective set-ordered labeling");
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    V(usize),
    E(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairingKind {
    /// Both colorings satisfy the W constraint; edge color sets agree and
    /// all vertex colors lie in `[0, k+2qd]`.
    Twin(ConstraintSpec),
    VImage(i64),
    EImage(i64),
    SetDual { c: i64, mapping: Vec<(Element, Element)> },
    EdgeSeparable,
    EdgeUniform,
}

fn same_shape(a: &ColoredGraph, b: &ColoredGraph) -> Result<()> {
    if a.graph.n() != b.graph.n() || a.graph.q() != b.graph.q() {
        return Err(Error::LengthMismatch { left: a.graph.n() + a.graph.q(), right: b.graph.n() + b.graph.q() });
    }
    Ok(())
}

fn color_of(g: &ColoredGraph, el: Element) -> Result<i64> {
    match el {
        Element::V(v) => g
            .vcolors
            .get(v)
            .copied()
            .ok_or(Error::IndexOutOfRange { index: v as i64, order: g.vcolors.len() }),
        Element::E(i) => g
            .edge_colors()?
            .get(i)
            .copied()
            .ok_or(Error::IndexOutOfRange { index: i as i64, order: g.graph.q() }),
    }
}

pub fn check_pairing(a: &ColoredGraph, b: &ColoredGraph, kind: &PairingKind) -> Result<VerifyReport> {
    let all_v = |g: &ColoredGraph| g.vcolors.iter().copied().collect::<BTreeSet<i64>>();
    let all_e = |g: &ColoredGraph| g.ecolors.iter().flatten().copied().collect::<BTreeSet<i64>>();
    let mut rep = VerifyReport::new(
        all_v(a).union(&all_v(b)).copied().collect(),
        all_e(a).union(&all_e(b)).copied().collect(),
    );
    match kind {
        PairingKind::Twin(spec) => {
            if a.graph.q() != b.graph.q() {
                return Err(Error::LengthMismatch { left: a.graph.q(), right: b.graph.q() });
            }
            if !verify(a, spec)?.pass {
                rep.fail("TWIN-A", format!("first coloring fails {spec}"));
            }
            let relaxed = ConstraintSpec { labeling: false, free: true, constant: None, ..spec.clone() };
            if !verify(b, &relaxed)?.pass {
                rep.fail("TWIN-B", format!("second coloring fails the {} relation", spec.family));
            }
            let (ea, eb) = (edge_values(a, spec)?, edge_values(b, spec)?);
            let (sa, sb): (BTreeSet<i64>, BTreeSet<i64>) = (ea.into_iter().collect(), eb.into_iter().collect());
            if sa != sb {
                rep.fail("TWIN-E", "edge color sets differ");
            }
            let top = spec.k + 2 * a.graph.q() as i64 * spec.d;
            if rep.vertex_colors.iter().any(|&c| c < 0 || c > top) {
                rep.fail("TWIN-V", format!("vertex colors leave [0,{top}]"));
            }
        }
        PairingKind::VImage(kv) => {
            same_shape(a, b)?;
            if let Some(v) = (0..a.graph.n()).find(|&v| a.vcolors[v] + b.vcolors[v] != *kv) {
                rep.fail("V-IMAGE", format!("vertex {v} sums to {}", a.vcolors[v] + b.vcolors[v]));
            }
        }
        PairingKind::EImage(ke) => {
            same_shape(a, b)?;
            let (ea, eb) = (a.edge_colors()?, b.edge_colors()?);
            if let Some(i) = (0..ea.len()).find(|&i| ea[i] + eb[i] != *ke) {
                rep.fail("E-IMAGE", format!("edge {i} sums to {}", ea[i] + eb[i]));
            }
        }
        PairingKind::SetDual { c, mapping } => {
            if mapping.is_empty() {
                return Err(Error::InvalidParam("set-dual mapping is empty".into()));
            }
            for &(x, y) in mapping {
                let s = color_of(a, x)? + color_of(b, y)?;
                if s != *c {
                    rep.fail("SET-DUAL", format!("{x:?} -> {y:?} sums to {s}, expected {c}"));
                }
            }
        }
        PairingKind::EdgeSeparable | PairingKind::EdgeUniform => {
            let (ea, eb) = (all_e(a), all_e(b));
            if all_v(a) == all_v(b) {
                rep.fail("VERTEX-SETS", "vertex color sets coincide");
            }
            if matches!(kind, PairingKind::EdgeSeparable) {
                if !ea.is_disjoint(&eb) {
                    rep.fail("EDGE-SEPARABLE", "edge color sets intersect");
                }
            } else if ea != eb {
                rep.fail("EDGE-UNIFORM", "edge color sets differ");
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Indexed colors

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexedColor {
    pub base: i64,
    pub index: i64,
}

impl IndexedColor {
    #[must_use]
    pub fn new(base: i64, index: i64) -> Self {
        Self { base, index }
    }
}

impl fmt::Display for IndexedColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.base, self.index)
    }
}

impl FromStr for IndexedColor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (b, i) = s.split_once('_').ok_or_else(|| Error::Parse(format!("expected base_index, got {s:?}")))?;
        let p = |t: &str| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad indexed color {s:?}")));
        let c = Self::new(p(b)?, p(i)?);
        if c.base < 0 {
            return Err(Error::InvalidParam("indexed color base must be non-negative".into()));
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexedOp {
    Add,
    Mul,
    Sub,
    KleinAdd,
    KleinMul,
}

impl FromStr for IndexedOp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "add" => Ok(IndexedOp::Add),
            "mul" => Ok(IndexedOp::Mul),
            "sub" => Ok(IndexedOp::Sub),
            "klein-add" => Ok(IndexedOp::KleinAdd),
            "klein-mul" => Ok(IndexedOp::KleinMul),
            other => Err(Error::Parse(format!("unknown indexed op {other:?}"))),
        }
    }
}

/// Klein four-group addition on `{1,2,3,4}` standing for `{0,a,b,c}`.
pub const KLEIN_ADD: [[i64; 4]; 4] = [[1, 2, 3, 4], [2, 1, 4, 3], [3, 4, 1, 2], [4, 3, 2, 1]];
/// Multiplication of the four-element field on the same symbols.
pub const KLEIN_MUL: [[i64; 4]; 4] = [[1, 1, 1, 1], [1, 2, 3, 4], [1, 3, 4, 2], [1, 4, 2, 3]];

pub fn indexed_op(x: IndexedColor, y: IndexedColor, op: IndexedOp) -> Result<IndexedColor> {
    let klein = |t: &[[i64; 4]; 4]| -> Result<i64> {
        let ok = |b: i64| (1..=4).contains(&b);
        if !ok(x.base) || !ok(y.base) {
            return Err(Error::InvalidParam(format!("Klein bases must lie in [1,4], got {} and {}", x.base, y.base)));
        }
        Ok(t[(x.base - 1) as usize][(y.base - 1) as usize])
    };
    Ok(match op {
        IndexedOp::Add => IndexedColor::new(x.base + y.base, x.index + y.index),
        IndexedOp::Mul => IndexedColor::new(x.base * y.base, x.index * y.index),
        IndexedOp::Sub => IndexedColor::new((x.base - y.base).abs(), (x.index - y.index).abs()),
        IndexedOp::KleinAdd => IndexedColor::new(klein(&KLEIN_ADD)?, x.index + y.index),
        IndexedOp::KleinMul => IndexedColor::new(klein(&KLEIN_MUL)?, x.index * y.index),
    })
}

// ---------------------------------------------------------------------------
// String colorings

/// Coloring whose values are ordered tuples of component colors; a value's
/// string form concatenates the components' decimal digits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StringColoring {
    pub graph: Graph,
    pub vcolors: Vec<Vec<i64>>,
    pub ecolors: Vec<Vec<i64>>,
}

impl StringColoring {
    #[must_use]
    pub fn width(&self) -> usize {
        self.vcolors.first().map_or(0, Vec::len)
    }

    #[must_use]
    pub fn render(parts: &[i64]) -> String {
        parts.iter().map(i64::to_string).collect()
    }

    #[must_use]
    pub fn vertex_string(&self, v: usize) -> String {
        Self::render(&self.vcolors[v])
    }

    #[must_use]
    pub fn edge_string(&self, i: usize) -> String {
        Self::render(&self.ecolors[i])
    }

    /// Component `i` as an ordinary coloring.
    #[must_use]
    pub fn component(&self, i: usize) -> ColoredGraph {
        ColoredGraph {
            graph: self.graph.clone(),
            vcolors: self.vcolors.iter().map(|c| c[i]).collect(),
            ecolors: Some(self.ecolors.iter().map(|c| c[i]).collect()),
        }
    }
}

/// Position-wise concatenation of colorings of one graph.
pub fn compose_string_coloring(g: &Graph, colorings: &[ColoredGraph]) -> Result<StringColoring> {
    if colorings.is_empty() {
        return Err(Error::InvalidParam("need at least one component coloring".into()));
    }
    let mut vcolors = vec![Vec::with_capacity(colorings.len()); g.n()];
    let mut ecolors = vec![Vec::with_capacity(colorings.len()); g.q()];
    for c in colorings {
        if c.graph != *g {
            return Err(Error::InvalidGraph("component coloring is on a different graph".into()));
        }
        let ev = c.edge_colors()?;
        for (slot, &x) in vcolors.iter_mut().zip(&c.vcolors) {
            slot.push(x);
        }
        for (slot, &x) in ecolors.iter_mut().zip(ev) {
            slot.push(x);
        }
    }
    Ok(StringColoring { graph: g.clone(), vcolors, ecolors })
}

/// Verify each position against its own spec; the aggregate also records
/// whether the string values form a proper total coloring.
pub fn verify_string(s: &StringColoring, specs: &[ConstraintSpec]) -> Result<(Vec<VerifyReport>, bool)> {
    if specs.len() != s.width() {
        return Err(Error::LengthMismatch { left: specs.len(), right: s.width() });
    }
    let reports = specs.iter().enumerate().map(|(i, sp)| verify(&s.component(i), sp)).collect::<Result<Vec<_>>>()?;
    let proper = {
        let mut ok = true;
        let adj_pairs = s.graph.edges();
        for (i, &(u, v)) in adj_pairs.iter().enumerate() {
            ok &= s.vcolors[u] != s.vcolors[v] && s.ecolors[i] != s.vcolors[u] && s.ecolors[i] != s.vcolors[v];
        }
        for v in 0..s.graph.n() {
            let inc: Vec<&Vec<i64>> = adj_pairs
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| a == v || b == v)
                .map(|(i, _)| &s.ecolors[i])
                .collect();
            let uniq: BTreeSet<&Vec<i64>> = inc.iter().copied().collect();
            ok &= uniq.len() == inc.len();
        }
        ok
    };
    Ok((reports, proper))
}

// ---------------------------------------------------------------------------
// Set labelings

/// Vertex sets are prefixes `[1,k]` (stored as `k`); edge sets are the
/// intersections of their ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RainbowSetLabeling {
    pub vertex_sets: Vec<usize>,
    pub edge_sets: Vec<usize>,
}

impl RainbowSetLabeling {
    #[must_use]
    pub fn set(k: usize) -> BTreeSet<usize> {
        (1..=k).collect()
    }

    /// Distinct vertex sets and edge set = intersection of end sets.
    #[must_use]
    pub fn is_valid(&self, t: &Graph) -> bool {
        let uniq: BTreeSet<usize> = self.vertex_sets.iter().copied().collect();
        uniq.len() == self.vertex_sets.len()
            && t.edges().iter().enumerate().all(|(i, &(u, v))| {
                let inter: BTreeSet<usize> =
                    Self::set(self.vertex_sets[u]).intersection(&Self::set(self.vertex_sets[v])).copied().collect();
                inter == Self::set(self.edge_sets[i])
            })
    }
}

/// Root at the last vertex and hand out `[1,p]`, `[1,p-1]`, … in BFS order, so
/// every edge gets the set of its child and the `q` edge sets are distinct.
pub fn rainbow_set_labeling(t: &Graph) -> Result<RainbowSetLabeling> {
    if !t.is_tree() {
        return Err(Error::InvalidGraph("rainbow set-labeling needs a tree".into()));
    }
    let n = t.n();
    let adj = t.adjacency();
    let mut label = vec![0usize; n];
    let mut next = n;
    let mut queue = std::collections::VecDeque::from([n - 1]);
    label[n - 1] = next;
    while let Some(u) = queue.pop_front() {
        let mut nb = adj[u].clone();
        nb.sort_unstable();
        for v in nb {
            if label[v] == 0 {
                next -= 1;
                label[v] = next;
                queue.push_back(v);
            }
        }
    }
    let edge_sets = t.edges().iter().map(|&(u, v)| label[u].min(label[v])).collect();
    Ok(RainbowSetLabeling { vertex_sets: label, edge_sets })
}

// ---------------------------------------------------------------------------
// Lifts of set-ordered graceful labelings

/// Turn a set-ordered graceful labeling `θ` of a bipartite graph into a
/// (k,d)-total coloring of the requested family.
pub fn lift_graceful(t: &ColoredGraph, family: Family, k: i64, d: i64) -> Result<ColoredGraph> {
    let spec = ConstraintSpec { set_ordered: true, ..ConstraintSpec::labeling(Family::Graceful) };
    if !verify(t, &spec)?.pass {
        return Err(Error::Hypothesis("input is not a set-ordered graceful labeling".into()));
    }
    ConstraintSpec { k, d, ..ConstraintSpec::new(family) }.validate()?;
    let g = &t.graph;
    let th = &t.vcolors;
    let q = g.q() as i64;
    let side = set_ordered_sides(g)?;
    let zero = th.iter().position(|&c| c == 0).expect("graceful labeling uses 0");
    let on_x: Vec<bool> = side.iter().map(|&s| s == side[zero]).collect();
    let s = (0..g.n()).filter(|&v| on_x[v]).map(|v| th[v]).max().unwrap_or(0);
    let theta_e: Vec<i64> = g.edges().iter().map(|&(u, v)| (th[u] - th[v]).abs()).collect();

    let graceful_v = |v: usize| if on_x[v] { d * th[v] } else { k + d * (th[v] - 1) };
    let reflected_v = |v: usize| if on_x[v] { d * th[v] } else { k + d * (s + q - th[v]) };
    let up = |e: i64| k + d * (e - 1);
    let down = |e: i64| k + d * (q - e);

    let (vc, ec): (Vec<i64>, Vec<i64>) = match family {
        Family::Graceful | Family::GracefulDifference => {
            ((0..g.n()).map(graceful_v).collect(), theta_e.iter().map(|&e| up(e)).collect())
        }
        Family::EdgeMagic => ((0..g.n()).map(reflected_v).collect(), theta_e.iter().map(|&e| up(e)).collect()),
        Family::EdgeDifference => ((0..g.n()).map(graceful_v).collect(), theta_e.iter().map(|&e| down(e)).collect()),
        Family::FelicitousDifference => {
            ((0..g.n()).map(reflected_v).collect(), theta_e.iter().map(|&e| down(e)).collect())
        }
        other => return Err(Error::InvalidParam(format!("no lift to {other}"))),
    };
    ColoredGraph::new(g.clone(), vc, Some(ec))
}

/// Constant of the lifted coloring (`s` = max color on the 0 side).
#[must_use]
pub fn lifted_constant(family: Family, k: i64, d: i64, q: i64, s: i64) -> Option<i64> {
    match family {
        Family::EdgeMagic => Some(2 * k + d * (s + q - 1)),
        Family::EdgeDifference => Some(2 * k + d * (q - 1)),
        Family::GracefulDifference => Some(0),
        Family::FelicitousDifference => Some(d * s),
        _ => None,
    }
}

/// `(abc)`-edge-magic lift: with `x` the first end of every edge,
/// `F(x) = d f(x)`, `F(y) = k + d f(y)`, `F(xy) = k + d f(xy)`; the constant
/// becomes `dλ + (b+c)k`.
pub fn lift_abc_edge_magic(g: &ColoredGraph, abc: (i64, i64, i64), k: i64, d: i64) -> Result<(ColoredGraph, i64)> {
    let spec = ConstraintSpec { free: true, abc: Some(abc), ..ConstraintSpec::new(Family::EdgeMagic) };
    let rep = verify(g, &spec)?;
    if !rep.w_ok {
        return Err(Error::Hypothesis("input is not (abc)-edge-magic".into()));
    }
    let mut first = vec![None; g.graph.n()];
    for &(u, v) in g.graph.edges() {
        for (w, is_x) in [(u, true), (v, false)] {
            match first[w] {
                None => first[w] = Some(is_x),
                Some(t) if t != is_x => {
                    return Err(Error::Hypothesis(format!("vertex {w} is first end of one edge and second of another")))
                }
                Some(_) => {}
            }
        }
    }
    let vc = (0..g.graph.n())
        .map(|w| if first[w] == Some(false) { k + d * g.vcolors[w] } else { d * g.vcolors[w] })
        .collect();
    let ec = g.edge_colors()?.iter().map(|&e| k + d * e).collect();
    let lambda = rep.constant.unwrap_or(0);
    Ok((ColoredGraph::new(g.graph.clone(), vc, Some(ec))?, d * lambda + (abc.1 + abc.2) * k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> ConstraintSpec {
        s.parse().unwrap()
    }

    fn example1_g() -> ColoredGraph {
        ColoredGraph::from_color_triples(&[1, 1, 1, 3, 3], &[4, 2, 1, 2, 1], &[5, 3, 2, 5, 4]).unwrap()
    }

    #[test]
    fn spec_text_roundtrip() {
        let s = spec("graceful;set-ordered;k=1;d=2;labeling");
        assert!(s.set_ordered && s.labeling);
        assert_eq!((s.k, s.d), (1, 2));
        assert_eq!(s.to_string(), "graceful;set-ordered;k=1;d=2;labeling");
        assert_eq!(spec(&s.to_string()), s);
        assert!("graceful;d=0".parse::<ConstraintSpec>().is_err());
        assert!("k=2".parse::<ConstraintSpec>().is_err());
        assert!("edge-magic;abc=1,0,1".parse::<ConstraintSpec>().is_err());
    }

    #[test]
    fn example1_graceful_relation_but_not_labeling() {
        let g = example1_g();
        let r = verify(&g, &spec("graceful;labeling")).unwrap();
        assert!(r.w_ok);
        assert!(!r.pass);
        assert!(r.violated("C-4"));
        assert!(verify(&g, &spec("graceful;free")).unwrap().pass);
    }

    #[test]
    fn star_edge_magic() {
        let w = construct_witness(10, WitnessKind::Ema).unwrap();
        assert_eq!(w.graph.q(), 6);
        assert_eq!(w.vcolors, vec![1, 7, 6, 5, 4, 3, 2]);
        let r = verify(&w, &spec("edge-magic;k=2")).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.constant, Some(10));
        assert!(verify(&w, &WitnessKind::Ema.spec(10)).unwrap().pass);
        assert!(!verify(&w, &spec("edge-magic;k=2;c=11")).unwrap().pass);
    }

    #[test]
    fn p4_graceful() {
        let g = ColoredGraph::with_difference_edges(Graph::path(4), vec![0, 3, 1, 2]);
        let r = verify(&g, &spec("graceful;labeling")).unwrap();
        assert!(r.pass);
        assert_eq!(r.edge_colors, BTreeSet::from([1, 2, 3]));
    }

    #[test]
    fn brute_force_p4_graceful_count() {
        let mut count = 0;
        for perm in itertools::Itertools::permutations(0..4i64, 4) {
            let g = ColoredGraph::with_difference_edges(Graph::path(4), perm);
            count += usize::from(verify(&g, &spec("graceful;labeling")).unwrap().pass);
        }
        // 0312, 2130 and their complements/reversals.
        assert_eq!(count, 4);
    }

    #[test]
    fn set_ordered_needs_bipartite() {
        let g = ColoredGraph::with_difference_edges(Graph::cycle(3), vec![0, 1, 3]);
        assert!(verify(&g, &spec("graceful;set-ordered;labeling")).is_err());
        assert!(verify(&g, &spec("graceful;labeling")).unwrap().pass);
    }

    #[test]
    fn magic_needs_edge_colors() {
        let g = ColoredGraph::new(Graph::path(2), vec![0, 1], None).unwrap();
        assert!(matches!(verify(&g, &spec("edge-magic")), Err(Error::MissingColor(_))));
    }

    #[test]
    fn search_small_cases() {
        let cfg = SearchConfig::default();
        let k2 = search(&Graph::path(2), &spec("graceful;labeling"), &cfg).unwrap().found().unwrap();
        assert_eq!(k2.vcolors, vec![0, 1]);
        assert_eq!(k2.ecolors, Some(vec![1]));
        let c5 = search(&Graph::cycle(5), &spec("odd-graceful;labeling"), &cfg).unwrap();
        assert_eq!(c5, SearchOutcome::Exhausted);
        let tiny = SearchConfig { budget: 3, ..cfg };
        assert_eq!(
            search(&Graph::star(8), &spec("graceful;labeling;strongly"), &tiny).unwrap(),
            SearchOutcome::BudgetExhausted
        );
        assert!(search(&Graph::path(16), &spec("graceful"), &cfg).is_err());
    }

    #[test]
    fn search_is_schedule_independent() {
        let t = Graph::new(7, vec![(0, 1), (1, 2), (1, 3), (3, 4), (3, 5), (5, 6)]).unwrap();
        for fam in Family::ALL {
            let s = ConstraintSpec::new(fam);
            let a = search(&t, &s, &SearchConfig { exec: Exec::Sequential, budget: 20_000, ..Default::default() });
            let b = search(&t, &s, &SearchConfig { exec: Exec::Auto, budget: 20_000, ..Default::default() });
            assert_eq!(a.unwrap(), b.unwrap(), "{fam}");
        }
    }

    #[test]
    fn budget_parsing() {
        assert_eq!(parse_budget("500k").unwrap(), 500_000);
        assert_eq!(parse_budget("2m").unwrap(), 2_000_000);
        assert!(parse_budget("x").is_err());
        assert!(parse_budget("0").is_err());
    }

    #[test]
    fn transform_star_to_edge_difference() {
        let w = construct_witness(10, WitnessKind::Ema).unwrap();
        let t = magic_transform(&w, Family::EdgeMagic, Family::EdgeDifference).unwrap();
        assert_eq!(t.from_constant, 10);
        assert_eq!(t.values, BTreeSet::from([8]));
        assert!(t.report.pass);
        assert_eq!(t.report.constant, Some(8));
    }

    #[test]
    fn transform_closed_forms_all_pairs() {
        // A hand-made felicitous-difference coloring with a + b < e on one edge.
        let g = Graph::path(3);
        let fd = ColoredGraph::new(g, vec![1, 2, 9], Some(vec![7, 15])).unwrap();
        let r = verify(&fd, &spec("felicitous-difference;free")).unwrap();
        assert_eq!(r.constant, Some(4));
        let t = magic_transform(&fd, Family::FelicitousDifference, Family::EdgeMagic).unwrap();
        assert_eq!(t.direct, vec![10, 26]);
        assert_eq!(t.direct[0], (4 - 2 * 7i64).abs());
        assert!(t.report.pass);
        for from in Family::MAGIC {
            for to in Family::MAGIC {
                if from == to {
                    continue;
                }
                let src = lift_graceful(&set_ordered_p4(), from, 1, 1).unwrap();
                let t = magic_transform(&src, from, to).unwrap();
                assert!(t.report.pass, "{from} -> {to}: {:?}", t.report);
            }
        }
    }

    #[test]
    fn graceful_difference_zero_case() {
        let src = lift_graceful(&set_ordered_p4(), Family::GracefulDifference, 1, 1).unwrap();
        let t = magic_transform(&src, Family::GracefulDifference, Family::EdgeMagic).unwrap();
        assert_eq!(t.from_constant, 0);
        assert!(t.report.pass);
    }

    #[test]
    fn transform_rejects_non_constant() {
        let g = ColoredGraph::new(Graph::path(3), vec![1, 2, 9], Some(vec![7, 6])).unwrap();
        assert!(matches!(
            magic_transform(&g, Family::EdgeMagic, Family::EdgeDifference),
            Err(Error::Hypothesis(_))
        ));
    }

    fn set_ordered_p4() -> ColoredGraph {
        // 0-3-1-2: X = {0,1}, Y = {3,2}.
        ColoredGraph::with_difference_edges(Graph::path(4), vec![0, 3, 1, 2])
    }

    #[test]
    fn lifts_pass_at_kd() {
        let t = set_ordered_p4();
        for (k, d) in [(1, 1), (0, 2), (3, 2), (2, 3)] {
            for fam in [Family::Graceful, Family::EdgeMagic, Family::EdgeDifference, Family::GracefulDifference, Family::FelicitousDifference] {
                let l = lift_graceful(&t, fam, k, d).unwrap();
                let s = ConstraintSpec { k, d, ..ConstraintSpec::new(fam) };
                let r = verify(&l, &s).unwrap();
                assert!(r.pass, "{fam} at ({k},{d}): {r:?}");
                if let Some(c) = lifted_constant(fam, k, d, 3, 1) {
                    assert_eq!(r.constant, Some(c));
                }
            }
        }
    }

    #[test]
    fn abc_lift_constant() {
        // 2*1 + 3*4 + 1*e = 20 with x = first ends.
        let g = Graph::new(3, vec![(0, 1), (0, 2)]).unwrap();
        let cg = ColoredGraph::new(g, vec![1, 4, 5], Some(vec![6, 3])).unwrap();
        let (l, c) = lift_abc_edge_magic(&cg, (2, 3, 1), 2, 3).unwrap();
        assert_eq!(c, 3 * 20 + 4 * 2);
        let s = ConstraintSpec { free: true, abc: Some((2, 3, 1)), ..ConstraintSpec::new(Family::EdgeMagic) };
        let r = verify(&l, &s).unwrap();
        assert!(r.pass);
        assert_eq!(r.constant, Some(c));
    }

    #[test]
    fn witnesses() {
        assert!(construct_witness(5, WitnessKind::Ema).is_err());
        for m in 6..=14 {
            let w = construct_witness(m, WitnessKind::Ema).unwrap();
            assert!(w.graph.is_connected());
            assert!(w.graph.max_degree() as i64 <= m - 4);
            assert!(verify(&w, &WitnessKind::Ema.spec(m)).unwrap().pass);
        }
        let w7 = construct_witness(7, WitnessKind::Ema).unwrap();
        assert!(w7.graph.max_degree() as i64 <= 7 - 5);
        for kind in [WitnessKind::Edi, WitnessKind::Fdi, WitnessKind::Gdi] {
            for m in kind.min_m()..=kind.min_m() + 6 {
                let w = construct_witness(m, kind).unwrap();
                let r = verify(&w, &kind.spec(m)).unwrap();
                assert!(r.pass, "{kind:?} {m}");
                for (i, &(u, v)) in w.graph.edges().iter().enumerate() {
                    let t = BTreeSet::from([w.vcolors[u], w.vcolors[v], w.ecolors.as_ref().unwrap()[i]]);
                    assert_eq!(t.len(), 3);
                    assert!(t.iter().all(|&c| c > 0));
                }
            }
        }
        assert!(construct_witness(4, WitnessKind::Edi).is_err());
    }

    #[test]
    fn twin_examples() {
        let f = ColoredGraph::with_difference_edges(Graph::path(3), vec![0, 3, 2]);
        let h = twin_shift(&f).unwrap();
        assert_eq!(h.vcolors, vec![1, 4, 3]);
        assert_eq!(vertex_overlap(&f, &h), BTreeSet::from([3]));
        assert!(check_twin_odd_graceful(&f, &h).unwrap().pass);
        let twin = PairingKind::Twin(ConstraintSpec::labeling(Family::OddGraceful));
        assert!(check_pairing(&f, &h, &twin).unwrap().pass);

        let e = ColoredGraph::with_difference_edges(Graph::path(2), vec![0, 1]);
        let he = twin_shift(&e).unwrap();
        assert_eq!(he.vcolors, vec![1, 2]);
        assert_eq!(vertex_overlap(&e, &he), BTreeSet::from([1]));

        let not = ColoredGraph::with_difference_edges(Graph::path(3), vec![0, 1, 3]);
        assert!(twin_shift(&not).is_err());
    }

    #[test]
    fn image_and_dual_pairings() {
        let f = set_ordered_p4();
        let p = f.graph.n() as i64;
        let g = ColoredGraph::with_difference_edges(f.graph.clone(), f.vcolors.iter().map(|c| p - 1 - c).collect());
        assert!(verify(&g, &spec("graceful;labeling;set-ordered")).unwrap().pass);
        assert!(check_pairing(&f, &g, &PairingKind::VImage(p - 1)).unwrap().pass);
        assert!(!check_pairing(&f, &g, &PairingKind::VImage(p)).unwrap().pass);
        let dual = PairingKind::SetDual { c: 2 * f.vcolors[1], mapping: vec![(Element::V(1), Element::V(1))] };
        assert!(check_pairing(&f, &f, &dual).unwrap().pass);
        let ke = PairingKind::EImage(4);
        let e2 = ColoredGraph::new(f.graph.clone(), f.vcolors.clone(), Some(vec![1, 2, 3])).unwrap();
        assert!(check_pairing(&f, &e2, &ke).unwrap().pass);
        assert!(check_pairing(&f, &ColoredGraph::with_difference_edges(Graph::path(3), vec![0, 1, 2]), &ke).is_err());
    }

    #[test]
    fn separable_and_uniform() {
        let a = ColoredGraph::with_difference_edges(Graph::path(3), vec![0, 3, 2]);
        let b = ColoredGraph::with_difference_edges(Graph::path(3), vec![1, 4, 3]);
        assert!(check_pairing(&a, &b, &PairingKind::EdgeUniform).unwrap().pass);
        assert!(!check_pairing(&a, &b, &PairingKind::EdgeSeparable).unwrap().pass);
        let c = ColoredGraph::with_difference_edges(Graph::path(3), vec![0, 2, 6]);
        assert!(check_pairing(&a, &c, &PairingKind::EdgeSeparable).unwrap().pass);
    }

    #[test]
    fn indexed_ops() {
        let c = |s: &str| s.parse::<IndexedColor>().unwrap();
        assert_eq!(indexed_op(c("2_3"), c("3_4"), IndexedOp::Add).unwrap(), c("5_7"));
        assert_eq!(indexed_op(c("2_5"), c("3_2"), IndexedOp::KleinAdd).unwrap(), c("4_7"));
        assert_eq!(indexed_op(c("3_2"), c("4_3"), IndexedOp::KleinMul).unwrap(), c("2_6"));
        assert_eq!(indexed_op(c("2_3"), c("5_7"), IndexedOp::Sub).unwrap(), c("3_4"));
        assert_eq!(indexed_op(c("2_3"), c("5_7"), IndexedOp::Mul).unwrap(), c("10_21"));
        assert!(indexed_op(c("5_1"), c("1_1"), IndexedOp::KleinAdd).is_err());
        assert!("-1_2".parse::<IndexedColor>().is_err());
    }

    #[test]
    fn klein_tables_are_a_field() {
        for a in 0..4 {
            assert_eq!(KLEIN_ADD[0][a], a as i64 + 1);
            assert_eq!(KLEIN_ADD[a][a], 1);
            for b in 0..4 {
                assert_eq!(KLEIN_ADD[a][b], KLEIN_ADD[b][a]);
                assert_eq!(KLEIN_MUL[a][b], KLEIN_MUL[b][a]);
                for c in 0..4 {
                    let (ab, ac) = (KLEIN_MUL[a][b] - 1, KLEIN_MUL[a][c] - 1);
                    let lhs = KLEIN_MUL[a][(KLEIN_ADD[b][c] - 1) as usize];
                    assert_eq!(lhs, KLEIN_ADD[ab as usize][ac as usize]);
                }
            }
        }
    }

    #[test]
    fn string_colorings() {
        let cfg = SearchConfig::default();
        let g = Graph::path(4);
        let f1 = search(&g, &spec("graceful;labeling"), &cfg).unwrap().found().unwrap();
        let f2 = ColoredGraph::with_difference_edges(g.clone(), vec![3, 0, 2, 1]);
        let s1 = compose_string_coloring(&g, std::slice::from_ref(&f1)).unwrap();
        assert_eq!(s1.component(0), f1);
        let s = compose_string_coloring(&g, &[f1.clone(), f2.clone()]).unwrap();
        let specs = vec![spec("graceful;labeling"); 2];
        let (reps, proper) = verify_string(&s, &specs).unwrap();
        assert!(reps.iter().all(|r| r.pass));
        let any_proper = (0..2).any(|i| verify(&s.component(i), &spec("graceful;free;proper")).unwrap().pass);
        assert!(!any_proper || proper);
        assert!(compose_string_coloring(&g, &[]).is_err());

        let labels = [vec![0, 3, 1, 2], vec![3, 0, 2, 1], vec![1, 2, 0, 3]];
        let parts: Vec<ColoredGraph> =
            labels.into_iter().map(|l| ColoredGraph::with_difference_edges(g.clone(), l)).collect();
        let mut seen = BTreeSet::new();
        for p in itertools::Itertools::permutations(0..3usize, 3) {
            let cs: Vec<ColoredGraph> = p.iter().map(|&i| parts[i].clone()).collect();
            let sc = compose_string_coloring(&g, &cs).unwrap();
            seen.insert((0..4).map(|v| sc.vertex_string(v)).collect::<Vec<_>>());
        }
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn rainbow() {
        let k2 = rainbow_set_labeling(&Graph::path(2)).unwrap();
        assert_eq!(k2.vertex_sets, vec![1, 2]);
        assert_eq!(k2.edge_sets, vec![1]);
        let p3 = rainbow_set_labeling(&Graph::path(3)).unwrap();
        assert_eq!(p3.vertex_sets, vec![1, 2, 3]);
        assert!(p3.is_valid(&Graph::path(3)));
        assert!(rainbow_set_labeling(&Graph::cycle(4)).is_err());
    }

    #[test]
    fn strongly_graceful() {
        // P_4 = 0-3-1-2 has matching {0-3, 1-2}: sums 3 = q.
        let r = verify(&set_ordered_p4(), &spec("graceful;labeling;strongly")).unwrap();
        assert!(r.pass, "{r:?}");
        let p3 = ColoredGraph::with_difference_edges(Graph::path(3), vec![0, 2, 1]);
        assert!(verify(&p3, &spec("graceful;labeling;strongly")).unwrap().violated("C-7"));
    }

    #[test]
    fn harmonious_and_elegant_relations() {
        let s = spec("harmonious;k=0;labeling");
        // classic harmonious on a tree repeats one label: P_3 with 0,1,1.
        let g = ColoredGraph::new(Graph::path(3), vec![0, 1, 1], None).unwrap();
        let r = verify(&g, &s).unwrap();
        assert_eq!(r.edge_colors, BTreeSet::from([0, 1]));
        assert!(r.w_ok);
        let oe = spec("odd-elegant;labeling");
        let g = ColoredGraph::new(Graph::path(3), vec![0, 1, 2], None).unwrap();
        assert_eq!(verify(&g, &oe).unwrap().edge_colors, BTreeSet::from([1, 3]));
    }
}
