//! Simple undirected graphs, the split/coincide/join operations, complete-graph
//! tree decompositions, spanning-tree enumeration and colored homomorphisms.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{Display, Write as _};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Exec};

pub type Edge = (usize, usize);

#[inline]
#[must_use]
pub fn norm(e: Edge) -> Edge {
    if e.0 <= e.1 {
        e
    } else {
        (e.1, e.0)
    }
}

/// Simple undirected graph on vertices `0..n`. Edge orientation and order are
/// kept as given because Topcode columns depend on them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge {u}-{v} outside 0..{n}")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at {u}")));
            }
            if !seen.insert(norm((u, v))) {
                return Err(Error::InvalidGraph(format!("multi-edge {u}-{v}")));
            }
        }
        Ok(Self { n, edges })
    }

    #[must_use]
    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    #[must_use]
    pub fn complete(n: usize) -> Self {
        Self { n, edges: (0..n).tuple_combinations().collect() }
    }

    /// `K_{a,b}` with parts `0..a` and `a..a+b`.
    #[must_use]
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        Self { n: a + b, edges: (0..a).cartesian_product(a..a + b).collect() }
    }

    #[must_use]
    pub fn path(n: usize) -> Self {
        Self { n, edges: (1..n).map(|i| (i - 1, i)).collect() }
    }

    #[must_use]
    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n >= 3 {
            g.edges.push((n - 1, 0));
        }
        g
    }

    /// `K_{1,k}` centred at vertex 0.
    #[must_use]
    pub fn star(k: usize) -> Self {
        Self { n: k + 1, edges: (1..=k).map(|i| (0, i)).collect() }
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn q(&self) -> usize {
        self.edges.len()
    }

    #[must_use]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[must_use]
    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges.iter().map(|&e| norm(e)).collect()
    }

    #[must_use]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let e = norm((u, v));
        self.edges.iter().any(|&f| norm(f) == e)
    }

    #[must_use]
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let e = norm((u, v));
        self.edges.iter().position(|&f| norm(f) == e)
    }

    #[must_use]
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    #[must_use]
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    #[must_use]
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    #[must_use]
    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    #[must_use]
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut uf = UnionFind::new(self.n);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        uf.components() == 1
    }

    #[must_use]
    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.q() + 1 == self.n && self.is_connected()
    }

    /// Two-colouring of a connected bipartite graph; side of vertex 0 is `false`.
    #[must_use]
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        if !self.is_connected() {
            return None;
        }
        let adj = self.adjacency();
        let mut side: Vec<Option<bool>> = vec![None; self.n];
        let mut stack = Vec::new();
        if self.n > 0 {
            side[0] = Some(false);
            stack.push(0);
        }
        while let Some(u) = stack.pop() {
            let s = side[u].expect("visited");
            for &v in &adj[u] {
                match side[v] {
                    None => {
                        side[v] = Some(!s);
                        stack.push(v);
                    }
                    Some(t) if t == s => return None,
                    Some(_) => {}
                }
            }
        }
        Some(side.into_iter().map(|s| s.unwrap_or(false)).collect())
    }

    /// Unique path between two vertices of a forest, as a vertex sequence.
    #[must_use]
    pub fn tree_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let mut parent = vec![usize::MAX; self.n];
        parent[from] = from;
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    stack.push(v);
                }
            }
        }
        if parent[to] == usize::MAX {
            return None;
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    #[must_use]
    pub fn to_dot<C: Display>(&self, vlabels: Option<&[C]>, elabels: Option<&[C]>) -> String {
        let mut out = String::from("graph G {\n");
        for v in 0..self.n {
            match vlabels {
                Some(l) => writeln!(out, "  {v} [label=\"{}\"];", l[v]).expect("string write"),
                None => writeln!(out, "  {v};").expect("string write"),
            }
        }
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            match elabels {
                Some(l) => writeln!(out, "  {u} -- {v} [label=\"{}\"];", l[i]).expect("string write"),
                None => writeln!(out, "  {u} -- {v};").expect("string write"),
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A graph with vertex colors and (optionally) edge colors indexed like `edges`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredGraph<C = i64> {
    #[serde(flatten)]
    pub graph: Graph,
    pub vcolors: Vec<C>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ecolors: Option<Vec<C>>,
}

impl<C: Clone> ColoredGraph<C> {
    pub fn new(graph: Graph, vcolors: Vec<C>, ecolors: Option<Vec<C>>) -> Result<Self> {
        if vcolors.len() != graph.n() {
            return Err(Error::MissingColor(format!("{} vertex colors for {} vertices", vcolors.len(), graph.n())));
        }
        if let Some(e) = &ecolors {
            if e.len() != graph.q() {
                return Err(Error::MissingColor(format!("{} edge colors for {} edges", e.len(), graph.q())));
            }
        }
        Ok(Self { graph, vcolors, ecolors })
    }

    pub fn edge_colors(&self) -> Result<&[C]> {
        self.ecolors.as_deref().ok_or_else(|| Error::MissingColor("edges".into()))
    }
}

impl ColoredGraph<i64> {
    /// Build from parallel `(x, e, y)` color triples: one edge per column,
    /// vertices identified by equal colors.
    pub fn from_color_triples(x: &[i64], e: &[i64], y: &[i64]) -> Result<Self> {
        if x.len() != e.len() || e.len() != y.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
        }
        let colors: BTreeSet<i64> = x.iter().chain(y).copied().collect();
        let id: BTreeMap<i64, usize> = colors.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let edges = x.iter().zip(y).map(|(a, b)| (id[a], id[b])).collect();
        let graph = Graph::new(colors.len(), edges)?;
        Ok(Self { graph, vcolors: colors.into_iter().collect(), ecolors: Some(e.to_vec()) })
    }

    /// Edge colors `|f(u) - f(v)|`.
    #[must_use]
    pub fn with_difference_edges(graph: Graph, vcolors: Vec<i64>) -> Self {
        let e = graph.edges().iter().map(|&(u, v)| (vcolors[u] - vcolors[v]).abs()).collect();
        Self { graph, vcolors, ecolors: Some(e) }
    }
}

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    count: usize,
}

impl UnionFind {
    #[must_use]
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), count: n }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    /// Returns false if already joined. The smaller root wins.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        self.count -= 1;
        true
    }

    #[must_use]
    pub fn components(&self) -> usize {
        self.count
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSplitPlan {
    pub target: usize,
    pub blocks: Vec<Vec<usize>>,
}

/// Replace `target` by one vertex per block. The first block keeps the
/// target's identifier; the others get fresh identifiers `n, n+1, ...`.
pub fn vertex_split(g: &Graph, plan: &VertexSplitPlan) -> Result<Graph> {
    let t = plan.target;
    if t >= g.n() {
        return Err(Error::InvalidParam(format!("vertex {t} not in graph")));
    }
    let nbrs: BTreeSet<usize> = g.adjacency()[t].iter().copied().collect();
    if nbrs.len() < 2 {
        return Err(Error::InvalidParam(format!("vertex {t} has degree {} < 2", nbrs.len())));
    }
    if plan.blocks.len() < 2 || plan.blocks.iter().any(Vec::is_empty) {
        return Err(Error::InvalidParam("need at least two nonempty blocks".into()));
    }
    let mut owner = BTreeMap::new();
    for (b, block) in plan.blocks.iter().enumerate() {
        for &v in block {
            if !nbrs.contains(&v) || owner.insert(v, b).is_some() {
                return Err(Error::InvalidParam(format!("blocks do not partition the neighbors of {t}")));
            }
        }
    }
    if owner.len() != nbrs.len() {
        return Err(Error::InvalidParam(format!("blocks do not cover the neighbors of {t}")));
    }
    let new_id = |b: usize| if b == 0 { t } else { g.n() + b - 1 };
    let edges = g
        .edges()
        .iter()
        .map(|&(u, v)| {
            if u == t {
                (new_id(owner[&v]), v)
            } else if v == t {
                (u, new_id(owner[&u]))
            } else {
                (u, v)
            }
        })
        .collect();
    Graph::new(g.n() + plan.blocks.len() - 1, edges)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoincideRule {
    /// Merge every vertex sharing a color.
    ByColor,
    /// Merge the listed `(part, vertex)` pairs.
    Pairs(Vec<((usize, usize), (usize, usize))>),
}

/// Vertex-coincide colored graphs into one graph.
///
/// Under `ByColor` the merged vertices are numbered by ascending color. Under
/// `Pairs` the parts are laid out disjointly first, merged vertices keep the
/// minimum identifier and identifiers are then compacted.
pub fn vertex_coincide<C>(parts: &[ColoredGraph<C>], rule: &CoincideRule) -> Result<ColoredGraph<C>>
where
    C: Clone + Ord,
{
    if parts.is_empty() {
        return Err(Error::InvalidParam("no graphs to coincide".into()));
    }
    let has_ecolors = parts.iter().all(|p| p.ecolors.is_some());
    let offsets: Vec<usize> = parts
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.graph.n();
            Some(o)
        })
        .collect();
    let total: usize = parts.iter().map(|p| p.graph.n()).sum();
    let all_colors: Vec<C> = parts.iter().flat_map(|p| p.vcolors.iter().cloned()).collect();

    let (target_of, vcolors): (Vec<usize>, Vec<C>) = match rule {
        CoincideRule::ByColor => {
            let palette: BTreeSet<C> = all_colors.iter().cloned().collect();
            let rank: BTreeMap<C, usize> = palette.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
            (all_colors.iter().map(|c| rank[c]).collect(), palette.into_iter().collect())
        }
        CoincideRule::Pairs(pairs) => {
            let mut uf = UnionFind::new(total);
            for &((pa, va), (pb, vb)) in pairs {
                if pa >= parts.len() || pb >= parts.len() || va >= parts[pa].graph.n() || vb >= parts[pb].graph.n() {
                    return Err(Error::InvalidParam("merge pair out of range".into()));
                }
                let (a, b) = (offsets[pa] + va, offsets[pb] + vb);
                if all_colors[a] != all_colors[b] {
                    return Err(Error::Hypothesis(format!("merging differently colored vertices {a} and {b}")));
                }
                uf.union(a, b);
            }
            let roots: BTreeSet<usize> = (0..total).map(|v| uf.find(v)).collect();
            let compact: BTreeMap<usize, usize> = roots.iter().enumerate().map(|(i, &r)| (r, i)).collect();
            let target = (0..total).map(|v| compact[&uf.find(v)]).collect();
            (target, roots.iter().map(|&r| all_colors[r].clone()).collect())
        }
    };

    let mut edges = Vec::new();
    let mut ecolors = Vec::new();
    let mut seen = HashSet::new();
    for (pi, p) in parts.iter().enumerate() {
        for (ei, &(u, v)) in p.graph.edges().iter().enumerate() {
            let (a, b) = (target_of[offsets[pi] + u], target_of[offsets[pi] + v]);
            if a == b {
                return Err(Error::BadMerge { kind: "loop", u: a, v: b });
            }
            if !seen.insert(norm((a, b))) {
                return Err(Error::BadMerge { kind: "multi-edge", u: a, v: b });
            }
            edges.push((a, b));
            if let Some(ec) = &p.ecolors {
                ecolors.push(ec[ei].clone());
            }
        }
    }
    let graph = Graph::new(vcolors.len(), edges)?;
    Ok(ColoredGraph { graph, vcolors, ecolors: has_ecolors.then_some(ecolors) })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeOp {
    /// Lay `h` beside the graph and join `u` (in the graph) to `x` (in `h`).
    Join { u: usize, x: usize, h: Graph },
    /// Add edge `add`, remove edge `remove`.
    AddSub { add: Edge, remove: Edge },
}

pub fn edge_ops(g: &Graph, op: &EdgeOp) -> Result<Graph> {
    match op {
        EdgeOp::Join { u, x, h } => {
            if *u >= g.n() || *x >= h.n() {
                return Err(Error::InvalidParam("join endpoint missing".into()));
            }
            let off = g.n();
            let mut edges = g.edges().to_vec();
            edges.extend(h.edges().iter().map(|&(a, b)| (a + off, b + off)));
            edges.push((*u, x + off));
            Graph::new(g.n() + h.n(), edges)
        }
        EdgeOp::AddSub { add, remove } => {
            if add.0 >= g.n() || add.1 >= g.n() || add.0 == add.1 {
                return Err(Error::InvalidParam(format!("cannot add {add:?}")));
            }
            if g.has_edge(add.0, add.1) {
                return Err(Error::InvalidParam(format!("{add:?} already present")));
            }
            let idx = g
                .edge_index(remove.0, remove.1)
                .ok_or_else(|| Error::InvalidParam(format!("{remove:?} not present")))?;
            let mut edges = g.edges().to_vec();
            edges[idx] = *add;
            Graph::new(g.n(), edges)
        }
    }
}

fn tree_sets_partition(n: usize, trees: &[Vec<Edge>]) -> bool {
    let mut all = BTreeSet::new();
    for t in trees {
        for &e in t {
            if !all.insert(norm(e)) {
                return false;
            }
        }
    }
    all.len() == n * (n - 1) / 2
}

/// One inductive step `K_{2m} -> K_{2m+2}`: each old tree absorbs the new
/// vertex `a` through a non-adjacent pair, breaks the resulting cycle and hands
/// the freed edge to the star at `b`; the star becomes the new tree.
fn grow_even(n: usize, trees: &[Vec<Edge>]) -> Option<Vec<Vec<Edge>>> {
    let (a, b) = (n, n + 1);
    let m = trees.len();
    let graphs: Vec<Graph> = trees.iter().map(|t| Graph { n, edges: t.clone() }).collect();

    #[derive(Clone, Copy)]
    struct Choice {
        p: usize,
        q: usize,
        xp: usize,
    }

    let assemble = |picks: &[Choice]| -> Option<Vec<Vec<Edge>>> {
        let mut star: Vec<Edge> = std::iter::once((a, b)).chain((0..n).map(|v| (v, b))).collect();
        let mut out = Vec::with_capacity(m + 1);
        for (t, c) in trees.iter().zip(picks) {
            let mut e: Vec<Edge> = t.iter().copied().filter(|&f| norm(f) != norm((c.p, c.xp))).collect();
            e.extend([(c.p, a), (c.q, a), (c.xp, b)]);
            out.push(e);
            let pos = star.iter().position(|&f| f == (c.xp, b))?;
            star[pos] = (c.xp, c.p);
        }
        out.push(star);
        let all_trees = out.iter().all(|t| Graph { n: n + 2, edges: t.clone() }.is_tree());
        (all_trees && tree_sets_partition(n + 2, &out)).then_some(out)
    };

    struct Search<'a, F: Fn(&[Choice]) -> Option<Vec<Vec<Edge>>>> {
        graphs: &'a [Graph],
        n: usize,
        used: Vec<bool>,
        hung: Vec<bool>,
        picks: Vec<Choice>,
        assemble: F,
    }

    impl<F: Fn(&[Choice]) -> Option<Vec<Vec<Edge>>>> Search<'_, F> {
        fn rec(&mut self, i: usize) -> Option<Vec<Vec<Edge>>> {
            if i == self.graphs.len() {
                return (self.assemble)(&self.picks);
            }
            let p = (0..self.n).find(|&v| !self.used[v])?;
            for q in (p + 1)..self.n {
                if self.used[q] || self.graphs[i].has_edge(p, q) {
                    continue;
                }
                for (s, t) in [(p, q), (q, p)] {
                    let path = self.graphs[i].tree_path(s, t).expect("spanning tree");
                    let xp = path[1];
                    if self.hung[xp] {
                        continue;
                    }
                    self.used[p] = true;
                    self.used[q] = true;
                    self.hung[xp] = true;
                    self.picks.push(Choice { p: s, q: t, xp });
                    if let Some(found) = self.rec(i + 1) {
                        return Some(found);
                    }
                    self.picks.pop();
                    self.used[p] = false;
                    self.used[q] = false;
                    self.hung[xp] = false;
                }
            }
            None
        }
    }

    Search { graphs: &graphs, n, used: vec![false; n], hung: vec![false; n], picks: Vec::with_capacity(m), assemble }
        .rec(0)
}

/// Fallback step: pair up the old vertices and hang `a`/`b` crosswise.
fn grow_even_direct(n: usize, trees: &[Vec<Edge>]) -> Vec<Vec<Edge>> {
    let (a, b) = (n, n + 1);
    let mut out: Vec<Vec<Edge>> = trees.to_vec();
    let mut last = vec![(a, b)];
    for (i, t) in out.iter_mut().enumerate() {
        t.extend([(2 * i, a), (2 * i + 1, b)]);
        last.extend([(2 * i, b), (2 * i + 1, a)]);
    }
    out.push(last);
    out
}

/// `m` edge-disjoint spanning trees of `K_{2m}`, each with `2m - 1` edges.
pub fn split_complete_even(m: usize) -> Result<Vec<Graph>> {
    if m < 2 {
        return Err(Error::InvalidParam("m must be >= 2".into()));
    }
    let mut trees: Vec<Vec<Edge>> = vec![vec![(0, 1), (1, 2), (2, 3)], vec![(2, 0), (0, 3), (3, 1)]];
    for k in 2..m {
        let n = 2 * k;
        trees = grow_even(n, &trees).unwrap_or_else(|| grow_even_direct(n, &trees));
    }
    Ok(trees.into_iter().map(|edges| Graph { n: 2 * m, edges }).collect())
}

/// A star `K_{1,m}` plus `m` edge-disjoint spanning trees of `K_{2m+1}`.
pub fn split_complete_odd(m: usize) -> Result<(Graph, Vec<Graph>)> {
    let even = split_complete_even(m)?;
    let x = 2 * m;
    let trees = even
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut edges = t.edges;
            edges.push((i, x));
            Graph { n: x + 1, edges }
        })
        .collect();
    let star = Graph { n: x + 1, edges: (m..2 * m).map(|v| (x, v)).collect() };
    Ok((star, trees))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeCountKind {
    Complete(usize),
    Bipartite(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanningCount {
    pub count: u64,
    pub formula: u64,
    pub trees: Vec<Vec<Edge>>,
}

#[must_use]
pub fn cayley_formula(kind: TreeCountKind) -> u64 {
    match kind {
        TreeCountKind::Complete(n) if n >= 2 => (n as u64).pow(n as u32 - 2),
        TreeCountKind::Complete(_) => 1,
        TreeCountKind::Bipartite(a, b) if a == 0 || b == 0 => u64::from(a + b == 1),
        TreeCountKind::Bipartite(a, b) => (a as u64).pow(b as u32 - 1) * (b as u64).pow(a as u32 - 1),
    }
}

fn spans(n: usize, edges: &[Edge], pick: &[usize]) -> bool {
    let mut uf = UnionFind::new(n);
    pick.iter().all(|&i| uf.union(edges[i].0, edges[i].1))
}

/// Count the spanning trees of `K_n` or `K_{a,b}` by enumerating every
/// `(n-1)`-edge subset, checked with union-find. The work is split on the
/// smallest chosen edge.
pub fn count_spanning_trees(kind: TreeCountKind, enumerate_limit: usize, exec: Exec) -> Result<SpanningCount> {
    let g = match kind {
        TreeCountKind::Complete(n) => Graph::complete(n),
        TreeCountKind::Bipartite(a, b) => Graph::complete_bipartite(a, b),
    };
    if g.n() > 8 {
        return Err(Error::TooLarge(format!("{} vertices; enumeration is limited to 8", g.n())));
    }
    let n = g.n();
    let edges = g.edges().to_vec();
    let formula = cayley_formula(kind);
    if n <= 1 {
        return Ok(SpanningCount { count: 1, formula, trees: vec![vec![]] });
    }
    let k = n - 1;
    let per_first = par::map_range(exec, edges.len(), |first| {
        let mut count = 0u64;
        let mut found = Vec::new();
        for rest in ((first + 1)..edges.len()).combinations(k - 1) {
            let mut pick = Vec::with_capacity(k);
            pick.push(first);
            pick.extend(rest);
            if spans(n, &edges, &pick) {
                count += 1;
                if found.len() < enumerate_limit {
                    found.push(pick.iter().map(|&i| edges[i]).collect::<Vec<_>>());
                }
            }
        }
        (count, found)
    });
    let count = per_first.iter().map(|(c, _)| c).sum();
    let trees = per_first.into_iter().flat_map(|(_, f)| f).take(enumerate_limit).collect();
    Ok(SpanningCount { count, formula, trees })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HomMode {
    V,
    E,
    VE,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomVerdict {
    pub ok: bool,
    pub reason: Option<String>,
}

impl HomVerdict {
    fn fail(reason: String) -> Self {
        Self { ok: false, reason: Some(reason) }
    }
}

/// Check that `mapping` sends every edge of `h` to an edge of `g` and that the
/// colors pulled back from `g` satisfy the mode's distinctness rules (and
/// agree with `h`'s own colors).
pub fn check_colored_homomorphism(
    h: &ColoredGraph,
    g: &ColoredGraph,
    mapping: &[usize],
    mode: HomMode,
) -> Result<HomVerdict> {
    if mapping.len() != h.graph.n() {
        return Err(Error::InvalidParam(format!("mapping covers {} of {} vertices", mapping.len(), h.graph.n())));
    }
    if let Some(&v) = mapping.iter().find(|&&v| v >= g.graph.n()) {
        return Err(Error::InvalidParam(format!("image {v} not a vertex")));
    }
    let need_e = matches!(mode, HomMode::E | HomMode::VE);
    let need_v = matches!(mode, HomMode::V | HomMode::VE);
    let gecol = if need_e { Some(g.edge_colors()?) } else { None };
    let mut image_edge = Vec::with_capacity(h.graph.q());
    for &(u, v) in h.graph.edges() {
        let (a, b) = (mapping[u], mapping[v]);
        match g.graph.edge_index(a, b) {
            Some(i) => image_edge.push(i),
            None => return Ok(HomVerdict::fail(format!("edge {u}-{v} maps to non-edge {a}-{b}"))),
        }
    }
    if need_v {
        for (u, &c) in h.vcolors.iter().enumerate() {
            if c != g.vcolors[mapping[u]] {
                return Ok(HomVerdict::fail(format!("vertex {u} color {c} differs from its image")));
            }
        }
        for &(u, v) in h.graph.edges() {
            if g.vcolors[mapping[u]] == g.vcolors[mapping[v]] {
                return Ok(HomVerdict::fail(format!("edge {u}-{v} has equal end colors")));
            }
        }
    }
    if let Some(gec) = gecol {
        if let Some(hec) = &h.ecolors {
            for (i, &c) in hec.iter().enumerate() {
                if c != gec[image_edge[i]] {
                    return Ok(HomVerdict::fail(format!("edge #{i} color {c} differs from its image")));
                }
            }
        }
        let adj = h.graph.adjacency();
        for u in 0..h.graph.n() {
            let colors: Vec<i64> = adj[u]
                .iter()
                .map(|&v| gec[g.graph.edge_index(mapping[u], mapping[v]).expect("checked")])
                .collect();
            if colors.iter().collect::<BTreeSet<_>>().len() != colors.len() {
                return Ok(HomVerdict::fail(format!("edges at {u} repeat a color")));
            }
        }
    }
    Ok(HomVerdict { ok: true, reason: None })
}

/// Brute-force search for a mapping accepted by `check_colored_homomorphism`.
pub fn find_colored_homomorphism(h: &ColoredGraph, g: &ColoredGraph, mode: HomMode) -> Result<Option<Vec<usize>>> {
    if h.graph.n() > 8 {
        return Err(Error::TooLarge("brute-force homomorphism search is limited to 8 vertices".into()));
    }
    let hadj = h.graph.adjacency();
    let mut map = vec![usize::MAX; h.graph.n()];
    fn rec(
        u: usize,
        map: &mut Vec<usize>,
        hadj: &[Vec<usize>],
        h: &ColoredGraph,
        g: &ColoredGraph,
        mode: HomMode,
    ) -> Result<bool> {
        if u == map.len() {
            return Ok(check_colored_homomorphism(h, g, map, mode)?.ok);
        }
        for a in 0..g.graph.n() {
            if matches!(mode, HomMode::V | HomMode::VE) && h.vcolors[u] != g.vcolors[a] {
                continue;
            }
            if hadj[u].iter().any(|&w| w < u && !g.graph.has_edge(map[w], a)) {
                continue;
            }
            map[u] = a;
            if rec(u + 1, map, hadj, h, g, mode)? {
                return Ok(true);
            }
        }
        map[u] = usize::MAX;
        Ok(false)
    }
    Ok(rec(0, &mut map, &hadj, h, g, mode)?.then_some(map))
}

/// Canonical sorted edge list: lexicographic minimum over vertex
/// relabelings that respect the degree ordering. Desk scale only.
pub fn canonical_form(g: &Graph) -> Result<Vec<Edge>> {
    if g.n() > 10 {
        return Err(Error::TooLarge("canonical form is limited to 10 vertices".into()));
    }
    let deg = g.degrees();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(deg[v]));
    // group vertices of equal degree; only permute within a group
    let groups: Vec<Vec<usize>> = order
        .iter()
        .copied()
        .chunk_by(|&v| deg[v])
        .into_iter()
        .map(|(_, c)| c.collect())
        .collect();
    let mut best: Option<Vec<Edge>> = None;
    let perms_per_group: Vec<Vec<Vec<usize>>> =
        groups.iter().map(|grp| grp.iter().copied().permutations(grp.len()).collect()).collect();
    for combo in perms_per_group.iter().multi_cartesian_product() {
        let mut label = vec![0; g.n()];
        for (new, &old) in combo.iter().flat_map(|p| p.iter()).enumerate() {
            label[old] = new;
        }
        let mut e: Vec<Edge> = g.edges().iter().map(|&(u, v)| norm((label[u], label[v]))).collect();
        e.sort_unstable();
        if best.as_ref().is_none_or(|b| e < *b) {
            best = Some(e);
        }
    }
    Ok(best.unwrap_or_default())
}

pub fn are_isomorphic(a: &Graph, b: &Graph) -> Result<bool> {
    if a.n() != b.n() || a.q() != b.q() {
        return Ok(false);
    }
    let (mut da, mut db) = (a.degrees(), b.degrees());
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return Ok(false);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

fn rooted_code(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v].iter().filter(|&&w| w != parent).map(|&w| rooted_code(adj, w, v)).collect();
    kids.sort_unstable();
    format!("({})", kids.concat())
}

/// Canonical code of a tree: AHU encoding rooted at its center.
pub fn tree_code(t: &Graph) -> Result<String> {
    if !t.is_tree() {
        return Err(Error::InvalidGraph("not a tree".into()));
    }
    let adj = t.adjacency();
    let mut deg = t.degrees();
    let mut remaining = t.n();
    let mut layer: Vec<usize> = (0..t.n()).filter(|&v| deg[v] <= 1).collect();
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    Ok(layer.iter().map(|&c| rooted_code(&adj, c, usize::MAX)).min().expect("a center"))
}

/// All non-isomorphic trees on `n` vertices, grown leaf by leaf.
pub fn nonisomorphic_trees(n: usize) -> Result<Vec<Graph>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut level: BTreeMap<String, Graph> = BTreeMap::new();
    let g1 = Graph::empty(1);
    level.insert(tree_code(&g1)?, g1);
    for k in 1..n {
        let mut next = BTreeMap::new();
        for t in level.values() {
            for v in 0..k {
                let mut edges = t.edges().to_vec();
                edges.push((v, k));
                let g = Graph { n: k + 1, edges };
                next.entry(tree_code(&g)?).or_insert(g);
            }
        }
        level = next;
    }
    Ok(level.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_spanning_tree(n: usize, edges: &[Edge]) -> bool {
        edges.len() == n - 1 && spans(n, edges, &(0..edges.len()).collect::<Vec<_>>())
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(Graph::new(2, vec![(0, 0)]).is_err());
        assert!(Graph::new(2, vec![(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, vec![(0, 2)]).is_err());
    }

    #[test]
    fn split_triangle_gives_path() {
        let g = vertex_split(&Graph::cycle(3), &VertexSplitPlan { target: 0, blocks: vec![vec![1], vec![2]] }).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.q(), 3);
        assert!(g.is_tree());
        assert!(are_isomorphic(&g, &Graph::path(4)).unwrap());
    }

    #[test]
    fn split_k4() {
        let g = vertex_split(&Graph::complete(4), &VertexSplitPlan { target: 0, blocks: vec![vec![1], vec![2, 3]] }).unwrap();
        assert_eq!((g.n(), g.q()), (5, 6));
        let bad = VertexSplitPlan { target: 0, blocks: vec![vec![1], vec![2]] };
        assert!(vertex_split(&Graph::complete(4), &bad).is_err());
        assert!(vertex_split(&Graph::path(2), &VertexSplitPlan { target: 0, blocks: vec![vec![1]] }).is_err());
    }

    #[test]
    fn split_then_coincide_roundtrip() {
        let g = Graph::complete(4);
        let s = vertex_split(&g, &VertexSplitPlan { target: 1, blocks: vec![vec![0, 3], vec![2]] }).unwrap();
        let cg = ColoredGraph::new(s, vec![0, 1, 2, 3, 1], None).unwrap();
        let back = vertex_coincide(&[cg], &CoincideRule::ByColor).unwrap();
        assert!(are_isomorphic(&back.graph, &g).unwrap());
    }

    #[test]
    fn coincide_rejects_multi_edge() {
        let t = ColoredGraph::new(Graph::cycle(3), vec![1, 2, 3], None).unwrap();
        let err = vertex_coincide(&[t.clone(), t], &CoincideRule::ByColor).unwrap_err();
        assert!(matches!(err, Error::BadMerge { kind: "multi-edge", .. }));
    }

    #[test]
    fn coincide_pairs() {
        let a = ColoredGraph::new(Graph::path(2), vec![5, 6], None).unwrap();
        let b = ColoredGraph::new(Graph::path(2), vec![6, 7], None).unwrap();
        let c = vertex_coincide(&[a.clone(), b.clone()], &CoincideRule::Pairs(vec![((0, 1), (1, 0))])).unwrap();
        assert_eq!(c.graph.n(), 3);
        assert_eq!(c.vcolors, vec![5, 6, 7]);
        assert!(vertex_coincide(&[a, b], &CoincideRule::Pairs(vec![((0, 0), (1, 0))])).is_err());
    }

    #[test]
    fn edge_operations() {
        let k2 = edge_ops(&Graph::empty(1), &EdgeOp::Join { u: 0, x: 0, h: Graph::empty(1) }).unwrap();
        assert_eq!((k2.n(), k2.q()), (2, 1));
        let p3 = Graph::path(3);
        let r = edge_ops(&p3, &EdgeOp::AddSub { add: (0, 2), remove: (0, 1) }).unwrap();
        assert!(are_isomorphic(&r, &p3).unwrap());
        let c4 = Graph::cycle(4);
        let r = edge_ops(&c4, &EdgeOp::AddSub { add: (0, 2), remove: (0, 1) }).unwrap();
        assert_eq!(r.q(), 4);
        assert!(edge_ops(&c4, &EdgeOp::AddSub { add: (0, 1), remove: (1, 2) }).is_err());
        assert!(edge_ops(&c4, &EdgeOp::AddSub { add: (0, 2), remove: (0, 2) }).is_err());
    }

    #[test]
    fn complete_splits() {
        for m in 2..=8 {
            let trees = split_complete_even(m).unwrap();
            assert_eq!(trees.len(), m);
            let sets: Vec<Vec<Edge>> = trees.iter().map(|t| t.edges().to_vec()).collect();
            assert!(sets.iter().all(|t| is_spanning_tree(2 * m, t)));
            assert!(tree_sets_partition(2 * m, &sets));
        }
        let (star, trees) = split_complete_odd(3).unwrap();
        assert_eq!(star.q(), 3);
        assert_eq!(trees.iter().map(Graph::q).sum::<usize>() + star.q(), 21);
    }

    #[test]
    fn base_step_used_for_small_m() {
        // the cycle-breaking step succeeds without the fallback at these sizes
        let mut trees: Vec<Vec<Edge>> = vec![vec![(0, 1), (1, 2), (2, 3)], vec![(2, 0), (0, 3), (3, 1)]];
        for k in 2..6 {
            trees = grow_even(2 * k, &trees).expect("inductive step");
        }
    }

    #[test]
    fn spanning_counts() {
        for n in 3..=6 {
            let r = count_spanning_trees(TreeCountKind::Complete(n), 0, Exec::Sequential).unwrap();
            assert_eq!(r.count, r.formula);
        }
        assert_eq!(cayley_formula(TreeCountKind::Complete(6)), 1296);
        let r = count_spanning_trees(TreeCountKind::Bipartite(2, 3), 20, Exec::Auto).unwrap();
        assert_eq!((r.count, r.formula, r.trees.len()), (12, 12, 12));
    }

    #[test]
    fn homomorphisms() {
        let c5 = ColoredGraph::new(Graph::cycle(5), vec![0, 1, 0, 1, 2], None).unwrap();
        let id: Vec<usize> = (0..5).collect();
        assert!(check_colored_homomorphism(&c5, &c5, &id, HomMode::V).unwrap().ok);
        let c3 = ColoredGraph::new(Graph::cycle(3), vec![0, 1, 2], None).unwrap();
        let c6 = ColoredGraph::new(Graph::cycle(6), (0..6).map(|i| i % 3).collect(), None).unwrap();
        let fold: Vec<usize> = (0..6).map(|i| i as usize % 3).collect();
        assert!(check_colored_homomorphism(&c6, &c3, &fold, HomMode::V).unwrap().ok);
        let collapse = vec![0, 0, 1, 2, 0, 1];
        assert!(!check_colored_homomorphism(&c6, &c3, &collapse, HomMode::V).unwrap().ok);
        let found = find_colored_homomorphism(&c6, &c3, HomMode::V).unwrap().unwrap();
        assert!(check_colored_homomorphism(&c6, &c3, &found, HomMode::V).unwrap().ok);
        assert!(check_colored_homomorphism(&c6, &c3, &[0, 1], HomMode::V).is_err());
    }

    #[test]
    fn tree_enumeration_counts() {
        let counts: Vec<usize> = (1..=9).map(|n| nonisomorphic_trees(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23, 47]);
    }

    #[test]
    fn json_shape() {
        let g = ColoredGraph::new(Graph::path(2), vec![0, 1], Some(vec![1])).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v, serde_json::json!({"n": 2, "edges": [[0, 1]], "vcolors": [0, 1], "ecolors": [1]}));
        assert!(g.graph.to_dot(Some(&g.vcolors), g.ecolors.as_deref()).contains("0 -- 1 [label=\"1\"]"));
    }
}
