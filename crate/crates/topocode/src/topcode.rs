//! Topcode-matrices: 3×q tables of (end, edge, end) colors and the strings,
//! parameterized forms, adjacency matrices and inverse search built on them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph_core::{ColoredGraph, Graph};
use crate::labeling_engine::StringColoring;
use crate::par::{self, Exec};
use crate::string_algebra::{DigitString, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(i64),
    /// Digit string kept verbatim (leading zeros matter).
    Str(String),
    Nested(Box<TopcodeMatrix>),
}

impl Cell {
    fn text(&self) -> Result<String> {
        match self {
            Cell::Num(v) if *v >= 0 => Ok(v.to_string()),
            Cell::Num(v) => Err(Error::BadDigits(format!("negative cell {v}"))),
            Cell::Str(s) => Ok(s.clone()),
            Cell::Nested(_) => Err(Error::InvalidParam("nested cell: flatten before reading a string".into())),
        }
    }

    #[must_use]
    pub fn as_num(&self) -> Option<i64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Str(s) => f.write_str(s),
            Cell::Nested(m) => write!(f, "[{}x{}]", 3, m.q()),
        }
    }
}

#[derive(Deserialize)]
struct RawTopcode {
    q: usize,
    #[serde(rename = "X")]
    x: Vec<Cell>,
    #[serde(rename = "E")]
    e: Vec<Cell>,
    #[serde(rename = "Y")]
    y: Vec<Cell>,
}

impl TryFrom<RawTopcode> for TopcodeMatrix {
    type Error = Error;
    fn try_from(r: RawTopcode) -> Result<Self> {
        let m = TopcodeMatrix::new(r.x, r.e, r.y)?;
        if m.q() != r.q {
            return Err(Error::LengthMismatch { left: r.q, right: m.q() });
        }
        Ok(m)
    }
}

/// Rows X, E, Y of equal length q.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTopcode")]
pub struct TopcodeMatrix {
    q: usize,
    #[serde(rename = "X")]
    x: Vec<Cell>,
    #[serde(rename = "E")]
    e: Vec<Cell>,
    #[serde(rename = "Y")]
    y: Vec<Cell>,
}

impl TopcodeMatrix {
    pub fn new(x: Vec<Cell>, e: Vec<Cell>, y: Vec<Cell>) -> Result<Self> {
        if x.len() != e.len() || e.len() != y.len() {
            return Err(Error::LengthMismatch { left: x.len(), right: e.len().max(y.len()) });
        }
        Ok(Self { q: x.len(), x, e, y })
    }

    pub fn numeric(x: &[i64], e: &[i64], y: &[i64]) -> Result<Self> {
        let cells = |r: &[i64]| r.iter().map(|&v| Cell::Num(v)).collect();
        Self::new(cells(x), cells(e), cells(y))
    }

    #[must_use]
    pub fn q(&self) -> usize {
        self.q
    }

    #[must_use]
    pub fn rows(&self) -> [&[Cell]; 3] {
        [&self.x, &self.e, &self.y]
    }

    #[must_use]
    pub fn cell(&self, pos: usize) -> &Cell {
        &self.rows()[pos / self.q][pos % self.q]
    }

    #[must_use]
    pub fn column(&self, i: usize) -> (&Cell, &Cell, &Cell) {
        (&self.x[i], &self.e[i], &self.y[i])
    }

    /// Rows as integers, when every cell is numeric.
    pub fn numeric_rows(&self) -> Result<[Vec<i64>; 3]> {
        let conv = |r: &[Cell]| {
            r.iter()
                .map(|c| c.as_num().ok_or_else(|| Error::InvalidParam(format!("non-numeric cell {c}"))))
                .collect::<Result<Vec<i64>>>()
        };
        Ok([conv(&self.x)?, conv(&self.e)?, conv(&self.y)?])
    }

    /// Side-by-side concatenation.
    pub fn concat(parts: &[TopcodeMatrix]) -> Result<Self> {
        let mut rows: [Vec<Cell>; 3] = Default::default();
        for p in parts {
            for (r, src) in rows.iter_mut().zip(p.rows()) {
                r.extend_from_slice(src);
            }
        }
        let [x, e, y] = rows;
        Self::new(x, e, y)
    }

    /// Edge color triples `(x, e, y)` column by column.
    pub fn triples(&self) -> Result<Vec<(i64, i64, i64)>> {
        let [x, e, y] = self.numeric_rows()?;
        Ok((0..self.q).map(|i| (x[i], e[i], y[i])).collect())
    }

    #[must_use]
    pub fn render(&self) -> String {
        self.rows()
            .iter()
            .map(|r| r.iter().map(Cell::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Columns follow `order` (default: stored edge order). When the graph is
/// connected, bipartite and its coloring set-ordered, row X takes the end on
/// the lower side; otherwise the stored orientation is kept.
pub fn topcode_from_graph(g: &ColoredGraph, order: Option<&[usize]>) -> Result<TopcodeMatrix> {
    let ev = g.edge_colors()?;
    let q = g.graph.q();
    if q == 0 {
        return Err(Error::InvalidGraph("Topcode-matrix of an edgeless graph".into()));
    }
    let order: Vec<usize> = match order {
        Some(o) => {
            let set: BTreeSet<usize> = o.iter().copied().collect();
            if o.len() != q || set.len() != q || set.iter().any(|&i| i >= q) {
                return Err(Error::InvalidParam("edge order must be a permutation of the edges".into()));
            }
            o.to_vec()
        }
        None => (0..q).collect(),
    };
    let vc = &g.vcolors;
    let low_side = g.graph.bipartition().and_then(|side| {
        [false, true].into_iter().find(|&s| {
            let max_x = (0..vc.len()).filter(|&v| side[v] == s).map(|v| vc[v]).max();
            let min_y = (0..vc.len()).filter(|&v| side[v] != s).map(|v| vc[v]).min();
            matches!((max_x, min_y), (Some(a), Some(b)) if a < b)
        })
        .map(|s| (side, s))
    });
    let (mut x, mut e, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for i in order {
        let (mut u, mut v) = g.graph.edges()[i];
        if let Some((side, s)) = &low_side {
            if side[u] != *s {
                std::mem::swap(&mut u, &mut v);
            }
        }
        x.push(vc[u]);
        e.push(ev[i]);
        y.push(vc[v]);
    }
    TopcodeMatrix::numeric(&x, &e, &y)
}

// ---------------------------------------------------------------------------
// Permutations of cell positions

/// A reading order of the 3q cells (positions numbered row-major), with its
/// rank in the factorial number system; rank 0 is row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermIndex {
    seq: Vec<usize>,
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, k| acc * k)
}

impl PermIndex {
    #[must_use]
    pub fn row_major(q: usize) -> Self {
        Self { seq: (0..3 * q).collect() }
    }

    /// Column by column: x_1 e_1 y_1 x_2 e_2 y_2 …
    #[must_use]
    pub fn column_major(q: usize) -> Self {
        Self { seq: (0..q).flat_map(|i| [i, q + i, 2 * q + i]).collect() }
    }

    pub fn from_sequence(seq: Vec<usize>) -> Result<Self> {
        let set: BTreeSet<usize> = seq.iter().copied().collect();
        if set.len() != seq.len() || seq.iter().any(|&p| p >= seq.len()) {
            return Err(Error::InvalidParam("not a permutation".into()));
        }
        Ok(Self { seq })
    }

    pub fn from_rank(len: usize, rank: &BigUint) -> Result<Self> {
        if *rank >= factorial(len) {
            return Err(Error::IndexOutOfRange { index: -1, order: len });
        }
        let mut r = rank.clone();
        let mut avail: Vec<usize> = (0..len).collect();
        let mut seq = Vec::with_capacity(len);
        for i in 0..len {
            let f = factorial(len - 1 - i);
            let idx: usize = (&r / &f).try_into().expect("digit below len");
            r %= &f;
            seq.push(avail.remove(idx));
        }
        Ok(Self { seq })
    }

    #[must_use]
    pub fn rank(&self) -> BigUint {
        let n = self.seq.len();
        let mut avail: Vec<usize> = (0..n).collect();
        let mut r = BigUint::from(0u32);
        for (i, &p) in self.seq.iter().enumerate() {
            let idx = avail.iter().position(|&a| a == p).expect("permutation");
            avail.remove(idx);
            r += factorial(n - 1 - i) * idx;
        }
        r
    }

    #[must_use]
    pub fn sequence(&self) -> &[usize] {
        &self.seq
    }
}

/// Concatenate cells in `perm` order.
pub fn string_from_topcode(t: &TopcodeMatrix, perm: &PermIndex) -> Result<DigitString> {
    if perm.seq.len() != 3 * t.q() {
        return Err(Error::LengthMismatch { left: perm.seq.len(), right: 3 * t.q() });
    }
    let mut s = String::new();
    for &p in &perm.seq {
        s.push_str(&t.cell(p).text()?);
    }
    DigitString::parse(&s, Ring::Mod10)
}

/// First permutation (in rank order within the row-major/column-major family,
/// then exhaustively for `3q <= 8`) producing `target`.
pub fn find_permutation(t: &TopcodeMatrix, target: &str) -> Result<Option<PermIndex>> {
    for p in [PermIndex::row_major(t.q()), PermIndex::column_major(t.q())] {
        if string_from_topcode(t, &p)?.to_string() == target {
            return Ok(Some(p));
        }
    }
    let n = 3 * t.q();
    if n > 8 {
        return Ok(None);
    }
    let total: u64 = (1..=n as u64).product();
    for r in 0..total {
        let p = PermIndex::from_rank(n, &BigUint::from(r))?;
        if string_from_topcode(t, &p)?.to_string() == target {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Parameterized matrices

/// `P(k,d) = k·I⁰ + d·T` with `I⁰` = zeros on row X, ones on rows E, Y.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamTopcode {
    base: [Vec<i64>; 3],
}

impl ParamTopcode {
    pub fn new(t: &TopcodeMatrix) -> Result<Self> {
        Ok(Self { base: t.numeric_rows()? })
    }

    #[must_use]
    pub fn q(&self) -> usize {
        self.base[0].len()
    }

    #[must_use]
    pub fn unit(&self) -> TopcodeMatrix {
        let q = self.q();
        TopcodeMatrix::numeric(&vec![0; q], &vec![1; q], &vec![1; q]).expect("equal rows")
    }

    pub fn evaluate(&self, k: i64, d: i64) -> Result<TopcodeMatrix> {
        if d < 0 {
            return Err(Error::InvalidParam(format!("d must be non-negative, got {d}")));
        }
        let [x, e, y] = &self.base;
        let f = |r: &[i64], kk: i64| r.iter().map(|&a| kk + d * a).collect::<Vec<_>>();
        TopcodeMatrix::numeric(&f(x, 0), &f(e, k), &f(y, k))
    }

    /// Symbolic rows such as `d 2d 3d` / `k+5d k+4d`.
    #[must_use]
    pub fn render(&self) -> String {
        let term = |a: i64| match a {
            0 => String::new(),
            1 => "d".to_string(),
            _ => format!("{a}d"),
        };
        let [x, e, y] = &self.base;
        let xr = x.iter().map(|&a| if a == 0 { "0".to_string() } else { term(a) }).collect::<Vec<_>>();
        let ky = |r: &[i64]| {
            r.iter()
                .map(|&a| if a == 0 { "k".to_string() } else { format!("k+{}", term(a)) })
                .collect::<Vec<_>>()
        };
        [xr, ky(e), ky(y)].iter().map(|r| r.join(" ")).collect::<Vec<_>>().join("\n")
    }
}

/// One string per `(k,d)` point, read in `perm` order.
pub fn curve_strings(p: &ParamTopcode, points: &[(i64, i64)], perm: &PermIndex) -> Result<Vec<DigitString>> {
    points
        .iter()
        .map(|&(k, d)| {
            if k < 0 || d < 0 {
                return Err(Error::InvalidParam(format!("point ({k},{d}) has a negative coordinate")));
            }
            string_from_topcode(&p.evaluate(k, d)?, perm)
        })
        .collect()
}

/// Replace every digit by its table entry.
pub fn assignment_substitute(s: &DigitString, table: &BTreeMap<u8, String>) -> Result<DigitString> {
    let mut out = String::new();
    for &d in s.digits() {
        let rep = table.get(&d).ok_or_else(|| Error::MissingMaterial(format!("no assignment for digit {d}")))?;
        out.push_str(rep);
    }
    DigitString::parse(&out, Ring::Mod10)
}

// ---------------------------------------------------------------------------
// Adjacency matrices

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdjacencyFamily {
    /// 0/1 adjacency, vertices listed by ascending color.
    pub a: Vec<Vec<i64>>,
    /// Edge colors at adjacent cells.
    pub colored: Vec<Vec<i64>>,
    /// `colored` bordered by the vertex colors with a 0 corner.
    pub a_code: Vec<Vec<i64>>,
    /// `a` bordered the same way (the layout of the printed instance).
    pub a_code_binary: Vec<Vec<i64>>,
}

fn border(colors: &[i64], body: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(colors.len() + 1);
    out.push(std::iter::once(0).chain(colors.iter().copied()).collect());
    for (i, row) in body.iter().enumerate() {
        out.push(std::iter::once(colors[i]).chain(row.iter().copied()).collect());
    }
    out
}

pub fn adjacency_family(g: &ColoredGraph) -> Result<AdjacencyFamily> {
    let n = g.graph.n();
    let ev = g.edge_colors()?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (g.vcolors[v], v));
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut a = vec![vec![0; n]; n];
    let mut colored = vec![vec![0; n]; n];
    for (i, &(u, v)) in g.graph.edges().iter().enumerate() {
        let (pu, pv) = (pos[u], pos[v]);
        a[pu][pv] = 1;
        a[pv][pu] = 1;
        colored[pu][pv] = ev[i];
        colored[pv][pu] = ev[i];
    }
    let colors: Vec<i64> = order.iter().map(|&v| g.vcolors[v]).collect();
    Ok(AdjacencyFamily {
        a_code: border(&colors, &colored),
        a_code_binary: border(&colors, &a),
        a,
        colored,
    })
}

// ---------------------------------------------------------------------------
// Nested (three-dimensional) matrices

/// One 3×n matrix per edge: rows are the component colors of the two ends and
/// the edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NestedTopcode {
    pub columns: Vec<TopcodeMatrix>,
}

impl NestedTopcode {
    /// Collapse each inner row to its concatenated digits.
    pub fn flatten(&self) -> Result<TopcodeMatrix> {
        let mut rows: [Vec<Cell>; 3] = Default::default();
        for m in &self.columns {
            for (r, src) in rows.iter_mut().zip(m.rows()) {
                let s = src.iter().map(Cell::text).collect::<Result<String>>()?;
                r.push(Cell::Str(s));
            }
        }
        let [x, e, y] = rows;
        TopcodeMatrix::new(x, e, y)
    }

    /// Outer matrix with the inner ones as cells of a single row.
    #[must_use]
    pub fn as_cells(&self) -> Vec<Cell> {
        self.columns.iter().map(|m| Cell::Nested(Box::new(m.clone()))).collect()
    }
}

pub fn nested_topcode(s: &StringColoring) -> Result<NestedTopcode> {
    let w = s.width();
    if s.vcolors.iter().chain(&s.ecolors).any(|c| c.len() != w) {
        return Err(Error::InvalidParam("ragged string coloring".into()));
    }
    let columns = s
        .graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| TopcodeMatrix::numeric(&s.vcolors[u], &s.ecolors[i], &s.vcolors[v]))
        .collect::<Result<_>>()?;
    Ok(NestedTopcode { columns })
}

/// Concatenated-value coloring matrix: cell = `f_1(w)‖…‖f_n(w)`.
pub fn topcode_from_string_coloring(s: &StringColoring) -> Result<TopcodeMatrix> {
    let (mut x, mut e, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &(u, v)) in s.graph.edges().iter().enumerate() {
        x.push(Cell::Str(s.vertex_string(u)));
        e.push(Cell::Str(s.edge_string(i)));
        y.push(Cell::Str(s.vertex_string(v)));
    }
    TopcodeMatrix::new(x, e, y)
}

// ---------------------------------------------------------------------------
// PRONBS

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReadOrder {
    RowMajor,
    ColumnMajor,
}

impl ReadOrder {
    #[must_use]
    pub fn perm(self, q: usize) -> PermIndex {
        match self {
            ReadOrder::RowMajor => PermIndex::row_major(q),
            ReadOrder::ColumnMajor => PermIndex::column_major(q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PronbsBounds {
    pub max_q: usize,
    pub max_color: i64,
    pub max_k: i64,
    pub max_d: i64,
    /// Keep only candidates whose coloring is set-ordered on the X/Y rows.
    pub set_ordered: bool,
}

impl Default for PronbsBounds {
    fn default() -> Self {
        Self { max_q: 5, max_color: 6, max_k: 3, max_d: 2, set_ordered: false }
    }
}

/// A reconstruction: base graceful coloring `T`, parameters and reading order
/// such that `string_from_topcode(evaluate(T,k,d), order)` is the input.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PronbsCandidate {
    pub q: usize,
    pub order: ReadOrder,
    pub k: i64,
    pub d: i64,
    pub base: Vec<(i64, i64, i64)>,
    pub segments: Vec<String>,
}

impl PronbsCandidate {
    pub fn topcode(&self) -> Result<TopcodeMatrix> {
        let col = |f: fn(&(i64, i64, i64)) -> i64| self.base.iter().map(f).collect::<Vec<_>>();
        TopcodeMatrix::numeric(&col(|t| t.0), &col(|t| t.1), &col(|t| t.2))
    }

    /// Graph with one vertex per distinct color.
    pub fn graph(&self) -> Result<ColoredGraph> {
        let col = |f: fn(&(i64, i64, i64)) -> i64| self.base.iter().map(f).collect::<Vec<_>>();
        ColoredGraph::from_color_triples(&col(|t| t.0), &col(|t| t.1), &col(|t| t.2))
    }

    pub fn regenerate(&self) -> Result<DigitString> {
        let p = ParamTopcode::new(&self.topcode()?)?;
        string_from_topcode(&p.evaluate(self.k, self.d)?, &self.order.perm(self.q))
    }
}

fn segmentations(s: &[u8], parts: usize, max_value: i64) -> Vec<Vec<i64>> {
    fn go(s: &[u8], parts: usize, max_value: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if parts == 0 {
            if s.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        if s.len() < parts {
            return;
        }
        let mut v: i64 = 0;
        for len in 1..=s.len() - parts + 1 {
            if len > 1 && s[0] == 0 {
                break;
            }
            v = v * 10 + i64::from(s[len - 1]);
            if v > max_value {
                break;
            }
            cur.push(v);
            go(&s[len..], parts - 1, max_value, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(s, parts, max_value, &mut Vec::new(), &mut out);
    out
}

fn candidate_from(
    values: &[i64],
    q: usize,
    order: ReadOrder,
    k: i64,
    d: i64,
    b: &PronbsBounds,
) -> Option<PronbsCandidate> {
    let cell = |row: usize, i: usize| match order {
        ReadOrder::RowMajor => values[row * q + i],
        ReadOrder::ColumnMajor => values[3 * i + row],
    };
    let mut base = Vec::with_capacity(q);
    for i in 0..q {
        let (px, pe, py) = (cell(0, i), cell(1, i), cell(2, i));
        if px % d != 0 || (pe - k) % d != 0 || (py - k) % d != 0 || pe < k || py < k {
            return None;
        }
        let (x, e, y) = (px / d, (pe - k) / d, (py - k) / d);
        if [x, e, y].iter().any(|&c| c > b.max_color) || e < 1 || (x - y).abs() != e {
            return None;
        }
        base.push((x, e, y));
    }
    if b.set_ordered {
        let max_x = base.iter().map(|t| t.0).max()?;
        let min_y = base.iter().map(|t| t.2).min()?;
        if max_x >= min_y {
            return None;
        }
    }
    let ends: BTreeSet<(i64, i64)> = base.iter().map(|t| (t.0.min(t.2), t.0.max(t.2))).collect();
    if ends.len() != q {
        return None;
    }
    let segments = values.iter().map(i64::to_string).collect();
    Some(PronbsCandidate { q, order, k, d, base, segments })
}

/// Every (segmentation, reading order, k, d, graceful base coloring) within
/// `bounds` that regenerates `s`; sorted, so the result is deterministic.
pub fn pronbs_solve(s: &DigitString, bounds: &PronbsBounds, exec: Exec) -> Result<Vec<PronbsCandidate>> {
    if bounds.max_q > 5 || bounds.max_d < 1 || bounds.max_k < 0 || bounds.max_color < 1 {
        return Err(Error::TooLarge("PRONBS bounds: q <= 5, d >= 1, k >= 0, colors >= 1".into()));
    }
    let max_value = bounds.max_k + bounds.max_d * bounds.max_color;
    let jobs: Vec<(usize, ReadOrder)> = (1..=bounds.max_q)
        .flat_map(|q| [ReadOrder::RowMajor, ReadOrder::ColumnMajor].map(|o| (q, o)))
        .collect();
    let found = par::map_slice(exec, &jobs, |&(q, order)| {
        let mut out = Vec::new();
        for values in segmentations(s.digits(), 3 * q, max_value) {
            for k in 0..=bounds.max_k {
                for d in 1..=bounds.max_d {
                    if let Some(c) = candidate_from(&values, q, order, k, d, bounds) {
                        out.push(c);
                    }
                }
            }
        }
        out
    });
    let mut all: Vec<PronbsCandidate> = found.into_iter().flatten().collect();
    all.sort();
    all.dedup();
    for c in &all {
        debug_assert_eq!(c.regenerate().map(|r| r.to_string()).ok(), Some(s.to_string()));
    }
    Ok(all)
}

/// The reference instance: H with base rows (1,2,3,3,3)/(5,4,3,2,1)/(6,6,6,5,4).
#[must_use]
pub fn reference_param_topcode() -> ParamTopcode {
    let t = TopcodeMatrix::numeric(&[1, 2, 3, 3, 3], &[5, 4, 3, 2, 1], &[6, 6, 6, 5, 4]).expect("rows");
    ParamTopcode::new(&t).expect("numeric")
}

/// Example graph used by the worked micro-examples (6 vertices, colors 1..6).
#[must_use]
pub fn h4147() -> ColoredGraph {
    ColoredGraph::from_color_triples(&[1, 3, 5, 2, 4], &[4, 2, 1, 4, 2], &[5, 5, 6, 6, 6]).expect("valid triples")
}

#[must_use]
pub fn example1_matrices() -> [TopcodeMatrix; 3] {
    [
        TopcodeMatrix::numeric(&[1, 3, 5, 2, 4], &[4, 2, 1, 4, 2], &[5, 5, 6, 6, 6]).expect("G"),
        TopcodeMatrix::numeric(&[4, 2, 1, 1, 1], &[1, 2, 3, 5, 2], &[5, 4, 4, 6, 3]).expect("T"),
        TopcodeMatrix::numeric(&[1, 2, 2, 3, 3], &[1, 3, 1, 1, 3], &[2, 5, 3, 4, 6]).expect("J"),
    ]
}

/// Colored graph of a numeric Topcode-matrix (vertices identified by color).
pub fn graph_from_topcode(t: &TopcodeMatrix) -> Result<ColoredGraph> {
    let [x, e, y] = t.numeric_rows()?;
    ColoredGraph::from_color_triples(&x, &e, &y)
}

/// Graph only.
pub fn topcode_graph(t: &TopcodeMatrix) -> Result<Graph> {
    Ok(graph_from_topcode(t)?.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_core::are_isomorphic;

    fn table() -> BTreeMap<u8, String> {
        [(1, "142857"), (2, "6174"), (3, "0618"), (4, "31415926"), (5, "8128"), (6, "196")]
            .into_iter()
            .map(|(d, s)| (d, s.to_string()))
            .collect()
    }

    #[test]
    fn example1_strings() {
        let [g, t, j] = example1_matrices();
        let rm = PermIndex::row_major(5);
        assert_eq!(string_from_topcode(&g, &rm).unwrap().to_string(), "135244214255666");
        // Both private strings are row-major reads of their matrices.
        assert_eq!(find_permutation(&t, "421111235254463").unwrap().unwrap().rank(), BigUint::from(0u32));
        assert_eq!(find_permutation(&j, "122331311325346").unwrap().unwrap().rank(), BigUint::from(0u32));
        let from_graph = topcode_from_graph(&h4147(), None).unwrap();
        assert_eq!(from_graph, g);
    }

    #[test]
    fn concatenated_matrix() {
        let all = TopcodeMatrix::concat(&example1_matrices()).unwrap();
        assert_eq!(all.q(), 15);
        let [x, e, y] = all.numeric_rows().unwrap();
        assert_eq!(x, vec![1, 3, 5, 2, 4, 4, 2, 1, 1, 1, 1, 2, 2, 3, 3]);
        assert_eq!(e, vec![4, 2, 1, 4, 2, 1, 2, 3, 5, 2, 1, 3, 1, 1, 3]);
        assert_eq!(y, vec![5, 5, 6, 6, 6, 5, 4, 4, 6, 3, 2, 5, 3, 4, 6]);
    }

    #[test]
    fn assignment_string() {
        let s = DigitString::parse("135244214255666", Ring::Mod10).unwrap();
        let out = assignment_substitute(&s, &table()).unwrap();
        let want = "142857 0618 8128 6174 31415926 31415926 6174 142857 31415926 6174 8128 8128 196 196 196";
        assert_eq!(out.to_string(), want.replace(' ', ""));
        let ident: BTreeMap<u8, String> = (0..10).map(|d| (d, d.to_string())).collect();
        assert_eq!(assignment_substitute(&s, &ident).unwrap().to_string(), s.to_string());
        let zero: BTreeMap<u8, String> = (0..10).map(|d| (d, "0".to_string())).collect();
        assert_eq!(assignment_substitute(&s, &zero).unwrap().to_string(), "0".repeat(15));
        let mut partial = table();
        partial.remove(&6);
        assert!(assignment_substitute(&s, &partial).is_err());
    }

    #[test]
    fn h4147_matrices() {
        let fam = adjacency_family(&h4147()).unwrap();
        let a = vec![
            vec![0, 0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 0, 1],
            vec![0, 0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 0, 1],
            vec![1, 0, 1, 0, 0, 1],
            vec![0, 1, 0, 1, 1, 0],
        ];
        let fa = vec![
            vec![0, 0, 0, 0, 4, 0],
            vec![0, 0, 0, 0, 0, 4],
            vec![0, 0, 0, 0, 2, 0],
            vec![0, 0, 0, 0, 0, 2],
            vec![4, 0, 2, 0, 0, 1],
            vec![0, 4, 0, 2, 1, 0],
        ];
        assert_eq!(fam.a, a);
        assert_eq!(fam.colored, fa);
        let printed = vec![
            vec![0, 1, 2, 3, 4, 5, 6],
            vec![1, 0, 0, 0, 0, 1, 0],
            vec![2, 0, 0, 0, 0, 0, 1],
            vec![3, 0, 0, 0, 0, 1, 0],
            vec![4, 0, 0, 0, 0, 0, 1],
            vec![5, 1, 0, 1, 0, 0, 1],
            vec![6, 0, 1, 0, 1, 1, 0],
        ];
        assert_eq!(fam.a_code_binary, printed);
        assert_eq!(fam.a_code[5], vec![5, 4, 0, 2, 0, 0, 1]);
        let edgeless = ColoredGraph::new(Graph::empty(2), vec![3, 7], Some(vec![])).unwrap();
        let f = adjacency_family(&edgeless).unwrap();
        assert_eq!(f.a_code, vec![vec![0, 3, 7], vec![3, 0, 0], vec![7, 0, 0]]);
    }

    #[test]
    fn parameterized_example() {
        let p = reference_param_topcode();
        let text = p.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "d 2d 3d 3d 3d");
        assert_eq!(lines[1], "k+5d k+4d k+3d k+2d k+d");
        assert_eq!(lines[2], "k+6d k+6d k+6d k+5d k+4d");
        let at = p.evaluate(2, 3).unwrap().numeric_rows().unwrap();
        assert_eq!(at, [vec![3, 6, 9, 9, 9], vec![17, 14, 11, 8, 5], vec![20, 20, 20, 17, 14]]);
        assert_eq!(p.evaluate(0, 1).unwrap().numeric_rows().unwrap(), p.base);
        assert!(p.evaluate(1, -1).is_err());
    }

    #[test]
    fn curves() {
        let p = reference_param_topcode();
        let rm = PermIndex::row_major(5);
        let pts = [(1, 1), (2, 4), (3, 9)];
        let s = curve_strings(&p, &pts, &rm).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].to_string(), "123336543277765");
        assert!(curve_strings(&p, &[], &rm).unwrap().is_empty());
        let base = string_from_topcode(&p.evaluate(0, 1).unwrap(), &rm).unwrap();
        assert_eq!(curve_strings(&p, &[(0, 1)], &rm).unwrap()[0].to_string(), base.to_string());
    }

    #[test]
    fn permutation_ranks() {
        let p = PermIndex::from_rank(6, &BigUint::from(719u32)).unwrap();
        assert_eq!(p.sequence(), &[5, 4, 3, 2, 1, 0]);
        assert_eq!(p.rank(), BigUint::from(719u32));
        assert!(PermIndex::from_rank(6, &BigUint::from(720u32)).is_err());
        assert!(PermIndex::from_sequence(vec![0, 0, 1]).is_err());
        let t = TopcodeMatrix::numeric(&[1, 2], &[3, 4], &[5, 6]).unwrap();
        let mut all = BTreeSet::new();
        for r in 0..720u32 {
            let p = PermIndex::from_rank(6, &BigUint::from(r)).unwrap();
            all.insert(string_from_topcode(&t, &p).unwrap().to_string());
        }
        assert_eq!(all.len(), 720);
        let one = TopcodeMatrix::numeric(&[1], &[2], &[3]).unwrap();
        assert_eq!(string_from_topcode(&one, &PermIndex::row_major(1)).unwrap().len(), 3);
    }

    #[test]
    fn edgeless_rejected_and_nested_cells_refused() {
        let g = ColoredGraph::new(Graph::empty(2), vec![0, 1], Some(vec![])).unwrap();
        assert!(topcode_from_graph(&g, None).is_err());
        let inner = TopcodeMatrix::numeric(&[1], &[1], &[2]).unwrap();
        let nested = TopcodeMatrix::new(
            vec![Cell::Nested(Box::new(inner))],
            vec![Cell::Num(1)],
            vec![Cell::Num(2)],
        )
        .unwrap();
        assert!(string_from_topcode(&nested, &PermIndex::row_major(1)).is_err());
    }

    #[test]
    fn json_shape() {
        let [g, ..] = example1_matrices();
        let j = serde_json::to_value(&g).unwrap();
        assert_eq!(j["q"], 5);
        assert_eq!(j["X"][0], 1);
        let back: TopcodeMatrix = serde_json::from_value(j).unwrap();
        assert_eq!(back, g);
        let bad = serde_json::json!({"q": 2, "X": [1], "E": [1], "Y": [2]});
        assert!(serde_json::from_value::<TopcodeMatrix>(bad).is_err());
    }

    #[test]
    fn set_ordered_orientation() {
        // Set-ordered P_3 stored with the high end first.
        let g = ColoredGraph::with_difference_edges(Graph::new(3, vec![(1, 0), (2, 1)]).unwrap(), vec![0, 3, 2]);
        let t = topcode_from_graph(&g, None).unwrap();
        let [x, _, y] = t.numeric_rows().unwrap();
        assert_eq!(x, vec![0, 2]);
        assert_eq!(y, vec![3, 3]);
    }

    #[test]
    fn pronbs_examples() {
        let b = PronbsBounds { max_q: 3, ..Default::default() };
        // Set-ordered graceful path 0-3-1-2 with X={0,1}, Y={3,2}: columns (0,3,3),(1,2,3),(1,1,2).
        let base = vec![(0, 3, 3), (1, 2, 3), (1, 1, 2)];
        let src = PronbsCandidate {
            q: 3,
            order: ReadOrder::RowMajor,
            k: 2,
            d: 1,
            base: base.clone(),
            segments: Vec::new(),
        };
        let s = src.regenerate().unwrap();
        let cands = pronbs_solve(&s, &b, Exec::Auto).unwrap();
        assert!(cands.iter().any(|c| c.base == base && c.k == 2 && c.d == 1 && c.order == ReadOrder::RowMajor));
        for c in &cands {
            assert_eq!(c.regenerate().unwrap().to_string(), s.to_string());
        }
        let zeros = DigitString::parse("000000000", Ring::Mod10).unwrap();
        let so = PronbsBounds { set_ordered: true, ..b };
        assert!(pronbs_solve(&zeros, &so, Exec::Auto).unwrap().is_empty());
        assert!(pronbs_solve(&s, &PronbsBounds { max_q: 6, ..b }, Exec::Auto).is_err());
    }

    #[test]
    fn pronbs_finds_example1_graph() {
        let s = DigitString::parse("135244214255666", Ring::Mod10).unwrap();
        let cands = pronbs_solve(&s, &PronbsBounds::default(), Exec::Auto).unwrap();
        let g = h4147();
        assert!(cands
            .iter()
            .filter(|c| c.q == 5)
            .any(|c| are_isomorphic(&c.graph().unwrap().graph, &g.graph).unwrap()));
    }

    #[test]
    fn nested_matrices() {
        use crate::labeling_engine::compose_string_coloring;
        let g = Graph::path(4);
        let a = ColoredGraph::with_difference_edges(g.clone(), vec![0, 3, 1, 2]);
        let b = ColoredGraph::with_difference_edges(g.clone(), vec![3, 0, 2, 1]);
        let sc = compose_string_coloring(&g, &[a, b]).unwrap();
        let n = nested_topcode(&sc).unwrap();
        assert_eq!(n.columns.len(), 3);
        assert!(n.columns.iter().all(|m| m.q() == 2));
        let flat = n.flatten().unwrap();
        let direct = topcode_from_string_coloring(&sc).unwrap();
        let rm = PermIndex::row_major(3);
        assert_eq!(string_from_topcode(&flat, &rm).unwrap(), string_from_topcode(&direct, &rm).unwrap());
        let one = Graph::path(2);
        let c1 = ColoredGraph::with_difference_edges(one.clone(), vec![0, 1]);
        let c2 = ColoredGraph::with_difference_edges(one.clone(), vec![1, 0]);
        let sc1 = compose_string_coloring(&one, &[c1, c2]).unwrap();
        let n1 = nested_topcode(&sc1).unwrap();
        assert_eq!(n1.columns.len(), 1);
        assert_eq!(n1.columns[0].q(), 2);
        let mut ragged = sc1;
        ragged.vcolors[0].push(9);
        assert!(nested_topcode(&ragged).is_err());
    }
}
