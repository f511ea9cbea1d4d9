//! `[0,9]`-strings, their digit-wise arithmetic, every-zero string groups,
//! super-strings, self-breeding sets, multi-level strings and partition strings.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use itertools::Itertools;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Digit-ring convention.
///
/// `Mod10` is ordinary arithmetic mod 10. `Mod9` is the "lazy" fold: a result
/// already in `[0,9]` is kept, anything outside is reduced mod 9. Equality
/// under `Mod9` compares residues, so a displayed 9 equals 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Ring {
    #[default]
    Mod10,
    Mod9,
}

impl Ring {
    #[must_use]
    pub fn modulus(self) -> i64 {
        match self {
            Ring::Mod10 => 10,
            Ring::Mod9 => 9,
        }
    }

    #[must_use]
    pub fn reduce(self, r: i64) -> u8 {
        match self {
            Ring::Mod10 => r.rem_euclid(10) as u8,
            Ring::Mod9 => {
                if (0..=9).contains(&r) {
                    r as u8
                } else {
                    r.rem_euclid(9) as u8
                }
            }
        }
    }

    #[must_use]
    pub fn residue(self, d: u8) -> u8 {
        match self {
            Ring::Mod10 => d % 10,
            Ring::Mod9 => d % 9,
        }
    }
}

impl std::str::FromStr for Ring {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mod10" | "10" => Ok(Ring::Mod10),
            "mod9" | "9" => Ok(Ring::Mod9),
            other => Err(Error::Parse(format!("unknown ring {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DigitOp {
    Add,
    Sub,
}

/// A non-empty finite sequence of decimal digits with its ring.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DigitString {
    digits: Vec<u8>,
    ring: Ring,
}

impl DigitString {
    pub fn new(digits: Vec<u8>, ring: Ring) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::BadDigits("empty".into()));
        }
        if let Some(d) = digits.iter().find(|&&d| d > 9) {
            return Err(Error::BadDigits(format!("digit {d} out of [0,9]")));
        }
        Ok(Self { digits, ring })
    }

    pub fn parse(s: &str, ring: Ring) -> Result<Self> {
        let digits = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::BadDigits(s.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(digits, ring)
    }

    /// Decimal rendering of a non-negative integer as a `Mod10` string.
    #[must_use]
    pub fn from_u64(v: u64) -> Self {
        Self::parse(&v.to_string(), Ring::Mod10).expect("decimal digits")
    }

    #[must_use]
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    #[must_use]
    pub fn ring(&self) -> Ring {
        self.ring
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    #[must_use]
    pub fn with_ring(&self, ring: Ring) -> Self {
        Self { digits: self.digits.clone(), ring }
    }

    /// Render with 9 standing for a zero residue (only meaningful under `Mod9`).
    #[must_use]
    pub fn display_nine_for_zero(&self) -> String {
        self.digits
            .iter()
            .map(|&d| if d == 0 { '9' } else { char::from(b'0' + d) })
            .collect()
    }

    #[must_use]
    pub fn concat(parts: &[DigitString]) -> Option<DigitString> {
        let first = parts.first()?;
        let digits = parts.iter().flat_map(|p| p.digits.iter().copied()).collect();
        Some(Self { digits, ring: first.ring })
    }

    #[must_use]
    pub fn is_palindrome(&self) -> bool {
        self.digits.iter().eq(self.digits.iter().rev())
    }
}

impl PartialEq for DigitString {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.digits.len() == other.digits.len()
            && self
                .digits
                .iter()
                .zip(&other.digits)
                .all(|(&a, &b)| self.ring.residue(a) == self.ring.residue(b))
    }
}

impl Eq for DigitString {}

impl Hash for DigitString {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ring.hash(state);
        for &d in &self.digits {
            self.ring.residue(d).hash(state);
        }
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

fn check_pair(a: &DigitString, b: &DigitString) -> Result<()> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch);
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// Position-wise `a [+] b` or `a [-] b` reduced per the shared ring.
pub fn digit_combine(a: &DigitString, b: &DigitString, op: DigitOp) -> Result<DigitString> {
    check_pair(a, b)?;
    let ring = a.ring;
    let digits = a
        .digits
        .iter()
        .zip(&b.digits)
        .map(|(&x, &y)| {
            let (x, y) = (i64::from(x), i64::from(y));
            ring.reduce(match op {
                DigitOp::Add => x + y,
                DigitOp::Sub => x - y,
            })
        })
        .collect();
    Ok(DigitString { digits, ring })
}

pub fn add(a: &DigitString, b: &DigitString) -> Result<DigitString> {
    digit_combine(a, b, DigitOp::Add)
}

pub fn sub(a: &DigitString, b: &DigitString) -> Result<DigitString> {
    digit_combine(a, b, DigitOp::Sub)
}

/// Each digit `c` becomes `9 - c`.
#[must_use]
pub fn complement(s: &DigitString) -> DigitString {
    DigitString { digits: s.digits.iter().map(|&d| 9 - d).collect(), ring: s.ring }
}

#[must_use]
pub fn reverse(s: &DigitString) -> DigitString {
    DigitString { digits: s.digits.iter().rev().copied().collect(), ring: s.ring }
}

pub fn scalar_mul(k: u32, s: &DigitString) -> Result<DigitString> {
    if k == 0 {
        return Err(Error::InvalidParam("scalar must be >= 1".into()));
    }
    let ring = s.ring;
    let digits = s.digits.iter().map(|&d| ring.reduce(i64::from(k) * i64::from(d))).collect();
    Ok(DigitString { digits, ring })
}

/// Every-zero operation flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupMode {
    /// `s_i [+] s_j [-] s_z`, index `i + j - z`.
    AddSub,
    /// `s_i [-] s_j [+] s_z`, index `i - j + z`.
    SubAdd,
}

/// Shift-generated every-zero string group. Indices are 1-based: element `t`
/// is the seed advanced `t - 1` times by `k` at every active position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StringGroup {
    pub seed: DigitString,
    pub k: u32,
    pub m: usize,
    pub ring: Ring,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<BTreeSet<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moduli: Option<Vec<u8>>,
    #[serde(skip)]
    elements: Vec<DigitString>,
    #[serde(skip)]
    collisions: bool,
}

impl StringGroup {
    fn active(&self, pos: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m.contains(&pos))
    }

    fn reduce_at(&self, pos: usize, r: i64) -> u8 {
        match &self.moduli {
            Some(mods) => r.rem_euclid(i64::from(mods[pos])) as u8,
            None => self.ring.reduce(r),
        }
    }

    fn residue_at(&self, pos: usize, d: u8) -> u8 {
        match &self.moduli {
            Some(mods) => d % mods[pos],
            None => self.ring.residue(d),
        }
    }

    fn step(&self, s: &DigitString) -> DigitString {
        let digits = s
            .digits
            .iter()
            .enumerate()
            .map(|(p, &d)| {
                if self.active(p) {
                    self.reduce_at(p, i64::from(d) + i64::from(self.k))
                } else {
                    d
                }
            })
            .collect();
        DigitString { digits, ring: s.ring }
    }

    fn rebuild(mut self) -> Result<Self> {
        let n = self.seed.len();
        if let Some(mask) = &self.mask {
            if let Some(&p) = mask.iter().find(|&&p| p >= n) {
                return Err(Error::InvalidParam(format!("mask position {p} beyond length {n}")));
            }
        }
        if let Some(mods) = &self.moduli {
            if mods.len() != n {
                return Err(Error::LengthMismatch { left: mods.len(), right: n });
            }
            if mods.iter().any(|&m| !(2..=10).contains(&m)) {
                return Err(Error::InvalidParam("position moduli must lie in [2,10]".into()));
            }
            for (p, (&d, &m)) in self.seed.digits.iter().zip(mods).enumerate() {
                if d >= m && self.active(p) {
                    return Err(Error::InvalidParam(format!("seed digit {d} not below modulus {m}")));
                }
            }
        }
        let active: Vec<usize> = (0..n).filter(|&p| self.active(p)).collect();
        let modulus_at = |p: usize| -> u64 {
            self.moduli.as_ref().map_or(self.ring.modulus() as u64, |m| u64::from(m[p]))
        };
        for &p in &active {
            if !(self.m as u64 * u64::from(self.k)).is_multiple_of(modulus_at(p)) {
                return Err(Error::InvalidParam(format!(
                    "order {} with step {} does not cycle at position {p} (modulus {})",
                    self.m,
                    self.k,
                    modulus_at(p)
                )));
            }
        }
        self.collisions = (1..self.m as u64)
            .any(|t| active.iter().all(|&p| (t * u64::from(self.k)) % modulus_at(p) == 0));
        let mut elements = Vec::with_capacity(self.m);
        let mut cur = self.seed.clone();
        for _ in 0..self.m {
            elements.push(cur.clone());
            cur = self.step(&cur);
        }
        self.elements = elements;
        Ok(self)
    }

    /// Restore derived state after deserialization.
    pub fn validated(self) -> Result<Self> {
        self.rebuild()
    }

    #[must_use]
    pub fn elements(&self) -> &[DigitString] {
        &self.elements
    }

    /// True when two distinct indices name the same string.
    #[must_use]
    pub fn has_collisions(&self) -> bool {
        self.collisions
    }

    pub fn element(&self, i: usize) -> Result<&DigitString> {
        if i == 0 || i > self.m {
            return Err(Error::IndexOutOfRange { index: i as i64, order: self.m });
        }
        Ok(&self.elements[i - 1])
    }

    fn wrap(&self, v: i64) -> usize {
        ((v - 1).rem_euclid(self.m as i64) + 1) as usize
    }

    /// Digit-wise evaluation of the mixed operation, position moduli honoured.
    pub fn compute(&self, i: usize, j: usize, zero: usize, mode: GroupMode) -> Result<DigitString> {
        let (a, b, z) = (self.element(i)?, self.element(j)?, self.element(zero)?);
        let digits = (0..a.len())
            .map(|p| {
                let (x, y, w) = (i64::from(a.digits[p]), i64::from(b.digits[p]), i64::from(z.digits[p]));
                match mode {
                    GroupMode::AddSub => {
                        let t = self.reduce_at(p, x + y);
                        self.reduce_at(p, i64::from(t) - w)
                    }
                    GroupMode::SubAdd => {
                        let t = self.reduce_at(p, x - y);
                        self.reduce_at(p, i64::from(t) + w)
                    }
                }
            })
            .collect();
        Ok(DigitString { digits, ring: self.ring })
    }

    /// Position-wise residue comparison under this group's moduli.
    #[must_use]
    pub fn same(&self, a: &DigitString, b: &DigitString) -> bool {
        a.len() == b.len()
            && (0..a.len()).all(|p| self.residue_at(p, a.digits[p]) == self.residue_at(p, b.digits[p]))
    }
}

/// Index of the mixed operation on `g` with preappointed zero.
pub fn group_op(g: &StringGroup, i: usize, j: usize, zero: usize, mode: GroupMode) -> Result<usize> {
    for idx in [i, j, zero] {
        g.element(idx)?;
    }
    let (i, j, z) = (i as i64, j as i64, zero as i64);
    Ok(match mode {
        GroupMode::AddSub => g.wrap(i + j - z),
        GroupMode::SubAdd => g.wrap(i - j + z),
    })
}

pub fn build_shift_group(
    seed: &DigitString,
    k: u32,
    m: usize,
    mask: Option<BTreeSet<usize>>,
    moduli: Option<Vec<u8>>,
) -> Result<StringGroup> {
    if m < 2 {
        return Err(Error::InvalidParam("group order must be >= 2".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParam("step must be >= 1".into()));
    }
    StringGroup {
        seed: seed.clone(),
        k,
        m,
        ring: seed.ring,
        mask,
        moduli,
        elements: Vec::new(),
        collisions: false,
    }
    .rebuild()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub value: u64,
    pub modulus: u64,
}

/// Number-based super-string: segments each living modulo `10^a - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperString {
    segments: Vec<Segment>,
}

fn is_nines(m: u64) -> bool {
    m > 0 && m.to_string().bytes().all(|b| b == b'9')
}

impl SuperString {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParam("super-string needs a segment".into()));
        }
        for s in &segments {
            if !is_nines(s.modulus) {
                return Err(Error::InvalidParam(format!("modulus {} is not of form 10^a - 1", s.modulus)));
            }
            if s.value > s.modulus {
                return Err(Error::InvalidParam(format!("value {} exceeds modulus {}", s.value, s.modulus)));
            }
        }
        Ok(Self { segments })
    }

    /// Parse `"6174|9999,123|999"`.
    pub fn parse(text: &str) -> Result<Self> {
        let segments = text
            .split(',')
            .map(|seg| {
                let (v, m) = seg
                    .trim()
                    .split_once('|')
                    .ok_or_else(|| Error::Parse(format!("segment {seg:?} lacks '|'")))?;
                let value = v.trim().parse().map_err(|_| Error::Parse(v.to_string()))?;
                let modulus = m.trim().parse().map_err(|_| Error::Parse(m.to_string()))?;
                Ok(Segment { value, modulus })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(segments)
    }

    #[must_use]
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    #[must_use]
    pub fn values(&self) -> Vec<u64> {
        self.segments.iter().map(|s| s.value).collect()
    }

    /// Segment-wise residue equality.
    #[must_use]
    pub fn equivalent(&self, other: &SuperString) -> bool {
        self.segments.len() == other.segments.len()
            && self.segments.iter().zip(&other.segments).all(|(a, b)| {
                a.modulus == b.modulus && a.value % a.modulus == b.value % b.modulus
            })
    }
}

impl fmt::Display for SuperString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = self.segments.iter().map(|s| format!("{}|{}", s.value, s.modulus)).join(",");
        f.write_str(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Add or subtract `t` from every segment, each reduced in its own modulus.
/// A result already within `[0, modulus]` is kept as is.
#[must_use]
pub fn super_arith(s: &SuperString, t: u64, sign: Sign) -> SuperString {
    let segments = s
        .segments
        .iter()
        .map(|seg| {
            let m = i128::from(seg.modulus);
            let r = match sign {
                Sign::Plus => i128::from(seg.value) + i128::from(t),
                Sign::Minus => i128::from(seg.value) - i128::from(t),
            };
            let v = if (0..=m).contains(&r) { r } else { r.rem_euclid(m) };
            Segment { value: v as u64, modulus: seg.modulus }
        })
        .collect();
    SuperString { segments }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreedReport {
    pub depth: u32,
    /// Number of strings in the bred set at this depth.
    #[serde(serialize_with = "ser_decimal")]
    pub count: BigUint,
    /// Length in bytes of one string at this depth.
    #[serde(serialize_with = "ser_decimal")]
    pub string_len: BigUint,
    /// `count * string_len`.
    #[serde(serialize_with = "ser_decimal")]
    pub total_bytes: BigUint,
    pub samples: Vec<String>,
}

fn ser_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::from(1u32), |acc, k| acc * k)
}

const MAX_FACTORIAL_ARG: u64 = 5040;
const MAX_ENUMERATE: usize = 6;

fn all_perm_concats(set: &[String]) -> Vec<String> {
    (0..set.len())
        .permutations(set.len())
        .map(|p| p.iter().map(|&i| set[i].as_str()).collect())
        .collect()
}

/// Self-breeding: level `t` is every concatenation order of the level `t-1`
/// set. Counts are exact; only up to `limit` strings are materialized.
pub fn self_breed(set: &[DigitString], depth: u32, limit: usize, seed: u64) -> Result<BreedReport> {
    if set.len() < 2 {
        return Err(Error::InvalidParam("self-breeding needs at least two strings".into()));
    }
    if depth == 0 {
        return Err(Error::InvalidParam("depth must be >= 1".into()));
    }
    let mut count = BigUint::from(set.len());
    let mut len = BigUint::from(0u32);
    for t in 1..=depth {
        let prev = u64::try_from(&count)
            .ok()
            .filter(|&c| c <= MAX_FACTORIAL_ARG)
            .ok_or_else(|| Error::TooLarge(format!("level {t} needs the factorial of {count}")))?;
        len = if t == 1 {
            BigUint::from(set.iter().map(DigitString::len).sum::<usize>())
        } else {
            len * prev
        };
        count = factorial(prev);
    }
    let total_bytes = &count * &len;

    // materialize the level below `depth` if it is small enough to enumerate
    let mut level: Vec<String> = set.iter().map(ToString::to_string).collect();
    let mut reachable = true;
    for _ in 1..depth {
        if level.len() > MAX_ENUMERATE {
            reachable = false;
            break;
        }
        level = all_perm_concats(&level);
    }
    let mut samples = Vec::new();
    if reachable && limit > 0 {
        if level.len() <= MAX_ENUMERATE && factorial(level.len() as u64) <= BigUint::from(limit) {
            samples = all_perm_concats(&level);
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..level.len()).collect();
            for _ in 0..limit {
                idx.shuffle(&mut rng);
                samples.push(idx.iter().map(|&i| level[i].as_str()).collect());
            }
        }
    }
    Ok(BreedReport { depth, count, string_len: len, total_bytes, samples })
}

/// Nested rank tree of an m-level string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RankTree {
    Leaf(DigitString),
    Node(Vec<RankTree>),
}

pub fn flatten_multilevel(tree: &RankTree) -> Result<DigitString> {
    fn walk(t: &RankTree, out: &mut Vec<DigitString>) -> Result<()> {
        match t {
            RankTree::Leaf(s) => out.push(s.clone()),
            RankTree::Node(children) => {
                if children.is_empty() {
                    return Err(Error::InvalidParam("empty node in rank tree".into()));
                }
                for c in children {
                    walk(c, out)?;
                }
            }
        }
        Ok(())
    }
    let mut leaves = Vec::new();
    walk(tree, &mut leaves)?;
    Ok(DigitString::concat(&leaves).expect("at least one leaf"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    Sum,
    Product,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub target: u64,
    pub parts: Vec<u64>,
    pub mode: PartitionMode,
}

impl PartitionSpec {
    pub fn new(target: u64, parts: Vec<u64>, mode: PartitionMode) -> Result<Self> {
        let ok = match mode {
            PartitionMode::Sum => !parts.is_empty() && parts.iter().all(|&p| p > 0) && parts.iter().sum::<u64>() == target,
            PartitionMode::Product => {
                !parts.is_empty() && parts.iter().all(|&p| p >= 3) && parts.iter().product::<u64>() == target
            }
        };
        if !ok {
            return Err(Error::InvalidParam(format!("{parts:?} is not a {mode:?} split of {target}")));
        }
        Ok(Self { target, parts, mode })
    }

    /// Parts written in order, without separators.
    #[must_use]
    pub fn string(&self) -> DigitString {
        DigitString::parse(&self.parts.iter().join(""), Ring::Mod10).expect("decimal parts")
    }
}

fn sum_partitions(rest: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>, limit: usize) {
    if out.len() >= limit {
        return;
    }
    if rest == 0 {
        if cur.len() >= 2 {
            out.push(cur.clone());
        }
        return;
    }
    for p in (1..=max.min(rest)).rev() {
        cur.push(p);
        sum_partitions(rest - p, p, cur, out, limit);
        cur.pop();
    }
}

fn factorizations(rest: u64, max: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>, limit: usize) {
    if out.len() >= limit {
        return;
    }
    if rest == 1 {
        if cur.len() >= 2 {
            out.push(cur.clone());
        }
        return;
    }
    for p in (3..=max.min(rest)).rev() {
        if rest.is_multiple_of(p) {
            cur.push(p);
            factorizations(rest / p, p, cur, out, limit);
            cur.pop();
        }
    }
}

/// Proper partitions (≥ 2 parts) or factorizations into factors ≥ 3, each as
/// non-increasing parts, listed in descending lexicographic order.
pub fn partition_strings(m: u64, mode: PartitionMode, limit: Option<usize>) -> Result<Vec<(PartitionSpec, DigitString)>> {
    let limit = limit.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    match mode {
        PartitionMode::Sum => {
            if m < 2 {
                return Err(Error::InvalidParam("sum partitions need m >= 2".into()));
            }
            sum_partitions(m, m - 1, &mut Vec::new(), &mut out, limit);
        }
        PartitionMode::Product => {
            if m == 0 {
                return Err(Error::InvalidParam("product decompositions need m >= 1".into()));
            }
            factorizations(m, m / 3, &mut Vec::new(), &mut out, limit);
        }
    }
    Ok(out
        .into_iter()
        .map(|parts| {
            let spec = PartitionSpec { target: m, parts, mode };
            let s = spec.string();
            (spec, s)
        })
        .collect())
}
