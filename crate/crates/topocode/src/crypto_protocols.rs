//! Toy key pairs, authentications and deterministic protocol simulations.
//!
//! Nothing here is secure: the cipher is an additive digit keystream, used
//! only to make layer discipline and key dependence observable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph_core::{are_isomorphic, split_complete_even, vertex_coincide, ColoredGraph, CoincideRule, Graph};
use crate::group_algebra::{build_graphic_group, group_compound, stored_topcode, CompoundGroup, GraphicGroup, GroupIndex};
use crate::labeling_engine::{check_twin_odd_graceful, twin_shift};
use crate::string_algebra::{partition_strings, DigitString, PartitionMode, PartitionSpec, Ring};
use crate::topcode::{
    assignment_substitute, example1_matrices, graph_from_topcode, h4147, string_from_topcode, topcode_from_graph,
    PermIndex, TopcodeMatrix,
};

// ---------------------------------------------------------------------------
// Cipher and layers

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Encrypt,
    Decrypt,
}

/// Byte `i` moves by `± key[i mod |key|]` modulo 256.
pub fn keystream_cipher(data: &[u8], key: &DigitString, dir: Direction) -> Result<Vec<u8>> {
    if key.is_empty() {
        return Err(Error::InvalidParam("empty key".into()));
    }
    let k = key.digits();
    Ok(data
        .iter()
        .enumerate()
        .map(|(i, &b)| match dir {
            Direction::Encrypt => b.wrapping_add(k[i % k.len()]),
            Direction::Decrypt => b.wrapping_sub(k[i % k.len()]),
        })
        .collect())
}

#[must_use]
pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

const TAG: usize = 8;

fn layer_tag(label: &str, key: &DigitString, inner: &[u8]) -> Vec<u8> {
    let mut h = Sha256::new();
    h.update(label.as_bytes());
    h.update([0]);
    h.update(key.digits());
    h.update([0]);
    h.update(inner);
    h.finalize()[..TAG].to_vec()
}

/// One protection level: keystream over `tag ‖ inner`.
pub fn seal(inner: &[u8], key: &DigitString, label: &str) -> Result<Vec<u8>> {
    let mut framed = layer_tag(label, key, inner);
    framed.extend_from_slice(inner);
    keystream_cipher(&framed, key, Direction::Encrypt)
}

/// Remove one level; a wrong key, label or order fails the tag.
pub fn open(outer: &[u8], key: &DigitString, label: &str) -> Result<Vec<u8>> {
    let framed = keystream_cipher(outer, key, Direction::Decrypt)?;
    if framed.len() < TAG {
        return Err(Error::AuthFailed { step: label.into(), reason: "truncated layer".into() });
    }
    let (tag, inner) = framed.split_at(TAG);
    if tag != layer_tag(label, key, inner).as_slice() {
        return Err(Error::AuthFailed { step: label.into(), reason: "layer tag mismatch".into() });
    }
    Ok(inner.to_vec())
}

/// Layers as applied (innermost first).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Onion {
    pub ciphertext: Vec<u8>,
    pub layers: Vec<(String, DigitString)>,
}

impl Onion {
    /// Peel in the given order of layer positions.
    pub fn peel(&self, order: &[usize]) -> Result<Vec<u8>> {
        let mut cur = self.ciphertext.clone();
        for &i in order {
            let (label, key) = self.layers.get(i).ok_or_else(|| Error::InvalidParam(format!("no layer {i}")))?;
            cur = open(&cur, key, label)?;
        }
        Ok(cur)
    }

    #[must_use]
    pub fn correct_order(&self) -> Vec<usize> {
        (0..self.layers.len()).rev().collect()
    }
}

// ---------------------------------------------------------------------------
// Key material

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Key {
    Graph(ColoredGraph),
    Str(DigitString),
}

impl Key {
    /// Cipher key: the string itself, or a graph's row-major Topcode string.
    pub fn key_string(&self) -> Result<DigitString> {
        match self {
            Key::Str(s) => Ok(s.clone()),
            Key::Graph(g) => {
                let t = stored_topcode(g)?;
                string_from_topcode(&t, &PermIndex::row_major(t.q()))
            }
        }
    }

    /// Canonical single-component corruption: bump the first edge color or
    /// the first digit.
    #[must_use]
    pub fn corrupted(&self) -> Key {
        match self {
            Key::Graph(g) => {
                let mut g = g.clone();
                if let Some(e) = g.ecolors.as_mut().and_then(|e| e.first_mut()) {
                    *e = (*e + 1) % 10;
                }
                Key::Graph(g)
            }
            Key::Str(s) => {
                let mut d = s.digits().to_vec();
                if let Some(x) = d.first_mut() {
                    *x = (*x + 1) % 10;
                }
                Key::Str(DigitString::new(d, s.ring()).expect("digits stay in range"))
            }
        }
    }

    fn bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("serializable")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyKind {
    Graph,
    Str,
}

/// Graphic group on Example 1's public graph together with its row-major
/// string group; order 10 keeps every cell a single digit.
#[derive(Debug, Clone, Serialize)]
pub struct KeyGroup {
    pub compound: CompoundGroup,
}

impl KeyGroup {
    pub fn new(base: &ColoredGraph, m: u64) -> Result<Self> {
        if !(2..=10).contains(&m) {
            return Err(Error::InvalidParam("key group order must lie in [2,10]".into()));
        }
        let q = base.graph.q();
        Ok(Self { compound: group_compound(base, m, &PermIndex::row_major(q))? })
    }

    #[must_use]
    pub fn standard() -> Self {
        Self::new(&h4147(), 10).expect("valid standard group")
    }

    #[must_use]
    pub fn order(&self) -> u64 {
        self.compound.order() as u64
    }

    pub fn element(&self, kind: KeyKind, i: u64) -> Result<Key> {
        if i >= self.order() {
            return Err(Error::IndexOutOfRange { index: i as i64, order: self.order() as usize });
        }
        Ok(match kind {
            KeyKind::Graph => Key::Graph(self.compound.graphic.element(GroupIndex::Single(i))?),
            KeyKind::Str => Key::Str(self.compound.strings[i as usize].clone()),
        })
    }

    /// Element-wise `a ⊕ b ⊖ z` (mod the group order).
    pub fn combine(&self, a: &Key, b: &Key, z: &Key) -> Result<Key> {
        let m = self.order() as i64;
        let mix = |x: &[i64], y: &[i64], w: &[i64]| -> Result<Vec<i64>> {
            if x.len() != y.len() || y.len() != w.len() {
                return Err(Error::LengthMismatch { left: x.len(), right: y.len().max(w.len()) });
            }
            Ok(x.iter().zip(y).zip(w).map(|((a, b), c)| (a + b - c).rem_euclid(m)).collect())
        };
        match (a, b, z) {
            (Key::Graph(a), Key::Graph(b), Key::Graph(z)) => {
                if a.graph != b.graph || b.graph != z.graph {
                    return Err(Error::InvalidGraph("key graphs differ in structure".into()));
                }
                let v = mix(&a.vcolors, &b.vcolors, &z.vcolors)?;
                let e = mix(a.edge_colors()?, b.edge_colors()?, z.edge_colors()?)?;
                Ok(Key::Graph(ColoredGraph::new(a.graph.clone(), v, Some(e))?))
            }
            (Key::Str(a), Key::Str(b), Key::Str(z)) => {
                let c = |s: &DigitString| s.digits().iter().map(|&d| i64::from(d)).collect::<Vec<_>>();
                let d = mix(&c(a), &c(b), &c(z))?.into_iter().map(|x| x as u8).collect();
                Ok(Key::Str(DigitString::new(d, Ring::Mod10)?))
            }
            _ => Err(Error::InvalidParam("mixed key kinds".into())),
        }
    }
}

/// Registered indices of one key pair: signature = public ⊕ private ⊖ zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub kind: KeyKind,
    pub public: u64,
    pub private: u64,
    pub zero: u64,
    pub signature: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeySlot {
    pub public: Key,
    pub private: Key,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AuthKind {
    GroupOp,
    GraphCoincide,
    StringTwin,
    BipartiteComplement,
    TwinLabeling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthRecord {
    pub kind: AuthKind,
    /// sha256 over the serialized inputs.
    pub inputs: String,
    pub result: String,
    pub verdict: bool,
    pub detail: String,
}

/// The agreed (or center-held) registrations; public information.
#[derive(Debug, Clone, Serialize)]
pub struct Registry {
    pub group: KeyGroup,
    pub slots: BTreeMap<String, SlotRecord>,
}

impl Registry {
    #[must_use]
    pub fn new(group: KeyGroup) -> Self {
        Self { group, slots: BTreeMap::new() }
    }

    fn sig_index(&self, public: u64, private: u64, zero: u64) -> u64 {
        let m = self.group.order();
        (public + private + m - zero) % m
    }

    /// Register a pair and hand out its keys.
    pub fn issue(&mut self, slot: &str, kind: KeyKind, public: u64, private: u64, zero: u64) -> Result<KeySlot> {
        let keys = KeySlot { public: self.group.element(kind, public)?, private: self.group.element(kind, private)? };
        self.group.element(kind, zero)?;
        let signature = self.sig_index(public, private, zero);
        self.slots.insert(slot.to_string(), SlotRecord { kind, public, private, zero, signature });
        Ok(keys)
    }

    pub fn record(&self, slot: &str) -> Result<&SlotRecord> {
        self.slots.get(slot).ok_or_else(|| Error::MissingMaterial(format!("no registration for {slot}")))
    }

    pub fn zero_key(&self, slot: &str) -> Result<Key> {
        let r = self.record(slot)?;
        self.group.element(r.kind, r.zero)
    }

    pub fn signature_key(&self, slot: &str) -> Result<Key> {
        let r = self.record(slot)?;
        self.group.element(r.kind, r.signature)
    }

    /// `public ⊕ private ⊖ zero` must equal the registered signature.
    pub fn authenticate(&self, slot: &str, public: &Key, private: &Key) -> Result<AuthRecord> {
        let computed = self.group.combine(public, private, &self.zero_key(slot)?);
        let sig = self.signature_key(slot)?;
        let inputs = sha256_hex(&[public.bytes(), private.bytes()].concat());
        Ok(match computed {
            Ok(c) => AuthRecord {
                kind: AuthKind::GroupOp,
                inputs,
                result: sha256_hex(&c.bytes()),
                verdict: c == sig,
                detail: if c == sig { "signature matches".into() } else { format!("{slot}: signature mismatch") },
            },
            Err(e) => AuthRecord {
                kind: AuthKind::GroupOp,
                inputs,
                result: String::new(),
                verdict: false,
                detail: e.to_string(),
            },
        })
    }

    /// `signature ⊕ zero ⊖ known` recovers the other half of the pair.
    pub fn derive_other(&self, slot: &str, known: &Key) -> Result<Key> {
        self.group.combine(&self.signature_key(slot)?, &self.zero_key(slot)?, known)
    }

    /// Replace the zero of every registration (drawn from `seed` when `new`
    /// is absent) and recompute all signatures. Returns the zero used.
    pub fn rotate_zero(&mut self, new: Option<u64>, seed: u64) -> Result<u64> {
        let m = self.group.order();
        let z = match new {
            Some(z) if z >= m => return Err(Error::IndexOutOfRange { index: z as i64, order: m as usize }),
            Some(z) => z,
            None => ChaCha8Rng::seed_from_u64(seed).gen_range(0..m),
        };
        for r in self.slots.values_mut() {
            r.zero = z;
            r.signature = (r.public + r.private + m - z) % m;
        }
        Ok(z)
    }

    /// True when a previously issued record still matches the registry.
    #[must_use]
    pub fn is_current(&self, slot: &str, record: &SlotRecord) -> bool {
        self.slots.get(slot) == Some(record)
    }
}

// ---------------------------------------------------------------------------
// Key pairs from topological sources

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KeyBundle {
    pub graphs: Vec<ColoredGraph>,
    pub strings: Vec<DigitString>,
}

/// Partition with two adjacent refined parts: the public string refines part
/// `j`, the private one part `j + 1`, the authentication string both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinPartition {
    pub spec: PartitionSpec,
    pub j: usize,
    pub public_refine: Vec<u64>,
    pub private_refine: Vec<u64>,
}

fn join(parts: &[u64]) -> String {
    parts.iter().map(u64::to_string).collect()
}

impl TwinPartition {
    pub fn new(spec: PartitionSpec, j: usize, public_refine: Vec<u64>, private_refine: Vec<u64>) -> Result<Self> {
        if j + 1 >= spec.parts.len() {
            return Err(Error::InvalidParam("twin parts need positions j and j+1".into()));
        }
        let ok = |r: &[u64], whole: u64| {
            r.len() >= 2
                && match spec.mode {
                    PartitionMode::Sum => r.iter().all(|&x| x > 0) && r.iter().sum::<u64>() == whole,
                    PartitionMode::Product => r.iter().all(|&x| x > 1) && r.iter().product::<u64>() == whole,
                }
        };
        if !ok(&public_refine, spec.parts[j]) || !ok(&private_refine, spec.parts[j + 1]) {
            return Err(Error::InvalidParam("refinement does not recompose its part".into()));
        }
        Ok(Self { spec, j, public_refine, private_refine })
    }

    fn render(&self, pub_r: bool, pri_r: bool) -> String {
        let p = &self.spec.parts;
        let mut out = join(&p[..self.j]);
        out += &if pub_r { join(&self.public_refine) } else { p[self.j].to_string() };
        out += &if pri_r { join(&self.private_refine) } else { p[self.j + 1].to_string() };
        out += &join(&p[self.j + 2..]);
        out
    }

    #[must_use]
    pub fn public_string(&self) -> DigitString {
        DigitString::parse(&self.render(true, false), Ring::Mod10).expect("decimal")
    }

    #[must_use]
    pub fn private_string(&self) -> DigitString {
        DigitString::parse(&self.render(false, true), Ring::Mod10).expect("decimal")
    }

    #[must_use]
    pub fn auth_string(&self) -> DigitString {
        DigitString::parse(&self.render(true, true), Ring::Mod10).expect("decimal")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    CompleteSplit { m: usize },
    Group { group: GraphicGroup, public: u64, private: u64 },
    Partition(TwinPartition),
    Bipartite { m: usize, n: usize },
    Twin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyPair {
    pub public: KeyBundle,
    pub private: KeyBundle,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KeySource {
    CompleteSplit { m: usize },
    /// The exact public/private graphs and strings of the worked example.
    Example1,
    Group { order: u64 },
    Partition { target: u64, mode: PartitionMode },
    /// `public` must be a spanning subgraph of `K_{m,n}` (parts `0..m`, `m..m+n`).
    Bipartite { m: usize, n: usize, public: Graph },
    /// A tree with a set-ordered odd-graceful labeling.
    Twin { labeled: ColoredGraph },
}

fn id_colored(g: &Graph) -> ColoredGraph {
    ColoredGraph::with_difference_edges(g.clone(), (1..=g.n() as i64).collect())
}

fn row_major(g: &ColoredGraph) -> Result<DigitString> {
    let t = topcode_from_graph(g, None)?;
    string_from_topcode(&t, &PermIndex::row_major(t.q()))
}

pub fn gen_keypair(source: &KeySource, seed: u64) -> Result<KeyPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match source {
        KeySource::CompleteSplit { m } => {
            let trees: Vec<ColoredGraph> = split_complete_even(*m)?.iter().map(id_colored).collect();
            let strings = trees.iter().map(row_major).collect::<Result<Vec<_>>>()?;
            Ok(KeyPair {
                public: KeyBundle { graphs: vec![trees[0].clone()], strings: vec![strings[0].clone()] },
                private: KeyBundle { graphs: trees[1..].to_vec(), strings: strings[1..].to_vec() },
                provenance: Provenance::CompleteSplit { m: *m },
            })
        }
        KeySource::Example1 => {
            let e = Example1Keys::worked();
            Ok(KeyPair {
                public: KeyBundle { graphs: vec![e.g], strings: vec![e.s_pub] },
                private: KeyBundle { graphs: vec![e.t, e.j], strings: vec![e.s_pri, e.s_pri2] },
                provenance: Provenance::CompleteSplit { m: 3 },
            })
        }
        KeySource::Group { order } => {
            let group = build_graphic_group(&h4147(), crate::group_algebra::Window::Single { m: *order })?;
            let public = rng.gen_range(0..*order);
            let private = rng.gen_range(0..*order);
            let g = |i| group.element(GroupIndex::Single(i));
            let (gp, gq) = (g(public)?, g(private)?);
            Ok(KeyPair {
                public: KeyBundle { strings: vec![row_major_stored(&gp)?], graphs: vec![gp] },
                private: KeyBundle { strings: vec![row_major_stored(&gq)?], graphs: vec![gq] },
                provenance: Provenance::Group { group, public, private },
            })
        }
        KeySource::Partition { target, mode } => {
            let tp = random_twin_partition(*target, *mode, &mut rng)?;
            Ok(KeyPair {
                public: KeyBundle { graphs: vec![], strings: vec![tp.public_string()] },
                private: KeyBundle { graphs: vec![], strings: vec![tp.private_string()] },
                provenance: Provenance::Partition(tp),
            })
        }
        KeySource::Bipartite { m, n, public } => {
            let k = Graph::complete_bipartite(*m, *n);
            if public.n() != m + n || !public.edge_set().is_subset(&k.edge_set()) {
                return Err(Error::InvalidGraph("public graph is not a spanning subgraph of K_{m,n}".into()));
            }
            let used = public.edge_set();
            let rest: Vec<_> = k.edges().iter().copied().filter(|e| !used.contains(e)).collect();
            let private = Graph::new(m + n, rest)?;
            Ok(KeyPair {
                public: KeyBundle { graphs: vec![id_colored(public)], strings: vec![] },
                private: KeyBundle { graphs: vec![id_colored(&private)], strings: vec![] },
                provenance: Provenance::Bipartite { m: *m, n: *n },
            })
        }
        KeySource::Twin { labeled } => {
            let h = twin_shift(labeled)?;
            Ok(KeyPair {
                public: KeyBundle { strings: vec![row_major_stored(labeled)?], graphs: vec![labeled.clone()] },
                private: KeyBundle { strings: vec![row_major_stored(&h)?], graphs: vec![h] },
                provenance: Provenance::Twin,
            })
        }
    }
}

fn row_major_stored(g: &ColoredGraph) -> Result<DigitString> {
    Key::Graph(g.clone()).key_string()
}

fn split_two<R: Rng>(whole: u64, mode: PartitionMode, rng: &mut R) -> Option<Vec<u64>> {
    let choices: Vec<u64> = match mode {
        PartitionMode::Sum => (1..whole).collect(),
        PartitionMode::Product => (2..whole).filter(|d| whole.is_multiple_of(*d)).collect(),
    };
    let a = *choices.choose(rng)?;
    Some(match mode {
        PartitionMode::Sum => vec![a, whole - a],
        PartitionMode::Product => vec![a, whole / a],
    })
}

fn random_twin_partition<R: Rng>(target: u64, mode: PartitionMode, rng: &mut R) -> Result<TwinPartition> {
    let all = partition_strings(target, mode, Some(5000))?;
    let mut options = Vec::new();
    for (spec, _) in &all {
        for j in 0..spec.parts.len().saturating_sub(1) {
            let refinable = |p: u64| match mode {
                PartitionMode::Sum => p >= 2,
                PartitionMode::Product => (2..p).any(|d| p.is_multiple_of(d)),
            };
            if refinable(spec.parts[j]) && refinable(spec.parts[j + 1]) {
                options.push((spec.clone(), j));
            }
        }
    }
    let (spec, j) = options
        .choose(rng)
        .cloned()
        .ok_or_else(|| Error::InvalidParam(format!("{target} has no twin-refinable {mode:?} split")))?;
    let a = split_two(spec.parts[j], mode, rng).expect("refinable");
    let b = split_two(spec.parts[j + 1], mode, rng).expect("refinable");
    TwinPartition::new(spec, j, a, b)
}

/// Context for [`authenticate`]; must match the pair's provenance.
#[derive(Debug, Clone, PartialEq)]
pub enum AuthContext {
    Group { zero: u64, signature: u64 },
    Target(Graph),
    Partition,
    Bipartite,
    Twin,
}

pub fn authenticate(pair: &KeyPair, ctx: &AuthContext) -> Result<AuthRecord> {
    match (&pair.provenance, ctx) {
        (Provenance::Group { group, .. }, AuthContext::Group { zero, signature }) => authenticate_group(
            group,
            first_graph(&pair.public)?,
            first_graph(&pair.private)?,
            GroupIndex::Single(*zero),
            GroupIndex::Single(*signature),
        ),
        (Provenance::CompleteSplit { .. }, AuthContext::Target(t)) => {
            authenticate_coincide(first_graph(&pair.public)?, &pair.private.graphs, t)
        }
        (Provenance::Partition(tp), AuthContext::Partition) => Ok(authenticate_twin_strings(
            tp,
            pair.public.strings.first().ok_or_else(|| Error::MissingMaterial("public string".into()))?,
            pair.private.strings.first().ok_or_else(|| Error::MissingMaterial("private string".into()))?,
        )),
        (Provenance::Bipartite { m, n }, AuthContext::Bipartite) => {
            authenticate_bipartite(first_graph(&pair.public)?, first_graph(&pair.private)?, *m, *n)
        }
        (Provenance::Twin, AuthContext::Twin) => {
            let (f, h) = (first_graph(&pair.public)?, first_graph(&pair.private)?);
            let rep = check_twin_odd_graceful(f, h)?;
            Ok(AuthRecord {
                kind: AuthKind::TwinLabeling,
                inputs: sha256_hex(&serde_json::to_vec(&(f, h)).expect("serializable")),
                result: String::new(),
                verdict: rep.pass,
                detail: rep.violations.iter().map(|v| v.id.clone()).collect::<Vec<_>>().join(","),
            })
        }
        _ => Err(Error::InvalidParam("authentication context does not match the key provenance".into())),
    }
}

fn first_graph(b: &KeyBundle) -> Result<&ColoredGraph> {
    b.graphs.first().ok_or_else(|| Error::MissingMaterial("graph key".into()))
}

/// `public ⊕ private ⊖ zero` computed colour-wise, located in the group and
/// compared with the registered signature index.
pub fn authenticate_group(
    group: &GraphicGroup,
    public: &ColoredGraph,
    private: &ColoredGraph,
    zero: GroupIndex,
    signature: GroupIndex,
) -> Result<AuthRecord> {
    let w = group.window;
    let z = group.element(zero)?;
    let (p, q) = (w.vertex_modulus() as i64, w.edge_modulus() as i64);
    let inputs = sha256_hex(&serde_json::to_vec(&(public, private)).expect("serializable"));
    let fail = |detail: String| AuthRecord {
        kind: AuthKind::GroupOp,
        inputs: inputs.clone(),
        result: String::new(),
        verdict: false,
        detail,
    };
    if public.graph != z.graph || private.graph != z.graph {
        return Ok(fail("key graphs differ from the group base".into()));
    }
    let mix = |a: &[i64], b: &[i64], c: &[i64], m: i64| {
        a.iter().zip(b).zip(c).map(|((x, y), w)| (x + y - w).rem_euclid(m)).collect::<Vec<_>>()
    };
    let v = mix(&public.vcolors, &private.vcolors, &z.vcolors, p);
    let e = mix(public.edge_colors()?, private.edge_colors()?, z.edge_colors()?, q);
    let c = ColoredGraph::new(z.graph.clone(), v, Some(e))?;
    let member = w.indices().into_iter().find(|&i| group.element(i).map(|g| g == c).unwrap_or(false));
    Ok(match member {
        None => fail("combination is not a group element".into()),
        Some(i) => AuthRecord {
            kind: AuthKind::GroupOp,
            inputs: inputs.clone(),
            result: i.to_string(),
            verdict: i == signature,
            detail: if i == signature { "signature matches".into() } else { format!("got {i}, registered {signature}") },
        },
    })
}

/// Vertex-coincide by colour; pass when the parts are pairwise edge-disjoint
/// and the result is the target graph.
pub fn authenticate_coincide(public: &ColoredGraph, private: &[ColoredGraph], target: &Graph) -> Result<AuthRecord> {
    let mut parts = vec![public.clone()];
    parts.extend_from_slice(private);
    let mut sorted: Vec<String> = private.iter().map(|g| sha256_hex(&serde_json::to_vec(g).expect("ser"))).collect();
    sorted.sort();
    let inputs = sha256_hex(format!("{}|{}", sha256_hex(&serde_json::to_vec(public).expect("ser")), sorted.join(",")).as_bytes());
    let rec = |verdict: bool, result: String, detail: String| AuthRecord {
        kind: AuthKind::GraphCoincide,
        inputs: inputs.clone(),
        result,
        verdict,
        detail,
    };
    let merged = match vertex_coincide(&parts, &CoincideRule::ByColor) {
        Ok(g) => g,
        Err(e) => return Ok(rec(false, String::new(), format!("coincide failed: {e}"))),
    };
    let total: usize = parts.iter().map(|p| p.graph.q()).sum();
    if total != merged.graph.q() {
        return Ok(rec(false, String::new(), "edge sets overlap".into()));
    }
    let iso = merged.graph.n() <= 10 && are_isomorphic(&merged.graph, target)?
        || merged.graph.edge_set() == target.edge_set() && merged.graph.n() == target.n();
    let result = format!("n={} q={}", merged.graph.n(), merged.graph.q());
    Ok(if iso {
        rec(true, result, "coincided graph equals the target".into())
    } else {
        rec(false, result, "wrong target".into())
    })
}

pub fn authenticate_twin_strings(tp: &TwinPartition, public: &DigitString, private: &DigitString) -> AuthRecord {
    let ok = *public == tp.public_string() && *private == tp.private_string();
    AuthRecord {
        kind: AuthKind::StringTwin,
        inputs: sha256_hex(format!("{public}|{private}").as_bytes()),
        result: if ok { tp.auth_string().to_string() } else { String::new() },
        verdict: ok,
        detail: if ok { "twin refinement recomposes".into() } else { "strings do not match the refinement".into() },
    }
}

fn authenticate_bipartite(public: &ColoredGraph, private: &ColoredGraph, m: usize, n: usize) -> Result<AuthRecord> {
    let k = Graph::complete_bipartite(m, n).edge_set();
    let (a, b) = (public.graph.edge_set(), private.graph.edge_set());
    let ok = a.is_disjoint(&b) && a.union(&b).copied().collect::<BTreeSet<_>>() == k && public.vcolors == private.vcolors;
    Ok(AuthRecord {
        kind: AuthKind::BipartiteComplement,
        inputs: sha256_hex(&serde_json::to_vec(&(public, private)).expect("ser")),
        result: format!("{}+{}", a.len(), b.len()),
        verdict: ok,
        detail: if ok { "edge sets partition K_{m,n}".into() } else { "not complementary".into() },
    })
}

// ---------------------------------------------------------------------------
// Worked example keys

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example1Keys {
    pub g: ColoredGraph,
    pub t: ColoredGraph,
    pub j: ColoredGraph,
    pub s_pub: DigitString,
    pub s_pri: DigitString,
    pub s_pri2: DigitString,
}

impl Example1Keys {
    #[must_use]
    pub fn worked() -> Self {
        let [g, t, j] = example1_matrices().map(|m| graph_from_topcode(&m).expect("valid matrix"));
        let s = |x: &str| DigitString::parse(x, Ring::Mod10).expect("digits");
        Self {
            g,
            t,
            j,
            s_pub: s("135244214255666"),
            s_pri: s("421111235254463"),
            s_pri2: s("122331311325346"),
        }
    }
}

fn parse_rows(s: &DigitString, q: usize) -> Result<TopcodeMatrix> {
    let d: Vec<i64> = s.digits().iter().map(|&x| i64::from(x)).collect();
    if d.len() != 3 * q {
        return Err(Error::LengthMismatch { left: d.len(), right: 3 * q });
    }
    TopcodeMatrix::numeric(&d[..q], &d[q..2 * q], &d[2 * q..])
}

fn colored_edge_set(g: &ColoredGraph) -> Result<BTreeSet<(i64, i64, i64)>> {
    let e = g.edge_colors()?;
    Ok(g.graph
        .edges()
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| {
            let (a, b) = (g.vcolors[u], g.vcolors[v]);
            (a.min(b), a.max(b), e[i])
        })
        .collect())
}

fn difference_colored(g: &ColoredGraph) -> bool {
    g.edge_colors().is_ok_and(|e| {
        g.graph.edges().iter().enumerate().all(|(i, &(u, v))| e[i] == (g.vcolors[u] - g.vcolors[v]).abs())
    })
}

// ---------------------------------------------------------------------------
// Protocols

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProtocolId {
    TopEnDecryption1,
    StringKeyOnly,
    GraphKeyOnly,
    GraphStringKey,
    Plan1,
    Plan2,
    Plan3,
    Plan4,
    Tkpdra,
    SelfCert1,
    SelfCert2,
    SelfCert3,
    SelfCert4,
    SelfCert5,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 14] = [
        ProtocolId::TopEnDecryption1,
        ProtocolId::StringKeyOnly,
        ProtocolId::GraphKeyOnly,
        ProtocolId::GraphStringKey,
        ProtocolId::Plan1,
        ProtocolId::Plan2,
        ProtocolId::Plan3,
        ProtocolId::Plan4,
        ProtocolId::Tkpdra,
        ProtocolId::SelfCert1,
        ProtocolId::SelfCert2,
        ProtocolId::SelfCert3,
        ProtocolId::SelfCert4,
        ProtocolId::SelfCert5,
    ];

    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::TopEnDecryption1 => "top-en-1",
            ProtocolId::StringKeyOnly => "string-key-only",
            ProtocolId::GraphKeyOnly => "graph-key-only",
            ProtocolId::GraphStringKey => "graph-string-key",
            ProtocolId::Plan1 => "plan-1",
            ProtocolId::Plan2 => "plan-2",
            ProtocolId::Plan3 => "plan-3",
            ProtocolId::Plan4 => "plan-4",
            ProtocolId::Tkpdra => "tkpdra",
            ProtocolId::SelfCert1 => "self-cert-1",
            ProtocolId::SelfCert2 => "self-cert-2",
            ProtocolId::SelfCert3 => "self-cert-3",
            ProtocolId::SelfCert4 => "self-cert-4",
            ProtocolId::SelfCert5 => "self-cert-5",
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProtocolId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown protocol '{s}'")))
    }
}

/// Sequence lengths of the self-certification variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    /// Alice's graph pairs (III, IV, V).
    pub alice_graphs: usize,
    /// Bob's graph pairs (IV, V).
    pub bob_graphs: usize,
    /// Bob's string pairs (V).
    pub bob_strings: usize,
}

impl Shape {
    #[must_use]
    pub fn default_for(id: ProtocolId) -> Self {
        match id {
            ProtocolId::SelfCert3 => Shape { alice_graphs: 3, bob_graphs: 0, bob_strings: 1 },
            ProtocolId::SelfCert4 => Shape { alice_graphs: 1, bob_graphs: 2, bob_strings: 1 },
            ProtocolId::SelfCert5 => Shape { alice_graphs: 1, bob_graphs: 1, bob_strings: 2 },
            _ => Shape { alice_graphs: 1, bob_graphs: 1, bob_strings: 1 },
        }
    }
}

/// Everything a protocol run consumes.
#[derive(Debug, Clone, Serialize)]
pub struct Material {
    pub plaintext: Vec<u8>,
    pub registry: Registry,
    pub keys: BTreeMap<String, KeySlot>,
    pub example: Option<Example1Keys>,
    pub shape: Shape,
}

fn slot_names(id: ProtocolId, shape: Shape) -> Vec<(String, KeyKind)> {
    let g = |s: &str| (s.to_string(), KeyKind::Graph);
    let s = |s: &str| (s.to_string(), KeyKind::Str);
    match id {
        ProtocolId::TopEnDecryption1 => vec![],
        ProtocolId::StringKeyOnly => vec![s("alice.s"), g("alice.g"), g("bob.g")],
        ProtocolId::GraphKeyOnly => vec![g("alice.g"), g("bob.g")],
        ProtocolId::GraphStringKey => vec![g("alice.g"), s("alice.s"), g("bob.g")],
        ProtocolId::Plan1 => vec![g("bob.prov.g"), s("bob.prov.s"), g("alice.g"), s("alice.s"), g("bob.g"), s("bob.s")],
        ProtocolId::Plan2 | ProtocolId::Plan3 => vec![g("alice.g"), s("alice.s")],
        ProtocolId::Plan4 | ProtocolId::Tkpdra => vec![g("alice.g"), s("alice.s"), g("bob.g"), s("bob.s")],
        ProtocolId::SelfCert1 => vec![g("alice.g"), s("bob.s")],
        ProtocolId::SelfCert2 => vec![g("alice.g"), s("alice.s"), s("bob.s1"), s("bob.s2")],
        ProtocolId::SelfCert3 | ProtocolId::SelfCert4 | ProtocolId::SelfCert5 => {
            let mut v: Vec<_> = (1..=shape.alice_graphs).map(|i| g(&format!("alice.g{i}"))).collect();
            v.extend((1..=shape.bob_strings).map(|i| s(&format!("bob.s{i}"))));
            v.extend((1..=shape.bob_graphs).map(|i| g(&format!("bob.g{i}"))));
            v
        }
    }
}

impl Material {
    /// Seeded keys for `id`. Plan II uses one common zero and strings equal
    /// to the Topcode strings of the graph keys; Plan III gives Alice her own
    /// zero; Plan IV a zero shared by Alice and Bob; every other protocol a
    /// single common zero.
    pub fn generate(id: ProtocolId, seed: u64, plaintext: &[u8], shape: Option<Shape>) -> Result<Self> {
        let shape = shape.unwrap_or_else(|| Shape::default_for(id));
        if shape.alice_graphs == 0 || shape.bob_strings == 0 {
            return Err(Error::InvalidParam("sequences need at least one key pair".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut registry = Registry::new(KeyGroup::standard());
        let m = registry.group.order();
        let common = rng.gen_range(0..m);
        let personal = (common + 1 + rng.gen_range(0..m - 1)) % m;
        let mut keys = BTreeMap::new();
        let mut plan2_graph: Option<(u64, u64)> = None;
        for (slot, kind) in slot_names(id, shape) {
            let public = rng.gen_range(0..m);
            let private = (public + 1 + rng.gen_range(0..m - 1)) % m;
            let (public, private) = match (id, kind, plan2_graph) {
                (ProtocolId::Plan2, KeyKind::Str, Some(p)) => p,
                _ => (public, private),
            };
            if id == ProtocolId::Plan2 && kind == KeyKind::Graph {
                plan2_graph = Some((public, private));
            }
            let zero = match id {
                ProtocolId::Plan3 | ProtocolId::Plan4 => personal,
                _ => common,
            };
            keys.insert(slot.clone(), registry.issue(&slot, kind, public, private, zero)?);
        }
        let example = (id == ProtocolId::TopEnDecryption1).then(Example1Keys::worked);
        Ok(Self { plaintext: plaintext.to_vec(), registry, keys, example, shape })
    }

    /// Names of corruptible key components.
    #[must_use]
    pub fn components(&self) -> Vec<String> {
        let mut out: Vec<String> = self.keys.keys().flat_map(|k| [format!("{k}.pub"), format!("{k}.pri")]).collect();
        if self.example.is_some() {
            out.extend(["example.g", "example.t", "example.j", "example.s_pub", "example.s_pri", "example.s_pri2"].map(String::from));
        }
        out
    }

    /// Copy with one component replaced by its canonical corruption.
    pub fn corrupt(&self, component: &str) -> Result<Self> {
        let mut m = self.clone();
        if let Some(name) = component.strip_prefix("example.") {
            let e = m.example.as_mut().ok_or_else(|| Error::MissingMaterial(component.into()))?;
            let bump_g = |g: &mut ColoredGraph| {
                if let Key::Graph(x) = Key::Graph(g.clone()).corrupted() {
                    *g = x;
                }
            };
            let bump_s = |s: &mut DigitString| {
                if let Key::Str(x) = Key::Str(s.clone()).corrupted() {
                    *s = x;
                }
            };
            match name {
                "g" => bump_g(&mut e.g),
                "t" => bump_g(&mut e.t),
                "j" => bump_g(&mut e.j),
                "s_pub" => bump_s(&mut e.s_pub),
                "s_pri" => bump_s(&mut e.s_pri),
                "s_pri2" => bump_s(&mut e.s_pri2),
                _ => return Err(Error::MissingMaterial(component.into())),
            }
            return Ok(m);
        }
        let (slot, half) = component
            .rsplit_once('.')
            .ok_or_else(|| Error::MissingMaterial(component.into()))?;
        let k = m.keys.get_mut(slot).ok_or_else(|| Error::MissingMaterial(component.into()))?;
        match half {
            "pub" => k.public = k.public.corrupted(),
            "pri" => k.private = k.private.corrupted(),
            _ => return Err(Error::MissingMaterial(component.into())),
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: String,
    pub actor: String,
    pub action: String,
    pub sha256: String,
    /// Key components whose corruption this step detects.
    #[serde(skip)]
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub id: ProtocolId,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub verdict: bool,
    pub failed_step: Option<String>,
    pub reason: Option<String>,
}

impl ProtocolTranscript {
    /// One JSON object per step, then a closing verdict line.
    #[must_use]
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out += &serde_json::to_string(s).expect("serializable");
            out.push('\n');
        }
        let end = StepRecord {
            step: "END".into(),
            actor: self.id.name().into(),
            action: match &self.failed_step {
                None => format!("pass seed={}", self.seed),
                Some(s) => format!("fail at {s} seed={}", self.seed),
            },
            sha256: self.digest(),
            checks: vec![],
        };
        out += &serde_json::to_string(&end).expect("serializable");
        out.push('\n');
        out
    }

    /// Digest over all step lines.
    #[must_use]
    pub fn digest(&self) -> String {
        let lines: String = self.steps.iter().map(|s| format!("{}|{}|{}|{}\n", s.step, s.actor, s.action, s.sha256)).collect();
        sha256_hex(format!("{}|{}|{}\n{lines}", self.id, self.seed, self.verdict).as_bytes())
    }
}

/// Line numbers (0-based) at which two JSON-lines transcripts differ.
#[must_use]
pub fn diff_transcripts(a: &str, b: &str) -> Vec<usize> {
    let (la, lb): (Vec<&str>, Vec<&str>) = (a.lines().collect(), b.lines().collect());
    (0..la.len().max(lb.len())).filter(|&i| la.get(i) != lb.get(i)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolRun {
    pub transcript: ProtocolTranscript,
    pub recovered: Option<Vec<u8>>,
    /// The plaintext-carrying message as sent, with its layers.
    pub onion: Onion,
}

#[derive(Debug)]
struct Abort {
    step: String,
    reason: String,
}

type Flow<T> = std::result::Result<T, Abort>;

#[derive(Debug, Clone)]
enum LayerKey {
    /// Encrypted with the slot's public key, opened with its private key.
    Public(String),
    /// Encrypted with the private key, opened with the public key.
    Private(String),
    /// Encrypted with the slot's signature as identity protection.
    Signature(String),
    Raw(String, DigitString),
}

impl LayerKey {
    fn label(&self) -> String {
        match self {
            LayerKey::Public(s) => format!("public:{s}"),
            LayerKey::Private(s) => format!("private:{s}"),
            LayerKey::Signature(s) => format!("signature:{s}"),
            LayerKey::Raw(l, _) => format!("raw:{l}"),
        }
    }

    fn slot_checks(&self) -> Vec<String> {
        match self {
            LayerKey::Public(s) | LayerKey::Private(s) | LayerKey::Signature(s) => {
                vec![format!("{s}.pub"), format!("{s}.pri")]
            }
            LayerKey::Raw(..) => vec![],
        }
    }
}

struct Runner<'a> {
    m: &'a Material,
    steps: Vec<StepRecord>,
    onion: Onion,
    expired: BTreeSet<String>,
}

fn abort(step: &str, reason: impl Into<String>) -> Abort {
    Abort { step: step.to_string(), reason: reason.into() }
}

impl<'a> Runner<'a> {
    fn log(&mut self, step: &str, actor: &str, action: &str, payload: &[u8], checks: Vec<String>) {
        self.steps.push(StepRecord {
            step: step.into(),
            actor: actor.into(),
            action: action.into(),
            sha256: sha256_hex(payload),
            checks,
        });
    }

    fn slot(&self, step: &str, name: &str) -> Flow<&'a KeySlot> {
        if self.expired.contains(name) {
            return Err(abort(step, format!("{name} has expired")));
        }
        self.m.keys.get(name).ok_or_else(|| abort(step, format!("missing material {name}")))
    }

    fn key_of(&self, step: &str, k: &Key) -> Flow<DigitString> {
        k.key_string().map_err(|e| abort(step, e.to_string()))
    }

    fn enc_key(&self, step: &str, layer: &LayerKey) -> Flow<DigitString> {
        match layer {
            LayerKey::Public(s) => self.key_of(step, &self.slot(step, s)?.public),
            LayerKey::Private(s) => self.key_of(step, &self.slot(step, s)?.private),
            LayerKey::Signature(s) => {
                let k = self.slot(step, s)?;
                let z = self.m.registry.zero_key(s).map_err(|e| abort(step, e.to_string()))?;
                let sig = self.m.registry.group.combine(&k.public, &k.private, &z).map_err(|e| abort(step, e.to_string()))?;
                self.key_of(step, &sig)
            }
            LayerKey::Raw(_, k) => Ok(k.clone()),
        }
    }

    fn dec_key(&self, step: &str, layer: &LayerKey) -> Flow<DigitString> {
        let reg = &self.m.registry;
        match layer {
            LayerKey::Public(s) => {
                let k = self.slot(step, s)?;
                let rec = reg.authenticate(s, &k.public, &k.private).map_err(|e| abort(step, e.to_string()))?;
                if !rec.verdict {
                    return Err(abort(step, format!("key-pair authentication failed: {}", rec.detail)));
                }
                let p = reg.derive_other(s, &k.private).map_err(|e| abort(step, e.to_string()))?;
                self.key_of(step, &p)
            }
            LayerKey::Private(s) => {
                let k = self.slot(step, s)?;
                let p = reg.derive_other(s, &k.public).map_err(|e| abort(step, e.to_string()))?;
                self.key_of(step, &p)
            }
            LayerKey::Signature(s) => {
                let sig = reg.signature_key(s).map_err(|e| abort(step, e.to_string()))?;
                self.key_of(step, &sig)
            }
            LayerKey::Raw(_, k) => Ok(k.clone()),
        }
    }

    /// Apply `layers` innermost first; `carry` marks the plaintext message.
    fn encrypt(&mut self, step: &str, actor: &str, data: &[u8], layers: &[LayerKey], carry: bool) -> Flow<Vec<u8>> {
        let mut cur = data.to_vec();
        let mut applied = Vec::new();
        for l in layers {
            let key = self.enc_key(step, l)?;
            cur = seal(&cur, &key, &l.label()).map_err(|e| abort(step, e.to_string()))?;
            applied.push((l.label(), key));
        }
        let names: Vec<String> = layers.iter().map(LayerKey::label).collect();
        self.log(step, actor, &format!("encrypt [{}]", names.join(", ")), &cur, vec![]);
        if carry {
            self.onion = Onion { ciphertext: cur.clone(), layers: applied };
        }
        Ok(cur)
    }

    fn decrypt(&mut self, step: &str, actor: &str, data: &[u8], layer: &LayerKey) -> Flow<Vec<u8>> {
        let key = self.dec_key(step, layer)?;
        let out = open(data, &key, &layer.label()).map_err(|_| abort(step, format!("cannot open {}", layer.label())))?;
        self.log(step, actor, &format!("decrypt {}", layer.label()), &out, layer.slot_checks());
        Ok(out)
    }

    fn peel(&mut self, step: &str, actor: &str, data: &[u8], layers: &[LayerKey]) -> Flow<Vec<u8>> {
        let mut cur = data.to_vec();
        for l in layers {
            cur = self.decrypt(step, actor, &cur, l)?;
        }
        Ok(cur)
    }

    fn auth(&mut self, step: &str, actor: &str, slot: &str) -> Flow<()> {
        let k = self.slot(step, slot)?;
        let rec = self.m.registry.authenticate(slot, &k.public, &k.private).map_err(|e| abort(step, e.to_string()))?;
        if !rec.verdict {
            return Err(abort(step, format!("authentication of {slot} failed: {}", rec.detail)));
        }
        let payload = serde_json::to_vec(&rec).expect("ser");
        self.log(step, actor, &format!("authenticate {slot}"), &payload, vec![format!("{slot}.pub"), format!("{slot}.pri")]);
        Ok(())
    }

    fn send(&mut self, step: &str, actor: &str, action: &str, payload: &[u8]) {
        self.log(step, actor, action, payload, vec![]);
    }

    fn public_package(&self, step: &str, slots: &[&str]) -> Flow<Vec<u8>> {
        let mut v = Vec::new();
        for s in slots {
            v.push(self.slot(step, s)?.public.clone());
        }
        Ok(serde_json::to_vec(&v).expect("ser"))
    }
}

fn public(s: &str) -> LayerKey {
    LayerKey::Public(s.into())
}

fn private(s: &str) -> LayerKey {
    LayerKey::Private(s.into())
}

fn finish(r: &mut Runner<'_>, step: &str, actor: &str, recovered: &[u8]) -> Flow<Vec<u8>> {
    if recovered != r.m.plaintext.as_slice() {
        return Err(abort(step, "recovered data differs from the plaintext"));
    }
    r.send(step, actor, "plaintext recovered", recovered);
    Ok(recovered.to_vec())
}

fn top_en_1(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    let e = r.m.example.clone().ok_or_else(|| abort("TOP-I-0", "missing Example 1 keys"))?;
    let doc = r.m.plaintext.clone();
    let ct = r.encrypt("TOP-I-0", "Alice", &doc, &[LayerKey::Raw("s_pub".into(), e.s_pub.clone())], true)?;

    let colors: BTreeSet<i64> = e.g.vcolors.iter().copied().collect();
    for (name, g) in [("G", &e.g), ("T", &e.t), ("J", &e.j)] {
        let spanning = g.vcolors.iter().copied().collect::<BTreeSet<_>>() == colors;
        if !g.graph.is_tree() || !spanning || !difference_colored(g) {
            return Err(abort("TOP-I-1", format!("{name} is not a colored spanning tree")));
        }
    }
    let pairs = |g: &ColoredGraph| colored_edge_set(g).map(|s| s.into_iter().map(|(a, b, _)| (a, b)).collect::<BTreeSet<_>>());
    let (eg, et, ej) = (pairs(&e.g), pairs(&e.t), pairs(&e.j));
    let (eg, et, ej) = match (eg, et, ej) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => return Err(abort("TOP-I-1", "missing edge colors")),
    };
    if !eg.is_disjoint(&et) || !eg.is_disjoint(&ej) || !et.is_disjoint(&ej) {
        return Err(abort("TOP-I-1", "key graphs share an edge"));
    }
    r.log("TOP-I-1", "Bob", "find private graphs T, J", &serde_json::to_vec(&(&e.t, &e.j)).expect("ser"), vec![
        "example.g".into(),
        "example.t".into(),
        "example.j".into(),
    ]);

    for (name, g, s) in [("s_pri", &e.t, &e.s_pri), ("s'_pri", &e.j, &e.s_pri2)] {
        let t = topcode_from_graph(g, None).map_err(|x| abort("TOP-I-2", x.to_string()))?;
        let got = string_from_topcode(&t, &PermIndex::row_major(t.q())).map_err(|x| abort("TOP-I-2", x.to_string()))?;
        if got != *s {
            return Err(abort("TOP-I-2", format!("{name} is not the row-major string of its graph")));
        }
    }
    r.log("TOP-I-2", "Bob", "strings from Topcode-matrices", format!("{}|{}", e.s_pri, e.s_pri2).as_bytes(), vec![
        "example.s_pri".into(),
        "example.s_pri2".into(),
    ]);

    let n = colors.len();
    let rec = authenticate_coincide(&e.g, &[e.t.clone(), e.j.clone()], &Graph::complete(n))
        .map_err(|x| abort("TOP-I-3", x.to_string()))?;
    if !rec.verdict {
        return Err(abort("TOP-I-3", rec.detail));
    }
    r.log("TOP-I-3", "Bob", "authenticate K = G [coincide] T [coincide] J", &serde_json::to_vec(&rec).expect("ser"), vec![]);

    // The public string must be a Topcode string of K minus the private edges.
    let all: BTreeSet<(i64, i64)> = colors.iter().flat_map(|&a| colors.iter().filter(move |&&b| b > a).map(move |&b| (a, b))).collect();
    let rest: BTreeSet<(i64, i64, i64)> = all.difference(&et.union(&ej).copied().collect()).map(|&(a, b)| (a, b, b - a)).collect();
    let parsed = parse_rows(&e.s_pub, e.g.graph.q())
        .and_then(|t| t.triples())
        .map(|v| v.into_iter().map(|(x, w, y)| (x.min(y), x.max(y), w)).collect::<BTreeSet<_>>())
        .unwrap_or_default();
    if parsed != rest {
        return Err(abort("TOP-I-4", "public string does not describe the complementary tree"));
    }
    let out = r.decrypt("TOP-I-4", "Bob", &ct, &LayerKey::Raw("s_pub".into(), e.s_pub.clone()))?;
    if let Some(s) = r.steps.last_mut() {
        s.checks.push("example.s_pub".into());
    }
    finish(r, "TOP-I-4", "Bob", &out)
}

fn string_key_only(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    let pkg = r.public_package("Step 1", &["alice.s"])?;
    r.send("Step 1", "Alice", "send s_Apub", &pkg);
    let p = r.m.plaintext.clone();
    let ct = r.encrypt("Step 2", "Bob", &p, &[public("alice.s"), LayerKey::Signature("bob.g".into())], true)?;
    r.auth("Step 3", "Alice", "alice.g")?;
    let mid = r.decrypt("Step 3", "Alice", &ct, &LayerKey::Signature("bob.g".into()))?;
    let out = r.decrypt("Step 4", "Alice", &mid, &public("alice.s"))?;
    finish(r, "Step 4", "Alice", &out)
}

fn graph_key_only(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    let pkg = r.public_package("Gtep 1", &["alice.g"])?;
    r.send("Gtep 1", "Alice", "send G_Apub", &pkg);
    let p = r.m.plaintext.clone();
    let ct = r.encrypt("Gtep 2", "Bob", &p, &[public("alice.g"), LayerKey::Signature("bob.g".into())], true)?;
    r.auth("Gtep 3", "Alice", "alice.g")?;
    let mid = r.decrypt("Gtep 3", "Alice", &ct, &LayerKey::Signature("bob.g".into()))?;
    let out = r.decrypt("Gtep 4", "Alice", &mid, &public("alice.g"))?;
    finish(r, "Gtep 4", "Alice", &out)
}

fn graph_string_key(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    let pkg = r.public_package("GStep 1", &["alice.g", "alice.s"])?;
    r.send("GStep 1", "Alice", "send key-package-A", &pkg);
    let p = r.m.plaintext.clone();
    let layers = [public("alice.s"), LayerKey::Signature("bob.g".into()), public("alice.g")];
    let ct = r.encrypt("GStep 2", "Bob", &p, &layers, true)?;
    let d1 = r.decrypt("GStep 3", "Alice", &ct, &public("alice.g"))?;
    let d2 = r.decrypt("GStep 4", "Alice", &d1, &LayerKey::Signature("bob.g".into()))?;
    let out = r.decrypt("GStep 5", "Alice", &d2, &public("alice.s"))?;
    finish(r, "GStep 5", "Alice", &out)
}

fn plan_1(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    r.send("Send-I-1", "Alice", "request provisional keys", b"request");
    let prov = r.public_package("Send-I-2", &["bob.prov.g", "bob.prov.s"])?;
    r.send("Send-I-2", "Bob", "send provisional public package", &prov);
    let alice_pkg = r.public_package("Send-I-3", &["alice.g", "alice.s"])?;
    let f_alice = r.encrypt("Send-I-3", "Alice", &alice_pkg, &[public("bob.prov.s"), public("bob.prov.g")], false)?;
    let got = r.peel("Send-I-4", "Bob", &f_alice, &[public("bob.prov.g"), public("bob.prov.s")])?;
    let received: Vec<Key> = serde_json::from_slice(&got).map_err(|e| abort("Send-I-4", e.to_string()))?;
    r.expired.insert("bob.prov.g".into());
    r.expired.insert("bob.prov.s".into());
    r.send("Send-I-4", "Bob", "delete provisional keys", b"expired");
    r.auth("Send-I-4", "Bob", "bob.g")?;
    r.auth("Send-I-4", "Bob", "bob.s")?;
    // Bob encrypts with the keys he received from Alice.
    let (rg, rs) = match received.as_slice() {
        [g @ Key::Graph(_), s @ Key::Str(_)] => (g.clone(), s.clone()),
        _ => return Err(abort("Send-I-4", "malformed key package")),
    };
    let mut msg = r.m.plaintext.clone();
    let bob_pkg = r.public_package("Send-I-5", &["bob.g", "bob.s"])?;
    let plain_len = msg.len();
    msg.extend_from_slice(&bob_pkg);
    let ks = r.key_of("Send-I-5", &rs)?;
    let kg = r.key_of("Send-I-5", &rg)?;
    let ct = r.encrypt(
        "Send-I-5",
        "Bob",
        &msg,
        &[LayerKey::Raw("public:alice.s".into(), ks), LayerKey::Raw("public:alice.g".into(), kg)],
        true,
    )?;
    // Alice opens with keys derived from her private halves.
    let mut cur = ct;
    for (slot, raw) in [("alice.g", "public:alice.g"), ("alice.s", "public:alice.s")] {
        let key = r.dec_key("Send-I-5", &public(slot))?;
        cur = open(&cur, &key, &format!("raw:{raw}")).map_err(|_| abort("Send-I-5", format!("cannot open {slot} layer")))?;
        let checks = vec![format!("{slot}.pub"), format!("{slot}.pri")];
        r.log("Send-I-5", "Alice", &format!("decrypt with {slot} private"), &cur, checks);
    }
    finish(r, "Send-I-5", "Alice", &cur[..plain_len.min(cur.len())])
}

fn issue_record(r: &mut Runner<'_>, step: &str, actor: &str, slots: &[&str]) {
    let recs: Vec<_> = slots.iter().filter_map(|s| r.m.registry.slots.get(*s).copied()).collect();
    r.send(step, actor, &format!("select elements for {}", slots.join(", ")), &serde_json::to_vec(&recs).expect("ser"));
}

fn use_keys(r: &mut Runner<'_>, to: &str, g: &str, s: &str) -> Flow<Vec<u8>> {
    let p = r.m.plaintext.clone();
    let from = if to == "Alice" { "Bob" } else { "Alice" };
    let ct = r.encrypt("USE-1", from, &p, &[public(s), public(g)], true)?;
    let out = r.peel("USE-2", to, &ct, &[public(g), public(s)])?;
    finish(r, "USE-2", to, &out)
}

fn plan_2(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    r.send("Send-II-1", "Alice", "request key pairs", b"request");
    issue_record(r, "Send-II-2", "Center", &["alice.g"]);
    r.auth("Send-II-3", "Alice", "alice.g")?;
    let g = r.slot("Send-II-4", "alice.g")?;
    let s = r.slot("Send-II-4", "alice.s")?;
    let same = |a: &Key, b: &Key| a.key_string().ok().map(Key::Str).as_ref() == Some(b);
    if !same(&g.public, &s.public) || !same(&g.private, &s.private) {
        return Err(abort("Send-II-4", "key strings are not the strings of the key graphs"));
    }
    r.log("Send-II-4", "Center", "strings from key graphs", &r.public_package("Send-II-4", &["alice.s"])?, vec![
        "alice.s.pub".into(),
        "alice.s.pri".into(),
    ]);
    r.auth("Send-II-5", "Alice", "alice.s")?;
    use_keys(r, "Alice", "alice.g", "alice.s")
}

fn plan_3(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    r.send("Send-III-1", "Alice", "request key pairs", b"request");
    issue_record(r, "Send-III-2", "Center", &["alice.g"]);
    let z = r.m.registry.record("alice.g").map(|x| x.zero).map_err(|e| abort("Send-III-3", e.to_string()))?;
    r.send("Send-III-3", "Center", "personal zero for Alice", z.to_string().as_bytes());
    r.auth("Send-III-4", "Alice", "alice.g")?;
    issue_record(r, "Send-III-5", "Center", &["alice.s"]);
    r.auth("Send-III-6", "Alice", "alice.s")?;
    use_keys(r, "Alice", "alice.g", "alice.s")
}

fn plan_4(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    issue_record(r, "Send-IV-1", "Alice+Bob", &["alice.g", "bob.g"]);
    let z = r.m.registry.record("alice.g").map(|x| x.zero).map_err(|e| abort("Send-IV-2", e.to_string()))?;
    r.send("Send-IV-2", "Center", "zero for Alice and Bob", z.to_string().as_bytes());
    r.auth("Send-IV-3", "Alice", "alice.g")?;
    r.auth("Send-IV-4", "Bob", "bob.g")?;
    issue_record(r, "Send-IV-5", "Alice", &["alice.s"]);
    issue_record(r, "Send-IV-6", "Bob", &["bob.s"]);
    r.auth("Send-IV-7", "Alice", "alice.s")?;
    r.auth("Send-IV-8", "Bob", "bob.s")?;
    use_keys(r, "Bob", "bob.g", "bob.s")
}

fn tkpdra(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    let p = r.m.plaintext.clone();
    let f2 = r.encrypt("TKPDRA-1", "Alice", &p, &[private("alice.s"), private("alice.g")], false)?;
    let f4 = r.encrypt("TKPDRA-2", "Center", &f2, &[public("bob.s"), public("bob.g")], false)?;
    r.onion = Onion {
        ciphertext: f4.clone(),
        layers: [private("alice.s"), private("alice.g"), public("bob.s"), public("bob.g")]
            .iter()
            .map(|l| Ok((l.label(), r.enc_key("TKPDRA-2", l)?)))
            .collect::<Flow<Vec<_>>>()?,
    };
    let pkg = [f4.clone(), r.public_package("TKPDRA-3", &["alice.g", "alice.s"])?].concat();
    r.send("TKPDRA-3", "Center", "send F4 with Alice's public keys", &pkg);
    let f3 = r.decrypt("TKPDRA-4", "Bob", &f4, &public("bob.g"))?;
    // The center's string layer sits directly under its graph layer.
    let f2b = r.decrypt("TKPDRA-7", "Bob", &f3, &public("bob.s"))?;
    let f1 = r.decrypt("TKPDRA-5", "Bob", &f2b, &private("alice.g"))?;
    let out = r.decrypt("TKPDRA-6", "Bob", &f1, &private("alice.s"))?;
    finish(r, "TKPDRA-7", "Bob", &out)
}

fn self_cert_1(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    let a = r.public_package("Self-1.1", &["alice.g"])?;
    r.send("Self-1.1", "Alice", "send key-package-A", &a);
    let b = r.public_package("Self-1.2", &["bob.s"])?;
    r.send("Self-1.2", "Bob", "send key-package-B", &b);
    let p = r.m.plaintext.clone();
    let ct = r.encrypt("Self-1.3", "Alice", &p, &[public("bob.s"), private("alice.g")], true)?;
    let f1 = r.decrypt("Self-1.4", "Bob", &ct, &private("alice.g"))?;
    let out = r.decrypt("Self-1.5", "Bob", &f1, &public("bob.s"))?;
    finish(r, "Self-1.5", "Bob", &out)
}

fn assignment_table(seed: &DigitString) -> BTreeMap<u8, String> {
    let d = seed.digits();
    (0..10u8)
        .map(|x| (x, (0..3).map(|i| ((x + d[i % d.len()]) % 10).to_string()).collect()))
        .collect()
}

fn self_cert_2(r: &mut Runner<'_>) -> Flow<Vec<u8>> {
    let a = r.public_package("Self-2.1", &["alice.s", "alice.g"])?;
    r.send("Self-2.1", "Alice", "send key-package-A", &a);
    let b = r.public_package("Self-2.2", &["bob.s1", "bob.s2"])?;
    r.send("Self-2.2", "Bob", "send key-package-B", &b);
    let p = r.m.plaintext.clone();
    let f3 = r.encrypt("Self-2.3", "Alice", &p, &[public("bob.s2"), private("alice.s"), private("alice.g")], false)?;
    let table_of = |r: &Runner<'_>, step: &str| -> Flow<BTreeMap<u8, String>> {
        Ok(assignment_table(&r.key_of(step, &r.slot(step, "alice.s")?.public)?))
    };
    let s1 = r.key_of("Self-2.4", &r.slot("Self-2.4", "bob.s1")?.public)?;
    let star = assignment_substitute(&s1, &table_of(r, "Self-2.4")?).map_err(|e| abort("Self-2.4", e.to_string()))?;
    let f4 = r.encrypt("Self-2.4", "Alice", &f3, &[LayerKey::Raw("s*_Apub".into(), star.clone())], false)?;
    r.onion = Onion {
        ciphertext: f4.clone(),
        layers: [public("bob.s2"), private("alice.s"), private("alice.g"), LayerKey::Raw("s*_Apub".into(), star.clone())]
            .iter()
            .map(|l| Ok((l.label(), r.enc_key("Self-2.4", l)?)))
            .collect::<Flow<Vec<_>>>()?,
    };
    r.send("Self-2.5", "Alice", "send F4 and s*_Apub", &[f4.clone(), star.to_string().into_bytes()].concat());
    // Bob: A_uth<s*_Apub, s1_Bpub, s1_Bpri>.
    r.auth("Self-2.7", "Bob", "bob.s1")?;
    let s1b = r.m.registry.derive_other("bob.s1", &r.slot("Self-2.7", "bob.s1")?.private).map_err(|e| abort("Self-2.7", e.to_string()))?;
    let expect = assignment_substitute(&r.key_of("Self-2.7", &s1b)?, &table_of(r, "Self-2.7")?).map_err(|e| abort("Self-2.7", e.to_string()))?;
    if expect != star {
        return Err(abort("Self-2.7", "s*_Apub is not an assignment of s1_Bpub"));
    }
    let d1 = r.decrypt("Self-2.7", "Bob", &f4, &LayerKey::Raw("s*_Apub".into(), expect))?;
    let d2 = r.decrypt("Self-2.6", "Bob", &d1, &private("alice.g"))?;
    let d3 = r.decrypt("Self-2.7", "Bob", &d2, &private("alice.s"))?;
    let out = r.decrypt("Self-2.8", "Bob", &d3, &public("bob.s2"))?;
    finish(r, "Self-2.8", "Bob", &out)
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Self-certification III–V share one shape: Bob's public strings, Alice's
/// private graphs, then Bob's public graphs, peeled strictly in reverse.
fn self_cert_seq(r: &mut Runner<'_>, v: u8) -> Flow<Vec<u8>> {
    let sh = r.m.shape;
    let ag = numbered("alice.g", sh.alice_graphs);
    let bs = numbered("bob.s", sh.bob_strings);
    let bg = numbered("bob.g", sh.bob_graphs);
    let st = |k: u8| format!("Self-{v}.{k}");
    let a: Vec<&str> = ag.iter().map(String::as_str).collect();
    let pkg_a = r.public_package(&st(1), &a)?;
    r.send(&st(1), "Alice", "send key-package-A", &pkg_a);
    let b: Vec<&str> = bs.iter().chain(&bg).map(String::as_str).collect();
    let pkg_b = r.public_package(&st(2), &b)?;
    r.send(&st(2), "Bob", "send key-package-B", &pkg_b);

    let mut layers: Vec<LayerKey> = bs.iter().map(|s| public(s)).collect();
    layers.extend(ag.iter().map(|s| private(s)));
    let p = r.m.plaintext.clone();
    let mut ct = r.encrypt(&st(3), "Alice", &p, &layers, false)?;
    let mut all = layers.clone();
    if v >= 4 {
        let outer: Vec<LayerKey> = bg.iter().map(|s| public(s)).collect();
        ct = r.encrypt(&st(4), "Alice", &ct, &outer, false)?;
        all.extend(outer);
    }
    r.onion = Onion {
        ciphertext: ct.clone(),
        layers: all.iter().map(|l| Ok((l.label(), r.enc_key(&st(3), l)?))).collect::<Flow<Vec<_>>>()?,
    };
    let (alice_step, bob_step) = if v == 3 { (st(4), st(5)) } else { (st(5), st(6)) };
    let mut cur = ct;
    for s in bg.iter().rev() {
        cur = r.decrypt(&bob_step, "Bob", &cur, &public(s))?;
    }
    for s in ag.iter().rev() {
        cur = r.decrypt(&alice_step, "Bob", &cur, &private(s))?;
    }
    for s in bs.iter().rev() {
        cur = r.decrypt(&bob_step, "Bob", &cur, &public(s))?;
    }
    finish(r, &bob_step, "Bob", &cur)
}

/// Execute protocol `id` over `material`; the first failing step aborts.
pub fn run_protocol(id: ProtocolId, material: &Material, seed: u64) -> ProtocolRun {
    let mut r = Runner { m: material, steps: Vec::new(), onion: Onion::default(), expired: BTreeSet::new() };
    let res = match id {
        ProtocolId::TopEnDecryption1 => top_en_1(&mut r),
        ProtocolId::StringKeyOnly => string_key_only(&mut r),
        ProtocolId::GraphKeyOnly => graph_key_only(&mut r),
        ProtocolId::GraphStringKey => graph_string_key(&mut r),
        ProtocolId::Plan1 => plan_1(&mut r),
        ProtocolId::Plan2 => plan_2(&mut r),
        ProtocolId::Plan3 => plan_3(&mut r),
        ProtocolId::Plan4 => plan_4(&mut r),
        ProtocolId::Tkpdra => tkpdra(&mut r),
        ProtocolId::SelfCert1 => self_cert_1(&mut r),
        ProtocolId::SelfCert2 => self_cert_2(&mut r),
        ProtocolId::SelfCert3 => self_cert_seq(&mut r, 3),
        ProtocolId::SelfCert4 => self_cert_seq(&mut r, 4),
        ProtocolId::SelfCert5 => self_cert_seq(&mut r, 5),
    };
    let (verdict, failed_step, reason, recovered) = match res {
        Ok(p) => (true, None, None, Some(p)),
        Err(a) => (false, Some(a.step), Some(a.reason), None),
    };
    ProtocolRun {
        transcript: ProtocolTranscript { id, seed, steps: r.steps, verdict, failed_step, reason },
        recovered,
        onion: r.onion,
    }
}

/// Material from `seed`, then the run.
pub fn simulate(id: ProtocolId, seed: u64, plaintext: &[u8]) -> Result<ProtocolRun> {
    let m = Material::generate(id, seed, plaintext, None)?;
    Ok(run_protocol(id, &m, seed))
}

/// Step expected to fail first when `component` is corrupted: the first step
/// of a clean run that checks it.
#[must_use]
pub fn first_checking_step(clean: &ProtocolTranscript, component: &str) -> Option<String> {
    clean.steps.iter().find(|s| s.checks.iter().any(|c| c == component)).map(|s| s.step.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text() -> Vec<u8> {
        (0..1024u32).map(|i| (i * 7 + 3) as u8).collect()
    }

    #[test]
    fn cipher_examples() {
        let k = DigitString::parse("3", Ring::Mod10).unwrap();
        assert_eq!(keystream_cipher(&[0x41], &k, Direction::Encrypt).unwrap(), vec![0x44]);
        let z = DigitString::parse("000", Ring::Mod10).unwrap();
        assert_eq!(keystream_cipher(b"abc", &z, Direction::Encrypt).unwrap(), b"abc".to_vec());
        let key = DigitString::parse("135244214255666", Ring::Mod10).unwrap();
        let c = keystream_cipher(&text(), &key, Direction::Encrypt).unwrap();
        assert_eq!(keystream_cipher(&c, &key, Direction::Decrypt).unwrap(), text());
        if let Ok(empty) = DigitString::new(vec![], Ring::Mod10) {
            assert!(keystream_cipher(b"x", &empty, Direction::Encrypt).is_err());
        }
    }

    #[test]
    fn layers_need_their_order() {
        let k1 = DigitString::parse("12", Ring::Mod10).unwrap();
        let k2 = DigitString::parse("345", Ring::Mod10).unwrap();
        let c = seal(&seal(b"hello", &k1, "a").unwrap(), &k2, "b").unwrap();
        assert_eq!(open(&open(&c, &k2, "b").unwrap(), &k1, "a").unwrap(), b"hello");
        assert!(open(&c, &k1, "a").is_err());
    }

    #[test]
    fn example1_protocol() {
        let run = simulate(ProtocolId::TopEnDecryption1, 1, &text()).unwrap();
        assert!(run.transcript.verdict, "{:?}", run.transcript.reason);
        assert_eq!(run.recovered.unwrap(), text());
        let e = Example1Keys::worked();
        assert_eq!(e.s_pub.to_string(), "135244214255666");
        let pair = gen_keypair(&KeySource::Example1, 0).unwrap();
        let rec = authenticate(&pair, &AuthContext::Target(Graph::complete(6))).unwrap();
        assert!(rec.verdict);
        let mut shuffled = pair.clone();
        shuffled.private.graphs.reverse();
        assert!(authenticate(&shuffled, &AuthContext::Target(Graph::complete(6))).unwrap().verdict);
        let mut bad = pair.clone();
        bad.private.graphs[0].vcolors[0] = 6;
        assert!(!authenticate(&bad, &AuthContext::Target(Graph::complete(6))).unwrap().verdict);
        assert!(authenticate(&pair, &AuthContext::Partition).is_err());
    }

    #[test]
    fn every_protocol_round_trips_and_detects_corruption() {
        for id in ProtocolId::ALL {
            let m = Material::generate(id, 11, &text(), None).unwrap();
            let run = run_protocol(id, &m, 11);
            assert!(run.transcript.verdict, "{id}: {:?} {:?}", run.transcript.failed_step, run.transcript.reason);
            assert_eq!(run.recovered.as_deref(), Some(text().as_slice()), "{id}");
            for c in m.components() {
                let bad = m.corrupt(&c).unwrap();
                let r = run_protocol(id, &bad, 11);
                assert!(!r.transcript.verdict, "{id}: corrupting {c} went unnoticed");
                assert_eq!(
                    r.transcript.failed_step,
                    first_checking_step(&run.transcript, &c),
                    "{id}/{c}: {:?}",
                    r.transcript.reason
                );
            }
        }
    }

    #[test]
    fn wrong_orders_fail() {
        use itertools::Itertools;
        for id in ProtocolId::ALL {
            let run = simulate(id, 5, b"layered").unwrap();
            let n = run.onion.layers.len();
            assert!((1..=4).contains(&n), "{id} has {n} layers");
            let good = run.onion.correct_order();
            // Plan I carries Bob's key package after the plaintext.
            assert!(run.onion.peel(&good).unwrap().starts_with(b"layered"));
            for p in (0..n).permutations(n) {
                if p != good {
                    assert!(run.onion.peel(&p).is_err(), "{id}: order {p:?} opened");
                }
            }
        }
    }

    #[test]
    fn transcripts_replay() {
        for id in ProtocolId::ALL {
            let a = simulate(id, 7, b"abc").unwrap().transcript;
            let b = simulate(id, 7, b"abc").unwrap().transcript;
            assert_eq!(a.digest(), b.digest());
            assert!(diff_transcripts(&a.to_json_lines(), &b.to_json_lines()).is_empty());
            let c = simulate(id, 8, b"abc").unwrap().transcript;
            if id != ProtocolId::TopEnDecryption1 {
                assert_ne!(a.digest(), c.digest(), "{id}");
            }
        }
    }

    #[test]
    fn tkpdra_fault_injection() {
        let m = Material::generate(ProtocolId::Tkpdra, 3, &text(), None).unwrap();
        let run = run_protocol(ProtocolId::Tkpdra, &m, 3);
        let steps: BTreeSet<&str> = run.transcript.steps.iter().map(|s| s.step.as_str()).collect();
        assert_eq!(steps.len(), 7);
        let mut f4 = run.onion.ciphertext.clone();
        f4[20] ^= 1;
        let onion = Onion { ciphertext: f4, ..run.onion.clone() };
        assert!(onion.peel(&onion.correct_order()).is_err());
    }

    #[test]
    fn registry_rotation() {
        let mut reg = Registry::new(KeyGroup::standard());
        let k = reg.issue("alice.g", KeyKind::Graph, 2, 5, 1).unwrap();
        let old = *reg.record("alice.g").unwrap();
        assert!(reg.authenticate("alice.g", &k.public, &k.private).unwrap().verdict);
        assert_eq!(reg.rotate_zero(Some(1), 0).unwrap(), 1);
        assert!(reg.is_current("alice.g", &old));
        reg.rotate_zero(Some(4), 0).unwrap();
        assert!(!reg.is_current("alice.g", &old));
        // Keys unchanged, signature recomputed: the pair still authenticates
        // under the new zero, a stale signature does not.
        assert!(reg.authenticate("alice.g", &k.public, &k.private).unwrap().verdict);
        let stale = reg.group.element(KeyKind::Graph, old.signature).unwrap();
        assert_ne!(stale, reg.signature_key("alice.g").unwrap());
        let mut twice = reg.clone();
        twice.rotate_zero(Some(7), 0).unwrap();
        twice.rotate_zero(Some(3), 0).unwrap();
        let mut once = reg.clone();
        once.rotate_zero(Some(3), 0).unwrap();
        assert_eq!(twice.slots, once.slots);
    }

    #[test]
    fn keypair_sources() {
        let cs = gen_keypair(&KeySource::CompleteSplit { m: 3 }, 0).unwrap();
        assert_eq!(cs.private.graphs.len(), 2);
        assert!(authenticate(&cs, &AuthContext::Target(Graph::complete(6))).unwrap().verdict);

        let tp = TwinPartition::new(PartitionSpec::new(10, vec![4, 6], PartitionMode::Sum).unwrap(), 0, vec![1, 3], vec![2, 4]).unwrap();
        assert_eq!(tp.public_string().to_string(), "136");
        assert_eq!(tp.private_string().to_string(), "424");
        assert_eq!(tp.auth_string().to_string(), "1324");
        let pp = gen_keypair(&KeySource::Partition { target: 10, mode: PartitionMode::Sum }, 4).unwrap();
        assert!(authenticate(&pp, &AuthContext::Partition).unwrap().verdict);
        assert!(gen_keypair(&KeySource::Partition { target: 7, mode: PartitionMode::Product }, 0).is_err());
        let pr = gen_keypair(&KeySource::Partition { target: 16, mode: PartitionMode::Product }, 0).unwrap();
        assert!(authenticate(&pr, &AuthContext::Partition).unwrap().verdict);

        let g = Graph::new(5, vec![(0, 2), (1, 3)]).unwrap();
        let bp = gen_keypair(&KeySource::Bipartite { m: 2, n: 3, public: g }, 0).unwrap();
        assert_eq!(bp.private.graphs[0].graph.q(), 4);
        assert!(authenticate(&bp, &AuthContext::Bipartite).unwrap().verdict);

        let gp = gen_keypair(&KeySource::Group { order: 6 }, 9).unwrap();
        let Provenance::Group { group, public, private } = &gp.provenance else { panic!() };
        let sig = (public + private + 6 - 2) % 6;
        assert!(authenticate(&gp, &AuthContext::Group { zero: 2, signature: sig }).unwrap().verdict);
        assert!(!authenticate(&gp, &AuthContext::Group { zero: 2, signature: (sig + 1) % 6 }).unwrap().verdict);
        assert_eq!(group.order(), 6);

        // Odd-graceful set-ordered P_3: 0-3-2 has X={0,2}, Y={3}.
        let t = ColoredGraph::with_difference_edges(Graph::path(3), vec![0, 3, 2]);
        let tw = gen_keypair(&KeySource::Twin { labeled: t }, 0).unwrap();
        assert!(authenticate(&tw, &AuthContext::Twin).unwrap().verdict);
    }
}
