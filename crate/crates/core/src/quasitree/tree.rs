//! One random realization of the quasi-tree.
//!
//! A vertex is `v = (k₀, (ε₁, k₁), …, (ε_n, k_n))`. It lives in the copy of
//! `[N]` indexed by `s = (k₀, ε₁, k₁, …, k_{n-1}, ε_n)` (the vertex with its
//! last index dropped); root vertices live in the root copy. Each copy `s`
//! and sign `ε` carries a uniform permutation `j_ε(s)`, and
//! `j_ε(v) := j_ε(s)(k_n)`.
//!
//! `u^ε` moves `v` to its child `(v, (ε, j_ε(v)))`, unless `v` is itself the
//! child reached from its parent by `u^{-ε}` (that is `ε_n = -ε` and
//! `k_n = j_{-ε}(v⁻)`), in which case it moves back to `v⁻`. A matrix `B`
//! acts on the last index inside the copy: `e(…, k) ↦ Σ_{k'} B_{k'k} e(…, k')`.
//!
//! Vertices are interned in an arena; permutations are drawn on first use
//! from a seed derived from a hash of the copy's path, so the realization
//! does not depend on the order in which vertices are visited.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{Permutation, SparseMatrix};
use crate::rng::{keyed_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn code(self) -> u64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => 2,
        }
    }
}

/// Explicit coordinates of a quasi-tree vertex (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeVertex {
    pub k0: usize,
    pub steps: Vec<(Sign, usize)>,
}

impl TreeVertex {
    pub fn root(k0: usize) -> Self {
        TreeVertex { k0, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Interned vertex handle, valid only for the [`QuasiTree`] that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    parent: u32,
    sign: Sign,
    k: u32,
    depth: u32,
    path_hash: u64,
}

/// Finitely supported vector in the span of `{e(v)}`. Amplitudes are real.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuasiTreeVector {
    amps: BTreeMap<NodeId, f64>,
}

impl QuasiTreeVector {
    pub fn basis(id: NodeId) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(id, 1.0);
        QuasiTreeVector { amps }
    }

    pub fn add(&mut self, id: NodeId, c: f64) {
        *self.amps.entry(id).or_insert(0.0) += c;
    }

    pub fn get(&self, id: NodeId) -> f64 {
        self.amps.get(&id).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.amps.iter().map(|(&k, &v)| (k, v))
    }

    /// Number of stored amplitudes, including exact zeros from cancellation.
    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.values().map(|v| v * v).sum()
    }

    pub fn dot(&self, other: &QuasiTreeVector) -> f64 {
        let (small, large) = if self.amps.len() <= other.amps.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.amps.iter().map(|(k, v)| v * large.get(*k)).sum()
    }

    pub fn scale(&mut self, c: f64) {
        self.amps.values_mut().for_each(|v| *v *= c);
    }

    /// `self += c · other`.
    pub fn axpy(&mut self, c: f64, other: &QuasiTreeVector) {
        for (&k, &v) in &other.amps {
            self.add(k, c * v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amps.values().all(|&v| v == 0.0)
    }
}

/// A real matrix acting on the last tensor factor of every basis vector.
/// Entries may have any sign.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    n: usize,
    /// `columns[k]` lists `(k', B[k'][k])`.
    columns: Vec<Vec<(usize, f64)>>,
}

impl LocalOperator {
    pub fn from_matrix(b: &SparseMatrix) -> Self {
        Self::from_triplets_unchecked(b.n(), b.triplets())
    }

    pub fn adjoint_of(b: &SparseMatrix) -> Self {
        Self::from_triplets_unchecked(b.n(), b.triplets().map(|(i, j, v)| (j, i, v)))
    }

    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= n || j >= n || !v.is_finite() {
                return Err(Error::InvalidEntry {
                    row: i,
                    col: j,
                    reason: format!("invalid local operator entry for dimension {n}"),
                });
            }
        }
        Ok(Self::from_triplets_unchecked(n, triplets.iter().copied()))
    }

    fn from_triplets_unchecked(n: usize, t: impl Iterator<Item = (usize, usize, f64)>) -> Self {
        let mut columns = vec![Vec::new(); n];
        for (i, j, v) in t {
            if v != 0.0 {
                columns[j].push((i, v));
            }
        }
        LocalOperator { n, columns }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// One sample of the random quasi-tree over `[n]`.
#[derive(Debug)]
pub struct QuasiTree {
    n: usize,
    seed: u64,
    nodes: Vec<Node>,
    index: HashMap<(u32, Sign, u32), u32>,
    perms: HashMap<(u32, Sign, Sign), Permutation>,
    support_limit: usize,
}

impl QuasiTree {
    pub fn new(n: usize, seed: u64, support_limit: usize) -> Self {
        let mut t = QuasiTree {
            n,
            seed,
            nodes: Vec::new(),
            index: HashMap::new(),
            perms: HashMap::new(),
            support_limit,
        };
        for k in 0..n {
            t.intern(NO_PARENT, Sign::Plus, k as u32);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn intern(&mut self, parent: u32, sign: Sign, k: u32) -> u32 {
        if let Some(&id) = self.index.get(&(parent, sign, k)) {
            return id;
        }
        let (depth, path_hash) = if parent == NO_PARENT {
            (0, keyed_seed(0, &[k as u64]))
        } else {
            let p = &self.nodes[parent as usize];
            (p.depth + 1, keyed_seed(p.path_hash, &[sign.code(), k as u64]))
        };
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            parent,
            sign,
            k,
            depth,
            path_hash,
        });
        self.index.insert((parent, sign, k), id);
        id
    }

    pub fn root(&self, k: usize) -> NodeId {
        assert!(k < self.n, "root index {k} out of range");
        NodeId(k as u32)
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id.0 as usize].depth as usize
    }

    /// Permutation `j_ε(s)` of the copy holding `id`.
    fn copy_perm(&mut self, id: u32, eps: Sign) -> &Permutation {
        let node = &self.nodes[id as usize];
        let (parent, sign) = (node.parent, node.sign);
        let key = (parent, sign, eps);
        if !self.perms.contains_key(&key) {
            let copy_hash = if parent == NO_PARENT {
                0
            } else {
                keyed_seed(self.nodes[parent as usize].path_hash, &[sign.code()])
            };
            let s = keyed_seed(self.seed, &[copy_hash, (parent == NO_PARENT) as u64, eps.code()]);
            let perm = Permutation::sample_with(self.n, &mut rng_from_seed(s));
            self.perms.insert(key, perm);
        }
        &self.perms[&key]
    }

    /// `j_ε(v)`.
    fn j(&mut self, id: u32, eps: Sign) -> u32 {
        let k = self.nodes[id as usize].k as usize;
        self.copy_perm(id, eps).apply(k) as u32
    }

    /// Image of a single basis vector under `u^ε`.
    fn step(&mut self, id: u32, eps: Sign) -> u32 {
        let node = self.nodes[id as usize].clone();
        if node.parent != NO_PARENT && node.sign == eps.flip() && node.k == self.j(node.parent, eps.flip()) {
            return node.parent;
        }
        let k = self.j(id, eps);
        self.intern(id, eps, k)
    }

    fn check_support(&self, v: &QuasiTreeVector) -> Result<()> {
        if v.support_len() > self.support_limit {
            return Err(Error::SupportLimit {
                limit: self.support_limit,
            });
        }
        Ok(())
    }

    /// `u^ε v`; `Sign::Plus` is `u`, `Sign::Minus` is `u*`.
    pub fn apply_shift(&mut self, v: &QuasiTreeVector, eps: Sign) -> QuasiTreeVector {
        let mut out = QuasiTreeVector::default();
        for (id, c) in v.iter() {
            let to = self.step(id.0, eps);
            out.add(NodeId(to), c);
        }
        out
    }

    pub fn apply_u(&mut self, v: &QuasiTreeVector) -> QuasiTreeVector {
        self.apply_shift(v, Sign::Plus)
    }

    pub fn apply_u_star(&mut self, v: &QuasiTreeVector) -> QuasiTreeVector {
        self.apply_shift(v, Sign::Minus)
    }

    /// `Π_N(B) v`: `B` acts on the last index within each copy.
    pub fn apply_local(&mut self, v: &QuasiTreeVector, b: &LocalOperator) -> Result<QuasiTreeVector> {
        if b.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.n,
            });
        }
        let mut out = QuasiTreeVector::default();
        for (id, c) in v.iter() {
            let node = self.nodes[id.0 as usize].clone();
            for &(k2, w) in &b.columns[node.k as usize] {
                let to = self.intern(node.parent, node.sign, k2 as u32);
                out.add(NodeId(to), c * w);
            }
        }
        self.check_support(&out)?;
        Ok(out)
    }

    /// Applies `u^power` (negative powers use `u*`).
    pub fn apply_shift_power(&mut self, v: &QuasiTreeVector, power: i64) -> QuasiTreeVector {
        let eps = if power >= 0 { Sign::Plus } else { Sign::Minus };
        let mut cur = v.clone();
        for _ in 0..power.unsigned_abs() {
            cur = self.apply_shift(&cur, eps);
        }
        cur
    }

    pub fn intern_vertex(&mut self, v: &TreeVertex) -> Result<NodeId> {
        if v.k0 >= self.n || v.steps.iter().any(|&(_, k)| k >= self.n) {
            return Err(Error::param("vertex index out of range"));
        }
        let mut id = v.k0 as u32;
        for &(s, k) in &v.steps {
            id = self.intern(id, s, k as u32);
        }
        Ok(NodeId(id))
    }

    pub fn vertex(&self, id: NodeId) -> TreeVertex {
        let mut steps = Vec::new();
        let mut cur = id.0;
        loop {
            let node = &self.nodes[cur as usize];
            if node.parent == NO_PARENT {
                steps.reverse();
                return TreeVertex {
                    k0: node.k as usize,
                    steps,
                };
            }
            steps.push((node.sign, node.k as usize));
            cur = node.parent;
        }
    }

    /// Membership in the vertex set reachable by the shift and local moves:
    /// for each internal position `t`, either `ε_{t+1} = ε_t` or
    /// `k_t ≠ j_{ε_t}(v_{t-1})`.
    pub fn is_valid(&mut self, v: &TreeVertex) -> Result<bool> {
        let id = self.intern_vertex(v)?;
        let mut chain = Vec::new();
        let mut cur = id.0;
        while cur != NO_PARENT {
            chain.push(cur);
            cur = self.nodes[cur as usize].parent;
        }
        chain.reverse();
        // chain[t] is the prefix of length t
        for t in 1..chain.len().saturating_sub(1) {
            let here = self.nodes[chain[t] as usize].clone();
            let next_sign = self.nodes[chain[t + 1] as usize].sign;
            if next_sign != here.sign && here.k == self.j(chain[t - 1], here.sign) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
