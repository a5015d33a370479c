//! Polytope norms: a maximum of rational functionals composed with a
//! class of coordinate projections, optionally together with the sup norm.

use crate::caps::Caps;
use crate::error::{domain, size, Error, Result};
use crate::rational::{qi, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

/// Finitely supported vector over indices `1..`, zeros never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SparseVector(BTreeMap<usize, Q>);

#[derive(Serialize, Deserialize)]
struct Entry {
    i: usize,
    #[serde(with = "crate::rational::qser")]
    v: Q,
}

impl Serialize for SparseVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0
            .iter()
            .map(|(&i, v)| Entry { i, v: v.clone() })
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let entries = Vec::<Entry>::deserialize(d)?;
        let mut out = SparseVector::default();
        for e in entries {
            if e.i == 0 {
                return Err(D::Error::custom("indices start at 1"));
            }
            if out.0.contains_key(&e.i) {
                return Err(D::Error::custom(format!("duplicate index {}", e.i)));
            }
            out.set(e.i, e.v);
        }
        Ok(out)
    }
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Entry `i` of the slice becomes coordinate `i + 1`.
    pub fn from_dense(xs: &[Q]) -> Self {
        let mut v = Self::new();
        for (i, x) in xs.iter().enumerate() {
            v.set(i + 1, x.clone());
        }
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, Q)>>(it: I) -> Self {
        let mut v = Self::new();
        for (i, x) in it {
            v.set(i, x);
        }
        v
    }

    pub fn set(&mut self, i: usize, x: Q) {
        assert!(i >= 1, "indices start at 1");
        if x.is_zero() {
            self.0.remove(&i);
        } else {
            self.0.insert(i, x);
        }
    }

    pub fn get(&self, i: usize) -> Q {
        self.0.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Q)> {
        self.0.iter().map(|(&i, v)| (i, v))
    }

    pub fn support(&self) -> Vec<usize> {
        self.0.keys().copied().collect()
    }

    pub fn nnz(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_index(&self) -> usize {
        self.0.keys().next_back().copied().unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        SparseVector(self.0.iter().map(|(&i, v)| (i, -v)).collect())
    }

    pub fn sup(&self) -> Q {
        self.0.values().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
    }

    pub fn dot(&self, other: &SparseVector) -> Q {
        let (small, big) = if self.nnz() <= other.nnz() { (self, other) } else { (other, self) };
        small
            .0
            .iter()
            .filter_map(|(i, v)| big.0.get(i).map(|w| v * w))
            .sum()
    }

    pub fn to_dense(&self, dim: usize) -> Vec<Q> {
        (1..=dim).map(|i| self.get(i)).collect()
    }

    /// `P_E a` for a finite set `E`.
    pub fn restrict(&self, e: &[usize]) -> Self {
        let keep: HashSet<usize> = e.iter().copied().collect();
        SparseVector(self.0.iter().filter(|(i, _)| keep.contains(i)).map(|(&i, v)| (i, v.clone())).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProjectionClass {
    #[serde(rename = "initial", alias = "initial_segments")]
    InitialSegments,
    #[serde(rename = "interval", alias = "intervals")]
    Intervals,
    #[serde(rename = "all", alias = "all_subsets")]
    AllSubsets,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct NormInstance {
    pub dim: usize,
    pub functionals: Vec<SparseVector>,
    pub projection_class: ProjectionClass,
    pub include_sup: bool,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    dim: usize,
    functionals: Vec<SparseVector>,
    projection_class: ProjectionClass,
    #[serde(default = "yes")]
    include_sup: bool,
}

fn yes() -> bool {
    true
}

impl TryFrom<RawInstance> for NormInstance {
    type Error = Error;
    fn try_from(r: RawInstance) -> Result<Self> {
        NormInstance::new(r.dim, r.functionals, r.projection_class, r.include_sup)
    }
}

impl From<NormInstance> for RawInstance {
    fn from(n: NormInstance) -> Self {
        RawInstance {
            dim: n.dim,
            functionals: n.functionals,
            projection_class: n.projection_class,
            include_sup: n.include_sup,
        }
    }
}

impl NormInstance {
    /// Validates supports and closes the family under negation; missing
    /// negations are appended after the given functionals.
    pub fn new(dim: usize, functionals: Vec<SparseVector>, class: ProjectionClass, include_sup: bool) -> Result<Self> {
        if dim == 0 {
            return domain("dimension must be positive");
        }
        for f in &functionals {
            if f.max_index() > dim {
                return domain(format!("functional support exceeds dimension {dim}"));
            }
        }
        let mut seen: HashSet<SparseVector> = HashSet::new();
        let mut family = vec![];
        for f in functionals {
            if seen.insert(f.clone()) {
                family.push(f);
            }
        }
        let missing: Vec<SparseVector> = family.iter().map(|f| f.neg()).filter(|g| !seen.contains(g)).collect();
        for g in missing {
            if seen.insert(g.clone()) {
                family.push(g);
            }
        }
        Ok(NormInstance { dim, functionals: family, projection_class: class, include_sup })
    }

    pub fn check_caps(&self, caps: &Caps) -> Result<()> {
        if self.projection_class == ProjectionClass::AllSubsets && self.dim > caps.all_subsets_dim {
            return size(format!("all_subsets projection class limited to dim {}", caps.all_subsets_dim));
        }
        Ok(())
    }

    fn check_vector(&self, a: &SparseVector) -> Result<()> {
        if a.max_index() > self.dim {
            return domain(format!("vector support exceeds dimension {}", self.dim));
        }
        Ok(())
    }
}

/// Signed terms `f_i a_i` in index order.
fn terms(f: &SparseVector, a: &SparseVector) -> Vec<(usize, Q)> {
    f.iter().filter_map(|(i, fi)| a.0.get(&i).map(|ai| (i, fi * ai))).collect()
}

/// `sup_E f(P_E a)` over the projection class (the empty set included).
pub fn functional_value(class: ProjectionClass, f: &SparseVector, a: &SparseVector) -> Q {
    let ts = terms(f, a);
    match class {
        ProjectionClass::InitialSegments => {
            let mut best = Q::zero();
            let mut run = Q::zero();
            for (_, t) in &ts {
                run += t;
                if run > best {
                    best = run.clone();
                }
            }
            best
        }
        ProjectionClass::Intervals => {
            let mut best = Q::zero();
            let mut run = Q::zero();
            for (_, t) in &ts {
                run += t;
                if run < Q::zero() {
                    run = Q::zero();
                }
                if run > best {
                    best = run.clone();
                }
            }
            best
        }
        ProjectionClass::AllSubsets => ts.into_iter().map(|(_, t)| t).filter(|t| t.is_positive()).sum(),
    }
}

pub fn eval_norm(inst: &NormInstance, a: &SparseVector) -> Result<Q> {
    inst.check_vector(a)?;
    let mut best = if inst.include_sup { a.sup() } else { Q::zero() };
    for f in &inst.functionals {
        let v = functional_value(inst.projection_class, f, a);
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// A projection set attached to a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProjSet {
    /// `[start, end]`; `end < start` encodes the empty set
    Interval { start: usize, end: usize },
    Subset { indices: Vec<usize> },
}

impl ProjSet {
    pub fn indices(&self) -> Vec<usize> {
        match self {
            ProjSet::Interval { start, end } => (*start..=*end).collect(),
            ProjSet::Subset { indices } => indices.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Zero,
    Coordinate {
        index: usize,
        #[serde(with = "crate::rational::qser")]
        value: Q,
    },
    Functional {
        functional_index: usize,
        functional: SparseVector,
        set: ProjSet,
        #[serde(with = "crate::rational::qser")]
        value: Q,
    },
}

impl Certificate {
    pub fn value(&self) -> Q {
        match self {
            Certificate::Zero => Q::zero(),
            Certificate::Coordinate { value, .. } | Certificate::Functional { value, .. } => value.clone(),
        }
    }

    /// Recomputes the certified value directly from `a`.
    pub fn recompute(&self, a: &SparseVector) -> Q {
        match self {
            Certificate::Zero => Q::zero(),
            Certificate::Coordinate { index, .. } => a.get(*index).abs(),
            Certificate::Functional { functional, set, .. } => functional.dot(&a.restrict(&set.indices())),
        }
    }
}

/// First attaining pair: functionals in family order, each with its largest
/// attaining projection set, then sup coordinates by index.
pub fn dual_certificate(inst: &NormInstance, a: &SparseVector) -> Result<Certificate> {
    let value = eval_norm(inst, a)?;
    if value.is_zero() {
        return Ok(Certificate::Zero);
    }
    for (idx, f) in inst.functionals.iter().enumerate() {
        if functional_value(inst.projection_class, f, a) != value {
            continue;
        }
        let ts = terms(f, a);
        let set = match inst.projection_class {
            ProjectionClass::InitialSegments => {
                let mut run = Q::zero();
                let mut end = 0;
                for (i, t) in &ts {
                    run += t;
                    if run == value {
                        end = *i;
                    }
                }
                // extend past trailing terms that sum to zero
                let after: Q = ts.iter().filter(|(i, _)| *i > end).map(|(_, t)| t).sum();
                if after.is_zero() {
                    end = inst.dim;
                }
                ProjSet::Interval { start: 1, end }
            }
            ProjectionClass::Intervals => {
                let mut found = None;
                'outer: for s in 0..ts.len() {
                    let mut run = Q::zero();
                    let mut last = None;
                    for t in &ts[s..] {
                        run += &t.1;
                        if run == value {
                            last = Some(t.0);
                        }
                    }
                    if let Some(e) = last {
                        found = Some((ts[s].0, e));
                        break 'outer;
                    }
                }
                let (start, end) = found.expect("attaining interval exists");
                ProjSet::Interval { start, end }
            }
            ProjectionClass::AllSubsets => ProjSet::Subset {
                indices: ts.iter().filter(|(_, t)| t.is_positive()).map(|(i, _)| *i).collect(),
            },
        };
        return Ok(Certificate::Functional { functional_index: idx, functional: f.clone(), set, value });
    }
    let index = a.iter().find(|(_, v)| v.abs() == value).map(|(i, _)| i).expect("sup attains");
    Ok(Certificate::Coordinate { index, value })
}

/// `P_E a` for an initial segment, interval or explicit set.
pub fn projected(a: &SparseVector, e: &ProjSet) -> SparseVector {
    a.restrict(&e.indices())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardNorm {
    L1,
    Linf,
    Summing,
}

/// `l1`: all sign functionals; `linf`: no functionals; `summing`: the
/// partial-sum functionals `±Σ_{i≤m} e_i*`, longest first.
pub fn build_standard(kind: StandardNorm, n: usize) -> Result<NormInstance> {
    if n == 0 {
        return domain("dimension must be positive");
    }
    let fs = match kind {
        StandardNorm::L1 => {
            if n > 16 {
                return size("l1 builder limited to n <= 16");
            }
            (0..1u32 << n)
                .map(|mask| {
                    SparseVector::from_pairs((0..n).map(|i| (i + 1, qi(if mask >> i & 1 == 1 { -1 } else { 1 }))))
                })
                .collect()
        }
        StandardNorm::Linf => vec![],
        StandardNorm::Summing => (1..=n).rev().map(|m| SparseVector::from_pairs((1..=m).map(|i| (i, qi(1))))).collect(),
    };
    NormInstance::new(n, fs, ProjectionClass::InitialSegments, true)
}

/// Point evaluations: row `t` gives the values `g_i(t)`.
pub fn build_pointcloud(points: &[Vec<Q>]) -> Result<NormInstance> {
    let n = points.first().map_or(0, |p| p.len());
    if n == 0 || points.iter().any(|p| p.len() != n) {
        return domain("point cloud rows must be non-empty and of equal length");
    }
    NormInstance::new(n, points.iter().map(|p| SparseVector::from_dense(p)).collect(), ProjectionClass::InitialSegments, true)
}
