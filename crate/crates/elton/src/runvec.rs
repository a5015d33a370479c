//! Run-length vectors over a finite universe `{1..universe}`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use unclab_core::error::{domain, size, Result};
use unclab_core::norm::SparseVector;
use unclab_core::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub start: u64,
    pub len: u64,
    #[serde(with = "unclab_core::rational::qser")]
    pub value: Q,
}

impl Run {
    pub fn end(&self) -> u64 {
        self.start + self.len - 1
    }
}

/// Sorted, disjoint runs of non-zero constant value; everything else is 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunVector {
    pub universe: u64,
    pub runs: Vec<Run>,
}

impl RunVector {
    pub fn new(universe: u64, runs: Vec<Run>) -> Result<RunVector> {
        let mut out: Vec<Run> = vec![];
        for r in runs {
            if r.len == 0 || r.value.is_zero() {
                continue;
            }
            if r.start == 0 || r.end() > universe {
                return domain("run outside the universe");
            }
            if let Some(last) = out.last_mut() {
                if r.start <= last.end() {
                    return domain("runs must be sorted and disjoint");
                }
                if r.start == last.end() + 1 && r.value == last.value {
                    last.len += r.len;
                    continue;
                }
            }
            out.push(r);
        }
        Ok(RunVector { universe, runs: out })
    }

    pub fn from_dense(xs: &[Q]) -> RunVector {
        let runs = xs.iter().enumerate().map(|(i, v)| Run { start: i as u64 + 1, len: 1, value: v.clone() }).collect();
        RunVector::new(xs.len() as u64, runs).expect("dense input is well formed")
    }

    pub fn get(&self, i: u64) -> Q {
        match self.runs.binary_search_by(|r| if r.end() < i { std::cmp::Ordering::Less } else if r.start > i { std::cmp::Ordering::Greater } else { std::cmp::Ordering::Equal }) {
            Ok(k) => self.runs[k].value.clone(),
            Err(_) => Q::zero(),
        }
    }

    pub fn sup(&self) -> Q {
        self.runs.iter().map(|r| r.value.abs()).max().unwrap_or_else(Q::zero)
    }

    pub fn neg(&self) -> RunVector {
        RunVector { universe: self.universe, runs: self.runs.iter().map(|r| Run { value: -&r.value, ..r.clone() }).collect() }
    }

    /// Restriction to `{1..t}`.
    pub fn truncate(&self, t: u64) -> RunVector {
        let mut runs = vec![];
        for r in &self.runs {
            if r.start > t {
                break;
            }
            runs.push(Run { len: r.len.min(t + 1 - r.start), ..r.clone() });
        }
        RunVector { universe: self.universe, runs }
    }

    /// All constant zones covering `{from..universe}`, zero gaps included.
    pub fn zones_from(&self, from: u64) -> Vec<Run> {
        let mut out = vec![];
        let mut pos = from;
        for r in &self.runs {
            if r.end() < from {
                continue;
            }
            let s = r.start.max(from);
            if s > pos {
                out.push(Run { start: pos, len: s - pos, value: Q::zero() });
            }
            out.push(Run { start: s, len: r.end() + 1 - s, value: r.value.clone() });
            pos = r.end() + 1;
        }
        if pos <= self.universe {
            out.push(Run { start: pos, len: self.universe + 1 - pos, value: Q::zero() });
        }
        out
    }

    /// `Σ_i self_i · other_i`.
    pub fn dot(&self, other: &RunVector) -> Q {
        let (mut i, mut j) = (0, 0);
        let mut acc = Q::zero();
        while i < self.runs.len() && j < other.runs.len() {
            let (a, b) = (&self.runs[i], &other.runs[j]);
            let lo = a.start.max(b.start);
            let hi = a.end().min(b.end());
            if lo <= hi {
                acc += &a.value * &b.value * Q::from_integer((hi - lo + 1).into());
            }
            if a.end() < b.end() {
                i += 1;
            } else {
                j += 1;
            }
        }
        acc
    }

    pub fn nnz(&self) -> u64 {
        self.runs.iter().map(|r| r.len).sum()
    }

    /// Materialises the vector; refuses more than `limit` non-zeros.
    pub fn to_sparse(&self, limit: u64) -> Result<SparseVector> {
        if self.nnz() > limit {
            return size(format!("vector has {} non-zeros, limit {limit}", self.nnz()));
        }
        let mut v = SparseVector::new();
        for r in &self.runs {
            for i in r.start..=r.end() {
                v.set(i as usize, r.value.clone());
            }
        }
        Ok(v)
    }

    pub fn to_dense(&self) -> Vec<Q> {
        (1..=self.universe).map(|i| self.get(i)).collect()
    }
}
