use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labeled tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

impl Factor {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self { label: label.into(), dim }
    }
}

/// Ordered list of labeled factors. The first factor is the most significant
/// digit of the flat (row-major Kronecker) index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLayout {
    factors: Vec<Factor>,
}

impl SpaceLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        Self::from_factors(factors.into_iter().map(|(l, d)| Factor::new(l, d)).collect())
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &factors {
            if f.dim == 0 {
                return Err(Error::ZeroDimension(f.label.clone()));
            }
            if !seen.insert(f.label.as_str()) {
                return Err(Error::DuplicateLabel(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    /// All factors of dimension `d`.
    pub fn uniform(labels: &[&str], d: usize) -> Result<Self> {
        Self::new(labels.iter().map(|l| (*l, d)))
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.label.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label).map(|p| self.factors[p].dim).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| self.position(l.as_ref()).ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string())))
            .collect()
    }

    /// Concatenation; labels must be disjoint.
    pub fn concat(&self, other: &SpaceLayout) -> Result<SpaceLayout> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_factors(factors)
    }

    /// Sub-layout made of the factors at `positions`, in that order.
    pub fn select(&self, positions: &[usize]) -> SpaceLayout {
        SpaceLayout { factors: positions.iter().map(|&p| self.factors[p].clone()).collect() }
    }

    /// Positions not in `positions`, in layout order.
    pub fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|p| !positions.contains(p)).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.len()];
        for k in (0..self.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factors[k + 1].dim;
        }
        strides
    }

    /// Flat offsets in this layout for every multi-index over the factors at
    /// `positions` (enumerated row-major in the given order), with all other
    /// digits zero.
    pub fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let dim = self.factors[p].dim;
            let stride = strides[p];
            out = out.iter().flat_map(|&base| (0..dim).map(move |i| base + i * stride)).collect();
        }
        out
    }

    /// Same label set and dimensions, any order.
    pub fn same_factors(&self, other: &SpaceLayout) -> bool {
        self.len() == other.len()
            && self.factors.iter().all(|f| other.position(&f.label).map(|p| other.factors[p].dim) == Some(f.dim))
    }

    /// Positions in `self` of `order`'s labels, checking that `order` is a
    /// permutation of this layout.
    pub fn permutation_to(&self, order: &[impl AsRef<str>]) -> Result<Vec<usize>> {
        if order.len() != self.len() {
            return Err(Error::NotAPermutation);
        }
        let mut seen = HashSet::new();
        let mut perm = Vec::with_capacity(order.len());
        for l in order {
            let l = l.as_ref();
            let p = self.position(l).ok_or(Error::NotAPermutation)?;
            if !seen.insert(p) {
                return Err(Error::NotAPermutation);
            }
            perm.push(p);
        }
        Ok(perm)
    }
}

impl fmt::Display for SpaceLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, fac) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", fac.label, fac.dim)?;
        }
        write!(f, "]")
    }
}
