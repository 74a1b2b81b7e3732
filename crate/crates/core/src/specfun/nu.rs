use serde::{Deserialize, Serialize};

use crate::error::{domain, usage, Result};
use crate::scalar::Real;

/// Order parameter `ν ∈ (-1, ∞)^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuVector<T> {
    values: Vec<T>,
}

impl<T: Real> NuVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(usage("ν must have at least one component"));
        }
        if let Some(v) = values.iter().find(|v| !(**v > -T::one()) || !v.is_finite()) {
            return Err(domain(format!("every ν_j must exceed -1, got {v}")));
        }
        Ok(Self { values })
    }

    pub fn scalar(nu: T) -> Result<Self> {
        Self::new(vec![nu])
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, j: usize) -> T {
        self.values[j]
    }

    /// Signed sum `ν_1 + … + ν_n`.
    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// `γ_{ν_j} = max(-1/2 - ν_j, 0)`.
    pub fn gamma(&self, j: usize) -> T {
        gamma_scalar(self.values[j])
    }

    pub fn gamma_max(&self) -> T {
        (0..self.n()).map(|j| self.gamma(j)).fold(T::zero(), T::max)
    }

    /// `ν + e_j`.
    pub fn shifted(&self, j: usize) -> Self {
        let mut values = self.values.clone();
        values[j] = values[j] + T::one();
        Self { values }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(usage(format!("dimension mismatch: ν has {} components, expected {n}", self.n())));
        }
        Ok(())
    }
}

pub(crate) fn gamma_scalar<T: Real>(nu: T) -> T {
    (-T::lit(0.5) - nu).max(T::zero())
}

/// Multi-index `k ∈ ℕ^n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(values: Vec<usize>) -> Self {
        Self(values)
    }

    pub fn scalar(k: usize) -> Self {
        Self(vec![k])
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, j: usize) -> usize {
        self.0[j]
    }

    /// `|k| = k_1 + … + k_n`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `k - e_j`, or `None` when `k_j = 0`.
    pub fn down(&self, j: usize) -> Option<Self> {
        if self.0[j] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[j] -= 1;
        Some(Self(v))
    }

    pub fn up(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        v[j] += 1;
        Self(v)
    }

    /// All indices of dimension `n` with `|k| <= max_total`, ordered by `|k|`
    /// and then lexicographically.
    pub fn all_up_to(n: usize, max_total: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for total in 0..=max_total {
            let mut level = Vec::new();
            compositions(n, total, &mut Vec::with_capacity(n), &mut level);
            level.sort();
            out.extend(level);
        }
        out
    }
}

fn compositions(n: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == n {
        prefix.push(remaining);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    if n == 0 {
        return;
    }
    for first in 0..=remaining {
        prefix.push(first);
        compositions(n, remaining - first, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        let nu = NuVector::new(vec![0.3_f64, -0.6]).unwrap();
        assert_eq!(nu.gamma(0), 0.0);
        assert!((nu.gamma_max() - 0.1).abs() < 1e-15);
        assert!((NuVector::scalar(-0.75_f64).unwrap().gamma_max() - 0.25).abs() < 1e-15);
        assert_eq!(NuVector::new(vec![-0.5_f64, 1.0]).unwrap().gamma_max(), 0.0);
    }

    #[test]
    fn rejects_out_of_range_orders() {
        assert!(matches!(NuVector::scalar(-1.0_f64), Err(crate::Error::Domain(_))));
        assert!(NuVector::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn enumerates_graded_indices() {
        let all = MultiIndex::all_up_to(2, 2);
        let totals: Vec<_> = all.iter().map(|k| k.total()).collect();
        assert_eq!(totals, vec![0, 1, 1, 2, 2, 2]);
        assert_eq!(all[1], MultiIndex::new(vec![0, 1]));
        assert_eq!(MultiIndex::all_up_to(3, 4).len(), 35);
    }

    #[test]
    fn shifts() {
        let k = MultiIndex::new(vec![0, 2]);
        assert!(k.down(0).is_none());
        assert_eq!(k.down(1).unwrap().total(), 1);
        assert_eq!(k.up(0).values(), &[1, 2]);
    }
}
