//! The optimization domain: an axis-aligned cube with identical bounds in
//! every coordinate. Everything in this crate evaluates losses on either
//! `[-1,1]^d` (the default) or `[0,1]^d` (the convention used by the
//! constant-bit estimator's analysis and the two-function counterexample).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainCube {
    dim: usize,
    lo: f64,
    hi: f64,
}

impl DomainCube {
    /// `[-1, 1]^d`.
    pub fn symmetric(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        DomainCube { dim, lo: -1.0, hi: 1.0 }
    }

    /// `[0, 1]^d`.
    pub fn unit(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        DomainCube { dim, lo: 0.0, hi: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn edge(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> Vec<f64> {
        vec![(self.lo + self.hi) / 2.0; self.dim]
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim && theta.iter().all(|&x| x >= self.lo && x <= self.hi)
    }

    /// Project a point onto the cube (componentwise clamp).
    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(theta.len(), self.dim);
        theta.iter().map(|&x| x.clamp(self.lo, self.hi)).collect()
    }

    pub fn project_in_place(&self, theta: &mut [f64]) {
        for x in theta.iter_mut() {
            *x = x.clamp(self.lo, self.hi);
        }
    }
}
