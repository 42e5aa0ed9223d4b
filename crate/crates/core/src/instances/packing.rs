//! The sign-lattice packing family.
//!
//! A sign assignment puts +-1 on each point of a regular 2*eps'-grid
//! inside [-delta, delta]^d (coordinates odd multiples of eps' = 10 sqrt(d) eps).
//! The packing function is s(pi(x)) * k(x - pi(x)) + ||x||^2/(4 sqrt(d)):
//! one bump per grid point, signed by the assignment, riding on a gentle
//! quadratic. Any two assignments that differ at a grid point p have
//! gradients (3/2) eps apart at p, which is what makes the family a
//! gradient packing.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instances::kernel::{kernel_k, support_half_width};
use crate::loss::LossFn;

/// +-1 values on the lattice of odd multiples of `eps_prime` inside
/// `[-delta-eps', delta+eps']`, `(2*floor((delta+eps')/(2 eps')))^d` points.
#[derive(Clone, Debug)]
pub struct SignAssignment {
    pub eps_prime: f64,
    pub delta: f64,
    d: usize,
    /// Positive odd multipliers per side: coordinates are
    /// +-(2j+1) eps_prime for j in 0..half_count.
    half_count: usize,
    /// Flat row-major sign table over per-dim indices 0..2*half_count.
    signs: Vec<i8>,
}

impl SignAssignment {
    pub fn random(eps_prime: f64, delta: f64, d: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half_count = ((delta + eps_prime) / (2.0 * eps_prime)).floor() as usize;
        assert!(half_count >= 1, "grid must be nonempty");
        let total = (2 * half_count).pow(d as u32);
        let signs = (0..total).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        SignAssignment { eps_prime, delta, d, half_count, signs }
    }

    pub fn grid_points_per_dim(&self) -> usize {
        2 * self.half_count
    }

    pub fn grid_size(&self) -> usize {
        self.signs.len()
    }

    /// Coordinate of per-dim index i (0-based from the most negative).
    fn coord(&self, i: usize) -> f64 {
        let signed = i as i64 - self.half_count as i64;
        // index i covers odd multiple (2*(i - half) + 1)
        (2 * signed + 1) as f64 * self.eps_prime
    }

    /// Per-dim index of the nearest grid coordinate to x.
    fn nearest_index(&self, x: f64) -> usize {
        // odd multiples tile the axis in steps of 2 eps'; the cell of
        // coordinate (2j+1) eps' is [2j eps', (2j+2) eps')
        let j = (x / (2.0 * self.eps_prime)).floor() as i64 + self.half_count as i64;
        j.clamp(0, 2 * self.half_count as i64 - 1) as usize
    }

    /// The closest grid point to `x` and its sign.
    pub fn nearest(&self, x: &[f64]) -> (Vec<f64>, i8) {
        let mut flat = 0usize;
        let mut point = Vec::with_capacity(self.d);
        for &xi in x {
            let i = self.nearest_index(xi);
            flat = flat * self.grid_points_per_dim() + i;
            point.push(self.coord(i));
        }
        (point, self.signs[flat])
    }

    /// Iterate all grid points (lexicographic).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let per = self.grid_points_per_dim();
        let mut out = Vec::with_capacity(self.grid_size());
        for flat in 0..self.grid_size() {
            let mut rest = flat;
            let mut p = vec![0.0; self.d];
            for j in (0..self.d).rev() {
                p[j] = self.coord(rest % per);
                rest /= per;
            }
            out.push(p);
        }
        out
    }

    /// Flip the sign at one grid point (by flat index), returning a copy.
    pub fn flipped(&self, flat: usize) -> Self {
        let mut copy = self.clone();
        copy.signs[flat] = -copy.signs[flat];
        copy
    }

    pub fn point_at(&self, flat: usize) -> Vec<f64> {
        let per = self.grid_points_per_dim();
        let mut rest = flat;
        let mut p = vec![0.0; self.d];
        for j in (0..self.d).rev() {
            p[j] = self.coord(rest % per);
            rest /= per;
        }
        p
    }
}

/// One member of the packing: signed kernel bumps plus the base quadratic.
pub struct PackingFunction {
    signs: Option<Arc<SignAssignment>>,
    epsilon: f64,
    d: usize,
}

impl PackingFunction {
    /// The kernel-free quadratic baseline ||x||^2/(4 sqrt d).
    pub fn bare_quadratic(d: usize) -> Self {
        PackingFunction { signs: None, epsilon: 0.0, d }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn sign_assignment(&self) -> Option<&Arc<SignAssignment>> {
        self.signs.as_ref()
    }

    pub fn with_signs(signs: Arc<SignAssignment>, epsilon: f64) -> Self {
        let d = signs.d;
        PackingFunction { signs: Some(signs), epsilon, d }
    }
}

impl LossFn for PackingFunction {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[f64]) -> f64 {
        let base: f64 =
            x.iter().map(|v| v * v).sum::<f64>() / (4.0 * (self.d as f64).sqrt());
        match &self.signs {
            None => base,
            Some(signs) => {
                let (p, s) = signs.nearest(x);
                let shifted: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
                base + f64::from(s) * kernel_k(&shifted, self.epsilon).0
            }
        }
    }

    fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let sc = 2.0 * (self.d as f64).sqrt();
        for (o, v) in out.iter_mut().zip(x) {
            *o = v / sc;
        }
        if let Some(signs) = &self.signs {
            let (p, s) = signs.nearest(x);
            let shifted: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
            let (_, kg) = kernel_k(&shifted, self.epsilon);
            for (o, g) in out.iter_mut().zip(kg) {
                *o += f64::from(s) * g;
            }
        }
    }
}

/// Construct a packing member with an explicit sign assignment.
pub fn make_packing(
    epsilon: f64,
    delta: f64,
    d: usize,
    signs: Arc<SignAssignment>,
) -> Result<PackingFunction> {
    validate(epsilon, delta, d)?;
    Ok(PackingFunction::with_signs(signs, epsilon))
}

/// Construct a packing member with signs drawn from a seed.
pub fn make_packing_seeded(epsilon: f64, delta: f64, d: usize, seed: u64) -> Result<PackingFunction> {
    validate(epsilon, delta, d)?;
    let eps_prime = support_half_width(epsilon, d);
    let signs = Arc::new(SignAssignment::random(eps_prime, delta, d, seed));
    Ok(PackingFunction::with_signs(signs, epsilon))
}

fn validate(epsilon: f64, delta: f64, d: usize) -> Result<()> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidDistribution("packing: epsilon must be positive".into()));
    }
    let eps_prime = support_half_width(epsilon, d);
    if eps_prime > delta || delta > 1.0 {
        return Err(Error::InvalidDistribution(format!(
            "packing requires 10*sqrt(d)*epsilon <= delta <= 1 (got eps'={eps_prime}, delta={delta})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{dist2, norm2};

    #[test]
    fn grid_count_matches_the_formula() {
        // d=1, delta=0.5, eps=0.004 -> eps'=0.04 -> 2*floor(0.54/0.08) = 12
        let f = make_packing_seeded(0.004, 0.5, 1, 1).unwrap();
        let signs = f.sign_assignment().unwrap();
        assert_eq!(signs.grid_size(), 12);
        assert_eq!(signs.grid_points_per_dim(), 12);
        // all coordinates are odd multiples of eps' within [-delta, delta]
        for p in signs.points() {
            let ratio = p[0] / signs.eps_prime;
            assert!((ratio - ratio.round()).abs() < 1e-9);
            assert_eq!((ratio.round() as i64).rem_euclid(2), 1, "odd multiple of eps'");
            assert!(p[0].abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(make_packing_seeded(0.06, 0.5, 1, 0).is_err()); // eps' = 0.6 > delta
        assert!(make_packing_seeded(0.004, 1.5, 1, 0).is_err()); // delta > 1
        assert!(make_packing_seeded(0.004, 0.5, 1, 0).is_ok());
    }

    #[test]
    fn vanishes_at_the_origin() {
        // the origin is equidistant from the 2^d nearest grid points and
        // on the kernel support boundary, so only the quadratic remains
        for d in [1usize, 2] {
            let f = make_packing_seeded(0.004, 0.5, d, 3).unwrap();
            let zero = vec![0.0; d];
            assert!(f.value(&zero).abs() < 1e-15);
            assert!(norm2(&f.gradient(&zero)) < 1e-15);
        }
    }

    #[test]
    fn differing_signs_separate_gradients_at_the_witness_point() {
        let f1 = make_packing_seeded(0.004, 0.5, 2, 4).unwrap();
        let signs = f1.sign_assignment().unwrap();
        let flat = 7 % signs.grid_size();
        let f2 = PackingFunction::with_signs(Arc::new(signs.flipped(flat)), 0.004);
        let p = signs.point_at(flat);
        let gap = dist2(&f1.gradient(&p), &f2.gradient(&p));
        // 2 * ||grad k(0)|| = 2 * (3/4) eps
        assert!((gap - 1.5 * 0.004).abs() < 1e-12, "{gap}");
    }

    #[test]
    fn bare_quadratic_has_no_bumps() {
        let f = PackingFunction::bare_quadratic(2);
        assert!((f.value(&[0.5, 0.5]) - 0.5 / (4.0 * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences_near_bumps() {
        let f = make_packing_seeded(0.01, 0.5, 2, 5).unwrap();
        let pts = [[0.11, -0.08], [0.3, 0.3], [0.02, 0.0]];
        for p in pts {
            let fd = crate::numeric::fd_gradient(&|x: &[f64]| f.value(x), &p, 1e-6);
            assert!(dist2(&fd, &f.gradient(&p)) < 1e-7);
        }
    }
}
