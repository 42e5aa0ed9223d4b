//! Randomized verification of the differentiability bounds a sample
//! function must satisfy: |f| <= sqrt(d), ||grad f|| <= 1, gradient
//! 1-Lipschitz, and agreement between the analytic gradient and central
//! finite differences. Violations are reported, not thrown.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cube::DomainCube;
use crate::loss::LossFn;
use crate::numeric::{dist2, fd_gradient, norm2};

const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, Default)]
pub struct AssumptionReport {
    pub max_abs_value: f64,
    pub max_grad_norm: f64,
    pub max_lipschitz_ratio: f64,
    pub max_fd_deviation: f64,
    pub trials: usize,
}

impl AssumptionReport {
    /// True when value/gradient/Lipschitz all stay within the unit-bound
    /// envelope (value measured relative to sqrt(d)) up to `slack`.
    pub fn within_unit_bounds(&self, dim: usize, slack: f64) -> bool {
        self.max_abs_value <= (dim as f64).sqrt() + slack
            && self.max_grad_norm <= 1.0 + slack
            && self.max_lipschitz_ratio <= 1.0 + slack
    }

    fn fold(&mut self, other: &AssumptionReport) {
        self.max_abs_value = self.max_abs_value.max(other.max_abs_value);
        self.max_grad_norm = self.max_grad_norm.max(other.max_grad_norm);
        self.max_lipschitz_ratio = self.max_lipschitz_ratio.max(other.max_lipschitz_ratio);
        self.max_fd_deviation = self.max_fd_deviation.max(other.max_fd_deviation);
        self.trials += other.trials;
    }
}

/// Sample random point pairs in the cube and report the observed extremes.
pub fn check_assumption1(
    f: &dyn LossFn,
    cube: DomainCube,
    trials: usize,
    seed: u64,
) -> AssumptionReport {
    use rand::SeedableRng;
    assert!(trials >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = cube.dim();
    // keep finite-difference stencils inside the cube
    let margin = 2.0 * FD_STEP;
    let mut draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..d)
            .map(|_| {
                cube.lo() + margin + rng.random::<f64>() * (cube.edge() - 2.0 * margin)
            })
            .collect()
    };
    let mut report = AssumptionReport { trials, ..Default::default() };
    for _ in 0..trials {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let va = f.value(&a);
        let ga = f.gradient(&a);
        let gb = f.gradient(&b);
        report.max_abs_value = report.max_abs_value.max(va.abs());
        report.max_grad_norm = report.max_grad_norm.max(norm2(&ga)).max(norm2(&gb));
        let gap = dist2(&a, &b);
        if gap > 1e-9 {
            report.max_lipschitz_ratio = report.max_lipschitz_ratio.max(dist2(&ga, &gb) / gap);
        }
        let fd = fd_gradient(&|x: &[f64]| f.value(x), &a, FD_STEP);
        report.max_fd_deviation = report.max_fd_deviation.max(dist2(&fd, &ga));
    }
    report
}

/// Run [`check_assumption1`] over many sampled functions and fold the
/// extremes (the per-distribution certification used in tests).
pub fn check_distribution(
    dist: &dyn crate::loss::LossDistribution,
    functions: usize,
    trials_per_function: usize,
    seed: u64,
) -> AssumptionReport {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AssumptionReport::default();
    for i in 0..functions {
        let f = dist.sample(&mut rng);
        let r = check_assumption1(f.as_ref(), dist.cube(), trials_per_function, seed ^ i as u64);
        report.fold(&r);
    }
    report
}
