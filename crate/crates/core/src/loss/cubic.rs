//! The two-function counterexample on `[0,1]`: f0(x) = x^2 + x^3/6 and
//! f1(x) = (x-1)^2 + (x-1)^3/6, each with probability 1/2. Averaging the
//! per-machine minimizers (which are always 0 or 1 when n = 1) lands at
//! 1/2, a constant 0.0635 away from the true minimizer (sqrt(15)-3)/2.
//!
//! These are the literal textbook functions; their derivatives exceed the
//! unit bounds the main protocol assumes (|f0'| reaches 2.5), so this
//! family is exempt from the unit-bound checks and is used with the
//! averaging/centralized baselines only.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cube::DomainCube;
use crate::loss::{LossDistribution, LossFn, SampleFunction};

pub struct CubicSample {
    shift: f64,
}

impl LossFn for CubicSample {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let u = theta[0] - self.shift;
        u * u + u * u * u / 6.0
    }

    fn grad_into(&self, theta: &[f64], out: &mut [f64]) {
        let u = theta[0] - self.shift;
        out[0] = 2.0 * u + u * u / 2.0;
    }
}

pub struct CubicPairDistribution {
    minimizer: [f64; 1],
}

pub fn make_cubic_pair_distribution() -> CubicPairDistribution {
    CubicPairDistribution { minimizer: [(15f64.sqrt() - 3.0) / 2.0] }
}

impl CubicPairDistribution {
    /// The population derivative F'(x) = 2x - 1 + (2x^2 - 2x + 1)/4.
    pub fn population_derivative(&self, x: f64) -> f64 {
        2.0 * x - 1.0 + (2.0 * x * x - 2.0 * x + 1.0) / 4.0
    }

    /// Deterministic access to component 0 (shift 0) or 1 (shift 1).
    pub fn sample_component(&self, which: usize) -> SampleFunction {
        Arc::new(CubicSample { shift: which as f64 })
    }
}

impl LossDistribution for CubicPairDistribution {
    fn id(&self) -> &str {
        "cubic-pair"
    }

    fn cube(&self) -> DomainCube {
        DomainCube::unit(1)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> SampleFunction {
        let which = usize::from(rng.random::<f64>() >= 0.5);
        self.sample_component(which)
    }

    fn true_minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    fn strong_convexity(&self) -> f64 {
        // F''(x) = 1.5 + x >= 1.5 on [0,1]
        1.5
    }
}
