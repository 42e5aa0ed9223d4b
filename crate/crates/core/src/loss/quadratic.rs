//! Shifted quadratics with random centers: f(theta) = ||theta - c||^2 / (4 sqrt(d)),
//! c = theta* + uniform(-spread, spread)^d. The per-machine ERM over n
//! samples is exactly the clamp of the center mean, so machine outputs are
//! unbiased for theta* whenever the centers stay inside the cube. This is
//! the clean test bench for the constant-bit estimator's 1/sqrt(m) law.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cube::DomainCube;
use crate::error::{Error, Result};
use crate::loss::{LossDistribution, LossFn, SampleFunction};

pub struct QuadraticSample {
    center: Vec<f64>,
}

impl LossFn for QuadraticSample {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let d = self.center.len() as f64;
        theta
            .iter()
            .zip(&self.center)
            .map(|(t, c)| (t - c) * (t - c))
            .sum::<f64>()
            / (4.0 * d.sqrt())
    }

    fn grad_into(&self, theta: &[f64], out: &mut [f64]) {
        let sc = 2.0 * (self.center.len() as f64).sqrt();
        for ((o, t), c) in out.iter_mut().zip(theta).zip(&self.center) {
            *o = (t - c) / sc;
        }
    }
}

pub struct QuadraticDistribution {
    d: usize,
    theta_star: Vec<f64>,
    spread: f64,
}

pub fn make_quadratic_distribution(
    d: usize,
    spread: f64,
    theta_star: Option<Vec<f64>>,
    seed: u64,
) -> Result<Arc<QuadraticDistribution>> {
    use rand::SeedableRng;
    if d == 0 {
        return Err(Error::InvalidDistribution("quadratic: d must be >= 1".into()));
    }
    if spread < 0.0 {
        return Err(Error::InvalidDistribution("quadratic: spread must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta_star = match theta_star {
        Some(ts) if ts.len() != d => {
            return Err(Error::InvalidDistribution("quadratic: thetaStar length != d".into()))
        }
        Some(ts) => ts,
        None => (0..d).map(|_| rng.random::<f64>() * 0.4).collect(),
    };
    for &t in &theta_star {
        if t - spread < -1.0 || t + spread > 1.0 {
            return Err(Error::InvalidDistribution(
                "quadratic: centers would leave the cube (shrink spread or thetaStar)".into(),
            ));
        }
    }
    Ok(Arc::new(QuadraticDistribution { d, theta_star, spread }))
}

impl LossDistribution for QuadraticDistribution {
    fn id(&self) -> &str {
        "quadratic"
    }

    fn cube(&self) -> DomainCube {
        DomainCube::symmetric(self.d)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> SampleFunction {
        let center = self
            .theta_star
            .iter()
            .map(|&t| t + (2.0 * rng.random::<f64>() - 1.0) * self.spread)
            .collect();
        Arc::new(QuadraticSample { center })
    }

    fn true_minimizer(&self) -> &[f64] {
        &self.theta_star
    }

    fn strong_convexity(&self) -> f64 {
        1.0 / (2.0 * (self.d as f64).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::erm::erm_minimize;
    use rand::SeedableRng;

    #[test]
    fn erm_is_the_center_mean() {
        let dist = make_quadratic_distribution(2, 0.5, Some(vec![0.2, 0.3]), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fs: Vec<SampleFunction> = (0..50).map(|_| dist.sample(&mut rng)).collect();
        let theta = erm_minimize(&fs, dist.cube(), 1e-9).unwrap();
        // recompute the mean of centers through gradients at 0
        let mut mean = vec![0.0; 2];
        for f in &fs {
            let g = f.gradient(&[0.0, 0.0]);
            // grad at 0 = -c / (2 sqrt d)
            mean[0] -= g[0] * 2.0 * 2f64.sqrt();
            mean[1] -= g[1] * 2.0 * 2f64.sqrt();
        }
        for m in mean.iter_mut() {
            *m /= 50.0;
        }
        assert!((theta[0] - mean[0]).abs() < 1e-7);
        assert!((theta[1] - mean[1]).abs() < 1e-7);
    }

    #[test]
    fn centers_out_of_cube_are_rejected() {
        assert!(make_quadratic_distribution(1, 0.5, Some(vec![0.8]), 0).is_err());
        assert!(make_quadratic_distribution(1, 0.5, Some(vec![0.4]), 0).is_ok());
    }
}
