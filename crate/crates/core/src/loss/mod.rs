//! Loss function classes, data generation, and local empirical risk
//! minimization.
//!
//! A [`LossFn`] is one observable sample: a convex function evaluatable at
//! any point of the domain cube. A [`LossDistribution`] generates samples
//! and knows the population minimizer it is trying to hide. Machines hold
//! a [`MachineDataset`] split into halves (anchor selection vs gradient
//! estimation).

pub mod assumption;
pub mod cubic;
pub mod erm;
pub mod logistic;
pub mod quadratic;
pub mod ridge;

use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::cube::DomainCube;
use crate::error::{Error, Result};

/// One sample: value and gradient anywhere on (a neighborhood of) the cube.
pub trait LossFn: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, theta: &[f64]) -> f64;
    /// Write the gradient at `theta` into `out`.
    fn grad_into(&self, theta: &[f64], out: &mut [f64]);

    fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.grad_into(theta, &mut g);
        g
    }
}

pub type SampleFunction = Arc<dyn LossFn>;

/// A distribution over sample functions together with its population-level
/// facts: the domain, the minimizer of the expected loss, and the
/// curvature lower bound (smallest Hessian eigenvalue of the population
/// loss over the cube).
pub trait LossDistribution: Send + Sync {
    fn id(&self) -> &str;
    fn cube(&self) -> DomainCube;
    fn sample(&self, rng: &mut ChaCha8Rng) -> SampleFunction;
    fn true_minimizer(&self) -> &[f64];
    fn strong_convexity(&self) -> f64;
    /// The constant the raw family was multiplied by to meet the unit
    /// bounds on values, gradients, and gradient Lipschitz constants.
    fn assumption_scale(&self) -> f64 {
        1.0
    }
}

/// The `n` samples one machine observes. The first `floor(n/2)` drive
/// anchor selection, the rest drive gradient estimation; with a single
/// sample both halves alias it.
#[derive(Clone)]
pub struct MachineDataset {
    samples: Vec<SampleFunction>,
    split: usize,
}

impl MachineDataset {
    pub fn new(samples: Vec<SampleFunction>) -> Self {
        assert!(!samples.is_empty(), "a machine observes at least one sample");
        let split = samples.len() / 2;
        MachineDataset { samples, split }
    }

    pub fn draw(dist: &dyn LossDistribution, n: usize, rng: &mut ChaCha8Rng) -> Self {
        Self::new((0..n).map(|_| dist.sample(rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[SampleFunction] {
        &self.samples
    }

    pub fn first_half(&self) -> &[SampleFunction] {
        if self.samples.len() == 1 {
            &self.samples
        } else {
            &self.samples[..self.split]
        }
    }

    pub fn second_half(&self) -> &[SampleFunction] {
        if self.samples.len() == 1 {
            &self.samples
        } else {
            &self.samples[self.split..]
        }
    }
}

/// Mean value/gradient of a set of samples; the empirical objective that
/// ERM and the machine-side gradient estimates both evaluate.
pub fn mean_value(samples: &[SampleFunction], theta: &[f64]) -> f64 {
    samples.iter().map(|f| f.value(theta)).sum::<f64>() / samples.len() as f64
}

pub fn mean_gradient_into(
    samples: &[SampleFunction],
    theta: &[f64],
    out: &mut [f64],
    scratch: &mut [f64],
) {
    out.fill(0.0);
    for f in samples {
        f.grad_into(theta, scratch);
        for (o, s) in out.iter_mut().zip(scratch.iter()) {
            *o += s;
        }
    }
    let inv = 1.0 / samples.len() as f64;
    for o in out.iter_mut() {
        *o *= inv;
    }
}

/// A fixed convex combination of sample functions (used for population
/// objectives of finite mixtures and for grouped Monte-Carlo averages).
pub struct Mixture {
    parts: Vec<(f64, SampleFunction)>,
    dim: usize,
}

impl Mixture {
    pub fn new(parts: Vec<(f64, SampleFunction)>) -> Self {
        assert!(!parts.is_empty());
        let dim = parts[0].1.dim();
        Mixture { parts, dim }
    }
}

impl LossFn for Mixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.parts.iter().map(|(w, f)| w * f.value(theta)).sum()
    }

    fn grad_into(&self, theta: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let mut scratch = vec![0.0; self.dim];
        for (w, f) in &self.parts {
            f.grad_into(theta, &mut scratch);
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += w * s;
            }
        }
    }
}

/// Typed access to a distribution's parameter map.
pub(crate) struct ParamReader<'a> {
    id: &'a str,
    map: &'a serde_json::Map<String, Value>,
}

impl<'a> ParamReader<'a> {
    pub fn new(id: &'a str, map: &'a serde_json::Map<String, Value>) -> Self {
        ParamReader { id, map }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| self.bad(key, "a number")),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.as_u64().ok_or_else(|| self.bad(key, "a nonnegative integer")),
        }
    }

    pub fn usize_req(&self, key: &str) -> Result<usize> {
        self.get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| self.bad(key, "a positive integer"))
    }

    pub fn vec_f64_opt(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(arr)) => arr
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| self.bad(key, "an array of numbers")))
                .collect::<Result<Vec<f64>>>()
                .map(Some),
            Some(_) => Err(self.bad(key, "an array of numbers")),
        }
    }

    fn bad(&self, key: &str, what: &str) -> Error {
        Error::InvalidDistribution(format!("{}: parameter {key:?} must be {what}", self.id))
    }
}

/// Build a distribution from its registry id and parameter map.
///
/// Known ids: `"ridge"`, `"logistic"`, `"cubic-pair"`, `"quadratic"`,
/// `"class-c"`.
pub fn make_distribution(
    id: &str,
    params: &serde_json::Map<String, Value>,
) -> Result<Arc<dyn LossDistribution>> {
    let p = ParamReader::new(id, params);
    match id {
        "ridge" => {
            let d = p.usize_req("d")?;
            let noise_var = p.f64_or("noiseVar", 0.01)?;
            let reg = p.f64_or("reg", 0.1)?;
            let seed = p.u64_or("seed", 0)?;
            match p.vec_f64_opt("thetaStar")? {
                Some(ts) => Ok(ridge::ridge_with_theta_star(d, noise_var, reg, ts)? as _),
                None => Ok(ridge::make_ridge_distribution(d, noise_var, reg, seed)? as _),
            }
        }
        "logistic" => {
            let d = p.usize_req("d")?;
            let seed = p.u64_or("seed", 0)?;
            let oracle_samples = p.u64_or("oracleSamples", 1_000_000)? as usize;
            let theta_star = p.vec_f64_opt("thetaStar")?;
            Ok(logistic::make_logistic_distribution_with(d, seed, theta_star, oracle_samples)? as _)
        }
        "cubic-pair" => Ok(Arc::new(cubic::make_cubic_pair_distribution()) as _),
        "quadratic" => {
            let d = p.usize_req("d")?;
            let seed = p.u64_or("seed", 0)?;
            let spread = p.f64_or("spread", 0.5)?;
            let theta_star = p.vec_f64_opt("thetaStar")?;
            Ok(quadratic::make_quadratic_distribution(d, spread, theta_star, seed)? as _)
        }
        "class-c" => {
            let d = p.usize_req("d")?;
            let epsilon = p.f64_or("epsilon", 0.004)?;
            let delta = p.f64_or("delta", 0.5)?;
            let m = p.u64_or("m", 10_000)?;
            let n = p.u64_or("n", 1)?;
            let seed = p.u64_or("seed", 0)?;
            let tilt = p.vec_f64_opt("tilt")?;
            let packing = if epsilon == 0.0 {
                crate::instances::packing::PackingFunction::bare_quadratic(d)
            } else {
                crate::instances::packing::make_packing_seeded(epsilon, delta, d, seed)?
            };
            Ok(crate::instances::classc::make_class_c(Arc::new(packing), tilt, m, n)? as _)
        }
        other => Err(Error::UnknownDistribution(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn dataset_split_follows_floor_halving() {
        let dist = cubic::make_cubic_pair_distribution();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ds = MachineDataset::draw(&dist, 5, &mut rng);
        assert_eq!(ds.first_half().len(), 2);
        assert_eq!(ds.second_half().len(), 3);
        let ds = MachineDataset::draw(&dist, 4, &mut rng);
        assert_eq!(ds.first_half().len(), 2);
        assert_eq!(ds.second_half().len(), 2);
    }

    #[test]
    fn single_sample_aliases_both_halves() {
        let dist = cubic::make_cubic_pair_distribution();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = MachineDataset::draw(&dist, 1, &mut rng);
        assert_eq!(ds.first_half().len(), 1);
        assert_eq!(ds.second_half().len(), 1);
        let theta = [0.3];
        assert_eq!(ds.first_half()[0].value(&theta), ds.second_half()[0].value(&theta));
    }

    #[test]
    fn registry_knows_its_ids() {
        let empty = serde_json::Map::new();
        assert!(make_distribution("cubic-pair", &empty).is_ok());
        assert!(matches!(
            make_distribution("nope", &empty),
            Err(Error::UnknownDistribution(_))
        ));
        let mut params = serde_json::Map::new();
        params.insert("d".into(), 2.into());
        params.insert("seed".into(), 7.into());
        let ridge = make_distribution("ridge", &params).unwrap();
        assert_eq!(ridge.id(), "ridge");
        assert_eq!(ridge.cube().dim(), 2);
    }

    #[test]
    fn mixture_averages_values_and_gradients() {
        let dist = cubic::make_cubic_pair_distribution();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = dist.sample(&mut rng);
        let mix = Mixture::new(vec![(0.25, f.clone()), (0.75, f.clone())]);
        let theta = [0.4];
        assert!((mix.value(&theta) - f.value(&theta)).abs() < 1e-15);
        assert!((mix.gradient(&theta)[0] - f.gradient(&theta)[0]).abs() < 1e-15);
    }
}
