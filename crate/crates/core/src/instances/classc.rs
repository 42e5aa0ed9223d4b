//! The adversarial mixture family: half the mass on one packing function,
//! half spread over tilted linear pairs +-e_i^T x.
//!
//! The textbook linear parts d*e_i^T x have gradient norm d; they are
//! rescaled by 1/d here so every sample meets the unit bounds (the scale
//! is recorded on the distribution). With pair weights
//! P_i^+ = 1/(4d) + v_i/4 and P_i^- = 1/(4d) - v_i/4 the population loss
//! is (f(x) + v^T x)/2, so the tilt enters the minimizer directly. The
//! admissible tilt range comes from c = 4 d log2(mn).

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::cube::DomainCube;
use crate::error::{Error, Result};
use crate::instances::packing::PackingFunction;
use crate::loss::erm::erm_minimize;
use crate::loss::{LossDistribution, LossFn, SampleFunction};

/// A rescaled linear part: +-x_i.
pub struct ScaledLinear {
    pub coord: usize,
    pub sign: f64,
    d: usize,
}

impl LossFn for ScaledLinear {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.sign * theta[self.coord]
    }

    fn grad_into(&self, _theta: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        out[self.coord] = self.sign;
    }
}

pub struct ClassCDistribution {
    packing: Arc<PackingFunction>,
    /// P(g_i^+), i = 0..d.
    weights_plus: Vec<f64>,
    tilt: Vec<f64>,
    d: usize,
    minimizer: Vec<f64>,
    lambda: f64,
}

/// Build a class-C distribution around `packing` with the given tilt
/// (`None` = symmetric weights). `m` and `n` fix the admissible tilt
/// range through c = 4 d log2(mn).
pub fn make_class_c(
    packing: Arc<PackingFunction>,
    tilt: Option<Vec<f64>>,
    m: u64,
    n: u64,
) -> Result<Arc<ClassCDistribution>> {
    let d = packing.dim();
    let tilt = tilt.unwrap_or_else(|| vec![0.0; d]);
    if tilt.len() != d {
        return Err(Error::InvalidDistribution("class-c: tilt length != d".into()));
    }
    let mn = (m * n) as f64;
    let c = 4.0 * d as f64 * mn.log2();
    let bound = 2.0 / (c * (n as f64).sqrt());
    for &v in &tilt {
        if v.abs() > bound {
            return Err(Error::InvalidDistribution(format!(
                "class-c: tilt {v} outside the admissible range +-{bound:.3e} (c = 4 d log2(mn))"
            )));
        }
    }
    let weights_plus: Vec<f64> = tilt.iter().map(|&v| 1.0 / (4.0 * d as f64) + v / 4.0).collect();

    // Population loss: f/2 + (1/2) v^T x, in closed form as a mixture.
    let population = PopulationClassC { packing: packing.clone(), tilt: tilt.clone(), d };
    let cube = DomainCube::symmetric(d);
    let minimizer = erm_minimize(&[Arc::new(population) as SampleFunction], cube, 1e-10)?;

    // Curvature: half the packing curvature (linear parts are flat).
    let lambda = 1.0 / (20.0 * (d as f64).sqrt());

    Ok(Arc::new(ClassCDistribution { packing, weights_plus, tilt, d, minimizer, lambda }))
}

struct PopulationClassC {
    packing: Arc<PackingFunction>,
    tilt: Vec<f64>,
    d: usize,
}

impl LossFn for PopulationClassC {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, theta: &[f64]) -> f64 {
        0.5 * self.packing.value(theta) + 0.5 * crate::numeric::dot(&self.tilt, theta)
    }

    fn grad_into(&self, theta: &[f64], out: &mut [f64]) {
        self.packing.grad_into(theta, out);
        for (o, &v) in out.iter_mut().zip(&self.tilt) {
            *o = 0.5 * *o + 0.5 * v;
        }
    }
}

impl ClassCDistribution {
    pub fn tilt(&self) -> &[f64] {
        &self.tilt
    }

    pub fn weights_plus(&self) -> &[f64] {
        &self.weights_plus
    }

    pub fn packing(&self) -> &Arc<PackingFunction> {
        &self.packing
    }

    /// Sample just the component index: 2d+1 outcomes, the packing last.
    pub fn sample_component_index(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        if u < 0.5 {
            return 2 * self.d; // the packing function
        }
        let mut acc = 0.5;
        for i in 0..self.d {
            acc += self.weights_plus[i];
            if u < acc {
                return 2 * i;
            }
            acc += 1.0 / (2.0 * self.d as f64) - self.weights_plus[i];
            if u < acc {
                return 2 * i + 1;
            }
        }
        2 * self.d - 1
    }

    pub fn component(&self, index: usize) -> SampleFunction {
        if index == 2 * self.d {
            self.packing.clone() as SampleFunction
        } else {
            let coord = index / 2;
            let sign = if index % 2 == 0 { 1.0 } else { -1.0 };
            Arc::new(ScaledLinear { coord, sign, d: self.d })
        }
    }
}

impl LossDistribution for ClassCDistribution {
    fn id(&self) -> &str {
        "class-c"
    }

    fn cube(&self) -> DomainCube {
        DomainCube::symmetric(self.d)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> SampleFunction {
        let idx = self.sample_component_index(rng);
        self.component(idx)
    }

    fn true_minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    fn strong_convexity(&self) -> f64 {
        self.lambda
    }

    fn assumption_scale(&self) -> f64 {
        // linear parts carry the 1/d rescale
        1.0 / self.d as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::packing::make_packing_seeded;
    use crate::loss::Mixture;
    use crate::numeric::norm2;
    use rand::SeedableRng;

    fn packing(d: usize) -> Arc<PackingFunction> {
        Arc::new(make_packing_seeded(0.004, 0.5, d, 7).unwrap())
    }

    #[test]
    fn symmetric_weights_minimize_at_zero() {
        let dist = make_class_c(packing(2), None, 10_000, 1).unwrap();
        assert!(norm2(dist.true_minimizer()) < 1e-8, "{:?}", dist.true_minimizer());
        for w in dist.weights_plus() {
            assert!((w - 1.0 / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tilt_shifts_the_minimizer_of_the_half_sum() {
        // pure quadratic baseline: F = (x^2/(4 sqrt d) + v x)/2, so
        // F' = x/(4 sqrt d) + v/2 vanishes at x = -2 sqrt(d) v.
        let d = 1;
        let v = 0.01;
        // admissible range needs small v: c = 4*log2(mn); pick small mn
        let dist = make_class_c(
            Arc::new(PackingFunction::bare_quadratic(d)),
            Some(vec![v]),
            4,
            1,
        )
        .unwrap();
        let expected = -2.0 * (d as f64).sqrt() * v;
        assert!(
            (dist.true_minimizer()[0] - expected).abs() < 1e-7,
            "{} vs {expected}",
            dist.true_minimizer()[0]
        );
    }

    #[test]
    fn out_of_range_tilt_is_rejected() {
        let err = make_class_c(packing(1), Some(vec![0.5]), 10_000, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidDistribution(_)));
    }

    #[test]
    fn component_frequencies_match_the_weights() {
        let dist = make_class_c(packing(2), None, 10_000, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let mut counts = vec![0u64; 5];
        for _ in 0..n {
            counts[dist.sample_component_index(&mut rng)] += 1;
        }
        // packing half the mass; each linear part 1/8 for d=2
        assert!((counts[4] as f64 / n as f64 - 0.5).abs() < 0.005);
        for &c in &counts[..4] {
            assert!((c as f64 / n as f64 - 0.125).abs() < 0.004);
        }
    }

    #[test]
    fn grouped_monte_carlo_minimizer_sits_near_zero() {
        // a 10^6-sample Monte-Carlo average, grouped by component (the
        // mixture with multinomial weights is the identical function)
        let dist = make_class_c(packing(2), None, 10_000, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let total = 1_000_000usize;
        let mut counts = vec![0usize; 5];
        for _ in 0..total {
            counts[dist.sample_component_index(&mut rng)] += 1;
        }
        let mix = Mixture::new(
            counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (c as f64 / total as f64, dist.component(i)))
                .collect(),
        );
        let emp = erm_minimize(&[Arc::new(mix) as SampleFunction], dist.cube(), 1e-9).unwrap();
        assert!(norm2(&emp) < 1e-2, "{emp:?}");
    }
}
