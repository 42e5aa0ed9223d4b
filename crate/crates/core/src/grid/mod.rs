//! Discrete geometry and bit-level encoding for the multi-resolution
//! protocol: the coarse anchor lattice, the nested per-cube grids, the
//! level-sampling distribution, gradient-difference quantization, and the
//! fixed-width sub-signal wire format.

pub mod bits;
pub mod codec;
pub mod lattice;
pub mod quantizer;

use crate::cube::DomainCube;
use crate::error::{Error, Result};
use crate::grid::bits::bits_for;

/// Hard cap on `t*d` so the server-side gradient field (2^(t*d) points at
/// the finest level) stays within memory.
const MAX_FIELD_BITS: u32 = 22;

/// Derived protocol constants for one `(m, n, d, B)` operating point.
///
/// All logarithms are base 2: bits are the unit everywhere.
#[derive(Clone, Debug)]
pub struct MreParams {
    pub m: u64,
    pub n: u64,
    pub d: usize,
    pub budget_bits: u64,
    pub delta_scale: f64,
    pub cube: DomainCube,
    /// log2(m*n).
    pub log_mn: f64,
    /// Anchor lattice spacing: min(2, log2(mn)/sqrt(n)).
    pub grid_res: f64,
    /// Per-dimension lattice index range (inclusive), anchored at the origin.
    pub s_index_min: i64,
    pub s_index_max: i64,
    /// Bits per coordinate of the s-part.
    pub s_bits: u32,
    /// Resolution parameter, clamped to at most 1.
    pub delta: f64,
    pub delta_clamped: bool,
    /// Number of refinement levels: max(0, floor(log2(1/delta))).
    pub t: u32,
    /// Bits for the level field.
    pub level_bits: u32,
    /// ceil(B / (d*log2(mn))).
    pub sub_signals_per_machine: u64,
    /// floor(d*log2(mn)).
    pub sub_signal_bits: u64,
    /// Edge of the per-anchor cube, clipped to the domain edge.
    pub cs_edge: f64,
    /// Cumulative level-sampling distribution, Pr(l) ∝ 2^((d-2)l).
    pub level_cdf: Vec<f64>,
    /// Per-level per-entry box half-width for the Δ part.
    pub delta_range: Vec<f64>,
    /// Per-level code width per Δ entry.
    pub delta_bits: Vec<u32>,
    /// Per-level quantizer step (2*range / 2^bits).
    pub delta_step: Vec<f64>,
}

/// Derive protocol constants on the default `[-1,1]^d` domain.
///
/// `delta_scale` multiplies the `2d log^3(mn)` factor of the resolution
/// parameter; 1 reproduces the nominal formula, smaller values let
/// desk-scale runs exercise deeper refinement levels.
pub fn derive_params(m: u64, n: u64, d: usize, budget_bits: u64, delta_scale: f64) -> Result<MreParams> {
    derive_params_on(DomainCube::symmetric(d), m, n, budget_bits, delta_scale)
}

pub fn derive_params_on(
    cube: DomainCube,
    m: u64,
    n: u64,
    budget_bits: u64,
    delta_scale: f64,
) -> Result<MreParams> {
    let d = cube.dim();
    assert!(m >= 1 && n >= 1);
    assert!(delta_scale > 0.0, "deltaScale must be positive");
    let mn = m.checked_mul(n).expect("m*n overflow");
    if mn < 4 {
        return Err(Error::MnTooSmall { mn });
    }
    let log_mn = (mn as f64).log2();
    let required = d as f64 * log_mn;
    if (budget_bits as f64) < required {
        return Err(Error::BudgetTooSmall { budget: budget_bits, required });
    }

    let sqrt_n = (n as f64).sqrt();
    let grid_res = (log_mn / sqrt_n).min(2.0);

    // Lattice indices i with lo <= i*grid_res <= hi. The 1e-9 nudge keeps
    // exact multiples on the right side of the floor/ceil.
    let s_index_min = (cube.lo() / grid_res - 1e-9).ceil() as i64;
    let s_index_max = (cube.hi() / grid_res + 1e-9).floor() as i64;
    let positions = (s_index_max - s_index_min + 1) as u64;
    let s_bits = bits_for(positions);

    let mb = (m as f64) * (budget_bits as f64);
    let raw_delta = delta_scale
        * 2.0
        * d as f64
        * log_mn.powi(3)
        * (mb.powf(-1.0 / d as f64)).max(2f64.powf(d as f64 / 2.0) / (m as f64).sqrt());
    let delta_clamped = raw_delta > 1.0;
    let delta = raw_delta.min(1.0);
    if delta_clamped {
        log::info!("delta = {raw_delta:.3e} clamped to 1 (m={m}, n={n}, d={d}, B={budget_bits})");
    }

    let t = if delta >= 1.0 { 0 } else { (1.0 / delta).log2().floor() as u32 };
    if t as u64 * d as u64 > MAX_FIELD_BITS as u64 {
        return Err(Error::GridTooFine { t, d, points: 1u128 << (t as u64 * d as u64) });
    }
    let level_bits = bits_for(t as u64 + 1);

    let sub_signals_per_machine = ((budget_bits as f64) / required).ceil() as u64;
    let sub_signal_bits = required.floor() as u64;

    let cs_edge = (2.0 * log_mn / sqrt_n).min(cube.edge());

    // Pr(l) ∝ 2^((d-2)l), cumulative.
    let mut level_cdf = Vec::with_capacity(t as usize + 1);
    let mut acc = 0.0;
    for l in 0..=t {
        acc += 2f64.powi((d as i32 - 2) * l as i32);
        level_cdf.push(acc);
    }
    for w in level_cdf.iter_mut() {
        *w /= acc;
    }

    // Δ quantizer per level. The per-entry box half-width comes from the
    // Lipschitz bound |Δ_j| <= ||p - p'|| = sqrt(d)*cs_edge/2^(l+1) for
    // l >= 1 (and the unit gradient bound at level 0, or anywhere the
    // Lipschitz box would exceed it). The step must keep the decoded
    // vector within 2*delta*log2(mn)/sqrt(n) of the input; leftover
    // sub-signal bits are spent on extra precision instead of padding.
    let step_req = 2.0 * delta * log_mn / ((d as f64).sqrt() * sqrt_n);
    let mut delta_range = Vec::with_capacity(t as usize + 1);
    let mut delta_bits = Vec::with_capacity(t as usize + 1);
    let mut delta_step = Vec::with_capacity(t as usize + 1);
    for l in 0..=t {
        let range = if l == 0 {
            1.0
        } else {
            ((d as f64).sqrt() * cs_edge / 2f64.powi(l as i32 + 1)).min(2.0)
        };
        let overhead = d as u64 * u64::from(s_bits) + u64::from(level_bits) + d as u64 * u64::from(l);
        let needed_min = overhead + d as u64; // at least one bit per entry
        if needed_min > sub_signal_bits {
            return Err(Error::SubSignalOverflow {
                level: l,
                needed: needed_min,
                available: sub_signal_bits,
            });
        }
        let fill = (((sub_signal_bits - overhead) / d as u64) as u32).min(32);
        let required_bits = ((2.0 * range / step_req).log2() - 1e-9).ceil().max(1.0) as u32;
        if required_bits > fill {
            return Err(Error::SubSignalOverflow {
                level: l,
                needed: overhead + d as u64 * u64::from(required_bits),
                available: sub_signal_bits,
            });
        }
        delta_range.push(range);
        delta_bits.push(fill);
        delta_step.push(2.0 * range / 2f64.powi(fill as i32));
    }

    Ok(MreParams {
        m,
        n,
        d,
        budget_bits,
        delta_scale,
        cube,
        log_mn,
        grid_res,
        s_index_min,
        s_index_max,
        s_bits,
        delta,
        delta_clamped,
        t,
        level_bits,
        sub_signals_per_machine,
        sub_signal_bits,
        cs_edge,
        level_cdf,
        delta_range,
        delta_bits,
        delta_step,
    })
}

impl MreParams {
    /// Number of grid points at refinement level `l` (2^(l*d)).
    pub fn points_at_level(&self, level: u32) -> u64 {
        debug_assert!(level <= self.t);
        1u64 << (u64::from(level) * self.d as u64)
    }

    /// Total payload one machine transmits, in bits.
    pub fn machine_payload_bits(&self) -> u64 {
        self.sub_signals_per_machine * self.sub_signal_bits
    }

    /// The quantizer's guaranteed reconstruction accuracy in Euclidean norm.
    pub fn delta_accuracy(&self) -> f64 {
        2.0 * self.delta * self.log_mn / (self.n as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scale_params_clamp_delta() {
        // d=2, m=1e4, n=1, B=27: 2*2*13.29^3*max(0.0019, 0.02) >> 1.
        let p = derive_params(10_000, 1, 2, 27, 1.0).unwrap();
        assert!(p.delta_clamped);
        assert_eq!(p.delta, 1.0);
        assert_eq!(p.t, 0);
        assert_eq!(p.sub_signals_per_machine, 2);
        assert_eq!(p.sub_signal_bits, 26);
        // n=1 collapses the anchor lattice to the single point 0
        assert_eq!((p.s_index_min, p.s_index_max), (0, 0));
        assert_eq!(p.s_bits, 0);
    }

    #[test]
    fn delta_exactly_one_is_the_clamp_boundary() {
        // pick deltaScale so the raw delta is exactly 1
        let probe = derive_params(10_000, 1, 2, 27, 1.0).unwrap();
        let raw = 2.0 * 2.0 * probe.log_mn.powi(3) * (2.0 / 100.0);
        let p = derive_params(10_000, 1, 2, 27, 1.0 / raw).unwrap();
        assert!((p.delta - 1.0).abs() < 1e-12);
        assert_eq!(p.t, 0);
        assert_eq!(p.points_at_level(0), 1);
    }

    #[test]
    fn delta_scale_drives_t() {
        // deltaScale chosen so delta = 0.2 exactly: t = floor(log2 5) = 2.
        let probe = derive_params(10_000, 1, 2, 27, 1.0).unwrap();
        let raw = 2.0 * 2.0 * probe.log_mn.powi(3) * (2.0 / 100.0);
        let p = derive_params(10_000, 1, 2, 27, 0.2 / raw).unwrap();
        assert!((p.delta - 0.2).abs() < 1e-12);
        assert_eq!(p.t, 2);
        // floor invariant: 2^-t >= delta > 2^-(t+1)
        assert!(2f64.powi(-(p.t as i32)) >= p.delta);
        assert!(p.delta > 2f64.powi(-(p.t as i32) - 1));
    }

    #[test]
    fn budget_below_d_log_mn_is_rejected() {
        let err = derive_params(10_000, 1, 2, 26, 1.0).unwrap_err();
        assert!(matches!(err, Error::BudgetTooSmall { .. }));
        let err = derive_params(1, 2, 1, 8, 1.0).unwrap_err();
        assert!(matches!(err, Error::MnTooSmall { .. }));
    }

    #[test]
    fn overly_aggressive_delta_scale_overflows_the_sub_signal() {
        let err = derive_params(1_000, 1, 2, 20, 1e-12).unwrap_err();
        assert!(matches!(
            err,
            Error::SubSignalOverflow { .. } | Error::GridTooFine { .. }
        ));
    }

    #[test]
    fn quantizer_step_meets_the_accuracy_target() {
        let p = derive_params(100_000, 1, 2, 34, 4e-6).unwrap();
        assert!(p.t >= 2);
        let step_req = 2.0 * p.delta * p.log_mn / (p.d as f64).sqrt();
        for l in 0..=p.t as usize {
            assert!(p.delta_step[l] <= step_req + 1e-15, "level {l}");
            // layout fits
            let used = p.d as u64 * u64::from(p.s_bits)
                + u64::from(p.level_bits)
                + p.d as u64 * l as u64
                + p.d as u64 * u64::from(p.delta_bits[l]);
            assert!(used <= p.sub_signal_bits, "level {l}: {used} > {}", p.sub_signal_bits);
        }
    }

    #[test]
    fn anchor_lattice_on_a_fine_grid() {
        // n=10^4, m=100: log2(mn) ~ 19.93, res ~ 0.199, 11 positions/dim.
        let p = derive_params(100, 10_000, 2, 60, 1.0).unwrap();
        assert!((p.grid_res - (1_000_000f64).log2() / 100.0).abs() < 1e-12);
        assert_eq!((p.s_index_min, p.s_index_max), (-5, 5));
        assert_eq!(p.s_bits, 4);
    }
}
