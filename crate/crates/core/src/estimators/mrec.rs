//! The multi-resolution estimator.
//!
//! Machine side: minimize the first half of the local samples to pick the
//! anchor `s`, then emit sub-signals `(s, p, Δ)` where `p` is a randomly
//! drawn grid point (level first, then a uniform cell) and `Δ` is the
//! second-half empirical gradient at `s` (level 0) or the difference of
//! empirical gradients between `p` and its parent (deeper levels).
//!
//! Server side: pick the modal anchor `s*`, drop redundant sub-signals so
//! each machine contributes at most one per grid point, average the
//! surviving increments level by level, and output the finest-grid point
//! with the smallest reconstructed gradient norm.

use std::collections::HashSet;

use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::estimators::EncodedSignal;
use crate::grid::codec::{decode_signal, encode_signal, SubSignal};
use crate::grid::lattice::{
    cell_to_index, nearest_grid_point, parent_of, point_position, sample_cell, sample_level,
    GridPoint,
};
use crate::grid::quantizer::{dequantize_delta, quantize_delta};
use crate::grid::MreParams;
use crate::loss::erm::{erm_minimize_capped, ERM_MAX_ITERS};
use crate::loss::{mean_gradient_into, MachineDataset};
use crate::numeric::norm2;

/// A sub-signal after decoding: the grid point and the real-valued
/// gradient difference the server works with.
#[derive(Clone, Debug)]
pub struct DecodedSub {
    pub point: GridPoint,
    pub delta: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MreMachineStats {
    /// Gradient differences that fell outside the level box and were clamped.
    pub clamp_events: u32,
}

/// The server's reconstructed gradient field over the nested grids.
pub struct GradientField {
    d: usize,
    t: u32,
    /// Per level: flattened per-point gradient estimates (d entries each).
    estimates: Vec<Vec<f64>>,
    counts: Vec<Vec<u32>>,
    /// True where the chain from the anchor was interrupted by an empty
    /// point (the estimate inherits its parent's value there).
    orphaned: Vec<Vec<bool>>,
}

impl GradientField {
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn estimate(&self, p: &GridPoint) -> &[f64] {
        let idx = cell_to_index(&p.cell, p.level);
        &self.estimates[p.level as usize][idx * self.d..(idx + 1) * self.d]
    }

    pub fn count(&self, p: &GridPoint) -> u32 {
        self.counts[p.level as usize][cell_to_index(&p.cell, p.level)]
    }

    pub fn is_orphaned(&self, p: &GridPoint) -> bool {
        self.orphaned[p.level as usize][cell_to_index(&p.cell, p.level)]
    }

    pub fn orphan_count(&self) -> usize {
        self.orphaned.iter().map(|l| l.iter().filter(|&&o| o).count()).sum()
    }
}

pub struct MreOutput {
    pub theta_hat: Vec<f64>,
    pub field: GradientField,
    pub s_star: Vec<i64>,
    /// No level-0 signal survived for `s*`; the output fell back to `s*`.
    pub fallback: bool,
}

/// Machine map producing the exact (unquantized) sub-signals. The oracle
/// path for equivalence tests; the wire path quantizes these.
pub fn mrec_machine_raw(
    dataset: &MachineDataset,
    params: &MreParams,
    rng: &mut ChaCha8Rng,
    erm_tol: f64,
) -> Result<Vec<DecodedSub>> {
    let theta_i = erm_minimize_capped(dataset.first_half(), params.cube, erm_tol, ERM_MAX_ITERS)?;
    let s = nearest_grid_point(&theta_i, params);
    let second = dataset.second_half();
    let d = params.d;
    let mut grad = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    let mut eval_grad = |pos: &[f64]| -> Vec<f64> {
        let inside = params.cube.project(pos);
        mean_gradient_into(second, &inside, &mut grad, &mut scratch);
        grad.clone()
    };
    let mut subs = Vec::with_capacity(params.sub_signals_per_machine as usize);
    for _ in 0..params.sub_signals_per_machine {
        let level = sample_level(params, rng);
        let cell = sample_cell(level, params, rng);
        let point = GridPoint { s: s.clone(), level, cell };
        let delta = if level == 0 {
            eval_grad(&point_position(&point, params))
        } else {
            let parent = parent_of(&point);
            let at_p = eval_grad(&point_position(&point, params));
            let at_parent = eval_grad(&point_position(&parent, params));
            at_p.iter().zip(&at_parent).map(|(a, b)| a - b).collect()
        };
        subs.push(DecodedSub { point, delta });
    }
    Ok(subs)
}

/// Full machine map: raw sub-signals, quantized and serialized.
pub fn mrec_machine(
    dataset: &MachineDataset,
    params: &MreParams,
    rng: &mut ChaCha8Rng,
) -> Result<EncodedSignal> {
    mrec_machine_with_stats(dataset, params, rng, crate::loss::erm::DEFAULT_ERM_TOL)
        .map(|(sig, _)| sig)
}

pub fn mrec_machine_with_stats(
    dataset: &MachineDataset,
    params: &MreParams,
    rng: &mut ChaCha8Rng,
    erm_tol: f64,
) -> Result<(EncodedSignal, MreMachineStats)> {
    let raw = mrec_machine_raw(dataset, params, rng, erm_tol)?;
    let mut stats = MreMachineStats::default();
    let subs: Vec<SubSignal> = raw
        .into_iter()
        .map(|sub| {
            let (q, clamped) = quantize_delta(&sub.delta, sub.point.level, params);
            if clamped {
                stats.clamp_events += 1;
            }
            SubSignal { point: sub.point, delta: q }
        })
        .collect();
    let bits = encode_signal(&subs, params);
    debug_assert_eq!(bits.len_bits(), params.machine_payload_bits());
    Ok((EncodedSignal { machine_id: 0, bits }, stats))
}

/// Server reduce over wire signals: decode, dequantize, and delegate.
/// Signals are processed in slice order; machine identity is positional.
pub fn mrec_server(signals: &[EncodedSignal], params: &MreParams) -> Result<MreOutput> {
    let mut per_machine = Vec::with_capacity(signals.len());
    for sig in signals {
        let subs = decode_signal(&sig.bits, params)?;
        per_machine.push(
            subs.into_iter()
                .map(|s| DecodedSub {
                    delta: dequantize_delta(&s.delta, params),
                    point: s.point,
                })
                .collect::<Vec<_>>(),
        );
    }
    Ok(mrec_server_decoded(&per_machine, params))
}

/// Server reduce over already-decoded sub-signals, one `Vec` per machine.
pub fn mrec_server_decoded(per_machine: &[Vec<DecodedSub>], params: &MreParams) -> MreOutput {
    assert!(!per_machine.is_empty(), "server needs at least one signal");
    let d = params.d;

    // Modal anchor over all sub-signals; ties break to the smallest index.
    let mut tallies: Vec<(&[i64], u64)> = Vec::new();
    for subs in per_machine {
        for sub in subs {
            match tallies.iter_mut().find(|(s, _)| *s == sub.point.s.as_slice()) {
                Some((_, c)) => *c += 1,
                None => tallies.push((&sub.point.s, 1)),
            }
        }
    }
    let max_count = tallies.iter().map(|&(_, c)| c).max().unwrap_or(0);
    let s_star: Vec<i64> = tallies
        .iter()
        .filter(|&&(_, c)| c == max_count)
        .map(|&(s, _)| s)
        .min()
        .expect("nonempty tallies")
        .to_vec();

    // Redundancy elimination: keep each machine's first sub-signal per
    // distinct grid point, restricted to the winning anchor.
    let mut sums: Vec<Vec<f64>> = (0..=params.t)
        .map(|l| vec![0.0; params.points_at_level(l) as usize * d])
        .collect();
    let mut counts: Vec<Vec<u32>> =
        (0..=params.t).map(|l| vec![0; params.points_at_level(l) as usize]).collect();
    let mut seen: HashSet<(u32, usize)> = HashSet::new();
    for subs in per_machine {
        seen.clear();
        for sub in subs {
            if sub.point.s != s_star {
                continue;
            }
            let idx = cell_to_index(&sub.point.cell, sub.point.level);
            if !seen.insert((sub.point.level, idx)) {
                continue;
            }
            let lvl = sub.point.level as usize;
            counts[lvl][idx] += 1;
            for j in 0..d {
                sums[lvl][idx * d + j] += sub.delta[j];
            }
        }
    }

    // Reconstruct the field level by level; empty points inherit their
    // parent's estimate and are flagged together with their descendants.
    let fallback = counts[0][0] == 0;
    let mut estimates: Vec<Vec<f64>> = Vec::with_capacity(params.t as usize + 1);
    let mut orphaned: Vec<Vec<bool>> = Vec::with_capacity(params.t as usize + 1);
    {
        let mut lvl0 = vec![0.0; d];
        if !fallback {
            for j in 0..d {
                lvl0[j] = sums[0][j] / f64::from(counts[0][0]);
            }
        }
        estimates.push(lvl0);
        orphaned.push(vec![fallback]);
    }
    for l in 1..=params.t as usize {
        let points = params.points_at_level(l as u32) as usize;
        let mut est = vec![0.0; points * d];
        let mut orph = vec![false; points];
        for idx in 0..points {
            let parent_idx = parent_index(idx, l as u32, d);
            let inherited_orphan = orphaned[l - 1][parent_idx];
            let np = counts[l][idx];
            for j in 0..d {
                let parent_val = estimates[l - 1][parent_idx * d + j];
                est[idx * d + j] = if np == 0 {
                    parent_val
                } else {
                    parent_val + sums[l][idx * d + j] / f64::from(np)
                };
            }
            orph[idx] = inherited_orphan || np == 0;
        }
        estimates.push(est);
        orphaned.push(orph);
    }

    let field = GradientField { d, t: params.t, estimates, counts, orphaned };

    // Output: the finest-level point with the smallest gradient norm
    // (first minimum in lexicographic cell order), projected onto the cube.
    let theta_hat = if fallback {
        crate::grid::lattice::lattice_position(&s_star, params)
    } else {
        let t = params.t;
        let points = params.points_at_level(t) as usize;
        let mut best_idx = 0usize;
        let mut best_norm = f64::INFINITY;
        for idx in 0..points {
            let est = &field.estimates[t as usize][idx * d..(idx + 1) * d];
            let n = norm2(est);
            if n < best_norm {
                best_norm = n;
                best_idx = idx;
            }
        }
        let cell = crate::grid::lattice::index_to_cell(best_idx, t, d);
        let point = GridPoint { s: s_star.clone(), level: t, cell };
        params.cube.project(&point_position(&point, params))
    };

    MreOutput { theta_hat, field, s_star, fallback }
}

/// Flat index of the parent of flat index `idx` one level up.
fn parent_index(idx: usize, level: u32, d: usize) -> usize {
    let cell = crate::grid::lattice::index_to_cell(idx, level, d);
    let parent_cell: Vec<u32> = cell.iter().map(|&c| c / 2).collect();
    cell_to_index(&parent_cell, level - 1)
}

/// Brute-force argmin of an externally supplied gradient-norm function
/// over the finest grid (test oracle for the server's selection rule).
pub fn brute_force_argmin(
    params: &MreParams,
    s: &[i64],
    grad_norm_at: impl Fn(&GridPoint) -> f64,
) -> GridPoint {
    let t = params.t;
    let points = params.points_at_level(t) as usize;
    let mut best: Option<(f64, GridPoint)> = None;
    for idx in 0..points {
        let cell = crate::grid::lattice::index_to_cell(idx, t, params.d);
        let gp = GridPoint { s: s.to_vec(), level: t, cell };
        let n = grad_norm_at(&gp);
        if best.as_ref().map_or(true, |(b, _)| n < *b) {
            best = Some((n, gp));
        }
    }
    best.unwrap().1
}
