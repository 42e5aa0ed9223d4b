//! Uniform mid-rise quantization of gradient differences.
//!
//! Level `l` quantizes each entry over the box `[-R_l, R_l]` with
//! `2^delta_bits[l]` codes; decoded values are cell midpoints, so the
//! per-entry error is at most half a step and the vector error stays
//! within `2*delta*log2(mn)/sqrt(n)`.

use crate::grid::MreParams;

/// One quantized gradient difference: the level fixes the code widths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedDelta {
    pub level: u32,
    pub codes: Vec<u32>,
}

/// Quantize `v` at the given level. Returns the codes and whether any
/// entry lay outside the level's box and was clamped.
pub fn quantize_delta(v: &[f64], level: u32, params: &MreParams) -> (QuantizedDelta, bool) {
    debug_assert_eq!(v.len(), params.d);
    debug_assert!(level <= params.t);
    let range = params.delta_range[level as usize];
    let step = params.delta_step[level as usize];
    let max_code = (1u64 << params.delta_bits[level as usize]) - 1;
    let mut clamped = false;
    let codes = v
        .iter()
        .map(|&x| {
            if x.abs() > range {
                clamped = true;
            }
            let raw = ((x + range) / step).floor();
            (raw.max(0.0) as u64).min(max_code) as u32
        })
        .collect();
    (QuantizedDelta { level, codes }, clamped)
}

/// Decode back to the midpoint of each code cell.
pub fn dequantize_delta(q: &QuantizedDelta, params: &MreParams) -> Vec<f64> {
    let range = params.delta_range[q.level as usize];
    let step = params.delta_step[q.level as usize];
    q.codes.iter().map(|&c| -range + (c as f64 + 0.5) * step).collect()
}
