//! The sub-signal wire format.
//!
//! Each sub-signal occupies exactly `sub_signal_bits` bits:
//!
//! ```text
//! [ s-part: d * s_bits ][ level: level_bits ][ cell: d * level ]
//! [ delta codes: d * delta_bits[level] ][ zero padding ]
//! ```
//!
//! All fields are MSB-first; s-indices are stored offset by `s_index_min`.
//! Decoding rejects wrong lengths, out-of-range fields, and nonzero padding.

use crate::error::{Error, Result};
use crate::grid::bits::{BitReader, BitString, BitWriter};
use crate::grid::lattice::GridPoint;
use crate::grid::quantizer::QuantizedDelta;
use crate::grid::MreParams;

/// One `(s, p, Δ)` triple. The anchor index lives inside `point`; all
/// sub-signals of a machine share it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubSignal {
    pub point: GridPoint,
    pub delta: QuantizedDelta,
}

impl SubSignal {
    pub fn s(&self) -> &[i64] {
        &self.point.s
    }
}

fn write_subsignal(w: &mut BitWriter, sub: &SubSignal, params: &MreParams) {
    let start = w.len_bits();
    for &si in &sub.point.s {
        debug_assert!(si >= params.s_index_min && si <= params.s_index_max);
        w.write((si - params.s_index_min) as u64, params.s_bits);
    }
    w.write(u64::from(sub.point.level), params.level_bits);
    for &c in &sub.point.cell {
        w.write(u64::from(c), sub.point.level);
    }
    let dbits = params.delta_bits[sub.point.level as usize];
    for &code in &sub.delta.codes {
        w.write(u64::from(code), dbits);
    }
    w.pad_to(start + params.sub_signal_bits);
}

fn read_subsignal(r: &mut BitReader, params: &MreParams) -> Result<SubSignal> {
    let start = r.position();
    let mut s = Vec::with_capacity(params.d);
    for _ in 0..params.d {
        let code = r.read(params.s_bits)? as i64;
        let idx = code + params.s_index_min;
        if idx > params.s_index_max {
            return Err(Error::MalformedSignal(format!("s index code {code} out of range")));
        }
        s.push(idx);
    }
    let level = r.read(params.level_bits)? as u32;
    if level > params.t {
        return Err(Error::MalformedSignal(format!("level {level} > t = {}", params.t)));
    }
    let mut cell = Vec::with_capacity(params.d);
    for _ in 0..params.d {
        cell.push(r.read(level)? as u32);
    }
    let dbits = params.delta_bits[level as usize];
    let mut codes = Vec::with_capacity(params.d);
    for _ in 0..params.d {
        codes.push(r.read(dbits)? as u32);
    }
    let consumed = r.position() - start;
    r.expect_zero_padding(params.sub_signal_bits - consumed)?;
    Ok(SubSignal {
        point: GridPoint { s, level, cell },
        delta: QuantizedDelta { level, codes },
    })
}

/// Serialize one sub-signal to its fixed width.
pub fn encode_subsignal(sub: &SubSignal, params: &MreParams) -> BitString {
    let mut w = BitWriter::new();
    write_subsignal(&mut w, sub, params);
    w.finish()
}

/// Parse one fixed-width sub-signal.
pub fn decode_subsignal(bits: &BitString, params: &MreParams) -> Result<SubSignal> {
    if bits.len_bits() != params.sub_signal_bits {
        return Err(Error::SignalLength {
            expected: params.sub_signal_bits,
            actual: bits.len_bits(),
        });
    }
    let mut r = BitReader::new(bits);
    read_subsignal(&mut r, params)
}

/// Concatenate a machine's sub-signals into its full payload.
pub fn encode_signal(subs: &[SubSignal], params: &MreParams) -> BitString {
    debug_assert_eq!(subs.len() as u64, params.sub_signals_per_machine);
    let mut w = BitWriter::new();
    for sub in subs {
        write_subsignal(&mut w, sub, params);
    }
    w.finish()
}

/// Split a machine payload back into sub-signals.
pub fn decode_signal(bits: &BitString, params: &MreParams) -> Result<Vec<SubSignal>> {
    let expected = params.machine_payload_bits();
    if bits.len_bits() != expected {
        return Err(Error::SignalLength { expected, actual: bits.len_bits() });
    }
    let mut r = BitReader::new(bits);
    (0..params.sub_signals_per_machine)
        .map(|_| read_subsignal(&mut r, params))
        .collect()
}
