//! The estimators, each split into a machine-side map (dataset to signal)
//! and a server-side reduce (signals to a point estimate).

pub mod avgm;
pub mod boost;
pub mod centralized;
pub mod constbit;
pub mod mrec;

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::grid::bits::BitString;

/// The bit payload one machine transmits.
#[derive(Clone, Debug)]
pub struct EncodedSignal {
    pub machine_id: u64,
    pub bits: BitString,
}

impl EncodedSignal {
    pub fn len_bits(&self) -> u64 {
        self.bits.len_bits()
    }
}

/// Registry of estimator ids for the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    MreC,
    Avgm,
    ConstBit,
    Centralized,
}

impl EstimatorKind {
    pub fn id(&self) -> &'static str {
        match self {
            EstimatorKind::MreC => "mre-c",
            EstimatorKind::Avgm => "avgm",
            EstimatorKind::ConstBit => "const-bit",
            EstimatorKind::Centralized => "centralized",
        }
    }

    pub fn all() -> [EstimatorKind; 4] {
        [
            EstimatorKind::MreC,
            EstimatorKind::Avgm,
            EstimatorKind::ConstBit,
            EstimatorKind::Centralized,
        ]
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "mre-c" => Ok(EstimatorKind::MreC),
            "avgm" => Ok(EstimatorKind::Avgm),
            "const-bit" => Ok(EstimatorKind::ConstBit),
            "centralized" => Ok(EstimatorKind::Centralized),
            other => Err(Error::UnknownEstimator(other.to_string())),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for kind in EstimatorKind::all() {
            assert_eq!(kind.id().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert!("bogus".parse::<EstimatorKind>().is_err());
    }
}
