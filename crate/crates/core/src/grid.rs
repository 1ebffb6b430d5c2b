//! Sampled functions on a power-of-two integer grid and the tolerance
//! profiles used to accept piecewise segments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid for {n} qubits needs {expected} values, got {got}")]
    WrongLength { n: u32, expected: usize, got: usize },
    #[error("grid value at index {0} is not finite")]
    NonFinite(usize),
    #[error("qubit count {0} exceeds the supported maximum of {max}", max = GridFunction::MAX_QUBITS)]
    TooManyQubits(u32),
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error("tolerance zones must be non-empty, ordered and disjoint")]
    MalformedZones,
    #[error("tolerance zones [{lo}, {hi}] do not cover the grid [0, {max}]")]
    ZoneCoverage { lo: usize, hi: usize, max: usize },
}

/// A real function sampled at every point of the integer grid `[0, 2^n - 1]`.
///
/// Values are dimensionless; callers pre-scale as needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    n: u32,
    values: Vec<f64>,
}

impl GridFunction {
    /// Largest domain register this crate will segment (2^24 samples).
    pub const MAX_QUBITS: u32 = 24;

    pub fn new(n: u32, values: Vec<f64>) -> Result<Self, GridError> {
        if n > Self::MAX_QUBITS {
            return Err(GridError::TooManyQubits(n));
        }
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(GridError::WrongLength { n, expected, got: values.len() });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(bad));
        }
        Ok(Self { n, values })
    }

    /// Samples `f` at every grid point of an `n`-qubit domain.
    pub fn from_fn(n: u32, f: impl Fn(usize) -> f64) -> Result<Self, GridError> {
        if n > Self::MAX_QUBITS {
            return Err(GridError::TooManyQubits(n));
        }
        Self::new(n, (0..1usize << n).map(f).collect())
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a grid always has at least one point
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }
}

/// One tolerance zone: every grid point in `lo..=hi` may deviate by `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub lo: usize,
    pub hi: usize,
    pub delta: f64,
}

/// Maximum allowed deviation per grid point, either uniform or zoned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ToleranceProfile {
    Uniform(f64),
    Zoned(Vec<Zone>),
}

impl ToleranceProfile {
    pub fn uniform(delta: f64) -> Result<Self, GridError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(GridError::NonPositiveTolerance(delta));
        }
        Ok(Self::Uniform(delta))
    }

    /// Zones must be sorted, contiguous and all-positive; coverage of a
    /// concrete grid is checked separately by [`Self::check_covers`].
    pub fn zoned(zones: Vec<Zone>) -> Result<Self, GridError> {
        if zones.is_empty() {
            return Err(GridError::MalformedZones);
        }
        for zone in &zones {
            if !(zone.delta > 0.0) || !zone.delta.is_finite() {
                return Err(GridError::NonPositiveTolerance(zone.delta));
            }
            if zone.lo > zone.hi {
                return Err(GridError::MalformedZones);
            }
        }
        for pair in zones.windows(2) {
            if pair[1].lo != pair[0].hi + 1 {
                return Err(GridError::MalformedZones);
            }
        }
        Ok(Self::Zoned(zones))
    }

    /// Checks that the profile assigns a tolerance to every point of an
    /// `n`-qubit grid.
    pub fn check_covers(&self, n: u32) -> Result<(), GridError> {
        let max = (1usize << n) - 1;
        match self {
            Self::Uniform(_) => Ok(()),
            Self::Zoned(zones) => {
                let lo = zones.first().map_or(0, |z| z.lo);
                let hi = zones.last().map_or(0, |z| z.hi);
                if lo != 0 || hi != max {
                    return Err(GridError::ZoneCoverage { lo, hi, max });
                }
                Ok(())
            }
        }
    }

    /// Tolerance applicable at grid point `x`.
    pub fn delta_at(&self, x: usize) -> f64 {
        match self {
            Self::Uniform(delta) => *delta,
            Self::Zoned(zones) => {
                let i = zones.partition_point(|z| z.hi < x);
                zones[i.min(zones.len() - 1)].delta
            }
        }
    }

    /// Smallest tolerance anywhere on the grid.
    pub fn strictest(&self) -> f64 {
        match self {
            Self::Uniform(delta) => *delta,
            Self::Zoned(zones) => zones.iter().map(|z| z.delta).fold(f64::INFINITY, f64::min),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_length_must_match_qubit_count() {
        let err = GridFunction::new(2, vec![0.0; 3]).unwrap_err();
        assert_eq!(err, GridError::WrongLength { n: 2, expected: 4, got: 3 });
        assert!(GridFunction::new(2, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn grid_rejects_non_finite_values() {
        let err = GridFunction::new(1, vec![0.0, f64::NAN]).unwrap_err();
        assert_eq!(err, GridError::NonFinite(1));
    }

    #[test]
    fn zones_must_be_contiguous() {
        let zones = vec![
            Zone { lo: 0, hi: 3, delta: 0.1 },
            Zone { lo: 5, hi: 7, delta: 0.2 },
        ];
        assert_eq!(ToleranceProfile::zoned(zones).unwrap_err(), GridError::MalformedZones);
    }

    #[test]
    fn zone_lookup_selects_the_containing_zone() {
        let profile = ToleranceProfile::zoned(vec![
            Zone { lo: 0, hi: 3, delta: 0.1 },
            Zone { lo: 4, hi: 7, delta: 0.01 },
        ])
        .unwrap();
        profile.check_covers(3).unwrap();
        assert_eq!(profile.delta_at(0), 0.1);
        assert_eq!(profile.delta_at(3), 0.1);
        assert_eq!(profile.delta_at(4), 0.01);
        assert_eq!(profile.delta_at(7), 0.01);
        assert_eq!(profile.strictest(), 0.01);
    }

    #[test]
    fn zone_coverage_is_checked_against_the_grid() {
        let profile =
            ToleranceProfile::zoned(vec![Zone { lo: 0, hi: 6, delta: 0.1 }]).unwrap();
        assert!(profile.check_covers(3).is_err());
        let full = ToleranceProfile::zoned(vec![Zone { lo: 0, hi: 7, delta: 0.1 }]).unwrap();
        assert!(full.check_covers(3).is_ok());
    }
}
