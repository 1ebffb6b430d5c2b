//! Recursive-bisection segmentation of a grid function into prefix-aligned
//! pieces.
//!
//! An interval is kept when its fit respects the per-point tolerance;
//! otherwise it is halved and both halves are segmented recursively. Because
//! every split is at the midpoint of a power-of-two interval, all points of a
//! segment share a common pattern of most-significant bits -- the segment's
//! `prefix` -- which later becomes a multi-controlled flag gate.
//!
//! Phase mode fits `A + Bx` directly. Amplitude mode fits the same line to
//! the arccos of the samples and checks the tolerance on `cos(A + Bx)`, so a
//! spec's coefficients always live in angle space.

use crate::fit::{minimax_linear_fit, FitError, LinearFit};
use crate::grid::{GridError, GridFunction, ToleranceProfile};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("amplitude mode needs samples in [-1, 1]; value {value} at index {index}")]
    AmplitudeRange { index: usize, value: f64 },
    #[error("tolerance sweep must be sorted in descending order")]
    UnsortedSweep,
    #[error("piecewise spec is malformed: {0}")]
    MalformedSpec(String),
}

/// Which family the segments approximate: a bare line in the exponent
/// (phase) or the cosine of a line (amplitude).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    Phase,
    Amplitude,
}

/// One piece of the approximation, covering the grid interval `lo..=hi`
/// whose points share `prefix` as their most-significant bits.
///
/// The approximation on the interval is `alpha * x + beta` (in angle space
/// for amplitude mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: usize,
    pub hi: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(with = "prefix_string")]
    pub prefix: Vec<bool>,
    pub max_dev: f64,
}

impl Segment {
    /// Angle-space value `alpha * x + beta` at grid point `x`.
    pub fn eval(&self, x: usize) -> f64 {
        self.alpha * x as f64 + self.beta
    }
}

/// Serialize the prefix as a readable MSB-first bit string such as "101".
mod prefix_string {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], ser: S) -> Result<S::Ok, S::Error> {
        let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        ser.serialize_str(&s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(de)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(de::Error::custom(format!("invalid prefix bit '{other}'"))),
            })
            .collect()
    }
}

/// The full piecewise approximation: contiguous segments covering
/// `[0, 2^n - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSpec {
    pub n: u32,
    pub mode: FitMode,
    pub segments: Vec<Segment>,
}

impl PiecewiseSpec {
    /// Number of sections `S`.
    pub fn section_count(&self) -> usize {
        self.segments.len()
    }

    /// Flag width `l = ceil(log2 S)`.
    pub fn flag_controls(&self) -> u32 {
        ceil_log2(self.section_count() as u64)
    }

    /// Register midpoint `phi = (2^n - 1) / 2`.
    pub fn phi(&self) -> f64 {
        ((1u64 << self.n) - 1) as f64 / 2.0
    }

    /// Rotation offset `gamma_i = alpha_i * phi + beta_i` for section `i`.
    pub fn gamma(&self, i: usize) -> f64 {
        self.segments[i].alpha * self.phi() + self.segments[i].beta
    }

    /// Index of the segment containing grid point `x`.
    pub fn section_of(&self, x: usize) -> usize {
        self.segments.partition_point(|seg| seg.hi < x)
    }

    /// Angle-space approximation value at grid point `x`.
    pub fn eval(&self, x: usize) -> f64 {
        self.segments[self.section_of(x)].eval(x)
    }

    /// Re-checks the structural invariants: contiguous coverage of the grid
    /// and prefix/interval consistency for every segment.
    pub fn validate(&self) -> Result<(), SegmentError> {
        let size = 1usize << self.n;
        if self.segments.is_empty() {
            return Err(SegmentError::MalformedSpec("no segments".into()));
        }
        let mut next = 0usize;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.lo != next || seg.hi < seg.lo || seg.hi >= size {
                return Err(SegmentError::MalformedSpec(format!(
                    "segment {i} covers [{}, {}], expected to start at {next}",
                    seg.lo, seg.hi
                )));
            }
            if seg.prefix.len() > self.n as usize {
                return Err(SegmentError::MalformedSpec(format!(
                    "segment {i} prefix longer than the register"
                )));
            }
            let (lo, hi) = prefix_interval(self.n, &seg.prefix);
            if (lo, hi) != (seg.lo, seg.hi) {
                return Err(SegmentError::MalformedSpec(format!(
                    "segment {i} prefix selects [{lo}, {hi}] but claims [{}, {}]",
                    seg.lo, seg.hi
                )));
            }
            next = seg.hi + 1;
        }
        if next != size {
            return Err(SegmentError::MalformedSpec(format!(
                "segments end at {} but the grid has {size} points",
                next - 1
            )));
        }
        Ok(())
    }
}

/// Grid interval selected by an MSB-first prefix on an `n`-qubit register.
pub fn prefix_interval(n: u32, prefix: &[bool]) -> (usize, usize) {
    let mut lo = 0usize;
    for (k, &bit) in prefix.iter().enumerate() {
        if bit {
            lo |= 1 << (n as usize - 1 - k);
        }
    }
    let span = 1usize << (n as usize - prefix.len());
    (lo, lo + span - 1)
}

pub(crate) fn ceil_log2(v: u64) -> u32 {
    debug_assert!(v >= 1);
    64 - (v - 1).leading_zeros()
}

/// Segments `f` by recursive bisection so that every grid point deviates
/// from its segment's fit by at most the applicable tolerance.
pub fn segment_function(
    f: &GridFunction,
    tol: &ToleranceProfile,
    mode: FitMode,
) -> Result<PiecewiseSpec, SegmentError> {
    tol.check_covers(f.qubits())?;

    // Amplitude fits happen in angle space.
    let samples: Vec<f64> = match mode {
        FitMode::Phase => f.values().to_vec(),
        FitMode::Amplitude => {
            if let Some(index) = f.values().iter().position(|v| v.abs() > 1.0) {
                return Err(SegmentError::AmplitudeRange { index, value: f.value(index) });
            }
            f.values().iter().map(|v| v.clamp(-1.0, 1.0).acos()).collect()
        }
    };

    let mut segments = Vec::new();
    bisect(f, &samples, tol, mode, 0, f.len() - 1, Vec::new(), &mut segments)?;
    let spec = PiecewiseSpec { n: f.qubits(), mode, segments };
    debug_assert!(spec.validate().is_ok());
    Ok(spec)
}

fn bisect(
    f: &GridFunction,
    samples: &[f64],
    tol: &ToleranceProfile,
    mode: FitMode,
    lo: usize,
    hi: usize,
    prefix: Vec<bool>,
    out: &mut Vec<Segment>,
) -> Result<(), SegmentError> {
    let points: Vec<(i64, f64)> = (lo..=hi).map(|x| (x as i64, samples[x])).collect();
    let fit = minimax_linear_fit(&points)?;

    if let Some(max_dev) = accepts(f, &fit, mode, tol, lo, hi) {
        out.push(Segment {
            lo,
            hi,
            alpha: fit.slope,
            beta: fit.intercept,
            prefix,
            max_dev,
        });
        return Ok(());
    }

    debug_assert!(hi > lo, "a single grid point always fits exactly");
    let half = (hi - lo + 1) / 2;
    let mut left = prefix.clone();
    left.push(false);
    let mut right = prefix;
    right.push(true);
    bisect(f, samples, tol, mode, lo, lo + half - 1, left, out)?;
    bisect(f, samples, tol, mode, lo + half, hi, right, out)
}

/// Per-point tolerance check in function space. Returns the achieved
/// deviation when the interval is acceptable.
fn accepts(
    f: &GridFunction,
    fit: &LinearFit,
    mode: FitMode,
    tol: &ToleranceProfile,
    lo: usize,
    hi: usize,
) -> Option<f64> {
    let mut max_dev = 0.0f64;
    for x in lo..=hi {
        let approx = match mode {
            FitMode::Phase => fit.eval(x as f64),
            FitMode::Amplitude => fit.eval(x as f64).cos(),
        };
        let dev = (f.value(x) - approx).abs();
        if dev > tol.delta_at(x) {
            return None;
        }
        max_dev = max_dev.max(dev);
    }
    Some(max_dev)
}

/// Segment counts across a descending list of tolerances.
pub fn sweep_tolerance(
    f: &GridFunction,
    tolerances: &[f64],
    mode: FitMode,
) -> Result<Vec<(f64, usize)>, SegmentError> {
    if tolerances.windows(2).any(|w| w[1] > w[0]) {
        return Err(SegmentError::UnsortedSweep);
    }
    tolerances
        .iter()
        .map(|&delta| {
            let tol = ToleranceProfile::uniform(delta)?;
            let spec = segment_function(f, &tol, mode)?;
            Ok((delta, spec.section_count()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Zone;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth_function(n: u32, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (
            rng.gen_range(0.2..1.5),
            rng.gen_range(1.0..7.0),
            rng.gen_range(-1.0..1.0),
        );
        let size = (1usize << n) as f64;
        GridFunction::from_fn(n, |x| {
            let u = x as f64 / size;
            a * (b * u).sin() + c * u * u
        })
        .unwrap()
    }

    #[test]
    fn ceil_log2_small_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(10), 4);
        assert_eq!(ceil_log2(36), 6);
        assert_eq!(ceil_log2(64), 6);
    }

    #[test]
    fn constant_function_needs_one_segment() {
        let f = GridFunction::from_fn(5, |_| 0.5).unwrap();
        let tol = ToleranceProfile::uniform(1e-9).unwrap();
        let spec = segment_function(&f, &tol, FitMode::Phase).unwrap();
        assert_eq!(spec.section_count(), 1);
        let seg = &spec.segments[0];
        assert!(seg.alpha.abs() < 1e-12);
        assert!((seg.beta - 0.5).abs() < 1e-12);
        assert!(seg.prefix.is_empty());
    }

    #[test]
    fn coverage_prefix_and_tolerance_hold_on_random_functions() {
        for seed in 0..8 {
            let f = smooth_function(6, seed);
            let tol = ToleranceProfile::uniform(5e-3).unwrap();
            let spec = segment_function(&f, &tol, FitMode::Phase).unwrap();
            spec.validate().unwrap();
            for x in 0..f.len() {
                let seg = &spec.segments[spec.section_of(x)];
                assert!(seg.lo <= x && x <= seg.hi);
                let (lo, hi) = prefix_interval(6, &seg.prefix);
                assert!(lo <= x && x <= hi, "prefix must contain x");
                assert!((f.value(x) - spec.eval(x)).abs() <= 5e-3 + 1e-12);
            }
        }
    }

    #[test]
    fn halving_the_tolerance_never_reduces_the_count() {
        let f = smooth_function(7, 3);
        let mut delta = 0.1;
        let mut last = 0usize;
        for _ in 0..6 {
            let tol = ToleranceProfile::uniform(delta).unwrap();
            let s = segment_function(&f, &tol, FitMode::Phase).unwrap().section_count();
            assert!(s >= last, "S dropped from {last} to {s} at delta {delta}");
            last = s;
            delta /= 2.0;
        }
    }

    #[test]
    fn sweep_requires_descending_tolerances_and_is_monotone() {
        let f = smooth_function(6, 11);
        assert_eq!(
            sweep_tolerance(&f, &[1e-3, 1e-2], FitMode::Phase).unwrap_err(),
            SegmentError::UnsortedSweep
        );
        let sweep = sweep_tolerance(&f, &[1e-1, 1e-2, 1e-3], FitMode::Phase).unwrap();
        assert!(sweep.windows(2).all(|w| w[0].1 <= w[1].1));

        let constant = GridFunction::from_fn(4, |_| 0.25).unwrap();
        let all_one = sweep_tolerance(&constant, &[1e-2, 1e-6], FitMode::Phase).unwrap();
        assert!(all_one.iter().all(|&(_, s)| s == 1));
    }

    #[test]
    fn zoned_tolerance_never_needs_more_segments_than_strictest_uniform() {
        let f = smooth_function(7, 21);
        let strict = ToleranceProfile::uniform(1e-3).unwrap();
        let zoned = ToleranceProfile::zoned(vec![
            Zone { lo: 0, hi: 31, delta: 5e-2 },
            Zone { lo: 32, hi: 95, delta: 1e-3 },
            Zone { lo: 96, hi: 127, delta: 5e-2 },
        ])
        .unwrap();
        let s_uniform = segment_function(&f, &strict, FitMode::Phase).unwrap().section_count();
        let s_zoned = segment_function(&f, &zoned, FitMode::Phase).unwrap().section_count();
        assert!(s_zoned <= s_uniform, "zoned {s_zoned} vs uniform {s_uniform}");
    }

    #[test]
    fn zoned_acceptance_is_per_point() {
        // A straight ramp with a sharp bump inside the strict zone: the
        // bumped interval must split even though the loose zone would pass.
        let f = GridFunction::from_fn(4, |x| {
            if x == 12 {
                1.0
            } else {
                x as f64 / 16.0
            }
        })
        .unwrap();
        let zoned = ToleranceProfile::zoned(vec![
            Zone { lo: 0, hi: 7, delta: 1e-6 },
            Zone { lo: 8, hi: 15, delta: 1e-2 },
        ])
        .unwrap();
        let spec = segment_function(&f, &zoned, FitMode::Phase).unwrap();
        for x in 0..16 {
            let dev = (f.value(x) - spec.eval(x)).abs();
            assert!(dev <= zoned.delta_at(x) + 1e-12, "point {x} deviates {dev}");
        }
    }

    #[test]
    fn amplitude_mode_checks_tolerance_in_function_space() {
        let f = GridFunction::from_fn(6, |x| (0.03 * x as f64).cos() * 0.9).unwrap();
        let tol = ToleranceProfile::uniform(1e-3).unwrap();
        let spec = segment_function(&f, &tol, FitMode::Amplitude).unwrap();
        for x in 0..f.len() {
            let approx = spec.eval(x).cos();
            assert!((f.value(x) - approx).abs() <= 1e-3 + 1e-12);
        }
    }

    #[test]
    fn amplitude_mode_rejects_out_of_range_samples() {
        let f = GridFunction::from_fn(3, |x| x as f64).unwrap();
        let tol = ToleranceProfile::uniform(1e-2).unwrap();
        let err = segment_function(&f, &tol, FitMode::Amplitude).unwrap_err();
        assert!(matches!(err, SegmentError::AmplitudeRange { .. }));
    }

    #[test]
    fn identical_inputs_yield_identical_json() {
        let f = smooth_function(6, 5);
        let tol = ToleranceProfile::uniform(1e-3).unwrap();
        let a = segment_function(&f, &tol, FitMode::Phase).unwrap();
        let b = segment_function(&f, &tol, FitMode::Phase).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn spec_json_round_trips() {
        let f = smooth_function(5, 9);
        let tol = ToleranceProfile::uniform(1e-2).unwrap();
        let spec = segment_function(&f, &tol, FitMode::Phase).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: PiecewiseSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn gamma_matches_its_definition() {
        let f = smooth_function(5, 13);
        let tol = ToleranceProfile::uniform(1e-2).unwrap();
        let spec = segment_function(&f, &tol, FitMode::Phase).unwrap();
        let phi = ((1u64 << 5) - 1) as f64 / 2.0;
        for (i, seg) in spec.segments.iter().enumerate() {
            assert_eq!(spec.gamma(i), seg.alpha * phi + seg.beta);
        }
    }
}
