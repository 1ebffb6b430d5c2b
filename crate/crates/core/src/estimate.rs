//! Closed-form fault-tolerant cost models: T-counts and measurement depths
//! for the four rotation strategies, break-even round counts, expected
//! repeat-until-success depth, and the QROM linear-interpolation comparison.
//!
//! Conventions baked into every formula here: `rot_T` and all intermediate
//! terms stay in full precision; only the final per-round T-count and depth
//! are rounded, half away from zero. Per-round values for round-dependent
//! totals are `total(r) / r`, i.e. the first-round overhead is amortised.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    #[error("per-rotation accuracy must lie in (0, 1), got {0}")]
    BadAccuracy(f64),
    #[error("parameters must be positive: {0}")]
    BadParameter(&'static str),
}

/// T-count of synthesising one arbitrary rotation to accuracy `eps` with the
/// fallback protocol: `1.03 * log2(1/eps) + 5.75`, unrounded.
pub fn rot_t(eps: f64) -> Result<f64, EstimateError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(EstimateError::BadAccuracy(eps));
    }
    Ok(1.03 * (1.0 / eps).log2() + 5.75)
}

/// Inputs to the cost expressions for one oracle configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Number of sections `S`.
    pub sections: u64,
    /// Domain register width `n`.
    pub register_qubits: u64,
    /// Number of oracle repetitions `r`.
    pub rounds: u64,
    /// Total circuit accuracy budget for rotation synthesis.
    pub eps_circ: f64,
}

impl CostParams {
    pub fn new(
        sections: u64,
        register_qubits: u64,
        rounds: u64,
        eps_circ: f64,
    ) -> Result<Self, EstimateError> {
        if sections == 0 {
            return Err(EstimateError::BadParameter("sections"));
        }
        if register_qubits == 0 {
            return Err(EstimateError::BadParameter("register_qubits"));
        }
        if rounds == 0 {
            return Err(EstimateError::BadParameter("rounds"));
        }
        if !(eps_circ > 0.0 && eps_circ < 1.0) {
            return Err(EstimateError::BadAccuracy(eps_circ));
        }
        Ok(Self { sections, register_qubits, rounds, eps_circ })
    }

    /// Flag width `l = ceil(log2 S)`.
    pub fn flag_controls(&self) -> u64 {
        crate::segment::ceil_log2(self.sections) as u64
    }

    /// Rotation count `k = (S+1)(n+1)` used to split the error budget.
    pub fn rotation_count(&self) -> u64 {
        (self.sections + 1) * (self.register_qubits + 1)
    }

    /// Error budget per rotation, `eps_circ / k`.
    pub fn eps_per_rotation(&self) -> f64 {
        self.eps_circ / self.rotation_count() as f64
    }

    /// `rot_T` at this parameter set's per-rotation accuracy.
    pub fn rot_t(&self) -> Result<f64, EstimateError> {
        rot_t(self.eps_per_rotation())
    }
}

/// The four rotation strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GateSynthesis,
    SynthesisInjection,
    InCircuitTowers,
    IndependentTowers,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::GateSynthesis,
        Method::SynthesisInjection,
        Method::InCircuitTowers,
        Method::IndependentTowers,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::GateSynthesis => "gate synthesis",
            Method::SynthesisInjection => "gate synthesis with injection",
            Method::InCircuitTowers => "in-circuit towers",
            Method::IndependentTowers => "independent towers",
        }
    }
}

/// Evaluated cost of one method at one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub method: Method,
    /// Total T-count over all `rounds`, unrounded.
    pub t_count_total: f64,
    /// `t_count_total / rounds`, rounded half away from zero.
    pub t_count_per_round: i64,
    /// Measurement depth per round, rounded half away from zero.
    pub meas_depth_per_round: i64,
    /// Audit trail: the unrounded per-round values and the `rot_T` used.
    pub t_count_per_round_raw: f64,
    pub meas_depth_raw: f64,
    pub rot_t: f64,
}

/// Expected measurement depth of `m` parallel repeat-until-success
/// rotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RusDepthResult {
    pub parallel_rotations: u64,
    /// Truncated series value of `E[D_m]`.
    pub exact: f64,
    /// The closed fit `log2(2.5 m + 1.5)`, unceiled.
    pub fitted: f64,
    /// Upper bound on the discarded series tail.
    pub truncation_bound: f64,
}

/// Mean and standard error of a Monte Carlo depth estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Break-even analysis outcome: the smallest round count from which a tower
/// method beats plain gate synthesis on T-count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BreakEven {
    Rounds(u64),
    Never,
}

fn flag_t_term(sections: u64, rounds: u64, l: u64) -> f64 {
    (8 * sections * rounds * l.saturating_sub(1)) as f64
}

/// Total T-count over `r` rounds, unrounded.
pub fn t_count_total(method: Method, p: &CostParams) -> Result<f64, EstimateError> {
    let rot = p.rot_t()?;
    let s = p.sections as f64;
    let n = p.register_qubits as f64;
    let r = p.rounds as f64;
    let k = p.rotation_count() as f64;
    let flags = flag_t_term(p.sections, p.rounds, p.flag_controls());
    Ok(match method {
        Method::GateSynthesis => r * k * rot + flags,
        Method::SynthesisInjection => 2.0 * r * k * rot + flags,
        Method::InCircuitTowers => {
            // First round also synthesises the tower catalysts; every round
            // pays one seed, 4T per AND layer, and a synthesised offset
            // rotation.
            (s + 1.0) * ((rot * (n + 1.0) + 4.0 * n) + (r - 1.0) * (rot + 4.0 * n) + r * rot)
                + flags
        }
        Method::IndependentTowers => {
            let big_towers = (rot * (2.0 * n + 1.0) + 8.0 * n) + (r - 1.0) * (rot + 8.0 * n);
            let offset_towers = (2.0 * rot + 4.0) + (r - 1.0) * (rot + 4.0);
            (s + 1.0) * (big_towers + offset_towers) + flags
        }
    })
}

/// The independent-towers total written as the single combined expression;
/// equal to [`t_count_total`] for that method.
pub fn independent_towers_combined_form(p: &CostParams) -> Result<f64, EstimateError> {
    let rot = p.rot_t()?;
    let s = p.sections as f64;
    let n = p.register_qubits as f64;
    let r = p.rounds as f64;
    let flags = flag_t_term(p.sections, p.rounds, p.flag_controls());
    Ok(
        (s + 1.0)
            * ((rot * (2.0 * n + 3.0) + 8.0 * n + 4.0)
                + (r - 1.0) * (2.0 * rot + 8.0 * n + 4.0))
            + flags,
    )
}

/// Measurement depth per round, unrounded.
pub fn meas_depth(method: Method, p: &CostParams) -> Result<f64, EstimateError> {
    let rot = p.rot_t()?;
    let n = p.register_qubits as f64;
    let l = p.flag_controls();
    let flag_depth = 2.0 * crate::segment::ceil_log2(l.max(1)) as f64;
    let rus_layers = |k: f64| (2.5 * k + 1.5).log2().ceil();
    Ok(match method {
        Method::GateSynthesis => rot + flag_depth,
        Method::SynthesisInjection => rus_layers(p.rotation_count() as f64) + flag_depth,
        Method::InCircuitTowers => rot + 2.0 * n + flag_depth,
        Method::IndependentTowers => rus_layers(p.rotation_count() as f64) + flag_depth,
    })
}

fn round_half_away(v: f64) -> i64 {
    v.round() as i64
}

/// Evaluates one method at one parameter set.
pub fn estimate(method: Method, p: &CostParams) -> Result<ResourceReport, EstimateError> {
    let total = t_count_total(method, p)?;
    let per_round = total / p.rounds as f64;
    let depth = meas_depth(method, p)?;
    Ok(ResourceReport {
        method,
        t_count_total: total,
        t_count_per_round: round_half_away(per_round),
        meas_depth_per_round: round_half_away(depth),
        t_count_per_round_raw: per_round,
        meas_depth_raw: depth,
        rot_t: p.rot_t()?,
    })
}

/// Smallest round count strictly past the T-count break-even threshold.
///
/// Only the two tower methods have a threshold; `method` must be
/// [`Method::InCircuitTowers`] or [`Method::IndependentTowers`].
pub fn break_even_rounds(method: Method, register_qubits: u64, rot_t: f64) -> BreakEven {
    let n = register_qubits as f64;
    let denom = match method {
        Method::InCircuitTowers => 1.0 - 1.0 / n - 4.0 / rot_t,
        Method::IndependentTowers => 1.0 - (n + 2.0) / (2.0 * n + 1.0) - 4.0 / rot_t,
        _ => return BreakEven::Never,
    };
    if denom <= 0.0 {
        return BreakEven::Never;
    }
    let threshold = 1.0 / denom;
    BreakEven::Rounds(threshold.floor() as u64 + 1)
}

/// `E[D_m] = sum_d d [ (1 - 2^-d)^m - (1 - 2^-(d-1))^m ]`, truncated when the
/// tail bound `m d 2^-d` drops below `truncation_tol`.
pub fn rus_expected_depth(m: u64, truncation_tol: f64) -> RusDepthResult {
    let mf = m as f64;
    let mut exact = 0.0f64;
    let mut d = 1u32;
    let mut bound;
    loop {
        let here = (mf * (-(2.0f64.powi(-(d as i32)))).ln_1p()).exp();
        let prev = if d == 1 {
            0.0
        } else {
            (mf * (-(2.0f64.powi(-(d as i32 - 1)))).ln_1p()).exp()
        };
        exact += d as f64 * (here - prev);
        bound = mf * d as f64 * 2.0f64.powi(-(d as i32));
        // Only trust the tail bound once past the distribution's bulk.
        if bound < truncation_tol && 2.0f64.powi(d as i32) > mf {
            break;
        }
        d += 1;
    }
    RusDepthResult {
        parallel_rotations: m,
        exact,
        fitted: (2.5 * mf + 1.5).log2(),
        truncation_bound: bound,
    }
}

/// Monte Carlo estimate of `E[D_m]`: each trial draws `m` independent
/// geometric(1/2) attempt counts and records their maximum.
pub fn rus_depth_monte_carlo(m: u64, trials: u64, seed: u64) -> McEstimate {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..trials {
        let mut depth = 1u64;
        for _ in 0..m {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let draw = (-u.log2()).ceil().max(1.0) as u64;
            depth = depth.max(draw);
        }
        sum += depth as f64;
        sum_sq += (depth * depth) as f64;
    }
    let mean = sum / trials as f64;
    let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
    McEstimate { mean, stderr: (var / trials as f64).sqrt(), trials }
}

/// Depth and T-cost summary of applying a phase via table lookup plus
/// linear-interpolation arithmetic, for an `n`-bit operand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QromCost {
    /// Quantum-classical adder: depth `3 ceil(log2 n) - 4`, about `15 n` T.
    pub qc_add_depth: i64,
    pub qc_add_t: f64,
    /// Quantum-quantum adder: depth `3 ceil(log2 n) - 1`, about `22 n` T.
    pub qq_add_depth: i64,
    pub qq_add_t: f64,
    /// Depth of the multiplication step.
    pub mult_depth: i64,
    /// Total depth `9 ceil(log2 n) - 4` for computing, phasing and
    /// uncomputing the interpolation.
    pub total_depth: i64,
}

pub fn qrom_interpolation_cost(n: u64) -> Result<QromCost, EstimateError> {
    if n < 2 {
        return Err(EstimateError::BadParameter("qrom operand width"));
    }
    let log = crate::segment::ceil_log2(n) as i64;
    Ok(QromCost {
        qc_add_depth: 3 * log - 4,
        qc_add_t: 15.0 * n as f64,
        qq_add_depth: 3 * log - 1,
        qq_add_t: 22.0 * n as f64,
        mult_depth: 4,
        total_depth: 9 * log - 4,
    })
}
