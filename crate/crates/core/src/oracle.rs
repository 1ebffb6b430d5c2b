//! Lowers a piecewise spec to the parallel oracle circuit.
//!
//! The circuit uses `S + 1` registers of `n + 1` qubits: the input register
//! plus one ancilla register per section. The input is fanned out to every
//! section register, a per-section flag (a multi-controlled X matching the
//! section's bit prefix) conditionally inverts that register's data via a
//! CNOT layer, and a single parallel layer of rotation blocks applies
//! `Rz(2^i a)` across each register. The signs are arranged so that, per
//! input `x`, everything cancels except the one section containing `x`,
//! leaving `e^{i f(x)} |x>`. With the amplitude gate set enabled the result
//! is `(cos f(x) |0> + i sin f(x) |1>) |x>` on the extra qubit instead.
//!
//! Fan-out and fan-in are emitted as multi-target CNOTs tagged with their
//! role; [`lower_fanout`] rewrites them into the measurement-based form
//! (GHZ preparation + one CNOT + Z measurement for fan-out, X measurements
//! with a parity-conditioned Z for fan-in).

use crate::catalyst::{self, CatalystError, SeedSource, TowerWiring};
use crate::circuit::{Circuit, CircuitError, FanRole, Gate, QubitId, RotationKind};
use crate::segment::{PiecewiseSpec, SegmentError};
use crate::sim::{simulate, SimError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Spec(#[from] SegmentError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Catalyst(#[from] CatalystError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("section {section} has a prefix of {got} bits on an {n}-qubit register")]
    PrefixTooLong { section: usize, got: usize, n: u32 },
}

/// Which output encoding the oracle produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleVariant {
    /// `|x> -> e^{i f(x)} |x>`.
    Phase,
    /// `|x>|0> -> |x>(cos f(x) |0> + i sin f(x) |1>)`.
    Amplitude,
}

/// How the rotation blocks are realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationMethod {
    /// Clifford+T synthesis in place.
    Synthesis,
    /// Rotations synthesized offline and teleported in.
    SynthesisInjection,
    /// Each rotation block becomes an in-circuit catalyst tower.
    InCircuitTowers,
    /// Rotations teleported from independent-tower resource states.
    IndependentTowers,
}

/// How register fan-out/fan-in is emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FanoutLowering {
    MultiTargetCnot,
    GhzMeasurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub variant: OracleVariant,
    pub rotation_method: RotationMethod,
    pub fanout_lowering: FanoutLowering,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            variant: OracleVariant::Phase,
            rotation_method: RotationMethod::Synthesis,
            fanout_lowering: FanoutLowering::MultiTargetCnot,
            seed: 0,
        }
    }
}

/// T-count and measurement depth of one `l`-controlled flag gate, built as
/// a binary tree of logical ANDs: `(4l - 4, ceil(log2 l))`. Single- and
/// zero-control flags are plain (C)NOTs and cost nothing.
pub fn flag_cost(controls: u32) -> (u64, u32) {
    if controls <= 1 {
        (0, 0)
    } else {
        (4 * (controls as u64 - 1), crate::segment::ceil_log2(controls as u64))
    }
}

fn sec_name(j: usize) -> String {
    format!("sec{}", j + 1)
}

fn tower_name(j: usize) -> String {
    // Tower 0 serves the input register, tower j the j-th section register.
    format!("twr{j}")
}

/// Builds the oracle circuit for `spec`.
///
/// Register layout: `top` (`n` data qubits plus one extra), then `sec1` ..
/// `secS` with the same shape. The in-circuit tower method appends one
/// `2n + 1`-qubit tower register per rotation block (n catalysts, n AND
/// ancillas, one spare target), bringing the width to `(S+1)(3n+2)`.
pub fn build_oracle(spec: &PiecewiseSpec, config: &OracleConfig) -> Result<Circuit, OracleError> {
    spec.validate()?;
    let n = spec.n;
    let s = spec.section_count();
    for (j, seg) in spec.segments.iter().enumerate() {
        if seg.prefix.len() > n as usize {
            return Err(OracleError::PrefixTooLong { section: j, got: seg.prefix.len(), n });
        }
    }

    let mut c = Circuit::new();
    c.add_register("top", n + 1)?;
    for j in 0..s {
        c.add_register(sec_name(j), n + 1)?;
    }
    let towers = config.rotation_method == RotationMethod::InCircuitTowers;
    if towers {
        for j in 0..=s {
            c.add_register(tower_name(j), 2 * n + 1)?;
        }
    }

    let top = |i: u32| QubitId::new("top", i);
    let sec = |j: usize, i: u32| QubitId::new(sec_name(j), i);
    let extra = n;
    let orange = config.variant == OracleVariant::Amplitude;
    let rot_kind = match config.rotation_method {
        RotationMethod::Synthesis | RotationMethod::InCircuitTowers => RotationKind::Synthesized,
        RotationMethod::SynthesisInjection | RotationMethod::IndependentTowers => {
            RotationKind::Injected
        }
    };

    let alpha_sum: f64 = spec.segments.iter().map(|seg| seg.alpha).sum();
    let gamma_sum: f64 = (0..s).map(|i| spec.gamma(i)).sum();

    // Emits one rotation block: Rz(2^i * base) across the data qubits plus
    // Rz(offset) on the register's extra qubit.
    let emit_block = |c: &mut Circuit,
                      data: &dyn Fn(u32) -> QubitId,
                      extra_q: QubitId,
                      base: f64,
                      offset: f64,
                      tower: Option<usize>|
     -> Result<(), OracleError> {
        match tower {
            None => {
                for i in 0..n {
                    c.push(Gate::Rz {
                        target: data(i),
                        angle: base * f64::powi(2.0, i as i32),
                        kind: rot_kind,
                    });
                }
                c.push(Gate::Rz { target: extra_q, angle: offset, kind: rot_kind });
            }
            Some(j) => {
                let reg = tower_name(j);
                let cat = |i: u32| QubitId::new(reg.clone(), i);
                let anc = |i: u32| QubitId::new(reg.clone(), n + i);
                let spare = QubitId::new(reg.clone(), 2 * n);
                for (i, angle) in catalyst::catalyst_angles(n, base).iter().enumerate() {
                    catalyst::prep_catalyst(c, &cat(i as u32), *angle);
                }
                let mut targets = vec![spare];
                targets.extend((0..n).map(data));
                let wiring = TowerWiring {
                    targets,
                    catalysts: (0..n).map(cat).collect(),
                    ancillas: (0..n).map(anc).collect(),
                };
                catalyst::in_circuit_tower(c, &wiring, n, base, SeedSource::Synthesized)?;
                // The offset rotation is synthesized directly every round.
                c.push(Gate::Rz {
                    target: extra_q,
                    angle: offset,
                    kind: RotationKind::Synthesized,
                });
            }
        }
        Ok(())
    };

    // Flag j: multi-controlled X matching the section prefix on the high
    // data bits, targeting the register's extra qubit.
    let emit_flag = |c: &mut Circuit, j: usize| {
        let prefix = &spec.segments[j].prefix;
        let controls: Vec<(QubitId, bool)> = prefix
            .iter()
            .enumerate()
            .map(|(k, &bit)| (sec(j, n - 1 - k as u32), bit))
            .collect();
        c.push(Gate::Mcx { controls, target: sec(j, extra) });
    };

    // Conditional inversion of a section register's data copy.
    let emit_invert = |c: &mut Circuit, j: usize| {
        c.push(Gate::Cnot {
            control: sec(j, extra),
            targets: (0..n).map(|i| sec(j, i)).collect(),
            role: None,
        });
    };

    if orange {
        c.push(Gate::H(top(extra)));
    }
    for i in 0..n {
        c.push(Gate::Cnot {
            control: top(i),
            targets: (0..s).map(|j| sec(j, i)).collect(),
            role: Some(FanRole::FanOut),
        });
    }
    if orange {
        c.push(Gate::Cnot {
            control: top(extra),
            targets: (0..s).map(|j| sec(j, extra)).collect(),
            role: Some(FanRole::FanOut),
        });
        c.push(Gate::Cnot { control: top(extra), targets: (0..n).map(top).collect(), role: None });
    }

    emit_block(&mut c, &top, top(extra), alpha_sum / 2.0, -gamma_sum, towers.then_some(0))?;

    if orange {
        c.push(Gate::Cnot { control: top(extra), targets: (0..n).map(top).collect(), role: None });
    }

    for j in 0..s {
        emit_flag(&mut c, j);
    }
    for j in 0..s {
        emit_invert(&mut c, j);
    }
    for j in 0..s {
        let data = |i: u32| sec(j, i);
        emit_block(
            &mut c,
            &data,
            sec(j, extra),
            -spec.segments[j].alpha / 2.0,
            spec.gamma(j),
            towers.then_some(j + 1),
        )?;
    }
    for j in 0..s {
        emit_invert(&mut c, j);
    }
    for j in 0..s {
        emit_flag(&mut c, j);
    }

    if orange {
        c.push(Gate::Cnot {
            control: top(extra),
            targets: (0..s).map(|j| sec(j, extra)).collect(),
            role: Some(FanRole::FanIn),
        });
    }
    for i in 0..n {
        c.push(Gate::Cnot {
            control: top(i),
            targets: (0..s).map(|j| sec(j, i)).collect(),
            role: Some(FanRole::FanIn),
        });
    }
    if orange {
        c.push(Gate::H(top(extra)));
    }

    // With the Rz convention diag(e^{-ia/2}, e^{ia/2}) the construction's
    // phases cancel exactly; the constant stays zero for every variant.
    c.set_global_phase(0.0);

    let c = match config.fanout_lowering {
        FanoutLowering::MultiTargetCnot => c,
        FanoutLowering::GhzMeasurement => lower_fanout(&c)?,
    };
    debug_assert!(c.validate().is_ok());
    Ok(c)
}

/// Rewrites role-tagged multi-target CNOTs into their measurement-based
/// forms. Fan-out becomes a GHZ state, one CNOT from the control, a Z
/// measurement and a conditional X correction; fan-in becomes parallel
/// X-basis measurements with a parity-conditioned Z on the control. Measured
/// helper qubits are reset to |0> so register restoration is preserved.
pub fn lower_fanout(circuit: &Circuit) -> Result<Circuit, OracleError> {
    let fanouts = circuit
        .gates()
        .iter()
        .filter(|g| {
            matches!(g, Gate::Cnot { role: Some(FanRole::FanOut), targets, .. } if targets.len() >= 2)
        })
        .count();

    let mut lowered = Circuit::new();
    for reg in circuit.registers() {
        lowered.add_register(reg.name.clone(), reg.size)?;
    }
    if fanouts > 0 {
        lowered.add_register("ghz", fanouts as u32)?;
    }
    lowered.set_global_phase(circuit.global_phase());

    let mut next_head = 0u32;
    for gate in circuit.gates() {
        match gate {
            Gate::Cnot { control, targets, role: Some(FanRole::FanOut) } if targets.len() >= 2 => {
                let head = QubitId::new("ghz", next_head);
                next_head += 1;
                // GHZ chain over the head and the copies, prepared ahead of
                // the control interaction.
                lowered.push(Gate::H(head.clone()));
                let mut chain = vec![head.clone()];
                chain.extend(targets.iter().cloned());
                for pair in chain.windows(2) {
                    lowered.push(Gate::Cnot {
                        control: pair[0].clone(),
                        targets: vec![pair[1].clone()],
                        role: None,
                    });
                }
                lowered.push(Gate::Cnot {
                    control: control.clone(),
                    targets: vec![head.clone()],
                    role: None,
                });
                let record = lowered.measure_z(head.clone());
                for t in targets {
                    lowered.push(Gate::Conditioned {
                        parity_of: vec![record],
                        op: crate::circuit::Correction::X(t.clone()),
                    });
                }
                lowered.push(Gate::Conditioned {
                    parity_of: vec![record],
                    op: crate::circuit::Correction::X(head),
                });
            }
            Gate::Cnot { control, targets, role: Some(FanRole::FanIn) } if targets.len() >= 2 => {
                let mut records = Vec::with_capacity(targets.len());
                for t in targets {
                    let record = lowered.measure_x(t.clone());
                    records.push(record);
                    // Return the measured copy to |0>.
                    lowered.push(Gate::H(t.clone()));
                    lowered.push(Gate::Conditioned {
                        parity_of: vec![record],
                        op: crate::circuit::Correction::X(t.clone()),
                    });
                }
                lowered.push(Gate::Conditioned {
                    parity_of: records,
                    op: crate::circuit::Correction::Z(control.clone()),
                });
            }
            other => lowered.push(other.clone()),
        }
    }
    Ok(lowered)
}

// ---------------------------------------------------------------------------
// Oracle verification against the classical piecewise evaluation
// ---------------------------------------------------------------------------

/// Result of checking an oracle circuit against its spec by simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Largest deviation of any payload amplitude from the expected
    /// `e^{i f(x)}` (or `cos/sin f(x)`) pattern, relative to the input
    /// amplitude.
    pub max_amplitude_error: f64,
    /// Largest relative amplitude found off the common ancilla state or on
    /// components whose section/helper ancillas are not |0>.
    pub max_leakage: f64,
    /// Fitted input-independent phase constant of the circuit.
    pub fitted_constant: f64,
    /// Grid points whose deviation exceeded the tolerance.
    pub failures: Vec<usize>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Builds the oracle and simulates it on a uniform superposition of all
/// `2^n` inputs, checking the phase/amplitude pattern and ancilla
/// restoration point by point.
pub fn verify_oracle(
    spec: &PiecewiseSpec,
    config: &OracleConfig,
    tolerance: f64,
) -> Result<VerifyReport, OracleError> {
    let circuit = build_oracle(spec, config)?;
    verify_circuit(&circuit, spec, config, tolerance)
}

/// Like [`verify_oracle`] but for an already-built circuit.
pub fn verify_circuit(
    circuit: &Circuit,
    spec: &PiecewiseSpec,
    config: &OracleConfig,
    tolerance: f64,
) -> Result<VerifyReport, OracleError> {
    let n = spec.n;
    let width = circuit.width();
    let payload_bits = match config.variant {
        OracleVariant::Phase => n,
        OracleVariant::Amplitude => n + 1,
    };
    let payload_dim = 1usize << payload_bits;
    let rest_bits = width - payload_bits;
    let rest_dim = 1usize << rest_bits;

    // Rest bits (beyond the payload) that must return to |0>: the top extra
    // qubit in phase mode, every section register, and any fan-out helpers.
    // Tower registers keep their charged catalysts and are exempt.
    let mut zero_mask = 0usize;
    {
        let mut offset = 0u32;
        for reg in circuit.registers() {
            for i in 0..reg.size {
                let flat = offset + i;
                if flat < payload_bits {
                    continue;
                }
                let rest_bit = flat - payload_bits;
                let required = reg.name.starts_with("sec")
                    || reg.name == "ghz"
                    || (reg.name == "top" && config.variant == OracleVariant::Phase);
                if required {
                    zero_mask |= 1usize << rest_bit;
                }
            }
            offset += reg.size;
        }
    }

    // Uniform superposition over the data register.
    let dim = 1usize << width;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let weight = 1.0 / ((1usize << n) as f64).sqrt();
    for x in 0..1usize << n {
        amps[x] = Complex64::new(weight, 0.0);
    }
    let state = crate::sim::StateVector::from_amplitudes(amps)?;
    let run = simulate(circuit, state, config.seed)?;

    // Conditional norms per payload index, and the common rest-state taken
    // from the strongest payload.
    let amps = run.state.amplitudes();
    let mut norms_sq = vec![0.0f64; payload_dim];
    for (idx, amp) in amps.iter().enumerate() {
        norms_sq[idx & (payload_dim - 1)] += amp.norm_sqr();
    }
    let d0 = norms_sq
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(d, _)| d)
        .unwrap_or(0);
    let mut common_rest = vec![Complex64::new(0.0, 0.0); rest_dim];
    for (rest, slot) in common_rest.iter_mut().enumerate() {
        *slot = amps[(rest << payload_bits) | d0];
    }
    let norm0 = norms_sq[d0].sqrt();
    for a in common_rest.iter_mut() {
        *a /= norm0;
    }

    // Projection of each payload's conditional vector onto the common rest
    // state, plus any weight on forbidden ancilla patterns.
    let mut projections = vec![Complex64::new(0.0, 0.0); payload_dim];
    let mut forbidden_sq = vec![0.0f64; payload_dim];
    for (idx, amp) in amps.iter().enumerate() {
        let d = idx & (payload_dim - 1);
        let rest = idx >> payload_bits;
        projections[d] += common_rest[rest].conj() * amp;
        if rest & zero_mask != 0 {
            forbidden_sq[d] += amp.norm_sqr();
        }
    }
    // Residual weight off the common rest state, accumulated directly so it
    // stays accurate near zero.
    let mut resid_sq = vec![0.0f64; payload_dim];
    for (idx, amp) in amps.iter().enumerate() {
        let d = idx & (payload_dim - 1);
        let rest = idx >> payload_bits;
        resid_sq[d] += (amp - projections[d] * common_rest[rest]).norm_sqr();
    }

    // Expected payload weights, up to one global constant.
    let expected: Vec<Complex64> = (0..payload_dim)
        .map(|d| {
            let x = d & ((1usize << n) - 1);
            let f = spec.eval(x);
            match config.variant {
                OracleVariant::Phase => Complex64::from_polar(1.0, f),
                OracleVariant::Amplitude => {
                    if d >> n == 0 {
                        Complex64::new(f.cos(), 0.0)
                    } else {
                        Complex64::new(0.0, f.sin())
                    }
                }
            }
        })
        .collect();

    // Least-squares fit of the one free constant rho ~ weight * e^{i c},
    // then one trimmed refit on the better half of the points so that a
    // defect in one section does not drag the constant and smear the error
    // across healthy sections.
    let fit = |ds: &mut dyn Iterator<Item = usize>| {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0f64;
        for d in ds {
            num += expected[d].conj() * projections[d];
            den += expected[d].norm_sqr();
        }
        num / den
    };
    let rho0 = fit(&mut (0..payload_dim));
    let mut by_err: Vec<usize> = (0..payload_dim).collect();
    by_err.sort_by(|&a, &b| {
        (projections[a] - rho0 * expected[a])
            .norm()
            .total_cmp(&(projections[b] - rho0 * expected[b]).norm())
    });
    let keep = payload_dim.div_ceil(2);
    let rho = fit(&mut by_err[..keep].iter().copied());

    let mut max_amplitude_error = 0.0f64;
    let mut max_leakage = 0.0f64;
    let mut failures = Vec::new();
    for x in 0..1usize << n {
        let mut err = 0.0f64;
        let mut leak = 0.0f64;
        for b in 0..payload_dim >> n {
            let d = (b << n) | x;
            err = err.max((projections[d] - rho * expected[d]).norm() / weight);
            leak = leak.max(resid_sq[d].sqrt() / weight).max(forbidden_sq[d].sqrt() / weight);
        }
        max_amplitude_error = max_amplitude_error.max(err);
        max_leakage = max_leakage.max(leak);
        if err > tolerance || leak > tolerance {
            failures.push(x);
        }
    }

    Ok(VerifyReport {
        max_amplitude_error,
        max_leakage,
        fitted_constant: rho.arg(),
        failures,
        tolerance,
        passed: max_amplitude_error <= tolerance && max_leakage <= tolerance,
    })
}
