//! Dense state-vector simulation with seeded mid-circuit measurement.
//!
//! Qubit `i` of the circuit (flat order: registers as declared, little-endian
//! within a register) is bit `i` of the basis index. Composite gates are
//! expanded on the fly: a logical-AND computation becomes its Clifford+T
//! gate list, the measurement-based uncomputation becomes an explicit
//! measurement plus classically-conditioned corrections, and an X-basis
//! measurement is a Hadamard-conjugated Z measurement.

use crate::circuit::{Circuit, CircuitError, Correction, Gate, RecordId};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

/// Probability below which a measurement branch is treated as impossible.
pub const BRANCH_EPSILON: f64 = 1e-15;

const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("circuit width {width} exceeds the simulator ceiling of {ceiling} qubits")]
    WidthOverflow { width: u32, ceiling: u32 },
    #[error("initial state has {got} qubits, circuit needs {want}")]
    QubitMismatch { want: u32, got: u32 },
    #[error("state is not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),
    #[error("amplitude length {0} is not a power of two")]
    BadLength(usize),
    #[error("basis index {index} out of range for {qubits} qubits")]
    BadBasisIndex { index: usize, qubits: u32 },
    #[error("branch enumeration exceeded the limit of {0} branches")]
    BranchLimit(usize),
    #[error("amplitude at basis index {0} is (numerically) zero; no phase to extract")]
    ZeroAmplitude(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Simulator qubit ceiling; override with `PWO_SIM_MAX_QUBITS`.
pub fn max_qubits() -> u32 {
    std::env::var("PWO_SIM_MAX_QUBITS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(24)
}

/// Dense complex amplitude vector over `qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: u32,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `qubits` qubits.
    pub fn zero(qubits: u32) -> Result<Self, SimError> {
        Self::basis(qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(qubits: u32, index: usize) -> Result<Self, SimError> {
        let ceiling = max_qubits();
        if qubits > ceiling {
            return Err(SimError::WidthOverflow { width: qubits, ceiling });
        }
        let dim = 1usize << qubits;
        if index >= dim {
            return Err(SimError::BadBasisIndex { index, qubits });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amps })
    }

    /// Wraps an amplitude vector, checking the length and normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::BadLength(amps.len()));
        }
        let qubits = amps.len().trailing_zeros();
        let ceiling = max_qubits();
        if qubits > ceiling {
            return Err(SimError::WidthOverflow { width: qubits, ceiling });
        }
        let state = Self { qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(SimError::NotNormalized((norm - 1.0).abs()));
        }
        Ok(state)
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |<self|other>|^2.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// <self|other>.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.qubits, other.qubits);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Reduced density matrix of one qubit, `[[rho00, rho01], [rho10, rho11]]`.
    pub fn reduced_density(&self, qubit: usize) -> [[Complex64; 2]; 2] {
        let bit = 1usize << qubit;
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        for idx in 0..self.amps.len() {
            if idx & bit != 0 {
                continue;
            }
            let a0 = self.amps[idx];
            let a1 = self.amps[idx | bit];
            rho[0][0] += a0 * a0.conj();
            rho[0][1] += a0 * a1.conj();
            rho[1][0] += a1 * a0.conj();
            rho[1][1] += a1 * a1.conj();
        }
        rho
    }

    fn apply(&mut self, op: &CompiledOp, record: &[bool]) {
        match op {
            CompiledOp::Single { qubit, kind } => self.apply_single(*qubit, *kind),
            CompiledOp::Rz { qubit, angle } => {
                let bit = 1usize << qubit;
                let minus = Complex64::from_polar(1.0, -angle / 2.0);
                let plus = Complex64::from_polar(1.0, angle / 2.0);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    *amp *= if i & bit != 0 { plus } else { minus };
                }
            }
            CompiledOp::Cnot { control, target_mask } => {
                let cbit = 1usize << control;
                for i in 0..self.amps.len() {
                    if i & cbit != 0 {
                        let j = i ^ target_mask;
                        if i < j {
                            self.amps.swap(i, j);
                        }
                    }
                }
            }
            CompiledOp::Mcx { control_mask, control_value, target } => {
                let tbit = 1usize << target;
                for i in 0..self.amps.len() {
                    if i & tbit == 0 && i & control_mask == *control_value {
                        self.amps.swap(i, i | tbit);
                    }
                }
            }
            CompiledOp::Cz { a, b } => {
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            CompiledOp::Conditioned { parity_of, op } => {
                let parity = parity_of.iter().fold(false, |p, &r| p ^ record[r]);
                if parity {
                    self.apply(op, record);
                }
            }
            CompiledOp::Measure { .. } => unreachable!("measurements are handled by the driver"),
        }
    }

    fn apply_single(&mut self, qubit: usize, kind: SingleKind) {
        let bit = 1usize << qubit;
        match kind {
            SingleKind::H => {
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let a = self.amps[i];
                        let b = self.amps[i | bit];
                        self.amps[i] = (a + b) * inv_sqrt2;
                        self.amps[i | bit] = (a - b) * inv_sqrt2;
                    }
                }
            }
            SingleKind::X => {
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        self.amps.swap(i, i | bit);
                    }
                }
            }
            SingleKind::Z => self.phase_on_one(bit, Complex64::new(-1.0, 0.0)),
            SingleKind::S => self.phase_on_one(bit, Complex64::new(0.0, 1.0)),
            SingleKind::Sdg => self.phase_on_one(bit, Complex64::new(0.0, -1.0)),
            SingleKind::T => self.phase_on_one(bit, Complex64::from_polar(1.0, FRAC_PI_4)),
            SingleKind::Tdg => self.phase_on_one(bit, Complex64::from_polar(1.0, -FRAC_PI_4)),
        }
    }

    fn phase_on_one(&mut self, bit: usize, phase: Complex64) {
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *amp *= phase;
            }
        }
    }

    /// Collapses `qubit` to `outcome` and renormalizes; returns the branch
    /// probability.
    fn collapse(&mut self, qubit: usize, outcome: bool) -> f64 {
        let bit = 1usize << qubit;
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i & bit != 0) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let scale = 1.0 / p.sqrt();
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *amp *= scale;
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SingleKind {
    H,
    X,
    Z,
    S,
    Sdg,
    T,
    Tdg,
}

/// Flat-index instruction stream the simulator executes.
#[derive(Debug, Clone)]
enum CompiledOp {
    Single { qubit: usize, kind: SingleKind },
    Rz { qubit: usize, angle: f64 },
    Cnot { control: usize, target_mask: usize },
    Mcx { control_mask: usize, control_value: usize, target: usize },
    Cz { a: usize, b: usize },
    Measure { qubit: usize, record: RecordId },
    Conditioned { parity_of: Vec<RecordId>, op: Box<CompiledOp> },
}

fn compile(circuit: &Circuit) -> Result<Vec<CompiledOp>, SimError> {
    let flat = |q| circuit.flat_index(q).map_err(SimError::from);
    let mut ops = Vec::with_capacity(circuit.gates().len());
    for gate in circuit.gates() {
        match gate {
            Gate::H(q) => ops.push(CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::H }),
            Gate::X(q) => ops.push(CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::X }),
            Gate::Z(q) => ops.push(CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::Z }),
            Gate::S(q) => ops.push(CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::S }),
            Gate::Sdg(q) => {
                ops.push(CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::Sdg })
            }
            Gate::T(q) => ops.push(CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::T }),
            Gate::Tdg(q) => {
                ops.push(CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::Tdg })
            }
            Gate::Cnot { control, targets, .. } => {
                let mut mask = 0usize;
                for t in targets {
                    mask |= 1usize << flat(t)?;
                }
                ops.push(CompiledOp::Cnot { control: flat(control)?, target_mask: mask });
            }
            Gate::Mcx { controls, target } => {
                let mut control_mask = 0usize;
                let mut control_value = 0usize;
                for (q, polarity) in controls {
                    let bit = 1usize << flat(q)?;
                    control_mask |= bit;
                    if *polarity {
                        control_value |= bit;
                    }
                }
                ops.push(CompiledOp::Mcx { control_mask, control_value, target: flat(target)? });
            }
            Gate::Toffoli { controls, target } => {
                let a = 1usize << flat(&controls[0])?;
                let b = 1usize << flat(&controls[1])?;
                ops.push(CompiledOp::Mcx {
                    control_mask: a | b,
                    control_value: a | b,
                    target: flat(target)?,
                });
            }
            Gate::Rz { target, angle, .. } => {
                ops.push(CompiledOp::Rz { qubit: flat(target)?, angle: *angle });
            }
            Gate::AndCompute { a, b, out } => {
                compile_and_compute(&mut ops, flat(a)?, flat(b)?, flat(out)?);
            }
            Gate::AndUncompute { a, b, out, record } => {
                let (a, b, out) = (flat(a)?, flat(b)?, flat(out)?);
                ops.push(CompiledOp::Single { qubit: out, kind: SingleKind::H });
                ops.push(CompiledOp::Measure { qubit: out, record: *record });
                ops.push(CompiledOp::Conditioned {
                    parity_of: vec![*record],
                    op: Box::new(CompiledOp::Cz { a, b }),
                });
                ops.push(CompiledOp::Conditioned {
                    parity_of: vec![*record],
                    op: Box::new(CompiledOp::Single { qubit: out, kind: SingleKind::X }),
                });
            }
            Gate::MeasureZ { target, record } => {
                ops.push(CompiledOp::Measure { qubit: flat(target)?, record: *record });
            }
            Gate::MeasureX { target, record } => {
                let qubit = flat(target)?;
                ops.push(CompiledOp::Single { qubit, kind: SingleKind::H });
                ops.push(CompiledOp::Measure { qubit, record: *record });
                ops.push(CompiledOp::Single { qubit, kind: SingleKind::H });
            }
            Gate::Conditioned { parity_of, op } => {
                let inner = match op {
                    Correction::X(q) => CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::X },
                    Correction::Z(q) => CompiledOp::Single { qubit: flat(q)?, kind: SingleKind::Z },
                    Correction::Cz(a, b) => CompiledOp::Cz { a: flat(a)?, b: flat(b)? },
                };
                ops.push(CompiledOp::Conditioned {
                    parity_of: parity_of.clone(),
                    op: Box::new(inner),
                });
            }
        }
    }
    Ok(ops)
}

/// The Clifford+T realisation of `out = a AND b` from a fresh |0> target.
fn compile_and_compute(ops: &mut Vec<CompiledOp>, a: usize, b: usize, out: usize) {
    let single = |qubit, kind| CompiledOp::Single { qubit, kind };
    let cnot = |control, target: usize| CompiledOp::Cnot { control, target_mask: 1usize << target };
    ops.push(single(out, SingleKind::H));
    ops.push(single(out, SingleKind::T));
    ops.push(cnot(a, out));
    ops.push(cnot(b, out));
    ops.push(cnot(out, a));
    ops.push(cnot(out, b));
    ops.push(single(a, SingleKind::Tdg));
    ops.push(single(b, SingleKind::Tdg));
    ops.push(single(out, SingleKind::T));
    ops.push(cnot(out, a));
    ops.push(cnot(out, b));
    ops.push(single(out, SingleKind::H));
    ops.push(single(out, SingleKind::S));
}

/// Initial state of a simulation.
#[derive(Debug, Clone)]
pub enum Initial {
    Basis(usize),
    State(StateVector),
}

impl From<usize> for Initial {
    fn from(index: usize) -> Self {
        Initial::Basis(index)
    }
}

impl From<StateVector> for Initial {
    fn from(state: StateVector) -> Self {
        Initial::State(state)
    }
}

/// Outcome of one seeded run: final state plus the measurement record.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub state: StateVector,
    pub record: Vec<bool>,
}

fn initial_state(circuit: &Circuit, initial: Initial) -> Result<StateVector, SimError> {
    let width = circuit.width();
    let ceiling = max_qubits();
    if width > ceiling {
        return Err(SimError::WidthOverflow { width, ceiling });
    }
    match initial {
        Initial::Basis(index) => StateVector::basis(width, index),
        Initial::State(state) => {
            if state.qubits() != width {
                return Err(SimError::QubitMismatch { want: width, got: state.qubits() });
            }
            let norm = state.norm();
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(SimError::NotNormalized((norm - 1.0).abs()));
            }
            Ok(state)
        }
    }
}

/// Runs the circuit once, sampling measurements from the Born rule with a
/// seeded generator. Identical inputs and seed reproduce the run bit for bit.
pub fn simulate(
    circuit: &Circuit,
    initial: impl Into<Initial>,
    seed: u64,
) -> Result<SimRun, SimError> {
    let mut state = initial_state(circuit, initial.into())?;
    let ops = compile(circuit)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut record = vec![false; circuit.record_count()];
    for op in &ops {
        if let CompiledOp::Measure { qubit, record: id } = op {
            let p1 = state.prob_one(*qubit);
            let u: f64 = rng.gen();
            let outcome = if p1 < BRANCH_EPSILON {
                false
            } else if p1 > 1.0 - BRANCH_EPSILON {
                true
            } else {
                u < p1
            };
            state.collapse(*qubit, outcome);
            record[*id] = outcome;
        } else {
            state.apply(op, &record);
        }
    }
    Ok(SimRun { state, record })
}

/// One enumerated measurement branch.
#[derive(Debug, Clone)]
pub struct Branch {
    /// Measurement outcomes in record order.
    pub outcomes: Vec<bool>,
    pub probability: f64,
    pub state: StateVector,
}

/// Exhaustively enumerates every measurement branch with its exact
/// probability. Branches below [`BRANCH_EPSILON`] are pruned as impossible.
pub fn simulate_all_branches(
    circuit: &Circuit,
    initial: impl Into<Initial>,
    max_branches: usize,
) -> Result<Vec<Branch>, SimError> {
    let state = initial_state(circuit, initial.into())?;
    let ops = compile(circuit)?;
    let mut out = Vec::new();
    let record = vec![false; circuit.record_count()];
    walk_branches(&ops, 0, state, record, 1.0, max_branches, &mut out)?;
    Ok(out)
}

fn walk_branches(
    ops: &[CompiledOp],
    at: usize,
    mut state: StateVector,
    mut record: Vec<bool>,
    probability: f64,
    max_branches: usize,
    out: &mut Vec<Branch>,
) -> Result<(), SimError> {
    let mut i = at;
    while i < ops.len() {
        if let CompiledOp::Measure { qubit, record: id } = &ops[i] {
            let p1 = state.prob_one(*qubit);
            let p0 = 1.0 - p1;
            if p1 >= BRANCH_EPSILON && p0 >= BRANCH_EPSILON {
                // Fork: explore the 1-branch on a copy, continue on 0.
                let mut one = state.clone();
                one.collapse(*qubit, true);
                let mut one_record = record.clone();
                one_record[*id] = true;
                walk_branches(ops, i + 1, one, one_record, probability * p1, max_branches, out)?;
                state.collapse(*qubit, false);
                record[*id] = false;
                return walk_branches(ops, i + 1, state, record, probability * p0, max_branches, out);
            }
            let outcome = p1 >= BRANCH_EPSILON;
            state.collapse(*qubit, outcome);
            record[*id] = outcome;
        } else {
            state.apply(&ops[i], &record);
        }
        i += 1;
    }
    if out.len() >= max_branches {
        return Err(SimError::BranchLimit(max_branches));
    }
    out.push(Branch { outcomes: record, probability, state });
    Ok(())
}

/// Phase of `state` relative to `reference` at one basis index, in (-pi, pi].
pub fn extract_phase(
    state: &StateVector,
    basis_index: usize,
    reference: &StateVector,
) -> Result<f64, SimError> {
    let a = state.amp(basis_index);
    let r = reference.amp(basis_index);
    if a.norm() < 1e-12 || r.norm() < 1e-12 {
        return Err(SimError::ZeroAmplitude(basis_index));
    }
    Ok((a / r).arg())
}

/// Trace distance between two single-qubit density matrices.
pub fn trace_distance_2x2(rho: &[[Complex64; 2]; 2], sigma: &[[Complex64; 2]; 2]) -> f64 {
    let p = (rho[0][0] - sigma[0][0]).re;
    let q = (rho[1][1] - sigma[1][1]).re;
    let c = rho[0][1] - sigma[0][1];
    let root = ((p - q) * (p - q) + 4.0 * c.norm_sqr()).sqrt();
    let l1 = ((p + q) + root) / 2.0;
    let l2 = ((p + q) - root) / 2.0;
    (l1.abs() + l2.abs()) / 2.0
}

/// <phi| rho |phi> for a pure single-qubit reference state.
pub fn fidelity_with_pure(rho: &[[Complex64; 2]; 2], phi: &[Complex64; 2]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            acc += phi[a].conj() * rho[a][b] * phi[b];
        }
    }
    acc.re
}

/// The single-qubit state `Rz(theta)|+>`, used for catalyst and rotation
/// resource states.
pub fn rz_plus_state(theta: f64) -> [Complex64; 2] {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    [
        Complex64::from_polar(inv_sqrt2, -theta / 2.0),
        Complex64::from_polar(inv_sqrt2, theta / 2.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{QubitId, RotationKind};
    use rand::Rng;

    fn q(i: u32) -> QubitId {
        QubitId::new("q", i)
    }

    fn circuit(n: u32) -> Circuit {
        let mut c = Circuit::new();
        c.add_register("q", n).unwrap();
        c
    }

    #[test]
    fn x_flips_the_zero_state() {
        let mut c = circuit(1);
        c.push(Gate::X(q(0)));
        let run = simulate(&c, 0usize, 1).unwrap();
        assert!((run.state.amp(1) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(run.state.amp(0).norm() < 1e-12);
    }

    #[test]
    fn hadamard_measurement_is_deterministic_per_seed() {
        let mut c = circuit(1);
        c.push(Gate::H(q(0)));
        c.measure_z(q(0));
        let first = simulate(&c, 0usize, 42).unwrap();
        let second = simulate(&c, 0usize, 42).unwrap();
        assert_eq!(first.record, second.record);
        assert_eq!(first.state.amplitudes(), second.state.amplitudes());
        // The collapsed state matches the recorded outcome.
        let idx = if first.record[0] { 1 } else { 0 };
        assert!((first.state.amp(idx).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rz_follows_the_diagonal_convention() {
        let mut c = circuit(1);
        let angle = 0.7311;
        c.push(Gate::X(q(0)));
        c.push(Gate::Rz { target: q(0), angle, kind: RotationKind::Unspecified });
        let run = simulate(&c, 0usize, 0).unwrap();
        let expected = Complex64::from_polar(1.0, angle / 2.0);
        assert!((run.state.amp(1) - expected).norm() < 1e-12);

        let plus = {
            let mut c = circuit(1);
            c.push(Gate::Rz { target: q(0), angle, kind: RotationKind::Unspecified });
            simulate(&c, 0usize, 0).unwrap()
        };
        let expected0 = Complex64::from_polar(1.0, -angle / 2.0);
        assert!((plus.state.amp(0) - expected0).norm() < 1e-12);
    }

    #[test]
    fn norm_is_preserved_by_random_unitary_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let n = 4;
            let mut c = circuit(n);
            for _ in 0..60 {
                match rng.gen_range(0..6) {
                    0 => c.push(Gate::H(q(rng.gen_range(0..n)))),
                    1 => c.push(Gate::T(q(rng.gen_range(0..n)))),
                    2 => c.push(Gate::S(q(rng.gen_range(0..n)))),
                    3 => {
                        let a = rng.gen_range(0..n);
                        let b = (a + rng.gen_range(1..n)) % n;
                        c.push(Gate::Cnot { control: q(a), targets: vec![q(b)], role: None });
                    }
                    4 => c.push(Gate::Rz {
                        target: q(rng.gen_range(0..n)),
                        angle: rng.gen_range(-3.0..3.0),
                        kind: RotationKind::Unspecified,
                    }),
                    _ => c.push(Gate::X(q(rng.gen_range(0..n)))),
                }
            }
            let run = simulate(&c, 0usize, 9).unwrap();
            assert!((run.state.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gate_then_inverse_restores_the_state() {
        let mut c = circuit(2);
        c.push(Gate::H(q(0)));
        c.push(Gate::T(q(0)));
        c.push(Gate::Cnot { control: q(0), targets: vec![q(1)], role: None });
        c.push(Gate::Rz { target: q(1), angle: 1.234, kind: RotationKind::Unspecified });
        c.push(Gate::Rz { target: q(1), angle: -1.234, kind: RotationKind::Unspecified });
        c.push(Gate::Cnot { control: q(0), targets: vec![q(1)], role: None });
        c.push(Gate::Tdg(q(0)));
        c.push(Gate::H(q(0)));
        let run = simulate(&c, 0usize, 0).unwrap();
        assert!((run.state.amp(0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        let mut c = circuit(2);
        c.push(Gate::H(q(0)));
        c.push(Gate::H(q(1)));
        c.measure_z(q(0));
        c.measure_z(q(1));
        let branches = simulate_all_branches(&c, 0usize, 64).unwrap();
        assert_eq!(branches.len(), 4);
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
        for b in &branches {
            assert!((b.probability - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn impossible_branches_are_pruned() {
        let mut c = circuit(1);
        c.push(Gate::X(q(0)));
        c.measure_z(q(0));
        let branches = simulate_all_branches(&c, 0usize, 64).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].outcomes, vec![true]);
        assert!((branches[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branch_limit_is_enforced() {
        let mut c = circuit(3);
        for i in 0..3 {
            c.push(Gate::H(q(i)));
            c.measure_z(q(i));
        }
        let err = simulate_all_branches(&c, 0usize, 4).unwrap_err();
        assert_eq!(err, SimError::BranchLimit(4));
    }

    #[test]
    fn extract_phase_reads_relative_phases() {
        let reference = StateVector::basis(3, 5).unwrap();
        let ident = extract_phase(&reference, 5, &reference).unwrap();
        assert_eq!(ident, 0.0);

        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[5] = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let rotated = StateVector::from_amplitudes(amps).unwrap();
        let phase = extract_phase(&rotated, 5, &reference).unwrap();
        assert!((phase - std::f64::consts::PI / 3.0).abs() < 1e-12);

        assert!(matches!(
            extract_phase(&rotated, 0, &reference),
            Err(SimError::ZeroAmplitude(0))
        ));
    }

    #[test]
    fn and_compute_matches_the_truth_table() {
        for input in 0..4usize {
            let mut c = circuit(3);
            if input & 1 != 0 {
                c.push(Gate::X(q(0)));
            }
            if input & 2 != 0 {
                c.push(Gate::X(q(1)));
            }
            c.push(Gate::AndCompute { a: q(0), b: q(1), out: q(2) });
            let run = simulate(&c, 0usize, 0).unwrap();
            let expected = input | (usize::from(input == 3) << 2);
            assert!(
                (run.state.amp(expected).norm() - 1.0).abs() < 1e-12,
                "input {input}: expected basis {expected}"
            );
            // No residual phase on any classical input.
            assert!((run.state.amp(expected) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn and_uncompute_restores_superpositions_on_both_branches() {
        let mut prep = circuit(3);
        prep.push(Gate::H(q(0)));
        prep.push(Gate::T(q(0)));
        prep.push(Gate::H(q(1)));
        prep.push(Gate::S(q(1)));
        let before = simulate(&prep, 0usize, 0).unwrap().state;

        let mut c = circuit(3);
        c.push(Gate::H(q(0)));
        c.push(Gate::T(q(0)));
        c.push(Gate::H(q(1)));
        c.push(Gate::S(q(1)));
        c.push(Gate::AndCompute { a: q(0), b: q(1), out: q(2) });
        c.and_uncompute(q(0), q(1), q(2));
        let branches = simulate_all_branches(&c, 0usize, 8).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert!(
                b.state.fidelity(&before) > 1.0 - 1e-12,
                "branch {:?} does not restore the input",
                b.outcomes
            );
        }
    }

    #[test]
    fn measure_x_collapses_to_the_reported_eigenstate() {
        let mut c = circuit(1);
        let run = simulate(&c, 0usize, 3).unwrap();
        assert_eq!(run.record.len(), 0);
        c.measure_x(q(0));
        let branches = simulate_all_branches(&c, 0usize, 4).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            let sign = if b.outcomes[0] { -1.0 } else { 1.0 };
            let expect = StateVector::from_amplitudes(vec![
                Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                Complex64::new(sign * std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ])
            .unwrap();
            assert!(b.state.fidelity(&expect) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn rz_plus_state_matches_a_simulated_preparation() {
        let theta = 0.913;
        let mut c = circuit(1);
        c.push(Gate::H(q(0)));
        c.push(Gate::Rz { target: q(0), angle: theta, kind: RotationKind::Unspecified });
        let run = simulate(&c, 0usize, 0).unwrap();
        let expected = rz_plus_state(theta);
        assert!((run.state.amp(0) - expected[0]).norm() < 1e-12);
        assert!((run.state.amp(1) - expected[1]).norm() < 1e-12);
    }
}
