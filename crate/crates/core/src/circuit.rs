//! Gate-level circuit representation with mid-circuit measurement and
//! classically-conditioned corrections.
//!
//! Angles are plain `f64` radians and stay data: an `Rz` carries a
//! [`RotationKind`] describing how it would be realised fault-tolerantly
//! (Clifford+T synthesis or resource-state injection), which the depth and
//! T-count accounting consume. `Rz(a)` follows the `diag(e^{-ia/2}, e^{ia/2})`
//! convention.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("register {0:?} declared twice")]
    DuplicateRegister(String),
    #[error("register {0:?} has size zero")]
    EmptyRegister(String),
    #[error("unknown qubit {0}")]
    UnknownQubit(QubitId),
    #[error("circuit is invalid: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("rotation on {0} has no declared synthesis method")]
    UnspecifiedRotation(QubitId),
}

/// A named qubit: `register[index]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitId {
    pub register: String,
    pub index: u32,
}

impl QubitId {
    pub fn new(register: impl Into<String>, index: u32) -> Self {
        Self { register: register.into(), index }
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.register, self.index)
    }
}

/// Identifier of one classical measurement outcome.
pub type RecordId = usize;

/// How an arbitrary-angle rotation is realised at the fault-tolerant level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationKind {
    /// No method chosen; depth queries reject these.
    Unspecified,
    /// Clifford+T synthesis in place: depth contribution `rot_T`.
    Synthesized,
    /// Teleportation of a prepared resource state: depth contribution 1.
    Injected,
}

/// Role tag for multi-target CNOTs so the measurement-based lowering knows
/// whether the targets are fresh copies (fan-out) or copies being returned
/// (fan-in).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FanRole {
    FanOut,
    FanIn,
}

/// Classically-conditioned correction applied when the parity of the
/// referenced measurement records is odd.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    X(QubitId),
    Z(QubitId),
    Cz(QubitId, QubitId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(QubitId),
    X(QubitId),
    Z(QubitId),
    S(QubitId),
    Sdg(QubitId),
    T(QubitId),
    Tdg(QubitId),
    /// One control, one or more targets. Multi-target CNOTs carry a fan role
    /// when they implement register fan-out/fan-in.
    Cnot {
        control: QubitId,
        targets: Vec<QubitId>,
        role: Option<FanRole>,
    },
    /// Multi-controlled X with per-control polarity (`true` = control on 1).
    Mcx {
        controls: Vec<(QubitId, bool)>,
        target: QubitId,
    },
    Toffoli {
        controls: [QubitId; 2],
        target: QubitId,
    },
    Rz {
        target: QubitId,
        angle: f64,
        kind: RotationKind,
    },
    /// Writes `a AND b` into a fresh |0> qubit using four T states.
    AndCompute {
        a: QubitId,
        b: QubitId,
        out: QubitId,
    },
    /// Measurement-based inverse of [`Gate::AndCompute`]; costs no T states.
    AndUncompute {
        a: QubitId,
        b: QubitId,
        out: QubitId,
        record: RecordId,
    },
    MeasureZ {
        target: QubitId,
        record: RecordId,
    },
    MeasureX {
        target: QubitId,
        record: RecordId,
    },
    Conditioned {
        parity_of: Vec<RecordId>,
        op: Correction,
    },
}

impl Gate {
    /// All qubits the gate touches.
    pub fn operands(&self) -> Vec<&QubitId> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) | Gate::S(q) | Gate::Sdg(q) | Gate::T(q)
            | Gate::Tdg(q) => vec![q],
            Gate::Cnot { control, targets, .. } => {
                let mut ops = vec![control];
                ops.extend(targets.iter());
                ops
            }
            Gate::Mcx { controls, target } => {
                let mut ops: Vec<&QubitId> = controls.iter().map(|(q, _)| q).collect();
                ops.push(target);
                ops
            }
            Gate::Toffoli { controls, target } => vec![&controls[0], &controls[1], target],
            Gate::Rz { target, .. } => vec![target],
            Gate::AndCompute { a, b, out } | Gate::AndUncompute { a, b, out, .. } => {
                vec![a, b, out]
            }
            Gate::MeasureZ { target, .. } | Gate::MeasureX { target, .. } => vec![target],
            Gate::Conditioned { op, .. } => match op {
                Correction::X(q) | Correction::Z(q) => vec![q],
                Correction::Cz(a, b) => vec![a, b],
            },
        }
    }

    /// Record this gate produces, if it measures.
    pub fn produced_record(&self) -> Option<RecordId> {
        match self {
            Gate::MeasureZ { record, .. }
            | Gate::MeasureX { record, .. }
            | Gate::AndUncompute { record, .. } => Some(*record),
            _ => None,
        }
    }

    /// Records this gate reads.
    pub fn consumed_records(&self) -> &[RecordId] {
        match self {
            Gate::Conditioned { parity_of, .. } => parity_of,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub size: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UndeclaredQubit { gate: usize, qubit: QubitId },
    RepeatedOperand { gate: usize, qubit: QubitId },
    RecordBeforeMeasurement { gate: usize, record: RecordId },
    RecordReissued { gate: usize, record: RecordId },
    UnmatchedAndUncompute { gate: usize },
}

/// An ordered gate list over declared registers plus a classical record
/// table. Construction is additive; circuits are treated as immutable once
/// built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    registers: Vec<Register>,
    gates: Vec<Gate>,
    records: usize,
    /// Constant phase `e^{i c}` accumulated by the construction relative to
    /// its idealised action; fixed per circuit, independent of the input.
    #[serde(default)]
    global_phase: f64,
}

impl Default for Circuit {
    fn default() -> Self {
        Self::new()
    }
}

impl Circuit {
    pub fn new() -> Self {
        Self { registers: Vec::new(), gates: Vec::new(), records: 0, global_phase: 0.0 }
    }

    pub fn add_register(
        &mut self,
        name: impl Into<String>,
        size: u32,
    ) -> Result<(), CircuitError> {
        let name = name.into();
        if size == 0 {
            return Err(CircuitError::EmptyRegister(name));
        }
        if self.registers.iter().any(|r| r.name == name) {
            return Err(CircuitError::DuplicateRegister(name));
        }
        self.registers.push(Register { name, size });
        Ok(())
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn record_count(&self) -> usize {
        self.records
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn set_global_phase(&mut self, phase: f64) {
        self.global_phase = phase;
    }

    /// Total declared qubits.
    pub fn width(&self) -> u32 {
        self.registers.iter().map(|r| r.size).sum()
    }

    /// Flat index of a qubit in the simulator layout: registers in
    /// declaration order, qubit `i` of a register at offset `i`
    /// (little-endian within the register).
    pub fn flat_index(&self, q: &QubitId) -> Result<usize, CircuitError> {
        let mut offset = 0usize;
        for reg in &self.registers {
            if reg.name == q.register {
                if q.index < reg.size {
                    return Ok(offset + q.index as usize);
                }
                return Err(CircuitError::UnknownQubit(q.clone()));
            }
            offset += reg.size as usize;
        }
        Err(CircuitError::UnknownQubit(q.clone()))
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    /// Appends a Z-basis measurement, minting its record id.
    pub fn measure_z(&mut self, target: QubitId) -> RecordId {
        let record = self.records;
        self.records += 1;
        self.gates.push(Gate::MeasureZ { target, record });
        record
    }

    /// Appends an X-basis measurement, minting its record id.
    pub fn measure_x(&mut self, target: QubitId) -> RecordId {
        let record = self.records;
        self.records += 1;
        self.gates.push(Gate::MeasureX { target, record });
        record
    }

    /// Appends a measurement-based AND uncomputation, minting its record id.
    pub fn and_uncompute(&mut self, a: QubitId, b: QubitId, out: QubitId) -> RecordId {
        let record = self.records;
        self.records += 1;
        self.gates.push(Gate::AndUncompute { a, b, out, record });
        record
    }

    /// Checks every structural invariant, collecting all violations.
    pub fn check(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut measured: Vec<bool> = vec![false; self.records];
        let mut and_targets: HashMap<QubitId, (QubitId, QubitId)> = HashMap::new();

        for (i, gate) in self.gates.iter().enumerate() {
            let operands = gate.operands();
            for q in &operands {
                if self.flat_index(q).is_err() {
                    violations.push(Violation::UndeclaredQubit { gate: i, qubit: (*q).clone() });
                }
            }
            for (a, qa) in operands.iter().enumerate() {
                if operands[..a].contains(qa) {
                    violations.push(Violation::RepeatedOperand { gate: i, qubit: (*qa).clone() });
                }
            }
            for &r in gate.consumed_records() {
                if r >= measured.len() || !measured[r] {
                    violations.push(Violation::RecordBeforeMeasurement { gate: i, record: r });
                }
            }
            if let Some(r) = gate.produced_record() {
                if r >= measured.len() || measured[r] {
                    violations.push(Violation::RecordReissued { gate: i, record: r });
                } else {
                    measured[r] = true;
                }
            }
            match gate {
                Gate::AndCompute { a, b, out } => {
                    and_targets.insert(out.clone(), (a.clone(), b.clone()));
                }
                Gate::AndUncompute { a, b, out, .. } => {
                    match and_targets.remove(out) {
                        Some((ca, cb)) if ca == *a && cb == *b => {}
                        _ => violations.push(Violation::UnmatchedAndUncompute { gate: i }),
                    }
                }
                _ => {}
            }
        }
        violations
    }

    /// [`Self::check`] as a result.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let violations = self.check();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CircuitError::Invalid(violations))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&WireCircuit::from(self)).expect("circuit serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        let wire: WireCircuit = serde_json::from_str(json)?;
        Ok(wire.into())
    }
}

/// Stable on-disk schema: `{registers, gates:[{kind, operands, params,
/// records}], global_phase}`.
#[derive(Serialize, Deserialize)]
struct WireCircuit {
    registers: Vec<Register>,
    gates: Vec<WireGate>,
    global_phase: f64,
}

#[derive(Serialize, Deserialize)]
struct WireGate {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    operands: Vec<QubitId>,
    #[serde(default, skip_serializing_if = "WireParams::is_empty")]
    params: WireParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    records: Vec<RecordId>,
}

#[derive(Default, Serialize, Deserialize)]
struct WireParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    synthesis: Option<RotationKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    role: Option<FanRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    polarity: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    correction: Option<String>,
}

impl WireParams {
    fn is_empty(&self) -> bool {
        self.angle.is_none()
            && self.synthesis.is_none()
            && self.role.is_none()
            && self.polarity.is_none()
            && self.correction.is_none()
    }
}

impl From<&Circuit> for WireCircuit {
    fn from(c: &Circuit) -> Self {
        let gates = c.gates.iter().map(wire_gate).collect();
        WireCircuit { registers: c.registers.clone(), gates, global_phase: c.global_phase }
    }
}

fn wire_gate(gate: &Gate) -> WireGate {
    let mut wire = WireGate {
        kind: String::new(),
        operands: gate.operands().into_iter().cloned().collect(),
        params: WireParams::default(),
        records: Vec::new(),
    };
    if let Some(r) = gate.produced_record() {
        wire.records.push(r);
    }
    wire.records.extend(gate.consumed_records());
    wire.kind = match gate {
        Gate::H(_) => "H",
        Gate::X(_) => "X",
        Gate::Z(_) => "Z",
        Gate::S(_) => "S",
        Gate::Sdg(_) => "Sdg",
        Gate::T(_) => "T",
        Gate::Tdg(_) => "Tdg",
        Gate::Cnot { role, .. } => {
            wire.params.role = *role;
            "CNOT"
        }
        Gate::Mcx { controls, .. } => {
            wire.params.polarity = Some(controls.iter().map(|&(_, p)| p).collect());
            "MCX"
        }
        Gate::Toffoli { .. } => "Toffoli",
        Gate::Rz { angle, kind, .. } => {
            wire.params.angle = Some(*angle);
            wire.params.synthesis = Some(*kind);
            "Rz"
        }
        Gate::AndCompute { .. } => "AndCompute",
        Gate::AndUncompute { .. } => "AndUncompute",
        Gate::MeasureZ { .. } => "MeasureZ",
        Gate::MeasureX { .. } => "MeasureX",
        Gate::Conditioned { op, .. } => {
            wire.params.correction = Some(
                match op {
                    Correction::X(_) => "X",
                    Correction::Z(_) => "Z",
                    Correction::Cz(..) => "CZ",
                }
                .to_string(),
            );
            "Conditioned"
        }
    }
    .to_string();
    wire
}

impl From<WireCircuit> for Circuit {
    fn from(wire: WireCircuit) -> Self {
        let mut records = 0usize;
        let gates: Vec<Gate> = wire.gates.into_iter().map(|g| unwire_gate(g, &mut records)).collect();
        Circuit { registers: wire.registers, gates, records, global_phase: wire.global_phase }
    }
}

fn unwire_gate(wire: WireGate, records: &mut usize) -> Gate {
    let q = |i: usize| wire.operands[i].clone();
    let bump = |records: &mut usize, id: RecordId| {
        *records = (*records).max(id + 1);
        id
    };
    match wire.kind.as_str() {
        "H" => Gate::H(q(0)),
        "X" => Gate::X(q(0)),
        "Z" => Gate::Z(q(0)),
        "S" => Gate::S(q(0)),
        "Sdg" => Gate::Sdg(q(0)),
        "T" => Gate::T(q(0)),
        "Tdg" => Gate::Tdg(q(0)),
        "CNOT" => Gate::Cnot {
            control: q(0),
            targets: wire.operands[1..].to_vec(),
            role: wire.params.role,
        },
        "MCX" => {
            let polarity = wire.params.polarity.unwrap_or_default();
            let ctrl_count = wire.operands.len() - 1;
            Gate::Mcx {
                controls: (0..ctrl_count)
                    .map(|i| (q(i), polarity.get(i).copied().unwrap_or(true)))
                    .collect(),
                target: q(ctrl_count),
            }
        }
        "Toffoli" => Gate::Toffoli { controls: [q(0), q(1)], target: q(2) },
        "Rz" => Gate::Rz {
            target: q(0),
            angle: wire.params.angle.unwrap_or(0.0),
            kind: wire.params.synthesis.unwrap_or(RotationKind::Unspecified),
        },
        "AndCompute" => Gate::AndCompute { a: q(0), b: q(1), out: q(2) },
        "AndUncompute" => Gate::AndUncompute {
            a: q(0),
            b: q(1),
            out: q(2),
            record: bump(records, wire.records[0]),
        },
        "MeasureZ" => Gate::MeasureZ { target: q(0), record: bump(records, wire.records[0]) },
        "MeasureX" => Gate::MeasureX { target: q(0), record: bump(records, wire.records[0]) },
        "Conditioned" => {
            let op = match wire.params.correction.as_deref() {
                Some("Z") => Correction::Z(q(0)),
                Some("CZ") => Correction::Cz(q(0), q(1)),
                _ => Correction::X(q(0)),
            };
            Gate::Conditioned { parity_of: wire.records, op }
        }
        other => panic!("unknown gate kind in circuit JSON: {other}"),
    }
}

// ---------------------------------------------------------------------------
// Depth and T accounting
// ---------------------------------------------------------------------------

/// Parameters of the measurement-depth metric: Clifford gates are free and
/// every measurement or injection event costs one layer.
#[derive(Debug, Clone, Copy)]
pub struct DepthModel {
    /// Depth of one synthesized rotation (its T-depth), kept fractional.
    pub rot_t: f64,
}

impl Circuit {
    /// Measurement depth: gates are scheduled greedily on per-qubit (and
    /// per-record) timelines; each gate contributes its layer count. The
    /// result is rounded half-away-from-zero.
    pub fn measurement_depth(&self, model: &DepthModel) -> Result<u64, CircuitError> {
        Ok(self.measurement_depth_raw(model)?.round() as u64)
    }

    /// Unrounded measurement depth.
    pub fn measurement_depth_raw(&self, model: &DepthModel) -> Result<f64, CircuitError> {
        let mut qubit_ready: HashMap<QubitId, f64> = HashMap::new();
        let mut record_ready: Vec<f64> = vec![0.0; self.records];
        let mut total: f64 = 0.0;
        for gate in &self.gates {
            let duration = gate_depth(gate, model)?;
            let mut start: f64 = 0.0;
            for q in gate.operands() {
                start = start.max(qubit_ready.get(q).copied().unwrap_or(0.0));
            }
            for &r in gate.consumed_records() {
                start = start.max(record_ready.get(r).copied().unwrap_or(0.0));
            }
            let end = start + duration;
            for q in gate.operands() {
                qubit_ready.insert(q.clone(), end);
            }
            if let Some(r) = gate.produced_record() {
                if r < record_ready.len() {
                    record_ready[r] = end;
                }
            }
            total = total.max(end);
        }
        Ok(total)
    }

    /// Discrete T-state census of the circuit. Synthesized and injected
    /// rotations are counted as events; their T price depends on the target
    /// accuracy and is applied by the cost model.
    pub fn t_census(&self) -> TCensus {
        let mut census = TCensus::default();
        for gate in &self.gates {
            match gate {
                Gate::T(_) | Gate::Tdg(_) => census.t_gates += 1,
                Gate::Toffoli { .. } => census.toffoli += 1,
                Gate::Mcx { controls, .. } => {
                    census.mcx_t += (4 * controls.len()).saturating_sub(4) as u64;
                }
                Gate::AndCompute { .. } => census.and_computes += 1,
                Gate::Rz { kind: RotationKind::Synthesized, .. } => {
                    census.synthesized_rotations += 1;
                }
                Gate::Rz { kind: RotationKind::Injected, .. } => {
                    census.injected_rotations += 1;
                }
                _ => {}
            }
        }
        census
    }
}

/// Layer contribution of one gate under the measurement-depth metric.
fn gate_depth(gate: &Gate, model: &DepthModel) -> Result<f64, CircuitError> {
    Ok(match gate {
        Gate::H(_) | Gate::X(_) | Gate::Z(_) | Gate::S(_) | Gate::Sdg(_) => 0.0,
        Gate::Cnot { .. } | Gate::Conditioned { .. } => 0.0,
        Gate::T(_) | Gate::Tdg(_) => 1.0,
        Gate::Toffoli { .. } => 1.0,
        Gate::Mcx { controls, .. } => {
            if controls.len() <= 1 {
                0.0
            } else {
                crate::segment::ceil_log2(controls.len() as u64) as f64
            }
        }
        Gate::Rz { target, kind, .. } => match kind {
            RotationKind::Synthesized => model.rot_t,
            RotationKind::Injected => 1.0,
            RotationKind::Unspecified => {
                return Err(CircuitError::UnspecifiedRotation(target.clone()))
            }
        },
        Gate::AndCompute { .. } | Gate::AndUncompute { .. } => 1.0,
        Gate::MeasureZ { .. } | Gate::MeasureX { .. } => 1.0,
    })
}

/// Discrete T-resource counts of a circuit.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct TCensus {
    /// Explicit T / T-dagger gates.
    pub t_gates: u64,
    pub toffoli: u64,
    /// T cost of multi-controlled X gates at 4(l-1) per l-controlled gate.
    pub mcx_t: u64,
    pub and_computes: u64,
    pub synthesized_rotations: u64,
    pub injected_rotations: u64,
}

impl TCensus {
    /// All T states except rotation synthesis/injection.
    pub fn discrete_t(&self) -> u64 {
        self.t_gates + 4 * self.toffoli + self.mcx_t + 4 * self.and_computes
    }

    /// Full T count once rotation events are priced at `rot_t` each
    /// (injected rotations consume one synthesized state per event).
    pub fn total_t(&self, rot_t: f64) -> f64 {
        self.discrete_t() as f64
            + (self.synthesized_rotations + self.injected_rotations) as f64 * rot_t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(reg: &str, i: u32) -> QubitId {
        QubitId::new(reg, i)
    }

    fn three_qubit_circuit() -> Circuit {
        let mut c = Circuit::new();
        c.add_register("q", 3).unwrap();
        c
    }

    #[test]
    fn width_sums_register_sizes() {
        let mut c = three_qubit_circuit();
        assert_eq!(c.width(), 3);
        c.add_register("anc", 4).unwrap();
        assert_eq!(c.width(), 7);
    }

    #[test]
    fn flat_index_follows_declaration_order() {
        let mut c = three_qubit_circuit();
        c.add_register("anc", 2).unwrap();
        assert_eq!(c.flat_index(&q("q", 2)).unwrap(), 2);
        assert_eq!(c.flat_index(&q("anc", 0)).unwrap(), 3);
        assert!(c.flat_index(&q("anc", 2)).is_err());
        assert!(c.flat_index(&q("none", 0)).is_err());
    }

    #[test]
    fn undeclared_qubit_is_reported() {
        let mut c = three_qubit_circuit();
        c.push(Gate::H(q("ghost", 0)));
        let violations = c.check();
        assert!(matches!(violations[0], Violation::UndeclaredQubit { .. }));
    }

    #[test]
    fn classical_control_must_follow_its_measurement() {
        let mut c = three_qubit_circuit();
        c.push(Gate::Conditioned { parity_of: vec![0], op: Correction::X(q("q", 0)) });
        c.measure_z(q("q", 0));
        let violations = c.check();
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::RecordBeforeMeasurement { record: 0, .. })));

        let mut ok = three_qubit_circuit();
        let r = ok.measure_z(q("q", 0));
        ok.push(Gate::Conditioned { parity_of: vec![r], op: Correction::X(q("q", 1)) });
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn and_uncompute_needs_a_matching_compute() {
        let mut c = three_qubit_circuit();
        c.and_uncompute(q("q", 0), q("q", 1), q("q", 2));
        assert!(c.check().iter().any(|v| matches!(v, Violation::UnmatchedAndUncompute { .. })));

        let mut ok = three_qubit_circuit();
        ok.push(Gate::AndCompute { a: q("q", 0), b: q("q", 1), out: q("q", 2) });
        ok.and_uncompute(q("q", 0), q("q", 1), q("q", 2));
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn repeated_operand_is_reported() {
        let mut c = three_qubit_circuit();
        c.push(Gate::Cnot { control: q("q", 0), targets: vec![q("q", 0)], role: None });
        assert!(c.check().iter().any(|v| matches!(v, Violation::RepeatedOperand { .. })));
    }

    #[test]
    fn json_round_trips_and_is_stable() {
        let mut c = three_qubit_circuit();
        c.push(Gate::H(q("q", 0)));
        c.push(Gate::Mcx {
            controls: vec![(q("q", 0), true), (q("q", 1), false)],
            target: q("q", 2),
        });
        c.push(Gate::Rz { target: q("q", 1), angle: 0.25, kind: RotationKind::Synthesized });
        let r = c.measure_z(q("q", 2));
        c.push(Gate::Conditioned { parity_of: vec![r], op: Correction::Cz(q("q", 0), q("q", 1)) });

        let json = c.to_json();
        let back = Circuit::from_json(&json).unwrap();
        assert_eq!(c, back);
        assert_eq!(json, back.to_json());
    }

    #[test]
    fn depth_of_a_single_measurement_is_one() {
        let mut c = three_qubit_circuit();
        c.measure_z(q("q", 0));
        assert_eq!(c.measurement_depth(&DepthModel { rot_t: 20.0 }).unwrap(), 1);
    }

    #[test]
    fn and_compute_then_uncompute_costs_two_layers() {
        let mut c = three_qubit_circuit();
        c.push(Gate::AndCompute { a: q("q", 0), b: q("q", 1), out: q("q", 2) });
        c.and_uncompute(q("q", 0), q("q", 1), q("q", 2));
        assert_eq!(c.measurement_depth(&DepthModel { rot_t: 20.0 }).unwrap(), 2);
    }

    #[test]
    fn mcx_depth_is_log_in_the_control_count() {
        let mut c = Circuit::new();
        c.add_register("q", 7).unwrap();
        c.push(Gate::Mcx {
            controls: (0..6).map(|i| (q("q", i), true)).collect(),
            target: q("q", 6),
        });
        assert_eq!(c.measurement_depth(&DepthModel { rot_t: 20.0 }).unwrap(), 3);
    }

    #[test]
    fn disjoint_measurements_share_a_layer() {
        let mut c = three_qubit_circuit();
        c.measure_z(q("q", 0));
        c.measure_z(q("q", 1));
        c.measure_z(q("q", 2));
        assert_eq!(c.measurement_depth(&DepthModel { rot_t: 20.0 }).unwrap(), 1);
    }

    #[test]
    fn unannotated_rotation_is_a_contract_error() {
        let mut c = three_qubit_circuit();
        c.push(Gate::Rz { target: q("q", 0), angle: 0.7, kind: RotationKind::Unspecified });
        let err = c.measurement_depth(&DepthModel { rot_t: 20.0 }).unwrap_err();
        assert!(matches!(err, CircuitError::UnspecifiedRotation(_)));
    }

    #[test]
    fn census_counts_t_sources() {
        let mut c = Circuit::new();
        c.add_register("q", 8).unwrap();
        c.push(Gate::T(q("q", 0)));
        c.push(Gate::Tdg(q("q", 1)));
        c.push(Gate::Toffoli { controls: [q("q", 0), q("q", 1)], target: q("q", 2) });
        c.push(Gate::Mcx {
            controls: (0..6).map(|i| (q("q", i), true)).collect(),
            target: q("q", 6),
        });
        c.push(Gate::AndCompute { a: q("q", 3), b: q("q", 4), out: q("q", 7) });
        c.push(Gate::Rz { target: q("q", 5), angle: 1.0, kind: RotationKind::Synthesized });
        let census = c.t_census();
        assert_eq!(census.t_gates, 2);
        assert_eq!(census.toffoli, 1);
        assert_eq!(census.mcx_t, 20);
        assert_eq!(census.and_computes, 1);
        assert_eq!(census.synthesized_rotations, 1);
        assert_eq!(census.discrete_t(), 2 + 4 + 20 + 4);
        assert!((census.total_t(10.0) - (30.0 + 10.0)).abs() < 1e-12);
    }
}
