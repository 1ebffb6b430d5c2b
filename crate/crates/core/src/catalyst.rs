//! Catalyst rotation circuits: CT blocks, in-circuit and independent
//! catalyst towers, and repeat-until-success rotation injection.
//!
//! A CT block applies `Rz(theta)` to two targets while consuming one
//! `Rz(2 theta)` seed rotation and one logical AND, leaving its catalyst
//! state `Rz(theta)|+>` intact. Towers stack CT blocks so that one seed at
//! angle `2^L theta` fans out into the whole power-of-two family of
//! rotations a rotation block needs. The independent variant points the
//! block outputs at fresh `|+>` qubits, turning the tower into a factory for
//! single-qubit rotation resource states, which are then consumed by gate
//! teleportation with the repeat-until-success (angle-doubling) protocol.

use crate::circuit::{Circuit, CircuitError, Gate, QubitId, RotationKind};
use crate::sim::{simulate, SimError, StateVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CatalystError {
    #[error("a tower with {layers} layers drives at most {max} targets, got {got}")]
    TooManyTargets { layers: u32, max: usize, got: usize },
    #[error("tower wiring needs {want} {what}, got {got}")]
    WiringMismatch { what: &'static str, want: usize, got: usize },
    #[error("towers need at least one layer")]
    NoLayers,
    #[error("resource reservoir exhausted at angle level {level}")]
    ResourceUnderflow { level: u32 },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Where a tower's seed rotation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedSource {
    /// Clifford+T synthesis in place.
    Synthesized,
    /// Teleportation of a prepared resource state.
    ResourceState,
}

impl SeedSource {
    fn rotation_kind(self) -> RotationKind {
        match self {
            SeedSource::Synthesized => RotationKind::Synthesized,
            SeedSource::ResourceState => RotationKind::Injected,
        }
    }
}

/// Qubits of one CT block. `target_a` drives the internal CNOTs; both
/// targets receive `Rz(theta)`. The catalyst must hold `Rz(theta)|+>` and
/// the AND ancilla must be fresh `|0>`.
#[derive(Debug, Clone)]
pub struct CtWiring {
    pub target_a: QubitId,
    pub target_b: QubitId,
    pub catalyst: QubitId,
    pub and_ancilla: QubitId,
}

/// Prepares `Rz(theta)|+>` on a fresh `|0>` qubit. In cost terms this is the
/// one-off catalyst bootstrap, priced as a synthesized rotation.
pub fn prep_catalyst(c: &mut Circuit, qubit: &QubitId, theta: f64) {
    c.push(Gate::H(qubit.clone()));
    c.push(Gate::Rz { target: qubit.clone(), angle: theta, kind: RotationKind::Synthesized });
}

/// Opening half of a CT block: everything before the seed rotation lands on
/// the AND ancilla.
fn ct_open(c: &mut Circuit, w: &CtWiring) {
    c.push(Gate::X(w.catalyst.clone()));
    c.push(Gate::Cnot {
        control: w.target_a.clone(),
        targets: vec![w.target_b.clone(), w.catalyst.clone()],
        role: None,
    });
    c.push(Gate::AndCompute {
        a: w.target_b.clone(),
        b: w.catalyst.clone(),
        out: w.and_ancilla.clone(),
    });
    c.push(Gate::Cnot {
        control: w.target_a.clone(),
        targets: vec![w.and_ancilla.clone()],
        role: None,
    });
}

/// Closing half of a CT block, mirroring [`ct_open`].
fn ct_close(c: &mut Circuit, w: &CtWiring) {
    c.push(Gate::Cnot {
        control: w.target_a.clone(),
        targets: vec![w.and_ancilla.clone()],
        role: None,
    });
    c.and_uncompute(w.target_b.clone(), w.catalyst.clone(), w.and_ancilla.clone());
    c.push(Gate::Cnot { control: w.target_b.clone(), targets: vec![w.catalyst.clone()], role: None });
    c.push(Gate::Cnot {
        control: w.target_a.clone(),
        targets: vec![w.target_b.clone(), w.catalyst.clone()],
        role: None,
    });
    c.push(Gate::X(w.catalyst.clone()));
}

/// Emits a full 1-layer CT block applying `Rz(theta)` to both targets from
/// one `Rz(2 theta)` seed and one logical AND.
pub fn ct_block(c: &mut Circuit, w: &CtWiring, theta: f64, seed: SeedSource) {
    ct_open(c, w);
    c.push(Gate::Rz {
        target: w.and_ancilla.clone(),
        angle: 2.0 * theta,
        kind: seed.rotation_kind(),
    });
    ct_close(c, w);
}

/// Qubit assignment for an in-circuit tower of `L` layers.
///
/// `targets` receives the rotations: entries 0 and 1 get `Rz(theta)` (layer
/// 0 produces two outputs, one of which is usually a spare), entry `i + 1`
/// gets `Rz(2^i theta)`. One catalyst and one AND ancilla per layer.
#[derive(Debug, Clone)]
pub struct TowerWiring {
    pub targets: Vec<QubitId>,
    pub catalysts: Vec<QubitId>,
    pub ancillas: Vec<QubitId>,
}

/// Catalyst angles layer by layer: layer `i` holds `Rz(2^i theta)|+>`.
pub fn catalyst_angles(layers: u32, theta: f64) -> Vec<f64> {
    (0..layers).map(|i| theta * f64::powi(2.0, i as i32)).collect()
}

/// Emits an `L`-layer in-circuit tower: applies `Rz(2^i theta)` to the i-th
/// layer's targets while consuming one seed `Rz(2^L theta)` plus 4 T per
/// layer. Catalysts must already hold their layer states.
pub fn in_circuit_tower(
    c: &mut Circuit,
    w: &TowerWiring,
    layers: u32,
    theta: f64,
    seed: SeedSource,
) -> Result<(), CatalystError> {
    if layers == 0 {
        return Err(CatalystError::NoLayers);
    }
    let max = layers as usize + 1;
    if w.targets.len() > max {
        return Err(CatalystError::TooManyTargets { layers, max, got: w.targets.len() });
    }
    if w.targets.len() != max {
        return Err(CatalystError::WiringMismatch {
            what: "targets",
            want: max,
            got: w.targets.len(),
        });
    }
    if w.catalysts.len() != layers as usize {
        return Err(CatalystError::WiringMismatch {
            what: "catalysts",
            want: layers as usize,
            got: w.catalysts.len(),
        });
    }
    if w.ancillas.len() != layers as usize {
        return Err(CatalystError::WiringMismatch {
            what: "ancillas",
            want: layers as usize,
            got: w.ancillas.len(),
        });
    }

    let wiring_for = |i: usize| CtWiring {
        target_a: if i == 0 { w.targets[0].clone() } else { w.ancillas[i - 1].clone() },
        target_b: if i == 0 { w.targets[1].clone() } else { w.targets[i + 1].clone() },
        catalyst: w.catalysts[i].clone(),
        and_ancilla: w.ancillas[i].clone(),
    };

    for i in 0..layers as usize {
        ct_open(c, &wiring_for(i));
    }
    c.push(Gate::Rz {
        target: w.ancillas[layers as usize - 1].clone(),
        angle: theta * f64::powi(2.0, layers as i32),
        kind: seed.rotation_kind(),
    });
    for i in (0..layers as usize).rev() {
        ct_close(c, &wiring_for(i));
    }
    Ok(())
}

/// One rotation resource state produced by an independent tower: the qubit
/// is left in `Rz(angle)|+>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceState {
    pub qubit: QubitId,
    pub angle: f64,
}

/// A built independent tower: the circuit produces every state in
/// `resources` in a single run.
#[derive(Debug, Clone)]
pub struct IndependentTower {
    pub circuit: Circuit,
    pub resources: Vec<ResourceState>,
}

/// Output species of an `L`-layer independent tower as `(level, count)`
/// pairs: the tower emits `count` resource states at angle `2^level theta`.
///
/// One layer is a bare CT block feeding two `|+>` targets. Deeper towers
/// grow by one spine block at the seed end and one leaf block hanging off
/// it, which yields two states at the lowest level, three one level up, and
/// two at every level after that.
pub fn independent_tower_species(layers: u32) -> Vec<(u32, u64)> {
    match layers {
        0 => Vec::new(),
        1 => vec![(0, 2)],
        2 => vec![(0, 2), (1, 1)],
        _ => {
            let mut species = vec![(0, 2), (1, 3)];
            species.extend((2..layers - 1).map(|level| (level, 2)));
            species
        }
    }
}

/// Builds a standalone `L`-layer independent tower circuit, including the
/// `|+>` payload preparation and the catalyst bootstrap. The tower has
/// `2L - 2` CT blocks for `L >= 2` (one for `L = 1`) and uses `6L - 5`
/// qubits.
pub fn build_independent_tower(
    layers: u32,
    theta: f64,
) -> Result<IndependentTower, CatalystError> {
    if layers == 0 {
        return Err(CatalystError::NoLayers);
    }

    // Block table: the spine runs level 0..L-1; spine block i >= 2 seeds a
    // leaf block at level i-1 instead of a payload.
    struct Block {
        level: u32,
        a: Slot,
        b: Slot,
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Slot {
        Payload(usize),
        SeedOf(usize), // index of the block this slot seeds
    }

    let spine_len = layers as usize;
    let mut blocks: Vec<Block> = Vec::new();
    let mut payloads: Vec<u32> = Vec::new(); // level per payload index
    let payload = |level: u32, payloads: &mut Vec<u32>| {
        payloads.push(level);
        Slot::Payload(payloads.len() - 1)
    };

    for i in 0..spine_len {
        let level = i as u32;
        let (a, b) = if i == 0 {
            (payload(0, &mut payloads), payload(0, &mut payloads))
        } else if i == 1 {
            (Slot::SeedOf(i - 1), payload(1, &mut payloads))
        } else {
            // The leaf this spine block seeds is appended after the spine.
            (Slot::SeedOf(i - 1), Slot::SeedOf(spine_len + i - 2))
        };
        blocks.push(Block { level, a, b });
    }
    for i in 2..spine_len {
        let level = (i - 1) as u32;
        let a = payload(level, &mut payloads);
        let b = payload(level, &mut payloads);
        blocks.push(Block { level, a, b });
    }

    let mut circuit = Circuit::new();
    circuit.add_register("res", payloads.len() as u32)?;
    circuit.add_register("cat", blocks.len() as u32)?;
    circuit.add_register("and", blocks.len() as u32)?;

    let res = |i: usize| QubitId::new("res", i as u32);
    let slot_qubit = |slot: &Slot| match slot {
        Slot::Payload(i) => res(*i),
        Slot::SeedOf(block) => QubitId::new("and", *block as u32),
    };
    let wiring = |i: usize, blocks: &[Block]| CtWiring {
        target_a: slot_qubit(&blocks[i].a),
        target_b: slot_qubit(&blocks[i].b),
        catalyst: QubitId::new("cat", i as u32),
        and_ancilla: QubitId::new("and", i as u32),
    };

    for idx in 0..payloads.len() {
        circuit.push(Gate::H(res(idx)));
    }
    for (i, block) in blocks.iter().enumerate() {
        prep_catalyst(
            &mut circuit,
            &QubitId::new("cat", i as u32),
            theta * f64::powi(2.0, block.level as i32),
        );
    }

    // Nested emission: spine opens outward-in, leaves open just before the
    // spine block that seeds them.
    for i in 0..spine_len {
        if i >= 2 {
            ct_open(&mut circuit, &wiring(spine_len + i - 2, &blocks));
        }
        ct_open(&mut circuit, &wiring(i, &blocks));
    }
    circuit.push(Gate::Rz {
        target: QubitId::new("and", (spine_len - 1) as u32),
        angle: theta * f64::powi(2.0, layers as i32),
        kind: RotationKind::Synthesized,
    });
    for i in (0..spine_len).rev() {
        ct_close(&mut circuit, &wiring(i, &blocks));
        if i >= 2 {
            ct_close(&mut circuit, &wiring(spine_len + i - 2, &blocks));
        }
    }

    let resources = payloads
        .iter()
        .enumerate()
        .map(|(idx, &level)| ResourceState {
            qubit: res(idx),
            angle: theta * f64::powi(2.0, level as i32),
        })
        .collect();
    Ok(IndependentTower { circuit, resources })
}

// ---------------------------------------------------------------------------
// Repeat-until-success injection
// ---------------------------------------------------------------------------

/// Pool of rotation resource states by angle level: slot `k` counts the
/// available `Rz(2^k theta)|+>` states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReservoir {
    counts: Vec<u64>,
}

impl ResourceReservoir {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    /// Default sizing: `headroom` times the expected demand per species,
    /// rounded up (twice the expectation is the usual choice).
    ///
    /// A target at level `l` consumes one state at level `l` always, one at
    /// `l+1` with probability 1/2, and so on; summing over targets gives the
    /// per-species expectation.
    pub fn sized_for(target_levels: &[u32], headroom: f64, max_level: u32) -> Self {
        let mut counts = vec![0u64; max_level as usize + 1];
        for (k, slot) in counts.iter_mut().enumerate() {
            let demand: f64 = target_levels
                .iter()
                .filter(|&&l| l <= k as u32)
                .map(|&l| f64::powi(0.5, (k as u32 - l) as i32))
                .sum();
            *slot = (headroom * demand).ceil() as u64;
        }
        Self { counts }
    }

    pub fn remaining(&self, level: u32) -> u64 {
        self.counts.get(level as usize).copied().unwrap_or(0)
    }

    fn draw(&mut self, level: u32) -> Result<(), CatalystError> {
        match self.counts.get_mut(level as usize) {
            Some(c) if *c > 0 => {
                *c -= 1;
                Ok(())
            }
            _ => Err(CatalystError::ResourceUnderflow { level }),
        }
    }
}

/// One gate-teleportation attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RusAttempt {
    pub attempt: u32,
    /// Injected angle, `2^k * theta_target`.
    pub angle: f64,
    /// Raw measurement outcome; `false` teleports the rotation forward.
    pub outcome: bool,
    pub success: bool,
}

/// Attempt history for one target qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RusTargetTrace {
    pub attempts: Vec<RusAttempt>,
}

impl RusTargetTrace {
    pub fn attempt_count(&self) -> u32 {
        self.attempts.len() as u32
    }
}

/// Trace of a group of repeat-until-success injections performed in
/// parallel attempt layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RusTrace {
    pub targets: Vec<RusTargetTrace>,
    /// Attempt layers consumed: the slowest target's attempt count.
    pub depth: u32,
}

/// Teleports `Rz(theta)` onto `target` (flat qubit index of `state`) by
/// repeat-until-success, doubling the angle after every failure. `resource`
/// is a scratch qubit that must be `|0>` on entry; it is returned to `|0>`.
///
/// Every terminating trace applies exactly `Rz(theta)`: after `k` failures
/// the net applied angle is `-theta (2^k - 1)`, and the succeeding attempt
/// at `2^k theta` closes the telescope.
pub fn rus_inject(
    state: &mut StateVector,
    target: usize,
    resource: usize,
    theta: f64,
    reservoir: &mut ResourceReservoir,
    rng: &mut ChaCha8Rng,
) -> Result<RusTargetTrace, CatalystError> {
    let width = state.qubits();
    let mut attempts = Vec::new();
    let mut level = 0u32;
    loop {
        reservoir.draw(level)?;
        let angle = theta * f64::powi(2.0, level as i32);

        let mut c = Circuit::new();
        c.add_register("q", width)?;
        let t = QubitId::new("q", target as u32);
        let r = QubitId::new("q", resource as u32);
        // Draw the resource state, teleport, then return the scratch qubit
        // to |0>.
        c.push(Gate::H(r.clone()));
        c.push(Gate::Rz { target: r.clone(), angle, kind: RotationKind::Injected });
        c.push(Gate::Cnot { control: t, targets: vec![r.clone()], role: None });
        let record = c.measure_z(r.clone());
        c.push(Gate::Conditioned {
            parity_of: vec![record],
            op: crate::circuit::Correction::X(r),
        });

        let run = simulate(&c, state.clone(), rng.gen())?;
        *state = run.state;
        let outcome = run.record[0];
        let success = !outcome;
        attempts.push(RusAttempt { attempt: attempts.len() as u32 + 1, angle, outcome, success });
        if success {
            return Ok(RusTargetTrace { attempts });
        }
        level += 1;
    }
}

/// Runs [`rus_inject`] for several targets of one state, sharing the
/// reservoir; the trace depth is the maximum attempt count.
pub fn rus_inject_group(
    state: &mut StateVector,
    targets: &[(usize, f64)],
    resource: usize,
    reservoir: &mut ResourceReservoir,
    rng: &mut ChaCha8Rng,
) -> Result<RusTrace, CatalystError> {
    let mut traces = Vec::with_capacity(targets.len());
    let mut depth = 0u32;
    for &(target, theta) in targets {
        let trace = rus_inject(state, target, resource, theta, reservoir, rng)?;
        depth = depth.max(trace.attempt_count());
        traces.push(trace);
    }
    Ok(RusTrace { targets: traces, depth })
}
