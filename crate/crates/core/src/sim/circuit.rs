use std::collections::BTreeMap;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::gate::{Control, Gate, GateKind, GateRecord, Routine};
use crate::error::{QusoError, Result};

/// Ordered gate list over a fixed number of qubits. Gates apply first to last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Self {
        Self { num_qubits, gates }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    /// Appends every gate of `other`, which must not be wider than `self`.
    pub fn append(&mut self, other: &Circuit) -> &mut Self {
        debug_assert!(other.num_qubits <= self.num_qubits);
        self.gates.extend_from_slice(&other.gates);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            g.validate(self.num_qubits).map_err(|e| {
                QusoError::InvalidArgument(format!("gate {i} ({}): {e}", g.kind.name()))
            })?;
        }
        Ok(())
    }

    /// Adds `controls` to every gate.
    pub fn controlled(&self, controls: &[Control]) -> Self {
        Self {
            num_qubits: self.num_qubits,
            gates: self
                .gates
                .iter()
                .map(|g| g.clone().with_controls(controls.iter().copied()))
                .collect(),
        }
    }

    /// The inverse circuit: reversed order, each gate inverted.
    pub fn adjoint(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Relabels the routine of every gate.
    pub fn tagged(mut self, routine: Routine) -> Self {
        for g in &mut self.gates {
            g.routine = routine;
        }
        self
    }

    pub fn stats(&self) -> CircuitStats {
        let mut per_routine: BTreeMap<String, RoutineStats> = BTreeMap::new();
        let mut level = vec![0usize; self.num_qubits];
        let mut depth = 0;
        let mut decomposed = 0u64;
        for g in &self.gates {
            let cost = decomposed_cost(g);
            decomposed += cost;
            let entry = per_routine.entry(g.routine.name().to_string()).or_default();
            entry.gates += 1;
            entry.decomposed += cost;

            let qubits = g
                .targets
                .iter()
                .copied()
                .chain(g.controls.iter().map(|c| c.qubit));
            let start = qubits.clone().map(|q| level[q]).max();
            if let Some(start) = start {
                let layer = start + 1;
                for q in qubits {
                    level[q] = layer;
                }
                depth = depth.max(layer);
            }
        }
        CircuitStats {
            qubits: self.num_qubits,
            gates: self.gates.len() as u64,
            depth: depth as u64,
            decomposed,
            per_routine,
        }
    }

    pub fn to_records(&self) -> CircuitRecord {
        CircuitRecord {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().map(Gate::to_record).collect(),
        }
    }

    pub fn from_records(rec: &CircuitRecord) -> Result<Self> {
        let gates = rec
            .gates
            .iter()
            .map(Gate::from_record)
            .collect::<Result<Vec<_>>>()?;
        let c = Self::from_gates(rec.num_qubits, gates);
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_records())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_records(&serde_json::from_str(s)?)
    }
}

impl Extend<Gate> for Circuit {
    fn extend<I: IntoIterator<Item = Gate>>(&mut self, iter: I) {
        self.gates.extend(iter);
    }
}

/// Serialized circuit: a qubit count and a flat gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub num_qubits: usize,
    pub gates: Vec<GateRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutineStats {
    pub gates: u64,
    pub decomposed: u64,
}

/// Resource counts of a circuit.
///
/// `gates` counts simulator operations; `decomposed` is an estimate in
/// one- and two-qubit gates using [`decomposed_cost`]. `depth` comes from
/// greedy layering and is not additive under concatenation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub qubits: usize,
    pub gates: u64,
    pub depth: u64,
    pub decomposed: u64,
    pub per_routine: BTreeMap<String, RoutineStats>,
}

impl Add for CircuitStats {
    type Output = CircuitStats;

    /// Counts add; depth adds as the serial upper bound.
    fn add(mut self, rhs: CircuitStats) -> CircuitStats {
        self.qubits = self.qubits.max(rhs.qubits);
        self.gates += rhs.gates;
        self.depth += rhs.depth;
        self.decomposed += rhs.decomposed;
        for (k, v) in rhs.per_routine {
            let e = self.per_routine.entry(k).or_default();
            e.gates += v.gates;
            e.decomposed += v.decomposed;
        }
        self
    }
}

/// Estimated one/two-qubit gate count of a single gate.
///
/// Base costs: 1 for single-qubit kinds, 3 for SWAP, `2(t-1)+1` for a
/// `t`-qubit Z-string, `4^t` for dense or diagonal `t`-qubit gates and 0 for
/// an uncontrolled global phase. A base gate with `c` controls costs
/// `base * 3` for `c = 1` and `base * (3 + 30(c-1))` for `c >= 2`, which
/// models a linear-depth multi-controlled decomposition. A controlled global
/// phase is a phase gate on one control with `c - 1` remaining controls.
pub fn decomposed_cost(g: &Gate) -> u64 {
    let t = g.targets.len() as u64;
    let (base, controls) = match g.kind {
        GateKind::GlobalPhase(_) => {
            if g.controls.is_empty() {
                return 0;
            }
            (1, g.controls.len() as u64 - 1)
        }
        GateKind::Swap => (3, g.controls.len() as u64),
        GateKind::MultiZ(_) => (2 * (t - 1) + 1, g.controls.len() as u64),
        GateKind::Diagonal(_) | GateKind::Unitary(_) => (1u64 << (2 * t), g.controls.len() as u64),
        _ => (1, g.controls.len() as u64),
    };
    let factor = match controls {
        0 => 1,
        1 => 3,
        c => 3 + 30 * (c - 1),
    };
    base * factor
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Circuit {
        let mut c = Circuit::new(3);
        for i in 0..n {
            c.push(Gate::h(i % 3).tagged(Routine::Mixer));
            c.push(Gate::cnot(i % 3, (i + 1) % 3));
        }
        c
    }

    #[test]
    fn stats_counts_are_additive() {
        let a = sample(3);
        let b = sample(5);
        let mut ab = a.clone();
        ab.append(&b);
        let sum = a.stats() + b.stats();
        let joint = ab.stats();
        assert_eq!(joint.gates, sum.gates);
        assert_eq!(joint.decomposed, sum.decomposed);
        assert_eq!(joint.per_routine, sum.per_routine);
        assert!(joint.depth <= sum.depth);
    }

    #[test]
    fn depth_of_parallel_gates() {
        let mut c = Circuit::new(3);
        c.push(Gate::h(0)).push(Gate::h(1)).push(Gate::h(2));
        c.push(Gate::global_phase(0.1));
        assert_eq!(c.stats().depth, 1);
        c.push(Gate::cnot(0, 1));
        assert_eq!(c.stats().depth, 2);
    }

    #[test]
    fn decomposition_table() {
        assert_eq!(decomposed_cost(&Gate::x(0)), 1);
        assert_eq!(decomposed_cost(&Gate::cnot(0, 1)), 3);
        let ccx = Gate::x(2).controlled_by(0, true).controlled_by(1, false);
        assert_eq!(decomposed_cost(&ccx), 33);
        assert_eq!(decomposed_cost(&Gate::global_phase(1.0)), 0);
        assert_eq!(decomposed_cost(&Gate::global_phase(1.0).controlled_by(0, true)), 1);
        assert_eq!(decomposed_cost(&Gate::swap(0, 1)), 3);
    }

    #[test]
    fn json_roundtrip_and_adjoint() {
        let mut c = sample(2);
        c.push(Gate::zphase(1, 0.5).controlled_by(0, false));
        let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        let adj = c.adjoint();
        assert_eq!(adj.gates()[0].kind, GateKind::ZPhase(-0.5));
        assert_eq!(adj.len(), c.len());
    }

    #[test]
    fn controlled_adds_to_every_gate() {
        let c = sample(2).controlled(&[Control::zero(2)]);
        assert!(c.gates().iter().all(|g| g.controls.last() == Some(&Control::zero(2))));
    }
}
