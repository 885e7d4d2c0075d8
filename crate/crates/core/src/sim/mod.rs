//! Dense statevector simulator.
//!
//! Qubit `q` of an `n`-qubit state is bit `q` of the basis index. Registers
//! occupy contiguous qubit ranges and are little-endian: the register value is
//! `sum_t bit(offset + t) << t`.

mod circuit;
mod gate;
mod layout;
mod state;

pub use circuit::{decomposed_cost, Circuit, CircuitRecord, CircuitStats, RoutineStats};
pub use gate::{Control, Gate, GateKind, GateRecord, Routine};
pub use layout::{ceil_log2, Register, RegisterLayout};
pub use state::{Projection, StateVector, MAX_QUBITS};
