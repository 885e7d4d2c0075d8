//! QSVT and linear-solver circuits.

use serde::Serialize;

use super::phases::PhaseSequence;
use super::poly::InversionPolynomial;
use crate::block::{build_ua, prepare_real_amplitudes, LcuPlan};
use crate::error::{QusoError, Result};
use crate::sim::{Circuit, Control, Gate, RegisterLayout, Routine, StateVector};
use crate::thermal::{CostTable, ThermalNetwork};

/// Registers that must be zero for the encoded block.
pub const BLOCK_ANCILLAS: [&str; 3] = ["l", "f", "l'"];

/// `exp(iφ(2Π - I))` with `Π` projecting `l, f, l'` onto zero, via the `q`
/// ancilla: CNOT into `q`, `ZPhase(-φ)` on `q`, CNOT again.
pub fn projector_phase(phi: f64, q: usize, block_ancillas: &[usize]) -> Vec<Gate> {
    let flip = Gate::x(q)
        .with_controls(block_ancillas.iter().map(|&a| Control::zero(a)))
        .tagged(Routine::QsvtPhase);
    vec![
        flip.clone(),
        Gate::zphase(q, -phi).tagged(Routine::QsvtPhase),
        flip,
    ]
}

/// QSVT sequence around `ua`, with Hadamards on `q` so that the
/// `q = l = f = l' = 0` block is the real part of `P` applied to the
/// encoded matrix.
///
/// Time order: `U_A, Π_{φ_d}, U_A†, Π_{φ_{d-1}}, …, U_A, Π_{φ_1}`.
pub fn build_qsvt_circuit(phases: &[f64], ua: &Circuit, layout: &RegisterLayout) -> Result<Circuit> {
    if phases.len() % 2 == 0 {
        return Err(QusoError::InvalidArgument(format!(
            "odd phase count required, got {}",
            phases.len()
        )));
    }
    let q = layout.qubit("q", 0)?;
    let anc = layout.qubits_of(&BLOCK_ANCILLAS)?;
    let ua_dag = ua.adjoint();
    let mut c = Circuit::new(layout.total_qubits());
    c.push(Gate::h(q).tagged(Routine::QsvtPhase));
    for (t, phi) in phases.iter().rev().enumerate() {
        c.append(if t % 2 == 0 { ua } else { &ua_dag });
        c.extend(projector_phase(*phi, q, &anc));
    }
    c.push(Gate::h(q).tagged(Routine::QsvtPhase));
    Ok(c)
}

/// Preparation of `C_B Σ_k Q_k |k>` on `d`.
pub fn build_vb(net: &ThermalNetwork, layout: &RegisterLayout) -> Result<Circuit> {
    let c_b = c_b(net)?;
    let amps: Vec<f64> = net.heat_rates().iter().map(|q| q * c_b).collect();
    let gates = prepare_real_amplitudes(&amps, &layout.qubits("d")?)?;
    let mut c = Circuit::new(layout.total_qubits());
    c.extend(gates.into_iter().map(|g| g.tagged(Routine::StatePrep)));
    Ok(c)
}

/// `(Σ Q_k²)^(-1/2)`.
pub fn c_b(net: &ThermalNetwork) -> Result<f64> {
    let s: f64 = net.heat_rates().iter().map(|q| q * q).sum();
    if s == 0.0 {
        return Err(QusoError::InvalidNetwork("all heat rates are zero".into()));
    }
    Ok(s.powf(-0.5))
}

/// The solver `L = U_φ V_B` and the constants relating its output to `T̃`.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    pub layout: RegisterLayout,
    pub circuit: Circuit,
    pub ua: Circuit,
    pub c_lcu_sq: f64,
    pub c_b: f64,
    pub c_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConstants {
    pub c_lcu_sq: f64,
    pub c_b: f64,
    pub c_p: f64,
    /// `2 C_p C_B / C²`: amplitude per kelvin of `T̃`.
    pub amplitude_per_kelvin: f64,
}

impl LinearSolver {
    /// Builds `L` on a layout with registers `c, q, l, f, l', d` (others such
    /// as `p` are left alone).
    pub fn new(
        net: &ThermalNetwork,
        layout: &RegisterLayout,
        poly: &InversionPolynomial,
        phases: &PhaseSequence,
    ) -> Result<Self> {
        let ua = build_ua(net, layout)?;
        let mut circuit = build_vb(net, layout)?;
        circuit.append(&build_qsvt_circuit(&phases.phases, &ua, layout)?);
        Ok(Self {
            layout: layout.clone(),
            circuit,
            ua,
            c_lcu_sq: LcuPlan::from_network(net).c_lcu_sq(),
            c_b: c_b(net)?,
            c_p: poly.c_p(),
        })
    }

    pub fn constants(&self) -> SolverConstants {
        SolverConstants {
            c_lcu_sq: self.c_lcu_sq,
            c_b: self.c_b,
            c_p: self.c_p,
            amplitude_per_kelvin: 2.0 * self.c_p * self.c_b / self.c_lcu_sq,
        }
    }

    /// Runs `L` with `c` in a basis state, or in uniform superposition when
    /// `config` is `None`.
    pub fn run(&self, config: Option<usize>) -> Result<StateVector> {
        let mut s = match config {
            Some(x) => {
                let idx = self.layout.deposit(0, "c", x)?;
                StateVector::basis(self.layout.clone(), idx)?
            }
            None => {
                let mut s = StateVector::zero(self.layout.clone())?;
                for q in self.layout.qubits("c")? {
                    s.apply(&Gate::h(q))?;
                }
                s
            }
        };
        s.apply_circuit(&self.circuit)?;
        Ok(s)
    }

    /// Amplitudes `c(x)` of `|0>_{qlfl'}|target>_d` for every configuration,
    /// read from one run over the uniform superposition.
    pub fn measured_costs(&self, target: usize) -> Result<CostTable> {
        let m = self.layout.width("c")?;
        let width = self.layout.width("d")?;
        if target >> width != 0 {
            return Err(QusoError::InvalidArgument(format!(
                "target node {target} outside a {width}-qubit data register"
            )));
        }
        let state = self.run(None)?;
        let scale = ((1usize << m) as f64).sqrt();
        let costs = (0..1usize << m)
            .map(|x| Ok(branch_amplitudes(&state, x)?[target] * scale))
            .collect::<Result<Vec<_>>>()?;
        CostTable::new(m, costs)
    }
}

/// Real `d`-amplitudes of the `c = config` branch with every other register
/// at zero.
pub fn branch_amplitudes(state: &StateVector, config: usize) -> Result<Vec<f64>> {
    let layout = state.layout();
    let base = if layout.has("c") {
        layout.deposit(0, "c", config)?
    } else {
        0
    };
    let width = layout.width("d")?;
    (0..1usize << width)
        .map(|k| Ok(state.amplitude(layout.deposit(base, "d", k)?).re))
        .collect()
}

/// Layout `c, q, l, f, l', d` for running the solver alone.
pub fn solver_layout(net: &ThermalNetwork) -> RegisterLayout {
    let full = RegisterLayout::pipeline(net.edge_count(), 0, net.node_count());
    full.without(&["p"]).expect("pipeline layout has p")
}
