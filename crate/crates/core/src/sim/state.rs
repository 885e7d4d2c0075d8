use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use smallvec::SmallVec;

use super::circuit::Circuit;
use super::gate::{Gate, GateKind};
use super::layout::RegisterLayout;
use crate::error::{QusoError, Result};
use crate::C64;

/// Largest state the simulator will allocate (2^28 amplitudes, 4 GiB).
pub const MAX_QUBITS: usize = 28;

/// Complex amplitudes over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<C64>,
}

/// Amplitudes left after fixing some registers to zero, not renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub layout: RegisterLayout,
    pub amplitudes: Vec<C64>,
    /// Squared norm of `amplitudes`.
    pub probability: f64,
}

impl StateVector {
    /// The all-zero basis state.
    pub fn zero(layout: RegisterLayout) -> Result<Self> {
        Self::basis(layout, 0)
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let n = layout.total_qubits();
        if n > MAX_QUBITS {
            return Err(QusoError::ResourceLimit(format!(
                "{n} qubits exceed the {MAX_QUBITS}-qubit simulator limit"
            )));
        }
        let dim = 1usize << n;
        if index >= dim {
            return Err(QusoError::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self> {
        let n = layout.total_qubits();
        if n > MAX_QUBITS || amps.len() != 1usize << n {
            return Err(QusoError::InvalidArgument(format!(
                "{} amplitudes for a {n}-qubit layout",
                amps.len()
            )));
        }
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies one gate after validating it.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits())?;
        apply_gate(&mut self.amps, gate);
        Ok(())
    }

    /// Applies every gate of `circuit` in order. The circuit is validated
    /// up front, so a failing circuit leaves the state untouched.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() > self.num_qubits() {
            return Err(QusoError::InvalidArgument(format!(
                "{}-qubit circuit on a {}-qubit state",
                circuit.num_qubits(),
                self.num_qubits()
            )));
        }
        circuit.validate()?;
        for g in circuit.gates() {
            apply_gate(&mut self.amps, g);
        }
        Ok(())
    }

    /// Keeps the amplitudes whose `registers` are all zero and drops those
    /// registers from the layout.
    pub fn project_zero(&self, registers: &[&str]) -> Result<Projection> {
        let mut mask = 0usize;
        for r in registers {
            for q in self.layout.qubits(r)? {
                mask |= 1 << q;
            }
        }
        let layout = self.layout.without(registers)?;
        let kept: Vec<usize> = (0..self.num_qubits()).filter(|q| mask >> q & 1 == 0).collect();
        let mut amplitudes = Vec::with_capacity(1 << kept.len());
        for r in 0..1usize << kept.len() {
            let mut idx = 0;
            for (bit, &q) in kept.iter().enumerate() {
                idx |= ((r >> bit) & 1) << q;
            }
            amplitudes.push(self.amps[idx]);
        }
        let probability = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Ok(Projection {
            layout,
            amplitudes,
            probability,
        })
    }

    /// Marginal distribution of one register.
    pub fn register_distribution(&self, name: &str) -> Result<Vec<f64>> {
        let r = self.layout.register(name)?;
        let mut probs = vec![0.0; 1 << r.width];
        let mask = (1usize << r.width) - 1;
        for (i, a) in self.amps.iter().enumerate() {
            probs[(i >> r.offset) & mask] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Reduced density matrix of one register, tracing out the rest.
    pub fn reduced_density_matrix(&self, name: &str) -> Result<DMatrix<C64>> {
        let r = self.layout.register(name)?;
        let dim = 1usize << r.width;
        let mask = (dim - 1) << r.offset;
        let rest = self.num_qubits() - r.width;
        let mut rho = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        let rest_positions: Vec<usize> = (0..self.num_qubits())
            .filter(|q| mask >> q & 1 == 0)
            .collect();
        let mut column = vec![C64::new(0.0, 0.0); dim];
        for e in 0..1usize << rest {
            let base = deposit_bits(e, &rest_positions);
            for (a, slot) in column.iter_mut().enumerate() {
                *slot = self.amps[base | (a << r.offset)];
            }
            for a in 0..dim {
                if column[a] == C64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..dim {
                    rho[(a, b)] += column[a] * column[b].conj();
                }
            }
        }
        Ok(rho)
    }

    /// Writes little-endian interleaved `f64` re/im pairs to `path` and the
    /// layout to `path` with a `.json` extension appended.
    pub fn dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
        std::fs::write(path, bytes)?;
        #[derive(Serialize)]
        struct Sidecar<'a> {
            num_qubits: usize,
            encoding: &'static str,
            layout: &'a RegisterLayout,
        }
        let mut sidecar_path = path.as_os_str().to_owned();
        sidecar_path.push(".json");
        let mut f = std::fs::File::create(sidecar_path)?;
        serde_json::to_writer_pretty(
            &mut f,
            &Sidecar {
                num_qubits: self.num_qubits(),
                encoding: "f64le re,im interleaved; qubit q is bit q of the index",
                layout: &self.layout,
            },
        )?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn load_dump(path: impl AsRef<Path>, layout: RegisterLayout) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.len() % 16 != 0 {
            return Err(QusoError::InvalidArgument("truncated statevector dump".into()));
        }
        let amps = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                C64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(layout, amps)
    }
}

/// Spreads the bits of `r` over the listed (ascending) qubit positions.
fn deposit_bits(r: usize, positions: &[usize]) -> usize {
    let mut idx = 0;
    for (bit, &q) in positions.iter().enumerate() {
        idx |= ((r >> bit) & 1) << q;
    }
    idx
}

/// Inserts a zero bit at each (ascending) position.
#[inline]
fn insert_zeros(mut r: usize, sorted: &[usize]) -> usize {
    for &p in sorted {
        let low = r & ((1usize << p) - 1);
        r = ((r >> p) << (p + 1)) | low;
    }
    r
}

/// Calls `f` on every basis index whose `fixed` bits are zero, OR-ed with
/// `value`.
#[inline]
fn for_each_base(n: usize, fixed: &[usize], value: usize, mut f: impl FnMut(usize)) {
    let count = 1usize << (n - fixed.len());
    if fixed.is_empty() {
        for r in 0..count {
            f(r | value);
        }
        return;
    }
    for r in 0..count {
        f(insert_zeros(r, fixed) | value);
    }
}

pub(crate) fn apply_gate(amps: &mut [C64], g: &Gate) {
    let n = amps.len().trailing_zeros() as usize;
    let mut ctrl_value = 0usize;
    let mut ctrl_pos: SmallVec<[usize; 16]> = SmallVec::new();
    for c in &g.controls {
        ctrl_pos.push(c.qubit);
        if c.on {
            ctrl_value |= 1 << c.qubit;
        }
    }

    if g.is_diagonal() {
        let diag = g.diagonal_entries().expect("diagonal gate");
        ctrl_pos.sort_unstable();
        let targets = &g.targets;
        if targets.is_empty() {
            let phase = diag[0];
            for_each_base(n, &ctrl_pos, ctrl_value, |i| amps[i] *= phase);
        } else {
            for_each_base(n, &ctrl_pos, ctrl_value, |i| {
                let mut local = 0;
                for (b, &q) in targets.iter().enumerate() {
                    local |= ((i >> q) & 1) << b;
                }
                amps[i] *= diag[local];
            });
        }
        return;
    }

    let mut fixed = ctrl_pos.clone();
    fixed.extend(g.targets.iter().copied());
    fixed.sort_unstable();

    match (&g.kind, g.targets.len()) {
        (GateKind::X, 1) => {
            let s = 1usize << g.targets[0];
            if fixed.len() == 1 {
                apply_x_fast(amps, g.targets[0]);
            } else {
                for_each_base(n, &fixed, ctrl_value, |i| amps.swap(i, i | s));
            }
        }
        (GateKind::Swap, 2) => {
            let a = 1usize << g.targets[0];
            let b = 1usize << g.targets[1];
            for_each_base(n, &fixed, ctrl_value, |i| amps.swap(i | a, i | b));
        }
        (_, 1) => {
            let m = g.local_matrix();
            let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
            let q = g.targets[0];
            if fixed.len() == 1 {
                apply_1q_fast(amps, q, [m00, m01, m10, m11]);
            } else {
                let s = 1usize << q;
                for_each_base(n, &fixed, ctrl_value, |i| {
                    let a0 = amps[i];
                    let a1 = amps[i | s];
                    amps[i] = m00 * a0 + m01 * a1;
                    amps[i | s] = m10 * a0 + m11 * a1;
                });
            }
        }
        (_, t) => {
            let m = g.local_matrix();
            let dim = 1usize << t;
            let offsets: Vec<usize> = (0..dim).map(|l| deposit_bits(l, &g.targets)).collect();
            let mut v = vec![C64::new(0.0, 0.0); dim];
            for_each_base(n, &fixed, ctrl_value, |i| {
                for (l, off) in offsets.iter().enumerate() {
                    v[l] = amps[i | off];
                }
                for (r, off) in offsets.iter().enumerate() {
                    let row = &m[r * dim..(r + 1) * dim];
                    let mut acc = C64::new(0.0, 0.0);
                    for (a, b) in row.iter().zip(&v) {
                        acc += a * b;
                    }
                    amps[i | off] = acc;
                }
            });
        }
    }
}

fn apply_x_fast(amps: &mut [C64], q: usize) {
    let s = 1usize << q;
    for chunk in amps.chunks_exact_mut(2 * s) {
        let (lo, hi) = chunk.split_at_mut(s);
        lo.swap_with_slice(hi);
    }
}

fn apply_1q_fast(amps: &mut [C64], q: usize, m: [C64; 4]) {
    let s = 1usize << q;
    for chunk in amps.chunks_exact_mut(2 * s) {
        let (lo, hi) = chunk.split_at_mut(s);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let x0 = *a0;
            let x1 = *a1;
            *a0 = m[0] * x0 + m[1] * x1;
            *a1 = m[2] * x0 + m[3] * x1;
        }
    }
}
