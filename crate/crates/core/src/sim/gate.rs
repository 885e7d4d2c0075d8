use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{QusoError, Result};
use crate::C64;

/// A control qubit and the value it must hold for the gate to act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub on: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Self { qubit, on: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Self { qubit, on: false }
    }
}

/// Subroutine label used for per-routine resource counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routine {
    Other,
    Prepare,
    Permutation,
    Flag,
    Lcu,
    QsvtPhase,
    StatePrep,
    Reflection,
    Qft,
    Qpa,
    Shortcut,
    Mixer,
    CostOracle,
}

impl Routine {
    pub fn name(self) -> &'static str {
        match self {
            Routine::Other => "other",
            Routine::Prepare => "prepare",
            Routine::Permutation => "permutation",
            Routine::Flag => "flag",
            Routine::Lcu => "lcu",
            Routine::QsvtPhase => "qsvt_phase",
            Routine::StatePrep => "state_prep",
            Routine::Reflection => "reflection",
            Routine::Qft => "qft",
            Routine::Qpa => "qpa",
            Routine::Shortcut => "shortcut",
            Routine::Mixer => "mixer",
            Routine::CostOracle => "cost_oracle",
        }
    }
}

/// Gate kinds. Angles follow these conventions:
///
/// * `ZPhase(φ) = exp(iφZ)`
/// * `RotX(φ) = exp(iφX)`
/// * `RotY(φ) = exp(-iφY)`, i.e. `[[cos φ, -sin φ], [sin φ, cos φ]]`
/// * `MultiZ(φ) = exp(-iφ Z⊗…⊗Z)` over all targets
/// * `GlobalPhase(φ) = exp(iφ)`, no targets; with controls it is a phase on
///   the control subspace
///
/// `Diagonal` holds `2^t` entries and `Unitary` a row-major `2^t × 2^t`
/// matrix, both indexed little-endian over the target list.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    H,
    Z,
    ZPhase(f64),
    RotX(f64),
    RotY(f64),
    MultiZ(f64),
    GlobalPhase(f64),
    Swap,
    Diagonal(Arc<Vec<C64>>),
    Unitary(Arc<Vec<C64>>),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Z => "z",
            GateKind::ZPhase(_) => "zphase",
            GateKind::RotX(_) => "rotx",
            GateKind::RotY(_) => "roty",
            GateKind::MultiZ(_) => "multiz",
            GateKind::GlobalPhase(_) => "phase",
            GateKind::Swap => "swap",
            GateKind::Diagonal(_) => "diagonal",
            GateKind::Unitary(_) => "unitary",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::ZPhase(a)
            | GateKind::RotX(a)
            | GateKind::RotY(a)
            | GateKind::MultiZ(a)
            | GateKind::GlobalPhase(a) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: SmallVec<[usize; 2]>,
    pub controls: SmallVec<[Control; 4]>,
    pub routine: Routine,
}

impl Gate {
    fn on(kind: GateKind, targets: &[usize]) -> Self {
        Self {
            kind,
            targets: SmallVec::from_slice(targets),
            controls: SmallVec::new(),
            routine: Routine::Other,
        }
    }

    pub fn x(q: usize) -> Self {
        Self::on(GateKind::X, &[q])
    }

    pub fn h(q: usize) -> Self {
        Self::on(GateKind::H, &[q])
    }

    pub fn z(q: usize) -> Self {
        Self::on(GateKind::Z, &[q])
    }

    pub fn zphase(q: usize, phi: f64) -> Self {
        Self::on(GateKind::ZPhase(phi), &[q])
    }

    pub fn rotx(q: usize, phi: f64) -> Self {
        Self::on(GateKind::RotX(phi), &[q])
    }

    pub fn roty(q: usize, phi: f64) -> Self {
        Self::on(GateKind::RotY(phi), &[q])
    }

    pub fn multi_z(qubits: &[usize], phi: f64) -> Self {
        Self::on(GateKind::MultiZ(phi), qubits)
    }

    pub fn global_phase(phi: f64) -> Self {
        Self::on(GateKind::GlobalPhase(phi), &[])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::on(GateKind::Swap, &[a, b])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::x(target).controlled_by(control, true)
    }

    pub fn diagonal(qubits: &[usize], entries: Vec<C64>) -> Self {
        Self::on(GateKind::Diagonal(Arc::new(entries)), qubits)
    }

    pub fn unitary(qubits: &[usize], matrix: Vec<C64>) -> Self {
        Self::on(GateKind::Unitary(Arc::new(matrix)), qubits)
    }

    pub fn unitary_shared(qubits: &[usize], matrix: Arc<Vec<C64>>) -> Self {
        Self::on(GateKind::Unitary(matrix), qubits)
    }

    pub fn controlled_by(mut self, qubit: usize, on: bool) -> Self {
        self.controls.push(Control { qubit, on });
        self
    }

    pub fn with_controls(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    pub fn tagged(mut self, routine: Routine) -> Self {
        self.routine = routine;
        self
    }

    /// Number of target qubits.
    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    /// True for gates whose local matrix is diagonal.
    pub fn is_diagonal(&self) -> bool {
        matches!(
            self.kind,
            GateKind::Z
                | GateKind::ZPhase(_)
                | GateKind::MultiZ(_)
                | GateKind::GlobalPhase(_)
                | GateKind::Diagonal(_)
        )
    }

    /// Checks index ranges, matrix sizes and qubit disjointness.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let mut seen: SmallVec<[usize; 8]> = SmallVec::new();
        let all = self
            .targets
            .iter()
            .copied()
            .chain(self.controls.iter().map(|c| c.qubit));
        for q in all {
            if q >= num_qubits {
                return Err(QusoError::QubitOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
            if seen.contains(&q) {
                return Err(QusoError::OverlappingQubits(q));
            }
            seen.push(q);
        }
        let t = self.targets.len();
        let expected_targets = match &self.kind {
            GateKind::Swap => Some(2),
            GateKind::GlobalPhase(_) => Some(0),
            GateKind::MultiZ(_) | GateKind::Diagonal(_) | GateKind::Unitary(_) => None,
            _ => Some(1),
        };
        if let Some(e) = expected_targets {
            if t != e {
                return Err(QusoError::InvalidArgument(format!(
                    "{} gate needs {e} targets, got {t}",
                    self.kind.name()
                )));
            }
        }
        match &self.kind {
            GateKind::Diagonal(d) if d.len() != 1 << t => Err(QusoError::InvalidArgument(
                format!("diagonal over {t} qubits needs {} entries", 1 << t),
            )),
            GateKind::Unitary(u) if u.len() != 1 << (2 * t) => Err(QusoError::InvalidArgument(
                format!("unitary over {t} qubits needs {} entries", 1 << (2 * t)),
            )),
            GateKind::MultiZ(_) if t == 0 => Err(QusoError::InvalidArgument(
                "multiz needs at least one target".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Row-major local matrix over the targets (`1 × 1` for a global phase).
    pub fn local_matrix(&self) -> Vec<C64> {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let diag = |d: &[C64]| {
            let n = d.len();
            let mut m = vec![zero; n * n];
            for (i, v) in d.iter().enumerate() {
                m[i * n + i] = *v;
            }
            m
        };
        match &self.kind {
            GateKind::X => vec![zero, one, one, zero],
            GateKind::H => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                vec![h, h, h, -h]
            }
            GateKind::Swap => {
                let mut m = vec![zero; 16];
                m[0] = one;
                m[4 + 2] = one;
                m[2 * 4 + 1] = one;
                m[15] = one;
                m
            }
            GateKind::RotX(phi) => {
                let (s, c) = phi.sin_cos();
                let is = C64::new(0.0, s);
                vec![C64::new(c, 0.0), is, is, C64::new(c, 0.0)]
            }
            GateKind::RotY(phi) => {
                let (s, c) = phi.sin_cos();
                vec![
                    C64::new(c, 0.0),
                    C64::new(-s, 0.0),
                    C64::new(s, 0.0),
                    C64::new(c, 0.0),
                ]
            }
            GateKind::Unitary(u) => u.as_ref().clone(),
            _ => diag(&self.diagonal_entries().expect("diagonal kind")),
        }
    }

    /// Diagonal of the local matrix for diagonal kinds.
    pub fn diagonal_entries(&self) -> Option<Vec<C64>> {
        let t = self.targets.len();
        match &self.kind {
            GateKind::Z => Some(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]),
            GateKind::ZPhase(phi) => Some(vec![C64::from_polar(1.0, *phi), C64::from_polar(1.0, -phi)]),
            GateKind::MultiZ(phi) => Some(
                (0..1usize << t)
                    .map(|i| {
                        let sign = if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                        C64::from_polar(1.0, -phi * sign)
                    })
                    .collect(),
            ),
            GateKind::GlobalPhase(phi) => Some(vec![C64::from_polar(1.0, *phi)]),
            GateKind::Diagonal(d) => Some(d.as_ref().clone()),
            _ => None,
        }
    }

    /// The inverse gate, with the same controls and routine.
    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            GateKind::X => GateKind::X,
            GateKind::H => GateKind::H,
            GateKind::Z => GateKind::Z,
            GateKind::Swap => GateKind::Swap,
            GateKind::ZPhase(a) => GateKind::ZPhase(-a),
            GateKind::RotX(a) => GateKind::RotX(-a),
            GateKind::RotY(a) => GateKind::RotY(-a),
            GateKind::MultiZ(a) => GateKind::MultiZ(-a),
            GateKind::GlobalPhase(a) => GateKind::GlobalPhase(-a),
            GateKind::Diagonal(d) => GateKind::Diagonal(Arc::new(d.iter().map(|v| v.conj()).collect())),
            GateKind::Unitary(u) => {
                let n = (u.len() as f64).sqrt().round() as usize;
                let mut m = vec![C64::new(0.0, 0.0); n * n];
                for r in 0..n {
                    for c in 0..n {
                        m[c * n + r] = u[r * n + c].conj();
                    }
                }
                GateKind::Unitary(Arc::new(m))
            }
        };
        Self {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
            routine: self.routine,
        }
    }

    pub fn to_record(&self) -> GateRecord {
        let matrix = match &self.kind {
            GateKind::Diagonal(m) | GateKind::Unitary(m) => {
                Some(m.iter().map(|v| [v.re, v.im]).collect())
            }
            _ => None,
        };
        GateRecord {
            kind: self.kind.name().to_string(),
            targets: self.targets.to_vec(),
            controls: self.controls.iter().map(|c| (c.qubit, u8::from(c.on))).collect(),
            angle: self.kind.angle(),
            matrix,
            routine: self.routine,
        }
    }

    pub fn from_record(rec: &GateRecord) -> Result<Self> {
        let angle = || {
            rec.angle.ok_or_else(|| {
                QusoError::InvalidArgument(format!("{} gate record without angle", rec.kind))
            })
        };
        let matrix = || -> Result<Arc<Vec<C64>>> {
            let m = rec.matrix.as_ref().ok_or_else(|| {
                QusoError::InvalidArgument(format!("{} gate record without matrix", rec.kind))
            })?;
            Ok(Arc::new(m.iter().map(|[re, im]| C64::new(*re, *im)).collect()))
        };
        let kind = match rec.kind.as_str() {
            "x" => GateKind::X,
            "h" => GateKind::H,
            "z" => GateKind::Z,
            "swap" => GateKind::Swap,
            "zphase" => GateKind::ZPhase(angle()?),
            "rotx" => GateKind::RotX(angle()?),
            "roty" => GateKind::RotY(angle()?),
            "multiz" => GateKind::MultiZ(angle()?),
            "phase" => GateKind::GlobalPhase(angle()?),
            "diagonal" => GateKind::Diagonal(matrix()?),
            "unitary" => GateKind::Unitary(matrix()?),
            other => {
                return Err(QusoError::InvalidArgument(format!("unknown gate kind `{other}`")))
            }
        };
        Ok(Self {
            kind,
            targets: SmallVec::from_slice(&rec.targets),
            controls: rec
                .controls
                .iter()
                .map(|&(qubit, on)| Control { qubit, on: on != 0 })
                .collect(),
            routine: rec.routine,
        })
    }
}

/// Flat serialized form of a gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: String,
    pub targets: Vec<usize>,
    /// `(qubit, polarity)` pairs.
    pub controls: Vec<(usize, u8)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub angle: Option<f64>,
    /// `[re, im]` entries for diagonal and dense gates.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matrix: Option<Vec<[f64; 2]>>,
    pub routine: Routine,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_identity(m: &[C64], n: usize) -> bool {
        (0..n).all(|r| {
            (0..n).all(|c| {
                let want = if r == c { 1.0 } else { 0.0 };
                (m[r * n + c] - C64::new(want, 0.0)).norm() < 1e-12
            })
        })
    }

    fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                for c in 0..n {
                    out[r * n + c] += a[r * n + k] * b[k * n + c];
                }
            }
        }
        out
    }

    #[test]
    fn inverse_gives_identity() {
        let gates = [
            Gate::x(0),
            Gate::h(0),
            Gate::zphase(0, 0.3),
            Gate::rotx(0, -1.1),
            Gate::roty(0, 0.7),
            Gate::multi_z(&[0, 1], 0.4),
            Gate::swap(0, 1),
            Gate::unitary(
                &[0],
                vec![
                    C64::new(0.6, 0.0),
                    C64::new(0.0, 0.8),
                    C64::new(0.0, 0.8),
                    C64::new(0.6, 0.0),
                ],
            ),
        ];
        for g in gates {
            let n = 1 << g.arity();
            let prod = matmul(&g.local_matrix(), &g.inverse().local_matrix(), n);
            assert!(is_identity(&prod, n), "{:?}", g.kind);
        }
    }

    #[test]
    fn roty_rotates_zero_into_cos_sin() {
        let m = Gate::roty(0, 0.3).local_matrix();
        assert!((m[0].re - 0.3f64.cos()).abs() < 1e-15);
        assert!((m[2].re - 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn validation_catches_overlap_and_range() {
        assert!(matches!(
            Gate::cnot(1, 1).validate(3),
            Err(QusoError::OverlappingQubits(1))
        ));
        assert!(matches!(
            Gate::x(3).validate(3),
            Err(QusoError::QubitOutOfRange { qubit: 3, .. })
        ));
        assert!(Gate::diagonal(&[0], vec![C64::new(1.0, 0.0)]).validate(1).is_err());
        assert!(Gate::global_phase(1.0).controlled_by(0, false).validate(1).is_ok());
    }

    #[test]
    fn record_roundtrip() {
        let g = Gate::rotx(2, 0.25)
            .controlled_by(0, false)
            .controlled_by(1, true)
            .tagged(Routine::Mixer);
        let json = serde_json::to_string(&g.to_record()).unwrap();
        let back: GateRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(Gate::from_record(&back).unwrap(), g);
    }
}
