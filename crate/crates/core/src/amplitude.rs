//! Amplitude estimation, phase application and the QAOA cost layer.
//!
//! The phase register `p` holds `θ = j / 2^k` with `j` the little-endian
//! register value. Walsh characters use `z_t = (-1)^{bit t of j}`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use crate::error::{QusoError, Result};
use crate::sim::{Circuit, Control, Gate, RegisterLayout, Routine};
use crate::thermal::CostTable;
use crate::C64;

/// Largest phase register accepted by [`walsh_coefficients`].
pub const MAX_PHASE_QUBITS: usize = 12;

/// Registers reflected by `S_0`; everything except `c` and `p`.
pub const WORK_REGISTERS: [&str; 5] = ["q", "l", "f", "l'", "d"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseEncoding {
    pub k: usize,
}

impl PhaseEncoding {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_PHASE_QUBITS {
            return Err(QusoError::InvalidArgument(format!(
                "phase register width must be in 1..={MAX_PHASE_QUBITS}, got {k}"
            )));
        }
        Ok(Self { k })
    }

    /// `δ = 2^-k`.
    pub fn delta(&self) -> f64 {
        (-(self.k as f64)).exp2()
    }

    /// Width `k` with `2^-k = δ`, if `δ` is a power of two.
    pub fn from_delta(delta: f64) -> Result<Self> {
        let k = -delta.log2();
        if !(delta > 0.0 && delta <= 1.0) || (k - k.round()).abs() > 1e-12 {
            return Err(QusoError::InvalidArgument(format!(
                "delta must be 2^-k, got {delta}"
            )));
        }
        Self::new(k.round() as usize)
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.delta()
    }
}

/// `θ = arcsin(c)/π` for a cost in `[0, 1]`.
pub fn theta_from_cost(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(QusoError::InvalidArgument(format!(
            "cost {c} outside [0, 1]; amplitude encoding needs a non-negative normalized cost"
        )));
    }
    Ok(c.asin() / PI)
}

pub fn cost_from_theta(theta: f64) -> f64 {
    (PI * theta).sin()
}

/// Walsh expansion `f(j) = Σ_S a_S Π_{t∈S} z_t` over a `k`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshCoefficients {
    pub k: usize,
    /// Indexed by the subset bitmask `S`.
    pub coefficients: Vec<f64>,
}

impl WalshCoefficients {
    /// `a_S = 2^-k Σ_j f(j) χ_S(j)` by a fast Walsh-Hadamard transform.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if !n.is_power_of_two() {
            return Err(QusoError::InvalidArgument(format!(
                "Walsh transform needs a power-of-two length, got {n}"
            )));
        }
        let mut a = values.to_vec();
        let mut h = 1;
        while h < n {
            for block in a.chunks_exact_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (u, v) = (*x, *y);
                    *x = u + v;
                    *y = u - v;
                }
            }
            h *= 2;
        }
        for v in &mut a {
            *v /= n as f64;
        }
        Ok(Self {
            k: n.trailing_zeros() as usize,
            coefficients: a,
        })
    }

    pub fn reconstruct(&self, j: usize) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(s, a)| if (j & s).count_ones() % 2 == 0 { *a } else { -*a })
            .sum()
    }
}

/// Walsh coefficients of `sin(π j 2^-k)`.
pub fn walsh_coefficients(k: usize) -> Result<WalshCoefficients> {
    let enc = PhaseEncoding::new(k)?;
    let values: Vec<f64> = (0..1usize << k).map(|j| cost_from_theta(enc.theta(j))).collect();
    WalshCoefficients::from_values(&values)
}

/// `QPA(γ)|j> = exp(-iγ sin(π j 2^-k))|j>` as one `Z`-string per subset.
pub fn build_qpa(gamma: f64, p: &[usize]) -> Result<Vec<Gate>> {
    let walsh = walsh_coefficients(p.len())?;
    let mut gates = Vec::with_capacity(walsh.coefficients.len());
    for (s, a) in walsh.coefficients.iter().enumerate() {
        if s == 0 {
            gates.push(Gate::global_phase(-gamma * a).tagged(Routine::Qpa));
            continue;
        }
        let qubits: Vec<usize> = (0..p.len()).filter(|t| s >> t & 1 == 1).map(|t| p[t]).collect();
        gates.push(Gate::multi_z(&qubits, gamma * a).tagged(Routine::Qpa));
    }
    Ok(gates)
}

/// `QFT|j> = 2^{-k/2} Σ_l e^{2πi jl/2^k}|l>` on a little-endian register.
pub fn qft(p: &[usize]) -> Vec<Gate> {
    let k = p.len();
    let mut gates = Vec::new();
    for t in (0..k).rev() {
        gates.push(Gate::h(p[t]).tagged(Routine::Qft));
        for s in (0..t).rev() {
            let angle = PI / (1u64 << (t - s)) as f64;
            gates.push(
                Gate::global_phase(angle)
                    .controlled_by(p[s], true)
                    .controlled_by(p[t], true)
                    .tagged(Routine::Qft),
            );
        }
    }
    for t in 0..k / 2 {
        gates.push(Gate::swap(p[t], p[k - 1 - t]).tagged(Routine::Qft));
    }
    gates
}

pub fn inverse_qft(p: &[usize]) -> Vec<Gate> {
    qft(p).iter().rev().map(Gate::inverse).collect()
}

/// `α±(j) = 2^-k Σ_l exp(-2πi l (j 2^-k ∓ θ))`.
pub fn qpe_amplitudes(theta: f64, k: usize) -> (Vec<C64>, Vec<C64>) {
    let n = 1usize << k;
    let amp = |u: f64| -> C64 {
        let denom = C64::new(1.0, 0.0) - C64::from_polar(1.0, -2.0 * PI * u);
        if denom.norm() < 1e-9 {
            (0..n)
                .map(|l| C64::from_polar(1.0, -2.0 * PI * l as f64 * u))
                .sum::<C64>()
                / n as f64
        } else {
            (C64::new(1.0, 0.0) - C64::from_polar(1.0, -2.0 * PI * u * n as f64)) / (denom * n as f64)
        }
    };
    let plus = (0..n).map(|j| amp(j as f64 / n as f64 - theta)).collect();
    let minus = (0..n).map(|j| amp(j as f64 / n as f64 + theta)).collect();
    (plus, minus)
}

fn pattern_controls(qubits: &[usize], value: usize) -> impl Iterator<Item = Control> + '_ {
    qubits.iter().enumerate().map(move |(b, &q)| Control {
        qubit: q,
        on: (value >> b) & 1 == 1,
    })
}

/// Grover operator `G = -L S_0 L† S_α`, in time order
/// `S_α, L†, S_0, L, (-1)`.
pub fn build_grover(l: &Circuit, alpha: usize, layout: &RegisterLayout) -> Result<Circuit> {
    let d = layout.qubits("d")?;
    if alpha >> d.len() != 0 {
        return Err(QusoError::InvalidArgument(format!(
            "target index {alpha} does not fit a {}-qubit data register",
            d.len()
        )));
    }
    let flags = layout.qubits_of(&["q", "l", "f", "l'"])?;
    let work = layout.qubits_of(&WORK_REGISTERS)?;
    let mut g = Circuit::new(layout.total_qubits());
    g.push(
        Gate::global_phase(PI)
            .with_controls(flags.iter().map(|&q| Control::zero(q)))
            .with_controls(pattern_controls(&d, alpha))
            .tagged(Routine::Reflection),
    );
    g.append(&l.adjoint());
    g.push(
        Gate::global_phase(PI)
            .with_controls(work.iter().map(|&q| Control::zero(q)))
            .tagged(Routine::Reflection),
    );
    g.append(l);
    g.push(Gate::global_phase(PI).tagged(Routine::Reflection));
    Ok(g)
}

/// Amplitude estimation: `L`, Hadamards on `p`, the controlled `G^{2^t}`
/// ladder (plain repetition), inverse QFT on `p`.
pub fn build_qae(l: &Circuit, k: usize, alpha: usize, layout: &RegisterLayout) -> Result<Circuit> {
    PhaseEncoding::new(k)?;
    let p = layout.qubits("p")?;
    if p.len() != k {
        return Err(QusoError::InvalidArgument(format!(
            "p register has {} qubits, expected {k}",
            p.len()
        )));
    }
    let g = build_grover(l, alpha, layout)?;
    let mut c = Circuit::new(layout.total_qubits());
    c.append(l);
    c.extend(p.iter().map(|&q| Gate::h(q).tagged(Routine::Qft)));
    for (t, &pt) in p.iter().enumerate() {
        let cg = g.controlled(&[Control::one(pt)]);
        for _ in 0..1usize << t {
            c.append(&cg);
        }
    }
    c.extend(inverse_qft(&p));
    Ok(c)
}

/// `U_C = QAE† · QPA(γ) · QAE`.
pub fn full_cost_layer(qae: &Circuit, gamma: f64, layout: &RegisterLayout) -> Result<Circuit> {
    let p = layout.qubits("p")?;
    let mut c = Circuit::new(layout.total_qubits());
    c.append(qae);
    c.extend(build_qpa(gamma, &p)?);
    c.append(&qae.adjoint());
    Ok(c)
}

/// `exp(-iγ c(x))` as one diagonal gate on `c`.
pub fn ideal_cost_layer(table: &CostTable, gamma: f64, c: &[usize]) -> Result<Gate> {
    if table.len() != 1usize << c.len() {
        return Err(QusoError::InvalidArgument(format!(
            "cost table of {} entries for {} configuration qubits",
            table.len(),
            c.len()
        )));
    }
    let diag = table
        .costs()
        .iter()
        .map(|v| C64::from_polar(1.0, -gamma * v))
        .collect();
    Ok(Gate::diagonal(c, diag).tagged(Routine::CostOracle))
}

/// Amplitude-estimation output on `(p, d)` for a one-qubit dummy `d` whose
/// good state is `|0>`: `Σ_j c₊α₊(j)|j>|ψ₊> + c₋α₋(j)|j>|ψ₋>` with
/// `ψ± = (|0> ± i|1>)/√2`, `c₊ = -(i/√2)e^{iπθ}`, `c₋ = (i/√2)e^{-iπθ}`.
///
/// Index `j + 2^k b` holds `p = j`, `d = b`.
pub fn qae_output_state(theta: f64, k: usize) -> Vec<C64> {
    let n = 1usize << k;
    let (ap, am) = qpe_amplitudes(theta, k);
    let i = C64::new(0.0, 1.0);
    let cp = -i * FRAC_1_SQRT_2 * C64::from_polar(1.0, PI * theta);
    let cm = i * FRAC_1_SQRT_2 * C64::from_polar(1.0, -PI * theta);
    let mut v = vec![C64::new(0.0, 0.0); 2 * n];
    for j in 0..n {
        let a = cp * ap[j];
        let b = cm * am[j];
        v[j] = (a + b) * FRAC_1_SQRT_2;
        v[j + n] = (a - b) * i * FRAC_1_SQRT_2;
    }
    v
}

/// Row-major unitary whose first column is the unit vector `v`.
pub fn unitary_with_first_column(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    let phase = if v[0].norm() > 0.0 {
        v[0] / v[0].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    // w = phase e0 - v; H = I - 2 w w†/(w†w) maps phase e0 to v.
    let mut w: Vec<C64> = v.iter().map(|a| -a).collect();
    w[0] += phase;
    let ww: f64 = w.iter().map(|a| a.norm_sqr()).sum();
    let mut u = vec![C64::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            let mut h = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            if ww > 1e-300 {
                h -= w[r] * w[c].conj() * (2.0 / ww);
            }
            u[r * n + c] = h * phase;
        }
    }
    u
}

/// Statevector shortcut: configuration-controlled preparations of the
/// ideal amplitude-estimation output for a one-qubit dummy state
/// `c(x)|0> + √(1-c(x)²)|1>`.
#[derive(Debug, Clone)]
pub struct Shortcut {
    layout: RegisterLayout,
    k: usize,
    thetas: Vec<f64>,
    preps: Vec<Arc<Vec<C64>>>,
}

impl Shortcut {
    /// `table` entries must lie in `[0, 1]`.
    pub fn new(table: &CostTable, k: usize) -> Result<Self> {
        PhaseEncoding::new(k)?;
        let m = table.edge_count();
        let layout = RegisterLayout::new(&[("c", m), ("p", k), ("d", 1)])?;
        let thetas = table
            .costs()
            .iter()
            .map(|&c| theta_from_cost(c))
            .collect::<Result<Vec<_>>>()?;
        let preps = thetas
            .iter()
            .map(|&t| Arc::new(unitary_with_first_column(&qae_output_state(t, k))))
            .collect();
        Ok(Self {
            layout,
            k,
            thetas,
            preps,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    fn preparation(&self) -> Result<Vec<Gate>> {
        let c = self.layout.qubits("c")?;
        let targets = self.layout.qubits_of(&["p", "d"])?;
        Ok(self
            .preps
            .iter()
            .enumerate()
            .map(|(x, u)| {
                Gate::unitary_shared(&targets, u.clone())
                    .with_controls(pattern_controls(&c, x))
                    .tagged(Routine::Shortcut)
            })
            .collect())
    }

    /// `V_ψ† · QPA(γ) · V_ψ` on the shortcut layout.
    pub fn cost_layer(&self, gamma: f64) -> Result<Circuit> {
        let prep = self.preparation()?;
        let mut circ = Circuit::new(self.layout.total_qubits());
        circ.extend(prep.iter().cloned());
        circ.extend(build_qpa(gamma, &self.layout.qubits("p")?)?);
        circ.extend(prep.iter().rev().map(Gate::inverse));
        Ok(circ)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::StateVector;

    #[test]
    fn theta_round_trip_and_errors() {
        assert_eq!(theta_from_cost(0.0).unwrap(), 0.0);
        assert!((theta_from_cost(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((theta_from_cost((PI / 8.0).sin()).unwrap() - 0.125).abs() < 1e-15);
        for c in [0.0, 0.1, 0.5, 0.99, 1.0] {
            assert!((cost_from_theta(theta_from_cost(c).unwrap()) - c).abs() < 1e-12);
        }
        assert!(theta_from_cost(-0.1).is_err());
        assert!(theta_from_cost(1.1).is_err());
    }

    #[test]
    fn walsh_single_qubit() {
        let w = walsh_coefficients(1).unwrap();
        assert!((w.coefficients[0] - 0.5).abs() < 1e-15);
        assert!((w.coefficients[1] + 0.5).abs() < 1e-15);
        let zero = WalshCoefficients::from_values(&[0.0; 8]).unwrap();
        assert!(zero.coefficients.iter().all(|&a| a == 0.0));
        assert!(walsh_coefficients(MAX_PHASE_QUBITS + 1).is_err());
    }

    #[test]
    fn qpa_single_qubit_pi() {
        let mut s = StateVector::zero(RegisterLayout::new(&[("p", 1)]).unwrap()).unwrap();
        s.apply(&Gate::h(0)).unwrap();
        for g in build_qpa(PI, &[0]).unwrap() {
            s.apply(&g).unwrap();
        }
        let h = FRAC_1_SQRT_2;
        assert!((s.amplitude(0) - C64::new(h, 0.0)).norm() < 1e-12);
        assert!((s.amplitude(1) - C64::from_polar(h, -PI)).norm() < 1e-12);
    }

    #[test]
    fn qpe_amplitudes_aligned_and_normalized() {
        let (p, m) = qpe_amplitudes(0.25, 2);
        assert!((p[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((m[3] - C64::new(1.0, 0.0)).norm() < 1e-12);
        let (p, m) = qpe_amplitudes(0.0, 3);
        assert_eq!(p, m);
        let (p, _) = qpe_amplitudes(0.3141, 5);
        let total: f64 = p.iter().map(|a| a.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn householder_first_column() {
        let v = qae_output_state(0.1234, 3);
        let u = unitary_with_first_column(&v);
        let n = v.len();
        for r in 0..n {
            assert!((u[r * n] - v[r]).norm() < 1e-12);
        }
        for a in 0..n {
            for b in 0..n {
                let dot: C64 = (0..n).map(|r| u[r * n + a].conj() * u[r * n + b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_conversion() {
        assert_eq!(PhaseEncoding::from_delta(0.25).unwrap().k, 2);
        assert!(PhaseEncoding::from_delta(0.3).is_err());
        assert!(PhaseEncoding::new(0).is_err());
    }

    fn toy_layout(k: usize) -> RegisterLayout {
        RegisterLayout::new(&[("p", k), ("q", 0), ("l", 0), ("f", 0), ("l'", 0), ("d", 1)]).unwrap()
    }

    #[test]
    fn qft_matches_definition() {
        let k = 3;
        let n = 1usize << k;
        let layout = RegisterLayout::new(&[("p", k)]).unwrap();
        let p = layout.qubits("p").unwrap();
        for j in 0..n {
            let mut s = StateVector::basis(layout.clone(), j).unwrap();
            for g in qft(&p) {
                s.apply(&g).unwrap();
            }
            for l in 0..n {
                let want = C64::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * (j * l) as f64 / n as f64);
                assert!((s.amplitude(l) - want).norm() < 1e-12, "j={j} l={l}");
            }
            for g in inverse_qft(&p) {
                s.apply(&g).unwrap();
            }
            assert!((s.amplitude(j).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qae_on_single_rotation_matches_closed_form() {
        for (k, phi) in [(3, 0.7), (4, 1.1), (5, 0.2)] {
            let layout = toy_layout(k);
            let d = layout.qubit("d", 0).unwrap();
            let l = Circuit::from_gates(layout.total_qubits(), vec![Gate::roty(d, phi)]);
            let qae = build_qae(&l, k, 0, &layout).unwrap();
            let mut s = StateVector::zero(layout.clone()).unwrap();
            s.apply_circuit(&qae).unwrap();
            let theta = theta_from_cost(phi.cos()).unwrap();
            let want = qae_output_state(theta, k);
            for (a, b) in s.amplitudes().iter().zip(&want) {
                assert!((a - b).norm() < 1e-10, "k={k}");
            }
        }
    }

    #[test]
    fn shortcut_layer_is_diagonal_phase_at_grid_points() {
        let k = 3;
        let costs: Vec<f64> = [0usize, 1, 2, 4].iter().map(|&j| cost_from_theta(j as f64 / 8.0)).collect();
        let table = CostTable::new(2, costs.clone()).unwrap();
        let sc = Shortcut::new(&table, k).unwrap();
        let gamma = 0.9;
        let layer = sc.cost_layer(gamma).unwrap();
        for x in 0..4 {
            let idx = sc.layout().deposit(0, "c", x).unwrap();
            let mut s = StateVector::basis(sc.layout().clone(), idx).unwrap();
            s.apply_circuit(&layer).unwrap();
            let want = C64::from_polar(1.0, -gamma * costs[x]);
            assert!((s.amplitude(idx) - want).norm() < 1e-10, "x={x}");
        }
    }
}
