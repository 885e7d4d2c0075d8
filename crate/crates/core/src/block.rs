//! Configuration-controlled LCU block-encoding of `A(x)`.
//!
//! `A(x) = (1/R_env) I + sum_e x_e/R_e U_e` where `U_e` is the two-node
//! Laplacian `(e_i - e_j)(e_i - e_j)^T`. Writing the identity term with weight
//! `1/(2 R_env)` and each edge term as `U_e/2` with weight `1/R_e` turns the
//! sum into a convex combination, so the `l = f = l' = 0` block of
//! `U_A = V† · select · V` is `C² A(x)/2` with `C² = 1/sum(λ)`.
//!
//! Each edge term is realized as `P† · (F, LCU) · P`: the permutation `P`
//! sends `|i>` to `|0>` and `|j>` to `|1>`, the one-qubit LCU on `l'` gives
//! `(I - X)/2` on the lowest data qubit, and `F` flags every state whose
//! higher data qubits are not all zero. When `x_e = 0` the term is flagged
//! out entirely so it contributes nothing to the block.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{QusoError, Result};
use crate::sim::{ceil_log2, Circuit, Control, Gate, RegisterLayout, Routine, StateVector};
use crate::thermal::ThermalNetwork;
use crate::C64;

/// Coefficients of the linear combination, identity term first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcuPlan {
    pub lambdas: Vec<f64>,
    pub labels: Vec<String>,
    /// `(sum λ)^(-1/2)`.
    pub c_lcu: f64,
    /// `c_lcu * sqrt(λ_k)`.
    pub amplitudes: Vec<f64>,
}

impl LcuPlan {
    pub fn from_network(net: &ThermalNetwork) -> Self {
        let mut lambdas = vec![1.0 / (2.0 * net.r_env())];
        let mut labels = vec!["identity".to_string()];
        for e in net.edges() {
            lambdas.push(1.0 / e.resistance);
            labels.push(format!("({},{})", e.i, e.j));
        }
        let total: f64 = lambdas.iter().sum();
        let c_lcu = total.powf(-0.5);
        let amplitudes = lambdas.iter().map(|l| c_lcu * l.sqrt()).collect();
        Self {
            lambdas,
            labels,
            c_lcu,
            amplitudes,
        }
    }

    pub fn c_lcu_sq(&self) -> f64 {
        self.c_lcu * self.c_lcu
    }

    pub fn lambda_sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// Rotation-tree preparation of real amplitudes on little-endian `qubits`.
///
/// Produces `sum_k amps[k] |k>` from `|0>`, signs included; `amps` must have
/// unit norm and at most `2^qubits.len()` entries (missing entries are zero).
pub fn prepare_real_amplitudes(amps: &[f64], qubits: &[usize]) -> Result<Vec<Gate>> {
    let w = qubits.len();
    let dim = 1usize << w;
    if amps.len() > dim {
        return Err(QusoError::InvalidArgument(format!(
            "{} amplitudes do not fit {w} qubits",
            amps.len()
        )));
    }
    let norm: f64 = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(QusoError::Normalization(format!(
            "state preparation needs a unit vector, norm is {norm}"
        )));
    }
    let mut full = amps.to_vec();
    full.resize(dim, 0.0);
    let mut gates = Vec::new();
    if w == 0 {
        if full[0] < 0.0 {
            gates.push(Gate::global_phase(PI));
        }
        return Ok(gates);
    }
    // norm of the indices whose bits at and above `level` spell `h`
    let block_norm = |level: usize, h: usize| -> f64 {
        let size = 1usize << level;
        full[h * size..(h + 1) * size]
            .iter()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
    };
    for j in (0..w).rev() {
        for h in 0..1usize << (w - 1 - j) {
            let (a0, a1) = if j == 0 {
                (full[2 * h], full[2 * h + 1])
            } else {
                (block_norm(j, 2 * h), block_norm(j, 2 * h + 1))
            };
            if a0 == 0.0 && a1 == 0.0 {
                continue;
            }
            let angle = a1.atan2(a0);
            if angle == 0.0 {
                continue;
            }
            let controls = (j + 1..w).map(|t| Control {
                qubit: qubits[t],
                on: (h >> (t - j - 1)) & 1 == 1,
            });
            gates.push(Gate::roty(qubits[j], angle).with_controls(controls));
        }
    }
    Ok(gates)
}

/// Gate list of the basis permutation sending `|i>` to `|0>` and `|j>` to `|1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationSpec {
    pub i: usize,
    pub j: usize,
    pub n: usize,
    /// Gates on local qubits `0..n`.
    pub gates: Vec<Gate>,
}

impl PermutationSpec {
    /// The gates relabelled onto the given data qubits.
    pub fn gates_on(&self, data: &[usize]) -> Vec<Gate> {
        self.gates
            .iter()
            .map(|g| {
                let mut g = g.clone();
                for t in g.targets.iter_mut() {
                    *t = data[*t];
                }
                for c in g.controls.iter_mut() {
                    c.qubit = data[c.qubit];
                }
                g
            })
            .collect()
    }

    /// Image of a basis index under the permutation.
    pub fn map(&self, index: usize) -> usize {
        let mut v = index;
        for g in &self.gates {
            let fire = g.controls.iter().all(|c| ((v >> c.qubit) & 1 == 1) == c.on);
            if !fire {
                continue;
            }
            match g.kind {
                crate::sim::GateKind::X => v ^= 1 << g.targets[0],
                crate::sim::GateKind::Swap => {
                    let (a, b) = (g.targets[0], g.targets[1]);
                    if (v >> a) & 1 != (v >> b) & 1 {
                        v ^= (1 << a) | (1 << b);
                    }
                }
                _ => unreachable!("permutations use only X and SWAP"),
            }
        }
        v
    }
}

pub fn build_permutation(i: usize, j: usize, n: usize) -> Result<PermutationSpec> {
    if i == j {
        return Err(QusoError::InvalidArgument(format!("permutation needs i != j, got {i}")));
    }
    if i >> n != 0 || j >> n != 0 {
        return Err(QusoError::InvalidArgument(format!(
            "indices ({i}, {j}) out of range for {n} qubits"
        )));
    }
    let mut gates = Vec::new();
    for b in 0..n {
        if (i >> b) & 1 == 1 {
            gates.push(Gate::x(b).tagged(Routine::Permutation));
        }
    }
    let s = i ^ j;
    let t = s.trailing_zeros() as usize;
    for b in t + 1..n {
        if (s >> b) & 1 == 1 {
            gates.push(Gate::cnot(t, b).tagged(Routine::Permutation));
        }
    }
    if t != 0 {
        gates.push(Gate::swap(t, 0).tagged(Routine::Permutation));
    }
    Ok(PermutationSpec { i, j, n, gates })
}

/// Qubits an edge term acts on, plus the controls selecting it.
struct TermWires<'a> {
    data: &'a [usize],
    flag: usize,
    lcu: usize,
    select: &'a [Control],
}

/// `(F, LCU)` middle section of an edge term, controlled on `select`.
fn pair_middle(w: &TermWires<'_>) -> Vec<Gate> {
    let mut gates = Vec::new();
    if w.data.len() > 1 {
        gates.push(Gate::x(w.flag).with_controls(w.select.iter().copied()).tagged(Routine::Flag));
        gates.push(
            Gate::x(w.flag)
                .with_controls(w.data[1..].iter().map(|&q| Control::zero(q)))
                .with_controls(w.select.iter().copied())
                .tagged(Routine::Flag),
        );
    }
    let minus_x_controls: Vec<Control> = std::iter::once(Control::one(w.lcu))
        .chain(w.select.iter().copied())
        .collect();
    gates.push(Gate::h(w.lcu).tagged(Routine::Lcu));
    gates.push(
        Gate::x(w.data[0])
            .with_controls(minus_x_controls.iter().copied())
            .tagged(Routine::Lcu),
    );
    gates.push(
        Gate::global_phase(PI)
            .with_controls(minus_x_controls)
            .tagged(Routine::Lcu),
    );
    gates.push(Gate::h(w.lcu).tagged(Routine::Lcu));
    gates
}

/// Block-encoding of `U_ij/2` on the layout `l', f, d` (in that order).
pub fn build_pair_block(i: usize, j: usize, n: usize) -> Result<(Circuit, RegisterLayout)> {
    if n == 0 {
        return Err(QusoError::InvalidArgument("data register needs at least one qubit".into()));
    }
    let perm = build_permutation(i, j, n)?;
    let layout = RegisterLayout::new(&[("l'", 1), ("f", 1), ("d", n)])?;
    let data = layout.qubits("d")?;
    let wires = TermWires {
        data: &data,
        flag: layout.offset("f")?,
        lcu: layout.offset("l'")?,
        select: &[],
    };
    let mut c = Circuit::new(layout.total_qubits());
    let p = perm.gates_on(&data);
    c.extend(p.iter().cloned());
    c.extend(pair_middle(&wires));
    c.extend(p.iter().rev().map(Gate::inverse));
    Ok((c, layout))
}

/// `U_A` on a layout holding registers `c, l, f, l', d`.
pub fn build_ua(net: &ThermalNetwork, layout: &RegisterLayout) -> Result<Circuit> {
    let m = net.edge_count();
    let plan = LcuPlan::from_network(net);
    let c_reg = layout.qubits("c")?;
    let l_reg = layout.qubits("l")?;
    let data = layout.qubits("d")?;
    let flag = layout.offset("f")?;
    let lcu = layout.offset("l'")?;
    if c_reg.len() != m {
        return Err(QusoError::InvalidArgument(format!(
            "c register has {} qubits for {m} edges",
            c_reg.len()
        )));
    }
    if (1usize << l_reg.len()) < m + 1 {
        return Err(QusoError::InvalidArgument(format!(
            "l register of width {} cannot index {} terms",
            l_reg.len(),
            m + 1
        )));
    }
    if data.len() != ceil_log2(net.node_count()) {
        return Err(QusoError::InvalidArgument(format!(
            "d register has {} qubits for {} nodes",
            data.len(),
            net.node_count()
        )));
    }
    if layout.width("f")? != 1 || layout.width("l'")? != 1 {
        return Err(QusoError::InvalidArgument("f and l' must be single qubits".into()));
    }

    let prep: Vec<Gate> = prepare_real_amplitudes(&plan.amplitudes, &l_reg)?
        .into_iter()
        .map(|g| g.tagged(Routine::Prepare))
        .collect();
    let mut c = Circuit::new(layout.total_qubits());
    c.extend(prep.iter().cloned());
    for (e, edge) in net.edges().iter().enumerate() {
        let k = e + 1;
        let select: Vec<Control> = l_reg
            .iter()
            .enumerate()
            .map(|(b, &q)| Control {
                qubit: q,
                on: (k >> b) & 1 == 1,
            })
            .collect();
        let mut active = select.clone();
        active.push(Control::one(c_reg[e]));
        let perm = build_permutation(edge.i, edge.j, data.len())?.gates_on(&data);
        c.extend(perm.iter().cloned());
        c.extend(pair_middle(&TermWires {
            data: &data,
            flag,
            lcu,
            select: &active,
        }));
        c.push(
            Gate::x(flag)
                .with_controls(select.iter().copied())
                .controlled_by(c_reg[e], false)
                .tagged(Routine::Flag),
        );
        c.extend(perm.iter().rev().map(Gate::inverse));
    }
    c.extend(prep.iter().rev().map(Gate::inverse));
    Ok(c)
}

/// Layout `c, l, f, l', d` sized for a network.
pub fn ua_layout(net: &ThermalNetwork) -> RegisterLayout {
    let m = net.edge_count();
    RegisterLayout::new(&[
        ("c", m),
        ("l", ceil_log2(m + 1)),
        ("f", 1),
        ("l'", 1),
        ("d", ceil_log2(net.node_count())),
    ])
    .expect("fixed register names are distinct")
}

/// The `l = f = l' = 0` block over `d` of a circuit, for a basis value of
/// `c`. Other registers of the layout (such as `p` or `q`) are held at zero
/// and must also be zero on output for an entry to count.
pub fn extract_block(circuit: &Circuit, layout: &RegisterLayout, config: usize) -> Result<DMatrix<C64>> {
    let d = layout.register("d")?.clone();
    let dim = 1usize << d.width;
    let mut block = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for col in 0..dim {
        let mut idx = layout.deposit(0, "d", col)?;
        if layout.has("c") {
            idx = layout.deposit(idx, "c", config)?;
        }
        let mut s = StateVector::basis(layout.clone(), idx)?;
        s.apply_circuit(circuit)?;
        for row in 0..dim {
            let mut out = layout.deposit(0, "d", row)?;
            if layout.has("c") {
                out = layout.deposit(out, "c", config)?;
            }
            block[(row, col)] = s.amplitude(out);
        }
    }
    Ok(block)
}

/// `C² Ã(x)/2` where `Ã` pads `A(x)` with `1/R_env` up to a power of two.
pub fn expected_block(net: &ThermalNetwork, x: &crate::thermal::Configuration) -> Result<DMatrix<f64>> {
    let a = crate::thermal::assemble_matrix(net, x)?;
    let n = net.node_count();
    let dim = 1usize << ceil_log2(n);
    let c2 = LcuPlan::from_network(net).c_lcu_sq();
    let mut out = DMatrix::from_diagonal_element(dim, dim, 1.0 / net.r_env());
    out.view_mut((0, 0), (n, n)).copy_from(&a);
    Ok(out * (c2 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::Configuration;

    fn basis_apply(gates: &[Gate], n: usize, index: usize) -> Vec<C64> {
        let layout = RegisterLayout::new(&[("a", n)]).unwrap();
        let mut s = StateVector::basis(layout, index).unwrap();
        for g in gates {
            s.apply(g).unwrap();
        }
        s.into_amplitudes()
    }

    #[test]
    fn reference_plan_values() {
        let plan = LcuPlan::from_network(&ThermalNetwork::four_node_reference());
        assert!((plan.lambda_sum() - 994.047619).abs() < 1e-5);
        assert!((plan.c_lcu_sq() - 1.00599e-3).abs() < 1e-8);
        let s: f64 = plan.amplitudes.iter().map(|a| a * a).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(plan.len(), 7);
    }

    #[test]
    fn two_equal_amplitudes_is_hadamard_like() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let gates = prepare_real_amplitudes(&[h, h], &[0]).unwrap();
        let out = basis_apply(&gates, 1, 0);
        assert!((out[0].re - h).abs() < 1e-12 && (out[1].re - h).abs() < 1e-12);
    }

    #[test]
    fn signed_preparation_is_exact() {
        let raw = [2000.0, 4000.0, -200.0, -2000.0, 0.0, 30.0];
        let norm = raw.iter().map(|a: &f64| a * a).sum::<f64>().sqrt();
        let amps: Vec<f64> = raw.iter().map(|a| a / norm).collect();
        let gates = prepare_real_amplitudes(&amps, &[0, 1, 2]).unwrap();
        let out = basis_apply(&gates, 3, 0);
        for (k, a) in out.iter().enumerate() {
            let want = amps.get(k).copied().unwrap_or(0.0);
            assert!((a - C64::new(want, 0.0)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn zero_width_preparation() {
        assert!(prepare_real_amplitudes(&[1.0], &[]).unwrap().is_empty());
        assert_eq!(prepare_real_amplitudes(&[-1.0], &[]).unwrap().len(), 1);
        assert!(prepare_real_amplitudes(&[0.5], &[]).is_err());
    }

    #[test]
    fn permutation_examples() {
        let p = build_permutation(3, 0, 2).unwrap();
        assert_eq!(p.map(3), 0);
        assert_eq!(p.map(0), 1);
        assert!(build_permutation(0, 1, 1).unwrap().gates.is_empty());
        assert!(build_permutation(2, 2, 2).is_err());
    }

    #[test]
    fn permutation_maps_pair_for_all_small_cases() {
        for n in 1..=4 {
            for i in 0..1 << n {
                for j in 0..1 << n {
                    if i == j {
                        continue;
                    }
                    let p = build_permutation(i, j, n).unwrap();
                    assert_eq!((p.map(i), p.map(j)), (0, 1), "n={n} i={i} j={j}");
                    let mut images: Vec<_> = (0..1 << n).map(|v| p.map(v)).collect();
                    images.sort_unstable();
                    assert_eq!(images, (0..1 << n).collect::<Vec<_>>());
                    let xs = (i as u32).count_ones() as usize;
                    let cnots = p.gates.iter().filter(|g| !g.controls.is_empty()).count();
                    assert!(xs <= n && cnots < n.max(1));
                }
            }
        }
    }

    #[test]
    fn pair_block_on_one_qubit() {
        let (c, layout) = build_pair_block(0, 1, 1).unwrap();
        let b = extract_block(&c, &layout, 0).unwrap();
        let want = [[0.5, -0.5], [-0.5, 0.5]];
        for r in 0..2 {
            for col in 0..2 {
                assert!((b[(r, col)] - C64::new(want[r][col], 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn all_off_block_is_scaled_identity() {
        let net = ThermalNetwork::four_node_reference();
        let layout = ua_layout(&net);
        let ua = build_ua(&net, &layout).unwrap();
        let b = extract_block(&ua, &layout, 0).unwrap();
        let c2 = LcuPlan::from_network(&net).c_lcu_sq();
        let want = DMatrix::from_diagonal_element(4, 4, c2 * 50.0);
        assert!((b.map(|v| v.re) - want).amax() < 1e-12);
        assert!(b.map(|v| v.im).amax() < 1e-12);
        assert!((c2 * 50.0 - 0.0503).abs() < 1e-4);
    }

    #[test]
    fn single_configuration_block() {
        let net = ThermalNetwork::four_node_reference();
        let layout = ua_layout(&net);
        let ua = build_ua(&net, &layout).unwrap();
        let x = Configuration::parse("101001").unwrap();
        let b = extract_block(&ua, &layout, x.index()).unwrap();
        let want = expected_block(&net, &x).unwrap();
        assert!((b.map(|v| v.re) - want).amax() < 1e-12);
    }
}
