use std::f64::consts::PI;

use proptest::prelude::*;
use quso::amplitude::{
    build_grover, build_qae, build_qpa, cost_from_theta, full_cost_layer, qpe_amplitudes, theta_from_cost,
    Shortcut, WalshCoefficients,
};
use quso::qsvt::{branch_amplitudes, build_inversion_polynomial, find_phases, LinearSolver};
use quso::sim::{Circuit, Gate, RegisterLayout, StateVector};
use quso::thermal::{enumerate_costs, CostTable, Edge, ThermalNetwork};
use quso::C64;
use rand::{Rng, SeedableRng};

/// Phase register plus a one-qubit dummy `d`; the flag registers are empty.
fn toy_layout(k: usize) -> RegisterLayout {
    RegisterLayout::new(&[("p", k), ("q", 0), ("l", 0), ("f", 0), ("l'", 0), ("d", 1)]).unwrap()
}

/// `L|0> = sin(πθ)|0> + cos(πθ)|1>` on the dummy.
fn rotation_for(theta: f64, layout: &RegisterLayout) -> Circuit {
    let d = layout.qubit("d", 0).unwrap();
    let phi = (cost_from_theta(theta)).acos();
    Circuit::from_gates(layout.total_qubits(), vec![Gate::roty(d, phi)])
}

fn p_distribution(theta: f64, k: usize) -> Vec<f64> {
    let layout = toy_layout(k);
    let qae = build_qae(&rotation_for(theta, &layout), k, 0, &layout).unwrap();
    let mut s = StateVector::zero(layout).unwrap();
    s.apply_circuit(&qae).unwrap();
    s.register_distribution("p").unwrap()
}

proptest! {
    #[test]
    fn walsh_matches_brute_force(values in proptest::collection::vec(-2.0f64..2.0, 16)) {
        let w = WalshCoefficients::from_values(&values).unwrap();
        for s in 0..16usize {
            let a: f64 = (0..16usize)
                .map(|j| {
                    let parity = (s & j).count_ones() % 2;
                    values[j] * if parity == 1 { -1.0 } else { 1.0 }
                })
                .sum::<f64>()
                / 16.0;
            prop_assert!((w.coefficients[s] - a).abs() < 1e-12);
        }
        for (j, v) in values.iter().enumerate() {
            prop_assert!((w.reconstruct(j) - v).abs() < 1e-12);
        }
    }
}

#[test]
fn qpa_is_exact_up_to_eight_qubits() {
    for k in 1..=8 {
        let layout = RegisterLayout::new(&[("p", k)]).unwrap();
        let p = layout.qubits("p").unwrap();
        let gamma = 1.37;
        let gates = build_qpa(gamma, &p).unwrap();
        assert_eq!(gates.len(), 1 << k);
        let mut s = StateVector::zero(layout.clone()).unwrap();
        for &q in &p {
            s.apply(&Gate::h(q)).unwrap();
        }
        for g in &gates {
            s.apply(g).unwrap();
        }
        let n = 1usize << k;
        for j in 0..n {
            let want = C64::from_polar(1.0 / (n as f64).sqrt(), -gamma * (PI * j as f64 / n as f64).sin());
            assert!((s.amplitude(j) - want).norm() < 1e-12, "k={k} j={j}");
        }
    }
}

#[test]
fn qpe_amplitudes_match_direct_sum() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let theta: f64 = rng.gen_range(0.0..0.5);
        let k = rng.gen_range(1..6);
        let n = 1usize << k;
        let (plus, minus) = qpe_amplitudes(theta, k);
        for j in 0..n {
            let sum = |sign: f64| -> C64 {
                (0..n)
                    .map(|l| C64::from_polar(1.0, -2.0 * PI * l as f64 * (j as f64 / n as f64 - sign * theta)))
                    .sum::<C64>()
                    / n as f64
            };
            assert!((plus[j] - sum(1.0)).norm() < 1e-12);
            assert!((minus[j] - sum(-1.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn representable_theta_splits_evenly() {
    let dist = p_distribution(0.25, 2);
    assert!((dist[1] - 0.5).abs() <= 1e-10);
    assert!((dist[3] - 0.5).abs() <= 1e-10);
    assert!(dist[0] + dist[2] <= 1e-10);
    for j in 1..8 {
        let dist = p_distribution(j as f64 / 16.0, 4);
        let (a, b) = (j, 16 - j);
        assert!((dist[a] + dist[b] - 1.0).abs() <= 1e-10, "j={j}");
    }
}

#[test]
fn generic_theta_concentrates_on_nearest_bins() {
    let k = 4;
    let n = 16.0;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let theta: f64 = rng.gen_range(0.0..0.5);
        let dist = p_distribution(theta, k);
        let mut bins = Vec::new();
        for t in [theta, 1.0 - theta] {
            let lo = (t * n).floor() as usize % 16;
            bins.push(lo);
            bins.push((lo + 1) % 16);
        }
        bins.sort_unstable();
        bins.dedup();
        let mass: f64 = bins.iter().map(|&j| dist[j]).sum();
        assert!(mass >= 8.0 / (PI * PI), "theta={theta} mass={mass}");
    }
}

#[test]
fn grover_rotates_by_twice_theta() {
    for theta in [0.05, 0.17, 0.31, 0.44] {
        let layout = toy_layout(1);
        let g = build_grover(&rotation_for(theta, &layout), 0, &layout).unwrap();
        // Restrict to d with p = 0: a 2x2 real-plane rotation.
        let d = layout.qubit("d", 0).unwrap();
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for col in 0..2 {
            let mut s = StateVector::basis(layout.clone(), col << d).unwrap();
            s.apply_circuit(&g).unwrap();
            for (row, entry) in m.iter_mut().enumerate() {
                entry[col] = s.amplitude(row << d);
            }
        }
        let trace = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((trace - C64::new(2.0 * (2.0 * PI * theta).cos(), 0.0)).norm() < 1e-12);
        assert!((det - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
    let layout = toy_layout(1);
    assert!(build_grover(&rotation_for(0.1, &layout), 2, &layout).is_err());
}

#[test]
fn shortcut_error_stays_under_bound() {
    let net = ThermalNetwork::four_node_reference();
    let table = enumerate_costs(&net, 0, 1.0).unwrap().normalized().unwrap();
    for k in [2, 3] {
        let sc = Shortcut::new(&table, k).unwrap();
        for gamma in [0.5, 2.0] {
            let layer = sc.cost_layer(gamma).unwrap();
            let bound = gamma * gamma * PI * PI / (1u64 << (k + 2)) as f64;
            for x in (0..64).step_by(7) {
                let idx = sc.layout().deposit(0, "c", x).unwrap();
                let mut s = StateVector::basis(sc.layout().clone(), idx).unwrap();
                s.apply_circuit(&layer).unwrap();
                let ideal = C64::from_polar(1.0, -gamma * table.get(x));
                let dist: f64 = s
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| if i == idx { (a - ideal).norm_sqr() } else { a.norm_sqr() })
                    .sum();
                assert!(dist <= bound, "k={k} gamma={gamma} x={x} dist={dist} bound={bound}");
            }
        }
    }
}

#[test]
fn full_layer_tracks_shortcut_on_two_edges() {
    let e = |i, j| Edge { i, j, resistance: 0.01 };
    let net = ThermalNetwork::new(3, vec![e(0, 1), e(0, 2)], 0.01, vec![2000.0, 4000.0, -2000.0], 293.0).unwrap();
    let k = 2;
    let layout = RegisterLayout::pipeline(2, k, 3);
    let poly = build_inversion_polynomial(0.2, 1e-2).unwrap();
    let phases = find_phases(&poly).unwrap();
    let solver = LinearSolver::new(&net, &layout, &poly, &phases).unwrap();
    let amps: Vec<f64> = (0..4)
        .map(|x| branch_amplitudes(&solver.run(Some(x)).unwrap(), x).unwrap()[0])
        .collect();
    let table = CostTable::new(2, amps).unwrap();
    let sc = Shortcut::new(&table, k).unwrap();
    let qae = build_qae(&solver.circuit, k, 0, &layout).unwrap();
    let gamma = 1.0;
    let full = full_cost_layer(&qae, gamma, &layout).unwrap();
    for x in 0..4 {
        let mut s = StateVector::basis(layout.clone(), layout.deposit(0, "c", x).unwrap()).unwrap();
        s.apply_circuit(&full).unwrap();
        let mut t = StateVector::basis(sc.layout().clone(), sc.layout().deposit(0, "c", x).unwrap()).unwrap();
        t.apply_circuit(&sc.cost_layer(gamma).unwrap()).unwrap();
        // Amplitude left on the all-zero ancilla state of each.
        let a = s.amplitude(layout.deposit(0, "c", x).unwrap());
        let b = t.amplitude(sc.layout().deposit(0, "c", x).unwrap());
        assert!((a - b).norm() < 0.05, "x={x} full={a} shortcut={b}");
    }
    assert!((theta_from_cost(table.get(0)).unwrap() - sc.thetas()[0]).abs() < 1e-15);
}
