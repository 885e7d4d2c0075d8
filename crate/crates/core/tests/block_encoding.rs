use nalgebra::DMatrix;
use quso::block::{build_ua, expected_block, extract_block, ua_layout, LcuPlan};
use quso::sim::StateVector;
use quso::thermal::{spectral_stats, Configuration, Edge, ThermalNetwork};
use quso::C64;

fn three_node() -> ThermalNetwork {
    let e = |i, j, r| Edge { i, j, resistance: r };
    ThermalNetwork::new(3, vec![e(0, 1, 0.004), e(0, 2, 0.009), e(1, 2, 0.02)], 0.01, vec![1.0, 2.0, -1.0], 293.0)
        .unwrap()
}

#[test]
fn all_reference_blocks_match() {
    let net = ThermalNetwork::four_node_reference();
    let layout = ua_layout(&net);
    let ua = build_ua(&net, &layout).unwrap();
    for x in net.configurations().unwrap() {
        let got = extract_block(&ua, &layout, x.index()).unwrap();
        let want = expected_block(&net, &x).unwrap();
        let err = got
            .iter()
            .zip(want.iter())
            .map(|(g, w)| (g - C64::new(*w, 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "x={x} err={err}");
    }
}

#[test]
fn lcu_normalization_and_encoded_gap() {
    let net = ThermalNetwork::four_node_reference();
    let c2 = LcuPlan::from_network(&net).c_lcu_sq();
    // Σ λ = 1/(2 R_env) + Σ_e 1/R_e over the reference resistances.
    let sum_inv: f64 = [5.0, 6.0, 6.0, 7.0, 7.0, 8.0].iter().map(|r| 1.0 / (r * 1e-3)).sum();
    let oracle = 1.0 / (0.5 / 0.01 + sum_inv);
    assert!((c2 - oracle).abs() < 1e-15);
    assert!((c2 - 1.00599e-3).abs() < 1e-8);
    let s = spectral_stats(&net, &Configuration::from_index(0, 6)).unwrap();
    assert!((s.sigma_min * c2 / 2.0 - 0.0503).abs() < 1e-4);
}

#[test]
fn block_encoding_is_unitary_on_small_network() {
    let net = three_node();
    let layout = ua_layout(&net);
    let ua = build_ua(&net, &layout).unwrap();
    let dim = 1usize << layout.total_qubits();
    let mut u = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for col in 0..dim {
        let mut s = StateVector::basis(layout.clone(), col).unwrap();
        s.apply_circuit(&ua).unwrap();
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    let prod = u.adjoint() * &u;
    let err = (prod - DMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err < 1e-12);
    for x in net.configurations().unwrap() {
        let b = extract_block(&ua, &layout, x.index()).unwrap();
        let want = expected_block(&net, &x).unwrap();
        for (g, w) in b.iter().zip(want.iter()) {
            assert!((g - C64::new(*w, 0.0)).norm() < 1e-12);
        }
    }
}
