use proptest::prelude::*;
use quso::thermal::{
    assemble_matrix, enumerate_costs, kappa_bound, rhs, solve_direct, spectral_stats, Configuration,
    CostTable, Edge, ThermalNetwork,
};

/// Dense Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// `A(x)` assembled from first principles: conductance to the environment on
/// the diagonal, each active edge adds `1/R` on its two diagonals and `-1/R`
/// off-diagonal.
fn reference_matrix(net: &ThermalNetwork, x: &Configuration) -> Vec<Vec<f64>> {
    let n = net.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0 / net.r_env();
    }
    for (e, edge) in net.edges().iter().enumerate() {
        if x.bit(e) {
            let g = 1.0 / edge.resistance;
            a[edge.i][edge.i] += g;
            a[edge.j][edge.j] += g;
            a[edge.i][edge.j] -= g;
            a[edge.j][edge.i] -= g;
        }
    }
    a
}

#[test]
fn reference_network_all_off() {
    let net = ThermalNetwork::four_node_reference();
    let s = solve_direct(&net, &Configuration::from_index(0, 6)).unwrap();
    for (t, want) in s.temperatures.iter().zip([20.0, 40.0, -2.0, -20.0]) {
        assert!((t - want).abs() <= 1e-10);
    }
    assert_eq!(s.absolute_temperatures()[0], 313.0);
}

#[test]
fn every_configuration_matches_elimination_and_identities() {
    let net = ThermalNetwork::four_node_reference();
    let q_total: f64 = net.heat_rates().iter().sum();
    for x in net.configurations().unwrap() {
        let a = reference_matrix(&net, &x);
        let lib = assemble_matrix(&net, &x).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((lib[(i, j)] - a[i][j]).abs() < 1e-9);
            }
        }
        let want = gauss_solve(a.clone(), net.heat_rates().to_vec());
        let s = solve_direct(&net, &x).unwrap();
        for (t, w) in s.temperatures.iter().zip(&want) {
            assert!((t - w).abs() < 1e-9, "x={x}");
        }
        assert!(s.residual < 1e-12);
        // Internal flows cancel, so everything leaves through R_env.
        let to_env: f64 = s.temperatures.iter().map(|t| t / net.r_env()).sum();
        assert!((to_env - q_total).abs() < 1e-8, "x={x}");
    }
}

#[test]
fn two_node_closed_form() {
    let net = ThermalNetwork::new(
        2,
        vec![Edge {
            i: 0,
            j: 1,
            resistance: 0.02,
        }],
        0.01,
        vec![100.0, 50.0],
        300.0,
    )
    .unwrap();
    let (a, g) = (100.0, 50.0);
    let det = (a + g) * (a + g) - g * g;
    let t0 = ((a + g) * 100.0 + g * 50.0) / det;
    let t1 = (g * 100.0 + (a + g) * 50.0) / det;
    let s = solve_direct(&net, &Configuration::from_index(1, 1)).unwrap();
    assert!((s.temperatures[0] - t0).abs() < 1e-12);
    assert!((s.temperatures[1] - t1).abs() < 1e-12);
    assert_eq!(rhs(&net).as_slice(), &[100.0, 50.0]);
}

#[test]
fn condition_number_within_gershgorin_bound() {
    let net = ThermalNetwork::four_node_reference();
    let bound = kappa_bound(&net);
    for x in net.configurations().unwrap() {
        let s = spectral_stats(&net, &x).unwrap();
        assert!(s.kappa_exact <= bound + 1e-9);
        assert!(s.sigma_min >= 1.0 / net.r_env() - 1e-9);
    }
}

#[test]
fn normalized_table_peaks_at_one() {
    let net = ThermalNetwork::four_node_reference();
    let t = enumerate_costs(&net, 0, 1.0).unwrap();
    assert_eq!(t.len(), 64);
    assert_eq!(t.normalized().unwrap().max(), 1.0);
    let zero = enumerate_costs(&net, 0, 0.0).unwrap();
    assert!(zero.normalized().is_err());
}

#[test]
fn file_round_trip() {
    let net = ThermalNetwork::four_node_reference();
    let text = serde_json::to_string(&net.to_file_format()).unwrap();
    let back = ThermalNetwork::from_json_str(&text).unwrap();
    assert_eq!(back, net);
    let err = ThermalNetwork::from_json_str("{\n  \"nodes\": 4,\n  \"edges\": oops\n}").unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

proptest! {
    #[test]
    fn affine_table_keeps_ordering(a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let net = ThermalNetwork::four_node_reference();
        let t = enumerate_costs(&net, 0, 1.0).unwrap();
        let s: CostTable = t.affine(a, b);
        // Configurations 6 and 38 tie for the minimum, so compare values.
        let tol = 1e-10 * (1.0 + s.max().abs());
        prop_assert!((s.costs()[t.argmin()] - s.min()).abs() <= tol);
        prop_assert!((s.costs()[t.argmax()] - s.max()).abs() <= tol);
    }

    #[test]
    fn random_networks_solve_like_elimination(
        rs in proptest::collection::vec(1e-3f64..0.1, 3),
        q in proptest::collection::vec(-1000.0f64..1000.0, 3),
        mask in 0usize..8,
    ) {
        let edges = vec![
            Edge { i: 0, j: 1, resistance: rs[0] },
            Edge { i: 0, j: 2, resistance: rs[1] },
            Edge { i: 1, j: 2, resistance: rs[2] },
        ];
        let net = ThermalNetwork::new(3, edges, 0.05, q.clone(), 293.0).unwrap();
        let x = Configuration::from_index(mask, 3);
        let want = gauss_solve(reference_matrix(&net, &x), q);
        let got = solve_direct(&net, &x).unwrap();
        for (g, w) in got.temperatures.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-8 * (1.0 + w.abs()));
        }
    }
}
