use gsee_wasm::{chain_features, chain_features_js, pauli_hypergraph, planted_map, DemoError};

#[test]
fn hubbard_dimer_energy_matches_closed_form() {
    for u in [0.0, 1.0, 4.0, 10.0] {
        let f = chain_features(2, 2, u, false).unwrap();
        let exact = u / 2.0 - (u * u / 4.0 + 4.0).sqrt();
        assert!(
            (f.ground_energy - exact).abs() < 1e-8,
            "U={u}: {} vs {exact}",
            f.ground_energy
        );
        assert_eq!(f.fci_dimension, 4);
        assert_eq!(f.names.len(), f.values.len());
        let n_qubits = f.values[f.names.iter().position(|n| *n == "n_qubits").unwrap()];
        assert_eq!(n_qubits, 4.0);
    }
}

#[test]
fn half_filled_ring_energy_matches_free_fermions_at_zero_u() {
    // U = 0 on a 4-site ring: orbital energies -2cos(2 pi k / 4) = -2, 0, 0, 2.
    // Four electrons fill -2 twice and the zero-energy pair.
    let f = chain_features(4, 4, 0.0, true).unwrap();
    assert!((f.ground_energy + 4.0).abs() < 1e-8, "{}", f.ground_energy);
    assert_eq!(f.fci_dimension, 36);
}

#[test]
fn chain_limits_are_checked() {
    assert!(matches!(
        chain_features(9, 2, 1.0, false),
        Err(DemoError::Input(_))
    ));
    assert!(matches!(
        chain_features(3, 7, 1.0, false),
        Err(DemoError::Input(_))
    ));
    assert!(matches!(
        chain_features(3, 2, f64::NAN, false),
        Err(DemoError::Input(_))
    ));
}

#[test]
fn export_returns_json() {
    let text = chain_features_js(3, 3, 2.0, false).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["sites"], 3);
    assert_eq!(v["values"].as_array().unwrap().len(), 20);
}

#[test]
fn seven_qubit_hypergraph_orders_and_degrees() {
    let text = "0.1 ZZIXIII\n0.2 XYXIIII\n-0.3 IYXIIII\n0.4 IIXIYZX\n";
    let g = pauli_hypergraph(text).unwrap();
    assert_eq!(g.n_qubits, 7);
    let mut orders: Vec<(String, usize)> =
        g.edges.iter().map(|e| (e.label.clone(), e.order)).collect();
    orders.sort();
    assert_eq!(
        orders,
        [
            ("IIXIYZX".into(), 4),
            ("IYXIIII".into(), 2),
            ("XYXIIII".into(), 3),
            ("ZZIXIII".into(), 3)
        ]
    );
    assert_eq!(g.degrees, [2, 3, 3, 1, 1, 1, 1]);
    assert!((g.one_norm - 1.0).abs() < 1e-12);
    assert_eq!(g.edge_order.max, 4.0);
}

#[test]
fn identity_term_is_not_an_edge() {
    let g = pauli_hypergraph("5.0 II\n1.0 XX\n").unwrap();
    assert_eq!(g.edges.len(), 1);
    assert_eq!(g.one_norm, 1.0);
    assert!(matches!(
        pauli_hypergraph("1.0 XQ\n"),
        Err(DemoError::Pauli(_))
    ));
}

#[test]
fn planted_map_recovers_fraction() {
    for (p, latent) in [(0.3, "pca"), (0.6, "pca"), (0.5, "nnmf")] {
        let m = planted_map(p, latent, 2_500, 1).unwrap();
        assert_eq!(m.report.latent_points.len(), 2_500);
        assert!(
            (m.report.solvability_ratio - p).abs() <= 0.06,
            "{latent} p={p}: {}",
            m.report.solvability_ratio
        );
        assert_eq!(m.features.len(), m.report.data_points.len());
    }
}

#[test]
fn planted_map_inputs_are_checked() {
    assert!(matches!(
        planted_map(1.5, "pca", 100, 0),
        Err(DemoError::Input(_))
    ));
    assert!(matches!(
        planted_map(0.5, "tsne", 100, 0),
        Err(DemoError::Input(_))
    ));
    assert!(matches!(
        planted_map(0.5, "pca", 0, 0),
        Err(DemoError::Input(_))
    ));
}
