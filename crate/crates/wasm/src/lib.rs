//! WebAssembly entry points for the static demo page in `www/`.
//!
//! Each export takes plain numbers or text and returns a JSON string; the
//! native functions underneath return typed results.

use gsee_core::fci::{self, FciError};
use gsee_core::fermionic::Truncation;
use gsee_core::ml::{
    estimate_solvability, LatentKind, MlError, SolvabilityConfig, SolvabilityReport,
};
use gsee_core::pauli::{PauliError, PauliSum};
use gsee_core::qubit_features::{
    compute_features, compute_qubit_features, FeatureError, Hypergraph, Stats,
};
use gsee_core::synthetic::hubbard_chain;
use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;
use wasm_bindgen::prelude::*;

pub const MAX_CHAIN_SITES: usize = 8;
pub const MAX_SAMPLES: usize = 40_000;
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Fci(#[from] FciError),
    #[error(transparent)]
    Ml(#[from] MlError),
}

type Result<T> = std::result::Result<T, DemoError>;

#[derive(Debug, Clone, Serialize)]
pub struct PlantedMap {
    pub planted_fraction: f64,
    /// Feature rows of the training grid, in data order.
    pub features: Vec<[f64; 2]>,
    pub report: SolvabilityReport,
}

/// Cartesian grid over `[0,1]^2`, solvable iff `x1 <= p`.
pub fn planted_dataset(p: f64) -> (DMatrix<f64>, Vec<bool>) {
    let xs: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
    let ys = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut data = Vec::with_capacity(2 * xs.len() * ys.len());
    let mut labels = Vec::with_capacity(xs.len() * ys.len());
    for &a in &xs {
        for &b in &ys {
            data.extend([a, b]);
            labels.push(a <= p);
        }
    }
    (DMatrix::from_row_slice(labels.len(), 2, &data), labels)
}

pub fn planted_map(p: f64, latent: &str, samples: usize, seed: u64) -> Result<PlantedMap> {
    if !(0.0..=1.0).contains(&p) {
        return Err(DemoError::Input(format!("fraction {p} outside [0, 1]")));
    }
    if samples == 0 || samples > MAX_SAMPLES {
        return Err(DemoError::Input(format!(
            "samples must be in 1..={MAX_SAMPLES}"
        )));
    }
    let latent: LatentKind = latent.parse().map_err(DemoError::Input)?;
    let (x, labels) = planted_dataset(p);
    let names = vec!["x1".to_string(), "x2".to_string()];
    let config = SolvabilityConfig {
        latent,
        n_samples: samples,
        seed,
        ..SolvabilityConfig::default()
    };
    let report = estimate_solvability(&x, &labels, &names, None, &config)?;
    let features = x.row_iter().map(|r| [r[0], r[1]]).collect();
    Ok(PlantedMap {
        planted_fraction: p,
        features,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainFeatures {
    pub sites: usize,
    pub electrons: usize,
    pub u: f64,
    pub names: Vec<&'static str>,
    pub values: Vec<f64>,
    pub df_lambdas: Vec<f64>,
    pub fci_dimension: usize,
    pub ground_energy: f64,
}

/// Features and exact ground-state energy of a Hubbard chain with `t = 1`.
pub fn chain_features(
    sites: usize,
    electrons: usize,
    u: f64,
    periodic: bool,
) -> Result<ChainFeatures> {
    if !(2..=MAX_CHAIN_SITES).contains(&sites) {
        return Err(DemoError::Input(format!(
            "sites must be in 2..={MAX_CHAIN_SITES}"
        )));
    }
    if electrons == 0 || electrons > 2 * sites {
        return Err(DemoError::Input(format!(
            "electrons must be in 1..={}",
            2 * sites
        )));
    }
    if !u.is_finite() {
        return Err(DemoError::Input("U must be finite".into()));
    }
    let dump = hubbard_chain(sites, electrons, (electrons % 2) as i64, 1.0, u, periodic);
    let report = compute_features(&dump, Truncation::default())?;
    let (basis, spectrum) = fci::solve(&dump, 1, fci::DEFAULT_TOLERANCE)?;
    Ok(ChainFeatures {
        sites,
        electrons,
        u,
        names: gsee_core::qubit_features::FEATURE_NAMES.to_vec(),
        values: report.features.to_vec(),
        df_lambdas: report.df.lambdas,
        fci_dimension: basis.len(),
        ground_energy: spectrum.energies[0],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeView {
    pub label: String,
    pub vertices: Vec<usize>,
    pub order: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypergraphView {
    pub n_qubits: usize,
    pub one_norm: f64,
    pub edges: Vec<EdgeView>,
    pub degrees: Vec<usize>,
    pub edge_order: Stats,
    pub vertex_degree: Stats,
    pub edge_weight: Stats,
}

/// Interaction hypergraph of a Pauli sum given as `coefficient LABEL` lines.
pub fn pauli_hypergraph(text: &str) -> Result<HypergraphView> {
    let h = PauliSum::from_text(text)?;
    if h.n_qubits() > MAX_QUBITS {
        return Err(DemoError::Input(format!("at most {MAX_QUBITS} qubits")));
    }
    let graph = Hypergraph::from_pauli_sum(&h);
    let features = compute_qubit_features(&h);
    let edges = h
        .terms()
        .filter(|(p, _)| !p.is_identity())
        .map(|(p, c)| EdgeView {
            label: p.label(),
            vertices: p.support().collect(),
            order: p.weight(),
            weight: c.norm(),
        })
        .collect();
    Ok(HypergraphView {
        n_qubits: h.n_qubits(),
        one_norm: features.one_norm,
        edges,
        degrees: graph.degrees(),
        edge_order: features.edge_order,
        vertex_degree: features.vertex_degree,
        edge_weight: features.edge_weight,
    })
}

fn to_js<T: Serialize>(value: Result<T>) -> std::result::Result<String, JsValue> {
    value
        .map_err(|e| JsValue::from_str(&e.to_string()))
        .and_then(|v| serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string())))
}

#[wasm_bindgen(js_name = plantedMap)]
pub fn planted_map_js(
    p: f64,
    latent: &str,
    samples: u32,
    seed: u32,
) -> std::result::Result<String, JsValue> {
    to_js(planted_map(p, latent, samples as usize, u64::from(seed)))
}

#[wasm_bindgen(js_name = chainFeatures)]
pub fn chain_features_js(
    sites: u32,
    electrons: u32,
    u: f64,
    periodic: bool,
) -> std::result::Result<String, JsValue> {
    to_js(chain_features(
        sites as usize,
        electrons as usize,
        u,
        periodic,
    ))
}

#[wasm_bindgen(js_name = pauliHypergraph)]
pub fn pauli_hypergraph_js(text: &str) -> std::result::Result<String, JsValue> {
    to_js(pauli_hypergraph(text))
}
