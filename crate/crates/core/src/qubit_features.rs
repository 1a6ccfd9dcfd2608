//! Qubit-representation features and the assembled per-Hamiltonian feature vector.
//!
//! A Pauli sum induces a hypergraph whose vertices are qubits and whose
//! hyperedges are the non-identity Pauli strings, each covering the qubits it
//! acts on and weighted by `|h_e|`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcidump::FciDump;
use crate::fermionic::{self, FermionicError, Truncation};
use crate::pauli::{self, PauliSum};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("correlation needs at least 2 rows, got {0}")]
    InsufficientRows(usize),
    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedTable {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Fermionic(#[from] FermionicError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

impl Edge {
    pub fn order(&self) -> usize {
        self.vertices.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    pub n_vertices: usize,
    pub edges: Vec<Edge>,
}

impl Hypergraph {
    /// Identity terms carry no edge.
    pub fn from_pauli_sum(h: &PauliSum) -> Self {
        let edges = h
            .terms()
            .filter(|(p, _)| !p.is_identity())
            .map(|(p, c)| Edge {
                vertices: p.support().collect(),
                weight: c.norm(),
            })
            .collect();
        Self {
            n_vertices: h.n_qubits(),
            edges,
        }
    }

    /// `deg(v)`: number of edges containing each vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for e in &self.edges {
            for &v in &e.vertices {
                deg[v] += 1;
            }
        }
        deg
    }
}

/// max/min/mean/population standard deviation; all zero for an empty sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    pub std: f64,
}

impl Stats {
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return Self::default();
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Self {
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            mean: mean.clamp(
                v.iter().copied().fold(f64::INFINITY, f64::min),
                v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QubitFeatures {
    pub n_qubits: usize,
    pub one_norm: f64,
    pub n_pauli_strings: usize,
    pub edge_order: Stats,
    pub vertex_degree: Stats,
    pub edge_weight: Stats,
    /// Only an identity term (or nothing) was present.
    pub empty_hamiltonian: bool,
}

pub fn compute_qubit_features(h: &PauliSum) -> QubitFeatures {
    let graph = Hypergraph::from_pauli_sum(h);
    QubitFeatures {
        n_qubits: h.n_qubits(),
        one_norm: graph.edges.iter().map(|e| e.weight).sum(),
        n_pauli_strings: graph.edges.len(),
        edge_order: Stats::of(graph.edges.iter().map(|e| e.order() as f64)),
        vertex_degree: if graph.edges.is_empty() {
            Stats::default()
        } else {
            Stats::of(graph.degrees().into_iter().map(|d| d as f64))
        },
        edge_weight: Stats::of(graph.edges.iter().map(|e| e.weight)),
        empty_hamiltonian: graph.edges.is_empty(),
    }
}

/// Column names of [`FeatureVector`], in CSV order.
pub const FEATURE_NAMES: [&str; 20] = [
    "n_elec",
    "n_spin_orbitals",
    "log_fci_size",
    "df_rank",
    "df_gap",
    "one_norm",
    "n_pauli_strings",
    "n_qubits",
    "edge_order_max",
    "edge_order_min",
    "edge_order_mean",
    "edge_order_std",
    "vertex_degree_max",
    "vertex_degree_min",
    "vertex_degree_mean",
    "vertex_degree_std",
    "edge_weight_max",
    "edge_weight_min",
    "edge_weight_mean",
    "edge_weight_std",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub n_elec: f64,
    pub n_spin_orbitals: f64,
    pub log_fci_size: f64,
    pub df_rank: f64,
    pub df_gap: f64,
    pub one_norm: f64,
    pub n_pauli_strings: f64,
    pub n_qubits: f64,
    pub edge_order_max: f64,
    pub edge_order_min: f64,
    pub edge_order_mean: f64,
    pub edge_order_std: f64,
    pub vertex_degree_max: f64,
    pub vertex_degree_min: f64,
    pub vertex_degree_mean: f64,
    pub vertex_degree_std: f64,
    pub edge_weight_max: f64,
    pub edge_weight_min: f64,
    pub edge_weight_mean: f64,
    pub edge_weight_std: f64,
}

impl FeatureVector {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.n_elec,
            self.n_spin_orbitals,
            self.log_fci_size,
            self.df_rank,
            self.df_gap,
            self.one_norm,
            self.n_pauli_strings,
            self.n_qubits,
            self.edge_order_max,
            self.edge_order_min,
            self.edge_order_mean,
            self.edge_order_std,
            self.vertex_degree_max,
            self.vertex_degree_min,
            self.vertex_degree_mean,
            self.vertex_degree_std,
            self.edge_weight_max,
            self.edge_weight_min,
            self.edge_weight_mean,
            self.edge_weight_std,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        let v: &[f64; 20] = v.try_into().ok()?;
        Some(Self {
            n_elec: v[0],
            n_spin_orbitals: v[1],
            log_fci_size: v[2],
            df_rank: v[3],
            df_gap: v[4],
            one_norm: v[5],
            n_pauli_strings: v[6],
            n_qubits: v[7],
            edge_order_max: v[8],
            edge_order_min: v[9],
            edge_order_mean: v[10],
            edge_order_std: v[11],
            vertex_degree_max: v[12],
            vertex_degree_min: v[13],
            vertex_degree_mean: v[14],
            vertex_degree_std: v[15],
            edge_weight_max: v[16],
            edge_weight_min: v[17],
            edge_weight_mean: v[18],
            edge_weight_std: v[19],
        })
    }

    /// Value of a named column.
    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.to_vec()[i])
    }

    pub fn assemble(
        size: &fermionic::SizeFeatures,
        df: &fermionic::DfResult,
        qubit: &QubitFeatures,
    ) -> Self {
        Self {
            n_elec: size.n_elec as f64,
            n_spin_orbitals: size.n_spin_orbitals as f64,
            log_fci_size: size.log_fci_size,
            df_rank: df.rank as f64,
            df_gap: df.gap,
            one_norm: qubit.one_norm,
            n_pauli_strings: qubit.n_pauli_strings as f64,
            n_qubits: qubit.n_qubits as f64,
            edge_order_max: qubit.edge_order.max,
            edge_order_min: qubit.edge_order.min,
            edge_order_mean: qubit.edge_order.mean,
            edge_order_std: qubit.edge_order.std,
            vertex_degree_max: qubit.vertex_degree.max,
            vertex_degree_min: qubit.vertex_degree.min,
            vertex_degree_mean: qubit.vertex_degree.mean,
            vertex_degree_std: qubit.vertex_degree.std,
            edge_weight_max: qubit.edge_weight.max,
            edge_weight_min: qubit.edge_weight.min,
            edge_weight_mean: qubit.edge_weight.mean,
            edge_weight_std: qubit.edge_weight.std,
        }
    }
}

/// Every feature of one Hamiltonian, plus the intermediate results.
#[derive(Debug, Clone)]
pub struct FeatureReport {
    pub features: FeatureVector,
    pub size: fermionic::SizeFeatures,
    pub df: fermionic::DfResult,
    pub qubit: QubitFeatures,
}

/// Fermionic features, Jordan-Wigner encoding and qubit features in one pass.
pub fn compute_features(
    dump: &FciDump,
    truncation: Truncation,
) -> Result<FeatureReport, FeatureError> {
    let size = fermionic::size_features(dump);
    let df = fermionic::double_factorize(dump, truncation)?;
    let qubit = compute_qubit_features(&pauli::jordan_wigner_hamiltonian(dump));
    Ok(FeatureReport {
        features: FeatureVector::assemble(&size, &df, &qubit),
        size,
        df,
        qubit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// Row-major `names.len()` square matrix.
    pub values: Vec<Vec<f64>>,
    /// Columns with zero variance; their off-diagonal entries are 0.
    pub constant_columns: Vec<usize>,
}

/// Pearson correlation between the columns of `rows`.
pub fn correlation_matrix(
    names: &[&str],
    rows: &[Vec<f64>],
) -> Result<CorrelationMatrix, FeatureError> {
    if rows.len() < 2 {
        return Err(FeatureError::InsufficientRows(rows.len()));
    }
    let d = names.len();
    for (row, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(FeatureError::RaggedTable {
                row,
                got: r.len(),
                expected: d,
            });
        }
    }
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..d)
        .map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n)
        .collect();
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|c| rows.iter().map(|r| r[c] - means[c]).collect())
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let scale = |c: usize| norms[c] <= 1e-12 * (1.0 + means[c].abs()) * n.sqrt();
    let constant_columns: Vec<usize> = (0..d).filter(|&c| scale(c)).collect();

    let mut values = vec![vec![0.0; d]; d];
    for a in 0..d {
        values[a][a] = 1.0;
        for b in a + 1..d {
            if constant_columns.contains(&a) || constant_columns.contains(&b) {
                continue;
            }
            let dot: f64 = centered[a]
                .iter()
                .zip(&centered[b])
                .map(|(x, y)| x * y)
                .sum();
            let r = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            values[a][b] = r;
            values[b][a] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: names.iter().map(|s| s.to_string()).collect(),
        values,
        constant_columns,
    })
}

/// Counts of `values` in bins `[0, w), [w, 2w), ...` up to the largest value.
pub fn histogram(values: &[usize], bin_width: usize) -> Vec<(usize, usize, usize)> {
    let Some(&max) = values.iter().max() else {
        return Vec::new();
    };
    let n_bins = max / bin_width + 1;
    let mut counts = vec![0; n_bins];
    for &v in values {
        counts[v / bin_width] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (b * bin_width, (b + 1) * bin_width, c))
        .collect()
}
