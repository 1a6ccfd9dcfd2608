//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p gsee-bench --test acceptance`.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gsee_bench::evaluate::evaluate_solver;
use gsee_bench::oracle::compute_oracle;
use gsee_bench::report::run_report;
use gsee_bench::RunConfig;
use gsee_core::catalog::{Catalog, SolutionEntry, SolutionFile, Verdict};
use gsee_core::fci;
use gsee_core::fcidump::FciDump;
use gsee_core::fermionic::{df_reconstruct, double_factorize, Truncation};
use gsee_core::ml::{estimate_solvability, shapley_attribution, SolvabilityConfig};
use gsee_core::pauli::{jordan_wigner_hamiltonian, PauliString, PauliSum};
use gsee_core::qubit_features::{compute_qubit_features, Hypergraph};
use gsee_core::synthetic;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lowest(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn random_pauli_sum(rng: &mut ChaCha8Rng, max_qubits: usize, max_terms: usize) -> PauliSum {
    let n = rng.gen_range(1..=max_qubits);
    let terms: Vec<(PauliString, Complex64)> = (0..rng.gen_range(1..=max_terms))
        .map(|_| {
            let label: String = (0..n)
                .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
                .collect();
            (
                PauliString::from_label(&label).unwrap(),
                Complex64::new(rng.gen_range(-2.0..2.0), 0.0),
            )
        })
        .collect();
    PauliSum::from_terms(n, terms).unwrap()
}

fn jw_matches_fci() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let norb = rng.gen_range(1..=3);
        let nb = rng.gen_range(0..=norb);
        let na = rng.gen_range(usize::from(nb == 0)..=norb);
        let dump = synthetic::random_fcidump(norb, na + nb, na as i64 - nb as i64, &mut rng);
        let (_, spectrum) = fci::solve(&dump, 1, 1e-12).map_err(|e| e.to_string())?;
        // Independent route: dense qubit matrix over the sector's bit patterns.
        let states: Vec<u64> = (0..1u64 << (2 * norb))
            .filter(|s| {
                let alpha = (0..norb).filter(|p| s >> (2 * p) & 1 == 1).count();
                let beta = (0..norb).filter(|p| s >> (2 * p + 1) & 1 == 1).count();
                alpha == na && beta == nb
            })
            .collect();
        let qubit = jordan_wigner_hamiltonian(&dump).matrix_in_basis(&states);
        ensure(qubit.map(|c| c.im).amax() < 1e-12, || {
            format!("case {case}: complex sector matrix")
        })?;
        let err = (lowest(qubit.map(|c| c.re)) - spectrum.energies[0]).abs();
        worst = worst.max(err);
        ensure(err <= 1e-8, || {
            format!("case {case} norb={norb} ({na},{nb}): |dE|={err:.2e}")
        })?;
    }
    Ok(format!("20 Hamiltonians, max |dE| = {worst:.1e} Ha"))
}

fn df_faithful() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for norb in 1..=4 {
        for _ in 0..5 {
            let nelec = norb.min(2);
            let mut dump = FciDump::new(norb, nelec, (nelec % 2) as i64).unwrap();
            let keys: Vec<_> = dump
                .h2_canonical()
                .map(|(i, j, k, l, _)| (i, j, k, l))
                .collect();
            for (i, j, k, l) in keys {
                dump.set_h2(i, j, k, l, rng.gen_range(-1.0..1.0)).unwrap();
            }
            let df =
                double_factorize(&dump, Truncation::Relative(0.0)).map_err(|e| e.to_string())?;
            let rebuilt = df_reconstruct(&df);
            for i in 0..norb {
                for j in 0..norb {
                    for k in 0..norb {
                        for l in 0..norb {
                            let idx = ((i * norb + j) * norb + k) * norb + l;
                            worst = worst.max((rebuilt[idx] - dump.h2(i, j, k, l)).abs());
                        }
                    }
                }
            }
        }
        if norb < 2 {
            continue;
        }
        let (planted, _) = synthetic::rank_one_fcidump(norb, 0.7, &mut rng);
        let df = double_factorize(&planted, Truncation::default()).map_err(|e| e.to_string())?;
        ensure(df.rank == 1 && df.gap == 0.0, || {
            format!("rank-one norb={norb}: L={} gap={}", df.rank, df.gap)
        })?;
    }
    ensure(worst <= 1e-8, || {
        format!("reconstruction error {worst:.2e}")
    })?;
    Ok(format!(
        "max reconstruction error {worst:.1e}; rank-one tensors give L=1, gap 0"
    ))
}

fn hypergraph_features() -> Check {
    let labels = [
        ("ZZIXIII", 0.1),
        ("XYXIIII", 0.2),
        ("IYXIIII", 0.3),
        ("IIXIYZX", 0.4),
    ];
    let h = PauliSum::from_terms(
        7,
        labels
            .iter()
            .map(|(l, c)| (PauliString::from_label(l).unwrap(), Complex64::new(*c, 0.0))),
    )
    .unwrap();
    let g = Hypergraph::from_pauli_sum(&h);
    let mut orders: BTreeMap<String, usize> = BTreeMap::new();
    for (p, _) in h.terms() {
        orders.insert(p.label(), p.weight());
    }
    let got: Vec<usize> = labels.iter().map(|(l, _)| orders[*l]).collect();
    ensure(got == [3, 3, 2, 4], || format!("edge orders {got:?}"))?;
    let mut sorted: Vec<usize> = g.edges.iter().map(|e| e.order()).collect();
    sorted.sort_unstable();
    ensure(sorted == [2, 3, 3, 4], || {
        format!("hypergraph orders {sorted:?}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..100 {
        let h = random_pauli_sum(&mut rng, 10, 40);
        let g = Hypergraph::from_pauli_sum(&h);
        let deg: usize = g.degrees().iter().sum();
        let ord: usize = g.edges.iter().map(|e| e.order()).sum();
        ensure(deg == ord, || {
            format!("case {case}: sum deg {deg} != sum ord {ord}")
        })?;
    }
    Ok("seven-qubit example orders {3,3,2,4}; handshake holds on 100 random sums".into())
}

fn one_norm_bound() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut tightest = f64::INFINITY;
    for case in 0..50 {
        let h = random_pauli_sum(&mut rng, 6, 30);
        let n = h.n_qubits();
        let lambda = compute_qubit_features(&h).one_norm;
        let m = h.to_matrix(n).map_err(|e| e.to_string())?;
        let traceless = m.map(|c| c.re) - DMatrix::identity(1 << n, 1 << n) * h.constant().re;
        let radius = SymmetricEigen::new(traceless).eigenvalues.amax();
        ensure(lambda + 1e-12 >= radius, || {
            format!("case {case}: lambda {lambda} < radius {radius}")
        })?;
        if radius > 0.0 {
            tightest = tightest.min(lambda / radius);
        }
    }
    Ok(format!("50 sums, min lambda/radius = {tightest:.3}"))
}

/// Cartesian design; solvable iff `x1 <= min + p * range`.
fn planted_dataset(p: f64) -> (DMatrix<f64>, Vec<bool>) {
    let xs: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
    let ys = [0.0, 0.25, 0.5, 0.75, 1.0];
    let cut = xs[0] + p * (xs[39] - xs[0]);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for &a in &xs {
        for &b in &ys {
            data.extend([a, b]);
            labels.push(a <= cut);
        }
    }
    (DMatrix::from_row_slice(labels.len(), 2, &data), labels)
}

fn algorithm_fidelity() -> Check {
    let names = vec!["x1".to_string(), "x2".to_string()];
    let mut parts = Vec::new();
    for p in [0.25, 0.5, 0.75] {
        let (x, labels) = planted_dataset(p);
        let config = SolvabilityConfig {
            n_samples: 10_000,
            ..SolvabilityConfig::default()
        };
        let r =
            estimate_solvability(&x, &labels, &names, None, &config).map_err(|e| e.to_string())?;
        let m = &r.metrics;
        ensure(r.n_samples == 10_000, || {
            format!("p={p}: {} samples", r.n_samples)
        })?;
        ensure((r.solvability_ratio - p).abs() <= 0.05, || {
            format!("p={p}: ratio {:.4}", r.solvability_ratio)
        })?;
        ensure(m.precision >= 0.9 && m.recall >= 0.9 && m.f1 >= 0.9, || {
            format!(
                "p={p}: P={:.3} R={:.3} F1={:.3} on {} held-out rows",
                m.precision, m.recall, m.f1, r.n_test
            )
        })?;
        parts.push(format!(
            "p={p}: ratio {:.4}, F1 {:.3}",
            r.solvability_ratio, m.f1
        ));
    }
    Ok(parts.join("; "))
}

fn coalition_value(model: &dyn Fn(&[f64]) -> f64, x: &[f64], bg: &[Vec<f64>], mask: usize) -> f64 {
    let total: f64 = bg
        .iter()
        .map(|row| {
            let z: Vec<f64> = (0..x.len())
                .map(|f| if mask >> f & 1 == 1 { x[f] } else { row[f] })
                .collect();
            model(&z)
        })
        .sum();
    total / bg.len() as f64
}

/// Average marginal contribution over all `d!` orderings.
fn permutation_shapley(model: &dyn Fn(&[f64]) -> f64, x: &[f64], bg: &[Vec<f64>]) -> Vec<f64> {
    fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.clone();
            let head = rest.remove(i);
            for mut tail in permutations(rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }
    let d = x.len();
    let perms = permutations((0..d).collect());
    let mut phi = vec![0.0; d];
    for order in &perms {
        let mut mask = 0usize;
        let mut prev = coalition_value(model, x, bg, mask);
        for &f in order {
            mask |= 1 << f;
            let next = coalition_value(model, x, bg, mask);
            phi[f] += next - prev;
            prev = next;
        }
    }
    phi.iter().map(|v| v / perms.len() as f64).collect()
}

fn shapley_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_axiom = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for d in 3..=6 {
        for _ in 0..4 {
            // Feature d-1 is a dummy; features 0 and 1 enter symmetrically.
            let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let model = move |z: &[f64]| {
                let mut s = (z[0] * z[1]).sin() + (z[0] + z[1]).powi(2);
                for f in 2..z.len() - 1 {
                    s += w[f] * z[f] * z[f.saturating_sub(1).max(2)] + (w[f] * z[f]).exp();
                }
                s
            };
            let mut x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            x[1] = x[0];
            let mut bg = Vec::new();
            for _ in 0..4 {
                let row: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut swapped = row.clone();
                swapped.swap(0, 1);
                bg.push(row);
                bg.push(swapped);
            }
            let s = shapley_attribution(model.clone(), &x, &bg).map_err(|e| e.to_string())?;
            let efficiency = (s.values.iter().sum::<f64>() - (s.prediction - s.baseline)).abs();
            let dummy = s.values[d - 1].abs();
            let symmetry = (s.values[0] - s.values[1]).abs();
            worst_axiom = worst_axiom.max(efficiency).max(dummy).max(symmetry);
            ensure(efficiency <= 1e-6, || {
                format!("d={d}: efficiency gap {efficiency:.2e}")
            })?;
            ensure(dummy <= 1e-6, || format!("d={d}: dummy value {dummy:.2e}"))?;
            ensure(symmetry <= 1e-6, || {
                format!("d={d}: symmetric pair differs by {symmetry:.2e}")
            })?;
            let oracle = permutation_shapley(&model, &x, &bg);
            for (a, b) in s.values.iter().zip(&oracle) {
                worst_oracle = worst_oracle.max((a - b).abs());
            }
            ensure(worst_oracle <= 1e-9, || {
                format!("d={d}: differs from permutation average by {worst_oracle:.2e}")
            })?;
        }
    }
    let mut worst_additive = 0.0f64;
    for d in 1..=6 {
        let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bg: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let wm = w.clone();
        let s = shapley_attribution(
            move |z: &[f64]| z.iter().zip(&wm).map(|(a, b)| a * b).sum::<f64>() + 0.3,
            &x,
            &bg,
        )
        .map_err(|e| e.to_string())?;
        for f in 0..d {
            let mean = bg.iter().map(|r| r[f]).sum::<f64>() / bg.len() as f64;
            worst_additive = worst_additive.max((s.values[f] - w[f] * (x[f] - mean)).abs());
        }
    }
    ensure(worst_additive <= 1e-9, || {
        format!("additive closed form off by {worst_additive:.2e}")
    })?;
    Ok(format!(
        "axioms within {worst_axiom:.1e}, permutation oracle within {worst_oracle:.1e}, additive within {worst_additive:.1e}"
    ))
}

fn bundled_catalog() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_catalog")
}

fn collect_files(
    root: &Path,
    dir: &Path,
    out: &mut BTreeMap<PathBuf, Vec<u8>>,
) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.insert(
                path.strip_prefix(root).unwrap().to_path_buf(),
                std::fs::read(&path)?,
            );
        }
    }
    Ok(())
}

fn end_to_end_determinism() -> Check {
    let mut snapshots = Vec::new();
    for jobs in [0, 1] {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cfg = RunConfig {
            catalog: bundled_catalog(),
            out: out.path().to_path_buf(),
            jobs,
            ..RunConfig::default()
        };
        let index = run_report(&cfg).map_err(|e| e.to_string())?;
        ensure(index.instances == 10, || {
            format!("bundled catalog has {} instances", index.instances)
        })?;
        let mut files = BTreeMap::new();
        collect_files(out.path(), out.path(), &mut files).map_err(|e| e.to_string())?;
        snapshots.push(files);
    }
    let (a, b) = (&snapshots[0], &snapshots[1]);
    ensure(a.keys().eq(b.keys()), || {
        "runs produced different file sets".into()
    })?;
    for (name, bytes) in a {
        ensure(&b[name] == bytes, || {
            format!("{} differs between runs", name.display())
        })?;
    }
    let n_data = a
        .keys()
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "json")))
        .count();
    Ok(format!(
        "{} files identical across two runs ({n_data} CSV/JSON)",
        a.len()
    ))
}

fn evaluation_semantics() -> Check {
    let catalog = Catalog::scan(bundled_catalog()).map_err(|e| e.to_string())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .build()
        .map_err(|e| e.to_string())?;
    let oracle = compute_oracle(&catalog, &pool);
    ensure(oracle.failures.is_empty(), || {
        format!("{} oracle failures", oracle.failures.len())
    })?;
    let solution = |shift: f64| SolutionFile {
        solver_uuid: format!("exact{shift:+}"),
        solver_short_name: "exact".into(),
        results: oracle
            .results
            .iter()
            .map(|r| SolutionEntry {
                task_uuid: r.task_uuid.clone(),
                energy: Some(r.e0 + shift),
                run_time: Some(0.0),
                attempted: true,
                extra: Default::default(),
            })
            .collect(),
        extra: Default::default(),
    };
    let labeled = |o: &gsee_bench::evaluate::SolverOutcomes| {
        o.outcomes
            .iter()
            .filter(|t| t.verdict != Verdict::Unlabeled)
            .map(|t| t.verdict)
            .collect::<Vec<_>>()
    };
    let exact = labeled(&evaluate_solver(&catalog, &solution(0.0), 86_400.0));
    ensure(!exact.is_empty(), || "no labeled tasks".into())?;
    ensure(exact.iter().all(|v| *v == Verdict::Solved), || {
        format!(
            "{} of {} exact answers not Solved",
            exact.iter().filter(|v| **v != Verdict::Solved).count(),
            exact.len()
        )
    })?;
    for shift in [2e-3, -2e-3] {
        let off = labeled(&evaluate_solver(&catalog, &solution(shift), 86_400.0));
        ensure(off.iter().all(|v| *v == Verdict::Unsolved), || {
            format!(
                "shift {shift}: {} verdicts still Solved",
                off.iter().filter(|v| **v == Verdict::Solved).count()
            )
        })?;
    }
    Ok(format!(
        "{} labeled tasks: exact all Solved, +/-2 mHa all Unsolved",
        exact.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "JW sector ground state equals FCI",
            Duration::from_secs(60),
            jw_matches_fci,
        ),
        (
            "DF reconstruction and rank-one planting",
            Duration::from_secs(10),
            df_faithful,
        ),
        (
            "hypergraph orders and handshake identity",
            Duration::from_secs(5),
            hypergraph_features,
        ),
        (
            "one-norm bounds traceless spectral radius",
            Duration::from_secs(30),
            one_norm_bound,
        ),
        (
            "solvability ratio recovers planted fraction",
            Duration::from_secs(120),
            algorithm_fidelity,
        ),
        (
            "Shapley efficiency, dummy, symmetry",
            Duration::from_secs(30),
            shapley_properties,
        ),
        (
            "report runs are byte-identical",
            Duration::from_secs(300),
            end_to_end_determinism,
        ),
        (
            "exact energies Solved, 2 mHa off Unsolved",
            Duration::from_secs(60),
            evaluation_semantics,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => {
                Err(format!("{detail}; exceeded {}s budget", limit.as_secs()))
            }
            other => other,
        };
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {}: {status} {name} ({detail}) [{:.2}s]",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
