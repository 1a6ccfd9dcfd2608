//! Small synthetic catalogs with FCI reference energies and planted solvers.

use std::path::Path;

use gsee_core::catalog::{ProblemInstance, SolutionEntry, SolutionFile, Task, CHEMICAL_ACCURACY};
use gsee_core::fci;
use gsee_core::fcidump::{write_fcidump_file, FciDump};
use gsee_core::fermionic::log_fci_size;
use gsee_core::synthetic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Map;

use crate::output::write_file;
use crate::{io_err, Result};

pub const ORACLE_SOLVER: &str = "oracle-exact";
pub const PLANTED_SOLVER: &str = "planted-small-space";
/// The planted solver succeeds on tasks with `log10(FCI dimension)` below this.
pub const PLANTED_LOG_FCI_CUTOFF: f64 = 1.8;
pub const TASK_RUNTIME_LIMIT: f64 = 3600.0;

#[derive(Debug, Clone, Copy)]
pub struct SynthOptions {
    pub instances: usize,
    pub tasks_per_instance: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            instances: 10,
            tasks_per_instance: 3,
            seed: 7,
        }
    }
}

fn new_uuid(rng: &mut ChaCha8Rng) -> String {
    uuid::Builder::from_random_bytes(rng.gen())
        .into_uuid()
        .to_string()
}

struct Generated {
    task_uuid: String,
    e0: f64,
    dim: usize,
    log_fci: f64,
    guidestar: bool,
}

fn task_dump(k: usize, j: usize, rng: &mut ChaCha8Rng) -> FciDump {
    let norb = 2 + k % 4;
    if k.is_multiple_of(2) {
        let u = 1.0 + 2.0 * j as f64 + rng.gen_range(0.0..1.0);
        synthetic::hubbard_chain(norb, norb, (norb % 2) as i64, 1.0, u, j % 2 == 1)
    } else {
        let nelec = (norb + j % 2).min(2 * norb);
        synthetic::random_fcidump(norb, nelec, (nelec % 2) as i64, rng)
    }
}

/// Writes `instances/*/*.problem.json` with their FCIDUMPs and two solution
/// files: one reporting the exact FCI energy for every task, and one that
/// only succeeds on small determinant spaces.
pub fn generate_catalog(dir: &Path, opts: SynthOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut generated: Vec<Generated> = Vec::new();
    for k in 0..opts.instances {
        let kind = if k % 2 == 0 { "hubbard" } else { "random" };
        let short_name = format!("synthetic-{kind}-{k:02}");
        let inst_dir = dir.join("instances").join(&short_name);
        std::fs::create_dir_all(&inst_dir).map_err(io_err(&inst_dir))?;
        let mut tasks = Vec::new();
        for j in 0..opts.tasks_per_instance {
            let dump = task_dump(k, j, &mut rng);
            let file = format!("task{j}.fcidump");
            write_fcidump_file(&dump, inst_dir.join(&file))?;
            let (basis, spectrum) = fci::solve(&dump, 1, 1e-10)?;
            let guidestar = k % 3 == 0 && j + 1 == opts.tasks_per_instance;
            let task_uuid = new_uuid(&mut rng);
            generated.push(Generated {
                task_uuid: task_uuid.clone(),
                e0: spectrum.energies[0],
                dim: basis.len(),
                log_fci: log_fci_size(dump.norb(), dump.n_alpha(), dump.n_beta())
                    .expect("valid occupation"),
                guidestar,
            });
            tasks.push(Task {
                task_uuid,
                fcidump_path: file.into(),
                accuracy_tol: CHEMICAL_ACCURACY,
                runtime_limit: Some(TASK_RUNTIME_LIMIT),
                reference_energy: (!guidestar).then_some(spectrum.energies[0]),
                reference_provenance: (!guidestar).then(|| "fci-oracle".to_string()),
                is_guidestar: guidestar,
                extra: Map::new(),
            });
        }
        let inst = ProblemInstance {
            instance_uuid: new_uuid(&mut rng),
            short_name: short_name.clone(),
            tasks,
            extra: Map::new(),
            base_dir: Default::default(),
        };
        let path = inst_dir.join(format!("{short_name}.problem.json"));
        write_file(
            &path,
            (serde_json::to_string_pretty(&inst)? + "\n").as_bytes(),
        )?;
    }

    let exact = SolutionFile {
        solver_uuid: ORACLE_SOLVER.into(),
        solver_short_name: "Exact diagonalization".into(),
        results: generated
            .iter()
            .map(|g| SolutionEntry {
                task_uuid: g.task_uuid.clone(),
                energy: Some(g.e0),
                run_time: Some(0.0),
                attempted: true,
                extra: Map::new(),
            })
            .collect(),
        extra: Map::new(),
    };
    let planted = SolutionFile {
        solver_uuid: PLANTED_SOLVER.into(),
        solver_short_name: "Planted small-space solver".into(),
        results: generated
            .iter()
            .map(|g| {
                let solved = g.log_fci < PLANTED_LOG_FCI_CUTOFF;
                let error = if solved { 0.4e-3 } else { 6.0e-3 };
                SolutionEntry {
                    task_uuid: g.task_uuid.clone(),
                    energy: Some(g.e0 + error),
                    run_time: Some(0.01 * g.dim as f64),
                    attempted: true,
                    extra: Map::new(),
                }
            })
            .collect(),
        extra: Map::new(),
    };
    let sol_dir = dir.join("solutions");
    for sol in [&exact, &planted] {
        let path = sol_dir.join(format!("{}.solution.json", sol.solver_uuid));
        write_file(
            &path,
            (serde_json::to_string_pretty(sol)? + "\n").as_bytes(),
        )?;
    }
    let labeled = generated.iter().filter(|g| !g.guidestar).count();
    log::info!(
        "wrote {} instances, {} tasks ({labeled} labeled)",
        opts.instances,
        generated.len()
    );
    Ok(())
}
