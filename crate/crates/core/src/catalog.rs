//! Problem-instance and solution files, and per-task scoring.
//!
//! A catalog is a directory tree holding `*.problem.json` and
//! `*.solution.json` files. FCIDUMP paths inside a problem file are relative
//! to that file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Chemical accuracy in Hartree, the default tolerance for a solved task.
pub const CHEMICAL_ACCURACY: f64 = 1.59e-3;

/// Runtime limit used when a task does not state its own (seconds).
pub const DEFAULT_RUNTIME_LIMIT: f64 = 86_400.0;

pub const PROBLEM_SUFFIX: &str = ".problem.json";
pub const SOLUTION_SUFFIX: &str = ".solution.json";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{path}: schema violation: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error("{path}: duplicate task_uuid {uuid}")]
    DuplicateTaskUuid { path: String, uuid: String },
    #[error("duplicate instance_uuid {0}")]
    DuplicateInstance(String),
    #[error("result for task {result} evaluated against task {task}")]
    TaskMismatch { task: String, result: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Walk(#[from] walkdir::Error),
}

pub type Result<T> = std::result::Result<T, CatalogError>;

fn default_tolerance() -> f64 {
    CHEMICAL_ACCURACY
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub task_uuid: String,
    pub fcidump_path: PathBuf,
    #[serde(default = "default_tolerance")]
    pub accuracy_tol: f64,
    /// `None` in the file means the catalog-wide default applies.
    #[serde(default)]
    pub runtime_limit: Option<f64>,
    #[serde(default)]
    pub reference_energy: Option<f64>,
    /// Free text: literature, computed, planted, ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_provenance: Option<String>,
    #[serde(default)]
    pub is_guidestar: bool,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Task {
    pub fn runtime_limit_or(&self, default: f64) -> f64 {
        self.runtime_limit.unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub instance_uuid: String,
    pub short_name: String,
    pub tasks: Vec<Task>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
    /// Directory the instance file was loaded from.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ProblemInstance {
    pub fn fcidump_path(&self, task: &Task) -> PathBuf {
        if task.fcidump_path.is_absolute() {
            task.fcidump_path.clone()
        } else {
            self.base_dir.join(&task.fcidump_path)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    pub task_uuid: String,
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub run_time: Option<f64>,
    #[serde(default = "default_true")]
    pub attempted: bool,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub solver_uuid: String,
    pub solver_short_name: String,
    pub results: Vec<SolutionEntry>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl SolutionFile {
    pub fn entry(&self, task_uuid: &str) -> Option<&SolutionEntry> {
        self.results.iter().find(|r| r.task_uuid == task_uuid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Solved,
    Unsolved,
    Unlabeled,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Solved => "solved",
            Verdict::Unsolved => "unsolved",
            Verdict::Unlabeled => "unlabeled",
        }
    }

    /// Training label: `Some(true)` for solved, `None` for unlabeled.
    pub fn label(self) -> Option<bool> {
        match self {
            Verdict::Solved => Some(true),
            Verdict::Unsolved => Some(false),
            Verdict::Unlabeled => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub task_uuid: String,
    pub verdict: Verdict,
    pub abs_error: Option<f64>,
    pub within_runtime: bool,
    pub attempted: bool,
}

fn schema(path: &Path, reason: impl Into<String>) -> CatalogError {
    CatalogError::SchemaViolation {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| schema(path, e.to_string()))
}

fn validate_instance(path: &Path, inst: &ProblemInstance) -> Result<()> {
    if inst.instance_uuid.is_empty() {
        return Err(schema(path, "empty instance_uuid"));
    }
    if inst.tasks.is_empty() {
        return Err(schema(path, "instance has no tasks"));
    }
    let mut seen = HashSet::new();
    for t in &inst.tasks {
        if !seen.insert(t.task_uuid.as_str()) {
            return Err(CatalogError::DuplicateTaskUuid {
                path: path.display().to_string(),
                uuid: t.task_uuid.clone(),
            });
        }
        if !(t.accuracy_tol > 0.0 && t.accuracy_tol.is_finite()) {
            return Err(schema(
                path,
                format!("task {}: accuracy_tol must be > 0", t.task_uuid),
            ));
        }
        if let Some(limit) = t.runtime_limit {
            if limit.is_nan() || limit <= 0.0 {
                return Err(schema(
                    path,
                    format!("task {}: runtime_limit must be > 0", t.task_uuid),
                ));
            }
        }
        match (t.is_guidestar, t.reference_energy) {
            (true, Some(_)) => {
                return Err(schema(
                    path,
                    format!(
                        "task {}: guidestar tasks cannot carry a reference_energy",
                        t.task_uuid
                    ),
                ))
            }
            (false, None) => {
                return Err(schema(
                    path,
                    format!(
                        "task {}: benchmark task needs a reference_energy",
                        t.task_uuid
                    ),
                ))
            }
            (false, Some(e)) if !e.is_finite() => {
                return Err(schema(
                    path,
                    format!("task {}: non-finite reference_energy", t.task_uuid),
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let value = read_json(path)?;
    let mut inst: ProblemInstance =
        serde_json::from_value(value).map_err(|e| schema(path, e.to_string()))?;
    validate_instance(path, &inst)?;
    inst.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(inst)
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<SolutionFile> {
    let path = path.as_ref();
    let value = read_json(path)?;
    let sol: SolutionFile =
        serde_json::from_value(value).map_err(|e| schema(path, e.to_string()))?;
    let mut seen = HashSet::new();
    for r in &sol.results {
        if !seen.insert(r.task_uuid.as_str()) {
            return Err(CatalogError::DuplicateTaskUuid {
                path: path.display().to_string(),
                uuid: r.task_uuid.clone(),
            });
        }
        if r.attempted {
            match (r.energy, r.run_time) {
                (Some(e), Some(t)) if e.is_finite() && t >= 0.0 => {}
                _ => {
                    return Err(schema(
                        path,
                        format!(
                            "task {}: attempted results need energy and run_time >= 0",
                            r.task_uuid
                        ),
                    ))
                }
            }
        }
    }
    Ok(sol)
}

/// Scores one result. `runtime_default` fills in tasks without a limit.
pub fn evaluate_task(
    task: &Task,
    result: &SolutionEntry,
    runtime_default: f64,
) -> Result<TaskOutcome> {
    if task.task_uuid != result.task_uuid {
        return Err(CatalogError::TaskMismatch {
            task: task.task_uuid.clone(),
            result: result.task_uuid.clone(),
        });
    }
    let limit = task.runtime_limit_or(runtime_default);
    let within_runtime = result.attempted && result.run_time.is_some_and(|t| t <= limit);
    let abs_error = match (result.attempted, result.energy, task.reference_energy) {
        (true, Some(e), Some(reference)) => Some((e - reference).abs()),
        _ => None,
    };
    let verdict = if task.is_guidestar {
        Verdict::Unlabeled
    } else if within_runtime && abs_error.is_some_and(|err| err <= task.accuracy_tol) {
        Verdict::Solved
    } else {
        Verdict::Unsolved
    };
    Ok(TaskOutcome {
        task_uuid: task.task_uuid.clone(),
        verdict,
        abs_error,
        within_runtime,
        attempted: result.attempted,
    })
}

/// Outcome for a task the solver never reported on.
pub fn evaluate_missing(task: &Task) -> TaskOutcome {
    TaskOutcome {
        task_uuid: task.task_uuid.clone(),
        verdict: if task.is_guidestar {
            Verdict::Unlabeled
        } else {
            Verdict::Unsolved
        },
        abs_error: None,
        within_runtime: false,
        attempted: false,
    }
}

/// Every problem and solution file under a directory, in path order.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub instances: Vec<ProblemInstance>,
    pub solutions: Vec<SolutionFile>,
}

impl Catalog {
    pub fn scan(root: impl AsRef<Path>) -> Result<Self> {
        let mut problem_paths = Vec::new();
        let mut solution_paths = Vec::new();
        for entry in walkdir::WalkDir::new(root.as_ref()).sort_by_file_name() {
            let entry = entry?;
            if !entry.file_type().is_file() {
                continue;
            }
            let name = entry.file_name().to_string_lossy();
            if name.ends_with(PROBLEM_SUFFIX) {
                problem_paths.push(entry.into_path());
            } else if name.ends_with(SOLUTION_SUFFIX) {
                solution_paths.push(entry.into_path());
            }
        }
        let mut catalog = Catalog::default();
        let mut ids = HashSet::new();
        for p in problem_paths {
            let inst = load_instance(&p)?;
            if !ids.insert(inst.instance_uuid.clone()) {
                return Err(CatalogError::DuplicateInstance(inst.instance_uuid));
            }
            catalog.instances.push(inst);
        }
        for p in solution_paths {
            catalog.solutions.push(load_solution(&p)?);
        }
        Ok(catalog)
    }

    /// `(instance, task)` pairs in catalog order.
    pub fn tasks(&self) -> impl Iterator<Item = (&ProblemInstance, &Task)> {
        self.instances
            .iter()
            .flat_map(|inst| inst.tasks.iter().map(move |t| (inst, t)))
    }

    pub fn find_task(&self, task_uuid: &str) -> Option<(&ProblemInstance, &Task)> {
        self.tasks().find(|(_, t)| t.task_uuid == task_uuid)
    }
}
