//! Scoring solution files against the catalog.

use gsee_core::catalog::{
    evaluate_missing, evaluate_task, Catalog, SolutionFile, TaskOutcome, Verdict,
};
use serde::Serialize;

use crate::output::{fmt_opt, write_csv, Stamp};
use crate::{sanitize, Result, RunConfig};

pub const SUMMARY_CSV: &str = "summary.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutcomes {
    pub solver_uuid: String,
    pub solver_short_name: String,
    /// One per catalog task, in catalog order.
    pub outcomes: Vec<TaskOutcome>,
    /// Result task_uuids that match no catalog task.
    pub unmatched: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolverSummary {
    pub solver_uuid: String,
    pub solver_short_name: String,
    pub tasks_total: usize,
    pub tasks_labeled: usize,
    pub tasks_attempted: usize,
    pub tasks_solved: usize,
}

pub fn evaluate_solver(
    catalog: &Catalog,
    solution: &SolutionFile,
    runtime_default: f64,
) -> SolverOutcomes {
    let outcomes = catalog
        .tasks()
        .map(|(_, task)| match solution.entry(&task.task_uuid) {
            Some(entry) => {
                evaluate_task(task, entry, runtime_default).expect("entry looked up by task_uuid")
            }
            None => evaluate_missing(task),
        })
        .collect();
    let unmatched: Vec<String> = solution
        .results
        .iter()
        .filter(|r| catalog.find_task(&r.task_uuid).is_none())
        .map(|r| r.task_uuid.clone())
        .collect();
    for uuid in &unmatched {
        log::warn!(
            "solver {}: result for unknown task {uuid}",
            solution.solver_uuid
        );
    }
    SolverOutcomes {
        solver_uuid: solution.solver_uuid.clone(),
        solver_short_name: solution.solver_short_name.clone(),
        outcomes,
        unmatched,
    }
}

pub fn summarize(o: &SolverOutcomes) -> SolverSummary {
    SolverSummary {
        solver_uuid: o.solver_uuid.clone(),
        solver_short_name: o.solver_short_name.clone(),
        tasks_total: o.outcomes.len(),
        tasks_labeled: o
            .outcomes
            .iter()
            .filter(|t| t.verdict != Verdict::Unlabeled)
            .count(),
        tasks_attempted: o.outcomes.iter().filter(|t| t.attempted).count(),
        tasks_solved: o
            .outcomes
            .iter()
            .filter(|t| t.verdict == Verdict::Solved)
            .count(),
    }
}

pub fn outcomes_file(solver_uuid: &str) -> String {
    format!("outcomes_{}.csv", sanitize(solver_uuid))
}

pub fn run_evaluate(catalog: &Catalog, cfg: &RunConfig) -> Result<Vec<SolverOutcomes>> {
    let stamp = Stamp::new(cfg.hash());
    let solutions: Vec<&SolutionFile> = catalog
        .solutions
        .iter()
        .filter(|s| cfg.solver.as_ref().is_none_or(|id| *id == s.solver_uuid))
        .collect();
    if solutions.is_empty() {
        log::warn!("no solution files to evaluate");
    }
    let all: Vec<SolverOutcomes> = solutions
        .iter()
        .map(|s| evaluate_solver(catalog, s, cfg.runtime_default))
        .collect();
    for o in &all {
        write_csv(
            &cfg.out.join(outcomes_file(&o.solver_uuid)),
            &stamp,
            &[
                "task_uuid",
                "verdict",
                "abs_error",
                "within_runtime",
                "attempted",
            ]
            .map(String::from),
            o.outcomes.iter().map(|t| {
                vec![
                    t.task_uuid.clone(),
                    t.verdict.as_str().to_string(),
                    fmt_opt(t.abs_error),
                    t.within_runtime.to_string(),
                    t.attempted.to_string(),
                ]
            }),
        )?;
    }
    write_csv(
        &cfg.out.join(SUMMARY_CSV),
        &stamp,
        &[
            "solver_uuid",
            "solver_short_name",
            "tasks_total",
            "tasks_labeled",
            "tasks_attempted",
            "tasks_solved",
        ]
        .map(String::from),
        all.iter().map(summarize).map(|s| {
            vec![
                s.solver_uuid,
                s.solver_short_name,
                s.tasks_total.to_string(),
                s.tasks_labeled.to_string(),
                s.tasks_attempted.to_string(),
                s.tasks_solved.to_string(),
            ]
        }),
    )?;
    Ok(all)
}
