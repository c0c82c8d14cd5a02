//! Access point / wavelength / branch assignment.
//!
//! The decision space is the binary selector `S[user][ap][wavelength][branch]`.
//! Once `S` is fixed every SINR follows in closed form, so the exact solvers
//! search over selectors directly and evaluate candidates with
//! [`evaluate_choices`](evaluate::evaluate_choices); the MILP in [`milp`] is
//! built for export and for cross-checking that formulation.

mod bnb;
mod evaluate;
mod exhaustive;
mod lp;
mod matching;
pub mod milp;
mod problem;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use bnb::solve_bnb;
pub use evaluate::{check_feasible, objective, sinr, Feasibility, Violation};
pub use exhaustive::{solve_exhaustive, solve_exhaustive_capped, DEFAULT_EXHAUSTIVE_CAP};
pub use lp::export_lp;
pub use milp::{build_milp, default_alpha, MilpModel};
pub use problem::{AllocationProblem, Assignment, Choice};

use crate::dims::Dims;

/// Counters reported by a solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solver: String,
    /// Search nodes (exhaustive: complete assignments) visited.
    pub nodes: u64,
    /// Not serialized, so that stored results are reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// An optimal assignment and the SINRs it yields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub dims: Dims,
    /// Serving tuple per user, in user order.
    pub assignment: Vec<Choice>,
    /// Linear SINR per user.
    pub sinr: Vec<f64>,
    pub sinr_db: Vec<f64>,
    /// Sum of the linear SINRs.
    pub objective: f64,
    pub stats: SolverStats,
}

impl AllocationResult {
    pub(crate) fn from_choices(
        problem: &AllocationProblem,
        choices: Vec<Choice>,
        solver: &str,
        nodes: u64,
        wall_time: Duration,
    ) -> Self {
        let eval = evaluate::evaluate_choices(problem, &choices);
        AllocationResult {
            dims: problem.dims,
            sinr_db: eval.sinr.iter().map(|s| 10.0 * s.log10()).collect(),
            sinr: eval.sinr,
            objective: eval.objective,
            assignment: choices,
            stats: SolverStats {
                solver: solver.to_string(),
                nodes,
                wall_time,
            },
        }
    }

    /// The result as a binary selector.
    pub fn selector(&self) -> Assignment {
        Assignment::from_choices(self.dims, &self.assignment)
    }
}

/// Constraint family that rules every assignment out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// More users than (ap, wavelength) slots.
    SlotUniqueness,
    /// No slot-disjoint assignment keeps every user above the threshold.
    SinrThreshold,
}

impl std::fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConstraintFamily::SlotUniqueness => "slot uniqueness",
            ConstraintFamily::SinrThreshold => "SINR threshold",
        })
    }
}

/// Why a solver returned no assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub solver: String,
    pub nodes: u64,
    pub binding: ConstraintFamily,
    pub detail: String,
}

impl std::fmt::Display for InfeasibilityCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "infeasible ({} constraint binding, {} solver, {} nodes): {}",
            self.binding, self.solver, self.nodes, self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Optimal(AllocationResult),
    Infeasible(InfeasibilityCertificate),
}

impl SolveOutcome {
    pub fn optimal(&self) -> Option<&AllocationResult> {
        match self {
            SolveOutcome::Optimal(r) => Some(r),
            SolveOutcome::Infeasible(_) => None,
        }
    }

    pub fn into_optimal(self) -> Option<AllocationResult> {
        match self {
            SolveOutcome::Optimal(r) => Some(r),
            SolveOutcome::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveOutcome::Optimal(_))
    }
}

/// Certificate for instances with more users than slots.
pub(crate) fn capacity_certificate(
    problem: &AllocationProblem,
    solver: &str,
) -> Option<InfeasibilityCertificate> {
    let d = problem.dims;
    (d.users > d.slots()).then(|| InfeasibilityCertificate {
        solver: solver.to_string(),
        nodes: 0,
        binding: ConstraintFamily::SlotUniqueness,
        detail: format!(
            "{} users but only {} access point / wavelength slots",
            d.users,
            d.slots()
        ),
    })
}
