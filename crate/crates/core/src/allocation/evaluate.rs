//! Closed-form SINR evaluation and constraint checks for fixed selectors.

use serde::{Deserialize, Serialize};

use super::problem::{AllocationProblem, Assignment, Choice};
use crate::{Error, Result};

/// Which user (if any) modulates each (ap, wavelength) slot.
pub(crate) fn occupancy(problem: &AllocationProblem, choices: &[Choice]) -> Vec<Option<usize>> {
    let mut occ = vec![None; problem.dims.slots()];
    for (u, c) in choices.iter().enumerate() {
        occ[c.slot(&problem.dims)] = Some(u);
    }
    occ
}

/// SINR of `user` given every user's choice. Other access points on the
/// same wavelength interfere when modulated and add shot noise otherwise.
#[inline]
pub(crate) fn sinr_with(
    problem: &AllocationProblem,
    choices: &[Choice],
    occ: &[Option<usize>],
    user: usize,
) -> f64 {
    let d = &problem.dims;
    let Choice {
        ap,
        wavelength: w,
        branch: b,
    } = choices[user];
    let mut interference = 0.0;
    let mut background = 0.0;
    for cp in (0..d.aps).filter(|&cp| cp != ap) {
        let others = match occ[cp * d.wavelengths + w] {
            Some(u) if u != user => 1.0,
            _ => 0.0,
        };
        interference += problem.p(user, cp, w, b) * others;
        background += problem.sigma(user, cp, w, b) * (1.0 - others);
    }
    problem.p(user, ap, w, b) / (interference + background + problem.receiver_noise)
}

/// Per-user SINRs and their sum for a complete, slot-disjoint choice list.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Evaluation {
    pub sinr: Vec<f64>,
    pub objective: f64,
    pub meets_threshold: bool,
}

pub(crate) fn evaluate_choices(problem: &AllocationProblem, choices: &[Choice]) -> Evaluation {
    let occ = occupancy(problem, choices);
    let sinr: Vec<f64> = (0..choices.len())
        .map(|u| sinr_with(problem, choices, &occ, u))
        .collect();
    let objective = sinr.iter().fold(0.0, |acc, s| acc + s);
    let meets_threshold = sinr.iter().all(|s| *s >= problem.sinr_threshold);
    Evaluation {
        sinr,
        objective,
        meets_threshold,
    }
}

/// SINR of `user` under the selector `assignment`, evaluated term by term
/// over the selector sums.
pub fn sinr(problem: &AllocationProblem, assignment: &Assignment, user: usize) -> Result<f64> {
    let d = &problem.dims;
    let Choice {
        ap,
        wavelength: w,
        branch: b,
    } = assignment.choice_of(user)?;
    let mut interference = 0.0;
    let mut background = 0.0;
    for cp in (0..d.aps).filter(|&cp| cp != ap) {
        let mut others = 0.0;
        for ui in (0..d.users).filter(|&ui| ui != user) {
            for f in 0..d.branches {
                if assignment.get(ui, cp, w, f) {
                    others += 1.0;
                }
            }
        }
        interference += problem.p(user, cp, w, b) * others;
        background += problem.sigma(user, cp, w, b) * (1.0 - others);
    }
    Ok(problem.p(user, ap, w, b) / (interference + background + problem.receiver_noise))
}

/// Sum of all users' SINRs. Fails when a user is not served by exactly one
/// tuple or a slot is shared.
pub fn objective(problem: &AllocationProblem, assignment: &Assignment) -> Result<f64> {
    let verdict = check_feasible(problem, assignment);
    if let Some(v) = verdict
        .violations
        .iter()
        .find(|v| !matches!(v, Violation::BelowThreshold { .. }))
    {
        return Err(Error::Infeasible(v.to_string()));
    }
    Ok(evaluate_choices(problem, &assignment.choices()?).objective)
}

/// One broken constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum Violation {
    /// An (ap, wavelength) pair is given to more than one user/branch.
    SlotReused {
        ap: usize,
        wavelength: usize,
        count: usize,
    },
    /// A user is not served by exactly one (ap, wavelength, branch).
    NotSingleServed { user: usize, count: usize },
    /// A served user's SINR is under the threshold.
    BelowThreshold { user: usize, sinr: f64, threshold: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::SlotReused {
                ap,
                wavelength,
                count,
            } => write!(
                f,
                "slot-uniqueness: AP {} wavelength {} selected {count} times",
                ap + 1,
                wavelength + 1
            ),
            Violation::NotSingleServed { user, count } => {
                write!(f, "single-service: user {} has {count} selections", user + 1)
            }
            Violation::BelowThreshold {
                user,
                sinr,
                threshold,
            } => write!(
                f,
                "SINR threshold: user {} at {:.2} dB < {:.2} dB",
                user + 1,
                10.0 * sinr.log10(),
                10.0 * threshold.log10()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Check slot uniqueness, single service per user and, when those hold,
/// the SINR threshold on every selected tuple.
pub fn check_feasible(problem: &AllocationProblem, assignment: &Assignment) -> Feasibility {
    let d = problem.dims;
    let mut violations = Vec::new();
    for ap in 0..d.aps {
        for w in 0..d.wavelengths {
            let count = (0..d.users)
                .flat_map(|u| (0..d.branches).map(move |b| (u, b)))
                .filter(|&(u, b)| assignment.get(u, ap, w, b))
                .count();
            if count > 1 {
                violations.push(Violation::SlotReused {
                    ap,
                    wavelength: w,
                    count,
                });
            }
        }
    }
    for u in 0..d.users {
        let count = assignment.selections(u).len();
        if count != 1 {
            violations.push(Violation::NotSingleServed { user: u, count });
        }
    }
    if violations.is_empty() {
        for u in 0..d.users {
            let s = sinr(problem, assignment, u).expect("single service checked");
            if !(s >= problem.sinr_threshold) {
                violations.push(Violation::BelowThreshold {
                    user: u,
                    sinr: s,
                    threshold: problem.sinr_threshold,
                });
            }
        }
    }
    Feasibility {
        feasible: violations.is_empty(),
        violations,
    }
}
