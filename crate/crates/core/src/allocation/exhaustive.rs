//! Brute-force enumeration of every slot-disjoint assignment.

use std::time::Instant;

use super::evaluate::evaluate_choices;
use super::problem::{AllocationProblem, Choice};
use super::{
    capacity_certificate, AllocationResult, ConstraintFamily, InfeasibilityCertificate, SolveOutcome,
};
use crate::{Error, Result};

/// Largest `choices^users` the exhaustive solver accepts by default.
pub const DEFAULT_EXHAUSTIVE_CAP: f64 = 1e8;

/// Optimal assignment by enumeration, with [`DEFAULT_EXHAUSTIVE_CAP`].
pub fn solve_exhaustive(problem: &AllocationProblem) -> Result<SolveOutcome> {
    solve_exhaustive_capped(problem, DEFAULT_EXHAUSTIVE_CAP)
}

/// Enumerate every assignment that gives each user one tuple and no slot
/// twice, in lexicographic order of the users' choice indices, and keep
/// the first one with the largest objective among those meeting the
/// threshold.
pub fn solve_exhaustive_capped(problem: &AllocationProblem, cap: f64) -> Result<SolveOutcome> {
    problem.validate()?;
    let start = Instant::now();
    let d = problem.dims;
    let size = (d.choices() as f64).powi(d.users as i32);
    if size > cap {
        return Err(Error::SearchSpaceTooLarge { size, cap });
    }
    if let Some(cert) = capacity_certificate(problem, "exhaustive") {
        return Ok(SolveOutcome::Infeasible(cert));
    }

    let mut search = Search {
        problem,
        current: Vec::with_capacity(d.users),
        used: vec![false; d.slots()],
        best: None,
        leaves: 0,
    };
    search.descend();

    let leaves = search.leaves;
    Ok(match search.best {
        Some((choices, _)) => SolveOutcome::Optimal(AllocationResult::from_choices(
            problem,
            choices,
            "exhaustive",
            leaves,
            start.elapsed(),
        )),
        None => SolveOutcome::Infeasible(InfeasibilityCertificate {
            solver: "exhaustive".into(),
            nodes: leaves,
            binding: ConstraintFamily::SinrThreshold,
            detail: format!(
                "all {leaves} slot-disjoint assignments leave some user below {:.2} dB",
                10.0 * problem.sinr_threshold.log10()
            ),
        }),
    })
}

struct Search<'a> {
    problem: &'a AllocationProblem,
    current: Vec<Choice>,
    used: Vec<bool>,
    best: Option<(Vec<Choice>, f64)>,
    leaves: u64,
}

impl Search<'_> {
    fn descend(&mut self) {
        let d = self.problem.dims;
        if self.current.len() == d.users {
            self.leaves += 1;
            let eval = evaluate_choices(self.problem, &self.current);
            if eval.meets_threshold && self.best.as_ref().is_none_or(|(_, v)| eval.objective > *v) {
                self.best = Some((self.current.clone(), eval.objective));
            }
            return;
        }
        for c in 0..d.choices() {
            let choice = Choice::from_index(&d, c);
            let slot = choice.slot(&d);
            if self.used[slot] {
                continue;
            }
            self.used[slot] = true;
            self.current.push(choice);
            self.descend();
            self.current.pop();
            self.used[slot] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::check_feasible;
    use crate::{Dims, NoiseParams};

    fn problem(dims: Dims, signal: Vec<f64>, background: Vec<f64>) -> AllocationProblem {
        AllocationProblem::new(dims, signal, background, 1e-13, 36.3078, NoiseParams::default()).unwrap()
    }

    #[test]
    fn single_tuple() {
        let p = problem(Dims::new(1, 1, 1, 1), vec![3.7e-12], vec![0.0]);
        let r = solve_exhaustive(&p).unwrap().into_optimal().unwrap();
        assert_eq!(r.assignment, vec![Choice::new(0, 0, 0)]);
        assert!((r.objective - 37.0).abs() < 1e-12);
        assert_eq!(r.stats.nodes, 1);
    }

    #[test]
    fn two_users_one_ap_two_wavelengths_share_the_ap() {
        // Only AP 0 exists, so the two users must take different wavelengths.
        let d = Dims::new(2, 1, 2, 1);
        let p = problem(d, vec![5e-12, 4e-12, 6e-12, 4.5e-12], vec![0.0; 4]);
        let r = solve_exhaustive(&p).unwrap().into_optimal().unwrap();
        // 40 + 60 beats 50 + 45.
        assert_eq!(r.assignment, vec![Choice::new(0, 1, 0), Choice::new(0, 0, 0)]);
        assert!((r.objective - 100.0).abs() < 1e-9);
        assert!(check_feasible(&p, &r.selector()).feasible);
    }

    #[test]
    fn two_users_two_aps_one_wavelength() {
        // Strong own channel, weak cross channel: both served, interference
        // 1e-14 each.
        let d = Dims::new(2, 2, 1, 1);
        let p = problem(d, vec![4e-12, 1e-14, 1e-14, 4e-12], vec![0.0; 4]);
        let r = solve_exhaustive(&p).unwrap().into_optimal().unwrap();
        assert_eq!(r.assignment, vec![Choice::new(0, 0, 0), Choice::new(1, 0, 0)]);
        let s = 4e-12 / (1e-14 + 1e-13);
        assert!((r.sinr[0] - s).abs() < 1e-9);
        assert_eq!(r.stats.nodes, 2);

        // Symmetric strong cross channels push both users under threshold.
        let p = problem(d, vec![4e-12, 3e-12, 3e-12, 4e-12], vec![0.0; 4]);
        match solve_exhaustive(&p).unwrap() {
            SolveOutcome::Infeasible(c) => {
                assert_eq!(c.binding, ConstraintFamily::SinrThreshold);
                assert_eq!(c.nodes, 2);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn capacity_and_cap() {
        let p = problem(Dims::new(2, 1, 1, 2), vec![1e-11; 4], vec![0.0; 4]);
        match solve_exhaustive(&p).unwrap() {
            SolveOutcome::Infeasible(c) => assert_eq!(c.binding, ConstraintFamily::SlotUniqueness),
            other => panic!("expected infeasible, got {other:?}"),
        }
        let p = problem(Dims::new(3, 2, 2, 2), vec![1e-11; 24], vec![0.0; 24]);
        assert!(matches!(
            solve_exhaustive_capped(&p, 100.0),
            Err(Error::SearchSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn ties_resolve_to_smallest_choice_sequence() {
        let d = Dims::new(1, 2, 1, 2);
        let p = problem(d, vec![4e-12; 4], vec![0.0; 4]);
        let r = solve_exhaustive(&p).unwrap().into_optimal().unwrap();
        assert_eq!(r.assignment, vec![Choice::new(0, 0, 0)]);
    }
}
