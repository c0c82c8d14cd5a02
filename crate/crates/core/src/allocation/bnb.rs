//! Depth-first branch and bound over users.
//!
//! Only (access point, wavelength) slots are branched on. Interference
//! depends on which slots are lit, not on the branch a user listens with,
//! so once every slot is fixed each user simply takes its best branch.
//!
//! Users are fixed in index order, each trying slots in ascending order. A
//! node's bound adds, for every fixed user, the SINR it would get if every
//! still-open slot on its wavelength were filled in the way least harmful
//! to it, and for the open users a maximum-weight matching of users to free
//! slots with weights equal to their best such SINR. The matching also
//! seeds a complete candidate at every node.

use std::time::Instant;

use super::evaluate::{evaluate_choices, occupancy, sinr_with};
use super::matching::max_weight_assignment;
use super::problem::{AllocationProblem, Choice};
use super::{
    capacity_certificate, AllocationResult, ConstraintFamily, InfeasibilityCertificate, SolveOutcome,
};
use crate::Result;

/// Relative slack on bounds, far above the rounding of a SINR sum.
const SLACK: f64 = 1e-9;

/// Optimal assignment by branch and bound. Returns the same assignment as
/// [`solve_exhaustive`](super::solve_exhaustive) whenever both run.
pub fn solve_bnb(problem: &AllocationProblem) -> Result<SolveOutcome> {
    problem.validate()?;
    let start = Instant::now();
    if let Some(cert) = capacity_certificate(problem, "bnb") {
        return Ok(SolveOutcome::Infeasible(cert));
    }
    let d = problem.dims;
    let mut search = Bnb {
        problem,
        threshold: problem.sinr_threshold * (1.0 - SLACK),
        current: Vec::with_capacity(d.users),
        occ: vec![None; d.slots()],
        best: None,
        nodes: 0,
    };
    if let Some((user, best_db)) = search.hopeless_user() {
        return Ok(SolveOutcome::Infeasible(InfeasibilityCertificate {
            solver: "bnb".into(),
            nodes: 0,
            binding: ConstraintFamily::SinrThreshold,
            detail: format!(
                "user {} reaches at most {best_db:.2} dB on any tuple even without interference (threshold {:.2} dB)",
                user + 1,
                10.0 * problem.sinr_threshold.log10()
            ),
        }));
    }
    search.visit();

    let nodes = search.nodes;
    Ok(match search.best {
        Some((choices, _)) => SolveOutcome::Optimal(AllocationResult::from_choices(
            problem,
            choices,
            "bnb",
            nodes,
            start.elapsed(),
        )),
        None => SolveOutcome::Infeasible(InfeasibilityCertificate {
            solver: "bnb".into(),
            nodes,
            binding: ConstraintFamily::SinrThreshold,
            detail: format!(
                "every branch of the search tree was cut by the {:.2} dB threshold bound",
                10.0 * problem.sinr_threshold.log10()
            ),
        }),
    })
}

struct Bnb<'a> {
    problem: &'a AllocationProblem,
    threshold: f64,
    /// Slot of each fixed user.
    current: Vec<usize>,
    occ: Vec<Option<usize>>,
    best: Option<(Vec<Choice>, f64)>,
    nodes: u64,
}

impl Bnb<'_> {
    /// Highest SINR `user` can get on `c` given the fixed users, when the
    /// open slots are either left dark or (if `others_open`) taken by
    /// whichever of interference or shot noise is smaller.
    fn optimistic_sinr(&self, user: usize, c: Choice, others_open: bool) -> f64 {
        let p = self.problem;
        let d = &p.dims;
        let mut denom = 0.0;
        for cp in (0..d.aps).filter(|&cp| cp != c.ap) {
            let pi = p.p(user, cp, c.wavelength, c.branch);
            let sigma = p.sigma(user, cp, c.wavelength, c.branch);
            denom += match self.occ[cp * d.wavelengths + c.wavelength] {
                Some(u) if u != user => pi,
                _ if others_open => pi.min(sigma),
                _ => sigma,
            };
        }
        p.p(user, c.ap, c.wavelength, c.branch) / (denom + p.receiver_noise)
    }

    /// Best optimistic SINR of `user` over the branches of `slot`.
    fn optimistic_slot(&self, user: usize, slot: usize, others_open: bool) -> f64 {
        let d = self.problem.dims;
        (0..d.branches)
            .map(|b| self.optimistic_sinr(user, slot_choice(&d, slot, b), others_open))
            .fold(0.0, f64::max)
    }

    /// A user that misses the threshold on every tuple at the root.
    fn hopeless_user(&self) -> Option<(usize, f64)> {
        let d = self.problem.dims;
        let others = d.users > 1;
        (0..d.users).find_map(|u| {
            let best = (0..d.slots())
                .map(|s| self.optimistic_slot(u, s, others))
                .fold(0.0f64, f64::max);
            (best < self.threshold).then(|| (u, 10.0 * best.log10()))
        })
    }

    /// Give every user of a complete slot assignment its best branch and
    /// offer the result as a candidate.
    fn complete(&mut self, slots: &[usize]) {
        let p = self.problem;
        let d = p.dims;
        let mut choices: Vec<Choice> = slots.iter().map(|&s| slot_choice(&d, s, 0)).collect();
        let occ = occupancy(p, &choices);
        for u in 0..d.users {
            let mut best = (f64::NEG_INFINITY, 0);
            for b in 0..d.branches {
                choices[u].branch = b;
                let s = sinr_with(p, &choices, &occ, u);
                if s > best.0 {
                    best = (s, b);
                }
            }
            choices[u].branch = best.1;
        }
        let eval = evaluate_choices(p, &choices);
        if !eval.meets_threshold {
            return;
        }
        // A weaker branch can round to the same total; prefer the smaller
        // index then, as a full enumeration would.
        let mut value = eval.objective;
        for u in 0..d.users {
            let chosen = choices[u].branch;
            for b in 0..chosen {
                choices[u].branch = b;
                let alt = evaluate_choices(p, &choices);
                if alt.meets_threshold && alt.objective == value {
                    value = alt.objective;
                    break;
                }
                choices[u].branch = chosen;
            }
        }
        self.offer(choices, value);
    }

    fn offer(&mut self, choices: Vec<Choice>, value: f64) {
        let better = match &self.best {
            None => true,
            Some((b, v)) => value > *v || (value == *v && choices < *b),
        };
        if better {
            self.best = Some((choices, value));
        }
    }

    fn visit(&mut self) {
        self.nodes += 1;
        let d = self.problem.dims;
        let depth = self.current.len();
        if depth == d.users {
            let slots = self.current.clone();
            self.complete(&slots);
            return;
        }

        let open = d.users - depth;
        let mut fixed = 0.0;
        for u in 0..depth {
            let s = self.optimistic_slot(u, self.current[u], true);
            if s < self.threshold {
                return;
            }
            fixed += s;
        }

        // Optimistic SINR of each open user on each free slot.
        let mut weights = Vec::with_capacity(open);
        for u in depth..d.users {
            let row: Vec<Option<f64>> = (0..d.slots())
                .map(|slot| {
                    if self.occ[slot].is_some() {
                        return None;
                    }
                    let s = self.optimistic_slot(u, slot, open > 1);
                    (s >= self.threshold).then_some(s)
                })
                .collect();
            if row.iter().all(Option::is_none) {
                return;
            }
            weights.push(row);
        }
        let Some((open_bound, slots)) = max_weight_assignment(&weights, d.slots()) else {
            return;
        };
        if let Some((_, v)) = &self.best {
            if (fixed + open_bound) * (1.0 + SLACK) < *v {
                return;
            }
        }

        let mut completion = self.current.clone();
        completion.extend(&slots);
        self.complete(&completion);

        let user = depth;
        for (slot, w) in weights[0].iter().enumerate() {
            if w.is_none() {
                continue;
            }
            self.occ[slot] = Some(user);
            self.current.push(slot);
            self.visit();
            self.current.pop();
            self.occ[slot] = None;
        }
    }
}

fn slot_choice(d: &crate::Dims, slot: usize, branch: usize) -> Choice {
    Choice::new(slot / d.wavelengths, slot % d.wavelengths, branch)
}
