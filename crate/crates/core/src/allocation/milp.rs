//! The linearized mixed-integer program.
//!
//! Variables, in registry order:
//!
//! * `S_us_ap_l_b`: binary selector,
//! * `USINR_us_ap_l_b`: SINR of the tuple, zero when not selected,
//! * `PHI_us_ui_ap_cp_l_b_f`: stands for `USINR_us_ap_l_b · S_ui_cp_l_f`
//!   for every other user `ui` and other access point `cp`.
//!
//! Names use 1-based indices. Each SINR balance row is divided by `σ_Rx` so
//! that its coefficients are SINR-sized rather than A²-sized.

use super::problem::{AllocationProblem, Assignment};
use crate::dims::Dims;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// How a variable enters the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    Selector,
    Sinr,
    /// Product of the `sinr` variable and the `selector` variable.
    Linearization {
        sinr: usize,
        selector: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Row families of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFamily {
    /// `φ ≤ α·S_ui`.
    LinearizationSelector,
    /// `φ ≤ USINR_us`.
    LinearizationSinr,
    /// `φ ≥ α·S_ui + USINR_us − α`.
    LinearizationLower,
    /// SINR definition with the products replaced by `φ`; `sinr` is the
    /// defined variable.
    Balance { sinr: usize },
    /// Each (ap, wavelength) serves at most one user/branch.
    SlotUniqueness,
    /// Each user is served exactly once.
    SingleService,
    /// Selected tuples meet the SINR threshold.
    Threshold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: RowFamily,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * x[*v]).sum()
    }

    /// Amount by which `x` breaks the row, relative to the row's scale.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        let scale = self
            .terms
            .iter()
            .map(|(v, c)| (c * x[*v]).abs())
            .fold(self.rhs.abs(), f64::max)
            .max(1.0);
        let gap = match self.sense {
            Sense::Le => lhs - self.rhs,
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        };
        gap.max(0.0) / scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub dims: Dims,
    pub alpha: f64,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Maximized.
    pub objective: Vec<(usize, f64)>,
}

/// `10⁶ · max P/σ_Rx` (or `10⁶` times the threshold if every P is zero).
pub fn default_alpha(problem: &AllocationProblem) -> f64 {
    1e6 * problem.max_sinr_bound().max(problem.sinr_threshold)
}

struct Layout {
    d: Dims,
}

impl Layout {
    fn s(&self, us: usize, ap: usize, l: usize, b: usize) -> usize {
        self.d.index(us, ap, l, b)
    }

    fn usinr(&self, us: usize, ap: usize, l: usize, b: usize) -> usize {
        self.d.len() + self.d.index(us, ap, l, b)
    }

    #[allow(clippy::too_many_arguments)]
    fn phi(&self, us: usize, ui: usize, ap: usize, cp: usize, l: usize, b: usize, f: usize) -> usize {
        let d = &self.d;
        let ui = if ui > us { ui - 1 } else { ui };
        let cp = if cp > ap { cp - 1 } else { cp };
        let others_u = d.users.saturating_sub(1);
        let others_a = d.aps.saturating_sub(1);
        let k = ((((us * others_u + ui) * d.aps + ap) * others_a + cp) * d.wavelengths + l) * d.branches + b;
        2 * d.len() + k * d.branches + f
    }

    fn phis(&self) -> usize {
        let d = &self.d;
        d.users
            * d.users.saturating_sub(1)
            * d.aps
            * d.aps.saturating_sub(1)
            * d.wavelengths
            * d.branches
            * d.branches
    }
}

fn tag(ix: &[usize]) -> String {
    ix.iter().map(|i| format!("_{}", i + 1)).collect()
}

/// Build the linearized model with big-M constant `alpha`.
pub fn build_milp(problem: &AllocationProblem, alpha: f64) -> Result<MilpModel> {
    problem.validate()?;
    let bound = problem.max_sinr_bound();
    if !(alpha > bound && alpha.is_finite()) {
        return Err(Error::AlphaTooSmall { alpha, bound });
    }
    let d = problem.dims;
    let lay = Layout { d };
    let rx = problem.receiver_noise;

    let mut variables = Vec::with_capacity(2 * d.len() + lay.phis());
    for (prefix, kind, role) in [
        ("S", VarKind::Binary, VarRole::Selector),
        ("USINR", VarKind::Continuous, VarRole::Sinr),
    ] {
        for us in 0..d.users {
            for ap in 0..d.aps {
                for l in 0..d.wavelengths {
                    for b in 0..d.branches {
                        variables.push(Variable {
                            name: format!("{prefix}{}", tag(&[us, ap, l, b])),
                            kind,
                            role,
                        });
                    }
                }
            }
        }
    }

    let mut constraints = Vec::new();
    for us in 0..d.users {
        for ui in (0..d.users).filter(|&ui| ui != us) {
            for ap in 0..d.aps {
                for cp in (0..d.aps).filter(|&cp| cp != ap) {
                    for l in 0..d.wavelengths {
                        for b in 0..d.branches {
                            for f in 0..d.branches {
                                let phi = lay.phi(us, ui, ap, cp, l, b, f);
                                debug_assert_eq!(phi, variables.len());
                                let sinr = lay.usinr(us, ap, l, b);
                                let sel = lay.s(ui, cp, l, f);
                                let t = tag(&[us, ui, ap, cp, l, b, f]);
                                variables.push(Variable {
                                    name: format!("PHI{t}"),
                                    kind: VarKind::Continuous,
                                    role: VarRole::Linearization { sinr, selector: sel },
                                });
                                constraints.push(Constraint {
                                    name: format!("PHIS{t}"),
                                    family: RowFamily::LinearizationSelector,
                                    terms: vec![(phi, 1.0), (sel, -alpha)],
                                    sense: Sense::Le,
                                    rhs: 0.0,
                                });
                                constraints.push(Constraint {
                                    name: format!("PHIU{t}"),
                                    family: RowFamily::LinearizationSinr,
                                    terms: vec![(phi, 1.0), (sinr, -1.0)],
                                    sense: Sense::Le,
                                    rhs: 0.0,
                                });
                                constraints.push(Constraint {
                                    name: format!("PHIL{t}"),
                                    family: RowFamily::LinearizationLower,
                                    terms: vec![(phi, 1.0), (sel, -alpha), (sinr, -1.0)],
                                    sense: Sense::Ge,
                                    rhs: -alpha,
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    for us in 0..d.users {
        for ap in 0..d.aps {
            for l in 0..d.wavelengths {
                for b in 0..d.branches {
                    let sinr = lay.usinr(us, ap, l, b);
                    let mut terms = Vec::new();
                    let mut direct = 1.0;
                    for cp in (0..d.aps).filter(|&cp| cp != ap) {
                        let sigma = problem.sigma(us, cp, l, b);
                        direct += sigma / rx;
                        let c = (problem.p(us, cp, l, b) - sigma) / rx;
                        for ui in (0..d.users).filter(|&ui| ui != us) {
                            for f in 0..d.branches {
                                terms.push((lay.phi(us, ui, ap, cp, l, b, f), c));
                            }
                        }
                    }
                    terms.push((sinr, direct));
                    terms.push((lay.s(us, ap, l, b), -problem.p(us, ap, l, b) / rx));
                    constraints.push(Constraint {
                        name: format!("BAL{}", tag(&[us, ap, l, b])),
                        family: RowFamily::Balance { sinr },
                        terms,
                        sense: Sense::Eq,
                        rhs: 0.0,
                    });
                }
            }
        }
    }

    for ap in 0..d.aps {
        for l in 0..d.wavelengths {
            let terms = (0..d.users)
                .flat_map(|us| (0..d.branches).map(move |b| (us, b)))
                .map(|(us, b)| (lay.s(us, ap, l, b), 1.0))
                .collect();
            constraints.push(Constraint {
                name: format!("SLOT{}", tag(&[ap, l])),
                family: RowFamily::SlotUniqueness,
                terms,
                sense: Sense::Le,
                rhs: 1.0,
            });
        }
    }
    for us in 0..d.users {
        constraints.push(Constraint {
            name: format!("SERVE{}", tag(&[us])),
            family: RowFamily::SingleService,
            terms: (0..d.choices()).map(|c| (us * d.choices() + c, 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
        });
    }
    for us in 0..d.users {
        for ap in 0..d.aps {
            for l in 0..d.wavelengths {
                for b in 0..d.branches {
                    constraints.push(Constraint {
                        name: format!("THR{}", tag(&[us, ap, l, b])),
                        family: RowFamily::Threshold,
                        terms: vec![
                            (lay.usinr(us, ap, l, b), 1.0),
                            (lay.s(us, ap, l, b), -problem.sinr_threshold),
                        ],
                        sense: Sense::Ge,
                        rhs: 0.0,
                    });
                }
            }
        }
    }

    let objective = (0..d.len()).map(|i| (d.len() + i, 1.0)).collect();
    Ok(MilpModel {
        dims: d,
        alpha,
        variables,
        constraints,
        objective,
    })
}

impl MilpModel {
    pub fn binaries(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn linearization_vars(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| matches!(v.role, VarRole::Linearization { .. }))
            .count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|(v, c)| c * x[*v]).sum()
    }

    /// Complete the model's variables for fixed selectors.
    ///
    /// With `S` fixed each product variable equals its SINR variable times
    /// a known 0/1, so every balance row becomes linear in its one SINR
    /// variable and is solved for it. Returns the full variable vector; use
    /// [`MilpModel::max_violation`] to check it against every row.
    pub fn solve_fixed(&self, assignment: &Assignment) -> Result<Vec<f64>> {
        if assignment.dims() != self.dims {
            return Err(Error::InvalidArgument(
                "assignment does not match the model".into(),
            ));
        }
        let mut x = vec![0.0; self.variables.len()];
        for (i, v) in self.variables.iter().enumerate() {
            if v.role == VarRole::Selector {
                x[i] = if assignment.as_slice()[i] { 1.0 } else { 0.0 };
            }
        }
        for row in &self.constraints {
            let RowFamily::Balance { sinr } = row.family else {
                continue;
            };
            let mut coef = 0.0;
            let mut constant = 0.0;
            for &(v, c) in &row.terms {
                match self.variables[v].role {
                    VarRole::Sinr if v == sinr => coef += c,
                    VarRole::Selector => constant += c * x[v],
                    VarRole::Linearization { sinr: s, selector } if s == sinr => coef += c * x[selector],
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "row {} couples more than one SINR variable",
                            row.name
                        )))
                    }
                }
            }
            x[sinr] = (row.rhs - constant) / coef;
        }
        for (i, v) in self.variables.iter().enumerate() {
            if let VarRole::Linearization { sinr, selector } = v.role {
                x[i] = x[sinr] * x[selector];
            }
        }
        Ok(x)
    }

    /// Largest scaled violation of any row and of the variable domains.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max);
        let domains = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xi)| match v.kind {
                VarKind::Binary => (xi - xi.clamp(0.0, 1.0).round()).abs(),
                VarKind::Continuous => (-xi).max(0.0),
            })
            .fold(0.0, f64::max);
        rows.max(domains)
    }

    /// SINR variable values of the selected tuples, in user order.
    pub fn selected_sinr(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dims;
        (0..d.users)
            .filter_map(|us| {
                (0..d.choices())
                    .map(|c| us * d.choices() + c)
                    .find(|&i| x[i] > 0.5)
                    .map(|i| x[d.len() + i])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{evaluate::evaluate_choices, Choice};
    use crate::NoiseParams;

    fn problem(dims: Dims) -> AllocationProblem {
        let n = dims.len();
        let signal = (0..n).map(|i| 1e-12 * (1.0 + (i * 7 % 13) as f64)).collect();
        let background = (0..n).map(|i| 1e-15 * (1.0 + (i * 5 % 11) as f64)).collect();
        AllocationProblem::new(dims, signal, background, 1e-13, 36.3078, NoiseParams::default()).unwrap()
    }

    #[test]
    fn cardinalities() {
        let p = problem(Dims::new(8, 4, 4, 4));
        let m = build_milp(&p, default_alpha(&p)).unwrap();
        assert_eq!(m.binaries(), 512);
        assert_eq!(m.linearization_vars(), 43008);
        assert_eq!(m.variables.len(), 512 * 2 + 43008);
        assert_eq!(m.constraints.len(), 3 * 43008 + 512 + 16 + 8 + 512);
        assert_eq!(m.variables[m.variables.len() - 1].name, "PHI_8_7_4_3_4_4_4");
        assert_eq!(m.variables[0].name, "S_1_1_1_1");
    }

    #[test]
    fn alpha_must_dominate() {
        let p = problem(Dims::new(2, 2, 1, 1));
        let bound = p.max_sinr_bound();
        assert!(matches!(build_milp(&p, bound), Err(Error::AlphaTooSmall { .. })));
        assert!(build_milp(&p, bound * 1.01).is_ok());
    }

    #[test]
    fn fixing_selectors_reproduces_closed_form() {
        let p = AllocationProblem {
            sinr_threshold: 0.1,
            ..problem(Dims::new(3, 2, 2, 2))
        };
        let m = build_milp(&p, default_alpha(&p)).unwrap();
        let choices = vec![Choice::new(0, 1, 1), Choice::new(1, 1, 0), Choice::new(0, 0, 1)];
        let x = m
            .solve_fixed(&Assignment::from_choices(p.dims, &choices))
            .unwrap();
        let eval = evaluate_choices(&p, &choices);
        for (a, b) in m.selected_sinr(&x).iter().zip(&eval.sinr) {
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
        assert!(m.max_violation(&x) < 1e-9, "{}", m.max_violation(&x));
        assert!((m.objective_value(&x) - eval.objective).abs() < 1e-9 * eval.objective);
    }

    #[test]
    fn shared_slot_breaks_a_row() {
        let p = problem(Dims::new(2, 2, 1, 1));
        let m = build_milp(&p, default_alpha(&p)).unwrap();
        let x = m
            .solve_fixed(&Assignment::from_choices(
                p.dims,
                &[Choice::new(0, 0, 0), Choice::new(0, 0, 0)],
            ))
            .unwrap();
        assert!(m.max_violation(&x) > 0.5);
    }
}
