//! CPLEX LP text export.

use std::fmt::Write;

use super::milp::{MilpModel, Sense, VarKind};

const LINE_WIDTH: usize = 100;

fn push_expr(out: &mut String, head: &str, terms: &[(usize, f64)], model: &MilpModel) {
    let mut line = String::from(head);
    for (i, &(v, c)) in terms.iter().enumerate() {
        let sign = if c < 0.0 {
            "-"
        } else if i == 0 {
            ""
        } else {
            "+"
        };
        let term = if c.abs() == 1.0 {
            format!(" {sign} {}", model.variables[v].name)
        } else {
            format!(" {sign} {:?} {}", c.abs(), model.variables[v].name)
        };
        if line.len() + term.len() > LINE_WIDTH && line.trim_start().len() > head.trim().len() {
            out.push_str(&line);
            out.push('\n');
            line = String::from("  ");
        }
        line.push_str(&term);
    }
    out.push_str(&line);
}

/// Render the model in CPLEX LP format. Output depends only on the model.
pub fn export_lp(model: &MilpModel) -> String {
    let d = model.dims;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ sum-SINR assignment: {} users, {} access points, {} wavelengths, {} branches, alpha {:?}",
        d.users, d.aps, d.wavelengths, d.branches, model.alpha
    );
    out.push_str("Maximize\n");
    if model.variables.is_empty() {
        out.push_str(" obj: 0 ZERO\nSubject To\n c0: ZERO = 0\nBounds\n ZERO = 0\nEnd\n");
        return out;
    }
    push_expr(&mut out, " obj:", &model.objective, model);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        push_expr(&mut out, &format!(" {}:", c.name), &c.terms, model);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {:?}", c.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
        let _ = writeln!(out, " {} >= 0", v.name);
    }
    out.push_str("Binary\n");
    for v in model.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        let _ = writeln!(out, " {}", v.name);
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{build_milp, AllocationProblem};
    use crate::{Dims, NoiseParams};

    #[test]
    fn empty_problem_is_minimal() {
        let p = AllocationProblem::new(
            Dims::new(0, 0, 0, 0),
            vec![],
            vec![],
            1e-13,
            36.3,
            NoiseParams::default(),
        )
        .unwrap();
        let text = export_lp(&build_milp(&p, 1e6).unwrap());
        assert!(text.contains("Maximize\n obj: 0 ZERO\nSubject To"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn single_user_objective_names_sinr_variables() {
        let d = Dims::new(1, 2, 1, 2);
        let p = AllocationProblem::new(
            d,
            vec![4e-12; 4],
            vec![1e-15; 4],
            1e-13,
            36.3,
            NoiseParams::default(),
        )
        .unwrap();
        let text = export_lp(&build_milp(&p, 1e4).unwrap());
        let obj: Vec<&str> = text
            .split("Subject To")
            .next()
            .unwrap()
            .split("obj:")
            .nth(1)
            .unwrap()
            .split_whitespace()
            .filter(|t| *t != "+")
            .collect();
        assert_eq!(
            obj,
            ["USINR_1_1_1_1", "USINR_1_1_1_2", "USINR_1_2_1_1", "USINR_1_2_1_2"]
        );
        let bal = text.lines().find(|l| l.starts_with(" BAL_1_1_1_1:")).unwrap();
        assert!(
            bal.contains(" USINR_1_1_1_1 - ") && bal.ends_with(" S_1_1_1_1 = 0.0"),
            "{bal}"
        );
        assert!(text.contains("Binary\n S_1_1_1_1\n"));
        assert!(text.lines().all(|l| l.len() <= 200));
    }
}
