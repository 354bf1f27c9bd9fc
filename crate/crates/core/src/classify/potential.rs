use super::{ClassificationReport, ClassifyError};
use crate::expr::Expr;

/// A system for potentials, equations stored as printed `lhs = rhs` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSystem {
    pub equations: Vec<(String, Expr)>,
    pub note: Option<String>,
}

/// {v_x = u, v_t = Ĥ} and, with two laws, {v1_x = u, w_x = v1, w_t = Ȟ}.
pub fn emit_potential_system(report: &ClassificationReport) -> Result<Vec<PotentialSystem>, ClassifyError> {
    let forms = &report.canonical_forms;
    let hh = forms.h_hat.as_ref().ok_or(ClassifyError::NoDivergenceForm)?;
    let mut out = vec![PotentialSystem {
        equations: vec![("v_x".into(), Expr::u(0)), ("v_t".into(), hh.clone())],
        note: None,
    }];
    if let Some(hc) = &forms.h_check {
        out.push(PotentialSystem {
            equations: vec![
                ("v1_x".into(), Expr::u(0)),
                ("w_x".into(), Expr::param("v1")),
                ("w_t".into(), hc.clone()),
            ],
            note: Some("the equation v1_t = D_x(w_t) follows from the others and is omitted".into()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{decide, DecideOptions};
    use crate::expr::parse_declarations;
    use crate::jet::EvolutionEquation;

    fn report(decls: &str, h: &str) -> ClassificationReport {
        let d = parse_declarations(decls).unwrap();
        decide(
            &EvolutionEquation::new(d.parse(h).unwrap()).unwrap(),
            &DecideOptions::default(),
        )
    }

    #[test]
    fn heat_potentials() {
        let s = emit_potential_system(&report("", "u_xx")).unwrap();
        assert_eq!(s[0].equations[1].1, Expr::u(1));
        assert_eq!(s[1].equations[2].1, Expr::u(0));
    }

    #[test]
    fn generic_diffusion_convection() {
        let d = parse_declarations("A(u); B(u)").unwrap();
        let s = emit_potential_system(&report("A(u); B(u)", "diff(A*u_x, x) + B*u_x")).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].equations[1].1, d.parse("A*u_x + int_B(u)").unwrap());
    }

    #[test]
    fn zero_convection_second_level() {
        let d = parse_declarations("A(u)").unwrap();
        let s = emit_potential_system(&report("A(u)", "diff(A*u_x, x)")).unwrap();
        assert_eq!(s[1].equations[2].1, d.parse("int_A(u)").unwrap());
        let r = report("", "u_xx^2");
        assert_eq!(emit_potential_system(&r), Err(ClassifyError::NoDivergenceForm));
    }
}
