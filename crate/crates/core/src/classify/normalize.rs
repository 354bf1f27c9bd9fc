use super::transform::{transform_conserved_vector, ContactTransformation};
use super::{apply_transformation, ClassifyError};
use crate::claws::{characteristic_of, reduce_order, strip_ux_linear, ConservedVector};
use crate::expr::{is_zero, Expr, Var};
use crate::jet::EvolutionEquation;

/// A linear PDE system left unsolved by the pattern library.
#[derive(Clone, Debug, PartialEq)]
pub struct EmittedSystem {
    pub description: String,
    pub unknowns: Vec<String>,
    pub equations: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Normalization {
    Transformation(ContactTransformation),
    Unsolved(EmittedSystem),
}

fn is_zero_expr(e: &Expr) -> bool {
    is_zero(e).is_zero()
}

fn only_tx(e: &Expr) -> bool {
    e.vars().iter().all(|v| matches!(v, Var::T | Var::X | Var::Param(_)))
}

/// Reduces to F(t,x,u) when the reduced density is linear in u_x; `None` when
/// it is genuinely nonlinear in u_x.
fn point_form(cv: &ConservedVector, eq: &EvolutionEquation) -> Result<Option<ConservedVector>, ClassifyError> {
    let r = reduce_order(cv, eq)?;
    let p = Var::U(1);
    if !is_zero_expr(&r.density.diff(&p).diff(&p)) {
        return Ok(None);
    }
    Ok(Some(strip_ux_linear(&r, eq)?))
}

/// A transformation after which `cv` has characteristic 1. Point case:
/// (x̃, ũ) = (x, F) once F = F(t,x,u). When F is nonlinear in u_x the
/// hodograph and Legendre transformations are tried first.
pub fn normalize_char1(cv: &ConservedVector, eq: &EvolutionEquation) -> Result<Normalization, ClassifyError> {
    if is_zero_expr(&characteristic_of(cv).0) {
        return Err(ClassifyError::TrivialInput);
    }
    if let Some(s) = point_form(cv, eq)? {
        if s.is_trivial_reduced() {
            return Err(ClassifyError::TrivialInput);
        }
        let label = if s.density == Expr::u(0) {
            "identity".to_string()
        } else {
            format!("u~ = {}", s.density)
        };
        return Ok(Normalization::Transformation(ContactTransformation::new(
            Expr::t(),
            Expr::x(),
            s.density,
            &label,
        )));
    }
    for candidate in [ContactTransformation::legendre(), ContactTransformation::hodograph()] {
        let Ok(eq2) = apply_transformation(&candidate, eq) else {
            continue;
        };
        let Ok(cv2) = transform_conserved_vector(&candidate, cv, eq) else {
            continue;
        };
        if let Ok(Some(s)) = point_form(&cv2, &eq2) {
            if s.is_trivial_reduced() {
                continue;
            }
            let tr = if s.density == Expr::u(0) {
                candidate
            } else {
                candidate.then(&ContactTransformation::new(Expr::t(), Expr::x(), s.density, "scaling"))
            };
            return Ok(Normalization::Transformation(tr));
        }
    }
    Ok(Normalization::Unsolved(char1_system(&reduce_order(cv, eq)?.density)))
}

/// u_x·F_pp·X_x + F_pp·X_u + (F_x − u_x·F_xp − F_up)·X_p = 0 for X, with
/// the remaining components determined by quadratures.
fn char1_system(f: &Expr) -> EmittedSystem {
    let (x, u, p) = (Var::X, Var::U(0), Var::U(1));
    let fpp = f.diff(&p).diff(&p);
    let cp = &(&f.diff(&x) - &(&Expr::u(1) * &f.diff(&x).diff(&p))) - &f.diff(&u).diff(&p);
    EmittedSystem {
        description: "characteristic-one normalization: X_x, X_u, X_p coefficients of a linear first-order PDE".into(),
        unknowns: vec!["X(t,x,u,u_x)".into()],
        equations: vec![&Expr::u(1) * &fpp, fpp, cp],
    }
}

/// A point transformation mapping two independent laws to characteristics
/// (1, x̃).
pub fn normalize_pair(
    cv1: &ConservedVector,
    cv2: &ConservedVector,
    eq: &EvolutionEquation,
) -> Result<Normalization, ClassifyError> {
    let l1 = characteristic_of(cv1).0;
    let l2 = characteristic_of(cv2).0;
    if is_zero_expr(&l1) || is_zero_expr(&l2) {
        return Err(ClassifyError::TrivialInput);
    }
    let ratio = &l2 / &l1;
    if is_zero_expr(&ratio.diff(&Var::X)) && is_zero_expr(&ratio.diff(&Var::U(0))) && ratio.jet_order().is_none() {
        return Err(ClassifyError::DependentLaws);
    }
    if only_tx(&l1) && only_tx(&l2) {
        // x̃ = λ²/λ¹, ũ = λ¹u/(λ²/λ¹)_x
        let u = &(&l1 * &Expr::u(0)) / &ratio.diff(&Var::X);
        return Ok(Normalization::Transformation(ContactTransformation::new(
            Expr::t(),
            ratio,
            u,
            "characteristic pair",
        )));
    }
    if !is_zero_expr(&(&l1 - &Expr::one())) {
        // first bring the first law to characteristic 1
        let tr = match normalize_char1(cv1, eq)? {
            Normalization::Transformation(t) => t,
            unsolved => return Ok(unsolved),
        };
        let eq2 = apply_transformation(&tr, eq)?;
        let a = transform_conserved_vector(&tr, cv1, eq)?;
        let b = transform_conserved_vector(&tr, cv2, eq)?;
        return Ok(match normalize_pair(&a, &b, &eq2)? {
            Normalization::Transformation(t2) => Normalization::Transformation(tr.then(&t2)),
            other => other,
        });
    }
    let Some(s) = point_form(cv2, eq)? else {
        return Ok(Normalization::Unsolved(pair_system(&reduce_order(cv2, eq)?.density)));
    };
    let x_new = s.density.diff(&Var::U(0));
    let (xx, xu) = (x_new.diff(&Var::X), x_new.diff(&Var::U(0)));
    let u_new = match (is_zero_expr(&xx), is_zero_expr(&xu)) {
        (true, true) => return Err(ClassifyError::DependentLaws),
        (false, true) => &Expr::u(0) / &xx,
        (true, false) => -&(&Expr::x() / &xu),
        (false, false) => return Ok(Normalization::Unsolved(pair_system(&s.density))),
    };
    Ok(Normalization::Transformation(ContactTransformation::new(
        Expr::t(),
        x_new,
        u_new,
        "second-law chart",
    )))
}

/// X = F²_u and X_x·U_u − X_u·U_x = 1 for U.
fn pair_system(f2: &Expr) -> EmittedSystem {
    let x = f2.diff(&Var::U(0));
    EmittedSystem {
        description: "second-law chart: X = F2_u; solve X_x*U_u - X_u*U_x = 1".into(),
        unknowns: vec!["U(t,x,u)".into()],
        equations: vec![x.diff(&Var::X), -&x.diff(&Var::U(0)), x],
    }
}
