use std::collections::BTreeMap;
use std::fmt;

use super::invert::solve_sequential;
use super::ClassifyError;
use crate::claws::ConservedVector;
use crate::expr::{is_zero, Expr, Var};
use crate::jet::{total_t, total_x, EvolutionEquation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformationKind {
    Point,
    Contact,
}

/// t̃ = T(t), x̃ = X(t,x,u,u_x), ũ = U(t,x,u,u_x).
#[derive(Clone, Debug, PartialEq)]
pub struct ContactTransformation {
    pub t: Expr,
    pub x: Expr,
    pub u: Expr,
    /// Short human-readable origin, e.g. "hodograph".
    pub label: String,
}

fn placeholder(v: &Var) -> Var {
    match v {
        Var::T => Var::param("~t"),
        Var::X => Var::param("~x"),
        Var::U(k) => Var::param(&format!("~u{k}")),
        other => other.clone(),
    }
}

fn from_placeholder(v: &Var) -> Option<Expr> {
    let Var::Param(name) = v else {
        return None;
    };
    let rest = name.strip_prefix('~')?;
    match rest {
        "t" => Some(Expr::t()),
        "x" => Some(Expr::x()),
        _ => rest.strip_prefix('u')?.parse().ok().map(Expr::u),
    }
}

impl ContactTransformation {
    pub fn new(t: Expr, x: Expr, u: Expr, label: &str) -> Self {
        ContactTransformation {
            t,
            x,
            u,
            label: label.to_string(),
        }
    }

    pub fn identity() -> Self {
        Self::new(Expr::t(), Expr::x(), Expr::u(0), "identity")
    }

    /// x̃ = u, ũ = x.
    pub fn hodograph() -> Self {
        Self::new(Expr::t(), Expr::u(0), Expr::x(), "hodograph")
    }

    /// x̃ = u_x, ũ = x·u_x − u.
    pub fn legendre() -> Self {
        let u = &(&Expr::x() * &Expr::u(1)) - &Expr::u(0);
        Self::new(Expr::t(), Expr::u(1), u, "Legendre")
    }

    pub fn kind(&self) -> TransformationKind {
        let p = Var::U(1);
        if self.x.depends_on(&p) || self.u.depends_on(&p) {
            TransformationKind::Contact
        } else {
            TransformationKind::Point
        }
    }

    /// ũ_x̃ in the old coordinates.
    pub fn prolongation(&self) -> Expr {
        let p = Var::U(1);
        let xp = self.x.diff(&p);
        if !xp.is_zero_literal() {
            return &self.u.diff(&p) / &xp;
        }
        &total_x(&self.u) / &total_x(&self.x)
    }

    /// Expressions that must not vanish: T_t and D_xX.
    pub fn side_conditions(&self) -> Vec<Expr> {
        vec![self.t.diff(&Var::T), total_x(&self.x)]
    }

    /// T = T(t) with T_t ≠ 0, the contact condition, rank 2 of ∂(X,U)/∂(x,u,u_x)
    /// and D_xX ≠ 0, all as expressions.
    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |m: &str| Err(ClassifyError::DegenerateTransformation(format!("{self}: {m}")));
        if self.t.vars().iter().any(|v| *v != Var::T) {
            return bad("T must depend on t only");
        }
        if is_zero(&self.t.diff(&Var::T)).is_zero() {
            return bad("T_t vanishes");
        }
        for e in [&self.x, &self.u] {
            if e.jet_order().is_some_and(|k| k > 1) || e.vars().iter().any(|v| matches!(v, Var::Ut(_))) {
                return bad("X and U may depend on u_x at most");
            }
        }
        let p = Var::U(1);
        let (xp, up) = (self.x.diff(&p), self.u.diff(&p));
        let dx = |e: &Expr| &e.diff(&Var::X) + &(&e.diff(&Var::U(0)) * &Expr::u(1));
        let contact = &(&dx(&self.u) * &xp) - &(&dx(&self.x) * &up);
        if !is_zero(&contact).is_zero() {
            return bad("contact condition fails");
        }
        let cols = [Var::X, Var::U(0), p];
        let rank2 = (0..3).any(|i| {
            (i + 1..3).any(|j| {
                let m = &(&self.x.diff(&cols[i]) * &self.u.diff(&cols[j]))
                    - &(&self.x.diff(&cols[j]) * &self.u.diff(&cols[i]));
                !is_zero(&m).is_zero()
            })
        });
        if !rank2 {
            return bad("rank condition fails");
        }
        if is_zero(&total_x(&self.x)).is_zero() {
            return bad("D_x X vanishes");
        }
        Ok(())
    }

    /// Old coordinates (t, x, u, ..., u_order) expressed in the new ones.
    fn inverse_map(&self, order: u32) -> Result<BTreeMap<Var, Expr>, ClassifyError> {
        let mut eqs = vec![
            &self.t - &Expr::var(placeholder(&Var::T)),
            &self.x - &Expr::var(placeholder(&Var::X)),
        ];
        let mut unknowns = vec![Var::T, Var::X];
        let dxx = total_x(&self.x);
        let mut w = self.u.clone();
        for k in 0..=order.max(1) {
            if k == 1 {
                w = self.prolongation();
            } else if k > 1 {
                w = &total_x(&w) / &dxx;
            }
            eqs.push(&w - &Expr::var(placeholder(&Var::U(k))));
            unknowns.push(Var::U(k));
        }
        solve_sequential(&eqs, &unknowns).ok_or_else(|| ClassifyError::InversionFailure(format!("{self}")))
    }

    /// Rewrites an expression in old jet coordinates in the new chart.
    pub fn to_new_chart(&self, e: &Expr) -> Result<Expr, ClassifyError> {
        let map = self.inverse_map(e.jet_order().unwrap_or(0))?;
        let out = e.substitute(&|v: &Var| map.get(v).cloned());
        let out = out.substitute(&from_placeholder);
        if out
            .vars()
            .iter()
            .any(|v| matches!(v, Var::Param(p) if p.starts_with('~')))
        {
            return Err(ClassifyError::InversionFailure(format!("{self}")));
        }
        Ok(out)
    }

    /// The inverse transformation, computed from the first-order inverse map.
    pub fn inverse(&self) -> Result<ContactTransformation, ClassifyError> {
        let map = self.inverse_map(1)?;
        let get = |v: Var| map[&v].substitute(&from_placeholder);
        Ok(ContactTransformation::new(
            get(Var::T),
            get(Var::X),
            get(Var::U(0)),
            &format!("inverse of {}", self.label),
        ))
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ContactTransformation) -> ContactTransformation {
        let v = self.prolongation();
        let sub = |e: &Expr| {
            e.substitute(&|w: &Var| match w {
                Var::T => Some(self.t.clone()),
                Var::X => Some(self.x.clone()),
                Var::U(0) => Some(self.u.clone()),
                Var::U(1) => Some(v.clone()),
                _ => None,
            })
        };
        ContactTransformation::new(
            sub(&next.t),
            sub(&next.x),
            sub(&next.u),
            &format!("{}; {}", self.label, next.label),
        )
    }
}

impl fmt::Display for ContactTransformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t~ = {}, x~ = {}, u~ = {}", self.t, self.x, self.u)
    }
}

/// H̃ = ((U_u − X_uV)H + U_t − X_tV)/T_t, rewritten in the new chart.
pub fn apply_transformation(
    tr: &ContactTransformation,
    eq: &EvolutionEquation,
) -> Result<EvolutionEquation, ClassifyError> {
    tr.validate()?;
    let v = tr.prolongation();
    let u0 = Var::U(0);
    let a = &tr.u.diff(&u0) - &(&tr.x.diff(&u0) * &v);
    let b = &tr.u.diff(&Var::T) - &(&tr.x.diff(&Var::T) * &v);
    let h_old = &(&(&a * eq.rhs()) + &b) / &tr.t.diff(&Var::T);
    let h_new = tr.to_new_chart(&h_old)?;
    EvolutionEquation::new(h_new).map_err(|e| ClassifyError::DegenerateTransformation(e.to_string()))
}

/// F̃ = F/D_xX, G̃ = (G + F·D_tX/D_xX)/T_t in the new chart.
pub fn transform_conserved_vector(
    tr: &ContactTransformation,
    cv: &ConservedVector,
    eq: &EvolutionEquation,
) -> Result<ConservedVector, ClassifyError> {
    tr.validate()?;
    let dxx = total_x(&tr.x);
    let tt = tr.t.diff(&Var::T);
    let f = &cv.density / &dxx;
    let g = &(&cv.flux + &(&f * &total_t(&tr.x, eq))) / &tt;
    Ok(ConservedVector::new(tr.to_new_chart(&f)?, tr.to_new_chart(&g)?))
}
