//! Conserved vectors, characteristics and their determining equations.

mod determining;
mod linsys;
mod reduce;
mod solve;

use thiserror::Error;

pub use determining::{determining_system, DeterminingSystem};
pub use linsys::{LinearSystem, SolvedSystem};
pub use reduce::{reduce_order, strip_ux_linear};
pub use solve::{ansatz_monomials, flux_for_density, solve_determining, Completeness, Family, Solution, SolveOptions};

use crate::expr::{is_zero, Expr, Var};
use crate::jet::{euler, total_t, total_x, EvolutionEquation, JetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClawsError {
    #[error("the vector is not conserved: residual {0}")]
    NotConserved(String),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("cannot split `{0}`: not polynomial in the splitting variables")]
    SplitFailure(String),
}

/// A pair (F, G) with D_tF + D_xG = 0 on solutions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConservedVector {
    pub density: Expr,
    pub flux: Expr,
}

/// The multiplier λ with D_tF + D_xG = λ(u_t − H) modulo null divergences.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Characteristic(pub Expr);

fn only_tx(e: &Expr) -> bool {
    e.vars().iter().all(|v| !v.is_jet())
}

impl ConservedVector {
    pub fn new(density: Expr, flux: Expr) -> Self {
        ConservedVector { density, flux }
    }

    /// F = F(t,x,u,u_x) and G + F_{u_x}H = G¹(t,x,u,u_x).
    pub fn is_reduced(&self, eq: &EvolutionEquation) -> bool {
        let f_ok = self.density.jet_order().is_none_or(|k| k <= 1);
        let g1 = &self.flux + &(&self.density.diff(&Var::U(1)) * eq.rhs());
        f_ok && g1.jet_order().is_none_or(|k| k <= 1)
    }

    /// Both components depend on (t,x) at most.
    pub fn is_trivial_reduced(&self) -> bool {
        only_tx(&self.density) && only_tx(&self.flux)
    }

    /// D_tF + D_xG on solutions.
    pub fn divergence(&self, eq: &EvolutionEquation) -> Expr {
        &total_t(&self.density, eq) + &total_x(&self.flux)
    }

    pub fn sub(&self, other: &ConservedVector) -> ConservedVector {
        ConservedVector::new(&self.density - &other.density, &self.flux - &other.flux)
    }

    pub fn scale(&self, c: &Expr) -> ConservedVector {
        ConservedVector::new(c * &self.density, c * &self.flux)
    }
}

/// λ = E(F), the variational derivative of the density.
pub fn characteristic_of(cv: &ConservedVector) -> Characteristic {
    Characteristic(euler(&cv.density))
}

/// Two conserved vectors are equivalent iff their difference is trivial; for
/// evolution equations this holds iff the difference has zero characteristic.
pub fn are_equivalent(a: &ConservedVector, b: &ConservedVector, eq: &EvolutionEquation) -> Result<bool, ClawsError> {
    for cv in [a, b] {
        let r = cv.divergence(eq);
        if !is_zero(&r).is_zero() {
            return Err(ClawsError::NotConserved(r.to_string()));
        }
    }
    let d = a.sub(b);
    Ok(is_zero(&characteristic_of(&d).0).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn heat() -> EvolutionEquation {
        EvolutionEquation::new(parse("u_xx").unwrap()).unwrap()
    }

    fn cv(f: &str, g: &str) -> ConservedVector {
        ConservedVector::new(parse(f).unwrap(), parse(g).unwrap())
    }

    #[test]
    fn characteristic_examples() {
        assert_eq!(characteristic_of(&cv("exp(x)*u", "0")).0, parse("exp(x)").unwrap());
        assert_eq!(characteristic_of(&cv("u_x^3", "0")).0, parse("-6*u_x*u_xx").unwrap());
    }

    #[test]
    fn equivalence_examples() {
        let eq = heat();
        let base = cv("u", "-u_x");
        // adding the null divergence (D_x x^2, -D_t x^2) = (2x, 0)
        assert!(are_equivalent(&base, &cv("u + 2*x", "-u_x"), &eq).unwrap());
        assert!(!are_equivalent(&base, &cv("x*u", "u - x*u_x"), &eq).unwrap());
        assert!(are_equivalent(&base, &base, &eq).unwrap());
        assert!(are_equivalent(&base, &cv("u", "u"), &eq).is_err());
    }

    #[test]
    fn reduced_form_predicate() {
        let eq = heat();
        assert!(cv("u", "-u_x").is_reduced(&eq));
        assert!(!cv("u*u_xx", "0").is_reduced(&eq));
        assert!(cv("t*x", "1").is_trivial_reduced());
    }
}
