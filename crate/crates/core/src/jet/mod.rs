//! Total derivatives, the Euler operator and structural predicates on jet space.

mod integrate;

use std::sync::{Arc, Mutex};

use thiserror::Error;

pub use integrate::integrate;

use crate::expr::{is_zero, Expr, FunctionSymbol, Var, ZeroTest};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("right-hand side has jet order {0}; at most 2 is supported")]
    OrderTooHigh(u32),
    #[error("right-hand side does not depend on u_xx")]
    Degenerate,
    #[error("right-hand side may not contain t-derivatives of u")]
    MixedDerivatives,
    #[error("expression is not a total x-derivative")]
    NotADivergence,
    #[error("integration of `{0}` is outside the supported expression class")]
    UnsupportedIntegrand(String),
}

/// Structural properties of a right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StructuralFlags {
    pub quasi_linear: bool,
    pub fractionally_linear: bool,
    pub linear: bool,
}

/// A validated equation `u_t = H(t,x,u,u_x,u_xx)`.
#[derive(Clone, Debug)]
pub struct EvolutionEquation {
    rhs: Expr,
    flags: StructuralFlags,
    /// D_x^k H for k = 0, 1, ...
    dx_cache: Arc<Mutex<Vec<Expr>>>,
}

impl EvolutionEquation {
    pub fn new(rhs: Expr) -> Result<Self, JetError> {
        if rhs.vars().iter().any(|v| matches!(v, Var::Ut(_))) {
            return Err(JetError::MixedDerivatives);
        }
        match rhs.jet_order() {
            Some(k) if k > 2 => return Err(JetError::OrderTooHigh(k)),
            Some(2) => {}
            _ => return Err(JetError::Degenerate),
        }
        if is_zero(&rhs.diff(&Var::U(2))).is_zero() {
            return Err(JetError::Degenerate);
        }
        let flags = structural_flags(&rhs);
        Ok(EvolutionEquation {
            dx_cache: Arc::new(Mutex::new(vec![rhs.clone()])),
            rhs,
            flags,
        })
    }

    pub fn rhs(&self) -> &Expr {
        &self.rhs
    }

    pub fn flags(&self) -> StructuralFlags {
        self.flags
    }

    /// Function symbols occurring in H.
    pub fn symbols(&self) -> Vec<Arc<FunctionSymbol>> {
        self.rhs.function_symbols()
    }

    /// D_x^k H.
    pub fn dx_rhs(&self, k: u32) -> Expr {
        let mut cache = self.dx_cache.lock().expect("cache lock");
        while cache.len() <= k as usize {
            let next = total_x(cache.last().unwrap());
            cache.push(next);
        }
        cache[k as usize].clone()
    }
}

impl PartialEq for EvolutionEquation {
    fn eq(&self, other: &Self) -> bool {
        self.rhs == other.rhs
    }
}

/// D_x: ∂_x + Σ u_{k+1} ∂_{u_k} (and likewise on mixed t-derivatives).
pub fn total_x(e: &Expr) -> Expr {
    e.derivation(&|v: &Var| match v {
        Var::X => Some(Expr::one()),
        Var::U(k) => Some(Expr::u(k + 1)),
        Var::Ut(k) => Some(Expr::var(Var::Ut(k + 1))),
        _ => None,
    })
}

pub fn total_x_n(e: &Expr, n: u32) -> Expr {
    let mut out = e.clone();
    for _ in 0..n {
        out = total_x(&out);
    }
    out
}

/// On-shell D_t: ∂_t + Σ D_x^k H ∂_{u_k}.
pub fn total_t(e: &Expr, eq: &EvolutionEquation) -> Expr {
    let order = e.jet_order().unwrap_or(0);
    let dxh: Vec<Expr> = (0..=order).map(|k| eq.dx_rhs(k)).collect();
    e.derivation(&|v: &Var| match v {
        Var::T => Some(Expr::one()),
        Var::U(k) => Some(dxh[*k as usize].clone()),
        _ => None,
    })
}

/// Off-shell D_t, with u_t-jets as independent coordinates.
pub fn total_t_free(e: &Expr) -> Expr {
    e.derivation(&|v: &Var| match v {
        Var::T => Some(Expr::one()),
        Var::U(k) => Some(Expr::var(Var::Ut(*k))),
        _ => None,
    })
}

/// Euler operator Σ_k (−D_x)^k ∂_{u_k}.
pub fn euler(e: &Expr) -> Expr {
    let Some(order) = e.jet_order() else {
        return Expr::zero();
    };
    let mut out = Expr::zero();
    for k in 0..=order {
        let p = e.diff(&Var::U(k));
        if p.is_zero_literal() {
            continue;
        }
        let d = total_x_n(&p, k);
        out = if k % 2 == 0 { &out + &d } else { &out - &d };
    }
    out
}

/// Returns `f` with `D_x f = e`, obtained by peeling the top-order linear
/// coefficient, integrating it in the next-lower jet variable, and recursing.
pub fn antiderivative_x(e: &Expr) -> Result<Expr, JetError> {
    if !is_zero(&euler(e)).is_zero() {
        return Err(JetError::NotADivergence);
    }
    let f = peel(e)?;
    // peeling is exact when it succeeds; this guards the integrator
    if !is_zero(&(&total_x(&f) - e)).is_zero() {
        return Err(JetError::UnsupportedIntegrand(e.to_string()));
    }
    Ok(f)
}

fn peel(e: &Expr) -> Result<Expr, JetError> {
    let mut acc = Expr::zero();
    let mut rest = e.clone();
    loop {
        if rest.is_zero_literal() {
            return Ok(acc);
        }
        let Some(n) = rest.jet_order() else {
            let f = integrate(&rest, &Var::X).ok_or_else(|| JetError::UnsupportedIntegrand(rest.to_string()))?;
            return Ok(&acc + &f);
        };
        if n == 0 {
            return Err(JetError::NotADivergence);
        }
        let a = rest.diff(&Var::U(n));
        if a.depends_on(&Var::U(n)) {
            return Err(JetError::NotADivergence);
        }
        let phi = integrate(&a, &Var::U(n - 1)).ok_or_else(|| JetError::UnsupportedIntegrand(a.to_string()))?;
        let next = &rest - &total_x(&phi);
        if next.jet_order().is_some_and(|m| m >= n) {
            return Err(JetError::UnsupportedIntegrand(rest.to_string()));
        }
        acc = &acc + &phi;
        rest = next;
    }
}

/// Quasi-linearity, fractional linearity in u_xx, and linearity in the jets.
pub fn structural_flags(h: &Expr) -> StructuralFlags {
    let u2 = Var::U(2);
    let h2 = h.diff(&u2);
    let h22 = h2.diff(&u2);
    let quasi_linear = is_zero(&h22).is_zero();
    let fractionally_linear = quasi_linear || schwarzian_numerator_vanishes(&h2, &h22);
    let linear = quasi_linear
        && (0..=2).all(|k| {
            let c = h.diff(&Var::U(k));
            !c.depends_on_jets() && c.vars().iter().all(|v| matches!(v, Var::T | Var::X | Var::Param(_)))
        });
    StructuralFlags {
        quasi_linear,
        fractionally_linear,
        linear,
    }
}

/// H is fractionally linear in u_xx iff H_{u_xx} ≠ 0 and the Schwarzian
/// derivative of H with respect to u_xx vanishes.
pub fn is_fractionally_linear_u2(h: &Expr) -> bool {
    structural_flags(h).fractionally_linear
}

/// 2·H'·H''' − 3·H''² = 0 with primes denoting ∂_{u_xx}.
fn schwarzian_numerator_vanishes(h2: &Expr, h22: &Expr) -> bool {
    if is_zero(h2).is_zero() {
        return false;
    }
    let h222 = h22.diff(&Var::U(2));
    let s = &(&Expr::int(2) * &(h2 * &h222)) - &(&Expr::int(3) * &h22.pow(2));
    matches!(is_zero(&s), ZeroTest::Zero | ZeroTest::ProbablyZero { .. })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, parse_declarations};

    fn eq(src: &str) -> EvolutionEquation {
        EvolutionEquation::new(parse(src).unwrap()).unwrap()
    }

    #[test]
    fn total_x_examples() {
        assert_eq!(total_x(&parse("u").unwrap()), Expr::u(1));
        assert_eq!(total_x(&parse("x*u_x").unwrap()), parse("u_x + x*u_xx").unwrap());
        let d = parse_declarations("A(u)").unwrap();
        assert_eq!(total_x(&d.parse("A").unwrap()), d.parse("A[1](u)*u_x").unwrap());
    }

    #[test]
    fn total_t_examples() {
        let heat = eq("u_xx");
        assert_eq!(total_t(&parse("u").unwrap(), &heat), Expr::u(2));
        assert_eq!(
            total_t(&parse("u*u_x").unwrap(), &heat),
            parse("u_xx*u_x + u*u_xxx").unwrap()
        );
        assert_eq!(total_t(&parse("t").unwrap(), &heat), Expr::one());
    }

    #[test]
    fn euler_examples() {
        assert!(euler(&parse("u_xx").unwrap()).is_zero_literal());
        assert_eq!(euler(&parse("u*u_xx").unwrap()), parse("2*u_xx").unwrap());
        let d = parse_declarations("A(u); B(u)").unwrap();
        let dc = d.parse("A[1](u)*u_x^2 + A*u_xx + B*u_x").unwrap();
        assert!(euler(&dc).is_zero_literal());
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(
            antiderivative_x(&parse("u_x + x*u_xx").unwrap()).unwrap(),
            parse("x*u_x").unwrap()
        );
        let e = total_x(&parse("exp(u)").unwrap());
        assert_eq!(antiderivative_x(&e).unwrap(), parse("exp(u)").unwrap());
        let d = parse_declarations("A(u); B(u)").unwrap();
        let dc = d.parse("A[1](u)*u_x^2 + A*u_xx + B*u_x").unwrap();
        assert_eq!(antiderivative_x(&dc).unwrap(), d.parse("A*u_x + int_B(u)").unwrap());
        assert_eq!(antiderivative_x(&parse("u^2").unwrap()), Err(JetError::NotADivergence));
    }

    #[test]
    fn fractional_linearity() {
        assert!(is_fractionally_linear_u2(&parse("u_xx").unwrap()));
        assert!(is_fractionally_linear_u2(&parse("-1/u_xx").unwrap()));
        assert!(is_fractionally_linear_u2(
            &parse("(u*u_xx + x)/(u_x*u_xx - 1)").unwrap()
        ));
        assert!(!is_fractionally_linear_u2(&parse("u_xx^2").unwrap()));
        assert!(!is_fractionally_linear_u2(&parse("u_xx^3 + u_xx").unwrap()));
    }

    #[test]
    fn flags_examples() {
        let f = structural_flags(&parse("u_xx + u*u_x").unwrap());
        assert!(f.quasi_linear && !f.linear);
        let f = structural_flags(&parse("u_xx + x*u_x + u").unwrap());
        assert!(f.quasi_linear && f.linear);
        let f = structural_flags(&parse("-1/u_xx").unwrap());
        assert!(!f.quasi_linear && !f.linear && f.fractionally_linear);
    }

    #[test]
    fn rejects_invalid_equations() {
        assert_eq!(
            EvolutionEquation::new(parse("u_x").unwrap()).unwrap_err(),
            JetError::Degenerate
        );
        assert_eq!(
            EvolutionEquation::new(parse("u_xxx").unwrap()).unwrap_err(),
            JetError::OrderTooHigh(3)
        );
    }
}
