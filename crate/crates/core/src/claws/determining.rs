use std::collections::BTreeMap;
use std::sync::Arc;

use super::ClawsError;
use crate::expr::{Atom, Expr, FunctionSymbol, Monomial, Poly, Var};
use crate::jet::{euler, total_x, EvolutionEquation};

/// A linear homogeneous system for the unknown functions `F` and `G1`.
#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub unknowns: Vec<Arc<FunctionSymbol>>,
    /// Each equation with the monomial in the splitting variables it came from.
    pub equations: Vec<(Expr, String)>,
}

/// Splits the numerator of `e` into coefficients of monomials in `vars`.
pub(crate) fn split_wrt(e: &Expr, vars: &[Var]) -> Result<BTreeMap<Monomial, Expr>, ClawsError> {
    let dep = |a: &Atom| vars.iter().any(|v| a.depends_on(v));
    let is_split_var = |a: &Atom| matches!(a, Atom::Var(v) if vars.contains(v));
    // the denominator is nonzero, so only the numerator has to vanish
    let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for (m, c) in e.num().terms() {
        let mut key = Vec::new();
        let mut rest = Vec::new();
        for (a, k) in m.factors() {
            if is_split_var(a) {
                key.push((a.clone(), *k));
            } else if dep(a) {
                return Err(ClawsError::SplitFailure(e.to_string()));
            } else {
                rest.push((a.clone(), *k));
            }
        }
        let key = Monomial::from_sorted(key);
        let term = Poly::from_term(Monomial::from_sorted(rest), c.clone());
        let slot = out.entry(key).or_default();
        *slot = slot.add(&term);
    }
    Ok(out
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(k, p)| (k, Expr::from_poly(p)))
        .collect())
}

/// The reduced condition H·E(F) + F_t + D_xG¹ = 0 for F = F(f_sig),
/// G¹ = G¹(g_sig), split with respect to the jet variables that occur in
/// neither signature.
pub fn determining_system(
    eq: &EvolutionEquation,
    f_sig: &[Var],
    g_sig: &[Var],
) -> Result<DeterminingSystem, ClawsError> {
    let allowed = [Var::T, Var::X, Var::U(0), Var::U(1)];
    if f_sig.iter().chain(g_sig).any(|v| !allowed.contains(v)) {
        return Err(ClawsError::SplitFailure(
            "signatures must be subsets of (t, x, u, u_x)".into(),
        ));
    }
    let f_sym = FunctionSymbol::free("F", f_sig.to_vec());
    let g_sym = FunctionSymbol::free("G1", g_sig.to_vec());
    let f = Expr::apply_default(&f_sym);
    let g = Expr::apply_default(&g_sym);
    let cond = &(&(eq.rhs() * &euler(&f)) + &f.diff(&Var::T)) + &total_x(&g);
    let mut split_vars = vec![Var::U(2), Var::U(3)];
    for v in [Var::U(0), Var::U(1)] {
        if !f_sig.contains(&v) && !g_sig.contains(&v) {
            split_vars.push(v);
        }
    }
    let parts = split_wrt(&cond, &split_vars)?;
    let equations = parts
        .into_iter()
        .map(|(k, e)| {
            let label = if k.is_one() {
                "1".to_string()
            } else {
                Expr::from_poly(Poly::from_term(k, num_traits::One::one())).to_string()
            };
            (e, label)
        })
        .collect();
    Ok(DeterminingSystem {
        unknowns: vec![f_sym, g_sym],
        equations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn heat_equation_split() {
        let eq = EvolutionEquation::new(parse("u_xx").unwrap()).unwrap();
        let sys = determining_system(
            &eq,
            &[Var::T, Var::X, Var::U(0)],
            &[Var::T, Var::X, Var::U(0), Var::U(1)],
        )
        .unwrap();
        let labels: Vec<&str> = sys.equations.iter().map(|(_, l)| l.as_str()).collect();
        assert_eq!(labels, ["1", "u_xx"]);
        // coefficient of u_xx: F_u + G1_{u_x}
        let f = Expr::apply_default(&sys.unknowns[0]);
        let g = Expr::apply_default(&sys.unknowns[1]);
        let expected = &f.diff(&Var::U(0)) + &g.diff(&Var::U(1));
        assert_eq!(sys.equations[1].0, expected);
    }

    #[test]
    fn constants_only_forces_trivial() {
        let eq = EvolutionEquation::new(parse("u_xx + u*u_x").unwrap()).unwrap();
        let sys = determining_system(&eq, &[], &[]).unwrap();
        // every condition is satisfied identically by constant F, G1
        assert!(sys.equations.is_empty());
    }

    #[test]
    fn rejects_higher_signatures() {
        let eq = EvolutionEquation::new(parse("u_xx").unwrap()).unwrap();
        assert!(determining_system(&eq, &[Var::U(2)], &[]).is_err());
    }
}
