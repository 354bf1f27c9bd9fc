use std::collections::BTreeMap;

use crate::expr::{Atom, Expr, Var};

/// Solves `eqs[i] = 0` for `unknowns` one variable at a time, preferring
/// equations linear in some unknown and falling back to a single exponential
/// occurrence exp(αv + β). Returns `None` when neither rule applies.
pub(crate) fn solve_sequential(eqs: &[Expr], unknowns: &[Var]) -> Option<BTreeMap<Var, Expr>> {
    let mut eqs: Vec<Expr> = eqs.iter().map(Expr::numerator).collect();
    let mut open: Vec<Var> = unknowns.to_vec();
    let mut sol: BTreeMap<Var, Expr> = BTreeMap::new();
    while !open.is_empty() {
        let (i, v, value) = pick(&eqs, &open)?;
        eqs.remove(i);
        open.retain(|w| *w != v);
        for e in eqs.iter_mut() {
            *e = e.subs_var(&v, &value).numerator();
        }
        for s in sol.values_mut() {
            *s = s.subs_var(&v, &value);
        }
        sol.insert(v, value);
    }
    Some(sol)
}

fn pick(eqs: &[Expr], open: &[Var]) -> Option<(usize, Var, Expr)> {
    let solvers: [fn(&Expr, &Var) -> Option<Expr>; 2] = [solve_linear, solve_exponential];
    for solver in solvers {
        // prefer solutions free of the other unknowns
        let mut fallback = None;
        for (i, e) in eqs.iter().enumerate() {
            for v in open {
                if let Some(s) = solver(e, v) {
                    if open.iter().all(|w| !s.depends_on(w)) {
                        return Some((i, v.clone(), s));
                    }
                    fallback.get_or_insert((i, v.clone(), s));
                }
            }
        }
        if fallback.is_some() {
            return fallback;
        }
    }
    None
}

fn solve_linear(e: &Expr, v: &Var) -> Option<Expr> {
    let c = e.polynomial_coeffs(v)?;
    if c.keys().any(|k| *k > 1) {
        return None;
    }
    let c1 = c.get(&1)?;
    let c0 = c.get(&0).cloned().unwrap_or_else(Expr::zero);
    Some(-&(&c0 / c1))
}

/// a·exp(g) + b = 0 with a, b free of v and g linear in v.
fn solve_exponential(e: &Expr, v: &Var) -> Option<Expr> {
    let mut exps = e.num().atoms().into_iter().filter(|a| a.depends_on(v));
    let atom = exps.next()?;
    if exps.next().is_some() {
        return None;
    }
    let Atom::Exp(g) = &atom else {
        return None;
    };
    let coeffs = e.num().coeffs_in(&atom);
    if coeffs.keys().any(|k| *k > 1) {
        return None;
    }
    let a = Expr::from_poly(coeffs.get(&1)?.clone());
    let b = coeffs
        .get(&0)
        .map(|p| Expr::from_poly(p.clone()))
        .unwrap_or_else(Expr::zero);
    let target = Expr::ln(&-&(&b / &a));
    solve_linear(&(g - &target), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Declarations;

    fn p(s: &str) -> Expr {
        let d = Declarations::new().with_param("a").with_param("b").with_param("c");
        d.parse(s).unwrap()
    }

    #[test]
    fn exponential_chart() {
        // x' = exp(x), u' = exp(-x)*u
        let eqs = [&p("exp(x)") - &p("a"), &p("exp(-x)*u") - &p("b")];
        let s = solve_sequential(&eqs, &[Var::X, Var::U(0)]).unwrap();
        assert_eq!(s[&Var::X], p("ln(a)"));
        assert_eq!(s[&Var::U(0)], p("a*b"));
    }

    #[test]
    fn legendre_chart() {
        let eqs = [&p("u_x") - &p("a"), &p("x*u_x - u") - &p("b"), &p("x") - &p("c")];
        let s = solve_sequential(&eqs, &[Var::X, Var::U(0), Var::U(1)]).unwrap();
        assert_eq!(s[&Var::U(0)], p("a*c - b"));
    }

    #[test]
    fn nonlinear_is_rejected() {
        assert!(solve_sequential(&[&p("x^2") - &p("a")], &[Var::X]).is_none());
    }
}
