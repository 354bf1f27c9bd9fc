//! Indefinite integration with respect to one coordinate, limited to the
//! shapes that arise when peeling total derivatives.

use std::collections::BTreeMap;

use crate::expr::{Atom, Expr, FuncApp, FunctionSymbol, Monomial, Poly, SymbolKind, Var};

/// Returns `F` with `∂F/∂v = e`, or `None` if the integrand is outside the
/// supported shapes: Laurent polynomials in `v`, function symbols of an
/// argument linear in `v` (times powers of `v`), `v^k·exp(αv+β)`, and
/// logarithmic derivatives `κ·D_v/D`.
pub fn integrate(e: &Expr, v: &Var) -> Option<Expr> {
    if !e.depends_on(v) {
        return Some(e * &Expr::var(v.clone()));
    }
    let den = e.den();
    let vatom = Atom::Var(v.clone());
    if let Some((m, den0)) = split_den(den, &vatom, v) {
        let mut out = Expr::zero();
        for (mono, c) in e.num().terms() {
            let (rest, k) = mono.split_off(&vatom);
            out = &out + &integrate_term(&rest, c, k as i64 - m as i64, v)?;
        }
        return Some(&out / &Expr::from_poly(den0));
    }
    log_derivative(e, v)
}

/// `(m, D0)` when `den = v^m·D0` with `D0` free of `v`.
fn split_den(den: &Poly, vatom: &Atom, v: &Var) -> Option<(u32, Poly)> {
    let m = den.monomial_content().exponent(vatom);
    let d0 = if m == 0 {
        den.clone()
    } else {
        den.div_monomial_raw(&Monomial::atom(vatom.clone(), m))?
    };
    if d0.atoms().iter().any(|a| a.depends_on(v)) {
        return None;
    }
    Some((m, d0))
}

/// ∫ c · v^k · rest dv where `rest` has no bare `v` factor.
fn integrate_term(rest: &Monomial, c: &crate::Rational, k: i64, v: &Var) -> Option<Expr> {
    let mut free = Poly::from_term(Monomial::one(), c.clone());
    let mut dep: Vec<(Atom, u32)> = Vec::new();
    for (a, e) in rest.factors() {
        if a.depends_on(v) {
            dep.push((a.clone(), *e));
        } else {
            free = free.mul_raw(&Poly::from_term(Monomial::atom(a.clone(), *e), num_traits::One::one()));
        }
    }
    let free = Expr::from_poly(free);
    let vx = Expr::var(v.clone());
    let body = match dep.as_slice() {
        [] => {
            if k == -1 {
                Expr::ln(&vx)
            } else {
                &vx.pow(k + 1) / &Expr::int(k + 1)
            }
        }
        [(Atom::Func(app), 1)] if k >= 0 => power_times_function(app, k as u32, v)?,
        [(Atom::Exp(g), 1)] if k >= 0 => power_times_exp(g, k as u32, v)?,
        _ => return None,
    };
    Some(&free * &body)
}

/// `(α, β)` with `g = α v + β`, `α ≠ 0` free of `v`.
fn linear_in(g: &Expr, v: &Var) -> Option<(Expr, Expr)> {
    let cs: BTreeMap<u32, Expr> = g.polynomial_coeffs(v)?;
    if cs.keys().any(|k| *k > 1) {
        return None;
    }
    let alpha = cs.get(&1)?.clone();
    let beta = cs.get(&0).cloned().unwrap_or_else(Expr::zero);
    Some((alpha, beta))
}

/// Antiderivative of a function application with respect to argument `i`.
fn antiderivative_app(app: &FuncApp, i: usize) -> Option<Expr> {
    if app.derivs[i] > 0 {
        let mut d = app.derivs.clone();
        d[i] -= 1;
        return Some(Expr::apply_deriv(&app.symbol, app.args.clone(), d));
    }
    if app.symbol.arity() == 1 && !matches!(app.symbol.kind, SymbolKind::Evolution(_)) {
        let int = FunctionSymbol::antiderivative(&app.symbol);
        return Some(Expr::apply(&int, app.args.clone()));
    }
    None
}

/// ∫ v^k f(αv+β) dv by parts.
fn power_times_function(app: &FuncApp, k: u32, v: &Var) -> Option<Expr> {
    let dep: Vec<usize> = (0..app.args.len()).filter(|i| app.args[*i].depends_on(v)).collect();
    let [i] = dep.as_slice() else { return None };
    let (alpha, _) = linear_in(&app.args[*i], v)?;
    let big_f = &antiderivative_app(app, *i)? / &alpha;
    if k == 0 {
        return Some(big_f);
    }
    let vx = Expr::var(v.clone());
    // ∫ v^k f = v^k F − k ∫ v^{k-1} F
    let inner = integrate(&(&vx.pow(k as i64 - 1) * &big_f), v)?;
    Some(&(&vx.pow(k as i64) * &big_f) - &(&Expr::int(k as i64) * &inner))
}

/// ∫ v^k exp(αv+β) dv.
fn power_times_exp(g: &Expr, k: u32, v: &Var) -> Option<Expr> {
    let (alpha, _) = linear_in(g, v)?;
    let ex = Expr::exp(g);
    let vx = Expr::var(v.clone());
    let mut acc = Expr::zero();
    // Σ_j (−1)^j k!/(k−j)! v^{k−j} / α^{j+1}
    let mut coeff = Expr::one();
    for j in 0..=k {
        let term = &(&coeff * &vx.pow((k - j) as i64)) / &alpha.pow(j as i64 + 1);
        acc = &acc + &term;
        coeff = &(-&coeff) * &Expr::int((k - j) as i64);
    }
    Some(&acc * &ex)
}

/// κ·∂_vD/D with κ free of v integrates to κ·ln D.
fn log_derivative(e: &Expr, v: &Var) -> Option<Expr> {
    let d = e.denominator();
    let dd = d.diff(v);
    if dd.is_zero_literal() {
        return None;
    }
    let kappa = &e.numerator() / &dd;
    if kappa.depends_on(v) {
        return None;
    }
    Some(&kappa * &Expr::ln(&d))
}
