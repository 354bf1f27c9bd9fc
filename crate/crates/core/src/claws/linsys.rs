//! Rule-based solver for linear homogeneous PDE systems in (t, x).
//!
//! Unknowns are function symbols whose parameters are a subset of (t, x).
//! The rules are exact: splitting with respect to variables absent from the
//! unknowns, elimination of undifferentiated unknowns, integration of
//! single-term equations, constant-coefficient ODEs with rational
//! characteristic roots, and recognition of a lone linear evolution equation
//! as a constrained function family. Equations no rule discharges are left as
//! a residual.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::{Atom, EvolutionConstraint, Expr, FuncApp, FunctionSymbol, Monomial, Rational, SymbolKind, Var};
use crate::jet::integrate;

/// Splits the numerator of `e` into coefficients of products of atoms that
/// depend on `vars`. Exponentials are factored so that `exp(a + b)` with `a`
/// depending on `vars` and `b` not contributes `exp(a)` to the key.
pub(crate) fn split_independent(e: &Expr, vars: &[Var]) -> BTreeMap<Monomial, Expr> {
    let dep = |a: &Atom| vars.iter().any(|v| a.depends_on(v));
    let mut out: BTreeMap<Monomial, Expr> = BTreeMap::new();
    for (m, c) in e.num().terms() {
        let mut key: BTreeMap<Atom, u32> = BTreeMap::new();
        let mut coeff = Expr::rational(c.clone());
        let mut exp_key = Expr::zero();
        for (a, k) in m.factors() {
            if !dep(a) {
                coeff = &coeff * &Expr::from_atom(a.clone()).pow(*k as i64);
                continue;
            }
            if let Atom::Exp(g) = a {
                if !g.den().atoms().iter().any(dep) {
                    let (gd, gr) = split_sum(g, &dep);
                    let kk = Expr::int(*k as i64);
                    exp_key = &exp_key + &(&gd * &kk);
                    coeff = &coeff * &Expr::exp(&(&gr * &kk));
                    continue;
                }
            }
            *key.entry(a.clone()).or_insert(0) += k;
        }
        if !exp_key.is_zero_literal() {
            // canonical exponential of the collected jet part
            if let Some(Atom::Exp(g)) = Expr::exp(&exp_key).as_atom() {
                *key.entry(Atom::Exp(g.clone())).or_insert(0) += 1;
            } else {
                coeff = &coeff * &Expr::exp(&exp_key);
            }
        }
        let key = Monomial::from_sorted(key.into_iter().collect());
        let slot = out.entry(key).or_insert_with(Expr::zero);
        *slot = &*slot + &coeff;
    }
    out.retain(|_, v| !v.is_zero_literal());
    out
}

/// `g = gd + gr` where the terms of `gd` depend on the predicate's variables.
fn split_sum(g: &Expr, dep: &dyn Fn(&Atom) -> bool) -> (Expr, Expr) {
    let den = g.denominator();
    let mut gd = Expr::zero();
    let mut gr = Expr::zero();
    for (m, c) in g.num().terms() {
        let t = &Expr::from_poly(crate::expr::Poly::from_term(m.clone(), c.clone())) / &den;
        if m.factors().iter().any(|(a, _)| dep(a)) {
            gd = &gd + &t;
        } else {
            gr = &gr + &t;
        }
    }
    (gd, gr)
}

/// The outcome of [`LinearSystem::solve`].
#[derive(Clone, Debug)]
pub struct SolvedSystem {
    /// The tracked expressions with every elimination applied.
    pub targets: Vec<Expr>,
    /// Unknowns left free: constants, functions, and constrained families.
    pub free: Vec<Arc<FunctionSymbol>>,
    /// Equations no rule could discharge.
    pub residual: Vec<Expr>,
    /// Coefficients divided by during elimination (assumed nonzero).
    pub side_conditions: Vec<Expr>,
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    unknowns: Vec<Arc<FunctionSymbol>>,
    equations: Vec<Expr>,
    targets: Vec<Expr>,
    side_conditions: Vec<Expr>,
    counter: usize,
    families: usize,
}

fn is_tx(v: &Var) -> bool {
    matches!(v, Var::T | Var::X)
}

impl LinearSystem {
    pub fn new(unknowns: Vec<Arc<FunctionSymbol>>, equations: Vec<Expr>, targets: Vec<Expr>) -> Self {
        let mut s = LinearSystem {
            unknowns,
            equations: Vec::new(),
            targets,
            side_conditions: Vec::new(),
            counter: 0,
            families: 0,
        };
        for e in equations {
            s.push_equation(e);
        }
        s
    }

    fn push_equation(&mut self, e: Expr) {
        let n = e.numerator();
        if n.is_zero_literal() {
            return;
        }
        let lc = n.leading_coefficient();
        let n = &n * &Expr::rational(lc.recip());
        if !self.equations.contains(&n) {
            self.equations.push(n);
        }
    }

    fn is_unknown(&self, s: &FunctionSymbol) -> bool {
        self.unknowns.iter().any(|u| **u == *s)
    }

    /// Linear terms (application, coefficient) of an equation.
    fn terms(&self, e: &Expr) -> Vec<(FuncApp, Expr)> {
        let mut out = Vec::new();
        for a in e.num().atoms() {
            if let Atom::Func(app) = &a {
                if self.is_unknown(&app.symbol) {
                    let c = e.num().coeffs_in(&a).remove(&1).unwrap_or_default();
                    out.push((app.clone(), &Expr::from_poly(c) / &e.denominator()));
                }
            }
        }
        out
    }

    fn fresh(&mut self, params: Vec<Var>) -> Arc<FunctionSymbol> {
        self.counter += 1;
        let name = if params.is_empty() {
            format!("c{}", self.counter)
        } else {
            format!("f{}", self.counter)
        };
        let s = FunctionSymbol::free(&name, params);
        self.unknowns.push(s.clone());
        s
    }

    fn substitute(&mut self, sym: &Arc<FunctionSymbol>, body: &Expr) {
        self.unknowns.retain(|u| u != sym);
        let eqs = std::mem::take(&mut self.equations);
        for e in eqs {
            let r = e.replace_function(sym, body);
            self.push_equation(r);
        }
        for t in &mut self.targets {
            *t = t.replace_function(sym, body);
        }
    }

    fn note_divisor(&mut self, c: &Expr) {
        if !c.is_constant() && !self.side_conditions.contains(c) {
            self.side_conditions.push(c.clone());
        }
    }

    pub fn solve(mut self, max_steps: usize) -> SolvedSystem {
        for _ in 0..max_steps {
            if self.equations.is_empty() || !self.step() {
                break;
            }
        }
        SolvedSystem {
            targets: self.targets,
            free: self.unknowns,
            residual: self.equations,
            side_conditions: self.side_conditions,
        }
    }

    fn step(&mut self) -> bool {
        let n = self.equations.len();
        for i in 0..n {
            if self.rule_split(i) {
                return true;
            }
        }
        for pass in 0..2 {
            for i in 0..self.equations.len() {
                if self.rule_eliminate(i, pass == 0) {
                    return true;
                }
            }
        }
        for i in 0..self.equations.len() {
            if self.rule_single_term(i) || self.rule_ode(i) {
                return true;
            }
        }
        for i in 0..self.equations.len() {
            if self.rule_family(i) {
                return true;
            }
        }
        false
    }

    /// Splits with respect to t or x when no unknown in the equation depends on it.
    fn rule_split(&mut self, i: usize) -> bool {
        let e = self.equations[i].clone();
        let terms = self.terms(&e);
        let mut used: BTreeSet<Var> = BTreeSet::new();
        for (app, _) in &terms {
            used.extend(app.symbol.params.iter().cloned());
        }
        let split: Vec<Var> = [Var::T, Var::X]
            .into_iter()
            .filter(|v| !used.contains(v) && e.depends_on(v))
            .collect();
        if split.is_empty() {
            return false;
        }
        let parts = split_independent(&e, &split);
        if parts.len() == 1 && parts.keys().next().is_some_and(|k| k.is_one()) {
            return false;
        }
        self.equations.remove(i);
        for (_, p) in parts {
            self.push_equation(p);
        }
        true
    }

    /// Solves for an undifferentiated unknown when the rest of the equation
    /// lives in its variables. The first pass only eliminates constants.
    fn rule_eliminate(&mut self, i: usize, constants_only: bool) -> bool {
        let e = self.equations[i].clone();
        let terms = self.terms(&e);
        for (app, c) in &terms {
            let sym = &app.symbol;
            if matches!(sym.kind, SymbolKind::Evolution(_)) || app.derivs.iter().any(|d| *d > 0) {
                continue;
            }
            if constants_only && sym.arity() > 0 {
                continue;
            }
            if terms.iter().filter(|(a, _)| a.symbol == *sym).count() > 1 {
                continue;
            }
            let rest = &e - &(c * &Expr::from_atom(Atom::Func(app.clone())));
            let body = -&(&rest / c);
            let mut vars: BTreeSet<Var> = body.vars().iter().filter(|v| is_tx(v)).cloned().collect();
            for (a2, _) in self.terms(&body) {
                vars.extend(a2.symbol.params.iter().cloned());
            }
            if vars.iter().all(|v| sym.params.contains(v)) {
                let sym = sym.clone();
                self.note_divisor(c);
                self.equations.remove(i);
                self.substitute(&sym, &body);
                return true;
            }
        }
        false
    }

    /// `c·∂^d f = 0` integrates to a polynomial in the differentiated variables.
    fn rule_single_term(&mut self, i: usize) -> bool {
        let e = self.equations[i].clone();
        let terms = self.terms(&e);
        let [(app, c)] = terms.as_slice() else {
            return false;
        };
        if matches!(app.symbol.kind, SymbolKind::Evolution(_)) {
            return false;
        }
        let sym = app.symbol.clone();
        self.note_divisor(c);
        self.equations.remove(i);
        let mut body = Expr::zero();
        for (pos, order) in app.derivs.iter().enumerate() {
            let v = &sym.params[pos];
            let others: Vec<Var> = sym.params.iter().filter(|w| *w != v).cloned().collect();
            for j in 0..*order {
                let g = self.fresh(others.clone());
                let term = &Expr::var(v.clone()).pow(j as i64) * &Expr::apply_default(&g);
                body = &body + &term;
            }
        }
        self.substitute(&sym, &body);
        true
    }

    /// Linear ODE in one variable for a single unknown: constant coefficients
    /// with rational characteristic roots, or first order with an integrable
    /// logarithmic derivative.
    fn rule_ode(&mut self, i: usize) -> bool {
        let e = self.equations[i].clone();
        let terms = self.terms(&e);
        let Some((first, _)) = terms.first() else {
            return false;
        };
        let sym = first.symbol.clone();
        if matches!(sym.kind, SymbolKind::Evolution(_)) || terms.iter().any(|(a, _)| a.symbol != sym) {
            return false;
        }
        let mut pos = None;
        for (a, _) in &terms {
            for (p, d) in a.derivs.iter().enumerate() {
                if *d > 0 {
                    if pos.is_some_and(|q| q != p) {
                        return false;
                    }
                    pos = Some(p);
                }
            }
        }
        let Some(pos) = pos else { return false };
        let v = sym.params[pos].clone();
        let others: Vec<Var> = sym.params.iter().filter(|w| **w != v).cloned().collect();
        let mut by_order: BTreeMap<u32, Expr> = BTreeMap::new();
        for (a, c) in &terms {
            by_order.insert(a.derivs[pos], c.clone());
        }
        let (&top, lead) = by_order.iter().next_back().unwrap();
        let lead = lead.clone();
        let ratios: BTreeMap<u32, Expr> = by_order.iter().map(|(k, c)| (*k, c / &lead)).collect();
        let body = if ratios.values().all(|r| r.is_constant()) {
            let coeffs: Vec<Rational> = (0..=top)
                .map(|k| {
                    ratios
                        .get(&k)
                        .and_then(|r| r.as_rational())
                        .unwrap_or_else(Rational::zero)
                })
                .collect();
            if ratios.values().any(|r| r.as_rational().is_none()) {
                return false;
            }
            let Some(roots) = rational_roots(&coeffs) else {
                return false;
            };
            let mut body = Expr::zero();
            let vx = Expr::var(v.clone());
            for (r, mult) in roots {
                let ex = Expr::exp(&(&Expr::rational(r) * &vx));
                for j in 0..mult {
                    let g = self.fresh(others.clone());
                    body = &body + &(&(&vx.pow(j as i64) * &ex) * &Expr::apply_default(&g));
                }
            }
            body
        } else if top == 1 {
            let k = -ratios.get(&0).cloned().unwrap_or_else(Expr::zero);
            if k.vars().iter().any(|w| is_tx(w) && !sym.params.contains(w)) {
                return false;
            }
            let Some(int) = integrate(&k, &v) else {
                return false;
            };
            let g = self.fresh(others.clone());
            &Expr::exp(&int) * &Expr::apply_default(&g)
        } else {
            return false;
        };
        self.note_divisor(&lead);
        self.equations.remove(i);
        self.substitute(&sym, &body);
        true
    }

    /// A lone equation `c·f_t + Σ c_k ∂_x^k f = 0` for an unknown f(t,x) that
    /// occurs nowhere else turns f into a family constrained by it.
    fn rule_family(&mut self, i: usize) -> bool {
        let e = self.equations[i].clone();
        let terms = self.terms(&e);
        let Some((first, _)) = terms.first() else {
            return false;
        };
        let sym = first.symbol.clone();
        if sym.params != [Var::T, Var::X] || terms.iter().any(|(a, _)| a.symbol != sym) {
            return false;
        }
        let elsewhere = self
            .equations
            .iter()
            .enumerate()
            .any(|(j, other)| j != i && self.terms(other).iter().any(|(a, _)| a.symbol == sym));
        if elsewhere {
            return false;
        }
        let mut ct = None;
        let mut rhs = Vec::new();
        for (a, c) in &terms {
            match (a.derivs[0], a.derivs[1]) {
                (1, 0) => ct = Some(c.clone()),
                (0, k) => rhs.push((k, c.clone())),
                _ => return false,
            }
        }
        let Some(ct) = ct else { return false };
        let mut constraint = Vec::new();
        for (k, c) in rhs {
            let r = -&(&c / &ct);
            if r.vars().iter().any(|v| !is_tx(v)) {
                return false;
            }
            constraint.push((k, r));
        }
        constraint.sort_by_key(|c| std::cmp::Reverse(c.0));
        self.families += 1;
        let name = if self.families == 1 {
            "h".to_string()
        } else {
            format!("h{}", self.families)
        };
        let h = FunctionSymbol::constrained(
            &name,
            vec![Var::T, Var::X],
            EvolutionConstraint {
                time_arg: 0,
                space_arg: 1,
                rhs: constraint,
            },
        );
        self.note_divisor(&ct);
        self.equations.remove(i);
        self.unknowns.push(h.clone());
        self.substitute(&sym, &Expr::apply_default(&h));
        true
    }
}

/// Rational roots with multiplicities of Σ c_k r^k, if they account for the
/// full degree.
fn rational_roots(coeffs: &[Rational]) -> Option<Vec<(Rational, u32)>> {
    let lcm = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut p: Vec<BigInt> = coeffs
        .iter()
        .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    let degree = p.len().checked_sub(1)?;
    let mut roots: Vec<(Rational, u32)> = Vec::new();
    let mut zero_mult = 0;
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Rational::zero(), zero_mult));
    }
    let candidates = |p: &[BigInt]| -> Option<Vec<Rational>> {
        let a0 = p[0].abs().to_u64()?;
        let an = p.last()?.abs().to_u64()?;
        if a0 > 1_000_000 || an > 1_000_000 {
            return None;
        }
        let divs = |n: u64| (1..=n).filter(move |d| n.is_multiple_of(*d));
        let mut out = Vec::new();
        for num in divs(a0) {
            for den in divs(an) {
                for s in [1i64, -1] {
                    let r = Rational::new(BigInt::from(s) * BigInt::from(num), BigInt::from(den));
                    if !out.contains(&r) {
                        out.push(r);
                    }
                }
            }
        }
        Some(out)
    };
    while p.len() > 1 {
        let cands = candidates(&p)?;
        let mut found = false;
        for r in cands {
            // synthetic division by (v − r)
            let mut q: Vec<Rational> = Vec::with_capacity(p.len() - 1);
            let mut acc = Rational::zero();
            for c in p.iter().rev() {
                acc = &acc * &r + Rational::from_integer(c.clone());
                q.push(acc.clone());
            }
            if !acc.is_zero() {
                continue;
            }
            q.pop();
            q.reverse();
            let l = q.iter().fold(BigInt::one(), |a, c| a.lcm(c.denom()));
            p = q
                .iter()
                .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
                .collect();
            match roots.iter_mut().find(|(x, _)| *x == r) {
                Some(e) => e.1 += 1,
                None => roots.push((r, 1)),
            }
            found = true;
            break;
        }
        if !found {
            return None;
        }
    }
    let total: u32 = roots.iter().map(|(_, m)| m).sum();
    (total as usize == degree).then(|| {
        roots.sort();
        roots
    })
}
