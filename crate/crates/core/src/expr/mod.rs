//! Jet-space expressions in rational normal form.
//!
//! An [`Expr`] is a quotient of two [`Poly`]s over atoms (jet coordinates,
//! function-symbol derivatives and opaque elementary functions). Construction
//! always canonicalizes: the gcd of numerator and denominator is cancelled,
//! exponential factors are merged, and the denominator is scaled to a unit
//! leading coefficient. For expressions rational in algebraically independent
//! atoms, equal expressions therefore have identical representations.

mod atom;
mod eval;
mod parse;
pub mod poly;
mod print;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive};

pub use atom::{Atom, EvolutionConstraint, FuncApp, FunctionSymbol, SymbolKind, Var};
pub use eval::{EvalError, FunctionModel, HashedFunctionModel, Point};
pub use parse::{parse, parse_declarations, Declarations, ParseError};
pub use poly::{Monomial, Poly};
pub(crate) use zero::{canonical_is_exact, sample_value};
pub use zero::{is_zero, is_zero_with, ZeroTest, ZeroTestOptions};

type VarMap<'a> = &'a dyn Fn(&Var) -> Option<Expr>;

/// Exact rational numbers used for every coefficient.
pub type Rational = num_rational::BigRational;

#[derive(Debug)]
struct Inner {
    num: Poly,
    den: Poly,
    vars: BTreeSet<Var>,
}

/// Immutable, cheaply clonable expression in canonical form.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.num == other.0.num && self.0.den == other.0.den)
    }
}
impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.0.num, &self.0.den).cmp(&(&other.0.num, &other.0.den))
    }
}
impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.num.hash(state);
        self.0.den.hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn poly_vars(p: &Poly, out: &mut BTreeSet<Var>) {
    for (m, _) in p.terms() {
        for (a, _) in m.factors() {
            a.collect_vars(out);
        }
    }
}

impl Expr {
    /// Builds from a numerator and denominator that are already coprime.
    fn from_reduced(num: Poly, den: Poly) -> Expr {
        let (mut num, mut den) = (num.merge_exps(), den.merge_exps());
        if num.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = den.as_constant() {
            num = num.scale(&c.recip());
            den = Poly::one();
        } else {
            // move exponential content of the denominator into the numerator
            let content = den.monomial_content();
            let exps: Vec<(Atom, u32)> = content
                .factors()
                .iter()
                .filter(|(a, _)| matches!(a, Atom::Exp(_)))
                .cloned()
                .collect();
            if !exps.is_empty() {
                let m = Monomial::from_sorted(exps.clone());
                den = den.div_monomial_raw(&m).expect("content divides");
                for (a, e) in exps {
                    if let Atom::Exp(g) = a {
                        let inv = Expr::exp(&(-&g * Expr::int(e as i64)));
                        num = num.mul(&inv.0.num);
                        den = den.mul(&inv.0.den);
                    }
                }
            }
            let lc = den.leading_coeff();
            if !lc.is_one() {
                let inv = lc.recip();
                num = num.scale(&inv);
                den = den.scale(&inv);
            }
        }
        let mut vars = BTreeSet::new();
        poly_vars(&num, &mut vars);
        poly_vars(&den, &mut vars);
        Expr(Arc::new(Inner { num, den, vars }))
    }

    /// Builds `num/den`, cancelling common factors. Panics on a zero denominator.
    pub fn from_parts(num: Poly, den: Poly) -> Expr {
        assert!(!den.is_zero(), "division by zero expression");
        if num.is_zero() {
            return Expr::zero();
        }
        if den.as_constant().is_some() {
            return Expr::from_reduced(num, den);
        }
        let g = poly::gcd(&num, &den);
        if g.is_one() {
            return Expr::from_reduced(num, den);
        }
        let n = poly::div_exact(&num, &g).expect("gcd divides numerator");
        let d = poly::div_exact(&den, &g).expect("gcd divides denominator");
        Expr::from_reduced(n, d)
    }

    pub fn from_poly(p: Poly) -> Expr {
        Expr::from_reduced(p, Poly::one())
    }

    pub(crate) fn from_atom(a: Atom) -> Expr {
        Expr::from_poly(Poly::from_atom(a))
    }

    pub fn zero() -> Expr {
        Expr(Arc::new(Inner {
            num: Poly::zero(),
            den: Poly::one(),
            vars: BTreeSet::new(),
        }))
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(Rational::from_integer(n.into()))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::rational(Rational::new(n.into(), d.into()))
    }

    pub fn rational(c: Rational) -> Expr {
        Expr(Arc::new(Inner {
            num: Poly::constant(c),
            den: Poly::one(),
            vars: BTreeSet::new(),
        }))
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_atom(Atom::Var(v))
    }

    pub fn t() -> Expr {
        Expr::var(Var::T)
    }

    pub fn x() -> Expr {
        Expr::var(Var::X)
    }

    /// The jet coordinate u_k = ∂^k u/∂x^k.
    pub fn u(k: u32) -> Expr {
        Expr::var(Var::U(k))
    }

    pub fn param(name: &str) -> Expr {
        Expr::var(Var::param(name))
    }

    pub fn num(&self) -> &Poly {
        &self.0.num
    }

    pub fn den(&self) -> &Poly {
        &self.0.den
    }

    pub fn numerator(&self) -> Expr {
        Expr::from_poly(self.0.num.clone())
    }

    pub fn denominator(&self) -> Expr {
        Expr::from_poly(self.0.den.clone())
    }

    /// True when the canonical form is literally zero.
    pub fn is_zero_literal(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.den.is_one() && self.0.num.is_one()
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.0.den.is_one() {
            self.0.num.as_constant()
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational()
            .filter(|r| r.is_integer())
            .and_then(|r| r.to_integer().to_i64())
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_one()
    }

    /// Returns the single atom if the expression is exactly that atom.
    pub fn as_atom(&self) -> Option<&Atom> {
        if !self.0.den.is_one() || !self.0.num.is_monomial() {
            return None;
        }
        let (m, c) = self.0.num.leading().unwrap();
        match m.factors() {
            [(a, 1)] if c.is_one() => Some(a),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        self.as_atom().and_then(Atom::as_var)
    }

    pub fn vars(&self) -> &BTreeSet<Var> {
        &self.0.vars
    }

    pub fn depends_on(&self, v: &Var) -> bool {
        self.0.vars.contains(v)
    }

    pub fn is_constant(&self) -> bool {
        self.0.vars.is_empty()
    }

    /// Highest k such that the expression depends on u_k.
    pub fn jet_order(&self) -> Option<u32> {
        self.0
            .vars
            .iter()
            .filter_map(|v| match v {
                Var::U(k) => Some(*k),
                _ => None,
            })
            .max()
    }

    /// Depends on some u_k or mixed t-derivative.
    pub fn depends_on_jets(&self) -> bool {
        self.0.vars.iter().any(Var::is_jet)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.0.num.atoms();
        s.extend(self.0.den.atoms());
        s
    }

    /// Function-symbol applications occurring anywhere, including nested ones.
    pub fn function_apps(&self) -> Vec<FuncApp> {
        let mut out = Vec::new();
        fn walk(e: &Expr, out: &mut Vec<FuncApp>) {
            for a in e.atoms() {
                match a {
                    Atom::Func(f) => {
                        for arg in &f.args {
                            walk(arg, out);
                        }
                        if !out.contains(&f) {
                            out.push(f);
                        }
                    }
                    Atom::Exp(g) | Atom::Ln(g) | Atom::Sin(g) | Atom::Cos(g) => walk(&g, out),
                    Atom::Var(_) => {}
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Function symbols occurring anywhere in the expression.
    pub fn function_symbols(&self) -> Vec<Arc<FunctionSymbol>> {
        let mut out: Vec<Arc<FunctionSymbol>> = Vec::new();
        for f in self.function_apps() {
            if !out.iter().any(|s| s == &f.symbol) {
                out.push(f.symbol.clone());
            }
        }
        out
    }

    pub fn pow(&self, n: i64) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        let k = n.unsigned_abs() as u32;
        let p = Expr::from_reduced(self.0.num.pow(k), self.0.den.pow(k));
        if n > 0 {
            p
        } else {
            p.recip()
        }
    }

    /// Multiplicative inverse; panics when the expression is zero.
    pub fn recip(&self) -> Expr {
        assert!(!self.is_zero_literal(), "division by zero expression");
        Expr::from_reduced(self.0.den.clone(), self.0.num.clone())
    }

    pub fn checked_div(&self, other: &Expr) -> Option<Expr> {
        if other.is_zero_literal() {
            None
        } else {
            Some(self * &other.recip())
        }
    }

    // -- elementary functions ------------------------------------------------

    pub fn exp(g: &Expr) -> Expr {
        if g.is_zero_literal() {
            return Expr::one();
        }
        // exp(k·ln a + rest) = a^k · exp(rest) for integer k
        if g.is_polynomial() {
            let mut rest = Poly::zero();
            let mut factor = Expr::one();
            let mut pulled = false;
            for (m, c) in g.num().terms() {
                if let [(Atom::Ln(a), 1)] = m.factors() {
                    if c.is_integer() {
                        if let Some(k) = c.to_integer().to_i64() {
                            factor = &factor * &a.pow(k);
                            pulled = true;
                            continue;
                        }
                    }
                }
                rest = rest.add(&Poly::from_term(m.clone(), c.clone()));
            }
            if pulled {
                let rest = Expr::from_poly(rest);
                return if rest.is_zero_literal() {
                    factor
                } else {
                    &factor * &Expr::from_atom(Atom::Exp(rest))
                };
            }
        }
        Expr::from_atom(Atom::Exp(g.clone()))
    }

    pub fn ln(g: &Expr) -> Expr {
        if g.is_one() {
            return Expr::zero();
        }
        if let Some(Atom::Exp(a)) = g.as_atom() {
            return a.clone();
        }
        Expr::from_atom(Atom::Ln(g.clone()))
    }

    pub fn sin(g: &Expr) -> Expr {
        if g.is_zero_literal() {
            return Expr::zero();
        }
        Expr::from_atom(Atom::Sin(g.clone()))
    }

    pub fn cos(g: &Expr) -> Expr {
        if g.is_zero_literal() {
            return Expr::one();
        }
        Expr::from_atom(Atom::Cos(g.clone()))
    }

    // -- function symbols ----------------------------------------------------

    /// `f(args)` with no derivatives.
    pub fn apply(sym: &Arc<FunctionSymbol>, args: Vec<Expr>) -> Expr {
        let n = args.len();
        Expr::apply_deriv(sym, args, vec![0; n])
    }

    /// `f` applied at its default arguments.
    pub fn apply_default(sym: &Arc<FunctionSymbol>) -> Expr {
        let args = sym.params.iter().cloned().map(Expr::var).collect();
        Expr::apply(sym, args)
    }

    /// Derivative of a function symbol, with declared relations applied.
    pub fn apply_deriv(sym: &Arc<FunctionSymbol>, args: Vec<Expr>, derivs: Vec<u32>) -> Expr {
        assert_eq!(args.len(), sym.arity(), "arity mismatch for {}", sym.name);
        assert_eq!(derivs.len(), args.len());
        match &sym.kind {
            SymbolKind::Antiderivative(of) if derivs[0] >= 1 => Expr::apply_deriv(of, args, vec![derivs[0] - 1]),
            SymbolKind::Evolution(c) if derivs[c.time_arg] >= 1 => Expr::rewrite_evolution(sym, c, args, derivs),
            _ => Expr::from_atom(Atom::Func(FuncApp {
                symbol: sym.clone(),
                args,
                derivs,
            })),
        }
    }

    fn rewrite_evolution(
        sym: &Arc<FunctionSymbol>,
        c: &EvolutionConstraint,
        args: Vec<Expr>,
        mut derivs: Vec<u32>,
    ) -> Expr {
        let formal: Vec<Var> = (0..args.len()).map(|i| Var::param(&format!("#{i}"))).collect();
        let ft = formal[c.time_arg].clone();
        let fs = formal[c.space_arg].clone();
        let fargs: Vec<Expr> = formal.iter().cloned().map(Expr::var).collect();
        derivs[c.time_arg] -= 1;
        let remaining_t = derivs[c.time_arg];
        derivs[c.time_arg] = 0;
        // Σ coeff_k(t,x) ∂_space^k f, then the leftover time derivatives
        let mut body = Expr::zero();
        for (k, coeff) in &c.rhs {
            let coeff = coeff.substitute(&|v: &Var| match v {
                Var::T => Some(Expr::var(ft.clone())),
                Var::X => Some(Expr::var(fs.clone())),
                _ => None,
            });
            let mut d = derivs.clone();
            d[c.space_arg] += k;
            body = &body + &(&coeff * &Expr::apply_deriv(sym, fargs.clone(), d));
        }
        for _ in 0..remaining_t {
            body = body.diff(&ft);
        }
        body.substitute(&|v: &Var| formal.iter().position(|f| f == v).map(|i| args[i].clone()))
    }

    // -- calculus --------------------------------------------------------------

    /// Partial derivative with respect to a coordinate.
    pub fn diff(&self, v: &Var) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        self.derivation(&|w: &Var| (w == v).then(Expr::one))
    }

    /// Applies the derivation sending each coordinate `v` to `field(v)`
    /// (zero when `None`), extended by the chain rule.
    pub fn derivation(&self, field: &dyn Fn(&Var) -> Option<Expr>) -> Expr {
        if !self.vars().iter().any(|v| field(v).is_some()) {
            return Expr::zero();
        }
        let dn = poly_derivation(self.num(), field);
        if self.0.den.is_one() {
            return dn;
        }
        let dd = poly_derivation(self.den(), field);
        let den = self.denominator();
        // (N'/D) − (N/D)(D'/D)
        &(&dn - &(self * &dd)) / &den
    }

    pub fn diff_n(&self, v: &Var, n: u32) -> Expr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.diff(v);
        }
        e
    }

    // -- substitution ----------------------------------------------------------

    /// Replaces coordinates; unmapped variables are kept.
    pub fn substitute(&self, f: &dyn Fn(&Var) -> Option<Expr>) -> Expr {
        if !self.vars().iter().any(|v| f(v).is_some()) {
            return self.clone();
        }
        self.map_atoms(
            &mut |a| match a {
                Atom::Var(v) => Some(f(v).unwrap_or_else(|| Expr::var(v.clone()))),
                _ => None,
            },
            Some(f),
        )
    }

    pub fn subs_var(&self, v: &Var, value: &Expr) -> Expr {
        self.substitute(&|w: &Var| (w == v).then(|| value.clone()))
    }

    /// Replaces every application of `sym` by `body` (an expression in the
    /// symbol's formal parameters), differentiated as required.
    pub fn replace_function(&self, sym: &FunctionSymbol, body: &Expr) -> Expr {
        self.replace_functions(&|s: &FunctionSymbol| (s == sym).then(|| body.clone()))
    }

    pub fn replace_functions(&self, f: &dyn Fn(&FunctionSymbol) -> Option<Expr>) -> Expr {
        if !self.function_apps().iter().any(|a| f(&a.symbol).is_some()) {
            return self.clone();
        }
        self.map_atoms(
            &mut |a| match a {
                Atom::Func(app) => {
                    let body = f(&app.symbol)?;
                    let args: Vec<Expr> = app.args.iter().map(|x| x.replace_functions(f)).collect();
                    let mut d = body;
                    for (i, n) in app.derivs.iter().enumerate() {
                        d = d.diff_n(&app.symbol.params[i], *n);
                    }
                    let params = &app.symbol.params;
                    Some(d.substitute(&|v: &Var| params.iter().position(|p| p == v).map(|i| args[i].clone())))
                }
                _ => None,
            },
            None,
        )
        .replace_functions_nested(f)
    }

    fn replace_functions_nested(self, f: &dyn Fn(&FunctionSymbol) -> Option<Expr>) -> Expr {
        // nested occurrences inside other atoms
        if !self.function_apps().iter().any(|a| f(&a.symbol).is_some()) {
            return self;
        }
        self.map_atoms(
            &mut |a| match a {
                Atom::Func(app) => {
                    let args = app.args.iter().map(|x| x.replace_functions(f)).collect();
                    Some(Expr::apply_deriv(&app.symbol, args, app.derivs.clone()))
                }
                Atom::Exp(g) => Some(Expr::exp(&g.replace_functions(f))),
                Atom::Ln(g) => Some(Expr::ln(&g.replace_functions(f))),
                Atom::Sin(g) => Some(Expr::sin(&g.replace_functions(f))),
                Atom::Cos(g) => Some(Expr::cos(&g.replace_functions(f))),
                Atom::Var(_) => None,
            },
            None,
        )
    }

    /// Rebuilds the expression with each atom replaced by `f(atom)`; atoms for
    /// which `f` returns `None` are rebuilt recursively under `var_map`.
    pub(crate) fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Option<Expr>, var_map: Option<VarMap<'_>>) -> Expr {
        let mut cache: BTreeMap<Atom, Expr> = BTreeMap::new();
        for a in self.atoms() {
            let val = match f(&a) {
                Some(v) => v,
                None => match (&a, var_map) {
                    (Atom::Var(_), _) | (_, None) => Expr::from_atom(a.clone()),
                    (Atom::Func(app), Some(m)) => {
                        let args = app.args.iter().map(|x| x.substitute(m)).collect();
                        Expr::apply_deriv(&app.symbol, args, app.derivs.clone())
                    }
                    (Atom::Exp(g), Some(m)) => Expr::exp(&g.substitute(m)),
                    (Atom::Ln(g), Some(m)) => Expr::ln(&g.substitute(m)),
                    (Atom::Sin(g), Some(m)) => Expr::sin(&g.substitute(m)),
                    (Atom::Cos(g), Some(m)) => Expr::cos(&g.substitute(m)),
                },
            };
            cache.insert(a, val);
        }
        let n = eval_poly(self.num(), &cache);
        if self.0.den.is_one() {
            return n;
        }
        let d = eval_poly(self.den(), &cache);
        &n / &d
    }

    /// Coefficients of the numerator with respect to `v`, provided the
    /// denominator and every other atom are free of `v`.
    pub fn polynomial_coeffs(&self, v: &Var) -> Option<BTreeMap<u32, Expr>> {
        if self.den().atoms().iter().any(|a| a.depends_on(v)) {
            return None;
        }
        let atom = Atom::Var(v.clone());
        if self.num().atoms().iter().any(|a| a != &atom && a.depends_on(v)) {
            return None;
        }
        let den = self.denominator();
        Some(
            self.num()
                .coeffs_in(&atom)
                .into_iter()
                .map(|(k, p)| (k, &Expr::from_poly(p) / &den))
                .collect(),
        )
    }

    /// Numeric coefficient of the leading term of the numerator.
    pub fn leading_coefficient(&self) -> Rational {
        self.num().leading_coeff()
    }

    pub fn is_negative_literal(&self) -> bool {
        self.leading_coefficient().is_negative()
    }
}

fn eval_poly(p: &Poly, vals: &BTreeMap<Atom, Expr>) -> Expr {
    // group terms with a common denominator-free fast path
    let mut acc_poly = Poly::zero();
    let mut acc = Expr::zero();
    for (m, c) in p.terms() {
        let mut term = Expr::rational(c.clone());
        for (a, e) in m.factors() {
            term = &term * &vals[a].pow(*e as i64);
        }
        if term.0.den.is_one() {
            acc_poly = acc_poly.add(&term.0.num);
        } else {
            acc = &acc + &term;
        }
    }
    &Expr::from_poly(acc_poly) + &acc
}

/// Σ_a ∂P/∂a · D(a) over the atoms a of P.
fn poly_derivation(p: &Poly, field: &dyn Fn(&Var) -> Option<Expr>) -> Expr {
    let mut out_poly = Poly::zero();
    let mut out = Expr::zero();
    for a in p.atoms() {
        let da = atom_derivation(&a, field);
        if da.is_zero_literal() {
            continue;
        }
        let mut formal = Poly::zero();
        for (m, c) in p.terms() {
            let (rest, e) = m.split_off(&a);
            if e == 0 {
                continue;
            }
            let m2 = rest.mul_raw(&Monomial::atom(a.clone(), e - 1));
            formal = formal.add(&Poly::from_term(m2, c * Rational::from_integer(e.into())));
        }
        let term = &Expr::from_poly(formal) * &da;
        if term.0.den.is_one() {
            out_poly = out_poly.add(&term.0.num);
        } else {
            out = &out + &term;
        }
    }
    &Expr::from_poly(out_poly) + &out
}

fn atom_derivation(a: &Atom, field: &dyn Fn(&Var) -> Option<Expr>) -> Expr {
    match a {
        Atom::Var(w) => field(w).unwrap_or_else(Expr::zero),
        Atom::Func(f) => {
            let mut out = Expr::zero();
            for (i, arg) in f.args.iter().enumerate() {
                let d = arg.derivation(field);
                if d.is_zero_literal() {
                    continue;
                }
                let mut derivs = f.derivs.clone();
                derivs[i] += 1;
                out = &out + &(&d * &Expr::apply_deriv(&f.symbol, f.args.clone(), derivs));
            }
            out
        }
        Atom::Exp(g) => {
            let d = g.derivation(field);
            if d.is_zero_literal() {
                return d;
            }
            &Expr::from_atom(a.clone()) * &d
        }
        Atom::Ln(g) => &g.derivation(field) / g,
        Atom::Sin(g) => &Expr::cos(g) * &g.derivation(field),
        Atom::Cos(g) => -&(&Expr::sin(g) * &g.derivation(field)),
    }
}

// -- operators -------------------------------------------------------------

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_zero_literal() {
            return rhs.clone();
        }
        if rhs.is_zero_literal() {
            return self.clone();
        }
        if self.0.den.is_one() && rhs.0.den.is_one() {
            return Expr::from_reduced(self.0.num.add(&rhs.0.num), Poly::one());
        }
        if self.0.den == rhs.0.den {
            return Expr::from_parts(self.0.num.add(&rhs.0.num), self.0.den.clone());
        }
        if rhs.0.den.is_one() {
            let n = self.0.num.add(&rhs.0.num.mul(&self.0.den));
            return Expr::from_reduced(n, self.0.den.clone());
        }
        if self.0.den.is_one() {
            let n = rhs.0.num.add(&self.0.num.mul(&rhs.0.den));
            return Expr::from_reduced(n, rhs.0.den.clone());
        }
        let g = poly::gcd(&self.0.den, &rhs.0.den);
        let (d1, d2) = if g.is_one() {
            (self.0.den.clone(), rhs.0.den.clone())
        } else {
            (
                poly::div_exact(&self.0.den, &g).unwrap(),
                poly::div_exact(&rhs.0.den, &g).unwrap(),
            )
        };
        let n = self.0.num.mul(&d2).add(&rhs.0.num.mul(&d1));
        let d = d1.mul(&rhs.0.den);
        Expr::from_parts(n, d)
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        if self.is_zero_literal() {
            return self.clone();
        }
        Expr(Arc::new(Inner {
            num: self.0.num.neg(),
            den: self.0.den.clone(),
            vars: self.0.vars.clone(),
        }))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero_literal() || rhs.is_zero_literal() {
            return Expr::zero();
        }
        if let Some(c) = self.as_rational() {
            if c.is_one() {
                return rhs.clone();
            }
            return Expr::from_reduced(rhs.0.num.scale(&c), rhs.0.den.clone());
        }
        if let Some(c) = rhs.as_rational() {
            if c.is_one() {
                return self.clone();
            }
            return Expr::from_reduced(self.0.num.scale(&c), self.0.den.clone());
        }
        if self.0.den.is_one() && rhs.0.den.is_one() {
            return Expr::from_reduced(self.0.num.mul(&rhs.0.num), Poly::one());
        }
        // cross-cancel: inputs are reduced, so the result is too
        let g1 = poly::gcd(&self.0.num, &rhs.0.den);
        let g2 = poly::gcd(&rhs.0.num, &self.0.den);
        let (n1, d2) = if g1.is_one() {
            (self.0.num.clone(), rhs.0.den.clone())
        } else {
            (
                poly::div_exact(&self.0.num, &g1).unwrap(),
                poly::div_exact(&rhs.0.den, &g1).unwrap(),
            )
        };
        let (n2, d1) = if g2.is_one() {
            (rhs.0.num.clone(), self.0.den.clone())
        } else {
            (
                poly::div_exact(&rhs.0.num, &g2).unwrap(),
                poly::div_exact(&self.0.den, &g2).unwrap(),
            )
        };
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        if num.atoms().iter().any(|a| matches!(a, Atom::Exp(_)))
            || den.atoms().iter().any(|a| matches!(a, Atom::Exp(_)))
        {
            Expr::from_parts(num, den)
        } else {
            Expr::from_reduced(num, den)
        }
    }
}

impl<'a> Div<&'a Expr> for &'a Expr {
    type Output = Expr;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Expr) -> Expr {
        self * &rhs.recip()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Expr> for &'a Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| &a + &b)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Expr {
        Expr::var(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u() -> Expr {
        Expr::u(0)
    }

    #[test]
    fn binomial_identity_cancels() {
        let e = (&u() + &Expr::one()).pow(2) - u().pow(2) - Expr::int(2) * u() - Expr::one();
        assert!(e.is_zero_literal());
    }

    #[test]
    fn reciprocal_product_is_one() {
        let ux = Expr::u(1);
        assert!((&ux * &ux.recip()).is_one());
    }

    #[test]
    fn rational_cancellation() {
        // (u^2 - 1)/(u - 1) = u + 1
        let e = &(u().pow(2) - Expr::one()) / &(u() - Expr::one());
        assert_eq!(e, u() + Expr::one());
        // (u x + u)/(x^2 + 2x + 1) = u/(x+1)
        let x = Expr::x();
        let e = &(&u() * &x + u()) / &(x.pow(2) + Expr::int(2) * &x + Expr::one());
        assert_eq!(e, &u() / &(&x + &Expr::one()));
    }

    #[test]
    fn multivariate_gcd_cancels_common_factor() {
        let (x, t) = (Expr::x(), Expr::t());
        let p = &x + &(&t * &u());
        let a = &p * &(&x - &t);
        let b = &p * &(u() + Expr::int(3));
        let q = &a / &b;
        assert_eq!(q, &(&x - &t) / &(u() + Expr::int(3)));
    }

    #[test]
    fn cancellation_against_powers_of_a_denominator() {
        let d = parse("u_x*u_xx + u*u_xx + 1").unwrap();
        let n = parse("u*u_xxx + u_x^3 - 2").unwrap();
        let e = &(&n * &d) / &d.pow(3);
        assert_eq!(e, &n / &d.pow(2));
        let coprime = &n / &d.pow(4);
        assert_eq!(&coprime * &d.pow(4), n);
    }

    #[test]
    fn exponentials_merge_and_cancel() {
        let x = Expr::x();
        let e = &Expr::exp(&x) * &Expr::exp(&-&x);
        assert!(e.is_one());
        let e2 = &(&Expr::exp(&x) * &u()) / &Expr::exp(&x);
        assert_eq!(e2, u());
        assert_eq!(Expr::exp(&Expr::ln(&x)), x);
        assert_eq!(Expr::ln(&Expr::exp(&u())), u());
        assert_eq!(Expr::exp(&(-Expr::ln(&x))), x.recip());
    }

    #[test]
    fn derivative_rules() {
        let x = Expr::x();
        let e = &x * &Expr::u(1);
        assert_eq!(e.diff(&Var::X), Expr::u(1));
        let q = &Expr::u(2) / &Expr::u(1).pow(2);
        assert_eq!(q.diff(&Var::U(1)), -(Expr::int(2) * &Expr::u(2) / &Expr::u(1).pow(3)));
        assert_eq!(
            Expr::exp(&(&Expr::int(2) * &x)).diff(&Var::X),
            Expr::int(2) * Expr::exp(&(Expr::int(2) * &x))
        );
    }

    #[test]
    fn function_symbol_chain_rule() {
        let a = FunctionSymbol::free("A", vec![Var::U(0)]);
        let au = Expr::apply_default(&a);
        assert!(au.diff(&Var::X).is_zero_literal());
        let d = au.diff(&Var::U(0));
        let expected = Expr::apply_deriv(&a, vec![u()], vec![1]);
        assert_eq!(d, expected);
        let ia = FunctionSymbol::antiderivative(&a);
        assert_eq!(Expr::apply(&ia, vec![u()]).diff(&Var::U(0)), au);
    }

    #[test]
    fn evolution_constraint_rewrites_time_derivatives() {
        let h = FunctionSymbol::constrained("h", vec![Var::T, Var::X], EvolutionConstraint::backward_heat());
        let hv = Expr::apply_default(&h);
        let e = hv.diff(&Var::T) + hv.diff_n(&Var::X, 2);
        assert!(e.is_zero_literal());
        let htt = hv.diff_n(&Var::T, 2);
        assert_eq!(htt, hv.diff_n(&Var::X, 4));
    }

    #[test]
    fn substitution_through_function_arguments() {
        let a = FunctionSymbol::free("A", vec![Var::U(0)]);
        let e = Expr::apply_default(&a);
        let s = e.subs_var(&Var::U(0), &(&Expr::x() * &u()));
        assert_eq!(
            s.diff(&Var::U(0)),
            &Expr::x() * &Expr::apply_deriv(&a, vec![&Expr::x() * &u()], vec![1])
        );
    }
}
