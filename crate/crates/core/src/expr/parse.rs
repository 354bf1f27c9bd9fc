//! Parser for expressions and function declarations.
//!
//! Coordinates: `t`, `x`, `u`, `u_x`, `u_xx`, ..., `u[k]`, `u_t`, `u_tx`, ...
//! Elementary functions: `exp`, `ln` (alias `log`), `sin`, `cos`.
//! `diff(e, v[, n])` differentiates; with respect to `x` it is the total derivative.
//! Declared symbols are applied as `A(u)`, used bare as `A` (default
//! arguments), differentiated as `A[1](u)` or `h_tx`, and a unary symbol's
//! antiderivative is available as `int_A`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::atom::{EvolutionConstraint, FunctionSymbol, Var};
use super::{Atom, Expr, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

/// Declared function symbols and parameters.
#[derive(Clone, Debug, Default)]
pub struct Declarations {
    pub functions: BTreeMap<String, Arc<FunctionSymbol>>,
    pub params: BTreeSet<String>,
}

impl Declarations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_function(mut self, sym: Arc<FunctionSymbol>) -> Self {
        self.functions.insert(sym.name.clone(), sym);
        self
    }

    pub fn with_param(mut self, name: &str) -> Self {
        self.params.insert(name.to_string());
        self
    }

    pub fn function(&self, name: &str) -> Option<Arc<FunctionSymbol>> {
        if let Some(s) = self.functions.get(name) {
            return Some(s.clone());
        }
        let base = name.strip_prefix("int_")?;
        let s = self.functions.get(base)?;
        (s.arity() == 1).then(|| FunctionSymbol::antiderivative(s))
    }

    pub fn parse(&self, src: &str) -> Result<Expr, ParseError> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            decls: self,
            len: src.len(),
        };
        let e = p.expr()?;
        if p.pos < p.tokens.len() {
            return err(p.offset(), "unexpected trailing input");
        }
        Ok(e)
    }
}

/// Parses an expression with no declared symbols.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    Declarations::new().parse(src)
}

/// Parses `;`-separated declarations: `A(u)`, `k` (a parameter) or
/// `h(t,x): h_t + h_xx = 0` (a symbol subject to a linear evolution equation).
pub fn parse_declarations(src: &str) -> Result<Declarations, ParseError> {
    let mut decls = Declarations::new();
    let mut offset = 0;
    for item in src.split([';', '\n']) {
        let here = offset;
        offset += item.len() + 1;
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (head, relation) = match item.split_once(':') {
            Some((h, r)) => (h.trim(), Some(r.trim())),
            None => (item, None),
        };
        let Some(open) = head.find('(') else {
            if relation.is_some() || !is_ident(head) {
                return err(here, format!("malformed declaration `{item}`"));
            }
            check_free_name(head, here)?;
            decls.params.insert(head.to_string());
            continue;
        };
        let name = head[..open].trim();
        if !is_ident(name) || !head.ends_with(')') {
            return err(here, format!("malformed declaration `{item}`"));
        }
        check_free_name(name, here)?;
        let mut params = Vec::new();
        for a in head[open + 1..head.len() - 1].split(',') {
            let a = a.trim();
            let Some(v) = coordinate(a) else {
                return err(here, format!("`{a}` is not a coordinate"));
            };
            if params.contains(&v) {
                return err(here, format!("repeated argument `{a}`"));
            }
            params.push(v);
        }
        let sym = match relation {
            None => FunctionSymbol::free(name, params),
            Some(rel) => {
                let free = FunctionSymbol::free(name, params.clone());
                let c = evolution_relation(&decls.clone().with_function(free.clone()), &free, rel).map_err(|e| {
                    ParseError {
                        offset: here,
                        message: e.message,
                    }
                })?;
                FunctionSymbol::constrained(name, params, c)
            }
        };
        decls.functions.insert(name.to_string(), sym);
    }
    Ok(decls)
}

fn check_free_name(name: &str, offset: usize) -> Result<(), ParseError> {
    const RESERVED: &[&str] = &["t", "x", "u", "exp", "ln", "log", "sin", "cos"];
    if RESERVED.contains(&name) || coordinate(name).is_some() || name.starts_with("int_") {
        return err(offset, format!("`{name}` is reserved"));
    }
    Ok(())
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic()) && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

/// `t`, `x`, `u`, `u_x...`, `u_t`, `u_tx...`.
fn coordinate(s: &str) -> Option<Var> {
    match s {
        "t" => return Some(Var::T),
        "x" => return Some(Var::X),
        "u" => return Some(Var::U(0)),
        _ => {}
    }
    let sub = s.strip_prefix("u_")?;
    if !sub.is_empty() && sub.chars().all(|c| c == 'x') {
        return Some(Var::U(sub.len() as u32));
    }
    let rest = sub.strip_prefix('t')?;
    rest.chars().all(|c| c == 'x').then_some(Var::Ut(rest.len() as u32))
}

/// Reads `c_t·h_t + Σ c_k h_{x^k} = 0` into `h_t = Σ (−c_k/c_t) h_{x^k}`.
fn evolution_relation(
    decls: &Declarations,
    sym: &Arc<FunctionSymbol>,
    rel: &str,
) -> Result<EvolutionConstraint, ParseError> {
    let (lhs, rhs) = rel.split_once('=').ok_or(ParseError {
        offset: 0,
        message: "relation needs `=`".into(),
    })?;
    let e = &decls.parse(lhs)? - &decls.parse(rhs)?;
    let time_arg = sym.params.iter().position(|v| *v == Var::T);
    let space_arg = sym.params.iter().position(|v| *v == Var::X);
    let (Some(time_arg), Some(space_arg)) = (time_arg, space_arg) else {
        return err(0, "constrained symbols need arguments t and x");
    };
    let defaults: Vec<Expr> = sym.params.iter().cloned().map(Expr::var).collect();
    let mut ct = None;
    let mut terms = Vec::new();
    let mut rest = e.clone();
    for app in e.function_apps() {
        if app.symbol != *sym {
            continue;
        }
        if app.args != defaults {
            return err(0, "relation must use default arguments");
        }
        let atom = Expr::from_atom(Atom::Func(app.clone()));
        let Some(v) = atom_coefficient(&e, &Atom::Func(app.clone())) else {
            return err(0, "relation must be linear");
        };
        rest = &rest - &(&v * &atom);
        let others_zero = app
            .derivs
            .iter()
            .enumerate()
            .all(|(i, d)| *d == 0 || i == time_arg || i == space_arg);
        if !others_zero {
            return err(0, "relation may only involve t and x derivatives");
        }
        match (app.derivs[time_arg], app.derivs[space_arg]) {
            (1, 0) => ct = Some(v),
            (0, k) => terms.push((k, v)),
            _ => return err(0, "relation must be first order in t"),
        }
    }
    if !rest.is_zero_literal() {
        return err(0, "relation must be homogeneous linear");
    }
    let Some(ct) = ct else {
        return err(0, "relation must contain the t-derivative");
    };
    let mut rhs = Vec::new();
    for (k, c) in terms {
        let coeff = -&(&c / &ct);
        if coeff.vars().iter().any(|v| !matches!(v, Var::T | Var::X)) {
            return err(0, "relation coefficients may depend on t and x only");
        }
        rhs.push((k, coeff));
    }
    rhs.sort_by_key(|r| std::cmp::Reverse(r.0));
    Ok(EvolutionConstraint {
        time_arg,
        space_arg,
        rhs,
    })
}

/// Coefficient of a linear occurrence of `a`.
fn atom_coefficient(e: &Expr, a: &Atom) -> Option<Expr> {
    if e.den().atoms().contains(a) {
        return None;
    }
    let cs = e.num().coeffs_in(a);
    if cs.keys().any(|k| *k > 1) {
        return None;
    }
    let c = cs.get(&1).cloned().unwrap_or_default();
    Some(&Expr::from_poly(c) / &e.denominator())
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let text = &src[start..i];
            let Some(r) = decimal(text) else {
                return err(start, format!("bad number `{text}`"));
            };
            out.push((start, Tok::Num(r)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()[],".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return err(i, format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

fn decimal(text: &str) -> Option<Rational> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(n, d))
}

struct Parser<'a> {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    decls: &'a Declarations,
    len: usize,
}

impl Parser<'_> {
    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.offset(), format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.peek() == Some(&Tok::Sym('/')) {
                let at = self.offset();
                self.pos += 1;
                let d = self.unary()?;
                if d.is_zero_literal() {
                    return err(at, "division by zero");
                }
                acc = &acc / &d;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let at = self.offset();
        let e = self.unary()?;
        let Some(n) = e.as_integer() else {
            return err(at, "exponents must be integer constants");
        };
        if n < 0 && base.is_zero_literal() {
            return err(at, "division by zero");
        }
        Ok(base.pow(n))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        let Some((_, tok)) = self.tokens.get(self.pos).cloned() else {
            return err(at, "unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Tok::Num(r) => Ok(Expr::rational(r)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym(c) => err(at, format!("unexpected `{c}`")),
            Tok::Ident(name) => self.identifier(&name, at),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect('(')?;
        let mut args = vec![self.expr()?];
        while self.eat(',') {
            args.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(args)
    }

    fn identifier(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        if name == "u" && self.eat('[') {
            let k = self.integer()?;
            self.expect(']')?;
            return Ok(Expr::u(k));
        }
        if let Some(v) = coordinate(name) {
            return Ok(Expr::var(v));
        }
        if name == "diff" {
            return self.diff_call(at);
        }
        let unary: Option<fn(&Expr) -> Expr> = match name {
            "exp" => Some(Expr::exp),
            "ln" | "log" => Some(Expr::ln),
            "sin" => Some(Expr::sin),
            "cos" => Some(Expr::cos),
            _ => None,
        };
        if let Some(f) = unary {
            let args = self.args()?;
            if args.len() != 1 {
                return err(at, format!("`{name}` takes one argument"));
            }
            if (name == "ln" || name == "log") && args[0].is_zero_literal() {
                return err(at, "logarithm of zero");
            }
            return Ok(f(&args[0]));
        }
        if let Some(sym) = self.decls.function(name) {
            let derivs = if self.eat('[') {
                let mut d = vec![self.integer()?];
                while self.eat(',') {
                    d.push(self.integer()?);
                }
                self.expect(']')?;
                Some(d)
            } else {
                None
            };
            let args = if self.peek() == Some(&Tok::Sym('(')) {
                self.args()?
            } else {
                sym.params.iter().cloned().map(Expr::var).collect()
            };
            if args.len() != sym.arity() {
                return err(at, format!("`{name}` expects {} arguments", sym.arity()));
            }
            let derivs = derivs.unwrap_or_else(|| vec![0; args.len()]);
            if derivs.len() != args.len() {
                return err(at, "derivative index length must match arity");
            }
            return Ok(Expr::apply_deriv(&sym, args, derivs));
        }
        // subscript form h_tx
        if let Some((base, sub)) = name.split_once('_') {
            if let Some(sym) = self.decls.functions.get(base) {
                let mut derivs = vec![0; sym.arity()];
                for c in sub.chars() {
                    let Some(i) = sym.params.iter().position(|p| p.to_string() == c.to_string()) else {
                        return err(at, format!("`{c}` is not an argument of `{base}`"));
                    };
                    derivs[i] += 1;
                }
                let args = sym.params.iter().cloned().map(Expr::var).collect();
                return Ok(Expr::apply_deriv(sym, args, derivs));
            }
        }
        if self.decls.params.contains(name) {
            return Ok(Expr::param(name));
        }
        err(at, format!("unknown identifier `{name}`"))
    }

    /// `diff(e, v[, n])`: total derivative for `x`, partial otherwise.
    fn diff_call(&mut self, at: usize) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let e = self.expr()?;
        self.expect(',')?;
        let vat = self.offset();
        let v = match self.peek().cloned() {
            Some(Tok::Ident(n)) => coordinate(&n).or_else(|| self.decls.params.contains(&n).then(|| Var::param(&n))),
            _ => None,
        };
        let Some(v) = v else {
            return err(vat, "expected a coordinate to differentiate by");
        };
        self.pos += 1;
        let n = if self.eat(',') { self.integer()? } else { 1 };
        self.expect(')')?;
        if v == Var::T {
            return err(at, "time derivatives need an equation; use total_t");
        }
        let mut out = e;
        for _ in 0..n {
            out = if v == Var::X {
                crate::jet::total_x(&out)
            } else {
                out.diff(&v)
            };
        }
        Ok(out)
    }

    fn integer(&mut self) -> Result<u32, ParseError> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(r)) if r.is_integer() && r >= Rational::zero() => {
                self.pos += 1;
                u32::try_from(r.to_integer()).or_else(|_| err(at, "index too large"))
            }
            _ => err(at, "expected a non-negative integer"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_jet_coordinates() {
        let e = parse("u_xx/u_x^2 + u[4] - u_t").unwrap();
        let expected = &(&(&Expr::u(2) / &Expr::u(1).pow(2)) + &Expr::u(4)) - &Expr::var(Var::Ut(0));
        assert_eq!(e, expected);
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert_eq!(parse("-u^2").unwrap(), -Expr::u(0).pow(2));
        assert_eq!(parse("2*3/4").unwrap(), Expr::frac(3, 2));
        assert_eq!(parse("u^-2").unwrap(), Expr::u(0).pow(-2));
        assert_eq!(parse("0.25").unwrap(), Expr::frac(1, 4));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("u^(1/2)").is_err());
        assert!(parse("1/(u-u)").is_err());
        assert!(parse("foo").is_err());
        assert!(parse("u +").is_err());
        assert!(parse("u)").is_err());
    }

    #[test]
    fn declared_functions() {
        let d = parse_declarations("A(u); B(u); k").unwrap();
        let e = d.parse("A*u_xx + B(u_x) + k + A[2](u) + int_A(u)").unwrap();
        assert_eq!(e.function_symbols().len(), 3);
        let back = d.parse(&e.to_string()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn diff_calls() {
        let d = parse_declarations("A(u)").unwrap();
        let e = d.parse("diff(A(u)*u_x, x)").unwrap();
        assert_eq!(e, d.parse("A[1](u)*u_x^2 + A(u)*u_xx").unwrap());
        assert_eq!(d.parse("diff(A(u),u)*u_x").unwrap(), d.parse("A[1](u)*u_x").unwrap());
        assert_eq!(parse("diff(u^3, u, 2)").unwrap(), parse("6*u").unwrap());
        assert!(parse("diff(u, t)").is_err());
    }

    #[test]
    fn evolution_declaration() {
        let d = parse_declarations("h(t,x): h_t + h_xx = 0").unwrap();
        let h = d.functions["h"].clone();
        assert_eq!(h.constraint(), Some(&EvolutionConstraint::backward_heat()));
        assert!(d.parse("h_t + h_xx").unwrap().is_zero_literal());
        assert!(parse_declarations("h(t,x): h_t*h = 0").is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        let d = parse_declarations("A(u)").unwrap();
        for src in [
            "u_x^-2*u_xx",
            "-1/u_xx",
            "exp(-x)*u + ln(u_x) - sin(t)*cos(x)",
            "(u + 1)/(u_x*u_xx - 3/2)",
            "A(u)^2*u_xx/(1 + A[1](u)*u_x)",
        ] {
            let e = d.parse(src).unwrap();
            assert_eq!(d.parse(&e.to_string()).unwrap(), e, "{src} -> {e}");
        }
    }

    #[test]
    fn declarations_round_trip() {
        let src = "A(u); s(t,x): s_t + 2*s_xx = 0";
        let d = parse_declarations(src).unwrap();
        let text: Vec<String> = d.functions.values().filter_map(|f| f.declaration()).collect();
        assert_eq!(text, ["A(u)", "s(t,x): s_t + 2*s_xx = 0"]);
        let again = parse_declarations(&text.join("; ")).unwrap();
        assert_eq!(again.functions, d.functions);
    }
}
