//! Textual form of expressions; the output is accepted by the parser.

use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::atom::{Atom, FuncApp};
use super::poly::{Monomial, Poly};
use super::{Expr, Rational};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den().is_one() {
            return write_poly(f, self.num());
        }
        let num_simple = self.num().len() == 1;
        if num_simple {
            write_poly(f, self.num())?;
        } else {
            f.write_char('(')?;
            write_poly(f, self.num())?;
            f.write_char(')')?;
        }
        f.write_char('/')?;
        let den = self.den();
        let den_simple = den.len() == 1 && {
            let (m, c) = den.leading().unwrap();
            c.is_one() && m.factors().len() == 1
        };
        if den_simple {
            write_poly(f, den)
        } else {
            f.write_char('(')?;
            write_poly(f, den)?;
            f.write_char(')')
        }
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly) -> fmt::Result {
    if p.is_zero() {
        return f.write_char('0');
    }
    // highest total degree first
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| b.0.cmp(a.0)));
    for (i, (m, c)) in terms.into_iter().enumerate() {
        let neg = c.is_negative();
        if i == 0 {
            if neg {
                f.write_char('-')?;
            }
        } else {
            f.write_str(if neg { " - " } else { " + " })?;
        }
        write_term(f, m, &c.abs())?;
    }
    Ok(())
}

fn write_term(f: &mut fmt::Formatter<'_>, m: &Monomial, c: &Rational) -> fmt::Result {
    if m.is_one() {
        return write_rational(f, c);
    }
    if !c.is_one() {
        write_rational(f, c)?;
        f.write_char('*')?;
    }
    for (i, (a, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            f.write_char('*')?;
        }
        write_atom(f, a)?;
        if *e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, a: &Atom) -> fmt::Result {
    match a {
        Atom::Var(v) => write!(f, "{v}"),
        Atom::Func(app) => write_app(f, app),
        Atom::Exp(g) => write!(f, "exp({g})"),
        Atom::Ln(g) => write!(f, "ln({g})"),
        Atom::Sin(g) => write!(f, "sin({g})"),
        Atom::Cos(g) => write!(f, "cos({g})"),
    }
}

fn write_app(f: &mut fmt::Formatter<'_>, app: &FuncApp) -> fmt::Result {
    f.write_str(&app.symbol.name)?;
    if app.derivs.iter().any(|d| *d > 0) {
        f.write_char('[')?;
        for (i, d) in app.derivs.iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            write!(f, "{d}")?;
        }
        f.write_char(']')?;
    }
    f.write_char('(')?;
    for (i, a) in app.args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_char(')')
}
