//! Floating-point evaluation at sample points.

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use num_traits::ToPrimitive;
use thiserror::Error;

use super::atom::{Atom, FuncApp, Var};
use super::poly::Poly;
use super::Expr;

/// Numeric values of the coordinates.
pub type Point = BTreeMap<Var, f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no value for `{0}`")]
    Unbound(Var),
    #[error("division by zero")]
    DivisionByZero,
    #[error("`{0}` evaluated outside its domain")]
    Domain(&'static str),
}

/// Supplies values for applications of function symbols.
pub trait FunctionModel {
    fn value(&self, app: &FuncApp, args: &[f64]) -> Result<f64, EvalError>;
}

/// Treats every derivative of every symbol as an independent quantity whose
/// value is a deterministic hash of (symbol, derivative, arguments).
#[derive(Clone, Copy, Debug, Default)]
pub struct HashedFunctionModel {
    pub seed: u64,
}

impl FunctionModel for HashedFunctionModel {
    fn value(&self, app: &FuncApp, args: &[f64]) -> Result<f64, EvalError> {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.seed.hash(&mut h);
        app.symbol.name.hash(&mut h);
        app.derivs.hash(&mut h);
        for a in args {
            // quantize so equal arguments reached by different routes agree
            ((a * 1e9).round() as i64).hash(&mut h);
        }
        let bits = h.finish();
        let unit = (bits >> 11) as f64 / (1u64 << 53) as f64;
        // values in ±[0.5, 2]
        let mag = 0.5 + 1.5 * unit;
        Ok(if bits & 1 == 0 { mag } else { -mag })
    }
}

impl Expr {
    pub fn eval(&self, point: &Point, model: &dyn FunctionModel) -> Result<f64, EvalError> {
        let n = eval_poly(self.num(), point, model)?;
        if self.den().is_one() {
            return Ok(n);
        }
        let d = eval_poly(self.den(), point, model)?;
        if d == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        Ok(n / d)
    }

    /// Numerator value together with the sum of absolute term values, used as
    /// a scale for relative zero tests.
    pub(crate) fn eval_numerator_scaled(
        &self,
        point: &Point,
        model: &dyn FunctionModel,
    ) -> Result<(f64, f64), EvalError> {
        let mut atoms = BTreeMap::new();
        let mut sum = 0.0;
        let mut scale = 0.0;
        for (m, c) in self.num().terms() {
            let mut v = c.to_f64().unwrap_or(f64::NAN);
            for (a, e) in m.factors() {
                let av = match atoms.get(a) {
                    Some(x) => *x,
                    None => {
                        let x = eval_atom(a, point, model)?;
                        atoms.insert(a.clone(), x);
                        x
                    }
                };
                v *= av.powi(*e as i32);
            }
            sum += v;
            scale += v.abs();
        }
        Ok((sum, scale))
    }
}

fn eval_poly(p: &Poly, point: &Point, model: &dyn FunctionModel) -> Result<f64, EvalError> {
    let mut atoms = BTreeMap::new();
    let mut sum = 0.0;
    for (m, c) in p.terms() {
        let mut v = c.to_f64().unwrap_or(f64::NAN);
        for (a, e) in m.factors() {
            let av = match atoms.get(a) {
                Some(x) => *x,
                None => {
                    let x = eval_atom(a, point, model)?;
                    atoms.insert(a.clone(), x);
                    x
                }
            };
            v *= av.powi(*e as i32);
        }
        sum += v;
    }
    Ok(sum)
}

fn eval_atom(a: &Atom, point: &Point, model: &dyn FunctionModel) -> Result<f64, EvalError> {
    match a {
        Atom::Var(v) => point.get(v).copied().ok_or_else(|| EvalError::Unbound(v.clone())),
        Atom::Func(app) => {
            let args = app
                .args
                .iter()
                .map(|x| x.eval(point, model))
                .collect::<Result<Vec<_>, _>>()?;
            model.value(app, &args)
        }
        Atom::Exp(g) => Ok(g.eval(point, model)?.exp()),
        Atom::Ln(g) => {
            let v = g.eval(point, model)?;
            if v <= 0.0 {
                return Err(EvalError::Domain("ln"));
            }
            Ok(v.ln())
        }
        Atom::Sin(g) => Ok(g.eval(point, model)?.sin()),
        Atom::Cos(g) => Ok(g.eval(point, model)?.cos()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn evaluates_rational_expression() {
        let e = parse("(u + 1)/u_x^2 + exp(x)").unwrap();
        let p: Point = [(Var::U(0), 1.0), (Var::U(1), 2.0), (Var::X, 0.0)]
            .into_iter()
            .collect();
        let v = e.eval(&p, &HashedFunctionModel::default()).unwrap();
        assert!((v - 1.5).abs() < 1e-12);
    }

    #[test]
    fn reports_domain_errors() {
        let e = parse("ln(u)").unwrap();
        let p: Point = [(Var::U(0), -1.0)].into_iter().collect();
        assert_eq!(
            e.eval(&p, &HashedFunctionModel::default()),
            Err(EvalError::Domain("ln"))
        );
        let q = parse("1/u").unwrap();
        assert!(matches!(
            q.eval(&Point::new(), &HashedFunctionModel::default()),
            Err(EvalError::Unbound(_))
        ));
    }
}
