//! Built-in equation families with known conservation laws.

use std::sync::Arc;

use thiserror::Error;

use crate::classify::{ContactTransformation, Verdict};
use crate::claws::{Characteristic, ConservedVector};
use crate::expr::{is_zero, Declarations, EvolutionConstraint, Expr, FunctionSymbol, ParseError, Var};
use crate::jet::{integrate, EvolutionEquation, JetError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("bad binding: {0}")]
    BadBinding(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// A family of laws parameterized by a constrained function symbol.
#[derive(Clone, Debug)]
pub struct ExpectedFamily {
    pub symbol: Arc<FunctionSymbol>,
    pub vector: ConservedVector,
    pub characteristic: Characteristic,
    /// Concrete members obtained from explicit solutions of the constraint.
    pub instances: Vec<(ConservedVector, Characteristic)>,
}

#[derive(Clone, Debug, Default)]
pub struct Expectations {
    /// `None` for generator-only entries.
    pub verdict: Option<Verdict>,
    /// Characteristics of the finite part of the basis, leading coefficient 1.
    pub characteristics: Vec<Expr>,
    pub laws: Vec<ConservedVector>,
    pub family: Option<ExpectedFamily>,
    /// A transformation and the right-hand side it produces.
    pub transformation: Option<(ContactTransformation, Expr)>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub declarations: Declarations,
    pub equation: EvolutionEquation,
    pub expected: Expectations,
}

/// Entry names accepted by [`instantiate`].
pub fn names() -> Vec<String> {
    let mut v: Vec<String> = ["dc", "vcdc", "heat", "L1", "L2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    v.extend((1..=NON_FL.len()).map(|k| format!("nonfl-{k}")));
    v
}

/// Right-hand sides that are not fractionally linear in u_xx.
pub const NON_FL: [&str; 10] = [
    "u_xx^2",
    "u_xx^3 + u",
    "exp(u_xx)",
    "ln(u_xx)",
    "u_xx^-2",
    "u_xx^2/(u_xx + 1)",
    "1/(u_xx^2 + u)",
    "x*u_xx^2 + u_xx",
    "u_x*u_xx^2 + u*u_xx",
    "sin(u_xx) + u_x",
];

/// Polynomial solutions of σ_t + σ_xx = 0 in (t, x), each checked by
/// substitution; unverified candidates are dropped.
pub fn sigma_solutions() -> Vec<Expr> {
    let d = Declarations::new();
    ["1", "x", "x^2 - 2*t", "x^3 - 6*t*x", "x^4 - 12*t*x^2 + 12*t^2"]
        .iter()
        .map(|s| d.parse(s).expect("fixed input"))
        .filter(|s| (&s.diff(&Var::T) + &s.diff_n(&Var::X, 2)).is_zero_literal())
        .collect()
}

fn backward_heat_symbol(name: &str) -> Arc<FunctionSymbol> {
    FunctionSymbol::constrained(name, vec![Var::T, Var::X], EvolutionConstraint::backward_heat())
}

fn eq_of(rhs: Expr) -> Result<EvolutionEquation, CatalogError> {
    Ok(EvolutionEquation::new(rhs)?)
}

/// Builds an entry. `bindings` assign expressions in u to the symbols `A`
/// and `B` of "dc", and additionally expressions in x to `f`, `g`, `h` of
/// "vcdc"; unbound symbols stay arbitrary.
/// Instances with bindings are named like `dc[A=u^-2, B=0]`.
pub fn instantiate(name: &str, bindings: &[(&str, &str)]) -> Result<Instance, CatalogError> {
    let mut inst = instantiate_entry(name, bindings)?;
    if !bindings.is_empty() {
        let b: Vec<String> = bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        inst.name = format!("{name}[{}]", b.join(", "));
    }
    Ok(inst)
}

fn instantiate_entry(name: &str, bindings: &[(&str, &str)]) -> Result<Instance, CatalogError> {
    match name {
        "dc" => dc(bindings),
        "vcdc" => vcdc(bindings),
        "heat" => heat(),
        "L1" | "L2" => linearizable(name),
        _ => {
            let k: usize = name
                .strip_prefix("nonfl-")
                .and_then(|k| k.parse().ok())
                .filter(|k| (1..=NON_FL.len()).contains(k))
                .ok_or_else(|| CatalogError::UnknownEntry(name.to_string()))?;
            let d = Declarations::new();
            Ok(Instance {
                name: name.to_string(),
                equation: eq_of(d.parse(NON_FL[k - 1])?)?,
                declarations: d,
                expected: Expectations {
                    verdict: Some(Verdict::Exact(0)),
                    ..Default::default()
                },
            })
        }
    }
}

/// Replaces `sym` by `body` and its antiderivative symbol by ∫body du.
fn bind(e: &Expr, sym: &Arc<FunctionSymbol>, body: &Expr) -> Result<Expr, CatalogError> {
    let int_sym = FunctionSymbol::antiderivative(sym);
    let integral =
        integrate(body, &Var::U(0)).ok_or_else(|| CatalogError::BadBinding(format!("cannot integrate {body} in u")))?;
    Ok(e.replace_function(sym, body).replace_function(&int_sym, &integral))
}

fn binding_bodies(
    d: &Declarations,
    bindings: &[(&str, &str)],
    allowed: &[(&str, Var)],
) -> Result<Vec<(Arc<FunctionSymbol>, Expr)>, CatalogError> {
    let mut out = Vec::new();
    for (k, v) in bindings {
        let Some((_, arg)) = allowed.iter().find(|(n, _)| n == k) else {
            return Err(CatalogError::BadBinding(format!(
                "`{k}` is not a parameter of this entry"
            )));
        };
        let body = d.parse(v)?;
        if body.vars().iter().any(|w| w != arg) {
            return Err(CatalogError::BadBinding(format!("`{k}` may depend on {arg} only")));
        }
        out.push((d.function(k).expect("declared"), body));
    }
    Ok(out)
}

fn dc(bindings: &[(&str, &str)]) -> Result<Instance, CatalogError> {
    let d = Declarations::new().with_function(FunctionSymbol::free("A", vec![Var::U(0)]));
    let d = d.with_function(FunctionSymbol::free("B", vec![Var::U(0)]));
    let bodies = binding_bodies(&d, bindings, &[("A", Var::U(0)), ("B", Var::U(0))])?;
    let apply = |src: &str| -> Result<Expr, CatalogError> {
        let mut e = d.parse(src)?;
        // twice, so a body mentioning the other symbol is bound as well
        for _ in 0..2 {
            for (s, b) in &bodies {
                e = bind(&e, s, b)?;
            }
        }
        Ok(e)
    };
    let a = apply("A")?;
    let b = apply("B")?;
    if is_zero(&a).is_zero() {
        return Err(CatalogError::BadBinding("A must not vanish".into()));
    }
    let equation = eq_of(apply("diff(A*u_x, x) + B*u_x")?)?;
    let mut laws = vec![ConservedVector::new(Expr::u(0), apply("-A*u_x - int_B(u)")?)];
    let u = Var::U(0);
    let a_const = is_zero(&a.diff(&u)).is_zero();
    let b_const = is_zero(&b.diff(&u)).is_zero();
    let one = Expr::one();
    let mut family = None;
    let (verdict, chars) = if a_const && b_const {
        // linear: u_t = a·u_xx + b·u_x
        let xt = &Expr::x() + &(&b * &Expr::t());
        if a.is_one() && b.is_zero_literal() {
            family = Some(heat_family());
            laws.push(ConservedVector::new(
                &Expr::x() * &Expr::u(0),
                apply("int_A(u) - x*A*u_x")?,
            ));
        }
        (Verdict::Infinite, vec![one, xt])
    } else if a_const {
        (Verdict::Exact(1), vec![one])
    } else {
        let ratio = &b.diff(&u) / &a.diff(&u);
        let shift = &b - &(&ratio * &a);
        if ratio.depends_on_jets() || shift.depends_on_jets() {
            (Verdict::Exact(1), vec![one])
        } else if ratio.is_zero_literal() {
            if shift.is_zero_literal() {
                laws.push(ConservedVector::new(
                    &Expr::x() * &Expr::u(0),
                    apply("int_A(u) - x*A*u_x")?,
                ));
            }
            (Verdict::Exact(2), vec![one, &Expr::x() + &(&shift * &Expr::t())])
        } else {
            // x̄ = x + shift·t removes the constant part of B
            let arg = &ratio * &(&Expr::x() + &(&shift * &Expr::t()));
            if ratio.is_one() && shift.is_zero_literal() {
                laws.push(ConservedVector::new(apply("exp(x)*u")?, apply("-exp(x)*A*u_x")?));
            }
            (Verdict::Exact(2), vec![one, Expr::exp(&arg)])
        }
    };
    Ok(Instance {
        name: "dc".into(),
        declarations: d,
        equation,
        expected: Expectations {
            verdict: Some(verdict),
            characteristics: chars.into_iter().map(normalized).collect(),
            laws,
            family,
            transformation: None,
        },
    })
}

fn normalized(e: Expr) -> Expr {
    let lc = e.leading_coefficient();
    &e * &Expr::rational(lc.recip())
}

fn heat_family() -> ExpectedFamily {
    let h = backward_heat_symbol("h");
    let hx = Expr::apply_deriv(&h, vec![Expr::t(), Expr::x()], vec![0, 1]);
    let hv = Expr::apply_default(&h);
    let vector = ConservedVector::new(&hv * &Expr::u(0), &(&hx * &Expr::u(0)) - &(&hv * &Expr::u(1)));
    let instances = sigma_solutions()
        .into_iter()
        .map(|s| {
            let cv = ConservedVector::new(
                vector.density.replace_function(&h, &s),
                vector.flux.replace_function(&h, &s),
            );
            (cv, Characteristic(s))
        })
        .collect();
    ExpectedFamily {
        symbol: h,
        vector,
        characteristic: Characteristic(hv),
        instances,
    }
}

fn heat() -> Result<Instance, CatalogError> {
    let d = Declarations::new();
    Ok(Instance {
        name: "heat".into(),
        declarations: d,
        equation: eq_of(Expr::u(2))?,
        expected: Expectations {
            verdict: Some(Verdict::Infinite),
            characteristics: vec![Expr::one(), Expr::x()],
            laws: vec![
                ConservedVector::new(Expr::u(0), -&Expr::u(1)),
                ConservedVector::new(&Expr::x() * &Expr::u(0), &Expr::u(0) - &(&Expr::x() * &Expr::u(1))),
            ],
            family: Some(heat_family()),
            transformation: Some((ContactTransformation::identity(), Expr::u(2))),
        },
    })
}

/// L1: u_t = u_x^{-2}u_xx with (σ(t,u), σ_ω/u_x), λ = σ_ω;
/// L2: u_t = −1/u_xx with (σ(t,u_x), σ_ω/u_xx), λ = σ_t·u_xx.
fn linearizable(name: &str) -> Result<Instance, CatalogError> {
    let sigma = backward_heat_symbol("sigma");
    let d = Declarations::new().with_function(sigma.clone());
    let (rhs, omega, tr) = if name == "L1" {
        (d.parse("u_x^-2*u_xx")?, Expr::u(0), ContactTransformation::hodograph())
    } else {
        (d.parse("-1/u_xx")?, Expr::u(1), ContactTransformation::legendre())
    };
    let s = |dt: u32, dw: u32| Expr::apply_deriv(&sigma, vec![Expr::t(), omega.clone()], vec![dt, dw]);
    let (flux, lambda) = if name == "L1" {
        (&s(0, 1) / &Expr::u(1), s(0, 1))
    } else {
        (&s(0, 1) / &Expr::u(2), &s(1, 0) * &Expr::u(2))
    };
    let vector = ConservedVector::new(s(0, 0), flux);
    let instances = sigma_solutions()
        .into_iter()
        .map(|body| {
            let sub = |e: &Expr| e.replace_function(&sigma, &body);
            (
                ConservedVector::new(sub(&vector.density), sub(&vector.flux)),
                Characteristic(sub(&lambda)),
            )
        })
        .collect();
    Ok(Instance {
        name: name.to_string(),
        declarations: d,
        equation: eq_of(rhs)?,
        expected: Expectations {
            verdict: Some(Verdict::Infinite),
            characteristics: Vec::new(),
            laws: Vec::new(),
            family: Some(ExpectedFamily {
                symbol: sigma,
                vector,
                characteristic: Characteristic(lambda),
                instances,
            }),
            transformation: Some((tr, Expr::u(2))),
        },
    })
}

/// f(x)u_t = (g(x)A(u)u_x)_x + h(x)B(u)u_x; a generator without expectations.
fn vcdc(bindings: &[(&str, &str)]) -> Result<Instance, CatalogError> {
    let mut d = Declarations::new();
    for (n, v) in [
        ("A", Var::U(0)),
        ("B", Var::U(0)),
        ("f", Var::X),
        ("g", Var::X),
        ("h", Var::X),
    ] {
        d = d.with_function(FunctionSymbol::free(n, vec![v]));
    }
    let allowed = [
        ("A", Var::U(0)),
        ("B", Var::U(0)),
        ("f", Var::X),
        ("g", Var::X),
        ("h", Var::X),
    ];
    let bodies = binding_bodies(&d, bindings, &allowed)?;
    let mut e = d.parse("(diff(g*A*u_x, x) + h*B*u_x)/f")?;
    for (s, b) in &bodies {
        e = if s.params[0] == Var::U(0) {
            bind(&e, s, b)?
        } else {
            e.replace_function(s, b)
        };
    }
    Ok(Instance {
        name: "vcdc".into(),
        declarations: d,
        equation: eq_of(e)?,
        expected: Expectations::default(),
    })
}

/// The concrete instances used by self-tests and the acceptance suite.
pub fn standard_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    let dc_rows: [&[(&str, &str)]; 8] = [
        &[],
        &[("B", "0")],
        &[("B", "A")],
        &[("A", "1"), ("B", "0")],
        &[("A", "u^-2"), ("B", "0")],
        &[("A", "u"), ("B", "u")],
        &[("A", "1+u^2"), ("B", "u")],
        &[("A", "exp(u)"), ("B", "u^2")],
    ];
    for b in dc_rows {
        out.push(instantiate("dc", b).expect("catalog row"));
    }
    for n in names().iter().filter(|n| *n != "dc" && *n != "vcdc") {
        out.push(instantiate(n, &[]).expect("catalog entry"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{verify_characteristic, verify_conserved};

    #[test]
    fn sigma_solutions_are_verified() {
        assert_eq!(sigma_solutions().len(), 5);
    }

    #[test]
    fn every_expected_item_verifies() {
        for inst in standard_instances() {
            let eq = &inst.equation;
            for cv in &inst.expected.laws {
                verify_conserved(cv, eq).unwrap_or_else(|e| panic!("{}: {cv:?}: {e}", inst.name));
            }
            if let Some(f) = &inst.expected.family {
                verify_conserved(&f.vector, eq).unwrap();
                verify_characteristic(&f.vector, &f.characteristic, eq).unwrap();
                for (cv, l) in &f.instances {
                    verify_conserved(cv, eq).unwrap();
                    verify_characteristic(cv, l, eq).unwrap();
                }
            }
        }
    }

    #[test]
    fn table_rows() {
        let e = instantiate("dc", &[("A", "u^-2"), ("B", "0")]).unwrap();
        assert_eq!(e.expected.verdict, Some(Verdict::Exact(2)));
        assert_eq!(e.expected.characteristics, [Expr::one(), Expr::x()]);
        let e = instantiate("dc", &[("B", "A")]).unwrap();
        assert_eq!(e.expected.characteristics[1], Expr::exp(&Expr::x()));
        let e = instantiate("dc", &[("A", "1+u^2"), ("B", "u")]).unwrap();
        assert_eq!(e.expected.verdict, Some(Verdict::Exact(1)));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(instantiate("nope", &[]), Err(CatalogError::UnknownEntry(_))));
        assert!(matches!(
            instantiate("dc", &[("C", "u")]),
            Err(CatalogError::BadBinding(_))
        ));
        assert!(matches!(
            instantiate("dc", &[("A", "x")]),
            Err(CatalogError::BadBinding(_))
        ));
        assert!(instantiate("vcdc", &[("f", "exp(x)"), ("A", "u")]).is_ok());
    }
}
