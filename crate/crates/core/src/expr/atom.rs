use std::fmt;
use std::sync::Arc;

use super::Expr;

/// Independent coordinates of the jet space.
///
/// `U(k)` is the k-th x-derivative of u, `Ut(k)` the mixed derivative
/// ∂^{k+1}u/∂t∂x^k (only used for off-shell multiplier identities).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    X,
    U(u32),
    Ut(u32),
    Param(Arc<str>),
}

impl Var {
    pub fn param(name: &str) -> Var {
        Var::Param(Arc::from(name))
    }

    pub fn is_jet(&self) -> bool {
        matches!(self, Var::U(_) | Var::Ut(_))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => f.write_str("t"),
            Var::X => f.write_str("x"),
            Var::U(0) => f.write_str("u"),
            Var::U(k) if *k <= 3 => write!(f, "u_{}", "x".repeat(*k as usize)),
            Var::U(k) => write!(f, "u[{k}]"),
            Var::Ut(k) => write!(f, "u_t{}", "x".repeat(*k as usize)),
            Var::Param(p) => f.write_str(p),
        }
    }
}

/// A declared function symbol such as `A(u)` or `h(t,x)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunctionSymbol {
    pub name: String,
    /// Default argument variables; also the formal parameters used by constraints.
    pub params: Vec<Var>,
    pub kind: SymbolKind,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    /// No known relations.
    Free,
    /// `int_A` with `int_A' = A`; always unary.
    Antiderivative(Arc<FunctionSymbol>),
    /// The symbol solves a linear evolution equation in two of its arguments.
    Evolution(EvolutionConstraint),
}

/// `f_{time} = Σ coeff_k · ∂^k_{space} f`.
///
/// Coefficients are expressions in the formal variables `t` (time argument)
/// and `x` (space argument).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvolutionConstraint {
    pub time_arg: usize,
    pub space_arg: usize,
    pub rhs: Vec<(u32, Expr)>,
}

impl EvolutionConstraint {
    /// h_t + h_xx = 0.
    pub fn backward_heat() -> Self {
        EvolutionConstraint {
            time_arg: 0,
            space_arg: 1,
            rhs: vec![(2, Expr::int(-1))],
        }
    }

    /// Residual `f_time − Σ coeff_k ∂^k f` printed with the symbol's name.
    pub fn describe(&self, sym: &FunctionSymbol) -> String {
        let t = sym.params.get(self.time_arg).cloned().unwrap_or(Var::T);
        let s = sym.params.get(self.space_arg).cloned().unwrap_or(Var::X);
        let mut out = format!("{}_{}", sym.name, t);
        for (k, c) in &self.rhs {
            let d = if *k == 0 {
                sym.name.clone()
            } else {
                format!("{}_{}", sym.name, s.to_string().repeat(*k as usize))
            };
            let neg = -c;
            let (sign, mag) = if neg.is_negative_literal() {
                ("-", c.clone())
            } else {
                ("+", neg)
            };
            let text = mag.to_string();
            if mag.is_one() {
                out.push_str(&format!(" {sign} {d}"));
            } else if text.contains([' ', '+', '-', '/']) {
                out.push_str(&format!(" {sign} ({text})*{d}"));
            } else {
                out.push_str(&format!(" {sign} {text}*{d}"));
            }
        }
        out.push_str(" = 0");
        out
    }
}

impl FunctionSymbol {
    /// Declaration text accepted by the declaration parser, e.g.
    /// `h(t,x): h_t + h_xx = 0`; `None` for derived symbols such as `int_A`.
    pub fn declaration(&self) -> Option<String> {
        let params: Vec<String> = self.params.iter().map(|v| v.to_string()).collect();
        let head = format!("{}({})", self.name, params.join(","));
        match &self.kind {
            SymbolKind::Free => Some(head),
            SymbolKind::Antiderivative(_) => None,
            SymbolKind::Evolution(c) => Some(format!("{head}: {}", c.describe(self))),
        }
    }

    pub fn free(name: &str, params: Vec<Var>) -> Arc<FunctionSymbol> {
        Arc::new(FunctionSymbol {
            name: name.to_string(),
            params,
            kind: SymbolKind::Free,
        })
    }

    pub fn constrained(name: &str, params: Vec<Var>, c: EvolutionConstraint) -> Arc<FunctionSymbol> {
        Arc::new(FunctionSymbol {
            name: name.to_string(),
            params,
            kind: SymbolKind::Evolution(c),
        })
    }

    /// The antiderivative symbol `int_A` of a unary symbol.
    pub fn antiderivative(of: &Arc<FunctionSymbol>) -> Arc<FunctionSymbol> {
        Arc::new(FunctionSymbol {
            name: format!("int_{}", of.name),
            params: of.params.clone(),
            kind: SymbolKind::Antiderivative(of.clone()),
        })
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn constraint(&self) -> Option<&EvolutionConstraint> {
        match &self.kind {
            SymbolKind::Evolution(c) => Some(c),
            _ => None,
        }
    }
}

/// An application `name[derivs](args)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncApp {
    pub symbol: Arc<FunctionSymbol>,
    pub args: Vec<Expr>,
    /// Derivative multi-index over argument positions.
    pub derivs: Vec<u32>,
}

/// Indeterminates of the polynomial layer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Var),
    Func(FuncApp),
    Exp(Expr),
    Ln(Expr),
    Sin(Expr),
    Cos(Expr),
}

impl Atom {
    pub fn depends_on(&self, v: &Var) -> bool {
        match self {
            Atom::Var(w) => w == v,
            Atom::Func(f) => f.args.iter().any(|a| a.depends_on(v)),
            Atom::Exp(g) | Atom::Ln(g) | Atom::Sin(g) | Atom::Cos(g) => g.depends_on(v),
        }
    }

    pub fn collect_vars(&self, out: &mut std::collections::BTreeSet<Var>) {
        match self {
            Atom::Var(w) => {
                out.insert(w.clone());
            }
            Atom::Func(f) => {
                for a in &f.args {
                    out.extend(a.vars().iter().cloned());
                }
            }
            Atom::Exp(g) | Atom::Ln(g) | Atom::Sin(g) | Atom::Cos(g) => out.extend(g.vars().iter().cloned()),
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Atom::Var(v) => Some(v),
            _ => None,
        }
    }
}
