use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::linsys::{split_independent, LinearSystem};
use super::{characteristic_of, Characteristic, ConservedVector};
use crate::expr::{Atom, Expr, FunctionSymbol, HashedFunctionModel, Point, Var};
use crate::jet::{antiderivative_x, euler, EvolutionEquation};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Total degree bound of the density in (u, u_x).
    pub degree: u32,
    /// Rule applications allowed in the (t,x) solver.
    pub max_steps: usize,
    /// Replaces the default monomials when set.
    pub monomials: Option<Vec<Expr>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            degree: 2,
            max_steps: 400,
            monomials: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completeness {
    /// Every determining equation was discharged exactly.
    CompleteForAnsatz,
    /// Some equations or integrations were left unresolved.
    Heuristic,
}

/// An infinite family of laws parameterized by a function symbol.
#[derive(Clone, Debug)]
pub struct Family {
    pub symbol: Arc<FunctionSymbol>,
    pub vector: ConservedVector,
    pub characteristic: Characteristic,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub laws: Vec<(ConservedVector, Characteristic)>,
    pub families: Vec<Family>,
    pub completeness: Completeness,
    pub residual: Vec<Expr>,
    pub side_conditions: Vec<Expr>,
    pub notes: Vec<String>,
}

/// u^i (1 ≤ i ≤ d) and u^i·u_x^j (j ≥ 2, i + j ≤ d). Terms linear in u_x are
/// equivalent to terms in u, and pure (t,x) terms are trivial.
pub fn ansatz_monomials(degree: u32) -> Vec<Expr> {
    let mut out = Vec::new();
    for i in 1..=degree {
        out.push(Expr::u(0).pow(i as i64));
    }
    for j in 2..=degree {
        for i in 0..=(degree - j) {
            out.push(&Expr::u(0).pow(i as i64) * &Expr::u(1).pow(j as i64));
        }
    }
    out
}

/// The flux of a reduced density: G = −F_{u_x}H − D_x^{-1}(F_t + E(F)·H).
pub fn flux_for_density(f: &Expr, eq: &EvolutionEquation) -> Result<Expr, crate::jet::JetError> {
    let h = eq.rhs();
    let rest = &f.diff(&Var::T) + &(&euler(f) * h);
    let g0 = antiderivative_x(&rest)?;
    Ok(-&(&(&f.diff(&Var::U(1)) * h) + &g0))
}

/// Conservation laws whose densities are polynomial in (u, u_x) with
/// coefficients depending on (t, x): the condition E(F_t + E(F)·H) = 0 is
/// split over the jet variables and the resulting linear (t,x)-system solved.
pub fn solve_determining(eq: &EvolutionEquation, opts: &SolveOptions) -> Solution {
    let monomials = opts.monomials.clone().unwrap_or_else(|| ansatz_monomials(opts.degree));
    let unknowns: Vec<Arc<FunctionSymbol>> = (0..monomials.len())
        .map(|k| FunctionSymbol::free(&format!("q{}", k + 1), vec![Var::T, Var::X]))
        .collect();
    let coeffs: Vec<Expr> = unknowns.iter().map(Expr::apply_default).collect();
    let f: Expr = coeffs.iter().zip(&monomials).map(|(c, m)| c * m).sum();
    let cond = euler(&(&f.diff(&Var::T) + &(&euler(&f) * eq.rhs())));
    let jets: Vec<Var> = cond.vars().iter().filter(|v| v.is_jet()).cloned().collect();
    let eqs: Vec<Expr> = split_independent(&cond, &jets).into_values().collect();
    let solved = LinearSystem::new(unknowns, eqs, coeffs).solve(opts.max_steps);

    let mut notes = Vec::new();
    if !eq.symbols().is_empty() {
        notes.push("function symbols in H are treated as generic (functionally independent)".to_string());
    }
    let f_sol: Expr = solved.targets.iter().zip(&monomials).map(|(c, m)| c * m).sum();
    let in_residual = |s: &FunctionSymbol| {
        solved
            .residual
            .iter()
            .any(|r| r.function_symbols().iter().any(|x| **x == *s))
    };
    let free = solved.free.clone();
    let restrict = |keep: &Arc<FunctionSymbol>, value: Option<Expr>| {
        f_sol.replace_functions(&|s: &FunctionSymbol| {
            if *s == **keep {
                value.clone()
            } else if free.iter().any(|x| **x == *s) {
                Some(Expr::zero())
            } else {
                None
            }
        })
    };
    let mut laws = Vec::new();
    let mut families = Vec::new();
    let mut heuristic = !solved.residual.is_empty();
    for s in &solved.free {
        if in_residual(s) {
            continue;
        }
        if s.arity() == 0 {
            let density = restrict(s, Some(Expr::one()));
            push_law(&mut laws, &mut notes, &mut heuristic, density, eq);
        } else {
            let density = restrict(s, None);
            let lambda = euler(&density);
            if lambda.is_zero_literal() {
                continue;
            }
            match flux_for_density(&density, eq) {
                Ok(flux) => families.push(Family {
                    symbol: s.clone(),
                    vector: ConservedVector::new(density, flux),
                    characteristic: Characteristic(lambda),
                }),
                Err(e) => {
                    heuristic = true;
                    notes.push(format!("family {}: {e}", s.name));
                }
            }
        }
    }
    let laws = independent(laws);
    let mut laws: Vec<_> = laws.into_iter().map(normalize_law).collect();
    laws.sort_by_key(|(cv, _)| presentation_key(&cv.density));
    Solution {
        laws,
        families,
        completeness: if heuristic {
            Completeness::Heuristic
        } else {
            Completeness::CompleteForAnsatz
        },
        residual: solved.residual,
        side_conditions: solved.side_conditions,
        notes,
    }
}

fn push_law(
    laws: &mut Vec<(ConservedVector, Characteristic)>,
    notes: &mut Vec<String>,
    heuristic: &mut bool,
    density: Expr,
    eq: &EvolutionEquation,
) {
    let cv = ConservedVector::new(density.clone(), Expr::zero());
    let lambda = characteristic_of(&cv);
    if crate::expr::is_zero(&lambda.0).is_zero() {
        return;
    }
    match flux_for_density(&density, eq) {
        Ok(flux) => laws.push((ConservedVector::new(density, flux), lambda)),
        Err(e) => {
            *heuristic = true;
            notes.push(format!("density {density}: {e}"));
        }
    }
}

/// Scales so the density's leading numeric coefficient is one.
fn normalize_law((cv, lambda): (ConservedVector, Characteristic)) -> (ConservedVector, Characteristic) {
    let lc = cv.density.leading_coefficient();
    let s = Expr::rational(lc.recip());
    (cv.scale(&s), Characteristic(&lambda.0 * &s))
}

/// (degree in u_x, degree in u, printed form).
fn presentation_key(f: &Expr) -> (u32, u32, String) {
    let deg = |v: Var| f.num().degree_in(&Atom::Var(v));
    (deg(Var::U(1)), deg(Var::U(0)), f.to_string())
}

/// Drops laws whose characteristics are linear combinations of earlier ones,
/// judged by exact rank over sampled values.
fn independent(laws: Vec<(ConservedVector, Characteristic)>) -> Vec<(ConservedVector, Characteristic)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a3b);
    let model = HashedFunctionModel::default();
    let mut vars = std::collections::BTreeSet::new();
    for (_, l) in &laws {
        vars.extend(l.0.vars().iter().cloned());
    }
    let npts = laws.len() * 2 + 4;
    let mut points: Vec<Point> = Vec::new();
    for _ in 0..npts * 20 {
        if points.len() >= npts {
            break;
        }
        let p: Point = vars
            .iter()
            .map(|v| (v.clone(), crate::expr::sample_value(&mut rng)))
            .collect();
        if laws.iter().all(|(_, l)| l.0.eval(&p, &model).is_ok_and(f64::is_finite)) {
            points.push(p);
        }
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::new();
    for (cv, l) in laws {
        let row: Vec<f64> = points.iter().map(|p| l.0.eval(p, &model).unwrap_or(0.0)).collect();
        if let Some(reduced) = reduce_row(&basis, row) {
            basis.push(reduced);
            out.push((cv, l));
        }
    }
    out
}

/// Gram–Schmidt step; `None` when the row lies in the span of the basis.
fn reduce_row(basis: &[Vec<f64>], mut row: Vec<f64>) -> Option<Vec<f64>> {
    let norm0 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return None;
    }
    for b in basis {
        let bb: f64 = b.iter().map(|x| x * x).sum();
        let rb: f64 = row.iter().zip(b).map(|(x, y)| x * y).sum();
        for (x, y) in row.iter_mut().zip(b) {
            *x -= rb / bb * y;
        }
    }
    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-8 * norm0).then_some(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{is_zero, parse, parse_declarations};

    fn solve(decls: &str, h: &str, degree: u32) -> Solution {
        let d = parse_declarations(decls).unwrap();
        let eq = EvolutionEquation::new(d.parse(h).unwrap()).unwrap();
        let sol = solve_determining(
            &eq,
            &SolveOptions {
                degree,
                ..Default::default()
            },
        );
        for (cv, l) in &sol.laws {
            assert!(is_zero(&cv.divergence(&eq)).is_zero(), "{cv:?}");
            assert_eq!(characteristic_of(cv), *l);
        }
        sol
    }

    fn densities(sol: &Solution) -> Vec<String> {
        sol.laws.iter().map(|(cv, _)| cv.density.to_string()).collect()
    }

    #[test]
    fn ansatz_shape() {
        let m: Vec<String> = ansatz_monomials(3).iter().map(|e| e.to_string()).collect();
        assert_eq!(m, ["u", "u^2", "u^3", "u_x^2", "u*u_x^2", "u_x^3"]);
    }

    #[test]
    fn generic_diffusion_with_zero_convection() {
        let sol = solve("A(u)", "A[1](u)*u_x^2 + A*u_xx", 1);
        assert_eq!(sol.completeness, Completeness::CompleteForAnsatz);
        assert_eq!(densities(&sol), ["u", "x*u"]);
    }

    #[test]
    fn convection_equal_to_diffusion() {
        let sol = solve("A(u)", "A[1](u)*u_x^2 + A*u_xx + A*u_x", 1);
        assert_eq!(densities(&sol), ["u", "u*exp(x)"]);
    }

    #[test]
    fn burgers_has_only_mass() {
        let sol = solve("", "u_xx + u*u_x", 2);
        assert_eq!(densities(&sol), ["u"]);
    }

    #[test]
    fn non_fractionally_linear_has_no_laws() {
        let sol = solve("", "u_xx^2 + u", 2);
        assert!(sol.laws.is_empty() && sol.families.is_empty());
    }

    #[test]
    fn flux_formula_matches_divergence() {
        let eq = EvolutionEquation::new(parse("u_x^-2*u_xx").unwrap()).unwrap();
        let f = parse("u^2").unwrap();
        let g = flux_for_density(&f, &eq).unwrap();
        let cv = ConservedVector::new(f, g);
        assert!(is_zero(&cv.divergence(&eq)).is_zero());
    }
}
