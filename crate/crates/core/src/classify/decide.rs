use std::fmt;

use super::normalize::{normalize_char1, normalize_pair, EmittedSystem, Normalization};
use super::transform::{apply_transformation, transform_conserved_vector, ContactTransformation};
use crate::claws::{
    characteristic_of, flux_for_density, solve_determining, Characteristic, Completeness, ConservedVector, Family,
    SolveOptions,
};
use crate::expr::{is_zero, EvolutionConstraint, Expr, FunctionSymbol, Var};
use crate::jet::{antiderivative_x, euler, is_fractionally_linear_u2, EvolutionEquation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Exact(u32),
    AtLeast(u32),
    Infinite,
    Undecided(u32),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Exact(k) => write!(f, "Exact({k})"),
            Verdict::AtLeast(k) => write!(f, "AtLeast({k})"),
            Verdict::Infinite => f.write_str("Infinite"),
            Verdict::Undecided(k) => write!(f, "Undecided({k})"),
        }
    }
}

/// Which test produced the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    NotFractionallyLinear,
    Linear,
    SecondDivergenceForm,
    FirstDivergenceForm,
    Solver,
    ChartChange,
}

/// u_t = D_xĤ and, when available, u_t = D_x²Ȟ.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CanonicalForms {
    pub h_hat: Option<Expr>,
    pub h_check: Option<Expr>,
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub solve: SolveOptions,
    /// Number of chart changes allowed.
    pub max_depth: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            solve: SolveOptions::default(),
            max_depth: 2,
        }
    }
}

/// A chart change used by the decision, with the report in the new chart.
#[derive(Clone, Debug)]
pub struct ChartStep {
    pub transformation: ContactTransformation,
    pub report: Box<ClassificationReport>,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub rhs: Expr,
    pub verdict: Verdict,
    pub route: Route,
    pub basis: Vec<(ConservedVector, Characteristic)>,
    pub families: Vec<Family>,
    pub canonical_forms: CanonicalForms,
    pub chart: Option<ChartStep>,
    pub emitted: Vec<EmittedSystem>,
    pub side_conditions: Vec<Expr>,
    pub chart_caveat: String,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    fn new(eq: &EvolutionEquation, verdict: Verdict, route: Route) -> Self {
        ClassificationReport {
            rhs: eq.rhs().clone(),
            verdict,
            route,
            basis: Vec::new(),
            families: Vec::new(),
            canonical_forms: CanonicalForms::default(),
            chart: None,
            emitted: Vec::new(),
            side_conditions: Vec::new(),
            chart_caveat: String::new(),
            notes: Vec::new(),
        }
    }

    /// Every transformation along the chart chain, composed.
    pub fn transformation(&self) -> Option<ContactTransformation> {
        let step = self.chart.as_ref()?;
        Some(match step.report.transformation() {
            Some(next) => step.transformation.then(&next),
            None => step.transformation.clone(),
        })
    }

    /// The report in which the verdict was certified.
    pub fn final_chart(&self) -> &ClassificationReport {
        match &self.chart {
            Some(step) if self.route == Route::ChartChange => step.report.final_chart(),
            _ => self,
        }
    }
}

fn zero(e: &Expr) -> bool {
    is_zero(e).is_zero()
}

fn law(density: Expr, flux: Expr) -> (ConservedVector, Characteristic) {
    let cv = ConservedVector::new(density, flux);
    let l = characteristic_of(&cv);
    (cv, l)
}

const EXACT_CAVEAT: &str = "the dimension is invariant under contact transformations";
const BOUND_CAVEAT: &str =
    "lower bound: only densities polynomial in (u, u_x) up to the ansatz degree were sought, and contact-equivalent charts were not searched exhaustively";

/// Decides dim CL for `u_t = H` in the given chart, changing charts when the
/// laws found allow a normalizing transformation.
pub fn decide(eq: &EvolutionEquation, opts: &DecideOptions) -> ClassificationReport {
    decide_at(eq, opts, 0)
}

fn decide_at(eq: &EvolutionEquation, opts: &DecideOptions, depth: usize) -> ClassificationReport {
    let h = eq.rhs();
    if !is_fractionally_linear_u2(h) {
        let mut r = ClassificationReport::new(eq, Verdict::Exact(0), Route::NotFractionallyLinear);
        r.chart_caveat = EXACT_CAVEAT.into();
        return r;
    }
    let forms = canonical_forms(h);
    if eq.flags().linear {
        let mut r = ClassificationReport::new(eq, Verdict::Infinite, Route::Linear);
        r.basis = divergence_laws(&forms);
        r.families = linear_family(eq).into_iter().collect();
        r.canonical_forms = forms;
        r.chart_caveat = EXACT_CAVEAT.into();
        return r;
    }
    if let (Some(hh), Some(hc)) = (&forms.h_hat, &forms.h_check) {
        let u = Var::U(0);
        if zero(&hc.diff(&u).diff(&u)) {
            let mut r = ClassificationReport::new(eq, Verdict::Infinite, Route::SecondDivergenceForm);
            r.basis = divergence_laws(&forms);
            r.notes.push(format!("second divergence form {hc} is linear in u"));
            r.canonical_forms = forms;
            r.chart_caveat = EXACT_CAVEAT.into();
            return r;
        }
        let mut r = ClassificationReport::new(eq, Verdict::Exact(2), Route::SecondDivergenceForm);
        r.basis = divergence_laws(&forms);
        r.side_conditions.push(hc.diff(&u).diff(&u));
        r.canonical_forms = CanonicalForms {
            h_hat: Some(hh.clone()),
            h_check: Some(hc.clone()),
        };
        r.chart_caveat = EXACT_CAVEAT.into();
        return r;
    }
    let mut solve_opts = opts.solve.clone();
    let mut complete_ansatz = false;
    if let Some(hh) = &forms.h_hat {
        let p = Var::U(1);
        if !is_fractionally_linear_in(hh, &p) {
            let mut r = ClassificationReport::new(eq, Verdict::Exact(1), Route::FirstDivergenceForm);
            r.basis = divergence_laws(&forms);
            r.canonical_forms = forms;
            r.chart_caveat = EXACT_CAVEAT.into();
            return r;
        }
        if zero(&hh.diff(&p).diff(&p)) && solve_opts.monomials.is_none() {
            // every law has a density f(t,x)·u here
            solve_opts.monomials = Some(vec![Expr::u(0)]);
            complete_ansatz = true;
        }
    }
    let sol = solve_determining(eq, &solve_opts);
    let k = sol.laws.len() as u32;
    let complete = sol.completeness == Completeness::CompleteForAnsatz;
    let base_verdict = if !sol.families.is_empty() {
        Verdict::Infinite
    } else if complete && complete_ansatz {
        Verdict::Exact(k)
    } else if complete {
        Verdict::AtLeast(k)
    } else {
        Verdict::Undecided(k)
    };
    let mut r = ClassificationReport::new(eq, base_verdict, Route::Solver);
    r.basis = sol.laws.clone();
    r.families = sol.families.clone();
    r.canonical_forms = forms;
    r.notes = sol.notes.clone();
    r.side_conditions = sol.side_conditions.clone();
    r.chart_caveat = if matches!(base_verdict, Verdict::Exact(_) | Verdict::Infinite) {
        EXACT_CAVEAT.into()
    } else {
        BOUND_CAVEAT.into()
    };
    let settled = matches!(base_verdict, Verdict::Infinite | Verdict::Exact(0) | Verdict::Exact(1));
    if depth >= opts.max_depth || k == 0 || settled {
        return r;
    }
    let norm = if k >= 2 {
        normalize_pair(&sol.laws[0].0, &sol.laws[1].0, eq)
    } else {
        normalize_char1(&sol.laws[0].0, eq)
    };
    let tr = match norm {
        Ok(Normalization::Transformation(tr)) => tr,
        Ok(Normalization::Unsolved(sys)) => {
            r.emitted.push(sys);
            return r;
        }
        Err(e) => {
            r.notes.push(format!("normalization failed: {e}"));
            return r;
        }
    };
    if tr == ContactTransformation::new(Expr::t(), Expr::x(), Expr::u(0), &tr.label) {
        return r;
    }
    let eq2 = match apply_transformation(&tr, eq) {
        Ok(e) => e,
        Err(e) => {
            r.notes.push(format!("chart change {tr} failed: {e}"));
            return r;
        }
    };
    let sub = decide_at(&eq2, opts, depth + 1);
    let certified = matches!(sub.verdict, Verdict::Exact(_) | Verdict::Infinite);
    if certified {
        r.verdict = sub.verdict;
        r.route = Route::ChartChange;
        r.chart_caveat = format!("certified after the chart change {tr}; {EXACT_CAVEAT}");
        let fams: Vec<_> = sub
            .final_chart()
            .families
            .iter()
            .map(|f| (f.vector.clone(), f.characteristic.clone()))
            .collect();
        if let Some(pulled) = pull_back(&tr, &eq2, &fams, eq) {
            r.families = sub
                .final_chart()
                .families
                .iter()
                .zip(pulled)
                .map(|(f, (vector, characteristic))| Family {
                    symbol: f.symbol.clone(),
                    vector,
                    characteristic,
                })
                .collect();
        }
        if let Some(pulled) = pull_back(&tr, &eq2, &sub.basis, eq) {
            if let Verdict::Exact(n) = sub.verdict {
                if pulled.len() as u32 == n {
                    r.basis = pulled;
                }
            }
        }
    }
    r.chart = Some(ChartStep {
        transformation: tr,
        report: Box::new(sub),
    });
    r
}

/// Ĥ with H = D_xĤ, and Ȟ = xĤ − D_x^{-1}(xH) with H = D_x²Ȟ.
pub fn canonical_forms(h: &Expr) -> CanonicalForms {
    let mut out = CanonicalForms::default();
    if !zero(&euler(h)) {
        return out;
    }
    let Ok(hh) = antiderivative_x(h) else {
        return out;
    };
    let xh = &Expr::x() * h;
    if zero(&euler(&xh)) {
        if let Ok(k) = antiderivative_x(&xh) {
            out.h_check = Some(&(&Expr::x() * &hh) - &k);
        }
    }
    out.h_hat = Some(hh);
    out
}

/// (u, −Ĥ) and (xu, Ȟ − xĤ) as far as the forms exist.
fn divergence_laws(forms: &CanonicalForms) -> Vec<(ConservedVector, Characteristic)> {
    let mut out = Vec::new();
    if let Some(hh) = &forms.h_hat {
        out.push(law(Expr::u(0), -hh));
        if let Some(hc) = &forms.h_check {
            out.push(law(&Expr::x() * &Expr::u(0), hc - &(&Expr::x() * hh)));
        }
    }
    out
}

/// The family h(t,x)·u of a linear equation, h solving the adjoint equation
/// h_t = −a·h_xx + (b − 2a_x)·h_x + (b_x − a_xx − c)·h.
fn linear_family(eq: &EvolutionEquation) -> Option<Family> {
    let h = eq.rhs();
    let (a, b, c) = (h.diff(&Var::U(2)), h.diff(&Var::U(1)), h.diff(&Var::U(0)));
    let ax = a.diff(&Var::X);
    let rhs: Vec<(u32, Expr)> = [
        (2, -&a),
        (1, &b - &(&Expr::int(2) * &ax)),
        (0, &(&b.diff(&Var::X) - &ax.diff(&Var::X)) - &c),
    ]
    .into_iter()
    .filter(|(_, e)| !e.is_zero_literal())
    .collect();
    let constraint = EvolutionConstraint {
        time_arg: 0,
        space_arg: 1,
        rhs,
    };
    let sym = FunctionSymbol::constrained("h", vec![Var::T, Var::X], constraint);
    let density = &Expr::apply_default(&sym) * &Expr::u(0);
    let flux = flux_for_density(&density, eq).ok()?;
    let characteristic = characteristic_of(&ConservedVector::new(density.clone(), Expr::zero()));
    Some(Family {
        symbol: sym,
        vector: ConservedVector::new(density, flux),
        characteristic,
    })
}

/// Möbius in `v`: vanishing Schwarzian numerator 2E'E''' − 3E''².
fn is_fractionally_linear_in(e: &Expr, v: &Var) -> bool {
    let d1 = e.diff(v);
    if zero(&d1) {
        return false;
    }
    let d2 = d1.diff(v);
    let s = &(&Expr::int(2) * &(&d1 * &d2.diff(v))) - &(&Expr::int(3) * &d2.pow(2));
    zero(&s)
}

fn pull_back(
    tr: &ContactTransformation,
    eq_new: &EvolutionEquation,
    laws: &[(ConservedVector, Characteristic)],
    eq_old: &EvolutionEquation,
) -> Option<Vec<(ConservedVector, Characteristic)>> {
    let inv = tr.inverse().ok()?;
    let mut out = Vec::new();
    for (cv, _) in laws {
        let back = transform_conserved_vector(&inv, cv, eq_new).ok()?;
        if !zero(&back.divergence(eq_old)) {
            return None;
        }
        let lc = back.density.leading_coefficient();
        let back = back.scale(&Expr::rational(lc.recip()));
        let l = characteristic_of(&back);
        out.push((back, l));
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, parse_declarations};

    fn run(decls: &str, h: &str) -> ClassificationReport {
        let d = parse_declarations(decls).unwrap();
        let eq = EvolutionEquation::new(d.parse(h).unwrap()).unwrap();
        decide(&eq, &DecideOptions::default())
    }

    fn chars(r: &ClassificationReport) -> Vec<String> {
        r.basis.iter().map(|(_, l)| l.0.to_string()).collect()
    }

    #[test]
    fn heat_is_infinite() {
        let r = run("", "u_xx");
        assert_eq!(r.verdict, Verdict::Infinite);
        assert_eq!(chars(&r), ["1", "x"]);
        let fam = &r.families[0];
        assert_eq!(fam.symbol.constraint(), Some(&EvolutionConstraint::backward_heat()));
        assert!(zero(
            &fam.vector.divergence(&EvolutionEquation::new(Expr::u(2)).unwrap())
        ));
    }

    #[test]
    fn zero_convection_is_two() {
        let r = run("", "diff(u^-2*u_x, x)");
        assert_eq!(r.verdict, Verdict::Exact(2));
        assert_eq!(chars(&r), ["1", "x"]);
        assert_eq!(r.canonical_forms.h_check, Some(parse("-1/u").unwrap()));
    }

    #[test]
    fn not_fractionally_linear_is_zero() {
        assert_eq!(run("", "u_xx^3").verdict, Verdict::Exact(0));
    }

    #[test]
    fn nonlinear_first_divergence_is_one() {
        let r = run("", "diff((1+u^2)*u_x + u^2/2, x)");
        assert_eq!(r.verdict, Verdict::Exact(1));
        assert_eq!(chars(&r), ["1"]);
    }

    #[test]
    fn equal_convection_changes_chart() {
        let r = run("", "diff(u*u_x, x) + u*u_x");
        assert_eq!(r.verdict, Verdict::Exact(2));
        assert_eq!(r.route, Route::ChartChange);
        let tr = r.transformation().unwrap();
        assert_eq!((tr.x, tr.u), (parse("exp(x)").unwrap(), parse("exp(-x)*u").unwrap()));
        assert_eq!(chars(&r), ["1", "exp(x)"]);
    }

    #[test]
    fn linearizable_examples_are_infinite() {
        let r = run("", "u_x^-2*u_xx");
        assert_eq!(r.verdict, Verdict::Infinite);
        assert_eq!(r.route, Route::ChartChange);
        // the family is pulled back to the original chart
        let l1 = EvolutionEquation::new(parse("u_x^-2*u_xx").unwrap()).unwrap();
        assert_eq!(r.families.len(), 1);
        assert!(zero(&r.families[0].vector.divergence(&l1)));
        let r = run("", "-1/u_xx");
        assert_eq!(r.verdict, Verdict::Infinite);
        assert_eq!(r.transformation().unwrap().x, Expr::u(1));
    }
}
