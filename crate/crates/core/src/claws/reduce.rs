use super::{ClawsError, ConservedVector};
use crate::expr::{is_zero, Var};
use crate::jet::{integrate, total_t, total_x, EvolutionEquation, JetError};

fn check_conserved(cv: &ConservedVector, eq: &EvolutionEquation) -> Result<(), ClawsError> {
    let r = cv.divergence(eq);
    if is_zero(&r).is_zero() {
        Ok(())
    } else {
        Err(ClawsError::NotConserved(r.to_string()))
    }
}

/// Shifts (F, G) by (D_xΦ, −D_tΦ) with Φ = ∫ F_{u_k} du_{k−1}, lowering the
/// density order by one.
fn peel_once(cv: &ConservedVector, eq: &EvolutionEquation, k: u32) -> Result<ConservedVector, ClawsError> {
    let a = cv.density.diff(&Var::U(k));
    let phi = integrate(&a, &Var::U(k - 1)).ok_or_else(|| JetError::UnsupportedIntegrand(a.to_string()))?;
    Ok(ConservedVector::new(
        &cv.density - &total_x(&phi),
        &cv.flux + &total_t(&phi, eq),
    ))
}

/// An equivalent conserved vector whose density depends on (t,x,u,u_x) only.
pub fn reduce_order(cv: &ConservedVector, eq: &EvolutionEquation) -> Result<ConservedVector, ClawsError> {
    check_conserved(cv, eq)?;
    let mut cur = cv.clone();
    while let Some(r) = cur.density.jet_order().filter(|r| *r >= 2) {
        // a conserved density of order ≥ 2 is a total derivative plus a
        // lower-order density, hence linear in its top derivative
        if cur.density.diff(&Var::U(r)).depends_on(&Var::U(r)) {
            return Err(ClawsError::NotConserved(cur.density.to_string()));
        }
        let next = peel_once(&cur, eq, r)?;
        if next.density.jet_order().is_some_and(|m| m >= r) {
            return Err(JetError::UnsupportedIntegrand(cur.density.to_string()).into());
        }
        cur = next;
    }
    Ok(cur)
}

/// For a density linear in u_x, the equivalent vector with F = F(t,x,u).
pub fn strip_ux_linear(cv: &ConservedVector, eq: &EvolutionEquation) -> Result<ConservedVector, ClawsError> {
    let f1 = cv.density.diff(&Var::U(1));
    if f1.is_zero_literal() {
        return Ok(cv.clone());
    }
    if !is_zero(&f1.diff(&Var::U(1))).is_zero() || cv.density.jet_order().is_some_and(|k| k > 1) {
        return Err(ClawsError::NotConserved(format!(
            "density {} is not linear in u_x",
            cv.density
        )));
    }
    peel_once(cv, eq, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};

    fn heat() -> EvolutionEquation {
        EvolutionEquation::new(parse("u_xx").unwrap()).unwrap()
    }

    #[test]
    fn second_order_density_is_lowered() {
        let eq = heat();
        // density x*u_xx, flux chosen so the vector is conserved
        let f = parse("x*u_xx").unwrap();
        let g = parse("u_xx - x*u_xxx").unwrap();
        let cv = ConservedVector::new(f, g);
        let r = reduce_order(&cv, &eq).unwrap();
        assert!(r.density.jet_order().unwrap() <= 1);
        assert!(r.is_reduced(&eq));
        assert!(is_zero(&r.divergence(&eq)).is_zero());
        assert_eq!(r.density, parse("-u_x").unwrap());
    }

    #[test]
    fn reduced_vector_is_fixed_point() {
        let eq = heat();
        let cv = ConservedVector::new(parse("u").unwrap(), parse("-u_x").unwrap());
        assert_eq!(reduce_order(&cv, &eq).unwrap(), cv);
    }

    #[test]
    fn null_divergence_reduces_to_trivial() {
        let eq = heat();
        let phi = parse("exp(x)*u").unwrap();
        let cv = ConservedVector::new(total_x(&phi), -total_t(&phi, &eq));
        let r = reduce_order(&cv, &eq).unwrap();
        let s = strip_ux_linear(&r, &eq).unwrap();
        assert!(s.is_trivial_reduced(), "{s:?}");
    }

    #[test]
    fn gradient_energy_density_is_trivial() {
        let eq = heat();
        // u_x*u_xx = D_x(u_x^2/2)
        let phi = parse("u_x^2/2").unwrap();
        let cv = ConservedVector::new(parse("u_x*u_xx").unwrap(), -total_t(&phi, &eq));
        assert!(is_zero(&cv.divergence(&eq)).is_zero());
        assert!(is_zero(&crate::claws::characteristic_of(&cv).0).is_zero());
        let r = reduce_order(&cv, &eq).unwrap();
        assert!(r.is_trivial_reduced(), "{r:?}");
    }

    #[test]
    fn strip_linear_ux_term() {
        let eq = heat();
        // (u, -u_x) shifted by the null divergence of u^3/3
        let phi = parse("u^3/3").unwrap();
        let cv = ConservedVector::new(
            &parse("u").unwrap() + &total_x(&phi),
            &parse("-u_x").unwrap() - &total_t(&phi, &eq),
        );
        let s = strip_ux_linear(&cv, &eq).unwrap();
        assert_eq!(s.density, Expr::u(0));
        assert!(is_zero(&s.divergence(&eq)).is_zero());
        let only_ux = ConservedVector::new(Expr::u(1), -total_t(&Expr::u(0), &eq));
        assert!(strip_ux_linear(&only_ux, &eq).unwrap().is_trivial_reduced());
    }
}
