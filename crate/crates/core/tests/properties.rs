mod common;

use conslaw::claws::{flux_for_density, ConservedVector};
use conslaw::expr::{is_zero, parse_declarations, Expr};
use conslaw::jet::{total_t, total_x};
use conslaw::verify::verify_conserved;
use proptest::prelude::*;

fn zero(e: &Expr) -> bool {
    is_zero(e).is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printing_round_trips(e in common::expr_strategy()) {
        let d = parse_declarations("A(u)").unwrap();
        let back = d.parse(&e.to_string()).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn common_factors_cancel(a in common::expr_strategy(), b in common::expr_strategy()) {
        prop_assume!(!b.is_zero_literal());
        let q = &(&a * &b) / &b;
        prop_assert!(zero(&(&q - &a)));
        // merged exponentials such as exp(u + x) are opaque to the gcd
        if !format!("{a}{b}").contains("exp") {
            prop_assert_eq!(q, a);
        }
    }

    #[test]
    fn total_x_is_a_derivation(f in common::expr_strategy(), g in common::expr_strategy()) {
        let lhs = total_x(&(&f * &g));
        let rhs = &(&f * &total_x(&g)) + &(&g * &total_x(&f));
        prop_assert!(zero(&(&lhs - &rhs)));
    }

    #[test]
    fn total_t_is_a_derivation(f in common::expr_strategy(), g in common::expr_strategy(), k in 0..common::SAMPLE_EQUATIONS.len()) {
        let eq = common::equation(common::SAMPLE_EQUATIONS[k]);
        let lhs = total_t(&(&f * &g), &eq);
        let rhs = &(&f * &total_t(&g, &eq)) + &(&g * &total_t(&f, &eq));
        prop_assert!(zero(&(&lhs - &rhs)));
    }

    /// On the heat equation c(t,x)·u is a density whenever c_t + c_xx = 0.
    #[test]
    fn heat_polynomial_densities_verify(n in 0usize..5, c in 1i64..=4) {
        let heat = common::equation("u_xx");
        let sigma = &conslaw::catalog::sigma_solutions()[n];
        let density = &(&Expr::int(c) * sigma) * &Expr::u(0);
        let flux = flux_for_density(&density, &heat).unwrap();
        verify_conserved(&ConservedVector::new(density, flux), &heat).unwrap();
    }
}
