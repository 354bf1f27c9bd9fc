#![allow(dead_code)]

use conslaw::expr::{is_zero, parse_declarations, Expr};
use conslaw::jet::EvolutionEquation;
use proptest::prelude::*;
use rand::Rng;

/// c·t^a·x^b·u^i·u_x^j·u_xx^k·S with S one of 1, exp(x), exp(u), A(u).
pub fn term_strategy() -> impl Strategy<Value = Expr> {
    (
        prop_oneof![-3i64..=-1, 1i64..=3],
        (0u32..=1, 0u32..=2),
        (0u32..=2, 0u32..=2, 0u32..=2),
        0usize..4,
    )
        .prop_map(|(c, (a, b), (i, j, k), s)| {
            let d = parse_declarations("A(u)").unwrap();
            let special = ["1", "exp(x)", "exp(u)", "A"][s];
            let mut e = &Expr::int(c) * &d.parse(special).unwrap();
            for (v, n) in [
                (Expr::t(), a),
                (Expr::x(), b),
                (Expr::u(0), i),
                (Expr::u(1), j),
                (Expr::u(2), k),
            ] {
                e = &e * &v.pow(n as i64);
            }
            e
        })
}

/// Sums of one to four terms of jet order at most 2.
pub fn expr_strategy() -> impl Strategy<Value = Expr> {
    prop::collection::vec(term_strategy(), 1..=4).prop_map(|ts| ts.into_iter().sum())
}

pub fn equation(src: &str) -> EvolutionEquation {
    let d = parse_declarations("A(u)").unwrap();
    EvolutionEquation::new(d.parse(src).unwrap()).unwrap()
}

/// Equations used for on-shell identities.
pub const SAMPLE_EQUATIONS: [&str; 6] = [
    "u_xx",
    "u_x^-2*u_xx",
    "-1/u_xx",
    "u_xx + u*u_x",
    "diff(A*u_x, x) + A*u_x",
    "(u*u_xx + x)/(u_x*u_xx - 1)",
];

fn small_int(rng: &mut impl Rng) -> i64 {
    let v = rng.gen_range(1..=3);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

/// A random polynomial in `vars` of total degree ≤ `deg` with one to three terms.
pub fn random_poly(rng: &mut impl Rng, vars: &[Expr], deg: u32) -> Expr {
    let n = rng.gen_range(1..=3);
    let mut out = Expr::zero();
    for _ in 0..n {
        let mut m = Expr::int(small_int(rng));
        let mut left = deg;
        for v in vars {
            let e = rng.gen_range(0..=left);
            left -= e;
            m = &m * &v.pow(e as i64);
        }
        out = &out + &m;
    }
    if out.is_zero_literal() {
        Expr::one()
    } else {
        out
    }
}

/// u_t = Σ c_k u_xx^k with degree ≥ 2 in u_xx.
pub fn random_non_fl(rng: &mut impl Rng) -> EvolutionEquation {
    let deg = rng.gen_range(2..=4);
    let vars = [Expr::t(), Expr::x(), Expr::u(0), Expr::u(1)];
    let mut h = Expr::zero();
    for k in 0..=deg {
        let c = if k == deg || rng.gen_bool(0.5) {
            random_poly(rng, &vars, 1)
        } else {
            Expr::zero()
        };
        h = &h + &(&c * &Expr::u(2).pow(k));
    }
    EvolutionEquation::new(h).expect("degree ≥ 2 in u_xx")
}

/// Diffusion–convection, quasi-linear and Möbius right-hand sides.
pub fn random_fl(rng: &mut impl Rng, kind: usize) -> EvolutionEquation {
    let (u, p, q) = (Expr::u(0), Expr::u(1), Expr::u(2));
    loop {
        let h = match kind % 3 {
            0 => {
                let a = random_poly(rng, std::slice::from_ref(&u), 2);
                let b = match rng.gen_range(0..3) {
                    0 => Expr::zero(),
                    1 => &(&Expr::int(small_int(rng)) * &a) + &Expr::int(rng.gen_range(-2..=2)),
                    _ => random_poly(rng, std::slice::from_ref(&u), 2),
                };
                &(&(&a.diff(&conslaw::expr::Var::U(0)) * &p.pow(2)) + &(&a * &q)) + &(&b * &p)
            }
            1 => {
                let a = random_poly(rng, &[u.clone(), p.clone()], 2);
                let b = random_poly(rng, &[u.clone(), p.clone(), Expr::x()], 2);
                &(&a * &q) + &b
            }
            _ => {
                let c = random_poly(rng, &[u.clone(), p.clone()], 1);
                let [a, b, d] = [0, 1, 2].map(|_| random_poly(rng, &[u.clone(), p.clone()], 1));
                &(&(&a * &q) + &b) / &(&(&c * &q) + &d)
            }
        };
        if let Ok(eq) = EvolutionEquation::new(h) {
            if !is_zero(&eq.rhs().diff(&conslaw::expr::Var::U(2))).is_zero() {
                return eq;
            }
        }
    }
}
