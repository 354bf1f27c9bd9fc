//! Zero recognition: canonical form first, random evaluation as fallback.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::atom::Atom;
use super::eval::{FunctionModel, HashedFunctionModel, Point};
use super::Expr;

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroTest {
    /// The canonical form is zero.
    Zero,
    /// Vanished at every sample point, but the canonical form is not zero.
    ProbablyZero { samples: usize },
    /// Certainly nonzero; a witness point is given when one was found.
    NonZero { witness: Option<Point> },
    /// No sample point could be evaluated.
    Undetermined,
}

impl ZeroTest {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroTest::Zero | ZeroTest::ProbablyZero { .. })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ZeroTestOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for ZeroTestOptions {
    fn default() -> Self {
        ZeroTestOptions {
            samples: 32,
            seed: 0x5eed,
            tolerance: 1e-9,
        }
    }
}

pub fn is_zero(e: &Expr) -> ZeroTest {
    is_zero_with(e, &ZeroTestOptions::default(), &HashedFunctionModel::default())
}

/// Canonical forms are exact unless logarithms or trigonometric atoms occur.
pub(crate) fn canonical_is_exact(e: &Expr) -> bool {
    e.atoms().iter().all(|a| match a {
        Atom::Var(_) => true,
        Atom::Func(f) => f.args.iter().all(canonical_is_exact),
        Atom::Exp(g) => canonical_is_exact(g),
        Atom::Ln(_) | Atom::Sin(_) | Atom::Cos(_) => false,
    })
}

/// A random rational in ±[1/3, 3] with denominator at most 10^4.
pub(crate) fn sample_value(rng: &mut impl Rng) -> f64 {
    let q: i64 = rng.gen_range(1_000..=10_000);
    let p: i64 = rng.gen_range(q / 3 + 1..=3 * q);
    let v = p as f64 / q as f64;
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

pub fn is_zero_with(e: &Expr, opts: &ZeroTestOptions, model: &dyn FunctionModel) -> ZeroTest {
    if e.is_zero_literal() {
        return ZeroTest::Zero;
    }
    let exact = canonical_is_exact(e);
    let numerator = e.numerator();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut evaluated = 0;
    let attempts = opts.samples * 4;
    for _ in 0..attempts {
        if evaluated >= opts.samples {
            break;
        }
        let point: Point = e.vars().iter().map(|v| (v.clone(), sample_value(&mut rng))).collect();
        let Ok((v, scale)) = numerator.eval_numerator_scaled(&point, model) else {
            continue;
        };
        if !v.is_finite() {
            continue;
        }
        evaluated += 1;
        if v.abs() > opts.tolerance * scale.max(1.0) {
            return ZeroTest::NonZero { witness: Some(point) };
        }
    }
    if exact {
        ZeroTest::NonZero { witness: None }
    } else if evaluated == 0 {
        ZeroTest::Undetermined
    } else {
        ZeroTest::ProbablyZero { samples: evaluated }
    }
}
