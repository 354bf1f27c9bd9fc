//! Independent certification of conserved vectors, characteristics and
//! transformations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classify::{apply_transformation, ClassifyError, ContactTransformation};
use crate::claws::{Characteristic, ConservedVector};
use crate::expr::{canonical_is_exact, sample_value, Expr, FunctionModel, HashedFunctionModel, Point, Var};
use crate::jet::{total_t_free, total_x, total_x_n, EvolutionEquation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    SymbolicZero,
    NumericSampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub residual: Expr,
    pub sample_count: usize,
    pub max_abs_residual: f64,
    /// Every sample point used by a numeric certificate.
    pub samples: Vec<Point>,
    /// Constraints on function symbols that were applied as rewrites.
    pub constraints: Vec<String>,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("refuted: residual {residual} does not vanish")]
    Refuted { residual: String, witness: Option<Point> },
    #[error("mismatch: expected {expected}, found {found}")]
    Mismatch { expected: String, found: String },
    #[error("no sample point could be evaluated for {0}")]
    Undetermined(String),
    #[error(transparent)]
    Transformation(#[from] ClassifyError),
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 200,
            seed: 0xc0ffee,
            tolerance: 1e-9,
        }
    }
}

fn constraints_of(e: &Expr) -> Vec<String> {
    e.function_symbols()
        .iter()
        .filter_map(|s| s.constraint().map(|c| c.describe(s)))
        .collect()
}

/// Symbolic zero when the canonical form vanishes; otherwise sampling with
/// coordinates drawn from [−3,−1/3] ∪ [1/3,3]. Sampling only certifies
/// residuals whose canonical form is not decisive (logarithms, trigonometry).
fn certify(residual: Expr, context: &[&Expr], opts: &VerifyOptions) -> Result<Certificate, VerifyError> {
    let mut constraints: Vec<String> = context.iter().flat_map(|e| constraints_of(e)).collect();
    constraints.sort();
    constraints.dedup();
    let mut cert = Certificate {
        kind: CertificateKind::SymbolicZero,
        residual: residual.clone(),
        sample_count: 0,
        max_abs_residual: 0.0,
        samples: Vec::new(),
        constraints,
        seed: opts.seed,
    };
    if residual.is_zero_literal() {
        return Ok(cert);
    }
    let model = HashedFunctionModel { seed: opts.seed };
    let numerator = residual.numerator();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.samples * 4 {
        if cert.samples.len() >= opts.samples {
            break;
        }
        let point: Point = residual
            .vars()
            .iter()
            .map(|v| (v.clone(), sample_value(&mut rng)))
            .collect();
        let Ok((v, scale)) = numerator.eval_numerator_scaled(&point, &model as &dyn FunctionModel) else {
            continue;
        };
        if !v.is_finite() {
            continue;
        }
        let rel = v.abs() / scale.max(1.0);
        if rel > opts.tolerance {
            return Err(VerifyError::Refuted {
                residual: residual.to_string(),
                witness: Some(point),
            });
        }
        cert.max_abs_residual = cert.max_abs_residual.max(rel);
        cert.samples.push(point);
    }
    if canonical_is_exact(&residual) {
        // the canonical form decides: a nonzero form is a nonzero function
        return Err(VerifyError::Refuted {
            residual: residual.to_string(),
            witness: None,
        });
    }
    if cert.samples.is_empty() {
        return Err(VerifyError::Undetermined(residual.to_string()));
    }
    cert.sample_count = cert.samples.len();
    cert.kind = CertificateKind::NumericSampled;
    Ok(cert)
}

/// D_tF + D_xG on solutions of `eq`.
pub fn verify_conserved(cv: &ConservedVector, eq: &EvolutionEquation) -> Result<Certificate, VerifyError> {
    verify_conserved_with(cv, eq, &VerifyOptions::default())
}

pub fn verify_conserved_with(
    cv: &ConservedVector,
    eq: &EvolutionEquation,
    opts: &VerifyOptions,
) -> Result<Certificate, VerifyError> {
    certify(cv.divergence(eq), &[&cv.density, &cv.flux, eq.rhs()], opts)
}

/// Off-shell identity D_tF + D_xG = λ·Δ + D_xN with Δ = u_t − H and
/// N = Σ_{k≥1} Σ_{j<k} (−D_x)^j(F_{u_k})·D_x^{k−1−j}Δ.
pub fn verify_characteristic(
    cv: &ConservedVector,
    lambda: &Characteristic,
    eq: &EvolutionEquation,
) -> Result<Certificate, VerifyError> {
    let f = &cv.density;
    let delta = &Expr::var(Var::Ut(0)) - eq.rhs();
    let order = f.jet_order().unwrap_or(0);
    let mut n = Expr::zero();
    for k in 1..=order {
        let fk = f.diff(&Var::U(k));
        if fk.is_zero_literal() {
            continue;
        }
        for j in 0..k {
            let a = total_x_n(&fk, j);
            let a = if j % 2 == 0 { a } else { -&a };
            n = &n + &(&a * &total_x_n(&delta, k - 1 - j));
        }
    }
    let residual = &(&(&total_t_free(f) + &total_x(&cv.flux)) - &(&lambda.0 * &delta)) - &total_x(&n);
    certify(residual, &[f, &cv.flux, &lambda.0, eq.rhs()], &VerifyOptions::default()).map_err(|e| match e {
        VerifyError::Refuted { residual, .. } => VerifyError::Mismatch {
            expected: lambda.0.to_string(),
            found: format!("residual {residual}"),
        },
        other => other,
    })
}

/// Applies `tr` and compares with the expected right-hand side.
pub fn verify_transformation(
    tr: &ContactTransformation,
    eq: &EvolutionEquation,
    expected: &EvolutionEquation,
) -> Result<Certificate, VerifyError> {
    let got = apply_transformation(tr, eq)?;
    let residual = got.rhs() - expected.rhs();
    certify(residual, &[got.rhs(), expected.rhs()], &VerifyOptions::default()).map_err(|e| match e {
        VerifyError::Refuted { .. } => VerifyError::Mismatch {
            expected: expected.rhs().to_string(),
            found: got.rhs().to_string(),
        },
        other => other,
    })
}
