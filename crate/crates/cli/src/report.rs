//! Serialized reports. Every expression is stored in printed form and parses
//! back under `declarations`.

use std::collections::BTreeSet;

use conslaw::classify::{
    emit_potential_system, ChartStep, ClassificationReport, ContactTransformation, EmittedSystem, TransformationKind,
};
use conslaw::claws::{Characteristic, ConservedVector};
use conslaw::expr::Expr;
use conslaw::jet::EvolutionEquation;
use conslaw::verify::{
    verify_characteristic, verify_conserved_with, Certificate, CertificateKind, VerifyError, VerifyOptions,
};
use serde::Serialize;

pub const TOOL: &str = concat!("conslaw ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub tool: String,
    pub seed: u64,
    pub input: String,
    pub declarations: Vec<String>,
    pub rhs: String,
    pub flags: Flags,
    pub verdict: String,
    pub route: String,
    pub caveat: String,
    pub canonical_forms: Forms,
    pub basis: Vec<Law>,
    pub families: Vec<FamilyEntry>,
    pub charts: Vec<Chart>,
    pub transformation: Option<Transformation>,
    pub side_conditions: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub emitted_systems: Vec<System>,
    pub potential_systems: Vec<Potential>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Flags {
    pub quasi_linear: bool,
    pub fractionally_linear: bool,
    pub linear: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Forms {
    pub h_hat: Option<String>,
    pub h_check: Option<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Law {
    pub density: String,
    pub flux: String,
    pub characteristic: String,
    pub certificate: CertificateEntry,
    pub characteristic_certificate: CertificateEntry,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FamilyEntry {
    pub symbol: String,
    pub density: String,
    pub flux: String,
    pub characteristic: String,
    pub certificate: CertificateEntry,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CertificateEntry {
    /// `SymbolicZero`, `NumericSampled`, `Refuted`, `Mismatch` or `Undetermined`.
    pub status: String,
    pub sample_count: usize,
    pub max_abs_residual: f64,
    pub constraints: Vec<String>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Transformation {
    pub t: String,
    pub x: String,
    pub u: String,
    pub label: String,
    pub kind: String,
    pub side_conditions: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Chart {
    pub transformation: Transformation,
    pub rhs: String,
    pub verdict: String,
    pub route: String,
    pub canonical_forms: Forms,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct System {
    pub description: String,
    pub unknowns: Vec<String>,
    pub equations: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Potential {
    pub equations: Vec<(String, String)>,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub seed: u64,
    pub emit_systems: bool,
}

impl CertificateEntry {
    pub fn from_result(r: Result<Certificate, VerifyError>) -> Self {
        match r {
            Ok(c) => CertificateEntry {
                status: match c.kind {
                    CertificateKind::SymbolicZero => "SymbolicZero",
                    CertificateKind::NumericSampled => "NumericSampled",
                }
                .into(),
                sample_count: c.sample_count,
                max_abs_residual: c.max_abs_residual,
                constraints: c.constraints,
                detail: None,
            },
            Err(e) => CertificateEntry {
                status: match e {
                    VerifyError::Refuted { .. } => "Refuted",
                    VerifyError::Mismatch { .. } => "Mismatch",
                    VerifyError::Undetermined(_) => "Undetermined",
                    VerifyError::Transformation(_) => "Undetermined",
                }
                .into(),
                sample_count: 0,
                max_abs_residual: 0.0,
                constraints: Vec::new(),
                detail: Some(e.to_string()),
            },
        }
    }

    pub fn certified(&self) -> bool {
        matches!(self.status.as_str(), "SymbolicZero" | "NumericSampled")
    }
}

fn forms(r: &ClassificationReport) -> Forms {
    Forms {
        h_hat: r.canonical_forms.h_hat.as_ref().map(Expr::to_string),
        h_check: r.canonical_forms.h_check.as_ref().map(Expr::to_string),
    }
}

pub fn transformation(tr: &ContactTransformation) -> Transformation {
    Transformation {
        t: tr.t.to_string(),
        x: tr.x.to_string(),
        u: tr.u.to_string(),
        label: tr.label.clone(),
        kind: match tr.kind() {
            TransformationKind::Point => "point",
            TransformationKind::Contact => "contact",
        }
        .into(),
        side_conditions: tr.side_conditions().iter().map(Expr::to_string).collect(),
    }
}

fn system(s: &EmittedSystem) -> System {
    System {
        description: s.description.clone(),
        unknowns: s.unknowns.clone(),
        equations: s.equations.iter().map(Expr::to_string).collect(),
    }
}

/// Declarations for every function symbol mentioned anywhere in the report.
fn declarations<'a>(exprs: impl Iterator<Item = &'a Expr>) -> Vec<String> {
    let mut out = BTreeSet::new();
    for e in exprs {
        for s in e.function_symbols() {
            if let Some(d) = s.declaration() {
                out.insert(d);
            }
        }
    }
    out.into_iter().collect()
}

fn law(cv: &ConservedVector, l: &Characteristic, eq: &EvolutionEquation, v: &VerifyOptions) -> Law {
    Law {
        density: cv.density.to_string(),
        flux: cv.flux.to_string(),
        characteristic: l.0.to_string(),
        certificate: CertificateEntry::from_result(verify_conserved_with(cv, eq, v)),
        characteristic_certificate: CertificateEntry::from_result(verify_characteristic(cv, l, eq)),
    }
}

fn chain(r: &ClassificationReport) -> Vec<&ChartStep> {
    let mut out = Vec::new();
    let mut cur = r;
    while let Some(step) = &cur.chart {
        out.push(step);
        cur = &step.report;
    }
    out
}

pub fn build(input: &str, eq: &EvolutionEquation, r: &ClassificationReport, opts: &ReportOptions) -> Report {
    let v = VerifyOptions {
        seed: opts.seed,
        ..VerifyOptions::default()
    };
    let flags = eq.flags();
    let steps = chain(r);
    let mut exprs: Vec<&Expr> = vec![eq.rhs()];
    for (cv, l) in &r.basis {
        exprs.extend([&cv.density, &cv.flux, &l.0]);
    }
    for f in &r.families {
        exprs.extend([&f.vector.density, &f.vector.flux, &f.characteristic.0]);
    }
    for s in &steps {
        exprs.push(&s.report.rhs);
    }
    let mut emitted: Vec<System> = Vec::new();
    if opts.emit_systems {
        emitted.extend(r.emitted.iter().map(system));
        for s in &steps {
            emitted.extend(s.report.emitted.iter().map(system));
        }
    }
    let potential = emit_potential_system(r.final_chart())
        .unwrap_or_default()
        .into_iter()
        .map(|p| Potential {
            equations: p.equations.iter().map(|(l, e)| (l.clone(), e.to_string())).collect(),
            note: p.note,
        })
        .collect();
    Report {
        tool: TOOL.into(),
        seed: opts.seed,
        input: input.into(),
        declarations: declarations(exprs.into_iter()),
        rhs: eq.rhs().to_string(),
        flags: Flags {
            quasi_linear: flags.quasi_linear,
            fractionally_linear: flags.fractionally_linear,
            linear: flags.linear,
        },
        verdict: r.verdict.to_string(),
        route: format!("{:?}", r.route),
        caveat: r.chart_caveat.clone(),
        canonical_forms: forms(r),
        basis: r.basis.iter().map(|(cv, l)| law(cv, l, eq, &v)).collect(),
        families: r
            .families
            .iter()
            .map(|f| FamilyEntry {
                symbol: f.symbol.declaration().unwrap_or_else(|| f.symbol.name.clone()),
                density: f.vector.density.to_string(),
                flux: f.vector.flux.to_string(),
                characteristic: f.characteristic.0.to_string(),
                certificate: CertificateEntry::from_result(verify_conserved_with(&f.vector, eq, &v)),
            })
            .collect(),
        charts: steps
            .iter()
            .map(|s| Chart {
                transformation: transformation(&s.transformation),
                rhs: s.report.rhs.to_string(),
                verdict: s.report.verdict.to_string(),
                route: format!("{:?}", s.report.route),
                canonical_forms: forms(&s.report),
            })
            .collect(),
        transformation: r.transformation().as_ref().map(transformation),
        side_conditions: r.side_conditions.iter().map(Expr::to_string).collect(),
        emitted_systems: emitted,
        potential_systems: potential,
        notes: r.notes.clone(),
    }
}
