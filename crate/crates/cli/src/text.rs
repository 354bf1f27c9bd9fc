use std::fmt::Write;

use crate::report::{CertificateEntry, Forms, Report, Transformation};

fn cert(c: &CertificateEntry) -> String {
    match c.status.as_str() {
        "NumericSampled" => format!(
            "NumericSampled, {} points, max residual {:.1e}",
            c.sample_count, c.max_abs_residual
        ),
        s => c.detail.clone().unwrap_or_else(|| s.to_string()),
    }
}

fn forms(out: &mut String, f: &Forms, indent: &str) {
    if let Some(h) = &f.h_hat {
        let _ = writeln!(out, "{indent}u_t = D_x({h})");
    }
    if let Some(h) = &f.h_check {
        let _ = writeln!(out, "{indent}u_t = D_x^2({h})");
    }
}

pub fn transformation(t: &Transformation) -> String {
    format!("t~ = {}, x~ = {}, u~ = {}  [{}, {}]", t.t, t.x, t.u, t.kind, t.label)
}

pub fn render(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "equation   u_t = {}", r.rhs);
    if !r.declarations.is_empty() {
        let _ = writeln!(out, "symbols    {}", r.declarations.join("; "));
    }
    let _ = writeln!(out, "verdict    {} (route {})", r.verdict, r.route);
    let _ = writeln!(out, "           {}", r.caveat);
    if r.canonical_forms.h_hat.is_some() {
        let _ = writeln!(out, "canonical forms");
        forms(&mut out, &r.canonical_forms, "  ");
    }
    if !r.basis.is_empty() {
        let _ = writeln!(out, "basis");
        for (k, l) in r.basis.iter().enumerate() {
            let _ = writeln!(out, "  [{}] F = {}", k + 1, l.density);
            let _ = writeln!(out, "      G = {}", l.flux);
            let _ = writeln!(out, "      lambda = {}", l.characteristic);
            let _ = writeln!(out, "      certificate: {}", cert(&l.certificate));
        }
    }
    for f in &r.families {
        let _ = writeln!(out, "family over {}", f.symbol);
        let _ = writeln!(out, "  F = {}", f.density);
        let _ = writeln!(out, "  G = {}", f.flux);
        let _ = writeln!(out, "  lambda = {}", f.characteristic);
        let _ = writeln!(out, "  certificate: {}", cert(&f.certificate));
    }
    for c in &r.charts {
        let _ = writeln!(out, "chart change {}", transformation(&c.transformation));
        let _ = writeln!(out, "  u_t = {}  gives {} (route {})", c.rhs, c.verdict, c.route);
        forms(&mut out, &c.canonical_forms, "  ");
    }
    for s in &r.side_conditions {
        let _ = writeln!(out, "side condition {s} != 0");
    }
    for p in &r.potential_systems {
        let eqs: Vec<String> = p.equations.iter().map(|(l, e)| format!("{l} = {e}")).collect();
        let _ = writeln!(out, "potential system {{{}}}", eqs.join(", "));
    }
    for s in &r.emitted_systems {
        let _ = writeln!(out, "unsolved system ({}) for {}", s.description, s.unknowns.join(", "));
        for e in &s.equations {
            let _ = writeln!(out, "  {e}");
        }
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}
