mod report;
mod text;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conslaw::catalog::{instantiate, standard_instances};
use conslaw::classify::{decide, DecideOptions};
use conslaw::claws::{Characteristic, ConservedVector, SolveOptions};
use conslaw::expr::{parse_declarations, Declarations, ParseError};
use conslaw::jet::EvolutionEquation;
use conslaw::verify::{verify_characteristic, verify_conserved_with, VerifyOptions};
use rayon::prelude::*;
use serde::Serialize;

use report::{CertificateEntry, Chart, Forms, Potential, Report, ReportOptions, Transformation};

#[derive(Parser)]
#[command(
    name = "conslaw",
    version,
    about = "Conservation laws of second-order evolution equations u_t = H(t,x,u,u_x,u_xx)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the dimension of the space of conservation laws and list a basis.
    Classify(ClassifyArgs),
    /// Check a conserved vector (and optionally its characteristic).
    Verify(VerifyArgs),
    /// Print divergence forms and normalizing transformations.
    Reduce(ReduceArgs),
    /// Classify the diffusion-convection family u_t = (A u_x)_x + B u_x.
    Table(OutputArgs),
    /// Classify the built-in catalog, or one entry of it.
    Catalog(CatalogArgs),
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Emit JSON instead of text.
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Emit text (the default).
    #[arg(long)]
    text: bool,
    /// Seed for numeric sampling in certificates.
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Right-hand side H; read from standard input when absent.
    #[arg(allow_hyphen_values = true)]
    equation: Option<String>,
    /// Declarations of arbitrary functions, e.g. "A(u); B(u)".
    #[arg(long, default_value = "")]
    functions: String,
    /// Total degree in (u, u_x) of the solver ansatz.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Include unsolved normalization systems in the report.
    #[arg(long)]
    emit_systems: bool,
    /// Classify every line of this file ("-" for standard input).
    #[arg(long, conflicts_with = "equation")]
    file: Option<PathBuf>,
    /// Worker threads for --file.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(allow_hyphen_values = true)]
    equation: String,
    #[arg(long)]
    density: String,
    #[arg(long)]
    flux: String,
    #[arg(long)]
    characteristic: Option<String>,
    #[arg(long, default_value = "")]
    functions: String,
    /// Sample points when the residual is not decided symbolically.
    #[arg(long, default_value_t = VerifyOptions::default().samples)]
    samples: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(allow_hyphen_values = true)]
    equation: Option<String>,
    #[arg(long, default_value = "")]
    functions: String,
    #[arg(long, default_value_t = 2)]
    degree: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CatalogArgs {
    /// Entry name; all standard instances when absent.
    name: Option<String>,
    /// Bindings such as A=u^-2 (repeatable).
    #[arg(long = "bind")]
    bindings: Vec<String>,
    #[arg(long)]
    emit_systems: bool,
    #[command(flatten)]
    out: OutputArgs,
}

// Write errors (a closed pipe) are ignored.
macro_rules! out {
    () => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout());
    }};
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! out_raw {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

/// Problems with the user's input; reported with exit code 2.
#[derive(Debug)]
struct InputError(String);

impl InputError {
    fn parse(what: &str, src: &str, e: &ParseError) -> Self {
        let caret = " ".repeat(e.offset.min(src.len()));
        InputError(format!(
            "{what}: {} at column {}\n  {src}\n  {caret}^",
            e.message,
            e.offset + 1
        ))
    }
}

const EXIT_REFUTED: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn declarations(src: &str) -> Result<Declarations, InputError> {
    parse_declarations(src).map_err(|e| InputError::parse("--functions", src, &e))
}

fn equation(src: &str, decls: &Declarations) -> Result<EvolutionEquation, InputError> {
    let h = decls.parse(src).map_err(|e| InputError::parse("equation", src, &e))?;
    EvolutionEquation::new(h).map_err(|e| InputError(format!("equation `{src}`: {e}")))
}

fn read_stdin() -> Result<String, InputError> {
    let mut s = String::new();
    std::io::stdin()
        .read_to_string(&mut s)
        .map_err(|e| InputError(format!("reading standard input: {e}")))?;
    Ok(s.trim().to_string())
}

fn decide_options(degree: u32) -> DecideOptions {
    DecideOptions {
        solve: SolveOptions {
            degree,
            ..SolveOptions::default()
        },
        ..DecideOptions::default()
    }
}

fn classify_one(src: &str, decls: &Declarations, degree: u32, opts: &ReportOptions) -> Result<Report, InputError> {
    let eq = equation(src, decls)?;
    let r = decide(&eq, &decide_options(degree));
    Ok(report::build(src, &eq, &r, opts))
}

fn print_json<T: Serialize>(v: &T) {
    out!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

fn cmd_classify(a: ClassifyArgs) -> Result<ExitCode, InputError> {
    let decls = declarations(&a.functions)?;
    let opts = ReportOptions {
        seed: a.out.seed,
        emit_systems: a.emit_systems,
    };
    let Some(path) = &a.file else {
        let src = match a.equation {
            Some(s) => s,
            None => read_stdin()?,
        };
        let r = classify_one(&src, &decls, a.degree, &opts)?;
        if a.out.json {
            print_json(&r);
        } else {
            out_raw!("{}", text::render(&r));
        }
        return Ok(ExitCode::SUCCESS);
    };
    let content = if path.as_os_str() == "-" {
        read_stdin()?
    } else {
        std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?
    };
    let lines: Vec<&str> = content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| InputError(format!("--jobs: {e}")))?;
    let results: Vec<Result<Report, InputError>> = pool.install(|| {
        lines
            .par_iter()
            .map(|l| classify_one(l, &decls, a.degree, &opts))
            .collect()
    });
    let mut bad = false;
    let mut reports = Vec::new();
    for r in results {
        match r {
            Ok(r) => reports.push(r),
            Err(e) => {
                bad = true;
                eprintln!("error: {}", e.0);
            }
        }
    }
    if a.out.json {
        print_json(&reports);
    } else {
        for (k, r) in reports.iter().enumerate() {
            if k > 0 {
                out!();
            }
            out_raw!("{}", text::render(r));
        }
    }
    Ok(if bad {
        ExitCode::from(EXIT_INPUT)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct VerifyReport {
    tool: String,
    seed: u64,
    rhs: String,
    density: String,
    flux: String,
    conserved: CertificateEntry,
    characteristic: Option<(String, CertificateEntry)>,
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode, InputError> {
    let decls = declarations(&a.functions)?;
    let eq = equation(&a.equation, &decls)?;
    let parse = |what: &str, src: &str| decls.parse(src).map_err(|e| InputError::parse(what, src, &e));
    let cv = ConservedVector::new(parse("--density", &a.density)?, parse("--flux", &a.flux)?);
    let opts = VerifyOptions {
        samples: a.samples,
        seed: a.out.seed,
        ..VerifyOptions::default()
    };
    let conserved = CertificateEntry::from_result(verify_conserved_with(&cv, &eq, &opts));
    let characteristic = match &a.characteristic {
        Some(src) => {
            let l = Characteristic(parse("--characteristic", src)?);
            Some((
                l.0.to_string(),
                CertificateEntry::from_result(verify_characteristic(&cv, &l, &eq)),
            ))
        }
        None => None,
    };
    let ok = conserved.certified() && characteristic.as_ref().is_none_or(|(_, c)| c.certified());
    let r = VerifyReport {
        tool: report::TOOL.into(),
        seed: a.out.seed,
        rhs: eq.rhs().to_string(),
        density: cv.density.to_string(),
        flux: cv.flux.to_string(),
        conserved,
        characteristic,
    };
    if a.out.json {
        print_json(&r);
    } else {
        out!("u_t = {}", r.rhs);
        out!("F = {}, G = {}", r.density, r.flux);
        out!("conserved: {}", status_line(&r.conserved));
        if let Some((l, c)) = &r.characteristic {
            out!("characteristic {l}: {}", status_line(c));
        }
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_REFUTED)
    })
}

fn status_line(c: &CertificateEntry) -> String {
    let head = if c.certified() { "certified" } else { "refuted" };
    match (&c.detail, c.status.as_str()) {
        (Some(d), _) => d.clone(),
        (None, "NumericSampled") => format!("{head} (NumericSampled on {} points)", c.sample_count),
        (None, s) => format!("{head} ({s})"),
    }
}

#[derive(Serialize)]
struct ReduceReport {
    tool: String,
    input: String,
    rhs: String,
    declarations: Vec<String>,
    verdict: String,
    canonical_forms: Forms,
    charts: Vec<Chart>,
    transformation: Option<Transformation>,
    potential_systems: Vec<Potential>,
    summary: String,
}

fn cmd_reduce(a: ReduceArgs) -> Result<ExitCode, InputError> {
    let decls = declarations(&a.functions)?;
    let src = match a.equation {
        Some(s) => s,
        None => read_stdin()?,
    };
    let opts = ReportOptions {
        seed: a.out.seed,
        emit_systems: false,
    };
    let r = classify_one(&src, &decls, a.degree, &opts)?;
    let structured = r.canonical_forms.h_hat.is_some() || r.charts.iter().any(|c| c.canonical_forms.h_hat.is_some());
    let summary = if structured {
        format!("dim {}", r.verdict)
    } else {
        format!("no divergence structure; dim {}", r.verdict)
    };
    let out = ReduceReport {
        tool: r.tool,
        input: r.input,
        rhs: r.rhs,
        declarations: r.declarations,
        verdict: r.verdict,
        canonical_forms: r.canonical_forms,
        charts: r.charts,
        transformation: r.transformation,
        potential_systems: r.potential_systems,
        summary,
    };
    if a.out.json {
        print_json(&out);
        return Ok(ExitCode::SUCCESS);
    }
    out!("u_t = {}", out.rhs);
    if let Some(h) = &out.canonical_forms.h_hat {
        out!("H^ = {h}");
    }
    if let Some(h) = &out.canonical_forms.h_check {
        out!("Hv = {h}");
    }
    for c in &out.charts {
        out!("{}", text::transformation(&c.transformation));
        out!("  u_t = {}", c.rhs);
        if let Some(h) = &c.canonical_forms.h_hat {
            out!("  H^ = {h}");
        }
        if let Some(h) = &c.canonical_forms.h_check {
            out!("  Hv = {h}");
        }
    }
    for p in &out.potential_systems {
        let eqs: Vec<String> = p.equations.iter().map(|(l, e)| format!("{l} = {e}")).collect();
        out!("potential system {{{}}}", eqs.join(", "));
    }
    out!("{}", out.summary);
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct TableRow {
    a: String,
    b: String,
    rhs: String,
    verdict: String,
    characteristics: Vec<String>,
}

/// Symbolic rows of the diffusion-convection family.
const TABLE_ROWS: [(&str, &str); 4] = [("A", "B"), ("A", "0"), ("A", "A"), ("1", "0")];

fn cmd_table(a: OutputArgs) -> Result<ExitCode, InputError> {
    let mut rows = Vec::new();
    for (ab, bb) in TABLE_ROWS {
        let inst = instantiate("dc", &[("A", ab), ("B", bb)]).map_err(|e| InputError(e.to_string()))?;
        let r = decide(&inst.equation, &DecideOptions::default());
        let mut characteristics: Vec<String> = r.basis.iter().map(|(_, l)| l.0.to_string()).collect();
        characteristics.extend(r.families.iter().map(|f| f.characteristic.0.to_string()));
        rows.push(TableRow {
            a: ab.into(),
            b: bb.into(),
            rhs: inst.equation.rhs().to_string(),
            verdict: r.verdict.to_string(),
            characteristics,
        });
    }
    if a.json {
        print_json(&rows);
    } else {
        out!("{:<4} {:<4} {:<10} characteristics", "A", "B", "verdict");
        for r in &rows {
            out!(
                "{:<4} {:<4} {:<10} {}",
                r.a,
                r.b,
                r.verdict,
                r.characteristics.join(", ")
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CatalogEntry {
    name: String,
    report: Report,
}

fn cmd_catalog(a: CatalogArgs) -> Result<ExitCode, InputError> {
    let opts = ReportOptions {
        seed: a.out.seed,
        emit_systems: a.emit_systems,
    };
    let instances = match &a.name {
        None => standard_instances(),
        Some(name) => {
            let mut bindings = Vec::new();
            for b in &a.bindings {
                let (k, v) = b
                    .split_once('=')
                    .ok_or_else(|| InputError(format!("--bind `{b}`: expected NAME=EXPR")))?;
                bindings.push((k.trim(), v.trim()));
            }
            vec![instantiate(name, &bindings).map_err(|e| InputError(e.to_string()))?]
        }
    };
    let entries: Vec<CatalogEntry> = instances
        .par_iter()
        .map(|i| {
            let r = decide(&i.equation, &DecideOptions::default());
            CatalogEntry {
                name: i.name.clone(),
                report: report::build(&i.equation.rhs().to_string(), &i.equation, &r, &opts),
            }
        })
        .collect();
    if a.out.json {
        print_json(&entries);
    } else {
        for (k, e) in entries.iter().enumerate() {
            if k > 0 {
                out!();
            }
            out!("== {}", e.name);
            out_raw!("{}", text::render(&e.report));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Table(a) => cmd_table(a),
        Command::Catalog(a) => cmd_catalog(a),
    };
    match result {
        Ok(code) => code,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
