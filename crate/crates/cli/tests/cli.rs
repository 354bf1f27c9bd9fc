use std::path::PathBuf;
use std::process::{Command, Output};

use conslaw::expr::parse_declarations;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conslaw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let o = run(&a);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn classify_examples() {
    assert_eq!(json(&["classify", "u_xx"])["verdict"], "Infinite");
    assert_eq!(
        json(&["classify", "diff(A(u)*u_x,x)", "--functions", "A(u)"])["verdict"],
        "Exact(2)"
    );
    assert_eq!(json(&["classify", "u_xx^2"])["verdict"], "Exact(0)");
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        run(&["verify", "u_xx", "--density", "u", "--flux=-u_x"]).status.code(),
        Some(0)
    );
    let l1 = run(&["verify", "u_x^-2*u_xx", "--density", "u^2-2*t", "--flux", "2*u/u_x"]);
    assert_eq!(l1.status.code(), Some(0));
    assert_eq!(
        run(&["verify", "u_xx", "--density", "u", "--flux", "u"]).status.code(),
        Some(1)
    );
    let wrong_lambda = run(&[
        "verify",
        "u_xx",
        "--density",
        "x*u",
        "--flux",
        "u-x*u_x",
        "--characteristic",
        "1",
    ]);
    assert_eq!(wrong_lambda.status.code(), Some(1));
    assert_eq!(
        run(&["verify", "u_xx", "--density", "u(", "--flux", "u"]).status.code(),
        Some(2)
    );
}

#[test]
fn bad_input_reports_position() {
    let o = run(&["classify", "u_xx + "]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("column 8"), "{err}");
    assert_eq!(run(&["classify", "u_xxx"]).status.code(), Some(2));
    assert_eq!(
        run(&["classify", "A*u_xx", "--functions", "A(w)"]).status.code(),
        Some(2)
    );
}

#[test]
fn reduce_examples() {
    let heat = json(&["reduce", "u_xx"]);
    assert_eq!(heat["canonical_forms"]["h_hat"], "u_x");
    assert_eq!(heat["canonical_forms"]["h_check"], "u");
    let dc = json(&["reduce", "diff(A(u)*u_x,x) + A(u)*u_x", "--functions", "A(u)"]);
    let t = &dc["transformation"];
    assert_eq!((t["x"].as_str(), t["u"].as_str()), (Some("exp(x)"), Some("u*exp(-x)")));
    assert!(dc["charts"][0]["canonical_forms"]["h_check"].is_string());
    let o = run(&["reduce", "u_xx^2"]);
    assert!(stdout(&o).contains("no divergence structure; dim Exact(0)"));
}

#[test]
fn table_rows() {
    let rows = json(&["table"]);
    let got: Vec<(String, String)> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["b"].as_str().unwrap().to_string(),
                r["verdict"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let want = [
        ("B", "Exact(1)"),
        ("0", "Exact(2)"),
        ("A", "Exact(2)"),
        ("0", "Infinite"),
    ];
    assert_eq!(got, want.map(|(a, b)| (a.to_string(), b.to_string())));
}

const EXPRESSION_KEYS: [&str; 9] = [
    "rhs",
    "density",
    "flux",
    "characteristic",
    "h_hat",
    "h_check",
    "t",
    "x",
    "u",
];

fn check_expressions(v: &Value, decls: &conslaw::expr::Declarations, seen: &mut usize) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if k == "potential_systems" || k == "emitted_systems" {
                    continue;
                }
                match (EXPRESSION_KEYS.contains(&k.as_str()) || k == "side_conditions", x) {
                    (true, Value::String(s)) => {
                        decls
                            .parse(s)
                            .unwrap_or_else(|e| panic!("`{s}` does not reparse: {e:?}"));
                        *seen += 1;
                    }
                    (true, Value::Array(a)) => {
                        for s in a.iter().filter_map(Value::as_str) {
                            decls
                                .parse(s)
                                .unwrap_or_else(|e| panic!("`{s}` does not reparse: {e:?}"));
                            *seen += 1;
                        }
                    }
                    _ => check_expressions(x, decls, seen),
                }
            }
        }
        Value::Array(a) => a.iter().for_each(|x| check_expressions(x, decls, seen)),
        _ => {}
    }
}

#[test]
fn catalog_reports_reparse() {
    let entries = json(&["catalog"]);
    let mut seen = 0;
    for e in entries.as_array().unwrap() {
        let r = &e["report"];
        let decls: Vec<&str> = r["declarations"]
            .as_array()
            .unwrap()
            .iter()
            .filter_map(Value::as_str)
            .collect();
        let d = parse_declarations(&decls.join("; ")).unwrap();
        check_expressions(r, &d, &mut seen);
        for law in r["basis"].as_array().unwrap() {
            assert!(
                ["SymbolicZero", "NumericSampled"].contains(&law["certificate"]["status"].as_str().unwrap()),
                "{}: {law}",
                e["name"]
            );
        }
    }
    assert!(seen > 100, "{seen}");
}

#[test]
fn batch_input_is_ordered_and_parallel_safe() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eqs.txt");
    std::fs::write(&path, "u_xx\n# skipped\n\nu_xx^2\nu_x^-2*u_xx\n-1/u_xx\nu_xx + u*u_x\n").unwrap();
    let p = path.to_str().unwrap();
    let one = json(&["classify", "--file", p]);
    let four = json(&["classify", "--file", p, "--jobs", "4"]);
    assert_eq!(one, four);
    let verdicts: Vec<&str> = one
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["verdict"].as_str().unwrap())
        .collect();
    assert_eq!(verdicts, ["Infinite", "Exact(0)", "Infinite", "Infinite", "Exact(1)"]);
    std::fs::write(&path, "u_xx\nnot an equation(\n").unwrap();
    assert_eq!(run(&["classify", "--file", p]).status.code(), Some(2));
}

fn golden(name: &str, args: &[&str]) {
    let o = run(args);
    assert!(o.status.success());
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &o.stdout).unwrap();
    }
    let want =
        std::fs::read(&path).unwrap_or_else(|_| panic!("missing {}; rerun with UPDATE_GOLDEN=1", path.display()));
    assert!(want == o.stdout, "{name} differs from golden output:\n{}", stdout(&o));
}

#[test]
fn golden_outputs() {
    golden("heat.json", &["classify", "u_xx", "--json"]);
    golden(
        "dc_equal_convection.json",
        &[
            "classify",
            "diff(A(u)*u_x,x) + A(u)*u_x",
            "--functions",
            "A(u)",
            "--json",
        ],
    );
    golden("l2.txt", &["classify", "-1/u_xx"]);
    golden("table.txt", &["table"]);
    golden("l1_reduce.txt", &["reduce", "u_x^-2*u_xx"]);
}
