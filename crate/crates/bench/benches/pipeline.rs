use criterion::{black_box, criterion_group, criterion_main, Criterion};

use conslaw::catalog::{instantiate, standard_instances};
use conslaw::classify::{apply_transformation, decide, ContactTransformation, DecideOptions};
use conslaw::claws::{solve_determining, SolveOptions};
use conslaw::expr::parse;
use conslaw::jet::{euler, EvolutionEquation};
use conslaw::verify::verify_conserved;

fn eq(s: &str) -> EvolutionEquation {
    EvolutionEquation::new(parse(s).unwrap()).unwrap()
}

fn classify(c: &mut Criterion) {
    let catalog = standard_instances();
    c.bench_function("decide/catalog", |b| {
        b.iter(|| {
            for i in &catalog {
                black_box(decide(&i.equation, &DecideOptions::default()));
            }
        })
    });
    let dc = instantiate("dc", &[("B", "A")]).unwrap();
    c.bench_function("decide/dc equal convection", |b| {
        b.iter(|| decide(black_box(&dc.equation), &DecideOptions::default()))
    });
}

fn solver(c: &mut Criterion) {
    let mobius = eq("(3*u*u_xx - 4*u_x)/(-u_x*u_xx - 2*u*u_xx + u_xx - u)");
    c.bench_function("solve/mobius degree 2", |b| {
        b.iter(|| solve_determining(black_box(&mobius), &SolveOptions::default()))
    });
    let burgers = eq("u_xx + u*u_x");
    c.bench_function("solve/burgers degree 3", |b| {
        let opts = SolveOptions {
            degree: 3,
            ..SolveOptions::default()
        };
        b.iter(|| solve_determining(black_box(&burgers), &opts))
    });
    let h = parse("(u*u_xx + x)/(u_x*u_xx - 1)").unwrap();
    c.bench_function("euler/rational", |b| b.iter(|| euler(black_box(&h))));
}

fn certify(c: &mut Criterion) {
    let l1 = instantiate("L1", &[]).unwrap();
    let family = l1.expected.family.clone().unwrap();
    c.bench_function("verify/L1 sigma family", |b| {
        b.iter(|| {
            for (cv, _) in &family.instances {
                verify_conserved(black_box(cv), &l1.equation).unwrap();
            }
        })
    });
    let l2 = eq("-1/u_xx");
    c.bench_function("transform/Legendre L2", |b| {
        b.iter(|| apply_transformation(&ContactTransformation::legendre(), black_box(&l2)).unwrap())
    });
}

criterion_group!(benches, classify, solver, certify);
criterion_main!(benches);
