use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use robinlab::assembly::{assemble_mass, assemble_nonlocal, assemble_stiffness};
use robinlab::boundary_ops::{plane_wave_form, BoundaryOperatorSpec};
use robinlab::eigen::{InertiaCounter, SolveOptions};
use robinlab::geometry::mesh_at_level;
use robinlab::harness::BoundaryCondition;
use robinlab::ldlt::LdlFactor;
use robinlab::{BoundaryTraversal, PolygonalDomain};
use robinlab_bench::discretization;

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    for level in [4, 5] {
        let mesh = mesh_at_level(&PolygonalDomain::unit_square(), level).unwrap();
        g.bench_with_input(BenchmarkId::new("stiffness+mass", level), &mesh, |b, m| {
            b.iter(|| (assemble_stiffness(m).unwrap(), assemble_mass(m).unwrap()))
        });
        let trav = BoundaryTraversal::new(&mesh).unwrap();
        g.bench_with_input(BenchmarkId::new("nonlocal", level), &mesh, |b, m| {
            b.iter(|| assemble_nonlocal(m, &trav, &|s, t| (s - t).cos()).unwrap())
        });
    }
    g.finish();
}

fn factorization(c: &mut Criterion) {
    let mut g = c.benchmark_group("ldlt");
    for (domain, level) in [("unit_square", 5), ("disk", 4), ("lshape", 5)] {
        let disc = discretization(domain, "zero", level);
        let (k, _) = disc.pencil(BoundaryCondition::Neumann).unwrap();
        let shifted = k.axpby(1.0, &disc.mass.matrix, 1.0).unwrap();
        g.bench_function(format!("{domain}/{level}"), |b| b.iter(|| LdlFactor::new(&shifted).unwrap()));
    }
    g.finish();
}

fn eigensolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    let opts = SolveOptions { want_vectors: false, ..SolveOptions::default() };
    for (theta, level) in [("zero", 5), ("mult:const:-1", 5), ("kernel:cosine:-1:1", 4)] {
        let disc = discretization("unit_square", theta, level);
        g.bench_function(format!("robin {theta}/{level} x10"), |b| b.iter(|| disc.solve(BoundaryCondition::Robin, 10, &opts).unwrap()));
    }
    let disc = discretization("unit_square", "zero", 5);
    let (k, m) = disc.pencil(BoundaryCondition::Dirichlet).unwrap();
    g.bench_function("inertia count", |b| {
        let counter = InertiaCounter::new(&k, &m).unwrap();
        b.iter(|| counter.count(150.0).unwrap())
    });
    g.finish();
}

fn plane_wave(c: &mut Criterion) {
    let mesh = mesh_at_level(&PolygonalDomain::unit_square(), 5).unwrap();
    let trav = BoundaryTraversal::new(&mesh).unwrap();
    let spec = BoundaryOperatorSpec::parse("sum:(mult:const:-1;kernel:cosine:-0.5:2)").unwrap();
    c.bench_function("plane wave form", |b| b.iter(|| plane_wave_form(&trav, &spec, [3.0, -4.0]).unwrap()));
}

criterion_group!(benches, assembly, factorization, eigensolve, plane_wave);
criterion_main!(benches);
