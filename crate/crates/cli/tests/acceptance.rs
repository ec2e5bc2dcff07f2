//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robinlab::boundary_ops::{boundary_integral, plane_wave_form, BoundaryOperatorSpec};
use robinlab::eigen::{counting_function, InertiaCounter, SolveOptions};
use robinlab::geometry::mesh_at_level;
use robinlab::harness::{
    coercivity_kappa, extrapolate_spectra, filonov_series, trace_beta, verify_counting, verify_interlacing, BoundaryCondition,
    Discretization, FilonovOptions, HarnessOptions, Problem, Verdict,
};
use robinlab::oracles::{bessel_zero, rectangle_spectrum, RectangleBc};
use robinlab::{BoundaryTraversal, PolygonalDomain};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn problem(domain: &str, theta: &str) -> Problem {
    Problem::new(PolygonalDomain::parse(domain).unwrap(), BoundaryOperatorSpec::parse(theta).unwrap())
}

fn levels(p: &Problem, ls: &[usize]) -> Vec<Discretization> {
    ls.iter().map(|&l| Discretization::new(p, l).unwrap()).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn dirichlet_square() -> Outcome {
    let p = problem("unit_square", "zero");
    let discs = levels(&p, &[4, 5]);
    let opts = SolveOptions::default();
    let spectra: Vec<_> = discs.iter().map(|d| d.solve(BoundaryCondition::Dirichlet, 10, &opts).unwrap()).collect();
    let ex = extrapolate_spectra(&spectra).unwrap();
    let oracle = rectangle_spectrum(1.0, 1.0, RectangleBc::Dirichlet, 10).unwrap().eigenvalues;
    let worst = (0..10).map(|i| rel(ex.values[i], oracle[i])).fold(0.0, f64::max);
    let orders: Vec<f64> =
        (0..10).map(|i| ((spectra[0].eigenvalues[i] - oracle[i]) / (spectra[1].eigenvalues[i] - oracle[i])).abs().log2()).collect();
    let (lo, hi) = orders.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &o| (a.min(o), b.max(o)));
    check(worst <= 1e-3 && lo >= 1.8 && hi <= 2.2, format!("max rel err {worst:.2e}, observed order in [{lo:.3}, {hi:.3}]"))
}

fn neumann_square() -> Outcome {
    let p = problem("unit_square", "zero");
    let discs = levels(&p, &[4, 5]);
    let opts = SolveOptions::default();
    let spectra: Vec<_> = discs.iter().map(|d| d.solve(BoundaryCondition::Neumann, 10, &opts).unwrap()).collect();
    let ex = extrapolate_spectra(&spectra).unwrap();
    let oracle = rectangle_spectrum(1.0, 1.0, RectangleBc::Neumann, 10).unwrap().eigenvalues;
    let zero_ok = spectra.iter().all(|s| s.eigenvalues[0].abs() <= 1e-8 * s.eigenvalues[1]) && ex.values[0].abs() <= 1e-8 * ex.values[1];
    let worst = (1..10).map(|i| rel(ex.values[i], oracle[i])).fold(0.0, f64::max);
    check(zero_ok && worst <= 1e-3, format!("lambda_1 = {:.2e}, max rel err (2..10) {worst:.2e}", ex.values[0]))
}

fn robin_square() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for theta in [-1.0, 1.0] {
        let p = Problem::new(PolygonalDomain::unit_square(), BoundaryOperatorSpec::mult_const(theta));
        let discs = levels(&p, &[4, 5]);
        let spectra: Vec<_> = discs.iter().map(|d| d.solve(BoundaryCondition::Robin, 8, &SolveOptions::default()).unwrap()).collect();
        let ex = extrapolate_spectra(&spectra).unwrap();
        let oracle = rectangle_spectrum(1.0, 1.0, RectangleBc::Robin(theta), 8).unwrap().eigenvalues;
        let worst = (0..8).map(|i| rel(ex.values[i], oracle[i])).fold(0.0, f64::max);
        ok &= worst <= 2e-3;
        details.push(format!("theta={theta:+}: max rel err {worst:.2e}"));
    }
    check(ok, details.join(", "))
}

fn disk() -> Outcome {
    let target = bessel_zero(0, 1).unwrap().powi(2);
    let mut ok = true;
    let mut details = Vec::new();
    for (domain, tol) in [("ngon:64:1", 1e-2), ("ngon:128:1", 3e-3)] {
        let p = problem(domain, "zero");
        let discs = levels(&p, &[3, 4]);
        let spectra: Vec<_> = discs.iter().map(|d| d.solve(BoundaryCondition::Dirichlet, 1, &SolveOptions::default()).unwrap()).collect();
        let l1 = extrapolate_spectra(&spectra).unwrap().values[0];
        let e = rel(l1, target);
        ok &= e <= tol;
        details.push(format!("{domain}: {l1:.6} ({:.3}%)", 100.0 * e));
    }
    check(ok, format!("j01^2 = {target:.6}; {}", details.join(", ")))
}

fn polya() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for (domain, ls) in [("unit_square", [4, 5]), ("lshape", [4, 5]), ("disk", [3, 4])] {
        let r = verify_interlacing(&problem(domain, "zero"), 1, &ls, &HarnessOptions::default()).unwrap();
        let row = &r.rows[0];
        ok &= row.verdict == Verdict::HoldsStrict;
        details.push(format!("{domain}: margin {:.3} {}", row.margin, row.verdict.as_str()));
    }
    check(ok, details.join(", "))
}

fn friedlander() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for domain in ["unit_square", "lshape"] {
        let r = verify_interlacing(&problem(domain, "zero"), 10, &[4, 5], &HarnessOptions::default()).unwrap();
        let strict = r.rows.iter().all(|row| row.verdict == Verdict::HoldsStrict && row.margin > 0.0);
        ok &= strict && r.rows.len() == 10;
        let min = r.rows.iter().map(|row| row.margin).fold(f64::INFINITY, f64::min);
        details.push(format!("{domain}: min margin {min:.3}"));
    }
    check(ok, details.join(", "))
}

fn main_theorem() -> Outcome {
    let square = PolygonalDomain::unit_square();
    let trav = BoundaryTraversal::new(&mesh_at_level(&square, 1).unwrap()).unwrap();
    let edges = BoundaryOperatorSpec::parse("mult:edges:1,-2,1,-2").unwrap();
    let BoundaryOperatorSpec::Multiplication { theta, .. } = &edges else { unreachable!() };
    let integral = boundary_integral(theta, &trav);
    let mut ok = integral < 0.0;
    let mut details = vec![format!("edges integral {integral}")];
    for spec in ["mult:const:-1", "rank1:const:-1", "mult:edges:1,-2,1,-2", "kernel:cosine:-1:1"] {
        let r = verify_interlacing(&problem("unit_square", spec), 8, &[4, 5], &HarnessOptions::default()).unwrap();
        let rows_ok = r.rows.iter().all(|row| row.verdict == Verdict::HoldsStrict);
        // the chain compares against Neumann and needs Theta <= 0
        let chain_ok = !r.conditions.nonpositive.pass || (!r.chain.is_empty() && r.chain.iter().all(|c| c.holds));
        ok &= rows_ok && chain_ok && r.conditions.preconditions_met;
        let min = r.rows.iter().map(|row| row.margin).fold(f64::INFINITY, f64::min);
        details.push(format!(
            "{spec}: min margin {min:.3}, chain {}",
            if r.conditions.nonpositive.pass { chain_ok.to_string() } else { "n/a".into() }
        ));
    }
    check(ok, details.join("; "))
}

fn counting() -> Outcome {
    let values: Vec<f64> = [2, 5, 5, 8, 10, 10, 13, 13, 17, 17, 18].iter().map(|&k| k as f64 * PI * PI).collect();
    let mut ok = true;
    let mut details = Vec::new();
    for spec in ["zero", "mult:const:-1"] {
        let p = problem("unit_square", spec);
        let reports: Vec<_> =
            (1..=5).map(|j| verify_counting(&p, j, &[4, 5], Some(&values), &HarnessOptions::default()).unwrap()).collect();
        ok &= reports.iter().all(|r| r.verdict == Verdict::HoldsStrict);
        ok &= reports[0].n_dirichlet == 1 && reports[1].n_dirichlet == 3;
        let counts: Vec<String> = reports.iter().map(|r| format!("{}>={}", r.certain_below, r.required)).collect();
        details.push(format!("{spec}: {}", counts.join(" ")));
    }
    check(ok, details.join("; "))
}

fn filonov() -> Outcome {
    let mut ok = true;
    let mut details = Vec::new();
    for spec in ["zero", "mult:const:-1"] {
        let p = problem("unit_square", spec);
        for j in 1..=3 {
            let s = filonov_series(&p, j, &[4, 5], &FilonovOptions::default()).unwrap();
            ok &= s.verdict == Verdict::HoldsStrict && s.c_nonincreasing;
            details.push(format!("{spec} j={j}: C {:.3e} -> {:.3e}", s.reports[0].measured_c, s.reports[1].measured_c));
        }
    }
    check(ok, details.join("; "))
}

fn plane_wave() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for domain in ["unit_square", "lshape", "disk", "rectangle:2:0.5"] {
        let mesh = mesh_at_level(&PolygonalDomain::parse(domain).unwrap(), 3).unwrap();
        let trav = BoundaryTraversal::new(&mesh).unwrap();
        let sides = mesh.boundary_edges.iter().map(|e| e.side).max().unwrap() + 1;
        let edge_vals: Vec<String> = (0..sides).map(|k| format!("{}", (k as f64 * 1.3).sin() * 3.0)).collect();
        for text in ["mult:const:-1", "mult:const:50", "mult:const:0.25:p=2", &format!("mult:edges:{}", edge_vals.join(","))] {
            let spec = BoundaryOperatorSpec::parse(text).unwrap();
            let BoundaryOperatorSpec::Multiplication { theta, .. } = &spec else { unreachable!() };
            let integral = boundary_integral(theta, &trav);
            for _ in 0..32 {
                let eta = [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)];
                let v = plane_wave_form(&trav, &spec, eta).unwrap();
                worst = worst.max((v - integral).abs() / (1.0 + integral.abs()));
            }
        }
    }
    check(worst <= 1e-9, format!("max scaled deviation {worst:.2e}"))
}

fn inertia() -> Outcome {
    let cases = [
        ("unit_square", "zero", 4),
        ("lshape", "zero", 4),
        ("disk", "zero", 3),
        ("unit_square", "mult:const:-1", 4),
        ("unit_square", "rank1:const:-1", 4),
        ("unit_square", "mult:edges:1,-2,1,-2", 4),
        ("unit_square", "kernel:cosine:-1:1", 4),
        ("unit_square", "mult:const:50", 4),
    ];
    let opts = SolveOptions { want_vectors: false, ..SolveOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for (domain, spec, level) in cases {
        let disc = Discretization::new(&problem(domain, spec), level).unwrap();
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann, BoundaryCondition::Robin] {
            let (k, m) = disc.pencil(bc).unwrap();
            let s = disc.solve(bc, 25, &opts).unwrap();
            let counter = InertiaCounter::new(&k, &m).unwrap();
            let (lo, hi) = (s.eigenvalues[0] - 1.0, s.largest().unwrap());
            for _ in 0..20 {
                let lambda = rng.random_range(lo..hi);
                let a = counter.count(lambda).unwrap().count;
                let b = counting_function(&s, lambda).unwrap();
                checked += 1;
                if a != b {
                    mismatches.push(format!("{domain}/{spec}/{bc:?} at {lambda}: {a} vs {b}"));
                }
            }
        }
    }
    check(mismatches.is_empty(), format!("{checked} shifts, {} mismatches {}", mismatches.len(), mismatches.join("; ")))
}

fn trace() -> Outcome {
    let mesh = mesh_at_level(&PolygonalDomain::unit_square(), 4).unwrap();
    let eps = [0.4, 0.2, 0.1, 0.05, 0.025];
    let beta: Vec<f64> = eps.iter().map(|&e| trace_beta(&mesh, e, &SolveOptions::default()).unwrap()).collect();
    let ratios: Vec<f64> = beta.windows(2).map(|w| w[1] / w[0]).collect();
    let ok = ratios.iter().all(|r| (1.0..=2.5).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    check(ok, format!("beta(eps/2)/beta(eps) = {}", shown.join(", ")))
}

fn coercivity() -> Outcome {
    let square = PolygonalDomain::unit_square();
    let opts = SolveOptions::default();
    let mut zero_err: f64 = 0.0;
    let mut kappas = Vec::new();
    for level in 3..=5 {
        let mesh = mesh_at_level(&square, level).unwrap();
        zero_err = zero_err.max((coercivity_kappa(&mesh, &BoundaryOperatorSpec::Zero, &opts).unwrap() - 0.5).abs());
        kappas.push(coercivity_kappa(&mesh, &BoundaryOperatorSpec::mult_const(-1.0), &opts).unwrap());
    }
    let (lo, hi) = kappas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &k| (a.min(k), b.max(k)));
    let spread = (hi - lo) / lo.abs();
    check(zero_err <= 1e-10 && spread <= 0.1, format!("|kappa(zero) - 0.5| = {zero_err:.1e}, kappa(-1) spread {:.2}%", 100.0 * spread))
}

fn negative_control() -> Outcome {
    let r = verify_interlacing(&problem("unit_square", "mult:const:50"), 8, &[4, 5], &HarnessOptions::default()).unwrap();
    let bad = r.rows.iter().filter(|row| row.verdict != Verdict::HoldsStrict).count();
    let flagged = !r.conditions.preconditions_met && !r.conditions.nonpositive.pass && !r.conditions.plane_wave_pass;
    check(
        bad > 0 && flagged && r.exit_code() != 0,
        format!("{bad} uncertified rows, preconditions met: {}, exit {}", r.conditions.preconditions_met, r.exit_code()),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_robinlab"))
            .args([
                "verify",
                "interlace",
                "--domain",
                "lshape",
                "--theta",
                "sum:(mult:const:-1;kernel:cosine:-0.5:2)",
                "--jmax",
                "5",
                "--levels",
                "3,4,5",
            ])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        (status.code(), std::fs::read(out).unwrap())
    };
    let (c1, a) = run("a.json");
    let (c2, b) = run("b.json");
    check(c1 == c2 && a == b && !a.is_empty(), format!("{} bytes, exit codes {c1:?} / {c2:?}, identical: {}", a.len(), a == b))
}

fn main() {
    let criteria: [Criterion; 15] = [
        ("oracle convergence, Dirichlet square", dirichlet_square),
        ("oracle convergence, Neumann square", neumann_square),
        ("oracle convergence, local Robin square", robin_square),
        ("disk against Bessel zero", disk),
        ("lambda_N2 < lambda_D1", polya),
        ("lambda_N(j+1) < lambda_D(j), j <= 10", friedlander),
        ("lambda_Theta(j+1) < lambda_D(j), j <= 8, and monotone chain", main_theorem),
        ("counting below lambda_D(j)", counting),
        ("Filonov trial space", filonov),
        ("plane-wave form of multiplication operators", plane_wave),
        ("inertia versus counting function", inertia),
        ("trace constant sweep", trace),
        ("coercivity shift", coercivity),
        ("negative control", negative_control),
        ("determinism of verify interlace", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.1}s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
