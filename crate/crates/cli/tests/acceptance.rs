//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use poscone::convexity::{check_double_bracket, standard_subspace, Closure, SubspaceKind};
use poscone::oracles::OracleReport;
use poscone::random::{random_hermitian, rng};
use poscone::verify::{check, random_partition, two_block_algebra};
use poscone::{Algebra, TracialAlgebra};

const SEED: u64 = 20_240_601;

fn m(n: usize) -> Algebra {
    TracialAlgebra::matrix(n)
}

/// The desk-scale algebras used unless a criterion names its own.
fn standard_algebras() -> Vec<Algebra> {
    vec![m(2), m(3), m(5), two_block_algebra()]
}

/// Runs named checks with `n` instances per algebra; seeds are disjoint
/// across checks.
fn run_checks(names: &[&str], algebras: &[Algebra], n: usize, seed: u64) -> Vec<OracleReport> {
    names
        .iter()
        .enumerate()
        .flat_map(|(i, name)| {
            let c = check(name).unwrap_or_else(|| panic!("unknown check {name}"));
            c.run(algebras, n, seed + 1_000_000 * i as u64, 1.0)
        })
        .collect()
}

fn select(reports: Vec<OracleReport>, keep: &[&str]) -> Vec<OracleReport> {
    reports
        .into_iter()
        .filter(|r| keep.contains(&r.name.as_str()))
        .collect()
}

struct Criterion {
    title: &'static str,
    pass: bool,
    detail: String,
}

fn from_reports(title: &'static str, reports: &[OracleReport]) -> Criterion {
    let pass = reports.iter().all(|r| r.pass);
    let detail = reports
        .iter()
        .map(|r| {
            format!(
                "{}{} n={} max={:.2e} tol={:.0e}",
                if r.pass { "" } else { "!" },
                r.name,
                r.instances,
                r.max_violation,
                r.tolerance
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Criterion { title, pass, detail }
}

fn emi() -> Criterion {
    let algs = vec![m(2), m(3), m(5), m(8)];
    from_reports(
        "EMI slack >= -1e-10, 500 pairs per dim in {2,3,5,8}",
        &run_checks(&["emi"], &algs, 500, SEED),
    )
}

fn dexp() -> Criterion {
    from_reports(
        "dexp vs Simpson quadrature and finite differences, 200 pairs",
        &run_checks(&["dexp"], &standard_algebras(), 200, SEED + 1),
    )
}

fn t_operator() -> Criterion {
    let reps = run_checks(&["t_operator"], &standard_algebras(), 200, SEED + 2);
    from_reports(
        "T_x symmetry, inverse contractivity, sinh formula vs quadrature, 200 pairs",
        &reps,
    )
}

fn geodesics() -> Criterion {
    let mut reps = select(
        run_checks(&["geodesic"], &standard_algebras(), 200, SEED + 3),
        &["geodesic_midpoint", "geodesic_speed"],
    );
    reps.extend(run_checks(&["minimality"], &[m(3)], 50, SEED + 4));
    from_reports("Geodesic midpoints, 50x20 perturbed paths, constant speed", &reps)
}

fn distance() -> Criterion {
    let mut reps = select(
        run_checks(&["distance"], &standard_algebras(), 200, SEED + 5),
        &["congruence_invariance"],
    );
    reps.extend(select(
        run_checks(&["distance"], &standard_algebras(), 500, SEED + 6),
        &["distance_lower_bound"],
    ));
    reps.extend(select(
        run_checks(&["triangle"], &standard_algebras(), 200, SEED + 7),
        &["triangle_angle_sum"],
    ));
    from_reports(
        "Congruence invariance, distance lower bound, triangle angle sums",
        &reps,
    )
}

fn curvature_jacobi() -> Criterion {
    let algs = standard_algebras();
    let mut reps = run_checks(&["curvature"], &algs, 500, SEED + 8);
    reps.extend(run_checks(&["jacobi", "jacobi_step_halving"], &algs, 100, SEED + 9));
    from_reports(
        "Sectional curvature, Jacobi ODE residual, step halving, convexity, trace",
        &reps,
    )
}

fn distance_convexity() -> Criterion {
    from_reports(
        "Distance between geodesics midpoint-convex, 100 pairs, 33-point grids",
        &run_checks(&["distance_convexity"], &standard_algebras(), 100, SEED + 10),
    )
}

fn convex_sets() -> Criterion {
    let mut reps = Vec::new();
    // Every standard kind on every algebra, including M8.
    let mut closure = OracleReport::new("closure_each_kind", 1e-9);
    let mut r = rng(SEED + 11);
    let mut algs = standard_algebras();
    algs.push(m(8));
    for (i, alg) in algs.iter().enumerate() {
        let kinds = [
            SubspaceKind::Diagonal,
            SubspaceKind::BlockDiagonal(random_partition(alg, &mut r)),
            SubspaceKind::Full,
            SubspaceKind::SingleGenerator(random_hermitian(alg, 1.0, &mut r)),
        ];
        for kind in &kinds {
            let h = standard_subspace(alg, kind).expect("standard subspace");
            let v = match check_double_bracket(&h, 1e-9) {
                Closure::Pass { max_residual } => max_residual,
                Closure::Fail(w) => w.residual,
            };
            closure.record(v, i as u64);
        }
    }
    reps.push(closure);
    reps.extend(run_checks(&["closure_counterexample"], &[m(2)], 1, SEED + 12));
    reps.extend(select(
        run_checks(&["membership"], &standard_algebras(), 100, SEED + 13),
        &["aba_membership", "geodesic_membership"],
    ));
    from_reports(
        "Closure of standard kinds, explicit witness, aba and geodesic membership",
        &reps,
    )
}

fn projection() -> Criterion {
    let algs = standard_algebras();
    let mut reps = select(
        run_checks(&["projection"], &algs, 200, SEED + 14),
        &["projection_orthogonality", "projection_idempotence"],
    );
    reps.extend(run_checks(
        &["projection_oracle", "projection_uniqueness"],
        &algs,
        50,
        SEED + 15,
    ));
    reps.extend(run_checks(&["contractivity"], &algs, 200, SEED + 16));
    from_reports(
        "Projection oracle, orthogonality, idempotence, uniqueness, contractivity",
        &reps,
    )
}

fn factorizations() -> Criterion {
    let reps = select(
        run_checks(
            &["factor_symmetric", "factor_masa", "factor_iwasawa", "factor_trivial"],
            &standard_algebras(),
            100,
            SEED + 17,
        ),
        &[
            "symmetric_reconstruction",
            "symmetric_orthogonality",
            "masa_reconstruction",
            "masa_diagonal",
            "iwasawa_reconstruction",
            "iwasawa_unitarity",
            "iwasawa_orthogonality",
            "factor_trivial_cases",
        ],
    );
    from_reports("Symmetric, masa and Iwasawa factorizations, trivial cases", &reps)
}

fn cli_verify() -> Criterion {
    let args = [
        "verify", "--suite", "all", "--dims", "2,3,5", "--trials", "200", "--seed", "42",
    ];
    let run = || Command::new(env!("CARGO_BIN_EXE_poscone")).args(args).output();
    match (run(), run()) {
        (Ok(a), Ok(b)) => {
            let codes = (a.status.code(), b.status.code());
            let identical = a.stdout == b.stdout && !a.stdout.is_empty();
            Criterion {
                title: "CLI verify --suite all --dims 2,3,5 --trials 200 --seed 42 twice",
                pass: codes == (Some(0), Some(0)) && identical,
                detail: format!(
                    "exit codes {:?}, byte-identical {identical}, {} bytes",
                    codes,
                    a.stdout.len()
                ),
            }
        }
        (a, b) => Criterion {
            title: "CLI verify twice",
            pass: false,
            detail: format!("could not run binary: {:?} {:?}", a.err(), b.err()),
        },
    }
}

fn main() -> ExitCode {
    let criteria: [fn() -> Criterion; 11] = [
        emi,
        dexp,
        t_operator,
        geodesics,
        distance,
        curvature_jacobi,
        distance_convexity,
        convex_sets,
        projection,
        factorizations,
        cli_verify,
    ];
    let mut failed = 0;
    for f in criteria {
        let start = Instant::now();
        let c = f();
        println!(
            "{} {} ({:.1} s)\n    {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.title,
            start.elapsed().as_secs_f64(),
            c.detail
        );
        if !c.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
