//! Randomized property suites.
//!
//! Each check draws one random instance from a seeded generator and returns
//! one violation per property it covers; a property holds on the instance
//! when its violation is at most the tolerance. Instance `i` of a run uses
//! seed `seed + i`, with instances numbered in suite order, so a failure can
//! be reproduced from the worst-case seed in the report. Instances run on
//! the rayon pool and are merged in index order; reports are identical for
//! identical configurations.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{matrix_unit, pauli, Algebra, BlockSpec, HermitianElement, PositiveElement, TracialAlgebra};
use crate::convexity::{
    check_double_bracket, falsification_scan, orthogonal_supplement, standard_subspace, Closure, ConvexSubmanifold,
    Subspace, SubspaceKind, DEFAULT_CLOSURE_TOL, DEFAULT_MEMBERSHIP_TOL,
};
use crate::error::{Error, Result};
use crate::geometry::{self, dist, geodesic, Geodesic};
use crate::oracles::{self, OracleReport};
use crate::projection::{self, DEFAULT_MAX_ITER, DEFAULT_PROJECTION_TOL};
use crate::random::{
    random_hermitian, random_hermitian_in_ball, random_invertible, random_positive, random_unitary, rng, TestRng,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Radius for random exponents and points.
const RADIUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Emi,
    Geodesic,
    Jacobi,
    Convexity,
    Projection,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["all", "emi", "geodesic", "jacobi", "convexity", "projection"];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Emi => "emi",
            Suite::Geodesic => "geodesic",
            Suite::Jacobi => "jacobi",
            Suite::Convexity => "convexity",
            Suite::Projection => "projection",
        }
    }

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "emi" => Suite::Emi,
            "geodesic" => Suite::Geodesic,
            "jacobi" => Suite::Jacobi,
            "convexity" => Suite::Convexity,
            "projection" => Suite::Projection,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown suite {other:?}, expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

/// How many instances a check runs for a requested trial count.
#[derive(Debug, Clone, Copy)]
pub enum Scope {
    /// `trials` instances on every algebra.
    PerAlgebra,
    /// `⌈trials / n⌉` instances on every algebra, for expensive checks.
    Reduced(usize),
    /// One instance in total, on a built-in example.
    Fixed,
}

type CheckFn = fn(&Algebra, &mut TestRng) -> Result<Vec<f64>>;

/// A random instance generator covering one or more properties.
pub struct Check {
    pub name: &'static str,
    pub suite: Suite,
    pub scope: Scope,
    /// Property names and their tolerances, in the order of the returned
    /// violations.
    pub properties: &'static [(&'static str, f64)],
    run: CheckFn,
}

impl Check {
    pub fn instances(&self, trials: usize) -> usize {
        match self.scope {
            Scope::PerAlgebra => trials,
            Scope::Reduced(n) => trials.div_ceil(n),
            Scope::Fixed => trials.min(1),
        }
    }

    /// Evaluates one instance, reporting errors.
    pub fn try_evaluate(&self, algebra: &Algebra, seed: u64) -> Result<Vec<f64>> {
        (self.run)(algebra, &mut rng(seed))
    }

    /// Evaluates one instance. Errors become infinite violations.
    pub fn evaluate(&self, algebra: &Algebra, seed: u64) -> Vec<f64> {
        match self.try_evaluate(algebra, seed) {
            Ok(v) => {
                debug_assert_eq!(v.len(), self.properties.len());
                v
            }
            Err(_) => vec![f64::INFINITY; self.properties.len()],
        }
    }

    /// Runs `instances` instances on each algebra with consecutive seeds
    /// starting at `first_seed`.
    pub fn run(&self, algebras: &[Algebra], instances: usize, first_seed: u64, tol_scale: f64) -> Vec<OracleReport> {
        let jobs: Vec<(usize, u64)> = match self.scope {
            Scope::Fixed => (0..instances.min(1))
                .map(|i| (0, first_seed.wrapping_add(i as u64)))
                .collect(),
            _ => (0..algebras.len())
                .flat_map(|a| (0..instances).map(move |i| (a, i)))
                .enumerate()
                .map(|(k, (a, _))| (a, first_seed.wrapping_add(k as u64)))
                .collect(),
        };
        let fixed = TracialAlgebra::matrix(2);
        let results: Vec<(Vec<f64>, u64)> = jobs
            .par_iter()
            .map(|&(a, seed)| {
                let alg = match self.scope {
                    Scope::Fixed => &fixed,
                    _ => &algebras[a],
                };
                (self.evaluate(alg, seed), seed)
            })
            .collect();
        let mut reports: Vec<OracleReport> = self
            .properties
            .iter()
            .map(|(name, tol)| OracleReport::new(*name, tol * tol_scale))
            .collect();
        for (violations, seed) in &results {
            for (rep, v) in reports.iter_mut().zip(violations) {
                rep.record(*v, *seed);
            }
        }
        reports
    }

    fn jobs(&self, algebras: usize, trials: usize) -> usize {
        match self.scope {
            Scope::Fixed => self.instances(trials),
            _ => algebras * self.instances(trials),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Multiplier applied to every pinned tolerance.
    pub tol_scale: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            dims: vec![2, 3, 5],
            trials: 20,
            seed: 0,
            tol_scale: 1.0,
        }
    }
}

/// The two-block algebra appended to every run: `M₂ ⊕ M₁` with weights
/// `0.3` and `0.7`.
pub fn two_block_algebra() -> Algebra {
    TracialAlgebra::new(vec![
        BlockSpec { dim: 2, weight: 0.3 },
        BlockSpec { dim: 1, weight: 0.7 },
    ])
    .expect("valid algebra")
}

pub fn algebra_label(alg: &Algebra) -> String {
    if alg.num_blocks() == 1 {
        return format!("M{}", alg.blocks()[0].dim);
    }
    alg.blocks()
        .iter()
        .map(|b| format!("M{}[{}]", b.dim, b.weight))
        .collect::<Vec<_>>()
        .join("+")
}

impl VerifyConfig {
    pub fn algebras(&self) -> Result<Vec<Algebra>> {
        let mut out = Vec::with_capacity(self.dims.len() + 1);
        for &d in &self.dims {
            if d < 2 {
                return Err(Error::InvalidArgument(format!(
                    "verify dimensions must be at least 2, got {d}"
                )));
            }
            out.push(TracialAlgebra::matrix(d));
        }
        out.push(two_block_algebra());
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub algebras: Vec<String>,
    pub trials: usize,
    pub tol_scale: f64,
    pub properties: Vec<OracleReport>,
    pub pass: bool,
    /// Only present when requested; omitted by default so reports of equal
    /// configurations are byte-identical.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    if !(config.tol_scale > 0.0 && config.tol_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance multiplier must be positive, got {}",
            config.tol_scale
        )));
    }
    let algebras = config.algebras()?;
    let mut properties = Vec::new();
    let mut next_seed = config.seed;
    for check in CHECKS.iter().filter(|c| config.suite.includes(c.suite)) {
        let n = check.instances(config.trials);
        properties.extend(check.run(&algebras, n, next_seed, config.tol_scale));
        next_seed = next_seed.wrapping_add(check.jobs(algebras.len(), config.trials) as u64);
    }
    let pass = properties.iter().all(|p| p.pass);
    Ok(VerifyReport {
        schema: SCHEMA_VERSION,
        suite: config.suite.name().to_string(),
        seed: config.seed,
        dims: config.dims.clone(),
        algebras: algebras.iter().map(algebra_label).collect(),
        trials: config.trials,
        tol_scale: config.tol_scale,
        properties,
        pass,
        wall_time_seconds: None,
    })
}

pub fn checks() -> &'static [Check] {
    CHECKS
}

pub fn check(name: &str) -> Option<&'static Check> {
    CHECKS.iter().find(|c| c.name == name)
}

static CHECKS: &[Check] = &[
    Check {
        name: "emi",
        suite: Suite::Emi,
        scope: Scope::PerAlgebra,
        properties: &[("emi_slack", 1e-10)],
        run: check_emi,
    },
    Check {
        name: "dexp",
        suite: Suite::Emi,
        scope: Scope::PerAlgebra,
        properties: &[("dexp_vs_quadrature", 1e-8), ("dexp_vs_finite_difference", 1e-6)],
        run: check_dexp,
    },
    Check {
        name: "t_operator",
        suite: Suite::Emi,
        scope: Scope::PerAlgebra,
        properties: &[
            ("t_symmetry", 1e-10),
            ("t_inverse_contractive", 1e-10),
            ("t_inverse_composition", 1e-10),
            ("t_vs_quadrature", 1e-8),
        ],
        run: check_t_operator,
    },
    Check {
        name: "inner_inequality",
        suite: Suite::Emi,
        scope: Scope::PerAlgebra,
        properties: &[("inner_inequality", 1e-10)],
        run: check_inner_inequality,
    },
    Check {
        name: "geodesic",
        suite: Suite::Geodesic,
        scope: Scope::PerAlgebra,
        properties: &[
            ("geodesic_endpoint", 1e-10),
            ("geodesic_midpoint", 1e-9),
            ("geodesic_speed", 1e-9),
            ("exp_log_round_trip", 1e-9),
            ("exp_formulas_agree", 1e-10),
        ],
        run: check_geodesic,
    },
    Check {
        name: "distance",
        suite: Suite::Geodesic,
        scope: Scope::PerAlgebra,
        properties: &[
            ("congruence_invariance", 1e-10),
            ("distance_lower_bound", 1e-10),
            ("geodesic_symmetry", 1e-10),
        ],
        run: check_distance,
    },
    Check {
        name: "triangle",
        suite: Suite::Geodesic,
        scope: Scope::PerAlgebra,
        properties: &[("triangle_angle_sum", 1e-9), ("triangle_comparison", 1e-9)],
        run: check_triangle,
    },
    Check {
        name: "distance_convexity",
        suite: Suite::Geodesic,
        scope: Scope::PerAlgebra,
        properties: &[("distance_convexity", 1e-9)],
        run: check_distance_convexity,
    },
    Check {
        name: "minimality",
        suite: Suite::Geodesic,
        scope: Scope::Reduced(8),
        properties: &[("minimality", 1e-6)],
        run: check_minimality,
    },
    Check {
        name: "curvature",
        suite: Suite::Jacobi,
        scope: Scope::PerAlgebra,
        properties: &[("sectional_curvature", 1e-12)],
        run: check_curvature,
    },
    Check {
        name: "jacobi",
        suite: Suite::Jacobi,
        scope: Scope::Reduced(2),
        properties: &[
            ("jacobi_ode_residual", 1e-6),
            ("jacobi_norm_convexity", 1e-9),
            ("jacobi_trace_positivity", 1e-10),
        ],
        run: check_jacobi,
    },
    Check {
        name: "jacobi_step_halving",
        suite: Suite::Jacobi,
        scope: Scope::Reduced(2),
        properties: &[("jacobi_step_halving", 0.0)],
        run: check_jacobi_halving,
    },
    Check {
        name: "closure",
        suite: Suite::Convexity,
        scope: Scope::PerAlgebra,
        properties: &[("closure_standard_kinds", 1e-9)],
        run: check_closure,
    },
    Check {
        name: "closure_counterexample",
        suite: Suite::Convexity,
        scope: Scope::Fixed,
        properties: &[("closure_witness", 0.0), ("falsification_scan", 0.0)],
        run: check_counterexample,
    },
    Check {
        name: "membership",
        suite: Suite::Convexity,
        scope: Scope::PerAlgebra,
        properties: &[
            ("aba_membership", 1e-8),
            ("geodesic_membership", 1e-8),
            ("symmetry_membership", 1e-8),
            ("power_membership", 1e-8),
        ],
        run: check_membership,
    },
    Check {
        name: "conditional_expectation",
        suite: Suite::Convexity,
        scope: Scope::PerAlgebra,
        properties: &[("expectation_trace", 1e-10), ("expectation_bimodule", 1e-10)],
        run: check_expectation,
    },
    Check {
        name: "flat_immersion",
        suite: Suite::Convexity,
        scope: Scope::PerAlgebra,
        properties: &[("flat_immersion", 1e-10)],
        run: check_flat,
    },
    Check {
        name: "projection",
        suite: Suite::Projection,
        scope: Scope::PerAlgebra,
        properties: &[
            ("projection_orthogonality", 1e-10),
            ("projection_reconstruction", 1e-8),
            ("projection_idempotence", 1e-9),
            ("projection_first_variation", 1e-7),
            ("projection_pythagoras", 1e-7),
        ],
        run: check_projection,
    },
    Check {
        name: "projection_oracle",
        suite: Suite::Projection,
        scope: Scope::Reduced(4),
        properties: &[("projection_oracle", 1e-6)],
        run: check_projection_oracle,
    },
    Check {
        name: "projection_uniqueness",
        suite: Suite::Projection,
        scope: Scope::Reduced(2),
        properties: &[("projection_multistart", 1e-7)],
        run: check_multistart,
    },
    Check {
        name: "contractivity",
        suite: Suite::Projection,
        scope: Scope::PerAlgebra,
        properties: &[("contractivity", 1e-8)],
        run: check_contractivity,
    },
    Check {
        name: "factor_symmetric",
        suite: Suite::Projection,
        scope: Scope::Reduced(2),
        properties: &[
            ("symmetric_reconstruction", 1e-8),
            ("symmetric_orthogonality", 1e-9),
            ("symmetric_uniqueness", 1e-7),
        ],
        run: check_factor_symmetric,
    },
    Check {
        name: "factor_masa",
        suite: Suite::Projection,
        scope: Scope::Reduced(2),
        properties: &[("masa_reconstruction", 1e-8), ("masa_diagonal", 1e-9)],
        run: check_factor_masa,
    },
    Check {
        name: "factor_iwasawa",
        suite: Suite::Projection,
        scope: Scope::Reduced(2),
        properties: &[
            ("iwasawa_reconstruction", 1e-8),
            ("iwasawa_unitarity", 1e-9),
            ("iwasawa_orthogonality", 1e-9),
            ("iwasawa_uniqueness", 1e-7),
        ],
        run: check_factor_iwasawa,
    },
    Check {
        name: "factor_trivial",
        suite: Suite::Projection,
        scope: Scope::Reduced(2),
        properties: &[("factor_trivial_cases", 1e-10)],
        run: check_factor_trivial,
    },
];

fn rel(a: &HermitianElement, b: &HermitianElement) -> f64 {
    (a - b).norm2() / b.norm2().max(f64::MIN_POSITIVE)
}

fn ball(alg: &Algebra, r: &mut TestRng) -> HermitianElement {
    random_hermitian_in_ball(alg, RADIUS, r)
}

fn point(alg: &Algebra, r: &mut TestRng) -> PositiveElement {
    random_positive(alg, RADIUS, r)
}

// ---- emi ----

fn check_emi(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let x = ball(alg, r);
    let y = ball(alg, r);
    Ok(vec![-geometry::emi_slack(&x, &y)?])
}

fn check_dexp(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let x = ball(alg, r);
    let y = ball(alg, r);
    let d = geometry::dexp(&x, &y)?;
    let q = oracles::dexp_quadrature(&x, &y, 200)?;
    let fd = oracles::finite_difference_derivative(|t| x.axpy(t, &y).exp(), 0.0, 1e-5)?;
    Ok(vec![rel(&q, &d), rel(&fd, &d)])
}

fn check_t_operator(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let x = ball(alg, r);
    let y = ball(alg, r);
    let z = ball(alg, r);
    let ty = geometry::t_operator(&x, &y)?;
    let tz = geometry::t_operator(&x, &z)?;
    let symmetry = (ty.inner2(&z) - y.inner2(&tz)).abs();
    let inv = geometry::t_operator_inverse(&x, &z)?;
    let contractive = inv.norm2() - z.norm2();
    let composition = (&geometry::t_operator(&x, &inv)? - &z).norm2();
    let quad = rel(&oracles::t_operator_quadrature(&x, &y, 200)?, &ty);
    Ok(vec![symmetry, contractive, composition, quad])
}

fn check_inner_inequality(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let a = point(alg, r);
    let b = point(alg, r);
    let lhs = a.sqrt().sandwich(b.value()).norm2();
    let rhs = oracles::power_integral_quadrature(&a, b.value(), 200)?.norm2();
    Ok(vec![lhs - rhs])
}

// ---- geodesic ----

fn check_geodesic(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let p = point(alg, r);
    let q = point(alg, r);
    let g = geodesic(&p, &q)?;
    let endpoint = rel(g.evaluate(1.0)?.value(), q.value());
    let d = dist(&p, &q)?;
    let m = g.evaluate(0.5)?;
    let midpoint = (dist(&p, &m)? - 0.5 * d).abs().max((dist(&m, &q)? - 0.5 * d).abs());
    let mut speed: f64 = 0.0;
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let s = geometry::metric_norm(&g.evaluate(t)?, &g.derivative(t))?;
        speed = speed.max((s - g.speed()).abs());
    }
    let back = geometry::exp_map(&p, &geometry::log_map(&p, &q)?)?;
    let round_trip = rel(back.value(), q.value());
    // Tangent vector of metric norm at most the radius.
    let v = p.sqrt().sandwich(&ball(alg, r));
    let e1 = geometry::exp_map(&p, &v)?;
    let e2 = geometry::exp_map_simplified(&p, &v)?;
    let agree = (e1.value().as_element() - &e2).norm2() / e1.value().norm2();
    Ok(vec![endpoint, midpoint, speed, round_trip, agree])
}

fn check_distance(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let a = point(alg, r);
    let b = point(alg, r);
    let g = random_invertible(alg, r);
    let d0 = dist(&a, &b)?;
    let d1 = dist(&geometry::congruence(&g, &a)?, &geometry::congruence(&g, &b)?)?;
    let x = ball(alg, r);
    let y = ball(alg, r);
    let lower = -geometry::lower_bound_slack(&x, &y)?;
    let twice = geometry::geodesic_symmetry(&a, &geometry::geodesic_symmetry(&a, &b)?)?;
    let s = geometry::geodesic_symmetry(&a, &geodesic(&a, &b)?.evaluate(0.5)?)?;
    let reversed = geodesic(&a, &b)?.evaluate(-0.5)?;
    let symmetry = dist(&twice, &b)?.max(dist(&s, &reversed)?);
    Ok(vec![(d0 - d1).abs(), lower, symmetry])
}

fn check_triangle(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let rep = geometry::triangle_report(&point(alg, r), &point(alg, r), &point(alg, r))?;
    let comparison = rep.comparison_slack.iter().fold(f64::NEG_INFINITY, |a, s| a.max(-s));
    Ok(vec![rep.angle_sum - PI, comparison])
}

fn check_distance_convexity(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let g1 = geodesic(&point(alg, r), &point(alg, r))?;
    let g2 = geodesic(&point(alg, r), &point(alg, r))?;
    let grid: Vec<f64> = (0..33).map(|i| i as f64 / 32.0).collect();
    let values: Vec<f64> = geometry::convexity_profile(&g1, &g2, &grid)?
        .into_iter()
        .map(|(_, f)| f)
        .collect();
    Ok(vec![geometry::midpoint_convexity_defect(&values)])
}

/// Number of bump perturbations per endpoint pair.
pub const MINIMALITY_PERTURBATIONS: usize = 20;
/// Samples per discretized path.
pub const PATH_SAMPLES: usize = 200;

/// `t ↦ a^{1/2} e^{t h + ε sin(πt) w} a^{1/2}`: the geodesic from `a` with
/// generator `h`, bumped in direction `w`. Same endpoints for every `ε`.
pub fn bumped_geodesic(
    g: &Geodesic,
    w: &HermitianElement,
    eps: f64,
) -> impl Fn(f64) -> Result<PositiveElement> + use<> {
    let h = g.generator().clone();
    let w = w.clone();
    let sqrt_a = g.start().sqrt();
    move |t: f64| {
        let e = h.scale(t).axpy(eps * (PI * t).sin(), &w).exp()?;
        PositiveElement::new(sqrt_a.sandwich(&e))
    }
}

fn check_minimality(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let a = point(alg, r);
    let b = point(alg, r);
    let g = geodesic(&a, &b)?;
    let d = dist(&a, &b)?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..MINIMALITY_PERTURBATIONS {
        let w = random_hermitian(alg, 1.0, r);
        let w = w.scale(1.0 / w.norm2());
        let eps = r.random_range(0.1..=0.5);
        let len = oracles::path_length_sampler(bumped_geodesic(&g, &w, eps), PATH_SAMPLES)?;
        worst = worst.max(d - len);
    }
    Ok(vec![worst])
}

// ---- jacobi ----

fn check_curvature(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let a = point(alg, r);
    let x = ball(alg, r);
    let y = ball(alg, r);
    Ok(vec![geometry::sectional_value(&a, &x, &y)?])
}

/// Random generator with its blockwise trace removed and `‖x‖₂ = 2`, so the
/// Jacobi equation has nonzero frequencies.
fn jacobi_generator(alg: &Algebra, r: &mut TestRng) -> HermitianElement {
    let x = random_hermitian(alg, 1.0, r);
    let blocks = x
        .blocks()
        .iter()
        .map(|b| {
            let n = b.nrows();
            let shift = b.trace() / crate::algebra::C64::new(n as f64, 0.0);
            b - nalgebra::DMatrix::identity(n, n) * shift
        })
        .collect();
    let x = HermitianElement::from_blocks(alg, blocks).expect("shapes from algebra");
    let n = x.norm2();
    if n == 0.0 {
        x
    } else {
        x.scale(2.0 / n)
    }
}

fn jacobi_error(
    x: &HermitianElement,
    k0: &HermitianElement,
    kd: &HermitianElement,
    step: f64,
    stride: usize,
) -> Result<(f64, geometry::JacobiSolution)> {
    let sol = geometry::jacobi_integrate(x, k0, kd, 1.0, step)?;
    let mut err: f64 = 0.0;
    let n = sol.times().len();
    for i in (0..n).step_by(stride).chain(std::iter::once(n - 1)) {
        let exact = oracles::jacobi_closed_form(x, k0, kd, sol.times()[i])?;
        err = err.max((&sol.k_values()[i] - &exact).norm2() / (1.0 + exact.norm2()));
    }
    Ok((err, sol))
}

fn check_jacobi(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let x = jacobi_generator(alg, r);
    let k0 = random_hermitian(alg, 1.0, r);
    let kd = random_hermitian(alg, 1.0, r);
    let (err, sol) = jacobi_error(&x, &k0, &kd, geometry::DEFAULT_JACOBI_STEP, 10)?;
    Ok(vec![err, sol.norm_convexity_defect(), -sol.min_trace_k_kddot()])
}

/// Coarse steps at which the RK4 global error is far above rounding.
pub const HALVING_STEPS: (f64, f64) = (0.1, 0.05);

fn check_jacobi_halving(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let x = jacobi_generator(alg, r);
    let k0 = random_hermitian(alg, 1.0, r);
    let kd = random_hermitian(alg, 1.0, r);
    let (coarse, _) = jacobi_error(&x, &k0, &kd, HALVING_STEPS.0, 1)?;
    let (fine, _) = jacobi_error(&x, &k0, &kd, HALVING_STEPS.1, 1)?;
    Ok(vec![8.0 - coarse / fine])
}

// ---- convexity ----

/// Random partition of the diagonal into groups, each inside one block.
pub fn random_partition(alg: &Algebra, r: &mut TestRng) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for shape in alg.blocks() {
        let mut idx: Vec<usize> = (offset..offset + shape.dim).collect();
        idx.shuffle(r);
        let mut rest = &idx[..];
        while !rest.is_empty() {
            let take = r.random_range(1..=rest.len());
            out.push(rest[..take].to_vec());
            rest = &rest[take..];
        }
        offset += shape.dim;
    }
    out
}

/// One of diagonal, random block-diagonal, full and single-generator.
fn random_closed_kind(alg: &Algebra, r: &mut TestRng) -> SubspaceKind {
    match r.random_range(0..4) {
        0 => SubspaceKind::Diagonal,
        1 => SubspaceKind::BlockDiagonal(random_partition(alg, r)),
        2 => SubspaceKind::Full,
        _ => SubspaceKind::SingleGenerator(random_hermitian(alg, 1.0, r)),
    }
}

/// Diagonal or random block-diagonal, alternating at random.
fn random_subalgebra_kind(alg: &Algebra, r: &mut TestRng) -> SubspaceKind {
    if r.random_bool(0.5) {
        SubspaceKind::Diagonal
    } else {
        SubspaceKind::BlockDiagonal(random_partition(alg, r))
    }
}

fn certified(alg: &Algebra, kind: &SubspaceKind) -> Result<ConvexSubmanifold> {
    let h = standard_subspace(alg, kind)?;
    ConvexSubmanifold::certify(h).map_err(|w| Error::NotClosed { residual: w.residual })
}

fn check_closure(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let h = standard_subspace(alg, &random_closed_kind(alg, r))?;
    match check_double_bracket(&h, f64::INFINITY) {
        Closure::Pass { max_residual } => Ok(vec![max_residual]),
        Closure::Fail(w) => Ok(vec![w.residual]),
    }
}

/// `span{E₁₁, E₁₂ + E₂₁}` in `M₂`, which is not closed.
pub fn non_closed_example() -> Subspace {
    let m2 = TracialAlgebra::matrix(2);
    let e11 = HermitianElement::new(matrix_unit(&m2, 0, 0, 0));
    standard_subspace(&m2, &SubspaceKind::Span(vec![e11, pauli::sigma_x()])).expect("independent generators")
}

fn check_counterexample(_alg: &Algebra, _r: &mut TestRng) -> Result<Vec<f64>> {
    let h = non_closed_example();
    let witness = match check_double_bracket(&h, DEFAULT_CLOSURE_TOL) {
        Closure::Pass { .. } => f64::INFINITY,
        Closure::Fail(w) => {
            let inner = w.x.as_element().commutator(w.y.as_element());
            let dbl = HermitianElement::new(w.x.as_element().commutator(&inner));
            let consistent = (&dbl - &w.offending).norm2() <= 1e-12 * (1.0 + dbl.norm2())
                && (h.distance_to(&w.offending) - w.residual).abs() <= 1e-12;
            if consistent {
                DEFAULT_CLOSURE_TOL - w.residual
            } else {
                f64::INFINITY
            }
        }
    };
    let m = ConvexSubmanifold::uncertified(h.clone());
    let grid = [-1.0, -0.5, 0.5, 1.0];
    let e11 = HermitianElement::new(matrix_unit(h.algebra(), 0, 0, 0));
    let found = falsification_scan(&m, &pauli::sigma_x(), &e11, &grid, DEFAULT_MEMBERSHIP_TOL)?;
    Ok(vec![witness, if found.is_some() { 0.0 } else { 1.0 }])
}

fn check_membership(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let m = certified(alg, &random_closed_kind(alg, r))?;
    let h = m.subspace();
    let a = PositiveElement::exp(&h.project(&ball(alg, r)))?;
    let b = PositiveElement::exp(&h.project(&ball(alg, r)))?;
    let aba = PositiveElement::new(a.value().sandwich(b.value()))?;
    let g = geodesic(&a, &b)?;
    let mut on_geodesic: f64 = 0.0;
    for t in [-1.0, 0.5, 2.0] {
        on_geodesic = on_geodesic.max(m.membership_residual(&g.evaluate(t)?));
    }
    let sym = m.membership_residual(&geometry::geodesic_symmetry(&a, &b)?);
    let mut powers: f64 = 0.0;
    for alpha in [-1.0, 0.5, 3.0] {
        powers = powers.max(m.membership_residual(&a.pow_positive(alpha)?));
    }
    Ok(vec![m.membership_residual(&aba), on_geodesic, sym, powers])
}

fn check_expectation(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let h = standard_subspace(alg, &SubspaceKind::BlockDiagonal(random_partition(alg, r)))?;
    let x = random_invertible(alg, r);
    let e = h.expectation(&x);
    let trace = (e.trace() - x.trace()).norm();
    let h1 = h.project(&ball(alg, r));
    let h2 = h.project(&ball(alg, r));
    let lhs = h.expectation(&(&(h1.as_element() * &x) * h2.as_element()));
    let rhs = &(h1.as_element() * &e) * h2.as_element();
    Ok(vec![trace, (&lhs - &rhs).norm2()])
}

/// `T(s, t) = e^{s ln a + t ln b}` for commuting `a, b` maps the segment
/// `s + t = 1` onto the geodesic from `a` to `b`.
fn check_flat(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let diag = standard_subspace(alg, &SubspaceKind::Diagonal)?;
    let la = diag.project(&ball(alg, r));
    let lb = diag.project(&ball(alg, r));
    let a = PositiveElement::exp(&la)?;
    let b = PositiveElement::exp(&lb)?;
    let t: f64 = r.random();
    let immersed = la.scale(1.0 - t).axpy(t, &lb).exp()?;
    Ok(vec![rel(geodesic(&a, &b)?.evaluate(t)?.value(), &immersed)])
}

// ---- projection ----

fn check_projection(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let m = certified(alg, &random_subalgebra_kind(alg, r))?;
    let x = point(alg, r);
    let res = projection::project_default(&m, &x)?;
    let p = &res.foot;
    let orthogonality = res.residual / (1.0 + res.distance);
    let back = geometry::exp_map(p, &res.normal)?;
    let reconstruction = rel(back.value(), x.value());
    let again = projection::project_default(&m, p)?;
    let idempotence = dist(p, &again.foot)?;

    let h = m.subspace();
    let sqrt_p = p.sqrt();
    let phi = |dir: &HermitianElement, t: f64| -> Result<f64> {
        let q = PositiveElement::new(sqrt_p.sandwich(&dir.scale(t).exp()?))?;
        Ok(dist(&x, &q)?.powi(2))
    };
    let eta = 1e-4;
    let mut variation: f64 = 0.0;
    for _ in 0..20 {
        let dir = h.project(&random_hermitian(alg, 1.0, r));
        let n = dir.norm2();
        if n == 0.0 {
            continue;
        }
        let dir = dir.scale(1.0 / n);
        variation = variation.max(((phi(&dir, eta)? - phi(&dir, -eta)?) / (2.0 * eta)).abs());
    }
    let mut pythagoras = f64::NEG_INFINITY;
    let d_pr = res.distance.powi(2);
    for _ in 0..5 {
        let q = PositiveElement::exp(&h.project(&ball(alg, r)))?;
        let gap = dist(&q, &x)?.powi(2) - dist(&q, p)?.powi(2) - d_pr;
        pythagoras = pythagoras.max(-gap);
    }
    Ok(vec![orthogonality, reconstruction, idempotence, variation, pythagoras])
}

/// A closed subspace of dimension at most four: the diagonal when small
/// enough, otherwise a single generator.
fn oracle_subspace(alg: &Algebra, r: &mut TestRng) -> Result<ConvexSubmanifold> {
    if alg.total_dim() <= oracles::BRUTEFORCE_MAX_DIM {
        certified(alg, &SubspaceKind::Diagonal)
    } else {
        certified(alg, &SubspaceKind::SingleGenerator(random_hermitian(alg, 1.0, r)))
    }
}

fn check_projection_oracle(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let m = oracle_subspace(alg, r)?;
    let x = point(alg, r);
    let res = projection::project_default(&m, &x)?;
    let brute = oracles::projection_bruteforce(m.subspace(), &x, 3.0, 6)?;
    Ok(vec![dist(&res.foot, &brute)?])
}

/// Random point of `M`, used as a starting foot.
fn random_foot(m: &ConvexSubmanifold, r: &mut TestRng) -> Result<PositiveElement> {
    PositiveElement::exp(&m.subspace().project(&ball(m.algebra(), r)))
}

fn check_multistart(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let m = certified(alg, &random_subalgebra_kind(alg, r))?;
    let x = point(alg, r);
    let base = projection::project_default(&m, &x)?;
    let mut spread: f64 = 0.0;
    for _ in 0..5 {
        let init = random_foot(&m, r)?;
        let res = projection::project_from(&m, &x, &init, DEFAULT_PROJECTION_TOL, DEFAULT_MAX_ITER)?;
        spread = spread.max(dist(&base.foot, &res.foot)?);
    }
    Ok(vec![spread])
}

fn check_contractivity(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let a = point(alg, r);
    let b = point(alg, r);
    let mut worst = f64::NEG_INFINITY;
    for kind in [
        SubspaceKind::Diagonal,
        SubspaceKind::BlockDiagonal(random_partition(alg, r)),
    ] {
        let m = certified(alg, &kind)?;
        worst = worst.max(-projection::contractivity_slack(&m, &a, &b)?);
    }
    Ok(vec![worst])
}

fn check_factor_symmetric(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let kind = match r.random_range(0..3) {
        0 => SubspaceKind::Diagonal,
        1 => SubspaceKind::BlockDiagonal(random_partition(alg, r)),
        _ => SubspaceKind::SingleGenerator(random_hermitian(alg, 1.0, r)),
    };
    let m = certified(alg, &kind)?;
    let z = ball(alg, r);
    let f = projection::factor_symmetric(&m, &z)?;
    let mut spread: f64 = 0.0;
    for _ in 0..5 {
        let init = random_foot(&m, r)?;
        let g = projection::factor_symmetric_from(&m, &z, &init)?;
        spread = spread.max((&g.y - &f.y).norm2()).max((&g.w - &f.w).norm2());
    }
    Ok(vec![f.residual, f.orthogonality, spread])
}

fn check_factor_masa(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let x = ball(alg, r);
    let f = projection::factor_masa(alg, &x)?;
    Ok(vec![f.residual, f.diagonal_defect])
}

fn check_factor_iwasawa(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let m = certified(alg, &random_subalgebra_kind(alg, r))?;
    let g = random_invertible(alg, r);
    let f = projection::factor_iwasawa(&m, &g)?;
    let mut spread: f64 = 0.0;
    for _ in 0..5 {
        let init = random_foot(&m, r)?;
        let h = projection::factor_iwasawa_from(&m, &g, &init)?;
        spread = spread.max((&h.x - &f.x).norm2()).max((&h.y - &f.y).norm2());
    }
    Ok(vec![f.residual, f.unitarity, f.orthogonality, spread])
}

fn check_factor_trivial(alg: &Algebra, r: &mut TestRng) -> Result<Vec<f64>> {
    let m = certified(alg, &random_subalgebra_kind(alg, r))?;
    let h = m.subspace();
    let mut worst: f64 = 0.0;

    let z_in = h.project(&ball(alg, r));
    let f = projection::factor_symmetric(&m, &z_in)?;
    worst = worst.max((&f.y - &z_in.scale(0.5)).norm2()).max(f.w.norm2());

    let s = orthogonal_supplement(h);
    if s.dim() > 0 {
        let z_out = s.project(&ball(alg, r));
        let f = projection::factor_symmetric(&m, &z_out)?;
        worst = worst.max(f.y.norm2()).max((&f.w - &z_out).norm2());
    }

    let u = random_unitary(alg, r);
    let f = projection::factor_iwasawa(&m, &u)?;
    worst = worst.max(f.x.norm2()).max(f.y.norm2()).max((&f.u - &u).norm2());
    Ok(vec![worst])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().name(), name);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn zero_trials_pass_trivially() {
        let cfg = VerifyConfig {
            trials: 0,
            ..VerifyConfig::default()
        };
        let rep = run(&cfg).unwrap();
        assert!(rep.pass);
        assert!(rep.properties.iter().all(|p| p.instances == 0));
        assert_eq!(rep.schema, SCHEMA_VERSION);
    }

    #[test]
    fn single_emi_instance() {
        let cfg = VerifyConfig {
            suite: Suite::Emi,
            trials: 1,
            seed: 1,
            ..VerifyConfig::default()
        };
        let rep = run(&cfg).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.properties.iter().all(|p| p.instances == 4));
    }

    #[test]
    fn deterministic() {
        let cfg = VerifyConfig {
            suite: Suite::Geodesic,
            trials: 2,
            seed: 7,
            ..VerifyConfig::default()
        };
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = VerifyConfig {
            dims: vec![1],
            ..VerifyConfig::default()
        };
        assert!(run(&cfg).is_err());
        let cfg = VerifyConfig {
            tol_scale: 0.0,
            ..VerifyConfig::default()
        };
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn partitions_are_valid() {
        let alg = TracialAlgebra::proportional(&[3, 2]).unwrap();
        let mut r = rng(3);
        for _ in 0..20 {
            let p = random_partition(&alg, &mut r);
            assert!(standard_subspace(&alg, &SubspaceKind::BlockDiagonal(p)).is_ok());
        }
    }

    #[test]
    fn every_check_runs_once() {
        let algs = [TracialAlgebra::matrix(2), two_block_algebra()];
        for c in checks() {
            for rep in c.run(&algs, 1, 11, 1.0) {
                assert!(rep.pass, "{} {:?}", c.name, rep);
            }
        }
    }
}
