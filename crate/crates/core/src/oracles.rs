//! Reference computations used to cross-check the main code paths.
//!
//! Oracles rely on the algebra module only (spectral calculus, products,
//! traces); a subspace is read through its basis and nothing else. They are
//! slow and not meant for production use.

use serde::{Deserialize, Serialize};

use crate::algebra::{ensure_same, AlgebraElement, HermitianElement, PositiveElement, SpectralDecomposition, C64};
use crate::convexity::Subspace;
use crate::error::{Error, Result};

/// Aggregated outcome of one property over many random instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub instances: usize,
    #[serde(with = "crate::io::extended_f64")]
    pub max_violation: f64,
    #[serde(with = "crate::io::extended_f64")]
    pub tolerance: f64,
    pub pass: bool,
    pub worst_seed: Option<u64>,
}

impl OracleReport {
    pub fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            instances: 0,
            max_violation: 0.0,
            tolerance,
            pass: true,
            worst_seed: None,
        }
    }

    /// Records one instance. `violation` is the amount by which the property
    /// is off (≤ 0 when it holds comfortably); NaN counts as a failure.
    pub fn record(&mut self, violation: f64, seed: u64) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        if self.worst_seed.is_none() || v > self.max_violation {
            self.max_violation = v;
            self.worst_seed = Some(seed);
        }
        self.instances += 1;
        self.pass = self.max_violation <= self.tolerance;
    }

    /// Combines reports of the same property computed on disjoint shards.
    /// Ties keep the earlier shard's seed.
    pub fn merge(&mut self, other: &OracleReport) {
        if other.instances == 0 {
            return;
        }
        if self.worst_seed.is_none() || other.max_violation > self.max_violation {
            self.max_violation = other.max_violation;
            self.worst_seed = other.worst_seed;
        }
        self.instances += other.instances;
        self.pass = self.max_violation <= self.tolerance;
    }
}

/// `e^{tλ}` weights applied to a fixed spectrum.
fn exp_at(s: &SpectralDecomposition, t: f64) -> HermitianElement {
    s.apply(|l| (t * l).exp())
}

fn simpson_weights(panels: usize) -> Result<Vec<f64>> {
    if panels < 2 || panels % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Simpson needs an even panel count >= 2, got {panels}"
        )));
    }
    let h = 1.0 / panels as f64;
    Ok((0..=panels)
        .map(|i| {
            let w = if i == 0 || i == panels {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect())
}

/// Composite Simpson rule for `∫₀¹ e^{tx} y e^{(1−t)x} dt`.
pub fn dexp_quadrature(x: &HermitianElement, y: &HermitianElement, panels: usize) -> Result<HermitianElement> {
    ensure_same(x.algebra(), y.algebra())?;
    let w = simpson_weights(panels)?;
    let s = x.eig()?;
    integrate(x, &w, |t| {
        let left = exp_at(&s, t);
        let right = exp_at(&s, 1.0 - t);
        &(left.as_element() * y.as_element()) * right.as_element()
    })
}

/// Composite Simpson rule for `∫₀¹ e^{(t−½)x} y e^{(½−t)x} dt`, the quadrature
/// route to `T_x(y)`.
pub fn t_operator_quadrature(x: &HermitianElement, y: &HermitianElement, panels: usize) -> Result<HermitianElement> {
    ensure_same(x.algebra(), y.algebra())?;
    let w = simpson_weights(panels)?;
    let s = x.eig()?;
    integrate(x, &w, |t| {
        let left = exp_at(&s, t - 0.5);
        let right = exp_at(&s, 0.5 - t);
        &(left.as_element() * y.as_element()) * right.as_element()
    })
}

/// Composite Simpson rule for `∫₀¹ a^t b a^{1−t} dt`.
pub fn power_integral_quadrature(a: &PositiveElement, b: &HermitianElement, panels: usize) -> Result<HermitianElement> {
    ensure_same(a.algebra(), b.algebra())?;
    let w = simpson_weights(panels)?;
    let s = a.spectrum();
    integrate(b, &w, |t| {
        let left = s.apply(|l| l.powf(t));
        let right = s.apply(|l| l.powf(1.0 - t));
        &(left.as_element() * b.as_element()) * right.as_element()
    })
}

fn integrate(like: &HermitianElement, weights: &[f64], f: impl Fn(f64) -> AlgebraElement) -> Result<HermitianElement> {
    let n = weights.len() - 1;
    let mut acc = AlgebraElement::zeros(like.algebra());
    for (i, w) in weights.iter().enumerate() {
        let t = i as f64 / n as f64;
        acc = &acc + &f(t).scale(*w);
    }
    Ok(HermitianElement::new(acc))
}

/// Central difference `(f(t+h) − f(t−h)) / 2h`.
pub fn finite_difference_derivative(
    f: impl Fn(f64) -> Result<HermitianElement>,
    t: f64,
    h: f64,
) -> Result<HermitianElement> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("h must be > 0, got {h}")));
    }
    let plus = f(t + h)?;
    let minus = f(t - h)?;
    Ok((&plus - &minus).scale(0.5 / h))
}

/// Step of the finite-difference speed estimate in [`path_length_sampler`].
pub const PATH_SPEED_STEP: f64 = 1e-5;

/// Length of `γ: [0, 1] → Σ` by the trapezoid rule on `samples` equally
/// spaced nodes, with speed `‖γ^{-1/2} γ′ γ^{-1/2}‖₂` estimated by second-order
/// finite differences (one-sided at the endpoints, so `γ` is only evaluated
/// on `[0, 1]`).
pub fn path_length_sampler(curve: impl Fn(f64) -> Result<PositiveElement>, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::InvalidArgument("path length needs at least 2 samples".into()));
    }
    let eta = PATH_SPEED_STEP;
    let mut speeds = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = k as f64 / (samples - 1) as f64;
        let g = curve(t)?;
        let deriv = if k == 0 {
            let (g1, g2) = (curve(t + eta)?, curve(t + 2.0 * eta)?);
            HermitianElement::combination(
                g.algebra(),
                &[
                    (-1.5 / eta, g.value()),
                    (2.0 / eta, g1.value()),
                    (-0.5 / eta, g2.value()),
                ],
            )
        } else if k == samples - 1 {
            let (g1, g2) = (curve(t - eta)?, curve(t - 2.0 * eta)?);
            HermitianElement::combination(
                g.algebra(),
                &[
                    (1.5 / eta, g.value()),
                    (-2.0 / eta, g1.value()),
                    (0.5 / eta, g2.value()),
                ],
            )
        } else {
            let (gp, gm) = (curve(t + eta)?, curve(t - eta)?);
            (gp.value() - gm.value()).scale(0.5 / eta)
        };
        speeds.push(g.inv_sqrt().sandwich(&deriv).norm2());
    }
    let dt = 1.0 / (samples - 1) as f64;
    let inner: f64 = speeds[1..samples - 1].iter().sum();
    Ok(dt * (inner + 0.5 * (speeds[0] + speeds[samples - 1])))
}

fn sinh_ratio(w: f64, t: f64) -> f64 {
    // sinh(ωt)/ω, continuous at ω = 0.
    let z = w * t;
    if z.abs() < 1e-5 {
        t * (1.0 + z * z / 6.0)
    } else {
        z.sinh() / w
    }
}

/// Exact solution of `4K̈ = Kx² + x²K − 2xKx`: in the eigenbasis of `x`,
/// `K_ij(t) = K_ij(0) cosh(ωt) + K̇_ij(0) sinh(ωt)/ω` with `ω = (λ_i − λ_j)/2`.
pub fn jacobi_closed_form(
    x: &HermitianElement,
    k0: &HermitianElement,
    k_dot0: &HermitianElement,
    t: f64,
) -> Result<HermitianElement> {
    ensure_same(x.algebra(), k0.algebra())?;
    ensure_same(x.algebra(), k_dot0.algebra())?;
    let s = x.eig()?;
    let a = s.to_eigenbasis(k0.as_element());
    let b = s.to_eigenbasis(k_dot0.as_element());
    let mut out = Vec::with_capacity(a.len());
    for ((ma, mb), blk) in a.iter().zip(&b).zip(s.blocks()) {
        let ev = &blk.eigenvalues;
        let mut m = ma.clone();
        for i in 0..ev.len() {
            for j in 0..ev.len() {
                let w = 0.5 * (ev[i] - ev[j]);
                m[(i, j)] = ma[(i, j)] * C64::new((w * t).cosh(), 0.0) + mb[(i, j)] * C64::new(sinh_ratio(w, t), 0.0);
            }
        }
        out.push(m);
    }
    Ok(HermitianElement::new(s.from_eigenbasis(out)))
}

/// `dist²(r, e^h)` through the eigenvalues of `r^{-1/2} e^h r^{-1/2}`.
fn dist_squared(r_inv_sqrt: &HermitianElement, h: &HermitianElement) -> Result<f64> {
    let e = h.exp()?;
    let rel = r_inv_sqrt.sandwich(&e).eig()?;
    let alg = h.algebra();
    let mut total = 0.0;
    for (blk, shape) in rel.blocks().iter().zip(alg.blocks()) {
        let s: f64 = blk
            .eigenvalues
            .iter()
            .map(|&m| m.max(f64::MIN_POSITIVE).ln().powi(2))
            .sum();
        total += shape.weight / shape.dim as f64 * s;
    }
    Ok(total)
}

/// Largest subspace dimension accepted by [`projection_bruteforce`].
pub const BRUTEFORCE_MAX_DIM: usize = 4;

/// Minimizes `dist(r, e^{Σ c_i h_i})` over coefficient space by a refined grid
/// search followed by coordinate descent with golden-section line searches.
///
/// Each round evaluates a `9^k` grid of half-width `radius` around the
/// current centre. If the best point lies on the boundary the grid is
/// re-centred at the same width, otherwise the width is quartered. After
/// `rounds` shrinking rounds the result is polished coordinatewise.
pub fn projection_bruteforce(h: &Subspace, r: &PositiveElement, radius: f64, rounds: usize) -> Result<PositiveElement> {
    ensure_same(h.algebra(), r.algebra())?;
    let k = h.dim();
    if k > BRUTEFORCE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "brute-force projection supports at most {BRUTEFORCE_MAX_DIM} dimensions, got {k}"
        )));
    }
    let r_inv_sqrt = r.inv_sqrt();
    let basis = h.basis();
    let combine = |c: &[f64]| {
        let terms: Vec<(f64, &HermitianElement)> = c.iter().copied().zip(basis).collect();
        HermitianElement::combination(h.algebra(), &terms)
    };
    let phi = |c: &[f64]| dist_squared(&r_inv_sqrt, &combine(c));

    const M: usize = 9;
    let mut centre = vec![0.0; k];
    let mut width = radius;
    let mut best = phi(&centre)?;
    let mut shrinks = 0;
    let mut recentres = 0;
    while shrinks < rounds && k > 0 {
        let step = 2.0 * width / (M - 1) as f64;
        let mut best_idx = vec![(M - 1) / 2; k];
        let mut idx = vec![0usize; k];
        let mut point = vec![0.0; k];
        loop {
            for i in 0..k {
                point[i] = centre[i] - width + idx[i] as f64 * step;
            }
            let v = phi(&point)?;
            if v < best {
                best = v;
                best_idx.clone_from(&idx);
            }
            let mut d = 0;
            while d < k {
                idx[d] += 1;
                if idx[d] < M {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == k {
                break;
            }
        }
        for i in 0..k {
            centre[i] += (best_idx[i] as f64 - ((M - 1) / 2) as f64) * step;
        }
        let on_boundary = best_idx.iter().any(|&i| i == 0 || i == M - 1);
        if on_boundary && recentres < 50 {
            recentres += 1;
        } else {
            width *= 0.25;
            shrinks += 1;
        }
    }

    // Coordinate descent with golden-section line searches.
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut bracket = width.max(1e-3);
    for _ in 0..500 {
        let before = centre.clone();
        for i in 0..k {
            let line = |s: f64| {
                let mut c = centre.clone();
                c[i] = s;
                phi(&c)
            };
            let (mut lo, mut hi) = (centre[i] - bracket, centre[i] + bracket);
            let mut x1 = hi - gr * (hi - lo);
            let mut x2 = lo + gr * (hi - lo);
            let (mut f1, mut f2) = (line(x1)?, line(x2)?);
            while hi - lo > 1e-11 * (1.0 + centre[i].abs()) {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - gr * (hi - lo);
                    f1 = line(x1)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + gr * (hi - lo);
                    f2 = line(x2)?;
                }
            }
            let cand = 0.5 * (lo + hi);
            let fc = line(cand)?;
            if fc <= best {
                best = fc;
                centre[i] = cand;
            }
        }
        let moved = centre
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        bracket = (4.0 * moved).clamp(1e-9, bracket);
        if moved < 1e-12 {
            break;
        }
    }
    PositiveElement::exp(&combine(&centre))
}
