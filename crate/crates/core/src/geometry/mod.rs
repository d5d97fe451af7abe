//! The trace metric on the positive cone `Σ`.
//!
//! Tangent spaces are identified with the Hermitian part `A_h`, with inner
//! product `⟨x, y⟩_a = τ(x a⁻¹ y a⁻¹)`. The group of invertibles acts by
//! isometries `a ↦ g a g*`. Everything here is evaluated through Hermitian
//! spectral calculus.

mod geodesic;
mod jacobi;

use crate::algebra::{
    ensure_same, schur_apply, AlgebraElement, Exp, HermitianElement, PositiveElement, SpectralDecomposition,
};
use crate::error::{Error, Result};

pub use geodesic::{geodesic, Geodesic};
pub use jacobi::{jacobi_integrate, jacobi_rhs, JacobiSolution, DEFAULT_JACOBI_STEP};

/// `p^{-1/2} v p^{-1/2}`: moves a tangent vector at `p` to the identity.
pub(crate) fn whiten(p: &PositiveElement, v: &HermitianElement) -> HermitianElement {
    p.inv_sqrt().sandwich(v)
}

/// `p^{1/2} h p^{1/2}`.
pub(crate) fn unwhiten(p: &PositiveElement, h: &HermitianElement) -> HermitianElement {
    p.sqrt().sandwich(h)
}

/// `⟨x, y⟩_a = τ(x a⁻¹ y a⁻¹)`.
pub fn metric_inner(a: &PositiveElement, x: &HermitianElement, y: &HermitianElement) -> Result<f64> {
    ensure_same(a.algebra(), x.algebra())?;
    ensure_same(a.algebra(), y.algebra())?;
    let s = a.inv_sqrt();
    Ok(s.sandwich(x).inner2(&s.sandwich(y)))
}

pub fn metric_norm(a: &PositiveElement, x: &HermitianElement) -> Result<f64> {
    ensure_same(a.algebra(), x.algebra())?;
    Ok(whiten(a, x).norm2())
}

/// `Exp_p(v) = p^{1/2} e^{p^{-1/2} v p^{-1/2}} p^{1/2}`.
pub fn exp_map(p: &PositiveElement, v: &HermitianElement) -> Result<PositiveElement> {
    ensure_same(p.algebra(), v.algebra())?;
    let e = whiten(p, v).exp()?;
    PositiveElement::new(unwhiten(p, &e))
}

/// `Exp_p(v) = p e^{p⁻¹ v}`, evaluated with a general (non-Hermitian)
/// matrix exponential. Independent of the spectral route in [`exp_map`].
pub fn exp_map_simplified(p: &PositiveElement, v: &HermitianElement) -> Result<AlgebraElement> {
    ensure_same(p.algebra(), v.algebra())?;
    let pinv_v = p.inverse().as_element() * v.as_element();
    Ok(p.value().as_element() * &pinv_v.expm())
}

/// `Exp_p⁻¹(q) = p^{1/2} ln(p^{-1/2} q p^{-1/2}) p^{1/2}`.
pub fn log_map(p: &PositiveElement, q: &PositiveElement) -> Result<HermitianElement> {
    ensure_same(p.algebra(), q.algebra())?;
    let rel = relative_spectrum(p, q)?;
    Ok(unwhiten(p, &rel.apply(f64::ln)))
}

/// Spectral decomposition of `a^{-1/2} b a^{-1/2}`.
pub(crate) fn relative_spectrum(a: &PositiveElement, b: &PositiveElement) -> Result<SpectralDecomposition> {
    whiten(a, b.value()).eig()
}

/// Geodesic distance `‖ln(a^{-1/2} b a^{-1/2})‖₂`.
pub fn dist(a: &PositiveElement, b: &PositiveElement) -> Result<f64> {
    ensure_same(a.algebra(), b.algebra())?;
    Ok(dist_squared_unchecked(a, b)?.sqrt())
}

pub(crate) fn dist_squared_unchecked(a: &PositiveElement, b: &PositiveElement) -> Result<f64> {
    let s = relative_spectrum(a, b)?;
    Ok(s.blocks()
        .iter()
        .zip(a.algebra().blocks())
        .map(|(blk, shape)| {
            let sum: f64 = blk.eigenvalues.iter().map(|&m| m.ln().powi(2)).sum();
            shape.weight / shape.dim as f64 * sum
        })
        .sum())
}

/// `dexp_x(y) = ∫₀¹ e^{tx} y e^{(1−t)x} dt`, computed as the divided
/// difference of `exp` in the eigenbasis of `x`.
pub fn dexp(x: &HermitianElement, y: &HermitianElement) -> Result<HermitianElement> {
    crate::algebra::divided_difference_apply(&Exp, x, y)
}

/// `‖e^{-x} dexp_x(y)‖₂ − ‖y‖₂`; nonnegative up to rounding.
pub fn emi_slack(x: &HermitianElement, y: &HermitianElement) -> Result<f64> {
    ensure_same(x.algebra(), y.algebra())?;
    let s = x.eig()?;
    let d = crate::algebra::divided_difference_with(&s, &Exp, y);
    let e_neg = s.apply(|l| (-l).exp());
    Ok((e_neg.as_element() * d.as_element()).norm2() - y.norm2())
}

/// `sinh(z)/z`, even and entire.
pub fn sinhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

/// `T_x(y) = e^{-x/2} dexp_x(y) e^{-x/2}`, applied in the eigenbasis of `x`
/// as the Schur multiplier `sinhc((λ_i − λ_j)/2)`.
pub fn t_operator(x: &HermitianElement, y: &HermitianElement) -> Result<HermitianElement> {
    ensure_same(x.algebra(), y.algebra())?;
    let s = x.eig()?;
    Ok(HermitianElement::new(schur_apply(&s, y.as_element(), |a, b| {
        sinhc(0.5 * (a - b))
    })))
}

/// Inverse of [`t_operator`]; a contraction for the 2-norm.
pub fn t_operator_inverse(x: &HermitianElement, z: &HermitianElement) -> Result<HermitianElement> {
    ensure_same(x.algebra(), z.algebra())?;
    let s = x.eig()?;
    Ok(HermitianElement::new(schur_apply(&s, z.as_element(), |a, b| {
        1.0 / sinhc(0.5 * (a - b))
    })))
}

/// `R_a(x, y) z = −¼ a [[a⁻¹x, a⁻¹y], a⁻¹z]`.
pub fn curvature(
    a: &PositiveElement,
    x: &HermitianElement,
    y: &HermitianElement,
    z: &HermitianElement,
) -> Result<HermitianElement> {
    for v in [x, y, z] {
        ensure_same(a.algebra(), v.algebra())?;
    }
    let ainv = a.inverse();
    let ax = ainv.as_element() * x.as_element();
    let ay = ainv.as_element() * y.as_element();
    let az = ainv.as_element() * z.as_element();
    let inner = ax.commutator(&ay).commutator(&az);
    Ok(HermitianElement::new((a.value().as_element() * &inner).scale(-0.25)))
}

/// Sectional value `⟨R_a(x, y) y, x⟩_a`; nonpositive.
pub fn sectional_value(a: &PositiveElement, x: &HermitianElement, y: &HermitianElement) -> Result<f64> {
    let r = curvature(a, x, y, y)?;
    metric_inner(a, &r, x)
}

/// Angle in `[0, π]` between tangent vectors at `p`.
///
/// Computed as `2·atan2(‖û − v̂‖, ‖û + v̂‖)` on the normalized vectors, which
/// stays accurate near `0` and `π` where `arccos` loses half the digits.
pub fn angle(p: &PositiveElement, u: &HermitianElement, v: &HermitianElement) -> Result<f64> {
    ensure_same(p.algebra(), u.algebra())?;
    ensure_same(p.algebra(), v.algebra())?;
    let wu = whiten(p, u);
    let wv = whiten(p, v);
    let (nu, nv) = (wu.norm2(), wv.norm2());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let uh = wu.scale(1.0 / nu);
    let vh = wv.scale(1.0 / nv);
    let diff = (&uh - &vh).norm2();
    let sum = (&uh + &vh).norm2();
    Ok(2.0 * diff.atan2(sum))
}

/// Side lengths and inner angles of a geodesic triangle.
///
/// Side `i` is opposite vertex `i`; `comparison_slack[i]` is
/// `l_i² − (l_{i+1}² + l_{i−1}² − 2 l_{i+1} l_{i−1} cos α_i)`, nonnegative in
/// nonpositive curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleReport {
    pub sides: [f64; 3],
    pub angles: [f64; 3],
    pub angle_sum: f64,
    pub comparison_slack: [f64; 3],
}

/// Vertices closer than this are treated as coincident.
const COINCIDENT_DIST: f64 = 1e-12;

pub fn triangle_report(a: &PositiveElement, b: &PositiveElement, c: &PositiveElement) -> Result<TriangleReport> {
    ensure_same(a.algebra(), b.algebra())?;
    ensure_same(a.algebra(), c.algebra())?;
    let v = [a, b, c];
    let mut sides = [0.0; 3];
    for i in 0..3 {
        sides[i] = dist(v[(i + 1) % 3], v[(i + 2) % 3])?;
        if sides[i] < COINCIDENT_DIST {
            return Err(Error::CoincidentVertices);
        }
    }
    let mut angles = [0.0; 3];
    for i in 0..3 {
        let to_next = log_map(v[i], v[(i + 1) % 3])?;
        let to_prev = log_map(v[i], v[(i + 2) % 3])?;
        angles[i] = angle(v[i], &to_next, &to_prev)?;
    }
    let mut comparison_slack = [0.0; 3];
    for i in 0..3 {
        let (l, ln, lp) = (sides[i], sides[(i + 1) % 3], sides[(i + 2) % 3]);
        comparison_slack[i] = l * l - (ln * ln + lp * lp - 2.0 * ln * lp * angles[i].cos());
    }
    Ok(TriangleReport {
        sides,
        angles,
        angle_sum: angles.iter().sum(),
        comparison_slack,
    })
}

/// Discretized length `Σ ‖γ_{k+1} − γ_k‖_{m_k}` with the metric taken at the
/// arithmetic midpoint `m_k = (γ_k + γ_{k+1})/2`.
pub fn curve_length(samples: &[PositiveElement]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("curve length needs at least 2 samples".into()));
    }
    let mut total = 0.0;
    for w in samples.windows(2) {
        ensure_same(w[0].algebra(), w[1].algebra())?;
        let delta = w[1].value() - w[0].value();
        let mid = PositiveElement::new((w[0].value() + w[1].value()).scale(0.5))?;
        total += whiten(&mid, &delta).norm2();
    }
    Ok(total)
}

/// `dist(e^x, e^y) − ‖x − y‖₂`; nonnegative up to rounding.
pub fn lower_bound_slack(x: &HermitianElement, y: &HermitianElement) -> Result<f64> {
    ensure_same(x.algebra(), y.algebra())?;
    let a = PositiveElement::exp(x)?;
    let b = PositiveElement::exp(y)?;
    Ok(dist(&a, &b)? - (x - y).norm2())
}

/// Samples `t ↦ dist(g1(t), g2(t))` on `grid`.
pub fn convexity_profile(g1: &Geodesic, g2: &Geodesic, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    ensure_same(g1.start().algebra(), g2.start().algebra())?;
    grid.iter()
        .map(|&t| Ok((t, dist(&g1.evaluate(t)?, &g2.evaluate(t)?)?)))
        .collect()
}

/// Largest violation of midpoint convexity `f_i ≤ (f_{i−1} + f_{i+1})/2` on an
/// evenly spaced sample; `≤ 0` means convex.
pub fn midpoint_convexity_defect(values: &[f64]) -> f64 {
    values
        .windows(3)
        .map(|w| w[1] - 0.5 * (w[0] + w[2]))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0)
}

/// Geodesic symmetry `σ_p(q) = p q⁻¹ p`.
pub fn geodesic_symmetry(p: &PositiveElement, q: &PositiveElement) -> Result<PositiveElement> {
    ensure_same(p.algebra(), q.algebra())?;
    PositiveElement::new(p.value().sandwich(&q.inverse()))
}

/// The isometry `I_g(a) = g a g*` for invertible `g`.
pub fn congruence(g: &AlgebraElement, a: &PositiveElement) -> Result<PositiveElement> {
    ensure_same(g.algebra(), a.algebra())?;
    g.inverse()?;
    let gag = &(g * a.value().as_element()) * &g.adjoint();
    PositiveElement::new(HermitianElement::new(gag))
}

/// `I_g` on tangent vectors: `x ↦ g x g*`.
pub fn congruence_tangent(g: &AlgebraElement, x: &HermitianElement) -> Result<HermitianElement> {
    ensure_same(g.algebra(), x.algebra())?;
    Ok(HermitianElement::new(&(g * x.as_element()) * &g.adjoint()))
}
