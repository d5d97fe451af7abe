//! Nearest-point projection onto a convex submanifold `M = e^H` and the
//! factorizations derived from it.
//!
//! `Π_M(r)` minimizes `φ(p) = dist²(r, p)` over `M`. The minimizer is the
//! unique `p ∈ M` whose normal velocity `Log_p(r)` is metric-orthogonal to
//! `T_pM = p^{1/2} H p^{1/2}`, i.e. `P_H ln(p^{-1/2} r p^{-1/2}) = 0`. It is
//! found by BFGS descent in the exponential chart `c ↦ e^{Σ c_i h_i}` of `M`
//! with an Armijo line search.

use crate::algebra::{ensure_same, Algebra, AlgebraElement, HermitianElement, PositiveElement};
use crate::convexity::{
    check_double_bracket, standard_subspace, Closure, ConvexSubmanifold, Subspace, SubspaceKind, DEFAULT_CLOSURE_TOL,
    DEFAULT_MEMBERSHIP_TOL,
};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

use crate::geometry::{dexp, dist, relative_spectrum, unwhiten};

/// Base orthogonality tolerance, scaled by `1 + dist(r, p)`.
pub const DEFAULT_PROJECTION_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Second convergence condition: the metric norm of the proposed step.
pub const STEP_TOL: f64 = 1e-12;
/// Projection refuses inputs whose distance to `M` provably exceeds this.
pub const CONDITIONING_LIMIT: f64 = 50.0;
const ARMIJO_C: f64 = 1e-4;
/// Relative slack in the Armijo test. Near the foot the required decrease
/// falls below the rounding level of `φ` and could never be certified.
const PHI_ROUNDING: f64 = 1e-14;
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// `Π_M(r)`.
    pub foot: PositiveElement,
    /// `Log_p(r)`, normal to `M` at the foot.
    pub normal: HermitianElement,
    /// `max_i |⟨Log_p r, p^{1/2} h_i p^{1/2}⟩_p|` over the basis of `H`.
    pub residual: f64,
    /// The tolerance the residual was held to, `tol·(1 + distance)`.
    pub tolerance: f64,
    /// `dist(r, p)`.
    pub distance: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `ln(p^{-1/2} r p^{-1/2})` and `φ = ‖·‖₂²`.
fn whitened_log(p: &PositiveElement, r: &PositiveElement) -> Result<(HermitianElement, f64)> {
    let l = relative_spectrum(p, r)?.apply(f64::ln);
    let n = l.norm2();
    Ok((l, n * n))
}

fn require_certified(m: &ConvexSubmanifold) -> Result<()> {
    if m.closure_certified() {
        return Ok(());
    }
    match check_double_bracket(m.subspace(), DEFAULT_CLOSURE_TOL) {
        Closure::Pass { .. } => Ok(()),
        Closure::Fail(w) => Err(Error::NotClosed { residual: w.residual }),
    }
}

/// Certified lower bound `‖(1 − P_H) ln r‖₂ ≤ dist(r, M)`.
pub fn distance_lower_bound(m: &ConvexSubmanifold, r: &PositiveElement) -> Result<f64> {
    ensure_same(m.algebra(), r.algebra())?;
    Ok(m.subspace().distance_to(&r.ln()))
}

/// `Π_M(r)`, starting from `e^{P_H ln r}`.
pub fn project(m: &ConvexSubmanifold, r: &PositiveElement, tol: f64, max_iter: usize) -> Result<ProjectionResult> {
    ensure_same(m.algebra(), r.algebra())?;
    let init = PositiveElement::exp(&m.subspace().project(&r.ln()))?;
    project_from(m, r, &init, tol, max_iter)
}

/// [`project`] with the default tolerance and iteration cap.
pub fn project_default(m: &ConvexSubmanifold, r: &PositiveElement) -> Result<ProjectionResult> {
    project(m, r, DEFAULT_PROJECTION_TOL, DEFAULT_MAX_ITER)
}

/// [`project`] from a caller-supplied starting point in `M`.
pub fn project_from(
    m: &ConvexSubmanifold,
    r: &PositiveElement,
    init: &PositiveElement,
    tol: f64,
    max_iter: usize,
) -> Result<ProjectionResult> {
    let res = descend(m, r, init, tol, max_iter)?;
    if !res.converged {
        return Err(Error::NonConvergence {
            iterations: res.iterations,
            residual: res.residual,
        });
    }
    Ok(res)
}

/// The descent loop. Returns `converged = false` instead of an error when
/// the iteration cap is hit.
pub fn descend(
    m: &ConvexSubmanifold,
    r: &PositiveElement,
    init: &PositiveElement,
    tol: f64,
    max_iter: usize,
) -> Result<ProjectionResult> {
    ensure_same(m.algebra(), r.algebra())?;
    ensure_same(m.algebra(), init.algebra())?;
    require_certified(m)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    let lower = distance_lower_bound(m, r)?;
    if lower > CONDITIONING_LIMIT {
        return Err(Error::Conditioning { lower_bound: lower });
    }
    let init_residual = m.membership_residual(init);
    if init_residual > DEFAULT_MEMBERSHIP_TOL {
        return Err(Error::NotInSubmanifold {
            residual: init_residual,
        });
    }

    let h = m.subspace();
    let k = h.dim();
    // Quasi-Newton descent in the chart c ↦ e^{Σ c_i h_i}. The iterate is
    // e^y with y ∈ H exactly, so rounding cannot push it off M.
    let mut c = h.coefficients(&init.ln());
    let mut state = ChartPoint::new(h, r, &c)?;
    // φ ≈ ‖y − y*‖₂² near a commuting foot, so the Hessian starts at 2I.
    let mut inv_hess = DMatrix::<f64>::identity(k, k) * 0.5;
    let mut iterations = 0;
    let mut stalled = false;
    let mut prev_g_norm = f64::INFINITY;
    loop {
        let g_coeffs = h.coefficients(&state.ell);
        let residual = g_coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let g_norm = g_coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        let distance = state.phi.sqrt();
        let tolerance = tol * (1.0 + distance);
        let small = residual <= tolerance;
        // Once the residual test passes, a step norm that no longer halves
        // means the iteration sits at its rounding floor.
        let floor = g_norm <= STEP_TOL || g_norm > 0.5 * prev_g_norm;
        if (small && (floor || stalled)) || iterations >= max_iter || stalled {
            return Ok(ProjectionResult {
                normal: unwhiten(&state.p, &state.ell),
                foot: state.p,
                residual,
                tolerance,
                distance,
                iterations,
                converged: small,
            });
        }

        let grad = DVector::from_vec(state.grad.clone());
        let mut dir = -(&inv_hess * &grad);
        let mut slope = grad.dot(&dir);
        if !(slope < 0.0) {
            inv_hess = DMatrix::identity(k, k) * 0.5;
            dir = -&grad * 0.5;
            slope = grad.dot(&dir);
        }
        let mut s = 1.0;
        loop {
            let cand_c: Vec<f64> = c.iter().zip(dir.iter()).map(|(ci, di)| ci + s * di).collect();
            let cand = ChartPoint::new(h, r, &cand_c)?;
            let slack = PHI_ROUNDING * (1.0 + state.phi);
            if cand.phi <= state.phi + ARMIJO_C * s * slope + slack {
                let step = &dir * s;
                let change = DVector::from_vec(cand.grad.clone()) - &grad;
                let curv = step.dot(&change);
                if curv > 1e-300 && curv.is_finite() {
                    let rho = 1.0 / curv;
                    let id = DMatrix::<f64>::identity(k, k);
                    let left = &id - &step * change.transpose() * rho;
                    let right = &id - &change * step.transpose() * rho;
                    inv_hess = &left * &inv_hess * &right + &step * step.transpose() * rho;
                }
                prev_g_norm = g_norm;
                c = cand_c;
                state = cand;
                iterations += 1;
                break;
            }
            s *= 0.5;
            if s < MIN_STEP {
                stalled = true;
                break;
            }
        }
    }
}

/// `e^y` for `y = Σ c_i h_i`, with `φ = dist²(r, e^y)` and its gradient in
/// the coefficients.
struct ChartPoint {
    p: PositiveElement,
    /// `ln(p^{-1/2} r p^{-1/2})`.
    ell: HermitianElement,
    phi: f64,
    grad: Vec<f64>,
}

impl ChartPoint {
    fn new(h: &Subspace, r: &PositiveElement, c: &[f64]) -> Result<Self> {
        let y = h.combine(c);
        let p = PositiveElement::exp(&y)?;
        let (ell, phi) = whitened_log(&p, r)?;
        // dφ = −2⟨p^{-1/2} ℓ p^{-1/2}, dexp_y(δy)⟩ and dexp_y is τ-symmetric.
        let q = p.inv_sqrt().sandwich(&ell);
        let grad = h.coefficients(&dexp(&y, &q)?).into_iter().map(|g| -2.0 * g).collect();
        Ok(Self { p, ell, phi, grad })
    }
}

/// `dist(r, s) − dist(Π_M r, Π_M s)`; nonnegative since `Π_M` is
/// 1-Lipschitz.
pub fn contractivity_slack(m: &ConvexSubmanifold, r: &PositiveElement, s: &PositiveElement) -> Result<f64> {
    let pr = project_default(m, r)?;
    let ps = project_default(m, s)?;
    Ok(dist(r, s)? - dist(&pr.foot, &ps.foot)?)
}

/// `e^z = e^y e^w e^y` with `y ∈ H` and `w ⊥ H`.
#[derive(Debug, Clone)]
pub struct SymmetricFactorization {
    pub y: HermitianElement,
    pub w: HermitianElement,
    /// `e^{2y} = Π_M(e^z)`.
    pub foot: PositiveElement,
    /// `‖e^z − e^y e^w e^y‖₂ / ‖e^z‖₂`.
    pub residual: f64,
    /// `‖P_H w‖₂`.
    pub orthogonality: f64,
    pub iterations: usize,
}

pub fn factor_symmetric(m: &ConvexSubmanifold, z: &HermitianElement) -> Result<SymmetricFactorization> {
    ensure_same(m.algebra(), z.algebra())?;
    let r = PositiveElement::exp(z)?;
    let proj = project_default(m, &r)?;
    symmetric_from_projection(m, &r, proj)
}

/// [`factor_symmetric`] with the inner projection started at `init`.
pub fn factor_symmetric_from(
    m: &ConvexSubmanifold,
    z: &HermitianElement,
    init: &PositiveElement,
) -> Result<SymmetricFactorization> {
    ensure_same(m.algebra(), z.algebra())?;
    let r = PositiveElement::exp(z)?;
    let proj = project_from(m, &r, init, DEFAULT_PROJECTION_TOL, DEFAULT_MAX_ITER)?;
    symmetric_from_projection(m, &r, proj)
}

fn symmetric_from_projection(
    m: &ConvexSubmanifold,
    r: &PositiveElement,
    proj: ProjectionResult,
) -> Result<SymmetricFactorization> {
    let h = m.subspace();
    let y = h.project(&proj.foot.ln()).scale(0.5);
    let ey = y.exp()?;
    let e_neg_y = y.scale(-1.0).exp()?;
    let w = PositiveElement::new(e_neg_y.sandwich(r.value()))?.ln();
    let rebuilt = ey.sandwich(&w.exp()?);
    let residual = (&rebuilt - r.value()).norm2() / r.value().norm2();
    let orthogonality = h.project(&w).norm2();
    Ok(SymmetricFactorization {
        y,
        w,
        foot: proj.foot,
        residual,
        orthogonality,
        iterations: proj.iterations,
    })
}

/// `e^x = d e^v d` with `d` positive diagonal and `v` zero-diagonal.
#[derive(Debug, Clone)]
pub struct MasaFactorization {
    pub d: PositiveElement,
    pub v: HermitianElement,
    /// `‖e^x − d e^v d‖₂ / ‖e^x‖₂`.
    pub residual: f64,
    /// Largest modulus on the diagonal of `v`.
    pub diagonal_defect: f64,
    pub iterations: usize,
}

pub fn factor_masa(algebra: &Algebra, x: &HermitianElement) -> Result<MasaFactorization> {
    ensure_same(algebra, x.algebra())?;
    let diag = standard_subspace(algebra, &SubspaceKind::Diagonal)?;
    let m = ConvexSubmanifold::certify(diag).expect("diagonal subspace is closed");
    let f = factor_symmetric(&m, x)?;
    let d = PositiveElement::exp(&f.y)?;
    let rebuilt = d.value().sandwich(&f.w.exp()?);
    let ex = x.exp()?;
    let residual = (&rebuilt - &ex).norm2() / ex.norm2();
    let diagonal_defect =
        f.w.blocks()
            .iter()
            .flat_map(|b| (0..b.nrows()).map(move |i| b[(i, i)].norm()))
            .fold(0.0, f64::max);
    Ok(MasaFactorization {
        d,
        v: f.w,
        residual,
        diagonal_defect,
        iterations: f.iterations,
    })
}

/// `g = e^x e^y u` with `x ∈ H`, `y ⊥ H` and `u` unitary.
#[derive(Debug, Clone)]
pub struct IwasawaFactorization {
    pub x: HermitianElement,
    pub y: HermitianElement,
    pub u: AlgebraElement,
    /// `‖g − e^x e^y u‖₂ / ‖g‖₂`.
    pub residual: f64,
    /// `‖u u* − 1‖₂`.
    pub unitarity: f64,
    /// `‖P_H y‖₂`.
    pub orthogonality: f64,
    pub iterations: usize,
}

pub fn factor_iwasawa(m: &ConvexSubmanifold, g: &AlgebraElement) -> Result<IwasawaFactorization> {
    iwasawa(m, g, None)
}

/// [`factor_iwasawa`] with the inner projection started at `init`.
pub fn factor_iwasawa_from(
    m: &ConvexSubmanifold,
    g: &AlgebraElement,
    init: &PositiveElement,
) -> Result<IwasawaFactorization> {
    iwasawa(m, g, Some(init))
}

fn iwasawa(m: &ConvexSubmanifold, g: &AlgebraElement, init: Option<&PositiveElement>) -> Result<IwasawaFactorization> {
    ensure_same(m.algebra(), g.algebra())?;
    g.inverse()?;
    let ggs = PositiveElement::new(HermitianElement::new(g * &g.adjoint()))?;
    let z = ggs.ln();
    let sym = match init {
        Some(p) => factor_symmetric_from(m, &z, p)?,
        None => factor_symmetric(m, &z)?,
    };
    let x = sym.y;
    let y = sym.w.scale(0.5);
    let ex = x.exp()?;
    let ey = y.exp()?;
    let u = &(y.scale(-1.0).exp()?.as_element() * x.scale(-1.0).exp()?.as_element()) * g;
    let rebuilt = &(ex.as_element() * ey.as_element()) * &u;
    let residual = (&rebuilt - g).norm2() / g.norm2();
    let unitarity = u.unitarity_defect();
    let orthogonality = m.subspace().project(&y).norm2();
    Ok(IwasawaFactorization {
        x,
        y,
        u,
        residual,
        unitarity,
        orthogonality,
        iterations: sym.iterations,
    })
}
