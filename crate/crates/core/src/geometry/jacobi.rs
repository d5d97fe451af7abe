//! Jacobi fields along `γ(t) = e^{tx}` in the transported form
//! `K(t) = e^{-tx/2} J(t) e^{-tx/2}`, which solves `4K̈ = Kx² + x²K − 2xKx`.

use crate::algebra::{ensure_same, HermitianElement};
use crate::error::{Error, Result};

pub const DEFAULT_JACOBI_STEP: f64 = 1e-3;

/// Right-hand side `K̈ = (Kx² + x²K − 2xKx)/4`.
pub fn jacobi_rhs(x: &HermitianElement, k: &HermitianElement) -> HermitianElement {
    let x = x.as_element();
    let k = k.as_element();
    let x2 = x * x;
    let kx2 = k * &x2;
    let x2k = &x2 * k;
    let xkx = &(x * k) * x;
    HermitianElement::new((&(&kx2 + &x2k) - &xkx.scale(2.0)).scale(0.25))
}

#[derive(Debug, Clone)]
pub struct JacobiSolution {
    generator: HermitianElement,
    times: Vec<f64>,
    k_values: Vec<HermitianElement>,
    k_dot_values: Vec<HermitianElement>,
    j_values: Vec<HermitianElement>,
}

impl JacobiSolution {
    pub fn generator(&self) -> &HermitianElement {
        &self.generator
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn k_values(&self) -> &[HermitianElement] {
        &self.k_values
    }

    pub fn k_dot_values(&self) -> &[HermitianElement] {
        &self.k_dot_values
    }

    /// `J(t) = e^{tx/2} K(t) e^{tx/2}`.
    pub fn j_values(&self) -> &[HermitianElement] {
        &self.j_values
    }

    /// `‖K(t)‖₂`, which equals the metric norm of `J(t)` at `γ(t)`.
    pub fn norms(&self) -> Vec<f64> {
        self.k_values.iter().map(HermitianElement::norm2).collect()
    }

    /// Maximal `‖(K_{i+1} − 2K_i + K_{i−1})/h² − K̈(K_i)‖₂` over interior
    /// grid points; `O(h²)` for a correct solution.
    pub fn fd_residual(&self) -> f64 {
        if self.times.len() < 3 {
            return 0.0;
        }
        let h = self.times[1] - self.times[0];
        self.k_values
            .windows(3)
            .map(|w| {
                let second = (&(&w[2] - &w[1].scale(2.0)) + &w[0]).scale(1.0 / (h * h));
                (&second - &jacobi_rhs(&self.generator, &w[1])).norm2()
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of midpoint convexity of `t ↦ ‖K(t)‖₂`.
    pub fn norm_convexity_defect(&self) -> f64 {
        super::midpoint_convexity_defect(&self.norms())
    }

    /// `min_t τ(K K̈)`; nonnegative since it equals `½‖[K, x]‖₂²`.
    pub fn min_trace_k_kddot(&self) -> f64 {
        self.k_values
            .iter()
            .map(|k| k.inner2(&jacobi_rhs(&self.generator, k)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fixed-step classical RK4 on `(K, K̇)` over `[0, t_end]`.
///
/// The step is shrunk to `t_end / ⌈t_end / step⌉` so the grid ends exactly
/// at `t_end`.
pub fn jacobi_integrate(
    x: &HermitianElement,
    k0: &HermitianElement,
    k_dot0: &HermitianElement,
    t_end: f64,
    step: f64,
) -> Result<JacobiSolution> {
    ensure_same(x.algebra(), k0.algebra())?;
    ensure_same(x.algebra(), k_dot0.algebra())?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {step}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be >= 0, got {t_end}")));
    }
    let n = (t_end / step - 1e-9).ceil().max(0.0) as usize;
    let h = if n == 0 { 0.0 } else { t_end / n as f64 };

    let f = |k: &HermitianElement| jacobi_rhs(x, k);
    let mut k = k0.clone();
    let mut kd = k_dot0.clone();
    let mut times = Vec::with_capacity(n + 1);
    let mut k_values = Vec::with_capacity(n + 1);
    let mut k_dot_values = Vec::with_capacity(n + 1);
    times.push(0.0);
    k_values.push(k.clone());
    k_dot_values.push(kd.clone());

    for i in 0..n {
        // y = (K, K̇), y′ = (K̇, F(K)).
        let a1 = kd.clone();
        let b1 = f(&k);
        let a2 = kd.axpy(0.5 * h, &b1);
        let b2 = f(&k.axpy(0.5 * h, &a1));
        let a3 = kd.axpy(0.5 * h, &b2);
        let b3 = f(&k.axpy(0.5 * h, &a2));
        let a4 = kd.axpy(h, &b3);
        let b4 = f(&k.axpy(h, &a3));
        let w = h / 6.0;
        k = HermitianElement::combination(
            x.algebra(),
            &[(1.0, &k), (w, &a1), (2.0 * w, &a2), (2.0 * w, &a3), (w, &a4)],
        );
        kd = HermitianElement::combination(
            x.algebra(),
            &[(1.0, &kd), (w, &b1), (2.0 * w, &b2), (2.0 * w, &b3), (w, &b4)],
        );
        times.push((i + 1) as f64 * h);
        k_values.push(k.clone());
        k_dot_values.push(kd.clone());
    }

    let generator_spectrum = x.eig()?;
    let j_values = times
        .iter()
        .zip(&k_values)
        .map(|(&t, k)| generator_spectrum.apply(|l| (0.5 * t * l).exp()).sandwich(k))
        .collect();

    Ok(JacobiSolution {
        generator: x.clone(),
        times,
        k_values,
        k_dot_values,
        j_values,
    })
}
