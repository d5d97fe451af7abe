//! Spectral calculus and first divided differences (Daleckii–Krein).

use super::{AlgebraElement, HermitianElement, SpectralDecomposition, C64};
use crate::error::{Error, Result};

/// Below this gap (relative to `1 + |λ_i| + |λ_j|`) two eigenvalues are
/// treated as coincident and the divided difference becomes `f′` at their
/// midpoint.
pub const COINCIDENCE_REL_GAP: f64 = 1e-7;

/// A real scalar function with derivative, applied through spectral calculus.
pub trait SpectralFunction {
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;

    /// `(f(a) − f(b)) / (a − b)`, or `f′` at the midpoint when `a ≈ b`.
    fn divided_difference(&self, a: f64, b: f64) -> f64 {
        if coincident(a, b) {
            self.derivative(0.5 * (a + b))
        } else {
            (self.value(a) - self.value(b)) / (a - b)
        }
    }
}

pub(crate) fn coincident(a: f64, b: f64) -> bool {
    (a - b).abs() < COINCIDENCE_REL_GAP * (1.0 + a.abs() + b.abs())
}

#[derive(Debug, Clone, Copy)]
pub struct Exp;

impl SpectralFunction for Exp {
    fn value(&self, t: f64) -> f64 {
        t.exp()
    }
    fn derivative(&self, t: f64) -> f64 {
        t.exp()
    }
    fn divided_difference(&self, a: f64, b: f64) -> f64 {
        if coincident(a, b) {
            return (0.5 * (a + b)).exp();
        }
        // e^b (e^{a−b} − 1)/(a − b) avoids cancellation for close a, b.
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        let d = hi - lo;
        lo.exp() * d.exp_m1() / d
    }
}

/// Natural logarithm; defined on positive spectra only.
#[derive(Debug, Clone, Copy)]
pub struct Ln;

impl SpectralFunction for Ln {
    fn value(&self, t: f64) -> f64 {
        t.ln()
    }
    fn derivative(&self, t: f64) -> f64 {
        1.0 / t
    }
    fn divided_difference(&self, a: f64, b: f64) -> f64 {
        if coincident(a, b) {
            return 2.0 / (a + b);
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        (hi / lo).ln() / (hi - lo)
    }
}

/// `t ↦ t^p` on positive spectra.
#[derive(Debug, Clone, Copy)]
pub struct Power(pub f64);

impl SpectralFunction for Power {
    fn value(&self, t: f64) -> f64 {
        t.powf(self.0)
    }
    fn derivative(&self, t: f64) -> f64 {
        self.0 * t.powf(self.0 - 1.0)
    }
}

/// `U f(Λ) U*`; fails when `f` is not finite somewhere on the spectrum.
pub fn fun_hermitian(x: &HermitianElement, f: impl Fn(f64) -> f64) -> Result<HermitianElement> {
    let s = x.eig()?;
    for l in s.eigenvalues() {
        if !f(l).is_finite() {
            return Err(Error::UndefinedOnSpectrum { eigenvalue: l });
        }
    }
    Ok(s.apply(f))
}

/// Multiplies `y` entrywise, in the eigenbasis of the decomposed element, by
/// `kernel(λ_i, λ_j)`.
pub(crate) fn schur_apply(
    spectrum: &SpectralDecomposition,
    y: &AlgebraElement,
    kernel: impl Fn(f64, f64) -> f64,
) -> AlgebraElement {
    let mut blocks = spectrum.to_eigenbasis(y);
    for (m, b) in blocks.iter_mut().zip(spectrum.blocks()) {
        let ev = &b.eigenvalues;
        for j in 0..ev.len() {
            for i in 0..ev.len() {
                m[(i, j)] *= C64::new(kernel(ev[i], ev[j]), 0.0);
            }
        }
    }
    spectrum.from_eigenbasis(blocks)
}

/// The Fréchet derivative `d/dt f(x + t y)|_{t=0}` via first divided
/// differences of `f` in the eigenbasis of `x`.
pub fn divided_difference_apply(
    f: &impl SpectralFunction,
    x: &HermitianElement,
    y: &HermitianElement,
) -> Result<HermitianElement> {
    crate::algebra::ensure_same(x.algebra(), y.algebra())?;
    let s = x.eig()?;
    Ok(divided_difference_with(&s, f, y))
}

/// Same as [`divided_difference_apply`] with a precomputed decomposition.
pub fn divided_difference_with(
    spectrum: &SpectralDecomposition,
    f: &impl SpectralFunction,
    y: &HermitianElement,
) -> HermitianElement {
    HermitianElement::new(schur_apply(spectrum, y.as_element(), |a, b| f.divided_difference(a, b)))
}
