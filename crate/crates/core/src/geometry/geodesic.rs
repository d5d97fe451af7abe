use crate::algebra::{ensure_same, HermitianElement, PositiveElement, SpectralDecomposition};
use crate::error::Result;

use super::{relative_spectrum, unwhiten, whiten};

/// The geodesic `δ(t) = p^{1/2} e^{t h} p^{1/2}` with Hermitian generator `h`.
///
/// Built from endpoints, `h = ln(p^{-1/2} q p^{-1/2})`; from an initial
/// velocity `v`, `h = p^{-1/2} v p^{-1/2}`. The square roots of `p` and the
/// eigenbasis of `h` are computed once at construction.
#[derive(Debug, Clone)]
pub struct Geodesic {
    start: PositiveElement,
    end: Option<PositiveElement>,
    sqrt_start: HermitianElement,
    inv_sqrt_start: HermitianElement,
    generator: HermitianElement,
    generator_spectrum: SpectralDecomposition,
}

impl Geodesic {
    pub fn between(p: &PositiveElement, q: &PositiveElement) -> Result<Self> {
        ensure_same(p.algebra(), q.algebra())?;
        let rel = relative_spectrum(p, q)?;
        let generator_spectrum = rel.map(f64::ln);
        let generator = generator_spectrum.reconstruct();
        Ok(Self {
            start: p.clone(),
            end: Some(q.clone()),
            sqrt_start: p.sqrt(),
            inv_sqrt_start: p.inv_sqrt(),
            generator,
            generator_spectrum,
        })
    }

    pub fn from_velocity(p: &PositiveElement, v: &HermitianElement) -> Result<Self> {
        ensure_same(p.algebra(), v.algebra())?;
        let generator = whiten(p, v);
        let generator_spectrum = generator.eig()?;
        Ok(Self {
            start: p.clone(),
            end: None,
            sqrt_start: p.sqrt(),
            inv_sqrt_start: p.inv_sqrt(),
            generator,
            generator_spectrum,
        })
    }

    pub fn start(&self) -> &PositiveElement {
        &self.start
    }

    pub fn end(&self) -> Option<&PositiveElement> {
        self.end.as_ref()
    }

    /// `h`, the velocity transported to the identity.
    pub fn generator(&self) -> &HermitianElement {
        &self.generator
    }

    pub fn initial_velocity(&self) -> HermitianElement {
        unwhiten(&self.start, &self.generator)
    }

    pub fn evaluate(&self, t: f64) -> Result<PositiveElement> {
        if t == 0.0 {
            return Ok(self.start.clone());
        }
        let e = self.generator_spectrum.apply(|l| (t * l).exp());
        PositiveElement::new(self.sqrt_start.sandwich(&e))
    }

    /// `δ′(t) = p^{1/2} h e^{th} p^{1/2}`.
    pub fn derivative(&self, t: f64) -> HermitianElement {
        let he = self.generator_spectrum.apply(|l| l * (t * l).exp());
        self.sqrt_start.sandwich(&he)
    }

    /// Constant speed `‖h‖₂`.
    pub fn speed(&self) -> f64 {
        self.generator.norm2()
    }

    /// Length of the segment `t ∈ [0, 1]`.
    pub fn length(&self) -> f64 {
        self.speed()
    }

    pub fn inv_sqrt_start(&self) -> &HermitianElement {
        &self.inv_sqrt_start
    }
}

/// The geodesic from `p` (at `t = 0`) to `q` (at `t = 1`).
pub fn geodesic(p: &PositiveElement, q: &PositiveElement) -> Result<Geodesic> {
    Geodesic::between(p, q)
}
