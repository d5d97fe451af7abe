//! Finite tracial algebras realized as direct sums of complex matrix blocks.
//!
//! An algebra `A = M_{d_1} ⊕ … ⊕ M_{d_k}` carries the tracial state
//! `τ(a) = Σ_i w_i · tr(a_i) / d_i` with positive weights summing to one.
//! Every element stores one dense block per summand.

mod eigen;
mod spectral;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::{BlockSpectrum, SpectralDecomposition, JACOBI_MAX_SWEEPS};
pub(crate) use spectral::schur_apply;
pub use spectral::{
    divided_difference_apply, divided_difference_with, fun_hermitian, Exp, Ln, Power, SpectralFunction,
    COINCIDENCE_REL_GAP,
};

pub type C64 = Complex64;
pub type Block = DMatrix<C64>;

/// Shared handle to an algebra descriptor.
pub type Algebra = Arc<TracialAlgebra>;

/// Default spectral floor for accepting an element as positive.
pub const DEFAULT_POSITIVITY_FLOOR: f64 = 1e-12;

/// Tolerance on `Σ weights = 1`.
const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub dim: usize,
    pub weight: f64,
}

/// Block dimensions and trace weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracialAlgebra {
    blocks: Vec<BlockSpec>,
}

impl TracialAlgebra {
    pub fn new(blocks: Vec<BlockSpec>) -> Result<Algebra> {
        if blocks.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        for b in &blocks {
            if b.dim == 0 {
                return Err(Error::InvalidAlgebra("block of dimension 0".into()));
            }
            if !(b.weight > 0.0 && b.weight.is_finite()) {
                return Err(Error::InvalidAlgebra(format!(
                    "weight {} is not strictly positive",
                    b.weight
                )));
            }
        }
        let total: f64 = blocks.iter().map(|b| b.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidAlgebra(format!("weights sum to {total}, expected 1")));
        }
        Ok(Arc::new(Self { blocks }))
    }

    /// The full matrix algebra `M_n` with `τ = tr/n`.
    pub fn matrix(n: usize) -> Algebra {
        Self::new(vec![BlockSpec { dim: n, weight: 1.0 }]).expect("valid single-block algebra")
    }

    /// Blocks weighted by `dim_i / Σ dim_j`, i.e. the restriction of the
    /// normalized trace of the ambient `M_{Σ dim}`.
    pub fn proportional(dims: &[usize]) -> Result<Algebra> {
        let total: usize = dims.iter().sum();
        if total == 0 {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        let mut blocks: Vec<BlockSpec> = dims
            .iter()
            .map(|&dim| BlockSpec {
                dim,
                weight: dim as f64 / total as f64,
            })
            .collect();
        // Absorb the rounding of the last weight so the sum is exactly one.
        let head: f64 = blocks[..blocks.len() - 1].iter().map(|b| b.weight).sum();
        if let Some(last) = blocks.last_mut() {
            last.weight = 1.0 - head;
        }
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Sum of block dimensions (size of the diagonal).
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Real dimension of the Hermitian part `A_h`.
    pub fn hermitian_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }

    /// Largest block dimension.
    pub fn max_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).max().unwrap_or(0)
    }
}

pub(crate) fn ensure_same(a: &Algebra, b: &Algebra) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::AlgebraMismatch)
    }
}

fn assert_same(a: &Algebra, b: &Algebra) {
    assert!(
        Arc::ptr_eq(a, b) || a == b,
        "arithmetic between elements of different algebras"
    );
}

/// A general element of the algebra: one square complex block per summand.
#[derive(Clone, PartialEq)]
pub struct AlgebraElement {
    algebra: Algebra,
    blocks: Vec<Block>,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlgebraElement")
            .field("algebra", &self.algebra.blocks)
            .field("blocks", &self.blocks)
            .finish()
    }
}

impl AlgebraElement {
    pub fn from_blocks(algebra: &Algebra, blocks: Vec<Block>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::Shape(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (i, (b, shape)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if b.nrows() != shape.dim || b.ncols() != shape.dim {
                return Err(Error::Shape(format!(
                    "block {i} is {}x{}, expected {}x{}",
                    b.nrows(),
                    b.ncols(),
                    shape.dim,
                    shape.dim
                )));
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            blocks,
        })
    }

    /// Builds an element from real block matrices.
    pub fn from_real_blocks(algebra: &Algebra, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        let blocks = blocks.into_iter().map(|b| b.map(|v| C64::new(v, 0.0))).collect();
        Self::from_blocks(algebra, blocks)
    }

    pub fn zeros(algebra: &Algebra) -> Self {
        let blocks = algebra.blocks().iter().map(|b| Block::zeros(b.dim, b.dim)).collect();
        Self {
            algebra: algebra.clone(),
            blocks,
        }
    }

    pub fn identity(algebra: &Algebra) -> Self {
        let blocks = algebra.blocks().iter().map(|b| Block::identity(b.dim, b.dim)).collect();
        Self {
            algebra: algebra.clone(),
            blocks,
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    pub(crate) fn map_blocks(&self, f: impl Fn(&Block) -> Block) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub(crate) fn zip_blocks(&self, other: &Self, f: impl Fn(&Block, &Block) -> Block) -> Self {
        assert_same(&self.algebra, &other.algebra);
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    /// The tracial state `τ`.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(b, shape)| b.trace() * (shape.weight / shape.dim as f64))
            .sum()
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_blocks(|b| b * C64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        self.map_blocks(|b| b * s)
    }

    /// `τ(a* b)`, the complex trace inner product.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_same(&self.algebra, &other.algebra);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .zip(self.algebra.blocks())
            .map(|((a, b), shape)| a.dotc(b) * (shape.weight / shape.dim as f64))
            .sum()
    }

    /// The 2-norm `τ(a* a)^{1/2}`.
    pub fn norm2(&self) -> f64 {
        self.blocks
            .iter()
            .zip(self.algebra.blocks())
            .map(|(b, shape)| b.norm_squared() * shape.weight / shape.dim as f64)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry magnitude over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Inverse via LU, certified by the residual `‖g g⁻¹ − 1‖₂`.
    pub fn inverse(&self) -> Result<Self> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            match b.clone().lu().try_inverse() {
                Some(inv) => blocks.push(inv),
                None => {
                    return Err(Error::Singular {
                        residual: f64::INFINITY,
                    })
                }
            }
        }
        let inv = Self {
            algebra: self.algebra.clone(),
            blocks,
        };
        let residual = (&(self * &inv) - &Self::identity(&self.algebra)).norm2();
        if !(residual <= 1e-8) {
            return Err(Error::Singular { residual });
        }
        Ok(inv)
    }

    /// General matrix exponential (Padé with scaling and squaring), for
    /// non-Hermitian arguments.
    pub fn expm(&self) -> Self {
        self.map_blocks(|b| b.exp())
    }

    /// The Hermitian part `(a + a*)/2`.
    pub fn hermitian_part(&self) -> HermitianElement {
        HermitianElement::new(self.clone())
    }

    /// Distance to the unitary group test: `‖a a* − 1‖₂`.
    pub fn unitarity_defect(&self) -> f64 {
        (&(self * &self.adjoint()) - &Self::identity(&self.algebra)).norm2()
    }
}

impl<'a> Add<&'a AlgebraElement> for &'a AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a AlgebraElement> for &'a AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a AlgebraElement> for &'a AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.map_blocks(|b| -b)
    }
}

/// A self-adjoint element. Construction symmetrizes the input.
#[derive(Clone, PartialEq)]
pub struct HermitianElement(AlgebraElement);

impl fmt::Debug for HermitianElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("HermitianElement").field(&self.0.blocks).finish()
    }
}

fn symmetrize(b: &Block) -> Block {
    let mut out = (b + b.adjoint()) * C64::new(0.5, 0.0);
    for i in 0..out.nrows() {
        out[(i, i)].im = 0.0;
    }
    out
}

impl HermitianElement {
    /// Replaces each block by `(b + b*)/2`.
    pub fn new(element: AlgebraElement) -> Self {
        Self(element.map_blocks(symmetrize))
    }

    pub fn from_blocks(algebra: &Algebra, blocks: Vec<Block>) -> Result<Self> {
        AlgebraElement::from_blocks(algebra, blocks).map(Self::new)
    }

    pub fn from_real_blocks(algebra: &Algebra, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        AlgebraElement::from_real_blocks(algebra, blocks).map(Self::new)
    }

    /// Real diagonal element, entries listed block after block.
    pub fn diagonal(algebra: &Algebra, entries: &[f64]) -> Result<Self> {
        if entries.len() != algebra.total_dim() {
            return Err(Error::Shape(format!(
                "expected {} diagonal entries, got {}",
                algebra.total_dim(),
                entries.len()
            )));
        }
        let mut offset = 0;
        let blocks = algebra
            .blocks()
            .iter()
            .map(|shape| {
                let d = &entries[offset..offset + shape.dim];
                offset += shape.dim;
                Block::from_diagonal(&nalgebra::DVector::from_iterator(
                    shape.dim,
                    d.iter().map(|&v| C64::new(v, 0.0)),
                ))
            })
            .collect();
        Ok(Self(AlgebraElement {
            algebra: algebra.clone(),
            blocks,
        }))
    }

    pub fn zeros(algebra: &Algebra) -> Self {
        Self(AlgebraElement::zeros(algebra))
    }

    pub fn identity(algebra: &Algebra) -> Self {
        Self(AlgebraElement::identity(algebra))
    }

    /// Wraps blocks already known to be Hermitian up to rounding.
    pub(crate) fn from_element_unchecked(element: AlgebraElement) -> Self {
        Self::new(element)
    }

    pub fn as_element(&self) -> &AlgebraElement {
        &self.0
    }

    pub fn into_element(self) -> AlgebraElement {
        self.0
    }

    pub fn algebra(&self) -> &Algebra {
        &self.0.algebra
    }

    pub fn blocks(&self) -> &[Block] {
        &self.0.blocks
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `⟨x, y⟩₂ = τ(xy)`.
    pub fn inner2(&self, other: &Self) -> f64 {
        self.0.inner(&other.0).re
    }

    pub fn norm2(&self) -> f64 {
        self.0.norm2()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// `a x a` for Hermitian `a`, the result symmetrized.
    pub fn sandwich(&self, middle: &HermitianElement) -> HermitianElement {
        HermitianElement::new(&(&self.0 * &middle.0) * &self.0)
    }

    /// Linear combination `Σ c_i x_i`.
    pub fn combination(algebra: &Algebra, terms: &[(f64, &HermitianElement)]) -> Self {
        let mut acc = AlgebraElement::zeros(algebra);
        for (c, x) in terms {
            for (a, b) in acc.blocks.iter_mut().zip(&x.0.blocks) {
                *a += b * C64::new(*c, 0.0);
            }
        }
        Self(acc)
    }

    /// `x + s·y`.
    pub fn axpy(&self, s: f64, y: &HermitianElement) -> Self {
        Self(self.0.zip_blocks(&y.0, |a, b| a + b * C64::new(s, 0.0)))
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::compute(self)
    }

    /// `e^x` by spectral calculus.
    pub fn exp(&self) -> Result<HermitianElement> {
        fun_hermitian(self, f64::exp)
    }

    /// Maximal deviation from self-adjointness, `max |b − b*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.0
            .blocks
            .iter()
            .map(|b| (b - b.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm())))
            .fold(0.0, f64::max)
    }
}

impl<'a> Add<&'a HermitianElement> for &'a HermitianElement {
    type Output = HermitianElement;
    fn add(self, rhs: &HermitianElement) -> HermitianElement {
        HermitianElement(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a HermitianElement> for &'a HermitianElement {
    type Output = HermitianElement;
    fn sub(self, rhs: &HermitianElement) -> HermitianElement {
        HermitianElement(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a HermitianElement> for &'a HermitianElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &HermitianElement) -> AlgebraElement {
        &self.0 * &rhs.0
    }
}

impl Neg for &HermitianElement {
    type Output = HermitianElement;
    fn neg(self) -> HermitianElement {
        HermitianElement(-&self.0)
    }
}

/// A positive definite element with a certified spectral floor.
///
/// The spectral decomposition computed during certification is kept, so
/// square roots, inverses and logarithms do not re-run the eigensolver.
#[derive(Clone)]
pub struct PositiveElement {
    value: HermitianElement,
    spectral_floor: f64,
    spectrum: Arc<SpectralDecomposition>,
}

impl fmt::Debug for PositiveElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PositiveElement")
            .field("value", &self.value)
            .field("spectral_floor", &self.spectral_floor)
            .finish()
    }
}

impl PositiveElement {
    /// Accepts `x` iff its smallest eigenvalue is at least `floor` (and
    /// strictly positive).
    pub fn certify(x: HermitianElement, floor: f64) -> Result<Self> {
        let spectrum = x.eig()?;
        let min = spectrum.min_eigenvalue();
        if min >= floor && min > 0.0 {
            Ok(Self {
                value: x,
                spectral_floor: min,
                spectrum: Arc::new(spectrum),
            })
        } else {
            Err(Error::NotPositive { min_eigenvalue: min })
        }
    }

    /// Certification with only strict positivity required; used for points
    /// produced by geometric operations.
    pub fn new(x: HermitianElement) -> Result<Self> {
        Self::certify(x, f64::MIN_POSITIVE)
    }

    /// `e^x`, reusing the eigenbasis of `x`.
    pub fn exp(x: &HermitianElement) -> Result<Self> {
        let s = x.eig()?;
        Self::from_spectrum(s.map(f64::exp))
    }

    pub fn identity(algebra: &Algebra) -> Self {
        Self::exp(&HermitianElement::zeros(algebra)).expect("identity is positive")
    }

    pub(crate) fn from_spectrum(spectrum: SpectralDecomposition) -> Result<Self> {
        let min = spectrum.min_eigenvalue();
        if !(min > 0.0) || !min.is_finite() {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        Ok(Self {
            value: spectrum.reconstruct(),
            spectral_floor: min,
            spectrum: Arc::new(spectrum),
        })
    }

    pub fn value(&self) -> &HermitianElement {
        &self.value
    }

    pub fn algebra(&self) -> &Algebra {
        self.value.algebra()
    }

    pub fn spectral_floor(&self) -> f64 {
        self.spectral_floor
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn powf(&self, t: f64) -> HermitianElement {
        self.spectrum.apply(|l| l.powf(t))
    }

    /// `a^t` as a positive element.
    pub fn pow_positive(&self, t: f64) -> Result<PositiveElement> {
        Self::from_spectrum(self.spectrum.map(|l| l.powf(t)))
    }

    pub fn sqrt(&self) -> HermitianElement {
        self.spectrum.apply(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> HermitianElement {
        self.spectrum.apply(|l| 1.0 / l.sqrt())
    }

    pub fn inverse(&self) -> HermitianElement {
        self.spectrum.apply(|l| 1.0 / l)
    }

    pub fn inverse_positive(&self) -> PositiveElement {
        Self::from_spectrum(self.spectrum.map(|l| 1.0 / l)).expect("inverse of positive is positive")
    }

    pub fn ln(&self) -> HermitianElement {
        self.spectrum.apply(f64::ln)
    }
}

impl PartialEq for PositiveElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

/// Returns the certified positive element iff the minimum eigenvalue of `x`
/// is at least `floor`.
pub fn is_positive(x: &HermitianElement, floor: f64) -> Option<PositiveElement> {
    PositiveElement::certify(x.clone(), floor).ok()
}

/// Weighted normalized block trace.
pub fn trace(a: &AlgebraElement) -> C64 {
    a.trace()
}

/// `⟨x, y⟩₂ = τ(xy)` with an algebra compatibility check.
pub fn inner2(x: &HermitianElement, y: &HermitianElement) -> Result<f64> {
    ensure_same(x.algebra(), y.algebra())?;
    Ok(x.inner2(y))
}

/// Matrix unit `E_{ij}` (0-based) inside algebra block `block`.
pub fn matrix_unit(algebra: &Algebra, block: usize, i: usize, j: usize) -> AlgebraElement {
    let mut e = AlgebraElement::zeros(algebra);
    e.blocks[block][(i, j)] = C64::new(1.0, 0.0);
    e
}

/// Pauli matrices in `M₂`.
pub mod pauli {
    use super::*;

    fn build(entries: [[C64; 2]; 2]) -> HermitianElement {
        let alg = TracialAlgebra::matrix(2);
        let b = Block::from_fn(2, 2, |i, j| entries[i][j]);
        HermitianElement::from_blocks(&alg, vec![b]).expect("2x2 block")
    }

    pub fn sigma_x() -> HermitianElement {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        build([[o, l], [l, o]])
    }

    pub fn sigma_y() -> HermitianElement {
        let o = C64::new(0.0, 0.0);
        build([[o, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), o]])
    }

    pub fn sigma_z() -> HermitianElement {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        build([[l, o], [o, -l]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_block() -> Algebra {
        TracialAlgebra::new(vec![
            BlockSpec { dim: 1, weight: 0.5 },
            BlockSpec { dim: 2, weight: 0.5 },
        ])
        .unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(TracialAlgebra::new(vec![BlockSpec { dim: 2, weight: 0.7 }]).is_err());
        assert!(TracialAlgebra::new(vec![
            BlockSpec { dim: 2, weight: 1.5 },
            BlockSpec { dim: 1, weight: -0.5 }
        ])
        .is_err());
        assert!(TracialAlgebra::new(vec![]).is_err());
        assert!(TracialAlgebra::new(vec![BlockSpec { dim: 0, weight: 1.0 }]).is_err());
    }

    #[test]
    fn trace_examples() {
        let m2 = TracialAlgebra::matrix(2);
        assert_abs_diff_eq!(AlgebraElement::identity(&m2).trace().re, 1.0);
        let d = HermitianElement::diagonal(&m2, &[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(d.trace(), 1.0);

        let alg = two_block();
        let e = HermitianElement::diagonal(&alg, &[3.0, 1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(e.trace(), 2.0);
        assert_abs_diff_eq!(AlgebraElement::identity(&alg).trace().re, 1.0);
    }

    #[test]
    fn inner2_examples() {
        let m2 = TracialAlgebra::matrix(2);
        let x = HermitianElement::diagonal(&m2, &[2.0, -2.0]).unwrap();
        assert_abs_diff_eq!(x.inner2(&x), 4.0);
        assert_eq!(x.inner2(&HermitianElement::zeros(&m2)), 0.0);
        let other = TracialAlgebra::matrix(3);
        assert!(matches!(
            inner2(&x, &HermitianElement::zeros(&other)),
            Err(Error::AlgebraMismatch)
        ));
    }

    #[test]
    fn symmetrizes_on_construction() {
        let m2 = TracialAlgebra::matrix(2);
        let b = Block::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.3),
                C64::new(2.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(4.0, 0.0),
            ],
        );
        let h = HermitianElement::from_blocks(&m2, vec![b]).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        assert_eq!(h.blocks()[0][(0, 1)], C64::new(1.0, 0.5));
        assert_eq!(h.blocks()[0][(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn shape_checked() {
        let m2 = TracialAlgebra::matrix(2);
        assert!(AlgebraElement::from_blocks(&m2, vec![Block::zeros(3, 3)]).is_err());
        assert!(AlgebraElement::from_blocks(&m2, vec![]).is_err());
    }

    #[test]
    fn is_positive_examples() {
        let m2 = TracialAlgebra::matrix(2);
        let id = is_positive(&HermitianElement::identity(&m2), 1e-12).unwrap();
        assert_abs_diff_eq!(id.spectral_floor(), 1.0, epsilon = 1e-15);
        let indefinite = HermitianElement::diagonal(&m2, &[1.0, -1.0]).unwrap();
        assert!(is_positive(&indefinite, 1e-12).is_none());
    }

    #[test]
    fn inverse_of_singular_fails() {
        let m2 = TracialAlgebra::matrix(2);
        let s = HermitianElement::diagonal(&m2, &[1.0, 0.0]).unwrap();
        assert!(matches!(s.as_element().inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn proportional_weights_sum_to_one() {
        let alg = TracialAlgebra::proportional(&[1, 2, 3]).unwrap();
        let total: f64 = alg.blocks().iter().map(|b| b.weight).sum();
        assert_eq!(total, 1.0);
        assert_eq!(alg.hermitian_dim(), 14);
    }

    #[test]
    fn pauli_products() {
        let (x, y, z) = (pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z());
        // σx σy = i σz
        let lhs = &x * &y;
        let rhs = z.as_element().scale_complex(C64::new(0.0, 1.0));
        assert!((&lhs - &rhs).norm2() < 1e-15);
        assert_abs_diff_eq!(x.inner2(&z), 0.0);
        assert_abs_diff_eq!(x.inner2(&x), 1.0);
    }
}
