//! Cyclic complex Jacobi eigensolver for Hermitian blocks.

use nalgebra::DMatrix;

use super::{Algebra, AlgebraElement, Block, HermitianElement, C64};
use crate::error::{Error, Result};

/// Sweep cap; quadratic convergence needs far fewer on well-posed input.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Off-diagonal Frobenius norm target, relative to `‖x‖_F`.
const JACOBI_REL_TOL: f64 = 1e-14;

/// Eigenvalues (ascending) and unitary eigenvectors (columns) of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Block,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    algebra: Algebra,
    blocks: Vec<BlockSpectrum>,
}

fn off_diagonal_norm(m: &Block) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_block(a: &Block) -> Result<BlockSpectrum> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = Block::identity(n, n);
    let tol = JACOBI_REL_TOL * a.norm();

    let mut sweep = 0;
    while off_diagonal_norm(&m) > tol {
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNonConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
            });
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Strip the phase so the 2x2 problem is real symmetric.
                let phase_conj = (apq / mag).conj();
                let zeta = (aqq - app) / (2.0 * mag);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] acting on (p, q).
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = phase_conj * (-s);
                let gqq = phase_conj * c;

                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = mkp * gpp + mkq * gqp;
                    m[(k, q)] = mkp * gpq + mkq * gqq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = gpp.conj() * mpk + gqp.conj() * mqk;
                    m[(q, k)] = gpq.conj() * mpk + gqq.conj() * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(app - t * mag, 0.0);
                m[(q, q)] = C64::new(aqq + t * mag, 0.0);
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    Ok(sorted(values, v))
}

fn sorted(values: Vec<f64>, vectors: Block) -> BlockSpectrum {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    BlockSpectrum {
        eigenvalues,
        eigenvectors,
    }
}

impl SpectralDecomposition {
    pub fn compute(x: &HermitianElement) -> Result<Self> {
        let blocks = x.blocks().iter().map(jacobi_block).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            algebra: x.algebra().clone(),
            blocks,
        })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[BlockSpectrum] {
        &self.blocks
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.eigenvalues.iter().copied())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same eigenvectors, eigenvalues mapped through `f` and re-sorted.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| sorted(b.eigenvalues.iter().map(|&l| f(l)).collect(), b.eigenvectors.clone()))
            .collect();
        Self {
            algebra: self.algebra.clone(),
            blocks,
        }
    }

    /// `U f(Λ) U*`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianElement {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let u = &b.eigenvectors;
                let mut scaled = u.clone();
                for (j, &l) in b.eigenvalues.iter().enumerate() {
                    let fl = C64::new(f(l), 0.0);
                    for i in 0..u.nrows() {
                        scaled[(i, j)] *= fl;
                    }
                }
                scaled * u.adjoint()
            })
            .collect();
        HermitianElement::from_element_unchecked(
            AlgebraElement::from_blocks(&self.algebra, blocks).expect("shapes from decomposition"),
        )
    }

    pub fn reconstruct(&self) -> HermitianElement {
        self.apply(|l| l)
    }

    /// Blocks of `U* y U`.
    pub fn to_eigenbasis(&self, y: &AlgebraElement) -> Vec<Block> {
        self.blocks
            .iter()
            .zip(y.blocks())
            .map(|(b, yb)| b.eigenvectors.adjoint() * yb * &b.eigenvectors)
            .collect()
    }

    /// `U b U*` blockwise.
    pub fn from_eigenbasis(&self, blocks: Vec<Block>) -> AlgebraElement {
        let out = self
            .blocks
            .iter()
            .zip(blocks)
            .map(|(b, m)| &b.eigenvectors * m * b.eigenvectors.adjoint())
            .collect();
        AlgebraElement::from_blocks(&self.algebra, out).expect("shapes from decomposition")
    }

    /// `max_i ‖U_i U_i* − 1‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let n = b.eigenvectors.nrows();
                (&b.eigenvectors * b.eigenvectors.adjoint() - Block::identity(n, n)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `‖UΛU* − x‖₂`.
    pub fn reconstruction_residual(&self, x: &HermitianElement) -> f64 {
        (&self.reconstruct() - x).norm2()
    }
}
