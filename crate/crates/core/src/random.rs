//! Seeded random elements for tests and verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{Algebra, AlgebraElement, Block, HermitianElement, PositiveElement, C64};

/// Default bound on `‖x‖_∞` for random positive points `e^x`, so their
/// condition numbers stay below `e⁴`.
pub const DEFAULT_POINT_RADIUS: f64 = 2.0;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    // E|z|² = 1.
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Entries i.i.d. standard complex Gaussian, symmetrized, times `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(algebra: &Algebra, scale: f64, rng: &mut R) -> HermitianElement {
    let blocks = algebra
        .blocks()
        .iter()
        .map(|b| Block::from_fn(b.dim, b.dim, |_, _| complex_gaussian(rng)))
        .collect();
    let x = AlgebraElement::from_blocks(algebra, blocks).expect("shapes from algebra");
    HermitianElement::new(x).scale(scale)
}

/// Random direction rescaled to `‖x‖₂ = norm`.
pub fn random_hermitian_with_norm<R: Rng + ?Sized>(algebra: &Algebra, norm: f64, rng: &mut R) -> HermitianElement {
    let x = random_hermitian(algebra, 1.0, rng);
    let n = x.norm2();
    if n == 0.0 {
        return x;
    }
    x.scale(norm / n)
}

/// Random Hermitian with `‖x‖₂` uniform in `(0, radius]`.
pub fn random_hermitian_in_ball<R: Rng + ?Sized>(algebra: &Algebra, radius: f64, rng: &mut R) -> HermitianElement {
    let r = radius * (1.0 - rng.random::<f64>());
    random_hermitian_with_norm(algebra, r, rng)
}

/// Random Hermitian with operator norm `‖x‖_∞` uniform in `(0, radius]`.
pub fn random_hermitian_in_op_ball<R: Rng + ?Sized>(algebra: &Algebra, radius: f64, rng: &mut R) -> HermitianElement {
    let r = radius * (1.0 - rng.random::<f64>());
    let x = random_hermitian(algebra, 1.0, rng);
    let op = x
        .eig()
        .expect("Hermitian eigensolver")
        .blocks()
        .iter()
        .flat_map(|b| b.eigenvalues.iter())
        .fold(0.0f64, |a, l| a.max(l.abs()));
    if op == 0.0 {
        return x;
    }
    x.scale(r / op)
}

/// `e^x` with `‖x‖_∞ ≤ radius`.
pub fn random_positive<R: Rng + ?Sized>(algebra: &Algebra, radius: f64, rng: &mut R) -> PositiveElement {
    let x = random_hermitian_in_op_ball(algebra, radius, rng);
    PositiveElement::exp(&x).expect("exponential of a bounded Hermitian is positive")
}

/// `e^{ih}` for a random Hermitian `h`.
pub fn random_unitary<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> AlgebraElement {
    let h = random_hermitian_with_norm(algebra, 2.0, rng);
    exp_i(&h)
}

/// `e^{ih}` for Hermitian `h`, computed in the eigenbasis of `h`.
pub fn exp_i(h: &HermitianElement) -> AlgebraElement {
    let s = h.eig().expect("Hermitian eigensolver");
    let blocks = s
        .blocks()
        .iter()
        .map(|b| {
            let u = &b.eigenvectors;
            let mut scaled = u.clone();
            for (j, &l) in b.eigenvalues.iter().enumerate() {
                let phase = C64::new(0.0, l).exp();
                for i in 0..u.nrows() {
                    scaled[(i, j)] *= phase;
                }
            }
            scaled * u.adjoint()
        })
        .collect();
    AlgebraElement::from_blocks(h.algebra(), blocks).expect("shapes from algebra")
}

/// `e^x u` with `‖x‖_∞ ≤ 1` and `u` unitary; invertible with condition
/// number bounded by `e^{2‖x‖_∞}`.
pub fn random_invertible<R: Rng + ?Sized>(algebra: &Algebra, rng: &mut R) -> AlgebraElement {
    let p = random_positive(algebra, 1.0, rng);
    let u = random_unitary(algebra, rng);
    p.value().as_element() * &u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::TracialAlgebra;

    #[test]
    fn zero_scale_gives_zero() {
        let alg = TracialAlgebra::matrix(3);
        let x = random_hermitian(&alg, 0.0, &mut rng(1));
        assert_eq!(x, HermitianElement::zeros(&alg));
    }

    #[test]
    fn deterministic_per_seed() {
        let alg = TracialAlgebra::proportional(&[2, 3]).unwrap();
        let a = random_hermitian(&alg, 1.0, &mut rng(99));
        let b = random_hermitian(&alg, 1.0, &mut rng(99));
        assert_eq!(a, b);
        let c = random_hermitian(&alg, 1.0, &mut rng(100));
        assert_ne!(a, c);
    }

    #[test]
    fn construction_is_hermitian_with_finite_spectrum() {
        let alg = TracialAlgebra::matrix(6);
        let x = random_hermitian(&alg, 1.0, &mut rng(5));
        assert_eq!(x.hermiticity_defect(), 0.0);
        let s = x.eig().unwrap();
        assert!(s.eigenvalues().all(f64::is_finite));
    }

    #[test]
    fn unitary_and_invertible() {
        let alg = TracialAlgebra::proportional(&[1, 3]).unwrap();
        let mut r = rng(8);
        let u = random_unitary(&alg, &mut r);
        assert!(u.unitarity_defect() < 1e-13);
        let g = random_invertible(&alg, &mut r);
        assert!(g.inverse().is_ok());
    }

    #[test]
    fn exp_of_random_is_positive() {
        let alg = TracialAlgebra::matrix(4);
        let mut r = rng(12);
        for _ in 0..10 {
            let x = random_hermitian(&alg, 1.0, &mut r);
            let e = x.exp().unwrap();
            assert!(crate::algebra::is_positive(&e, 1e-12).is_some());
        }
    }
}
