//! Library routes against the independent reference computations.

use poscone::convexity::{standard_subspace, ConvexSubmanifold, SubspaceKind};
use poscone::geometry::{self, dist, geodesic, jacobi_integrate, jacobi_rhs};
use poscone::oracles::{
    dexp_quadrature, jacobi_closed_form, path_length_sampler, power_integral_quadrature, projection_bruteforce,
    t_operator_quadrature,
};
use poscone::projection;
use poscone::random::{random_hermitian, random_hermitian_in_ball, random_positive, rng};
use poscone::verify::two_block_algebra;
use poscone::{HermitianElement, TracialAlgebra};

fn rel(a: &HermitianElement, b: &HermitianElement) -> f64 {
    (a - b).norm2() / b.norm2()
}

#[test]
fn simpson_doubling_gains_eightfold_until_floor() {
    for (alg, seed) in [(TracialAlgebra::matrix(3), 1), (two_block_algebra(), 2)] {
        let mut r = rng(seed);
        let x = random_hermitian_in_ball(&alg, 2.0, &mut r);
        let y = random_hermitian_in_ball(&alg, 2.0, &mut r);
        let exact = geometry::dexp(&x, &y).unwrap();
        let errs: Vec<f64> = [4, 8, 16, 32, 64]
            .iter()
            .map(|&n| rel(&dexp_quadrature(&x, &y, n).unwrap(), &exact))
            .collect();
        for w in errs.windows(2) {
            if w[0] > 1e-12 {
                assert!(w[0] / w[1] >= 8.0, "{errs:?}");
            }
        }
    }
}

#[test]
fn quadratures_agree_with_spectral_routes() {
    let alg = TracialAlgebra::matrix(4);
    let mut r = rng(3);
    for _ in 0..10 {
        let x = random_hermitian_in_ball(&alg, 2.0, &mut r);
        let y = random_hermitian_in_ball(&alg, 2.0, &mut r);
        assert!(rel(&dexp_quadrature(&x, &y, 200).unwrap(), &geometry::dexp(&x, &y).unwrap()) <= 1e-8);
        assert!(
            rel(
                &t_operator_quadrature(&x, &y, 200).unwrap(),
                &geometry::t_operator(&x, &y).unwrap()
            ) <= 1e-8
        );
        // T_x(y) = e^{-x/2} dexp_x(y) e^{-x/2}.
        let half = x.scale(-0.5).exp().unwrap();
        let t = half.sandwich(&geometry::dexp(&x, &y).unwrap());
        assert!(rel(&t, &geometry::t_operator(&x, &y).unwrap()) <= 1e-12);
    }
}

#[test]
fn power_integral_for_commuting_inputs() {
    // a and b diagonal: the integrand is constant, a b.
    let m3 = TracialAlgebra::matrix(3);
    let a = poscone::PositiveElement::exp(&HermitianElement::diagonal(&m3, &[0.5, -1.0, 1.5]).unwrap()).unwrap();
    let b = HermitianElement::diagonal(&m3, &[2.0, 1.0, -3.0]).unwrap();
    let q = power_integral_quadrature(&a, &b, 50).unwrap();
    let expect = HermitianElement::new(a.value().as_element() * b.as_element());
    assert!(rel(&q, &expect) < 1e-13);
}

#[test]
fn sampled_geodesic_length_is_distance() {
    let alg = two_block_algebra();
    let mut r = rng(4);
    for _ in 0..5 {
        let a = random_positive(&alg, 2.0, &mut r);
        let b = random_positive(&alg, 2.0, &mut r);
        let g = geodesic(&a, &b).unwrap();
        let len = path_length_sampler(|t| g.evaluate(t), 200).unwrap();
        assert!((len - dist(&a, &b).unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn closed_form_jacobi_solves_the_equation() {
    let alg = TracialAlgebra::matrix(3);
    let mut r = rng(5);
    let x = random_hermitian(&alg, 1.0, &mut r);
    let k0 = random_hermitian(&alg, 1.0, &mut r);
    let kd = random_hermitian(&alg, 1.0, &mut r);
    let h = 1e-3;
    for t in [0.2, 0.5, 0.9] {
        let k = |s: f64| jacobi_closed_form(&x, &k0, &kd, s).unwrap();
        let second = HermitianElement::combination(&alg, &[(1.0, &k(t + h)), (-2.0, &k(t)), (1.0, &k(t - h))])
            .scale(1.0 / (h * h));
        let rhs = jacobi_rhs(&x, &k(t));
        assert!(rel(&second, &rhs) < 1e-5, "t = {t}");
    }
    let sol = jacobi_integrate(&x, &k0, &kd, 1.0, 1e-3).unwrap();
    let last = sol.k_values().last().unwrap();
    assert!(rel(last, &jacobi_closed_form(&x, &k0, &kd, 1.0).unwrap()) < 1e-9);
}

#[test]
fn projection_matches_bruteforce() {
    let cases = [
        (TracialAlgebra::matrix(2), SubspaceKind::Diagonal),
        (TracialAlgebra::matrix(4), SubspaceKind::Diagonal),
        (two_block_algebra(), SubspaceKind::Diagonal),
        (
            TracialAlgebra::matrix(3),
            SubspaceKind::SingleGenerator(random_hermitian(&TracialAlgebra::matrix(3), 1.0, &mut rng(7))),
        ),
    ];
    let mut r = rng(6);
    for (alg, kind) in cases {
        let h = standard_subspace(&alg, &kind).unwrap();
        assert!(h.dim() <= 4);
        let m = ConvexSubmanifold::certify(h.clone()).unwrap();
        for _ in 0..3 {
            let x = random_positive(&alg, 2.0, &mut r);
            let p = projection::project_default(&m, &x).unwrap();
            let q = projection_bruteforce(&h, &x, 3.0, 6).unwrap();
            assert!(dist(&p.foot, &q).unwrap() <= 1e-6);
            assert!(p.distance <= dist(&x, &q).unwrap() + 1e-9);
        }
    }
    // Single generator in a larger algebra.
    let m5 = TracialAlgebra::matrix(5);
    let h = standard_subspace(&m5, &SubspaceKind::SingleGenerator(random_hermitian(&m5, 1.0, &mut r))).unwrap();
    let m = ConvexSubmanifold::certify(h.clone()).unwrap();
    let x = random_positive(&m5, 2.0, &mut r);
    let p = projection::project_default(&m, &x).unwrap();
    assert!(dist(&p.foot, &projection_bruteforce(&h, &x, 3.0, 6).unwrap()).unwrap() <= 1e-6);
}
