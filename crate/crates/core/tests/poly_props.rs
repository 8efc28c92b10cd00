use frharm::poly::{even_monomials, harmonic_homogeneous_space, poly_dirichlet_solve, reduce_la, HarmonicBasis, WeightedPoly};
use frharm::weight::{ball_moment_ratio, sphere_moment, MonomialExponent, WeightParam};
use num::{BigInt, BigRational, Zero};
use proptest::prelude::*;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn weight(n: usize, k: usize) -> WeightParam {
    let (p, d) = [(-1, 2), (0, 1), (1, 2)][k];
    WeightParam::from_a_ratio(n, p, d).unwrap()
}

/// Random even polynomial with small rational coefficients.
fn even_poly(n: usize, deg: u32) -> impl Strategy<Value = WeightedPoly> {
    let monos = even_monomials(n, deg);
    let len = monos.len();
    prop::collection::vec((-4i64..=4, 1i64..=3), len).prop_map(move |cs| {
        WeightedPoly::from_terms(n, monos.iter().cloned().zip(cs.iter().map(|&(p, d)| q(p, d))))
    })
}

fn eval_exact(p: &WeightedPoly, x: &[BigRational], y: &BigRational) -> BigRational {
    p.eval_exact(x, y)
}

/// Mean of `p` over `B_1`, exactly, via the ball moment ratios.
fn ball_mean(p: &WeightedPoly, w: &WeightParam) -> BigRational {
    let vol = ball_moment_ratio(w, &MonomialExponent::constant(w.n()));
    let mut acc = BigRational::zero();
    for (m, c) in p.terms() {
        acc += c * ball_moment_ratio(w, m);
    }
    acc / vol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dirichlet_solve_is_harmonic_and_matches_on_sphere(k in 0usize..3, (n, p) in (1usize..=3).prop_flat_map(|n| even_poly(n, 4).prop_map(move |p| (n, p)))) {
        let w = weight(n, k);
        let u = poly_dirichlet_solve(&p, &w).unwrap();
        prop_assert!(reduce_la(&u, &w).unwrap().is_zero());
        prop_assert!(p.sub(&u).divide_by_one_minus_r2().is_some());
    }

    #[test]
    fn degree_eight_in_one_dimension(k in 0usize..3, p in even_poly(1, 8)) {
        let w = weight(1, k);
        let u = poly_dirichlet_solve(&p, &w).unwrap();
        prop_assert!(reduce_la(&u, &w).unwrap().is_zero());
        prop_assert!(p.sub(&u).divide_by_one_minus_r2().is_some());
    }

    #[test]
    fn solve_is_linear(k in 0usize..3, p in even_poly(2, 4), r in even_poly(2, 4), c in -3i64..=3) {
        let w = weight(2, k);
        let lhs = poly_dirichlet_solve(&p.add(&r.scale(&q(c, 1))), &w).unwrap();
        let rhs = poly_dirichlet_solve(&p, &w).unwrap().add(&poly_dirichlet_solve(&r, &w).unwrap().scale(&q(c, 1)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn homogeneous_members_scale_exactly(k in 0usize..3, deg in 0u32..=6, lam in 1i64..=5, x in -3i64..=3, y in -3i64..=3) {
        let w = weight(2, k);
        for p in harmonic_homogeneous_space(&w, deg).unwrap() {
            let pt = [q(x, 2), q(y + 1, 3)];
            let scaled = [&pt[0] * q(lam, 2), &pt[1] * q(lam, 2)];
            let yv = q(y, 5);
            let lhs = eval_exact(&p, &scaled, &(&yv * q(lam, 2)));
            let rhs = eval_exact(&p, &pt, &yv) * num::pow(q(lam, 2), deg as usize);
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn mean_value_property_exact(k in 0usize..3, p in even_poly(1, 6), shift in -3i64..=3) {
        let w = weight(1, k);
        let u = poly_dirichlet_solve(&p, &w).unwrap();
        // mean over B_1((x0, 0)) = mean over B_1 of the translate
        let x0 = q(shift, 4);
        let moved = u.translate_thin(std::slice::from_ref(&x0));
        prop_assert_eq!(ball_mean(&moved, &w), eval_exact(&u, &[x0], &BigRational::zero()));
    }

    #[test]
    fn odd_moments_vanish(k in 0usize..3, a1 in 0u32..6, a2 in 0u32..6, b in 0u32..6) {
        let w = weight(2, k);
        let m = MonomialExponent::new(vec![a1, a2], b);
        if m.has_odd_exponent() {
            prop_assert_eq!(sphere_moment(&w, &m), 0.0);
        }
    }
}

#[test]
fn gram_identity_up_to_degree_eight_in_two_dimensions() {
    for k in 0..3 {
        let basis = HarmonicBasis::new(&weight(2, k), 8).unwrap();
        let exact = basis.exact_gram();
        let gram = basis.gram();
        for (i, p) in basis.members.iter().enumerate() {
            for (j, r) in basis.members.iter().enumerate() {
                if p.degree != r.degree {
                    assert!(exact[i][j].is_zero());
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - target).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn harmonic_data_is_returned_unchanged() {
    let w = weight(2, 0);
    for deg in 0..=6 {
        for p in harmonic_homogeneous_space(&w, deg).unwrap() {
            assert_eq!(poly_dirichlet_solve(&p, &w).unwrap(), p);
        }
    }
    let one = WeightedPoly::one(2);
    assert_eq!(poly_dirichlet_solve(&one, &w).unwrap(), one);
}
