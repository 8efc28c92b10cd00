use frharm::extension::{poisson_constant, poisson_extend, pv_integral, QuadSpec, ThinFunction};
use frharm::grid::{Grid, GridField};
use frharm::metrics::{fit_growth, hl_iterate, EnergyMode, Functional, HLParams, RadiiSpec};
use frharm::poly::HarmonicBasis;
use frharm::trace::{chain_check, estimate_campanato, holder_norm_estimate, trace_by_averages, Ladder};
use frharm::weight::{ball_moment, MonomialExponent, WeightParam};
use proptest::prelude::*;
use std::f64::consts::{PI, SQRT_2};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ball_moments_scale(a in -0.9f64..0.9, al in 0u32..4, b in 0u32..4, r in 0.1f64..5.0) {
        let w = WeightParam::from_a(1, a).unwrap();
        let m = MonomialExponent::new(vec![2 * al], 2 * b);
        let d = w.homogeneity() + (2 * al + 2 * b) as f64;
        let lhs = ball_moment(&w, &m, r);
        let rhs = r.powf(d) * ball_moment(&w, &m, 1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn iteration_bound_dominates(gamma in 1.0f64..3.0, gap in 0.1f64..0.9, extra in 0.0f64..2.0, c in 0.01f64..2.0, b in 0.0f64..1.0) {
        let beta = gamma * gap;
        let p = HLParams { a_hl: 1.0, gamma, beta, b_hl: b, r0: 1.0 };
        let phi: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let r = 2f64.powi(i - 11);
                (r, c * r.powf(gamma + extra) + b * r.powf(beta))
            })
            .collect();
        let rep = hl_iterate(&phi, &p).unwrap();
        prop_assert!(rep.conclusion_holds);
        for (&(_, f), &(_, bound)) in phi.iter().zip(&rep.bound_curve) {
            prop_assert!(bound >= f * (1.0 - 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn poisson_extension_obeys_maximum_principle(s in 0.2f64..0.9, amp in 0.1f64..2.0, x in -1.5f64..1.5, y in 0.05f64..3.0) {
        let w = WeightParam::from_s(1, s).unwrap();
        let spec = QuadSpec::default();
        let cp = poisson_constant(&w, &spec).unwrap();
        let u = ThinFunction::bump(vec![0.2], 0.8, amp);
        let v = poisson_extend(&u, &w, cp, &[(vec![x], y)], &spec).unwrap()[0];
        prop_assert!(v >= -1e-12 && v <= amp * (1.0 + 1e-10), "{v}");
    }

    #[test]
    fn pv_integral_scales(s in 0.2f64..0.9, lam in 0.5f64..2.0) {
        let w = WeightParam::from_s(1, s).unwrap();
        let spec = QuadSpec::default();
        let u = ThinFunction::gaussian(vec![0.0], 0.8, 1.0);
        let ul = ThinFunction::gaussian(vec![0.0], 0.8 / lam, 1.0);
        let p = pv_integral(&u, &w, &[0.3 / lam], &spec).unwrap();
        let q = pv_integral(&ul, &w, &[0.3 / lam / lam], &spec).unwrap();
        let target = lam.powf(2.0 * s) * p;
        prop_assert!((q - target).abs() <= 1e-6 * target.abs(), "{q} vs {target}");
    }
}

/// Flux-form five-point `L_a` applied to `v` around `(x, y)` with spacing `h`.
fn discrete_la(v: &dyn Fn(f64, f64) -> f64, a: f64, x: f64, y: f64, h: f64) -> f64 {
    let c = v(x, y);
    let up = (y + h / 2.0).powf(a) * (v(x, y + h) - c);
    let dn = (y - h / 2.0).powf(a) * (c - v(x, y - h));
    let lat = y.powf(a) * (v(x + h, y) - 2.0 * c + v(x - h, y));
    (up - dn + lat) / (h * h)
}

#[test]
fn extension_solves_the_equation_to_second_order() {
    for s in [0.3, 0.7] {
        let w = WeightParam::from_s(1, s).unwrap();
        let spec = QuadSpec::default();
        let cp = poisson_constant(&w, &spec).unwrap();
        let u = ThinFunction::gaussian(vec![0.0], 0.7, 1.0);
        let ext = |x: f64, y: f64| poisson_extend(&u, &w, cp, &[(vec![x], y)], &spec).unwrap()[0];
        let res: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| discrete_la(&ext, w.a(), 0.2, 0.5, h).abs())
            .collect();
        assert!(res[0] / res[1] >= 3.0 && res[1] / res[2] >= 3.0, "s = {s}: {res:?}");
    }
}

#[test]
fn homogeneous_harmonics_grow_at_their_degree() {
    for a in [-0.5, 0.0, 0.5] {
        let w = WeightParam::from_a(1, a).unwrap();
        let basis = HarmonicBasis::new(&w, 3).unwrap();
        let grid = Grid::box_grid(1, 1.0, 1.0, 256).unwrap();
        for m in basis.members.iter().filter(|m| m.degree >= 1) {
            let f = GridField::from_fn(grid.clone(), |x, y| m.poly.eval(x, y));
            let fit = fit_growth(&f, &[0.0], &RadiiSpec::Geometric { count: 8 }, Functional::Energy(EnergyMode::Full), &w).unwrap();
            let expect = 2.0 + a + 2.0 * (m.degree as f64 - 1.0);
            assert!((fit.slope - expect).abs() <= 1e-2, "a = {a}, degree {}: {} vs {expect}", m.degree, fit.slope);
        }
    }
}

fn smooth(grid: &Grid) -> GridField {
    GridField::from_fn(grid.clone(), |x, y| x[0].sin() + y * y)
}

#[test]
fn chain_inequality_holds_for_smooth_fields() {
    let w = WeightParam::from_s(1, 0.4).unwrap();
    let grid = Grid::box_grid(1, 2.0, 2.0, 256).unwrap();
    let centers = vec![vec![-0.3], vec![0.0], vec![0.35]];
    let ladder = Ladder { base: SQRT_2, r0: None };
    for f in [smooth(&grid), GridField::from_fn(grid.clone(), |x, y| (x[0] * PI).cos() * (1.0 + y))] {
        let prof = estimate_campanato(&f, &centers, &ladder, 0.5, &w).unwrap();
        assert!(chain_check(&prof).holds);
    }
}

#[test]
fn trace_agrees_across_ladder_bases() {
    let w = WeightParam::from_s(1, 0.6).unwrap();
    let grid = Grid::box_grid(1, 2.0, 2.0, 1024).unwrap();
    let f = smooth(&grid);
    let centers = vec![vec![-0.2], vec![0.3]];
    let p2 = estimate_campanato(&f, &centers, &Ladder { base: 2.0, r0: None }, 0.5, &w).unwrap();
    let p3 = estimate_campanato(&f, &centers, &Ladder { base: 3.0, r0: None }, 0.5, &w).unwrap();
    for (c, x) in centers.iter().enumerate() {
        let t2 = trace_by_averages(&p2, c).unwrap();
        let t3 = trace_by_averages(&p3, c).unwrap();
        assert!((t2.value - t3.value).abs() <= t2.certificate.max(t3.certificate));
        assert!((t2.value - x[0].sin()).abs() <= 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn holder_seminorm_ignores_dyadic_constants(c in prop::collection::vec(-1.0f64..1.0, 3), k in -16i32..16) {
        let w = WeightParam::from_s(1, 0.5).unwrap();
        let grid = Grid::box_grid(1, 2.0, 2.0, 256).unwrap();
        let q = (1u64 << 30) as f64;
        let f = GridField::from_fn(grid.clone(), |x, y| {
            let v = c[0] * x[0] + c[1] * (2.0 * x[0]).sin() + c[2] * y * y;
            (v * q).round() / q
        });
        let shift = k as f64 / 8.0;
        let g = GridField { values: f.values.iter().map(|v| v + shift).collect(), ..f.clone() };
        let centers = vec![vec![-0.4], vec![0.0], vec![0.4]];
        let ladder = Ladder { base: SQRT_2, r0: None };
        let a = holder_norm_estimate(&estimate_campanato(&f, &centers, &ladder, 0.5, &w).unwrap()).unwrap();
        let b = holder_norm_estimate(&estimate_campanato(&g, &centers, &ladder, 0.5, &w).unwrap()).unwrap();
        prop_assert_eq!(a.seminorm, b.seminorm);
        prop_assert_eq!(a.within_bounds, b.within_bounds);
    }
}
