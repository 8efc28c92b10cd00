use frharm::gauge::{measure_gauge, GaugeKind, GaugeOptions};
use frharm::grid::{Grid, GridField};
use frharm::solver::{solve_dirichlet, solve_signorini, LaOperator, SolverOptions};
use frharm::weight::WeightParam;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data(grid: &Grid, c: &[f64]) -> GridField {
    GridField::box_dirichlet(grid.clone(), |x, y| {
        c[0] + c[1] * x[0] + c[2] * (x[0] * x[0] - y * y) + c[3] * (3.0 * x[0]).sin() + c[4] * y * y
    })
}

fn thin_nodes(g: &Grid) -> Vec<usize> {
    (0..g.thin_len()).map(|t| g.index(&g.thin_multi(t), 0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn dirichlet_minimizes_energy(a in -0.6f64..0.6, c in prop::collection::vec(-1.0f64..1.0, 5), seed in any::<u64>()) {
        let w = WeightParam::from_a(1, a).unwrap();
        let grid = Grid::box_grid(1, 1.0, 1.0, 32).unwrap();
        let (u, _) = solve_dirichlet(&data(&grid, &c), &w, &SolverOptions::default()).unwrap();
        let op = LaOperator::new(&grid, &w).unwrap();
        let e0 = op.energy(&u.values, None);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let eps = rng.gen_range(1e-4..1e-1);
            let v: Vec<f64> = u.values.iter().zip(&u.fixed).map(|(x, &f)| if f { *x } else { x + eps * rng.gen_range(-1.0..1.0) }).collect();
            prop_assert!(op.energy(&v, None) >= e0 - 1e-12 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn signorini_minimizes_over_feasible_set(a in -0.6f64..0.6, c in prop::collection::vec(-1.0f64..1.0, 5), seed in any::<u64>()) {
        let w = WeightParam::from_a(1, a).unwrap();
        let grid = Grid::box_grid(1, 1.0, 1.0, 32).unwrap();
        let (u, rep) = solve_signorini(&data(&grid, &c), &w, &SolverOptions::default()).unwrap();
        prop_assert!(rep.complementarity_residual <= 1e-8);
        let thin = thin_nodes(&grid);
        for &k in &thin {
            if !u.fixed[k] {
                prop_assert!(u.values[k] >= -1e-12);
            }
        }
        let op = LaOperator::new(&grid, &w).unwrap();
        let e0 = op.energy(&u.values, None);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let is_thin: Vec<bool> = (0..grid.len()).map(|k| grid.decompose(k).1 == 0).collect();
        for _ in 0..50 {
            let eps = rng.gen_range(1e-4..1e-1);
            let v: Vec<f64> = (0..grid.len()).map(|k| {
                let x = u.values[k];
                if u.fixed[k] {
                    x
                } else {
                    let t = x + eps * rng.gen_range(-1.0..1.0);
                    if is_thin[k] { t.max(0.0) } else { t }
                }
            }).collect();
            prop_assert!(op.energy(&v, None) >= e0 - 1e-12 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn dirichlet_maximum_principle(a in -0.6f64..0.6, c in prop::collection::vec(-1.0f64..1.0, 5)) {
        let w = WeightParam::from_a(1, a).unwrap();
        let grid = Grid::box_grid(1, 1.0, 1.0, 32).unwrap();
        let d = data(&grid, &c);
        let (u, _) = solve_dirichlet(&d, &w, &SolverOptions::default()).unwrap();
        let bd: Vec<f64> = d.values.iter().zip(&d.fixed).filter(|(_, &f)| f).map(|(v, _)| *v).collect();
        let lo = bd.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = bd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in &u.values {
            prop_assert!(*v >= lo - 1e-9 && *v <= hi + 1e-9);
        }
    }
}

#[test]
fn signorini_lies_above_dirichlet() {
    let w = WeightParam::from_a(1, -0.3).unwrap();
    let grid = Grid::box_grid(1, 1.0, 1.0, 64).unwrap();
    let d = data(&grid, &[0.1, 1.0, 0.2, 0.0, 0.3]);
    let (u, _) = solve_dirichlet(&d, &w, &SolverOptions::default()).unwrap();
    let (v, _) = solve_signorini(&d, &w, &SolverOptions::default()).unwrap();
    for (p, q) in u.values.iter().zip(&v.values) {
        assert!(q >= &(p - 1e-9));
    }
}

#[test]
fn constrained_gauge_below_unconstrained() {
    let w = WeightParam::from_s(1, 0.7).unwrap();
    let grid = Grid::box_grid(1, 2.0, 2.0, 128).unwrap();
    let d = GridField::box_dirichlet(grid.clone(), |x, y| 0.2 + 0.5 * x[0] + 0.6 * y * y);
    let (u, _) = solve_signorini(&d, &w, &SolverOptions::default()).unwrap();
    let centers = vec![vec![-0.3], vec![0.2]];
    let radii = vec![0.3, 0.4, 0.5];
    let opts = GaugeOptions::default();
    let free = measure_gauge(&u, &centers, &radii, &w, GaugeKind::Harmonic, &opts).unwrap();
    let cons = measure_gauge(&u, &centers, &radii, &w, GaugeKind::Signorini, &opts).unwrap();
    for (p, q) in free.points.iter().zip(&cons.points) {
        assert_eq!((p.center, p.r), (q.center, q.r));
        assert!(q.omega <= p.omega + 5e-3, "{q:?} vs {p:?}");
        assert!(q.omega >= -5e-3 && p.omega >= -5e-3);
    }
    // u is its own constrained minimizer
    assert!(cons.max_omega() <= 5e-3);
}
