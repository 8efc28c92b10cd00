use super::{Check, E1Config, E2Config, RunContext};
use crate::grid::{Grid, GridField};
use crate::metrics::{fit_growth, monotonicity_check, EnergyMode, Functional, RadiiSpec};
use crate::solver::{solve_dirichlet, solve_signorini, SolverOptions};
use crate::weight::WeightParam;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const E1_TERMS: usize = 10;

fn e1_data(c: &[f64], x: f64, y: f64) -> f64 {
    let y2 = y * y;
    c[0] + c[1] * x
        + c[2] * x * x
        + c[3] * y2
        + c[4] * x * x * x
        + c[5] * x * y2
        + c[6] * (1.5 * x).sin()
        + c[7] * (2.0 * x).cos() * y2
        + c[8] * x.powi(4)
        + c[9] * y2 * y2
}

/// Coefficients of the random even boundary data, one row per data set.
pub(crate) fn e1_coefficients(seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..E1_TERMS).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

#[derive(Serialize)]
struct SlopeRow {
    cells: usize,
    a: f64,
    dataset: usize,
    functional: &'static str,
    slope: f64,
    target: f64,
    residual: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    cells: usize,
    a: f64,
    dataset: usize,
    functional: &'static str,
    r: f64,
    value: f64,
}

pub(super) fn run_e1(cfg: &E1Config, opts: &SolverOptions, ctx: &mut RunContext) {
    let coeffs = e1_coefficients(ctx.seed, cfg.datasets);
    let mut slopes = Vec::new();
    let mut profiles = Vec::new();
    for &cells in &cfg.cells {
        let Some(grid) = ctx.attempt(Some(3), &format!("grid {cells}"), Grid::box_grid(1, cfg.half_width, cfg.height, cells)) else {
            continue;
        };
        for &a in &cfg.a {
            let Some(w) = ctx.attempt(Some(3), &format!("weight a={a}"), WeightParam::from_a(1, a)) else {
                continue;
            };
            let n = 1.0;
            let targets = [
                ("tangential", Functional::Energy(EnergyMode::Tangential), n + 1.0 + a),
                ("normal", Functional::Energy(EnergyMode::Normal), n + 3.0 + a),
                ("gradient_oscillation", Functional::GradientOscillation, n + a + 3.0),
            ];
            for (d, c) in coeffs.iter().enumerate() {
                let label = format!("cells={cells} a={a} data={d}");
                let data = GridField::box_dirichlet(grid.clone(), |x, y| e1_data(c, x[0], y));
                let Some((u, _)) = ctx.attempt(Some(3), &format!("solve {label}"), solve_dirichlet(&data, &w, opts)) else {
                    continue;
                };
                let spec = RadiiSpec::Geometric { count: cfg.radii };
                for (name, f, target) in targets {
                    let Some(fit) = ctx.attempt(Some(3), &format!("{name} fit {label}"), fit_growth(&u, &[cfg.center], &spec, f, &w)) else {
                        continue;
                    };
                    ctx.check(
                        Check::at_least(Some(3), format!("{name} slope, {label}"), fit.slope, target - cfg.tolerance)
                            .detail(format!("window [{:.4}, {:.4}]", fit.window.0, fit.window.1)),
                    );
                    slopes.push(SlopeRow {
                        cells,
                        a,
                        dataset: d,
                        functional: name,
                        slope: fit.slope,
                        target,
                        residual: fit.residual,
                    });
                    for (r, v) in fit.radii.iter().zip(&fit.values) {
                        profiles.push(ProfileRow {
                            cells,
                            a,
                            dataset: d,
                            functional: name,
                            r: *r,
                            value: *v,
                        });
                    }
                }
            }
        }
    }
    ctx.write_csv("datasets.csv", &coeffs.iter().enumerate().map(|(d, c)| DatasetRow::new(d, c)).collect::<Vec<_>>());
    ctx.write_csv("slopes.csv", &slopes);
    ctx.write_csv("profiles.csv", &profiles);
}

#[derive(Serialize)]
struct DatasetRow {
    dataset: usize,
    coefficients: String,
}

impl DatasetRow {
    fn new(d: usize, c: &[f64]) -> Self {
        Self {
            dataset: d,
            coefficients: c.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(";"),
        }
    }
}

/// `r^k cos(k θ)` with `θ` measured from the positive thin axis and even in `y`.
pub(crate) fn homogeneous(x: f64, y: f64, k: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    r.powf(k) * (k * y.abs().atan2(x)).cos()
}

fn contact_data(x: f64, y: f64) -> f64 {
    x + 0.1 + 0.3 * y * y
}

#[derive(Serialize)]
struct ConvergenceRow {
    cells: usize,
    max_error: f64,
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct MonotonicityRow {
    a: f64,
    data: &'static str,
    center: f64,
    functional: &'static str,
    exponent: f64,
    r: f64,
    normalized: f64,
}

pub(super) fn run_e2(cfg: &E2Config, opts: &SolverOptions, ctx: &mut RunContext) {
    let finest = *cfg.cells.last().expect("validated");
    let mut conv = Vec::new();
    let mut exact_finest = None;
    if let Some(w) = ctx.attempt(Some(4), "weight a=0", WeightParam::from_a(1, 0.0)) {
        let mut prev: Option<f64> = None;
        for &cells in &cfg.cells {
            let run = Grid::box_grid(1, 1.0, 1.0, cells).and_then(|g| {
                let data = GridField::box_dirichlet(g.clone(), |x, y| homogeneous(x[0], y, 1.5));
                let (u, _) = solve_signorini(&data, &w, opts)?;
                let exact = GridField::from_fn(g, |x, y| homogeneous(x[0], y, 1.5));
                let err = u.values.iter().zip(&exact.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                Ok((u, err))
            });
            let Some((u, err)) = ctx.attempt(Some(4), &format!("convergence solve cells={cells}"), run) else {
                continue;
            };
            let ratio = prev.map(|p| p / err);
            if let Some(q) = ratio {
                ctx.check(Check::at_least(Some(4), format!("error reduction at cells={cells}"), q, cfg.min_ratio).detail(format!("max error {err:.3e}")));
            }
            conv.push(ConvergenceRow { cells, max_error: err, ratio });
            prev = Some(err);
            if cells == finest {
                exact_finest = Some(u);
            }
        }
        if conv.len() < 3 {
            ctx.check(Check::new(Some(4), "convergence study has three levels", false).detail(format!("{} levels", conv.len())));
        }
    }

    let mut mono = Vec::new();
    for &a in &cfg.a {
        let Some(w) = ctx.attempt(Some(4), &format!("weight a={a}"), WeightParam::from_a(1, a)) else {
            continue;
        };
        let mut fields: Vec<(&'static str, GridField)> = Vec::new();
        if a == 0.0 {
            if let Some(u) = &exact_finest {
                fields.push(("homogeneous", u.clone()));
            }
        }
        let solved = Grid::box_grid(1, 1.0, 1.0, finest).and_then(|g| {
            let data = GridField::box_dirichlet(g, |x, y| contact_data(x[0], y));
            solve_signorini(&data, &w, opts)
        });
        if let Some((u, rep)) = ctx.attempt(Some(4), &format!("contact solve a={a}"), solved) {
            ctx.check(Check::at_least(None, format!("contact set nonempty, a={a}"), rep.active_set.len() as f64, 1.0));
            fields.push(("contact", u));
        }
        let n = 1.0;
        let tests = [
            ("full", Functional::Energy(EnergyMode::Full), n + 1.0 + a),
            ("tangential", Functional::Energy(EnergyMode::Tangential), n + 1.0 + a),
            ("normal", Functional::Energy(EnergyMode::Normal), n + 1.0 - a),
        ];
        let spec = RadiiSpec::Geometric { count: cfg.radii };
        for (data, u) in &fields {
            if cfg.dump_fields {
                let path = ctx.artifact(&format!("field_a{a}_{data}.bin"));
                let r = u.write_binary(&path, Some(&w));
                ctx.write("field dump", r);
            }
            for &x0 in &cfg.centers {
                for (name, f, exponent) in tests {
                    let label = format!("{name} monotonicity, a={a} data={data} center={x0}");
                    let Some(rep) = ctx.attempt(Some(4), &label, monotonicity_check(u, &[x0], &spec, exponent, f, &w)) else {
                        continue;
                    };
                    let worst = rep
                        .normalized
                        .windows(2)
                        .map(|p| p[1] / p[0])
                        .fold(f64::INFINITY, f64::min);
                    ctx.check(
                        Check::new(Some(4), label, rep.passed)
                            .detail(format!("exponent {exponent}, min step ratio {worst:.5}, slack {}", rep.slack)),
                    );
                    for (r, v) in rep.radii.iter().zip(&rep.normalized) {
                        mono.push(MonotonicityRow {
                            a,
                            data,
                            center: x0,
                            functional: name,
                            exponent,
                            r: *r,
                            normalized: *v,
                        });
                    }
                }
            }
        }
    }
    ctx.write_csv("convergence.csv", &conv);
    ctx.write_csv("monotonicity.csv", &mono);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients_are_seeded() {
        assert_eq!(e1_coefficients(5, 3), e1_coefficients(5, 3));
        assert_ne!(e1_coefficients(5, 3), e1_coefficients(6, 3));
    }

    #[test]
    fn homogeneous_vanishes_on_negative_axis() {
        assert!(homogeneous(-0.5, 0.0, 1.5).abs() < 1e-15);
        assert!((homogeneous(0.25, 0.0, 1.5) - 0.125).abs() < 1e-15);
    }
}
