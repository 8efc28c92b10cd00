use super::{Check, E3Config, RunContext};
use crate::error::Result;
use crate::extension::{
    calibrate_constants, frac_normal_derivative_of, poisson_constant, poisson_extend, pv_fractional_laplacian, QuadSpec,
    Smoothness, Support, ThinFunction,
};
use crate::weight::WeightParam;
use serde::Serialize;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Ten test functions with their evaluation points, placed along the first axis.
pub(crate) fn suite(n: usize) -> Vec<(&'static str, ThinFunction, Vec<f64>)> {
    let e = |v: f64| {
        let mut c = vec![0.0; n];
        c[0] = v;
        c
    };
    vec![
        ("gaussian-1", ThinFunction::gaussian(e(0.0), 0.6, 1.0), e(0.1)),
        ("gaussian-2", ThinFunction::gaussian(e(0.3), 1.0, -0.5), e(0.0)),
        ("gaussian-3", ThinFunction::gaussian(e(-0.2), 0.8, 2.0), e(0.4)),
        ("gaussian-4", ThinFunction::gaussian(e(0.0), 1.5, 1.0), e(0.7)),
        ("gaussian-5", ThinFunction::gaussian(e(0.5), 0.7, 1.0), e(-0.3)),
        ("bump-1", ThinFunction::bump(e(0.0), 1.0, 1.0), e(0.0)),
        ("bump-2", ThinFunction::bump(e(0.2), 1.5, -1.0), e(0.3)),
        ("bump-3", ThinFunction::bump(e(-0.3), 0.8, 0.5), e(-0.1)),
        ("bump-4", ThinFunction::bump(e(0.0), 2.0, 1.0), e(0.9)),
        ("bump-5", ThinFunction::bump(e(0.4), 1.2, 2.0), e(0.0)),
    ]
}

/// `Γ((n+1)/2) / π^{(n+1)/2}`, the half-space Poisson constant at `s = 1/2`.
pub(crate) fn classical_poisson_constant(n: usize) -> f64 {
    let h = (n as f64 + 1.0) / 2.0;
    gamma(h) / PI.powf(h)
}

#[derive(Serialize)]
struct RouteRow {
    n: usize,
    s: f64,
    function: &'static str,
    x: f64,
    extension: f64,
    principal_value: f64,
    relative: f64,
}

pub(super) fn run(cfg: &E3Config, ctx: &mut RunContext) {
    let spec = QuadSpec::default();
    let mut rows = Vec::new();
    for &n in &cfg.dictionary_n {
        for &s in &cfg.dictionary_s {
            let label = format!("n={n} s={s}");
            let Some(w) = ctx.attempt(Some(8), &format!("weight {label}"), WeightParam::from_s(n, s)) else {
                continue;
            };
            let Some(k) = ctx.attempt(Some(8), &format!("kernel constants {label}"), calibrate_constants(&w, &spec)) else {
                continue;
            };
            let mut worst: f64 = 0.0;
            for (name, f, x) in suite(n) {
                let routes = (|| -> Result<(f64, f64)> {
                    let ext = -k.c_frac * frac_normal_derivative_of(&f, &w, k.c_poisson, &x, &spec)?.value;
                    let pv = pv_fractional_laplacian(&f, &w, &x, &k, &spec)?;
                    Ok((ext, pv))
                })();
                let Some((ext, pv)) = ctx.attempt(Some(8), &format!("routes {name}, {label}"), routes) else {
                    continue;
                };
                let rel = (ext - pv).abs() / pv.abs().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                rows.push(RouteRow {
                    n,
                    s,
                    function: name,
                    x: x[0],
                    extension: ext,
                    principal_value: pv,
                    relative: rel,
                });
            }
            ctx.check(Check::at_most(Some(8), format!("route agreement, {label}"), worst, cfg.route_tol));

            let one = ThinFunction::new(n, Support::Decay { exponent: 0.0, constant: 1.0 }, Smoothness::Smooth { bound: 0.0 }, |_| 1.0);
            let points: Vec<(Vec<f64>, f64)> = cfg.poisson_heights.iter().map(|&y| (vec![0.0; n], y)).collect();
            if let Some(vals) = ctx.attempt(Some(8), &format!("poisson normalization {label}"), poisson_extend(&one, &w, k.c_poisson, &points, &spec)) {
                let dev = vals.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
                ctx.check(
                    Check::at_most(Some(8), format!("poisson kernel integrates to one, {label}"), dev, cfg.normalization_tol)
                        .detail(format!("heights {:?}", cfg.poisson_heights)),
                );
            }
        }
        let classical = WeightParam::from_s(n, 0.5).and_then(|w| poisson_constant(&w, &spec));
        if let Some(c) = ctx.attempt(Some(8), &format!("classical constant n={n}"), classical) {
            let exact = classical_poisson_constant(n);
            ctx.check(
                Check::at_most(Some(8), format!("classical poisson constant, n={n}"), ((c - exact) / exact).abs(), cfg.normalization_tol)
                    .detail(format!("computed {c:.15e}, closed form {exact:.15e}")),
            );
        }
    }
    ctx.write_csv("routes.csv", &rows);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_constants() {
        assert!((classical_poisson_constant(1) - 1.0 / PI).abs() < 1e-15);
        assert!((classical_poisson_constant(2) - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }
}
