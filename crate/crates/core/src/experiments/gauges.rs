use super::{Check, E3Config, RunContext};
use crate::error::Result;
use crate::extension::{calibrate_constants, KernelConstants, QuadSpec};
use crate::gauge::{default_centers, default_radii, measure_gauge, GaugeCurve, GaugeKind, GaugeOptions};
use crate::grid::{Grid, GridField};
use crate::solver::{solve_drift, DriftSpec, SolverOptions};
use crate::weight::WeightParam;

fn drift_data(x: f64, y: f64) -> f64 {
    0.4 + 0.5 * x + 0.1 * (x * x - y * y)
}

fn one_case(cfg: &E3Config, opts: &SolverOptions, w: &WeightParam, k: &KernelConstants, kind: GaugeKind) -> Result<GaugeCurve> {
    let grid = Grid::box_grid(1, cfg.half_width, cfg.height, cfg.cells)?;
    let data = GridField::box_dirichlet(grid.clone(), |x, y| drift_data(x[0], y));
    let drift = DriftSpec::constant(&grid, k.drift_scale(), &[cfg.drift]);
    let (u, _) = solve_drift(&data, w, &drift, kind == GaugeKind::Signorini, opts)?;
    let centers = default_centers(&grid, cfg.centers);
    let radii = default_radii(&grid, &centers, cfg.radii)?;
    let gopts = GaugeOptions {
        solver: opts.clone(),
        ..GaugeOptions::default()
    };
    measure_gauge(&u, &centers, &radii, w, kind, &gopts)
}

pub(super) fn run_e3(cfg: &E3Config, opts: &SolverOptions, ctx: &mut RunContext) {
    for &s in &cfg.s {
        let Some(w) = ctx.attempt(Some(5), &format!("weight s={s}"), WeightParam::from_s(1, s)) else {
            continue;
        };
        let Some(k) = ctx.attempt(Some(5), &format!("kernel constants s={s}"), calibrate_constants(&w, &QuadSpec::default())) else {
            continue;
        };
        ctx.write_json(&format!("constants_s{s}.json"), &k);
        for kind in [GaugeKind::Harmonic, GaugeKind::Signorini] {
            let tag = match kind {
                GaugeKind::Harmonic => "drift",
                GaugeKind::Signorini => "drift_obstacle",
            };
            let label = format!("s={s} {tag}");
            let Some(curve) = ctx.attempt(Some(5), &format!("gauge {label}"), one_case(cfg, opts, &w, &k, kind)) else {
                continue;
            };
            ctx.check(Check::at_least(Some(5), format!("min gauge, {label}"), curve.min_omega(), cfg.omega_floor));
            let target = -w.a() - cfg.slope_margin;
            match curve.slope {
                Some(m) => ctx.check(
                    Check::at_least(Some(5), format!("gauge decay slope, {label}"), m, target)
                        .detail(format!("max gauge {:.3e}", curve.max_omega())),
                ),
                None => ctx.check(Check::new(Some(5), format!("gauge decay slope, {label}"), false).detail("no fit: gauge vanishes")),
            }
            let path = ctx.artifact(&format!("gauge_s{s}_{tag}.csv"));
            let r = curve.write_csv(&path);
            ctx.write("gauge csv", r);
            ctx.write_json(&format!("gauge_s{s}_{tag}.json"), &curve.summary());
        }
    }
}
