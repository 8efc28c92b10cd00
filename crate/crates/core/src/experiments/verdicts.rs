use super::{line_centers, Check, E4Config, E5Config, PerturbConfig, RunContext};
use crate::error::Result;
use crate::gauge::{
    c1beta_exponent, default_radii, perturb_minimizer, regularity_verdict, Claim, GaugeKind, GaugeOptions, PerturbSpec,
    PerturbedField, VerdictReport,
};
use crate::grid::{Grid, GridField};
use crate::solver::{solve_dirichlet, solve_signorini, SolverOptions};
use crate::trace::{chain_check, estimate_campanato, holder_norm_estimate, trace_by_averages, Ladder};
use crate::weight::WeightParam;
use serde::Serialize;

fn harmonic_data(x: f64, y: f64) -> f64 {
    1.0 + 0.5 * x + 0.05 * (x * x - 3.0 * y * y)
}

fn obstacle_data(x: f64, y: f64) -> f64 {
    0.2 + 0.5 * x + 0.1 * (x * x - y * y)
}

fn perturb(u: &GridField, cfg: &PerturbConfig, kind: GaugeKind, w: &WeightParam, opts: &SolverOptions) -> Result<PerturbedField> {
    let n = u.grid.n;
    let centers = line_centers(n, cfg.centers, cfg.center_span);
    let radii = default_radii(&u.grid, &centers, cfg.radii)?;
    let spec = PerturbSpec {
        alpha: cfg.alpha,
        constant: cfg.constant,
        amplitude: cfg.amplitude,
        center: vec![0.0; n],
        support: cfg.support,
        height: cfg.height,
        kind,
        centers,
        radii,
        max_rounds: cfg.max_rounds,
    };
    let gopts = GaugeOptions {
        solver: opts.clone(),
        ..GaugeOptions::default()
    };
    perturb_minimizer(u, &spec, w, &gopts)
}

fn slope_check(ctx: &mut RunContext, criterion: Option<u8>, label: &str, p: &PerturbedField, cfg: &PerturbConfig) {
    match p.gauge.slope {
        Some(m) => ctx.check(
            Check::at_most(criterion, format!("|gauge slope - alpha|, {label}"), (m - cfg.alpha).abs(), cfg.slope_tol)
                .detail(format!("slope {m:.4}, amplitude {:.4e}, rounds {}", p.amplitude, p.rounds)),
        ),
        None => ctx.check(Check::new(criterion, format!("|gauge slope - alpha|, {label}"), false).detail("no fit")),
    }
}

fn verdict_checks(ctx: &mut RunContext, criterion: Option<u8>, label: &str, v: &VerdictReport) {
    for e in &v.entries {
        ctx.check(Check {
            criterion,
            name: format!("{label}: {}", e.label),
            passed: e.passed,
            value: Some(e.value),
            threshold: e.threshold.is_finite().then_some(e.threshold),
            detail: String::new(),
        });
    }
    ctx.check(Check::new(criterion, format!("{label}: verdict"), v.passed).detail(v.note.clone().unwrap_or_default()));
}

fn field_with(u: &GridField, values: Vec<f64>) -> GridField {
    GridField {
        grid: u.grid.clone(),
        values,
        fixed: u.fixed.clone(),
    }
}

/// Rounds every value to a multiple of `2^-30`, so that adding small
/// dyadic constants is exact.
pub(crate) fn dyadic(u: &GridField) -> GridField {
    let q = (1u64 << 30) as f64;
    field_with(u, u.values.iter().map(|v| (v * q).round() / q).collect())
}

#[derive(Serialize)]
struct TraceRow {
    field: &'static str,
    center: f64,
    trace: f64,
    pointwise: f64,
    certificate: f64,
}

pub(super) fn run_e4(cfg: &E4Config, opts: &SolverOptions, ctx: &mut RunContext) {
    let setup = WeightParam::from_s(1, cfg.s).and_then(|w| {
        let grid = Grid::box_grid(1, cfg.half_width, cfg.height, cfg.cells)?;
        let data = GridField::box_dirichlet(grid.clone(), |x, y| harmonic_data(x[0], y));
        let (u, _) = solve_dirichlet(&data, &w, opts)?;
        Ok((w, grid, u))
    });
    let Some((w, grid, u)) = ctx.attempt(Some(6), "harmonic base solve", setup) else {
        return;
    };
    let Some(p) = ctx.attempt(Some(6), "perturbed harmonic field", perturb(&u, &cfg.perturb, GaugeKind::Harmonic, &w, opts)) else {
        return;
    };
    slope_check(ctx, Some(6), "perturbed harmonic", &p, &cfg.perturb);
    let f = p.field.clone().expect("perturbed field present");
    let rigidity = regularity_verdict(&f, &p.gauge, &w, Claim::Rigidity);
    verdict_checks(ctx, Some(6), "rigidity", &rigidity);
    ctx.write_json("rigidity.json", &rigidity);
    ctx.write_json("perturbed_harmonic.json", &p);
    let path = ctx.artifact("gauge_perturbed_harmonic.csv");
    let r = p.gauge.write_csv(&path);
    ctx.write("gauge csv", r);

    // trace machinery
    let centers = p.gauge.centers.clone();
    let smooth: [(&'static str, fn(f64, f64) -> f64); 2] = [
        ("sin_x_plus_y2", |x, y| x.sin() + y * y),
        ("gaussian_times_1_plus_y", |x, y| (-x * x).exp() * (1.0 + y)),
    ];
    let mut fields: Vec<(&'static str, GridField)> = vec![
        ("harmonic_base", u.clone()),
        ("perturbed", f.clone()),
        ("perturbed_normal_derivative", field_with(&f, f.weighted_normal_derivative(&w))),
    ];
    for (name, g) in smooth {
        fields.push((name, GridField::from_fn(grid.clone(), |x, y| g(x[0], y))));
    }
    let h = grid.h_y;
    let ladder = Ladder {
        base: cfg.ladder_base,
        r0: None,
    };
    let mut rows = Vec::new();
    for (name, field) in &fields {
        let Some(prof) = ctx.attempt(Some(9), &format!("campanato profile {name}"), estimate_campanato(field, &centers, &ladder, 0.5, &w)) else {
            continue;
        };
        let cc = chain_check(&prof);
        ctx.check(
            Check::new(Some(9), format!("dyadic chain inequality, {name}"), cc.holds)
                .detail(format!("{} pairs, max ratio {:.4}", cc.pairs, cc.max_ratio)),
        );
        let pointwise = smooth.iter().find(|(n, _)| n == name).map(|(_, g)| *g);
        if let Some(g) = pointwise {
            let mut excess = f64::NEG_INFINITY;
            let mut raw: f64 = 0.0;
            for (c, x) in centers.iter().enumerate() {
                let Some(t) = ctx.attempt(Some(9), &format!("trace {name} at {}", x[0]), trace_by_averages(&prof, c)) else {
                    continue;
                };
                let exact = g(x[0], 0.0);
                excess = excess.max((t.value - exact).abs() - t.certificate);
                raw = raw.max((t.value - exact).abs());
                rows.push(TraceRow {
                    field: name,
                    center: x[0],
                    trace: t.value,
                    pointwise: exact,
                    certificate: t.certificate,
                });
            }
            ctx.check(
                Check::at_most(Some(9), format!("trace error minus certificate, {name}"), excess, cfg.trace_h2 * h * h)
                    .detail(format!("h = {h}")),
            );
            ctx.check(Check::at_most(Some(9), format!("raw trace error, {name}"), raw, cfg.trace_h2 * h * h));
        }
    }
    ctx.write_csv("traces.csv", &rows);

    let q = dyadic(&f);
    let shifted = field_with(&q, q.values.iter().map(|v| v + cfg.shift).collect());
    let holder = |g: &GridField| estimate_campanato(g, &centers, &ladder, 0.5, &w).and_then(|p| holder_norm_estimate(&p));
    let pair = holder(&q).and_then(|a| Ok((a, holder(&shifted)?)));
    if let Some((a, b)) = ctx.attempt(Some(9), "holder estimate under a constant shift", pair) {
        ctx.check(
            Check::at_most(Some(9), "holder seminorm change under adding a constant", (a.seminorm - b.seminorm).abs(), 0.0)
                .detail(format!("seminorm {:.6e}, shift {}", a.seminorm, cfg.shift)),
        );
        ctx.check(Check::new(Some(9), "holder bounds verdict unchanged under the shift", a.within_bounds == b.within_bounds));
    }

    let c1 = regularity_verdict(&f, &p.gauge, &w, Claim::C1Beta { alpha: cfg.perturb.alpha });
    verdict_checks(ctx, None, "c1beta (perturbed harmonic)", &c1);
}

#[derive(Serialize)]
struct CampanatoRow {
    cells: usize,
    sigma: f64,
    m: f64,
    radii: usize,
}

pub(super) fn run_e5(cfg: &E5Config, opts: &SolverOptions, ctx: &mut RunContext) {
    let Some(w) = ctx.attempt(Some(7), "weight", WeightParam::from_s(1, cfg.s)) else {
        return;
    };
    let centers = line_centers(1, cfg.perturb.centers, cfg.perturb.center_span);
    let ladder = Ladder {
        base: cfg.ladder_base,
        r0: None,
    };
    let mut rows = Vec::new();
    let mut finest = None;
    for &cells in &cfg.cells {
        let run = Grid::box_grid(1, cfg.half_width, cfg.height, cells).and_then(|g| {
            let data = GridField::box_dirichlet(g, |x, y| obstacle_data(x[0], y));
            let (u, rep) = solve_signorini(&data, &w, opts)?;
            let prof = estimate_campanato(&u, &centers, &ladder, cfg.sigma, &w)?;
            Ok((u, rep.active_set.len(), prof))
        });
        let Some((u, active, prof)) = ctx.attempt(Some(7), &format!("signorini minimizer cells={cells}"), run) else {
            continue;
        };
        ctx.check(
            Check::new(Some(7), format!("campanato M finite at sigma={}, cells={cells}", cfg.sigma), prof.m.is_finite())
                .detail(format!("M = {:.6e}, contact nodes {active}", prof.m)),
        );
        let path = ctx.artifact(&format!("campanato_cells{cells}.csv"));
        let r = prof.write_csv(&path);
        ctx.write("campanato csv", r);
        rows.push(CampanatoRow {
            cells,
            sigma: cfg.sigma,
            m: prof.m,
            radii: prof.radii.len(),
        });
        finest = Some(u);
    }
    for pair in rows.windows(2) {
        ctx.check(Check::at_most(
            Some(7),
            format!("campanato M ratio cells {} -> {}", pair[0].cells, pair[1].cells),
            pair[1].m / pair[0].m,
            cfg.m_ratio_max,
        ));
    }
    if rows.len() < 2 {
        ctx.check(Check::new(Some(7), "refinement study has two levels", false));
    }
    ctx.write_csv("campanato.csv", &rows);
    let Some(u) = finest else {
        return;
    };
    let Some(p) = ctx.attempt(Some(7), "perturbed signorini field", perturb(&u, &cfg.perturb, GaugeKind::Signorini, &w, opts)) else {
        return;
    };
    slope_check(ctx, None, "perturbed signorini", &p, &cfg.perturb);
    let f = p.field.clone().expect("perturbed field present");
    let c1 = regularity_verdict(&f, &p.gauge, &w, Claim::C1Beta { alpha: cfg.perturb.alpha });
    let beta = c1beta_exponent(&w, cfg.perturb.alpha);
    ctx.check(Check::new(Some(7), "c1beta exponent from formula", c1.beta == Some(beta)).detail(format!("beta = {beta}")));
    verdict_checks(ctx, Some(7), "c1beta (perturbed signorini)", &c1);
    let lip = regularity_verdict(&u, &p.gauge, &w, Claim::AlmostLipschitz);
    verdict_checks(ctx, Some(7), "almost lipschitz (signorini minimizer)", &lip);
    ctx.write_json("c1beta.json", &c1);
    ctx.write_json("almost_lipschitz.json", &lip);
    ctx.write_json("perturbed_signorini.json", &p);
    let path = ctx.artifact("gauge_perturbed_signorini.csv");
    let r = p.gauge.write_csv(&path);
    ctx.write("gauge csv", r);
}
