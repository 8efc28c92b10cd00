//! Almost-minimality excess against ball replacements, synthetic almost
//! minimizers with a prescribed gauge, and regularity verdicts.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BallQuadrature, Grid, GridField};
use crate::metrics::admissible_window;
use crate::solver::{solve, LaOperator, SolverOptions, ThinSpec};
use crate::trace::{estimate_campanato, holder_norm_estimate, trace_by_averages, Ladder};
use crate::weight::WeightParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeKind {
    /// Unconstrained replacement.
    Harmonic,
    /// Replacement with `v >= 0` on the thin part of the ball.
    Signorini,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeOptions {
    pub solver: SolverOptions,
    /// Negative excess down to `-clip_tol` is reported as zero.
    pub clip_tol: f64,
    /// Points with `ω̂ <= slope_floor` are left out of the slope fit.
    pub slope_floor: f64,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            clip_tol: 5e-3,
            slope_floor: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugePoint {
    pub center: usize,
    pub r: f64,
    pub e_u: f64,
    pub e_v: f64,
    /// `E(u)/E(v) - 1` after clipping.
    pub omega: f64,
    /// `E(u) - E(v)`.
    pub additive: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeCurve {
    pub kind: GaugeKind,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub points: Vec<GaugePoint>,
    /// Log-log slope of `ω̂` in `r`, pooled over centers with a separate
    /// intercept for each.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaugeSummary {
    pub kind: GaugeKind,
    pub slope: Option<f64>,
    pub window: (f64, f64),
    pub max_omega: f64,
    pub min_omega: f64,
    pub points: usize,
}

impl GaugeCurve {
    pub fn max_omega(&self) -> f64 {
        self.points.iter().map(|p| p.omega).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_omega(&self) -> f64 {
        self.points.iter().map(|p| p.omega).fold(f64::INFINITY, f64::min)
    }

    /// `ω̂` at radius index `k` for every center.
    pub fn at_radius(&self, k: usize) -> Vec<f64> {
        let r = self.radii[k];
        self.points.iter().filter(|p| p.r == r).map(|p| p.omega).collect()
    }

    pub fn summary(&self) -> GaugeSummary {
        GaugeSummary {
            kind: self.kind,
            slope: self.slope,
            window: (
                self.radii.iter().copied().fold(f64::INFINITY, f64::min),
                self.radii.iter().copied().fold(0.0, f64::max),
            ),
            max_omega: self.max_omega(),
            min_omega: self.min_omega(),
            points: self.points.len(),
        }
    }

    /// Rows `center, r, E(u), E(v), omega` with the center written as `x1;x2;...`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["center", "r", "E(u)", "E(v)", "omega"])?;
        for p in &self.points {
            let c: Vec<String> = self.centers[p.center].iter().map(|x| format!("{x:.10e}")).collect();
            w.write_record([
                c.join(";"),
                format!("{:.12e}", p.r),
                format!("{:.15e}", p.e_u),
                format!("{:.15e}", p.e_v),
                format!("{:.12e}", p.omega),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `count` thin points spread over the middle half of the grid's thin box
/// (a tensor lattice when `n > 1`).
pub fn default_centers(grid: &Grid, count: usize) -> Vec<Vec<f64>> {
    let per = ((count as f64).powf(1.0 / grid.n as f64).round() as usize).max(1);
    let axis = |d: usize| -> Vec<f64> {
        let lo = grid.x_lo[d];
        let hi = grid.x_hi(d);
        let (mid, half) = (0.5 * (lo + hi), 0.25 * (hi - lo));
        if per == 1 {
            vec![mid]
        } else {
            (0..per).map(|i| mid - half + 2.0 * half * i as f64 / (per - 1) as f64).collect()
        }
    };
    let mut out = vec![Vec::new()];
    for d in 0..grid.n {
        let vals = axis(d);
        out = out
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `count` geometric radii in the window shared by all centers.
pub fn default_radii(grid: &Grid, centers: &[Vec<f64>], count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = centers
        .iter()
        .map(|c| admissible_window(grid, c))
        .fold((0.0_f64, f64::INFINITY), |(l, h), (a, b)| (l.max(a), h.min(b)));
    if !(hi > lo) || count < 2 {
        return Err(Error::WindowTooSmall { found: 0, needed: count.max(2) });
    }
    Ok((0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect())
}

/// Sub-box of the parent grid covering `B_r(center)`, with the parent's values
/// and every node outside the open ball fixed.
fn ball_subproblem(u: &GridField, center: &[f64], r: f64) -> Result<GridField> {
    let g = &u.grid;
    if !g.contains_ball(center, r) {
        return Err(Error::BallOutsideDomain {
            center: center.to_vec(),
            radius: r,
        });
    }
    let mut lo = Vec::with_capacity(g.n);
    let mut nx = Vec::with_capacity(g.n);
    for d in 0..g.n {
        let h = g.h_x[d];
        let i0 = (((center[d] - r - g.x_lo[d]) / h).floor() as isize - 1).max(0) as usize;
        let i1 = ((((center[d] + r - g.x_lo[d]) / h).ceil() as usize) + 1).min(g.nx[d] - 1);
        lo.push(i0);
        nx.push(i1 - i0 + 1);
    }
    let ny = (((r / g.h_y).ceil() as usize) + 2).min(g.ny);
    let sub = Grid {
        n: g.n,
        x_lo: (0..g.n).map(|d| g.x_lo[d] + lo[d] as f64 * g.h_x[d]).collect(),
        h_x: g.h_x.clone(),
        nx,
        h_y: g.h_y,
        ny,
    };
    let values: Vec<f64> = (0..sub.len())
        .map(|k| {
            let (thin, j) = sub.decompose(k);
            let parent: Vec<usize> = thin.iter().zip(&lo).map(|(i, o)| i + o).collect();
            u.values[g.index(&parent, j)]
        })
        .collect();
    let mut fixed = sub.ball_exterior_mask(center, r);
    if ny == g.ny {
        // the ball reaches the parent top; keep its nodes fixed as in the parent
        for (k, f) in fixed.iter_mut().enumerate() {
            *f |= k % sub.ny + 1 == sub.ny;
        }
    }
    Ok(GridField { grid: sub, values, fixed })
}

fn measure_point(
    u: &GridField,
    center: &[f64],
    r: f64,
    w: &WeightParam,
    kind: GaugeKind,
    opts: &GaugeOptions,
) -> Result<(f64, f64)> {
    let data = ball_subproblem(u, center, r)?;
    let spec = ThinSpec {
        signorini: kind == GaugeKind::Signorini,
        drift: None,
    };
    let (v, _) = solve(&data, w, &spec, &opts.solver)?;
    let op = LaOperator::new(&data.grid, w)?;
    let free: Vec<bool> = data.fixed.iter().map(|f| !f).collect();
    Ok((op.energy(&data.values, Some(&free)), op.energy(&v.values, Some(&free))))
}

/// Log-log slope with a separate intercept per center, over points with
/// `ω̂ > floor`; the returned intercept is the mean of the centers'.
fn pooled_slope(points: &[GaugePoint], centers: usize, floor: f64) -> (Option<f64>, Option<f64>) {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    let mut means = Vec::new();
    for c in 0..centers {
        let (xs, ys): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|p| p.center == c && p.omega > floor)
            .map(|p| (p.r.ln(), p.omega.ln()))
            .unzip();
        if xs.len() < 2 {
            continue;
        }
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        sxy += xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>();
        sxx += xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        means.push((mx, my));
    }
    if sxx <= 0.0 {
        return (None, None);
    }
    let slope = sxy / sxx;
    let b = means.iter().map(|(mx, my)| my - slope * mx).sum::<f64>() / means.len() as f64;
    (Some(slope), Some(b))
}

/// Excess `ω̂(r) = E(u; B_r)/E(v; B_r) - 1` of `u` against the replacement
/// on every `(center, r)`.
pub fn measure_gauge(
    u: &GridField,
    centers: &[Vec<f64>],
    radii: &[f64],
    w: &WeightParam,
    kind: GaugeKind,
    opts: &GaugeOptions,
) -> Result<GaugeCurve> {
    let jobs: Vec<(usize, f64)> = (0..centers.len())
        .flat_map(|c| radii.iter().map(move |&r| (c, r)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(c, r)| {
            let (e_u, e_v) = measure_point(u, &centers[c], r, w, kind, opts)?;
            let raw = if e_v > 0.0 { e_u / e_v - 1.0 } else { 0.0 };
            let omega = if raw < 0.0 && raw >= -opts.clip_tol { 0.0 } else { raw };
            Ok(GaugePoint {
                center: c,
                r,
                e_u,
                e_v,
                omega,
                additive: e_u - e_v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, intercept) = pooled_slope(&points, centers.len(), opts.slope_floor);
    Ok(GaugeCurve {
        kind,
        centers: centers.to_vec(),
        radii: radii.to_vec(),
        points,
        slope,
        intercept,
    })
}

/// Target gauge `ω(r) = constant r^alpha`, realized by adding
/// `A χ(x) |y|^{1 + alpha/2} ψ(y)` to a minimizer, with `χ` and `ψ`
/// smooth cutoffs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbSpec {
    pub alpha: f64,
    pub constant: f64,
    /// Initial amplitude `A`; zero leaves the field unchanged.
    pub amplitude: f64,
    pub center: Vec<f64>,
    /// Radius of the thin cutoff `χ`.
    pub support: f64,
    /// Height of the cutoff `ψ`.
    pub height: f64,
    pub kind: GaugeKind,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub max_rounds: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbedField {
    #[serde(skip)]
    pub field: Option<GridField>,
    pub amplitude: f64,
    pub rounds: usize,
    /// Extremes of `ω̂ / (constant r^alpha)` over the window.
    pub ratio_range: (f64, f64),
    pub gauge: GaugeCurve,
}

/// 1 on `[0, 1/2]`, 0 beyond 1, quintic smoothstep between.
fn cutoff(t: f64) -> f64 {
    if t <= 0.5 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let s = 2.0 * t - 1.0;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

fn bump_profile(grid: &Grid, spec: &PerturbSpec) -> Vec<f64> {
    let kappa = 1.0 + 0.5 * spec.alpha;
    (0..grid.len())
        .map(|k| {
            let (x, y) = grid.coords(k);
            let d = x.iter().zip(&spec.center).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            cutoff(d / spec.support) * y.powf(kappa) * cutoff(y / spec.height)
        })
        .collect()
}

fn add_scaled(u: &GridField, phi: &[f64], amp: f64) -> GridField {
    let mut out = u.clone();
    for (v, p) in out.values.iter_mut().zip(phi) {
        *v += amp * p;
    }
    out
}

/// Synthesizes an almost minimizer whose measured gauge is within a factor
/// of 3 of `constant r^alpha` at every sampled ball.
pub fn perturb_minimizer(
    u_min: &GridField,
    spec: &PerturbSpec,
    w: &WeightParam,
    opts: &GaugeOptions,
) -> Result<PerturbedField> {
    let g = &u_min.grid;
    let margin = 2.0 * g.h_x.iter().copied().fold(g.h_y, f64::max);
    let inside = g.contains_ball(&spec.center, 0.0)
        && (0..g.n).all(|d| {
            spec.center[d] - spec.support >= g.x_lo[d] + margin
                && spec.center[d] + spec.support <= g.x_hi(d) - margin
        })
        && spec.height <= g.y_max() - margin;
    if !inside {
        return Err(Error::Precondition(
            "perturbation must be supported away from the outer boundary".into(),
        ));
    }
    if spec.alpha <= 0.0 || spec.constant <= 0.0 {
        return Err(Error::Parameter(format!(
            "need alpha > 0 and constant > 0, got {} and {}",
            spec.alpha, spec.constant
        )));
    }
    if spec.amplitude == 0.0 {
        let gauge = measure_gauge(u_min, &spec.centers, &spec.radii, w, spec.kind, opts)?;
        return Ok(PerturbedField {
            field: Some(u_min.clone()),
            amplitude: 0.0,
            rounds: 0,
            ratio_range: (0.0, 0.0),
            gauge,
        });
    }
    let phi = bump_profile(g, spec);
    let mut amp = spec.amplitude;
    for round in 1..=spec.max_rounds {
        let field = add_scaled(u_min, &phi, amp);
        let gauge = measure_gauge(&field, &spec.centers, &spec.radii, w, spec.kind, opts)?;
        let ratios: Vec<f64> = gauge
            .points
            .iter()
            .map(|p| p.omega.max(0.0) / (spec.constant * p.r.powf(spec.alpha)))
            .collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        if lo >= 1.0 / 3.0 && hi <= 3.0 {
            return Ok(PerturbedField {
                field: Some(field),
                amplitude: amp,
                rounds: round,
                ratio_range: (lo, hi),
                gauge,
            });
        }
        // ω̂ is quadratic in the amplitude to leading order
        let geo = if lo > 0.0 { (lo * hi).sqrt() } else { hi.max(1e-300) };
        amp *= geo.powf(-0.5).clamp(1e-3, 1e3);
    }
    Err(Error::CalibrationFailed(format!(
        "gauge r^{} not matched within a factor of 3 after {} rounds",
        spec.alpha, spec.max_rounds
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "claim")]
pub enum Claim {
    AlmostLipschitz,
    /// `alpha` is the gauge exponent.
    C1Beta { alpha: f64 },
    Rigidity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub label: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictReport {
    pub claim: Claim,
    pub passed: bool,
    pub entries: Vec<VerdictEntry>,
    /// Hölder exponent used for the thin gradient.
    pub beta: Option<f64>,
    pub note: Option<String>,
}

/// `αs / (8 (n + 1 + a + α/2))`.
pub fn c1beta_exponent(w: &WeightParam, alpha: f64) -> f64 {
    alpha * w.s() / (8.0 * (w.homogeneity() + 0.5 * alpha))
}

/// Root mean square of `y^a u_y` in the measure `|y|^{-a}`, bounded by the
/// full energy over the grid.
pub fn energy_scale(u: &GridField, w: &WeightParam) -> Result<f64> {
    let g = &u.grid;
    let e = LaOperator::new(g, w)?.energy(&u.values, None);
    let vol_x: f64 = (0..g.n).map(|d| g.x_hi(d) - g.x_lo[d]).product();
    let a = w.a();
    let mass = 2.0 * vol_x * g.y_max().powf(1.0 - a) / (1.0 - a);
    Ok((e / mass).sqrt())
}

fn thin_traces(field: &GridField, centers: &[Vec<f64>], w: &WeightParam) -> Result<Vec<f64>> {
    let profile = estimate_campanato(field, centers, &Ladder::default(), 0.5, w)?;
    Ok((0..centers.len())
        .map(|c| match trace_by_averages(&profile, c) {
            Ok(t) => t.value,
            Err(_) => profile.averages[c].last().copied().unwrap_or(0.0) + profile.reference,
        })
        .collect())
}

/// Confronts `u` with a regularity claim at the gauge's centers.
pub fn regularity_verdict(u: &GridField, gauge: &GaugeCurve, w: &WeightParam, claim: Claim) -> VerdictReport {
    let centers = &gauge.centers;
    let mut entries = Vec::new();
    let mut beta = None;
    let mut note = None;
    let fail = |note: &mut Option<String>, e: Error| {
        *note = Some(e.to_string());
    };
    match claim {
        Claim::AlmostLipschitz => {
            for sigma in [0.5, 0.9, 0.99] {
                match estimate_campanato(u, centers, &Ladder::default(), sigma, w) {
                    Ok(p) => {
                        let within = holder_norm_estimate(&p).map(|h| h.within_bounds).unwrap_or(false);
                        entries.push(VerdictEntry {
                            label: format!("campanato M at sigma = {sigma}"),
                            value: p.m,
                            threshold: f64::INFINITY,
                            passed: p.m.is_finite() && within,
                        });
                    }
                    Err(e) => fail(&mut note, e),
                }
            }
        }
        Claim::C1Beta { alpha } => {
            let b = c1beta_exponent(w, alpha);
            beta = Some(b);
            for d in 0..u.grid.n {
                let grad = GridField {
                    grid: u.grid.clone(),
                    values: u.thin_gradient(d),
                    fixed: u.fixed.clone(),
                };
                match estimate_campanato(&grad, centers, &Ladder::default(), b, w) {
                    Ok(p) => entries.push(VerdictEntry {
                        label: format!("thin gradient component {} campanato M at beta = {b:.6}", d + 1),
                        value: p.m,
                        threshold: f64::INFINITY,
                        passed: p.m.is_finite(),
                    }),
                    Err(e) => fail(&mut note, e),
                }
            }
        }
        Claim::Rigidity => {
            if w.a() < 0.0 {
                note = Some(format!("rigidity needs a >= 0, got a = {}", w.a()));
            } else {
                let g_field = GridField {
                    grid: u.grid.clone(),
                    values: u.weighted_normal_derivative(w),
                    fixed: u.fixed.clone(),
                };
                let res = energy_scale(u, w).and_then(|scale| Ok((scale, thin_traces(&g_field, centers, w)?)));
                match res {
                    Ok((scale, traces)) => {
                        for (c, t) in centers.iter().zip(traces) {
                            entries.push(VerdictEntry {
                                label: format!("trace of y^a u_y at {c:?}"),
                                value: t.abs(),
                                threshold: 1e-2 * scale,
                                passed: t.abs() <= 1e-2 * scale,
                            });
                        }
                    }
                    Err(e) => fail(&mut note, e),
                }
            }
        }
    }
    let passed = note.is_none() && !entries.is_empty() && entries.iter().all(|e| e.passed);
    VerdictReport {
        claim,
        passed,
        entries,
        beta,
        note,
    }
}

/// Weighted mean of `values` over the upper half of `B_r(center)`.
pub fn half_ball_mean(grid: &Grid, w: &WeightParam, values: &[f64], center: &[f64], r: f64) -> Result<f64> {
    Ok(BallQuadrature::new(grid, w, center, r)?.mean(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_dirichlet;

    fn harmonic(a: f64, cells: usize, curved: bool) -> (GridField, WeightParam) {
        let w = WeightParam::from_a(1, a).unwrap();
        let g = Grid::box_grid(1, 1.0, 1.0, cells).unwrap();
        let c = if curved { 0.3 } else { 0.0 };
        let data = GridField::box_dirichlet(g, |x, y| 1.0 + x[0] + c * (x[0] * x[0] - y * y));
        (solve_dirichlet(&data, &w, &SolverOptions::default()).unwrap().0, w)
    }

    #[test]
    fn minimizer_has_small_gauge() {
        let (u, w) = harmonic(0.0, 256, true);
        let cs = default_centers(&u.grid, 4);
        let rs = default_radii(&u.grid, &cs, 4).unwrap();
        let gc = measure_gauge(&u, &cs, &rs, &w, GaugeKind::Harmonic, &GaugeOptions::default()).unwrap();
        assert!(gc.max_omega() <= 5e-3, "{}", gc.max_omega());
        assert!(gc.min_omega() >= -5e-3);
    }

    #[test]
    fn outside_ball_rejected() {
        let (u, w) = harmonic(0.0, 32, true);
        let e = measure_gauge(&u, &[vec![0.9]], &[0.5], &w, GaugeKind::Harmonic, &GaugeOptions::default());
        assert!(matches!(e, Err(Error::BallOutsideDomain { .. })));
    }

    #[test]
    fn perturbation_matches_alpha_one() {
        let (u, w) = harmonic(0.0, 256, false);
        let cs = vec![vec![-0.1], vec![0.0], vec![0.1]];
        let rs = default_radii(&u.grid, &cs, 6).unwrap();
        let spec = PerturbSpec {
            alpha: 1.0,
            constant: 0.05,
            amplitude: 0.1,
            center: vec![0.0],
            support: 0.8,
            height: 0.8,
            kind: GaugeKind::Harmonic,
            centers: cs,
            radii: rs,
            max_rounds: 20,
        };
        let p = perturb_minimizer(&u, &spec, &w, &GaugeOptions::default()).unwrap();
        let s = p.gauge.slope.unwrap();
        assert!((s - 1.0).abs() <= 0.3, "slope {s}");
    }

    #[test]
    fn exponent_formula() {
        let w = WeightParam::from_s(1, 0.75).unwrap();
        assert!((c1beta_exponent(&w, 1.0) - 3.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_centers() {
        let g = Grid::box_grid(2, 1.0, 1.0, 8).unwrap();
        let cs = default_centers(&g, 16);
        assert_eq!(cs.len(), 16);
        assert_eq!(cs[0], vec![-0.5, -0.5]);
    }
}
