//! Weighted ball energies, Campanato oscillations, growth-exponent fits,
//! monotonicity checks and the Han-Lin iteration.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BallQuadrature, Grid, GridField};
use crate::weight::{BallSpec, WeightParam};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    Full,
    Tangential,
    Normal,
}

/// Quantity measured on `B_ρ` by [`fit_growth`] and [`monotonicity_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Energy(EnergyMode),
    /// `∫ |∇_x u - <∇_x u>_ρ|^2 |y|^a`.
    GradientOscillation,
    /// `∫ u^2 |y|^a`.
    L2,
}

/// Nodal derivatives of a field, computed once and reused across balls.
pub struct FieldDerivatives<'a> {
    pub field: &'a GridField,
    pub grad_x: Vec<Vec<f64>>,
    pub u_y: Vec<f64>,
}

impl<'a> FieldDerivatives<'a> {
    pub fn new(field: &'a GridField) -> Self {
        Self {
            field,
            grad_x: (0..field.grid.n).map(|d| field.thin_gradient(d)).collect(),
            u_y: field.y_derivative(),
        }
    }

    fn quadrature(&self, w: &WeightParam, ball: &BallSpec) -> Result<BallQuadrature> {
        BallQuadrature::new(&self.field.grid, w, &ball.center, ball.radius)
    }

    pub fn energy(&self, w: &WeightParam, ball: &BallSpec, mode: EnergyMode) -> Result<f64> {
        let q = self.quadrature(w, ball)?;
        let mut acc = 0.0;
        if mode != EnergyMode::Normal {
            for g in &self.grad_x {
                acc += q.integrate_map(&[g], |v| v[0] * v[0]);
            }
        }
        if mode != EnergyMode::Tangential {
            acc += q.integrate_map(&[&self.u_y], |v| v[0] * v[0]);
        }
        Ok(acc)
    }

    pub fn gradient_oscillation(&self, w: &WeightParam, ball: &BallSpec) -> Result<f64> {
        let q = self.quadrature(w, ball)?;
        Ok(self.grad_x.iter().map(|g| q.mean_and_oscillation(g).1).sum())
    }

    pub fn gradient_mean(&self, w: &WeightParam, ball: &BallSpec) -> Result<Vec<f64>> {
        let q = self.quadrature(w, ball)?;
        Ok(self.grad_x.iter().map(|g| q.mean(g)).collect())
    }

    pub fn functional(&self, w: &WeightParam, ball: &BallSpec, f: Functional) -> Result<f64> {
        match f {
            Functional::Energy(mode) => self.energy(w, ball, mode),
            Functional::GradientOscillation => self.gradient_oscillation(w, ball),
            Functional::L2 => {
                let q = self.quadrature(w, ball)?;
                Ok(q.integrate_map(&[&self.field.values], |v| v[0] * v[0]))
            }
        }
    }
}

/// `∫_{B} |∇u|^2 |y|^a` (or its tangential / normal part).
pub fn ball_energy(u: &GridField, ball: &BallSpec, w: &WeightParam, mode: EnergyMode) -> Result<f64> {
    FieldDerivatives::new(u).energy(w, ball, mode)
}

/// Mean oscillation energy of the thin gradient over the ball.
pub fn campanato_seminorm(u: &GridField, ball: &BallSpec, w: &WeightParam) -> Result<f64> {
    FieldDerivatives::new(u).gradient_oscillation(w, ball)
}

/// Weighted ball average `<f>_{x0, r}`.
pub fn weighted_ball_average(f: &GridField, ball: &BallSpec, w: &WeightParam) -> Result<f64> {
    Ok(BallQuadrature::new(&f.grid, w, &ball.center, ball.radius)?.mean(&f.values))
}

/// Radii selection inside the admissible window `[8h, R/4]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RadiiSpec {
    /// `count` geometric radii spanning the window.
    Geometric { count: usize },
    /// Explicit radii; those outside the window are dropped.
    Explicit(Vec<f64>),
}

/// Distance from `(center, 0)` to the lateral and top faces of the grid.
pub fn domain_radius(grid: &Grid, center: &[f64]) -> f64 {
    let mut r = grid.y_max();
    for d in 0..grid.n {
        r = r.min(center[d] - grid.x_lo[d]).min(grid.x_hi(d) - center[d]);
    }
    r
}

pub fn admissible_window(grid: &Grid, center: &[f64]) -> (f64, f64) {
    let h = grid.h_x.iter().copied().fold(grid.h_y, f64::max);
    (8.0 * h, domain_radius(grid, center) / 4.0)
}

pub fn select_radii(grid: &Grid, center: &[f64], spec: &RadiiSpec) -> Result<Vec<f64>> {
    const MIN_RADII: usize = 6;
    let (lo, hi) = admissible_window(grid, center);
    let tol = 1e-12 * hi;
    let radii: Vec<f64> = match spec {
        RadiiSpec::Geometric { count } => {
            if hi < lo || *count < 2 {
                Vec::new()
            } else {
                (0..*count)
                    .map(|i| lo * (hi / lo).powf(i as f64 / (*count - 1) as f64))
                    .collect()
            }
        }
        RadiiSpec::Explicit(v) => {
            let mut v: Vec<f64> = v.iter().copied().filter(|&r| r >= lo - tol && r <= hi + tol).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        }
    };
    if radii.len() < MIN_RADII {
        return Err(Error::WindowTooSmall {
            found: radii.len(),
            needed: MIN_RADII,
        });
    }
    Ok(radii)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthFit {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Max absolute deviation of `log(value)` from the fit.
    pub residual: f64,
    pub window: (f64, f64),
}

impl GrowthFit {
    /// Least-squares fit of `log value = slope log ρ + intercept`.
    pub fn from_values(radii: &[f64], values: &[f64]) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 {
            return Err(Error::Parameter("need matching radii and values".into()));
        }
        if values.iter().any(|v| *v <= 0.0) {
            return Err(Error::Precondition("log-log fit needs positive values".into()));
        }
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let (slope, intercept) = least_squares(&xs, &ys);
        let residual = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - slope * x - intercept).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            radii: radii.to_vec(),
            values: values.to_vec(),
            slope,
            intercept,
            residual,
            window: (radii[0], radii[radii.len() - 1]),
        })
    }

    /// Slopes between consecutive radii.
    pub fn local_slopes(&self) -> Vec<f64> {
        self.radii
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(r, v)| (v[1] / v[0]).ln() / (r[1] / r[0]).ln())
            .collect()
    }

    /// CSV rows `radius, value, local_slope` (local slope to the next radius).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["radius", "value", "local_slope"])?;
        let slopes = self.local_slopes();
        for (i, (r, v)) in self.radii.iter().zip(&self.values).enumerate() {
            let s = slopes.get(i).map(|s| format!("{s:.12e}")).unwrap_or_default();
            w.write_record([format!("{r:.12e}"), format!("{v:.12e}"), s])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn measure(u: &GridField, center: &[f64], radii: &[f64], f: Functional, w: &WeightParam) -> Result<Vec<f64>> {
    let der = FieldDerivatives::new(u);
    radii
        .par_iter()
        .map(|&r| der.functional(w, &BallSpec::new(center.to_vec(), r)?, f))
        .collect()
}

/// Log-log fit of a functional over the admissible radii around `(center, 0)`.
pub fn fit_growth(
    u: &GridField,
    center: &[f64],
    radii: &RadiiSpec,
    f: Functional,
    w: &WeightParam,
) -> Result<GrowthFit> {
    let rs = select_radii(&u.grid, center, radii)?;
    let vals = measure(u, center, &rs, f, w)?;
    GrowthFit::from_values(&rs, &vals)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub exponent: f64,
    pub radii: Vec<f64>,
    /// `ρ^{-exponent} F(ρ)`.
    pub normalized: Vec<f64>,
    /// Indices `i` with `normalized[i+1] < (1 - slack) normalized[i]`.
    pub violations: Vec<usize>,
    pub slack: f64,
    pub passed: bool,
}

pub const MONOTONICITY_SLACK: f64 = 1e-3;

pub fn monotonicity_from_values(radii: &[f64], values: &[f64], exponent: f64) -> MonotonicityReport {
    let normalized: Vec<f64> = radii.iter().zip(values).map(|(r, v)| v / r.powf(exponent)).collect();
    let violations: Vec<usize> = normalized
        .windows(2)
        .enumerate()
        .filter(|(_, p)| p[1] < (1.0 - MONOTONICITY_SLACK) * p[0])
        .map(|(i, _)| i)
        .collect();
    MonotonicityReport {
        exponent,
        radii: radii.to_vec(),
        passed: violations.is_empty(),
        normalized,
        violations,
        slack: MONOTONICITY_SLACK,
    }
}

/// Checks that `ρ ↦ ρ^{-exponent} F(ρ)` is nondecreasing up to the slack.
pub fn monotonicity_check(
    u: &GridField,
    center: &[f64],
    radii: &RadiiSpec,
    exponent: f64,
    f: Functional,
    w: &WeightParam,
) -> Result<MonotonicityReport> {
    let rs = select_radii(&u.grid, center, radii)?;
    let vals = measure(u, center, &rs, f, w)?;
    Ok(monotonicity_from_values(&rs, &vals, exponent))
}

/// Parameters of the Han-Lin iteration lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HLParams {
    pub a_hl: f64,
    pub gamma: f64,
    pub beta: f64,
    pub b_hl: f64,
    pub r0: f64,
}

impl HLParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > self.beta && self.beta > 0.0 && self.a_hl > 0.0 && self.b_hl >= 0.0 && self.r0 > 0.0) {
            return Err(Error::Parameter(format!("invalid iteration parameters {self:?}")));
        }
        Ok(())
    }

    /// `(τ, ε, c)` from the dyadic choice `2 A τ^γ = τ^{β'}`, `β' = (β+γ)/2`.
    pub fn constants(&self) -> (f64, f64, f64) {
        let bp = 0.5 * (self.beta + self.gamma);
        let tau = (2.0 * self.a_hl.max(0.5)).powf(-1.0 / (self.gamma - bp));
        let eps = tau.powf(self.gamma);
        let c = tau.powf(-2.0 * self.beta) / (1.0 - tau.powf(bp - self.beta));
        (tau, eps, c)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HLReport {
    pub tau: f64,
    pub epsilon: f64,
    pub c: f64,
    /// `c [(ρ/r0)^β φ(r0) + b ρ^β]` on the sample radii.
    pub bound_curve: Vec<(f64, f64)>,
    /// Conclusion verified on all sampled pairs.
    pub conclusion_holds: bool,
    /// Smallest `rhs - lhs` of the conclusion over sampled pairs.
    pub min_margin: f64,
}

/// Checks the iteration hypothesis on all sampled pairs and, when it holds,
/// verifies the concluded bound.
pub fn hl_iterate(phi: &[(f64, f64)], p: &HLParams) -> Result<HLReport> {
    p.validate()?;
    if phi.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Precondition("radii must increase".into()));
    }
    if phi.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(Error::Precondition("phi must be nondecreasing".into()));
    }
    if phi.last().is_some_and(|l| l.0 > p.r0) {
        return Err(Error::Precondition("samples must lie in (0, r0]".into()));
    }
    let (tau, eps, c) = p.constants();
    for (i, &(rho, f_rho)) in phi.iter().enumerate() {
        for &(r, f_r) in &phi[i..] {
            let rhs = p.a_hl * ((rho / r).powf(p.gamma) + eps) * f_r + p.b_hl * r.powf(p.beta);
            if f_rho > rhs * (1.0 + 1e-12) {
                return Err(Error::HypothesisFailed {
                    rho,
                    r,
                    lhs: f_rho,
                    rhs,
                });
            }
        }
    }
    let mut min_margin = f64::INFINITY;
    for (i, &(rho, f_rho)) in phi.iter().enumerate() {
        for &(r, f_r) in &phi[i..] {
            let rhs = c * ((rho / r).powf(p.beta) * f_r + p.b_hl * rho.powf(p.beta));
            min_margin = min_margin.min(rhs - f_rho);
        }
    }
    let (r_top, f_top) = *phi.last().ok_or_else(|| Error::Parameter("empty sample".into()))?;
    let bound_curve = phi
        .iter()
        .map(|&(rho, _)| (rho, c * ((rho / r_top).powf(p.beta) * f_top + p.b_hl * rho.powf(p.beta))))
        .collect();
    Ok(HLReport {
        tau,
        epsilon: eps,
        c,
        bound_curve,
        conclusion_holds: min_margin >= 0.0,
        min_margin,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientTrace {
    /// Extrapolated `lim <∇_x u>_{x0, r}`.
    pub value: Vec<f64>,
    /// Radii in decreasing order with the averages.
    pub radii: Vec<f64>,
    pub averages: Vec<Vec<f64>>,
    /// `|<∇u>_{r_{i+1}} - <∇u>_{r_i}|` (max over components).
    pub increments: Vec<f64>,
    /// Fitted power of the increments in `r`; `None` when they are at rounding level.
    pub rate: Option<f64>,
}

/// Limit of weighted ball averages of the thin gradient at `(x0, 0)`.
pub fn gradient_trace(u: &GridField, x0: &[f64], radii: &RadiiSpec, w: &WeightParam, tol: f64) -> Result<GradientTrace> {
    let mut rs = select_radii(&u.grid, x0, radii)?;
    rs.reverse();
    let der = FieldDerivatives::new(u);
    let averages = rs
        .par_iter()
        .map(|&r| der.gradient_mean(w, &BallSpec::new(x0.to_vec(), r)?))
        .collect::<Result<Vec<_>>>()?;
    let increments: Vec<f64> = averages
        .windows(2)
        .map(|p| p[0].iter().zip(&p[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .collect();
    let scale = averages
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let tiny = 1e-12 * scale;
    let rate = if increments.iter().all(|&d| d > tiny) {
        let xs: Vec<f64> = rs[1..].iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = increments.iter().map(|d| d.ln()).collect();
        Some(least_squares(&xs, &ys).0)
    } else {
        None
    };
    let last = averages.last().expect("nonempty").clone();
    let value = match rate {
        Some(beta) if beta > 0.05 => {
            // geometric tail of a Cauchy sequence with ratio q^beta
            let q = rs[rs.len() - 1] / rs[rs.len() - 2];
            let f = q.powf(beta);
            let prev = &averages[averages.len() - 2];
            last.iter().zip(prev).map(|(l, p)| l + (l - p) * f / (1.0 - f)).collect()
        }
        _ => last,
    };
    let tail = increments[increments.len() / 2..].iter().copied().fold(0.0, f64::max);
    if tail > tol * scale.max(1.0) {
        return Err(Error::NoConvergence(format!(
            "gradient averages move by {tail:e} over the small radii"
        )));
    }
    Ok(GradientTrace {
        value,
        radii: rs,
        averages,
        increments,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn box_field(n: usize, cells: usize, f: impl Fn(&[f64], f64) -> f64) -> GridField {
        GridField::from_fn(Grid::box_grid(n, 1.0, 1.0, cells).unwrap(), f)
    }

    #[test]
    fn energies_of_simple_fields() {
        let w = WeightParam::from_a(1, 0.0).unwrap();
        let c = box_field(1, 64, |_, _| 2.5);
        let ball = BallSpec::centered(1, 0.9).unwrap();
        for m in [EnergyMode::Full, EnergyMode::Tangential, EnergyMode::Normal] {
            assert!(ball_energy(&c, &ball, &w, m).unwrap().abs() < 1e-20);
        }
        let lin = GridField::from_fn(Grid::box_grid(1, 2.0, 1.0, 256).unwrap(), |x, _| x[0]);
        let ball = BallSpec::centered(1, 1.0).unwrap();
        let et = ball_energy(&lin, &ball, &w, EnergyMode::Tangential).unwrap();
        assert!((et - PI).abs() < 2e-3, "{et}");
        assert!(ball_energy(&lin, &ball, &w, EnergyMode::Normal).unwrap().abs() < 1e-20);
    }

    #[test]
    fn campanato_of_quadratic_harmonic() {
        let a = 0.5;
        let w = WeightParam::from_a(1, a).unwrap();
        let u = box_field(1, 256, move |x, y| x[0] * x[0] - y * y / (1.0 + a));
        let rho = 0.5;
        let ball = BallSpec::centered(1, rho).unwrap();
        let osc = campanato_seminorm(&u, &ball, &w).unwrap();
        // 4 ∫ x^2 |y|^a over B_ρ
        let m = crate::weight::MonomialExponent::new(vec![2], 0);
        let exact = 4.0 * crate::weight::ball_moment(&w, &m, rho);
        assert!((osc / exact - 1.0).abs() < 5e-3, "{osc} {exact}");
    }

    #[test]
    fn power_law_fit_is_exact() {
        let radii: Vec<f64> = (0..8).map(|i| 0.05 * 1.3f64.powi(i)).collect();
        let vals: Vec<f64> = radii.iter().map(|r| 3.0 * r.powf(2.7)).collect();
        let fit = GrowthFit::from_values(&radii, &vals).unwrap();
        assert!((fit.slope - 2.7).abs() < 1e-12);
        let rep = monotonicity_from_values(&radii, &vals, 2.7);
        assert!(rep.passed);
    }

    #[test]
    fn window_too_small() {
        let u = box_field(1, 32, |_, _| 0.0);
        let w = WeightParam::from_a(1, 0.0).unwrap();
        assert!(matches!(
            fit_growth(&u, &[0.0], &RadiiSpec::Geometric { count: 8 }, Functional::L2, &w),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn hl_examples() {
        let p = HLParams { a_hl: 1.0, gamma: 2.0, beta: 1.0, b_hl: 0.0, r0: 1.0 };
        let phi: Vec<(f64, f64)> = (0..20).map(|i| 0.9f64.powi(20 - i)).map(|r| (r, r * r)).collect();
        let rep = hl_iterate(&phi, &p).unwrap();
        assert!(rep.conclusion_holds);
        let p1 = HLParams { b_hl: 1.0, ..p };
        let phi: Vec<(f64, f64)> = (0..20).map(|i| 0.9f64.powi(20 - i)).map(|r| (r, r)).collect();
        assert!(hl_iterate(&phi, &p1).unwrap().conclusion_holds);
        let jump = vec![(0.25, 0.0), (0.5, 1.0), (1.0, 1.0)];
        match hl_iterate(&jump, &p) {
            Err(Error::HypothesisFailed { rho, r, .. }) => assert_eq!(rho / r, 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gradient_trace_of_linear() {
        let w = WeightParam::from_a(1, -0.5).unwrap();
        let u = box_field(1, 256, |x, y| 0.3 + x[0] + y * y);
        let t = gradient_trace(&u, &[0.0], &RadiiSpec::Geometric { count: 8 }, &w, 1e-6).unwrap();
        assert!((t.value[0] - 1.0).abs() < 1e-10);
    }
}
