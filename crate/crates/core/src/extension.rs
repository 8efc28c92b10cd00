//! Poisson extension of thin data, the weighted normal derivative
//! `lim y^a ∂_y u` and the principal-value fractional Laplacian, with the
//! constants that tie the two routes together.
//!
//! Normalization: `(-Δ)^s` has Fourier symbol `|ξ|^{2s}`. With that
//! choice, `(-Δ)^s u = -c_frac lim_{y→0+} y^a ∂_y u` for the extension `u`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad;
use crate::weight::WeightParam;

use std::f64::consts::PI;

/// How far a thin function reaches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Support {
    /// Vanishes outside `|x| <= radius`.
    Compact { radius: f64 },
    /// `|u(x)| <= constant (1 + |x|)^{-exponent}`; negative exponents allow growth.
    Decay { exponent: f64, constant: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    /// `|D^2 u| <= bound`.
    C2 { bound: f64 },
    /// Smooth sample with a bound on the second derivatives.
    Smooth { bound: f64 },
}

impl Smoothness {
    fn c2_bound(&self) -> Option<f64> {
        match *self {
            Smoothness::C0 => None,
            Smoothness::C2 { bound } | Smoothness::Smooth { bound } => Some(bound),
        }
    }
}

type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function on the thin space `R^n` with a support and smoothness descriptor.
#[derive(Clone)]
pub struct ThinFunction {
    pub n: usize,
    f: Eval,
    pub support: Support,
    pub smoothness: Smoothness,
}

impl std::fmt::Debug for ThinFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThinFunction")
            .field("n", &self.n)
            .field("support", &self.support)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl ThinFunction {
    pub fn new(
        n: usize,
        support: Support,
        smoothness: Smoothness,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            f: Arc::new(f),
            support,
            smoothness,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    /// `amp exp(-|x - c|^2 / (2 σ^2))`.
    pub fn gaussian(center: Vec<f64>, sigma: f64, amp: f64) -> Self {
        let n = center.len();
        let decay = Support::Decay {
            exponent: 40.0,
            constant: amp.abs() * gaussian_decay_constant(&center, sigma, 40.0),
        };
        let bound = amp.abs() * (n as f64 + 2.0) / (sigma * sigma);
        Self::new(n, decay, Smoothness::Smooth { bound }, move |x| {
            let r2: f64 = x.iter().zip(&center).map(|(p, q)| (p - q).powi(2)).sum();
            amp * (-r2 / (2.0 * sigma * sigma)).exp()
        })
    }

    /// `amp exp(1 - 1/(1 - |x - c|^2/ρ^2))` inside the ball, zero outside.
    pub fn bump(center: Vec<f64>, rho: f64, amp: f64) -> Self {
        let n = center.len();
        let reach = center.iter().map(|c| c * c).sum::<f64>().sqrt() + rho;
        let bound = 10.0 * amp.abs() / (rho * rho);
        Self::new(n, Support::Compact { radius: reach }, Smoothness::Smooth { bound }, move |x| {
            let r2: f64 = x.iter().zip(&center).map(|(p, q)| (p - q).powi(2)).sum::<f64>() / (rho * rho);
            if r2 >= 1.0 {
                0.0
            } else {
                amp * (1.0 - 1.0 / (1.0 - r2)).exp()
            }
        })
    }

    /// Integrability against `(1 + |x|^{n+2s})^{-1}`.
    pub fn check_admissible(&self, s: f64) -> Result<()> {
        match self.support {
            Support::Compact { radius } if radius > 0.0 => Ok(()),
            Support::Compact { .. } => Err(Error::Parameter("support radius must be positive".into())),
            Support::Decay { exponent, .. } => {
                if exponent + 2.0 * s > 0.0 {
                    Ok(())
                } else {
                    Err(Error::DecayTooSlow(format!(
                        "decay exponent {exponent} with s = {s}: need exponent > -2s"
                    )))
                }
            }
        }
    }
}

fn gaussian_decay_constant(center: &[f64], sigma: f64, p: f64) -> f64 {
    // sup_r (1 + r)^p exp(-(r - |c|)_+^2 / (2σ^2)), on a coarse scan
    let c = center.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut best: f64 = 1.0;
    for i in 0..4000 {
        let r = i as f64 * (c + 20.0 * sigma + 1.0) / 4000.0;
        let d = (r - c).max(0.0);
        best = best.max((p * (1.0 + r).ln() - d * d / (2.0 * sigma * sigma)).exp());
    }
    1.01 * best
}

/// Quadrature settings shared by the extension routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub rel_tol: f64,
    /// Polynomial exactness of the direction rule on `S^{n-1}`.
    pub direction_degree: usize,
    /// Ladder `y = 2^{-j}` for `j` in this inclusive range.
    pub ladder: (u32, u32),
    /// Correction exponents removed by Richardson extrapolation; `None` uses
    /// `1 + a, 2, 3 + a, 4`.
    pub exponents: Option<Vec<f64>>,
    /// Calibration Gaussian widths.
    pub widths: Vec<f64>,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            direction_degree: 48,
            ladder: (3, 12),
            exponents: None,
            widths: vec![0.5, 0.75, 1.0, 1.5],
        }
    }
}

impl QuadSpec {
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("serializable");
        hex::encode(Sha256::digest(&bytes))
    }

    fn exponents_for(&self, a: f64) -> Vec<f64> {
        self.exponents.clone().unwrap_or_else(|| vec![1.0 + a, 2.0, 3.0 + a, 4.0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    pub n: usize,
    pub s: f64,
    /// Normalizes `∫ P(x, y) dx = 1`.
    pub c_poisson: f64,
    /// `(-Δ)^s u = -c_frac lim y^a ∂_y u`.
    pub c_frac: f64,
    /// Constant in front of the principal-value integral.
    pub c_pv: f64,
    /// Max relative mismatch between the routes over the calibration family.
    pub calibration_residual: f64,
    pub quad_hash: String,
}

impl KernelConstants {
    /// Coupling in the discrete drift condition.
    pub fn drift_scale(&self) -> f64 {
        1.0 / self.c_frac
    }
}

fn directions(n: usize, degree: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    quad::sphere_rule(n - 1, degree)
}

/// `1 / ∫ P(x, 1) dx` by direct quadrature in polar form.
pub fn poisson_constant(w: &WeightParam, spec: &QuadSpec) -> Result<f64> {
    let n = w.n();
    let a = w.a();
    // ∫_0^{π/2} sin^{n-1}θ cos^{-a}θ dθ
    let i = quad::tanh_sinh(
        |th, _, dr| th.sin().powi(n as i32 - 1) * dr.sin().powf(-a),
        0.0,
        PI / 2.0,
        spec.rel_tol,
    )?;
    Ok(1.0 / (quad::sphere_area(n - 1) * i))
}

/// `P(z, y) = c_P y^{1-a} / (|z|^2 + y^2)^{(n+1-a)/2}`.
pub fn poisson_kernel(w: &WeightParam, c_poisson: f64, z: &[f64], y: f64) -> f64 {
    let a = w.a();
    let r2: f64 = z.iter().map(|v| v * v).sum();
    let m = (w.n() as f64 + 1.0 - a) / 2.0;
    c_poisson * y.powf(1.0 - a) / (r2 + y * y).powf(m)
}

fn sphere_mean_sum(u: &ThinFunction, x: &[f64], rho: f64, dirs: &[(Vec<f64>, f64)], buf: &mut [f64]) -> f64 {
    let mut acc = 0.0;
    for (d, wd) in dirs {
        for i in 0..x.len() {
            buf[i] = x[i] + rho * d[i];
        }
        acc += wd * u.eval(buf);
    }
    acc
}

fn extend_once(u: &ThinFunction, w: &WeightParam, c_p: f64, x: &[f64], y: f64, tol: f64, dirs: &[(Vec<f64>, f64)]) -> Result<f64> {
    let a = w.a();
    let n = w.n();
    let hi = match u.support {
        Support::Compact { radius } => {
            let reach = x.iter().map(|v| v * v).sum::<f64>().sqrt() + radius;
            (reach / y).atan()
        }
        Support::Decay { .. } => PI / 2.0,
    };
    let mut buf = vec![0.0; n];
    let v = quad::tanh_sinh(
        |th, _, dr| {
            let cosv = if hi == PI / 2.0 { dr.sin() } else { th.cos() };
            let rho = y * th.sin() / cosv;
            th.sin().powi(n as i32 - 1) * cosv.powf(-a) * sphere_mean_sum(u, x, rho, dirs, &mut buf)
        },
        0.0,
        hi,
        tol,
    )?;
    Ok(c_p * v)
}

/// `u(x, y) = (u * P(., y))(x)` at each `(x, y)` with `y > 0`.
///
/// Each value is computed at two direction-rule resolutions; disagreement
/// above `100 rel_tol` is reported as a quadrature failure.
pub fn poisson_extend(
    u: &ThinFunction,
    w: &WeightParam,
    c_poisson: f64,
    points: &[(Vec<f64>, f64)],
    spec: &QuadSpec,
) -> Result<Vec<f64>> {
    u.check_admissible(w.s())?;
    if points.iter().any(|p| p.1 <= 0.0 || p.0.len() != w.n()) {
        return Err(Error::Parameter("evaluation points need y > 0 and matching dimension".into()));
    }
    let d1 = directions(w.n(), spec.direction_degree)?;
    let d2 = directions(w.n(), 2 * spec.direction_degree)?;
    points
        .par_iter()
        .map(|(x, y)| {
            let v1 = extend_once(u, w, c_poisson, x, *y, spec.rel_tol, &d1)?;
            if w.n() == 1 {
                return Ok(v1);
            }
            let v2 = extend_once(u, w, c_poisson, x, *y, spec.rel_tol, &d2)?;
            let scale = v2.abs().max(1e-3);
            if (v1 - v2).abs() > 100.0 * spec.rel_tol.max(1e-12) * scale.max(1.0) {
                return Err(Error::QuadratureFailure(format!(
                    "extension at y = {y} moved by {:e} under direction refinement",
                    (v1 - v2).abs()
                )));
            }
            Ok(v2)
        })
        .collect()
}

/// Symmetrized spherical difference `∫_S (2u(x) - u(x+ρω) - u(x-ρω))/2 dω`.
fn second_difference(u: &ThinFunction, x: &[f64], rho: f64, u0: f64, dirs: &[(Vec<f64>, f64)], buf: &mut [f64]) -> f64 {
    let mut acc = 0.0;
    for (d, wd) in dirs {
        for i in 0..x.len() {
            buf[i] = x[i] + rho * d[i];
        }
        let p = u.eval(buf);
        for i in 0..x.len() {
            buf[i] = x[i] - rho * d[i];
        }
        let m = u.eval(buf);
        acc += wd * (2.0 * u0 - p - m) / 2.0;
    }
    acc
}

const RHO_FLOOR: f64 = 1e-4;

/// `∫ (2u(x) - u(x+z) - u(x-z)) / (2|z|^{n+2s}) dz` without the constant.
pub fn pv_integral(u: &ThinFunction, w: &WeightParam, x: &[f64], spec: &QuadSpec) -> Result<f64> {
    let s = w.s();
    let n = w.n();
    let bound = u.smoothness.c2_bound().ok_or(Error::Smoothness)?;
    u.check_admissible(s)?;
    let dirs = directions(n, spec.direction_degree)?;
    let area = quad::sphere_area(n - 1);
    let u0 = u.eval(x);
    let mut buf = vec![0.0; n];
    // near field, t = ρ^{2-2s}
    let e = 2.0 - 2.0 * s;
    let abs_tol = spec.rel_tol * bound.max(u0.abs()).max(1e-3) * area;
    let (near, _) = quad::gauss_kronrod(
        |t| {
            if t <= 0.0 {
                return 0.0;
            }
            // below RHO_FLOOR the difference quotient is frozen: rounding
            // would dominate the O(ρ^2) difference
            let rho = t.powf(1.0 / e).max(RHO_FLOOR);
            second_difference(u, x, rho, u0, &dirs, &mut buf) / (rho * rho) / e
        },
        0.0,
        1.0,
        abs_tol,
        spec.rel_tol,
    )?;
    // far field: constant part in closed form, then ρ = 1/t
    let constant = u0 * area / (2.0 * s);
    let mean = |t: f64, buf: &mut [f64]| -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let rho = 1.0 / t;
        let mut acc = 0.0;
        for (d, wd) in &dirs {
            for i in 0..n {
                buf[i] = x[i] + rho * d[i];
            }
            let p = u.eval(buf);
            for i in 0..n {
                buf[i] = x[i] - rho * d[i];
            }
            acc += wd * (p + u.eval(buf)) / 2.0;
        }
        acc * t.powf(2.0 * s - 1.0)
    };
    let far = match u.support {
        Support::Compact { radius } => {
            let reach = x.iter().map(|v| v * v).sum::<f64>().sqrt() + radius;
            if reach <= 1.0 {
                0.0
            } else {
                quad::gauss_kronrod(|t| mean(t, &mut buf), 1.0 / reach, 1.0, abs_tol, spec.rel_tol)?.0
            }
        }
        Support::Decay { .. } => quad::tanh_sinh(|t, _, _| mean(t, &mut buf), 0.0, 1.0, spec.rel_tol)?,
    };
    Ok(near + constant - far)
}

/// `c_pv` times [`pv_integral`].
pub fn pv_fractional_laplacian(
    u: &ThinFunction,
    w: &WeightParam,
    x: &[f64],
    k: &KernelConstants,
    spec: &QuadSpec,
) -> Result<f64> {
    Ok(k.c_pv * pv_integral(u, w, x, spec)?)
}

/// A limit with its extrapolation error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub error: f64,
}

/// Richardson extrapolation of `g(y)` as `y → 0` along `y_j = 2^{-j}`,
/// removing the corrections `y^{p}` for `p` in `exponents`, in order.
pub fn richardson_limit(values: &[f64], exponents: &[f64]) -> Result<LimitEstimate> {
    if values.len() < exponents.len() + 2 {
        return Err(Error::Parameter("ladder too short for the correction model".into()));
    }
    let mut col = values.to_vec();
    for &p in exponents {
        let f = 2f64.powf(p);
        col = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    let last = col[col.len() - 1];
    let error = (last - col[col.len() - 2]).abs();
    Ok(LimitEstimate { value: last, error })
}

fn ladder(spec: &QuadSpec) -> Vec<f64> {
    (spec.ladder.0..=spec.ladder.1).map(|j| 2f64.powi(-(j as i32))).collect()
}

fn check_limit(est: LimitEstimate, scale: f64, spec: &QuadSpec) -> Result<LimitEstimate> {
    let tol = 1e-6_f64.max(1e3 * spec.rel_tol);
    if est.error <= tol * est.value.abs().max(scale) {
        Ok(est)
    } else {
        Err(Error::NoConvergence(format!(
            "normal-derivative ladder: value {} with spread {:e}",
            est.value, est.error
        )))
    }
}

/// `lim y^a ∂_y u(x, y)` for an extension given as a closure.
///
/// `∂_y` is taken by a fourth-order relative difference at each ladder point.
pub fn frac_normal_derivative(
    u_ext: &(dyn Fn(&[f64], f64) -> f64 + Sync),
    w: &WeightParam,
    x: &[f64],
    spec: &QuadSpec,
) -> Result<LimitEstimate> {
    let a = w.a();
    let values: Vec<f64> = ladder(spec)
        .iter()
        .map(|&y| {
            let d = 1e-2 * y;
            let g = |t: f64| u_ext(x, t);
            let du = (8.0 * (g(y + d) - g(y - d)) - (g(y + 2.0 * d) - g(y - 2.0 * d))) / (12.0 * d);
            y.powf(a) * du
        })
        .collect();
    let est = richardson_limit(&values, &spec.exponents_for(a))?;
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    check_limit(est, scale, spec)
}

/// `y^a ∂_y u(x, y)` for the Poisson extension of `u`, via the kernel
/// `y^a ∂_y P` against symmetrized differences.
pub fn weighted_normal_derivative_at(
    u: &ThinFunction,
    w: &WeightParam,
    c_poisson: f64,
    x: &[f64],
    y: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    let a = w.a();
    let n = w.n();
    let m = (n as f64 + 1.0 - a) / 2.0;
    let dirs = directions(n, spec.direction_degree)?;
    let u0 = u.eval(x);
    let mut buf = vec![0.0; n];
    let kernel = |r: f64| {
        let q = r * r + y * y;
        c_poisson * ((1.0 - a) * q.powf(-m) - (n as f64 + 1.0 - a) * y * y * q.powf(-m - 1.0))
    };
    let mut integrand = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        -second_difference(u, x, r, u0, &dirs, &mut buf) * kernel(r) * r.powi(n as i32 - 1)
    };
    let reach = match u.support {
        Support::Compact { radius } => x.iter().map(|v| v * v).sum::<f64>().sqrt() + radius,
        Support::Decay { .. } => f64::INFINITY,
    };
    let scale = u.smoothness.c2_bound().unwrap_or(1.0);
    let abs_tol = spec.rel_tol * scale;
    let mut acc = 0.0;
    let mut lo = 0.0;
    let mut hi = y;
    while lo < reach.min(1.0) {
        let top = hi.min(reach).min(1.0);
        acc += quad::gauss_kronrod(&mut integrand, lo, top, abs_tol, spec.rel_tol)?.0;
        lo = top;
        hi *= 4.0;
    }
    if reach > 1.0 {
        // r = 1/t beyond r = 1
        let t_lo = if reach.is_finite() { 1.0 / reach } else { 0.0 };
        let mut far = |t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                integrand(1.0 / t) / (t * t)
            }
        };
        acc += if reach.is_finite() {
            quad::gauss_kronrod(&mut far, t_lo, 1.0, abs_tol, spec.rel_tol)?.0
        } else {
            quad::tanh_sinh(|t, _, _| far(t), 0.0, 1.0, spec.rel_tol)?
        };
    }
    if reach.is_finite() {
        // beyond the support the difference is the constant 2u(x); the kernel
        // integrates in closed form since kernel(r) r^{n-1} = -d/dr[c r^n q^{-m}]
        let tail = second_difference(u, x, 2.0 * reach + 1.0, u0, &dirs, &mut buf);
        acc -= tail * c_poisson * reach.powi(n as i32) * (reach * reach + y * y).powf(-m);
    }
    Ok(acc)
}

/// `lim y^a ∂_y u` of the Poisson extension of `u` at `x`.
pub fn frac_normal_derivative_of(
    u: &ThinFunction,
    w: &WeightParam,
    c_poisson: f64,
    x: &[f64],
    spec: &QuadSpec,
) -> Result<LimitEstimate> {
    u.check_admissible(w.s())?;
    let values = ladder(spec)
        .iter()
        .map(|&y| weighted_normal_derivative_at(u, w, c_poisson, x, y, spec))
        .collect::<Result<Vec<f64>>>()?;
    let est = richardson_limit(&values, &spec.exponents_for(w.a()))?;
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    check_limit(est, scale, spec)
}

/// `(-Δ)^s` of `exp(-|x|^2/(2σ^2))` at the origin from its Fourier
/// transform, with symbol `|ξ|^{2s}`.
pub fn gaussian_symbol_value(n: usize, s: f64, sigma: f64) -> f64 {
    // (2π)^{-n} (2πσ^2)^{n/2} |S^{n-1}| ∫ ξ^{2s+n-1} exp(-σ^2 ξ^2/2) dξ
    let nf = n as f64;
    let k = 2.0 * s + nf - 1.0;
    let c = sigma * sigma / 2.0;
    let radial = (ln_gamma((k + 1.0) / 2.0) - ((k + 1.0) / 2.0) * c.ln()).exp() / 2.0;
    (2.0 * PI).powf(-nf) * (2.0 * PI * sigma * sigma).powf(nf / 2.0) * quad::sphere_area(n - 1) * radial
}

/// Fixes `c_poisson`, `c_pv` and `c_frac` for `w`.
///
/// `c_pv` comes from the Fourier normalization on a unit Gaussian; `c_frac`
/// is the least-squares ratio `-pv / lim y^a ∂_y u` over Gaussians of the
/// configured widths.
pub fn calibrate_constants(w: &WeightParam, spec: &QuadSpec) -> Result<KernelConstants> {
    if spec.widths.len() < 3 {
        return Err(Error::Parameter("calibration needs at least three widths".into()));
    }
    let n = w.n();
    let s = w.s();
    let c_poisson = poisson_constant(w, spec)?;
    let origin = vec![0.0; n];
    let unit = ThinFunction::gaussian(origin.clone(), 1.0, 1.0);
    let c_pv = gaussian_symbol_value(n, s, 1.0) / pv_integral(&unit, w, &origin, spec)?;
    let pairs = spec
        .widths
        .par_iter()
        .map(|&sigma| {
            let g = ThinFunction::gaussian(origin.clone(), sigma, 1.0);
            let pv = c_pv * pv_integral(&g, w, &origin, spec)?;
            let d = frac_normal_derivative_of(&g, w, c_poisson, &origin, spec)?.value;
            Ok((pv, d))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let num: f64 = pairs.iter().map(|(p, d)| -p * d).sum();
    let den: f64 = pairs.iter().map(|(_, d)| d * d).sum();
    let c_frac = num / den;
    let residual = pairs
        .iter()
        .map(|(p, d)| ((p + c_frac * d) / p).abs())
        .fold(0.0, f64::max);
    let limit = 1e-4;
    if residual > limit {
        return Err(Error::CalibrationInconsistent { residual, limit });
    }
    Ok(KernelConstants {
        n,
        s,
        c_poisson,
        c_frac,
        c_pv,
        calibration_residual: residual,
        quad_hash: spec.hash(),
    })
}

/// Sidecar path for a cached calibration.
pub fn calibration_cache_path(dir: &Path, w: &WeightParam, spec: &QuadSpec) -> PathBuf {
    let tag = format!("n{}_s{:.12}_{}", w.n(), w.s(), &spec.hash()[..16]);
    dir.join(format!("calibration_{tag}.json"))
}

/// [`calibrate_constants`] with a JSON sidecar cache in `dir`.
pub fn calibrate_constants_cached(w: &WeightParam, spec: &QuadSpec, dir: &Path) -> Result<KernelConstants> {
    let path = calibration_cache_path(dir, w, spec);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(k) = serde_json::from_str::<KernelConstants>(&text) {
            if k.n == w.n() && k.s == w.s() && k.quad_hash == spec.hash() {
                return Ok(k);
            }
        }
    }
    let k = calibrate_constants(w, spec)?;
    fs::create_dir_all(dir)?;
    fs::write(&path, serde_json::to_string_pretty(&k)?)?;
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(n: usize, s: f64) -> WeightParam {
        WeightParam::from_s(n, s).unwrap()
    }

    #[test]
    fn classical_poisson_constant() {
        let c = poisson_constant(&ws(1, 0.5), &QuadSpec::default()).unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-8);
    }

    #[test]
    fn poisson_constant_closed_form() {
        for (n, s) in [(1, 0.25), (2, 0.75), (3, 0.6)] {
            let w = ws(n, s);
            let c = poisson_constant(&w, &QuadSpec::default()).unwrap();
            let a = w.a();
            let nf = n as f64;
            let exact = (ln_gamma((nf + 1.0 - a) / 2.0) - ln_gamma((1.0 - a) / 2.0)).exp() / PI.powf(nf / 2.0);
            assert!((c / exact - 1.0).abs() < 1e-9, "n={n} s={s}");
        }
    }

    #[test]
    fn constant_and_linear_pv_vanish() {
        let w = ws(1, 0.75);
        let one = ThinFunction::new(1, Support::Decay { exponent: 0.0, constant: 1.0 }, Smoothness::C2 { bound: 0.0 }, |_| 1.0);
        let v = pv_integral(&one, &w, &[0.3], &QuadSpec::default()).unwrap();
        assert!(v.abs() < 1e-10);
        let lin = ThinFunction::new(1, Support::Decay { exponent: -1.0, constant: 1.0 }, Smoothness::C2 { bound: 0.0 }, |x| x[0]);
        let v = pv_integral(&lin, &w, &[0.3], &QuadSpec::default()).unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn smoothness_and_decay_errors() {
        let w = ws(1, 0.25);
        let rough = ThinFunction::new(1, Support::Compact { radius: 1.0 }, Smoothness::C0, |x| x[0].abs());
        assert!(matches!(pv_integral(&rough, &w, &[0.0], &QuadSpec::default()), Err(Error::Smoothness)));
        let grow = ThinFunction::new(1, Support::Decay { exponent: -1.0, constant: 1.0 }, Smoothness::C2 { bound: 0.0 }, |x| x[0]);
        assert!(matches!(
            poisson_extend(&grow, &w, 0.3, &[(vec![0.0], 1.0)], &QuadSpec::default()),
            Err(Error::DecayTooSlow(_))
        ));
    }

    #[test]
    fn gaussian_pv_matches_fourier_oracle() {
        // oracle: Fourier radial integral by adaptive quadrature, then the
        // kernel constant 4^s Γ(n/2+s) / (π^{n/2} |Γ(-s)|)
        let (n, s, sigma) = (1usize, 0.75, 1.0);
        let w = ws(n, s);
        let g = ThinFunction::gaussian(vec![0.0], sigma, 1.0);
        let raw = pv_integral(&g, &w, &[0.0], &QuadSpec::default()).unwrap();
        let (fourier, _) = quad::gauss_kronrod(
            |xi| xi.powf(2.0 * s) * (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp() / PI,
            0.0,
            40.0,
            1e-14,
            1e-13,
        )
        .unwrap();
        let gamma_neg_s = PI / ((PI * s).sin() * (ln_gamma(1.0 + s)).exp());
        let cns = 4f64.powf(s) * (ln_gamma(0.5 + s)).exp() / (PI.sqrt() * gamma_neg_s.abs());
        assert!((cns * raw / fourier - 1.0).abs() < 1e-6, "{} {}", cns * raw, fourier);
    }

    #[test]
    fn compact_bump_routes_agree() {
        // oracle: c_pv ∫_0^∞ (2u(0) - u(z) - u(-z)) z^{-1-2s} dz by adaptive
        // quadrature, u = exp(1 - 1/(1 - x^2)), s = 3/4
        let oracle = 1.692042609998663;
        let w = ws(1, 0.75);
        let spec = QuadSpec::default();
        let k = calibrate_constants(&w, &spec).unwrap();
        let u = ThinFunction::bump(vec![0.0], 1.0, 1.0);
        let pv = pv_fractional_laplacian(&u, &w, &[0.0], &k, &spec).unwrap();
        let ext = -k.c_frac * frac_normal_derivative_of(&u, &w, k.c_poisson, &[0.0], &spec).unwrap().value;
        assert!((pv - oracle).abs() < 1e-8, "{pv}");
        assert!((ext - oracle).abs() < 1e-7, "{ext}");
    }

    #[test]
    fn pv_scaling() {
        let w = ws(1, 0.6);
        let lam = 1.7;
        let g1 = ThinFunction::gaussian(vec![0.0], 1.0, 1.0);
        let g2 = ThinFunction::gaussian(vec![0.0], 1.0 / lam, 1.0);
        let spec = QuadSpec::default();
        let v1 = pv_integral(&g1, &w, &[0.0], &spec).unwrap();
        let v2 = pv_integral(&g2, &w, &[0.0], &spec).unwrap();
        assert!((v2 / (lam.powf(1.2) * v1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn odd_model_limit() {
        for s in [0.3, 0.5, 0.8] {
            let w = ws(1, s);
            let a = w.a();
            let f = move |_: &[f64], y: f64| y * y.abs().powf(-a);
            let est = frac_normal_derivative(&f, &w, &[0.0], &QuadSpec::default()).unwrap();
            assert!((est.value - (1.0 - a)).abs() < 1e-8);
        }
    }

    #[test]
    fn extension_of_constant_and_linear() {
        let spec = QuadSpec::default();
        for (n, s) in [(1usize, 0.75), (2, 0.6)] {
            let w = ws(n, s);
            let c = poisson_constant(&w, &spec).unwrap();
            let one = ThinFunction::new(n, Support::Decay { exponent: 0.0, constant: 1.0 }, Smoothness::C2 { bound: 0.0 }, |_| 1.0);
            let lin = ThinFunction::new(n, Support::Decay { exponent: -1.0, constant: 2.0 }, Smoothness::C2 { bound: 0.0 }, |x| x[0]);
            let pts: Vec<(Vec<f64>, f64)> = vec![(vec![0.2; n], 0.1), (vec![-0.5; n], 1.0), (vec![1.0; n], 10.0)];
            for (v, p) in poisson_extend(&one, &w, c, &pts, &spec).unwrap().iter().zip(&pts) {
                assert!((v - 1.0).abs() < 1e-8, "{v} at {p:?}");
            }
            for (v, p) in poisson_extend(&lin, &w, c, &pts, &spec).unwrap().iter().zip(&pts) {
                assert!((v - p.0[0]).abs() < 1e-8, "{v} at {p:?}");
            }
        }
    }

    #[test]
    fn richardson_removes_model_terms() {
        let vals: Vec<f64> = (3..=12)
            .map(|j| {
                let y = 2f64.powi(-j);
                2.0 + 3.0 * y.powf(0.5) - y * y + 0.1 * y.powf(2.5)
            })
            .collect();
        let est = richardson_limit(&vals, &[0.5, 2.0, 2.5]).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
    }
}
