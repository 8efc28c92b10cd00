//! One-dimensional quadrature rules and simple product rules on spheres.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) on `[a, b]`.
///
/// Returns `(value, error estimate)`.
pub fn gauss_kronrod(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut segs = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureFailure("non-finite integrand".into()));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        let (i, _) = segs
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .3.total_cmp(&q.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = segs.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        segs.push((lo, mid, v1, e1));
        segs.push((mid, hi, v2, e2));
    }
    let total: f64 = segs.iter().map(|s| s.2).sum();
    let err: f64 = segs.iter().map(|s| s.3).sum();
    Err(Error::QuadratureFailure(format!(
        "Gauss-Kronrod budget exhausted: value {total}, error {err:e}"
    )))
}

/// Tanh-sinh (double exponential) rule on `[a, b]`; tolerates integrable
/// endpoint singularities.
///
/// `f` receives `(x, distance to a, distance to b)` so that singular factors
/// can be evaluated without cancellation near the endpoints.
pub fn tanh_sinh(
    mut f: impl FnMut(f64, f64, f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {

    let d = 0.5 * (b - a);
    let tmax = 6.5;
    let mut eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = 0.5 * PI * t.cosh() / (cu * cu);
        // 1 - tanh(u) and 1 + tanh(u) without cancellation
        let e = (-2.0 * u.abs()).exp();
        let small = 2.0 * e / (1.0 + e);
        let (dl, dr) = if u >= 0.0 {
            (d * (2.0 - small), d * small)
        } else {
            (d * small, d * (2.0 - small))
        };
        if dl <= 0.0 || dr <= 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = if u >= 0.0 { b - dr } else { a + dl };
        let v = f(x, dl, dr);
        if v.is_finite() {
            d * w * v
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h;
    for _ in 0..9 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= rel_tol * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureFailure(format!(
        "tanh-sinh did not settle on [{a}, {b}]: last value {prev}"
    )))
}

/// Gauss rule for the weight `(1 - t)^alpha t^beta` on `[0, 1]`
/// (Golub-Welsch on the Jacobi recurrence).
pub fn gauss_jacobi_unit(order: usize, alpha: f64, beta: f64) -> Vec<(f64, f64)> {
    assert!(order >= 1 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let mut jm = DMatrix::<f64>::zeros(order, order);
    for k in 0..order {
        let kf = k as f64;
        jm[(k, k)] = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        if k + 1 < order {
            let m = kf + 1.0;
            let b2 = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * m * (m + alpha) * (m + beta) * (m + ab)
                    / ((2.0 * m + ab).powi(2) * (2.0 * m + ab + 1.0) * (2.0 * m + ab - 1.0))
            };
            jm[(k, k + 1)] = b2.sqrt();
            jm[(k + 1, k)] = b2.sqrt();
        }
    }
    // integral of the weight on [0, 1]
    let mu0 = (ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(ab + 2.0)).exp();
    let eig = SymmetricEigen::new(jm);
    let mut out: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let v = eig.eigenvectors[(0, i)];
            (0.5 * (1.0 + x), mu0 * v * v)
        })
        .collect();
    out.sort_by(|p, q| p.0.total_cmp(&q.0));
    out
}

/// Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    gauss_jacobi_unit(order, 0.0, 0.0)
        .into_iter()
        .map(|(t, w)| (a + (b - a) * t, (b - a) * w))
        .collect()
}

/// Product rule on the unit sphere `S^d` in `R^{d+1}`, exact for polynomials of
/// total degree `<= degree`. Supported for `d <= 2`.
pub fn sphere_rule(d: usize, degree: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match d {
        0 => Ok(vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
        1 => {
            let m = (degree + 1).max(4);
            Ok((0..m)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / m as f64;
                    (vec![th.cos(), th.sin()], 2.0 * PI / m as f64)
                })
                .collect())
        }
        2 => {
            let m = (degree + 1).max(4);
            let zs = gauss_legendre(degree / 2 + 1, -1.0, 1.0);
            let mut out = Vec::with_capacity(m * zs.len());
            for (z, wz) in zs {
                let r = (1.0 - z * z).sqrt();
                for k in 0..m {
                    let th = 2.0 * PI * k as f64 / m as f64;
                    out.push((vec![r * th.cos(), r * th.sin(), z], wz * 2.0 * PI / m as f64));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Parameter(format!("sphere rule on S^{d} not supported"))),
    }
}

/// Surface measure of `S^d`.
pub fn sphere_area(d: usize) -> f64 {
    let k = (d + 1) as f64 / 2.0;
    2.0 * (k * PI.ln() - ln_gamma(k)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomial_and_smooth() {
        let (v, _) = gauss_kronrod(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let (v, _) = gauss_kronrod(|x| x.exp(), 0.0, 1.0, 1e-14, 1e-14).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        // integral of x^{-1/2} on [0, 1] = 2
        let v = tanh_sinh(|_, dl, _| dl.powf(-0.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        // integral of cos^{-0.9} on [0, pi/2] = B(1/2, 0.05)/2
        let v = tanh_sinh(|_, _, dr| dr.sin().powf(-0.9), 0.0, PI / 2.0, 1e-10).unwrap();
        let b = (ln_gamma(0.5) + ln_gamma(0.05) - ln_gamma(0.55)).exp() / 2.0;
        assert!((v - b).abs() < 1e-7 * b, "{v} {b}");
    }

    #[test]
    fn jacobi_rule_moments() {
        let (al, be) = (0.5, -0.75);
        let rule = gauss_jacobi_unit(6, al, be);
        for k in 0..12 {
            let num: f64 = rule.iter().map(|(t, w)| w * t.powi(k)).sum();
            let exact = (ln_gamma(al + 1.0) + ln_gamma(be + 1.0 + k as f64)
                - ln_gamma(al + be + 2.0 + k as f64))
            .exp();
            assert!((num - exact).abs() < 1e-13 * exact.max(1.0), "k={k}");
        }
    }

    #[test]
    fn chebyshev_limit_is_handled() {
        let rule = gauss_jacobi_unit(5, -0.5, -0.5);
        let total: f64 = rule.iter().map(|p| p.1).sum();
        assert!((total - PI).abs() < 1e-13);
    }

    #[test]
    fn sphere_rules_integrate_moments() {
        for d in 0..=2 {
            let rule = sphere_rule(d, 6).unwrap();
            let area: f64 = rule.iter().map(|p| p.1).sum();
            assert!((area - sphere_area(d)).abs() < 1e-12);
            // x_0^2 averages to 1/(d+1)
            let m2: f64 = rule.iter().map(|(p, w)| w * p[0] * p[0]).sum();
            assert!((m2 / area - 1.0 / (d + 1) as f64).abs() < 1e-13);
        }
        assert!(sphere_rule(3, 4).is_err());
    }
}
