//! Geometry of the weight `|y|^a` on `R^{n+1}`: parameters, weighted sphere
//! and ball moments of monomials, and thin-centered balls.
//!
//! Moments are exposed two ways. [`sphere_moment`] returns a float. For the
//! exact polynomial algebra, [`sphere_moment_ratio`] returns the moment divided
//! by the weighted measure of the unit sphere as an exact rational: every
//! Gamma ratio that appears differs in its arguments by integers, so it
//! collapses to a product of Pochhammer factors.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// The triple `(n, s, a = 1 - 2s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightParam {
    n: usize,
    s: f64,
    a: f64,
    /// `a` as an exact rational, when it was supplied as one.
    #[serde(with = "crate::exact::opt_rational_serde")]
    a_exact: Option<BigRational>,
}

impl WeightParam {
    /// Builds the parameter from the fractional order `s`.
    pub fn from_s(n: usize, s: f64) -> Result<Self> {
        Self::validate(n, s)?;
        Ok(Self {
            n,
            s,
            a: 1.0 - 2.0 * s,
            a_exact: None,
        })
    }

    /// Builds the parameter from `a = num/den` exactly.
    pub fn from_a_ratio(n: usize, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parameter("zero denominator".into()));
        }
        let a_exact = BigRational::new(BigInt::from(num), BigInt::from(den));
        let a = num as f64 / den as f64;
        let s = (1.0 - a) / 2.0;
        Self::validate(n, s)?;
        if a_exact.abs() >= BigRational::one() {
            return Err(Error::Parameter(format!("a = {a} outside (-1, 1)")));
        }
        Ok(Self {
            n,
            s,
            a,
            a_exact: Some(a_exact),
        })
    }

    /// Builds the parameter from a float `a`.
    pub fn from_a(n: usize, a: f64) -> Result<Self> {
        Self::from_s(n, (1.0 - a) / 2.0)
    }

    fn validate(n: usize, s: f64) -> Result<()> {
        if n == 0 {
            return Err(Error::Parameter("thin dimension must be positive".into()));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Parameter(format!("s = {s} outside (0, 1)")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `a` as a rational: the supplied exact value, or the exact binary value
    /// of the float.
    pub fn a_rational(&self) -> BigRational {
        match &self.a_exact {
            Some(q) => q.clone(),
            None => BigRational::from_float(self.a).expect("finite a"),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.a_exact.is_some()
    }

    /// Homogeneity of the weighted measure, `n + 1 + a`.
    pub fn homogeneity(&self) -> f64 {
        self.n as f64 + 1.0 + self.a
    }

    /// `int_{dB_1} |y|^a dS`.
    pub fn unit_sphere_measure(&self) -> f64 {
        let n = self.n as f64;
        let ln = n * ln_gamma(0.5) + ln_gamma((self.a + 1.0) / 2.0)
            - ln_gamma((n + 1.0 + self.a) / 2.0);
        2.0 * ln.exp()
    }

    /// `omega_{n+1+a} = int_{B_1} |y|^a`.
    pub fn unit_ball_volume(&self) -> f64 {
        self.unit_sphere_measure() / self.homogeneity()
    }
}

/// Exponents of a monomial `x^alpha y^b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonomialExponent {
    pub alpha: Vec<u32>,
    pub b: u32,
}

impl MonomialExponent {
    pub fn new(alpha: Vec<u32>, b: u32) -> Self {
        Self { alpha, b }
    }

    pub fn constant(n: usize) -> Self {
        Self {
            alpha: vec![0; n],
            b: 0,
        }
    }

    pub fn degree(&self) -> u32 {
        self.alpha.iter().sum::<u32>() + self.b
    }

    pub fn has_odd_exponent(&self) -> bool {
        self.b % 2 == 1 || self.alpha.iter().any(|p| p % 2 == 1)
    }
}

/// A ball `B_r(x0, 0)` centered on the thin space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallSpec {
    /// `center` holds the `n` thin coordinates.
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Parameter(format!("ball radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    /// Accepts a full point `(x, y)`; rejects centers off the thin space.
    pub fn from_point(point: &[f64], radius: f64) -> Result<Self> {
        let (y, x) = point
            .split_last()
            .ok_or_else(|| Error::Parameter("empty center".into()))?;
        if *y != 0.0 {
            return Err(Error::Parameter(format!(
                "ball center must lie on y = 0, got y = {y}"
            )));
        }
        Self::new(x.to_vec(), radius)
    }

    pub fn centered(n: usize, radius: f64) -> Result<Self> {
        Self::new(vec![0.0; n], radius)
    }
}

/// Rising factorial `z (z+1) ... (z+k-1)`.
fn pochhammer(z: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut t = z.clone();
    for _ in 0..k {
        acc *= &t;
        t += BigRational::one();
    }
    acc
}

/// `int_{dB_1} x^alpha y^b |y|^a dS` divided by `int_{dB_1} |y|^a dS`, exactly.
pub fn sphere_moment_ratio(w: &WeightParam, m: &MonomialExponent) -> BigRational {
    if m.has_odd_exponent() {
        return BigRational::zero();
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let a = w.a_rational();
    let one = BigRational::one();
    let mut num = BigRational::one();
    for &p in &m.alpha {
        num *= pochhammer(&half, p / 2);
    }
    num *= pochhammer(&((&a + &one) * &half), m.b / 2);
    let total = BigRational::from_integer(BigInt::from(w.n() as u64 + 1)) + &a;
    let den = pochhammer(&(total * &half), m.degree() / 2);
    num / den
}

/// `int_{dB_1 in R^{n+1}} x^alpha y^b |y|^a dS`.
pub fn sphere_moment(w: &WeightParam, m: &MonomialExponent) -> f64 {
    if m.has_odd_exponent() {
        return 0.0;
    }
    let n = w.n() as f64;
    let mut ln = 0.0;
    let mut total = 0.0;
    for &p in &m.alpha {
        let p = p as f64;
        ln += ln_gamma((p + 1.0) / 2.0);
        total += p;
    }
    let pb = m.b as f64 + w.a();
    ln += ln_gamma((pb + 1.0) / 2.0);
    total += pb;
    ln -= ln_gamma((n + 1.0 + total) / 2.0);
    2.0 * ln.exp()
}

/// `int_{B_r} x^alpha y^b |y|^a`.
pub fn ball_moment(w: &WeightParam, m: &MonomialExponent, r: f64) -> f64 {
    let d = w.homogeneity() + m.degree() as f64;
    r.powf(d) * sphere_moment(w, m) / d
}

/// `int_{B_1} x^alpha y^b |y|^a` divided by `omega_{n+1+a}`, exactly.
pub fn ball_moment_ratio(w: &WeightParam, m: &MonomialExponent) -> BigRational {
    let hom = BigRational::from_integer(BigInt::from(w.n() as u64 + 1)) + w.a_rational();
    let d = &hom + BigRational::from_integer(BigInt::from(m.degree()));
    sphere_moment_ratio(w, m) * hom / d
}

/// Float view of an exact rational.
pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}
