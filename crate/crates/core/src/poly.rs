//! Exact polynomial algebra for the reduced operator `|y|^{-a} L_a`.
//!
//! Polynomials live in `Q[x_1, .., x_n, y]` with [`BigRational`]
//! coefficients. For polynomials even in `y`,
//! `|y|^{-a} L_a p = Δp + a p_y / y` is again a polynomial, which is what
//! makes the constructive Dirichlet solve and the orthogonal harmonic bases
//! below exact.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, RatMatrix};
use crate::quad;
use crate::weight::{sphere_moment_ratio, to_f64, MonomialExponent, WeightParam};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// A polynomial in `(x, y)` with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoly {
    n: usize,
    coeffs: BTreeMap<MonomialExponent, BigRational>,
    parity: Parity,
    degree: Option<u32>,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl WeightedPoly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            coeffs: BTreeMap::new(),
            parity: Parity::Even,
            degree: None,
        }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MonomialExponent, BigRational)>) -> Self {
        let mut p = Self::zero(n);
        for (m, c) in terms {
            assert_eq!(m.alpha.len(), n, "monomial dimension mismatch");
            *p.coeffs.entry(m).or_insert_with(BigRational::zero) += c;
        }
        p.normalize();
        p
    }

    pub fn monomial(n: usize, alpha: Vec<u32>, b: u32, c: BigRational) -> Self {
        Self::from_terms(n, [(MonomialExponent::new(alpha, b), c)])
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        Self::monomial(n, vec![0; n], 0, c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, BigRational::one())
    }

    pub fn x(n: usize, i: usize) -> Self {
        let mut alpha = vec![0; n];
        alpha[i] = 1;
        Self::monomial(n, alpha, 0, BigRational::one())
    }

    pub fn y(n: usize) -> Self {
        Self::monomial(n, vec![0; n], 1, BigRational::one())
    }

    /// `|x|^2 + y^2`.
    pub fn radius_squared(n: usize) -> Self {
        let mut terms = Vec::new();
        for i in 0..n {
            let mut alpha = vec![0; n];
            alpha[i] = 2;
            terms.push((MonomialExponent::new(alpha, 0), BigRational::one()));
        }
        terms.push((MonomialExponent::new(vec![0; n], 2), BigRational::one()));
        Self::from_terms(n, terms)
    }

    /// `1 - |x|^2 - y^2`.
    pub fn one_minus_r2(n: usize) -> Self {
        Self::one(n).sub(&Self::radius_squared(n))
    }

    fn normalize(&mut self) {
        self.coeffs.retain(|_, c| !c.is_zero());
        let (mut even, mut odd) = (false, false);
        for m in self.coeffs.keys() {
            if m.b % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
        }
        self.parity = match (even, odd) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        };
        self.degree = self.coeffs.keys().map(MonomialExponent::degree).max();
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_even(&self) -> bool {
        self.parity == Parity::Even
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonomialExponent, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn coefficient(&self, m: &MonomialExponent) -> BigRational {
        self.coeffs.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            *out.coeffs.entry(m.clone()).or_insert_with(BigRational::zero) += c;
        }
        out.normalize();
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&(-BigRational::one())))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v *= c;
        }
        out.normalize();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (m1, c1) in &self.coeffs {
            for (m2, c2) in &other.coeffs {
                let alpha = m1.alpha.iter().zip(&m2.alpha).map(|(p, q)| p + q).collect();
                let m = MonomialExponent::new(alpha, m1.b + m2.b);
                *out.coeffs.entry(m).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        out.normalize();
        out
    }

    pub fn dx(&self, i: usize) -> Self {
        let terms = self.coeffs.iter().filter(|(m, _)| m.alpha[i] > 0).map(|(m, c)| {
            let mut alpha = m.alpha.clone();
            let p = alpha[i];
            alpha[i] -= 1;
            (MonomialExponent::new(alpha, m.b), c * rat(p as i64))
        });
        Self::from_terms(self.n, terms.collect::<Vec<_>>())
    }

    pub fn dy(&self) -> Self {
        let terms = self.coeffs.iter().filter(|(m, _)| m.b > 0).map(|(m, c)| {
            (MonomialExponent::new(m.alpha.clone(), m.b - 1), c * rat(m.b as i64))
        });
        Self::from_terms(self.n, terms.collect::<Vec<_>>())
    }

    /// `p(x, 0)`.
    pub fn restrict_thin(&self) -> Self {
        let terms = self
            .coeffs
            .iter()
            .filter(|(m, _)| m.b == 0)
            .map(|(m, c)| (m.clone(), c.clone()));
        Self::from_terms(self.n, terms.collect::<Vec<_>>())
    }

    pub fn homogeneous_part(&self, k: u32) -> Self {
        let terms = self
            .coeffs
            .iter()
            .filter(|(m, _)| m.degree() == k)
            .map(|(m, c)| (m.clone(), c.clone()));
        Self::from_terms(self.n, terms.collect::<Vec<_>>())
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.coeffs.keys().map(MonomialExponent::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (xi, &p) in x.iter().zip(&m.alpha) {
                    t *= xi.powi(p as i32);
                }
                t * y.powi(m.b as i32)
            })
            .sum()
    }

    pub fn eval_exact(&self, x: &[BigRational], y: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.coeffs {
            let mut t = c.clone();
            for (xi, &p) in x.iter().zip(&m.alpha) {
                t *= num::pow(xi.clone(), p as usize);
            }
            t *= num::pow(y.clone(), m.b as usize);
            acc += t;
        }
        acc
    }

    /// `p(x + shift, y)`, exactly.
    pub fn translate_thin(&self, shift: &[BigRational]) -> Self {
        let mut out = Self::one(self.n).scale(&BigRational::zero());
        for (m, c) in &self.coeffs {
            let mut term = Self::constant(self.n, c.clone());
            for i in 0..self.n {
                let lin = Self::x(self.n, i).add(&Self::constant(self.n, shift[i].clone()));
                for _ in 0..m.alpha[i] {
                    term = term.mul(&lin);
                }
            }
            term = term.mul(&Self::monomial(self.n, vec![0; self.n], m.b, BigRational::one()));
            out = out.add(&term);
        }
        out
    }

    /// Float copy for fast evaluation.
    pub fn to_float(&self) -> FloatPoly {
        FloatPoly {
            terms: self
                .coeffs
                .iter()
                .map(|(m, c)| (m.alpha.clone(), m.b, to_f64(c)))
                .collect(),
        }
    }

    /// Exact quotient by `1 - |x|^2 - y^2`, or `None` when it does not divide.
    pub fn divide_by_one_minus_r2(&self) -> Option<Self> {
        // Division by a single generator: the generator is trivially a
        // Groebner basis, so a zero remainder is equivalent to divisibility.
        // Order: total degree, then power of y. Leading term of the divisor
        // is -y^2.
        let g = Self::one_minus_r2(self.n);
        let key = |m: &MonomialExponent| (m.degree(), m.b, m.alpha.clone());
        let mut rem = self.clone();
        let mut quot = Self::zero(self.n);
        let mut leftover = Self::zero(self.n);
        while let Some((m, c)) = rem
            .coeffs
            .iter()
            .max_by(|p, q| key(p.0).cmp(&key(q.0)))
            .map(|(m, c)| (m.clone(), c.clone()))
        {
            if m.b >= 2 {
                let t = Self::monomial(self.n, m.alpha.clone(), m.b - 2, -c);
                rem = rem.sub(&t.mul(&g));
                quot = quot.add(&t);
            } else {
                let t = Self::from_terms(self.n, [(m.clone(), c)]);
                rem = rem.sub(&t);
                leftover = leftover.add(&t);
            }
        }
        leftover.is_zero().then_some(quot)
    }

    pub fn max_abs_coefficient(&self) -> BigRational {
        self.coeffs.values().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero)
    }

    fn coefficients_in(&self, basis: &[MonomialExponent]) -> Vec<BigRational> {
        basis.iter().map(|m| self.coefficient(m)).collect()
    }

    fn from_coefficients(n: usize, basis: &[MonomialExponent], v: &[BigRational]) -> Self {
        Self::from_terms(n, basis.iter().cloned().zip(v.iter().cloned()))
    }

    /// Coefficients as `(alpha, b, "p/q")` rows.
    pub fn to_json_terms(&self) -> Vec<JsonTerm> {
        self.coeffs
            .iter()
            .map(|(m, c)| JsonTerm {
                alpha: m.alpha.clone(),
                b: m.b,
                value: exact::rational_to_string(c),
            })
            .collect()
    }
}

impl fmt::Display for WeightedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", exact::rational_to_string(c))?;
            for (i, p) in m.alpha.iter().enumerate() {
                if *p > 0 {
                    write!(f, "*x{}^{}", i + 1, p)?;
                }
            }
            if m.b > 0 {
                write!(f, "*y^{}", m.b)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JsonTerm {
    pub alpha: Vec<u32>,
    pub b: u32,
    pub value: String,
}

/// Float polynomial for evaluation on grids and spheres.
#[derive(Debug, Clone)]
pub struct FloatPoly {
    terms: Vec<(Vec<u32>, u32, f64)>,
}

impl FloatPoly {
    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, b, c)| {
                let mut t = *c;
                for (xi, &p) in x.iter().zip(alpha) {
                    t *= xi.powi(p as i32);
                }
                t * y.powi(*b as i32)
            })
            .sum()
    }
}

/// All monomials `x^alpha y^b` with `b` even and total degree `<= max_deg`,
/// ordered by degree.
pub fn even_monomials(n: usize, max_deg: u32) -> Vec<MonomialExponent> {
    (0..=max_deg).flat_map(|k| homogeneous_even_monomials(n, k)).collect()
}

/// Monomials of exact degree `k`, even in `y`.
pub fn homogeneous_even_monomials(n: usize, k: u32) -> Vec<MonomialExponent> {
    let mut out = Vec::new();
    for b in (0..=k).step_by(2) {
        for alpha in compositions(n, k - b) {
            out.push(MonomialExponent::new(alpha, b));
        }
    }
    out
}

fn compositions(n: usize, total: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(n - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `|y|^{-a} L_a p = Δp + a p_y / y` for `p` even in `y`.
pub fn reduce_la(p: &WeightedPoly, w: &WeightParam) -> Result<WeightedPoly> {
    if !p.is_even() {
        return Err(Error::Parity);
    }
    let a = w.a_rational();
    let n = p.n();
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        for i in 0..n {
            let pi = m.alpha[i];
            if pi >= 2 {
                let mut alpha = m.alpha.clone();
                alpha[i] -= 2;
                terms.push((MonomialExponent::new(alpha, m.b), c * rat((pi * (pi - 1)) as i64)));
            }
        }
        if m.b >= 2 {
            // b(b-1) from the Laplacian, a*b from a p_y / y
            let factor = rat(m.b as i64) * (rat(m.b as i64 - 1) + &a);
            terms.push((MonomialExponent::new(m.alpha.clone(), m.b - 2), c * factor));
        }
    }
    Ok(WeightedPoly::from_terms(n, terms))
}

/// `T q = |y|^{-a} L_a ((1 - |x|^2 - y^2) q)`.
pub fn t_map(q: &WeightedPoly, w: &WeightParam) -> Result<WeightedPoly> {
    if !q.is_even() {
        return Err(Error::Parity);
    }
    reduce_la(&WeightedPoly::one_minus_r2(q.n()).mul(q), w)
}

/// Dirichlet solver for `L_a` on `B_1` with data in `P*_m`, with the
/// inverse of `T` on `P*_{m-2}` precomputed exactly.
pub struct PolyDirichletSolver {
    w: WeightParam,
    n: usize,
    max_degree: u32,
    basis: Vec<MonomialExponent>,
    t_inverse: RatMatrix,
    determinant: BigRational,
}

impl PolyDirichletSolver {
    pub fn new(w: &WeightParam, max_degree: u32) -> Result<Self> {
        let n = w.n();
        let basis = if max_degree >= 2 {
            even_monomials(n, max_degree - 2)
        } else {
            Vec::new()
        };
        let t = t_matrix(w, &basis)?;
        let (t_inverse, determinant) = if basis.is_empty() {
            (Vec::new(), BigRational::one())
        } else {
            let sol = exact::inverse(&t).map_err(|e| {
                Error::SingularSystem(format!("T on P*_{} is singular: {e}", max_degree - 2))
            })?;
            (sol.x, sol.determinant)
        };
        Ok(Self {
            w: w.clone(),
            n,
            max_degree,
            basis,
            t_inverse,
            determinant,
        })
    }

    /// `det T` on `P*_{m-2}` in the monomial basis.
    pub fn determinant(&self) -> &BigRational {
        &self.determinant
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// `p~ = p - (1 - |X|^2) T^{-1}(|y|^{-a} L_a p)`.
    pub fn solve(&self, p: &WeightedPoly) -> Result<WeightedPoly> {
        if !p.is_even() {
            return Err(Error::Parity);
        }
        let deg = p.degree().unwrap_or(0);
        if deg > self.max_degree {
            return Err(Error::Parameter(format!(
                "degree {deg} exceeds solver degree {}",
                self.max_degree
            )));
        }
        if deg < 2 {
            return Ok(p.clone());
        }
        let f = reduce_la(p, &self.w)?;
        let fv = f.coefficients_in(&self.basis);
        let qv: Vec<BigRational> = self
            .t_inverse
            .iter()
            .map(|row| row.iter().zip(&fv).map(|(a, b)| a * b).sum())
            .collect();
        let q = WeightedPoly::from_coefficients(self.n, &self.basis, &qv);
        Ok(p.sub(&WeightedPoly::one_minus_r2(self.n).mul(&q)))
    }
}

/// Matrix of `T` in the monomial basis (columns are images of basis monomials).
pub fn t_matrix(w: &WeightParam, basis: &[MonomialExponent]) -> Result<RatMatrix> {
    let n = w.n();
    let dim = basis.len();
    let mut m = vec![vec![BigRational::zero(); dim]; dim];
    for (j, e) in basis.iter().enumerate() {
        let img = t_map(&WeightedPoly::from_terms(n, [(e.clone(), BigRational::one())]), w)?;
        for (i, b) in basis.iter().enumerate() {
            m[i][j] = img.coefficient(b);
        }
        if img.terms().any(|(mono, _)| !basis.contains(mono)) {
            return Err(Error::Precondition("T image left P*_{m-2}".into()));
        }
    }
    Ok(m)
}

/// Solution of the `L_a` Dirichlet problem on `B_1` with boundary data `p`.
pub fn poly_dirichlet_solve(p: &WeightedPoly, w: &WeightParam) -> Result<WeightedPoly> {
    PolyDirichletSolver::new(w, p.degree().unwrap_or(0).max(2))?.solve(p)
}

/// `<p, q>_{L^2(dB_1, |y|^a)}` divided by the weighted measure of `dB_1`.
pub fn sphere_inner_ratio(p: &WeightedPoly, q: &WeightedPoly, w: &WeightParam) -> BigRational {
    let mut acc = BigRational::zero();
    for (m1, c1) in p.terms() {
        for (m2, c2) in q.terms() {
            let alpha = m1.alpha.iter().zip(&m2.alpha).map(|(a, b)| a + b).collect();
            let m = MonomialExponent::new(alpha, m1.b + m2.b);
            let r = sphere_moment_ratio(w, &m);
            if !r.is_zero() {
                acc += c1 * c2 * r;
            }
        }
    }
    acc
}

/// Homogeneous degree-`k` polynomials, even in `y`, annihilated by `|y|^{-a} L_a`.
pub fn harmonic_homogeneous_space(w: &WeightParam, k: u32) -> Result<Vec<WeightedPoly>> {
    let n = w.n();
    let cols = homogeneous_even_monomials(n, k);
    if k < 2 {
        return Ok(cols
            .into_iter()
            .map(|m| WeightedPoly::from_terms(n, [(m, BigRational::one())]))
            .collect());
    }
    let rows = homogeneous_even_monomials(n, k - 2);
    let mut mat = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
    for (j, m) in cols.iter().enumerate() {
        let img = reduce_la(&WeightedPoly::from_terms(n, [(m.clone(), BigRational::one())]), w)?;
        for (i, r) in rows.iter().enumerate() {
            mat[i][j] = img.coefficient(r);
        }
    }
    Ok(exact::null_space(&mat, cols.len())
        .into_iter()
        .map(|v| WeightedPoly::from_coefficients(n, &cols, &v))
        .collect())
}

/// One element of a [`HarmonicBasis`]: an exact, unnormalized polynomial and
/// its weighted sphere norm.
#[derive(Debug, Clone)]
pub struct BasisMember {
    pub degree: u32,
    pub poly: WeightedPoly,
    /// `||poly||^2` divided by the weighted measure of `dB_1`, exactly.
    pub norm_sq_ratio: BigRational,
    /// `||poly||_{L^2(dB_1, |y|^a)}`.
    pub norm: f64,
    float: FloatPoly,
}

impl BasisMember {
    /// Value of the normalized member.
    pub fn eval_normalized(&self, x: &[f64], y: f64) -> f64 {
        self.float.eval(x, y) / self.norm
    }
}

/// Orthonormal homogeneous `L_a`-harmonic polynomials, even in `y`, up to a degree.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub w: WeightParam,
    pub degree_max: u32,
    pub members: Vec<BasisMember>,
    pub gram_normalized: bool,
}

impl HarmonicBasis {
    pub fn new(w: &WeightParam, degree_max: u32) -> Result<Self> {
        let measure = w.unit_sphere_measure();
        let mut members = Vec::new();
        for k in 0..=degree_max {
            let raw = harmonic_homogeneous_space(w, k)?;
            // classical Gram-Schmidt, exact, within degree k
            let mut ortho: Vec<(WeightedPoly, BigRational)> = Vec::new();
            for v in raw {
                let mut u = v.clone();
                for (q, qq) in &ortho {
                    let c = sphere_inner_ratio(&v, q, w) / qq;
                    u = u.sub(&q.scale(&c));
                }
                let uu = sphere_inner_ratio(&u, &u, w);
                if uu.is_zero() {
                    continue;
                }
                ortho.push((u, uu));
            }
            for (poly, nsq) in ortho {
                let norm = (to_f64(&nsq) * measure).sqrt();
                let float = poly.to_float();
                members.push(BasisMember {
                    degree: k,
                    poly,
                    norm_sq_ratio: nsq,
                    norm,
                    float,
                });
            }
        }
        Ok(Self {
            w: w.clone(),
            degree_max,
            members,
            gram_normalized: true,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members_of_degree(&self, k: u32) -> impl Iterator<Item = &BasisMember> {
        self.members.iter().filter(move |m| m.degree == k)
    }

    /// Exact Gram matrix of the unnormalized members (relative to the sphere measure).
    pub fn exact_gram(&self) -> RatMatrix {
        self.members
            .iter()
            .map(|p| {
                self.members
                    .iter()
                    .map(|q| sphere_inner_ratio(&p.poly, &q.poly, &self.w))
                    .collect()
            })
            .collect()
    }

    /// Gram matrix of the normalized members.
    pub fn gram(&self) -> Vec<Vec<f64>> {
        let exact = self.exact_gram();
        let measure = self.w.unit_sphere_measure();
        exact
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, g)| {
                        if g.is_zero() {
                            0.0
                        } else {
                            to_f64(g) * measure / (self.members[i].norm * self.members[j].norm)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// JSON document of the basis with exact coefficients.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.w.n(),
            "a": exact::rational_to_string(&self.w.a_rational()),
            "degree_max": self.degree_max,
            "sphere_measure": self.w.unit_sphere_measure(),
            "members": self.members.iter().map(|m| serde_json::json!({
                "degree": m.degree,
                "terms": m.poly.to_json_terms(),
                "norm_sq_ratio": exact::rational_to_string(&m.norm_sq_ratio),
                "norm": m.norm,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Options for [`expand`].
#[derive(Debug, Clone)]
pub struct ExpandOptions {
    /// Radius `rho` of the interior sphere on which tail energies are reported.
    pub tail_radius: f64,
    /// Relative self-estimate tolerance of the sphere quadrature.
    pub quad_tol: f64,
    /// Extra Gauss-Jacobi nodes on top of the minimum exact order.
    pub extra_order: usize,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        Self {
            tail_radius: 0.5,
            quad_tol: 1e-8,
            extra_order: 8,
        }
    }
}

/// Coefficients of boundary data in a [`HarmonicBasis`].
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    /// `(degree, coefficient)` per basis member, in basis order.
    pub coefficients: Vec<(u32, f64)>,
    pub truncation_degree: u32,
    /// `sum a_k^2` per degree block on `dB_1`.
    pub block_energies: Vec<f64>,
    /// Tail `sum_{j >= k}` of block energies scaled to `dB_rho`.
    pub tail_energies: Vec<f64>,
    /// Max interior error of the degree-`m` truncation against a reference.
    pub evaluation_errors: Vec<f64>,
    /// Quadrature self-estimate (max coefficient change between two orders).
    pub quadrature_estimate: f64,
}

impl ExpansionReport {
    /// Ratios of successive nonzero tail energies.
    pub fn tail_ratios(&self) -> Vec<f64> {
        self.tail_energies
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

fn sphere_coefficients(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    basis: &HarmonicBasis,
    order: usize,
) -> Result<Vec<f64>> {
    let w = &basis.w;
    let n = w.n();
    // t = y^2 on [0, 1], weight t^{(a-1)/2} (1 - t)^{(n-2)/2}
    let rule = quad::gauss_jacobi_unit(order, (n as f64 - 2.0) / 2.0, (w.a() - 1.0) / 2.0);
    let dirs = quad::sphere_rule(n - 1, 2 * basis.degree_max as usize + 6)?;
    let mut acc = vec![0.0; basis.len()];
    let mut point = vec![0.0; n + 1];
    for &(t, wt) in &rule {
        let rho = (1.0 - t).max(0.0).sqrt();
        let y = t.sqrt();
        for (dir, wd) in &dirs {
            for sign in [1.0, -1.0] {
                for i in 0..n {
                    point[i] = rho * dir[i];
                }
                point[n] = sign * y;
                let fv = f(&point);
                let weight = 0.5 * wt * wd;
                for (k, m) in basis.members.iter().enumerate() {
                    acc[k] += weight * fv * m.eval_normalized(&point[..n], point[n]);
                }
            }
        }
    }
    Ok(acc)
}

/// Expands boundary data `f` (evaluated at points of `dB_1`, given as
/// `(x_1, .., x_n, y)`) in an orthonormal harmonic basis.
///
/// When `reference` is supplied, each truncation is compared with it at the
/// `interior` sample points.
pub fn expand(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    basis: &HarmonicBasis,
    opts: &ExpandOptions,
    reference: Option<(&dyn Fn(&[f64]) -> f64, &[Vec<f64>])>,
) -> Result<ExpansionReport> {
    if !basis.gram_normalized {
        return Err(Error::Precondition("basis must be Gram-normalized".into()));
    }
    let base = basis.degree_max as usize + 2 + opts.extra_order;
    let c1 = sphere_coefficients(f, basis, base)?;
    let c2 = sphere_coefficients(f, basis, base + 6)?;
    let scale = c2.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let estimate = c1
        .iter()
        .zip(&c2)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    if estimate > opts.quad_tol * scale.max(1.0) {
        return Err(Error::QuadratureFailure(format!(
            "sphere coefficients moved by {estimate:e} between orders"
        )));
    }
    let dmax = basis.degree_max;
    let mut block = vec![0.0; dmax as usize + 1];
    for (m, c) in basis.members.iter().zip(&c2) {
        block[m.degree as usize] += c * c;
    }
    let hom = basis.w.homogeneity() - 1.0;
    let rho = opts.tail_radius;
    let scaled: Vec<f64> = block
        .iter()
        .enumerate()
        .map(|(k, e)| e * rho.powf(2.0 * k as f64 + hom))
        .collect();
    let mut tails = vec![0.0; scaled.len()];
    let mut run = 0.0;
    for k in (0..scaled.len()).rev() {
        run += scaled[k];
        tails[k] = run;
    }
    let mut evaluation_errors = Vec::new();
    if let Some((truth, points)) = reference {
        let n = basis.w.n();
        for m in 0..=dmax {
            let mut worst: f64 = 0.0;
            for p in points {
                let approx: f64 = basis
                    .members
                    .iter()
                    .zip(&c2)
                    .filter(|(b, _)| b.degree <= m)
                    .map(|(b, c)| c * b.eval_normalized(&p[..n], p[n]))
                    .sum();
                worst = worst.max((approx - truth(p)).abs());
            }
            evaluation_errors.push(worst);
        }
    }
    Ok(ExpansionReport {
        coefficients: basis.members.iter().map(|m| m.degree).zip(c2).collect(),
        truncation_degree: dmax,
        block_energies: block,
        tail_energies: tails,
        evaluation_errors,
        quadrature_estimate: estimate,
    })
}

/// Checks the unique-continuation property of even `L_a`-harmonic
/// polynomials: if `u(., 0)` vanishes then `u` vanishes.
///
/// Returns `true` when the property holds for `u` (trivially so when the
/// thin restriction is nonzero).
pub fn uniqueness_check(u: &WeightedPoly, w: &WeightParam) -> Result<bool> {
    let r = reduce_la(u, w)?;
    if !r.is_zero() {
        return Err(Error::Precondition("input is not L_a-harmonic".into()));
    }
    let trace = u.restrict_thin();
    if !trace.is_zero() {
        return Ok(true);
    }
    Ok(u.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    fn wq(n: usize, p: i64, d: i64) -> WeightParam {
        WeightParam::from_a_ratio(n, p, d).unwrap()
    }

    fn y2(n: usize) -> WeightedPoly {
        WeightedPoly::monomial(n, vec![0; n], 2, BigRational::one())
    }

    #[test]
    fn reduce_examples() {
        for (p, d) in [(-1, 2), (0, 1), (1, 2), (1, 3)] {
            let w = wq(1, p, d);
            let a = q(p, d);
            assert!(reduce_la(&WeightedPoly::one(1), &w).unwrap().is_zero());
            let r = reduce_la(&y2(1), &w).unwrap();
            assert_eq!(r, WeightedPoly::constant(1, q(2, 1) * (q(1, 1) + &a)));
            // x^2 - y^2/(1+a)
            let h = WeightedPoly::monomial(1, vec![2], 0, q(1, 1))
                .sub(&y2(1).scale(&(q(1, 1) / (q(1, 1) + &a))));
            assert!(reduce_la(&h, &w).unwrap().is_zero());
        }
    }

    #[test]
    fn reduce_rejects_odd() {
        let w = wq(1, 0, 1);
        assert!(matches!(reduce_la(&WeightedPoly::y(1), &w), Err(Error::Parity)));
        assert!(matches!(t_map(&WeightedPoly::y(1), &w), Err(Error::Parity)));
    }

    #[test]
    fn t_of_one() {
        for n in 1..=3 {
            let w = wq(n, 1, 2);
            let t1 = t_map(&WeightedPoly::one(n), &w).unwrap();
            let expect = -q(2 * n as i64, 1) - q(2, 1) * (q(1, 1) + q(1, 2));
            assert_eq!(t1, WeightedPoly::constant(n, expect));
            assert!(t_map(&WeightedPoly::zero(n), &w).unwrap().is_zero());
        }
    }

    #[test]
    fn t_injective_on_p3_for_half() {
        let w = wq(1, 1, 2);
        let solver = PolyDirichletSolver::new(&w, 5).unwrap();
        assert!(!solver.determinant().is_zero());
        let basis = even_monomials(1, 3);
        let t = t_matrix(&w, &basis).unwrap();
        assert_eq!(exact::rank(&t, basis.len()), basis.len());
    }

    #[test]
    fn worked_y_squared_solve() {
        for (p, d) in [(-1, 2), (0, 1), (1, 2)] {
            let w = wq(1, p, d);
            let a = q(p, d);
            let sol = poly_dirichlet_solve(&y2(1), &w).unwrap();
            let one = q(1, 1);
            let c = (&one + &a) / (q(2, 1) + &a);
            let expect = WeightedPoly::one(1)
                .sub(&WeightedPoly::monomial(1, vec![2], 0, one.clone()))
                .scale(&c)
                .add(&y2(1).scale(&(&one / (q(2, 1) + &a))));
            assert_eq!(sol, expect);
            assert!(reduce_la(&sol, &w).unwrap().is_zero());
            assert!(y2(1).sub(&sol).divide_by_one_minus_r2().is_some());
        }
    }

    #[test]
    fn harmonic_input_is_fixed() {
        let w = wq(2, -1, 2);
        let h = WeightedPoly::monomial(2, vec![1, 1], 0, q(1, 1));
        assert_eq!(poly_dirichlet_solve(&h, &w).unwrap(), h);
    }

    #[test]
    fn x2y2_solve_is_harmonic() {
        let w = wq(1, 0, 1);
        let p = WeightedPoly::monomial(1, vec![2], 2, q(1, 1));
        let sol = poly_dirichlet_solve(&p, &w).unwrap();
        assert!(reduce_la(&sol, &w).unwrap().is_zero());
        assert!(p.sub(&sol).divide_by_one_minus_r2().is_some());
    }

    #[test]
    fn division_detects_non_divisible() {
        let p = WeightedPoly::monomial(1, vec![2], 0, q(1, 1));
        assert!(p.divide_by_one_minus_r2().is_none());
        let f = WeightedPoly::monomial(2, vec![1, 2], 2, q(3, 4)).add(&WeightedPoly::one(2));
        let g = WeightedPoly::one_minus_r2(2).mul(&f);
        assert_eq!(g.divide_by_one_minus_r2(), Some(f));
    }

    #[test]
    fn basis_low_degrees() {
        let w = wq(1, 1, 2);
        let b = HarmonicBasis::new(&w, 4).unwrap();
        let d0: Vec<_> = b.members_of_degree(0).collect();
        assert_eq!(d0.len(), 1);
        let expect = 1.0 / w.unit_sphere_measure().sqrt();
        assert!((d0[0].eval_normalized(&[0.3], 0.2) - expect).abs() < 1e-14);
        let d1: Vec<_> = b.members_of_degree(1).collect();
        assert_eq!(d1.len(), 1);
        assert_eq!(d1[0].poly, WeightedPoly::x(1, 0));
        // one even harmonic per degree when n = 1
        for k in 0..=4 {
            assert_eq!(b.members_of_degree(k).count(), 1);
        }
    }

    #[test]
    fn basis_gram_identity_and_exact_cross_orthogonality() {
        for n in 1..=2 {
            let w = wq(n, -1, 2);
            let b = HarmonicBasis::new(&w, 6).unwrap();
            let exact = b.exact_gram();
            let g = b.gram();
            for i in 0..b.len() {
                for j in 0..b.len() {
                    if i != j {
                        assert!(exact[i][j].is_zero());
                    } else {
                        assert!((g[i][j] - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn homogeneous_members_scale() {
        let w = wq(2, 1, 2);
        let b = HarmonicBasis::new(&w, 5).unwrap();
        let lam = q(3, 2);
        let x = [q(1, 3), q(-2, 5)];
        let y = q(1, 7);
        for m in &b.members {
            let scaled_x: Vec<_> = x.iter().map(|v| v * &lam).collect();
            let lhs = m.poly.eval_exact(&scaled_x, &(&y * &lam));
            let rhs = m.poly.eval_exact(&x, &y) * num::pow(lam.clone(), m.degree as usize);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn gradient_orthogonality_across_degrees() {
        let w = wq(1, 1, 2);
        let b = HarmonicBasis::new(&w, 6).unwrap();
        for p in &b.members {
            for r in &b.members {
                if p.degree != r.degree && p.degree > 0 && r.degree > 0 {
                    let ip = sphere_inner_ratio(&p.poly.dx(0), &r.poly.dx(0), &w);
                    assert!(ip.is_zero());
                }
            }
        }
    }

    #[test]
    fn expand_basis_element_is_unit_vector() {
        let w = wq(1, 0, 1);
        let b = HarmonicBasis::new(&w, 6).unwrap();
        let target = b.members_of_degree(2).next().unwrap().clone();
        let f = move |p: &[f64]| target.eval_normalized(&p[..1], p[1]);
        let rep = expand(&f, &b, &ExpandOptions::default(), None).unwrap();
        for (k, (deg, c)) in rep.coefficients.iter().enumerate() {
            let expect = if *deg == 2 && k == 2 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-10, "k={k} c={c}");
        }
    }

    #[test]
    fn expand_y_squared_matches_dirichlet_solve() {
        for (p, d) in [(-1, 2), (1, 2)] {
            let w = wq(1, p, d);
            let b = HarmonicBasis::new(&w, 4).unwrap();
            let f = |pt: &[f64]| pt[1] * pt[1];
            let rep = expand(&f, &b, &ExpandOptions::default(), None).unwrap();
            // change-of-basis oracle: exact inner products of the solved polynomial
            let sol = poly_dirichlet_solve(&y2(1), &w).unwrap();
            let meas = w.unit_sphere_measure();
            for (m, (_, c)) in b.members.iter().zip(&rep.coefficients) {
                let exact = to_f64(&sphere_inner_ratio(&sol, &m.poly, &w)) * meas / m.norm;
                assert!((c - exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn uniqueness_examples() {
        let w = wq(1, 1, 2);
        assert!(uniqueness_check(&WeightedPoly::zero(1), &w).unwrap());
        let h = WeightedPoly::monomial(1, vec![2], 0, q(1, 1))
            .sub(&y2(1).scale(&(q(2, 3))));
        assert!(uniqueness_check(&h, &w).unwrap());
        assert!(matches!(
            uniqueness_check(&y2(1), &w),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn parity_tags_follow_support() {
        assert_eq!(y2(1).parity(), Parity::Even);
        assert_eq!(WeightedPoly::y(1).parity(), Parity::Odd);
        assert_eq!(WeightedPoly::y(1).add(&WeightedPoly::one(1)).parity(), Parity::Mixed);
        let p = y2(1).sub(&y2(1));
        assert_eq!(p.degree(), None);
        assert_eq!(p.parity(), Parity::Even);
    }
}
