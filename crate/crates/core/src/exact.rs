//! Exact linear algebra over the rationals.
//!
//! Matrices are dense `Vec<Vec<BigRational>>`. Systems are solved by
//! fraction-free (Bareiss) elimination after clearing row denominators, so the
//! determinant comes out as an exact integer multiple of the row scalings.

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::error::{Error, Result};

pub type RatMatrix = Vec<Vec<BigRational>>;

/// Decimal-string form used in JSON documents: `p` or `p/q`.
pub fn rational_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_from_str(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(BigRational::new(p, q))
            }
        }
        None => s.trim().parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub(crate) mod opt_rational_serde {
    use num::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(q) => s.serialize_some(&super::rational_to_string(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|t| {
            super::rational_from_str(&t)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational {t}")))
        })
        .transpose()
    }
}

fn lcm_of_denominators(row: &[BigRational]) -> BigInt {
    row.iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Result of a Bareiss reduction of `[A | B]`.
pub struct ExactSolution {
    /// `A^{-1} B`, column by column.
    pub x: RatMatrix,
    /// `det(A)`.
    pub determinant: BigRational,
}

/// Solves `A X = B` exactly for square `A`.
pub fn solve(a: &RatMatrix, b: &RatMatrix) -> Result<ExactSolution> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(Error::Parameter("exact solve: shape mismatch".into()));
    }
    let k = b.first().map_or(0, Vec::len);
    // integer augmented matrix, tracking the product of row scalings
    let mut scale = BigRational::one();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<BigRational> = a[i].clone();
        row.extend(b[i].iter().cloned());
        let l = lcm_of_denominators(&row);
        scale *= BigRational::from_integer(l.clone());
        m.push(
            row.iter()
                .map(|q| (q * BigRational::from_integer(l.clone())).to_integer())
                .collect(),
        );
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for p in 0..n {
        let piv = (p..n).find(|&r| !m[r][p].is_zero()).ok_or_else(|| {
            Error::SingularSystem(format!("no pivot in column {p} of {n}"))
        })?;
        if piv != p {
            m.swap(piv, p);
            sign = -sign;
        }
        for r in (p + 1)..n {
            for c in (p + 1)..(n + k) {
                let v = (&m[r][c] * &m[p][p] - &m[r][p] * &m[p][c]) / &prev;
                m[r][c] = v;
            }
            m[r][p] = BigInt::zero();
        }
        prev = m[p][p].clone();
    }
    let det_int = &sign * &m[n - 1][n - 1];
    let determinant = if n == 0 {
        BigRational::one()
    } else {
        BigRational::from_integer(det_int) / scale
    };
    // back substitution in rationals on the reduced triangular system
    let mut x = vec![vec![BigRational::zero(); k]; n];
    for col in 0..k {
        for i in (0..n).rev() {
            let mut acc = BigRational::from_integer(m[i][n + col].clone());
            for j in (i + 1)..n {
                acc -= BigRational::from_integer(m[i][j].clone()) * &x[j][col];
            }
            x[i][col] = acc / BigRational::from_integer(m[i][i].clone());
        }
    }
    Ok(ExactSolution { x, determinant })
}

/// Exact inverse.
pub fn inverse(a: &RatMatrix) -> Result<ExactSolution> {
    let n = a.len();
    let id: RatMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    solve(a, &id)
}

/// Basis of the right null space of `a` (`rows x cols`), by exact RREF.
pub fn null_space(a: &RatMatrix, cols: usize) -> Vec<Vec<BigRational>> {
    let mut m: RatMatrix = a.to_vec();
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = BigRational::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

/// Exact rank.
pub fn rank(a: &RatMatrix, cols: usize) -> usize {
    cols - null_space(a, cols).len()
}

pub fn is_zero_vec(v: &[BigRational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn max_abs(v: &[BigRational]) -> BigRational {
    v.iter().map(|q| q.abs()).max().unwrap_or_else(BigRational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn solves_small_system_exactly() {
        let a = vec![vec![q(1, 2), q(1, 3)], vec![q(1, 5), q(2, 1)]];
        let b = vec![vec![q(1, 1)], vec![q(0, 1)]];
        let sol = solve(&a, &b).unwrap();
        // det = 1 - 1/15
        assert_eq!(sol.determinant, q(14, 15));
        let x0 = &sol.x[0][0];
        let x1 = &sol.x[1][0];
        assert_eq!(q(1, 2) * x0 + q(1, 3) * x1, q(1, 1));
        assert_eq!(q(1, 5) * x0 + q(2, 1) * x1, q(0, 1));
    }

    #[test]
    fn singular_detected() {
        let a = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]];
        assert!(matches!(inverse(&a), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = vec![vec![q(1, 1), q(2, 1), q(3, 1)]];
        let ns = null_space(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            let dot = q(1, 1) * &v[0] + q(2, 1) * &v[1] + q(3, 1) * &v[2];
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn rational_strings_round_trip() {
        for v in [q(3, 7), q(-12, 1), q(0, 1)] {
            assert_eq!(rational_from_str(&rational_to_string(&v)).unwrap(), v);
        }
        assert!(rational_from_str("1/0").is_none());
    }
}
