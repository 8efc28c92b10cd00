//! Uniform tensor grids on `Ω x [0, H]`, nodal fields and ball quadrature.
//!
//! Nodes are stored with the `y` index fastest, then the thin axes in
//! row-major order. Only the upper half `y >= 0` is stored; every field is
//! understood as the even reflection across the thin space.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weight::WeightParam;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub x_lo: Vec<f64>,
    pub h_x: Vec<f64>,
    /// Node count along each thin axis.
    pub nx: Vec<usize>,
    pub h_y: f64,
    /// Node count in `y`, with `y_j = j h_y`.
    pub ny: usize,
}

impl Grid {
    /// `[-half_width, half_width]^n x [0, height]` with `cells` cells per thin
    /// axis and the same spacing in `y`.
    pub fn box_grid(n: usize, half_width: f64, height: f64, cells: usize) -> Result<Self> {
        if n == 0 || cells < 2 || half_width <= 0.0 || height <= 0.0 {
            return Err(Error::Parameter(format!(
                "bad box grid: n={n}, L={half_width}, H={height}, N={cells}"
            )));
        }
        let h = 2.0 * half_width / cells as f64;
        let ny = (height / h).round() as usize + 1;
        Ok(Self {
            n,
            x_lo: vec![-half_width; n],
            h_x: vec![h; n],
            nx: vec![cells + 1; n],
            h_y: h,
            ny: ny.max(2),
        })
    }

    pub fn len(&self) -> usize {
        self.thin_len() * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn thin_len(&self) -> usize {
        self.nx.iter().product()
    }

    pub fn x_hi(&self, d: usize) -> f64 {
        self.x_lo[d] + self.h_x[d] * (self.nx[d] - 1) as f64
    }

    pub fn y_max(&self) -> f64 {
        self.h_y * (self.ny - 1) as f64
    }

    /// Node stride of thin axis `d`.
    pub fn stride(&self, d: usize) -> usize {
        self.ny * self.nx[d + 1..].iter().product::<usize>()
    }

    pub fn index(&self, thin: &[usize], j: usize) -> usize {
        let mut k = 0;
        for d in 0..self.n {
            k = k * self.nx[d] + thin[d];
        }
        k * self.ny + j
    }

    /// Thin multi-index and `y` index of node `k`.
    pub fn decompose(&self, k: usize) -> (Vec<usize>, usize) {
        let j = k % self.ny;
        let mut t = k / self.ny;
        let mut thin = vec![0; self.n];
        for d in (0..self.n).rev() {
            thin[d] = t % self.nx[d];
            t /= self.nx[d];
        }
        (thin, j)
    }

    pub fn thin_multi(&self, t: usize) -> Vec<usize> {
        self.decompose(t * self.ny).0
    }

    pub fn x_of(&self, thin: &[usize]) -> Vec<f64> {
        (0..self.n)
            .map(|d| self.x_lo[d] + self.h_x[d] * thin[d] as f64)
            .collect()
    }

    pub fn y_of(&self, j: usize) -> f64 {
        self.h_y * j as f64
    }

    pub fn coords(&self, k: usize) -> (Vec<f64>, f64) {
        let (thin, j) = self.decompose(k);
        (self.x_of(&thin), self.y_of(j))
    }

    pub fn thin_cell_volume(&self) -> f64 {
        self.h_x.iter().product()
    }

    /// Lateral faces and the top face.
    pub fn box_boundary_mask(&self) -> Vec<bool> {
        (0..self.len())
            .map(|k| {
                let (thin, j) = self.decompose(k);
                j + 1 == self.ny || thin.iter().zip(&self.nx).any(|(&i, &m)| i == 0 || i + 1 == m)
            })
            .collect()
    }

    /// Nodes with `|X - (c, 0)| >= r`, plus the box boundary.
    pub fn ball_exterior_mask(&self, center: &[f64], r: f64) -> Vec<bool> {
        let bnd = self.box_boundary_mask();
        (0..self.len())
            .map(|k| {
                let (x, y) = self.coords(k);
                let d2: f64 = x.iter().zip(center).map(|(p, q)| (p - q).powi(2)).sum::<f64>() + y * y;
                bnd[k] || d2 >= r * r
            })
            .collect()
    }

    pub fn contains_ball(&self, center: &[f64], r: f64) -> bool {
        let eps = 1e-12;
        center.len() == self.n
            && r <= self.y_max() + eps
            && (0..self.n).all(|d| {
                center[d] - r >= self.x_lo[d] - eps && center[d] + r <= self.x_hi(d) + eps
            })
    }
}

/// Nodal values on a [`Grid`] with a mask of fixed (Dirichlet) nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub fixed: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct BinaryHeader {
    format: String,
    version: u32,
    grid: Grid,
    weight: Option<WeightParam>,
    dtype: String,
    endianness: String,
    count: usize,
}

const MAGIC: &[u8; 8] = b"FRHGRID1";

impl GridField {
    pub fn zeros(grid: Grid) -> Self {
        let len = grid.len();
        Self {
            grid,
            values: vec![0.0; len],
            fixed: vec![false; len],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64], f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coords(k);
                f(&x, y)
            })
            .collect();
        let len = grid.len();
        Self {
            grid,
            values,
            fixed: vec![false; len],
        }
    }

    /// Field with `g` on the box boundary (lateral faces and top) and zero inside.
    pub fn box_dirichlet(grid: Grid, g: impl Fn(&[f64], f64) -> f64) -> Self {
        let fixed = grid.box_boundary_mask();
        let mut out = Self::from_fn(grid, g);
        for (v, f) in out.values.iter_mut().zip(&fixed) {
            if !f {
                *v = 0.0;
            }
        }
        out.fixed = fixed;
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values on the thin layer `y = 0`, in thin order.
    pub fn thin_trace(&self) -> Vec<f64> {
        (0..self.grid.thin_len())
            .map(|t| self.values[t * self.grid.ny])
            .collect()
    }

    /// Multilinear interpolation at `(x, |y|)`; coordinates are clamped to the grid.
    pub fn interpolate(&self, x: &[f64], y: f64) -> f64 {
        let g = &self.grid;
        let mut base = vec![0usize; g.n + 1];
        let mut frac = vec![0.0; g.n + 1];
        for d in 0..g.n {
            let t = ((x[d] - g.x_lo[d]) / g.h_x[d]).clamp(0.0, (g.nx[d] - 1) as f64);
            let i = (t.floor() as usize).min(g.nx[d] - 2);
            base[d] = i;
            frac[d] = t - i as f64;
        }
        let t = (y.abs() / g.h_y).clamp(0.0, (g.ny - 1) as f64);
        let j = (t.floor() as usize).min(g.ny - 2);
        base[g.n] = j;
        frac[g.n] = t - j as f64;
        let k0 = g.index(&base[..g.n], j);
        let mut acc = 0.0;
        for mask in 0..(1usize << (g.n + 1)) {
            let mut c = 1.0;
            let mut off = 0;
            for d in 0..=g.n {
                let bit = (mask >> d) & 1 == 1;
                c *= if bit { frac[d] } else { 1.0 - frac[d] };
                if bit {
                    off += if d == g.n { 1 } else { g.stride(d) };
                }
            }
            if c != 0.0 {
                acc += c * self.values[k0 + off];
            }
        }
        acc
    }

    /// Nodal centered derivative along thin axis `d` (one-sided at the edges).
    pub fn thin_gradient(&self, d: usize) -> Vec<f64> {
        let g = &self.grid;
        let s = g.stride(d);
        let h = g.h_x[d];
        (0..g.len())
            .map(|k| {
                let (thin, _) = g.decompose(k);
                let i = thin[d];
                if i == 0 {
                    (self.values[k + s] - self.values[k]) / h
                } else if i + 1 == g.nx[d] {
                    (self.values[k] - self.values[k - s]) / h
                } else {
                    (self.values[k + s] - self.values[k - s]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Nodal `u_y`; zero on the thin layer by even reflection.
    pub fn y_derivative(&self) -> Vec<f64> {
        let g = &self.grid;
        let h = g.h_y;
        (0..g.len())
            .map(|k| {
                let j = k % g.ny;
                if j == 0 {
                    0.0
                } else if j + 1 == g.ny {
                    (self.values[k] - self.values[k - 1]) / h
                } else {
                    (self.values[k + 1] - self.values[k - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// `y^a u_y` off the thin layer; on it, the one-sided weighted flux
    /// `(1 - a)(u_1 - u_0) / h^{1-a}`.
    pub fn weighted_normal_derivative(&self, w: &WeightParam) -> Vec<f64> {
        let g = &self.grid;
        let a = w.a();
        let uy = self.y_derivative();
        (0..g.len())
            .map(|k| {
                let j = k % g.ny;
                if j == 0 {
                    (1.0 - a) * (self.values[k + 1] - self.values[k]) / g.h_y.powf(1.0 - a)
                } else {
                    g.y_of(j).powf(a) * uy[k]
                }
            })
            .collect()
    }

    /// Thin-layer values as CSV: `x_1, .., x_n, value`.
    pub fn write_thin_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (1..=self.grid.n).map(|d| format!("x{d}")).collect();
        header.push("value".into());
        wtr.write_record(&header)?;
        for t in 0..self.grid.thin_len() {
            let x = self.grid.x_of(&self.grid.thin_multi(t));
            let mut row: Vec<String> = x.iter().map(|v| format!("{v:.17e}")).collect();
            row.push(format!("{:.17e}", self.values[t * self.grid.ny]));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Binary form: magic, `u64` LE header length, JSON header, `f64` LE
    /// values, one byte per node for the fixed mask.
    pub fn write_binary(&self, path: &Path, weight: Option<&WeightParam>) -> Result<()> {
        let header = BinaryHeader {
            format: "frharm-gridfield".into(),
            version: 1,
            grid: self.grid.clone(),
            weight: weight.cloned(),
            dtype: "f64".into(),
            endianness: "little".into(),
            count: self.values.len(),
        };
        let json = serde_json::to_vec(&header)?;
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(MAGIC)?;
        out.write_all(&(json.len() as u64).to_le_bytes())?;
        out.write_all(&json)?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        let mask: Vec<u8> = self.fixed.iter().map(|&f| f as u8).collect();
        out.write_all(&mask)?;
        out.flush()?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<(Self, Option<WeightParam>)> {
        let mut inp = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        inp.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parameter("not a grid field file".into()));
        }
        let mut len = [0u8; 8];
        inp.read_exact(&mut len)?;
        let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
        inp.read_exact(&mut json)?;
        let header: BinaryHeader = serde_json::from_slice(&json)?;
        if header.count != header.grid.len() {
            return Err(Error::Parameter("header count does not match grid".into()));
        }
        let mut values = Vec::with_capacity(header.count);
        let mut buf = [0u8; 8];
        for _ in 0..header.count {
            inp.read_exact(&mut buf)?;
            values.push(f64::from_le_bytes(buf));
        }
        let mut mask = vec![0u8; header.count];
        inp.read_exact(&mut mask)?;
        Ok((
            Self {
                grid: header.grid,
                values,
                fixed: mask.into_iter().map(|b| b != 0).collect(),
            },
            header.weight,
        ))
    }
}

/// Samples of a function on both sides of the thin space:
/// `values[t * (2 ny - 1) + (ny - 1) + j]` holds `u(x_t, j h_y)` for
/// `j = -(ny-1) ..= ny-1`.
#[derive(Debug, Clone)]
pub struct SymmetricSamples {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl SymmetricSamples {
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64], f64) -> f64) -> Self {
        let m = 2 * grid.ny - 1;
        let off = grid.ny as i64 - 1;
        let mut values = Vec::with_capacity(grid.thin_len() * m);
        for t in 0..grid.thin_len() {
            let x = grid.x_of(&grid.thin_multi(t));
            for l in 0..m {
                values.push(f(&x, (l as i64 - off) as f64 * grid.h_y));
            }
        }
        Self { grid, values }
    }

    fn at(&self, t: usize, j: i64) -> f64 {
        let m = 2 * self.grid.ny - 1;
        self.values[t * m + (self.grid.ny as i64 - 1 + j) as usize]
    }
}

/// Splits `u(x, y) = φ(x, y) + y ψ(x, y)` with `φ, ψ` even in `y`.
///
/// `ψ` on the thin layer is extrapolated from `y = h, 2h`.
pub fn even_odd_split(s: &SymmetricSamples) -> Result<(GridField, GridField)> {
    let g = &s.grid;
    if g.ny < 3 {
        return Err(Error::Parameter("need at least three y layers".into()));
    }
    let mut phi = GridField::zeros(g.clone());
    let mut psi = GridField::zeros(g.clone());
    for t in 0..g.thin_len() {
        for j in 0..g.ny {
            let (p, m) = (s.at(t, j as i64), s.at(t, -(j as i64)));
            let k = t * g.ny + j;
            phi.values[k] = 0.5 * (p + m);
            if j > 0 {
                psi.values[k] = 0.5 * (p - m) / g.y_of(j);
            }
        }
        let k = t * g.ny;
        psi.values[k] = (4.0 * psi.values[k + 1] - psi.values[k + 2]) / 3.0;
    }
    Ok((phi, psi))
}

/// Quadrature for `∫_{B_r(x0, 0)} f |y|^a dX` on nodal data.
///
/// Interior cells use one point per cell at the `|y|^a`-weighted centroid;
/// cells cut by the sphere are subdivided with a linear volume-fraction clip.
#[derive(Debug, Clone)]
pub struct BallQuadrature {
    pub center: Vec<f64>,
    pub radius: f64,
    corners: usize,
    idx: Vec<usize>,
    coef: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

fn weight_integral(a: f64, y0: f64, y1: f64, p: f64) -> f64 {
    // ∫_{y0}^{y1} t^{a+p} dt
    let e = a + p + 1.0;
    (y1.powf(e) - y0.powf(e)) / e
}

impl BallQuadrature {
    pub fn new(grid: &Grid, w: &WeightParam, center: &[f64], radius: f64) -> Result<Self> {
        if radius <= 0.0 || !grid.contains_ball(center, radius) {
            return Err(Error::BallOutsideDomain {
                center: center.to_vec(),
                radius,
            });
        }
        let n = grid.n;
        let a = w.a();
        let corners = 1usize << (n + 1);
        let mut offsets = vec![0usize; corners];
        for (mask, off) in offsets.iter_mut().enumerate() {
            for d in 0..=n {
                if (mask >> d) & 1 == 1 {
                    *off += if d == n { 1 } else { grid.stride(d) };
                }
            }
        }
        let lo: Vec<usize> = (0..n)
            .map(|d| (((center[d] - radius - grid.x_lo[d]) / grid.h_x[d]).floor().max(0.0)) as usize)
            .collect();
        let hi: Vec<usize> = (0..n)
            .map(|d| {
                let c = ((center[d] + radius - grid.x_lo[d]) / grid.h_x[d]).ceil() as usize;
                c.min(grid.nx[d] - 1)
            })
            .collect();
        let jhi = ((radius / grid.h_y).ceil() as usize).min(grid.ny - 1);
        let mut q = Self {
            center: center.to_vec(),
            radius,
            corners,
            idx: Vec::new(),
            coef: Vec::new(),
            weights: Vec::new(),
            total: 0.0,
        };
        let dx_vol = grid.thin_cell_volume();
        let mut cell = lo.clone();
        let mut point = vec![0.0; n + 1];
        loop {
            let xl = grid.x_of(&cell);
            for j in 0..jhi {
                let (y0, y1) = (grid.y_of(j), grid.y_of(j + 1));
                let (mut dmin, mut dmax) = (0.0, 0.0);
                for d in 0..n {
                    let (l, h) = (xl[d] - center[d], xl[d] + grid.h_x[d] - center[d]);
                    let near = if l > 0.0 { l } else if h < 0.0 { -h } else { 0.0 };
                    dmin += near * near;
                    dmax += l.abs().max(h.abs()).powi(2);
                }
                dmin += y0 * y0;
                dmax += y1 * y1;
                let r2 = radius * radius;
                if dmin >= r2 {
                    continue;
                }
                let base = grid.index(&cell, j);
                let sub: usize = if dmax <= r2 { 1 } else { 4 };
                let nsub = sub.pow(n as u32 + 1);
                for s_id in 0..nsub {
                    let mut rem = s_id;
                    let mut frac_w = dx_vol / (sub.pow(n as u32)) as f64;
                    let mut sx = vec![0usize; n + 1];
                    for slot in sx.iter_mut() {
                        *slot = rem % sub;
                        rem /= sub;
                    }
                    for d in 0..n {
                        let t = (sx[d] as f64 + 0.5) / sub as f64;
                        point[d] = xl[d] + t * grid.h_x[d];
                    }
                    let dy = (y1 - y0) / sub as f64;
                    let ya = y0 + sx[n] as f64 * dy;
                    let yb = ya + dy;
                    let m0 = weight_integral(a, ya, yb, 0.0);
                    point[n] = weight_integral(a, ya, yb, 1.0) / m0;
                    frac_w *= m0;
                    if sub > 1 {
                        let mut dist2 = 0.0;
                        for d in 0..n {
                            dist2 += (point[d] - center[d]).powi(2);
                        }
                        dist2 += point[n] * point[n];
                        let dist = dist2.sqrt();
                        let mut ext = 0.0;
                        if dist > 0.0 {
                            for d in 0..n {
                                ext += ((point[d] - center[d]) / dist).abs() * grid.h_x[d] / sub as f64;
                            }
                            ext += (point[n] / dist).abs() * dy;
                        }
                        let f = if ext > 0.0 {
                            (0.5 - (dist - radius) / ext).clamp(0.0, 1.0)
                        } else if dist < radius {
                            1.0
                        } else {
                            0.0
                        };
                        if f == 0.0 {
                            continue;
                        }
                        frac_w *= f;
                    }
                    let mut lf = vec![0.0; n + 1];
                    for d in 0..n {
                        lf[d] = (point[d] - xl[d]) / grid.h_x[d];
                    }
                    lf[n] = (point[n] - y0) / grid.h_y;
                    for (mask, off) in offsets.iter().enumerate() {
                        let mut c = 1.0;
                        for (d, &t) in lf.iter().enumerate() {
                            c *= if (mask >> d) & 1 == 1 { t } else { 1.0 - t };
                        }
                        q.idx.push(base + off);
                        q.coef.push(c);
                    }
                    // both halves
                    q.weights.push(2.0 * frac_w);
                }
            }
            // next cell index
            let mut d = n;
            loop {
                if d == 0 {
                    q.total = q.weights.iter().sum();
                    return Ok(q);
                }
                d -= 1;
                if cell[d] + 1 < hi[d] {
                    cell[d] += 1;
                    break;
                }
                cell[d] = lo[d];
            }
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Quadrature approximation of `∫_B |y|^a`.
    pub fn measure(&self) -> f64 {
        self.total
    }

    /// Interpolated values at the quadrature points.
    pub fn sample(&self, values: &[f64]) -> Vec<f64> {
        let c = self.corners;
        (0..self.weights.len())
            .map(|p| {
                let r = p * c..(p + 1) * c;
                self.idx[r.clone()]
                    .iter()
                    .zip(&self.coef[r])
                    .map(|(&k, &w)| w * values[k])
                    .sum()
            })
            .collect()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.sample(values)
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Integral of a function of the sampled values of several arrays.
    pub fn integrate_map(&self, arrays: &[&[f64]], f: impl Fn(&[f64]) -> f64) -> f64 {
        let samples: Vec<Vec<f64>> = arrays.iter().map(|v| self.sample(v)).collect();
        let mut buf = vec![0.0; arrays.len()];
        let mut acc = 0.0;
        for p in 0..self.weights.len() {
            for (b, s) in buf.iter_mut().zip(&samples) {
                *b = s[p];
            }
            acc += self.weights[p] * f(&buf);
        }
        acc
    }

    /// Weighted mean.
    pub fn mean(&self, values: &[f64]) -> f64 {
        self.integrate(values) / self.total
    }

    /// `(mean, ∫ |f - mean|^2 |y|^a)`, computed from the deviations directly.
    pub fn mean_and_oscillation(&self, values: &[f64]) -> (f64, f64) {
        let s = self.sample(values);
        let m = s.iter().zip(&self.weights).map(|(v, w)| v * w).sum::<f64>() / self.total;
        let osc = s
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * (v - m) * (v - m))
            .sum();
        (m, osc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::BallSpec;

    #[test]
    fn index_round_trip() {
        let g = Grid::box_grid(2, 1.0, 0.5, 8).unwrap();
        for k in [0, 5, 17, g.len() - 1] {
            let (thin, j) = g.decompose(k);
            assert_eq!(g.index(&thin, j), k);
        }
        assert_eq!(g.ny, 3);
        assert_eq!(g.stride(1), g.ny);
    }

    #[test]
    fn interpolation_reproduces_multilinear() {
        let g = Grid::box_grid(1, 1.0, 1.0, 8).unwrap();
        let f = GridField::from_fn(g, |x, y| 1.0 + 2.0 * x[0] - y + 3.0 * x[0] * y);
        let v = f.interpolate(&[0.31], -0.47);
        assert!((v - (1.0 + 0.62 - 0.47 + 3.0 * 0.31 * 0.47)).abs() < 1e-13);
    }

    #[test]
    fn ball_measure_converges() {
        for (n, a) in [(1usize, -0.5), (1, 0.5), (2, 0.0)] {
            let w = WeightParam::from_a(n, a).unwrap();
            let g = Grid::box_grid(n, 1.0, 1.0, if n == 1 { 128 } else { 48 }).unwrap();
            let r = 0.45;
            let q = BallQuadrature::new(&g, &w, &vec![0.1; n], r).unwrap();
            let exact = w.unit_ball_volume() * r.powf(w.homogeneity());
            assert!((q.measure() / exact - 1.0).abs() < 5e-3, "n={n} a={a}");
        }
    }

    #[test]
    fn ball_rejects_outside() {
        let g = Grid::box_grid(1, 1.0, 1.0, 16).unwrap();
        let w = WeightParam::from_a(1, 0.0).unwrap();
        let ball = BallSpec::new(vec![0.8], 0.3).unwrap();
        assert!(matches!(
            BallQuadrature::new(&g, &w, &ball.center, ball.radius),
            Err(Error::BallOutsideDomain { .. })
        ));
    }

    #[test]
    fn constant_mean_is_exact() {
        let g = Grid::box_grid(1, 1.0, 1.0, 64).unwrap();
        let w = WeightParam::from_a(1, 0.5).unwrap();
        let q = BallQuadrature::new(&g, &w, &[0.0], 0.5).unwrap();
        let f = vec![3.25; g.len()];
        let (m, osc) = q.mean_and_oscillation(&f);
        assert!((m - 3.25).abs() < 1e-12, "{m}");
        assert!(osc.abs() < 1e-25);
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid::box_grid(1, 1.0, 0.5, 8).unwrap();
        let f = GridField::box_dirichlet(g, |x, y| x[0] * x[0] - y);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.bin");
        let w = WeightParam::from_a_ratio(1, 1, 2).unwrap();
        f.write_binary(&p, Some(&w)).unwrap();
        let (back, wb) = GridField::read_binary(&p).unwrap();
        assert_eq!(back, f);
        assert_eq!(wb.unwrap().a(), 0.5);
    }

    #[test]
    fn split_recovers_parts() {
        let g = Grid::box_grid(1, 1.0, 0.5, 16).unwrap();
        let s = SymmetricSamples::from_fn(g, |x, y| x[0] * x[0] + y * y + y * (1.0 + x[0] + 2.0 * y * y));
        let (phi, psi) = even_odd_split(&s).unwrap();
        for k in 0..phi.len() {
            let (x, y) = phi.grid.coords(k);
            assert!((phi.values[k] - (x[0] * x[0] + y * y)).abs() < 1e-13);
            let expect = 1.0 + x[0] + 2.0 * y * y;
            let tol = if k % phi.grid.ny == 0 { 0.1 } else { 1e-12 };
            assert!((psi.values[k] - expect).abs() < tol);
        }
    }
}
