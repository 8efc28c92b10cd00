//! Finite-difference solvers for `L_a u = 0` with thin-space conditions.
//!
//! The discretization is in flux form on the upper half grid. Horizontal
//! edge weights are the exact cell integrals of `t^a`; vertical weights are
//! the exact cell means, except for the first cell where the weight is
//! chosen so that `y^{1-a}` has the exact discrete flux. The operator is
//! symmetric, and the row at a thin node is the discrete conormal
//! derivative `lim y^a u_y` of the even reflection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridField};
use crate::weight::WeightParam;

/// Assembled operator with rows over every node.
#[derive(Debug, Clone)]
pub struct LaOperator {
    pub grid: Grid,
    pub a: f64,
    /// `∫ t^a` over the `y` dual cell of each layer.
    pub layer_mass: Vec<f64>,
    /// Vertical conductances between layers `j` and `j + 1`.
    pub vertical: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    symmetric: bool,
}

fn t_pow_integral(a: f64, lo: f64, hi: f64) -> f64 {
    (hi.powf(1.0 + a) - lo.max(0.0).powf(1.0 + a)) / (1.0 + a)
}

impl LaOperator {
    pub fn new(grid: &Grid, w: &WeightParam) -> Result<Self> {
        let a = w.a();
        if !(-0.9..=0.9).contains(&a) {
            return Err(Error::Parameter(format!("a = {a} outside [-0.9, 0.9]")));
        }
        if grid.n != w.n() {
            return Err(Error::Parameter("grid and weight dimensions differ".into()));
        }
        let h = grid.h_y;
        let ny = grid.ny;
        let layer_mass: Vec<f64> = (0..ny)
            .map(|j| {
                let y = grid.y_of(j);
                let lo = if j == 0 { 0.0 } else { y - h / 2.0 };
                let hi = if j + 1 == ny { y } else { y + h / 2.0 };
                t_pow_integral(a, lo, hi)
            })
            .collect();
        let vertical: Vec<f64> = (0..ny - 1)
            .map(|j| {
                if j == 0 {
                    (1.0 - a) * h.powf(a)
                } else {
                    t_pow_integral(a, grid.y_of(j), grid.y_of(j + 1)) / h
                }
            })
            .collect();
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag = vec![0.0; grid.len()];
        for k in 0..grid.len() {
            let (thin, j) = grid.decompose(k);
            let mut entries: Vec<(usize, f64)> = Vec::new();
            let mut dsum = 0.0;
            for d in 0..grid.n {
                let c = layer_mass[j] / (grid.h_x[d] * grid.h_x[d]);
                let s = grid.stride(d);
                if thin[d] > 0 {
                    entries.push((k - s, c));
                    dsum -= c;
                }
                if thin[d] + 1 < grid.nx[d] {
                    entries.push((k + s, c));
                    dsum -= c;
                }
            }
            if j + 1 < ny {
                let c = vertical[j] / h;
                entries.push((k + 1, c));
                dsum -= c;
            }
            if j > 0 {
                let c = vertical[j - 1] / h;
                entries.push((k - 1, c));
                dsum -= c;
            }
            entries.push((k, dsum));
            entries.sort_by_key(|e| e.0);
            diag[k] = dsum;
            for (c, v) in entries {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            grid: grid.clone(),
            a,
            layer_mass,
            vertical,
            row_ptr,
            cols,
            vals,
            diag,
            symmetric: true,
        })
    }

    /// Adds `-scale * b · D_x u` (centered differences) to the thin rows.
    pub fn with_drift(&self, drift: &DriftSpec) -> Result<Self> {
        let g = &self.grid;
        if drift.b.len() != g.thin_len() || drift.b.iter().any(|v| v.len() != g.n) {
            return Err(Error::Parameter("drift field has the wrong shape".into()));
        }
        let mut out = self.clone();
        out.symmetric = false;
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for k in 0..g.len() {
            let mut entries: Vec<(usize, f64)> =
                (self.row_ptr[k]..self.row_ptr[k + 1]).map(|p| (self.cols[p], self.vals[p])).collect();
            if k % g.ny == 0 {
                let t = k / g.ny;
                let (thin, _) = g.decompose(k);
                for d in 0..g.n {
                    let s = g.stride(d);
                    if thin[d] > 0 && thin[d] + 1 < g.nx[d] {
                        let c = drift.scale * drift.b[t][d] / (2.0 * g.h_x[d]);
                        for e in entries.iter_mut() {
                            if e.0 == k + s {
                                e.1 -= c;
                            } else if e.0 == k - s {
                                e.1 += c;
                            }
                        }
                    }
                }
            }
            for (c, v) in entries {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        out.row_ptr = row_ptr;
        out.cols = cols;
        out.vals = vals;
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn diagonal(&self, k: usize) -> f64 {
        self.diag[k]
    }

    pub fn apply_row(&self, k: usize, u: &[f64]) -> f64 {
        (self.row_ptr[k]..self.row_ptr[k + 1])
            .map(|p| self.vals[p] * u[self.cols[p]])
            .sum()
    }

    /// `(A u)_k` for every node.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len()).map(|k| self.apply_row(k, u)).collect()
    }

    /// Discrete thin flux `(1 - a)(u_1 - u_0)/h^{1-a}` at thin node `t`.
    pub fn thin_flux(&self, u: &[f64], t: usize) -> f64 {
        let k = t * self.grid.ny;
        self.vertical[0] * (u[k + 1] - u[k]) / self.grid.h_y
    }

    /// `2 Π h_x Σ_e c_e (Δu)^2` over edges with at least one endpoint in
    /// `set` (all edges when `None`); the factor 2 accounts for `y < 0`.
    pub fn energy(&self, u: &[f64], set: Option<&[bool]>) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for k in 0..g.len() {
            let (thin, j) = g.decompose(k);
            let ink = set.is_none_or(|s| s[k]);
            for d in 0..g.n {
                if thin[d] + 1 < g.nx[d] {
                    let l = k + g.stride(d);
                    if ink || set.is_none_or(|s| s[l]) {
                        let du = u[l] - u[k];
                        acc += self.layer_mass[j] / (g.h_x[d] * g.h_x[d]) * du * du;
                    }
                }
            }
            if j + 1 < g.ny && (ink || set.is_none_or(|s| s[k + 1])) {
                let du = u[k + 1] - u[k];
                acc += self.vertical[j] / g.h_y * du * du;
            }
        }
        2.0 * g.thin_cell_volume() * acc
    }
}

/// Drift `b(x)` at each thin node, entering the thin condition as
/// `lim y^a u_y = scale * b · ∇_x u`.
#[derive(Debug, Clone)]
pub struct DriftSpec {
    pub b: Vec<Vec<f64>>,
    pub scale: f64,
}

impl DriftSpec {
    pub fn from_fn(grid: &Grid, scale: f64, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        Self {
            b: (0..grid.thin_len())
                .map(|t| f(&grid.x_of(&grid.thin_multi(t))))
                .collect(),
            scale,
        }
    }

    pub fn constant(grid: &Grid, scale: f64, b: &[f64]) -> Self {
        Self::from_fn(grid, scale, |_| b.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// CG or BiCGSTAB, inside a primal-dual active set loop when constrained.
    Krylov,
    /// (Projected) successive over-relaxation.
    Sor,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub method: Method,
    /// Relative residual (Krylov) or relative update (SOR) tolerance.
    pub tol: f64,
    pub max_iter: usize,
    pub max_outer: usize,
    pub omega_dirichlet: f64,
    pub omega_constrained: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::Krylov,
            tol: 1e-11,
            max_iter: 200_000,
            max_outer: 100,
            omega_dirichlet: 1.8,
            omega_constrained: 1.5,
        }
    }
}

/// What is imposed on free thin nodes.
#[derive(Debug, Clone, Default)]
pub struct ThinSpec {
    /// `u >= 0`, `lim y^a u_y <= drift term`, complementarity.
    pub signorini: bool,
    pub drift: Option<DriftSpec>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    pub outer_iterations: usize,
    /// Max of `|(Au)_k / A_kk|` over equation rows.
    pub pde_residual: f64,
    /// Max violation of `u >= 0`, multiplier `>= 0` and complementarity.
    pub complementarity_residual: f64,
    /// Node indices of the contact set.
    pub active_set: Vec<usize>,
    pub energy: f64,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

struct Reduced {
    map: Vec<usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    rhs: Vec<f64>,
    diag: Vec<f64>,
}

impl Reduced {
    /// Negated system `-A x = A g` over the unknowns.
    fn build(op: &LaOperator, u: &[f64], pinned: &[bool]) -> Self {
        let map: Vec<usize> = (0..u.len()).filter(|&k| !pinned[k]).collect();
        let mut pos = vec![usize::MAX; u.len()];
        for (i, &k) in map.iter().enumerate() {
            pos[k] = i;
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut rhs = Vec::with_capacity(map.len());
        let mut diag = Vec::with_capacity(map.len());
        for &k in &map {
            let mut b = 0.0;
            for p in op.row_ptr[k]..op.row_ptr[k + 1] {
                let c = op.cols[p];
                if pinned[c] {
                    b += op.vals[p] * u[c];
                } else {
                    cols.push(pos[c]);
                    vals.push(-op.vals[p]);
                }
            }
            rhs.push(b);
            diag.push(-op.diag[k]);
            row_ptr.push(cols.len());
        }
        Self {
            map,
            row_ptr,
            cols,
            vals,
            rhs,
            diag,
        }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            *o = s;
        }
    }

    fn cg(&self, x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
        let m = x.len();
        let bnorm = dot(&self.rhs, &self.rhs).sqrt();
        if bnorm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(0);
        }
        let mut r = vec![0.0; m];
        self.mul(x, &mut r);
        for i in 0..m {
            r[i] = self.rhs[i] - r[i];
        }
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(a, d)| a / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![0.0; m];
        for it in 0..max_iter {
            if dot(&r, &r).sqrt() <= tol * bnorm {
                return Ok(it);
            }
            self.mul(&p, &mut q);
            let alpha = rz / dot(&p, &q);
            for i in 0..m {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            for i in 0..m {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..m {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NoConvergence(format!("CG after {max_iter} iterations")))
    }

    fn bicgstab(&self, x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
        let m = x.len();
        let bnorm = dot(&self.rhs, &self.rhs).sqrt();
        if bnorm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(0);
        }
        let mut r = vec![0.0; m];
        let mut it = 0;
        let (mut v, mut p, mut s, mut t) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let (mut ph, mut sh) = (vec![0.0; m], vec![0.0; m]);
        // restarts on breakdown
        while it < max_iter {
            self.mul(x, &mut r);
            for i in 0..m {
                r[i] = self.rhs[i] - r[i];
            }
            if dot(&r, &r).sqrt() <= tol * bnorm {
                return Ok(it);
            }
            let r0 = r.clone();
            let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            while it < max_iter {
                it += 1;
                let rho_new = dot(&r0, &r);
                if rho_new.abs() < 1e-300 || omega == 0.0 {
                    break;
                }
                let beta = (rho_new / rho) * (alpha / omega);
                rho = rho_new;
                for i in 0..m {
                    p[i] = r[i] + beta * (p[i] - omega * v[i]);
                    ph[i] = p[i] / self.diag[i];
                }
                self.mul(&ph, &mut v);
                let den = dot(&r0, &v);
                if den == 0.0 {
                    break;
                }
                alpha = rho / den;
                for i in 0..m {
                    s[i] = r[i] - alpha * v[i];
                }
                if dot(&s, &s).sqrt() <= tol * bnorm {
                    for i in 0..m {
                        x[i] += alpha * ph[i];
                    }
                    return Ok(it);
                }
                for i in 0..m {
                    sh[i] = s[i] / self.diag[i];
                }
                self.mul(&sh, &mut t);
                let tt = dot(&t, &t);
                omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
                for i in 0..m {
                    x[i] += alpha * ph[i] + omega * sh[i];
                    r[i] = s[i] - omega * t[i];
                }
                if dot(&r, &r).sqrt() <= tol * bnorm {
                    return Ok(it);
                }
            }
        }
        Err(Error::NoConvergence(format!("BiCGSTAB after {max_iter} iterations")))
    }
}

fn linear_solve(op: &LaOperator, u: &mut [f64], pinned: &[bool], opts: &SolverOptions) -> Result<usize> {
    let red = Reduced::build(op, u, pinned);
    let mut x: Vec<f64> = red.map.iter().map(|&k| u[k]).collect();
    let it = if op.is_symmetric() {
        red.cg(&mut x, opts.tol, opts.max_iter)?
    } else {
        red.bicgstab(&mut x, opts.tol, opts.max_iter)?
    };
    for (&k, v) in red.map.iter().zip(x) {
        u[k] = v;
    }
    Ok(it)
}

fn sor(
    op: &LaOperator,
    u: &mut [f64],
    fixed: &[bool],
    constrained: &[bool],
    omega: f64,
    opts: &SolverOptions,
) -> Result<usize> {
    for it in 1..=opts.max_iter {
        let mut change: f64 = 0.0;
        let mut size: f64 = 0.0;
        for k in 0..u.len() {
            if fixed[k] {
                continue;
            }
            let r = op.apply_row(k, u);
            let mut v = u[k] - omega * r / op.diag[k];
            if constrained[k] {
                v = v.max(0.0);
            }
            change = change.max((v - u[k]).abs());
            size = size.max(v.abs());
            u[k] = v;
        }
        if change <= opts.tol * size.max(1.0) {
            return Ok(it);
        }
    }
    Err(Error::NoConvergence(format!("SOR after {} sweeps", opts.max_iter)))
}

fn pdas(
    op: &LaOperator,
    u: &mut [f64],
    fixed: &[bool],
    constrained: &[bool],
    initial: Option<Vec<bool>>,
    opts: &SolverOptions,
) -> Result<(usize, usize)> {
    let mut active = initial.unwrap_or_else(|| vec![false; u.len()]);
    let mut total = 0;
    for outer in 0..=opts.max_outer {
        for k in 0..u.len() {
            if active[k] {
                u[k] = 0.0;
            }
        }
        let pinned: Vec<bool> = (0..u.len()).map(|k| fixed[k] || active[k]).collect();
        total += linear_solve(op, u, &pinned, opts)?;
        let au = op.apply(u);
        let mut next = vec![false; u.len()];
        for k in 0..u.len() {
            if constrained[k] {
                // multiplier is -(Au)_k on the contact set, zero elsewhere
                let lam = if active[k] { -au[k] } else { 0.0 };
                next[k] = lam - op.diag[k].abs() * u[k] > 0.0;
            }
        }
        if next == active {
            return Ok((total, outer));
        }
        active = next;
    }
    Err(Error::NoConvergence(format!(
        "active set still changing after {} rounds",
        opts.max_outer
    )))
}

/// Coarse-grid solution of a standard box problem, used to seed the contact
/// set and the initial values. `None` when the grid does not coarsen.
fn coarse_start(data: &GridField, w: &WeightParam, spec: &ThinSpec, opts: &SolverOptions) -> Result<Option<GridField>> {
    const MIN_CELLS: usize = 64;
    let g = &data.grid;
    let coarsens = g.nx.iter().all(|&m| (m - 1) % 2 == 0 && m > 2 * MIN_CELLS)
        && (g.ny - 1).is_multiple_of(2)
        && g.ny > 8
        && data.fixed == g.box_boundary_mask();
    if !coarsens {
        return Ok(None);
    }
    let cg = Grid {
        n: g.n,
        x_lo: g.x_lo.clone(),
        h_x: g.h_x.iter().map(|h| 2.0 * h).collect(),
        nx: g.nx.iter().map(|m| (m - 1) / 2 + 1).collect(),
        h_y: 2.0 * g.h_y,
        ny: (g.ny - 1) / 2 + 1,
    };
    let values: Vec<f64> = (0..cg.len())
        .map(|k| {
            let (thin, j) = cg.decompose(k);
            let fine: Vec<usize> = thin.iter().map(|i| 2 * i).collect();
            data.values[g.index(&fine, 2 * j)]
        })
        .collect();
    let fixed = cg.box_boundary_mask();
    let coarse = GridField { grid: cg, values, fixed };
    let spec = ThinSpec {
        signorini: spec.signorini,
        drift: spec.drift.as_ref().map(|d| DriftSpec {
            b: (0..coarse.grid.thin_len())
                .map(|t| {
                    let thin: Vec<usize> = coarse.grid.thin_multi(t).iter().map(|i| 2 * i).collect();
                    d.b[g.index(&thin, 0) / g.ny].clone()
                })
                .collect(),
            scale: d.scale,
        }),
    };
    Ok(Some(solve(&coarse, w, &spec, opts)?.0))
}

/// Solves `L_a u = 0` at free nodes of `data`, with fixed nodes taken from
/// `data` and the thin condition given by `spec`.
pub fn solve(
    data: &GridField,
    w: &WeightParam,
    spec: &ThinSpec,
    opts: &SolverOptions,
) -> Result<(GridField, SolveReport)> {
    let base = LaOperator::new(&data.grid, w)?;
    let op = match &spec.drift {
        Some(d) => {
            if w.s() <= 0.5 {
                return Err(Error::Parameter(format!(
                    "drift requires s > 1/2, got s = {}",
                    w.s()
                )));
            }
            base.with_drift(d)?
        }
        None => base.clone(),
    };
    let g = &data.grid;
    let fixed = &data.fixed;
    let constrained: Vec<bool> = (0..g.len())
        .map(|k| spec.signorini && k % g.ny == 0 && !fixed[k])
        .collect();
    let mut u = data.values.clone();
    let (iterations, outer) = match (opts.method, spec.signorini) {
        (Method::Krylov, false) => (linear_solve(&op, &mut u, fixed, opts)?, 0),
        (Method::Krylov, true) => {
            let initial = match coarse_start(data, w, spec, opts)? {
                Some(c) => {
                    let mut active = vec![false; g.len()];
                    for k in 0..g.len() {
                        if fixed[k] {
                            continue;
                        }
                        let (x, y) = g.coords(k);
                        u[k] = c.interpolate(&x, y);
                        active[k] = constrained[k] && u[k] <= 0.0;
                    }
                    Some(active)
                }
                None => None,
            };
            pdas(&op, &mut u, fixed, &constrained, initial, opts)?
        }
        (Method::Sor, c) => {
            let omega = if c || spec.drift.is_some() {
                opts.omega_constrained
            } else {
                opts.omega_dirichlet
            };
            (sor(&op, &mut u, fixed, &constrained, omega, opts)?, 0)
        }
    };
    let au = op.apply(&u);
    let mut pde: f64 = 0.0;
    let mut comp: f64 = 0.0;
    let mut active_set = Vec::new();
    for k in 0..g.len() {
        if fixed[k] {
            continue;
        }
        let scaled = au[k] / op.diag[k].abs();
        if constrained[k] {
            let lam = -scaled;
            comp = comp.max((-u[k]).max(0.0)).max((-lam).max(0.0)).max(u[k].min(lam).abs());
            if u[k] == 0.0 && lam > 0.0 {
                active_set.push(k);
            } else {
                pde = pde.max(scaled.abs());
            }
        } else {
            pde = pde.max(scaled.abs());
        }
    }
    let energy = base.energy(&u, None);
    let out = GridField {
        grid: g.clone(),
        values: u,
        fixed: fixed.clone(),
    };
    Ok((
        out,
        SolveReport {
            method: opts.method,
            iterations,
            outer_iterations: outer,
            pde_residual: pde,
            complementarity_residual: comp,
            active_set,
            energy,
        },
    ))
}

pub fn solve_dirichlet(data: &GridField, w: &WeightParam, opts: &SolverOptions) -> Result<(GridField, SolveReport)> {
    solve(data, w, &ThinSpec::default(), opts)
}

pub fn solve_signorini(data: &GridField, w: &WeightParam, opts: &SolverOptions) -> Result<(GridField, SolveReport)> {
    solve(data, w, &ThinSpec { signorini: true, drift: None }, opts)
}

pub fn solve_drift(
    data: &GridField,
    w: &WeightParam,
    drift: &DriftSpec,
    signorini: bool,
    opts: &SolverOptions,
) -> Result<(GridField, SolveReport)> {
    solve(
        data,
        w,
        &ThinSpec {
            signorini,
            drift: Some(drift.clone()),
        },
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(a: f64) -> WeightParam {
        WeightParam::from_a(1, a).unwrap()
    }

    #[test]
    fn operator_is_symmetric_and_kills_constants() {
        let g = Grid::box_grid(2, 1.0, 0.5, 8).unwrap();
        let op = LaOperator::new(&g, &WeightParam::from_a(2, 0.3).unwrap()).unwrap();
        let one = vec![1.0; g.len()];
        assert!(op.apply(&one).iter().all(|v| v.abs() < 1e-12));
        for k in 0..g.len() {
            for p in op.row_ptr[k]..op.row_ptr[k + 1] {
                let c = op.cols[p];
                let back = (op.row_ptr[c]..op.row_ptr[c + 1]).find(|&q| op.cols[q] == k).unwrap();
                assert!((op.vals[p] - op.vals[back]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_matches_quadratic_form() {
        let g = Grid::box_grid(1, 1.0, 1.0, 10).unwrap();
        let op = LaOperator::new(&g, &w(-0.4)).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|k| ((k * 7919) % 13) as f64 / 13.0).collect();
        let au = op.apply(&u);
        let e = op.energy(&u, None);
        assert!((e + 2.0 * g.thin_cell_volume() * dot(&u, &au)).abs() < 1e-10 * e);
    }

    #[test]
    fn one_dimensional_profile_has_exact_first_flux() {
        let g = Grid::box_grid(1, 1.0, 1.0, 16).unwrap();
        let a = 0.5;
        let op = LaOperator::new(&g, &w(a)).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|k| g.coords(k).1.powf(1.0 - a)).collect();
        assert!((op.thin_flux(&u, 3) - (1.0 - a)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = Grid::box_grid(1, 1.0, 1.0, 8).unwrap();
        assert!(LaOperator::new(&g, &w(0.95)).is_err());
        let data = GridField::box_dirichlet(g.clone(), |_, _| 0.0);
        let d = DriftSpec::constant(&g, 1.0, &[1.0]);
        let ws = WeightParam::from_s(1, 0.4).unwrap();
        assert!(matches!(
            solve_drift(&data, &ws, &d, false, &SolverOptions::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn sor_and_krylov_agree() {
        let g = Grid::box_grid(1, 1.0, 1.0, 16).unwrap();
        let data = GridField::box_dirichlet(g, |x, _| x[0] * x[0] - 0.8);
        let wt = w(-0.5);
        let (u1, r1) = solve_signorini(&data, &wt, &SolverOptions::default()).unwrap();
        let sor_opts = SolverOptions {
            method: Method::Sor,
            tol: 1e-13,
            ..Default::default()
        };
        let (u2, _) = solve_signorini(&data, &wt, &sor_opts).unwrap();
        let diff = u1.values.iter().zip(&u2.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
        assert!(r1.complementarity_residual < 1e-9);
        assert!(!r1.active_set.is_empty());
    }
}
