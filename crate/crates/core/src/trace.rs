//! Traces on the thin space as limits of weighted ball averages, with
//! dyadic-chain Hölder bounds built from a Campanato seminorm.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BallQuadrature, GridField};
use crate::metrics::admissible_window;
use crate::weight::WeightParam;

/// Radius ladder `r_k = r0 q^{-k}` inside the admissible window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    /// Ratio `q > 1` between consecutive radii.
    pub base: f64,
    /// Largest radius; `None` uses the upper end of the admissible window.
    pub r0: Option<f64>,
}

impl Default for Ladder {
    fn default() -> Self {
        Self { base: 2.0, r0: None }
    }
}

/// Chain constants for a given `(n, a, σ, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConstants {
    /// `|<u>_{r/q} - <u>_r| <= step M r^σ`.
    pub step: f64,
    /// `|<u>_ρ - <u>_r| <= chain M r^σ` along the ladder, and for the limit.
    pub chain: f64,
    /// Hölder constant for pairs closer than `r0/4`.
    pub near_pairs: f64,
}

impl ChainConstants {
    pub fn new(w: &WeightParam, sigma: f64, base: f64) -> Self {
        let vol = w.unit_ball_volume();
        let step = (base.powf(w.homogeneity()) / vol).sqrt();
        let chain = step / (1.0 - base.powf(-sigma));
        let near_pairs = 2f64.powf(sigma) * (chain * (1.0 + 2f64.powf(-sigma)) + step);
        Self { step, chain, near_pairs }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampanatoProfile {
    pub m: f64,
    pub sigma: f64,
    pub r0: f64,
    pub base: f64,
    pub centers: Vec<Vec<f64>>,
    /// Decreasing ladder `r0, r0/q, ...`.
    pub radii: Vec<f64>,
    /// `averages[c][k] = <u - ref>_{x_c, r_k}`.
    pub averages: Vec<Vec<f64>>,
    pub oscillations: Vec<Vec<f64>>,
    /// Nodal value nearest the first center, subtracted before averaging.
    pub reference: f64,
    pub constants: ChainConstants,
}

impl CampanatoProfile {
    /// CSV rows `center..., radius, average` with the reference added back.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let n = self.centers.first().map_or(0, Vec::len);
        let mut header: Vec<String> = (1..=n).map(|d| format!("x{d}")).collect();
        header.push("radius".into());
        header.push("average".into());
        w.write_record(&header)?;
        for (c, row) in self.centers.iter().zip(&self.averages) {
            for (r, v) in self.radii.iter().zip(row) {
                let mut rec: Vec<String> = c.iter().map(|x| format!("{x:.12e}")).collect();
                rec.push(format!("{r:.12e}"));
                rec.push(format!("{:.15e}", v + self.reference));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Smallest `M` with `∫_{B_r(x)} |u - <u>|^2 |y|^a <= M^2 r^{n+1+a+2σ}` on all
/// sampled centers and ladder radii.
pub fn estimate_campanato(
    u: &GridField,
    centers: &[Vec<f64>],
    ladder: &Ladder,
    sigma: f64,
    w: &WeightParam,
) -> Result<CampanatoProfile> {
    if !(0.0 < sigma && sigma < 1.0) || ladder.base <= 1.0 {
        return Err(Error::Parameter(format!("need σ in (0, 1) and base > 1, got {sigma}, {}", ladder.base)));
    }
    if centers.is_empty() {
        return Err(Error::Parameter("no centers".into()));
    }
    let (lo, hi) = centers
        .iter()
        .map(|c| admissible_window(&u.grid, c))
        .fold((0.0_f64, f64::INFINITY), |(l, h), (a, b)| (l.max(a), h.min(b)));
    let r0 = ladder.r0.unwrap_or(hi).min(hi);
    let mut radii = Vec::new();
    let mut r = r0;
    while r >= lo * (1.0 - 1e-12) {
        radii.push(r);
        r /= ladder.base;
    }
    if radii.len() < 3 {
        return Err(Error::WindowTooSmall { found: radii.len(), needed: 3 });
    }
    let g = &u.grid;
    let nearest: Vec<usize> = (0..g.n)
        .map(|d| (((centers[0][d] - g.x_lo[d]) / g.h_x[d]).round().max(0.0) as usize).min(g.nx[d] - 1))
        .collect();
    // a nodal value, so that adding a constant shifts it exactly
    let reference = u.values[g.index(&nearest, 0)];
    let shifted: Vec<f64> = u.values.iter().map(|v| v - reference).collect();
    let hom = w.homogeneity() + 2.0 * sigma;
    let table = centers
        .par_iter()
        .map(|c| {
            radii
                .iter()
                .map(|&r| {
                    let q = BallQuadrature::new(&u.grid, w, c, r)?;
                    Ok(q.mean_and_oscillation(&shifted))
                })
                .collect::<Result<Vec<(f64, f64)>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m2: f64 = 0.0;
    for row in &table {
        for (&(_, osc), &r) in row.iter().zip(&radii) {
            m2 = m2.max(osc / r.powf(hom));
        }
    }
    Ok(CampanatoProfile {
        m: m2.sqrt(),
        sigma,
        r0,
        base: ladder.base,
        centers: centers.to_vec(),
        radii,
        averages: table.iter().map(|row| row.iter().map(|p| p.0).collect()).collect(),
        oscillations: table.iter().map(|row| row.iter().map(|p| p.1).collect()).collect(),
        reference,
        constants: ChainConstants::new(w, sigma, ladder.base),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceValue {
    /// `Tu(x)` relative to the profile's reference value.
    pub shifted: f64,
    pub value: f64,
    /// `chain M r_min^σ`.
    pub certificate: f64,
    /// Ratio of the last two consecutive ladder differences.
    pub rate: Option<f64>,
}

/// `Tu(x_c) = lim <u>_{x_c, r}` for center index `c` of the profile.
pub fn trace_by_averages(p: &CampanatoProfile, c: usize) -> Result<TraceValue> {
    let avg = p
        .averages
        .get(c)
        .ok_or_else(|| Error::Parameter(format!("center index {c} out of range")))?;
    if avg.len() < 3 {
        return Err(Error::NoConvergence("fewer than two dyadic levels".into()));
    }
    let k = avg.len();
    let diffs: Vec<f64> = avg.windows(2).map(|w| w[1] - w[0]).collect();
    let slack = 1.0 + 1e-9;
    for (i, d) in diffs.iter().enumerate() {
        let env = p.constants.step * p.m * p.radii[i].powf(p.sigma);
        if d.abs() > slack * env + 1e-14 {
            return Err(Error::NoConvergence(format!(
                "dyadic difference {d:e} at r = {} exceeds envelope {env:e}",
                p.radii[i]
            )));
        }
    }
    let r_min = p.radii[k - 1];
    let certificate = p.constants.chain * p.m * r_min.powf(p.sigma);
    let (d1, d2) = (diffs[diffs.len() - 2], diffs[diffs.len() - 1]);
    let rate = if d1 != 0.0 { Some(d2 / d1) } else { None };
    // averages of a smooth field expand in integer powers of r
    let mut col = avg.clone();
    for e in 1..k - 1 {
        let f = p.base.powi(e as i32);
        col = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    let extrapolated = col[col.len() - 1];
    let shifted = if (extrapolated - avg[k - 1]).abs() <= certificate {
        extrapolated
    } else {
        avg[k - 1]
    };
    Ok(TraceValue {
        shifted,
        value: shifted + p.reference,
        certificate,
        rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    pub pairs: usize,
    /// Largest `|<u>_ρ - <u>_r| / (chain M r^σ)` over sampled `ρ < r`.
    pub max_ratio: f64,
    pub holds: bool,
}

/// The chain inequality `|<u>_ρ - <u>_r| <= chain M r^σ` for every center
/// and every pair of ladder radii.
pub fn chain_check(p: &CampanatoProfile) -> ChainCheck {
    let mut pairs = 0;
    let mut max_ratio: f64 = 0.0;
    let mut holds = true;
    for avg in &p.averages {
        for i in 0..avg.len() {
            for j in i + 1..avg.len() {
                let diff = (avg[j] - avg[i]).abs();
                let bound = p.constants.chain * p.m * p.radii[i].powf(p.sigma);
                pairs += 1;
                holds &= diff <= bound * (1.0 + 1e-9) + 1e-14;
                if bound > 0.0 {
                    max_ratio = max_ratio.max(diff / bound);
                }
            }
        }
    }
    ChainCheck { pairs, max_ratio, holds }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderPair {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub difference: f64,
    pub ratio: f64,
    /// `true` when `|x - z| < r0/4`.
    pub near: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub seminorm: f64,
    pub pairs: Vec<HolderPair>,
    /// `near_pairs M`, the bound for close pairs.
    pub near_bound: f64,
    /// `2 (max |<u>_{r0}| + chain M r0^σ) / (r0/4)^σ`, the bound for far pairs.
    pub far_bound: f64,
    pub within_bounds: bool,
}

/// `sup |Tu(x) - Tu(z)| / |x - z|^σ` over profile centers, against the
/// two-case chain bound.
pub fn holder_norm_estimate(p: &CampanatoProfile) -> Result<HolderEstimate> {
    if p.centers.len() < 2 {
        return Err(Error::Parameter("need at least two centers".into()));
    }
    let traces = (0..p.centers.len())
        .map(|c| trace_by_averages(p, c))
        .collect::<Result<Vec<_>>>()?;
    let near_bound = p.constants.near_pairs * p.m;
    let sup_avg = p.averages.iter().map(|r| r[0].abs()).fold(0.0, f64::max);
    let far_bound = 2.0 * (sup_avg + p.constants.chain * p.m * p.r0.powf(p.sigma)) / (p.r0 / 4.0).powf(p.sigma);
    let mut pairs = Vec::new();
    let mut seminorm: f64 = 0.0;
    let mut ok = true;
    for i in 0..p.centers.len() {
        for j in i + 1..p.centers.len() {
            let distance = p.centers[i]
                .iter()
                .zip(&p.centers[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            if distance == 0.0 {
                continue;
            }
            let difference = (traces[i].shifted - traces[j].shifted).abs();
            let ratio = difference / distance.powf(p.sigma);
            let near = distance < p.r0 / 4.0;
            let bound = if near { near_bound } else { far_bound };
            ok &= ratio <= bound * (1.0 + 1e-9) + 1e-14;
            seminorm = seminorm.max(ratio);
            pairs.push(HolderPair { i, j, distance, difference, ratio, near });
        }
    }
    Ok(HolderEstimate {
        seminorm,
        pairs,
        near_bound,
        far_bound,
        within_bounds: ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn centers(k: usize) -> Vec<Vec<f64>> {
        (0..k).map(|i| vec![-0.2 + 0.4 * i as f64 / (k - 1) as f64]).collect()
    }

    #[test]
    fn constant_has_zero_seminorm() {
        let g = Grid::box_grid(1, 1.0, 1.0, 512).unwrap();
        let u = GridField::from_fn(g, |_, _| 1.75);
        let w = WeightParam::from_a(1, 0.0).unwrap();
        let p = estimate_campanato(&u, &centers(4), &Ladder::default(), 0.5, &w).unwrap();
        assert_eq!(p.m, 0.0);
        let h = holder_norm_estimate(&p).unwrap();
        assert_eq!(h.seminorm, 0.0);
    }

    #[test]
    fn affine_trace_and_shift_invariance() {
        let g = Grid::box_grid(1, 1.0, 1.0, 512).unwrap();
        let w = WeightParam::from_a(1, -0.5).unwrap();
        // dyadic values keep the shift exact in floating point
        let u = GridField::from_fn(g.clone(), |x, _| x[0]);
        let v = GridField::from_fn(g, |x, _| x[0] + 4.0);
        let cs = centers(5);
        let p = estimate_campanato(&u, &cs, &Ladder::default(), 0.5, &w).unwrap();
        let q = estimate_campanato(&v, &cs, &Ladder::default(), 0.5, &w).unwrap();
        assert!(p.m > 0.0);
        for c in 0..cs.len() {
            let t = trace_by_averages(&p, c).unwrap();
            assert!((t.value - cs[c][0]).abs() < 1e-4, "{} {}", t.value, cs[c][0]);
        }
        assert!(chain_check(&p).holds);
        let a = holder_norm_estimate(&p).unwrap();
        let b = holder_norm_estimate(&q).unwrap();
        assert_eq!(a.seminorm, b.seminorm);
        assert!(a.within_bounds);
    }

    #[test]
    fn small_window_rejected() {
        let g = Grid::box_grid(1, 1.0, 1.0, 32).unwrap();
        let u = GridField::from_fn(g, |x, _| x[0]);
        let w = WeightParam::from_a(1, 0.0).unwrap();
        assert!(matches!(
            estimate_campanato(&u, &centers(3), &Ladder::default(), 0.5, &w),
            Err(Error::WindowTooSmall { .. })
        ));
    }
}
