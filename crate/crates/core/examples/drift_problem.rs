//! Drift problems, `(-Δ)^s u = b·∇u` on the thin space, with and without
//! the thin obstacle.
//!
//! ```bash
//! cargo run --release --example drift_problem
//! ```

use frharm::extension::{calibrate_constants, QuadSpec};
use frharm::grid::{Grid, GridField};
use frharm::solver::{solve_drift, DriftSpec, SolverOptions};
use frharm::weight::WeightParam;

fn main() -> frharm::Result<()> {
    let w = WeightParam::from_s(1, 0.75)?;
    let k = calibrate_constants(&w, &QuadSpec::default())?;
    let grid = Grid::box_grid(1, 2.0, 2.0, 256)?;
    let data = GridField::box_dirichlet(grid.clone(), |x, y| 0.4 + 0.5 * x[0] + 0.1 * (x[0] * x[0] - y * y));
    for b in [0.0, 1.0, -1.0] {
        let drift = DriftSpec::constant(&grid, k.drift_scale(), &[b]);
        for obstacle in [false, true] {
            let (u, rep) = solve_drift(&data, &w, &drift, obstacle, &SolverOptions::default())?;
            let t = u.thin_trace();
            let mid = t[t.len() / 2];
            println!(
                "b = {b:4}, obstacle = {obstacle:5}: u(0,0) = {mid:.6}, contact nodes {}, iterations {}",
                rep.active_set.len(),
                rep.iterations
            );
        }
    }
    Ok(())
}
