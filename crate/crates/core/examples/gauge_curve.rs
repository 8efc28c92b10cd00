//! Measured gauge `E(u)/E(v) - 1` of a drift solution against its ball
//! replacements, exported as CSV.
//!
//! ```bash
//! cargo run --release --example gauge_curve
//! ```

use frharm::extension::{calibrate_constants, QuadSpec};
use frharm::gauge::{default_centers, default_radii, measure_gauge, GaugeKind, GaugeOptions};
use frharm::grid::{Grid, GridField};
use frharm::solver::{solve_drift, DriftSpec, SolverOptions};
use frharm::weight::WeightParam;

fn main() -> frharm::Result<()> {
    let w = WeightParam::from_s(1, 0.75)?;
    let k = calibrate_constants(&w, &QuadSpec::default())?;
    let grid = Grid::box_grid(1, 2.0, 2.0, 256)?;
    let data = GridField::box_dirichlet(grid.clone(), |x, y| 0.4 + 0.5 * x[0] + 0.1 * (x[0] * x[0] - y * y));
    let drift = DriftSpec::constant(&grid, k.drift_scale(), &[1.0]);
    let (u, _) = solve_drift(&data, &w, &drift, false, &SolverOptions::default())?;

    let centers = default_centers(&grid, 4);
    let radii = default_radii(&grid, &centers, 6)?;
    let curve = measure_gauge(&u, &centers, &radii, &w, GaugeKind::Harmonic, &GaugeOptions::default())?;
    println!("fitted decay slope {:?} (the drift bound needs >= {})", curve.slope, -w.a());
    for (i, r) in curve.radii.iter().enumerate() {
        let om = curve.at_radius(i);
        println!("  r = {r:.4}: omega in [{:.3e}, {:.3e}]", om.iter().copied().fold(f64::INFINITY, f64::min), om.iter().copied().fold(0.0, f64::max));
    }
    let path = std::env::temp_dir().join("frharm_gauge.csv");
    curve.write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
