//! Growth exponents of weighted energies around a thin point, and the
//! monotonicity of normalized energies for a Signorini solution.
//!
//! ```bash
//! cargo run --release --example growth_and_monotonicity
//! ```

use frharm::grid::{Grid, GridField};
use frharm::metrics::{fit_growth, monotonicity_check, EnergyMode, Functional, RadiiSpec};
use frharm::solver::{solve_dirichlet, solve_signorini, SolverOptions};
use frharm::weight::WeightParam;

fn main() -> frharm::Result<()> {
    let a = -0.5;
    let w = WeightParam::from_a(1, a)?;
    let grid = Grid::box_grid(1, 1.0, 1.0, 256)?;
    let spec = RadiiSpec::Geometric { count: 8 };

    let data = GridField::box_dirichlet(grid.clone(), |x, y| 0.3 + x[0] - 0.5 * x[0] * x[0] + 0.7 * y * y + (2.0 * x[0]).cos() * y * y);
    let (u, _) = solve_dirichlet(&data, &w, &SolverOptions::default())?;
    for (name, f, target) in [
        ("tangential energy", Functional::Energy(EnergyMode::Tangential), 2.0 + a),
        ("normal energy", Functional::Energy(EnergyMode::Normal), 4.0 + a),
        ("gradient oscillation", Functional::GradientOscillation, 4.0 + a),
    ] {
        let fit = fit_growth(&u, &[0.0], &spec, f, &w)?;
        println!("{name:22} slope {:.4} (lower bound {target}), local {:?}", fit.slope, fit.local_slopes().iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>());
    }

    let data = GridField::box_dirichlet(grid, |x, y| x[0] + 0.1 + 0.3 * y * y);
    let (v, _) = solve_signorini(&data, &w, &SolverOptions::default())?;
    for x0 in [-0.25, 0.0, 0.25] {
        let rep = monotonicity_check(&v, &[x0], &spec, 2.0 + a, Functional::Energy(EnergyMode::Full), &w)?;
        println!("center {x0:5}: r^-(2+a) E(r) nondecreasing = {}", rep.passed);
    }
    Ok(())
}
