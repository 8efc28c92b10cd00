//! Almost minimizers with a prescribed gauge `C r^alpha`, and regularity
//! verdicts on them.
//!
//! ```bash
//! cargo run --release --example almost_minimizers
//! ```

use frharm::gauge::{default_radii, perturb_minimizer, regularity_verdict, Claim, GaugeKind, GaugeOptions, PerturbSpec};
use frharm::grid::{Grid, GridField};
use frharm::solver::{solve_dirichlet, SolverOptions};
use frharm::weight::WeightParam;

fn main() -> frharm::Result<()> {
    let w = WeightParam::from_s(1, 0.25)?;
    let grid = Grid::box_grid(1, 2.0, 2.0, 512)?;
    let data = GridField::box_dirichlet(grid.clone(), |x, y| 1.0 + 0.5 * x[0] + 0.05 * (x[0] * x[0] - 3.0 * y * y));
    let (u, _) = solve_dirichlet(&data, &w, &SolverOptions::default())?;

    let centers: Vec<Vec<f64>> = (0..5).map(|i| vec![-0.4 + 0.2 * i as f64]).collect();
    let radii = default_radii(&grid, &centers, 6)?;
    let spec = PerturbSpec {
        alpha: 1.0,
        constant: 0.05,
        amplitude: 0.1,
        center: vec![0.0],
        support: 1.5,
        height: 1.5,
        kind: GaugeKind::Harmonic,
        centers,
        radii,
        max_rounds: 20,
    };
    let p = perturb_minimizer(&u, &spec, &w, &GaugeOptions::default())?;
    println!(
        "amplitude {:.4} after {} rounds, gauge/target in [{:.2}, {:.2}], slope {:?}",
        p.amplitude, p.rounds, p.ratio_range.0, p.ratio_range.1, p.gauge.slope
    );
    let f = p.field.as_ref().expect("field");
    for claim in [Claim::Rigidity, Claim::C1Beta { alpha: 1.0 }, Claim::AlmostLipschitz] {
        let v = regularity_verdict(f, &p.gauge, &w, claim);
        println!("{claim:?}: passed {} beta {:?} {}", v.passed, v.beta, v.note.unwrap_or_default());
        for e in v.entries.iter().take(3) {
            println!("  {}: {:.4e}", e.label, e.value);
        }
    }
    Ok(())
}
