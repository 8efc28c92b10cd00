//! Campanato profiles on dyadic ladders, traces by ball averages and a
//! Hölder seminorm estimate from them.
//!
//! ```bash
//! cargo run --release --example campanato_trace
//! ```

use frharm::grid::{Grid, GridField};
use frharm::trace::{chain_check, estimate_campanato, holder_norm_estimate, trace_by_averages, Ladder};
use frharm::weight::WeightParam;

fn main() -> frharm::Result<()> {
    let w = WeightParam::from_s(1, 0.6)?;
    let grid = Grid::box_grid(1, 2.0, 2.0, 512)?;
    let u = GridField::from_fn(grid, |x, y| x[0].sin() + 0.5 * x[0].abs().powf(0.75) + y * y);
    let centers: Vec<Vec<f64>> = (0..5).map(|i| vec![-0.4 + 0.2 * i as f64]).collect();
    let ladder = Ladder {
        base: std::f64::consts::SQRT_2,
        r0: None,
    };
    for sigma in [0.5, 0.75, 0.9] {
        let p = estimate_campanato(&u, &centers, &ladder, sigma, &w)?;
        let cc = chain_check(&p);
        let h = holder_norm_estimate(&p)?;
        println!(
            "sigma = {sigma}: M = {:.4}, chain holds {} (max ratio {:.3}), seminorm {:.4} within bounds {}",
            p.m, cc.holds, cc.max_ratio, h.seminorm, h.within_bounds
        );
    }
    let p = estimate_campanato(&u, &centers, &ladder, 0.5, &w)?;
    for (c, x) in centers.iter().enumerate() {
        let t = trace_by_averages(&p, c)?;
        let exact = x[0].sin() + 0.5 * x[0].abs().powf(0.75);
        println!("  Tu({:5.2}) = {:.6} (pointwise {exact:.6}, certificate {:.3e})", x[0], t.value, t.certificate);
    }
    Ok(())
}
