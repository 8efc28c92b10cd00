//! Poisson extension of thin data and the two routes to `(-Δ)^s`: the
//! weighted normal derivative of the extension and the principal-value integral.
//!
//! ```bash
//! cargo run --release --example extension_routes
//! ```

use frharm::extension::{
    calibrate_constants, frac_normal_derivative_of, poisson_extend, pv_fractional_laplacian, QuadSpec, ThinFunction,
};
use frharm::weight::WeightParam;

fn main() -> frharm::Result<()> {
    let spec = QuadSpec::default();
    let w = WeightParam::from_s(1, 0.75)?;
    let k = calibrate_constants(&w, &spec)?;
    println!("s = 0.75: c_P = {:.12}, c_frac = {:.12}, c_pv = {:.12}", k.c_poisson, k.c_frac, k.c_pv);

    let g = ThinFunction::gaussian(vec![0.0], 0.8, 1.0);
    let pts: Vec<(Vec<f64>, f64)> = [0.05, 0.2, 1.0].iter().map(|&y| (vec![0.3], y)).collect();
    let ext = poisson_extend(&g, &w, k.c_poisson, &pts, &spec)?;
    for ((x, y), v) in pts.iter().zip(&ext) {
        println!("  U({}, {y}) = {v:.10}", x[0]);
    }

    for (name, f) in [
        ("gaussian", ThinFunction::gaussian(vec![0.0], 0.8, 1.0)),
        ("bump", ThinFunction::bump(vec![0.0], 1.0, 1.0)),
    ] {
        let lim = frac_normal_derivative_of(&f, &w, k.c_poisson, &[0.2], &spec)?;
        let route = -k.c_frac * lim.value;
        let pv = pv_fractional_laplacian(&f, &w, &[0.2], &k, &spec)?;
        println!("{name}: extension {route:.10}, principal value {pv:.10}, limit error {:.1e}", lim.error);
    }
    Ok(())
}
