//! Orthonormal homogeneous `L_a`-harmonic polynomials and the expansion of
//! boundary data in them.
//!
//! ```bash
//! cargo run --example harmonic_basis
//! ```

use frharm::poly::{expand, ExpandOptions, HarmonicBasis};
use frharm::weight::WeightParam;

fn main() -> frharm::Result<()> {
    let w = WeightParam::from_a_ratio(1, -1, 2)?;
    let basis = HarmonicBasis::new(&w, 8)?;
    println!("{} members up to degree 8", basis.len());
    for k in 0..=8 {
        println!("  degree {k}: {}", basis.members_of_degree(k).count());
    }
    let gram = basis.gram();
    let mut dev: f64 = 0.0;
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            dev = dev.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    println!("max |G - I| = {dev:.3e}");

    // boundary data exp(x) cos(y), even in y
    let f = |p: &[f64]| p[0].exp() * p[1].cos();
    let rep = expand(&f, &basis, &ExpandOptions::default(), None)?;
    println!("block energies on dB_1:");
    for (k, e) in rep.block_energies.iter().enumerate() {
        println!("  {k}: {e:.6e}");
    }
    println!("tail ratios {:?}", rep.tail_ratios());
    Ok(())
}
