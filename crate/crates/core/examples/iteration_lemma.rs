//! The dyadic iteration lemma applied to a sampled growth function.
//!
//! ```bash
//! cargo run --example iteration_lemma
//! ```

use frharm::metrics::{hl_iterate, HLParams};

fn main() -> frharm::Result<()> {
    let p = HLParams {
        a_hl: 1.0,
        gamma: 2.0,
        beta: 1.0,
        b_hl: 0.1,
        r0: 1.0,
    };
    let (tau, eps, c) = p.constants();
    println!("tau = {tau:.4}, epsilon = {eps:.4e}, c = {c:.4}");
    let phi: Vec<(f64, f64)> = (0..12).map(|k| {
        let r = 0.5f64.powi(11 - k);
        (r, r * r + 0.05 * r)
    }).collect();
    let rep = hl_iterate(&phi, &p)?;
    println!("conclusion holds: {}, min margin {:.3e}", rep.conclusion_holds, rep.min_margin);
    for (r, b) in rep.bound_curve.iter().step_by(3) {
        println!("  r = {r:.5}: bound {b:.4e}");
    }
    // a function violating the hypothesis is reported, not iterated
    let bad: Vec<(f64, f64)> = (0..6).map(|k| (0.5f64.powi(5 - k), 1.0 + k as f64 * 1e-3)).collect();
    match hl_iterate(&bad, &HLParams { b_hl: 0.0, ..p }) {
        Ok(r) => println!("unexpected: {r:?}"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
