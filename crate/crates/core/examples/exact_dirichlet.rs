//! Exact `L_a` Dirichlet solves on the unit ball with polynomial data.
//!
//! ```bash
//! cargo run --example exact_dirichlet
//! ```

use frharm::poly::{poly_dirichlet_solve, reduce_la, WeightedPoly};
use frharm::weight::WeightParam;
use num::{BigRational, One};

fn show(p: &WeightedPoly) -> String {
    p.to_json_terms()
        .iter()
        .map(|t| format!("{} x^{:?} y^{}", t.value, t.alpha, t.b))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn main() -> frharm::Result<()> {
    let y2 = WeightedPoly::monomial(1, vec![0], 2, BigRational::one());
    let x2y2 = WeightedPoly::monomial(1, vec![2], 2, BigRational::one());
    for (num, den) in [(-1, 2), (0, 1), (1, 2)] {
        let w = WeightParam::from_a_ratio(1, num, den)?;
        for (name, p) in [("y^2", &y2), ("x^2 y^2", &x2y2)] {
            let u = poly_dirichlet_solve(p, &w)?;
            let residual = reduce_la(&u, &w)?;
            let divisible = p.sub(&u).divide_by_one_minus_r2().is_some();
            println!("a = {num}/{den}, data {name}");
            println!("  solution  {}", show(&u));
            println!("  L_a u = 0: {}, (p - u)/(1 - r^2) polynomial: {divisible}", residual.is_zero());
        }
    }
    Ok(())
}
