//! Weighted sphere and ball moments of monomials, exact and in floating point.
//!
//! ```bash
//! cargo run --example weight_moments
//! ```

use frharm::exact::rational_to_string;
use frharm::weight::{ball_moment, sphere_moment, sphere_moment_ratio, MonomialExponent, WeightParam};

fn main() -> frharm::Result<()> {
    for (num, den) in [(-1, 2), (0, 1), (1, 2)] {
        let w = WeightParam::from_a_ratio(2, num, den)?;
        println!(
            "n = 2, a = {num}/{den}: s = {}, |dB_1|_w = {:.12}, |B_1|_w = {:.12}",
            w.s(),
            w.unit_sphere_measure(),
            w.unit_ball_volume()
        );
        for m in [
            MonomialExponent::new(vec![2, 0], 0),
            MonomialExponent::new(vec![0, 0], 2),
            MonomialExponent::new(vec![2, 2], 2),
        ] {
            println!(
                "  x^{:?} y^{}: sphere ratio {}, sphere {:.12e}, ball(r=0.5) {:.12e}",
                m.alpha,
                m.b,
                rational_to_string(&sphere_moment_ratio(&w, &m)),
                sphere_moment(&w, &m),
                ball_moment(&w, &m, 0.5)
            );
        }
    }
    Ok(())
}
