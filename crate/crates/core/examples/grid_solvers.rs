//! Dirichlet and Signorini solves on a box, with a binary field dump.
//!
//! ```bash
//! cargo run --release --example grid_solvers
//! ```

use frharm::grid::{Grid, GridField};
use frharm::solver::{solve_dirichlet, solve_signorini, Method, SolverOptions};
use frharm::weight::WeightParam;

fn main() -> frharm::Result<()> {
    let w = WeightParam::from_a(1, 0.0)?;
    let grid = Grid::box_grid(1, 1.0, 1.0, 128)?;
    let data = GridField::box_dirichlet(grid.clone(), |x, y| x[0] + 0.1 + 0.3 * y * y);

    let (u, rep) = solve_dirichlet(&data, &w, &SolverOptions::default())?;
    println!("dirichlet: {} iterations, residual {:.2e}", rep.iterations, rep.pde_residual);
    let (v, rep) = solve_signorini(&data, &w, &SolverOptions::default())?;
    println!(
        "signorini: {} iterations, {} active-set rounds, {} contact nodes",
        rep.iterations,
        rep.outer_iterations,
        rep.active_set.len()
    );
    let sor = SolverOptions {
        method: Method::Sor,
        tol: 1e-10,
        ..SolverOptions::default()
    };
    let (vs, _) = solve_signorini(&data, &w, &sor)?;
    let gap = v.values.iter().zip(&vs.values).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    println!("krylov vs projected SOR: max difference {gap:.2e}");
    let free_min = (0..v.grid.thin_len())
        .map(|t| v.grid.index(&v.grid.thin_multi(t), 0))
        .filter(|&k| !v.fixed[k])
        .map(|k| v.values[k])
        .fold(f64::INFINITY, f64::min);
    let dir_min = (0..u.grid.thin_len())
        .map(|t| u.grid.index(&u.grid.thin_multi(t), 0))
        .filter(|&k| !u.fixed[k])
        .map(|k| u.values[k])
        .fold(f64::INFINITY, f64::min);
    println!("min over free thin nodes: dirichlet {dir_min:.4}, signorini {free_min:.4}");

    let path = std::env::temp_dir().join("frharm_signorini.bin");
    v.write_binary(&path, Some(&w))?;
    let (back, meta) = GridField::read_binary(&path)?;
    println!("round trip through {}: equal = {}, weight a = {:?}", path.display(), back.values == v.values, meta.map(|m| m.a()));
    Ok(())
}
