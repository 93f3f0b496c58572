//! Enumerate every KKT point of the boundary distance problem and compare
//! the best one with the ADMM answer.

use ellipsoid_distance::global::{build_pencils, recover_candidates, DEFAULT_TOL_FEAS};
use ellipsoid_distance::linalg::generalized_real_eigenvalues;
use ellipsoid_distance::probgen::gen_nonconvex;
use ellipsoid_distance::{solve_global, solve_with_restart, NonconvexSolverOptions};

fn main() -> ellipsoid_distance::Result<()> {
    let (a, b) = gen_nonconvex(3, 11)?;

    let (l1, l2) = build_pencils(&a, &b)?;
    let mus = generalized_real_eigenvalues(&l1)?;
    let gammas = generalized_real_eigenvalues(&l2)?;
    println!("{} real μ, {} real γ", mus.len(), gammas.len());
    for c in recover_candidates(&a, &b, &mus, &gammas, DEFAULT_TOL_FEAS).iter().take(6) {
        println!("  μ {:>10.5}  γ {:>10.5}  distance {:.8}", c.mu, c.gamma, c.distance);
    }

    let global = solve_global(&a, &b, DEFAULT_TOL_FEAS)?;
    let admm = solve_with_restart(&a, &b, &NonconvexSolverOptions::default())?;
    println!("global {:.8}  admm {:.8}", global.distance, admm.distance);
    Ok(())
}
