//! Minimum distance between two ellipsoid boundaries, one nested in the
//! other, with and without the reflection restart.

use ellipsoid_distance::nonconvex::default_start;
use ellipsoid_distance::probgen::gen_nonconvex;
use ellipsoid_distance::{solve_nonconvex, solve_with_restart, NonconvexSolverOptions};

fn main() -> ellipsoid_distance::Result<()> {
    let opts = NonconvexSolverOptions::default();
    for seed in 0..8 {
        let (a, b) = gen_nonconvex(3, seed)?;
        let (y0, l0) = default_start(3);
        let single = solve_nonconvex(&a, &b, &opts, &y0, &l0)?;
        let restarted = solve_with_restart(&a, &b, &opts)?;
        println!(
            "seed {seed}: single {:.6} ({} its, {})  restart {:.6} ({})",
            single.distance, single.iterations, single.status, restarted.distance, restarted.status
        );
    }
    Ok(())
}
