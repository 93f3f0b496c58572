//! Fixed versus self-adaptive penalty on seeded random instances.

use ellipsoid_distance::probgen::gen_convex;
use ellipsoid_distance::{solve_convex, ConvexSolverOptions};

fn main() -> ellipsoid_distance::Result<()> {
    let fixed = ConvexSolverOptions::default();
    let adaptive = ConvexSolverOptions::self_adaptive();
    println!("{:>4} {:>5} {:>10} {:>10} {:>14}", "d", "seed", "admm", "sa-admm", "|Δ distance|");
    for d in [5, 20, 50] {
        for seed in 0..3 {
            let (a, b) = gen_convex(d, seed)?;
            let r1 = solve_convex(&a, &b, &fixed)?;
            let r2 = solve_convex(&a, &b, &adaptive)?;
            println!(
                "{d:>4} {seed:>5} {:>10} {:>10} {:>14.2e}",
                r1.iterations,
                r2.iterations,
                (r1.distance - r2.distance).abs()
            );
        }
    }
    Ok(())
}
