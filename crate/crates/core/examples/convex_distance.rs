//! Distance between two solid ellipsoids with the fixed-penalty ADMM.
//!
//! ```text
//! cargo run --example convex_distance
//! ```

use ellipsoid_distance::{solve_convex, ConvexSolverOptions, Ellipsoid, SymPdMatrix, Vector};

fn main() -> ellipsoid_distance::Result<()> {
    // x²/4 + y² ≤ 1 and a unit disc centred at (5, 1).
    let a = Ellipsoid::new(SymPdMatrix::from_diagonal(&[0.25, 1.0])?, Vector::from_vec(vec![0.0, 0.0]))?;
    let b = Ellipsoid::ball(Vector::from_vec(vec![5.0, 1.0]), 1.0)?;

    let report = solve_convex(&a, &b, &ConvexSolverOptions::default())?;
    println!("status     {}", report.status);
    println!("distance   {:.9}", report.distance);
    println!("iterations {}", report.iterations);
    println!("x1         {:?}", report.x1.as_slice());
    println!("x2         {:?}", report.x2.as_slice());
    println!("residuals  {:?}", report.final_residuals);
    Ok(())
}
