//! Ellipsoids given as `⟨x, Ax⟩ + ⟨b, x⟩ + α ≤ 0`.

use ellipsoid_distance::{from_general_quadric, solve_convex, ConvexSolverOptions, GeneralQuadric, SymPdMatrix, Vector};

fn main() -> ellipsoid_distance::Result<()> {
    // x² + y² − 2x − 3 ≤ 0 is the disc of radius 2 about (1, 0).
    let disc = from_general_quadric(&GeneralQuadric {
        a: SymPdMatrix::identity(2),
        b: Vector::from_vec(vec![-2.0, 0.0]),
        alpha: -3.0,
    })?;
    println!("center {:?}, Q {:?}", disc.center().as_slice(), disc.q().to_rows());

    // 2x² + 2y² − 24x + 70 ≤ 0 is the unit disc about (6, 0).
    let other = from_general_quadric(&GeneralQuadric {
        a: SymPdMatrix::from_diagonal(&[2.0, 2.0])?,
        b: Vector::from_vec(vec![-24.0, 0.0]),
        alpha: 70.0,
    })?;
    let r = solve_convex(&disc, &other, &ConvexSolverOptions::self_adaptive())?;
    println!("distance {:.8} (expected 2)", r.distance);
    Ok(())
}
