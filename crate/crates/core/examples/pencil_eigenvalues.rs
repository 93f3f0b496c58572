//! Real eigenvalues of a matrix pencil, the `λ` with `det(λA + B) = 0`.

use ellipsoid_distance::linalg::{generalized_real_eigenvalues, Pencil};
use ellipsoid_distance::Matrix;

fn main() -> ellipsoid_distance::Result<()> {
    // M has eigenvalues 1, 2 and the complex pair ±i; with A = I and B = −M
    // the real ones come back.
    let m = Matrix::from_row_slice(4, 4, &[
        1.0, 0.0, 0.0, 0.0,
        0.0, 2.0, 0.0, 0.0,
        0.0, 0.0, 0.0, -1.0,
        0.0, 0.0, 1.0, 0.0,
    ]);
    let real = generalized_real_eigenvalues(&Pencil::new(Matrix::identity(4, 4), -&m)?)?;
    println!("A = I:        {real:?}");

    // A zero in A pushes the eigenvalue 2 to infinity, and it is dropped.
    let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0, 1.0]));
    let real = generalized_real_eigenvalues(&Pencil::new(a, -m)?)?;
    println!("A singular:   {real:?}");
    Ok(())
}
