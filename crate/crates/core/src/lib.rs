//! Distances between ellipsoids and between their boundaries.
//!
//! * [`convex`]: ADMM with a fixed or self-adaptive penalty for
//!   `min ‖x₁ − x₂‖` over two solid ellipsoids.
//! * [`nonconvex`]: ADMM on the boundaries, with a reflection restart.
//! * [`global`]: enumeration of KKT points through two generalized
//!   eigenvalue problems, used to certify the nonconvex solver in low
//!   dimension.
//! * [`probgen`]: seeded instance generators and closed-form fixtures.
//!
//! ```
//! use ellipsoid_distance::{solve_convex, ConvexSolverOptions, Ellipsoid, Vector};
//!
//! let a = Ellipsoid::ball(Vector::from_vec(vec![0.0, 0.0]), 1.0).unwrap();
//! let b = Ellipsoid::ball(Vector::from_vec(vec![10.0, 0.0]), 1.0).unwrap();
//! let report = solve_convex(&a, &b, &ConvexSolverOptions::self_adaptive()).unwrap();
//! assert!((report.distance - 8.0).abs() < 1e-5);
//! ```

pub mod cli;
pub mod convex;
pub mod ellipsoid;
pub mod error;
pub mod global;
pub mod instance;
pub mod linalg;
pub mod nonconvex;
pub mod probgen;
pub mod report;

pub use convex::{solve_convex, AlphaSchedule, ConvexSolverOptions};
pub use ellipsoid::{constraint_value, from_general_quadric, whiten, Ellipsoid, GeneralQuadric, WhitenedPair};
pub use error::{Error, Result};
pub use global::{solve_global, KktCandidate};
pub use linalg::{Matrix, SymPdMatrix, Vector};
pub use nonconvex::{solve_nonconvex, solve_with_restart, NonconvexSolverOptions, UpdateRule};
pub use report::{Residuals, SolveReport, Status};
