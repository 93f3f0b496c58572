//! Seeded instance generators and closed-form test fixtures.
//!
//! # Random stream
//!
//! Every instance is drawn from `ChaCha8Rng::seed_from_u64(seed)`. A uniform
//! variate on `[0, 1)` is `(next_u64() >> 11) · 2⁻⁵³` and is mapped affinely
//! onto the target interval. Draws happen in this order:
//!
//! * convex: the entries of `A₁` row by row (the whole matrix is redrawn until
//!   it is numerically full rank), then `A₂` likewise, then `z₁`, then `z₂`;
//! * nonconvex: `A` (redrawn as above), the diagonal of `Q₂`, `z₁`, `z₂`.
//!
//! A matrix counts as full rank when its smallest singular value exceeds
//! `1e-8` times the largest.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ellipsoid::Ellipsoid;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymPdMatrix, Vector};

pub const FULL_RANK_RATIO: f64 = 1e-8;

/// Names accepted by [`analytic_instance`].
pub const CATALOG: [&str; 5] = [
    "disjoint_spheres",
    "concentric_spheres",
    "intersecting_circles",
    "nested_offset_balls",
    "axis_ellipses",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// `Qᵢ = AᵢᵀAᵢ` with entries of `Aᵢ` and `zᵢ` uniform on `[−10, 10]`.
    ConvexUniform,
    /// `Q₁ = AᵀA` with entries uniform on `[−100, 100]`, `Q₂` diagonal with
    /// entries uniform on `[0.1, 0.6]`, centers uniform on `[−0.05, 0.05]`.
    /// Usually the first ellipsoid lies inside the second.
    NonconvexNested,
    Analytic(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub d: usize,
    pub seed: u64,
    pub protocol: Protocol,
}

impl InstanceSpec {
    pub fn generate(&self) -> Result<(Ellipsoid, Ellipsoid)> {
        match &self.protocol {
            Protocol::ConvexUniform => gen_convex(self.d, self.seed),
            Protocol::NonconvexNested => gen_nonconvex(self.d, self.seed),
            Protocol::Analytic(name) => analytic_instance(name, self.d).map(|a| (a.e1, a.e2)),
        }
    }
}

/// Uniform variates on `[lo, hi)` from the documented stream.
pub struct Uniform {
    rng: ChaCha8Rng,
}

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn vector(&mut self, d: usize, lo: f64, hi: f64) -> Vector {
        Vector::from_iterator(d, (0..d).map(|_| self.range(lo, hi)))
    }

    /// Row-major draw of an `r × c` matrix.
    pub fn matrix(&mut self, r: usize, c: usize, lo: f64, hi: f64) -> Matrix {
        let data: Vec<f64> = (0..r * c).map(|_| self.range(lo, hi)).collect();
        Matrix::from_row_slice(r, c, &data)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidOptions(format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

/// `AᵀA` for the first full-rank `A` drawn with entries on `[−bound, bound)`.
fn gram_of_full_rank(u: &mut Uniform, d: usize, bound: f64) -> SymPdMatrix {
    loop {
        let a = u.matrix(d, d, -bound, bound);
        let sv = a.clone().singular_values();
        if sv.min() > FULL_RANK_RATIO * sv.max() {
            if let Ok(q) = SymPdMatrix::new(a.transpose() * &a) {
                return q;
            }
        }
    }
}

pub fn gen_convex(d: usize, seed: u64) -> Result<(Ellipsoid, Ellipsoid)> {
    check_dim(d)?;
    let mut u = Uniform::new(seed);
    let q1 = gram_of_full_rank(&mut u, d, 10.0);
    let q2 = gram_of_full_rank(&mut u, d, 10.0);
    let z1 = u.vector(d, -10.0, 10.0);
    let z2 = u.vector(d, -10.0, 10.0);
    Ok((Ellipsoid::new(q1, z1)?, Ellipsoid::new(q2, z2)?))
}

pub fn gen_nonconvex(d: usize, seed: u64) -> Result<(Ellipsoid, Ellipsoid)> {
    check_dim(d)?;
    let mut u = Uniform::new(seed);
    let q1 = gram_of_full_rank(&mut u, d, 100.0);
    let diag: Vec<f64> = (0..d).map(|_| u.range(0.1, 0.6)).collect();
    let q2 = SymPdMatrix::from_diagonal(&diag)?;
    let z1 = u.vector(d, -0.05, 0.05);
    let z2 = u.vector(d, -0.05, 0.05);
    Ok((Ellipsoid::new(q1, z1)?, Ellipsoid::new(q2, z2)?))
}

/// A fixture with known distances between the sets and between their boundaries.
#[derive(Debug, Clone)]
pub struct AnalyticInstance {
    pub e1: Ellipsoid,
    pub e2: Ellipsoid,
    pub convex_distance: f64,
    pub boundary_distance: f64,
}

fn axis(d: usize, t: f64) -> Vector {
    let mut v = Vector::zeros(d);
    v[0] = t;
    v
}

/// One of the [`CATALOG`] fixtures in dimension `d ≥ 2`. Offsets lie along `e₁`.
///
/// | name | sets | convex | boundary |
/// |---|---|---|---|
/// | `disjoint_spheres` | unit balls at `0`, `10e₁` | 8 | 8 |
/// | `concentric_spheres` | radii 1 and 3 at `0` | 0 | 2 |
/// | `intersecting_circles` | unit balls at `0`, `e₁` | 0 | 0 |
/// | `nested_offset_balls` | unit ball at `0.5e₁` in radius 3 at `0` | 0 | 1.5 |
/// | `axis_ellipses` | semi-axis 2 along `e₁` at `0`, unit ball at `5e₁` | 2 | 2 |
pub fn analytic_instance(name: &str, d: usize) -> Result<AnalyticInstance> {
    check_dim(d)?;
    let (e1, e2, convex_distance, boundary_distance) = match name {
        "disjoint_spheres" => (Ellipsoid::ball(axis(d, 0.0), 1.0)?, Ellipsoid::ball(axis(d, 10.0), 1.0)?, 8.0, 8.0),
        "concentric_spheres" => (Ellipsoid::ball(axis(d, 0.0), 1.0)?, Ellipsoid::ball(axis(d, 0.0), 3.0)?, 0.0, 2.0),
        "intersecting_circles" => (Ellipsoid::ball(axis(d, 0.0), 1.0)?, Ellipsoid::ball(axis(d, 1.0), 1.0)?, 0.0, 0.0),
        "nested_offset_balls" => (Ellipsoid::ball(axis(d, 0.5), 1.0)?, Ellipsoid::ball(axis(d, 0.0), 3.0)?, 0.0, 1.5),
        "axis_ellipses" => {
            let mut diag = vec![1.0; d];
            diag[0] = 0.25;
            let e1 = Ellipsoid::new(SymPdMatrix::from_diagonal(&diag)?, axis(d, 0.0))?;
            (e1, Ellipsoid::ball(axis(d, 5.0), 1.0)?, 2.0, 2.0)
        }
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok(AnalyticInstance {
        e1,
        e2,
        convex_distance,
        boundary_distance,
    })
}
