//! Ellipsoids `{x : ⟨x − z, Q(x − z)⟩ ≤ 1}` and the whitening change of
//! variables `y = S x − c` with `S = √Q`, `c = S z`.

use crate::error::{Error, Result};
use crate::linalg::{sqrt_pd, Matrix, SymPdMatrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    q: SymPdMatrix,
    z: Vector,
}

impl Ellipsoid {
    pub fn new(q: SymPdMatrix, z: Vector) -> Result<Self> {
        if q.order() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: q.order(),
                found: z.len(),
            });
        }
        Ok(Self { q, z })
    }

    /// Euclidean ball of the given radius.
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let d = center.len();
        let q = SymPdMatrix::new(Matrix::identity(d, d) / (radius * radius))?;
        Self::new(q, center)
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn q(&self) -> &SymPdMatrix {
        &self.q
    }

    pub fn center(&self) -> &Vector {
        &self.z
    }

    pub fn contains(&self, x: &Vector) -> bool {
        constraint_value(self, x).map(|v| v <= 1.0).unwrap_or(false)
    }

    /// Equivalent general quadric `⟨x, Qx⟩ − 2⟨Qz, x⟩ + ⟨z, Qz⟩ − 1 ≤ 0`.
    pub fn to_general_quadric(&self) -> GeneralQuadric {
        let qz = self.q.as_matrix() * &self.z;
        GeneralQuadric {
            a: self.q.clone(),
            b: -2.0 * &qz,
            alpha: self.z.dot(&qz) - 1.0,
        }
    }
}

/// `{x : ⟨x, A x⟩ + ⟨b, x⟩ + α ≤ 0}` with `A` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralQuadric {
    pub a: SymPdMatrix,
    pub b: Vector,
    pub alpha: f64,
}

/// Completes the square: `z = −½A⁻¹b`, `Q = A / (−½⟨b, z⟩ − α)`.
pub fn from_general_quadric(g: &GeneralQuadric) -> Result<Ellipsoid> {
    let d = g.a.order();
    if g.b.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: g.b.len(),
        });
    }
    let chol = crate::linalg::cholesky(&g.a)?;
    let z = -0.5 * crate::linalg::solve_cholesky(&chol, &g.b)?;
    let denom = -0.5 * g.b.dot(&z) - g.alpha;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::DegenerateQuadric(denom));
    }
    let q = SymPdMatrix::new(g.a.as_matrix() / denom)?;
    Ellipsoid::new(q, z)
}

/// Problem data after whitening both ellipsoids.
#[derive(Debug, Clone)]
pub struct WhitenedPair {
    pub q1: SymPdMatrix,
    pub q2: SymPdMatrix,
    pub s1: SymPdMatrix,
    pub s2: SymPdMatrix,
    pub c1: Vector,
    pub c2: Vector,
    pub d: usize,
}

impl WhitenedPair {
    pub fn s(&self, i: usize) -> &Matrix {
        match i {
            0 => self.s1.as_matrix(),
            _ => self.s2.as_matrix(),
        }
    }

    pub fn c(&self, i: usize) -> &Vector {
        match i {
            0 => &self.c1,
            _ => &self.c2,
        }
    }

    pub fn q(&self, i: usize) -> &Matrix {
        match i {
            0 => self.q1.as_matrix(),
            _ => self.q2.as_matrix(),
        }
    }
}

pub fn whiten(e1: &Ellipsoid, e2: &Ellipsoid) -> Result<WhitenedPair> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            found: e2.dim(),
        });
    }
    let s1 = sqrt_pd(&e1.q)?;
    let s2 = sqrt_pd(&e2.q)?;
    let c1 = s1.as_matrix() * &e1.z;
    let c2 = s2.as_matrix() * &e2.z;
    Ok(WhitenedPair {
        q1: e1.q.clone(),
        q2: e2.q.clone(),
        s1,
        s2,
        c1,
        c2,
        d: e1.dim(),
    })
}

/// `⟨x − z, Q(x − z)⟩`; equals 1 exactly on the boundary.
pub fn constraint_value(e: &Ellipsoid, x: &Vector) -> Result<f64> {
    if x.len() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: x.len(),
        });
    }
    Ok(e.q.quad_form(&(x - &e.z)))
}
