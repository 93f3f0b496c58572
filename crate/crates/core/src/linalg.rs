//! Dense kernels used by the solvers: PD square roots, Cholesky solves and
//! real generalized eigenvalues of a matrix pencil `λA + B`.
//!
//! Everything here is a pure function over owned or borrowed nalgebra
//! matrices, so all of it can be called concurrently.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, Schur, SymmetricEigen};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Eigenvalues with `|Im λ| > REALNESS_TOL * (1 + |Re λ|)` are treated as complex.
pub const REALNESS_TOL: f64 = 1e-8;
/// Eigenvalues larger than this in magnitude are treated as infinite.
pub const FINITE_LIMIT: f64 = 1e12;
/// Relative smallest singular value below which a probed pencil member counts as singular.
pub const RANK_TOL: f64 = 1e-11;

/// Shift multipliers used to probe a pencil for regularity. They are scaled by
/// `‖B‖ / ‖A‖` before use.
const PROBE_SHIFTS: [f64; 3] = [0.618_033_988_749_894_8, -std::f64::consts::SQRT_2, std::f64::consts::E];

/// A symmetric positive definite matrix.
///
/// Input is symmetrized as `(M + Mᵀ)/2` and must admit a Cholesky factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPdMatrix {
    m: Matrix,
}

impl SymPdMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 || m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        let m = symmetrize(&m);
        if Cholesky::new(m.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { m })
    }

    /// Builds from row-major nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(Matrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: Matrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diagonal(&Vector::from_column_slice(diag)))
    }

    /// Wraps a matrix already known to be symmetric PD.
    pub(crate) fn new_unchecked(m: Matrix) -> Self {
        Self { m }
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_inner(self) -> Matrix {
        self.m
    }

    /// Row-major nested rows, the layout used by the JSON instance files.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.m
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// `⟨x, M x⟩`
    pub fn quad_form(&self, x: &Vector) -> f64 {
        x.dot(&(&self.m * x))
    }
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Principal square root `R` of a PD matrix, `R·R = M`, via `M = VΛVᵀ`.
pub fn sqrt_pd(m: &SymPdMatrix) -> Result<SymPdMatrix> {
    let n = m.order();
    let eig = SymmetricEigen::new(m.as_matrix().clone());
    let max = eig.eigenvalues.max();
    let floor = n as f64 * f64::EPSILON * max;
    if max <= 0.0 || eig.eigenvalues.iter().any(|&l| l <= floor) {
        return Err(Error::NotPositiveDefinite);
    }
    let v = &eig.eigenvectors;
    let root = Matrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let r = v * root * v.transpose();
    Ok(SymPdMatrix::new_unchecked(symmetrize(&r)))
}

/// Lower-triangular Cholesky factor `L` with `L·Lᵀ = M`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    inner: Cholesky<f64, Dyn>,
}

impl CholeskyFactor {
    /// Factors a symmetric matrix (only the lower triangle is read).
    pub fn factor(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Cholesky::new(m)
            .map(|inner| Self { inner })
            .ok_or(Error::NotPositiveDefinite)
    }

    pub fn order(&self) -> usize {
        self.inner.l_dirty().nrows()
    }

    pub fn lower(&self) -> Matrix {
        self.inner.l()
    }

    /// Reassembles `L·Lᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let l = self.inner.l();
        &l * l.transpose()
    }

    pub(crate) fn solve_in_place(&self, rhs: &mut Vector) {
        self.inner.solve_mut(rhs);
    }

    pub fn inverse(&self) -> Matrix {
        symmetrize(&self.inner.inverse())
    }
}

pub fn cholesky(m: &SymPdMatrix) -> Result<CholeskyFactor> {
    CholeskyFactor::factor(m.as_matrix().clone())
}

/// Solves `L Lᵀ x = rhs` by a forward and a backward substitution.
pub fn solve_cholesky(f: &CholeskyFactor, rhs: &Vector) -> Result<Vector> {
    if rhs.len() != f.order() {
        return Err(Error::DimensionMismatch {
            expected: f.order(),
            found: rhs.len(),
        });
    }
    let mut x = rhs.clone();
    f.solve_in_place(&mut x);
    Ok(x)
}

/// Matrix pencil `λ·a + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub a: Matrix,
    pub b: Matrix,
}

impl Pencil {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.nrows().max(a.ncols()),
            });
        }
        Ok(Self { a, b })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// `λ·a + b`
    pub fn at(&self, lambda: f64) -> Matrix {
        &self.a * lambda + &self.b
    }
}

pub fn smallest_singular_value(m: &Matrix) -> f64 {
    m.clone().singular_values().min()
}

/// All finite real `λ` with `det(λA + B) = 0`.
///
/// The pencil is shifted to `σA + B` at the best-conditioned of three probe
/// shifts; if all three are numerically singular the pencil is reported as
/// degenerate. Otherwise the eigenvalues `θ` of `(σA + B)⁻¹A` map back through
/// `λ = σ − 1/θ`, and `θ ≈ 0` corresponds to an infinite eigenvalue.
pub fn generalized_real_eigenvalues(p: &Pencil) -> Result<Vec<f64>> {
    let n = p.order();
    if n == 0 {
        return Ok(Vec::new());
    }
    let norm_a = p.a.norm();
    let norm_b = p.b.norm();
    if norm_a == 0.0 {
        // det(B) is constant in λ.
        return if smallest_singular_value(&p.b) <= RANK_TOL * norm_b {
            Err(Error::DegeneratePencil)
        } else {
            Ok(Vec::new())
        };
    }
    let scale = if norm_b > 0.0 { norm_b / norm_a } else { 1.0 };

    let mut probes: Vec<(f64, f64)> = PROBE_SHIFTS
        .iter()
        .map(|mult| {
            let sigma = mult * scale;
            let rel = smallest_singular_value(&p.at(sigma)) / (sigma.abs() * norm_a + norm_b);
            (sigma, rel)
        })
        .collect();
    probes.sort_by(|x, y| y.1.total_cmp(&x.1));
    if probes[0].1 <= RANK_TOL {
        return Err(Error::DegeneratePencil);
    }

    // The QR iteration occasionally stalls on a particular shift; the next
    // best regular shift gives the same spectrum through a different map.
    let mut shifted = None;
    for &(sigma, rel) in probes.iter().filter(|(_, rel)| *rel > RANK_TOL) {
        let Some(c) = p.at(sigma).lu().solve(&p.a) else { continue };
        let c_norm = c.norm();
        if let Some(schur) = Schur::try_new(c, f64::EPSILON, 1000 * n) {
            log::trace!("pencil shift {sigma} with relative smallest singular value {rel:e}");
            shifted = Some((sigma, c_norm, schur));
            break;
        }
    }
    let (sigma, c_norm, schur) = shifted.ok_or(Error::EigenFailure)?;

    let mut out: Vec<f64> = Vec::new();
    for theta in schur.complex_eigenvalues().iter() {
        if theta.norm() <= f64::EPSILON * c_norm.max(1.0) {
            continue;
        }
        let lambda = nalgebra::Complex::new(sigma, 0.0) - theta.inv();
        if !lambda.re.is_finite() || lambda.re.abs() > FINITE_LIMIT {
            continue;
        }
        if lambda.im.abs() > REALNESS_TOL * (1.0 + lambda.re.abs()) {
            continue;
        }
        out.push(lambda.re);
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
    Ok(out)
}
