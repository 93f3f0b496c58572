//! Global boundary distance by enumerating KKT points.
//!
//! Every KKT point of `min ‖x₁ − x₂‖` over the two boundaries satisfies
//!
//! ```text
//! x₁ − x₂ = μ Q₁(x₁ − z₁),   x₂ − x₁ = γ Q₂(x₂ − z₂)
//! ```
//!
//! for real multipliers `μ, γ`. Eliminating the points gives two linear
//! pencils `L₁(μ)` and `L₂(γ)` of order `(2d)²`, assembled from Kronecker
//! products of the block matrices below, with `Δ = (z₁ − z₂)(z₁ − z₂)ᵀ`:
//!
//! ```text
//! F₁₀ = [0, −Q₂⁻¹; −Q₂⁻¹, 0]      G₁₀ = [Q₂⁻¹, −Q₂⁻¹; −Q₂⁻¹, Δ]
//! F₀₁ = [Q₁⁻¹, −Q₁⁻¹; −Q₁⁻¹, Δ]    G₀₁ = [0, −Q₁⁻¹; −Q₁⁻¹, 0]
//! F₁₁ = G₁₁ = [0, I; I, 0]
//! ```
//!
//! Real eigenvalues of both pencils are paired, each pair is turned back into
//! a candidate point pair, infeasible candidates are dropped and the closest
//! remaining pair is the global answer.
//!
//! When both shape matrices have an eigenvector orthogonal to `z₁ − z₂` the
//! pencils are singular for every parameter value. This includes any pair of
//! balls; such inputs are reported as [`Status::Degenerate`].

use rayon::prelude::*;

use crate::ellipsoid::{constraint_value, Ellipsoid};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, generalized_real_eigenvalues, Matrix, Pencil, Vector};
use crate::report::{Diagnostics, Residuals, SolveReport, Status};

/// Largest dimension accepted by [`solve_global`]; pencils have order `4d²`.
pub const MAX_DIM: usize = 32;
/// Multipliers smaller than this in magnitude are treated as zero.
pub const ZERO_MULTIPLIER: f64 = 1e-10;
/// Default feasibility tolerance, scaled by `1 + ‖z₁ − z₂‖`.
pub const DEFAULT_TOL_FEAS: f64 = 1e-6;

const POLISH_STEPS: usize = 8;
const POLISH_GATE: f64 = 0.5;
const DUPLICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KktCandidate {
    pub mu: f64,
    pub gamma: f64,
    pub x1: Vector,
    pub x2: Vector,
    pub distance: f64,
    /// `maxᵢ |constraint_value(eᵢ, xᵢ) − 1|`
    pub feasibility_error: f64,
    /// `‖x₁ − x₂ − μQ₁(x₁ − z₁)‖ + ‖x₂ − x₁ − γQ₂(x₂ − z₂)‖`
    pub kkt_error: f64,
}

fn blocks(tl: &Matrix, tr: &Matrix, bl: &Matrix, br: &Matrix) -> Matrix {
    let d = tl.nrows();
    let mut m = Matrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(tl);
    m.view_mut((0, d), (d, d)).copy_from(tr);
    m.view_mut((d, 0), (d, d)).copy_from(bl);
    m.view_mut((d, d), (d, d)).copy_from(br);
    m
}

/// The blocks `(F₁₀, F₀₁, G₁₀, G₀₁, F₁₁)`.
pub fn building_blocks(e1: &Ellipsoid, e2: &Ellipsoid) -> Result<[Matrix; 5]> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            found: e2.dim(),
        });
    }
    let d = e1.dim();
    let q1i = cholesky(e1.q())?.inverse();
    let q2i = cholesky(e2.q())?.inverse();
    let delta = e1.center() - e2.center();
    let outer = &delta * delta.transpose();
    let zero = Matrix::zeros(d, d);
    let eye = Matrix::identity(d, d);
    let f10 = blocks(&zero, &-&q2i, &-&q2i, &zero);
    let f01 = blocks(&q1i, &-&q1i, &-&q1i, &outer);
    let g10 = blocks(&q2i, &-&q2i, &-&q2i, &outer);
    let g01 = blocks(&zero, &-&q1i, &-&q1i, &zero);
    let f11 = blocks(&zero, &eye, &eye, &zero);
    Ok([f10, f01, g10, g01, f11])
}

/// `(L₁, L₂)`: eigenvalues of `L₁` are the admissible `μ`, those of `L₂` the `γ`.
pub fn build_pencils(e1: &Ellipsoid, e2: &Ellipsoid) -> Result<(Pencil, Pencil)> {
    let [f10, f01, g10, g01, f11] = building_blocks(e1, e2)?;
    let g11 = &f11;
    let l1 = Pencil::new(
        f11.kronecker(&g10) - f10.kronecker(g11),
        f01.kronecker(&g10) - f10.kronecker(&g01),
    )?;
    let l2 = Pencil::new(
        f11.kronecker(&g01) - f01.kronecker(g11),
        f10.kronecker(&g01) - f01.kronecker(&g10),
    )?;
    Ok((l1, l2))
}

fn kkt_error(e1: &Ellipsoid, e2: &Ellipsoid, mu: f64, gamma: f64, x1: &Vector, x2: &Vector) -> f64 {
    let r1 = x1 - x2 - e1.q().as_matrix() * (x1 - e1.center()) * mu;
    let r2 = x2 - x1 - e2.q().as_matrix() * (x2 - e2.center()) * gamma;
    r1.norm() + r2.norm()
}

fn feasibility_error(e1: &Ellipsoid, e2: &Ellipsoid, x1: &Vector, x2: &Vector) -> f64 {
    let c1 = constraint_value(e1, x1).unwrap_or(f64::INFINITY);
    let c2 = constraint_value(e2, x2).unwrap_or(f64::INFINITY);
    (c1 - 1.0).abs().max((c2 - 1.0).abs())
}

fn candidate(e1: &Ellipsoid, e2: &Ellipsoid, mu: f64, gamma: f64, x1: Vector, x2: Vector) -> KktCandidate {
    KktCandidate {
        mu,
        gamma,
        distance: (&x1 - &x2).norm(),
        feasibility_error: feasibility_error(e1, e2, &x1, &x2),
        kkt_error: kkt_error(e1, e2, mu, gamma, &x1, &x2),
        x1,
        x2,
    }
}

/// Newton steps on the full KKT system in `(x₁, x₂, μ, γ)`, used to remove the
/// eigenvalue rounding error from a candidate that is already close.
fn polish(e1: &Ellipsoid, e2: &Ellipsoid, c: &KktCandidate) -> Option<KktCandidate> {
    let d = e1.dim();
    let (q1, q2) = (e1.q().as_matrix(), e2.q().as_matrix());
    let (z1, z2) = (e1.center(), e2.center());
    let (mut x1, mut x2, mut mu, mut gamma) = (c.x1.clone(), c.x2.clone(), c.mu, c.gamma);
    let eye = Matrix::identity(d, d);
    for _ in 0..POLISH_STEPS {
        let u1 = &x1 - z1;
        let u2 = &x2 - z2;
        let q1u = q1 * &u1;
        let q2u = q2 * &u2;
        let n = 2 * d + 2;
        let mut f = Vector::zeros(n);
        f.rows_mut(0, d).copy_from(&(&x1 - &x2 - &q1u * mu));
        f.rows_mut(d, d).copy_from(&(&x2 - &x1 - &q2u * gamma));
        f[2 * d] = u1.dot(&q1u) - 1.0;
        f[2 * d + 1] = u2.dot(&q2u) - 1.0;
        if f.norm() < 1e-15 {
            break;
        }
        let mut j = Matrix::zeros(n, n);
        j.view_mut((0, 0), (d, d)).copy_from(&(&eye - q1 * mu));
        j.view_mut((0, d), (d, d)).copy_from(&-&eye);
        j.view_mut((0, 2 * d), (d, 1)).copy_from(&-&q1u);
        j.view_mut((d, 0), (d, d)).copy_from(&-&eye);
        j.view_mut((d, d), (d, d)).copy_from(&(&eye - q2 * gamma));
        j.view_mut((d, 2 * d + 1), (d, 1)).copy_from(&-&q2u);
        j.view_mut((2 * d, 0), (1, d)).copy_from(&(q1u.transpose() * 2.0));
        j.view_mut((2 * d + 1, d), (1, d)).copy_from(&(q2u.transpose() * 2.0));
        let step = j.lu().solve(&f)?;
        x1 -= step.rows(0, d);
        x2 -= step.rows(d, d);
        mu -= step[2 * d];
        gamma -= step[2 * d + 1];
    }
    let out = candidate(e1, e2, mu, gamma, x1, x2);
    (out.kkt_error.is_finite() && out.feasibility_error.is_finite()).then_some(out)
}

/// A common boundary point, searched by minimum-norm Gauss–Newton steps on
/// `constraint_value(eᵢ, x) = 1` from points along the segment `z₁z₂`.
fn common_boundary_point(e1: &Ellipsoid, e2: &Ellipsoid, tol: f64) -> Option<Vector> {
    let (q1, q2) = (e1.q().as_matrix(), e2.q().as_matrix());
    let (z1, z2) = (e1.center(), e2.center());
    let d = e1.dim();
    let mut starts: Vec<Vector> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|t| z1 + (z2 - z1) * *t).collect();
    // Concentric inputs make the segment a point; add axis offsets.
    for k in 0..d {
        let mut s = (z1 + z2) * 0.5;
        s[k] += 1.0;
        starts.push(s);
    }
    for mut x in starts {
        for _ in 0..100 {
            let g1 = q1 * (&x - z1);
            let g2 = q2 * (&x - z2);
            let f = Vector::from_vec(vec![(&x - z1).dot(&g1) - 1.0, (&x - z2).dot(&g2) - 1.0]);
            if f.amax() < tol {
                return Some(x);
            }
            let mut jt = Matrix::zeros(d, 2);
            jt.set_column(0, &(g1 * 2.0));
            jt.set_column(1, &(g2 * 2.0));
            let gram = jt.transpose() * &jt;
            let Some(coef) = gram.lu().solve(&f) else { break };
            x -= jt * coef;
            if !x.iter().all(|v| v.is_finite()) {
                break;
            }
        }
    }
    None
}

/// Candidates for every `(μ, γ)` in `mus × gammas` that pass the feasibility
/// and KKT filters at `tol_feas`.
///
/// A zero multiplier forces `x₁ = x₂`; such pairs yield a single
/// zero-distance candidate when the boundaries share a point.
pub fn recover_candidates(e1: &Ellipsoid, e2: &Ellipsoid, mus: &[f64], gammas: &[f64], tol_feas: f64) -> Vec<KktCandidate> {
    let d = e1.dim();
    let Ok(f1) = cholesky(e1.q()) else { return Vec::new() };
    let Ok(f2) = cholesky(e2.q()) else { return Vec::new() };
    let (q1i, q2i) = (f1.inverse(), f2.inverse());
    let delta = e1.center() - e2.center();
    let eye = Matrix::identity(d, d);
    let pairs: Vec<(f64, f64)> = mus.iter().flat_map(|&m| gammas.iter().map(move |&g| (m, g))).collect();

    let keep = |c: &KktCandidate| c.feasibility_error <= tol_feas && c.kkt_error <= tol_feas;
    let mut out: Vec<KktCandidate> = pairs
        .par_iter()
        .filter(|(m, g)| m.abs() >= ZERO_MULTIPLIER && g.abs() >= ZERO_MULTIPLIER)
        .filter_map(|&(mu, gamma)| {
            let m = &eye - &q1i / mu - &q2i / gamma;
            let w = m.lu().solve(&delta)?;
            let x1 = e1.center() + &q1i * &w / mu;
            let x2 = e2.center() - &q2i * &w / gamma;
            let raw = candidate(e1, e2, mu, gamma, x1, x2);
            if keep(&raw) {
                return Some(raw);
            }
            // Eigenvalues of a badly scaled pencil can be off in the sixth
            // digit; refine pairs that are roughly admissible.
            if raw.feasibility_error < POLISH_GATE && raw.kkt_error < POLISH_GATE * (1.0 + raw.distance) {
                polish(e1, e2, &raw).filter(keep)
            } else {
                None
            }
        })
        .collect();

    if pairs.iter().any(|(m, g)| m.abs() < ZERO_MULTIPLIER || g.abs() < ZERO_MULTIPLIER) {
        if let Some(x) = common_boundary_point(e1, e2, tol_feas * 1e-3) {
            let c = candidate(e1, e2, 0.0, 0.0, x.clone(), x);
            if keep(&c) {
                out.push(c);
            }
        }
    }
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    // several (μ, γ) pairs can polish to the same point
    let same = |a: &KktCandidate, b: &KktCandidate| {
        let scale = 1.0 + a.x1.amax().max(a.x2.amax());
        (&a.x1 - &b.x1).amax() <= DUPLICATE_TOL * scale && (&a.x2 - &b.x2).amax() <= DUPLICATE_TOL * scale
    };
    let mut unique: Vec<KktCandidate> = Vec::with_capacity(out.len());
    for c in out {
        if !unique.iter().any(|u| same(u, &c)) {
            unique.push(c);
        }
    }
    unique
}

/// Globally closest pair of boundary points, or status `Degenerate` when
/// either pencil is singular.
///
/// The candidate filter uses `tol_feas · (1 + ‖z₁ − z₂‖)`. The zero
/// multiplier is always probed so that intersecting boundaries are detected
/// even when the eigenvalue solver resolves the zero eigenvalue inexactly.
pub fn solve_global(e1: &Ellipsoid, e2: &Ellipsoid, tol_feas: f64) -> Result<SolveReport> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            found: e2.dim(),
        });
    }
    if e1.dim() > MAX_DIM {
        return Err(Error::DimensionTooLarge(e1.dim()));
    }
    let d = e1.dim();
    let tol = tol_feas * (1.0 + (e1.center() - e2.center()).norm());
    let (l1, l2) = build_pencils(e1, e2)?;
    let eig = |p: &Pencil| match generalized_real_eigenvalues(p) {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegeneratePencil) => Ok(None),
        Err(e) => Err(e),
    };
    let (mus, gammas) = rayon::join(|| eig(&l1), || eig(&l2));
    let (Some(mut mus), Some(gammas)) = (mus?, gammas?) else {
        return Ok(degenerate_report(e1, e2));
    };
    mus.push(0.0);
    let candidates = recover_candidates(e1, e2, &mus, &gammas, tol);
    let best = candidates.into_iter().next().ok_or(Error::NoFeasibleCandidate)?;
    log::debug!("global minimum at mu = {}, gamma = {}", best.mu, best.gamma);
    Ok(SolveReport {
        distance: best.distance,
        status: Status::Converged,
        iterations: 0,
        final_residuals: Residuals {
            rx: best.kkt_error,
            ry: best.feasibility_error,
            rc: 0.0,
        },
        penalty_log: Vec::new(),
        y: Vector::zeros(0),
        lambda: Vector::zeros(0),
        final_tau: 0.0,
        diagnostics: Diagnostics::default(),
        x1: best.x1,
        x2: best.x2,
    })
    .inspect(|r| debug_assert_eq!(r.x1.len(), d))
}

fn degenerate_report(e1: &Ellipsoid, e2: &Ellipsoid) -> SolveReport {
    SolveReport {
        x1: e1.center().clone(),
        x2: e2.center().clone(),
        distance: f64::NAN,
        status: Status::Degenerate,
        iterations: 0,
        final_residuals: Residuals::default(),
        penalty_log: Vec::new(),
        y: Vector::zeros(0),
        lambda: Vector::zeros(0),
        final_tau: 0.0,
        diagnostics: Diagnostics::default(),
    }
}
