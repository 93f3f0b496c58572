//! ADMM for the distance between two ellipsoids, with a fixed penalty or
//! the self-adaptive penalty schedule (sa-ADMM).
//!
//! After whitening, the problem reads
//!
//! ```text
//! min ½‖x₁ − x₂‖²   s.t.   Sᵢxᵢ − yᵢ = cᵢ,  ‖yᵢ‖ ≤ 1,  i ∈ {1, 2}
//! ```
//!
//! The x-step minimizes a strictly convex quadratic whose Hessian
//!
//! ```text
//! H(τ) = [ I + τQ₁    −I     ]
//!        [   −I     I + τQ₂  ]
//! ```
//!
//! depends on the penalty only, so its Cholesky factor is reused until `τ`
//! changes. The y-step is a projection onto the unit ball and the multiplier
//! step is the usual dual ascent.

use nalgebra::{Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::ellipsoid::{constraint_value, whiten, Ellipsoid, WhitenedPair};
use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, Matrix, Vector};
use crate::report::{Diagnostics, PenaltyUpdate, Residuals, SolveReport, Status};

/// Per-iteration increments `αₙ` of the self-adaptive rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaSchedule {
    /// `αₙ = value` for `n < until`, zero afterwards.
    Step { value: f64, until: usize },
    /// `αₙ = 0`; the adaptive rule never fires.
    Zero,
}

impl AlphaSchedule {
    pub fn alpha(&self, n: usize) -> f64 {
        match *self {
            AlphaSchedule::Step { value, until } if n < until => value,
            _ => 0.0,
        }
    }
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        AlphaSchedule::Step { value: 1.0, until: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexSolverOptions {
    pub tau0: f64,
    pub eta: f64,
    pub alpha_schedule: AlphaSchedule,
    pub epsilon: f64,
    /// Separation above which the closest points must also sit on the boundaries.
    pub delta: f64,
    pub max_iterations: usize,
    pub adaptive: bool,
    pub use_reduced_system: bool,
}

impl Default for ConvexSolverOptions {
    fn default() -> Self {
        Self {
            tau0: 1.0,
            eta: 0.1,
            alpha_schedule: AlphaSchedule::default(),
            epsilon: 1e-6,
            delta: 1e-8,
            max_iterations: 1_000_000,
            adaptive: false,
            use_reduced_system: false,
        }
    }
}

impl ConvexSolverOptions {
    /// Defaults with the self-adaptive penalty switched on.
    pub fn self_adaptive() -> Self {
        Self {
            adaptive: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(Error::InvalidOptions(format!("tau0 must be positive, got {}", self.tau0)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidOptions(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.epsilon > 0.0) || !(self.delta > 0.0) {
            return Err(Error::InvalidOptions("epsilon and delta must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOptions("max_iterations must be positive".into()));
        }
        if let AlphaSchedule::Step { value, .. } = self.alpha_schedule {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidOptions("alpha must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

const REDUCED_REFINEMENTS: usize = 2;

/// `H(τ)` of the x-step.
pub fn hessian(w: &WhitenedPair, tau: f64) -> Matrix {
    let d = w.d;
    let mut h = Matrix::zeros(2 * d, 2 * d);
    h.view_mut((0, 0), (d, d)).copy_from(&(w.q1.as_matrix() * tau));
    h.view_mut((d, d), (d, d)).copy_from(&(w.q2.as_matrix() * tau));
    for i in 0..d {
        h[(i, i)] += 1.0;
        h[(d + i, d + i)] += 1.0;
        h[(i, d + i)] = -1.0;
        h[(d + i, i)] = -1.0;
    }
    h
}

/// LU factor of the reduced x₁ system `τ(Q₁ + Q₂) + τ²Q₂Q₁` (not symmetric).
#[derive(Debug, Clone)]
pub struct ReducedFactor {
    lu: LU<f64, Dyn, Dyn>,
}

impl ReducedFactor {
    pub fn reduced_matrix(w: &WhitenedPair, tau: f64) -> Matrix {
        let q1 = w.q1.as_matrix();
        let q2 = w.q2.as_matrix();
        (q1 + q2) * tau + (q2 * q1) * (tau * tau)
    }

    pub fn new(w: &WhitenedPair, tau: f64) -> Self {
        Self {
            lu: Self::reduced_matrix(w, tau).lu(),
        }
    }
}

/// Iterate `(x, y, λ)`, penalty and the cached factorization of `H(τ)`.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub x: Vector,
    pub y: Vector,
    pub lambda: Vector,
    pub tau: f64,
    pub n: usize,
    pub chol: CholeskyFactor,
    pub chol_stale: bool,
    pub reduced: Option<ReducedFactor>,
}

impl AdmmState {
    pub fn new(w: &WhitenedPair, y: Vector, lambda: Vector, tau: f64, with_reduced: bool) -> Result<Self> {
        let n2 = 2 * w.d;
        for v in [&y, &lambda] {
            if v.len() != n2 {
                return Err(Error::DimensionMismatch {
                    expected: n2,
                    found: v.len(),
                });
            }
        }
        Ok(Self {
            x: Vector::zeros(n2),
            y,
            lambda,
            tau,
            n: 0,
            chol: CholeskyFactor::factor(hessian(w, tau))?,
            chol_stale: false,
            reduced: with_reduced.then(|| ReducedFactor::new(w, tau)),
        })
    }

    /// Changes the penalty and marks the factorization stale.
    pub fn set_tau(&mut self, tau: f64) {
        if tau != self.tau {
            self.tau = tau;
            self.chol_stale = true;
        }
    }

    /// Refactors `H(τ)` (and the reduced matrix, if kept) when stale.
    pub fn refresh(&mut self, w: &WhitenedPair) -> Result<()> {
        if self.chol_stale {
            self.chol = CholeskyFactor::factor(hessian(w, self.tau))?;
            if self.reduced.is_some() {
                self.reduced = Some(ReducedFactor::new(w, self.tau));
            }
            self.chol_stale = false;
        }
        Ok(())
    }
}

/// Right-hand side `[S₁(λ₁ + τ(y₁ + c₁)); S₂(λ₂ + τ(y₂ + c₂))]` of the x-step.
pub fn x_rhs(w: &WhitenedPair, y: &Vector, lambda: &Vector, tau: f64) -> Vector {
    let d = w.d;
    let mut u = Vector::zeros(2 * d);
    for i in 0..2 {
        let inner = lambda.rows(i * d, d) + (y.rows(i * d, d) + w.c(i)) * tau;
        u.rows_mut(i * d, d).copy_from(&(w.s(i) * inner));
    }
    u
}

/// Minimizer of the x-subproblem, solved with the cached factor of `H(τ)`.
pub fn x_step(w: &WhitenedPair, s: &AdmmState) -> Result<Vector> {
    if s.chol_stale {
        return Err(Error::InvalidOptions("x_step called with a stale factorization".into()));
    }
    let mut x = x_rhs(w, &s.y, &s.lambda, s.tau);
    s.chol.solve_in_place(&mut x);
    Ok(x)
}

/// `H(τ)x` without forming `H`.
fn apply_hessian(w: &WhitenedPair, tau: f64, x: &Vector) -> Vector {
    let d = w.d;
    let x1 = x.rows(0, d);
    let x2 = x.rows(d, d);
    let mut out = Vector::zeros(2 * d);
    out.rows_mut(0, d).copy_from(&(x1 - x2 + (w.q1.as_matrix() * x1) * tau));
    out.rows_mut(d, d).copy_from(&(x2 - x1 + (w.q2.as_matrix() * x2) * tau));
    out
}

fn reduced_solve(w: &WhitenedPair, lu: &LU<f64, Dyn, Dyn>, tau: f64, u: &Vector) -> Result<Vector> {
    let d = w.d;
    let u1 = u.rows(0, d).into_owned();
    let u2 = u.rows(d, d);
    let rhs = u2 + &u1 + (w.q2.as_matrix() * &u1) * tau;
    let x1 = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
    let x2 = &x1 + (w.q1.as_matrix() * &x1) * tau - &u1;
    let mut x = Vector::zeros(2 * d);
    x.rows_mut(0, d).copy_from(&x1);
    x.rows_mut(d, d).copy_from(&x2);
    Ok(x)
}

/// Same minimizer through the half-size system in `x₁`, with
/// `x₂ = (I + τQ₁)x₁ − u₁`.
///
/// The recovery of `x₂` cancels when `τ‖Q₁‖` is large, so the result is
/// refined against the residual of the full system, reusing the same LU.
pub fn x_step_reduced(w: &WhitenedPair, s: &AdmmState) -> Result<Vector> {
    let tau = s.tau;
    let fresh;
    let lu = match (&s.reduced, s.chol_stale) {
        (Some(f), false) => &f.lu,
        _ => {
            fresh = ReducedFactor::new(w, tau);
            &fresh.lu
        }
    };
    let u = x_rhs(w, &s.y, &s.lambda, tau);
    let mut x = reduced_solve(w, lu, tau, &u)?;
    for _ in 0..REDUCED_REFINEMENTS {
        let r = &u - apply_hessian(w, tau, &x);
        x += reduced_solve(w, lu, tau, &r)?;
    }
    Ok(x)
}

/// `vᵢ = Sᵢxᵢ − cᵢ − λᵢ/τ`, stacked.
pub fn projection_argument(w: &WhitenedPair, tau: f64, x_next: &Vector, lambda: &Vector) -> Vector {
    let d = w.d;
    let mut v = Vector::zeros(2 * d);
    for i in 0..2 {
        let block = w.s(i) * x_next.rows(i * d, d) - w.c(i) - lambda.rows(i * d, d) / tau;
        v.rows_mut(i * d, d).copy_from(&block);
    }
    v
}

/// Euclidean projection onto the closed unit ball.
pub fn project_ball(v: &Vector) -> Vector {
    let n = v.norm();
    if n <= 1.0 {
        v.clone()
    } else {
        v / n
    }
}

pub fn y_step_ball(w: &WhitenedPair, s: &AdmmState, x_next: &Vector) -> Vector {
    let d = w.d;
    let mut v = projection_argument(w, s.tau, x_next, &s.lambda);
    for i in 0..2 {
        let p = project_ball(&v.rows(i * d, d).into_owned());
        v.rows_mut(i * d, d).copy_from(&p);
    }
    v
}

/// Stacked coupling residual `Sᵢxᵢ − yᵢ − cᵢ`.
pub fn coupling_residual(w: &WhitenedPair, x: &Vector, y: &Vector) -> Vector {
    let d = w.d;
    let mut r = Vector::zeros(2 * d);
    for i in 0..2 {
        let block = w.s(i) * x.rows(i * d, d) - y.rows(i * d, d) - w.c(i);
        r.rows_mut(i * d, d).copy_from(&block);
    }
    r
}

/// Per-block norms of the coupling residual.
pub fn coupling_block_norms(w: &WhitenedPair, x: &Vector, y: &Vector) -> [f64; 2] {
    let r = coupling_residual(w, x, y);
    let d = w.d;
    [r.rows(0, d).norm(), r.rows(d, d).norm()]
}

/// `λᵢ⁺ = λᵢ − τ(Sᵢxᵢ − yᵢ − cᵢ)`.
pub fn lambda_step(w: &WhitenedPair, tau: f64, x_next: &Vector, y_next: &Vector, lambda: &Vector) -> Vector {
    lambda - coupling_residual(w, x_next, y_next) * tau
}

/// Stationarity residual `(x₁ − x₂ − S₁λ₁; x₂ − x₁ − S₂λ₂)`.
pub fn stationarity_residual(w: &WhitenedPair, x: &Vector, lambda: &Vector) -> Vector {
    let d = w.d;
    let diff = x.rows(0, d) - x.rows(d, d);
    let mut r = Vector::zeros(2 * d);
    r.rows_mut(0, d)
        .copy_from(&(&diff - w.s(0) * lambda.rows(0, d)));
    r.rows_mut(d, d)
        .copy_from(&(-&diff - w.s(1) * lambda.rows(d, d)));
    r
}

pub fn residuals_convex(w: &WhitenedPair, x: &Vector, y: &Vector, lambda: &Vector) -> Residuals {
    let d = w.d;
    let mut ry = Vector::zeros(2 * d);
    for i in 0..2 {
        let yi = y.rows(i * d, d).into_owned();
        let li = lambda.rows(i * d, d).into_owned();
        ry.rows_mut(i * d, d).copy_from(&(&yi - project_ball(&(&yi - &li))));
    }
    Residuals {
        rx: stationarity_residual(w, x, lambda).norm(),
        ry: ry.norm(),
        rc: coupling_residual(w, x, y).norm(),
    }
}

pub(crate) fn split(x: &Vector, d: usize) -> (Vector, Vector) {
    (x.rows(0, d).into_owned(), x.rows(d, d).into_owned())
}

/// Distance between two ellipsoids (zero when they intersect).
///
/// Starts from `y⁰ = λ⁰ = 0` and stops once `rx + ry + rc < ε`, provided
/// the points are within `δ` of each other or both lie within `ε` of their
/// boundaries in constraint value. Once that boundary check has failed, a
/// residual sum below `ε/100` is accepted on its own as well.
pub fn solve_convex(e1: &Ellipsoid, e2: &Ellipsoid, opts: &ConvexSolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let w = whiten(e1, e2)?;
    let n2 = 2 * w.d;
    let mut state = AdmmState::new(&w, Vector::zeros(n2), Vector::zeros(n2), opts.tau0, opts.use_reduced_system)?;
    run_convex(e1, e2, &w, &mut state, opts)
}

fn run_convex(
    e1: &Ellipsoid,
    e2: &Ellipsoid,
    w: &WhitenedPair,
    state: &mut AdmmState,
    opts: &ConvexSolverOptions,
) -> Result<SolveReport> {
    let d = w.d;
    let mut tightened = false;
    let mut penalty_log = Vec::new();
    let mut status = Status::MaxIterations;
    let mut residuals = Residuals::default();

    while state.n < opts.max_iterations {
        state.refresh(w)?;
        let x_next = if opts.use_reduced_system {
            x_step_reduced(w, state)?
        } else {
            x_step(w, state)?
        };
        let y_next = y_step_ball(w, state, &x_next);
        let lambda_next = lambda_step(w, state.tau, &x_next, &y_next, &state.lambda);
        state.x = x_next;
        state.y = y_next;
        state.lambda = lambda_next;
        let n = state.n;
        state.n += 1;

        residuals = residuals_convex(w, &state.x, &state.y, &state.lambda);
        if !residuals.sum().is_finite() {
            status = Status::Degenerate;
            break;
        }
        let sum = residuals.sum();
        if tightened && sum < opts.epsilon / 100.0 {
            status = Status::Converged;
            break;
        }
        if sum < opts.epsilon {
            let (x1, x2) = split(&state.x, d);
            let on_boundaries = (&x1 - &x2).norm() <= opts.delta
                || ((constraint_value(e1, &x1)? - 1.0).abs() < opts.epsilon
                    && (constraint_value(e2, &x2)? - 1.0).abs() < opts.epsilon);
            if on_boundaries {
                status = Status::Converged;
                break;
            }
            tightened = true;
        }

        if opts.adaptive {
            let alpha = opts.alpha_schedule.alpha(n);
            let tau = if residuals.rx < opts.eta * residuals.rc {
                state.tau * (1.0 + alpha)
            } else if opts.eta * residuals.rx > residuals.rc {
                state.tau / (1.0 + alpha)
            } else {
                state.tau
            };
            if tau != state.tau {
                state.set_tau(tau);
                penalty_log.push(PenaltyUpdate { iteration: n, tau });
            }
        }
    }

    let (x1, x2) = split(&state.x, d);
    Ok(SolveReport {
        distance: (&x1 - &x2).norm(),
        x1,
        x2,
        status,
        iterations: state.n,
        final_residuals: residuals,
        penalty_log,
        y: state.y.clone(),
        lambda: state.lambda.clone(),
        final_tau: state.tau,
        diagnostics: Diagnostics {
            tightened,
            ..Diagnostics::default()
        },
    })
}
