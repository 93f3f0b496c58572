//! ADMM for the distance between the boundaries of two ellipsoids.
//!
//! The whitened problem is the convex one with `‖yᵢ‖ ≤ 1` replaced by
//! `‖yᵢ‖ = 1`, so the x-step and multiplier step are shared with
//! [`crate::convex`] and only the y-step changes: a projection onto the unit
//! sphere instead of the ball. The problem is nonconvex and the penalty must
//! grow until the infeasibility measure contracts; two increase rules are
//! provided. [`solve_with_restart`] adds a second run started from the point
//! diametrically opposite the first solution.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::convex::{coupling_residual, lambda_step, projection_argument, split, stationarity_residual, x_step, AdmmState};
use crate::ellipsoid::{whiten, Ellipsoid, WhitenedPair};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::report::{Diagnostics, Iterate, NonconvexResiduals, PenaltyUpdate, SolveReport, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UpdateRule {
    /// Increase `τ` while the infeasibility measure stays above `κ` and fails
    /// to contract by `η`.
    #[default]
    Heuristic,
    /// Increase `τ` whenever either the inter- or the intra-iteration coupling
    /// residual fails to contract by `η`. Convergent in theory, prone to
    /// runaway penalties in practice.
    Theoretical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonconvexSolverOptions {
    pub tau0: f64,
    pub eta: f64,
    pub beta: f64,
    pub kappa: f64,
    pub epsilon: f64,
    /// Below this first-run distance the boundaries are taken to intersect
    /// and no restart is attempted.
    pub epsilon0: f64,
    pub max_iterations: usize,
    pub update_rule: UpdateRule,
    /// Test the contraction on the stacked coupling residual instead of per block.
    pub combined_residual: bool,
    /// Penalty ceiling; exceeding it ends the run with [`Status::Degenerate`].
    pub tau_max: f64,
    /// Replacement for `yᵢ` when the projected point is zero. `None` means `e₁`.
    pub fallback_unit: Option<Vec<f64>>,
    /// Number of trailing iterates kept in the report diagnostics.
    pub trace_tail: usize,
}

impl Default for NonconvexSolverOptions {
    fn default() -> Self {
        Self {
            tau0: 10.0,
            eta: 0.99,
            beta: 2.0,
            kappa: 0.1,
            epsilon: 1e-6,
            epsilon0: 1e-6,
            max_iterations: 1_000_000,
            update_rule: UpdateRule::Heuristic,
            combined_residual: false,
            tau_max: 1e12,
            fallback_unit: None,
            trace_tail: 0,
        }
    }
}

impl NonconvexSolverOptions {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return Err(Error::InvalidOptions(format!("tau0 must be positive, got {}", self.tau0)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidOptions(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return Err(Error::InvalidOptions(format!("beta must exceed 1, got {}", self.beta)));
        }
        if !(self.kappa > 0.0) || !(self.epsilon > 0.0) || !(self.epsilon0 > 0.0) {
            return Err(Error::InvalidOptions("kappa, epsilon and epsilon0 must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOptions("max_iterations must be positive".into()));
        }
        if !(self.tau_max >= self.tau0) {
            return Err(Error::InvalidOptions("tau_max must be at least tau0".into()));
        }
        if let Some(f) = &self.fallback_unit {
            if f.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: f.len(),
                });
            }
            let n = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidOptions(format!("fallback_unit must have unit norm, got {n}")));
            }
        }
        Ok(())
    }

    fn fallback(&self, d: usize) -> Vector {
        match &self.fallback_unit {
            Some(f) => Vector::from_column_slice(f),
            None => unit_e1(d),
        }
    }
}

pub(crate) fn unit_e1(d: usize) -> Vector {
    let mut e = Vector::zeros(d);
    e[0] = 1.0;
    e
}

/// Sphere y-step. Returns the new `y` and the number of blocks where the
/// projected point was exactly zero and `fallback` was used.
pub fn y_step_sphere(w: &WhitenedPair, tau: f64, x_next: &Vector, lambda: &Vector, fallback: &Vector) -> (Vector, usize) {
    let d = w.d;
    let mut v = projection_argument(w, tau, x_next, lambda);
    let mut zero_events = 0;
    for i in 0..2 {
        let mut block = v.rows_mut(i * d, d);
        let n = block.norm();
        if n > 0.0 {
            block /= n;
        } else {
            block.copy_from(fallback);
            zero_events += 1;
        }
    }
    (v, zero_events)
}

pub fn residuals_nonconvex(w: &WhitenedPair, x: &Vector, y: &Vector, lambda: &Vector) -> NonconvexResiduals {
    let d = w.d;
    let mut ry = 0.0;
    for i in 0..2 {
        let yi = y.rows(i * d, d);
        let li = lambda.rows(i * d, d);
        let ln = li.norm();
        let minus = (li - yi * ln).norm();
        let plus = (li + yi * ln).norm();
        ry += minus.min(plus);
    }
    NonconvexResiduals {
        rx: stationarity_residual(w, x, lambda).norm(),
        ry,
        rc: coupling_residual(w, x, y).norm(),
    }
}

/// Per-block coupling norms around one iteration `n → n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingHistory {
    /// `‖Sᵢxᵢⁿ − yᵢⁿ − cᵢ‖`
    pub prev: [f64; 2],
    /// `‖Sᵢxᵢⁿ⁺¹ − yᵢⁿ⁺¹ − cᵢ‖`
    pub next: [f64; 2],
    /// `‖Sᵢxᵢⁿ − yᵢⁿ⁻¹ − cᵢ‖`
    pub prev_cross: [f64; 2],
    /// `‖Sᵢxᵢⁿ⁺¹ − yᵢⁿ − cᵢ‖`
    pub next_cross: [f64; 2],
}

fn stacked(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Penalty for the next iteration: `τ` or `βτ`.
pub fn penalty_update(
    rule: UpdateRule,
    h: &CouplingHistory,
    eta: f64,
    kappa: f64,
    beta: f64,
    tau: f64,
    combined: bool,
) -> f64 {
    let increase = match (rule, combined) {
        (UpdateRule::Heuristic, false) => (0..2).any(|i| h.prev[i] >= kappa && h.next[i] > eta * h.prev[i]),
        (UpdateRule::Heuristic, true) => {
            let (p, q) = (stacked(h.prev), stacked(h.next));
            p >= kappa && q > eta * p
        }
        (UpdateRule::Theoretical, false) => (0..2).any(|i| {
            (h.next_cross[i] - eta * h.prev_cross[i]).max(h.next[i] - eta * h.prev[i]) > 0.0
        }),
        (UpdateRule::Theoretical, true) => {
            (stacked(h.next_cross) - eta * stacked(h.prev_cross)).max(stacked(h.next) - eta * stacked(h.prev)) > 0.0
        }
    };
    if increase {
        beta * tau
    } else {
        tau
    }
}

/// Default start: `λ⁰ = 0` and `yᵢ⁰ = e₁`.
pub fn default_start(d: usize) -> (Vector, Vector) {
    let mut y = Vector::zeros(2 * d);
    y[0] = 1.0;
    y[d] = 1.0;
    (y, Vector::zeros(2 * d))
}

fn block_norms(w: &WhitenedPair, x: &Vector, y: &Vector) -> [f64; 2] {
    let r = coupling_residual(w, x, y);
    [r.rows(0, w.d).norm(), r.rows(w.d, w.d).norm()]
}

/// Distance between the ellipsoid boundaries from the start `(y0, λ0)`.
pub fn solve_nonconvex(
    e1: &Ellipsoid,
    e2: &Ellipsoid,
    opts: &NonconvexSolverOptions,
    y0: &Vector,
    lambda0: &Vector,
) -> Result<SolveReport> {
    let w = whiten(e1, e2)?;
    opts.validate(w.d)?;
    let mut state = AdmmState::new(&w, y0.clone(), lambda0.clone(), opts.tau0, false)?;
    Ok(run_nonconvex(&w, &mut state, opts))
}

fn run_nonconvex(w: &WhitenedPair, state: &mut AdmmState, opts: &NonconvexSolverOptions) -> SolveReport {
    let d = w.d;
    let fallback = opts.fallback(d);
    let mut penalty_log = Vec::new();
    let mut diagnostics = Diagnostics::default();
    let mut trace = VecDeque::with_capacity(opts.trace_tail);
    let mut status = Status::MaxIterations;
    let mut residuals = NonconvexResiduals::default();
    // (‖Sxⁿ − yⁿ − c‖, ‖Sxⁿ − yⁿ⁻¹ − c‖) per block, known from n = 1 on.
    let mut prev: Option<([f64; 2], [f64; 2])> = None;

    while state.n < opts.max_iterations {
        if state.refresh(w).is_err() {
            status = Status::Degenerate;
            break;
        }
        let x_next = match x_step(w, state) {
            Ok(x) => x,
            Err(_) => {
                status = Status::Degenerate;
                break;
            }
        };
        let (y_next, zero_events) = y_step_sphere(w, state.tau, &x_next, &state.lambda, &fallback);
        if zero_events > 0 {
            log::warn!("sphere projection received a zero vector at iteration {}", state.n);
            diagnostics.zero_projection_events += zero_events;
        }
        let lambda_next = lambda_step(w, state.tau, &x_next, &y_next, &state.lambda);
        diagnostics.last_penalty_step = state.tau * (&y_next - &state.y).norm();

        let next_cross = block_norms(w, &x_next, &state.y);
        let next = block_norms(w, &x_next, &y_next);
        state.x = x_next;
        state.y = y_next;
        state.lambda = lambda_next;
        let n = state.n;
        state.n += 1;

        if opts.trace_tail > 0 {
            if trace.len() == opts.trace_tail {
                trace.pop_front();
            }
            trace.push_back(Iterate {
                x: state.x.clone(),
                y: state.y.clone(),
                lambda: state.lambda.clone(),
                tau: state.tau,
            });
        }

        residuals = residuals_nonconvex(w, &state.x, &state.y, &state.lambda);
        if !residuals.sum().is_finite() {
            status = Status::Degenerate;
            break;
        }
        if residuals.sum() < opts.epsilon {
            status = Status::Converged;
            break;
        }

        if let Some((p, pc)) = prev {
            debug_assert!(n >= 1);
            let h = CouplingHistory {
                prev: p,
                next,
                prev_cross: pc,
                next_cross,
            };
            let tau = penalty_update(opts.update_rule, &h, opts.eta, opts.kappa, opts.beta, state.tau, opts.combined_residual);
            if tau != state.tau {
                if tau > opts.tau_max {
                    status = Status::Degenerate;
                    break;
                }
                state.set_tau(tau);
                penalty_log.push(PenaltyUpdate { iteration: n, tau });
            }
        }
        prev = Some((next, next_cross));
    }

    diagnostics.trace = trace.into();
    let (x1, x2) = split(&state.x, d);
    SolveReport {
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
        diagnostics,
    }
}

/// Whitened start `yᵢ⁰ = −Sᵢxᵢ* + cᵢ`, the image of the reflection
/// `xᵢ⁰ = 2zᵢ − xᵢ*` through each center.
pub fn reflected_start(w: &WhitenedPair, x1: &Vector, x2: &Vector) -> Vector {
    let d = w.d;
    let mut y = Vector::zeros(2 * d);
    for (i, x) in [x1, x2].into_iter().enumerate() {
        y.rows_mut(i * d, d).copy_from(&(w.c(i) - w.s(i) * x));
    }
    y
}

/// Boundary distance with one reflection restart.
///
/// The first run starts from [`default_start`]. Unless it already reports a
/// distance below `epsilon0`, a second run starts from the reflected point
/// with `λ⁰ = 0` and the closer of the two pairs is returned, the first on a
/// tie. A converged run is preferred over one that did not converge.
pub fn solve_with_restart(e1: &Ellipsoid, e2: &Ellipsoid, opts: &NonconvexSolverOptions) -> Result<SolveReport> {
    let w = whiten(e1, e2)?;
    opts.validate(w.d)?;
    let (y0, l0) = default_start(w.d);
    let mut s1 = AdmmState::new(&w, y0, l0, opts.tau0, false)?;
    let first = run_nonconvex(&w, &mut s1, opts);
    if first.converged() && first.distance < opts.epsilon0 {
        return Ok(first);
    }
    let y_reflected = reflected_start(&w, &first.x1, &first.x2);
    let mut s2 = AdmmState::new(&w, y_reflected, Vector::zeros(2 * w.d), opts.tau0, false)?;
    let second = run_nonconvex(&w, &mut s2, opts);
    Ok(match (first.converged(), second.converged()) {
        (true, false) => first,
        (false, true) => second,
        _ if first.distance <= second.distance => first,
        _ => second,
    })
}
