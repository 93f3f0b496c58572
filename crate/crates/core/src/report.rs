use serde::{Deserialize, Serialize};

use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIterations,
    Degenerate,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::MaxIterations => "MaxIterations",
            Status::Degenerate => "Degenerate",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Norms of the three optimality residuals.
///
/// In the convex solver `ry` is `‖y − proj_B(y − λ)‖`; in the boundary solver
/// it is `Σᵢ min(‖λᵢ − ‖λᵢ‖yᵢ‖, ‖λᵢ + ‖λᵢ‖yᵢ‖)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub rx: f64,
    pub ry: f64,
    pub rc: f64,
}

impl Residuals {
    pub fn sum(&self) -> f64 {
        self.rx + self.ry + self.rc
    }
}

pub type NonconvexResiduals = Residuals;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyUpdate {
    /// Iteration at whose end the penalty changed.
    pub iteration: usize,
    pub tau: f64,
}

/// One recorded iterate `(x, y, λ)` and the penalty used to produce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub x: Vector,
    pub y: Vector,
    pub lambda: Vector,
    pub tau: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Iterations where the sphere projection received `v = 0`.
    pub zero_projection_events: usize,
    /// `τₙ‖yⁿ⁺¹ − yⁿ‖` at the last iteration.
    pub last_penalty_step: f64,
    /// Whether the tolerance was tightened after the boundary check failed.
    pub tightened: bool,
    /// Trailing iterates, when requested through the solver options.
    pub trace: Vec<Iterate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x1: Vector,
    pub x2: Vector,
    pub distance: f64,
    pub status: Status,
    pub iterations: usize,
    pub final_residuals: Residuals,
    pub penalty_log: Vec<PenaltyUpdate>,
    /// Final whitened variables and multipliers (empty for the global method).
    pub y: Vector,
    pub lambda: Vector,
    pub final_tau: f64,
    pub diagnostics: Diagnostics,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}
