//! JSON instance files.
//!
//! ```json
//! {"d": 2, "Q1": [[1, 0], [0, 1]], "z1": [0, 0], "Q2": [[1, 0], [0, 1]], "z2": [10, 0]}
//! ```
//!
//! Either side may instead be given as a general quadric
//! `⟨x, Ax⟩ + ⟨b, x⟩ + α ≤ 0` through the keys `A1`, `b1`, `alpha1`
//! (resp. `A2`, `b2`, `alpha2`). Matrices are row-major and symmetrized on
//! ingestion.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ellipsoid::{from_general_quadric, Ellipsoid, GeneralQuadric};
use crate::error::Error;
use crate::linalg::{Matrix, SymPdMatrix, Vector};

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct InstanceFile {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub Q1: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub Q2: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub A1: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub A2: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
}

fn rows_to_matrix(rows: &[Vec<f64>], d: usize) -> Result<Matrix, String> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(format!("expected a {d}x{d} matrix"));
    }
    Ok(Matrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn vector(v: &[f64], d: usize) -> Result<Vector, String> {
    if v.len() != d {
        return Err(format!("expected a vector of length {d}, found {}", v.len()));
    }
    Ok(Vector::from_column_slice(v))
}

fn side(
    d: usize,
    q: &Option<Vec<Vec<f64>>>,
    z: &Option<Vec<f64>>,
    general: (&Option<Vec<Vec<f64>>>, &Option<Vec<f64>>, &Option<f64>),
    k: usize,
) -> Result<Ellipsoid, String> {
    let describe = |e: Error| format!("ellipsoid {k}: {e}");
    match (q, z, general) {
        (Some(q), Some(z), (None, None, None)) => {
            let q = SymPdMatrix::new(rows_to_matrix(q, d)?).map_err(describe)?;
            Ellipsoid::new(q, vector(z, d)?).map_err(describe)
        }
        (None, None, (Some(a), Some(b), Some(alpha))) => {
            let g = GeneralQuadric {
                a: SymPdMatrix::new(rows_to_matrix(a, d)?).map_err(describe)?,
                b: vector(b, d)?,
                alpha: *alpha,
            };
            from_general_quadric(&g).map_err(describe)
        }
        _ => Err(format!("ellipsoid {k}: give either Q{k} and z{k}, or A{k}, b{k} and alpha{k}")),
    }
}

impl InstanceFile {
    pub fn from_pair(e1: &Ellipsoid, e2: &Ellipsoid) -> Self {
        Self {
            d: e1.dim(),
            Q1: Some(e1.q().to_rows()),
            z1: Some(e1.center().iter().copied().collect()),
            Q2: Some(e2.q().to_rows()),
            z2: Some(e2.center().iter().copied().collect()),
            ..Default::default()
        }
    }

    pub fn to_pair(&self) -> Result<(Ellipsoid, Ellipsoid), String> {
        if self.d == 0 {
            return Err("d must be positive".into());
        }
        let e1 = side(self.d, &self.Q1, &self.z1, (&self.A1, &self.b1, &self.alpha1), 1)?;
        let e2 = side(self.d, &self.Q2, &self.z2, (&self.A2, &self.b2, &self.alpha2), 2)?;
        Ok((e1, e2))
    }
}

pub fn parse_instance(text: &str, path: &str) -> Result<(Ellipsoid, Ellipsoid), InstanceError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.to_pair().map_err(|message| InstanceError::Invalid {
        path: path.to_string(),
        message,
    })
}

pub fn read_instance(path: &Path) -> Result<(Ellipsoid, Ellipsoid), InstanceError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_instance(&text, &shown)
}

pub fn to_json(e1: &Ellipsoid, e2: &Ellipsoid) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_pair(e1, e2)).expect("instance serializes")
}
