//! Labelled samples and classifier parameters.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Where the scores of a sample come from: a dense feature row, or an
/// observed matrix entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Design {
    /// `n x d` feature matrix, one sample per row.
    Dense(Array2<f64>),
    /// Observed positions of a `rows x cols` matrix.
    Entries {
        rows: usize,
        cols: usize,
        index: Vec<(usize, usize)>,
    },
}

impl Design {
    pub fn len(&self) -> usize {
        match self {
            Design::Dense(x) => x.nrows(),
            Design::Entries { index, .. } => index.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Feature design plus `±1` labels and, for synthetic data, the true
/// conditional probabilities `p(x_i) = P(Y = 1 | X = x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    design: Design,
    labels: Vec<f64>,
    true_cond_prob: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(design: Design, labels: Vec<f64>, true_cond_prob: Option<Vec<f64>>) -> Result<Self> {
        if labels.len() != design.len() {
            return Err(Error::DimensionMismatch {
                expected: design.len(),
                found: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(domain(format!("label {bad} is not ±1")));
        }
        if let Some(p) = &true_cond_prob {
            if p.len() != labels.len() {
                return Err(Error::DimensionMismatch {
                    expected: labels.len(),
                    found: p.len(),
                });
            }
            if let Some(bad) = p.iter().find(|q| !(0.0..=1.0).contains(*q)) {
                return Err(domain(format!("conditional probability {bad} outside [0, 1]")));
            }
        }
        if let Design::Entries { rows, cols, index } = &design {
            if let Some(&(i, j)) = index.iter().find(|(i, j)| i >= rows || j >= cols) {
                return Err(Error::IndexOutOfRange {
                    row: i,
                    col: j,
                    rows: *rows,
                    cols: *cols,
                });
            }
        }
        Ok(Self {
            design,
            labels,
            true_cond_prob,
        })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn true_cond_prob(&self) -> Option<&[f64]> {
        self.true_cond_prob.as_deref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension of a dense design.
    pub fn dim(&self) -> Option<usize> {
        match &self.design {
            Design::Dense(x) => Some(x.ncols()),
            Design::Entries { .. } => None,
        }
    }
}

/// Factor parametrisation `M = L R^T` together with the per-column prior
/// variances `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorState {
    pub l: Array2<f64>,
    pub r: Array2<f64>,
    pub gamma: Array1<f64>,
}

impl FactorState {
    pub fn new(l: Array2<f64>, r: Array2<f64>, gamma: Array1<f64>) -> Result<Self> {
        let k = gamma.len();
        if l.ncols() != k || r.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: if l.ncols() != k { l.ncols() } else { r.ncols() },
            });
        }
        if gamma.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
            return Err(domain("factor variances must be positive and finite"));
        }
        Ok(Self { l, r, gamma })
    }

    pub fn rank(&self) -> usize {
        self.gamma.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.l.row(i).dot(&self.r.row(j))
    }

    pub fn product(&self) -> Array2<f64> {
        self.l.dot(&self.r.t())
    }
}

/// A classifier parameter. Linear classifiers score `theta^T x`; matrix
/// predictors score the observed entry `M_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamPoint {
    Vector(Array1<f64>),
    Factors(FactorState),
    Matrix(Array2<f64>),
}

impl ParamPoint {
    pub fn as_vector(&self) -> Option<&Array1<f64>> {
        match self {
            ParamPoint::Vector(v) => Some(v),
            _ => None,
        }
    }

    /// Dense matrix form for matrix-valued points.
    pub fn to_matrix(&self) -> Option<Array2<f64>> {
        match self {
            ParamPoint::Vector(_) => None,
            ParamPoint::Factors(f) => Some(f.product()),
            ParamPoint::Matrix(m) => Some(m.clone()),
        }
    }

    /// Flattened coordinates (row-major for matrices, `L` then `R` then
    /// `gamma` for factor states).
    pub fn flatten(&self) -> Vec<f64> {
        match self {
            ParamPoint::Vector(v) => v.to_vec(),
            ParamPoint::Matrix(m) => m.iter().copied().collect(),
            ParamPoint::Factors(f) => f
                .l
                .iter()
                .chain(f.r.iter())
                .chain(f.gamma.iter())
                .copied()
                .collect(),
        }
    }

    /// Scores of every sample in `design`.
    pub fn scores(&self, design: &Design) -> Result<Vec<f64>> {
        match (self, design) {
            (ParamPoint::Vector(theta), Design::Dense(x)) => {
                if theta.len() != x.ncols() {
                    return Err(Error::DimensionMismatch {
                        expected: x.ncols(),
                        found: theta.len(),
                    });
                }
                Ok(x.dot(theta).to_vec())
            }
            (ParamPoint::Factors(f), Design::Entries { rows, cols, index }) => {
                check_shape(f.l.nrows(), f.r.nrows(), *rows, *cols)?;
                Ok(index.iter().map(|&(i, j)| f.entry(i, j)).collect())
            }
            (ParamPoint::Matrix(m), Design::Entries { rows, cols, index }) => {
                check_shape(m.nrows(), m.ncols(), *rows, *cols)?;
                Ok(index.iter().map(|&(i, j)| m[[i, j]]).collect())
            }
            (ParamPoint::Vector(theta), Design::Entries { .. }) => Err(Error::DimensionMismatch {
                expected: 0,
                found: theta.len(),
            }),
            (_, Design::Dense(x)) => Err(Error::DimensionMismatch {
                expected: x.ncols(),
                found: 0,
            }),
        }
    }
}

fn check_shape(r: usize, c: usize, rows: usize, cols: usize) -> Result<()> {
    if r != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: r,
        });
    }
    if c != cols {
        return Err(Error::DimensionMismatch {
            expected: cols,
            found: c,
        });
    }
    Ok(())
}
