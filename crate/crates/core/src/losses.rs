//! Zero-one and convex surrogate losses, evaluated at real-valued scores.
//!
//! Losses are functions of the margin `y * score`. Scores are clamped to
//! `[-score_clamp, score_clamp]` before evaluation, which makes every loss
//! bounded (`B = 1 + S` for hinge, `log(1 + e^S)` for logistic) without
//! changing its Lipschitz constant.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ParamPoint};
use crate::error::{domain, Error, Result};

pub const DEFAULT_SCORE_CLAMP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    ZeroOne,
    Hinge,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loss {
    pub kind: LossKind,
    #[serde(default = "default_clamp")]
    pub score_clamp: f64,
}

fn default_clamp() -> f64 {
    DEFAULT_SCORE_CLAMP
}

impl Loss {
    pub const fn new(kind: LossKind) -> Self {
        Self {
            kind,
            score_clamp: DEFAULT_SCORE_CLAMP,
        }
    }

    pub const fn hinge() -> Self {
        Self::new(LossKind::Hinge)
    }

    pub const fn logistic() -> Self {
        Self::new(LossKind::Logistic)
    }

    pub const fn zero_one() -> Self {
        Self::new(LossKind::ZeroOne)
    }

    pub fn with_clamp(self, score_clamp: f64) -> Result<Self> {
        if !(score_clamp > 0.0) || !score_clamp.is_finite() {
            return Err(domain("score clamp must be positive and finite"));
        }
        Ok(Self {
            score_clamp,
            ..self
        })
    }

    pub fn is_surrogate(&self) -> bool {
        self.kind != LossKind::ZeroOne
    }

    /// Lipschitz constant in the score; `None` for the zero-one loss.
    pub fn lipschitz(&self) -> Option<f64> {
        match self.kind {
            LossKind::ZeroOne => None,
            LossKind::Hinge | LossKind::Logistic => Some(1.0),
        }
    }

    /// Upper bound `B` of the loss on the clamped score domain.
    pub fn bound(&self) -> f64 {
        match self.kind {
            LossKind::ZeroOne => 1.0,
            LossKind::Hinge => 1.0 + self.score_clamp,
            LossKind::Logistic => softplus(self.score_clamp),
        }
    }

    /// Loss at margin `y * score`. No validation; callers feed finite margins.
    #[inline]
    pub fn at_margin(&self, margin: f64) -> f64 {
        let m = margin.clamp(-self.score_clamp, self.score_clamp);
        match self.kind {
            LossKind::ZeroOne => {
                if m > 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            LossKind::Hinge => (1.0 - m).max(0.0),
            LossKind::Logistic => softplus(-m),
        }
    }

    pub fn eval(&self, y: f64, score: f64) -> Result<f64> {
        if !score.is_finite() {
            return Err(domain(format!("score {score} is not finite")));
        }
        if y != 1.0 && y != -1.0 {
            return Err(domain(format!("label {y} is not ±1")));
        }
        Ok(self.at_margin(y * score))
    }

    /// Mean loss over paired labels and scores.
    pub fn mean(&self, labels: &[f64], scores: &[f64]) -> f64 {
        debug_assert_eq!(labels.len(), scores.len());
        let total: f64 = labels
            .iter()
            .zip(scores)
            .map(|(y, s)| self.at_margin(y * s))
            .sum();
        total / labels.len() as f64
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Surrogate loss at a single sample. The zero-one loss is rejected.
pub fn surrogate_loss(loss: Loss, y: f64, score: f64) -> Result<f64> {
    if !loss.is_surrogate() {
        return Err(Error::NotSurrogate);
    }
    loss.eval(y, score)
}

/// Mean per-sample loss of `theta` on `data`. A zero score counts as an
/// error for the zero-one loss, whatever the label.
pub fn empirical_risk(loss: Loss, data: &Dataset, theta: &ParamPoint) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let scores = theta.scores(data.design())?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(domain("non-finite score"));
    }
    Ok(loss.mean(data.labels(), &scores))
}

/// Mean of `min(p, 1 - p)` over the sampled design points.
pub fn bayes_risk_exact(data: &Dataset) -> Result<f64> {
    let p = data.true_cond_prob().ok_or(Error::MissingCondProb)?;
    if p.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    Ok(p.iter().map(|&q| q.min(1.0 - q)).sum::<f64>() / p.len() as f64)
}

/// Whether two predictors produce scores of identical sign on every sample.
pub fn sign_risk_equivalence(m1: &ParamPoint, m2: &ParamPoint, data: &Dataset) -> Result<bool> {
    let s1 = m1.scores(data.design())?;
    let s2 = m2.scores(data.design())?;
    Ok(s1.iter().zip(&s2).all(|(a, b)| sign(*a) == sign(*b)))
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}
