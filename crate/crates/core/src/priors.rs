//! Prior families: isotropic Gaussian, scaled Student-t(3) restricted to an
//! L1 ball, and the hierarchical low-rank factor prior.
//!
//! Densities are unnormalised throughout. Evaluating a density outside the
//! support is an [`Error::Support`], never a `-inf`.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal, StudentT};
use serde::{Deserialize, Serialize};

use crate::data::{FactorState, ParamPoint};
use crate::error::{domain, Error, Result};

/// Default cap on rejection-sampler proposals.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaKind {
    /// `Gamma(shape = a, rate = b)`.
    Gamma,
    /// `InvGamma(shape = a, scale = b)`, mean `b / (a - 1)`.
    InverseGamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum PriorSpec {
    IsotropicGaussian {
        sigma: f64,
        d: usize,
    },
    /// Product of `tau * t_3` densities, restricted to `||theta||_1 <= c1`.
    ScaledStudent {
        tau: f64,
        c1: f64,
        d: usize,
    },
    LowRankHier {
        d1: usize,
        d2: usize,
        k_rank: usize,
        a: f64,
        b: f64,
        gamma_kind: GammaKind,
    },
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            PriorSpec::IsotropicGaussian { sigma, d } => {
                positive("sigma", sigma)?;
                nonzero("d", d)
            }
            PriorSpec::ScaledStudent { tau, c1, d } => {
                positive("tau", tau)?;
                positive("c1", c1)?;
                nonzero("d", d)?;
                if c1 <= 2.0 * d as f64 * tau {
                    return Err(domain(format!(
                        "scaled Student prior needs c1 > 2 d tau, got c1 = {c1}, 2 d tau = {}",
                        2.0 * d as f64 * tau
                    )));
                }
                Ok(())
            }
            PriorSpec::LowRankHier {
                d1, d2, k_rank, a, b, ..
            } => {
                nonzero("d1", d1)?;
                nonzero("d2", d2)?;
                nonzero("k_rank", k_rank)?;
                positive("a", a)?;
                positive("b", b)
            }
        }
    }

    /// Number of free coordinates of a vector-valued point.
    pub fn dim(&self) -> usize {
        match *self {
            PriorSpec::IsotropicGaussian { d, .. } | PriorSpec::ScaledStudent { d, .. } => d,
            PriorSpec::LowRankHier { d1, d2, k_rank, .. } => (d1 + d2 + 1) * k_rank,
        }
    }
}

fn nonzero(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(domain(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

/// `-2 log(tau^2 + x^2)`, one coordinate of the scaled Student log-density.
#[inline]
pub fn student_log_density_coord(tau: f64, x: f64) -> f64 {
    -2.0 * (tau * tau + x * x).ln()
}

/// Unnormalised log-density of a single variance under `pi^gamma`.
#[inline]
pub fn gamma_log_density(kind: GammaKind, a: f64, b: f64, g: f64) -> f64 {
    match kind {
        GammaKind::Gamma => (a - 1.0) * g.ln() - b * g,
        GammaKind::InverseGamma => -(a + 1.0) * g.ln() - b / g,
    }
}

pub fn log_density_unnormalized(prior: &PriorSpec, theta: &ParamPoint) -> Result<f64> {
    match (prior, theta) {
        (&PriorSpec::IsotropicGaussian { sigma, d }, ParamPoint::Vector(v)) => {
            check_dim(d, v.len())?;
            Ok(-v.dot(v) / (2.0 * sigma * sigma))
        }
        (&PriorSpec::ScaledStudent { tau, c1, d }, ParamPoint::Vector(v)) => {
            check_dim(d, v.len())?;
            let l1: f64 = v.iter().map(|x| x.abs()).sum();
            if !(l1 <= c1) {
                return Err(Error::Support(format!("||theta||_1 = {l1} exceeds c1 = {c1}")));
            }
            Ok(v.iter().map(|&x| student_log_density_coord(tau, x)).sum())
        }
        (
            &PriorSpec::LowRankHier {
                d1,
                d2,
                k_rank,
                a,
                b,
                gamma_kind,
            },
            ParamPoint::Factors(f),
        ) => {
            check_dim(d1, f.l.nrows())?;
            check_dim(d2, f.r.nrows())?;
            check_dim(k_rank, f.rank())?;
            if f.gamma.iter().any(|&g| !(g > 0.0)) {
                return Err(Error::Support("factor variances must be positive".into()));
            }
            let rows = (d1 + d2) as f64;
            let mut lp = 0.0;
            for k in 0..k_rank {
                let g = f.gamma[k];
                let ss = f.l.column(k).dot(&f.l.column(k)) + f.r.column(k).dot(&f.r.column(k));
                lp += gamma_log_density(gamma_kind, a, b, g) - 0.5 * rows * g.ln() - ss / (2.0 * g);
            }
            Ok(lp)
        }
        _ => Err(domain("parameter kind does not match prior family")),
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn draw_gamma<R: Rng + ?Sized>(kind: GammaKind, a: f64, b: f64, rng: &mut R) -> f64 {
    // Parameters were validated; the constructors cannot fail.
    let g = Gamma::new(a, 1.0 / b).expect("validated gamma parameters");
    match kind {
        GammaKind::Gamma => g.sample(rng),
        GammaKind::InverseGamma => 1.0 / g.sample(rng),
    }
}

/// Draw from the prior. Scaled Student draws are rejected until they fall in
/// the L1 ball, up to `DEFAULT_REJECTION_CAP` proposals.
pub fn sample_prior<R: Rng + ?Sized>(prior: &PriorSpec, rng: &mut R) -> Result<ParamPoint> {
    sample_prior_capped(prior, rng, DEFAULT_REJECTION_CAP)
}

pub fn sample_prior_capped<R: Rng + ?Sized>(prior: &PriorSpec, rng: &mut R, cap: u64) -> Result<ParamPoint> {
    prior.validate()?;
    match *prior {
        PriorSpec::IsotropicGaussian { sigma, d } => {
            let n = Normal::new(0.0, sigma).expect("validated sigma");
            Ok(ParamPoint::Vector(Array1::from_shape_fn(d, |_| n.sample(rng))))
        }
        PriorSpec::ScaledStudent { tau, c1, d } => {
            let v = reject_l1(tau, d, c1, rng, cap)?;
            Ok(ParamPoint::Vector(v))
        }
        PriorSpec::LowRankHier {
            d1,
            d2,
            k_rank,
            a,
            b,
            gamma_kind,
        } => {
            let gamma = Array1::from_shape_fn(k_rank, |_| draw_gamma(gamma_kind, a, b, rng));
            let std = Normal::new(0.0, 1.0).expect("unit normal");
            let l = Array2::from_shape_fn((d1, k_rank), |(_, k)| gamma[k].sqrt() * std.sample(rng));
            let r = Array2::from_shape_fn((d2, k_rank), |(_, k)| gamma[k].sqrt() * std.sample(rng));
            Ok(ParamPoint::Factors(FactorState { l, r, gamma }))
        }
    }
}

/// `tau * T` with `T` a vector of iid Student-t(3), conditioned on
/// `||tau * T||_1 <= radius`.
fn reject_l1<R: Rng + ?Sized>(tau: f64, d: usize, radius: f64, rng: &mut R, cap: u64) -> Result<Array1<f64>> {
    let t3 = StudentT::new(3.0).expect("three degrees of freedom");
    let mut draw = Array1::zeros(d);
    for _ in 0..cap {
        draw.mapv_inplace(|_| tau * t3.sample(rng));
        if draw.iter().map(|x| x.abs()).sum::<f64>() <= radius {
            return Ok(draw);
        }
    }
    Err(Error::Sampling {
        proposals: cap,
        acceptance_rate: 0.0,
    })
}

/// The prior translated to `center` and restricted to the L1 ball of radius
/// `2 d tau` around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslatedPrior {
    pub tau: f64,
    pub c1: f64,
    pub center: Array1<f64>,
}

impl TranslatedPrior {
    pub fn new(base: &PriorSpec, center: Array1<f64>) -> Result<Self> {
        base.validate()?;
        match *base {
            PriorSpec::ScaledStudent { tau, c1, d } => {
                check_dim(d, center.len())?;
                Ok(Self { tau, c1, center })
            }
            _ => Err(domain("translated prior needs a scaled Student base")),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn radius(&self) -> f64 {
        2.0 * self.dim() as f64 * self.tau
    }

    /// Whether `beta` lies in the support ball.
    pub fn contains(&self, beta: &Array1<f64>) -> bool {
        (beta - &self.center).iter().map(|x| x.abs()).sum::<f64>() <= self.radius()
    }
}

pub fn sample_translated<R: Rng + ?Sized>(p0: &TranslatedPrior, rng: &mut R) -> Result<Array1<f64>> {
    sample_translated_capped(p0, rng, DEFAULT_REJECTION_CAP)
}

pub fn sample_translated_capped<R: Rng + ?Sized>(p0: &TranslatedPrior, rng: &mut R, cap: u64) -> Result<Array1<f64>> {
    // c1 > radius, so the base restriction is implied by the smaller ball.
    let offset = reject_l1(p0.tau, p0.dim(), p0.radius(), rng, cap)?;
    Ok(offset + &p0.center)
}
