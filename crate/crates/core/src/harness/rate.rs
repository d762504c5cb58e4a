//! Log-log rate fits and bound-ratio summaries.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Minimum number of positive-mean points for a rate fit.
pub const MIN_RATE_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval of the slope.
    pub half_width: f64,
    pub points_used: usize,
}

/// Least-squares fit of `log mean = intercept + slope log n` over the
/// leading run of points with positive mean. The half-width uses the
/// Student quantile with `k - 2` degrees of freedom.
pub fn fit_rate(points: &[(usize, f64, f64)]) -> Result<RateFit> {
    let prefix: Vec<(f64, f64)> = points
        .iter()
        .take_while(|(_, m, _)| *m > 0.0 && m.is_finite())
        .map(|&(n, m, _)| ((n as f64).ln(), m.ln()))
        .collect();
    let k = prefix.len();
    if k < MIN_RATE_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_RATE_POINTS,
            found: k,
        });
    }
    let kf = k as f64;
    let mx = prefix.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = prefix.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = prefix.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = prefix.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("rate fit needs distinct sample sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = prefix.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (rss / (kf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, kf - 2.0)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    Ok(RateFit {
        slope,
        intercept,
        half_width: t * se,
        points_used: k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub n: Vec<usize>,
    /// Empirical excess over bound right-hand side at each `n`.
    pub ratios: Vec<f64>,
    pub max_over_min: f64,
    /// Slope of `log ratio` against `log n`; positive means the empirical
    /// curve decays more slowly than the bound.
    pub log_trend: f64,
}

/// Ratio curve `empirical / rhs` from `(n, empirical, rhs)` triples.
pub fn compare_bound(points: &[(usize, f64, f64)]) -> Result<BoundComparison> {
    if points.is_empty() {
        return Err(Error::Empty("bound comparison"));
    }
    if points.iter().any(|p| !(p.2 > 0.0)) {
        return Err(Error::Config("bound right-hand sides must be positive".into()));
    }
    let ratios: Vec<f64> = points.iter().map(|p| p.1 / p.2).collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_over_min = if min > 0.0 { max / min } else { f64::INFINITY };
    let log_trend = if points.len() >= 2 && min > 0.0 {
        let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
        let ys: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    Ok(BoundComparison {
        n: points.iter().map(|p| p.0).collect(),
        ratios,
        max_over_min,
        log_trend,
    })
}
