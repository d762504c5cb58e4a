//! One-bit matrix completion with factors `M = L R^T` under the hierarchical
//! low-rank prior: empirical hinge risk, a block Metropolis sampler of the
//! Gibbs posterior and a mean-field variational approximation.

mod chain;
mod vb;

use std::f64::consts::PI;

use statrs::function::erf::erfc;

use crate::data::{Dataset, Design, FactorState};
use crate::error::{domain, Error, Result};
use crate::losses::Loss;
use crate::priors::{GammaKind, PriorSpec};

pub use chain::matcomp_chain;
pub use vb::{default_family, vb_fit, vb_objective, VBFamilySpec, VBFit};

/// Observations grouped by row and by column.
#[derive(Debug, Clone)]
pub(crate) struct Observations {
    /// `by_row[i]` holds `(j, y)` for every observation in row `i`.
    pub by_row: Vec<Vec<(usize, f64)>>,
    /// `by_col[j]` holds `(i, y)` for every observation in column `j`.
    pub by_col: Vec<Vec<(usize, f64)>>,
    pub n: usize,
}

impl Observations {
    pub fn new(data: &Dataset, d1: usize, d2: usize) -> Result<Self> {
        let Design::Entries { rows, cols, index } = data.design() else {
            return Err(domain("matrix completion needs an entry-index design"));
        };
        if (*rows, *cols) != (d1, d2) {
            return Err(Error::DimensionMismatch {
                expected: d1 * d2,
                found: rows * cols,
            });
        }
        if data.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        let mut by_row = vec![Vec::new(); d1];
        let mut by_col = vec![Vec::new(); d2];
        for (&(i, j), &y) in index.iter().zip(data.labels()) {
            by_row[i].push((j, y));
            by_col[j].push((i, y));
        }
        Ok(Self {
            by_row,
            by_col,
            n: index.len(),
        })
    }
}

/// Unpacks a hierarchical prior into `(d1, d2, k, a, b, kind)`.
pub(crate) fn low_rank_params(prior: &PriorSpec) -> Result<(usize, usize, usize, f64, f64, GammaKind)> {
    prior.validate()?;
    match *prior {
        PriorSpec::LowRankHier {
            d1,
            d2,
            k_rank,
            a,
            b,
            gamma_kind,
        } => Ok((d1, d2, k_rank, a, b, gamma_kind)),
        _ => Err(domain("matrix completion needs the hierarchical low-rank prior")),
    }
}

/// Empirical hinge risk of `L R^T`, evaluating only the observed entries.
pub fn hinge_matcomp_risk(state: &FactorState, data: &Dataset) -> Result<f64> {
    let Design::Entries { index, .. } = data.design() else {
        return Err(domain("matrix completion needs an entry-index design"));
    };
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let (rows, cols) = (state.l.nrows(), state.r.nrows());
    let hinge = Loss::hinge();
    let mut total = 0.0;
    for (&(i, j), &y) in index.iter().zip(data.labels()) {
        if i >= rows || j >= cols {
            return Err(Error::IndexOutOfRange { row: i, col: j, rows, cols });
        }
        total += hinge.at_margin(y * state.entry(i, j));
    }
    Ok(total / index.len() as f64)
}

/// Standard normal density.
#[inline]
pub(crate) fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
#[inline]
pub(crate) fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `E (1 - z)_+` for `z ~ N(mu, s^2)`:
/// `(1 - mu) Phi((1 - mu)/s) + s phi((1 - mu)/s)`.
pub fn expected_hinge_gaussian(mu: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return (1.0 - mu).max(0.0);
    }
    let t = (1.0 - mu) / s;
    (1.0 - mu) * norm_cdf(t) + s * norm_pdf(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ParamPoint;
    use crate::losses::empirical_risk;
    use crate::seed::rng_from_seed;
    use ndarray::{array, Array1, Array2};
    use proptest::prelude::*;
    use rand::Rng;

    fn entries(d1: usize, d2: usize, index: Vec<(usize, usize)>, y: Vec<f64>) -> Dataset {
        Dataset::new(Design::Entries { rows: d1, cols: d2, index }, y, None).unwrap()
    }

    #[test]
    fn hinge_risk_cases() {
        let zero = FactorState::new(Array2::zeros((2, 1)), Array2::zeros((2, 1)), array![1.0]).unwrap();
        let one = entries(2, 2, vec![(0, 1)], vec![1.0]);
        assert_eq!(hinge_matcomp_risk(&zero, &one).unwrap(), 1.0);

        let big = FactorState::new(array![[2.0], [-2.0]], array![[1.0], [1.0]], array![1.0]).unwrap();
        let data = entries(2, 2, vec![(0, 0), (1, 1), (0, 1)], vec![1.0, -1.0, 1.0]);
        assert_eq!(hinge_matcomp_risk(&big, &data).unwrap(), 0.0);

        let short = FactorState::new(Array2::zeros((1, 1)), Array2::zeros((2, 1)), array![1.0]).unwrap();
        assert!(matches!(
            hinge_matcomp_risk(&short, &one.clone()),
            Ok(_)
        ));
        let far = entries(2, 2, vec![(1, 0)], vec![1.0]);
        assert!(matches!(
            hinge_matcomp_risk(&short, &far),
            Err(Error::IndexOutOfRange { row: 1, .. })
        ));
    }

    #[test]
    fn hinge_risk_matches_dense_product() {
        let mut rng = rng_from_seed(3);
        let (d1, d2, k) = (7, 5, 3);
        let l = Array2::from_shape_fn((d1, k), |_| rng.random_range(-1.0..1.0));
        let r = Array2::from_shape_fn((d2, k), |_| rng.random_range(-1.0..1.0));
        let state = FactorState::new(l, r, Array1::ones(k)).unwrap();
        let index: Vec<_> = (0..40).map(|_| (rng.random_range(0..d1), rng.random_range(0..d2))).collect();
        let y = (0..40).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let data = entries(d1, d2, index, y);
        // Oracle: materialise the product and evaluate entrywise.
        let m = state.product();
        let dense = empirical_risk(Loss::hinge(), &data, &ParamPoint::Matrix(m)).unwrap();
        assert!((hinge_matcomp_risk(&state, &data).unwrap() - dense).abs() < 1e-12);
    }

    /// Composite Simpson rule on `[lo, hi]` with `2m` panels.
    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, m: usize) -> f64 {
        let h = (hi - lo) / (2 * m) as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..2 * m {
            acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn expected_hinge_matches_quadrature() {
        for &mu in &[-3.0f64, -1.0, -0.2, 0.0, 0.5, 0.99, 1.0, 1.7, 4.0] {
            for &s in &[0.01f64, 0.1, 0.5, 1.0, 2.0, 5.0] {
                // Integrand (1 - z) phi((z - mu)/s)/s is smooth on z < 1.
                let lo = (mu - 14.0 * s).min(1.0);
                let q = if lo >= 1.0 {
                    0.0
                } else {
                    simpson(|z| (1.0 - z) * norm_pdf((z - mu) / s) / s, lo, 1.0, 20_000)
                };
                let closed = expected_hinge_gaussian(mu, s);
                assert!((closed - q).abs() < 1e-8, "mu={mu} s={s}: {closed} vs {q}");
            }
        }
        assert_eq!(expected_hinge_gaussian(0.3, 0.0), 0.7);
        assert_eq!(expected_hinge_gaussian(2.0, 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn risk_invariant_under_signed_permutation(
            seed in 0u64..1000,
            perm in Just(vec![2usize, 0, 1]).prop_shuffle(),
            signs in proptest::collection::vec(prop_oneof![Just(1.0f64), Just(-1.0f64)], 3),
        ) {
            let mut rng = rng_from_seed(seed);
            let (d1, d2, k) = (6, 4, 3);
            let l = Array2::from_shape_fn((d1, k), |_| rng.random_range(-2.0..2.0));
            let r = Array2::from_shape_fn((d2, k), |_| rng.random_range(-2.0..2.0));
            let gamma = Array1::from_shape_fn(k, |_| rng.random_range(0.1..2.0));
            let state = FactorState::new(l.clone(), r.clone(), gamma.clone()).unwrap();
            let pl = Array2::from_shape_fn((d1, k), |(i, c)| signs[c] * l[[i, perm[c]]]);
            let pr = Array2::from_shape_fn((d2, k), |(j, c)| signs[c] * r[[j, perm[c]]]);
            let pg = Array1::from_shape_fn(k, |c| gamma[perm[c]]);
            let moved = FactorState::new(pl, pr, pg).unwrap();
            let index: Vec<_> = (0..30).map(|_| (rng.random_range(0..d1), rng.random_range(0..d2))).collect();
            let y = (0..30).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let data = entries(d1, d2, index, y);
            let a = hinge_matcomp_risk(&state, &data).unwrap();
            let b = hinge_matcomp_risk(&moved, &data).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
