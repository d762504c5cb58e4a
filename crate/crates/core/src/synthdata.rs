//! Synthetic classification models with a hard margin on `p(x)` and
//! analytically known Bayes classifier.
//!
//! Labels follow `p(x) = 1/2 + h * sign(score*(x))`, so `|p - 1/2|` is
//! either `h` or `0`, the margin condition holds with `1/(2c) = h`, and the
//! conditional Bayes risk is `1/2 - h` wherever the score is nonzero.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Design, ParamPoint};
use crate::error::{domain, Error, Result};
use crate::seed::{derive_seed, rng_from_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureLaw {
    /// iid uniform `±1` entries; `E||X|| = sqrt(d)`.
    RademacherGrid,
    /// Uniform on the unit sphere; `E||X|| = 1`.
    UnitSphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseModelSpec {
    pub d: usize,
    pub s_star: usize,
    /// Magnitude of the nonzero entries of `theta*`.
    pub signal: f64,
    /// Margin level: `p(x) = 1/2 ± h`.
    pub h: f64,
    pub feature_law: FeatureLaw,
}

fn check_h(h: f64) -> Result<()> {
    if (0.0..=0.5).contains(&h) {
        Ok(())
    } else {
        Err(domain(format!("margin level h = {h} outside [0, 1/2]")))
    }
}

impl SparseModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.s_star == 0 || self.s_star > self.d {
            return Err(domain(format!("need 1 <= s* = {} <= d = {}", self.s_star, self.d)));
        }
        if !(self.signal > 0.0) || !self.signal.is_finite() {
            return Err(domain("signal must be positive"));
        }
        check_h(self.h)
    }

    /// `C_x = E||X||`.
    pub fn c_x(&self) -> f64 {
        match self.feature_law {
            FeatureLaw::RademacherGrid => (self.d as f64).sqrt(),
            FeatureLaw::UnitSphere => 1.0,
        }
    }

    /// Margin constant implied by `h`: `c = 1/(2h)`.
    pub fn c_margin(&self) -> f64 {
        1.0 / (2.0 * self.h)
    }
}

/// Conditional probability and Bayes sign from a true score.
fn cond_prob(h: f64, score: f64) -> f64 {
    if score > 0.0 {
        0.5 + h
    } else if score < 0.0 {
        0.5 - h
    } else {
        0.5
    }
}

fn draw_label<R: Rng + ?Sized>(p: f64, rng: &mut R) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        -1.0
    }
}

/// Excess-risk contribution of one point: `|2p - 1|` when the predictor's
/// sign disagrees with the Bayes sign, else 0. A zero score disagrees.
#[inline]
pub fn pointwise_excess(p: f64, predictor_score: f64) -> f64 {
    let weight = (2.0 * p - 1.0).abs();
    if weight == 0.0 {
        return 0.0;
    }
    let agrees = (p > 0.5 && predictor_score > 0.0) || (p < 0.5 && predictor_score < 0.0);
    if agrees {
        0.0
    } else {
        weight
    }
}

/// Test points with their exact conditional probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    pub design: Design,
    pub cond_prob: Vec<f64>,
}

impl TestSet {
    /// Mean pointwise excess of `predictor` over the test points.
    pub fn excess(&self, predictor: &ParamPoint) -> Result<f64> {
        if self.cond_prob.is_empty() {
            return Err(Error::Empty("test set"));
        }
        let scores = predictor.scores(&self.design)?;
        Ok(scores
            .iter()
            .zip(&self.cond_prob)
            .map(|(s, p)| pointwise_excess(*p, *s))
            .sum::<f64>()
            / scores.len() as f64)
    }
}

/// A data-generating model with known `p(x)`.
pub trait ClassificationModel {
    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset>;

    fn test_set<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<TestSet> {
        let data = self.sample(n, rng)?;
        let p = data.true_cond_prob().expect("synthetic data carries p").to_vec();
        Ok(TestSet {
            design: data.design().clone(),
            cond_prob: p,
        })
    }

    /// Exact misclassification excess risk, when available in closed form.
    fn exact_excess(&self, predictor: &ParamPoint) -> Option<Result<f64>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseModel {
    pub spec: SparseModelSpec,
    pub theta_star: Array1<f64>,
}

impl SparseModel {
    /// Random support and signs for `theta*`.
    pub fn new<R: Rng + ?Sized>(spec: SparseModelSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let mut theta_star = Array1::zeros(spec.d);
        for j in sample_indices(rng, spec.d, spec.s_star) {
            theta_star[j] = if rng.random_bool(0.5) { spec.signal } else { -spec.signal };
        }
        Ok(Self { spec, theta_star })
    }

    pub fn with_theta_star(spec: SparseModelSpec, theta_star: Array1<f64>) -> Result<Self> {
        spec.validate()?;
        if theta_star.len() != spec.d {
            return Err(Error::DimensionMismatch {
                expected: spec.d,
                found: theta_star.len(),
            });
        }
        Ok(Self { spec, theta_star })
    }

    fn features<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Array2<f64> {
        let d = self.spec.d;
        match self.spec.feature_law {
            FeatureLaw::RademacherGrid => Array2::from_shape_fn((n, d), |_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }),
            FeatureLaw::UnitSphere => {
                let mut x: Array2<f64> = Array2::from_shape_fn((n, d), |_| StandardNormal.sample(rng));
                for mut row in x.rows_mut() {
                    let norm = row.dot(&row).sqrt();
                    row /= norm;
                }
                x
            }
        }
    }
}

impl ClassificationModel for SparseModel {
    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        let x = self.features(n, rng);
        let scores = x.dot(&self.theta_star);
        let p: Vec<f64> = scores.iter().map(|&s| cond_prob(self.spec.h, s)).collect();
        let y = p.iter().map(|&q| draw_label(q, rng)).collect();
        Dataset::new(Design::Dense(x), y, Some(p))
    }

    /// For spherical features the disagreement probability of two linear
    /// classifiers is their angle over pi.
    fn exact_excess(&self, predictor: &ParamPoint) -> Option<Result<f64>> {
        if self.spec.feature_law != FeatureLaw::UnitSphere {
            return None;
        }
        let ParamPoint::Vector(theta) = predictor else {
            return Some(Err(domain("linear model needs a vector predictor")));
        };
        if theta.len() != self.spec.d {
            return Some(Err(Error::DimensionMismatch {
                expected: self.spec.d,
                found: theta.len(),
            }));
        }
        let weight = 2.0 * self.spec.h;
        let norm = theta.dot(theta).sqrt();
        if norm == 0.0 {
            return Some(Ok(weight));
        }
        let star_norm = self.theta_star.dot(&self.theta_star).sqrt();
        let cos = (theta.dot(&self.theta_star) / (norm * star_norm)).clamp(-1.0, 1.0);
        Some(Ok(weight * cos.acos() / PI))
    }
}

/// Draws `theta*` from `seed` and `n` samples from an independent stream.
pub fn gen_sparse(spec: &SparseModelSpec, n: usize, seed: u64) -> Result<(Dataset, Array1<f64>)> {
    let model = SparseModel::new(spec.clone(), &mut rng_from_seed(derive_seed(seed, stream::MODEL, 0)))?;
    let data = model.sample(n, &mut rng_from_seed(derive_seed(seed, stream::DATA, 0)))?;
    Ok((data, model.theta_star))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatCompModelSpec {
    pub d1: usize,
    pub d2: usize,
    /// Rank of the sign-generating factors.
    pub r: usize,
    pub b_inf: f64,
    /// Number of factor columns of the learner, at least `r`.
    pub k_rank: usize,
    pub h: f64,
}

impl MatCompModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d1 == 0 || self.d2 == 0 {
            return Err(domain("matrix dimensions must be positive"));
        }
        if self.r == 0 || self.r > self.d1.min(self.d2) {
            return Err(domain(format!("rank {} outside 1..=min(d1, d2)", self.r)));
        }
        if self.k_rank < self.r {
            return Err(domain(format!("k_rank {} below true rank {}", self.k_rank, self.r)));
        }
        if !(self.b_inf > 0.0) || !self.b_inf.is_finite() {
            return Err(domain("b_inf must be positive"));
        }
        check_h(self.h)
    }
}

/// Sign matrix `M* = sign(U V^T)` with `U, V` in the class `M(r, B)`:
/// sup-norm at most `B` and zero beyond the first `r` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatCompModel {
    pub spec: MatCompModelSpec,
    pub u: Array2<f64>,
    pub v: Array2<f64>,
    pub m_star: Array2<f64>,
}

impl MatCompModel {
    pub fn new<R: Rng + ?Sized>(spec: MatCompModelSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let (b, r, k) = (spec.b_inf, spec.r, spec.k_rank);
        let mut draw = |rows: usize| {
            Array2::from_shape_fn((rows, k), |(_, l)| if l < r { rng.random_range(-b..=b) } else { 0.0 })
        };
        let u = draw(spec.d1);
        let v = draw(spec.d2);
        let m_star = u.dot(&v.t()).mapv(|x| if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 });
        Ok(Self { spec, u, v, m_star })
    }

    pub fn cond_prob(&self, i: usize, j: usize) -> f64 {
        0.5 + self.spec.h * self.m_star[[i, j]]
    }

    /// Label drawn at a fixed entry.
    pub fn draw_at<R: Rng + ?Sized>(&self, i: usize, j: usize, rng: &mut R) -> f64 {
        draw_label(self.cond_prob(i, j), rng)
    }
}

impl ClassificationModel for MatCompModel {
    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        let (d1, d2) = (self.spec.d1, self.spec.d2);
        let index: Vec<(usize, usize)> = (0..n).map(|_| (rng.random_range(0..d1), rng.random_range(0..d2))).collect();
        let p: Vec<f64> = index.iter().map(|&(i, j)| self.cond_prob(i, j)).collect();
        let y = p.iter().map(|&q| draw_label(q, rng)).collect();
        Dataset::new(Design::Entries { rows: d1, cols: d2, index }, y, Some(p))
    }

    /// Uniform sampling over entries: exact average over the whole matrix.
    fn exact_excess(&self, predictor: &ParamPoint) -> Option<Result<f64>> {
        let Some(m) = predictor.to_matrix() else {
            return Some(Err(domain("matrix model needs a matrix predictor")));
        };
        if m.dim() != self.m_star.dim() {
            return Some(Err(Error::DimensionMismatch {
                expected: self.m_star.len(),
                found: m.len(),
            }));
        }
        let total: f64 = m
            .indexed_iter()
            .map(|((i, j), &s)| pointwise_excess(self.cond_prob(i, j), s))
            .sum();
        Some(Ok(total / m.len() as f64))
    }
}

pub fn gen_matcomp(spec: &MatCompModelSpec, n: usize, seed: u64) -> Result<(Dataset, Array2<f64>)> {
    let model = MatCompModel::new(spec.clone(), &mut rng_from_seed(derive_seed(seed, stream::MODEL, 0)))?;
    let data = model.sample(n, &mut rng_from_seed(derive_seed(seed, stream::DATA, 0)))?;
    Ok((data, model.m_star))
}

/// Monte-Carlo misclassification excess risk on `n_test` fresh points.
pub fn excess_risk_mc<M: ClassificationModel>(predictor: &ParamPoint, model: &M, n_test: usize, seed: u64) -> Result<f64> {
    if n_test == 0 {
        return Err(Error::Empty("test set"));
    }
    let test = model.test_set(n_test, &mut rng_from_seed(seed))?;
    test.excess(predictor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::check_margin;
    use crate::losses::{bayes_risk_exact, empirical_risk, Loss};

    fn spec(h: f64, law: FeatureLaw) -> SparseModelSpec {
        SparseModelSpec {
            d: 20,
            s_star: 3,
            signal: 1.0,
            h,
            feature_law: law,
        }
    }

    #[test]
    fn noiseless_labels_follow_bayes() {
        let (data, theta) = gen_sparse(&spec(0.5, FeatureLaw::RademacherGrid), 500, 1).unwrap();
        let r = empirical_risk(Loss::zero_one(), &data, &ParamPoint::Vector(theta)).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(bayes_risk_exact(&data).unwrap(), 0.0);
    }

    #[test]
    fn bayes_risk_at_h_point_three() {
        // s* = 3 odd with ±1 features: theta*^T x is never zero.
        let (data, _) = gen_sparse(&spec(0.3, FeatureLaw::RademacherGrid), 500, 2).unwrap();
        assert!((bayes_risk_exact(&data).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn generated_data_meets_margin() {
        for (seed, h) in [(1, 0.45), (2, 0.02), (3, 0.3), (4, 0.1)] {
            for law in [FeatureLaw::RademacherGrid, FeatureLaw::UnitSphere] {
                let s = spec(h, law);
                let (data, theta) = gen_sparse(&s, 300, seed).unwrap();
                assert!(check_margin(&data, s.c_margin()).unwrap());
                assert_eq!(theta.iter().filter(|v| **v != 0.0).count(), 3);
            }
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let s = spec(0.3, FeatureLaw::UnitSphere);
        assert_eq!(gen_sparse(&s, 50, 9).unwrap(), gen_sparse(&s, 50, 9).unwrap());
        assert_ne!(gen_sparse(&s, 50, 9).unwrap().0, gen_sparse(&s, 50, 10).unwrap().0);
    }

    #[test]
    fn excess_of_bayes_and_anti_bayes() {
        let s = spec(0.3, FeatureLaw::RademacherGrid);
        let model = SparseModel::new(s, &mut rng_from_seed(5)).unwrap();
        let bayes = ParamPoint::Vector(model.theta_star.clone());
        let anti = ParamPoint::Vector(-&model.theta_star);
        assert_eq!(excess_risk_mc(&bayes, &model, 2_000, 1).unwrap(), 0.0);
        assert!((excess_risk_mc(&anti, &model, 2_000, 1).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn random_guess_excess_is_half_the_mean_weight() {
        // Oracle: a predictor independent of x disagrees with Bayes half the
        // time, so E[excess] = 0.5 * E|2p - 1| = 0.5 * 2h.
        let s = spec(0.4, FeatureLaw::UnitSphere);
        let model = SparseModel::new(s, &mut rng_from_seed(6)).unwrap();
        let mut rng = rng_from_seed(8);
        let test = model.test_set(20_000, &mut rng).unwrap();
        let n = test.cond_prob.len();
        let coin: f64 = test
            .cond_prob
            .iter()
            .map(|&p| pointwise_excess(p, if rng.random_bool(0.5) { 1.0 } else { -1.0 }))
            .sum::<f64>()
            / n as f64;
        // sd of the mean: 0.4 / sqrt(n) ~ 0.003
        assert!((coin - 0.4).abs() < 0.012, "{coin}");
    }

    #[test]
    fn spherical_exact_excess_matches_monte_carlo() {
        let s = spec(0.45, FeatureLaw::UnitSphere);
        let model = SparseModel::new(s, &mut rng_from_seed(7)).unwrap();
        let mut rng = rng_from_seed(70);
        for _ in 0..5 {
            let noise: Array1<f64> = Array1::from_shape_fn(20, |_| rng.random_range(-0.6..0.6));
            let pred = ParamPoint::Vector(&model.theta_star + &noise);
            let exact = model.exact_excess(&pred).unwrap().unwrap();
            let mc = excess_risk_mc(&pred, &model, 40_000, rng.random()).unwrap();
            // Bernoulli(q) * 0.9 with q <= 1/2: sd <= 0.45 / 200.
            assert!((exact - mc).abs() < 4.0 * 0.45 / 200.0, "{exact} {mc}");
        }
    }

    #[test]
    fn pointwise_estimator_agrees_with_two_risk_difference() {
        // Naive estimate: 0-1 risk of the predictor minus that of Bayes on
        // the same labelled sample.
        let s = spec(0.3, FeatureLaw::UnitSphere);
        let model = SparseModel::new(s, &mut rng_from_seed(17)).unwrap();
        let pred = ParamPoint::Vector(&model.theta_star + &Array1::from_elem(20, 0.15));
        let data = model.sample(100_000, &mut rng_from_seed(18)).unwrap();
        let naive = empirical_risk(Loss::zero_one(), &data, &pred).unwrap()
            - empirical_risk(Loss::zero_one(), &data, &ParamPoint::Vector(model.theta_star.clone())).unwrap();
        let exact = model.exact_excess(&pred).unwrap().unwrap();
        assert!((naive - exact).abs() < 0.01, "{naive} {exact}");
        for &p in data.true_cond_prob().unwrap().iter().take(100) {
            for sc in [-1.0, 0.0, 1.0] {
                let e = pointwise_excess(p, sc);
                assert!((0.0..=1.0).contains(&e));
            }
        }
    }

    fn mc_spec(h: f64) -> MatCompModelSpec {
        MatCompModelSpec {
            d1: 12,
            d2: 9,
            r: 2,
            b_inf: 1.0,
            k_rank: 4,
            h,
        }
    }

    #[test]
    fn matcomp_noiseless_labels() {
        let (data, m_star) = gen_matcomp(&mc_spec(0.5), 300, 3).unwrap();
        let Design::Entries { index, .. } = data.design() else {
            unreachable!()
        };
        for (&(i, j), y) in index.iter().zip(data.labels()) {
            assert_eq!(*y, m_star[[i, j]]);
        }
    }

    #[test]
    fn matcomp_generator_rank_and_structure() {
        let model = MatCompModel::new(mc_spec(0.3), &mut rng_from_seed(4)).unwrap();
        for l in 2..4 {
            assert!(model.u.column(l).iter().all(|v| *v == 0.0));
            assert!(model.v.column(l).iter().all(|v| *v == 0.0));
        }
        assert!(model.u.iter().all(|v| v.abs() <= 1.0));
        assert!(model.m_star.iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn matcomp_label_mean_at_fixed_entry() {
        // Oracle: E[y] = 2p - 1 = 2h M*_ij; sd of the mean over 1e5 draws ~ 0.003.
        let model = MatCompModel::new(mc_spec(0.3), &mut rng_from_seed(4)).unwrap();
        let mut rng = rng_from_seed(44);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| model.draw_at(3, 5, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 0.6 * model.m_star[[3, 5]]).abs() < 0.012);
    }

    #[test]
    fn matcomp_exact_excess() {
        let model = MatCompModel::new(mc_spec(0.45), &mut rng_from_seed(4)).unwrap();
        let bayes = ParamPoint::Matrix(model.m_star.clone());
        assert_eq!(model.exact_excess(&bayes).unwrap().unwrap(), 0.0);
        let anti = ParamPoint::Matrix(-&model.m_star);
        assert!((model.exact_excess(&anti).unwrap().unwrap() - 0.9).abs() < 1e-12);
    }
}
