//! Experiment orchestration: sweeps over sample sizes and replicates,
//! excess-risk evaluation of the randomized and mean classifiers, log-log
//! rate fits and bound comparison.

mod rate;
mod report;

use std::f64::consts::PI;
use std::path::PathBuf;

use ndarray::{array, Array1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_rhs_finite, bound_rhs_gaussian, bound_rhs_matcomp, bound_rhs_sparse, canonical_gaussian_s, canonical_sparse_tau, BoundConstants, BoundReport};
use crate::data::{Dataset, ParamPoint};
use crate::error::{Error, Result};
use crate::gibbs::{exact_finite_posterior, posterior_mean, run_chains, GibbsConfig, PosteriorSamples, ProposalScheme};
use crate::losses::Loss;
use crate::matcomp::{matcomp_chain, vb_fit, VBFamilySpec};
use crate::priors::{GammaKind, PriorSpec};
use crate::seed::{derive_seed, rng_from_seed, stream};
use crate::synthdata::{ClassificationModel, FeatureLaw, MatCompModel, MatCompModelSpec, SparseModel, SparseModelSpec, TestSet};

pub use rate::{compare_bound, fit_rate, BoundComparison, RateFit, MIN_RATE_POINTS};
pub use report::{write_outputs, FailureRecord, Summary};

/// How a matrix-completion cell is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MatCompMethod {
    #[default]
    Mcmc,
    Vb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProblemSpec {
    /// `classes` unit vectors in the plane at equal angles, one of which is
    /// the Bayes direction; features uniform on the unit circle; uniform
    /// prior and exact posterior.
    FiniteClass { classes: usize, h: f64 },
    /// Linear classification with an isotropic Gaussian prior.
    GaussianLinear { model: SparseModelSpec, sigma: f64 },
    /// Sparse linear classification with the scaled Student prior. `tau`
    /// defaults to `1/(C_x n sqrt(d))` at each `n`; `c1` defaults to
    /// `2 ||theta*||_1 + 4 d tau`.
    SparseLinear {
        model: SparseModelSpec,
        #[serde(default)]
        tau: Option<f64>,
        #[serde(default)]
        c1: Option<f64>,
    },
    /// One-bit matrix completion under the hierarchical low-rank prior.
    MatComp {
        model: MatCompModelSpec,
        a: f64,
        b: f64,
        gamma_kind: GammaKind,
        #[serde(default)]
        method: MatCompMethod,
    },
}

fn default_one() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_scale() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub n_steps: usize,
    pub burn_in: usize,
    #[serde(default = "default_one")]
    pub thin: usize,
    /// Initial proposal scale (rows of factors for matrix completion).
    #[serde(default = "default_scale")]
    pub proposal_scale: f64,
    #[serde(default)]
    pub scheme: ProposalScheme,
    #[serde(default = "default_true")]
    pub adapt: bool,
    #[serde(default = "default_one")]
    pub chains: usize,
    /// `lambda = lambda_per_sample * n` when set; `n / C_bar` otherwise.
    #[serde(default)]
    pub lambda_per_sample: Option<f64>,
    /// See [`GibbsConfig::jump_prob`].
    #[serde(default)]
    pub jump_prob: f64,
    #[serde(default = "default_jump_scale")]
    pub jump_scale: f64,
    #[serde(default = "default_vb_iters")]
    pub vb_max_iters: usize,
    #[serde(default = "default_vb_tol")]
    pub vb_tol: f64,
}

fn default_jump_scale() -> f64 {
    1.0
}
fn default_vb_iters() -> usize {
    500
}
fn default_vb_tol() -> f64 {
    1e-7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSpec {
    /// Test points for Monte-Carlo excess risk when no closed form exists.
    pub n_test: usize,
    /// Posterior draws, evenly spaced, averaged for the randomized
    /// classifier.
    pub eval_draws: usize,
}

impl Default for EvalSpec {
    fn default() -> Self {
        Self {
            n_test: 5_000,
            eval_draws: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub sampler: SamplerSpec,
    pub constants: BoundConstants,
    #[serde(default = "Loss::hinge")]
    pub loss: Loss,
    #[serde(default)]
    pub eval: EvalSpec,
    /// Master seed.
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < MIN_RATE_POINTS {
            return Err(Error::Config(format!("n_grid needs at least {MIN_RATE_POINTS} sizes")));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be positive and strictly increasing".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        if self.sampler.chains == 0 {
            return Err(Error::Config("need at least one chain".into()));
        }
        if self.eval.eval_draws == 0 || self.eval.n_test == 0 {
            return Err(Error::Config("eval_draws and n_test must be positive".into()));
        }
        if let Some(c) = self.sampler.lambda_per_sample {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::Config("lambda_per_sample must be positive".into()));
            }
        }
        if !self.loss.is_surrogate() {
            return Err(Error::NotSurrogate);
        }
        match &self.problem {
            ProblemSpec::FiniteClass { classes, h } => {
                if *classes < 2 || classes % 4 != 0 {
                    return Err(Error::Config("classes must be a positive multiple of 4".into()));
                }
                self.finite_model_spec(*h).validate()
            }
            ProblemSpec::GaussianLinear { model, sigma } => {
                model.validate()?;
                PriorSpec::IsotropicGaussian { sigma: *sigma, d: model.d }.validate()
            }
            ProblemSpec::SparseLinear { model, .. } => model.validate(),
            ProblemSpec::MatComp { model, a, b, gamma_kind, .. } => {
                model.validate()?;
                self.matcomp_prior(model, *a, *b, *gamma_kind).validate()
            }
        }
    }

    /// Inverse temperature at sample size `n`.
    pub fn lambda(&self, n: usize) -> f64 {
        match self.sampler.lambda_per_sample {
            Some(c) => c * n as f64,
            None => self.constants.lambda(n),
        }
    }

    fn finite_model_spec(&self, h: f64) -> SparseModelSpec {
        SparseModelSpec {
            d: 2,
            s_star: 1,
            signal: 1.0,
            h,
            feature_law: FeatureLaw::UnitSphere,
        }
    }

    fn matcomp_prior(&self, model: &MatCompModelSpec, a: f64, b: f64, gamma_kind: GammaKind) -> PriorSpec {
        PriorSpec::LowRankHier {
            d1: model.d1,
            d2: model.d2,
            k_rank: model.k_rank,
            a,
            b,
            gamma_kind,
        }
    }

    /// Seeds of one cell: `(model, data, chain, test)`. The model and test
    /// set depend on the replicate only, so cells of a replicate are paired
    /// across `n`.
    pub fn cell_seeds(&self, n: usize, replicate: usize) -> (u64, u64, u64, u64) {
        let r = replicate as u64;
        let model = derive_seed(self.seed, stream::MODEL, r);
        let data = derive_seed(derive_seed(self.seed, stream::DATA, r), stream::DATA, n as u64);
        let chain = derive_seed(data, stream::CHAIN, 0);
        let test = derive_seed(self.seed, stream::TEST, r);
        (model, data, chain, test)
    }

    fn gibbs_config(&self, n: usize, seed: u64) -> GibbsConfig {
        let s = &self.sampler;
        GibbsConfig {
            lambda: self.lambda(n),
            n_steps: s.n_steps,
            burn_in: s.burn_in,
            proposal_scale: s.proposal_scale,
            thin: s.thin,
            seed,
            scheme: s.scheme,
            adapt: s.adapt,
            preconditioner: None,
            init: None,
            jump_prob: s.jump_prob,
            jump_scale: s.jump_scale,
        }
    }

    /// Generated training data for `(n, replicate)`.
    pub fn dataset(&self, n: usize, replicate: usize) -> Result<Dataset> {
        let (model_seed, data_seed, _, _) = self.cell_seeds(n, replicate);
        let mut data_rng = rng_from_seed(data_seed);
        match &self.problem {
            ProblemSpec::FiniteClass { h, .. } => self.sparse_model(&self.finite_model_spec(*h), model_seed)?.sample(n, &mut data_rng),
            ProblemSpec::GaussianLinear { model, .. } | ProblemSpec::SparseLinear { model, .. } => {
                self.sparse_model(model, model_seed)?.sample(n, &mut data_rng)
            }
            ProblemSpec::MatComp { model, .. } => MatCompModel::new(model.clone(), &mut rng_from_seed(model_seed))?.sample(n, &mut data_rng),
        }
    }

    fn sparse_model(&self, spec: &SparseModelSpec, seed: u64) -> Result<SparseModel> {
        SparseModel::new(spec.clone(), &mut rng_from_seed(seed))
    }

    /// Bound right-hand side at `n` for the configured problem.
    pub fn bound(&self, n: usize, replicate: usize) -> Result<BoundReport> {
        let (model_seed, ..) = self.cell_seeds(n, replicate);
        match &self.problem {
            ProblemSpec::FiniteClass { classes, .. } => {
                let w = vec![1.0 / *classes as f64; *classes];
                // The Bayes direction is in the class.
                bound_rhs_finite(&self.constants, n, &w, 0, 0.0)
            }
            ProblemSpec::GaussianLinear { model, sigma } => {
                let star = self.sparse_model(model, model_seed)?.theta_star;
                bound_rhs_gaussian(&self.constants, model.d, star.dot(&star), *sigma, n, canonical_gaussian_s(n, model.d))
            }
            ProblemSpec::SparseLinear { model, tau, c1 } => {
                let star = self.sparse_model(model, model_seed)?.theta_star;
                let (tau, c1) = sparse_prior_params(model, &star, n, *tau, *c1);
                bound_rhs_sparse(&self.constants, model.d, model.s_star, c1, model.c_x(), n, tau, None)
            }
            ProblemSpec::MatComp { model, a, .. } => bound_rhs_matcomp(model.r, model.d1, model.d2, n, *a, model.b_inf, &self.constants),
        }
    }

    /// The prior used at sample size `n` (vector problems).
    pub fn vector_prior(&self, n: usize, replicate: usize) -> Result<Option<PriorSpec>> {
        let (model_seed, ..) = self.cell_seeds(n, replicate);
        Ok(match &self.problem {
            ProblemSpec::GaussianLinear { model, sigma } => Some(PriorSpec::IsotropicGaussian { sigma: *sigma, d: model.d }),
            ProblemSpec::SparseLinear { model, tau, c1 } => {
                let star = self.sparse_model(model, model_seed)?.theta_star;
                let (tau, c1) = sparse_prior_params(model, &star, n, *tau, *c1);
                Some(PriorSpec::ScaledStudent { tau, c1, d: model.d })
            }
            _ => None,
        })
    }
}

fn sparse_prior_params(model: &SparseModelSpec, star: &Array1<f64>, n: usize, tau: Option<f64>, c1: Option<f64>) -> (f64, f64) {
    let tau = tau.unwrap_or_else(|| canonical_sparse_tau(model.c_x(), n, model.d));
    let l1: f64 = star.iter().map(|v| v.abs()).sum();
    let c1 = c1.unwrap_or(2.0 * l1 + 4.0 * model.d as f64 * tau);
    (tau, c1)
}

/// Result of one `(n, replicate)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub excess_randomized: f64,
    pub excess_mean_estimator: f64,
    pub bound_rhs: f64,
    /// Chain acceptance rate; absent for exact and variational fits.
    pub acceptance_rate: Option<f64>,
}

/// Per-`n` aggregate over replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    pub replicates: usize,
    pub mean_randomized: f64,
    pub se_randomized: f64,
    pub mean_estimator: f64,
    pub se_estimator: f64,
    pub bound_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub points: Vec<RatePoint>,
    /// Fit of the randomized-classifier column.
    pub fit_randomized: Option<RateFit>,
    pub fit_mean_estimator: Option<RateFit>,
    pub bound_comparison: Option<BoundComparison>,
    /// Sizes where the mean-classifier excess exceeds twice the randomized
    /// excess plus two standard errors.
    pub guard_flags: Vec<usize>,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub cells: Vec<CellResult>,
    pub failures: Vec<FailureRecord>,
    pub report: RateReport,
}

/// Averages draws' excess over an evenly spaced subset of draws.
fn randomized_excess<F>(draws: &[ParamPoint], eval_draws: usize, excess: F) -> Result<f64>
where
    F: Fn(&ParamPoint) -> Result<f64>,
{
    if draws.is_empty() {
        return Err(Error::Empty("posterior samples"));
    }
    let k = eval_draws.min(draws.len());
    let mut acc = 0.0;
    for t in 0..k {
        let idx = (t * draws.len()) / k;
        acc += excess(&draws[idx])?;
    }
    Ok(acc / k as f64)
}

/// Excess risk of a predictor: exact when the model has a closed form,
/// otherwise on a fixed test set.
fn model_excess<M: ClassificationModel>(model: &M, test: Option<&TestSet>, p: &ParamPoint) -> Result<f64> {
    match model.exact_excess(p) {
        Some(r) => r,
        None => test.expect("test set built when no closed form exists").excess(p),
    }
}

fn finite_class(classes: usize, star: &Array1<f64>) -> Vec<ParamPoint> {
    let base = star[1].atan2(star[0]);
    (0..classes)
        .map(|m| {
            let phi = base + 2.0 * PI * m as f64 / classes as f64;
            ParamPoint::Vector(array![phi.cos(), phi.sin()])
        })
        .collect()
}

fn weighted_mean(points: &[ParamPoint], w: &[f64]) -> ParamPoint {
    let mut acc = Array1::<f64>::zeros(2);
    for (p, wi) in points.iter().zip(w) {
        acc.scaled_add(*wi, p.as_vector().expect("finite class is linear"));
    }
    ParamPoint::Vector(acc)
}

/// Runs one cell. Errors carry no context; the caller adds it.
pub fn run_cell(spec: &ExperimentSpec, n: usize, replicate: usize) -> Result<CellResult> {
    let (model_seed, data_seed, chain_seed, test_seed) = spec.cell_seeds(n, replicate);
    let data = spec.dataset(n, replicate)?;
    let bound_rhs = spec.bound(n, replicate)?.total;
    let lambda = spec.lambda(n);
    let eval_draws = spec.eval.eval_draws;
    let mut acceptance_rate = None;
    let (excess_randomized, excess_mean_estimator) = match &spec.problem {
        ProblemSpec::FiniteClass { classes, h } => {
            let model = spec.sparse_model(&spec.finite_model_spec(*h), model_seed)?;
            let thetas = finite_class(*classes, &model.theta_star);
            let uniform = vec![1.0 / *classes as f64; *classes];
            let w = exact_finite_posterior(&thetas, &uniform, &data, spec.loss, lambda)?;
            let mut rand = 0.0;
            for (t, wi) in thetas.iter().zip(&w) {
                rand += wi * model_excess(&model, None, t)?;
            }
            (rand, model_excess(&model, None, &weighted_mean(&thetas, &w))?)
        }
        ProblemSpec::GaussianLinear { model, .. } | ProblemSpec::SparseLinear { model, .. } => {
            let sm = spec.sparse_model(model, model_seed)?;
            let test = match model.feature_law {
                FeatureLaw::UnitSphere => None,
                FeatureLaw::RademacherGrid => Some(sm.test_set(spec.eval.n_test, &mut rng_from_seed(test_seed))?),
            };
            let prior = spec.vector_prior(n, replicate)?.expect("vector problem");
            let samples = run_chains(&spec.gibbs_config(n, chain_seed), spec.sampler.chains, &data, spec.loss, &prior)?;
            acceptance_rate = Some(samples.acceptance_rate);
            let rand = randomized_excess(&samples.draws, eval_draws, |p| model_excess(&sm, test.as_ref(), p))?;
            (rand, model_excess(&sm, test.as_ref(), &posterior_mean(&samples)?)?)
        }
        ProblemSpec::MatComp {
            model,
            a,
            b,
            gamma_kind,
            method,
        } => {
            let mm = MatCompModel::new(model.clone(), &mut rng_from_seed(model_seed))?;
            let prior = spec.matcomp_prior(model, *a, *b, *gamma_kind);
            match method {
                MatCompMethod::Mcmc => {
                    let samples = matcomp_samples(spec, n, chain_seed, &data, &prior)?;
                    acceptance_rate = Some(samples.acceptance_rate);
                    let rand = randomized_excess(&samples.draws, eval_draws, |p| model_excess(&mm, None, p))?;
                    (rand, model_excess(&mm, None, &posterior_mean(&samples)?)?)
                }
                MatCompMethod::Vb => {
                    let init = VBFamilySpec::init(&prior, 0.1, 0.1, chain_seed)?;
                    let fit = vb_fit(&data, &prior, lambda, &init, spec.sampler.vb_max_iters, spec.sampler.vb_tol)?;
                    let draws = vb_draws(&fit.family, eval_draws, derive_seed(chain_seed, stream::EVAL, 0));
                    let rand = randomized_excess(&draws, eval_draws, |p| model_excess(&mm, None, p))?;
                    let mean = ParamPoint::Matrix(fit.family.mean_matrix());
                    (rand, model_excess(&mm, None, &mean)?)
                }
            }
        }
    };
    Ok(CellResult {
        n,
        replicate,
        seed: data_seed,
        excess_randomized,
        excess_mean_estimator,
        bound_rhs,
        acceptance_rate,
    })
}

fn matcomp_samples(spec: &ExperimentSpec, n: usize, seed: u64, data: &Dataset, prior: &PriorSpec) -> Result<PosteriorSamples> {
    let runs = (0..spec.sampler.chains)
        .map(|c| {
            let cfg = spec.gibbs_config(n, derive_seed(seed, stream::CHAIN, c as u64));
            matcomp_chain(&cfg, data, prior)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = runs[0].clone();
    for r in &runs[1..] {
        out.draws.extend(r.draws.iter().cloned());
        out.log_unnorm_target.extend(&r.log_unnorm_target);
    }
    out.acceptance_rate = runs.iter().map(|r| r.acceptance_rate).sum::<f64>() / runs.len() as f64;
    Ok(out)
}

/// Matrices `L R^T` drawn from the variational law of the factors.
fn vb_draws(q: &VBFamilySpec, count: usize, seed: u64) -> Vec<ParamPoint> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rng_from_seed(seed);
    (0..count)
        .map(|_| {
            let mut draw = |m: &ndarray::Array2<f64>, v: &ndarray::Array2<f64>| {
                ndarray::Array2::from_shape_fn(m.dim(), |ij| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m[ij] + v[ij].sqrt() * z
                })
            };
            let l = draw(&q.m_l, &q.v_l);
            let r = draw(&q.m_r, &q.v_r);
            ParamPoint::Matrix(l.dot(&r.t()))
        })
        .collect()
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Aggregates successful cells into per-`n` points, rate fits and the
/// bound comparison.
pub fn assemble_report(n_grid: &[usize], cells: &[CellResult]) -> RateReport {
    let mut points = Vec::new();
    for &n in n_grid {
        let at_n: Vec<&CellResult> = cells.iter().filter(|c| c.n == n).collect();
        if at_n.is_empty() {
            continue;
        }
        let rand: Vec<f64> = at_n.iter().map(|c| c.excess_randomized).collect();
        let mean: Vec<f64> = at_n.iter().map(|c| c.excess_mean_estimator).collect();
        let (mr, sr) = mean_se(&rand);
        let (me, se) = mean_se(&mean);
        points.push(RatePoint {
            n,
            replicates: at_n.len(),
            mean_randomized: mr,
            se_randomized: sr,
            mean_estimator: me,
            se_estimator: se,
            bound_rhs: at_n[0].bound_rhs,
        });
    }
    let fit = |f: fn(&RatePoint) -> (f64, f64)| {
        let pts: Vec<(usize, f64, f64)> = points
            .iter()
            .map(|p| {
                let (m, s) = f(p);
                (p.n, m, s)
            })
            .collect();
        fit_rate(&pts).ok()
    };
    let fit_randomized = fit(|p| (p.mean_randomized, p.se_randomized));
    let fit_mean_estimator = fit(|p| (p.mean_estimator, p.se_estimator));
    let cmp: Vec<(usize, f64, f64)> = points.iter().map(|p| (p.n, p.mean_randomized, p.bound_rhs)).collect();
    let guard_flags = points
        .iter()
        .filter(|p| p.mean_estimator > 2.0 * p.mean_randomized + 2.0 * (p.se_randomized + p.se_estimator))
        .map(|p| p.n)
        .collect();
    RateReport {
        fit_randomized,
        fit_mean_estimator,
        bound_comparison: compare_bound(&cmp).ok(),
        points,
        guard_flags,
    }
}

/// Runs every `(n, replicate)` cell in parallel. Cell results are collected
/// in grid order, so output does not depend on scheduling. Failed cells are
/// recorded with their seeds and excluded from the aggregates.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = spec
        .n_grid
        .iter()
        .flat_map(|&n| (0..spec.replicates).map(move |r| (n, r)))
        .collect();
    let results: Vec<std::result::Result<CellResult, FailureRecord>> = jobs
        .par_iter()
        .map(|&(n, r)| {
            run_cell(spec, n, r).map_err(|e| {
                let seed = spec.cell_seeds(n, r).1;
                FailureRecord::from_error(&Error::Cell {
                    n,
                    replicate: r,
                    seed,
                    source: Box::new(e),
                })
            })
        })
        .collect();
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(c) => cells.push(c),
            Err(f) => failures.push(f),
        }
    }
    let report = assemble_report(&spec.n_grid, &cells);
    Ok(ExperimentOutcome { cells, failures, report })
}

/// A single posterior fit at `(n, replicate)`.
pub enum Fit {
    Exact { thetas: Vec<ParamPoint>, weights: Vec<f64> },
    Samples(PosteriorSamples),
    Variational(crate::matcomp::VBFit),
}

impl Fit {
    /// Posterior-mean predictor.
    pub fn mean(&self) -> Result<ParamPoint> {
        match self {
            Fit::Exact { thetas, weights } => Ok(weighted_mean(thetas, weights)),
            Fit::Samples(s) => posterior_mean(s),
            Fit::Variational(v) => Ok(ParamPoint::Matrix(v.family.mean_matrix())),
        }
    }
}

pub fn fit_single(spec: &ExperimentSpec, n: usize, replicate: usize) -> Result<(Dataset, Fit)> {
    spec.validate()?;
    let (model_seed, _, chain_seed, _) = spec.cell_seeds(n, replicate);
    let data = spec.dataset(n, replicate)?;
    let lambda = spec.lambda(n);
    let fit = match &spec.problem {
        ProblemSpec::FiniteClass { classes, h } => {
            let model = spec.sparse_model(&spec.finite_model_spec(*h), model_seed)?;
            let thetas = finite_class(*classes, &model.theta_star);
            let uniform = vec![1.0 / *classes as f64; *classes];
            let weights = exact_finite_posterior(&thetas, &uniform, &data, spec.loss, lambda)?;
            Fit::Exact { thetas, weights }
        }
        ProblemSpec::GaussianLinear { .. } | ProblemSpec::SparseLinear { .. } => {
            let prior = spec.vector_prior(n, replicate)?.expect("vector problem");
            Fit::Samples(run_chains(&spec.gibbs_config(n, chain_seed), spec.sampler.chains, &data, spec.loss, &prior)?)
        }
        ProblemSpec::MatComp {
            model,
            a,
            b,
            gamma_kind,
            method,
        } => {
            let prior = spec.matcomp_prior(model, *a, *b, *gamma_kind);
            match method {
                MatCompMethod::Mcmc => Fit::Samples(matcomp_samples(spec, n, chain_seed, &data, &prior)?),
                MatCompMethod::Vb => {
                    let init = VBFamilySpec::init(&prior, 0.1, 0.1, chain_seed)?;
                    Fit::Variational(vb_fit(&data, &prior, lambda, &init, spec.sampler.vb_max_iters, spec.sampler.vb_tol)?)
                }
            }
        }
    };
    Ok((data, fit))
}
