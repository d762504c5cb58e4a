//! Gibbs posterior `exp(-lambda r_n(theta)) pi(dtheta) / Z`.
//!
//! On a finite class the posterior is computed exactly. On `R^d` it is
//! sampled with random-walk Metropolis: either joint Gaussian proposals or
//! one-coordinate-at-a-time sweeps, which keep the per-update cost at
//! `O(n)` by updating the score vector incrementally.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundConstants;
use crate::data::{Dataset, Design, ParamPoint};
use crate::error::{domain, Error, Result};
use crate::losses::{empirical_risk, Loss};
use crate::priors::{log_density_unnormalized, sample_prior, student_log_density_coord, PriorSpec};
use crate::seed::{derive_seed, rng_from_seed, stream};

/// Chains whose overall acceptance rate falls below this fail diagnostics.
pub const MIN_ACCEPTANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ProposalScheme {
    /// One Gaussian move of the whole vector per step.
    #[default]
    Joint,
    /// A sweep of single-coordinate Gaussian moves per step.
    Coordinatewise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    /// Inverse temperature.
    pub lambda: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub proposal_scale: f64,
    #[serde(default = "one")]
    pub thin: usize,
    pub seed: u64,
    #[serde(default)]
    pub scheme: ProposalScheme,
    /// Tune proposal scales towards a target acceptance during burn-in.
    /// Scales are frozen afterwards.
    #[serde(default)]
    pub adapt: bool,
    /// Per-coordinate multipliers of `proposal_scale`.
    #[serde(default)]
    pub preconditioner: Option<Vec<f64>>,
    /// Warm start; a prior draw when absent.
    #[serde(default)]
    pub init: Option<ParamPoint>,
    /// Coordinatewise scheme only: probability that a coordinate move uses
    /// the fixed `jump_scale` instead of its tuned scale. The mixture weights
    /// do not depend on the state, so the proposal stays symmetric; large
    /// jumps let coordinates cross the spike of a sharply peaked prior.
    #[serde(default)]
    pub jump_prob: f64,
    #[serde(default = "unit_scale")]
    pub jump_scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

fn one() -> usize {
    1
}

impl GibbsConfig {
    pub fn new(lambda: f64, n_steps: usize, burn_in: usize, proposal_scale: f64, seed: u64) -> Self {
        Self {
            lambda,
            n_steps,
            burn_in,
            proposal_scale,
            thin: 1,
            seed,
            scheme: ProposalScheme::Joint,
            adapt: false,
            preconditioner: None,
            init: None,
            jump_prob: 0.0,
            jump_scale: 1.0,
        }
    }

    /// `lambda = n / C_bar`.
    pub fn from_constants(n: usize, constants: &BoundConstants, n_steps: usize, burn_in: usize, proposal_scale: f64, seed: u64) -> Self {
        Self::new(constants.lambda(n), n_steps, burn_in, proposal_scale, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be finite and nonnegative, got {}", self.lambda)));
        }
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be positive".into()));
        }
        if self.burn_in >= self.n_steps {
            return Err(Error::Config(format!(
                "burn_in {} must be below n_steps {}",
                self.burn_in, self.n_steps
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be positive".into()));
        }
        if !(self.proposal_scale > 0.0) || !self.proposal_scale.is_finite() {
            return Err(Error::Config("proposal_scale must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.jump_prob) {
            return Err(Error::Config("jump_prob must lie in [0, 1]".into()));
        }
        if !(self.jump_scale > 0.0) || !self.jump_scale.is_finite() {
            return Err(Error::Config("jump_scale must be positive".into()));
        }
        if let Some(p) = &self.preconditioner {
            if p.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::Config("preconditioner entries must be positive".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn keeps(&self, step: usize) -> bool {
        step >= self.burn_in && (step - self.burn_in) % self.thin == 0
    }
}

/// `2.4 / sqrt(d)` times a scale estimate of the target.
pub fn default_proposal_scale(d: usize, init_scale: f64) -> f64 {
    2.4 / (d.max(1) as f64).sqrt() * init_scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub draws: Vec<ParamPoint>,
    pub log_unnorm_target: Vec<f64>,
    pub acceptance_rate: f64,
    /// Proposal scales in force after burn-in.
    pub final_scales: Vec<f64>,
}

pub fn log_gibbs_unnormalized(theta: &ParamPoint, data: &Dataset, loss: Loss, prior: &PriorSpec, lambda: f64) -> Result<f64> {
    let lp = log_density_unnormalized(prior, theta)?;
    if lambda == 0.0 {
        return Ok(lp);
    }
    Ok(-lambda * empirical_risk(loss, data, theta)? + lp)
}

/// Normalised Gibbs weights from risks, computed with log-sum-exp.
pub fn gibbs_weights(risks: &[f64], prior_weights: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if risks.is_empty() {
        return Err(Error::Empty("parameter set"));
    }
    if risks.len() != prior_weights.len() {
        return Err(Error::DimensionMismatch {
            expected: risks.len(),
            found: prior_weights.len(),
        });
    }
    if prior_weights.iter().any(|w| !(*w > 0.0)) {
        return Err(domain("prior weights must be positive"));
    }
    let sum: f64 = prior_weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(domain(format!("prior weights sum to {sum}, not 1")));
    }
    let logs: Vec<f64> = risks
        .iter()
        .zip(prior_weights)
        .map(|(r, w)| -lambda * r + w.ln())
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    Ok(logs.iter().map(|l| (l - max).exp() / z).collect())
}

pub fn exact_finite_posterior(
    thetas: &[ParamPoint],
    prior_weights: &[f64],
    data: &Dataset,
    loss: Loss,
    lambda: f64,
) -> Result<Vec<f64>> {
    if thetas.is_empty() {
        return Err(Error::Empty("parameter set"));
    }
    let risks = thetas
        .iter()
        .map(|t| empirical_risk(loss, data, t))
        .collect::<Result<Vec<_>>>()?;
    gibbs_weights(&risks, prior_weights, lambda)
}

/// Incrementally maintained target `-lambda r_n(theta) + log pi(theta)`.
struct LinearTarget<'a> {
    xt: Array2<f64>,
    labels: &'a [f64],
    loss: Loss,
    lambda_over_n: f64,
    prior: &'a PriorSpec,
}

impl LinearTarget<'_> {
    fn loss_sum(&self, scores: &[f64]) -> f64 {
        self.labels.iter().zip(scores).map(|(y, s)| self.loss.at_margin(y * s)).sum()
    }

    fn prior_log(&self, theta: &Array1<f64>) -> Option<f64> {
        log_density_unnormalized(self.prior, &ParamPoint::Vector(theta.clone())).ok()
    }

    fn prior_coord(&self, x: f64) -> f64 {
        match *self.prior {
            PriorSpec::IsotropicGaussian { sigma, .. } => -x * x / (2.0 * sigma * sigma),
            PriorSpec::ScaledStudent { tau, .. } => student_log_density_coord(tau, x),
            PriorSpec::LowRankHier { .. } => unreachable!("vector chains reject factor priors"),
        }
    }

    fn l1_cap(&self) -> f64 {
        match *self.prior {
            PriorSpec::ScaledStudent { c1, .. } => c1,
            _ => f64::INFINITY,
        }
    }

    fn scores(&self, theta: &Array1<f64>) -> Vec<f64> {
        self.xt.t().dot(theta).to_vec()
    }
}

/// Robbins-Monro tuning of log proposal scales towards a target acceptance.
pub(crate) struct Adapter {
    pub(crate) log_scales: Vec<f64>,
    pub(crate) target: f64,
}

impl Adapter {
    pub(crate) fn update(&mut self, j: usize, accepted: bool, step: usize) {
        let rate = 1.0 / ((step + 1) as f64).powf(0.6);
        let hit = if accepted { 1.0 } else { 0.0 };
        self.log_scales[j] = (self.log_scales[j] + rate * (hit - self.target)).clamp(-40.0, 10.0);
    }
}

/// Random-walk Metropolis chain on a vector parameter.
pub fn run_chain(config: &GibbsConfig, data: &Dataset, loss: Loss, prior: &PriorSpec) -> Result<PosteriorSamples> {
    config.validate()?;
    prior.validate()?;
    if !loss.is_surrogate() {
        return Err(Error::NotSurrogate);
    }
    if matches!(prior, PriorSpec::LowRankHier { .. }) {
        return Err(domain("factor priors are sampled by the matrix-completion chain"));
    }
    let Design::Dense(x) = data.design() else {
        return Err(domain("linear chain needs a dense design"));
    };
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let d = x.ncols();
    if prior.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: prior.dim(),
        });
    }
    let mut rng = rng_from_seed(config.seed);
    let init = match &config.init {
        Some(p) => p.clone(),
        None => sample_prior(prior, &mut rng)?,
    };
    let ParamPoint::Vector(mut theta) = init else {
        return Err(domain("warm start must be a vector"));
    };
    if theta.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: theta.len(),
        });
    }
    let base = match &config.preconditioner {
        Some(p) if p.len() != d => {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            })
        }
        Some(p) => p.iter().map(|v| (v * config.proposal_scale).ln()).collect(),
        None => vec![config.proposal_scale.ln(); d],
    };
    let target = LinearTarget {
        xt: x.t().as_standard_layout().into_owned(),
        labels: data.labels(),
        loss,
        lambda_over_n: config.lambda / data.len() as f64,
        prior,
    };
    let mut adapter = Adapter {
        target: match config.scheme {
            ProposalScheme::Joint => 0.234,
            ProposalScheme::Coordinatewise => 0.44,
        },
        log_scales: base,
    };
    match config.scheme {
        ProposalScheme::Joint => joint_chain(config, &target, &mut theta, &mut adapter, &mut rng),
        ProposalScheme::Coordinatewise => coordinate_chain(config, &target, &mut theta, &mut adapter, &mut rng),
    }
}

pub(crate) fn finish(draws: Vec<ParamPoint>, logs: Vec<f64>, accepted: u64, proposed: u64, adapter: &Adapter) -> Result<PosteriorSamples> {
    let acceptance_rate = accepted as f64 / proposed.max(1) as f64;
    if acceptance_rate < MIN_ACCEPTANCE {
        return Err(Error::Diagnostics {
            acceptance_rate,
            threshold: MIN_ACCEPTANCE,
        });
    }
    Ok(PosteriorSamples {
        draws,
        log_unnorm_target: logs,
        acceptance_rate,
        final_scales: adapter.log_scales.iter().map(|l| l.exp()).collect(),
    })
}

fn joint_chain<R: Rng>(
    config: &GibbsConfig,
    target: &LinearTarget<'_>,
    theta: &mut Array1<f64>,
    adapter: &mut Adapter,
    rng: &mut R,
) -> Result<PosteriorSamples> {
    let prior_lp = target
        .prior_log(theta)
        .ok_or_else(|| Error::Support("chain initialised outside prior support".into()))?;
    let mut log_t = -target.lambda_over_n * target.loss_sum(&target.scores(theta)) + prior_lp;
    let (mut accepted, mut proposed) = (0u64, 0u64);
    let mut draws = Vec::new();
    let mut logs = Vec::new();
    for step in 0..config.n_steps {
        let proposal = Array1::from_shape_fn(theta.len(), |j| {
            let z: f64 = StandardNormal.sample(rng);
            theta[j] + adapter.log_scales[j].exp() * z
        });
        proposed += 1;
        // Proposals outside the support are rejected through the support error.
        let ok = match target.prior_log(&proposal) {
            Some(plp) => {
                let lt = -target.lambda_over_n * target.loss_sum(&target.scores(&proposal)) + plp;
                if rng.random::<f64>().ln() < lt - log_t {
                    *theta = proposal;
                    log_t = lt;
                    true
                } else {
                    false
                }
            }
            None => false,
        };
        accepted += ok as u64;
        if config.adapt && step < config.burn_in {
            let rate = 1.0 / ((step + 1) as f64).powf(0.6);
            let shift = rate * (if ok { 1.0 } else { 0.0 } - adapter.target);
            for l in adapter.log_scales.iter_mut() {
                *l = (*l + shift).clamp(-40.0, 10.0);
            }
        }
        if config.keeps(step) {
            draws.push(ParamPoint::Vector(theta.clone()));
            logs.push(log_t);
        }
    }
    finish(draws, logs, accepted, proposed, adapter)
}

fn coordinate_chain<R: Rng>(
    config: &GibbsConfig,
    target: &LinearTarget<'_>,
    theta: &mut Array1<f64>,
    adapter: &mut Adapter,
    rng: &mut R,
) -> Result<PosteriorSamples> {
    let prior_lp = target
        .prior_log(theta)
        .ok_or_else(|| Error::Support("chain initialised outside prior support".into()))?;
    let mut scores = target.scores(theta);
    let mut loss_sum = target.loss_sum(&scores);
    let mut prior_lp = prior_lp;
    let mut l1: f64 = theta.iter().map(|v| v.abs()).sum();
    let cap = target.l1_cap();
    let labels = target.labels;
    let (mut accepted, mut proposed) = (0u64, 0u64);
    let mut draws = Vec::new();
    let mut logs = Vec::new();
    let d = theta.len();
    for step in 0..config.n_steps {
        for j in 0..d {
            let z: f64 = StandardNormal.sample(rng);
            let old = theta[j];
            let jump = config.jump_prob > 0.0 && rng.random::<f64>() < config.jump_prob;
            let scale = if jump { config.jump_scale } else { adapter.log_scales[j].exp() };
            let new = old + scale * z;
            proposed += 1;
            let new_l1 = l1 - old.abs() + new.abs();
            let mut ok = false;
            if new_l1 <= cap {
                let col = target.xt.row(j);
                let delta = new - old;
                let col = col.as_slice().expect("standard layout");
                let mut d_loss = 0.0;
                for ((y, s), xij) in labels.iter().zip(&scores).zip(col) {
                    if *xij != 0.0 {
                        d_loss += target.loss.at_margin(y * (s + delta * xij)) - target.loss.at_margin(y * s);
                    }
                }
                let d_prior = target.prior_coord(new) - target.prior_coord(old);
                let d_log = -target.lambda_over_n * d_loss + d_prior;
                if rng.random::<f64>().ln() < d_log {
                    theta[j] = new;
                    for (s, xij) in scores.iter_mut().zip(col) {
                        *s += delta * xij;
                    }
                    loss_sum += d_loss;
                    prior_lp += d_prior;
                    l1 = new_l1;
                    ok = true;
                }
            }
            accepted += ok as u64;
            if config.adapt && step < config.burn_in && !jump {
                adapter.update(j, ok, step);
            }
        }
        if step + 1 == config.burn_in || (step + 1) % 64 == 0 {
            // Refresh accumulated sums against drift.
            scores = target.scores(theta);
            loss_sum = target.loss_sum(&scores);
            l1 = theta.iter().map(|v| v.abs()).sum();
        }
        if config.keeps(step) {
            draws.push(ParamPoint::Vector(theta.clone()));
            logs.push(-target.lambda_over_n * loss_sum + prior_lp);
        }
    }
    finish(draws, logs, accepted, proposed, adapter)
}

/// Independent chains with seeds derived from `config.seed`, run in
/// parallel and concatenated in chain order.
pub fn run_chains(config: &GibbsConfig, chains: usize, data: &Dataset, loss: Loss, prior: &PriorSpec) -> Result<PosteriorSamples> {
    if chains == 0 {
        return Err(Error::Config("need at least one chain".into()));
    }
    let runs = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut cfg = config.clone();
            cfg.seed = derive_seed(config.seed, stream::CHAIN, c as u64);
            run_chain(&cfg, data, loss, prior)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = PosteriorSamples {
        draws: vec![],
        log_unnorm_target: vec![],
        acceptance_rate: 0.0,
        final_scales: runs[0].final_scales.clone(),
    };
    for r in &runs {
        out.draws.extend(r.draws.iter().cloned());
        out.log_unnorm_target.extend(&r.log_unnorm_target);
        out.acceptance_rate += r.acceptance_rate / chains as f64;
    }
    Ok(out)
}

/// Posterior mean. Factor draws are averaged through their products
/// `L R^T`, which are identifiable, and returned as a matrix.
pub fn posterior_mean(samples: &PosteriorSamples) -> Result<ParamPoint> {
    mean_of(&samples.draws)
}

pub fn mean_of(draws: &[ParamPoint]) -> Result<ParamPoint> {
    let first = draws.first().ok_or(Error::Empty("posterior samples"))?;
    let k = draws.len() as f64;
    match first {
        ParamPoint::Vector(v) => {
            let mut acc = Array1::<f64>::zeros(v.len());
            for p in draws {
                match p {
                    ParamPoint::Vector(v) if v.len() == acc.len() => acc += v,
                    _ => return Err(domain("mixed parameter kinds in samples")),
                }
            }
            Ok(ParamPoint::Vector(acc / k))
        }
        ParamPoint::Factors(_) | ParamPoint::Matrix(_) => {
            let shape = first.to_matrix().expect("matrix-valued").raw_dim();
            let mut acc = Array2::<f64>::zeros(shape);
            for p in draws {
                match p.to_matrix() {
                    Some(m) if m.raw_dim() == shape => acc += &m,
                    _ => return Err(domain("mixed parameter kinds in samples")),
                }
            }
            Ok(ParamPoint::Matrix(acc / k))
        }
    }
}
