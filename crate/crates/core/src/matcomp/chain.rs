//! Metropolis-within-blocks sampler of the hinge Gibbs posterior over
//! `(L, R, gamma)`.

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{low_rank_params, Observations};
use crate::data::{Dataset, FactorState, ParamPoint};
use crate::error::{domain, Error, Result};
use crate::gibbs::{finish, Adapter, GibbsConfig, PosteriorSamples};
use crate::losses::Loss;
use crate::priors::{gamma_log_density, sample_prior, GammaKind, PriorSpec};
use crate::seed::rng_from_seed;

/// Acceptance target for the row and variance blocks.
const BLOCK_TARGET: f64 = 0.3;

struct Target<'a> {
    obs: &'a Observations,
    lambda_over_n: f64,
    hinge: Loss,
    a: f64,
    b: f64,
    kind: GammaKind,
    /// `d1 + d2`: number of Gaussian factor entries per column.
    dims: f64,
}

impl Target<'_> {
    fn row_loss(&self, row: ArrayView1<'_, f64>, others: &ndarray::Array2<f64>, list: &[(usize, f64)]) -> f64 {
        list.iter()
            .map(|&(o, y)| self.hinge.at_margin(y * row.dot(&others.row(o))))
            .sum()
    }

    fn log_target(&self, s: &FactorState) -> f64 {
        let loss: f64 = self
            .obs
            .by_row
            .iter()
            .enumerate()
            .map(|(i, list)| self.row_loss(s.l.row(i), &s.r, list))
            .sum();
        let mut lp = -self.lambda_over_n * loss;
        for (k, &g) in s.gamma.iter().enumerate() {
            let ss = column_ss(s, k);
            lp += gamma_log_density(self.kind, self.a, self.b, g) - 0.5 * self.dims * g.ln() - ss / (2.0 * g);
        }
        lp
    }
}

fn column_ss(s: &FactorState, k: usize) -> f64 {
    s.l.column(k).iter().chain(s.r.column(k).iter()).map(|v| v * v).sum()
}

/// Random-walk Metropolis over rows of `L`, rows of `R` and `log gamma_k`,
/// in that order within each sweep. One step of `config` is one sweep.
pub fn matcomp_chain(config: &GibbsConfig, data: &Dataset, prior: &PriorSpec) -> Result<PosteriorSamples> {
    config.validate()?;
    let (d1, d2, k, a, b, kind) = low_rank_params(prior)?;
    let obs = Observations::new(data, d1, d2)?;
    let mut rng = rng_from_seed(config.seed);
    let init = match &config.init {
        Some(p) => p.clone(),
        None => sample_prior(prior, &mut rng)?,
    };
    let ParamPoint::Factors(mut state) = init else {
        return Err(domain("warm start must be a factor state"));
    };
    if state.l.dim() != (d1, k) || state.r.dim() != (d2, k) || state.gamma.len() != k {
        return Err(Error::DimensionMismatch {
            expected: (d1 + d2 + 1) * k,
            found: state.l.len() + state.r.len() + state.gamma.len(),
        });
    }
    let blocks = d1 + d2 + k;
    let log_scales = match &config.preconditioner {
        Some(p) if p.len() != blocks => {
            return Err(Error::DimensionMismatch {
                expected: blocks,
                found: p.len(),
            })
        }
        Some(p) => p.iter().map(|v| (v * config.proposal_scale).ln()).collect(),
        None => {
            let mut s = vec![config.proposal_scale.ln(); d1 + d2];
            // Conditional law of log gamma_k has spread ~ sqrt(2 / (d1 + d2)).
            s.extend(std::iter::repeat_n((2.4 * (2.0 / (d1 + d2) as f64).sqrt()).ln(), k));
            s
        }
    };
    let mut adapter = Adapter {
        log_scales,
        target: BLOCK_TARGET,
    };
    let target = Target {
        obs: &obs,
        lambda_over_n: config.lambda / obs.n as f64,
        hinge: Loss::hinge(),
        a,
        b,
        kind,
        dims: (d1 + d2) as f64,
    };

    let (mut accepted, mut proposed) = (0u64, 0u64);
    let mut draws = Vec::new();
    let mut logs = Vec::new();
    let mut proposal = Array1::<f64>::zeros(k);
    for step in 0..config.n_steps {
        let adapting = config.adapt && step < config.burn_in;
        // Rows of L, then rows of R.
        for side in 0..2 {
            let rows = if side == 0 { d1 } else { d2 };
            for i in 0..rows {
                let block = if side == 0 { i } else { d1 + i };
                let scale = adapter.log_scales[block].exp();
                let (own, other, list) = if side == 0 {
                    (&mut state.l, &state.r, &obs.by_row[i])
                } else {
                    (&mut state.r, &state.l, &obs.by_col[i])
                };
                let current = own.row(i);
                for c in 0..k {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    proposal[c] = current[c] + scale * z;
                }
                let d_prior: f64 = (0..k)
                    .map(|c| -(proposal[c] * proposal[c] - current[c] * current[c]) / (2.0 * state.gamma[c]))
                    .sum();
                let d_loss = target.row_loss(proposal.view(), other, list) - target.row_loss(current, other, list);
                let ok = rng.random::<f64>().ln() < d_prior - target.lambda_over_n * d_loss;
                if ok {
                    own.row_mut(i).assign(&proposal);
                }
                proposed += 1;
                accepted += ok as u64;
                if adapting {
                    adapter.update(block, ok, step);
                }
            }
        }
        // Variances on the log scale; the log-Jacobian is log g' - log g.
        for c in 0..k {
            let block = d1 + d2 + c;
            let ss = column_ss(&state, c);
            let g = state.gamma[c];
            let z: f64 = StandardNormal.sample(&mut rng);
            let g_new = g * (adapter.log_scales[block].exp() * z).exp();
            let ok = if g_new > 0.0 && g_new.is_finite() {
                let log_cond = |v: f64| gamma_log_density(kind, a, b, v) - 0.5 * target.dims * v.ln() - ss / (2.0 * v) + v.ln();
                rng.random::<f64>().ln() < log_cond(g_new) - log_cond(g)
            } else {
                false
            };
            if ok {
                state.gamma[c] = g_new;
            }
            proposed += 1;
            accepted += ok as u64;
            if adapting {
                adapter.update(block, ok, step);
            }
        }
        if config.keeps(step) {
            logs.push(target.log_target(&state));
            draws.push(ParamPoint::Factors(state.clone()));
        }
    }
    finish(draws, logs, accepted, proposed, &adapter)
}
