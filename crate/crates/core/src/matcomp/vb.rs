//! Mean-field variational approximation of the hinge Gibbs posterior.
//!
//! The family factorises over every entry of `L` and `R` (Gaussian) and
//! every `gamma_k` (same kind as the prior). The objective
//! `lambda E_q r_n(L R^T) + KL(q || pi)` is minimised by block coordinate
//! descent: gradient steps with Armijo backtracking on each row of `L` and
//! `R`, then a closed-form (inverse-gamma) or profiled (gamma) update of
//! each variance factor. Every block update is accepted only if it lowers
//! the objective, so the objective trace is non-increasing.

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use super::{expected_hinge_gaussian, low_rank_params, norm_cdf, norm_pdf, Observations};
use crate::data::Dataset;
use crate::error::{domain, Error, Result};
use crate::priors::{GammaKind, PriorSpec};
use crate::seed::rng_from_seed;

/// Relative slack allowed before an objective increase counts as failure.
const MONOTONE_SLACK: f64 = 1e-10;
/// Gradient steps per row block and sweep.
const INNER_STEPS: usize = 3;
const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

/// Parameters of the mean-field family. `gamma_alpha` is a shape; for the
/// gamma kind `gamma_beta` is a rate, for the inverse-gamma kind a scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VBFamilySpec {
    pub m_l: Array2<f64>,
    pub v_l: Array2<f64>,
    pub m_r: Array2<f64>,
    pub v_r: Array2<f64>,
    pub gamma_kind: GammaKind,
    pub gamma_alpha: Array1<f64>,
    pub gamma_beta: Array1<f64>,
}

impl VBFamilySpec {
    /// Means drawn `N(0, init_sd^2)`, variances `init_var`, and variance
    /// factors with `E[1/gamma] = 1/init_var`.
    pub fn init(prior: &PriorSpec, init_sd: f64, init_var: f64, seed: u64) -> Result<Self> {
        let (d1, d2, k, a, _, kind) = low_rank_params(prior)?;
        if !(init_sd > 0.0) || !(init_var > 0.0) {
            return Err(domain("initial spreads must be positive"));
        }
        let mut rng = rng_from_seed(seed);
        let normal = Normal::new(0.0, init_sd).map_err(|e| domain(e.to_string()))?;
        let mut draw = |rows: usize| Array2::from_shape_fn((rows, k), |_| normal.sample(&mut rng));
        let m_l = draw(d1);
        let m_r = draw(d2);
        let alpha = a + 0.5 * (d1 + d2) as f64;
        let beta = match kind {
            GammaKind::InverseGamma => alpha * init_var,
            GammaKind::Gamma => (alpha - 1.0).max(1e-3) / init_var,
        };
        let spec = Self {
            m_l,
            v_l: Array2::from_elem((d1, k), init_var),
            m_r,
            v_r: Array2::from_elem((d2, k), init_var),
            gamma_kind: kind,
            gamma_alpha: Array1::from_elem(k, alpha.max(1.0 + 1e-3)),
            gamma_beta: Array1::from_elem(k, beta),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.gamma_alpha.len();
        if self.m_l.dim() != self.v_l.dim() || self.m_r.dim() != self.v_r.dim() {
            return Err(domain("mean and variance shapes differ"));
        }
        if self.m_l.ncols() != k || self.m_r.ncols() != k || self.gamma_beta.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: self.m_l.ncols(),
            });
        }
        let positive = |x: &f64| *x > 0.0 && x.is_finite();
        if !self.v_l.iter().chain(self.v_r.iter()).all(positive) {
            return Err(domain("variational variances must be positive"));
        }
        if !self.gamma_alpha.iter().chain(self.gamma_beta.iter()).all(positive) {
            return Err(domain("variance-factor parameters must be positive"));
        }
        if self.gamma_kind == GammaKind::Gamma && self.gamma_alpha.iter().any(|a| *a <= 1.0) {
            return Err(domain("gamma variational shape must exceed 1 for E[1/gamma] to exist"));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.gamma_alpha.len()
    }

    /// `E_q[L R^T] = m_L m_R^T` under mean-field independence.
    pub fn mean_matrix(&self) -> Array2<f64> {
        self.m_l.dot(&self.m_r.t())
    }

    /// `E_q[1/gamma_k]`.
    pub fn e_inv_gamma(&self, k: usize) -> f64 {
        let (a, b) = (self.gamma_alpha[k], self.gamma_beta[k]);
        gamma_moments(self.gamma_kind, a, b).0
    }
}

/// `(E[1/gamma], E[log gamma])` for a gamma (rate) or inverse-gamma (scale)
/// law.
fn gamma_moments(kind: GammaKind, alpha: f64, beta: f64) -> (f64, f64) {
    match kind {
        GammaKind::Gamma => (beta / (alpha - 1.0), digamma(alpha) - beta.ln()),
        GammaKind::InverseGamma => (alpha / beta, beta.ln() - digamma(alpha)),
    }
}

/// `KL(Gamma(alpha, beta) || Gamma(a, b))` in shape/rate form; identical for
/// inverse-gamma laws in shape/scale form since inversion is a bijection.
pub(crate) fn kl_gamma(alpha: f64, beta: f64, a: f64, b: f64) -> f64 {
    (alpha - a) * digamma(alpha) - ln_gamma(alpha) + ln_gamma(a) + a * (beta.ln() - b.ln()) + alpha * (b - beta) / beta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VBFit {
    pub family: VBFamilySpec,
    /// Objective at initialisation followed by its value after each sweep.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl VBFit {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial value")
    }
}

struct Problem {
    obs: Observations,
    lambda_over_n: f64,
    a: f64,
    b: f64,
    kind: GammaKind,
    d1: usize,
    d2: usize,
    k: usize,
}

/// Mean and standard deviation of `y * (L R^T)_ij` under `q`.
#[inline]
fn score_moments(m: &[f64], v: &[f64], om: &[f64], ov: &[f64]) -> (f64, f64) {
    let mut mu = 0.0;
    let mut var = 0.0;
    for c in 0..m.len() {
        mu += m[c] * om[c];
        var += m[c] * m[c] * ov[c] + v[c] * om[c] * om[c] + v[c] * ov[c];
    }
    (mu, var.sqrt())
}

impl Problem {
    fn new(data: &Dataset, prior: &PriorSpec, lambda: f64) -> Result<Self> {
        let (d1, d2, k, a, b, kind) = low_rank_params(prior)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        let obs = Observations::new(data, d1, d2)?;
        Ok(Self {
            lambda_over_n: lambda / obs.n as f64,
            obs,
            a,
            b,
            kind,
            d1,
            d2,
            k,
        })
    }

    fn check_family(&self, q: &VBFamilySpec) -> Result<()> {
        q.validate()?;
        if q.m_l.dim() != (self.d1, self.k) || q.m_r.dim() != (self.d2, self.k) {
            return Err(Error::DimensionMismatch {
                expected: (self.d1 + self.d2) * self.k,
                found: q.m_l.len() + q.m_r.len(),
            });
        }
        if q.gamma_kind != self.kind {
            return Err(domain("variational and prior variance kinds differ"));
        }
        Ok(())
    }

    /// Terms of the objective that depend on one row of `L` (side 0) or `R`
    /// (side 1), up to additive constants.
    fn row_objective(&self, m: &[f64], v: &[f64], list: &[(usize, f64)], om: &Array2<f64>, ov: &Array2<f64>, einv: &[f64]) -> f64 {
        let mut data = 0.0;
        for &(o, y) in list {
            let (mu, s) = score_moments(m, v, om.row(o).as_slice().unwrap(), ov.row(o).as_slice().unwrap());
            data += expected_hinge_gaussian(y * mu, s);
        }
        let mut reg = 0.0;
        for c in 0..m.len() {
            reg += -0.5 * v[c].ln() + 0.5 * (m[c] * m[c] + v[c]) * einv[c];
        }
        self.lambda_over_n * data + reg
    }

    /// Gradient of [`Self::row_objective`] in `(m, log v)`.
    fn row_gradient(&self, m: &[f64], v: &[f64], list: &[(usize, f64)], om: &Array2<f64>, ov: &Array2<f64>, einv: &[f64], gm: &mut [f64], gu: &mut [f64]) {
        let k = m.len();
        gm.fill(0.0);
        gu.fill(0.0);
        for &(o, y) in list {
            let omr = om.row(o);
            let ovr = ov.row(o);
            let (omr, ovr) = (omr.as_slice().unwrap(), ovr.as_slice().unwrap());
            let (mu, s) = score_moments(m, v, omr, ovr);
            let t = (1.0 - y * mu) / s;
            let (cdf, pdf) = (norm_cdf(t), norm_pdf(t));
            for c in 0..k {
                gm[c] += -cdf * y * omr[c] + pdf * m[c] * ovr[c] / s;
                gu[c] += pdf * (omr[c] * omr[c] + ovr[c]) / (2.0 * s);
            }
        }
        for c in 0..k {
            gm[c] = self.lambda_over_n * gm[c] + m[c] * einv[c];
            gu[c] = v[c] * (self.lambda_over_n * gu[c] + 0.5 * einv[c]) - 0.5;
        }
    }

    fn objective(&self, q: &VBFamilySpec) -> f64 {
        let k = self.k;
        let mut total = 0.0;
        let mut data = 0.0;
        for (i, list) in self.obs.by_row.iter().enumerate() {
            let (m, v) = (q.m_l.row(i), q.v_l.row(i));
            let (m, v) = (m.as_slice().unwrap(), v.as_slice().unwrap());
            for &(j, y) in list {
                let (mu, s) = score_moments(m, v, q.m_r.row(j).as_slice().unwrap(), q.v_r.row(j).as_slice().unwrap());
                data += expected_hinge_gaussian(y * mu, s);
            }
        }
        total += self.lambda_over_n * data;
        let dims = (self.d1 + self.d2) as f64;
        for c in 0..k {
            let (einv, elog) = gamma_moments(self.kind, q.gamma_alpha[c], q.gamma_beta[c]);
            for (m, v) in q.m_l.column(c).iter().zip(q.v_l.column(c)).chain(q.m_r.column(c).iter().zip(q.v_r.column(c))) {
                total += -0.5 * v.ln() + 0.5 * (m * m + v) * einv - 0.5;
            }
            total += 0.5 * dims * elog + kl_gamma(q.gamma_alpha[c], q.gamma_beta[c], self.a, self.b);
        }
        total
    }

    /// Armijo gradient steps on one row block. `step` carries the last
    /// accepted step length between sweeps.
    fn update_row(&self, m: &mut [f64], v: &mut [f64], list: &[(usize, f64)], om: &Array2<f64>, ov: &Array2<f64>, einv: &[f64], step: &mut f64) {
        let k = m.len();
        let (mut gm, mut gu) = (vec![0.0; k], vec![0.0; k]);
        let (mut nm, mut nv) = (vec![0.0; k], vec![0.0; k]);
        let mut f = self.row_objective(m, v, list, om, ov, einv);
        for _ in 0..INNER_STEPS {
            self.row_gradient(m, v, list, om, ov, einv, &mut gm, &mut gu);
            let g2: f64 = gm.iter().chain(&gu).map(|g| g * g).sum();
            if g2 == 0.0 || !g2.is_finite() {
                return;
            }
            let mut eta = *step;
            let mut accepted = false;
            for _ in 0..MAX_HALVINGS {
                for c in 0..k {
                    nm[c] = m[c] - eta * gm[c];
                    nv[c] = (v[c].ln() - eta * gu[c]).clamp(-60.0, 30.0).exp();
                }
                let f_new = self.row_objective(&nm, &nv, list, om, ov, einv);
                if f_new.is_finite() && f_new <= f - ARMIJO_C * eta * g2 {
                    m.copy_from_slice(&nm);
                    v.copy_from_slice(&nv);
                    f = f_new;
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                return;
            }
            *step = (eta * 2.0).min(1e3);
        }
    }

    /// `sum_i (m_ic^2 + v_ic)` over both factors for column `c`.
    fn column_second_moment(q: &VBFamilySpec, c: usize) -> f64 {
        q.m_l.column(c).iter().zip(q.v_l.column(c)).chain(q.m_r.column(c).iter().zip(q.v_r.column(c))).map(|(m, v)| m * m + v).sum()
    }

    /// Terms of the objective that depend on `q(gamma_c)`.
    fn gamma_objective(&self, s2: f64, alpha: f64, beta: f64) -> f64 {
        let dims = (self.d1 + self.d2) as f64;
        let (einv, elog) = gamma_moments(self.kind, alpha, beta);
        0.5 * s2 * einv + 0.5 * dims * elog + kl_gamma(alpha, beta, self.a, self.b)
    }

    fn update_gamma(&self, q: &mut VBFamilySpec, c: usize) {
        let s2 = Self::column_second_moment(q, c);
        let dims = (self.d1 + self.d2) as f64;
        let current = self.gamma_objective(s2, q.gamma_alpha[c], q.gamma_beta[c]);
        let (alpha, beta) = match self.kind {
            // Conjugate: the optimal factor is exactly inverse-gamma.
            GammaKind::InverseGamma => (self.a + 0.5 * dims, self.b + 0.5 * s2),
            GammaKind::Gamma => self.profile_gamma(s2),
        };
        let candidate = self.gamma_objective(s2, alpha, beta);
        if candidate.is_finite() && candidate <= current {
            q.gamma_alpha[c] = alpha;
            q.gamma_beta[c] = beta;
        }
    }

    /// Optimal rate for a fixed shape: the positive root of
    /// `A beta^2 + (a - D/2) beta - alpha b = 0`, `A = s2 / (2 (alpha - 1))`.
    fn best_rate(&self, s2: f64, alpha: f64) -> f64 {
        let dims = (self.d1 + self.d2) as f64;
        let quad = s2 / (2.0 * (alpha - 1.0));
        let p = self.a - 0.5 * dims;
        let disc = (p * p + 4.0 * quad * alpha * self.b).sqrt();
        if p >= 0.0 {
            2.0 * alpha * self.b / (p + disc)
        } else {
            (disc - p) / (2.0 * quad)
        }
    }

    /// Golden-section search over `log(alpha - 1)` of the rate-profiled
    /// objective for a gamma factor.
    fn profile_gamma(&self, s2: f64) -> (f64, f64) {
        let f = |x: f64| {
            let alpha = 1.0 + x.exp();
            self.gamma_objective(s2, alpha, self.best_rate(s2, alpha))
        };
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (-12.0f64, 16.0f64);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..120 {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = f(x2);
            }
        }
        let alpha = 1.0 + (0.5 * (lo + hi)).exp();
        (alpha, self.best_rate(s2, alpha))
    }

    fn sweep(&self, q: &mut VBFamilySpec, steps_l: &mut [f64], steps_r: &mut [f64]) {
        let einv: Vec<f64> = (0..self.k).map(|c| q.e_inv_gamma(c)).collect();
        let k = self.k;
        let (mut m, mut v) = (vec![0.0; k], vec![0.0; k]);
        for (i, list) in self.obs.by_row.iter().enumerate() {
            m.copy_from_slice(q.m_l.row(i).as_slice().unwrap());
            v.copy_from_slice(q.v_l.row(i).as_slice().unwrap());
            self.update_row(&mut m, &mut v, list, &q.m_r, &q.v_r, &einv, &mut steps_l[i]);
            q.m_l.row_mut(i).as_slice_mut().unwrap().copy_from_slice(&m);
            q.v_l.row_mut(i).as_slice_mut().unwrap().copy_from_slice(&v);
        }
        for (j, list) in self.obs.by_col.iter().enumerate() {
            m.copy_from_slice(q.m_r.row(j).as_slice().unwrap());
            v.copy_from_slice(q.v_r.row(j).as_slice().unwrap());
            self.update_row(&mut m, &mut v, list, &q.m_l, &q.v_l, &einv, &mut steps_r[j]);
            q.m_r.row_mut(j).as_slice_mut().unwrap().copy_from_slice(&m);
            q.v_r.row_mut(j).as_slice_mut().unwrap().copy_from_slice(&v);
        }
        for c in 0..k {
            self.update_gamma(q, c);
        }
    }
}

/// `lambda E_q r_n^h(L R^T) + KL(q || pi)` for the hinge risk.
pub fn vb_objective(data: &Dataset, prior: &PriorSpec, lambda: f64, family: &VBFamilySpec) -> Result<f64> {
    let problem = Problem::new(data, prior, lambda)?;
    problem.check_family(family)?;
    Ok(problem.objective(&standard(family)))
}

/// Standard-layout copy so rows can be viewed as slices.
fn standard(q: &VBFamilySpec) -> VBFamilySpec {
    let s = |a: &Array2<f64>| a.as_standard_layout().into_owned();
    VBFamilySpec {
        m_l: s(&q.m_l),
        v_l: s(&q.v_l),
        m_r: s(&q.m_r),
        v_r: s(&q.v_r),
        ..q.clone()
    }
}

/// Block coordinate descent from `family`, stopping once the relative
/// objective decrease of a sweep falls below `tol` or after `max_iters`
/// sweeps. An objective increase beyond rounding is reported as
/// [`Error::Optimization`] with the trace so far.
pub fn vb_fit(data: &Dataset, prior: &PriorSpec, lambda: f64, family: &VBFamilySpec, max_iters: usize, tol: f64) -> Result<VBFit> {
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    if max_iters == 0 {
        return Err(Error::Config("max_iters must be positive".into()));
    }
    let problem = Problem::new(data, prior, lambda)?;
    problem.check_family(family)?;
    let mut q = standard(family);
    let mut trace = vec![problem.objective(&q)];
    let mut steps_l = vec![1.0; problem.d1];
    let mut steps_r = vec![1.0; problem.d2];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iters {
        problem.sweep(&mut q, &mut steps_l, &mut steps_r);
        let before = *trace.last().unwrap();
        let after = problem.objective(&q);
        trace.push(after);
        iterations = it;
        if !after.is_finite() || after > before + MONOTONE_SLACK * before.abs().max(1.0) {
            return Err(Error::Optimization {
                iteration: it,
                before,
                after,
                trace,
            });
        }
        if (before - after) / before.abs().max(f64::MIN_POSITIVE) < tol {
            converged = true;
            break;
        }
    }
    Ok(VBFit {
        family: q,
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// A seeded random initial family; convenience for callers without a warm
/// start.
pub fn default_family(prior: &PriorSpec, seed: u64) -> Result<VBFamilySpec> {
    VBFamilySpec::init(prior, 0.1, 0.1, seed)
}
