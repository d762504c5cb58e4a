//! Constants, KL divergences and right-hand sides of the misclassification
//! excess-risk bounds.
//!
//! Every `bound_rhs_*` evaluates the bracket
//!
//! ```text
//! psi * ( E_rho[R(theta)] - R(theta*)  +  multiplier * KL(rho || pi) / n )
//! ```
//!
//! for one explicit candidate `rho`. `psi` is the (unknown) calibration
//! constant and defaults to 1; `multiplier` defaults to `C_bar`.

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::data::Dataset;
use crate::error::{domain, Error, Result};

/// Default floor on excess surrogate risk in [`estimate_bernstein_k`].
pub const BERNSTEIN_FLOOR: f64 = 1e-6;

/// Slack on the margin band, absorbing rounding in `p = 1/2 ± h`.
const MARGIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
struct RawConstants {
    b_loss: f64,
    l_lip: f64,
    k_bernstein: f64,
    c_margin: f64,
    #[serde(default = "one")]
    psi: f64,
}

fn one() -> f64 {
    1.0
}

/// Loss bound `B`, Lipschitz constant `L`, Bernstein constant `K`, margin
/// constant `c`, and the derived `C_bar = max(2 L^2 K, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstants")]
pub struct BoundConstants {
    b_loss: f64,
    l_lip: f64,
    k_bernstein: f64,
    c_margin: f64,
    psi: f64,
    c_bar: f64,
}

impl TryFrom<RawConstants> for BoundConstants {
    type Error = Error;

    fn try_from(r: RawConstants) -> Result<Self> {
        Self::new(r.b_loss, r.l_lip, r.k_bernstein, r.c_margin)?.with_psi(r.psi)
    }
}

impl BoundConstants {
    pub fn new(b_loss: f64, l_lip: f64, k_bernstein: f64, c_margin: f64) -> Result<Self> {
        for (name, v) in [
            ("b_loss", b_loss),
            ("l_lip", l_lip),
            ("k_bernstein", k_bernstein),
            ("c_margin", c_margin),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            b_loss,
            l_lip,
            k_bernstein,
            c_margin,
            psi: 1.0,
            c_bar: (2.0 * l_lip * l_lip * k_bernstein).max(b_loss),
        })
    }

    pub fn with_psi(mut self, psi: f64) -> Result<Self> {
        if !(psi > 0.0) || !psi.is_finite() {
            return Err(domain(format!("psi must be positive and finite, got {psi}")));
        }
        self.psi = psi;
        Ok(self)
    }

    pub fn b_loss(&self) -> f64 {
        self.b_loss
    }
    pub fn l_lip(&self) -> f64 {
        self.l_lip
    }
    pub fn k_bernstein(&self) -> f64 {
        self.k_bernstein
    }
    pub fn c_margin(&self) -> f64 {
        self.c_margin
    }
    pub fn psi(&self) -> f64 {
        self.psi
    }
    pub fn c_bar(&self) -> f64 {
        self.c_bar
    }

    /// Inverse temperature `n / C_bar`.
    pub fn lambda(&self, n: usize) -> f64 {
        n as f64 / self.c_bar
    }
}

/// The candidate distribution plugged into the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Construction {
    Dirac { index: usize, prior_weight: f64 },
    Gaussian { m_norm_sq: f64, s: f64, sigma: f64, d: usize },
    TranslatedStudent { tau: f64, c1: f64, s_star: usize, c_x: f64 },
    MatCompBox { delta: f64, r: usize, a: f64, c_a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub excess_phi_term: f64,
    /// KL divergence of the candidate, or an upper bound on it.
    pub kl_term: f64,
    pub kl_multiplier: f64,
    pub n: usize,
    pub lambda_used: f64,
    pub psi: f64,
    pub total: f64,
    pub construction: Construction,
    pub constants: BoundConstants,
}

impl BoundReport {
    fn assemble(
        constants: &BoundConstants,
        n: usize,
        excess_phi_term: f64,
        kl_term: f64,
        kl_multiplier: f64,
        construction: Construction,
    ) -> Self {
        let total = constants.psi() * (excess_phi_term + kl_multiplier * kl_term / n as f64);
        Self {
            excess_phi_term,
            kl_term,
            kl_multiplier,
            n,
            lambda_used: constants.lambda(n),
            psi: constants.psi(),
            total,
            construction,
            constants: *constants,
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(domain("sample size must be positive"))
    } else {
        Ok(())
    }
}

/// `KL(N(m, s^2 I) || N(0, sigma^2 I))` given `||m||^2` and the dimension.
pub fn kl_gaussian_isotropic_norm(m_norm_sq: f64, d: usize, s: f64, sigma: f64) -> Result<f64> {
    check_positive("s", s)?;
    check_positive("sigma", sigma)?;
    if !(m_norm_sq >= 0.0) {
        return Err(domain("squared norm must be nonnegative"));
    }
    let ratio = (s / sigma).powi(2);
    // ratio - ln(ratio) - 1 loses precision near ratio = 1; ln_1p keeps it.
    let bracket = (ratio - 1.0) - (ratio - 1.0).ln_1p();
    Ok(m_norm_sq / (2.0 * sigma * sigma) + d as f64 / 2.0 * bracket)
}

/// `KL(N(m, s^2 I_d) || N(0, sigma^2 I_d))` with `d = m.len()`.
pub fn kl_gaussian_isotropic(m: &[f64], s: f64, sigma: f64) -> Result<f64> {
    let norm_sq = m.iter().map(|x| x * x).sum();
    kl_gaussian_isotropic_norm(norm_sq, m.len(), s, sigma)
}

/// `KL(delta_theta || pi) = -log pi(theta)` on a finite class.
pub fn kl_dirac_finite(theta_index: usize, prior_weights: &[f64]) -> Result<f64> {
    let w = *prior_weights.get(theta_index).ok_or(Error::DimensionMismatch {
        expected: theta_index + 1,
        found: prior_weights.len(),
    })?;
    if !(w >= 0.0) || w > 1.0 {
        return Err(domain(format!("prior weight {w} outside [0, 1]")));
    }
    if w == 0.0 {
        return Err(Error::InfiniteKl { index: theta_index });
    }
    Ok(-w.ln())
}

/// Finite class, candidate `delta_theta` at `theta_index`, with excess
/// surrogate risk `excess_phi` of that element (zero for `theta*`).
pub fn bound_rhs_finite(
    constants: &BoundConstants,
    n: usize,
    prior_weights: &[f64],
    theta_index: usize,
    excess_phi: f64,
) -> Result<BoundReport> {
    check_n(n)?;
    let kl = kl_dirac_finite(theta_index, prior_weights)?;
    Ok(BoundReport::assemble(
        constants,
        n,
        excess_phi,
        kl,
        constants.c_bar(),
        Construction::Dirac {
            index: theta_index,
            prior_weight: prior_weights[theta_index],
        },
    ))
}

/// `s = 1 / (n sqrt(d))`.
pub fn canonical_gaussian_s(n: usize, d: usize) -> f64 {
    1.0 / (n as f64 * (d as f64).sqrt())
}

/// Gaussian prior, candidate `N(theta*, s^2 I)`:
/// `L s sqrt(d) + C_bar KL / n`.
pub fn bound_rhs_gaussian(
    constants: &BoundConstants,
    d: usize,
    norm_theta_star_sq: f64,
    sigma: f64,
    n: usize,
    s: f64,
) -> Result<BoundReport> {
    check_n(n)?;
    if d == 0 {
        return Err(domain("dimension must be positive"));
    }
    let kl = kl_gaussian_isotropic_norm(norm_theta_star_sq, d, s, sigma)?;
    let excess = constants.l_lip() * s * (d as f64).sqrt();
    Ok(BoundReport::assemble(
        constants,
        n,
        excess,
        kl,
        constants.c_bar(),
        Construction::Gaussian {
            m_norm_sq: norm_theta_star_sq,
            s,
            sigma,
            d,
        },
    ))
}

/// Geometric grid of `points` values in `[lo, hi]` with `extra` merged in.
fn log_grid(lo: f64, hi: f64, points: usize, extra: &[f64]) -> Vec<f64> {
    let points = points.max(2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .chain(extra.iter().copied())
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Minimises [`bound_rhs_gaussian`] over a log-grid of `s` that contains the
/// canonical `1/(n sqrt d)` and `sigma`. Returns the minimiser and the curve.
pub fn scan_gaussian_s(
    constants: &BoundConstants,
    d: usize,
    norm_theta_star_sq: f64,
    sigma: f64,
    n: usize,
    points: usize,
) -> Result<(BoundReport, Vec<BoundReport>)> {
    check_n(n)?;
    let canon = canonical_gaussian_s(n, d);
    let grid = log_grid(canon.min(sigma) * 1e-2, canon.max(sigma) * 10.0, points, &[canon, sigma]);
    let curve = grid
        .into_iter()
        .map(|s| bound_rhs_gaussian(constants, d, norm_theta_star_sq, sigma, n, s))
        .collect::<Result<Vec<_>>>()?;
    let best = argmin(&curve);
    Ok((best, curve))
}

fn argmin(curve: &[BoundReport]) -> BoundReport {
    curve
        .iter()
        .min_by(|a, b| a.total.total_cmp(&b.total))
        .cloned()
        .expect("non-empty grid")
}

/// `tau = 1 / (C_x n sqrt(d))`.
pub fn canonical_sparse_tau(c_x: f64, n: usize, d: usize) -> f64 {
    1.0 / (c_x * n as f64 * (d as f64).sqrt())
}

/// Upper bound `4 s* log(C1 / (tau s*)) + log 2` on the KL between the
/// translated Student prior and the prior.
pub fn kl_translated_student_bound(s_star: usize, c1: f64, tau: f64) -> f64 {
    let s = s_star as f64;
    4.0 * s * (c1 / (tau * s)).ln() + std::f64::consts::LN_2
}

/// Sparse linear classification with the scaled Student prior:
/// `C_x 2 tau sqrt(d) + multiplier (4 s* log(C1/(tau s*)) + log 2) / n`.
/// `kl_multiplier` defaults to `C_bar`.
#[allow(clippy::too_many_arguments)]
pub fn bound_rhs_sparse(
    constants: &BoundConstants,
    d: usize,
    s_star: usize,
    c1: f64,
    c_x: f64,
    n: usize,
    tau: f64,
    kl_multiplier: Option<f64>,
) -> Result<BoundReport> {
    check_n(n)?;
    check_positive("c1", c1)?;
    check_positive("c_x", c_x)?;
    if s_star == 0 || s_star > d {
        return Err(domain(format!("sparsity {s_star} must lie in 1..={d}")));
    }
    let tau_max = c1 / (2.0 * d as f64);
    if !(tau > 0.0 && tau < tau_max) {
        return Err(domain(format!("tau = {tau} outside (0, {tau_max})")));
    }
    let mult = kl_multiplier.unwrap_or(constants.c_bar());
    check_positive("kl multiplier", mult)?;
    let excess = c_x * 2.0 * tau * (d as f64).sqrt();
    let kl = kl_translated_student_bound(s_star, c1, tau);
    Ok(BoundReport::assemble(
        constants,
        n,
        excess,
        kl,
        mult,
        Construction::TranslatedStudent { tau, c1, s_star, c_x },
    ))
}

/// Minimises [`bound_rhs_sparse`] over a log-grid of `tau` in
/// `(0, C1/(2d))` that contains the canonical `tau`.
#[allow(clippy::too_many_arguments)]
pub fn scan_sparse_tau(
    constants: &BoundConstants,
    d: usize,
    s_star: usize,
    c1: f64,
    c_x: f64,
    n: usize,
    kl_multiplier: Option<f64>,
    points: usize,
) -> Result<(BoundReport, Vec<BoundReport>)> {
    let hi = c1 / (2.0 * d as f64) * (1.0 - 1e-9);
    let canon = canonical_sparse_tau(c_x, n, d);
    let mut extra = vec![];
    if canon < hi {
        extra.push(canon);
    }
    let grid = log_grid(canon.min(hi) * 1e-3, hi, points, &extra);
    let curve = grid
        .into_iter()
        .map(|tau| bound_rhs_sparse(constants, d, s_star, c1, c_x, n, tau, kl_multiplier))
        .collect::<Result<Vec<_>>>()?;
    let best = argmin(&curve);
    Ok((best, curve))
}

/// `C_a = log(8 sqrt(pi) Gamma(a) 2^(10a+1)) + 3`, evaluated in log space.
pub fn matcomp_c_a(a: f64) -> Result<f64> {
    check_positive("a", a)?;
    let ln_8_sqrt_pi = 8f64.ln() + 0.5 * std::f64::consts::PI.ln();
    Ok(ln_8_sqrt_pi + ln_gamma(a) + (10.0 * a + 1.0) * std::f64::consts::LN_2 + 3.0)
}

/// 1-bit matrix completion with the hierarchical prior:
/// `B/n + C_bar 2(1+2a) r (d1+d2) [log(n d1 d2) + C_a] / n`.
pub fn bound_rhs_matcomp(
    r: usize,
    d1: usize,
    d2: usize,
    n: usize,
    a: f64,
    b_inf: f64,
    constants: &BoundConstants,
) -> Result<BoundReport> {
    check_n(n)?;
    if r == 0 || d1 == 0 || d2 == 0 {
        return Err(domain("rank and dimensions must be positive"));
    }
    check_positive("b_inf", b_inf)?;
    let c_a = matcomp_c_a(a)?;
    let nd = n as f64 * d1 as f64 * d2 as f64;
    let kl = 2.0 * (1.0 + 2.0 * a) * r as f64 * (d1 + d2) as f64 * (nd.ln() + c_a);
    let delta = b_inf / (8.0 * nd * nd);
    Ok(BoundReport::assemble(
        constants,
        n,
        b_inf / n as f64,
        kl,
        constants.c_bar(),
        Construction::MatCompBox { delta, r, a, c_a },
    ))
}

/// Empirical Bernstein constant: the largest `||theta - theta*||^2 /
/// (R(theta) - R(theta*))` over candidates whose excess risk exceeds `floor`.
pub fn estimate_bernstein_k<F>(risk: F, theta_star: &Array1<f64>, candidates: &[Array1<f64>], floor: f64) -> Result<f64>
where
    F: Fn(&Array1<f64>) -> f64,
{
    let base = risk(theta_star);
    let mut best: Option<f64> = None;
    for theta in candidates {
        if theta.len() != theta_star.len() {
            return Err(Error::DimensionMismatch {
                expected: theta_star.len(),
                found: theta.len(),
            });
        }
        let excess = risk(theta) - base;
        if !(excess > floor) {
            continue;
        }
        let diff = theta - theta_star;
        let ratio = diff.dot(&diff) / excess;
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    best.ok_or(Error::InsufficientSpread { floor })
}

/// Whether no sampled `p(x_i)` falls in `0 < |p - 1/2| < 1/(2c)`.
pub fn check_margin(data: &Dataset, c_margin: f64) -> Result<bool> {
    check_positive("c", c_margin)?;
    let p = data.true_cond_prob().ok_or(Error::MissingCondProb)?;
    let band = 1.0 / (2.0 * c_margin) - MARGIN_SLACK;
    Ok(p.iter().all(|&q| {
        let gap = (q - 0.5).abs();
        gap == 0.0 || gap >= band
    }))
}
