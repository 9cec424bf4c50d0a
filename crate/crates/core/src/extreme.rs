//! Weibull extreme-return density, the R_Q–Q relation, and exact samplers.
//!
//! Extreme return magnitudes ε ≥ 0 follow the Weibull density
//!
//! ```text
//! D(ε) = (η/ε̄)·(ε/ε̄)^(η−1)·exp(−(ε/ε̄)^η),
//! ```
//!
//! stretched-exponential for the empirically relevant shape range η < 1. The
//! mean recurrence time of exceedances of a threshold Q (in units of the
//! series sampling interval, fixed to 1 throughout) is the reciprocal
//! exceedance probability,
//!
//! ```text
//! R_Q = calib · exp((Q/ε̄)^η) = calib / ∫_Q^∞ D(ε) dε,
//! ```
//!
//! where `calib` is a multiplicative calibration constant (default 1) that
//! absorbs effects like sign-splitting of empirical series; it is only active
//! when fitting or plotting R_Q curves. Log-space evaluation (ln R_Q) is the
//! primary internal representation, since (Q/ε̄)^η can reach ~10³ for
//! plausible thresholds. Losses are represented as positive magnitudes; the
//! sign convention lives in [`crate::events`], not here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Parameters of the Weibull extreme-magnitude law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    /// Shape exponent η > 0 (dimensionless). The regime of interest is η < 1.
    pub eta: f64,
    /// Scale ε̄ > 0, in return units.
    pub eps_bar: f64,
    /// Multiplicative calibration constant applied to R_Q curves (default 1).
    #[serde(default = "default_calib")]
    pub calib: f64,
}

fn default_calib() -> f64 {
    1.0
}

impl WeibullParams {
    /// Construct with calib = 1.
    pub fn new(eta: f64, eps_bar: f64) -> Self {
        WeibullParams { eta, eps_bar, calib: 1.0 }
    }

    /// Construct with an explicit calibration constant.
    pub fn with_calib(eta: f64, eps_bar: f64, calib: f64) -> Self {
        WeibullParams { eta, eps_bar, calib }
    }

    /// Check the type invariants: all fields finite and > 0.
    pub fn validate(&self) -> Result<()> {
        if !self.eta.is_finite() || self.eta <= 0.0 {
            return Err(Error::domain(format!("eta must be finite and > 0, got {}", self.eta)));
        }
        if !self.eps_bar.is_finite() || self.eps_bar <= 0.0 {
            return Err(Error::domain(format!(
                "eps_bar must be finite and > 0, got {}",
                self.eps_bar
            )));
        }
        if !self.calib.is_finite() || self.calib <= 0.0 {
            return Err(Error::domain(format!("calib must be finite and > 0, got {}", self.calib)));
        }
        Ok(())
    }
}

/// Extreme-magnitude density D(ε).
///
/// For η < 1 the density diverges at ε = 0; that limit is reported as
/// `f64::INFINITY` (a documented marker, not an error, since the singularity
/// is integrable). `eps < 0` is a domain error.
pub fn weibull_pdf(p: &WeibullParams, eps: f64) -> Result<f64> {
    p.validate()?;
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::domain(format!("eps must be finite and ≥ 0, got {eps}")));
    }
    if eps == 0.0 {
        return Ok(if p.eta < 1.0 {
            f64::INFINITY
        } else if p.eta == 1.0 {
            1.0 / p.eps_bar
        } else {
            0.0
        });
    }
    let z = eps / p.eps_bar;
    Ok((p.eta / p.eps_bar) * z.powf(p.eta - 1.0) * (-z.powf(p.eta)).exp())
}

/// Relative mean ⟨ε⟩/ε̄ = Γ(1/η)/η and relative variance σ²/⟨ε⟩²
/// = 2η·Γ(2/η)/Γ²(1/η) − 1. Both depend only on the shape η.
pub fn weibull_moments(p: &WeibullParams) -> Result<(f64, f64)> {
    p.validate()?;
    let inv = 1.0 / p.eta;
    let ln_g1 = ln_gamma(inv);
    let ln_g2 = ln_gamma(2.0 * inv);
    let rel_mean = inv * ln_g1.exp();
    let rel_var = 2.0 * p.eta * (ln_g2 - 2.0 * ln_g1).exp() - 1.0;
    Ok((rel_mean, rel_var))
}

/// ln R_Q = ln calib + (q/ε̄)^η — the overflow-safe primary representation.
pub fn ln_rq_of_q(p: &WeibullParams, q: f64) -> Result<f64> {
    p.validate()?;
    if !q.is_finite() || q < 0.0 {
        return Err(Error::domain(format!("threshold q must be finite and ≥ 0, got {q}")));
    }
    Ok(p.calib.ln() + (q / p.eps_bar).powf(p.eta))
}

/// Mean interevent time R_Q = calib · exp((q/ε̄)^η).
///
/// Overflow is reported when the exponent leaves the representable range;
/// callers that only need ln R_Q should use [`ln_rq_of_q`].
pub fn rq_of_q(p: &WeibullParams, q: f64) -> Result<f64> {
    let ln_r = ln_rq_of_q(p, q)?;
    if ln_r > 709.0 {
        return Err(Error::overflow(format!(
            "R_Q at q={q} has ln R_Q = {ln_r:.1}, beyond f64 range; use ln_rq_of_q"
        )));
    }
    Ok(ln_r.exp())
}

/// Threshold at which the mean interevent time equals `r_q`:
/// q = ε̄ · (ln(r_q/calib))^(1/η). Round-trips with [`rq_of_q`].
pub fn q_of_rq(p: &WeibullParams, r_q: f64) -> Result<f64> {
    p.validate()?;
    if !r_q.is_finite() || r_q < p.calib {
        return Err(Error::domain(format!(
            "r_q must be finite and ≥ calib = {}, got {r_q}",
            p.calib
        )));
    }
    let ln_ratio = (r_q / p.calib).ln();
    Ok(p.eps_bar * ln_ratio.powf(1.0 / p.eta))
}

/// Exact inverse-CDF sampler for D(ε) conditioned on ε ≥ q:
/// ε = ε̄ · ((q/ε̄)^η − ln u)^(1/η), u uniform in (0,1).
///
/// Deterministic in u; u → 1⁻ gives ε → q (the boundary of the conditional
/// support) and u → 0⁺ the deep tail.
pub fn sample_excess(p: &WeibullParams, q: f64, u: f64) -> Result<f64> {
    p.validate()?;
    if !q.is_finite() || q < 0.0 {
        return Err(Error::domain(format!("threshold q must be finite and ≥ 0, got {q}")));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::domain(format!("uniform draw must lie in (0,1), got {u}")));
    }
    let w_q = (q / p.eps_bar).powf(p.eta);
    Ok(p.eps_bar * (w_q - u.ln()).powf(1.0 / p.eta))
}

/// Conditional exceedance CDF P(ε ≤ x | ε ≥ q) = 1 − exp((q/ε̄)^η − (x/ε̄)^η),
/// the distribution function matching [`sample_excess`].
pub fn excess_cdf(p: &WeibullParams, q: f64, x: f64) -> Result<f64> {
    p.validate()?;
    if !q.is_finite() || q < 0.0 {
        return Err(Error::domain(format!("threshold q must be finite and ≥ 0, got {q}")));
    }
    if x <= q {
        return Ok(0.0);
    }
    let w_q = (q / p.eps_bar).powf(p.eta);
    let w_x = (x / p.eps_bar).powf(p.eta);
    Ok(-((w_q - w_x).exp() - 1.0))
}
