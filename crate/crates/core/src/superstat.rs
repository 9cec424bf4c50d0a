//! Closed-form superstatistics of interevent times, relaxation-time laws,
//! scaling identities, mixtures, and moments.
//!
//! # Model
//!
//! Conditional on an extreme event of magnitude ε ≥ Q, the waiting time to
//! the next event is exponential with mean τ_Q(ε) = τ₀·exp(±(B_Q ε)^η) —
//! sign + for the *expanding* hierarchy (larger shocks relax slower), − for
//! the *clustering* hierarchy. Averaging the exponential over the conditional
//! magnitude law D(ε)/P(ε ≥ Q) collapses, after the substitution
//! w = (B_Q ε)^η, into a two-parameter closed form. With u = Δt/τ_Q(Q),
//! α_Q = 1/(B_Q ε̄)^η:
//!
//! ```text
//! expanding:   ψ_Q(Δt)  = (1/τ_Q(Q)) · α_Q · u^{−(1+α_Q)} · γ(1+α_Q, u)
//! clustering:  ψ′_Q(Δt) = (1/τ_Q(Q)) · α_Q · u^{α_Q−1} · Γ′(1−α_Q, u)   (α_Q < 1)
//! ```
//!
//! both normalized to unit mass (integration by parts; the γ/Γ′ recurrences
//! make the boundary terms vanish). The raw superposition integral carries an
//! extra 1/R_Q; [`psi_unconditional`] exposes that convention. The regimes of
//! ψ_Q are an initial exponential ([`psi_initial`]), a power-law tail
//! u^{−(1+α_Q)} ([`psi_tail`]), and for α_Q → ∞ a pure exponential — shape
//! exponents beyond 500 delegate to that limit, which keeps the sentinel
//! value α_Q = 1000 (used by fits to label "effectively exponential" data)
//! evaluable.
//!
//! Across thresholds the shape and scale obey the superscaling laws
//! 1/α_Q = B·ln^ζ R_Q and ln(τ_Q(Q)/τ_Q(0)) = B·ln^{1+ζ} R_Q, tying every
//! per-threshold parameter pair to the two universal constants (B, ζ).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreme::WeibullParams;
use crate::special::{ln_gamma, lower_series, reg_lower};

/// Largest exponent for which exp() stays finite.
const MAX_EXP: f64 = 709.0;

/// Shape exponents above this delegate to the exponential limit.
pub const ALPHA_EXPONENTIAL_LIMIT: f64 = 500.0;

/// Hierarchy direction of the relaxation-time law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// τ_Q(ε) non-decreasing in ε: larger shocks relax slower.
    Expanding,
    /// τ_Q(ε) non-increasing in ε: larger shocks are followed faster.
    Clustering,
}

/// Relaxation-time law τ_Q(ε) = τ₀·exp(±(B_Q ε)^η).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSpec {
    /// Free relaxation time τ_Q(0) > 0.
    pub tau0: f64,
    /// Inverse-temperature analog B_Q > 0, in inverse return units.
    pub b_q: f64,
    /// Shape exponent η > 0 shared with the magnitude law.
    pub eta: f64,
    /// Hierarchy sign.
    pub direction: Direction,
}

impl RelaxationSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau0", self.tau0), ("b_q", self.b_q), ("eta", self.eta)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Parameters of one closed-form interevent density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperstatParams {
    /// Scaling shape exponent α_Q > 0.
    pub alpha: f64,
    /// Characteristic time τ_Q(Q) > 0.
    pub tau_q: f64,
    /// Which hierarchy this density describes.
    #[serde(default = "default_direction")]
    pub direction: Direction,
    /// Mixture weight w ∈ [0,1] for the expanding component in mixtures.
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_direction() -> Direction {
    Direction::Expanding
}

fn default_weight() -> f64 {
    1.0
}

impl SuperstatParams {
    /// Expanding-hierarchy parameters with weight 1.
    pub fn expanding(alpha: f64, tau_q: f64) -> Self {
        SuperstatParams { alpha, tau_q, direction: Direction::Expanding, weight: 1.0 }
    }

    /// Clustering-hierarchy parameters with weight 1.
    pub fn clustering(alpha: f64, tau_q: f64) -> Self {
        SuperstatParams { alpha, tau_q, direction: Direction::Clustering, weight: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::domain(format!("alpha must be finite and > 0, got {}", self.alpha)));
        }
        if !self.tau_q.is_finite() || self.tau_q <= 0.0 {
            return Err(Error::domain(format!("tau_q must be finite and > 0, got {}", self.tau_q)));
        }
        if !self.weight.is_finite() || !(0.0..=1.0).contains(&self.weight) {
            return Err(Error::domain(format!("weight must lie in [0,1], got {}", self.weight)));
        }
        Ok(())
    }

    fn require(&self, dir: Direction, op: &str) -> Result<()> {
        self.validate()?;
        if self.direction != dir {
            return Err(Error::domain(format!(
                "{op} requires direction {dir:?}, got {:?}",
                self.direction
            )));
        }
        Ok(())
    }
}

/// Universal superscaling law 1/α_Q = B·ln^ζ R_Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    /// Universal prefactor B > 0.
    pub b: f64,
    /// Universal exponent ζ > 0.
    pub zeta: f64,
}

impl ScalingLaw {
    pub fn new(b: f64, zeta: f64) -> Self {
        ScalingLaw { b, zeta }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() || self.b <= 0.0 {
            return Err(Error::domain(format!("B must be finite and > 0, got {}", self.b)));
        }
        if !self.zeta.is_finite() || self.zeta <= 0.0 {
            return Err(Error::domain(format!("zeta must be finite and > 0, got {}", self.zeta)));
        }
        Ok(())
    }
}

/// A possibly-divergent moment value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Moment {
    /// The moment exists; value in timeᵐ units.
    Finite(f64),
    /// α_Q ≤ m: the integral diverges.
    Divergent,
}

impl Moment {
    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    /// The finite value, if any.
    pub fn value(&self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(*v),
            Moment::Divergent => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Relaxation-time law and parameter conversions
// ---------------------------------------------------------------------------

/// Relaxation time τ_Q(ε) = τ₀·exp(±(B_Q ε)^η).
///
/// The expanding direction can overflow at extreme ε (reported); the
/// clustering exponent is negative, so it never does.
pub fn relaxation_time(r: &RelaxationSpec, eps: f64) -> Result<f64> {
    r.validate()?;
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::domain(format!("eps must be finite and ≥ 0, got {eps}")));
    }
    let x = (r.b_q * eps).powf(r.eta);
    match r.direction {
        Direction::Expanding => {
            if r.tau0.ln() + x > MAX_EXP {
                return Err(Error::overflow(format!(
                    "relaxation time at eps={eps} overflows: exponent {x:.1}"
                )));
            }
            Ok(r.tau0 * x.exp())
        }
        Direction::Clustering => Ok(r.tau0 * (-x).exp()),
    }
}

/// Shape exponent from the inverse-temperature analog: α_Q = 1/(B_Q ε̄)^η.
pub fn alpha_from_bq(b_q: f64, eps_bar: f64, eta: f64) -> Result<f64> {
    check_positive([("b_q", b_q), ("eps_bar", eps_bar), ("eta", eta)])?;
    Ok((b_q * eps_bar).powf(eta).recip())
}

/// Inverse of [`alpha_from_bq`]: B_Q = (1/α)^{1/η}/ε̄.
pub fn bq_from_alpha(alpha: f64, eps_bar: f64, eta: f64) -> Result<f64> {
    check_positive([("alpha", alpha), ("eps_bar", eps_bar), ("eta", eta)])?;
    Ok(alpha.recip().powf(eta.recip()) / eps_bar)
}

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

/// Expanding-hierarchy interevent density
/// ψ_Q(Δt) = (1/τ)·α·u^{−(1+α)}·γ(1+α, u), u = Δt/τ; normalized to ∫ = 1.
///
/// At Δt = 0 the removable singularity is replaced by its analytic limit
/// α/(τ(1+α)). For α > 500 the density delegates to the exponential limit
/// (1/τ)·e^{−u}, which the exact form approaches α-uniformly.
pub fn psi(sp: &SuperstatParams, dt: f64) -> Result<f64> {
    sp.require(Direction::Expanding, "psi")?;
    check_dt(dt)?;
    Ok(psi_raw(sp.alpha, sp.tau_q, dt))
}

/// Internal unchecked ψ evaluation shared with the CDF and mixtures.
fn psi_raw(alpha: f64, tau: f64, dt: f64) -> f64 {
    let u = dt / tau;
    if alpha > ALPHA_EXPONENTIAL_LIMIT {
        return (-u).exp() / tau;
    }
    if u == 0.0 {
        return alpha / (tau * (1.0 + alpha));
    }
    let a = 1.0 + alpha;
    if u < a {
        // u^{−(1+α)}·γ(1+α,u) = e^{−u}·Σ uⁿ/((1+α)…(1+α+n)) — no overflow at any α.
        alpha / tau * (-u).exp() * lower_series(a, u)
    } else {
        // γ ≈ P·Γ; assemble in log space because Γ(1+α) alone may overflow.
        let ln_pow = ln_gamma(a) - a * u.ln();
        alpha / tau * reg_lower(a, u) * ln_pow.exp()
    }
}

/// Cumulative form of [`psi`]:
/// Ψ(x) = 1 − e^{−u} − u^{−α}·γ(1+α, u), u = x/τ (integration by parts).
///
/// Used as the reference distribution for Kolmogorov–Smirnov tests against
/// simulated samples; cross-checked against quadrature of ψ in the tests.
pub fn psi_cdf(sp: &SuperstatParams, x: f64) -> Result<f64> {
    sp.require(Direction::Expanding, "psi_cdf")?;
    check_dt(x)?;
    let u = x / sp.tau_q;
    if u == 0.0 {
        return Ok(0.0);
    }
    let one_minus_exp = -(-u).exp_m1();
    if sp.alpha > ALPHA_EXPONENTIAL_LIMIT {
        return Ok(one_minus_exp);
    }
    let a = 1.0 + sp.alpha;
    let gamma_term = if u < a {
        // u^{−α}·γ(1+α,u) = u·e^{−u}·Σ uⁿ/((1+α)…(1+α+n))
        u * (-u).exp() * lower_series(a, u)
    } else {
        reg_lower(a, u) * (ln_gamma(a) - sp.alpha * u.ln()).exp()
    };
    Ok((one_minus_exp - gamma_term).clamp(0.0, 1.0))
}

/// Raw (unnormalized) superposition density ψ/R_Q or ψ′/R_Q, the direct
/// value of the magnitude-averaged exponential before the 1/P(ε ≥ Q)
/// conditioning factor is applied. Dispatches on the direction of `sp`.
pub fn psi_unconditional(sp: &SuperstatParams, r_q: f64, dt: f64) -> Result<f64> {
    if !r_q.is_finite() || r_q < 1.0 {
        return Err(Error::domain(format!("r_q must be finite and ≥ 1, got {r_q}")));
    }
    let dens = match sp.direction {
        Direction::Expanding => psi(sp, dt)?,
        Direction::Clustering => psi_clustering(sp, dt)?,
    };
    Ok(dens / r_q)
}

/// Power-law tail asymptote ψ_tail(Δt) = (1/τ)·α·u^{−(1+α)}·Γ(1+α).
///
/// Accurate once γ(1+α, u) has saturated at Γ(1+α), i.e. u ≫ 1 + α; the
/// caller is responsible for staying in that regime.
pub fn psi_tail(sp: &SuperstatParams, dt: f64) -> Result<f64> {
    sp.require(Direction::Expanding, "psi_tail")?;
    check_dt(dt)?;
    if dt == 0.0 {
        return Err(Error::domain("psi_tail diverges at dt = 0".to_string()));
    }
    let u = dt / sp.tau_q;
    let a = 1.0 + sp.alpha;
    let ln_v = sp.alpha.ln() - sp.tau_q.ln() + ln_gamma(a) - a * u.ln();
    Ok(ln_v.exp())
}

/// Initial exponential regime
/// ψ_init(Δt) = (1/τ)·(α/(1+α))·exp(−((1+α)/(2+α))·u), sharing the Δt = 0
/// limit with [`psi`]; for α → ∞ both coefficients tend to 1, recovering the
/// pure exponential.
pub fn psi_initial(sp: &SuperstatParams, dt: f64) -> Result<f64> {
    sp.require(Direction::Expanding, "psi_initial")?;
    check_dt(dt)?;
    let u = dt / sp.tau_q;
    let a = sp.alpha;
    Ok((a / (1.0 + a)) / sp.tau_q * (-(1.0 + a) / (2.0 + a) * u).exp())
}

/// Clustering-hierarchy interevent density
/// ψ′_Q(Δt) = (1/τ′)·α·u^{α−1}·Γ′(1−α, u), u = Δt/τ′, α ∈ (0,1);
/// normalized to ∫ = 1.
///
/// The closed form is obtained by the same change of variables as ψ but with
/// the inverted relaxation hierarchy, and is validated against direct
/// quadrature of the superposition integral (the normative definition). The
/// small-Δt behavior is the power law u^{α−1}·Γ(1−α); the large-Δt tail is
/// exponentially truncated. Outside α ∈ (0,1) this representation loses
/// validity and a domain error is returned, as is Δt = 0 where the power law
/// diverges.
pub fn psi_clustering(sp: &SuperstatParams, dt: f64) -> Result<f64> {
    sp.require(Direction::Clustering, "psi_clustering")?;
    if sp.alpha >= 1.0 {
        return Err(Error::domain(format!(
            "psi_clustering closed form is valid for alpha in (0,1), got {}",
            sp.alpha
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::domain(format!(
            "psi_clustering requires dt > 0 (diverges at 0), got {dt}"
        )));
    }
    let u = dt / sp.tau_q;
    let a = 1.0 - sp.alpha;
    // Γ′(1−α, u): complementary region x < a+1 uses Γ − γ via the regularized
    // pair; the direct continued fraction takes over for x ≥ a+1.
    let upper = crate::special::reg_upper(a, u) * ln_gamma(a).exp();
    Ok(sp.alpha / sp.tau_q * u.powf(sp.alpha - 1.0) * upper)
}

/// The clustering density exactly as printed in the source formula this
/// library complements: (1/τ′)·α·u^{−(1+α)}·Γ′(1+α, u).
///
/// This shape disagrees with the superposition quadrature and is
/// non-normalizable at Δt → 0; it is provided only as an explicit
/// compatibility surface (CLI flag `--paper-eq19-compat`). New code should
/// use [`psi_clustering`].
pub fn psi_clustering_printed(sp: &SuperstatParams, dt: f64) -> Result<f64> {
    sp.require(Direction::Clustering, "psi_clustering_printed")?;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::domain(format!(
            "psi_clustering_printed requires dt > 0, got {dt}"
        )));
    }
    let u = dt / sp.tau_q;
    let a = 1.0 + sp.alpha;
    let upper = crate::special::reg_upper(a, u) * ln_gamma(a).exp();
    Ok(sp.alpha / sp.tau_q * u.powf(-a) * upper)
}

/// Weighted mixture w·ψ(sp_exp) + (1−w)·ψ′(sp_clu).
///
/// w = 1 and w = 0 short-circuit to the pure branches so the other branch's
/// domain restrictions (e.g. ψ′ at Δt = 0) are not spuriously triggered.
pub fn psi_mixture(
    sp_exp: &SuperstatParams,
    sp_clu: &SuperstatParams,
    w: f64,
    dt: f64,
) -> Result<f64> {
    if !w.is_finite() || !(0.0..=1.0).contains(&w) {
        return Err(Error::domain(format!("mixture weight must lie in [0,1], got {w}")));
    }
    if w == 1.0 {
        return psi(sp_exp, dt);
    }
    if w == 0.0 {
        return psi_clustering(sp_clu, dt);
    }
    Ok(w * psi(sp_exp, dt)? + (1.0 - w) * psi_clustering(sp_clu, dt)?)
}

// ---------------------------------------------------------------------------
// Moments
// ---------------------------------------------------------------------------

/// m-th moment in the source convention, carrying the R_Q factor:
/// ⟨Δt^m⟩ = R_Q·τ^m·m!/(1 − m/α) for α > m, divergent otherwise.
///
/// Note m = 0 yields R_Q, not 1 — this convention is not a normalized
/// moment; see [`moment_conditional`] for the normalized one.
pub fn moment(sp: &SuperstatParams, r_q: f64, m: u32) -> Result<Moment> {
    sp.require(Direction::Expanding, "moment")?;
    if !r_q.is_finite() || r_q <= 0.0 {
        return Err(Error::domain(format!("r_q must be finite and > 0, got {r_q}")));
    }
    Ok(match moment_conditional(sp, m)? {
        Moment::Finite(v) => Moment::Finite(r_q * v),
        Moment::Divergent => Moment::Divergent,
    })
}

/// m-th conditional moment ∫ Δt^m·ψ dΔt = τ^m·m!/(1 − m/α) for α > m,
/// divergent otherwise (the normalized-density convention).
pub fn moment_conditional(sp: &SuperstatParams, m: u32) -> Result<Moment> {
    sp.require(Direction::Expanding, "moment_conditional")?;
    let mf = f64::from(m);
    if sp.alpha <= mf {
        return Ok(Moment::Divergent);
    }
    let mut factorial = 1.0;
    for k in 2..=m {
        factorial *= f64::from(k);
    }
    Ok(Moment::Finite(sp.tau_q.powi(m as i32) * factorial / (1.0 - mf / sp.alpha)))
}

// ---------------------------------------------------------------------------
// Cross-threshold identities and scaling laws
// ---------------------------------------------------------------------------

/// Mean interevent time recovered from three relaxation times:
/// ln R_Q = ln(τ_Q(Q)/τ_Q(0)) / ln(τ_Q(ε̄)/τ_Q(0)).
pub fn rq_from_tau_ratios(tau_q_at_q: f64, tau_q_at_epsbar: f64, tau0: f64) -> Result<f64> {
    check_positive([
        ("tau_q_at_q", tau_q_at_q),
        ("tau_q_at_epsbar", tau_q_at_epsbar),
        ("tau0", tau0),
    ])?;
    let denom = (tau_q_at_epsbar / tau0).ln();
    if denom == 0.0 {
        return Err(Error::domain(
            "tau_q_at_epsbar equals tau0: log-ratio denominator vanishes".to_string(),
        ));
    }
    let ln_r = (tau_q_at_q / tau0).ln() / denom;
    if ln_r > MAX_EXP {
        return Err(Error::overflow(format!("R_Q with ln R_Q = {ln_r:.1} exceeds f64 range")));
    }
    Ok(ln_r.exp())
}

/// Free relaxation time from the characteristic one:
/// τ_Q(0) = τ_Q(Q)·R_Q^{−1/α}. Gradual underflow to 0 at extreme R_Q^{1/α}
/// is acceptable (the physical value is indistinguishable from 0).
pub fn tau0_from_tauq(tau_q: f64, r_q: f64, alpha: f64) -> Result<f64> {
    check_positive([("tau_q", tau_q), ("r_q", r_q), ("alpha", alpha)])?;
    Ok(tau_q * (-r_q.ln() / alpha).exp())
}

/// Threshold dependence of the inverse-temperature analog:
/// B_Q = B^{1/η}·Q^ζ/ε̄^{1+ζ} (equivalently (B^{1/η}/ε̄)·ln^{ζ/η} R_Q with
/// R_Q from the calib = 1 recurrence law).
pub fn scaling_bq(law: &ScalingLaw, p: &WeibullParams, q: f64) -> Result<f64> {
    law.validate()?;
    p.validate()?;
    if !q.is_finite() || q <= 0.0 {
        return Err(Error::domain(format!("threshold q must be finite and > 0, got {q}")));
    }
    Ok(law.b.powf(1.0 / p.eta) * q.powf(law.zeta) / p.eps_bar.powf(1.0 + law.zeta))
}

/// Superscaling of the shape exponent: 1/α_Q = B·ln^ζ R_Q.
pub fn alpha_from_scaling(law: &ScalingLaw, r_q: f64) -> Result<f64> {
    law.validate()?;
    if !r_q.is_finite() || r_q <= 1.0 {
        return Err(Error::domain(format!("r_q must be finite and > 1, got {r_q}")));
    }
    Ok((law.b * r_q.ln().powf(law.zeta)).recip())
}

/// ln of the relaxation-time ratio from the scaling law:
/// ln(τ_Q(Q)/τ_Q(0)) = B·ln^{1+ζ} R_Q. Overflow-safe companion of
/// [`tauq_ratio_from_scaling`].
pub fn ln_tauq_ratio_from_scaling(law: &ScalingLaw, r_q: f64) -> Result<f64> {
    law.validate()?;
    if !r_q.is_finite() || r_q <= 1.0 {
        return Err(Error::domain(format!("r_q must be finite and > 1, got {r_q}")));
    }
    Ok(law.b * r_q.ln().powf(1.0 + law.zeta))
}

/// Relaxation-time ratio τ_Q(Q)/τ_Q(0) = exp(B·ln^{1+ζ} R_Q).
pub fn tauq_ratio_from_scaling(law: &ScalingLaw, r_q: f64) -> Result<f64> {
    let ln_ratio = ln_tauq_ratio_from_scaling(law, r_q)?;
    if ln_ratio > MAX_EXP {
        return Err(Error::overflow(format!(
            "tau ratio with ln = {ln_ratio:.1} exceeds f64 range; use ln_tauq_ratio_from_scaling"
        )));
    }
    Ok(ln_ratio.exp())
}

// ---------------------------------------------------------------------------
// Shared argument checks
// ---------------------------------------------------------------------------

fn check_dt(dt: f64) -> Result<()> {
    if !dt.is_finite() || dt < 0.0 {
        return Err(Error::domain(format!("dt must be finite and ≥ 0, got {dt}")));
    }
    Ok(())
}

fn check_positive<const N: usize>(pairs: [(&str, f64); N]) -> Result<()> {
    for (name, v) in pairs {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
