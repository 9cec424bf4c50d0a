//! Randomized self-consistency checks of the closed-form identity web.
//!
//! The parameter laws of the valley model are over-determined: α, B_Q, R_Q,
//! the relaxation-time ratios and the superscaling constants are tied
//! together by exact algebraic identities, and the incomplete-gamma halves
//! of the density/CDF pair must recombine into Γ. Each check draws random
//! parameter sets (chain-consistent by construction), evaluates one identity
//! through two independent code paths, and records the worst relative
//! discrepancy.
//!
//! # Conventions
//!
//! Checks are deterministic in `seed` (per-set counter substreams, as in the
//! sampler). `perturb` injects a relative fault of 1e-6 into the left-hand
//! side of the named check — a self-test that the harness actually rejects a
//! broken identity, used by the CLI's failure-path tests.

use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreme::{q_of_rq, rq_of_q, WeibullParams};
use crate::mc::{draw_rng, open_uniform};
use crate::special::{gamma_complete, lower_incomplete_gamma, upper_incomplete_gamma};
use crate::superstat::{
    alpha_from_bq, alpha_from_scaling, bq_from_alpha, ln_tauq_ratio_from_scaling,
    relaxation_time, rq_from_tau_ratios, scaling_bq, tau0_from_tauq, Direction, RelaxationSpec,
    ScalingLaw,
};

/// Names of the identity checks, in report order.
pub const CHECK_NAMES: [&str; 7] = [
    "rq-threshold-roundtrip",
    "alpha-bq-roundtrip",
    "bq-scaling-consistency",
    "tau-ratio-chain",
    "tau0-roundtrip",
    "superscaling-ratio",
    "gamma-complementarity",
];

/// Magnitude of the fault injected by `perturb`.
const FAULT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Random parameter sets per check.
    pub n_sets: usize,
    /// Worst tolerated relative discrepancy.
    pub tol: f64,
    pub seed: u64,
    /// Name of a check to deliberately break (see module docs).
    #[serde(default)]
    pub perturb: Option<String>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { n_sets: 1000, tol: 1e-10, seed: 0x1DE57, perturb: None }
    }
}

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sets == 0 {
            return Err(Error::invalid_input("n_sets must be ≥ 1".to_string()));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::domain(format!("tol must be finite and > 0, got {}", self.tol)));
        }
        if let Some(name) = &self.perturb {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(Error::invalid_input(format!(
                    "unknown check '{name}'; valid names: {}",
                    CHECK_NAMES.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one identity check over all parameter sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst relative discrepancy observed.
    pub max_err: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
    pub n_sets: usize,
}

// ---------------------------------------------------------------------------
// Random chain-consistent parameter sets
// ---------------------------------------------------------------------------

/// One coherent draw of the whole parameter web.
struct ParamSet {
    p: WeibullParams,
    q: f64,
    r_q: f64,
    alpha: f64,
    law: ScalingLaw,
    tau0: f64,
    spec: RelaxationSpec,
    /// Incomplete-gamma order and split point.
    a: f64,
    x: f64,
}

fn log_uniform(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + open_uniform(rng) * (hi / lo).ln()).exp()
}

fn sample_set(seed: u64, index: u64) -> Result<ParamSet> {
    let mut rng = draw_rng(seed, index);
    let eta = 0.3 + 1.2 * open_uniform(&mut rng);
    let eps_bar = log_uniform(&mut rng, 1e-4, 0.1);
    let p = WeibullParams::new(eta, eps_bar);
    // Threshold in units of ε̄, spanning mild to deep-tail events.
    let z = 0.5 + 7.5 * open_uniform(&mut rng);
    let q = z * eps_bar;
    let ln_r = z.powf(eta);
    let r_q = ln_r.exp();
    // Keep ln(τ_Q(Q)/τ_Q(0)) = ln R_Q / α at most 200, far from overflow.
    let alpha = log_uniform(&mut rng, (ln_r / 200.0).max(0.05), 50.0);
    let b_q = bq_from_alpha(alpha, eps_bar, eta)?;
    let zeta = 0.5 + 2.5 * open_uniform(&mut rng);
    // Superscaling prefactor consistent with (α, R_Q, ζ) by construction.
    let law = ScalingLaw::new((alpha * ln_r.powf(zeta)).recip(), zeta);
    law.validate()?;
    let tau0 = log_uniform(&mut rng, 0.1, 10.0);
    let spec = RelaxationSpec { tau0, b_q, eta, direction: Direction::Expanding };
    let a = log_uniform(&mut rng, 0.1, 60.0);
    let x = 2.0 * a * open_uniform(&mut rng);
    Ok(ParamSet { p, q, r_q, alpha, law, tau0, spec, a, x })
}

// ---------------------------------------------------------------------------
// The identities, each as (lhs, rhs, scale)
// ---------------------------------------------------------------------------

type Triple = (f64, f64, f64);

/// R_Q ↦ Q ↦ R_Q through the threshold law and back.
fn rq_threshold_roundtrip(s: &ParamSet) -> Result<Triple> {
    let lhs = rq_of_q(&s.p, q_of_rq(&s.p, s.r_q)?)?;
    Ok((lhs, s.r_q, s.r_q))
}

/// α ↦ B_Q ↦ α through the inverse-temperature identity and back.
fn alpha_bq_roundtrip(s: &ParamSet) -> Result<Triple> {
    let lhs = alpha_from_bq(bq_from_alpha(s.alpha, s.p.eps_bar, s.p.eta)?, s.p.eps_bar, s.p.eta)?;
    Ok((lhs, s.alpha, s.alpha))
}

/// B_Q from the threshold power law vs. B_Q from α(R_Q) under superscaling.
fn bq_scaling_consistency(s: &ParamSet) -> Result<Triple> {
    let lhs = scaling_bq(&s.law, &s.p, s.q)?;
    let rhs = bq_from_alpha(alpha_from_scaling(&s.law, s.r_q)?, s.p.eps_bar, s.p.eta)?;
    Ok((lhs, rhs, rhs))
}

/// R_Q recovered from the three relaxation times τ_Q(Q), τ_Q(ε̄), τ_Q(0).
fn tau_ratio_chain(s: &ParamSet) -> Result<Triple> {
    let tau_at_q = relaxation_time(&s.spec, s.q)?;
    let tau_at_eps = relaxation_time(&s.spec, s.p.eps_bar)?;
    let lhs = rq_from_tau_ratios(tau_at_q, tau_at_eps, s.tau0)?;
    Ok((lhs, s.r_q, s.r_q))
}

/// τ_Q(0) recovered from τ_Q(Q), R_Q and α.
fn tau0_roundtrip(s: &ParamSet) -> Result<Triple> {
    let lhs = tau0_from_tauq(relaxation_time(&s.spec, s.q)?, s.r_q, s.alpha)?;
    Ok((lhs, s.tau0, s.tau0))
}

/// ln(τ_Q(Q)/τ_Q(0)) from the superscaling constants vs. from the
/// elementary relaxation law.
fn superscaling_ratio(s: &ParamSet) -> Result<Triple> {
    let lhs = ln_tauq_ratio_from_scaling(&s.law, s.r_q)?;
    let rhs = (relaxation_time(&s.spec, s.q)? / s.tau0).ln();
    Ok((lhs, rhs, rhs))
}

/// γ(a,x) + Γ′(a,x) = Γ(a): the density and CDF halves recombine.
fn gamma_complementarity(s: &ParamSet) -> Result<Triple> {
    let lhs = lower_incomplete_gamma(s.a, s.x)? + upper_incomplete_gamma(s.a, s.x)?;
    let rhs = gamma_complete(s.a)?;
    Ok((lhs, rhs, rhs))
}

// ---------------------------------------------------------------------------

/// Run every identity check over `n_sets` random parameter sets.
pub fn run_checks(cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let kernels: [fn(&ParamSet) -> Result<Triple>; 7] = [
        rq_threshold_roundtrip,
        alpha_bq_roundtrip,
        bq_scaling_consistency,
        tau_ratio_chain,
        tau0_roundtrip,
        superscaling_ratio,
        gamma_complementarity,
    ];
    let mut max_err = [0.0f64; 7];
    for i in 0..cfg.n_sets {
        let set = sample_set(cfg.seed, i as u64)?;
        for (k, kernel) in kernels.iter().enumerate() {
            let (lhs, rhs, scale) = kernel(&set)?;
            let fault =
                if cfg.perturb.as_deref() == Some(CHECK_NAMES[k]) { 1.0 + FAULT } else { 1.0 };
            let err = (lhs * fault - rhs).abs() / scale.abs().max(f64::MIN_POSITIVE);
            if !err.is_finite() {
                return Err(Error::domain(format!(
                    "check {} produced non-finite discrepancy at set {i}",
                    CHECK_NAMES[k]
                )));
            }
            max_err[k] = max_err[k].max(err);
        }
    }
    let checks: Vec<CheckResult> = CHECK_NAMES
        .iter()
        .zip(max_err)
        .map(|(name, err)| CheckResult {
            name: name.to_string(),
            passed: err <= cfg.tol,
            max_err: err,
            tol: cfg.tol,
        })
        .collect();
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(CheckReport { checks, all_passed, n_sets: cfg.n_sets })
}
