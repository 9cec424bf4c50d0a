//! Independent quadrature oracles for the closed-form densities.
//!
//! The functions here integrate the *defining* model — the magnitude-averaged
//! exponential superposition — directly in magnitude space, sharing no
//! algebra with the closed forms in [`crate::superstat`]. They exist so the
//! test suite can confront every closed-form expression with the integral it
//! claims to equal; they are deliberately slow and are not part of the
//! numerical API proper.
//!
//! All routines run a two-pass adaptive Simpson scheme: a rough pass pins the
//! magnitude of the integral, a second pass re-integrates with an absolute
//! tolerance scaled to that magnitude, giving ~1e-11 relative accuracy on
//! these smooth integrands.

use crate::quad::{integrate_panels, log_edges, QuadConfig};
use crate::special::{ln_gamma, upper_incomplete_gamma};
use crate::superstat::{psi, psi_clustering, Direction, SuperstatParams};

/// Where quadrature hands over to the analytic tail closure, in u = Δt/τ.
const U_TAIL: f64 = 200.0;

/// Two-pass panel integration with self-scaled tolerance.
fn integrate_scaled<F: Fn(f64) -> f64>(f: &F, edges: &[f64]) -> f64 {
    let rough = integrate_panels(f, edges, QuadConfig { abs_tol: 1e-8, max_depth: 40 });
    if rough == 0.0 {
        return 0.0;
    }
    let cfg = QuadConfig { abs_tol: (rough.abs() * 1e-11).max(1e-300), max_depth: 48 };
    integrate_panels(f, edges, cfg)
}

/// Direct quadrature of the waiting-time superposition
/// ∫_q^∞ (1/τ(ε))·exp(−Δt/τ(ε))·D(ε) dε with τ(ε) = τ₀·exp(±(b_q·ε)^η) and
/// D the Weibull magnitude density (η, ε̄), everything written out inline.
///
/// This is the *unconditional* density over all ticks: its total mass is
/// P(ε ≥ q) = 1/R_Q, so `R_Q × superposition_density` is what the normalized
/// closed forms must reproduce. For the clustering direction, `dt` must be
/// positive (the superposition diverges at Δt = 0 when α < 1).
pub fn superposition_density(
    eta: f64,
    eps_bar: f64,
    q: f64,
    b_q: f64,
    tau0: f64,
    direction: Direction,
    dt: f64,
) -> f64 {
    let sign = match direction {
        Direction::Expanding => 1.0,
        Direction::Clustering => -1.0,
    };
    let w_q = (q / eps_bar).powf(eta);
    let alpha = (b_q * eps_bar).powf(eta).recip();

    // How far past w_q (in w = (ε/ε̄)^η, i.e. in units of the magnitude-law
    // exponent) the integrand can contribute. The Weibull weight kills
    // everything beyond s ≈ 80; for the expanding direction at large Δt the
    // exponential selects relaxation times of order Δt, pushing the active
    // region out by α·ln(Δt/τ_Q(Q)).
    let ln_u_char = if dt > 0.0 {
        dt.ln() - (tau0.ln() + sign * (b_q * q).powf(eta))
    } else {
        0.0
    };
    let s_max = match direction {
        Direction::Expanding => 80.0 + 1.5 * alpha * ln_u_char.max(0.0),
        Direction::Clustering => 80.0,
    };

    let integrand = |eps: f64| -> f64 {
        let w = (eps / eps_bar).powf(eta);
        let ln_tau = tau0.ln() + sign * (b_q * eps).powf(eta);
        let x = if dt == 0.0 { 0.0 } else { (dt.ln() - ln_tau).exp() };
        if x > 745.0 {
            return 0.0;
        }
        let ln_weibull = eta.ln() - eps_bar.ln() + (eta - 1.0) * (eps / eps_bar).ln() - w;
        (-ln_tau - x + ln_weibull).exp()
    };

    // Panel edges log-spaced in s = w − w_q to resolve the boundary layer at
    // ε = q, mapped back to magnitude space.
    let mut edges = vec![q];
    for s in log_edges(1e-12, s_max, 280) {
        edges.push(eps_bar * (w_q + s).powf(1.0 / eta));
    }
    integrate_scaled(&integrand, &edges)
}

/// Total mass ∫₀^∞ ψ dΔt of a closed-form density by quadrature, with
/// analytic closure of the truncated ends (power-law tail for the expanding
/// form, the u^{α−1} ramp and exponential tail for the clustering form).
pub fn psi_mass_quad(sp: &SuperstatParams) -> f64 {
    let tau = sp.tau_q;
    match sp.direction {
        Direction::Expanding => {
            let f = |u: f64| psi(sp, u * tau).unwrap() * tau;
            let mut edges = vec![0.0];
            edges.extend(log_edges(1e-9, U_TAIL, 240));
            let body = integrate_scaled(&f, &edges);
            // Beyond U_TAIL, γ(1+α,·) has saturated at Γ(1+α) to ~e^{−200}:
            // ∫ α·u^{−(1+α)}·Γ(1+α) du = Γ(1+α)·U_TAIL^{−α}.
            let tail = (ln_gamma(1.0 + sp.alpha) - sp.alpha * U_TAIL.ln()).exp();
            body + tail
        }
        Direction::Clustering => {
            let u_lo = 1e-12;
            let f = |u: f64| psi_clustering(sp, u * tau).unwrap() * tau;
            let edges = log_edges(u_lo, 60.0, 240);
            let body = integrate_scaled(&f, &edges);
            // Small-u ramp: Γ′(1−α,u) → Γ(1−α), so the missing mass is
            // Γ(1−α)·u_lo^α up to O(u_lo).
            let head = (ln_gamma(1.0 - sp.alpha)).exp() * u_lo.powf(sp.alpha);
            // Large-u closure by parts: u^α·Γ′(1−α,u) + e^{−u} at u = 60.
            let tail = 60f64.powf(sp.alpha) * upper_incomplete_gamma(1.0 - sp.alpha, 60.0).unwrap()
                + (-60f64).exp();
            head + body + tail
        }
    }
}

/// m-th conditional moment ∫₀^∞ Δt^m·ψ dΔt of the expanding closed form by
/// quadrature (α > m required for convergence; the analytic tail closure
/// integrates the saturated power law beyond u = 200).
pub fn psi_moment_quad(sp: &SuperstatParams, m: u32) -> f64 {
    let tau = sp.tau_q;
    let mf = f64::from(m);
    assert!(sp.alpha > mf, "moment quadrature requires alpha > m");
    let f = |u: f64| u.powi(m as i32) * psi(sp, u * tau).unwrap() * tau;
    let mut edges = vec![0.0];
    edges.extend(log_edges(1e-9, U_TAIL, 240));
    let body = integrate_scaled(&f, &edges);
    // ∫_{U}^{∞} u^m·α·u^{−(1+α)}·Γ(1+α) du = α·Γ(1+α)·U^{m−α}/(α−m).
    let tail = sp.alpha / (sp.alpha - mf)
        * (ln_gamma(1.0 + sp.alpha) + (mf - sp.alpha) * U_TAIL.ln()).exp();
    tau.powi(m as i32) * (body + tail)
}

/// Cumulative probability ∫₀^x ψ dΔt of the expanding closed form by
/// quadrature, for cross-checking the analytic CDF.
pub fn psi_cdf_quad(sp: &SuperstatParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let tau = sp.tau_q;
    let u_hi = x / tau;
    let f = |u: f64| psi(sp, u * tau).unwrap() * tau;
    let mut edges = vec![0.0];
    edges.extend(log_edges(u_hi * 1e-9, u_hi, 160));
    integrate_scaled(&f, &edges)
}
