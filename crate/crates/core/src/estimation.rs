//! Parameter estimation: magnitude-law parameters from mean-interevent
//! curves, density shape/scale from interevent histograms, the universal
//! superscaling constants, and the piecewise-linear τ_Q(Q)–R_Q calibration.
//!
//! # Conventions
//!
//! Density fits operate on log densities because the data span several
//! decades. Each nonlinear fit is a derivative-free simplex refinement seeded
//! by the model's exact linearization, so noiseless input converges in a
//! handful of iterations and the refinement can only improve the seed (the
//! best-vertex objective is monotone). Standard errors come from the local
//! quadratic model of the objective at the optimum: cov = 2·σ̂²·H⁻¹ with
//! σ̂² = SSR/(n−p).
//!
//! The superscaling fit is seeded by the log–log linearization
//! ln(1/α) = ln B + ζ·ln ln R_Q but refines against residuals in 1/α itself:
//! with only a handful of points per asset, log-space residuals overweight
//! the smallest thresholds and push (B, ζ) outside their quoted error bars,
//! while the linear-space objective reproduces them. Fitted α values at the
//! exponential sentinel are excluded automatically — the sentinel is a
//! regime label, not a measurement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Binning, Histogram};
use crate::extreme::WeibullParams;
use crate::optimize::{nelder_mead, numerical_hessian, ols, stderr_from_hessian};
use crate::superstat::{
    bq_from_alpha, psi, psi_clustering, tau0_from_tauq, Direction, SuperstatParams,
};

/// Default cap for the density shape exponent; fits that reach it are
/// reporting "indistinguishable from exponential", not a measurement.
pub const DEFAULT_ALPHA_CAP: f64 = 1000.0;

/// Fitted α at or above this is treated as a sentinel by downstream fits.
pub const SENTINEL_ALPHA_MIN: f64 = 999.0;

/// Outcome of a parameter fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    /// Fitted parameter values by name.
    pub params: BTreeMap<String, f64>,
    /// Standard error per parameter (0 where not estimable).
    pub stderr: BTreeMap<String, f64>,
    /// Final residual: the sum of squared residuals in the fit's working
    /// space (log densities for density fits, 1/α for superscaling, τ for
    /// the piecewise calibration).
    pub objective: f64,
    pub n_points: usize,
    /// False reports are still inspectable (best iterate retained).
    pub converged: bool,
    /// Human-readable flags: clamps, exclusions, degeneracies.
    pub notes: Vec<String>,
    /// Parameter covariance in `params` iteration order; in-memory only.
    #[serde(skip)]
    pub covariance: Vec<Vec<f64>>,
}

impl FitReport {
    /// Fitted value by name.
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    fn new(
        names_values: &[(&str, f64)],
        stderrs: &[f64],
        objective: f64,
        n_points: usize,
        converged: bool,
    ) -> FitReport {
        let params = names_values.iter().map(|(n, v)| (n.to_string(), *v)).collect();
        let stderr = names_values
            .iter()
            .zip(stderrs)
            .map(|((n, _), s)| (n.to_string(), *s))
            .collect();
        FitReport {
            params,
            stderr,
            objective,
            n_points,
            converged,
            notes: Vec::new(),
            covariance: Vec::new(),
        }
    }
}

/// Two least-squares lines τ_Q(Q) = a_s·R_Q + b_s meeting at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub a_l: f64,
    pub b_l: f64,
    pub a_r: f64,
    pub b_r: f64,
    /// R_Q value separating the segments (their crossing when they cross).
    pub breakpoint: f64,
}

impl PiecewiseLinear {
    /// Evaluate τ_Q(Q) at the given R_Q, choosing the segment by side.
    pub fn eval(&self, r_q: f64) -> f64 {
        if r_q <= self.breakpoint {
            self.a_l * r_q + self.b_l
        } else {
            self.a_r * r_q + self.b_r
        }
    }

    /// Extrapolated free relaxation time at R_Q = 1: τ₀(0) = a_L + b_L.
    pub fn tau0_zero(&self) -> f64 {
        self.a_l + self.b_l
    }
}

// ---------------------------------------------------------------------------
// Mean-interevent-curve fit (magnitude-law parameters)
// ---------------------------------------------------------------------------

/// Fit (η, ε̄, calib) to (Q, R_Q) points via R = calib·exp((Q/ε̄)^η).
///
/// Seeded by ordinary least squares on ln ln R vs ln Q (exact when calib = 1
/// and the data are noiseless), then refined by simplex minimization of the
/// squared residuals in ln R_Q. Two points are accepted as an exact
/// under-determined interpolation with calib pinned at 1.
pub fn fit_rq_curve(points: &[(f64, f64)], weights: Option<&[f64]>) -> Result<FitReport> {
    for &(q, r) in points {
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::domain(format!("threshold q must be finite and > 0, got {q}")));
        }
        if !r.is_finite() || r <= 1.0 {
            return Err(Error::domain(format!("r_q must be finite and > 1, got {r}")));
        }
    }
    let n = points.len();
    if let Some(w) = weights {
        if w.len() != n || w.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::invalid_input(
                "weights must match the point count and be positive".to_string(),
            ));
        }
    }
    if n < 2 {
        return Err(Error::insufficient_data(format!(
            "fit_rq_curve needs ≥ 2 points, got {n}"
        )));
    }

    // Fix the evaluation order so the fit is invariant under input order.
    let mut data: Vec<(f64, f64, f64)> = points
        .iter()
        .enumerate()
        .map(|(i, &(q, r))| (q, r, weights.map_or(1.0, |w| w[i])))
        .collect();
    data.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let ln_q: Vec<f64> = data.iter().map(|p| p.0.ln()).collect();
    let lnln_r: Vec<f64> = data.iter().map(|p| p.1.ln().ln()).collect();

    if n == 2 {
        // Exact interpolation through two points with calib = 1.
        if ln_q[0] == ln_q[1] {
            return Err(Error::invalid_input(
                "two-point fit needs distinct thresholds".to_string(),
            ));
        }
        let eta = (lnln_r[1] - lnln_r[0]) / (ln_q[1] - ln_q[0]);
        if eta <= 0.0 {
            return Err(Error::invalid_input(format!(
                "two-point interpolation gives non-positive eta = {eta}"
            )));
        }
        let eps_bar = (ln_q[0] - lnln_r[0] / eta).exp();
        let mut rep = FitReport::new(
            &[("calib", 1.0), ("eps_bar", eps_bar), ("eta", eta)],
            &[0.0, 0.0, 0.0],
            0.0,
            2,
            true,
        );
        rep.notes.push("under-determined: two points, calib pinned at 1".to_string());
        return Ok(rep);
    }

    let seed = ols(&ln_q, &lnln_r)?;
    if seed.slope <= 0.0 {
        return Err(Error::invalid_input(format!(
            "linearized seed gives non-positive eta = {}; R_Q must grow with Q",
            seed.slope
        )));
    }
    let eta0 = seed.slope;
    let eps0 = (-seed.intercept / seed.slope).exp();

    // Parameters in log space keep the simplex inside the positive octant.
    let objective_log = |t: &[f64]| -> f64 {
        let (eta, eps_bar, calib) = (t[0].exp(), t[1].exp(), t[2].exp());
        data.iter()
            .map(|&(q, r, w)| {
                let model = calib.ln() + (q / eps_bar).powf(eta);
                let res = r.ln() - model;
                w * res * res
            })
            .sum()
    };
    let nm = nelder_mead(
        objective_log,
        &[eta0.ln(), eps0.ln(), 0.0],
        &[0.1, 0.1, 0.1],
        4000,
        1e-15,
    );
    let (eta, eps_bar, calib) = (nm.x[0].exp(), nm.x[1].exp(), nm.x[2].exp());

    // Uncertainties from the curvature in plain (η, ε̄, calib) coordinates.
    let objective_lin = |p: &[f64]| -> f64 {
        if p.iter().any(|v| *v <= 0.0) {
            return f64::INFINITY;
        }
        objective_log(&[p[0].ln(), p[1].ln(), p[2].ln()])
    };
    let hess = numerical_hessian(objective_lin, &[eta, eps_bar, calib], 1e-4);
    let (se, cov) = stderr_from_hessian(&hess, nm.fx, n);

    let mut rep = FitReport::new(
        &[("calib", calib), ("eps_bar", eps_bar), ("eta", eta)],
        // FitReport sorts by name: calib, eps_bar, eta. Hessian order is
        // (eta, eps_bar, calib) — reorder.
        &[se[2], se[1], se[0]],
        nm.fx,
        n,
        nm.converged,
    );
    rep.covariance = cov;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Density fit (α_Q, τ_Q(Q))
// ---------------------------------------------------------------------------

/// Fit (α_Q, τ_Q(Q)) to a binned interevent density by weighted least
/// squares of log density against the closed form at bin centers, weights
/// proportional to bin counts.
///
/// The shape exponent is capped at `alpha_cap`: whenever an unconstrained
/// power-law fit does no better than a pure exponential, the report carries
/// α = alpha_cap with a clamp note — the sentinel convention for "no
/// power-law signature in this histogram".
pub fn fit_psi(h: &Histogram, direction: Direction, alpha_cap: f64) -> Result<FitReport> {
    if !alpha_cap.is_finite() || alpha_cap <= 0.0 {
        return Err(Error::domain(format!("alpha_cap must be finite and > 0, got {alpha_cap}")));
    }
    let centers = h.centers();
    let mut pts: Vec<(f64, f64, f64)> = Vec::new(); // (dt, ln density, weight)
    for ((&c, &d), &cnt) in centers.iter().zip(&h.densities).zip(&h.counts) {
        if cnt > 0 && d > 0.0 && c > 0.0 {
            pts.push((c, d.ln(), cnt as f64));
        }
    }
    if pts.len() < 4 {
        return Err(Error::insufficient_data(format!(
            "fit_psi needs ≥ 4 informative bins, got {}",
            pts.len()
        )));
    }
    let n = pts.len();
    let total_w: f64 = pts.iter().map(|p| p.2).sum();
    let tau_guess = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / total_w;

    let ln_density = |alpha: f64, tau: f64, dt: f64| -> f64 {
        let sp = match direction {
            Direction::Expanding => SuperstatParams::expanding(alpha.min(alpha_cap), tau),
            Direction::Clustering => SuperstatParams::clustering(alpha, tau),
        };
        let v = match direction {
            Direction::Expanding => psi(&sp, dt),
            Direction::Clustering => psi_clustering(&sp, dt),
        };
        match v {
            Ok(d) if d > 0.0 => d.ln(),
            _ => f64::NEG_INFINITY,
        }
    };
    let sse = |alpha: f64, tau: f64| -> f64 {
        pts.iter()
            .map(|&(dt, y, w)| {
                let m = ln_density(alpha, tau, dt);
                if m.is_finite() {
                    let r = y - m;
                    w * r * r
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    };

    // Deterministic coarse grid seed, then simplex refinement in log/logit
    // coordinates so the parameters stay inside their domains.
    let (alpha_grid_lo, alpha_grid_hi) = match direction {
        Direction::Expanding => (0.05f64, alpha_cap.min(50.0)),
        Direction::Clustering => (0.02f64, 0.98f64),
    };
    let mut best = (f64::INFINITY, alpha_grid_lo, tau_guess);
    for i in 0..25 {
        let fa = i as f64 / 24.0;
        let alpha = match direction {
            Direction::Expanding => {
                (alpha_grid_lo.ln() + fa * (alpha_grid_hi / alpha_grid_lo).ln()).exp()
            }
            Direction::Clustering => alpha_grid_lo + fa * (alpha_grid_hi - alpha_grid_lo),
        };
        for j in 0..25 {
            let ft = j as f64 / 24.0;
            let tau = (0.03f64.ln() + ft * (30.0f64 / 0.03).ln()).exp() * tau_guess;
            let v = sse(alpha, tau);
            if v < best.0 {
                best = (v, alpha, tau);
            }
        }
    }

    let to_alpha = |t: f64| match direction {
        Direction::Expanding => t.exp(),
        Direction::Clustering => 1.0 / (1.0 + (-t).exp()),
    };
    let from_alpha = |a: f64| match direction {
        Direction::Expanding => a.ln(),
        Direction::Clustering => (a / (1.0 - a)).ln(),
    };
    let nm = nelder_mead(
        |t: &[f64]| sse(to_alpha(t[0]), t[1].exp()),
        &[from_alpha(best.1), best.2.ln()],
        &[0.4, 0.4],
        4000,
        1e-15,
    );
    let mut alpha = to_alpha(nm.x[0]);
    let mut tau = nm.x[1].exp();
    let mut fx = nm.fx;
    let mut converged = nm.converged;
    let mut notes = Vec::new();
    let mut clamped = false;

    if direction == Direction::Expanding {
        // Dedicated exponential fit; if it matches the free fit, the data
        // carry no power-law signature and the sentinel convention applies.
        let exp_sse = |tau: f64| -> f64 {
            pts.iter()
                .map(|&(dt, y, w)| {
                    let r = y - (-tau.ln() - dt / tau);
                    w * r * r
                })
                .sum()
        };
        let nm_exp = nelder_mead(|t: &[f64]| exp_sse(t[0].exp()), &[tau_guess.ln()], &[0.4], 2000, 1e-15);
        let tau_exp = nm_exp.x[0].exp();
        if nm_exp.fx <= fx * (1.0 + 1e-6) || alpha >= alpha_cap * 0.999 {
            alpha = alpha_cap;
            tau = if nm_exp.fx <= fx { tau_exp } else { tau };
            fx = nm_exp.fx.min(fx);
            converged = true;
            clamped = true;
            notes.push(format!(
                "alpha clamped at cap {alpha_cap}: density indistinguishable from exponential"
            ));
        }
    }

    let (se, cov) = if clamped {
        // Only τ carries a meaningful uncertainty at the cap.
        let h1 = numerical_hessian(
            |p: &[f64]| {
                if p[0] <= 0.0 {
                    return f64::INFINITY;
                }
                pts.iter()
                    .map(|&(dt, y, w)| {
                        let r = y - (-p[0].ln() - dt / p[0]);
                        w * r * r
                    })
                    .sum()
            },
            &[tau],
            1e-4,
        );
        let (se_t, _) = stderr_from_hessian(&h1, fx, n);
        (vec![0.0, se_t[0]], Vec::new())
    } else {
        let hess = numerical_hessian(
            |p: &[f64]| {
                if p[1] <= 0.0 || p[0] <= 0.0 {
                    return f64::INFINITY;
                }
                if direction == Direction::Clustering && p[0] >= 1.0 {
                    return f64::INFINITY;
                }
                sse(p[0], p[1])
            },
            &[alpha, tau],
            1e-4,
        );
        stderr_from_hessian(&hess, fx, n)
    };

    let mut rep = FitReport::new(
        &[("alpha", alpha), ("tau_q", tau)],
        &se,
        fx,
        n,
        converged,
    );
    rep.notes = notes;
    rep.covariance = cov;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Superscaling fit (B, ζ)
// ---------------------------------------------------------------------------

/// Fit the universal (B, ζ) of 1/α_Q = B·ln^ζ R_Q to (R_Q, α_Q) points.
///
/// Sentinel α values (≥ [`SENTINEL_ALPHA_MIN`]) are excluded automatically
/// with a note. Seeded by OLS of ln(1/α) on ln ln R, refined against
/// residuals in 1/α (see the module notes on why the working space matters).
pub fn fit_superscaling(points: &[(f64, f64)]) -> Result<FitReport> {
    for &(r, a) in points {
        if !r.is_finite() || r <= 1.0 {
            return Err(Error::domain(format!("r_q must be finite and > 1, got {r}")));
        }
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::domain(format!("alpha must be finite and > 0, got {a}")));
        }
    }
    let mut kept: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, a)| a < SENTINEL_ALPHA_MIN)
        .collect();
    // Fix the summation order so the fit is invariant under input order.
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n_excluded = points.len() - kept.len();
    if kept.len() < 3 {
        return Err(Error::insufficient_data(format!(
            "fit_superscaling needs ≥ 3 non-sentinel points, got {} ({} sentinel excluded)",
            kept.len(),
            n_excluded
        )));
    }

    let x: Vec<f64> = kept.iter().map(|p| p.0.ln().ln()).collect();
    let y: Vec<f64> = kept.iter().map(|p| -(p.1.ln())).collect();
    let seed = ols(&x, &y)?;
    let (b0, zeta0) = (seed.intercept.exp(), seed.slope.max(1e-3));

    let sse = |b: f64, zeta: f64| -> f64 {
        kept.iter()
            .map(|&(r, a)| {
                let res = a.recip() - b * r.ln().powf(zeta);
                res * res
            })
            .sum()
    };
    let nm = nelder_mead(
        |t: &[f64]| sse(t[0].exp(), t[1].exp()),
        &[b0.ln(), zeta0.ln()],
        &[0.3, 0.3],
        4000,
        1e-16,
    );
    let (b, zeta) = (nm.x[0].exp(), nm.x[1].exp());

    let hess = numerical_hessian(
        |p: &[f64]| {
            if p[0] <= 0.0 || p[1] <= 0.0 {
                return f64::INFINITY;
            }
            sse(p[0], p[1])
        },
        &[b, zeta],
        1e-4,
    );
    let (se, cov) = stderr_from_hessian(&hess, nm.fx, kept.len());

    let mut rep = FitReport::new(
        &[("b", b), ("zeta", zeta)],
        &se,
        nm.fx,
        kept.len(),
        nm.converged,
    );
    if n_excluded > 0 {
        rep.notes.push(format!("excluded {n_excluded} sentinel alpha point(s)"));
    }
    rep.covariance = cov;
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Piecewise-linear τ_Q(Q) calibration
// ---------------------------------------------------------------------------

/// Fit two straight lines τ_Q(Q) = a_s·R_Q + b_s (s = L, R) to (R_Q, τ_Q(Q))
/// points, choosing the split by exhaustive scan over interior positions
/// (the boundary point is shared by both segments) and minimizing the total
/// squared residual in τ.
pub fn fit_piecewise_tau(points: &[(f64, f64)]) -> Result<(FitReport, PiecewiseLinear)> {
    if points.len() < 4 {
        return Err(Error::insufficient_data(format!(
            "fit_piecewise_tau needs ≥ 4 points, got {}",
            points.len()
        )));
    }
    for &(r, t) in points {
        if !r.is_finite() || !t.is_finite() {
            return Err(Error::domain(format!("non-finite point ({r}, {t})")));
        }
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = pts.len();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();

    // Scan splits k: left = points[0..=k], right = points[k..] (shared knot).
    let mut best: Option<(f64, usize, crate::optimize::OlsFit, crate::optimize::OlsFit)> = None;
    for k in 1..=(n - 2) {
        let left = ols(&xs[..=k], &ys[..=k]);
        let right = ols(&xs[k..], &ys[k..]);
        if let (Ok(l), Ok(r)) = (left, right) {
            let total = l.ssr + r.ssr;
            if best.as_ref().is_none_or(|b| total < b.0) {
                best = Some((total, k, l, r));
            }
        }
    }
    let (total_ssr, k, l, r) =
        best.ok_or_else(|| Error::invalid_input("no valid split: a side is degenerate".to_string()))?;

    let mut notes = Vec::new();
    // Breakpoint: segment crossing when it falls inside the data range,
    // otherwise the shared knot.
    let breakpoint = if (l.slope - r.slope).abs() > 1e-12 {
        let cross = (r.intercept - l.intercept) / (l.slope - r.slope);
        if cross >= xs[0] && cross <= xs[n - 1] {
            cross
        } else {
            xs[k]
        }
    } else {
        xs[k]
    };

    // Collinear input: both segments coincide and every split is equivalent.
    let scale: f64 = ys.iter().map(|v| v * v).sum::<f64>().max(1e-30);
    if total_ssr <= 1e-18 * scale
        && (l.slope - r.slope).abs() <= 1e-9 * l.slope.abs().max(1.0)
        && (l.intercept - r.intercept).abs() <= 1e-9 * l.intercept.abs().max(1.0)
    {
        notes.push("collinear input: single line on both sides, breakpoint arbitrary".to_string());
    }

    let pw = PiecewiseLinear {
        a_l: l.slope,
        b_l: l.intercept,
        a_r: r.slope,
        b_r: r.intercept,
        breakpoint,
    };
    let se_tau0 =
        (l.se_slope * l.se_slope + l.se_intercept * l.se_intercept + 2.0 * l.cov_slope_intercept)
            .max(0.0)
            .sqrt();
    let mut rep = FitReport::new(
        &[
            ("a_l", pw.a_l),
            ("a_r", pw.a_r),
            ("b_l", pw.b_l),
            ("b_r", pw.b_r),
            ("breakpoint", pw.breakpoint),
            ("tau0_zero", pw.tau0_zero()),
        ],
        &[l.se_slope, r.se_slope, l.se_intercept, r.se_intercept, 0.0, se_tau0],
        total_ssr,
        n,
        true,
    );
    rep.notes = notes;
    Ok((rep, pw))
}

// ---------------------------------------------------------------------------
// Elementary-quantity derivation
// ---------------------------------------------------------------------------

/// Derive the elementary pair (B_Q, τ_Q(0)) from the fitted key pair
/// (α_Q, τ_Q(Q)) and the magnitude-law parameters.
pub fn derive_elementary(
    sp: &SuperstatParams,
    r_q: f64,
    p: &WeibullParams,
) -> Result<(f64, f64)> {
    sp.validate()?;
    p.validate()?;
    let b_q = bq_from_alpha(sp.alpha, p.eps_bar, p.eta)?;
    let tau0 = tau0_from_tauq(sp.tau_q, r_q, sp.alpha)?;
    Ok((b_q, tau0))
}

// ---------------------------------------------------------------------------
// Synthetic-data helpers shared by tests and the acceptance suite
// ---------------------------------------------------------------------------

/// Build a histogram carrying exact model densities at log-spaced centers,
/// with uniform weights — the noiseless self-consistency input for
/// [`fit_psi`].
pub fn exact_density_histogram<F: Fn(f64) -> f64>(
    density: F,
    dt_lo: f64,
    dt_hi: f64,
    n_bins: usize,
) -> Histogram {
    let edges: Vec<f64> = (0..=n_bins)
        .map(|i| (dt_lo.ln() + (dt_hi / dt_lo).ln() * i as f64 / n_bins as f64).exp())
        .collect();
    let centers: Vec<f64> = edges.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect();
    Histogram {
        counts: vec![1000; n_bins],
        densities: centers.iter().map(|&c| density(c)).collect(),
        n: 1000 * n_bins,
        edges,
        binning: Binning::Logarithmic,
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreme::rq_of_q;
    use approx::assert_relative_eq;
    use rand_chacha::ChaCha12Rng;
    use rand_core::{RngCore, SeedableRng};

    const IBM: WeibullParams = WeibullParams { eta: 0.8246, eps_bar: 0.0078, calib: 1.0 };

    /// Reference rows used across fits: (R_Q, α_Q, τ_Q(Q)).
    const KEY_ROWS: [(f64, f64, f64); 5] = [
        (2.0, 1000.0, 1.4286),
        (5.0, 3.0, 3.33),
        (10.0, 1.90, 5.0),
        (30.0, 0.95, 4.55),
        (70.0, 0.47, 3.85),
    ];

    fn uniform(rng: &mut ChaCha12Rng) -> f64 {
        ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
        let (u1, u2) = (uniform(rng), uniform(rng));
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn synthetic_rq_points(n: usize, noise: f64, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let q = (0.002f64.ln() + (0.06f64 / 0.002).ln() * i as f64 / (n - 1) as f64).exp();
                let r = rq_of_q(&IBM, q).unwrap();
                let jitter = if noise > 0.0 { (noise * standard_normal(&mut rng)).exp() } else { 1.0 };
                (q, r * jitter)
            })
            .collect()
    }

    #[test]
    fn rq_curve_noiseless_recovery() {
        let rep = fit_rq_curve(&synthetic_rq_points(30, 0.0, 1), None).unwrap();
        assert!(rep.converged);
        assert_relative_eq!(rep.param("eta").unwrap(), 0.8246, max_relative = 1e-10);
        assert_relative_eq!(rep.param("eps_bar").unwrap(), 0.0078, max_relative = 1e-10);
        assert_relative_eq!(rep.param("calib").unwrap(), 1.0, max_relative = 1e-10);
        assert!(rep.objective < 1e-18);
    }

    #[test]
    fn rq_curve_noisy_recovery() {
        // 2% multiplicative lognormal noise on R_Q, fixed seed.
        let rep = fit_rq_curve(&synthetic_rq_points(30, 0.02, 42), None).unwrap();
        let eta = rep.param("eta").unwrap();
        let eps = rep.param("eps_bar").unwrap();
        assert!((eta - 0.8246).abs() < 0.03, "eta = {eta}");
        assert!((eps - 0.0078).abs() / 0.0078 < 0.05, "eps_bar = {eps}");
        assert!(rep.stderr["eta"] > 0.0);
    }

    #[test]
    fn rq_curve_two_points_is_exact_but_flagged() {
        let pts = synthetic_rq_points(30, 0.0, 1);
        let two = vec![pts[3], pts[20]];
        let rep = fit_rq_curve(&two, None).unwrap();
        assert_relative_eq!(rep.param("eta").unwrap(), 0.8246, max_relative = 1e-12);
        assert_relative_eq!(rep.param("eps_bar").unwrap(), 0.0078, max_relative = 1e-12);
        assert_eq!(rep.objective, 0.0);
        assert!(rep.notes.iter().any(|n| n.contains("under-determined")));
        assert!(matches!(
            fit_rq_curve(&[(0.01, 5.0)], None),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn rq_curve_rejects_bad_input() {
        assert!(fit_rq_curve(&[(0.0, 5.0), (0.01, 6.0), (0.02, 7.0)], None).is_err());
        assert!(fit_rq_curve(&[(0.01, 0.9), (0.02, 6.0), (0.03, 7.0)], None).is_err());
        // Identical thresholds: no abscissa variance.
        let same = vec![(0.01, 2.0), (0.01, 3.0), (0.01, 4.0)];
        assert!(fit_rq_curve(&same, None).is_err());
    }

    #[test]
    fn psi_fit_noiseless_recovery() {
        let truth = SuperstatParams::expanding(1.9, 5.0);
        let h = exact_density_histogram(|dt| psi(&truth, dt).unwrap(), 0.05, 250.0, 24);
        let rep = fit_psi(&h, Direction::Expanding, DEFAULT_ALPHA_CAP).unwrap();
        assert_relative_eq!(rep.param("alpha").unwrap(), 1.9, max_relative = 1e-6);
        assert_relative_eq!(rep.param("tau_q").unwrap(), 5.0, max_relative = 1e-6);
        assert!(rep.converged);
        assert!(rep.notes.is_empty());
    }

    #[test]
    fn psi_fit_exponential_hits_sentinel() {
        let tau = 1.4286;
        let h = exact_density_histogram(|dt| (-dt / tau).exp() / tau, 0.05, 15.0, 20);
        let rep = fit_psi(&h, Direction::Expanding, DEFAULT_ALPHA_CAP).unwrap();
        assert_eq!(rep.param("alpha").unwrap(), DEFAULT_ALPHA_CAP);
        assert_relative_eq!(rep.param("tau_q").unwrap(), tau, max_relative = 1e-2);
        assert!(rep.notes.iter().any(|n| n.contains("clamped")));
    }

    #[test]
    fn psi_fit_clustering_recovery() {
        let truth = SuperstatParams::clustering(0.47, 3.85);
        let h = exact_density_histogram(|dt| psi_clustering(&truth, dt).unwrap(), 0.1, 200.0, 24);
        let rep = fit_psi(&h, Direction::Clustering, DEFAULT_ALPHA_CAP).unwrap();
        assert_relative_eq!(rep.param("alpha").unwrap(), 0.47, max_relative = 1e-6);
        assert_relative_eq!(rep.param("tau_q").unwrap(), 3.85, max_relative = 1e-6);
    }

    #[test]
    fn psi_fit_requires_informative_bins() {
        let truth = SuperstatParams::expanding(1.9, 5.0);
        let mut h = exact_density_histogram(|dt| psi(&truth, dt).unwrap(), 0.05, 250.0, 5);
        h.counts = vec![5, 5, 0, 0, 5];
        assert!(matches!(
            fit_psi(&h, Direction::Expanding, DEFAULT_ALPHA_CAP),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn superscaling_noiseless_recovery() {
        let (b, zeta) = (0.04798, 2.6096);
        let pts: Vec<(f64, f64)> = [3.0, 8.0, 20.0, 55.0, 150.0]
            .iter()
            .map(|&r: &f64| (r, (b * r.ln().powf(zeta)).recip()))
            .collect();
        let rep = fit_superscaling(&pts).unwrap();
        assert_relative_eq!(rep.param("b").unwrap(), b, max_relative = 1e-10);
        assert_relative_eq!(rep.param("zeta").unwrap(), zeta, max_relative = 1e-10);
        assert!(rep.objective < 1e-20);
    }

    #[test]
    fn superscaling_reproduces_quoted_error_bars() {
        let pts: Vec<(f64, f64)> =
            KEY_ROWS[1..].iter().map(|&(r, a, _)| (r, a)).collect();
        let rep = fit_superscaling(&pts).unwrap();
        let b = rep.param("b").unwrap();
        let zeta = rep.param("zeta").unwrap();
        assert!((b - 0.04798).abs() <= 0.0249, "B = {b}");
        assert!((zeta - 2.6096).abs() <= 0.3478, "zeta = {zeta}");
    }

    #[test]
    fn superscaling_excludes_sentinels_and_rejects_small_input() {
        let with_sentinel: Vec<(f64, f64)> =
            KEY_ROWS.iter().map(|&(r, a, _)| (r, a)).collect();
        let rep = fit_superscaling(&with_sentinel).unwrap();
        assert_eq!(rep.n_points, 4);
        assert!(rep.notes.iter().any(|n| n.contains("sentinel")));
        let without: Vec<(f64, f64)> = KEY_ROWS[1..].iter().map(|&(r, a, _)| (r, a)).collect();
        let rep2 = fit_superscaling(&without).unwrap();
        assert_relative_eq!(
            rep.param("b").unwrap(),
            rep2.param("b").unwrap(),
            max_relative = 1e-9
        );

        assert!(matches!(
            fit_superscaling(&[(10.0, 1.9)]),
            Err(Error::InsufficientData(_))
        ));
        assert!(fit_superscaling(&[(0.9, 1.9), (10.0, 1.0), (30.0, 0.5)]).is_err());
    }

    #[test]
    fn superscaling_is_order_invariant() {
        let mut pts: Vec<(f64, f64)> = KEY_ROWS[1..].iter().map(|&(r, a, _)| (r, a)).collect();
        let rep1 = fit_superscaling(&pts).unwrap();
        pts.reverse();
        pts.swap(0, 2);
        let rep2 = fit_superscaling(&pts).unwrap();
        assert_relative_eq!(
            rep1.param("b").unwrap(),
            rep2.param("b").unwrap(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            rep1.param("zeta").unwrap(),
            rep2.param("zeta").unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn piecewise_reproduces_regression_table() {
        let pts: Vec<(f64, f64)> = KEY_ROWS.iter().map(|&(r, _, t)| (r, t)).collect();
        let (rep, pw) = fit_piecewise_tau(&pts).unwrap();
        assert!((pw.a_l - 0.430).abs() / 0.430 < 0.10, "a_l = {}", pw.a_l);
        assert!((pw.b_l - 0.80).abs() / 0.80 < 0.10, "b_l = {}", pw.b_l);
        assert!((pw.a_r - (-0.019)).abs() / 0.019 < 0.10, "a_r = {}", pw.a_r);
        assert!((pw.b_r - 5.160).abs() / 5.160 < 0.10, "b_r = {}", pw.b_r);
        assert!((pw.tau0_zero() - 1.24).abs() / 1.24 < 0.10, "tau0(0) = {}", pw.tau0_zero());
        // The crossing sits between the shared knot's neighbors.
        assert!(pw.breakpoint > 5.0 && pw.breakpoint < 30.0, "bp = {}", pw.breakpoint);
        assert_eq!(rep.param("tau0_zero").unwrap(), pw.tau0_zero());
        // Left slope carries a real uncertainty on five noisy-ish points.
        assert!(rep.stderr["a_l"] >= 0.0);
    }

    #[test]
    fn piecewise_eval_switches_sides() {
        let pts: Vec<(f64, f64)> = KEY_ROWS.iter().map(|&(r, _, t)| (r, t)).collect();
        let (_, pw) = fit_piecewise_tau(&pts).unwrap();
        assert_relative_eq!(pw.eval(2.0), pw.a_l * 2.0 + pw.b_l);
        assert_relative_eq!(pw.eval(70.0), pw.a_r * 70.0 + pw.b_r);
    }

    #[test]
    fn piecewise_collinear_flagged() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 9.0, 20.0]
            .iter()
            .map(|&r| (r, 0.7 * r + 0.1))
            .collect();
        let (rep, pw) = fit_piecewise_tau(&pts).unwrap();
        assert_relative_eq!(pw.a_l, 0.7, max_relative = 1e-9);
        assert_relative_eq!(pw.a_r, 0.7, max_relative = 1e-9);
        assert!(rep.notes.iter().any(|n| n.contains("collinear")));
    }

    #[test]
    fn piecewise_needs_enough_points() {
        let pts = vec![(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)];
        assert!(matches!(
            fit_piecewise_tau(&pts),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn elementary_derivation_matches_table() {
        // (R_Q, α, τ_Q(Q)) → (B_Q, τ_Q(0)) rows.
        let expect = [
            (2.0, 1000.0, 1.4286, 0.0295, 1.4286),
            (10.0, 1.90, 5.0, 58.86516, 1.48793),
            (70.0, 0.47, 3.85, 320.29882, 4.56615e-4),
        ];
        for &(r, alpha, tau, bq_t, tau0_t) in &expect {
            let sp = SuperstatParams::expanding(alpha, tau);
            let (bq, tau0) = derive_elementary(&sp, r, &IBM).unwrap();
            assert_relative_eq!(bq, bq_t, max_relative = 1e-3);
            assert_relative_eq!(tau0, tau0_t, max_relative = 5e-3);
        }
        // r_q = 1 leaves τ unchanged.
        let sp = SuperstatParams::expanding(1.0, 2.5);
        let (_, tau0) = derive_elementary(&sp, 1.0, &IBM).unwrap();
        assert_eq!(tau0, 2.5);
    }

    #[test]
    fn report_serializes_exactly_the_public_fields() {
        let rep = fit_superscaling(
            &KEY_ROWS[1..].iter().map(|&(r, a, _)| (r, a)).collect::<Vec<_>>(),
        )
        .unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        let obj = v.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(|s| s.as_str()).collect();
        keys.sort_unstable();
        assert_eq!(keys, vec!["converged", "n_points", "notes", "objective", "params", "stderr"]);
    }
}
