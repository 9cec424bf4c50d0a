//! Monte Carlo engine for the valley model: draw (ε, Δt) pairs — magnitude
//! from the conditional Weibull tail, waiting time exponential with mean set
//! by the relaxation law — and generate synthetic return series.
//!
//! # Determinism
//!
//! Every draw uses its own counter-based substream: the base generator is
//! seeded from `seed`, and draw i runs on stream i (ChaCha streams are
//! cryptographically independent). Outputs are therefore a pure function of
//! the configuration — worker count only changes who computes which index,
//! never the result. Uniforms are mapped from the top 53 bits into the open
//! interval (0,1), so inverse-CDF draws never see 0 or 1.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{InterEventSample, Mode, DEFAULT_MIN_EVENTS};
use crate::extreme::{sample_excess, WeibullParams};
use crate::superstat::{relaxation_time, RelaxationSpec};

/// Full configuration of one interevent-sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub weibull: WeibullParams,
    pub relaxation: RelaxationSpec,
    /// Event threshold Q > 0.
    pub q: f64,
    /// Number of (ε, Δt) draws.
    pub n_samples: u64,
    pub seed: u64,
    /// Threads to fan out over; never affects the output values.
    #[serde(default = "default_workers")]
    pub n_workers: usize,
}

fn default_workers() -> usize {
    1
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.weibull.validate()?;
        self.relaxation.validate()?;
        if !self.q.is_finite() || self.q <= 0.0 {
            return Err(Error::domain(format!("q must be finite and > 0, got {}", self.q)));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid_input("n_samples must be ≥ 1".to_string()));
        }
        if self.n_workers == 0 {
            return Err(Error::invalid_input("n_workers must be ≥ 1".to_string()));
        }
        // The magnitude law and the relaxation law share one shape exponent;
        // mismatched η would silently break every closed-form identity.
        let (e1, e2) = (self.weibull.eta, self.relaxation.eta);
        if (e1 - e2).abs() > 1e-12 * e1.abs().max(e2.abs()) {
            return Err(Error::invalid_input(format!(
                "weibull.eta ({e1}) and relaxation.eta ({e2}) must agree"
            )));
        }
        Ok(())
    }
}

/// Uniform in the open interval (0,1) from the top 53 bits.
pub(crate) fn open_uniform(rng: &mut ChaCha12Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// The generator for draw `index` under the given seed: stream = index.
pub(crate) fn draw_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One (ε, Δt) draw of the valley model.
fn draw_pair(c: &SimConfig, index: u64) -> Result<(f64, f64)> {
    let mut rng = draw_rng(c.seed, index);
    let eps = sample_excess(&c.weibull, c.q, open_uniform(&mut rng))?;
    let tau = relaxation_time(&c.relaxation, eps).map_err(|e| match e {
        Error::Overflow(msg) => {
            Error::overflow(format!("draw {index}: {msg} (eps = {eps:.6e})"))
        }
        other => other,
    })?;
    let dt = -tau * open_uniform(&mut rng).ln();
    Ok((eps, dt))
}

/// Sample `n_samples` interevent pairs from the valley model.
///
/// The marginal law of Δt is exactly the normalized closed-form density for
/// the configured direction. Event times are the cumulative sums of the
/// waits. An overflowing relaxation time aborts the run with the draw index
/// in the report.
pub fn sample_interevents(c: &SimConfig) -> Result<InterEventSample> {
    c.validate()?;
    let n = c.n_samples as usize;
    let workers = c.n_workers.min(n).max(1);
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);

    if workers == 1 {
        for i in 0..c.n_samples {
            pairs.push(draw_pair(c, i)?);
        }
    } else {
        // Partition the index range; each worker fills its own slice, so the
        // merged output is ordered by index regardless of scheduling.
        let chunk = n.div_ceil(workers);
        let mut results: Vec<Result<Vec<(f64, f64)>>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(n);
                    scope.spawn(move || {
                        (lo..hi).map(|i| draw_pair(c, i as u64)).collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            for h in handles {
                results.push(h.join().expect("sampler thread panicked"));
            }
        });
        for r in results {
            pairs.extend(r?);
        }
    }

    let mut magnitudes = Vec::with_capacity(n);
    let mut event_times = Vec::with_capacity(n);
    let mut t = 0.0;
    for (eps, dt) in pairs {
        t += dt;
        magnitudes.push(eps);
        event_times.push(t);
    }
    Ok(InterEventSample::from_events(
        Mode::Loss,
        c.q,
        event_times,
        magnitudes,
        DEFAULT_MIN_EVENTS,
    ))
}

/// Generate a synthetic return series: i.i.d. unconditional Weibull
/// magnitudes at ticks 1..=n, each negated with probability `sign_prob`.
pub fn generate_series(
    p: &WeibullParams,
    n: usize,
    sign_prob: f64,
    seed: u64,
) -> Result<crate::events::ReturnSeries> {
    p.validate()?;
    if n == 0 {
        return Err(Error::invalid_input("series length must be ≥ 1".to_string()));
    }
    if !(0.0..=1.0).contains(&sign_prob) {
        return Err(Error::domain(format!("sign_prob must lie in [0,1], got {sign_prob}")));
    }
    let mut times = Vec::with_capacity(n);
    let mut returns = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = draw_rng(seed, i as u64);
        // Unconditional magnitude: the conditional sampler at threshold 0.
        let magnitude = sample_excess(p, 0.0, open_uniform(&mut rng))?;
        let negative = open_uniform(&mut rng) < sign_prob;
        times.push((i + 1) as i64);
        returns.push(if negative { -magnitude } else { magnitude });
    }
    Ok(crate::events::ReturnSeries { times, returns })
}

// ---------------------------------------------------------------------------
// Statistics helpers for distributional tests
// ---------------------------------------------------------------------------

/// Kolmogorov–Smirnov statistic of a sample against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    d
}

/// Spearman rank correlation between two equal-length slices.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        num += (a - mean) * (b - mean);
        dx += (a - mean) * (a - mean);
        dy += (b - mean) * (b - mean);
    }
    num / (dx * dy).sqrt()
}

/// Average ranks (ties share the mean rank), 1-based.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreme::{excess_cdf, q_of_rq};
    use crate::superstat::{bq_from_alpha, psi_cdf, tau0_from_tauq, Direction, SuperstatParams};
    use approx::assert_relative_eq;

    /// IBM-like R_Q = 10 configuration (α = 1.9, τ_Q(Q) = 5), with B_Q and
    /// τ₀ derived exactly from (α, R_Q) so the closed-form laws apply with
    /// no rounding slack.
    fn ibm_r10_config(direction: Direction, n: u64, seed: u64) -> SimConfig {
        let weibull = WeibullParams::new(0.8246, 0.0078);
        let q = q_of_rq(&weibull, 10.0).unwrap();
        let b_q = bq_from_alpha(1.9, weibull.eps_bar, weibull.eta).unwrap();
        let tau0 = match direction {
            // τ₀ chosen so τ_Q(Q) = 5.0 under each sign convention.
            Direction::Expanding => tau0_from_tauq(5.0, 10.0, 1.9).unwrap(),
            Direction::Clustering => 5.0 * (10f64.ln() / 1.9).exp(),
        };
        SimConfig {
            weibull,
            relaxation: RelaxationSpec { tau0, b_q, eta: weibull.eta, direction },
            q,
            n_samples: n,
            seed,
            n_workers: 1,
        }
    }

    #[test]
    fn single_draw_is_reproducible() {
        let c = ibm_r10_config(Direction::Expanding, 1, 7);
        let a = sample_interevents(&c).unwrap();
        let b = sample_interevents(&c).unwrap();
        assert_eq!(a.event_times, b.event_times);
        assert_eq!(a.magnitudes, b.magnitudes);
        assert_eq!(a.n_events, 1);
        assert!(a.magnitudes[0] >= c.q);
        assert!(a.event_times[0] > 0.0);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut c = ibm_r10_config(Direction::Expanding, 1000, 99);
        let one = sample_interevents(&c).unwrap();
        c.n_workers = 3;
        let three = sample_interevents(&c).unwrap();
        c.n_workers = 8;
        let eight = sample_interevents(&c).unwrap();
        assert_eq!(one.event_times, three.event_times);
        assert_eq!(one.magnitudes, three.magnitudes);
        assert_eq!(one.event_times, eight.event_times);
    }

    #[test]
    fn magnitude_marginal_matches_conditional_weibull() {
        let c = ibm_r10_config(Direction::Expanding, 100_000, 3);
        let s = sample_interevents(&c).unwrap();
        let p = c.weibull;
        let q = c.q;
        let d = ks_statistic(&s.magnitudes, |x| excess_cdf(&p, q, x).unwrap());
        assert!(d < 0.006, "KS = {d}");
    }

    #[test]
    fn waiting_times_conditionally_exponential() {
        // Within a narrow magnitude bucket, Δt/τ(ε_mid) is ≈ Exp(1).
        let c = ibm_r10_config(Direction::Expanding, 200_000, 5);
        let s = sample_interevents(&c).unwrap();
        let (lo, hi) = (c.q * 1.05, c.q * 1.10);
        let mid_tau = relaxation_time(&c.relaxation, 0.5 * (lo + hi)).unwrap();
        let bucket: Vec<f64> = s
            .magnitudes
            .iter()
            .zip(&s.deltas_with_first())
            .filter(|(&e, _)| e >= lo && e < hi)
            .map(|(_, &dt)| dt / mid_tau)
            .collect();
        assert!(bucket.len() > 3000, "bucket too small: {}", bucket.len());
        let d = ks_statistic(&bucket, |x| -(-x).exp_m1());
        // The bucket has finite width, so τ varies a little inside it.
        assert!(d < 0.03, "KS = {d}");
    }

    #[test]
    fn waiting_time_marginal_matches_closed_form() {
        let c = ibm_r10_config(Direction::Expanding, 200_000, 11);
        let s = sample_interevents(&c).unwrap();
        let sp = SuperstatParams::expanding(1.9, 5.0);
        let d = ks_statistic(&s.deltas_with_first(), |x| psi_cdf(&sp, x).unwrap());
        assert!(d < 0.005, "KS = {d}");
    }

    #[test]
    fn sample_mean_matches_conditional_moment() {
        let c = ibm_r10_config(Direction::Expanding, 100_000, 13);
        let s = sample_interevents(&c).unwrap();
        let deltas = s.deltas_with_first();
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        let var = deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
            / (deltas.len() - 1) as f64;
        let se = (var / deltas.len() as f64).sqrt();
        // Conditional first moment τ/(1−1/α) = 5/(1−1/1.9).
        let expected = 5.0 / (1.0 - 1.0 / 1.9);
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "mean {mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn hierarchy_sign_shows_in_rank_correlation() {
        let n = 100_000;
        let ce = ibm_r10_config(Direction::Expanding, n, 17);
        let se = sample_interevents(&ce).unwrap();
        let rho_e = spearman_rho(&se.magnitudes, &se.deltas_with_first());
        let z_e = rho_e * ((n - 1) as f64).sqrt();
        assert!(z_e > 3.09, "expanding z = {z_e}");

        let cc = ibm_r10_config(Direction::Clustering, n, 17);
        let sc = sample_interevents(&cc).unwrap();
        let rho_c = spearman_rho(&sc.magnitudes, &sc.deltas_with_first());
        let z_c = rho_c * ((n - 1) as f64).sqrt();
        assert!(z_c < -3.09, "clustering z = {z_c}");
    }

    #[test]
    fn overflow_during_draw_is_reported() {
        let mut c = ibm_r10_config(Direction::Expanding, 500, 1);
        c.relaxation.tau0 = 1e250;
        c.relaxation.b_q = 1e4;
        c.relaxation.eta = c.weibull.eta;
        let err = sample_interevents(&c).unwrap_err();
        assert!(matches!(err, Error::Overflow(_)), "got {err:?}");
    }

    #[test]
    fn config_validation() {
        let mut c = ibm_r10_config(Direction::Expanding, 10, 1);
        c.relaxation.eta = 0.9;
        assert!(matches!(sample_interevents(&c), Err(Error::InvalidInput(_))));
        let mut c2 = ibm_r10_config(Direction::Expanding, 10, 1);
        c2.n_samples = 0;
        assert!(c2.validate().is_err());
        let mut c3 = ibm_r10_config(Direction::Expanding, 10, 1);
        c3.q = -0.1;
        assert!(c3.validate().is_err());
    }

    #[test]
    fn generated_series_properties() {
        let p = WeibullParams::new(0.8246, 0.0078);
        let a = generate_series(&p, 5000, 0.5, 21).unwrap();
        let b = generate_series(&p, 5000, 0.5, 21).unwrap();
        assert_eq!(a, b);
        let c = generate_series(&p, 5000, 0.0, 21).unwrap();
        assert!(c.returns.iter().all(|r| *r >= 0.0));
        let d = generate_series(&p, 5000, 1.0, 21).unwrap();
        assert!(d.returns.iter().all(|r| *r <= 0.0));
        // Sign split is roughly even at p = 1/2.
        let neg = a.returns.iter().filter(|r| **r < 0.0).count();
        assert!((neg as f64 / 5000.0 - 0.5).abs() < 0.03);
    }

    #[test]
    fn generated_magnitudes_follow_the_unconditional_law() {
        let p = WeibullParams::new(0.8246, 0.0078);
        let s = generate_series(&p, 100_000, 0.5, 23).unwrap();
        let mags: Vec<f64> = s.returns.iter().map(|r| r.abs()).collect();
        // Unconditional Weibull CDF = conditional at threshold 0.
        let d = ks_statistic(&mags, |x| excess_cdf(&p, 0.0, x).unwrap());
        assert!(d < 0.006, "KS = {d}");
    }

    #[test]
    fn spearman_and_ks_helpers() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 6.0, 8.0, 10.0];
        assert_relative_eq!(spearman_rho(&x, &y), 1.0);
        let y_rev = [10.0, 8.0, 6.0, 4.0, 2.0];
        assert_relative_eq!(spearman_rho(&x, &y_rev), -1.0);
        // KS of a perfect grid against the uniform CDF is 1/(2n) + rounding.
        let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic(&grid, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.5 / 100.0 + 1e-12, "d = {d}");
    }
}
