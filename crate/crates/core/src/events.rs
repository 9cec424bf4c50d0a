//! Event extraction from return series: excessive losses/profits, interevent
//! times, empirical mean-interevent curves, and density histograms.
//!
//! # Conventions
//!
//! Time is measured in abstract ticks (the sampling interval is the unit);
//! interevent times are differences of the recorded tick stamps. Threshold
//! comparison is inclusive (|r| ≥ Q), matching the tail integral
//! P(ε ≥ Q) that defines the mean interevent time. Losses are handled as
//! positive magnitudes. The empirical mean interevent time is the arithmetic
//! mean of the interevent intervals; the quantile estimate 1/P̂(ε ≥ Q) =
//! n_ticks/n_events is computed alongside, since the two definitions agree
//! for renewal sequences — and only the quantile one is guaranteed monotone
//! in Q on finite data (dropping a boundary event can shrink the mean).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default minimum event count below which statistics are flagged unreliable.
pub const DEFAULT_MIN_EVENTS: usize = 10;

/// Which tail of the return distribution defines an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Events are returns r ≤ −Q, handled as magnitudes |r|.
    Loss,
    /// Events are returns r ≥ +Q.
    Profit,
}

/// Histogram bin spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    Linear,
    Logarithmic,
}

/// A tick-stamped return series. Stamps are strictly increasing integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub times: Vec<i64>,
    pub returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(times: Vec<i64>, returns: Vec<f64>) -> Result<Self> {
        let s = ReturnSeries { times, returns };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.returns.len() {
            return Err(Error::invalid_input(format!(
                "times/returns length mismatch: {} vs {}",
                self.times.len(),
                self.returns.len()
            )));
        }
        for w in self.times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid_input(format!(
                    "tick stamps must be strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(r) = self.returns.iter().find(|r| !r.is_finite()) {
            return Err(Error::invalid_input(format!("non-finite return {r}")));
        }
        Ok(())
    }

    /// Negated copy (losses become profits and vice versa).
    pub fn negated(&self) -> ReturnSeries {
        ReturnSeries {
            times: self.times.clone(),
            returns: self.returns.iter().map(|r| -r).collect(),
        }
    }
}

/// Interevent times extracted at one threshold (or generated by simulation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterEventSample {
    pub mode: Mode,
    /// Threshold Q.
    pub q: f64,
    /// Tick stamps (or simulated cumulative times) of the events.
    pub event_times: Vec<f64>,
    /// Differences of successive event times; empty for < 2 events.
    pub deltas: Vec<f64>,
    /// Arithmetic mean of `deltas`; absent for < 2 events.
    pub r_q_empirical: Option<f64>,
    pub n_events: usize,
    /// Whether `n_events` meets the reliability floor.
    pub reliable: bool,
    /// Event magnitudes (|r| at events, or simulated ε); in-memory only —
    /// kept out of the JSON schema.
    #[serde(skip)]
    pub magnitudes: Vec<f64>,
}

impl InterEventSample {
    /// Assemble a sample from event times and magnitudes, computing the
    /// deltas and summary fields.
    pub fn from_events(
        mode: Mode,
        q: f64,
        event_times: Vec<f64>,
        magnitudes: Vec<f64>,
        min_events: usize,
    ) -> InterEventSample {
        let deltas: Vec<f64> = event_times.windows(2).map(|w| w[1] - w[0]).collect();
        let r_q_empirical = if deltas.is_empty() {
            None
        } else {
            Some(deltas.iter().sum::<f64>() / deltas.len() as f64)
        };
        let n_events = event_times.len();
        InterEventSample {
            mode,
            q,
            event_times,
            deltas,
            r_q_empirical,
            n_events,
            reliable: n_events >= min_events,
            magnitudes,
        }
    }

    /// Waiting times including the initial gap from time zero to the first
    /// event. For model-generated samples every entry is a genuine draw of
    /// Δt (one per event); for samples extracted from recorded data the
    /// first entry depends on where the record happens to start, so
    /// distributional work on real data should prefer `deltas`.
    pub fn deltas_with_first(&self) -> Vec<f64> {
        match self.event_times.first() {
            None => Vec::new(),
            Some(&t0) => {
                let mut out = Vec::with_capacity(self.event_times.len());
                out.push(t0);
                out.extend_from_slice(&self.deltas);
                out
            }
        }
    }
}

/// One point of the empirical mean-interevent-time curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub q: f64,
    /// Mean of interevent intervals; absent below 2 events.
    pub r_q: Option<f64>,
    /// Quantile estimate n_ticks/n_events; absent for 0 events. Monotone
    /// non-decreasing in q by construction (used for monotonicity checks).
    pub r_q_quantile: Option<f64>,
    pub n_events: usize,
    pub reliable: bool,
}

/// Interevent-time density histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Bin edges, length = bins + 1, strictly increasing.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// counts / (n · width): densities integrate to 1 by construction.
    pub densities: Vec<f64>,
    /// Total sample count.
    pub n: usize,
    pub binning: Binning,
    /// All deltas equal: a single unit-width bin around the common value.
    pub degenerate: bool,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    /// Bin centers: arithmetic midpoints for linear binning, geometric means
    /// for logarithmic binning.
    pub fn centers(&self) -> Vec<f64> {
        self.edges
            .windows(2)
            .map(|w| match self.binning {
                Binning::Linear => 0.5 * (w[0] + w[1]),
                Binning::Logarithmic => (w[0] * w[1]).sqrt(),
            })
            .collect()
    }

    /// Total probability mass Σ density·width (1 up to rounding).
    pub fn mass(&self) -> f64 {
        self.edges
            .windows(2)
            .zip(&self.densities)
            .map(|(w, d)| d * (w[1] - w[0]))
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Extract threshold events and their interevent times from a series.
///
/// Loss mode selects r ≤ −q (magnitude |r|), profit mode r ≥ +q; both
/// comparisons are inclusive. Event times are the tick stamps, so inserting
/// sub-threshold ticks anywhere leaves the output unchanged.
pub fn extract_events(s: &ReturnSeries, mode: Mode, q: f64) -> Result<InterEventSample> {
    s.validate()?;
    if !q.is_finite() || q <= 0.0 {
        return Err(Error::domain(format!("threshold q must be finite and > 0, got {q}")));
    }
    let mut event_times = Vec::new();
    let mut magnitudes = Vec::new();
    for (&t, &r) in s.times.iter().zip(&s.returns) {
        let hit = match mode {
            Mode::Loss => r <= -q,
            Mode::Profit => r >= q,
        };
        if hit {
            event_times.push(t as f64);
            magnitudes.push(r.abs());
        }
    }
    Ok(InterEventSample::from_events(mode, q, event_times, magnitudes, DEFAULT_MIN_EVENTS))
}

/// Subtract a centered moving average of the given (odd) window width.
///
/// Near the boundaries the window is truncated to the available ticks. The
/// sampling method for detrending is a convention of this library — window
/// width 1 degenerates to subtracting each return from itself.
pub fn detrend(s: &ReturnSeries, window: usize) -> Result<ReturnSeries> {
    s.validate()?;
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::invalid_input(format!(
            "detrend window must be odd and ≥ 1, got {window}"
        )));
    }
    let half = window / 2;
    let n = s.returns.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n.saturating_sub(1));
        let mean = s.returns[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
        out.push(s.returns[i] - mean);
    }
    Ok(ReturnSeries { times: s.times.clone(), returns: out })
}

/// Bin the interevent times of a sample into a density histogram.
///
/// A sample whose deltas are all equal cannot span a bin range; it produces
/// a single bin of unit width around the common value, flagged `degenerate`.
pub fn histogram(sample: &InterEventSample, binning: Binning, n_bins: usize) -> Result<Histogram> {
    if sample.deltas.is_empty() {
        return Err(Error::insufficient_data(
            "histogram requires at least one interevent delta (≥ 2 events)".to_string(),
        ));
    }
    if n_bins == 0 {
        return Err(Error::invalid_input("n_bins must be ≥ 1".to_string()));
    }
    let n = sample.deltas.len();
    let lo = sample.deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sample.deltas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    if lo == hi {
        // Degenerate: all mass in one unit-width bin centered on the value.
        return Ok(Histogram {
            edges: vec![lo - 0.5, lo + 0.5],
            counts: vec![n as u64],
            densities: vec![n as f64 / (n as f64 * 1.0)],
            n,
            binning,
            degenerate: true,
        });
    }
    if binning == Binning::Logarithmic && lo <= 0.0 {
        return Err(Error::domain(format!(
            "logarithmic binning requires positive deltas, got minimum {lo}"
        )));
    }

    let edges: Vec<f64> = match binning {
        Binning::Linear => (0..=n_bins)
            .map(|i| lo + (hi - lo) * i as f64 / n_bins as f64)
            .collect(),
        Binning::Logarithmic => {
            let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
            let mut e: Vec<f64> = (0..=n_bins)
                .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / n_bins as f64).exp())
                .collect();
            // Pin the ends against rounding so min/max always fall inside.
            e[0] = lo;
            e[n_bins] = hi;
            e
        }
    };

    let mut counts = vec![0u64; n_bins];
    for &d in &sample.deltas {
        let idx = match binning {
            Binning::Linear => ((d - lo) / (hi - lo) * n_bins as f64) as usize,
            Binning::Logarithmic => ((d.ln() - lo.ln()) / (hi.ln() - lo.ln()) * n_bins as f64) as usize,
        };
        counts[idx.min(n_bins - 1)] += 1;
    }
    let densities: Vec<f64> = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| c as f64 / (n as f64 * (w[1] - w[0])))
        .collect();
    Ok(Histogram { edges, counts, densities, n, binning, degenerate: false })
}

/// Empirical mean interevent time across a threshold grid.
///
/// Points with fewer than `min_events` events are flagged unreliable but
/// still reported.
pub fn rq_curve(
    s: &ReturnSeries,
    mode: Mode,
    q_grid: &[f64],
    min_events: usize,
) -> Result<Vec<ThresholdPoint>> {
    s.validate()?;
    if q_grid.is_empty() {
        return Err(Error::invalid_input("q_grid must be non-empty".to_string()));
    }
    for w in q_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid_input(format!(
                "q_grid must be strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
    }
    if q_grid[0] <= 0.0 || !q_grid.iter().all(|q| q.is_finite()) {
        return Err(Error::domain("q_grid values must be finite and > 0".to_string()));
    }
    let n_ticks = s.len() as f64;
    q_grid
        .iter()
        .map(|&q| {
            let sample = extract_events(s, mode, q)?;
            Ok(ThresholdPoint {
                q,
                r_q: sample.r_q_empirical,
                r_q_quantile: if sample.n_events > 0 {
                    Some(n_ticks / sample.n_events as f64)
                } else {
                    None
                },
                n_events: sample.n_events,
                reliable: sample.n_events >= min_events,
            })
        })
        .collect()
}
