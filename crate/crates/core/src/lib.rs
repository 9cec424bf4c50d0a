//! Interevent-time statistics of threshold exceedances.
//!
//! This crate models the waiting times between "excessive" events in a time
//! series — returns whose magnitude exceeds a threshold Q — for series whose
//! extreme magnitudes follow a stretched-exponential (Weibull) law. It
//! combines three ingredients:
//!
//! - **Extreme-value layer** ([`extreme`]): magnitudes ε ≥ 0 with density
//!   D(ε) = (η/ε̄)·(ε/ε̄)^(η−1)·exp(−(ε/ε̄)^η). The mean recurrence time of
//!   exceedances of Q follows R_Q = calib·exp((Q/ε̄)^η).
//! - **Valley model** ([`superstat`]): conditional on an event of magnitude ε,
//!   the waiting time to the next event is exponential with mean
//!   τ_Q(ε) = τ₀·exp(±(B_Q ε)^η) — sign + for "expanding" valleys (larger
//!   shocks relax slower), − for "clustering" (larger shocks are followed
//!   faster). Superposing the exponentials over the conditional magnitude
//!   distribution gives closed-form interevent densities built from
//!   incomplete gamma functions, governed by a single shape exponent
//!   α_Q = 1/(B_Q ε̄)^η and the scale τ_Q(Q).
//! - **Scaling layer**: across thresholds, 1/α_Q = B·ln^ζ R_Q ties the shape
//!   exponent to the recurrence time, collapsing per-threshold fits onto a
//!   two-parameter law.
//!
//! Around the closed forms sit event extraction from raw return series
//! ([`events`]), least-squares estimators for every layer ([`estimation`]),
//! deterministic Monte Carlo samplers for validation ([`mc`]), independent
//! quadrature oracles ([`oracle`]), and an algebraic self-check battery
//! ([`check`]).

pub mod check;
pub mod error;
pub mod estimation;
pub mod events;
pub mod extreme;
pub mod io;
pub mod mc;
pub mod optimize;
pub mod oracle;
pub mod quad;
pub mod special;
pub mod superstat;

pub use error::{Error, Result};
pub use estimation::{FitReport, PiecewiseLinear};
pub use events::{Binning, Histogram, InterEventSample, Mode, ReturnSeries, ThresholdPoint};
pub use extreme::WeibullParams;
pub use mc::SimConfig;
pub use superstat::{Direction, Moment, RelaxationSpec, ScalingLaw, SuperstatParams};
