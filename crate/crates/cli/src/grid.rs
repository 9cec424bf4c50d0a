//! Evaluation-grid specification: `lo:hi:n`, optionally suffixed `log` or
//! `lin` (default `log`). Log grids are geometric and require lo > 0; linear
//! grids are arithmetic and admit lo = 0. Both include the endpoints.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Lin,
}

/// A parsed `lo:hi:n[log|lin]` grid over Δt or Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    /// Materialize the grid points, endpoints included.
    pub fn points(&self) -> Vec<f64> {
        let steps = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                let f = i as f64 / steps;
                match self.spacing {
                    Spacing::Log => (self.lo.ln() + f * (self.hi / self.lo).ln()).exp(),
                    Spacing::Lin => self.lo + f * (self.hi - self.lo),
                }
            })
            .collect()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.spacing {
            Spacing::Log => "log",
            Spacing::Lin => "lin",
        };
        write!(f, "{}:{}:{}{}", self.lo, self.hi, self.n, s)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:n[log|lin], got {s:?}"));
        }
        let lo: f64 = parts[0].parse().map_err(|_| format!("bad grid lower bound {:?}", parts[0]))?;
        let hi: f64 = parts[1].parse().map_err(|_| format!("bad grid upper bound {:?}", parts[1]))?;
        let (count, spacing) = if let Some(c) = parts[2].strip_suffix("log") {
            (c, Spacing::Log)
        } else if let Some(c) = parts[2].strip_suffix("lin") {
            (c, Spacing::Lin)
        } else {
            (parts[2], Spacing::Log)
        };
        let n: usize = count.parse().map_err(|_| format!("bad grid point count {:?}", parts[2]))?;
        if n < 2 {
            return Err(format!("grid needs at least 2 points, got {n}"));
        }
        if !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(format!("grid needs finite lo < hi, got {lo}:{hi}"));
        }
        if spacing == Spacing::Log && lo <= 0.0 {
            return Err(format!("log grid needs lo > 0, got {lo}"));
        }
        Ok(GridSpec { lo, hi, n, spacing })
    }
}
