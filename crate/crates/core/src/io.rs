//! File formats: CSV for series, histograms and threshold curves; JSON for
//! structured reports.
//!
//! # Conventions
//!
//! CSV files carry a header row and are addressed by column *name*, so extra
//! columns and reordered columns are harmless. Malformed cells are reported
//! with their 1-based file line number. Floats are written with Rust's
//! shortest-roundtrip formatting, so write → read reproduces values exactly.
//!
//! Schemas:
//! - return series: `t,r` (integer tick, float return)
//! - histogram: `bin_lo,bin_hi,count,density`
//! - threshold curve: `q,r_q,n_events,reliable` (`r_q` empty below 2 events)

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::{Binning, Histogram, ReturnSeries, ThresholdPoint};

// ---------------------------------------------------------------------------
// CSV plumbing
// ---------------------------------------------------------------------------

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?)
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| {
        Error::invalid_input(format!(
            "missing required column '{name}' (header has: {})",
            headers.iter().collect::<Vec<_>>().join(", ")
        ))
    })
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn parse_field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<T> {
    let line = record_line(rec);
    let raw = rec
        .get(idx)
        .ok_or_else(|| Error::Parse { line, msg: format!("missing field '{name}'") })?;
    raw.parse()
        .map_err(|_| Error::Parse { line, msg: format!("cannot parse {name} from '{raw}'") })
}

// ---------------------------------------------------------------------------
// Return series
// ---------------------------------------------------------------------------

/// Read a `t,r` return series. Tick stamps must be strictly increasing and
/// returns finite; violations are reported with their line number.
pub fn read_return_series(path: impl AsRef<Path>) -> Result<ReturnSeries> {
    let mut rdr = reader(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let col_t = column_index(&headers, "t")?;
    let col_r = column_index(&headers, "r")?;
    let mut times: Vec<i64> = Vec::new();
    let mut returns: Vec<f64> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let t: i64 = parse_field(&rec, col_t, "t")?;
        let r: f64 = parse_field(&rec, col_r, "r")?;
        if !r.is_finite() {
            return Err(Error::Parse { line, msg: format!("return must be finite, got {r}") });
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::Parse {
                    line,
                    msg: format!("tick stamps must be strictly increasing: {t} after {prev}"),
                });
            }
        }
        times.push(t);
        returns.push(r);
    }
    Ok(ReturnSeries { times, returns })
}

pub fn write_return_series(path: impl AsRef<Path>, s: &ReturnSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["t", "r"])?;
    for (t, r) in s.times.iter().zip(&s.returns) {
        w.write_record([t.to_string(), r.to_string()])?;
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------------

pub fn write_histogram_csv(path: impl AsRef<Path>, h: &Histogram) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["bin_lo", "bin_hi", "count", "density"])?;
    for ((edge, count), density) in h.edges.windows(2).zip(&h.counts).zip(&h.densities) {
        w.write_record([
            edge[0].to_string(),
            edge[1].to_string(),
            count.to_string(),
            density.to_string(),
        ])?;
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}

/// Read a `bin_lo,bin_hi,count,density` histogram.
///
/// Bins must be contiguous and increasing. The density column is trusted as
/// written (it may come from an exact law rather than from the counts). The
/// binning flavor is inferred from the edge spacing — whichever of the bin
/// widths or the bin log-ratios is more nearly constant — and only affects
/// which bin centers downstream fits evaluate at.
pub fn read_histogram_csv(path: impl AsRef<Path>) -> Result<Histogram> {
    let mut rdr = reader(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let col_lo = column_index(&headers, "bin_lo")?;
    let col_hi = column_index(&headers, "bin_hi")?;
    let col_count = column_index(&headers, "count")?;
    let col_density = column_index(&headers, "density")?;
    let mut edges: Vec<f64> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    let mut densities: Vec<f64> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let lo: f64 = parse_field(&rec, col_lo, "bin_lo")?;
        let hi: f64 = parse_field(&rec, col_hi, "bin_hi")?;
        let count: u64 = parse_field(&rec, col_count, "count")?;
        let density: f64 = parse_field(&rec, col_density, "density")?;
        if !lo.is_finite() || !hi.is_finite() || hi <= lo {
            return Err(Error::Parse {
                line,
                msg: format!("bin_hi must exceed bin_lo (both finite), got [{lo}, {hi}]"),
            });
        }
        if !density.is_finite() || density < 0.0 {
            return Err(Error::Parse {
                line,
                msg: format!("density must be finite and ≥ 0, got {density}"),
            });
        }
        match edges.last() {
            None => edges.push(lo),
            Some(&prev_hi) => {
                let tol = 1e-9 * prev_hi.abs().max(1.0);
                if (lo - prev_hi).abs() > tol {
                    return Err(Error::Parse {
                        line,
                        msg: format!("bins must be contiguous: bin_lo {lo} after bin_hi {prev_hi}"),
                    });
                }
            }
        }
        edges.push(hi);
        counts.push(count);
        densities.push(density);
    }
    if counts.is_empty() {
        return Err(Error::insufficient_data("histogram file has no bins".to_string()));
    }
    let n = counts.iter().sum::<u64>() as usize;
    let binning = infer_binning(&edges);
    Ok(Histogram { edges, counts, densities, n, binning, degenerate: false })
}

/// Whichever of bin widths or bin log-ratios is more nearly constant wins;
/// ties (including one- and two-bin histograms) fall back to linear.
fn infer_binning(edges: &[f64]) -> Binning {
    if edges.len() < 4 || edges[0] <= 0.0 {
        return Binning::Linear;
    }
    let spread = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean.abs().max(f64::MIN_POSITIVE)
    };
    let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let ratios: Vec<f64> = edges.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    if spread(&ratios) < spread(&widths) {
        Binning::Logarithmic
    } else {
        Binning::Linear
    }
}

// ---------------------------------------------------------------------------
// Threshold curves
// ---------------------------------------------------------------------------

pub fn write_rq_curve_csv(path: impl AsRef<Path>, points: &[ThresholdPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["q", "r_q", "n_events", "reliable"])?;
    for p in points {
        w.write_record([
            p.q.to_string(),
            p.r_q.map(|r| r.to_string()).unwrap_or_default(),
            p.n_events.to_string(),
            p.reliable.to_string(),
        ])?;
    }
    w.flush().map_err(Error::Io)?;
    Ok(())
}

/// Read a `q,r_q,n_events,reliable` curve; an empty `r_q` cell maps to
/// `None`. The quantile companion column is not part of the file schema.
pub fn read_rq_curve_csv(path: impl AsRef<Path>) -> Result<Vec<ThresholdPoint>> {
    let mut rdr = reader(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let col_q = column_index(&headers, "q")?;
    let col_r = column_index(&headers, "r_q")?;
    let col_n = column_index(&headers, "n_events")?;
    let col_rel = column_index(&headers, "reliable")?;
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let r_q = match rec.get(col_r) {
            None | Some("") => None,
            Some(_) => Some(parse_field(&rec, col_r, "r_q")?),
        };
        points.push(ThresholdPoint {
            q: parse_field(&rec, col_q, "q")?,
            r_q,
            r_q_quantile: None,
            n_events: parse_field(&rec, col_n, "n_events")?,
            reliable: parse_field(&rec, col_rel, "reliable")?,
        });
    }
    Ok(points)
}

/// Read two named float columns from a CSV table (for fit inputs such as
/// `r_q,alpha` or `r_q,tau`). Every row must carry both values.
pub fn read_two_column_csv(
    path: impl AsRef<Path>,
    x_name: &str,
    y_name: &str,
) -> Result<Vec<(f64, f64)>> {
    let mut rdr = reader(path.as_ref())?;
    let headers = rdr.headers()?.clone();
    let col_x = column_index(&headers, x_name)?;
    let col_y = column_index(&headers, y_name)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push((parse_field(&rec, col_x, x_name)?, parse_field(&rec, col_y, y_name)?));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let file = File::open(path.as_ref())?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}
