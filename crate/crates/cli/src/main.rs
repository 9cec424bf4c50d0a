//! Command-line front end: event extraction, closed-form density evaluation,
//! fitting, Monte Carlo simulation, and the algebraic self-check suite.
//!
//! Every command resolves its configuration (flags over config file over
//! defaults), writes its outputs into `--out-dir`, and drops a
//! `manifest.json` beside them recording the command, tool version, resolved
//! configuration, SHA-256 digests of all inputs, the seed where one is used,
//! and the list of files written. Deterministic commands are bit-reproducible
//! from their manifest.
//!
//! # Exit codes
//!
//! - 0 — success. A fit that did not converge still exits 0: the report
//!   carries `converged: false` (a result, not a failure).
//! - 1 — check-suite failure (`check` found a violated identity).
//! - 2 — input error: missing or malformed files, with line numbers where
//!   the parser knows them; under-determined fit input.
//! - 3 — parameter error: values outside the mathematical domain of the
//!   requested operation (including an invalid simulation config).

mod grid;
mod manifest;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use interevent::check::{run_checks, CheckConfig};
use interevent::error::Error;
use interevent::estimation::{
    fit_piecewise_tau, fit_psi, fit_rq_curve, fit_superscaling, FitReport, DEFAULT_ALPHA_CAP,
    SENTINEL_ALPHA_MIN,
};
use interevent::events::{
    extract_events, histogram, rq_curve, Binning, Histogram, Mode, ThresholdPoint,
    DEFAULT_MIN_EVENTS,
};
use interevent::io;
use interevent::mc::sample_interevents;
use interevent::superstat::{
    moment, moment_conditional, psi, psi_clustering, psi_clustering_printed, psi_initial,
    psi_mixture, psi_tail, Direction, Moment, SuperstatParams,
};
use interevent::{Result, SimConfig};
use serde_json::json;

use grid::GridSpec;
use manifest::RunManifest;

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(name = "interevent", version, about = "Interevent-time statistics of threshold exceedances")]
struct Cli {
    /// Directory outputs (and manifest.json) are written to; created if missing.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract threshold exceedances from a tick-stamped return series.
    Extract(ExtractArgs),
    /// Tabulate the closed-form densities and moments on a grid.
    Eval(EvalArgs),
    /// Fit one layer of the model to data.
    Fit(FitArgs),
    /// Draw interevent samples from the valley model.
    Simulate(SimulateArgs),
    /// Run the algebraic identity suite.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Loss,
    Profit,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Loss => Mode::Loss,
            ModeArg::Profit => Mode::Profit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Expanding,
    Clustering,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Direction {
        match d {
            DirectionArg::Expanding => Direction::Expanding,
            DirectionArg::Clustering => Direction::Clustering,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BinningArg {
    Log,
    Lin,
}

impl From<BinningArg> for Binning {
    fn from(b: BinningArg) -> Binning {
        match b {
            BinningArg::Log => Binning::Logarithmic,
            BinningArg::Lin => Binning::Linear,
        }
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("threshold").required(true).args(["q", "q_grid"])))]
struct ExtractArgs {
    /// Input return-series CSV with columns `t,r`.
    #[arg(long)]
    input: PathBuf,

    /// Which tail defines an event.
    #[arg(long, value_enum, default_value_t = ModeArg::Loss)]
    mode: ModeArg,

    /// Single threshold: write the interevent sample as events.json.
    #[arg(long)]
    q: Option<f64>,

    /// Threshold grid lo:hi:n[log|lin]: write the mean-recurrence curve as
    /// rq_curve.csv.
    #[arg(long)]
    q_grid: Option<GridSpec>,

    /// Reliability floor on the event count for curve points.
    #[arg(long, default_value_t = DEFAULT_MIN_EVENTS)]
    min_events: usize,

    /// Also histogram the extracted interevent times (single-threshold mode).
    #[arg(long, conflicts_with = "q_grid")]
    bins: Option<usize>,

    /// Bin spacing for --bins.
    #[arg(long, value_enum, default_value_t = BinningArg::Log)]
    binning: BinningArg,
}

#[derive(Args)]
struct EvalArgs {
    /// Shape exponent α of the evaluated density.
    #[arg(long)]
    alpha: f64,

    /// Characteristic time τ_Q(Q) (or τ′_Q(Q) for the clustering direction).
    #[arg(long)]
    tau: f64,

    /// Hierarchy direction of the evaluated density.
    #[arg(long, value_enum, default_value_t = DirectionArg::Expanding)]
    direction: DirectionArg,

    /// Δt grid lo:hi:n[log|lin].
    #[arg(long, default_value = "1e-3:1e3:241log")]
    grid: GridSpec,

    /// Moment orders for the moments table (expanding direction only).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0u32, 1, 2])]
    moments: Vec<u32>,

    /// Mean recurrence time R_Q: moments become unconditional (scaled by R_Q)
    /// instead of conditional on an initiating event.
    #[arg(long)]
    rq: Option<f64>,

    /// Companion clustering shape α′ ∈ (0,1): adds a psi_clustering column.
    #[arg(long, requires = "clustering_tau")]
    clustering_alpha: Option<f64>,

    /// Companion clustering scale τ′.
    #[arg(long, requires = "clustering_alpha")]
    clustering_tau: Option<f64>,

    /// Expanding-component weight w ∈ [0,1]: adds a psi_mixture column.
    #[arg(long, requires = "clustering_alpha")]
    weight: Option<f64>,

    /// Evaluate clustering densities with the printed complementary formula
    /// (not normalized on (0,∞)) instead of the normalized form.
    #[arg(long)]
    paper_eq19_compat: bool,
}

#[derive(Args)]
struct FitArgs {
    #[command(subcommand)]
    target: FitTarget,
}

#[derive(Subcommand)]
enum FitTarget {
    /// Fit the recurrence law (η, ε̄, calib) to a mean-recurrence curve CSV
    /// (`q,r_q,n_events,reliable`; only reliable rows with a value are used).
    Rq {
        #[arg(long)]
        input: PathBuf,
        /// Weight points by their event counts.
        #[arg(long)]
        weight_by_events: bool,
        /// Also write residuals.csv (working space: ln R_Q).
        #[arg(long)]
        residuals: bool,
    },
    /// Fit (α, τ) to a binned interevent histogram CSV
    /// (`bin_lo,bin_hi,count,density`).
    Psi {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = DirectionArg::Expanding)]
        direction: DirectionArg,
        /// Shape values at or above this are clamped and flagged.
        #[arg(long, default_value_t = DEFAULT_ALPHA_CAP)]
        alpha_cap: f64,
        /// Also write residuals.csv (working space: ln density).
        #[arg(long)]
        residuals: bool,
    },
    /// Fit the superscaling law 1/α = B·lnᶻR to `r_q,alpha` points.
    Superscaling {
        #[arg(long)]
        input: PathBuf,
        /// Also write residuals.csv (working space: 1/α).
        #[arg(long)]
        residuals: bool,
    },
    /// Fit the two-line τ_Q(Q) calibration to `r_q,tau_q` points.
    TauLinear {
        #[arg(long)]
        input: PathBuf,
        /// Also write residuals.csv (working space: τ).
        #[arg(long)]
        residuals: bool,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation config JSON (weibull, relaxation, q, n_samples, seed, n_workers).
    #[arg(long)]
    config: PathBuf,

    /// Override the seed stored in the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the worker count stored in the config.
    #[arg(long)]
    workers: Option<usize>,

    /// Histogram bin count for the sampled interevent times.
    #[arg(long, default_value_t = 48)]
    bins: usize,

    /// Histogram bin spacing.
    #[arg(long, value_enum, default_value_t = BinningArg::Log)]
    binning: BinningArg,
}

#[derive(Args)]
struct CheckArgs {
    /// Random parameter sets per identity.
    #[arg(long, default_value_t = CheckConfig::default().n_sets)]
    n_sets: usize,

    /// Worst tolerated relative discrepancy.
    #[arg(long, default_value_t = CheckConfig::default().tol)]
    tol: f64,

    /// Seed for the parameter-set stream.
    #[arg(long)]
    seed: Option<u64>,

    /// Deliberately break one named check (test hook).
    #[arg(long)]
    perturb: Option<String>,
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}

/// Map an error to the documented exit code: parameter errors are 3,
/// everything else about inputs and data is 2.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Overflow(_) => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<i32> {
    std::fs::create_dir_all(&cli.out_dir)?;
    match &cli.command {
        Command::Extract(a) => cmd_extract(&cli.out_dir, a),
        Command::Eval(a) => cmd_eval(&cli.out_dir, a),
        Command::Fit(a) => cmd_fit(&cli.out_dir, a),
        Command::Simulate(a) => cmd_simulate(&cli.out_dir, a),
        Command::Check(a) => cmd_check(&cli.out_dir, a),
    }
}

/// Format a CSV cell: plain shortest-round-trip float, empty when the value
/// is absent or not finite.
fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => String::new(),
    }
}

fn write_lines(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{header}")?;
    for row in rows {
        writeln!(f, "{row}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

fn cmd_extract(out_dir: &Path, a: &ExtractArgs) -> Result<i32> {
    let mut man = RunManifest::new(
        "extract",
        json!({
            "input": a.input.display().to_string(),
            "mode": Mode::from(a.mode),
            "q": a.q,
            "q_grid": a.q_grid.map(|g| g.to_string()),
            "min_events": a.min_events,
            "bins": a.bins,
            "binning": Binning::from(a.binning),
        }),
    );
    man.add_input(&a.input)?;
    let series = io::read_return_series(&a.input)?;
    let mode = Mode::from(a.mode);

    if let Some(q) = a.q {
        let sample = extract_events(&series, mode, q)?;
        io::write_json(out_dir.join("events.json"), &sample)?;
        man.add_output("events.json");
        if let Some(bins) = a.bins {
            let h = histogram(&sample, a.binning.into(), bins)?;
            io::write_histogram_csv(out_dir.join("histogram.csv"), &h)?;
            man.add_output("histogram.csv");
        }
    } else {
        let grid = a.q_grid.expect("clap enforces exactly one of --q/--q-grid");
        let points = rq_curve(&series, mode, &grid.points(), a.min_events)?;
        io::write_rq_curve_csv(out_dir.join("rq_curve.csv"), &points)?;
        man.add_output("rq_curve.csv");
    }
    man.write(out_dir)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn cmd_eval(out_dir: &Path, a: &EvalArgs) -> Result<i32> {
    let direction = Direction::from(a.direction);
    let companion = match (a.clustering_alpha, a.clustering_tau) {
        (Some(ca), Some(ct)) => {
            if direction != Direction::Expanding {
                return Err(Error::Domain(
                    "companion clustering columns require --direction expanding".to_string(),
                ));
            }
            Some(SuperstatParams::clustering(ca, ct))
        }
        _ => None,
    };

    let mut man = RunManifest::new(
        "eval",
        json!({
            "alpha": a.alpha,
            "tau": a.tau,
            "direction": direction,
            "grid": a.grid.to_string(),
            "moments": a.moments,
            "rq": a.rq,
            "clustering_alpha": a.clustering_alpha,
            "clustering_tau": a.clustering_tau,
            "weight": a.weight,
            "paper_eq19_compat": a.paper_eq19_compat,
        }),
    );

    let mut header = String::from("dt,psi");
    let mut rows: Vec<String> = Vec::with_capacity(a.grid.n);
    match direction {
        Direction::Expanding => {
            let sp = SuperstatParams::expanding(a.alpha, a.tau);
            header.push_str(",psi_tail,psi_initial");
            if companion.is_some() {
                header.push_str(",psi_clustering");
            }
            if a.weight.is_some() {
                header.push_str(",psi_mixture");
            }
            for dt in a.grid.points() {
                let mut row = format!("{dt},{}", cell(Some(psi(&sp, dt)?)));
                // Asymptotes can be undefined at grid edges (e.g. Δt = 0);
                // leave the cell empty there rather than failing the run.
                row.push(',');
                row.push_str(&cell(psi_tail(&sp, dt).ok()));
                row.push(',');
                row.push_str(&cell(psi_initial(&sp, dt).ok()));
                if let Some(spc) = &companion {
                    let v = if a.paper_eq19_compat {
                        psi_clustering_printed(spc, dt)?
                    } else {
                        psi_clustering(spc, dt)?
                    };
                    row.push(',');
                    row.push_str(&cell(Some(v)));
                }
                if let Some(w) = a.weight {
                    let spc = companion.as_ref().expect("clap: --weight requires the companion");
                    row.push(',');
                    row.push_str(&cell(Some(psi_mixture(&sp, spc, w, dt)?)));
                }
                rows.push(row);
            }
        }
        Direction::Clustering => {
            let sp = SuperstatParams::clustering(a.alpha, a.tau);
            for dt in a.grid.points() {
                let v = if a.paper_eq19_compat {
                    psi_clustering_printed(&sp, dt)?
                } else {
                    psi_clustering(&sp, dt)?
                };
                rows.push(format!("{dt},{}", cell(Some(v))));
            }
        }
    }
    write_lines(&out_dir.join("density.csv"), &header, &rows)?;
    man.add_output("density.csv");

    if direction == Direction::Expanding {
        let sp = SuperstatParams::expanding(a.alpha, a.tau);
        let rows: Vec<String> = a
            .moments
            .iter()
            .map(|&m| {
                let value = match a.rq {
                    Some(rq) => moment(&sp, rq, m)?,
                    None => moment_conditional(&sp, m)?,
                };
                Ok(match value {
                    Moment::Finite(v) => format!("{m},{},true", cell(Some(v))),
                    Moment::Divergent => format!("{m},,false"),
                })
            })
            .collect::<Result<_>>()?;
        write_lines(&out_dir.join("moments.csv"), "m,value,finite", &rows)?;
        man.add_output("moments.csv");
    }

    man.write(out_dir)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

fn cmd_fit(out_dir: &Path, a: &FitArgs) -> Result<i32> {
    match &a.target {
        FitTarget::Rq { input, weight_by_events, residuals } => {
            let all = io::read_rq_curve_csv(input)?;
            let kept: Vec<&ThresholdPoint> =
                all.iter().filter(|p| p.reliable && p.r_q.is_some()).collect();
            let points: Vec<(f64, f64)> =
                kept.iter().map(|p| (p.q, p.r_q.expect("filtered"))).collect();
            let weights: Option<Vec<f64>> = weight_by_events
                .then(|| kept.iter().map(|p| p.n_events as f64).collect());
            let rep = fit_rq_curve(&points, weights.as_deref())?;

            let mut man = RunManifest::new(
                "fit rq",
                json!({
                    "input": input.display().to_string(),
                    "weight_by_events": weight_by_events,
                    "points_used": points.len(),
                    "points_read": all.len(),
                }),
            );
            man.add_input(input)?;
            io::write_json(out_dir.join("fit_report.json"), &rep)?;
            man.add_output("fit_report.json");
            if *residuals {
                let (calib, eps_bar, eta) = (
                    rep.param("calib").expect("reported"),
                    rep.param("eps_bar").expect("reported"),
                    rep.param("eta").expect("reported"),
                );
                let rows = points
                    .iter()
                    .map(|&(q, r)| {
                        let fitted = calib.ln() + (q / eps_bar).powf(eta);
                        residual_row(q, r.ln(), fitted)
                    })
                    .collect::<Vec<_>>();
                write_lines(&out_dir.join("residuals.csv"), RESIDUAL_HEADER, &rows)?;
                man.add_output("residuals.csv");
            }
            man.write(out_dir)?;
            Ok(0)
        }
        FitTarget::Psi { input, direction, alpha_cap, residuals } => {
            let h = io::read_histogram_csv(input)?;
            let dir = Direction::from(*direction);
            let rep = fit_psi(&h, dir, *alpha_cap)?;

            let mut man = RunManifest::new(
                "fit psi",
                json!({
                    "input": input.display().to_string(),
                    "direction": dir,
                    "alpha_cap": alpha_cap,
                }),
            );
            man.add_input(input)?;
            io::write_json(out_dir.join("fit_report.json"), &rep)?;
            man.add_output("fit_report.json");
            if *residuals {
                let rows = psi_residual_rows(&h, dir, &rep);
                write_lines(&out_dir.join("residuals.csv"), RESIDUAL_HEADER, &rows)?;
                man.add_output("residuals.csv");
            }
            man.write(out_dir)?;
            Ok(0)
        }
        FitTarget::Superscaling { input, residuals } => {
            let points = io::read_two_column_csv(input, "r_q", "alpha")?;
            let rep = fit_superscaling(&points)?;

            let mut man = RunManifest::new(
                "fit superscaling",
                json!({ "input": input.display().to_string() }),
            );
            man.add_input(input)?;
            io::write_json(out_dir.join("fit_report.json"), &rep)?;
            man.add_output("fit_report.json");
            if *residuals {
                let (b, zeta) =
                    (rep.param("b").expect("reported"), rep.param("zeta").expect("reported"));
                let rows = points
                    .iter()
                    .filter(|&&(_, alpha)| alpha < SENTINEL_ALPHA_MIN)
                    .map(|&(r, alpha)| residual_row(r, alpha.recip(), b * r.ln().powf(zeta)))
                    .collect::<Vec<_>>();
                write_lines(&out_dir.join("residuals.csv"), RESIDUAL_HEADER, &rows)?;
                man.add_output("residuals.csv");
            }
            man.write(out_dir)?;
            Ok(0)
        }
        FitTarget::TauLinear { input, residuals } => {
            let points = io::read_two_column_csv(input, "r_q", "tau_q")?;
            let (rep, lines) = fit_piecewise_tau(&points)?;

            let mut man = RunManifest::new(
                "fit tau-linear",
                json!({ "input": input.display().to_string() }),
            );
            man.add_input(input)?;
            io::write_json(out_dir.join("fit_report.json"), &json!({ "report": rep, "lines": lines }))?;
            man.add_output("fit_report.json");
            if *residuals {
                let rows = points
                    .iter()
                    .map(|&(r, tau)| residual_row(r, tau, lines.eval(r)))
                    .collect::<Vec<_>>();
                write_lines(&out_dir.join("residuals.csv"), RESIDUAL_HEADER, &rows)?;
                man.add_output("residuals.csv");
            }
            man.write(out_dir)?;
            Ok(0)
        }
    }
}

/// Residual rows are always in the fit's working space (see each subcommand's
/// help text); `observed` and `fitted` are working-space values.
const RESIDUAL_HEADER: &str = "x,observed,fitted,residual";

fn residual_row(x: f64, observed: f64, fitted: f64) -> String {
    format!("{x},{observed},{fitted},{}", observed - fitted)
}

/// Working-space residuals for the density fit: the informative bins
/// (positive count, density, and center), observed vs fitted log density.
fn psi_residual_rows(h: &Histogram, direction: Direction, rep: &FitReport) -> Vec<String> {
    let alpha = rep.param("alpha").expect("reported");
    let tau = rep.param("tau_q").expect("reported");
    let sp = match direction {
        Direction::Expanding => SuperstatParams::expanding(alpha, tau),
        Direction::Clustering => SuperstatParams::clustering(alpha, tau),
    };
    let model = |dt: f64| match direction {
        Direction::Expanding => psi(&sp, dt),
        Direction::Clustering => psi_clustering(&sp, dt),
    };
    h.centers()
        .iter()
        .zip(&h.densities)
        .zip(&h.counts)
        .filter(|((&c, &d), &cnt)| cnt > 0 && d > 0.0 && c > 0.0)
        .filter_map(|((&c, &d), _)| match model(c) {
            Ok(m) if m > 0.0 => Some(residual_row(c, d.ln(), m.ln())),
            _ => None,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(out_dir: &Path, a: &SimulateArgs) -> Result<i32> {
    let mut cfg: SimConfig = io::read_json(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = a.workers {
        cfg.n_workers = workers;
    }
    // A structurally valid file with unusable values is a parameter error,
    // not an input error.
    cfg.validate().map_err(|e| Error::Domain(format!("invalid simulation config: {e}")))?;

    let mut man = RunManifest::new(
        "simulate",
        json!({
            "config": a.config.display().to_string(),
            "resolved": cfg,
            "bins": a.bins,
            "binning": Binning::from(a.binning),
        }),
    );
    man.add_input(&a.config)?;
    man.seed = Some(cfg.seed);

    let sample = sample_interevents(&cfg)?;
    io::write_json(out_dir.join("events.json"), &sample)?;
    man.add_output("events.json");

    // A single draw yields no interevent differences; skip the histogram
    // rather than failing a legitimate run.
    if !sample.deltas.is_empty() {
        let h = histogram(&sample, a.binning.into(), a.bins)?;
        io::write_histogram_csv(out_dir.join("histogram.csv"), &h)?;
        man.add_output("histogram.csv");
    }
    man.write(out_dir)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

fn cmd_check(out_dir: &Path, a: &CheckArgs) -> Result<i32> {
    let mut cfg = CheckConfig { n_sets: a.n_sets, tol: a.tol, ..CheckConfig::default() };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.perturb.clone_from(&a.perturb);

    let mut man = RunManifest::new("check", serde_json::to_value(&cfg)?);
    man.seed = Some(cfg.seed);

    let report = run_checks(&cfg)?;
    for c in &report.checks {
        let tag = if c.passed { "[ok]  " } else { "[FAIL]" };
        println!("{tag} {:<28} max_err {:.3e} (tol {:.1e})", c.name, c.max_err, c.tol);
    }
    io::write_json(out_dir.join("check_report.json"), &report)?;
    man.add_output("check_report.json");
    man.write(out_dir)?;
    Ok(if report.all_passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_parameter_from_input_errors() {
        assert_eq!(exit_code(&Error::Domain("x".into())), 3);
        assert_eq!(exit_code(&Error::Overflow("x".into())), 3);
        assert_eq!(exit_code(&Error::InvalidInput("x".into())), 2);
        assert_eq!(exit_code(&Error::InsufficientData("x".into())), 2);
        assert_eq!(exit_code(&Error::Parse { line: 3, msg: "x".into() }), 2);
    }

    #[test]
    fn cells_render_empty_for_missing_or_non_finite() {
        assert_eq!(cell(Some(0.5)), "0.5");
        assert_eq!(cell(Some(f64::INFINITY)), "");
        assert_eq!(cell(Some(f64::NAN)), "");
        assert_eq!(cell(None), "");
    }

    #[test]
    fn cli_surface_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
