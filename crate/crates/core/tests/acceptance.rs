//! Acceptance gate: one test per release criterion, each printing a single
//! `[PASS]`/`[FAIL]` line (run with `--nocapture` to see the lines for
//! passing tests). Tolerances are pinned as constants next to the criteria
//! they gate; reference values are frozen IBM-calibration rows.

use interevent::check::{run_checks, CheckConfig};
use interevent::estimation::{
    derive_elementary, fit_piecewise_tau, fit_psi, fit_rq_curve, fit_superscaling,
    DEFAULT_ALPHA_CAP,
};
use interevent::events::{extract_events, histogram, rq_curve, Binning, Mode};
use interevent::extreme::{q_of_rq, rq_of_q};
use interevent::mc::{generate_series, ks_statistic, sample_interevents, spearman_rho};
use interevent::oracle::{psi_mass_quad, psi_moment_quad, superposition_density};
use interevent::superstat::{
    bq_from_alpha, moment_conditional, psi, psi_cdf, psi_clustering, psi_initial, psi_tail,
    tau0_from_tauq, Direction, Moment, RelaxationSpec, SuperstatParams,
};
use interevent::{SimConfig, WeibullParams};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

// --- Frozen IBM calibration -----------------------------------------------

const ETA_IBM: f64 = 0.8246;
const EPS_BAR_IBM: f64 = 0.0078;

/// Fitted key rows: (R_Q, α_Q, τ_Q(Q)).
const KEY_ROWS: [(f64, f64, f64); 5] = [
    (2.0, 1000.0, 1.4286),
    (5.0, 3.0, 3.330),
    (10.0, 1.90, 5.0),
    (30.0, 0.95, 4.550),
    (70.0, 0.47, 3.850),
];

/// Derived elementary rows aligned with `KEY_ROWS`: (B_Q, τ_Q(0)).
const DERIVED_ROWS: [(f64, f64); 5] = [
    (0.0295, 1.4286),
    (33.82951, 1.94745),
    (58.86516, 1.48793),
    (136.43324, 0.126807),
    (320.29882, 4.56615e-4),
];

/// Reference superscaling constants with their error bars.
const B_REF: (f64, f64) = (0.04798, 0.0249);
const ZETA_REF: (f64, f64) = (2.6096, 0.3478);

/// Reference two-line calibration (a_L, b_L, a_R, b_R) and its intercept sum.
const LINES_REF: [f64; 4] = [0.430, 0.80, -0.019, 5.160];
const TAU0_AT_R1_REF: f64 = 1.24;

fn ibm() -> WeibullParams {
    WeibullParams::new(ETA_IBM, EPS_BAR_IBM)
}

/// Chain-consistent elementary parameters for a key row: the threshold,
/// inverse-temperature analog and free relaxation time that generate
/// exactly (α, τ_Q(Q)) at mean interevent time R_Q.
fn elementary_chain(alpha: f64, r_q: f64, tau_q: f64, direction: Direction) -> (f64, f64, f64) {
    let p = ibm();
    let q = q_of_rq(&p, r_q).unwrap();
    let b_q = bq_from_alpha(alpha, p.eps_bar, p.eta).unwrap();
    let tau0 = match direction {
        Direction::Expanding => tau0_from_tauq(tau_q, r_q, alpha).unwrap(),
        Direction::Clustering => tau_q * (r_q.ln() / alpha).exp(),
    };
    (q, b_q, tau0)
}

fn criterion<F: FnOnce() + std::panic::UnwindSafe>(n: usize, desc: &str, body: F) {
    match std::panic::catch_unwind(body) {
        Ok(()) => println!("[PASS] criterion {n}: {desc}"),
        Err(e) => {
            println!("[FAIL] criterion {n}: {desc}");
            std::panic::resume_unwind(e);
        }
    }
}

fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

// --- 1: derived elementary quantities round-trip ---------------------------

const TOL_BQ_REL: f64 = 1e-3;
const TOL_TAU0_REL: f64 = 5e-3;

#[test]
fn criterion_01_elementary_round_trip() {
    criterion(1, "derived (B_Q, τ_Q(0)) match frozen rows (0.1% / 0.5%)", || {
        let p = ibm();
        for ((r, alpha, tau_q), (b_q_ref, tau0_ref)) in KEY_ROWS.iter().zip(DERIVED_ROWS) {
            let sp = SuperstatParams::expanding(*alpha, *tau_q);
            let (b_q, tau0) = derive_elementary(&sp, *r, &p).unwrap();
            assert!(
                rel_err(b_q, b_q_ref) <= TOL_BQ_REL,
                "R={r}: B_Q {b_q} vs {b_q_ref} ({:.2e})",
                rel_err(b_q, b_q_ref)
            );
            assert!(
                rel_err(tau0, tau0_ref) <= TOL_TAU0_REL,
                "R={r}: tau0 {tau0} vs {tau0_ref} ({:.2e})",
                rel_err(tau0, tau0_ref)
            );
        }
    });
}

// --- 2: superposition oracle equals the closed form ------------------------

const TOL_ORACLE_REL: f64 = 1e-6;
const ORACLE_GRID: usize = 60;

/// The α values exercised by the oracle and normalization criteria, paired
/// with their key rows (R_Q, τ_Q(Q)).
const ORACLE_SET: [(f64, f64, f64); 4] =
    [(0.47, 70.0, 3.850), (0.95, 30.0, 4.550), (1.9, 10.0, 5.0), (3.0, 5.0, 3.330)];

#[test]
fn criterion_02_superposition_oracle() {
    criterion(2, "R_Q × quadrature of the superposition equals ψ to 1e-6", || {
        let p = ibm();
        let mut worst: f64 = 0.0;
        for (alpha, r_q, tau_q) in ORACLE_SET {
            let (q, b_q, tau0) = elementary_chain(alpha, r_q, tau_q, Direction::Expanding);
            let sp = SuperstatParams::expanding(alpha, tau_q);
            for i in 0..ORACLE_GRID {
                let u = (1e-3f64.ln()
                    + (1e6f64).ln() * i as f64 / (ORACLE_GRID - 1) as f64)
                    .exp();
                let dt = u * tau_q;
                let direct = superposition_density(
                    p.eta,
                    p.eps_bar,
                    q,
                    b_q,
                    tau0,
                    Direction::Expanding,
                    dt,
                );
                let closed = psi(&sp, dt).unwrap();
                let err = rel_err(r_q * direct, closed);
                worst = worst.max(err);
                assert!(err <= TOL_ORACLE_REL, "α={alpha}, u={u:.3e}: rel err {err:.3e}");
            }
        }
        println!("    worst oracle deviation: {worst:.3e}");
    });
}

// --- 3: normalization and moments ------------------------------------------

const TOL_MASS: f64 = 1e-8;
const TOL_MOMENT_REL: f64 = 1e-6;

#[test]
fn criterion_03_normalization_and_moments() {
    criterion(3, "∫ψ = 1 (1e-8); moments match quadrature (1e-6); divergence flagged", || {
        for (alpha, _, tau_q) in ORACLE_SET {
            let sp = SuperstatParams::expanding(alpha, tau_q);
            let mass = psi_mass_quad(&sp);
            assert!((mass - 1.0).abs() <= TOL_MASS, "α={alpha}: mass {mass}");
        }
        for (alpha, tau_q, m) in [(1.9, 5.0, 1), (3.0, 3.330, 1), (3.0, 3.330, 2)] {
            let sp = SuperstatParams::expanding(alpha, tau_q);
            let quad = psi_moment_quad(&sp, m);
            match moment_conditional(&sp, m).unwrap() {
                Moment::Finite(v) => assert!(
                    rel_err(v, quad) <= TOL_MOMENT_REL,
                    "α={alpha}, m={m}: closed {v} vs quad {quad}"
                ),
                Moment::Divergent => panic!("α={alpha}, m={m} wrongly divergent"),
            }
        }
        for (alpha, m) in [(0.95, 1), (1.9, 2)] {
            let sp = SuperstatParams::expanding(alpha, 5.0);
            assert_eq!(moment_conditional(&sp, m).unwrap(), Moment::Divergent, "α={alpha} m={m}");
        }
    });
}

// --- 4: asymptotic regimes --------------------------------------------------

const TOL_TAIL_REL: f64 = 1e-6;
const U_TAIL_CHECK: f64 = 50.0;
const TOL_INITIAL_REL: f64 = 1e-3;
const U_INITIAL_CHECK: f64 = 0.01;
const TOL_EXPONENTIAL_REGIME: f64 = 0.01;

#[test]
fn criterion_04_asymptotic_regimes() {
    criterion(4, "tail/initial asymptotes and the α=1000 exponential regime", || {
        for alpha in [0.47, 1.9, 3.0] {
            let sp = SuperstatParams::expanding(alpha, 1.0);
            let tail_ratio = psi(&sp, U_TAIL_CHECK).unwrap() / psi_tail(&sp, U_TAIL_CHECK).unwrap();
            assert!(
                (tail_ratio - 1.0).abs() < TOL_TAIL_REL,
                "α={alpha}: ψ/ψ_tail − 1 = {:.3e}",
                tail_ratio - 1.0
            );
            let init_ratio =
                psi(&sp, U_INITIAL_CHECK).unwrap() / psi_initial(&sp, U_INITIAL_CHECK).unwrap();
            assert!(
                (init_ratio - 1.0).abs() < TOL_INITIAL_REL,
                "α={alpha}: ψ/ψ_initial − 1 = {:.3e}",
                init_ratio - 1.0
            );
        }
        let sp = SuperstatParams::expanding(1000.0, 1.0);
        for i in 0..=50 {
            let u = 5.0 * i as f64 / 50.0;
            let v = psi(&sp, u).unwrap() * u.exp();
            assert!(
                (v - 1.0).abs() < TOL_EXPONENTIAL_REGIME,
                "α=1000, u={u}: ψ·τ·e^u = {v}"
            );
        }
    });
}

// --- 5: Monte Carlo vs closed-form CDF --------------------------------------

const TOL_KS: f64 = 0.002;
const MC_DRAWS: u64 = 1_000_000;
const MC_SEED: u64 = 20_240_817;

fn mc_config(direction: Direction, n: u64, workers: usize) -> SimConfig {
    let (alpha, r_q, tau_q) = (1.9, 10.0, 5.0);
    let (q, b_q, tau0) = elementary_chain(alpha, r_q, tau_q, direction);
    SimConfig {
        weibull: ibm(),
        relaxation: RelaxationSpec { tau0, b_q, eta: ETA_IBM, direction },
        q,
        n_samples: n,
        seed: MC_SEED,
        n_workers: workers,
    }
}

#[test]
fn criterion_05_monte_carlo_agreement() {
    criterion(5, "10⁶ draws: KS < 0.002 and worker-count bit-identical", || {
        let cfg = mc_config(Direction::Expanding, MC_DRAWS, 1);
        let sample = sample_interevents(&cfg).unwrap();
        let sp = SuperstatParams::expanding(1.9, 5.0);
        let ks = ks_statistic(&sample.deltas_with_first(), |x| psi_cdf(&sp, x).unwrap());
        assert!(ks < TOL_KS, "KS = {ks}");
        println!("    ks distance at 1e6 draws: {ks:.5}");

        let mut cfg4 = mc_config(Direction::Expanding, MC_DRAWS, 1);
        cfg4.n_workers = 4;
        let sample4 = sample_interevents(&cfg4).unwrap();
        assert_eq!(sample.event_times, sample4.event_times, "worker count changed the stream");
        assert_eq!(sample.magnitudes, sample4.magnitudes);
    });
}

// --- 6: magnitude-law recovery from noisy mean-interevent points -------------

const TOL_ETA_ABS: f64 = 0.03;
const TOL_EPS_BAR_REL: f64 = 0.05;
const RQ_NOISE_REL: f64 = 0.02;
const RQ_POINTS: usize = 30;
const RQ_SEED: u64 = 42;

#[test]
fn criterion_06_rq_curve_recovery() {
    criterion(6, "noisy mean-interevent fit recovers η ± 0.03, ε̄ ± 5%", || {
        let p = ibm();
        let mut rng = ChaCha12Rng::seed_from_u64(RQ_SEED);
        let mut normal = || {
            let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            let u2 = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let points: Vec<(f64, f64)> = (0..RQ_POINTS)
            .map(|i| {
                let q = (0.002f64.ln()
                    + (0.06f64 / 0.002).ln() * i as f64 / (RQ_POINTS - 1) as f64)
                    .exp();
                let r = rq_of_q(&p, q).unwrap() * (RQ_NOISE_REL * normal()).exp();
                (q, r)
            })
            .collect();
        let rep = fit_rq_curve(&points, None).unwrap();
        let eta = rep.param("eta").unwrap();
        let eps_bar = rep.param("eps_bar").unwrap();
        assert!((eta - ETA_IBM).abs() <= TOL_ETA_ABS, "eta {eta}");
        assert!(rel_err(eps_bar, EPS_BAR_IBM) <= TOL_EPS_BAR_REL, "eps_bar {eps_bar}");
        println!("    recovered eta = {eta:.4}, eps_bar = {eps_bar:.5}");
    });
}

// --- 7: superscaling constants inside the reference error bars ---------------

#[test]
fn criterion_07_superscaling_reproduction() {
    criterion(7, "superscaling fit lands inside the reference error bars", || {
        let points: Vec<(f64, f64)> =
            KEY_ROWS.iter().map(|&(r, alpha, _)| (r, alpha)).collect();
        let rep = fit_superscaling(&points).unwrap();
        let b = rep.param("b").unwrap();
        let zeta = rep.param("zeta").unwrap();
        assert!(
            (b - B_REF.0).abs() <= B_REF.1,
            "B = {b} outside {} ± {}",
            B_REF.0,
            B_REF.1
        );
        assert!(
            (zeta - ZETA_REF.0).abs() <= ZETA_REF.1,
            "ζ = {zeta} outside {} ± {}",
            ZETA_REF.0,
            ZETA_REF.1
        );
        assert!(rep.notes.iter().any(|n| n.contains("sentinel")), "sentinel note missing");
        println!("    B = {b:.5}, ζ = {zeta:.5}");
    });
}

// --- 8: two-line relaxation calibration --------------------------------------

const TOL_LINES_REL: f64 = 0.10;

#[test]
fn criterion_08_piecewise_calibration() {
    criterion(8, "two-line τ_Q(Q) calibration within 10% of the reference", || {
        let points: Vec<(f64, f64)> =
            KEY_ROWS.iter().map(|&(r, _, tau_q)| (r, tau_q)).collect();
        let (_rep, lines) = fit_piecewise_tau(&points).unwrap();
        let got = [lines.a_l, lines.b_l, lines.a_r, lines.b_r];
        for (g, r) in got.iter().zip(LINES_REF) {
            assert!(rel_err(*g, r) <= TOL_LINES_REL, "{g} vs reference {r}");
        }
        assert!(
            rel_err(lines.tau0_zero(), TAU0_AT_R1_REF) <= TOL_LINES_REL,
            "a_L + b_L = {} vs {TAU0_AT_R1_REF}",
            lines.tau0_zero()
        );
        println!(
            "    a_L = {:.4}, b_L = {:.4}, a_R = {:.5}, b_R = {:.4}, a_L+b_L = {:.4}",
            lines.a_l,
            lines.b_l,
            lines.a_r,
            lines.b_r,
            lines.tau0_zero()
        );
    });
}

// --- 9: clustering density oracle and rank correlation -----------------------

const CLUSTER_GRID: usize = 40;
const SPEARMAN_N: u64 = 100_000;
/// One-sided normal critical value for p < 0.001: ρ√(n−1) must fall below it.
const Z_CRIT: f64 = -3.09;

#[test]
fn criterion_09_clustering_hierarchy() {
    criterion(9, "clustering oracle (1e-6) and negative rank correlation (p < 0.001)", || {
        let p = ibm();
        let (alpha, r_q, tau_q) = (0.47, 70.0, 3.850);
        let (q, b_q, tau0) = elementary_chain(alpha, r_q, tau_q, Direction::Clustering);
        let sp = SuperstatParams::clustering(alpha, tau_q);
        for i in 0..CLUSTER_GRID {
            let u = (1e-2f64.ln() + (5e3f64).ln() * i as f64 / (CLUSTER_GRID - 1) as f64).exp();
            let dt = u * tau_q;
            let direct =
                superposition_density(p.eta, p.eps_bar, q, b_q, tau0, Direction::Clustering, dt);
            let closed = psi_clustering(&sp, dt).unwrap();
            let err = rel_err(r_q * direct, closed);
            assert!(err <= TOL_ORACLE_REL, "u={u:.3e}: rel err {err:.3e}");
        }

        let mut cfg = mc_config(Direction::Clustering, SPEARMAN_N, 4);
        cfg.relaxation.tau0 = tau0;
        cfg.relaxation.b_q = b_q;
        cfg.q = q;
        let sample = sample_interevents(&cfg).unwrap();
        let rho = spearman_rho(&sample.magnitudes, &sample.deltas_with_first());
        let z = rho * ((SPEARMAN_N - 1) as f64).sqrt();
        assert!(z < Z_CRIT, "Spearman z = {z} (ρ = {rho})");
        println!("    spearman ρ = {rho:.4} (z = {z:.1})");
    });
}

// --- 10: algebraic identity suite ---------------------------------------------

const CHECK_SETS: usize = 1000;
const CHECK_TOL: f64 = 1e-10;

#[test]
fn criterion_10_identity_suite() {
    criterion(10, "identity web holds at 1e-10 over 1000 random parameter sets", || {
        let report = run_checks(&CheckConfig {
            n_sets: CHECK_SETS,
            tol: CHECK_TOL,
            ..CheckConfig::default()
        })
        .unwrap();
        for c in &report.checks {
            assert!(c.passed, "{}: max_err {:.3e}", c.name, c.max_err);
        }
        assert!(report.all_passed);
        let worst = report.checks.iter().map(|c| c.max_err).fold(0.0, f64::max);
        println!("    worst identity deviation: {worst:.3e}");
    });
}

// --- 11: end-to-end pipeline ---------------------------------------------------

const SERIES_TICKS: usize = 1_000_000;
const SERIES_SEED: u64 = 7;
const TOL_FIT_REL: f64 = 0.10;

#[test]
fn criterion_11_end_to_end_pipeline() {
    criterion(11, "tick series → R_Q curve within 3 SE; sampled ψ fit within 10%", || {
        // All-loss ticks so the loss-event probability per tick is the bare
        // Weibull tail probability and the recurrence law applies as-is.
        let p = ibm();
        let series = generate_series(&p, SERIES_TICKS, 1.0, SERIES_SEED).unwrap();
        let grid: Vec<f64> = (0..10)
            .map(|i| (0.006f64.ln() + (0.043f64 / 0.006).ln() * i as f64 / 9.0).exp())
            .collect();
        let curve = rq_curve(&series, Mode::Loss, &grid, 10).unwrap();
        for point in &curve {
            assert!(point.reliable, "q={}: only {} events", point.q, point.n_events);
            let expected = rq_of_q(&p, point.q).unwrap();
            let sample = extract_events(&series, Mode::Loss, point.q).unwrap();
            let mean = point.r_q.unwrap();
            let n = sample.deltas.len() as f64;
            let var = sample.deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
                / (n - 1.0);
            let se = (var / n).sqrt();
            assert!(
                (mean - expected).abs() <= 3.0 * se,
                "q={}: mean {mean} vs {expected} (se {se})",
                point.q
            );
        }

        let cfg = mc_config(Direction::Expanding, MC_DRAWS, 4);
        let sample = sample_interevents(&cfg).unwrap();
        let h = histogram(&sample, Binning::Logarithmic, 48).unwrap();
        let rep = fit_psi(&h, Direction::Expanding, DEFAULT_ALPHA_CAP).unwrap();
        let alpha = rep.param("alpha").unwrap();
        let tau = rep.param("tau_q").unwrap();
        assert!(rel_err(alpha, 1.9) <= TOL_FIT_REL, "alpha {alpha}");
        assert!(rel_err(tau, 5.0) <= TOL_FIT_REL, "tau {tau}");
        println!("    recovered alpha = {alpha:.3}, tau = {tau:.3}");
    });
}
