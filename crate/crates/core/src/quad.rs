//! Adaptive Simpson quadrature.
//!
//! Small, self-contained integrator used by the oracle module and by tests to
//! check closed forms against their defining integrals. Panels are refined
//! recursively until the Richardson error estimate |S₂ − S₁|/15 falls below
//! the tolerance allotted to the panel; the extrapolated value S₂ + (S₂−S₁)/15
//! is accumulated.

/// Tolerances and depth limit for one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Absolute tolerance allotted to the whole interval.
    pub abs_tol: f64,
    /// Maximum bisection depth per panel before giving up and accepting.
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-12, max_depth: 48 }
    }
}

/// Adaptive Simpson integral of `f` over `[a, b]`.
///
/// Non-finite integrand values are treated as 0 so integrable endpoint
/// singularities (e.g. x^(η−1) at 0 for η < 1) do not poison the sum; callers
/// are expected to place panel edges so that such points sit on a boundary.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cfg: QuadConfig) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = finite_or_zero(f(a));
    let fb = finite_or_zero(f(b));
    let m = 0.5 * (a + b);
    let fm = finite_or_zero(f(m));
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, cfg.abs_tol, cfg.max_depth)
}

/// Integral of `f` over consecutive panels given by `edges` (strictly
/// increasing). Each panel gets an equal share of the absolute tolerance.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, edges: &[f64], cfg: QuadConfig) -> f64 {
    assert!(edges.len() >= 2, "need at least two panel edges");
    let per_panel = QuadConfig {
        abs_tol: cfg.abs_tol / (edges.len() - 1) as f64,
        max_depth: cfg.max_depth,
    };
    edges
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], per_panel))
        .sum()
}

/// Geometrically spaced edges from `a` to `b` (both > 0), `n` panels.
pub fn log_edges(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 1);
    let (la, lb) = (a.ln(), b.ln());
    let mut edges: Vec<f64> = (0..=n)
        .map(|i| (la + (lb - la) * i as f64 / n as f64).exp())
        .collect();
    // Pin the endpoints exactly despite the round trip through ln/exp.
    edges[0] = a;
    edges[n] = b;
    edges
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn finite_or_zero(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = finite_or_zero(f(lm));
    let frm = finite_or_zero(f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
