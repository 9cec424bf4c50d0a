//! Small deterministic optimization toolkit: derivative-free simplex
//! minimization, ordinary least squares, and the dense linear algebra needed
//! to turn a local quadratic model of a least-squares objective into
//! parameter standard errors.
//!
//! Everything here is sized for two-to-four-parameter curve fits; robustness
//! and reproducibility are preferred over speed.

use crate::error::{Error, Result};

/// Result of a simplex minimization.
#[derive(Debug, Clone)]
pub struct NmResult {
    /// Best parameter vector found.
    pub x: Vec<f64>,
    /// Objective at `x`.
    pub fx: f64,
    /// Iterations used.
    pub iters: usize,
    /// Whether the simplex collapsed below tolerance before `max_iter`.
    pub converged: bool,
}

/// Nelder–Mead simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction ½, shrink ½).
///
/// The initial simplex is `x0` plus one vertex per dimension displaced by
/// `scale[i]`. The best-vertex objective is non-increasing across iterations
/// by construction. Convergence: the spread of vertex objectives falls below
/// `ftol·(|f_best| + ftol)`, or the simplex collapses to within
/// `1e-11·scale[i]` per coordinate — the latter matters for objectives whose
/// minimum is ≈ 0, where the float noise floor keeps the f-spread criterion
/// out of reach.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    scale: &[f64],
    max_iter: usize,
    ftol: f64,
) -> NmResult {
    let n = x0.len();
    assert!(n >= 1 && scale.len() == n);

    // vertices[i] = (x, f(x)), kept sorted best-first.
    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    vertices.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        let fv = f(&v);
        vertices.push((v, fv));
    }
    sort_vertices(&mut vertices);

    let mut iters = 0;
    let mut converged = false;
    while iters < max_iter {
        iters += 1;
        let spread = vertices[n].1 - vertices[0].1;
        let collapsed = (0..n).all(|j| {
            let extent = vertices
                .iter()
                .map(|(v, _)| (v[j] - vertices[0].0[j]).abs())
                .fold(0.0, f64::max);
            extent <= 1e-11 * scale[j].abs().max(f64::MIN_POSITIVE)
        });
        if spread.abs() <= ftol * (vertices[0].1.abs() + ftol) || collapsed {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (v, _) in vertices.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = vertices[n].clone();
        let second_worst = vertices[n - 1].1;

        let reflect = combine(&centroid, &worst.0, 2.0, -1.0);
        let f_reflect = f(&reflect);

        if f_reflect < vertices[0].1 {
            // Try to expand past the reflection.
            let expand = combine(&centroid, &worst.0, 3.0, -2.0);
            let f_expand = f(&expand);
            vertices[n] = if f_expand < f_reflect { (expand, f_expand) } else { (reflect, f_reflect) };
        } else if f_reflect < second_worst {
            vertices[n] = (reflect, f_reflect);
        } else {
            // Contract toward the centroid, inside or outside.
            let (candidate, f_candidate) = if f_reflect < worst.1 {
                let c = combine(&centroid, &reflect, 0.5, 0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = combine(&centroid, &worst.0, 0.5, 0.5);
                let fc = f(&c);
                (c, fc)
            };
            if f_candidate < worst.1.min(f_reflect) {
                vertices[n] = (candidate, f_candidate);
            } else {
                // Shrink everything toward the best vertex.
                let best = vertices[0].0.clone();
                for (v, fv) in vertices.iter_mut().skip(1) {
                    for (x, b) in v.iter_mut().zip(&best) {
                        *x = 0.5 * (*x + b);
                    }
                    *fv = f(v);
                }
            }
        }
        sort_vertices(&mut vertices);
    }

    let (x, fx) = vertices.swap_remove(0);
    NmResult { x, fx, iters, converged }
}

fn sort_vertices(v: &mut [(Vec<f64>, f64)]) {
    v.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
}

fn combine(a: &[f64], b: &[f64], wa: f64, wb: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
}

/// Ordinary least squares y = slope·x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_intercept: f64,
    /// Covariance of (slope, intercept): −s²·x̄/Sxx.
    pub cov_slope_intercept: f64,
    /// Sum of squared residuals.
    pub ssr: f64,
}

/// Unweighted straight-line least squares with classical standard errors
/// (s² = SSR/(n−2); zero for n = 2).
pub fn ols(x: &[f64], y: &[f64]) -> Result<OlsFit> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::insufficient_data(format!(
            "OLS needs ≥ 2 paired points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid_input(
            "OLS abscissae are all identical (zero variance)".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let s2 = if n > 2 { ssr / (nf - 2.0) } else { 0.0 };
    Ok(OlsFit {
        slope,
        intercept,
        se_slope: (s2 / sxx).sqrt(),
        se_intercept: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        cov_slope_intercept: -s2 * mx / sxx,
        ssr,
    })
}

/// Central-difference Hessian of `f` at `x` with per-coordinate relative
/// steps `h_rel` (absolute floor 1e-7).
pub fn numerical_hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h_rel: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| (v.abs() * h_rel).max(1e-7)).collect();
    let f0 = f(x);
    let mut hess = vec![vec![0.0; n]; n];
    let at = |steps: &[(usize, f64)]| -> f64 {
        let mut p = x.to_vec();
        for &(i, s) in steps {
            p[i] += s;
        }
        f(&p)
    };
    for i in 0..n {
        let fp = at(&[(i, h[i])]);
        let fm = at(&[(i, -h[i])]);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in (i + 1)..n {
            let fpp = at(&[(i, h[i]), (j, h[j])]);
            let fpm = at(&[(i, h[i]), (j, -h[j])]);
            let fmp = at(&[(i, -h[i]), (j, h[j])]);
            let fmm = at(&[(i, -h[i]), (j, -h[j])]);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Invert a small dense matrix by Gauss–Jordan with partial pivoting.
/// Returns `None` if the matrix is numerically singular.
pub fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        let pivot_row = a[col].clone();
        for (row, r) in a.iter_mut().enumerate() {
            if row != col && r[col] != 0.0 {
                let factor = r[col];
                for (d, s) in r.iter_mut().zip(&pivot_row) {
                    *d -= factor * s;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Standard errors of a least-squares fit from the local quadratic model:
/// cov = 2·σ̂²·H⁻¹ with σ̂² = SSR/(n−p) (zero when n ≤ p, i.e. a saturated
/// fit). Returns (stderr per parameter, covariance matrix); singular or
/// non-positive curvature yields zeros rather than an error — the fit value
/// itself is still usable, only its uncertainty is not.
pub fn stderr_from_hessian(
    hess: &[Vec<f64>],
    ssr: f64,
    n_points: usize,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = hess.len();
    let dof = n_points.saturating_sub(p);
    if dof == 0 {
        return (vec![0.0; p], vec![vec![0.0; p]; p]);
    }
    let sigma2 = ssr / dof as f64;
    match invert(hess) {
        Some(inv) => {
            let cov: Vec<Vec<f64>> = inv
                .iter()
                .map(|row| row.iter().map(|v| 2.0 * sigma2 * v).collect())
                .collect();
            let se = (0..p)
                .map(|i| {
                    let v: f64 = cov[i][i];
                    if v > 0.0 {
                        v.sqrt()
                    } else {
                        0.0
                    }
                })
                .collect();
            (se, cov)
        }
        None => (vec![0.0; p], vec![vec![0.0; p]; p]),
    }
}
