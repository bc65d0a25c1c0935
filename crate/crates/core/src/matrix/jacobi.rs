//! One-sided Jacobi SVD and cyclic Jacobi eigensolver for dense complex
//! matrices. Sweep order is fixed (row-cyclic), so results are reproducible
//! bit for bit.

use num_complex::Complex64;

use crate::error::{Error, Result};

type Col = Vec<Complex64>;

const MAX_SWEEPS: usize = 100;
const ORTHO_TOL: f64 = 1e-15;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Applies `(p, q) ← (c·p − s·q̃, s·p + c·q̃)` with `q̃ = q·phase`.
fn rotate(cols: &mut [Col], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yp = *y * phase;
        let xp = *x;
        *x = xp * c - yp * s;
        *y = xp * s + yp * c;
    }
}

pub(crate) struct JacobiSvd {
    /// Columns of `U`; zero columns for zero singular values.
    pub u: Vec<Col>,
    pub sigma: Vec<f64>,
    /// Columns of `V`.
    pub v: Vec<Col>,
}

/// One-sided (Hestenes) Jacobi on the columns of `a` (given column-major).
///
/// Converges when every pair satisfies `|c_p^H c_q| ≤ 1e−15·‖c_p‖‖c_q‖`.
pub(crate) fn svd(mut cols: Vec<Col>, want_vectors: bool) -> Result<JacobiSvd> {
    let n = cols.len();
    let mut v: Vec<Col> = if want_vectors {
        (0..n)
            .map(|j| {
                let mut e = vec![Complex64::default(); n];
                e[j] = Complex64::new(1.0, 0.0);
                e
            })
            .collect()
    } else {
        Vec::new()
    };
    let scale: f64 = cols.iter().map(|c| norm_sqr(c)).sum();
    let floor = scale * f64::MIN_POSITIVE;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm_sqr(&cols[p]);
                let beta = norm_sqr(&cols[q]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma = dot(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s, phase);
                if want_vectors {
                    rotate(&mut v, p, q, c, s, phase);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps"
        )));
    }
    let mut order: Vec<(f64, usize)> = cols.iter().map(|c| norm_sqr(c).sqrt()).zip(0..).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let sigma = order.iter().map(|&(s, _)| s).collect();
    let (u, v) = if want_vectors {
        let u = order
            .iter()
            .map(|&(s, j)| {
                if s > 0.0 {
                    cols[j].iter().map(|z| z / s).collect()
                } else {
                    vec![Complex64::default(); n]
                }
            })
            .collect();
        let v = order.iter().map(|&(_, j)| v[j].clone()).collect();
        (u, v)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(JacobiSvd { u, sigma, v })
}

/// Cyclic Jacobi for a hermitian matrix given row-major. Returns eigenvalues
/// ascending and the matching eigenvector columns.
pub(crate) fn hermitian_eigen(n: usize, data: &[Complex64]) -> Result<(Vec<f64>, Vec<Col>)> {
    let mut a = data.to_vec();
    let idx = |i: usize, j: usize| i * n + j;
    let mut vecs: Vec<Complex64> = vec![Complex64::default(); n * n];
    for i in 0..n {
        vecs[idx(i, i)] = Complex64::new(1.0, 0.0);
    }
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[idx(i, j)].norm_sqr())
            .sum();
        if off <= 1e-30 * total {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[idx(p, q)];
                let bn = b.norm();
                if bn == 0.0 || bn * bn <= 1e-34 * total {
                    continue;
                }
                let phase = b / bn;
                let (app, aqq) = (a[idx(p, p)].re, a[idx(q, q)].re);
                let theta = (aqq - app) / (2.0 * bn);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [−s, c]]
                let ph = phase.conj();
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = ph * (-s);
                let g_qq = ph * c;
                // A ← A G (columns p, q)
                for i in 0..n {
                    let (x, y) = (a[idx(i, p)], a[idx(i, q)]);
                    a[idx(i, p)] = x * g_pp + y * g_qp;
                    a[idx(i, q)] = x * g_pq + y * g_qq;
                    let (x, y) = (vecs[idx(i, p)], vecs[idx(i, q)]);
                    vecs[idx(i, p)] = x * g_pp + y * g_qp;
                    vecs[idx(i, q)] = x * g_pq + y * g_qq;
                }
                // A ← G^H A (rows p, q)
                for j in 0..n {
                    let (x, y) = (a[idx(p, j)], a[idx(q, j)]);
                    a[idx(p, j)] = g_pp.conj() * x + g_qp.conj() * y;
                    a[idx(q, j)] = g_pq.conj() * x + g_qq.conj() * y;
                }
                a[idx(p, q)] = Complex64::default();
                a[idx(q, p)] = Complex64::default();
            }
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "hermitian Jacobi did not converge in {MAX_SWEEPS} sweeps"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[idx(i, i)].re.total_cmp(&a[idx(j, j)].re));
    let vals = order.iter().map(|&i| a[idx(i, i)].re).collect();
    let cols = order
        .iter()
        .map(|&j| (0..n).map(|i| vecs[idx(i, j)]).collect())
        .collect();
    Ok((vals, cols))
}
