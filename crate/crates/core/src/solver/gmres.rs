//! Restarted GMRES with right diagonal preconditioning.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    pub rel_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            rel_tol: 1e-10,
            restart: 120,
            max_iter: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` given `apply(v) = A v` and the diagonal of `A`.
/// `x` holds the initial guess on entry.
pub fn gmres(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    opts: GmresOptions,
) -> Result<GmresOutcome> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(GmresOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let pinv: Vec<f64> = diag
        .iter()
        .map(|&d| if d != 0.0 && d.is_finite() { 1.0 / d } else { 1.0 })
        .collect();
    let m = opts.restart.max(1).min(n.max(1));
    let mut iterations = 0;
    loop {
        let ax = apply(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= opts.rel_tol {
            return Ok(GmresOutcome {
                iterations,
                relative_residual: rel,
            });
        }
        if iterations >= opts.max_iter || !rel.is_finite() {
            return Err(Error::LinearSolve {
                iterations,
                relative_residual: rel,
            });
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns, Givens rotations and the rotated right-hand side.
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let z: Vec<f64> = basis[k].iter().zip(&pinv).map(|(v, p)| v * p).collect();
            let mut w = apply(&z);
            // Modified Gram–Schmidt, applied twice for stability.
            for _ in 0..2 {
                for (j, q) in basis.iter().enumerate() {
                    let hij = dot(&w, q);
                    h[j][k] += hij;
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= hij * qi;
                    }
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let tmp = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = tmp;
            }
            let denom = libm::hypot(h[k][k], h[k + 1][k]);
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            let est = g[k + 1].abs() / bnorm;
            if est <= 0.5 * opts.rel_tol || wn == 0.0 || iterations >= opts.max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        for (j, yj) in y.iter().enumerate() {
            for ((xi, qi), p) in x.iter_mut().zip(&basis[j]).zip(&pinv) {
                *xi += yj * qi * p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_nonsymmetric_tridiagonal_system() {
        let n = 50;
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut s = 4.0 * v[i];
                    if i > 0 {
                        s -= 1.3 * v[i - 1];
                    }
                    if i + 1 < n {
                        s -= 0.7 * v[i + 1];
                    }
                    s
                })
                .collect()
        };
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = apply(&exact);
        let mut x = vec![0.0; n];
        let out = gmres(
            &apply,
            &vec![4.0; n],
            &b,
            &mut x,
            GmresOptions {
                restart: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.relative_residual <= 1e-10);
        for (a, e) in x.iter().zip(&exact) {
            assert!((a - e).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = vec![1.0; 3];
        let out = gmres(&|v: &[f64]| v.to_vec(), &[1.0; 3], &[0.0; 3], &mut x, GmresOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(x, vec![0.0; 3]);
    }
}
