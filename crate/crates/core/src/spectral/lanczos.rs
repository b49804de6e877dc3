//! Thick-restart Lanczos for the smallest eigenpairs of a symmetric operator.
//!
//! Every new basis vector is orthogonalized against the whole basis twice
//! (classical Gram-Schmidt with one refinement pass), so the projected matrix
//! is assembled column by column from the orthogonalization coefficients.
//! When the basis is full, the lowest Ritz vectors plus the residual direction
//! seed the next cycle.

use faer::{Mat, Side};
use rand::Rng;

use super::laplacian::SymmetricOperator;
use crate::constructors::stream_rng;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    /// Number of wanted eigenpairs.
    pub nev: usize,
    /// Largest basis size; clipped to the operator dimension.
    pub basis_size: usize,
    /// A pair is converged when `||A x - theta x|| <= tolerance * norm`.
    pub tolerance: f64,
    /// Upper bound on the operator norm.
    pub norm: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl LanczosConfig {
    pub fn new(nev: usize, norm: f64, seed: u64) -> Self {
        Self {
            nev,
            basis_size: (3 * nev).max(nev + 80),
            tolerance: 1e-11,
            norm,
            max_restarts: 2000,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    /// `vectors[j]` belongs to `values[j]`.
    pub vectors: Vec<Vec<f64>>,
    pub matvecs: usize,
    pub restarts: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes the components of `w` along `basis`, twice; returns the
/// accumulated coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _ in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let h = dot(v, w);
            *c += h;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= h * vi;
            }
        }
    }
    coeffs
}

/// Unit vector orthogonal to `basis`, drawn from `rng`.
fn fresh_direction(basis: &[Vec<f64>], n: usize, rng: &mut impl Rng) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        orthogonalize(basis, &mut v);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

pub fn lanczos_smallest<A: SymmetricOperator + ?Sized>(op: &A, cfg: &LanczosConfig) -> Result<LanczosResult> {
    let n = op.dim();
    let nev = cfg.nev;
    if nev == 0 || nev > n {
        return Err(Error::InvalidParameter(format!("cannot compute {nev} eigenpairs of a {n} x {n} operator")));
    }
    let m = cfg.basis_size.max(nev + 2).min(n);
    let scale = if cfg.norm > 0.0 { cfg.norm } else { 1.0 };
    let threshold = cfg.tolerance * scale;
    let mut rng = stream_rng(cfg.seed, 0x4c41_4e43);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(fresh_direction(&[], n, &mut rng).expect("random start vector"));
    let mut h = vec![0.0; m * m];
    let mut start = 0;
    let mut matvecs = 0;
    let mut w = vec![0.0; n];
    let mut last_residual = f64::INFINITY;

    for restart in 0..=cfg.max_restarts {
        let mut beta = 0.0;
        let mut residual_dir: Option<Vec<f64>> = None;
        for j in start..m {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let coeffs = orthogonalize(&basis[..=j], &mut w);
            for (i, &c) in coeffs.iter().enumerate() {
                h[i * m + j] = c;
                h[j * m + i] = c;
            }
            beta = norm(&w);
            let breakdown = beta <= 1e-14 * scale;
            if j + 1 < m {
                let next = if breakdown {
                    beta = 0.0;
                    match fresh_direction(&basis, n, &mut rng) {
                        Some(v) => v,
                        None => break,
                    }
                } else {
                    w.iter().map(|x| x / beta).collect()
                };
                h[(j + 1) * m + j] = beta;
                h[j * m + (j + 1)] = beta;
                basis.push(next);
            } else if breakdown {
                beta = 0.0;
            } else {
                residual_dir = Some(w.iter().map(|x| x / beta).collect());
            }
        }
        let size = basis.len();

        let hm = Mat::<f64>::from_fn(size, size, |i, j| h[i * m + j]);
        let evd = hm
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::NoConvergence { iterations: matvecs, residual: f64::NAN })?;
        let theta: Vec<f64> = (0..size).map(|i| evd.S().column_vector()[i]).collect();
        let s = evd.U();
        let residuals: Vec<f64> = (0..size).map(|i| (beta * s[(size - 1, i)]).abs()).collect();
        let want = nev.min(size);
        last_residual = residuals[..want].iter().copied().fold(0.0, f64::max);

        let ritz = |cols: usize| -> Vec<Vec<f64>> {
            (0..cols)
                .map(|c| {
                    let mut y = vec![0.0; n];
                    for (r, v) in basis.iter().enumerate() {
                        let coef = s[(r, c)];
                        for (yi, vi) in y.iter_mut().zip(v) {
                            *yi += coef * vi;
                        }
                    }
                    y
                })
                .collect()
        };

        if (last_residual <= threshold && want == nev) || size == n {
            if size < nev {
                break;
            }
            return Ok(LanczosResult {
                values: theta[..nev].to_vec(),
                vectors: ritz(nev),
                matvecs,
                restarts: restart,
            });
        }

        let Some(f) = residual_dir else {
            // Basis stopped short of n without a residual: nothing to extend.
            break;
        };
        let keep = (nev + (size - nev) / 2).min(size - 1);
        let mut new_basis = ritz(keep);
        h.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..keep {
            h[i * m + i] = theta[i];
        }
        new_basis.push(f);
        basis = new_basis;
        start = keep;
    }
    Err(Error::NoConvergence { iterations: matvecs, residual: last_residual })
}
