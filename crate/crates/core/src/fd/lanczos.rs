//! Restarted block Lanczos for the dominant eigenpairs of a symmetric
//! operator, used on `(H − σ)⁻¹`.
//!
//! The projected matrix `T = VᵀAV` is accumulated explicitly as each block
//! is applied, so restarting only needs a Rayleigh–Ritz rotation: the kept
//! Ritz vectors and the pending (not yet applied) residual block still
//! satisfy `A V = V T + P R Eᵀ` for the new basis.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct KrylovOptions {
    pub block: usize,
    pub max_basis: usize,
    pub max_applications: usize,
    pub tol: f64,
}

/// `apply` overwrites each vector of a block with its image.
///
/// Ritz pairs `(θ, x)` of the `want` eigenvalues of largest magnitude,
/// sorted by decreasing `|θ|`, followed by any further pairs within 0.1%
/// of the last wanted `|θ|`.
pub(crate) fn dominant_eigenpairs(
    dim: usize,
    apply: &mut dyn FnMut(&mut [Vec<f64>]),
    want: usize,
    start: &[Vec<f64>],
    opts: KrylovOptions,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if want == 0 {
        return Ok(Vec::new());
    }
    if want > dim {
        return Err(Error::invalid(format!("requested {want} eigenpairs of a {dim}-dimensional operator")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut t = DMatrix::<f64>::zeros(0, 0);

    let mut pending: Vec<Vec<f64>> = start.iter().filter(|v| v.len() == dim).cloned().collect();
    while pending.len() < opts.block {
        pending.push(random_vector(&mut rng, dim));
    }
    let (mut pending, _) = orthonormalize_block(&basis, pending);
    let mut applications = 0usize;

    loop {
        if pending.is_empty() {
            // Invariant subspace found; continue with fresh directions.
            let fresh: Vec<Vec<f64>> = (0..opts.block).map(|_| random_vector(&mut rng, dim)).collect();
            pending = orthonormalize_block(&basis, fresh).0;
            if pending.is_empty() {
                break;
            }
        }
        let base = basis.len();
        let width = pending.len();
        let mut images = pending.clone();
        apply(&mut images);
        applications += width;
        basis.append(&mut pending);

        let m = basis.len();
        let mut grown = DMatrix::<f64>::zeros(m, m);
        grown.view_mut((0, 0), (base, base)).copy_from(&t);
        for (c, w) in images.iter().enumerate() {
            for (r, v) in basis.iter().enumerate() {
                let x = dot(v, w);
                grown[(r, base + c)] = x;
                if r < base {
                    grown[(base + c, r)] = x;
                }
            }
        }
        // Symmetrize the freshly computed square block.
        for i in 0..width {
            for j in 0..i {
                let s = 0.5 * (grown[(base + i, base + j)] + grown[(base + j, base + i)]);
                grown[(base + i, base + j)] = s;
                grown[(base + j, base + i)] = s;
            }
        }
        t = grown;

        let (next, r) = orthonormalize_block(&basis, images);
        pending = next;

        let eig = SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));

        // Residual of a Ritz pair lives entirely in the pending block.
        let residual = |idx: usize| -> f64 {
            let y = eig.eigenvectors.column(idx);
            let mut acc = 0.0;
            for row in 0..r.nrows() {
                let mut s = 0.0;
                for col in 0..width {
                    s += r[(row, col)] * y[base + col];
                }
                acc += s * s;
            }
            acc.sqrt()
        };
        // A near-degenerate partner of the last wanted value cannot be
        // separated from it, so the whole cluster has to converge.
        let mut cluster = want.min(m);
        if cluster > 0 {
            let edge = eig.eigenvalues[order[cluster - 1]].abs();
            while cluster < m && eig.eigenvalues[order[cluster]].abs() >= edge * (1.0 - 1e-3) {
                cluster += 1;
            }
        }
        let done = m >= want && order[..cluster].iter().all(|&i| residual(i) <= opts.tol * eig.eigenvalues[i].abs());
        if done || (pending.is_empty() && m == dim) {
            return Ok(order[..cluster]
                .iter()
                .map(|&i| (eig.eigenvalues[i], combine(&basis, eig.eigenvectors.column(i).as_slice())))
                .collect());
        }
        if applications >= opts.max_applications {
            return Err(Error::NonConvergence(format!(
                "block Lanczos: {want} eigenpairs not converged after {applications} operator applications"
            )));
        }
        if m + pending.len() > opts.max_basis {
            let keep = (cluster + opts.block).min(m);
            let kept: Vec<Vec<f64>> =
                order[..keep].iter().map(|&i| combine(&basis, eig.eigenvectors.column(i).as_slice())).collect();
            t = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                keep,
                order[..keep].iter().map(|&i| eig.eigenvalues[i]),
            ));
            basis = kept;
            // The pending block is orthogonal to the old span and hence to
            // the kept Ritz vectors; reorthogonalize once against drift.
            pending = orthonormalize_block(&basis, pending).0;
        }
    }
    Err(Error::NonConvergence("block Lanczos: basis exhausted".into()))
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random::<f64>() - 0.5).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn combine(basis: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (v, c) in basis.iter().zip(coeffs) {
        axpy(*c, v, &mut out);
    }
    out
}

/// Orthonormalizes `block` against `basis` and itself (classical
/// Gram–Schmidt, repeated until a pass leaves the norm nearly intact), dropping numerically dependent columns. Returns the new
/// columns `Q` and the coefficients `R` with `block ≡ Q R` modulo the span
/// of `basis`.
pub(crate) fn orthonormalize_block(basis: &[Vec<f64>], block: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, DMatrix<f64>) {
    let width = block.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(width);
    let mut r_rows: Vec<Vec<f64>> = Vec::new();
    for (j, mut w) in block.into_iter().enumerate() {
        let norm0 = dot(&w, &w).sqrt();
        let mut coeffs = vec![0.0; q.len()];
        let mut prev = norm0;
        let mut norm = norm0;
        // Repeat while a pass still removes a large fraction of the norm.
        for _ in 0..4 {
            for v in basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
            for (k, v) in q.iter().enumerate() {
                let c = dot(v, &w);
                coeffs[k] += c;
                axpy(-c, v, &mut w);
            }
            norm = dot(&w, &w).sqrt();
            if norm > 0.7 * prev {
                break;
            }
            prev = norm;
        }
        for (k, c) in coeffs.into_iter().enumerate() {
            r_rows[k][j] = c;
        }
        if norm > 1e-14 * norm0.max(f64::MIN_POSITIVE) {
            w.iter_mut().for_each(|x| *x /= norm);
            q.push(w);
            let mut row = vec![0.0; width];
            row[j] = norm;
            r_rows.push(row);
        }
    }
    let r = DMatrix::from_fn(r_rows.len(), width, |i, j| r_rows[i][j]);
    (q, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opts() -> KrylovOptions {
        KrylovOptions { block: 4, max_basis: 40, max_applications: 4000, tol: 1e-12 }
    }

    #[test]
    fn diagonal_operator_with_multiplicities() {
        // eigenvalues 1/(1+i/2) with the top one doubled
        let dim = 300;
        let diag: Vec<f64> = (0..dim).map(|i| 1.0 / (1.0 + (i.max(1) - 1) as f64 * 0.5)).collect();
        let mut apply = |xs: &mut [Vec<f64>]| {
            for x in xs.iter_mut() {
                x.iter_mut().zip(&diag).for_each(|(v, d)| *v *= d);
            }
        };
        let got = dominant_eigenpairs(dim, &mut apply, 6, &[], opts()).unwrap();
        let mut expect = diag.clone();
        expect.sort_by(|a, b| b.total_cmp(a));
        for ((theta, v), e) in got.iter().zip(&expect) {
            assert_relative_eq!(*theta, *e, max_relative = 1e-10);
            assert_relative_eq!(dot(v, v), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn dominant_by_magnitude() {
        let diag = [0.1, -3.0, 0.5, 2.0, -0.2, 0.05, 1.0, 0.3];
        let mut apply = |xs: &mut [Vec<f64>]| {
            for x in xs.iter_mut() {
                x.iter_mut().zip(&diag).for_each(|(v, d)| *v *= d);
            }
        };
        let o = KrylovOptions { block: 2, max_basis: 8, ..opts() };
        let got: Vec<f64> = dominant_eigenpairs(8, &mut apply, 3, &[], o).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(got.len(), 3);
        for (g, e) in got.iter().zip([-3.0, 2.0, 1.0]) {
            assert_relative_eq!(*g, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn restart_keeps_converging() {
        // tridiagonal 1D Laplacian; dominant eigenvalues cluster at the top
        let dim = 200;
        let mut apply = |xs: &mut [Vec<f64>]| {
            for x in xs.iter_mut() {
                let y: Vec<f64> = (0..dim)
                    .map(|i| {
                        let l = if i > 0 { x[i - 1] } else { 0.0 };
                        let r = if i + 1 < dim { x[i + 1] } else { 0.0 };
                        2.0 * x[i] - l - r
                    })
                    .collect();
                *x = y;
            }
        };
        let o = KrylovOptions { block: 3, max_basis: 30, max_applications: 60000, tol: 1e-9 };
        let got = dominant_eigenpairs(dim, &mut apply, 3, &[], o).unwrap();
        for (k, (theta, _)) in got.iter().enumerate() {
            let j = (dim - k) as f64;
            let e = 2.0 - 2.0 * (j * std::f64::consts::PI / (dim as f64 + 1.0)).cos();
            assert_relative_eq!(*theta, e, max_relative = 1e-8);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let dim = 200;
        let mut apply = |xs: &mut [Vec<f64>]| {
            for x in xs.iter_mut() {
                x.iter_mut().enumerate().for_each(|(i, v)| *v *= 1.0 + 1e-9 * i as f64);
            }
        };
        let o = KrylovOptions { block: 2, max_basis: 10, max_applications: 20, tol: 1e-15 };
        assert!(matches!(dominant_eigenpairs(dim, &mut apply, 4, &[], o), Err(Error::NonConvergence(_))));
    }
}
