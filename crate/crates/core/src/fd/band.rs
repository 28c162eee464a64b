//! Unpivoted banded `L D Lᵀ` factorization of a symmetric matrix.

use crate::error::{Error, Result};

/// Factor of `A − σI` for a symmetric matrix with half-bandwidth `bw`.
///
/// Row `i` of `L` is stored densely over columns `i−bw .. i` (entries left
/// of column 0 are zero padding), so every inner product in the
/// elimination runs over two contiguous slices.
#[derive(Debug, Clone)]
pub struct BandLdl {
    dim: usize,
    bw: usize,
    shift: f64,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl BandLdl {
    /// Bytes needed to factor a `dim × dim` matrix of half-bandwidth `bw`.
    pub fn storage_bytes(dim: usize, bw: usize) -> usize {
        dim.saturating_mul(bw + 1).saturating_mul(std::mem::size_of::<f64>())
    }

    /// `entry(i, j)` must return `A[i][j]` for `i − bw ≤ j ≤ i`.
    pub fn factor(dim: usize, bw: usize, shift: f64, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut lower = vec![0.0; dim * bw];
        let mut diag = vec![0.0; dim];
        let mut w = vec![0.0; bw];
        let scale = (0..dim).map(|i| (entry(i, i) - shift).abs()).fold(0.0, f64::max).max(1.0);
        for i in 0..dim {
            let first = i.saturating_sub(bw);
            // Row i in band coordinates: column j ↦ slot j + bw − i.
            let off = bw - (i - first);
            for j in first..i {
                let slot = j + bw - i;
                // Σ_k w[k] L[j][k] over k in first..j; row j's slot for
                // column k is k + bw − j.
                let row_j = &lower[j * bw..(j + 1) * bw];
                let lo_j = first + bw - j;
                let len = j - first;
                let dot = dot(&w[off..off + len], &row_j[lo_j..lo_j + len]);
                w[slot] = entry(i, j) - dot;
            }
            let row_i = &mut lower[i * bw..(i + 1) * bw];
            let mut d = entry(i, i) - shift;
            for slot in off..bw {
                let j = i + slot - bw;
                let l = w[slot] / diag[j];
                d -= w[slot] * l;
                row_i[slot] = l;
            }
            if d.abs() <= 1e-14 * scale || !d.is_finite() {
                return Err(Error::SingularShift { row: i, shift });
            }
            diag[i] = d;
        }
        Ok(Self { dim, bw, shift, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Number of eigenvalues of `A` below the shift (Sylvester's law of
    /// inertia).
    pub fn count_below(&self) -> usize {
        self.diag.iter().filter(|d| **d < 0.0).count()
    }

    /// Solves `(A − σI) X = B` in place for several right-hand sides,
    /// streaming the factor once.
    pub fn solve_block_in_place(&self, xs: &mut [Vec<f64>]) {
        let bw = self.bw;
        for i in 0..self.dim {
            let first = i.saturating_sub(bw);
            let row = &self.lower[i * bw..(i + 1) * bw];
            let off = bw - (i - first);
            for x in xs.iter_mut() {
                let dot = dot(&row[off..], &x[first..i]);
                x[i] -= dot;
            }
        }
        for x in xs.iter_mut() {
            for (xi, d) in x.iter_mut().zip(&self.diag) {
                *xi /= d;
            }
        }
        for i in (0..self.dim).rev() {
            let first = i.saturating_sub(bw);
            let row = &self.lower[i * bw..(i + 1) * bw];
            let off = bw - (i - first);
            for x in xs.iter_mut() {
                let xi = x[i];
                for (xj, l) in x[first..i].iter_mut().zip(&row[off..]) {
                    *xj -= l * xi;
                }
            }
        }
    }

    /// Solves `(A − σI) x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let bw = self.bw;
        for i in 0..self.dim {
            let first = i.saturating_sub(bw);
            let row = &self.lower[i * bw..(i + 1) * bw];
            let off = bw - (i - first);
            let dot = dot(&row[off..], &x[first..i]);
            x[i] -= dot;
        }
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for i in (0..self.dim).rev() {
            let first = i.saturating_sub(bw);
            let row = &self.lower[i * bw..(i + 1) * bw];
            let off = bw - (i - first);
            let xi = x[i];
            for (xj, l) in x[first..i].iter_mut().zip(&row[off..]) {
                *xj -= l * xi;
            }
        }
    }
}

/// Inner product with independent partial sums so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    fn banded(dim: usize, bw: usize) -> DMatrix<f64> {
        DMatrix::from_fn(dim, dim, |i, j| {
            let d = i.abs_diff(j);
            if d > bw {
                0.0
            } else if d == 0 {
                4.0 + (i % 3) as f64
            } else {
                ((i + j) % 5) as f64 * 0.3 - 0.6
            }
        })
    }

    #[test]
    fn solves_against_dense() {
        for (dim, bw) in [(1, 0), (7, 2), (30, 5), (25, 24)] {
            let a = banded(dim, bw);
            let f = BandLdl::factor(dim, bw, 0.0, |i, j| a[(i, j)]).unwrap();
            let b = DVector::from_fn(dim, |i, _| (i as f64 * 0.7).sin());
            let mut x = b.as_slice().to_vec();
            f.solve_in_place(&mut x);
            let mut block = vec![b.as_slice().to_vec(), b.map(|v| 2.0 * v - 1.0).as_slice().to_vec()];
            f.solve_block_in_place(&mut block);
            assert_eq!(block[0], x);
            let r = &a * DVector::from_vec(x) - &b;
            assert!(r.norm() < 1e-12, "dim={dim} bw={bw} residual {}", r.norm());
            let r2 = &a * DVector::from_vec(block[1].clone()) - b.map(|v| 2.0 * v - 1.0);
            assert!(r2.norm() < 1e-12);
        }
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        let a = banded(40, 3);
        let eig = a.clone().symmetric_eigenvalues();
        for shift in [-1.0, 2.5, 4.3, 5.1, 9.0] {
            let f = BandLdl::factor(40, 3, shift, |i, j| a[(i, j)]).unwrap();
            let expect = eig.iter().filter(|e| **e < shift).count();
            assert_eq!(f.count_below(), expect, "shift {shift}");
        }
    }

    #[test]
    fn shifted_solve() {
        let a = banded(20, 2);
        let f = BandLdl::factor(20, 2, 3.3, |i, j| a[(i, j)]).unwrap();
        let b = DVector::from_element(20, 1.0);
        let mut x = b.as_slice().to_vec();
        f.solve_in_place(&mut x);
        let shifted = &a - DMatrix::identity(20, 20) * 3.3;
        let r = shifted * DVector::from_vec(x) - b;
        assert_relative_eq!(r.norm(), 0.0, epsilon = 1e-11);
    }

    #[test]
    fn singular_shift_detected() {
        let a = DMatrix::<f64>::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert!(matches!(BandLdl::factor(3, 1, 2.0, |i, j| a[(i, j)]), Err(Error::SingularShift { row: 1, .. })));
    }
}
