//! Gauss–Laguerre quadrature `∫₀^∞ f(x) e^{-x} dx ≈ Σ wᵢ f(xᵢ)`.
//!
//! Nodes come from the Jacobi matrix (Golub–Welsch) and are polished by
//! Newton steps on `L_n`; weights use the Christoffel form
//! `wᵢ = 1 / Σ_{k<n} L_k(xᵢ)²`, which keeps relative accuracy on the tiny
//! weights of the outer nodes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::laguerre::laguerre_table;

/// Largest rule before `L_k(x)²` overflows at the outermost node.
pub const MAX_NODES: usize = 128;

#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    /// `n`-point rule, exact for polynomials of degree ≤ `2n - 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("quadrature needs at least one node"));
        }
        if n > MAX_NODES {
            return Err(Error::BudgetExceeded(format!(
                "Gauss-Laguerre rule with {n} nodes exceeds the {MAX_NODES}-node stability budget"
            )));
        }
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                (2 * i + 1) as f64
            } else if i.abs_diff(j) == 1 {
                -(i.max(j) as f64)
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
        nodes.sort_by(f64::total_cmp);

        let mut weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let t = laguerre_table(n + 1, 0, *x);
                // x L_n'(x) = n (L_n - L_{n-1})
                let deriv = n as f64 * (t[n] - t[n - 1]) / *x;
                let step = t[n] / deriv;
                *x -= step;
                if step.abs() <= 1e-15 * x.abs() {
                    break;
                }
            }
            let t = laguerre_table(n, 0, *x);
            weights.push(1.0 / t.iter().map(|v| v * v).sum::<f64>());
        }
        Ok(Self { nodes, weights })
    }

    /// Rule exact for a polynomial integrand of the given degree.
    pub fn for_degree(degree: usize) -> Result<Self> {
        Self::new(degree / 2 + 2)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
