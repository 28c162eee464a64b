//! Exactly known spectra.
//!
//! The `l = 0` sector splits into two radial oscillators with frequencies
//! `√(1 ± b̃)` and centrifugal index 1, so its levels are
//! `(2N+2)√(1 ± b̃)`. At `b̃ = 0` every `|l| ≥ 1` sector reduces to two
//! uncoupled radial oscillators with levels `|l| + 2N` (upper component)
//! and `|l| + 2 + 2N` (lower component).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::check_btilde;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// `(2N+2)√(1-b̃)`, decreasing in `b̃`.
    Minus,
    /// `(2N+2)√(1+b̃)`, increasing in `b̃`.
    Plus,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactLevel {
    pub value: f64,
    pub n: u32,
    pub branch: Branch,
    pub degeneracy: u32,
}

/// `(2N+2)√(1 ∓ b̃)`.
pub fn l0_level_value(btilde: f64, n: u32, branch: Branch) -> f64 {
    let freq = match branch {
        Branch::Minus => (1.0 - btilde).sqrt(),
        Branch::Plus => (1.0 + btilde).sqrt(),
    };
    (2 * n + 2) as f64 * freq
}

/// Both branches for `N = 0..=n_max`, ascending.
pub fn exact_l0_levels(btilde: f64, n_max: u32) -> Result<Vec<ExactLevel>> {
    check_btilde(btilde)?;
    let mut out: Vec<ExactLevel> = (0..=n_max)
        .flat_map(|n| {
            [Branch::Minus, Branch::Plus].map(|branch| ExactLevel {
                value: l0_level_value(btilde, n, branch),
                n,
                branch,
                degeneracy: 1,
            })
        })
        .collect();
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// First `count` distinct levels of the uncoupled `|l|` sector as
/// `(value, degeneracy)`: the non-degenerate `|l|`, then `2N + |l|` twice.
pub fn h0_sector_levels(abs_l: u32, count: usize) -> Result<Vec<(f64, u32)>> {
    if abs_l == 0 {
        return Err(Error::invalid("abs_l must be positive; the l=0 sector is exact_l0_levels"));
    }
    Ok((0..count as u32).map(|n| ((2 * n + abs_l) as f64, if n == 0 { 1 } else { 2 })).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laguerre::{laguerre_eval, normalization};
    use crate::quadrature::GaussLaguerre;
    use approx::assert_relative_eq;

    #[test]
    fn l0_levels_at_zero_coupling() {
        let v: Vec<f64> = exact_l0_levels(0.0, 1).unwrap().iter().map(|l| l.value).collect();
        assert_eq!(v, vec![2.0, 2.0, 4.0, 4.0]);
    }

    #[test]
    fn l0_levels_half_coupling() {
        let v = exact_l0_levels(0.5, 0).unwrap();
        assert_relative_eq!(v[0].value, std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_eq!(v[0].branch, Branch::Minus);
        assert_relative_eq!(v[1].value, 2.4494897, epsilon = 1e-7);
        assert!(v.iter().all(|l| l.degeneracy == 1));
    }

    #[test]
    fn closed_form_coincidence_at_three_fifths() {
        // 2√(1+b) = 4√(1-b) exactly at b = 3/5
        let v = exact_l0_levels(0.6, 1).unwrap();
        let plus0 = v.iter().find(|l| l.n == 0 && l.branch == Branch::Plus).unwrap();
        let minus1 = v.iter().find(|l| l.n == 1 && l.branch == Branch::Minus).unwrap();
        assert_relative_eq!(plus0.value, 2.5298221, epsilon = 1e-7);
        assert_relative_eq!(plus0.value, minus1.value, max_relative = 1e-15);
    }

    #[test]
    fn branches_are_monotone() {
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        for n in 0..4 {
            for w in grid.windows(2) {
                assert!(l0_level_value(w[1], n, Branch::Minus) < l0_level_value(w[0], n, Branch::Minus));
                assert!(l0_level_value(w[1], n, Branch::Plus) > l0_level_value(w[0], n, Branch::Plus));
            }
        }
    }

    #[test]
    fn l0_rejects_bad_btilde() {
        assert!(exact_l0_levels(1.0, 2).is_err());
        assert!(exact_l0_levels(-0.1, 2).is_err());
    }

    #[test]
    fn sector_levels_at_zero_coupling() {
        assert_eq!(h0_sector_levels(1, 3).unwrap(), vec![(1.0, 1), (3.0, 2), (5.0, 2)]);
        assert_eq!(h0_sector_levels(2, 3).unwrap(), vec![(2.0, 1), (4.0, 2), (6.0, 2)]);
        assert_eq!(h0_sector_levels(8, 1).unwrap(), vec![(8.0, 1)]);
        assert!(h0_sector_levels(0, 3).is_err());
    }

    /// `norm² ∫ [r^m L_K^m(r²)]² e^{-r²} r dr = ½ norm² ∫ x^m L² e^{-x} dx`.
    fn gram(k1: u32, k2: u32, m: u32) -> f64 {
        let rule = GaussLaguerre::for_degree((m + k1 + k2) as usize).unwrap();
        let b = normalization(k1, m) * normalization(k2, m);
        0.5 * b * rule.integrate(|x| x.powi(m as i32) * laguerre_eval(k1, m, x) * laguerre_eval(k2, m, x))
    }

    #[test]
    fn normalization_by_quadrature() {
        // ∫ e^{-r²} r dr = 1/2 and ∫ r⁵ e^{-r²} dr = 1
        assert_relative_eq!(gram(0, 0, 0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gram(0, 0, 2), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gram(5, 5, 3), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn basis_is_orthonormal() {
        for m in 0..5 {
            for i in 0..12 {
                for j in 0..12 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((gram(i, j, m) - expect).abs() < 1e-10, "m={m} i={i} j={j}");
                }
            }
        }
    }
}
