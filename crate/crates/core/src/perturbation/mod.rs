//! Rayleigh–Schrödinger series of sector eigenvalues in powers of `b̃`.
//!
//! The recursion runs in the Laguerre basis where `H₀` is diagonal, so the
//! reduced resolvent is a division by `E₀ − E₀(mode)`. The symmetric
//! coupling matrix has irrational entries, but a diagonal similarity
//! transform makes every entry rational (entries only ever enter through
//! products around closed loops of the coupling graph), and eigenvalue
//! coefficients are similarity invariant. Non-degenerate coefficients are
//! therefore computed in exact rational arithmetic; degenerate branches
//! split as `±√d` at first order and live in `ℚ(√d)`, see [`Surd`].

mod surd;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::closed_form::Branch;
use crate::error::{Error, Result};
use crate::params::check_btilde;

use surd::int;
pub use surd::{ratio, Surd};

/// Largest supported order.
pub const MAX_ORDER: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SeriesBranch {
    /// The non-degenerate sector ground state.
    Single,
    /// Larger first-order coefficient of a degenerate pair.
    Up,
    /// Smaller first-order coefficient of a degenerate pair.
    Down,
    /// A level of one decoupled `l = 0` component.
    ZeroSector(Branch),
}

impl std::fmt::Display for SeriesBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeriesBranch::Single => f.write_str("single"),
            SeriesBranch::Up => f.write_str("up"),
            SeriesBranch::Down => f.write_str("down"),
            SeriesBranch::ZeroSector(b) => write!(f, "l0-{b}"),
        }
    }
}

/// Coefficients `E_k` of `E(b̃) = Σ_k E_k b̃^k`, `k = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbSeries {
    pub n: u32,
    pub abs_l: u32,
    pub branch: SeriesBranch,
    pub coeffs: Vec<Surd>,
    pub order: usize,
}

impl PerturbSeries {
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(Surd::to_f64).collect()
    }

    /// Same as [`series_eval`].
    pub fn eval(&self, btilde: f64, k: usize) -> Result<f64> {
        series_eval(self, btilde, k)
    }
}

/// Sparse operator `H₀ + b̃ V` with diagonal `H₀` and rational `V` (not
/// necessarily symmetric).
#[derive(Debug, Clone)]
struct ExactOperator {
    h0: Vec<BigRational>,
    rows: Vec<Vec<(usize, BigRational)>>,
}

impl ExactOperator {
    fn dim(&self) -> usize {
        self.h0.len()
    }

    fn get(&self, i: usize, j: usize) -> BigRational {
        self.rows[i].iter().find(|(c, _)| *c == j).map(|(_, v)| v.clone()).unwrap_or_else(BigRational::zero)
    }

    fn apply(&self, x: &[Surd]) -> Vec<Surd> {
        self.rows
            .iter()
            .map(|row| {
                let mut acc = Surd::zero();
                for (j, v) in row {
                    if !x[*j].is_zero() {
                        acc = &acc + &(&x[*j] * v);
                    }
                }
                acc
            })
            .collect()
    }

    /// The `|l| ≥ 1` sector with `size` modes per component. Upper mode
    /// `N` sits at index `N`, lower mode `K` at `size + K`.
    ///
    /// Symmetric coupling `T[N][K] = ½ c · u_N · w_K` with
    /// `c ∈ {1, -2, 1}` for `K = N, N-1, N-2`, `u_N² = N!/(N+m-1)!` and
    /// `w_K² = (K+m+1)!/K!`. Conjugating by `diag(u, 1/w)` leaves `½ c`
    /// above and `½ c · w_K² u_N²` below the diagonal.
    fn sector(abs_l: u32, size: usize) -> Self {
        let m = abs_l as u64;
        let dim = 2 * size;
        let mut h0 = Vec::with_capacity(dim);
        h0.extend((0..size as u64).map(|n| int(2 * n + m)));
        h0.extend((0..size as u64).map(|k| int(2 * k + m + 2)));
        let u2 = |n: u64| -> BigRational {
            let den: BigInt = (1..m).map(|j| BigInt::from(n + j)).product();
            BigRational::new(1.into(), den)
        };
        let w2 =
            |k: u64| -> BigRational { BigRational::from_integer((1..=m + 1).map(|j| BigInt::from(k + j)).product()) };
        let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); dim];
        for n in 0..size {
            for (offset, coef) in [(0usize, 1i64), (1, -2), (2, 1)] {
                if n < offset {
                    continue;
                }
                let k = n - offset;
                let c = ratio(coef, 2);
                rows[n].push((size + k, c.clone()));
                rows[size + k].push((n, c * w2(k as u64) * u2(n as u64)));
            }
        }
        Self { h0, rows }
    }

    /// One decoupled `l = 0` component, `(2N+2) ± (r²/2)` in the
    /// superscript-1 basis: tridiagonal with diagonal `N+1` and
    /// off-diagonal `-½√((N+1)(N+2))`, made rational the same way.
    fn l0_component(branch: Branch, size: usize) -> Self {
        let sign = match branch {
            Branch::Plus => 1i64,
            Branch::Minus => -1,
        };
        let h0 = (0..size as u64).map(|n| int(2 * n + 2)).collect();
        let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); size];
        for n in 0..size {
            rows[n].push((n, ratio(sign * (n as i64 + 1), 1)));
            if n + 1 < size {
                let prod = ((n + 1) * (n + 2)) as i64;
                rows[n].push((n + 1, ratio(-sign, 2)));
                rows[n + 1].push((n, ratio(-sign * prod, 2)));
            }
        }
        Self { h0, rows }
    }
}

/// Exact eigen-decomposition of the first-order matrix restricted to the
/// degenerate subspace.
struct FirstOrder {
    /// `(eigenvalue, right vector, left vector)` with `left · right = 1`.
    pairs: Vec<(Surd, [Surd; 2], [Surd; 2])>,
}

fn first_order_pair(m: [[BigRational; 2]; 2]) -> Option<FirstOrder> {
    let tr = &m[0][0] + &m[1][1];
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    let disc = &tr * &tr - det * int(4);
    if disc.is_zero() || disc.is_negative() {
        return None;
    }
    let root = Surd::sqrt_of(&disc)?;
    let half = ratio(1, 2);
    let s = |q: &BigRational| Surd::from_rational(q.clone());
    let mut pairs = Vec::new();
    for sign in [1i64, -1] {
        let lam = &(&s(&tr) + &(&root * &ratio(sign, 1))) * &half;
        let right = if !m[0][1].is_zero() {
            [s(&m[0][1]), &lam - &s(&m[0][0])]
        } else if !m[1][0].is_zero() {
            [&lam - &s(&m[1][1]), s(&m[1][0])]
        } else if lam == s(&m[0][0]) {
            [Surd::from_int(1), Surd::zero()]
        } else {
            [Surd::zero(), Surd::from_int(1)]
        };
        let left = if !m[1][0].is_zero() {
            [s(&m[1][0]), &lam - &s(&m[0][0])]
        } else if !m[0][1].is_zero() {
            [&lam - &s(&m[1][1]), s(&m[0][1])]
        } else if lam == s(&m[0][0]) {
            [Surd::from_int(1), Surd::zero()]
        } else {
            [Surd::zero(), Surd::from_int(1)]
        };
        let dot = &(&left[0] * &right[0]) + &(&left[1] * &right[1]);
        let left = [&left[0] / &dot, &left[1] / &dot];
        pairs.push((lam, right, left));
    }
    Some(FirstOrder { pairs })
}

/// Rayleigh–Schrödinger recursion for the level whose unperturbed
/// eigenvectors are the unit vectors at `subspace` (one index, or two for
/// a degenerate pair). Returns one coefficient list per branch.
///
/// In the degenerate case the order-`k` equation projected on the partner
/// branch `β` fixes the `β`-component `c_{k-1}` of the previous correction:
/// `(E₁α − E₁β) c_{k-1} = ⟨χ̃β, V Qψ_{k-1}⟩ − Σ_{j=2}^{k-1} E_j c_{k-j}`.
fn rs_recursion(op: &ExactOperator, subspace: &[usize], order: usize) -> std::result::Result<Vec<Vec<Surd>>, ()> {
    let dim = op.dim();
    let e0 = op.h0[subspace[0]].clone();
    let in_subspace = |i: usize| subspace.contains(&i);

    // (E₁, right, left) per branch, and the partner index.
    let branches: Vec<(Surd, Vec<Surd>, Vec<Surd>)> = if subspace.len() == 1 {
        let p = subspace[0];
        let mut unit = vec![Surd::zero(); dim];
        unit[p] = Surd::from_int(1);
        vec![(Surd::from_rational(op.get(p, p)), unit.clone(), unit)]
    } else {
        let (p, q) = (subspace[0], subspace[1]);
        let m = [[op.get(p, p), op.get(p, q)], [op.get(q, p), op.get(q, q)]];
        let fo = first_order_pair(m).ok_or(())?;
        fo.pairs
            .into_iter()
            .map(|(lam, right, left)| {
                let mut r = vec![Surd::zero(); dim];
                let mut l = vec![Surd::zero(); dim];
                r[p] = right[0].clone();
                r[q] = right[1].clone();
                l[p] = left[0].clone();
                l[q] = left[1].clone();
                (lam, r, l)
            })
            .collect()
    };

    let dot = |a: &[Surd], b: &[Surd]| -> Surd {
        let mut acc = Surd::zero();
        for (x, y) in a.iter().zip(b) {
            if !x.is_zero() && !y.is_zero() {
                acc = &acc + &(x * y);
            }
        }
        acc
    };
    let denom: Vec<Option<BigRational>> = (0..dim).map(|i| (!in_subspace(i)).then(|| &op.h0[i] - &e0)).collect();
    if denom.iter().flatten().any(Zero::is_zero) {
        return Err(());
    }

    let mut out = Vec::with_capacity(branches.len());
    for (a, (lam_a, chi_a, left_a)) in branches.iter().enumerate() {
        let partner = (branches.len() == 2).then(|| &branches[1 - a]);
        let mut e: Vec<Surd> = vec![Surd::from_rational(e0.clone())];
        // Q-projected corrections and partner components; index 0 is ψ₀.
        let mut qpsi: Vec<Vec<Surd>> = vec![vec![Surd::zero(); dim]];
        let mut c: Vec<Surd> = vec![Surd::zero()];
        let mut psi_prev: Vec<Surd> = chi_a.clone();
        for k in 1..=order {
            if k >= 2 {
                let km1 = k - 1;
                let mut full = qpsi[km1].clone();
                if let Some((lam_b, chi_b, left_b)) = partner {
                    let vq = op.apply(&qpsi[km1]);
                    let mut num = dot(left_b, &vq);
                    for j in 2..k {
                        num = &num - &(&e[j] * &c[k - j]);
                    }
                    let ck = &num / &(lam_a - lam_b);
                    for (f, x) in full.iter_mut().zip(chi_b) {
                        if !x.is_zero() {
                            *f = &*f + &(&ck * x);
                        }
                    }
                    c.push(ck);
                } else {
                    c.push(Surd::zero());
                }
                psi_prev = full;
            }
            let v_psi = op.apply(&psi_prev);
            let ek = if k == 1 { lam_a.clone() } else { dot(left_a, &v_psi) };
            e.push(ek);
            if k == order {
                break;
            }
            let mut next = vec![Surd::zero(); dim];
            for i in 0..dim {
                let Some(d) = &denom[i] else { continue };
                let mut rhs = -&v_psi[i];
                for j in 1..k {
                    let q = &qpsi[k - j][i];
                    if !q.is_zero() {
                        rhs = &rhs + &(&e[j] * q);
                    }
                }
                if !rhs.is_zero() {
                    next[i] = &rhs * &d.recip();
                }
            }
            qpsi.push(next);
        }
        out.push(e);
    }
    Ok(out)
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::BudgetExceeded(format!("order {order} exceeds the supported maximum {MAX_ORDER}")));
    }
    Ok(())
}

/// Modes per component that keep every coefficient up to `order`
/// independent of the truncation: each application of the coupling moves
/// at most two modes up.
fn default_modes(n: u32, order: usize) -> usize {
    n as usize + 2 * order + 6
}

pub fn series_nondegenerate(abs_l: u32, order: usize) -> Result<PerturbSeries> {
    series_nondegenerate_with_modes(abs_l, order, default_modes(0, order))
}

/// As [`series_nondegenerate`] with an explicit basis truncation.
pub fn series_nondegenerate_with_modes(abs_l: u32, order: usize, modes: usize) -> Result<PerturbSeries> {
    if abs_l == 0 {
        return Err(Error::invalid("abs_l must be positive"));
    }
    check_order(order)?;
    let op = ExactOperator::sector(abs_l, modes.max(1));
    let mut coeffs =
        rs_recursion(&op, &[0], order).map_err(|_| Error::invalid("unperturbed ground level is degenerate"))?;
    let mut coeffs = coeffs.remove(0);
    coeffs.truncate(order + 1);
    Ok(PerturbSeries { n: 0, abs_l, branch: SeriesBranch::Single, coeffs, order })
}

pub fn series_degenerate(n: u32, abs_l: u32, order: usize) -> Result<(PerturbSeries, PerturbSeries)> {
    series_degenerate_with_modes(n, abs_l, order, default_modes(n, order))
}

/// Up and Down branches of the level `2N + |l|`, degenerate between upper
/// mode `N` and lower mode `N-1`.
pub fn series_degenerate_with_modes(
    n: u32,
    abs_l: u32,
    order: usize,
    modes: usize,
) -> Result<(PerturbSeries, PerturbSeries)> {
    if n == 0 {
        return Err(Error::invalid("N = 0 is the non-degenerate ground level"));
    }
    if abs_l == 0 {
        return Err(Error::invalid("abs_l must be positive"));
    }
    check_order(order)?;
    let modes = modes.max(n as usize + 1);
    let op = ExactOperator::sector(abs_l, modes);
    let subspace = [n as usize, modes + n as usize - 1];
    let mut branches =
        rs_recursion(&op, &subspace, order.max(1)).map_err(|_| Error::NoFirstOrderSplitting { n, abs_l })?;
    for b in branches.iter_mut() {
        b.truncate(order + 1);
    }
    let (first, second) = (branches.remove(0), branches.remove(0));
    let (up, down) = if first.get(1).map_or(0.0, Surd::to_f64) >= second.get(1).map_or(0.0, Surd::to_f64) {
        (first, second)
    } else {
        (second, first)
    };
    let mk = |coeffs, branch| PerturbSeries { n, abs_l, branch, coeffs, order };
    Ok((mk(up, SeriesBranch::Up), mk(down, SeriesBranch::Down)))
}

/// Series of the exactly solvable `(2N+2)√(1 ± b̃)` levels, computed by the
/// same recursion on one decoupled `l = 0` component.
pub fn series_l0(n: u32, branch: Branch, order: usize) -> Result<PerturbSeries> {
    check_order(order)?;
    let op = ExactOperator::l0_component(branch, default_modes(n, order));
    let mut coeffs = rs_recursion(&op, &[n as usize], order)
        .map_err(|_| Error::invalid("l=0 levels are non-degenerate within a component"))?;
    Ok(PerturbSeries { n, abs_l: 0, branch: SeriesBranch::ZeroSector(branch), coeffs: coeffs.remove(0), order })
}

/// Horner evaluation of the series truncated after `b̃^k`.
pub fn series_eval(s: &PerturbSeries, btilde: f64, k: usize) -> Result<f64> {
    check_btilde(btilde)?;
    if k > s.order {
        return Err(Error::invalid(format!("truncation {k} exceeds series order {}", s.order)));
    }
    Ok(s.coeffs[..=k].iter().rev().fold(0.0, |acc, c| acc * btilde + c.to_f64()))
}

/// Ratio-test estimate of the radius of convergence: the median over the
/// top third of orders of `|E_i/E_j|^{1/(j-i)}` for consecutive nonzero
/// coefficients `i < j`.
pub fn radius_estimate(s: &PerturbSeries) -> Result<f64> {
    radius_from_coeffs(&s.coeffs_f64())
}

pub fn radius_from_coeffs(coeffs: &[f64]) -> Result<f64> {
    let order = coeffs.len().saturating_sub(1);
    if order < 10 {
        return Err(Error::invalid(format!("radius estimate needs order >= 10, got {order}")));
    }
    let start = order - order / 3;
    let nonzero: Vec<(usize, f64)> =
        coeffs.iter().enumerate().skip(start).filter(|(_, c)| **c != 0.0).map(|(i, c)| (i, *c)).collect();
    let mut ratios: Vec<f64> =
        nonzero.windows(2).map(|w| (w[0].1 / w[1].1).abs().powf(1.0 / (w[1].0 - w[0].0) as f64)).collect();
    if ratios.is_empty() {
        return Err(Error::invalid("too few nonzero coefficients for a ratio test"));
    }
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    Ok(if ratios.len() % 2 == 1 { ratios[mid] } else { 0.5 * (ratios[mid - 1] + ratios[mid]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rational(v: &Surd) -> BigRational {
        assert!(v.is_rational());
        v.rational.clone()
    }

    /// `c·√(1+s·b)` Taylor coefficients `c·binom(1/2, k)·s^k`.
    fn sqrt_taylor(c: i64, s: i64, order: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::from_integer(c.into())];
        let mut binom = BigRational::from_integer(1.into());
        for k in 1..=order {
            binom = binom * (ratio(1, 2) - ratio(k as i64 - 1, 1)) / ratio(k as i64, 1);
            out.push(&binom * ratio(c * s.pow(k as u32), 1));
        }
        out
    }

    #[test]
    fn l0_series_equal_binomial_expansion() {
        for n in 0..3u32 {
            for (branch, sign) in [(Branch::Plus, 1), (Branch::Minus, -1)] {
                let s = series_l0(n, branch, 12).unwrap();
                let expect = sqrt_taylor(2 * n as i64 + 2, sign, 12);
                let got: Vec<BigRational> = s.coeffs.iter().map(rational).collect();
                assert_eq!(got, expect, "N={n} {branch}");
            }
        }
    }

    #[test]
    fn ground_series_leading_terms() {
        for abs_l in 1..=8 {
            let s = series_nondegenerate(abs_l, 6).unwrap();
            assert_eq!(s.coeffs[0], Surd::from_int(abs_l as i64));
            assert!(s.coeffs[1].is_zero());
            assert!(s.coeffs.iter().all(Surd::is_rational));
        }
        let s = series_nondegenerate(1, 0).unwrap();
        assert_eq!(s.coeffs, vec![Surd::from_int(1)]);
    }

    #[test]
    fn ground_series_is_even() {
        let s = series_nondegenerate(2, 15).unwrap();
        for k in (1..=15).step_by(2) {
            assert!(s.coeffs[k].is_zero(), "odd coefficient {k} = {}", s.coeffs[k]);
        }
    }

    #[test]
    fn second_order_by_hand() {
        // |l| = 1: E₂ = -Σ_K T[0][K]²/(E(K) - 1) with only K = 0 coupled,
        // T[0][0]² = 1/2, E(K=0) = 3, so E₂ = -1/4.
        let s = series_nondegenerate(1, 2).unwrap();
        assert_eq!(rational(&s.coeffs[2]), ratio(-1, 4));
    }

    #[test]
    fn truncation_independent() {
        let a = series_nondegenerate_with_modes(3, 16, default_modes(0, 16)).unwrap();
        let b = series_nondegenerate_with_modes(3, 16, default_modes(0, 16) * 3 / 2).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
        let (au, ad) = series_degenerate_with_modes(2, 1, 10, default_modes(2, 10)).unwrap();
        let (bu, bd) = series_degenerate_with_modes(2, 1, 10, default_modes(2, 10) * 3 / 2).unwrap();
        assert_eq!(au.coeffs, bu.coeffs);
        assert_eq!(ad.coeffs, bd.coeffs);
    }

    #[test]
    fn degenerate_first_order_splitting() {
        for n in 1..=3u32 {
            for abs_l in 1..=3u32 {
                let (up, down) = series_degenerate(n, abs_l, 1).unwrap();
                let e0 = Surd::from_int((2 * n + abs_l) as i64);
                assert_eq!(up.coeffs[0], e0);
                assert_eq!(down.coeffs[0], e0);
                // ±√(N(N+|l|)), traceless
                let split = ((n * (n + abs_l)) as f64).sqrt();
                assert_relative_eq!(up.coeffs[1].to_f64(), split, max_relative = 1e-15);
                assert_relative_eq!(down.coeffs[1].to_f64(), -split, max_relative = 1e-15);
                assert!((&up.coeffs[1] + &down.coeffs[1]).is_zero());
            }
        }
    }

    #[test]
    fn degenerate_branches_mirror() {
        // b̃ → -b̃ is a similarity of the sector operator, swapping branches.
        let (up, down) = series_degenerate(1, 2, 8).unwrap();
        for k in 0..=8 {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            assert_eq!(up.coeffs[k], &down.coeffs[k] * &ratio(sign, 1), "k={k}");
        }
    }

    #[test]
    fn degenerate_matches_high_precision_fit() {
        // Coefficients of the upper branch at N=1, |l|=2, from a polynomial
        // fit to 80-digit eigenvalues of the truncated sector matrix.
        let fit = [4.0, 1.7320508075688772, -0.5, 0.07216878364870322, -0.40625, -0.5066850018669372, -1.45703125];
        let (up, _) = series_degenerate(1, 2, 6).unwrap();
        for (c, f) in up.coeffs_f64().iter().zip(fit) {
            assert_relative_eq!(*c, f, max_relative = 1e-15);
        }
    }

    #[test]
    fn evaluation() {
        let s = series_nondegenerate(1, 4).unwrap();
        assert_eq!(series_eval(&s, 0.0, 4).unwrap(), 1.0);
        assert_relative_eq!(series_eval(&s, 0.1, 2).unwrap(), 1.0 - 0.25 * 0.01, max_relative = 1e-15);
        assert!(series_eval(&s, 0.1, 5).is_err());
        assert!(series_eval(&s, 1.0, 2).is_err());
    }

    #[test]
    fn radius_of_geometric_series() {
        let rho: f64 = 0.7;
        let coeffs: Vec<f64> = (0..=20).map(|k| rho.powi(-k)).collect();
        assert_relative_eq!(radius_from_coeffs(&coeffs).unwrap(), rho, max_relative = 1e-12);
        // zeros are skipped
        let even: Vec<f64> = (0..=20).map(|k| if k % 2 == 0 { rho.powi(-k) } else { 0.0 }).collect();
        assert_relative_eq!(radius_from_coeffs(&even).unwrap(), rho, max_relative = 1e-12);
        assert!(radius_from_coeffs(&coeffs[..5]).is_err());
        assert!(radius_from_coeffs(&[1.0; 12].map(|_| 0.0)).is_err());
    }

    #[test]
    fn order_budget() {
        assert!(matches!(series_nondegenerate(1, MAX_ORDER + 1), Err(Error::BudgetExceeded(_))));
        assert!(series_degenerate(0, 1, 4).is_err());
    }
}
