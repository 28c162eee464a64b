//! Associated Laguerre polynomials and the normalized radial basis
//! `B_{K,m} r^m L_K^m(r²) e^{-r²/2}` (measure `r dr` on `(0, ∞)`).

/// `L_K^m(x)` by the three-term recurrence in `K`.
pub fn laguerre_eval(k: u32, m: u32, x: f64) -> f64 {
    let alpha = m as f64;
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + alpha - x) * cur - (j + alpha) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `L_0^m(x), …, L_{count-1}^m(x)`.
pub fn laguerre_table(count: usize, m: u32, x: f64) -> Vec<f64> {
    let alpha = m as f64;
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for j in 1..count - 1 {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * out[j] - (jf + alpha) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// `ln(K!/(K+m)!)` as a sum of `m` logarithms.
fn ln_factorial_ratio(k: u32, m: u32) -> f64 {
    -(1..=m).map(|j| ((k + j) as f64).ln()).sum::<f64>()
}

/// Normalization `B_{K,m} = √(2·K!/(K+m)!)`.
pub fn normalization(k: u32, m: u32) -> f64 {
    (0.5 * (std::f64::consts::LN_2 + ln_factorial_ratio(k, m))).exp()
}

/// One normalized radial basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreMode {
    pub k: u32,
    pub m: u32,
    pub norm: f64,
}

impl LaguerreMode {
    pub fn new(k: u32, m: u32) -> Self {
        Self { k, m, norm: normalization(k, m) }
    }

    /// Value at radius `r`.
    pub fn eval(&self, r: f64) -> f64 {
        let x = r * r;
        self.norm * r.powi(self.m as i32) * laguerre_eval(self.k, self.m, x) * (-0.5 * x).exp()
    }

    /// Radial derivative at `r`, using `d/dx L_K^m = -L_{K-1}^{m+1}`.
    pub fn derivative(&self, r: f64) -> f64 {
        let x = r * r;
        let l = laguerre_eval(self.k, self.m, x);
        let dl = if self.k == 0 { 0.0 } else { -laguerre_eval(self.k - 1, self.m + 1, x) };
        let gauss = (-0.5 * x).exp();
        // d/dr [r^m L(r²) e^{-r²/2}] = r^{m-1} [m L + 2x L' - x L] e^{-x/2}
        if self.m == 0 {
            // the bracket carries a factor x = r²
            self.norm * r * (2.0 * dl - l) * gauss
        } else {
            let m = self.m as f64;
            self.norm * r.powi(self.m as i32 - 1) * (m * l + 2.0 * x * dl - x * l) * gauss
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    /// Series definition `L_K^m(x) = Σ_j (-1)^j binom(K+m, K-j) x^j / j!`.
    fn laguerre_series(k: u32, m: u32, x: f64) -> f64 {
        (0..=k as u64)
            .map(|j| {
                let fact: f64 = (1..=j).map(|i| i as f64).product();
                (-1f64).powi(j as i32) * binom((k + m) as u64, k as u64 - j) * x.powi(j as i32) / fact
            })
            .sum()
    }

    #[test]
    fn spot_values() {
        assert_eq!(laguerre_eval(0, 3, 7.2), 1.0);
        assert_relative_eq!(laguerre_eval(1, 0, 2.0), -1.0);
        assert_relative_eq!(laguerre_eval(2, 1, 0.0), 3.0);
    }

    #[test]
    fn recurrence_matches_series() {
        for k in 0..12 {
            for m in 0..5 {
                for &x in &[0.0, 0.3, 1.7, 4.0, 9.5] {
                    let a = laguerre_eval(k, m, x);
                    let b = laguerre_series(k, m, x);
                    assert_relative_eq!(a, b, epsilon = 1e-9, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn table_matches_single_evaluations() {
        let t = laguerre_table(9, 2, 3.3);
        for (k, v) in t.iter().enumerate() {
            assert_relative_eq!(*v, laguerre_eval(k as u32, 2, 3.3), max_relative = 1e-14);
        }
    }

    #[test]
    fn normalization_values() {
        assert_relative_eq!(normalization(0, 0), 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(normalization(0, 2), 1.0, max_relative = 1e-15);
        // K=3, m=1: √(2·3!/4!) = √(1/2)
        assert_relative_eq!(normalization(3, 1), 0.5f64.sqrt(), max_relative = 1e-14);
        // no overflow for large indices
        assert!(normalization(4000, 8).is_finite());
        assert!(normalization(4000, 8) > 0.0);
    }

    #[test]
    fn derivative_matches_central_difference() {
        for &(k, m) in &[(0u32, 0u32), (3, 0), (2, 1), (5, 3)] {
            let mode = LaguerreMode::new(k, m);
            for &r in &[0.2, 0.9, 1.6, 2.5] {
                let h = 1e-5;
                let fd = (mode.eval(r + h) - mode.eval(r - h)) / (2.0 * h);
                assert_relative_eq!(mode.derivative(r), fd, epsilon = 1e-8);
            }
        }
    }
}
