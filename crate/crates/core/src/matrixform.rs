//! Classification of the traceless 2×2 electronic matrix forms.
//!
//! Matching the `y⁴, x²y², xy³, x³y` coefficients of the eigenvalue
//! condition gives four polynomial equations in `(b₁₁, b₁₂, c₁₁, c₁₂)`:
//!
//! ```text
//! 1 = b₁₁² + b₁₂²
//! 2 = 2 b₁₁ + c₁₁² + c₁₂²
//! 0 = 2 (b₁₁ c₁₁ + b₁₂ c₁₂)
//! 0 = 2 c₁₁
//! ```
//!
//! The system is solved by exact case analysis over the rationals.

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixFormSolution {
    pub b11: Rational64,
    pub b12: Rational64,
    pub c11: Rational64,
    pub c12: Rational64,
}

impl MatrixFormSolution {
    pub fn new(b11: Rational64, b12: Rational64, c11: Rational64, c12: Rational64) -> Self {
        Self { b11, b12, c11, c12 }
    }

    pub fn from_ints(b11: i64, b12: i64, c11: i64, c12: i64) -> Self {
        Self::new(b11.into(), b12.into(), c11.into(), c12.into())
    }

    /// Residuals `lhs - rhs` of the four equations, in the order listed in
    /// the module docs.
    pub fn residuals(&self) -> [Rational64; 4] {
        let two = Rational64::from_integer(2);
        [
            self.b11 * self.b11 + self.b12 * self.b12 - Rational64::one(),
            two * self.b11 + self.c11 * self.c11 + self.c12 * self.c12 - two,
            two * (self.b11 * self.c11 + self.b12 * self.c12),
            two * self.c11,
        ]
    }

    pub fn is_exact_solution(&self) -> bool {
        self.residuals().iter().all(Zero::is_zero)
    }

    /// The diagonal solution `(1, 0, 0, 0)` leaves the basis vectors as
    /// eigenvectors of the electronic matrix; the other two give the
    /// `x² − y², ±2xy` form.
    pub fn is_diagonal(&self) -> bool {
        self.b12.is_zero() && self.c11.is_zero() && self.c12.is_zero()
    }
}

impl Serialize for MatrixFormSolution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("MatrixFormSolution", 4)?;
        s.serialize_field("b11", &self.b11.to_string())?;
        s.serialize_field("b12", &self.b12.to_string())?;
        s.serialize_field("c11", &self.c11.to_string())?;
        s.serialize_field("c12", &self.c12.to_string())?;
        s.end()
    }
}

/// Exact square roots of a non-negative rational, `None` if irrational.
fn rational_sqrt(q: Rational64) -> Option<Vec<Rational64>> {
    if q.is_negative() {
        return Some(Vec::new());
    }
    if q.is_zero() {
        return Some(vec![Rational64::zero()]);
    }
    let n = isqrt(*q.numer())?;
    let d = isqrt(*q.denom())?;
    let r = Rational64::new(n, d);
    Some(vec![-r, r])
}

fn isqrt(v: i64) -> Option<i64> {
    let r = (v as f64).sqrt().round() as i64;
    (r - 1..=r + 1).find(|c| *c >= 0 && c * c == v)
}

/// All solutions of the four matrix-form equations, sorted.
pub fn matrixform_solutions() -> Vec<MatrixFormSolution> {
    let zero = Rational64::zero();
    let one = Rational64::one();
    let two = Rational64::from_integer(2);
    let mut out = Vec::new();

    // x³y: c₁₁ = 0. Then xy³ reads b₁₂ c₁₂ = 0.
    let c11 = zero;

    // Branch b₁₂ = 0: y⁴ gives b₁₁ = ±1, x²y² fixes c₁₂² = 2 − 2 b₁₁.
    let b12 = zero;
    for b11 in rational_sqrt(one - b12 * b12).expect("1 is a perfect square") {
        if let Some(roots) = rational_sqrt(two - two * b11 - c11 * c11) {
            for c12 in roots {
                out.push(MatrixFormSolution::new(b11, b12, c11, c12));
            }
        }
    }

    // Branch b₁₂ ≠ 0 forces c₁₂ = 0, so x²y² gives b₁₁ = 1 and then
    // y⁴ gives b₁₂ = 0: a contradiction, no solutions.
    let c12 = zero;
    let b11 = (two - c11 * c11 - c12 * c12) / two;
    if let Some(roots) = rational_sqrt(one - b11 * b11) {
        out.extend(roots.into_iter().filter(|b| !b.is_zero()).map(|b12| MatrixFormSolution::new(b11, b12, c11, c12)));
    }

    out.retain(MatrixFormSolution::is_exact_solution);
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_solutions() {
        let sols = matrixform_solutions();
        let mut expected = vec![
            MatrixFormSolution::from_ints(-1, 0, 0, 2),
            MatrixFormSolution::from_ints(-1, 0, 0, -2),
            MatrixFormSolution::from_ints(1, 0, 0, 0),
        ];
        expected.sort();
        assert_eq!(sols, expected);
    }

    #[test]
    fn residuals_vanish() {
        let s = MatrixFormSolution::from_ints(-1, 0, 0, 2);
        assert_eq!(s.residuals(), [Rational64::zero(); 4]);
        assert!(!MatrixFormSolution::from_ints(1, 0, 0, 2).is_exact_solution());
    }

    #[test]
    fn closed_under_c12_reflection() {
        let sols = matrixform_solutions();
        for s in &sols {
            let mirrored = MatrixFormSolution::new(s.b11, s.b12, s.c11, -s.c12);
            assert!(sols.contains(&mirrored));
        }
        assert_eq!(sols.iter().filter(|s| s.is_diagonal()).count(), 1);
    }

    #[test]
    fn brute_force_grid_finds_nothing_else() {
        let steps: Vec<Rational64> = (-8..=8).map(|i| Rational64::new(i, 4)).collect();
        let mut found = Vec::new();
        for &b11 in &steps {
            for &b12 in &steps {
                for &c11 in &steps {
                    for &c12 in &steps {
                        let s = MatrixFormSolution::new(b11, b12, c11, c12);
                        if s.is_exact_solution() {
                            found.push(s);
                        }
                    }
                }
            }
        }
        found.sort();
        assert_eq!(found, matrixform_solutions());
    }
}
