//! Exact numbers `p + q√d` with rational `p, q` and a square-free radicand.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone)]
pub struct Surd {
    pub rational: BigRational,
    pub irrational: BigRational,
    /// Square-free radicand; meaningless when `irrational` is zero.
    pub radicand: u64,
}

impl PartialEq for Surd {
    fn eq(&self, other: &Self) -> bool {
        self.rational == other.rational
            && self.irrational == other.irrational
            && (self.irrational.is_zero() || self.radicand == other.radicand)
    }
}

impl Eq for Surd {}

impl Surd {
    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self { rational: q, irrational: BigRational::zero(), radicand: 1 }
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational(BigRational::from_integer(v.into()))
    }

    /// `√q` for a non-negative rational, exact: `√(p/s) = √(p·s)/s`.
    pub fn sqrt_of(q: &BigRational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        if q.is_zero() {
            return Some(Self::zero());
        }
        let prod = (q.numer() * q.denom()).to_u128()?;
        let (square, free) = split_square(prod);
        let coef = BigRational::new(BigInt::from(square), q.denom().clone());
        if free == 1 {
            Some(Self::from_rational(coef))
        } else {
            Some(Self { rational: BigRational::zero(), irrational: coef, radicand: u64::try_from(free).ok()? })
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero()
    }

    fn radicand_with(&self, other: &Self) -> u64 {
        match (self.irrational.is_zero(), other.irrational.is_zero()) {
            (true, _) => other.radicand,
            (false, true) => self.radicand,
            (false, false) => {
                assert_eq!(self.radicand, other.radicand, "mixing surds over different radicands");
                self.radicand
            }
        }
    }

    fn d(&self, radicand: u64) -> BigRational {
        BigRational::from_integer(BigInt::from(radicand))
    }

    pub fn conjugate(&self) -> Self {
        Self { rational: self.rational.clone(), irrational: -self.irrational.clone(), radicand: self.radicand }
    }

    pub fn to_f64(&self) -> f64 {
        let p = ratio_to_f64(&self.rational);
        if self.irrational.is_zero() {
            p
        } else {
            p + ratio_to_f64(&self.irrational) * (self.radicand as f64).sqrt()
        }
    }
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // scale both parts down to stay inside f64 range
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Writes `n = s² · f` with `f` square-free.
fn split_square(mut n: u128) -> (u128, u128) {
    let mut square = 1u128;
    let mut free = 1u128;
    let mut p = 2u128;
    while p * p <= n {
        let mut count = 0;
        while n.is_multiple_of(p) {
            n /= p;
            count += 1;
        }
        square *= p.pow(count / 2);
        if count % 2 == 1 {
            free *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (square, free * n)
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.irrational.is_zero() {
            return write!(f, "{}", self.rational);
        }
        let term = |c: &BigRational| {
            if c.is_one() {
                format!("sqrt({})", self.radicand)
            } else {
                format!("{c}*sqrt({})", self.radicand)
            }
        };
        if self.rational.is_zero() {
            let sign = if self.irrational.is_negative() { "-" } else { "" };
            write!(f, "{sign}{}", term(&self.irrational.abs()))
        } else {
            let sign = if self.irrational.is_negative() { '-' } else { '+' };
            write!(f, "{} {} {}", self.rational, sign, term(&self.irrational.abs()))
        }
    }
}

impl<'a> Add<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        Surd {
            radicand: self.radicand_with(rhs),
            rational: &self.rational + &rhs.rational,
            irrational: &self.irrational + &rhs.irrational,
        }
    }
}

impl<'a> Sub<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        Surd {
            radicand: self.radicand_with(rhs),
            rational: &self.rational - &rhs.rational,
            irrational: &self.irrational - &rhs.irrational,
        }
    }
}

impl<'a> Mul<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let radicand = self.radicand_with(rhs);
        if self.irrational.is_zero() && rhs.irrational.is_zero() {
            return Surd { rational: &self.rational * &rhs.rational, irrational: BigRational::zero(), radicand };
        }
        let d = self.d(radicand);
        Surd {
            rational: &self.rational * &rhs.rational + &self.irrational * &rhs.irrational * d,
            irrational: &self.rational * &rhs.irrational + &self.irrational * &rhs.rational,
            radicand,
        }
    }
}

impl<'a> Mul<&'a BigRational> for &'a Surd {
    type Output = Surd;
    fn mul(self, rhs: &BigRational) -> Surd {
        Surd {
            rational: &self.rational * rhs,
            irrational: if self.irrational.is_zero() { BigRational::zero() } else { &self.irrational * rhs },
            radicand: self.radicand,
        }
    }
}

impl<'a> Div<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn div(self, rhs: &Surd) -> Surd {
        assert!(!rhs.is_zero(), "division by zero surd");
        if rhs.irrational.is_zero() {
            let inv = rhs.rational.recip();
            return self * &inv;
        }
        let radicand = self.radicand_with(rhs);
        // (a + b√d)/(c + e√d) = (a + b√d)(c - e√d) / (c² - e² d)
        let norm = &rhs.rational * &rhs.rational - &rhs.irrational * &rhs.irrational * self.d(radicand);
        let num = self * &rhs.conjugate();
        &num * &norm.recip()
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { rational: -self.rational.clone(), irrational: -self.irrational.clone(), radicand: self.radicand }
    }
}

impl From<BigRational> for Surd {
    fn from(q: BigRational) -> Self {
        Self::from_rational(q)
    }
}

/// Rational `n/d` shorthand.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub(crate) fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_extracts_squares() {
        let s = Surd::sqrt_of(&ratio(8, 1)).unwrap();
        assert_eq!(s.irrational, ratio(2, 1));
        assert_eq!(s.radicand, 2);
        let s = Surd::sqrt_of(&ratio(9, 4)).unwrap();
        assert!(s.is_rational());
        assert_eq!(s.rational, ratio(3, 2));
        let s = Surd::sqrt_of(&ratio(1, 2)).unwrap();
        assert_eq!(s.to_f64(), 0.5f64.sqrt());
        assert!(Surd::sqrt_of(&ratio(-1, 2)).is_none());
    }

    #[test]
    fn field_arithmetic() {
        let r2 = Surd::sqrt_of(&ratio(2, 1)).unwrap();
        let sq = &r2 * &r2;
        assert_eq!(sq, Surd::from_int(2));
        let x = &Surd::from_int(3) + &r2; // 3 + √2
        let y = &Surd::from_int(1) - &r2; // 1 - √2
        let q = &x / &y;
        let back = &q * &y;
        assert_eq!(back, x);
        assert!((q.to_f64() - (3.0 + 2f64.sqrt()) / (1.0 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Surd::from_rational(ratio(-3, 4)).to_string(), "-3/4");
        let r = Surd::sqrt_of(&ratio(12, 1)).unwrap();
        assert_eq!(r.to_string(), "2*sqrt(3)");
        let s = &Surd::from_int(1) - &r;
        assert_eq!(s.to_string(), "1 - 2*sqrt(3)");
        let t = Surd::sqrt_of(&ratio(2, 1)).unwrap();
        assert_eq!(t.to_string(), "sqrt(2)");
        assert_eq!((&Surd::zero() - &t).to_string(), "-sqrt(2)");
        assert_eq!((&Surd::from_int(1) + &t).to_string(), "1 + sqrt(2)");
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigRational::new(BigInt::from(10).pow(400) * 3, BigInt::from(10).pow(400));
        assert!((ratio_to_f64(&big) - 3.0).abs() < 1e-15);
    }
}
