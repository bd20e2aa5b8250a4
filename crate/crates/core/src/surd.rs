//! Exact numbers of the form q·√r with q rational and r a positive integer.
//!
//! Weights such as `sq:1/20` (v = √(1/20)) and thresholds such as √2 live
//! here, so that interval decisions like "is Σ±vᵢ ≤ 1" can be made without
//! rounding. Comparison squares both sides after checking signs.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// Trial division bound used when pulling square factors out of a radicand.
const TRIAL_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    coeff: BigRational,
    radicand: u64,
}

impl Surd {
    pub fn rational(q: BigRational) -> Self {
        Self {
            coeff: q,
            radicand: 1,
        }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    /// The exact dyadic rational a finite `f64` represents.
    pub fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .map(Self::rational)
            .ok_or_else(|| domain(format!("cannot take an exact value of {x}")))
    }

    /// q·√r, normalized so that r carries no square factor we can find.
    pub fn new(coeff: BigRational, radicand: u64) -> Result<Self> {
        if radicand == 0 || coeff.is_zero() {
            return Ok(Self::zero());
        }
        let (square, rest) = split_square(radicand);
        Ok(Self {
            coeff: coeff * BigRational::from_integer(square.into()),
            radicand: rest,
        })
    }

    /// √q for a rational q ≥ 0.
    pub fn sqrt_of(q: &BigRational) -> Result<Self> {
        if q.is_negative() {
            return Err(domain(format!("square root of negative {q}")));
        }
        // √(p/d) = √(p·d)/d
        let p = q.numer().to_u64();
        let d = q.denom().to_u64();
        match (p, d) {
            (Some(p), Some(d)) => {
                let pd = p
                    .checked_mul(d)
                    .ok_or_else(|| domain(format!("radicand of √({q}) exceeds 64 bits")))?;
                Self::new(BigRational::new(1.into(), q.denom().clone()), pd)
            }
            _ => Err(domain(format!("radicand of √({q}) exceeds 64 bits"))),
        }
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.radicand == 1
    }

    pub fn signum(&self) -> i32 {
        match self.coeff.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        if self.radicand == 1 {
            c
        } else {
            c * (self.radicand as f64).sqrt()
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            coeff: -self.coeff.clone(),
            radicand: self.radicand,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let r = self
            .radicand
            .checked_mul(other.radicand)
            .ok_or_else(|| domain("radicand product exceeds 64 bits"))?;
        Self::new(&self.coeff * &other.coeff, r)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self {
            coeff: &self.coeff * q,
            radicand: self.radicand,
        }
    }

    /// Sum of two values sharing a radicand (or either being zero).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.coeff.is_zero() {
            return Ok(self.clone());
        }
        if self.coeff.is_zero() {
            return Ok(other.clone());
        }
        if self.radicand != other.radicand {
            return Err(domain(format!(
                "cannot add surds with radicands {} and {}",
                self.radicand, other.radicand
            )));
        }
        Self::new(&self.coeff + &other.coeff, self.radicand)
    }

    /// The value squared, exactly.
    pub fn square(&self) -> BigRational {
        &self.coeff * &self.coeff * BigRational::from_integer(self.radicand.into())
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Surd {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.signum(), other.signum());
        if a != b {
            return a.cmp(&b);
        }
        match a {
            0 => Ordering::Equal,
            1 => self.square().cmp(&other.square()),
            _ => other.square().cmp(&self.square()),
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", self.coeff)
        } else {
            write!(f, "{}*sqrt({})", self.coeff, self.radicand)
        }
    }
}

/// Writes n = s²·r and returns (s, r). `r` is squarefree whenever n's
/// prime factors above the trial limit appear at most twice.
pub fn split_square(n: u64) -> (u64, u64) {
    if n <= 1 {
        return (1, n.max(1));
    }
    let (mut square, mut rest, mut m) = (1u64, 1u64, n);
    let mut p = 2u64;
    while p <= TRIAL_LIMIT && p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        square *= p.pow(e / 2);
        if e % 2 == 1 {
            rest *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let q = m.isqrt();
    if q * q == m {
        square *= q;
    } else {
        rest *= m;
    }
    (square, rest)
}

/// ⌊c·√m⌋ for rational c and integer m ≥ 0.
pub fn floor_mul_sqrt(c: &BigRational, m: &BigUint) -> BigInt {
    if c.is_negative() {
        -ceil_nonneg(&-c.clone(), m)
    } else {
        floor_nonneg(c, m)
    }
}

/// ⌈c·√m⌉ for rational c and integer m ≥ 0.
pub fn ceil_mul_sqrt(c: &BigRational, m: &BigUint) -> BigInt {
    if c.is_negative() {
        -floor_nonneg(&-c.clone(), m)
    } else {
        ceil_nonneg(c, m)
    }
}

// For c = p/q ≥ 0: ⌊p√m/q⌋ = ⌊√⌊p²m/q²⌋⌋.
fn floor_nonneg(c: &BigRational, m: &BigUint) -> BigInt {
    let (num, den) = squared_parts(c, m);
    BigInt::from_biguint(Sign::Plus, (num / den).sqrt())
}

fn ceil_nonneg(c: &BigRational, m: &BigUint) -> BigInt {
    let (num, den) = squared_parts(c, m);
    let b = (&num / &den).sqrt();
    let exact = &b * &b * &den == num;
    let b = BigInt::from_biguint(Sign::Plus, b);
    if exact {
        b
    } else {
        b + BigInt::one()
    }
}

fn squared_parts(c: &BigRational, m: &BigUint) -> (BigUint, BigUint) {
    let p = c.numer().magnitude();
    let q = c.denom().magnitude();
    (p * p * m, q * q)
}

pub(crate) fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    a.lcm(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn split_square_cases() {
        assert_eq!(split_square(1), (1, 1));
        assert_eq!(split_square(20), (2, 5));
        assert_eq!(split_square(72), (6, 2));
        assert_eq!(split_square(49), (7, 1));
        let big_prime = 1_000_003u64;
        assert_eq!(split_square(big_prime * big_prime * 3), (big_prime, 3));
    }

    #[test]
    fn sqrt_normalizes() {
        let s = Surd::sqrt_of(&q(1, 20)).unwrap();
        // √(1/20) = √20/20 = 2√5/20 = √5/10
        assert_eq!(s.radicand(), 5);
        assert_eq!(s.coeff(), &q(1, 10));
        let s = Surd::sqrt_of(&q(1, 4)).unwrap();
        assert!(s.is_rational());
        assert_eq!(s.coeff(), &q(1, 2));
    }

    #[test]
    fn ordering_is_exact() {
        let r2 = Surd::sqrt_of(&q(2, 1)).unwrap();
        let a = Surd::rational(q(141_421_356, 100_000_000));
        let b = Surd::rational(q(141_421_357, 100_000_000));
        assert!(a < r2 && r2 < b);
        assert!(r2.neg() < a.neg().neg().neg());
        assert_eq!(Surd::zero().cmp(&Surd::zero()), Ordering::Equal);
        let two_halves = Surd::sqrt_of(&q(1, 2))
            .unwrap()
            .mul(&Surd::integer(2))
            .unwrap();
        assert_eq!(two_halves, r2);
    }

    #[test]
    fn floor_and_ceil() {
        let m = BigUint::from(2u32);
        assert_eq!(floor_mul_sqrt(&q(1, 1), &m), BigInt::from(1));
        assert_eq!(ceil_mul_sqrt(&q(1, 1), &m), BigInt::from(2));
        assert_eq!(floor_mul_sqrt(&q(-1, 1), &m), BigInt::from(-2));
        assert_eq!(ceil_mul_sqrt(&q(-1, 1), &m), BigInt::from(-1));
        let four = BigUint::from(4u32);
        assert_eq!(floor_mul_sqrt(&q(3, 2), &four), BigInt::from(3));
        assert_eq!(ceil_mul_sqrt(&q(3, 2), &four), BigInt::from(3));
        assert_eq!(ceil_mul_sqrt(&q(-3, 2), &four), BigInt::from(-3));
        assert_eq!(
            floor_mul_sqrt(&q(7, 3), &BigUint::from(1u32)),
            BigInt::from(2)
        );
        assert_eq!(
            ceil_mul_sqrt(&q(-7, 3), &BigUint::from(1u32)),
            BigInt::from(-2)
        );
    }

    #[test]
    fn from_f64_is_exact() {
        let s = Surd::from_f64(0.1).unwrap();
        assert_eq!(s.to_f64(), 0.1);
        assert!(Surd::from_f64(f64::NAN).is_err());
    }
}
