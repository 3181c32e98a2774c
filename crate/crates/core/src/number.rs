//! Scalar arithmetic used by every probability and estimator computation.
//!
//! All formulas are written once against [`Scalar`] and evaluated either in
//! `f64` (simulation) or in [`Exact`] (enumeration oracles, where unbiasedness
//! has to hold as an equality rather than up to a tolerance).
//!
//! [`Exact`] is the field of rationals extended with square roots of positive
//! integers. Degree powers `|α_i|^γ` for half-integer `γ` stay exact in it;
//! other exponents are not representable and callers fall back to `f64`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Number type the estimators are generic over.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether equality on this type is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    /// Converts a finite float; the exact type reads its shortest decimal form.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc * self.clone();
        }
        acc
    }

    /// `degree^gamma`, or `None` when the value is not representable.
    fn degree_power(degree: usize, gamma: f64) -> Option<Self>;
}

/// Sums an iterator of scalars left to right.
pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(items: I) -> S {
    items.into_iter().fold(S::zero(), |acc, x| acc + x)
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
    fn degree_power(degree: usize, gamma: f64) -> Option<Self> {
        Some((degree as f64).powf(gamma))
    }
}

/// Parses the shortest round-trip decimal rendering of `x` into a rational.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    // `Display` for f64 never uses exponent notation and is round-trip exact.
    let text = format!("{x}");
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.as_str()),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let mut numer: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    if negative {
        numer = -numer;
    }
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Some(BigRational::new(numer, denom))
}

/// Exact element of `Q(√2, √3, √5, ...)`: a finite sum `Σ c_r √r` with
/// rational `c_r` and distinct square-free radicands `r`.
#[derive(Clone, PartialEq, Eq)]
pub struct Exact {
    // radicand -> coefficient; never stores zero coefficients
    terms: BTreeMap<u64, BigRational>,
}

impl Exact {
    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(1, q);
        }
        Exact { terms }
    }

    /// `√n` for a non-negative integer, reduced to `a√b` with `b` square-free.
    pub fn sqrt_int(n: u64) -> Self {
        if n == 0 {
            return Exact::from_rational(BigRational::zero());
        }
        let (outer, radicand) = split_square(n);
        let mut terms = BTreeMap::new();
        terms.insert(radicand, BigRational::from_integer(BigInt::from(outer)));
        Exact { terms }
    }

    /// The value as a rational, if it has no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(|&r| r == 1)
    }

    fn add_term(&mut self, radicand: u64, coef: BigRational) {
        if coef.is_zero() {
            return;
        }
        let entry = self.terms.entry(radicand).or_insert_with(BigRational::zero);
        *entry += coef;
        if entry.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    fn scale(&self, factor: &BigRational) -> Exact {
        if factor.is_zero() {
            return Exact::from_rational(BigRational::zero());
        }
        Exact {
            terms: self.terms.iter().map(|(&r, c)| (r, c * factor)).collect(),
        }
    }

    fn mul_ref(&self, other: &Exact) -> Exact {
        let mut out = Exact::from_rational(BigRational::zero());
        for (&a, ca) in &self.terms {
            for (&b, cb) in &other.terms {
                // √a·√b = g·√((a/g)(b/g)) for square-free a, b with g = gcd(a, b)
                let g = gcd(a, b);
                let radicand = (a / g) * (b / g);
                let coef = ca * cb * BigRational::from_integer(BigInt::from(g));
                out.add_term(radicand, coef);
            }
        }
        out
    }

    /// Flips the sign of every term whose radicand is divisible by `prime`.
    fn conjugate(&self, prime: u64) -> Exact {
        Exact {
            terms: self
                .terms
                .iter()
                .map(|(&r, c)| {
                    if r % prime == 0 {
                        (r, -c.clone())
                    } else {
                        (r, c.clone())
                    }
                })
                .collect(),
        }
    }

    fn inverse(&self) -> Exact {
        assert!(!self.terms.is_empty(), "division by exact zero");
        let mut numer = Exact::from_rational(BigRational::one());
        let mut denom = self.clone();
        // Each conjugation by a prime p removes every √p factor from the
        // denominator: (u + v√p)(u − v√p) = u² − p v².
        while let Some(prime) = denom
            .terms
            .keys()
            .filter(|&&r| r > 1)
            .map(|&r| smallest_prime_factor(r))
            .min()
        {
            let conj = denom.conjugate(prime);
            numer = numer.mul_ref(&conj);
            denom = denom.mul_ref(&conj);
        }
        let rational = denom.as_rational().expect("conjugation leaves a rational");
        numer.scale(&rational.recip())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn smallest_prime_factor(n: u64) -> u64 {
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            return p;
        }
        p += 1;
    }
    n
}

/// Writes `n = outer² · radicand` with `radicand` square-free.
fn split_square(mut n: u64) -> (u64, u64) {
    let mut outer = 1;
    let mut radicand = 1;
    let mut p = 2;
    while p * p <= n {
        let mut count = 0;
        while n.is_multiple_of(p) {
            n /= p;
            count += 1;
        }
        outer *= p.pow(count / 2);
        if count % 2 == 1 {
            radicand *= p;
        }
        p += 1;
    }
    radicand *= n;
    (outer, radicand)
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (&r, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if r == 1 {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})√{r}")?;
            }
        }
        Ok(())
    }
}

impl Add for Exact {
    type Output = Exact;
    fn add(mut self, rhs: Exact) -> Exact {
        for (r, c) in rhs.terms {
            self.add_term(r, c);
        }
        self
    }
}

impl Sub for Exact {
    type Output = Exact;
    fn sub(self, rhs: Exact) -> Exact {
        self + (-rhs)
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        Exact {
            terms: self.terms.into_iter().map(|(r, c)| (r, -c)).collect(),
        }
    }
}

impl Mul for Exact {
    type Output = Exact;
    fn mul(self, rhs: Exact) -> Exact {
        if let Some(q) = rhs.as_rational() {
            return self.scale(&q);
        }
        if let Some(q) = self.as_rational() {
            return rhs.scale(&q);
        }
        self.mul_ref(&rhs)
    }
}

impl Div for Exact {
    type Output = Exact;
    fn div(self, rhs: Exact) -> Exact {
        match rhs.as_rational() {
            Some(q) => {
                assert!(!q.is_zero(), "division by exact zero");
                self.scale(&q.recip())
            }
            None => self.mul_ref(&rhs.inverse()),
        }
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;

    fn zero() -> Self {
        Exact::from_rational(BigRational::zero())
    }
    fn one() -> Self {
        Exact::from_rational(BigRational::one())
    }
    fn from_int(n: i64) -> Self {
        Exact::from_rational(BigRational::from_integer(BigInt::from(n)))
    }
    fn ratio(num: i64, den: i64) -> Self {
        Exact::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn from_f64(x: f64) -> Self {
        Exact::from_rational(rational_from_f64(x).expect("exact conversion of a non-finite float"))
    }
    fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(&r, c)| {
                let q = c.to_f64().unwrap_or(f64::NAN);
                q * (r as f64).sqrt()
            })
            .sum()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn degree_power(degree: usize, gamma: f64) -> Option<Self> {
        let twice = 2.0 * gamma;
        if gamma < 0.0 || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return None;
        }
        let twice = twice as u32;
        let base = Exact::from_int(degree as i64);
        let mut value = base.powi(twice / 2);
        if twice % 2 == 1 {
            value = value * Exact::sqrt_int(degree as u64);
        }
        Some(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::ratio(n, d)
    }

    #[test]
    fn decimal_conversion_is_exact() {
        assert_eq!(Exact::from_f64(0.2), q(1, 5));
        assert_eq!(Exact::from_f64(0.4375), q(7, 16));
        assert_eq!(Exact::from_f64(-2.5), q(-5, 2));
        assert_eq!(Exact::from_f64(1000.0), Exact::from_int(1000));
        assert!(rational_from_f64(f64::NAN).is_none());
    }

    #[test]
    fn square_roots_reduce() {
        assert_eq!(Exact::sqrt_int(8), Exact::from_int(2) * Exact::sqrt_int(2));
        assert_eq!(Exact::sqrt_int(9), Exact::from_int(3));
        assert_eq!(Exact::sqrt_int(2) * Exact::sqrt_int(2), Exact::from_int(2));
        assert_eq!(Exact::sqrt_int(6), Exact::sqrt_int(2) * Exact::sqrt_int(3));
    }

    #[test]
    fn inverse_of_mixed_surd() {
        // 1/(1 + √2) = √2 − 1
        let x = Exact::one() + Exact::sqrt_int(2);
        assert_eq!(Exact::one() / x, Exact::sqrt_int(2) - Exact::one());
        let y = Exact::sqrt_int(2) + Exact::sqrt_int(3) + q(1, 3);
        assert_eq!((Exact::one() / y.clone()) * y, Exact::one());
    }

    #[test]
    fn degree_powers() {
        assert_eq!(Exact::degree_power(4, 0.5), Some(Exact::from_int(2)));
        assert_eq!(
            Exact::degree_power(2, 1.5),
            Some(Exact::from_int(2) * Exact::sqrt_int(2))
        );
        assert_eq!(Exact::degree_power(3, 0.0), Some(Exact::one()));
        assert_eq!(Exact::degree_power(3, 1.227), None);
        assert!((f64::degree_power(2, 1.227).unwrap() - 2f64.powf(1.227)).abs() < 1e-15);
    }

    #[test]
    fn normalized_surd_weights_sum_to_one() {
        // c = (1, 1/√2) normalised over the pair
        let c1 = Exact::one();
        let c2 = Exact::one() / Exact::sqrt_int(2);
        let total = c1.clone() + c2.clone();
        assert_eq!(c1 / total.clone() + c2 / total, Exact::one());
    }

    proptest! {
        #[test]
        fn field_identities(a in 1u64..50, b in 1u64..50, n in -20i64..20, d in 1i64..20) {
            let x = Exact::sqrt_int(a) + Exact::ratio(n, d);
            let y = Exact::sqrt_int(b) - Exact::ratio(d, 7);
            prop_assume!(!x.is_zero() && !y.is_zero());
            prop_assert_eq!((x.clone() * y.clone()) / y.clone(), x.clone());
            prop_assert_eq!(x.clone() - x.clone(), Exact::zero());
            let approx = (a as f64).sqrt() + n as f64 / d as f64;
            prop_assert!((x.to_f64() - approx).abs() < 1e-12);
        }
    }
}
