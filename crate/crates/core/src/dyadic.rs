//! Exact arithmetic on dyadic rationals `p / 2^q`.
//!
//! Every breakpoint of a silhouette and every exact functional of a finite
//! tree (discounted path length, integrated silhouette, Kraft sum) lives in
//! this ring, so the whole exact layer of the crate is built on it.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A number `numerator / 2^exponent`, always kept in canonical form:
/// either the exponent is zero or the numerator is odd.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    num: BigInt,
    exp: u32,
}

impl DyadicRational {
    pub fn new(num: impl Into<BigInt>, exp: u32) -> Self {
        let mut d = DyadicRational {
            num: num.into(),
            exp,
        };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        DyadicRational {
            num: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        DyadicRational {
            num: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(k: i64) -> Self {
        DyadicRational {
            num: BigInt::from(k),
            exp: 0,
        }
    }

    /// `2^{-k}`.
    pub fn pow2_neg(k: u32) -> Self {
        DyadicRational {
            num: BigInt::one(),
            exp: k,
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        DyadicRational {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    /// Multiply by `2^k` (`k` may be negative).
    pub fn scale_pow2(&self, k: i64) -> Self {
        if k >= 0 {
            let k = k as u64;
            if k <= self.exp as u64 {
                DyadicRational {
                    num: self.num.clone(),
                    exp: self.exp - k as u32,
                }
            } else {
                DyadicRational::new(&self.num << (k - self.exp as u64), 0)
            }
        } else {
            let extra = u32::try_from(-k).expect("dyadic exponent overflow");
            DyadicRational::new(self.num.clone(), self.exp + extra)
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        DyadicRational::new(&self.num * k, self.exp)
    }

    /// Numerator of `self` written over the (larger or equal) denominator
    /// `2^exp`.
    ///
    /// Panics if `exp` is smaller than the canonical exponent.
    pub fn numerator_at(&self, exp: u32) -> BigInt {
        assert!(exp >= self.exp, "cannot express {self} over 2^{exp}");
        &self.num << (exp - self.exp)
    }

    /// Exact conversion of a finite float (every finite `f64` is dyadic).
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let mantissa = if raw_exp == 0 {
            (bits & 0xf_ffff_ffff_ffff) << 1
        } else {
            (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
        };
        // value = mantissa * 2^(raw_exp - 1075)
        let e = raw_exp - 1075;
        let num = BigInt::from(mantissa) * sign;
        Some(if e >= 0 {
            DyadicRational::new(num << e as u64, 0)
        } else {
            DyadicRational::new(num, (-e) as u32)
        })
    }

    /// Nearest-ish float; exact whenever the value is representable.
    pub fn to_f64(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        let bits = self.num.bits();
        let shift = bits.saturating_sub(64);
        let top = (self.num.abs() >> shift)
            .to_u64()
            .expect("top bits fit in u64") as f64;
        let v = ldexp(top, shift as i64 - self.exp as i64);
        if self.num.is_negative() {
            -v
        } else {
            v
        }
    }

    /// Denominator `2^exp` as an integer.
    pub fn denominator(&self) -> BigUint {
        BigUint::one() << self.exp
    }

    pub fn is_integer(&self) -> bool {
        self.exp == 0
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp as u64);
        if shift > 0 {
            self.num >>= shift;
            self.exp -= shift as u32;
        }
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let e = self.exp.max(other.exp);
        (
            &self.num << (e - self.exp),
            &other.num << (e - other.exp),
            e,
        )
    }
}

/// `x * 2^e` without intermediate overflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for DyadicRational {
    fn from(k: i64) -> Self {
        Self::from_int(k)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::new(a + b, e)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;
    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl AddAssign<&DyadicRational> for DyadicRational {
    fn add_assign(&mut self, rhs: &DyadicRational) {
        *self = &*self + rhs;
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let (a, b, e) = self.aligned(rhs);
        DyadicRational::new(a - b, e)
    }
}

impl Sub for DyadicRational {
    type Output = DyadicRational;
    fn sub(self, rhs: DyadicRational) -> DyadicRational {
        &self - &rhs
    }
}

impl Mul for &DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: &DyadicRational) -> DyadicRational {
        DyadicRational::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Mul for DyadicRational {
    type Output = DyadicRational;
    fn mul(self, rhs: DyadicRational) -> DyadicRational {
        &self * &rhs
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;
    fn neg(self) -> DyadicRational {
        DyadicRational {
            num: -self.num,
            exp: self.exp,
        }
    }
}

impl<'a> Sum<&'a DyadicRational> for DyadicRational {
    fn sum<I: Iterator<Item = &'a DyadicRational>>(iter: I) -> Self {
        // Accumulate over a common denominator, normalize once.
        let items: Vec<&DyadicRational> = iter.collect();
        let e = items.iter().map(|d| d.exp).max().unwrap_or(0);
        let total: BigInt = items.iter().map(|d| &d.num << (e - d.exp)).sum();
        DyadicRational::new(total, e)
    }
}

impl Sum for DyadicRational {
    fn sum<I: Iterator<Item = DyadicRational>>(iter: I) -> Self {
        let items: Vec<DyadicRational> = iter.collect();
        items.iter().sum()
    }
}

/// `p/2^q` rendered with the denominator expanded, e.g. `3/2`; integers
/// print without a denominator.
impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.denominator())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        let d = DyadicRational::new(12, 4);
        assert_eq!(d.numerator(), &BigInt::from(3));
        assert_eq!(d.exponent(), 2);
        let z = DyadicRational::new(0, 9);
        assert_eq!(z.exponent(), 0);
        assert_eq!(DyadicRational::new(8, 2), DyadicRational::from_int(2));
    }

    #[test]
    fn display() {
        assert_eq!(DyadicRational::new(3, 1).to_string(), "3/2");
        assert_eq!(DyadicRational::new(-5, 3).to_string(), "-5/8");
        assert_eq!(DyadicRational::one().to_string(), "1");
    }

    #[test]
    fn arithmetic() {
        let a = DyadicRational::new(1, 1);
        let b = DyadicRational::new(3, 2);
        assert_eq!(&a + &b, DyadicRational::new(5, 2));
        assert_eq!(&a - &b, DyadicRational::new(-1, 2));
        assert_eq!(&a * &b, DyadicRational::new(3, 3));
        assert!(a < b);
        assert_eq!(a.scale_pow2(3), DyadicRational::from_int(4));
        assert_eq!(b.scale_pow2(-2), DyadicRational::new(3, 4));
    }

    #[test]
    fn deep_exponents_convert() {
        let tiny = DyadicRational::pow2_neg(5000);
        assert_eq!(tiny.to_f64(), 0.0);
        let x = DyadicRational::pow2_neg(1070);
        assert_eq!(x.to_f64(), 2f64.powi(-1070));
        let big = DyadicRational::new(BigInt::one() << 200u32, 100);
        assert_eq!(big.to_f64(), 2f64.powi(100));
    }

    #[test]
    fn float_round_trip_is_exact() {
        for x in [0.5, 1.0 / 3.0, -2.75, 1e-300, 5e-324, 123456.789] {
            let d = DyadicRational::from_f64(x).unwrap();
            assert_eq!(d.to_f64(), x);
        }
        assert!(DyadicRational::from_f64(f64::NAN).is_none());
    }

    proptest! {
        #[test]
        fn add_matches_float(a in -1_000_000i64..1_000_000, ea in 0u32..20,
                             b in -1_000_000i64..1_000_000, eb in 0u32..20) {
            let x = DyadicRational::new(a, ea);
            let y = DyadicRational::new(b, eb);
            let s = &x + &y;
            prop_assert_eq!(s.to_f64(), x.to_f64() + y.to_f64());
            prop_assert_eq!(&s - &y, x.clone());
            prop_assert_eq!(x.cmp(&y), x.to_f64().partial_cmp(&y.to_f64()).unwrap());
        }
    }
}
