use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Exact dyadic rational `numerator * 2^level`.
///
/// Always stored in canonical form: the numerator is odd, or the value is
/// zero with level 0. Equality and hashing are therefore structural.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDyadic", into = "RawDyadic")]
pub struct DyadicScalar {
    numerator: i64,
    level: i32,
}

/// JSON form: a plain number when the value is an exact `f64`, otherwise the
/// explicit pair.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawDyadic {
    Number(f64),
    Exact { numerator: i64, level: i32 },
}

impl TryFrom<RawDyadic> for DyadicScalar {
    type Error = String;
    fn try_from(r: RawDyadic) -> Result<Self, String> {
        match r {
            RawDyadic::Number(x) => {
                DyadicScalar::from_f64(x).ok_or_else(|| format!("{x} is not a finite number"))
            }
            RawDyadic::Exact { numerator, level } => Ok(DyadicScalar::new(numerator, level)),
        }
    }
}

impl From<DyadicScalar> for RawDyadic {
    fn from(d: DyadicScalar) -> Self {
        let x = d.to_f64();
        if DyadicScalar::from_f64(x) == Some(d) {
            RawDyadic::Number(x)
        } else {
            RawDyadic::Exact {
                numerator: d.numerator,
                level: d.level,
            }
        }
    }
}

impl DyadicScalar {
    pub const ZERO: DyadicScalar = DyadicScalar {
        numerator: 0,
        level: 0,
    };

    pub fn new(numerator: i64, level: i32) -> Self {
        if numerator == 0 {
            return Self::ZERO;
        }
        let tz = numerator.trailing_zeros() as i32;
        DyadicScalar {
            numerator: numerator >> tz,
            level: level + tz,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(v, 0)
    }

    /// `2^level`.
    pub fn pow2(level: i32) -> Self {
        DyadicScalar {
            numerator: 1,
            level,
        }
    }

    /// Exact conversion of a finite `f64`; every finite double is dyadic.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Self::ZERO);
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1 } else { -1 };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i64;
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1i64 << 52), exp - 1075)
        };
        Some(Self::new(sign * mant, e))
    }

    pub fn numerator(self) -> i64 {
        self.numerator
    }

    pub fn level(self) -> i32 {
        self.level
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn signum(self) -> i64 {
        self.numerator.signum()
    }

    pub fn abs(self) -> Self {
        DyadicScalar {
            numerator: self.numerator.abs(),
            level: self.level,
        }
    }

    pub fn half(self) -> Self {
        self.mul_pow2(-1)
    }

    pub fn mul_pow2(self, k: i32) -> Self {
        if self.is_zero() {
            self
        } else {
            DyadicScalar {
                numerator: self.numerator,
                level: self.level + k,
            }
        }
    }

    pub fn mul_int(self, k: i64) -> Self {
        Self::new(
            self.numerator
                .checked_mul(k)
                .expect("dyadic numerator overflow"),
            self.level,
        )
    }

    /// Value as an integer multiple of `2^level`, if exact.
    pub fn to_grid(self, level: i32) -> Option<i64> {
        if self.is_zero() {
            return Some(0);
        }
        let shift = self.level - level;
        if shift < 0 {
            return None;
        }
        if shift >= 63 {
            return None;
        }
        self.numerator.checked_mul(1i64 << shift)
    }

    /// Grid multiple, panicking if `level` is coarser than the value.
    pub fn grid(self, level: i32) -> i64 {
        self.to_grid(level)
            .unwrap_or_else(|| panic!("{self:?} is not a multiple of 2^{level}"))
    }

    /// Finest level at which this value is a grid point.
    pub fn finest_level(self) -> i32 {
        if self.is_zero() {
            i32::MAX
        } else {
            self.level
        }
    }

    pub fn floor_div_pow2(self, level: i32) -> i64 {
        // floor(value / 2^level)
        let shift = self.level - level;
        if shift >= 0 {
            self.numerator << shift
        } else {
            self.numerator >> (-shift).min(63)
        }
    }

    pub fn ceil_div_pow2(self, level: i32) -> i64 {
        -(-self).floor_div_pow2(level)
    }

    pub fn to_f64(self) -> f64 {
        (self.numerator as f64) * (self.level as f64).exp2()
    }

    pub fn to_real<T: Real>(self) -> T {
        T::lit(self.numerator as f64) * T::lit(self.level as f64).exp2()
    }

    fn align(a: Self, b: Self) -> (i128, i128) {
        let l = a.level.min(b.level);
        let sa = (a.level - l) as u32;
        let sb = (b.level - l) as u32;
        assert!(
            sa < 64 && sb < 64,
            "dyadic alignment out of range: {a:?} vs {b:?}"
        );
        ((a.numerator as i128) << sa, (b.numerator as i128) << sb)
    }

    fn from_i128(v: i128, level: i32) -> Self {
        if v == 0 {
            return Self::ZERO;
        }
        let tz = v.trailing_zeros() as i32;
        let n = v >> tz;
        DyadicScalar {
            numerator: i64::try_from(n).expect("dyadic numerator overflow"),
            level: level + tz,
        }
    }
}

impl Ord for DyadicScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb || sa == 0 {
            return sa.cmp(&sb);
        }
        if (self.level - other.level).abs() >= 64 {
            // Magnitudes differ by far more than any numerator can bridge.
            return self.to_f64().total_cmp(&other.to_f64());
        }
        let (a, b) = Self::align(*self, *other);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for DyadicScalar {
    type Output = DyadicScalar;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (a, b) = Self::align(self, rhs);
        Self::from_i128(a + b, self.level.min(rhs.level))
    }
}

impl Sub for DyadicScalar {
    type Output = DyadicScalar;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for DyadicScalar {
    type Output = DyadicScalar;
    fn neg(self) -> Self {
        DyadicScalar {
            numerator: -self.numerator,
            level: self.level,
        }
    }
}

impl fmt::Debug for DyadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·2^{}", self.numerator, self.level)
    }
}

impl fmt::Display for DyadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let a = DyadicScalar::new(12, -3);
        assert_eq!(a.numerator(), 3);
        assert_eq!(a.level(), -1);
        assert_eq!(DyadicScalar::new(0, 7), DyadicScalar::ZERO);
        assert_eq!(DyadicScalar::new(4, 0), DyadicScalar::new(1, 2));
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = DyadicScalar::new(3, -2); // 0.75
        let b = DyadicScalar::new(5, -3); // 0.625
        assert_eq!((a + b).to_f64(), 1.375);
        assert_eq!((a - b).to_f64(), 0.125);
        assert!(a > b);
        assert_eq!((a - a), DyadicScalar::ZERO);
        assert_eq!(a.half().to_f64(), 0.375);
    }

    #[test]
    fn f64_roundtrip() {
        for x in [0.3, -1.25, 1e-300, 12345.678, -0.0] {
            let d = DyadicScalar::from_f64(x).unwrap();
            assert_eq!(d.to_f64(), x);
        }
    }

    #[test]
    fn json_forms() {
        let d = DyadicScalar::new(3, -2);
        assert_eq!(serde_json::to_string(&d).unwrap(), "0.75");
        let tiny = DyadicScalar::new(1, -2000);
        let s = serde_json::to_string(&tiny).unwrap();
        assert_eq!(s, r#"{"numerator":1,"level":-2000}"#);
        assert_eq!(serde_json::from_str::<DyadicScalar>(&s).unwrap(), tiny);
        assert_eq!(serde_json::from_str::<DyadicScalar>("-1.5").unwrap(), DyadicScalar::new(-3, -1));
    }

    #[test]
    fn floor_and_ceil() {
        let x = DyadicScalar::new(-3, -1); // -1.5
        assert_eq!(x.floor_div_pow2(0), -2);
        assert_eq!(x.ceil_div_pow2(0), -1);
        assert_eq!(DyadicScalar::from_int(5).floor_div_pow2(1), 2);
        assert_eq!(DyadicScalar::from_int(4).ceil_div_pow2(1), 2);
    }
}
