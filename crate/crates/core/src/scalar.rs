//! Coefficient backends and small numeric helpers shared across modules.
//!
//! Static algebra runs on exact rationals ([`Rat`]); flow-evolved quantities
//! run on signed log-magnitude reals ([`LogCoeff`]) because `exp(t * weight)`
//! overflows doubles long before the flow times of interest are reached.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational scalar used by all static algebra.
pub type Rat = BigRational;
/// Small exact rational used for flow exponent weights.
pub type Rat64 = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_i(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// ln|x| with -inf for zero; falls back to a bit-length estimate when the
/// rational does not fit in a double.
pub fn ln_rat(x: &Rat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    match x.to_f64() {
        Some(v) if v.is_finite() && v != 0.0 => v.abs().ln(),
        _ => {
            let nb = x.numer().bits() as f64;
            let db = x.denom().bits() as f64;
            (nb - db) * std::f64::consts::LN_2
        }
    }
}

/// Nearest integer to a rational (ties round down, consistently).
pub fn round_rat(x: &Rat) -> BigInt {
    (x + rat(1, 2)).floor().to_integer()
}

/// Distance from a rational to the nearest integer.
pub fn dist_to_int(x: &Rat) -> Rat {
    (x - Rat::from(round_rat(x))).abs()
}

/// A scalar stored as sign and log-magnitude; the zero coefficient is
/// `(0, -inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCoeff {
    pub sign: i8,
    pub ln: f64,
}

impl LogCoeff {
    pub const ZERO: LogCoeff = LogCoeff {
        sign: 0,
        ln: f64::NEG_INFINITY,
    };

    pub fn from_rat(x: &Rat) -> Self {
        if x.is_zero() {
            Self::ZERO
        } else {
            LogCoeff {
                sign: if x.is_negative() { -1 } else { 1 },
                ln: ln_rat(x),
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogCoeff {
                sign: if x < 0.0 { -1 } else { 1 },
                ln: x.abs().ln(),
            }
        }
    }

    pub fn scaled(self, dln: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            LogCoeff {
                sign: self.sign,
                ln: self.ln + dln,
            }
        }
    }

    pub fn value(self) -> f64 {
        self.sign as f64 * self.ln.exp()
    }
}

impl std::ops::Add for LogCoeff {
    type Output = LogCoeff;
    /// Signed log-sum-exp; exact cancellation yields the zero coefficient.
    fn add(self, other: LogCoeff) -> LogCoeff {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.ln >= other.ln {
            (self, other)
        } else {
            (other, self)
        };
        if hi.sign == lo.sign {
            LogCoeff {
                sign: hi.sign,
                ln: hi.ln + (lo.ln - hi.ln).exp().ln_1p(),
            }
        } else if hi.ln == lo.ln {
            LogCoeff::ZERO
        } else {
            LogCoeff {
                sign: hi.sign,
                ln: hi.ln + (-(lo.ln - hi.ln).exp()).ln_1p(),
            }
        }
    }
}

impl std::ops::Mul for LogCoeff {
    type Output = LogCoeff;
    fn mul(self, other: LogCoeff) -> LogCoeff {
        if self.sign == 0 || other.sign == 0 {
            LogCoeff::ZERO
        } else {
            LogCoeff {
                sign: self.sign * other.sign,
                ln: self.ln + other.ln,
            }
        }
    }
}

impl Zero for LogCoeff {
    fn zero() -> Self {
        LogCoeff::ZERO
    }
    fn is_zero(&self) -> bool {
        self.sign == 0
    }
}

impl num_traits::One for LogCoeff {
    fn one() -> Self {
        LogCoeff { sign: 1, ln: 0.0 }
    }
}

/// Shared surface of the coefficient backends: a commutative ring with a
/// usable log-magnitude. (Log-backend addition is approximate by nature.)
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Zero + num_traits::One {
    fn neg(&self) -> Self;
    /// ln of the absolute value (-inf for zero); drives all sup-norms.
    fn ln_abs(&self) -> f64;
}

impl Coeff for Rat {
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn ln_abs(&self) -> f64 {
        ln_rat(self)
    }
}

impl Coeff for f64 {
    fn neg(&self) -> Self {
        -*self
    }
    fn ln_abs(&self) -> f64 {
        if *self == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.abs().ln()
        }
    }
}

impl Coeff for LogCoeff {
    fn neg(&self) -> Self {
        LogCoeff {
            sign: -self.sign,
            ln: self.ln,
        }
    }
    fn ln_abs(&self) -> f64 {
        self.ln
    }
}

/// A nonnegative extended real carried as a log-magnitude, with an explicit
/// propagating infinity. Height functions can legitimately take the value
/// zero, a finite value, or +inf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Zero,
    Finite { ln: f64 },
    Infinite,
}

impl ExtendedReal {
    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            ExtendedReal::Zero
        } else if v.is_infinite() {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite { ln: v.ln() }
        }
    }

    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            ExtendedReal::Zero
        } else if ln == f64::INFINITY {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite { ln }
        }
    }

    pub fn value(self) -> f64 {
        match self {
            ExtendedReal::Zero => 0.0,
            ExtendedReal::Finite { ln } => ln.exp(),
            ExtendedReal::Infinite => f64::INFINITY,
        }
    }

    pub fn ln_value(self) -> f64 {
        match self {
            ExtendedReal::Zero => f64::NEG_INFINITY,
            ExtendedReal::Finite { ln } => ln,
            ExtendedReal::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    /// x^p in log arithmetic (p > 0).
    pub fn powf(self, p: f64) -> Self {
        match self {
            ExtendedReal::Finite { ln } => ExtendedReal::Finite { ln: ln * p },
            other => other,
        }
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (ExtendedReal::Infinite, _) | (_, ExtendedReal::Infinite) => ExtendedReal::Infinite,
            (ExtendedReal::Zero, b) => b,
            (a, ExtendedReal::Zero) => a,
            (ExtendedReal::Finite { ln: a }, ExtendedReal::Finite { ln: b }) => {
                ExtendedReal::Finite { ln: a.max(b) }
            }
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.ln_value().partial_cmp(&other.ln_value())
    }
}

/// Least-squares slope of y against x.
pub fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Per-call node budget for enumerations; exceeding it is a hard error,
/// never a silently truncated result.
#[derive(Debug, Clone)]
pub struct Budget {
    pub limit: u64,
    used: u64,
}

impl Budget {
    pub const DEFAULT_LIMIT: u64 = 10_000_000;

    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    pub fn charge(&mut self, n: u64) -> crate::error::Result<()> {
        self.used += n;
        if self.used > self.limit {
            Err(crate::error::Error::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Self::DEFAULT_LIMIT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_rat_handles_huge_values() {
        let big = Rat::new(BigInt::from(10).pow(400u32), BigInt::from(1));
        let expected = 400.0 * 10f64.ln();
        assert!((ln_rat(&big) - expected).abs() / expected < 1e-3);
    }

    #[test]
    fn round_and_dist() {
        assert_eq!(round_rat(&rat(7, 2)), BigInt::from(4));
        assert_eq!(round_rat(&rat(-7, 2)), BigInt::from(-3));
        assert_eq!(dist_to_int(&rat(7, 3)), rat(1, 3));
    }

    #[test]
    fn extended_real_ordering() {
        let a = ExtendedReal::from_value(0.5);
        let b = ExtendedReal::from_value(2.0);
        assert!(a < b);
        assert!(b < ExtendedReal::Infinite);
        assert!(ExtendedReal::Zero < a);
    }

    #[test]
    fn budget_trips() {
        let mut b = Budget::new(10);
        assert!(b.charge(10).is_ok());
        assert!(b.charge(1).is_err());
    }
}
