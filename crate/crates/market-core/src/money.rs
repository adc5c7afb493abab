//! Exact monetary arithmetic: integer cents plus rationals for shares.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Exact rational amount in cents. Used wherever division appears
/// (per-slot valuations, price shares); settlement converts back to
/// integer cents.
pub type Rat = Ratio<i128>;

/// Integer cents. All configured and settled amounts are exact.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Money(pub i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn cents(self) -> i64 {
        self.0
    }

    pub fn to_rat(self) -> Rat {
        Rat::from_integer(self.0 as i128)
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

/// Floor of an exact amount to whole cents.
pub fn floor_cents(r: Rat) -> Money {
    Money(r.floor().to_integer() as i64)
}

/// Lossy conversion for display and statistics only.
pub fn rat_to_f64(r: Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl fmt::Display for Money {
    /// Dollars with two decimals: 123 -> "$1.23", -40 -> "-$0.40".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}${}.{:02}", abs / 100, abs % 100)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Mul<i64> for Money {
    type Output = Money;
    fn mul(self, rhs: i64) -> Money {
        Money(self.0 * rhs)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_formats_cents_as_dollars() {
        assert_eq!(Money(123).to_string(), "$1.23");
        assert_eq!(Money(-40).to_string(), "-$0.40");
        assert_eq!(Money(0).to_string(), "$0.00");
        assert_eq!(Money(11800).to_string(), "$118.00");
    }

    #[test]
    fn floor_rounds_toward_negative_infinity() {
        assert_eq!(floor_cents(Rat::new(7, 2)), Money(3));
        assert_eq!(floor_cents(Rat::new(-7, 2)), Money(-4));
        assert_eq!(floor_cents(Rat::from_integer(5)), Money(5));
    }

    #[test]
    fn sum_is_exact() {
        let parts = vec![Money(1), Money(2), Money(-3), Money(11800)];
        let total: Money = parts.iter().copied().sum();
        assert_eq!(total, Money(11800));
    }
}
