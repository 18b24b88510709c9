//! Exact non-negative rational costs extended with `+∞`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::Error;

/// Exact rational number used for weights and operation weights.
pub type Rational = BigRational;

/// A cost in `ℚ₊ ∪ {∞}`.
///
/// `Finite` values are always non-negative and kept in lowest terms by
/// `BigRational`. The derived order puts every finite value below `Infinite`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtCost {
    Finite(Rational),
    Infinite,
}

impl ExtCost {
    pub fn zero() -> Self {
        ExtCost::Finite(Rational::zero())
    }

    pub fn from_int(v: i64) -> Self {
        assert!(v >= 0, "costs are non-negative");
        ExtCost::Finite(Rational::from_integer(BigInt::from(v)))
    }

    /// Wraps a rational, rejecting negative values.
    pub fn finite(v: Rational) -> Result<Self, Error> {
        if v.is_negative() {
            return Err(Error::Parse(format!("negative cost {v}")));
        }
        Ok(ExtCost::Finite(v))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtCost::Finite(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtCost::Finite(v) if v.is_zero())
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            ExtCost::Finite(v) => Some(v),
            ExtCost::Infinite => None,
        }
    }

    /// Multiplication by a non-negative scalar. `0 · ∞` is taken to be `∞`:
    /// an undefined tuple stays forbidden whatever its weight.
    pub fn scale(&self, by: &Rational) -> ExtCost {
        debug_assert!(!by.is_negative());
        match self {
            ExtCost::Finite(v) => ExtCost::Finite(v * by),
            ExtCost::Infinite => ExtCost::Infinite,
        }
    }
}

impl Default for ExtCost {
    fn default() -> Self {
        ExtCost::zero()
    }
}

impl Add for ExtCost {
    type Output = ExtCost;
    fn add(self, rhs: ExtCost) -> ExtCost {
        match (self, rhs) {
            (ExtCost::Finite(a), ExtCost::Finite(b)) => ExtCost::Finite(a + b),
            _ => ExtCost::Infinite,
        }
    }
}

impl<'a> Add<&'a ExtCost> for &'a ExtCost {
    type Output = ExtCost;
    fn add(self, rhs: &ExtCost) -> ExtCost {
        match (self, rhs) {
            (ExtCost::Finite(a), ExtCost::Finite(b)) => ExtCost::Finite(a + b),
            _ => ExtCost::Infinite,
        }
    }
}

impl AddAssign for ExtCost {
    fn add_assign(&mut self, rhs: ExtCost) {
        let lhs = std::mem::replace(self, ExtCost::Infinite);
        *self = lhs + rhs;
    }
}

impl Sum for ExtCost {
    fn sum<I: Iterator<Item = ExtCost>>(iter: I) -> Self {
        iter.fold(ExtCost::zero(), |a, b| a + b)
    }
}

impl fmt::Display for ExtCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCost::Finite(v) => f.write_str(&format_rational(v)),
            ExtCost::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtCost {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        if s.trim() == "inf" {
            return Ok(ExtCost::Infinite);
        }
        ExtCost::finite(parse_rational(s)?)
    }
}

/// Parses `"p/q"` or `"p"` (optionally signed) into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("malformed rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = num.parse().map_err(|_| bad())?;
    let q: BigInt = den.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(p, q))
}

/// Parses a weight that must be finite and non-negative.
pub fn parse_weight(s: &str) -> Result<Rational, Error> {
    if s.trim() == "inf" {
        return Err(Error::Parse("\"inf\" is not a legal weight".into()));
    }
    let v = parse_rational(s)?;
    if v.is_negative() {
        return Err(Error::Parse(format!("negative weight {s:?}")));
    }
    Ok(v)
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(v: &Rational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_cost() -> impl Strategy<Value = ExtCost> {
        prop_oneof![
            4 => (0i64..50, 1i64..12).prop_map(|(n, d)| ExtCost::Finite(rat(n, d))),
            1 => Just(ExtCost::Infinite),
        ]
    }

    #[test]
    fn parse_and_format() {
        assert_eq!("3/6".parse::<ExtCost>().unwrap().to_string(), "1/2");
        assert_eq!("4".parse::<ExtCost>().unwrap().to_string(), "4");
        assert_eq!("inf".parse::<ExtCost>().unwrap(), ExtCost::Infinite);
        assert!(parse_weight("inf").is_err());
        assert!(parse_weight("-1/2").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(parse_rational("-2/4").unwrap(), rat(-1, 2));
    }

    #[test]
    fn infinity_absorbs() {
        let x = ExtCost::from_int(3) + ExtCost::Infinite;
        assert_eq!(x, ExtCost::Infinite);
        assert_eq!(ExtCost::Infinite.scale(&int(0)), ExtCost::Infinite);
        assert!(ExtCost::Finite(int(1_000_000)) < ExtCost::Infinite);
    }

    proptest! {
        #[test]
        fn addition_is_commutative_and_associative(a in arb_cost(), b in arb_cost(), c in arb_cost()) {
            prop_assert_eq!(a.clone() + b.clone(), b.clone() + a.clone());
            prop_assert_eq!((a.clone() + b.clone()) + c.clone(), a + (b + c));
        }

        #[test]
        fn addition_respects_order(a in arb_cost(), b in arb_cost(), c in arb_cost()) {
            if a <= b {
                prop_assert!(a + c.clone() <= b + c);
            }
        }

        #[test]
        fn scaling_distributes(a in arb_cost(), b in arb_cost(), n in 0i64..9, d in 1i64..5) {
            let l = rat(n, d);
            prop_assert_eq!((a.clone() + b.clone()).scale(&l), a.scale(&l) + b.scale(&l));
        }
    }
}
