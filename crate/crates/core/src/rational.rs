//! Exact rational coordinates and predicate labels.
//!
//! Every coordinate and predicate label in an index model is an exact
//! rational, serialized as `"p/q"` in lowest terms. Floating point never
//! appears: fresh coordinates are midpoints of rational intervals and fresh
//! predicate labels come from a fixed enumeration of the rationals, so runs
//! are reproducible bit for bit.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An exact rational, used both for order coordinates and predicate labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord(BigRational);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoordParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}: expected `p` or `p/q` with integer p, q")]
    Malformed(String),
    #[error("zero denominator in rational literal {0:?}")]
    ZeroDenominator(String),
}

impl Coord {
    pub fn zero() -> Self {
        Coord(BigRational::zero())
    }

    pub fn one() -> Self {
        Coord(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Coord(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Coord(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    /// Midpoint of two coordinates; the canonical fresh value strictly inside
    /// an interval.
    pub fn midpoint(a: &Coord, b: &Coord) -> Coord {
        Coord((&a.0 + &b.0) / BigRational::from_integer(BigInt::from(2)))
    }

    /// The canonical fresh value strictly above `a` (one more).
    pub fn succ(a: &Coord) -> Coord {
        Coord(&a.0 + BigRational::one())
    }

    /// The canonical fresh value strictly below `a` (one less).
    pub fn pred(a: &Coord) -> Coord {
        Coord(&a.0 - BigRational::one())
    }

    /// Lowest-terms `"p/q"` form; integers print as `"p/1"` so that the
    /// external format has a single shape.
    pub fn as_fraction_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_fraction_string())
    }
}

impl FromStr for Coord {
    type Err = CoordParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(CoordParseError::Empty);
        }
        let (numer, denom) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n =
            BigInt::from_str(numer).map_err(|_| CoordParseError::Malformed(s.to_string()))?;
        let d =
            BigInt::from_str(denom).map_err(|_| CoordParseError::Malformed(s.to_string()))?;
        if d.is_zero() {
            return Err(CoordParseError::ZeroDenominator(s.to_string()));
        }
        Ok(Coord(BigRational::new(n, d)))
    }
}

impl Serialize for Coord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.as_fraction_string())
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Fixed enumeration of the rationals: 0, then the Calkin-Wilf sequence of
/// positive rationals interleaved with its negatives. "Least unused rational"
/// always means least index in this sequence.
pub fn rational_enumeration() -> impl Iterator<Item = Coord> {
    let mut cw = BigRational::one();
    let mut pending: Option<Coord> = None;
    let mut started = false;
    std::iter::from_fn(move || {
        if !started {
            started = true;
            return Some(Coord::zero());
        }
        if let Some(neg) = pending.take() {
            return Some(neg);
        }
        let current = cw.clone();
        // Calkin-Wilf successor: 1 / (2*floor(q) - q + 1).
        let floor = current.floor();
        let two = BigRational::from_integer(BigInt::from(2));
        cw = BigRational::one() / (&two * floor - &current + BigRational::one());
        pending = Some(Coord(-&current));
        Some(Coord(current))
    })
}

/// First rational in the fixed enumeration that is not in `used`.
pub fn least_unused_rational(used: &std::collections::BTreeSet<Coord>) -> Coord {
    rational_enumeration()
        .find(|c| !used.contains(c))
        .expect("enumeration of the rationals is infinite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["0/1", "3/4", "-7/2", "5/1"] {
            let c: Coord = s.parse().unwrap();
            assert_eq!(c.as_fraction_string(), s);
        }
        assert_eq!("6/8".parse::<Coord>().unwrap(), Coord::new(3, 4));
        assert_eq!("17".parse::<Coord>().unwrap(), Coord::from_int(17));
        assert!("1/0".parse::<Coord>().is_err());
        assert!("a/b".parse::<Coord>().is_err());
        assert!("".parse::<Coord>().is_err());
    }

    #[test]
    fn midpoint_stays_strictly_inside() {
        let a = Coord::from_int(0);
        let b = Coord::new(1, 3);
        let m = Coord::midpoint(&a, &b);
        assert!(a < m && m < b);
        assert_eq!(m, Coord::new(1, 6));
    }

    #[test]
    fn enumeration_starts_as_documented_and_has_no_repeats() {
        let first: Vec<Coord> = rational_enumeration().take(9).collect();
        let expect: Vec<Coord> = [
            (0, 1),
            (1, 1),
            (-1, 1),
            (1, 2),
            (-1, 2),
            (2, 1),
            (-2, 1),
            (1, 3),
            (-1, 3),
        ]
        .iter()
        .map(|&(p, q)| Coord::new(p, q))
        .collect();
        assert_eq!(first, expect);

        let many: Vec<Coord> = rational_enumeration().take(200).collect();
        let distinct: BTreeSet<_> = many.iter().cloned().collect();
        assert_eq!(distinct.len(), many.len());
    }

    #[test]
    fn least_unused_skips_used_prefix() {
        let used: BTreeSet<Coord> = [Coord::zero(), Coord::one()].into_iter().collect();
        assert_eq!(least_unused_rational(&used), Coord::from_int(-1));
    }

    #[test]
    fn serde_uses_fraction_strings() {
        let c = Coord::new(-7, 2);
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"-7/2\"");
        let back: Coord = serde_json::from_str("\"-7/2\"").unwrap();
        assert_eq!(back, c);
    }
}
