use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

/// A value in `[-inf, +inf]` restricted to what rate functions and log-MGFs
/// actually produce: a finite real or `+inf`.
///
/// Infinity is a variant rather than an `f64::INFINITY` so that it never leaks
/// into arithmetic by accident.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    /// Wraps an `f64`, mapping `+inf` onto [`ExtendedReal::PosInfinity`].
    ///
    /// NaN and `-inf` indicate a bug upstream and panic.
    pub fn from_f64(v: f64) -> Self {
        assert!(!v.is_nan(), "NaN is not an extended real");
        assert!(v != f64::NEG_INFINITY, "-inf is not representable");
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// Lossy conversion for plotting and serialization.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }

    /// Panics on infinity; for call sites where finiteness is an invariant.
    pub fn unwrap(self) -> f64 {
        self.finite().expect("expected a finite extended real")
    }

    pub fn le(self, bound: f64) -> bool {
        match self {
            ExtendedReal::Finite(v) => v <= bound,
            ExtendedReal::PosInfinity => false,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (Finite(_), PosInfinity) => Some(Ordering::Less),
            (PosInfinity, Finite(_)) => Some(Ordering::Greater),
            (PosInfinity, PosInfinity) => Some(Ordering::Equal),
        }
    }
}

impl std::ops::Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: Self) -> Self::Output {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        ExtendedReal::from_f64(v)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => serializer.serialize_f64(*v),
            ExtendedReal::PosInfinity => serializer.serialize_str("inf"),
        }
    }
}
