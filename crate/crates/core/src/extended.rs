use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A value in `[0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Inf,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Inf => None,
        }
    }

    /// The finite value, or `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Multiplication with the convention that `∞ · 0` is an error.
    pub fn try_mul(self, other: ExtendedReal) -> Result<ExtendedReal> {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => Ok(ExtendedReal::Finite(a * b)),
            (ExtendedReal::Inf, ExtendedReal::Finite(v)) | (ExtendedReal::Finite(v), ExtendedReal::Inf) => {
                if v == 0.0 {
                    Err(Error::ExtendedArithmetic("inf * 0 is undefined".into()))
                } else {
                    Ok(ExtendedReal::Inf)
                }
            }
            (ExtendedReal::Inf, ExtendedReal::Inf) => Ok(ExtendedReal::Inf),
        }
    }

    pub fn add(self, other: ExtendedReal) -> ExtendedReal {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::Inf,
        }
    }

    pub fn max(self, other: ExtendedReal) -> ExtendedReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Parses a number or the string `"inf"`.
    pub fn parse(s: &str) -> Option<ExtendedReal> {
        match s.trim() {
            "inf" | "INF" | "Inf" | "infinity" => Some(ExtendedReal::Inf),
            t => t.parse::<f64>().ok().filter(|v| v.is_finite()).map(ExtendedReal::Finite),
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v.is_infinite() {
            ExtendedReal::Inf
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.partial_cmp(b),
            (ExtendedReal::Inf, ExtendedReal::Inf) => Some(Ordering::Equal),
            (ExtendedReal::Inf, _) => Some(Ordering::Greater),
            (_, ExtendedReal::Inf) => Some(Ordering::Less),
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v:.16e}"),
            ExtendedReal::Inf => write!(f, "inf"),
        }
    }
}
