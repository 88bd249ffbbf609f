//! Outcomes, cells and provenance flags.

use core::fmt;

use crate::{Error, Result};

/// One detection result inside a time slot.
///
/// `Zero` means that neither detector of the station fired during the slot
/// (an inefficiency, not a missing measurement). A slot that was never
/// observed at all is an empty [`Cell`], which is a different thing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    /// The "+1" detector fired.
    Plus,
    /// The "-1" detector fired.
    Minus,
    /// No detector fired.
    Zero,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Plus, Outcome::Minus, Outcome::Zero];

    /// Numeric value: +1, -1 or 0.
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
            Outcome::Zero => 0,
        }
    }

    pub fn from_value(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            0 => Ok(Outcome::Zero),
            _ => Err(Error::NonBinaryOutcome),
        }
    }

    /// Dense index used by count tables: Plus = 0, Minus = 1, Zero = 2.
    pub(crate) fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::Zero => 2,
        }
    }

    pub(crate) fn from_index(i: usize) -> Self {
        Outcome::ALL[i]
    }

    /// True when a detector fired.
    pub fn detected(self) -> bool {
        self != Outcome::Zero
    }

    /// Single-detector {0,1} encoding: only the "+" detector counts.
    ///
    /// This is the explicit map used before Clauser-Horne counting:
    /// +1 becomes 1, both -1 and 0 become 0.
    pub fn ch_bit(self) -> u8 {
        match self {
            Outcome::Plus => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Plus => write!(f, "+"),
            Outcome::Minus => write!(f, "-"),
            Outcome::Zero => write!(f, "0"),
        }
    }
}

/// One grid position of a run table.
///
/// `Empty` marks an observation that was never performed because the
/// station was set to the other angle during that slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Measured(Outcome),
    Empty,
}

impl Cell {
    pub fn outcome(self) -> Option<Outcome> {
        match self {
            Cell::Measured(o) => Some(o),
            Cell::Empty => None,
        }
    }

    pub fn is_empty(self) -> bool {
        self == Cell::Empty
    }
}

/// Whether a value was actually recorded or assigned to a never-performed
/// observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Factual,
    Counterfactual,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ch_bit_maps_minus_and_zero_to_zero() {
        assert_eq!(Outcome::Plus.ch_bit(), 1);
        assert_eq!(Outcome::Minus.ch_bit(), 0);
        assert_eq!(Outcome::Zero.ch_bit(), 0);
    }

    #[test]
    fn value_round_trip() {
        for o in Outcome::ALL {
            assert_eq!(Outcome::from_value(o.value()).unwrap(), o);
        }
        assert!(Outcome::from_value(2).is_err());
    }
}
