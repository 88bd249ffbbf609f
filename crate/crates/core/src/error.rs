//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong when building or analyzing tables.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two records were supplied for the same slot.
    DuplicateSlot(usize),
    /// A slot inside the schedule has no record.
    MissingSlot(usize),
    /// A record points at a slot outside the schedule.
    SlotOutOfRange { slot: usize, len: usize },
    /// The requested setting pair never occurs in the schedule.
    PairAbsent(String),
    /// The schedule is not in block form (four contiguous same-setting spans).
    NotBlockForm,
    /// Setting pairs carry different slot counts where equal counts are required.
    UnbalancedQuarters,
    /// All four setting pairs are required but at least one is missing.
    IncompleteSchedule,
    /// The Sica condition does not hold where it is a precondition.
    SicaViolated,
    /// A span comparison needs equally long spans.
    SpanLengthMismatch { row: &'static str, left: usize, right: usize },
    /// No slot has detections on both stations.
    NoCoincidences,
    /// The table (or a block of it) contains no slots.
    EmptyTable,
    /// An operation restricted to the {0,1} encoding met a `-1`.
    NonBinaryOutcome,
    /// An operation restricted to ideal-efficiency data met a `0`.
    NullOutcome,
    /// A detection efficiency outside [0, 1], or zero where a ratio needs it.
    InvalidEfficiency(f64),
    /// An analyzer angle outside [0°, 180°).
    InvalidAngle(f64),
    /// Value outside [0, 4] passed where a CHSH estimate is expected.
    InvalidChshValue(f64),
    /// A discard budget outside [0, 1].
    InvalidBudget(f64),
    /// Exhaustive search was requested above its size cap.
    QuarterTooLarge { len: usize, max: usize },
    /// A free-choice block does not match the constructor's retained length.
    ChoiceLengthMismatch { expected: usize, got: usize },
    /// Factual multisets differ by more than the discard budget allows.
    MultisetMismatch { needed: usize, allowed: usize },
    /// A joint assignment does not project onto the table's quarter profiles.
    AssignmentMismatch,
    /// A replacement schedule must cover the same slots with the same pairs.
    ScheduleMismatch { expected: usize, got: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DuplicateSlot(s) => write!(f, "duplicate record for slot {s}"),
            Error::MissingSlot(s) => write!(f, "no record for slot {s}"),
            Error::SlotOutOfRange { slot, len } => {
                write!(f, "slot {slot} outside schedule of length {len}")
            }
            Error::PairAbsent(p) => write!(f, "setting pair {p} absent from schedule"),
            Error::NotBlockForm => write!(f, "schedule is not in block form"),
            Error::UnbalancedQuarters => write!(f, "setting pairs carry unequal slot counts"),
            Error::IncompleteSchedule => write!(f, "schedule lacks one of the four setting pairs"),
            Error::SicaViolated => write!(f, "Sica condition does not hold"),
            Error::SpanLengthMismatch { row, left, right } => {
                write!(f, "row {row}: spans of length {left} and {right} cannot be compared")
            }
            Error::NoCoincidences => write!(f, "no slot with detections on both stations"),
            Error::EmptyTable => write!(f, "empty table or block"),
            Error::NonBinaryOutcome => write!(f, "outcome outside {{0,1}} in single-detector mode"),
            Error::NullOutcome => write!(f, "undetected slot where ideal-efficiency data is required"),
            Error::InvalidEfficiency(e) => write!(f, "invalid detection efficiency {e}"),
            Error::InvalidAngle(a) => write!(f, "analyzer angle {a} outside [0, 180)"),
            Error::InvalidChshValue(s) => write!(f, "CHSH value {s} outside [0, 4]"),
            Error::InvalidBudget(b) => write!(f, "discard budget {b} outside [0, 1]"),
            Error::QuarterTooLarge { len, max } => {
                write!(f, "quarter length {len} above exhaustive-search cap {max}")
            }
            Error::ChoiceLengthMismatch { expected, got } => {
                write!(f, "free-choice block of length {got}, constructor needs {expected}")
            }
            Error::MultisetMismatch { needed, allowed } => {
                write!(f, "factual multisets need {needed} discards, budget allows {allowed}")
            }
            Error::AssignmentMismatch => write!(f, "assignment inconsistent with quarter profiles"),
            Error::ScheduleMismatch { expected, got } => {
                write!(f, "replacement schedule has {got} slots, table has {expected}")
            }
        }
    }
}

impl core::error::Error for Error {}
