//! Run tables, quarter profiles, the Sica-condition check and condensation.
//!
//! A [`RunTable`] is the 4-row grid of a recorded experiment: rows `a` and
//! `a'` hold Alice's outcomes under her two settings, rows `b` and `b'`
//! Bob's. At every slot exactly one row per station is measured (the one
//! matching the schedule) and the other is empty.
//!
//! The *Sica condition* asks the series recorded at one station to be the
//! same regardless of the remote station's setting. When it holds, every
//! series appears twice and the table condenses to half the size with no
//! empty cells, which is what makes the CHSH bound of 2 derivable.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::outcome::{Cell, Outcome, Provenance};
use crate::schedule::{AliceSetting, BobSetting, SettingLabels, SettingPair, SettingSchedule};
use crate::{Error, Result};

/// Row identifiers, in the usual display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Row {
    A,
    B,
    APrime,
    BPrime,
}

impl Row {
    pub const ALL: [Row; 4] = [Row::A, Row::B, Row::APrime, Row::BPrime];

    pub fn index(self) -> usize {
        match self {
            Row::A => 0,
            Row::B => 1,
            Row::APrime => 2,
            Row::BPrime => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Row::A => "a",
            Row::B => "b",
            Row::APrime => "a'",
            Row::BPrime => "b'",
        }
    }

    fn is_alice(self) -> bool {
        matches!(self, Row::A | Row::APrime)
    }
}

/// Row measured by Alice under `s`.
pub(crate) fn alice_row(s: AliceSetting) -> Row {
    match s {
        AliceSetting::Alpha => Row::A,
        AliceSetting::AlphaPrime => Row::APrime,
    }
}

/// Row measured by Bob under `s`.
pub(crate) fn bob_row(s: BobSetting) -> Row {
    match s {
        BobSetting::Beta => Row::B,
        BobSetting::BetaPrime => Row::BPrime,
    }
}

/// The factual record of one run: schedule plus four cell rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTable {
    schedule: SettingSchedule,
    labels: SettingLabels,
    rows: [Vec<Cell>; 4],
}

impl RunTable {
    /// Build a table from per-slot records `(slot, alice outcome, bob outcome)`.
    ///
    /// Exactly one record per schedule slot is required. The outcomes land
    /// in the rows selected by the schedule; all other cells stay empty.
    pub fn from_records(
        schedule: SettingSchedule,
        labels: SettingLabels,
        records: &[(usize, Outcome, Outcome)],
    ) -> Result<Self> {
        let n = schedule.len();
        let mut rows: [Vec<Cell>; 4] = core::array::from_fn(|_| vec![Cell::Empty; n]);
        let mut seen = vec![false; n];
        for &(slot, a, b) in records {
            if slot >= n {
                return Err(Error::SlotOutOfRange { slot, len: n });
            }
            if seen[slot] {
                return Err(Error::DuplicateSlot(slot));
            }
            seen[slot] = true;
            let pair = schedule.pair_at(slot).expect("slot checked");
            rows[alice_row(pair.alice).index()][slot] = Cell::Measured(a);
            rows[bob_row(pair.bob).index()][slot] = Cell::Measured(b);
        }
        if let Some(slot) = seen.iter().position(|s| !s) {
            return Err(Error::MissingSlot(slot));
        }
        Ok(RunTable { schedule, labels, rows })
    }

    pub fn schedule(&self) -> &SettingSchedule {
        &self.schedule
    }

    pub fn labels(&self) -> &SettingLabels {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.schedule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedule.is_empty()
    }

    pub fn cell(&self, row: Row, slot: usize) -> Cell {
        self.rows[row.index()][slot]
    }

    pub fn row(&self, row: Row) -> &[Cell] {
        &self.rows[row.index()]
    }

    /// Alice's measured outcome at `slot` (whichever row carries it).
    pub fn alice_outcome(&self, slot: usize) -> Outcome {
        let pair = self.schedule.pair_at(slot).expect("slot in range");
        self.cell(alice_row(pair.alice), slot)
            .outcome()
            .expect("measured by construction")
    }

    /// Bob's measured outcome at `slot`.
    pub fn bob_outcome(&self, slot: usize) -> Outcome {
        let pair = self.schedule.pair_at(slot).expect("slot in range");
        self.cell(bob_row(pair.bob), slot)
            .outcome()
            .expect("measured by construction")
    }

    /// Joint outcome pair counts over exactly the slots carrying `pair`.
    ///
    /// Any legitimate reordering leaves this profile unchanged, which is
    /// what makes it the right currency for feasibility questions.
    pub fn quarter_profile(&self, pair: SettingPair) -> Result<QuarterProfile> {
        let slots = self.schedule.slots_with(pair);
        if slots.is_empty() {
            return Err(Error::PairAbsent(alloc::format!("{pair}")));
        }
        let mut counts = [[0usize; 3]; 3];
        for slot in slots {
            let a = self.alice_outcome(slot);
            let b = self.bob_outcome(slot);
            counts[a.index()][b.index()] += 1;
        }
        Ok(QuarterProfile { pair, counts })
    }

    /// All four quarter profiles in canonical order.
    pub fn all_profiles(&self) -> Result<[QuarterProfile; 4]> {
        if !self.schedule.has_all_pairs() {
            return Err(Error::IncompleteSchedule);
        }
        Ok([
            self.quarter_profile(SettingPair::CANONICAL[0])?,
            self.quarter_profile(SettingPair::CANONICAL[1])?,
            self.quarter_profile(SettingPair::CANONICAL[2])?,
            self.quarter_profile(SettingPair::CANONICAL[3])?,
        ])
    }

    /// Permute whole slots into canonical block order.
    ///
    /// Both stations' cells travel together, so every quarter profile is
    /// preserved exactly. Slots already in block form come back unchanged.
    pub fn normalize_schedule(&self) -> RunTable {
        let mut order: Vec<usize> = Vec::with_capacity(self.len());
        for pair in SettingPair::CANONICAL {
            order.extend(self.schedule.slots_with(pair));
        }
        self.permuted(&order)
    }

    /// Rebuild with slot `order[i]` of `self` placed at new slot `i`.
    pub(crate) fn permuted(&self, order: &[usize]) -> RunTable {
        let slots: Vec<SettingPair> = order
            .iter()
            .map(|&s| self.schedule.pair_at(s).expect("slot in range"))
            .collect();
        let schedule = SettingSchedule::new(slots);
        let records: Vec<(usize, Outcome, Outcome)> = order
            .iter()
            .enumerate()
            .map(|(new, &old)| (new, self.alice_outcome(old), self.bob_outcome(old)))
            .collect();
        RunTable::from_records(schedule, self.labels.clone(), &records)
            .expect("permutation preserves record structure")
    }

    /// Keep only the listed slots (in the given order).
    pub(crate) fn restricted(&self, slots: &[usize]) -> RunTable {
        self.permuted(slots)
    }

    /// Outcome sequence of `row` restricted to measured cells, in slot order.
    pub fn measured_series(&self, row: Row) -> Vec<Outcome> {
        self.rows[row.index()]
            .iter()
            .filter_map(|c| c.outcome())
            .collect()
    }

    /// Check the Sica condition on the factual record.
    ///
    /// For each row the measured cells split into the span recorded while
    /// the *other* station sat at its first setting and the span recorded
    /// at its second; the condition holds when the two spans agree element
    /// by element. Requires a block-form schedule so the comparison is
    /// well defined.
    pub fn sica_report(&self) -> Result<SicaReport> {
        if !self.schedule.is_block_form() {
            return Err(Error::NotBlockForm);
        }
        sica_report_from(&self.schedule, |row, slot| self.cell(row, slot).outcome())
    }

    /// Condense a factual table whose rows satisfy the Sica condition.
    ///
    /// Keeps one copy of each duplicated span; the result has one column
    /// per retained quarter slot, no empty cells, and reproduces every
    /// quarter profile exactly.
    pub fn condense(&self) -> Result<CondensedTable> {
        if !self.schedule.is_block_form() {
            return Err(Error::NotBlockForm);
        }
        if !self.schedule.has_all_pairs() {
            return Err(Error::IncompleteSchedule);
        }
        let q = self.schedule.balanced_quarter_len().ok_or(Error::UnbalancedQuarters)?;
        let report = self.sica_report()?;
        if !report.holds {
            return Err(Error::SicaViolated);
        }
        // Quarter q2 = (α,β) carries (a,b); q3 = (α',β) carries a'; q1 = (α,β') b'.
        let q1 = self.schedule.slots_with(SettingPair::CANONICAL[0]);
        let q2 = self.schedule.slots_with(SettingPair::CANONICAL[1]);
        let q3 = self.schedule.slots_with(SettingPair::CANONICAL[2]);
        let take = |row: Row, slots: &[usize]| -> Vec<Outcome> {
            slots
                .iter()
                .map(|&s| self.cell(row, s).outcome().expect("measured by schedule"))
                .collect()
        };
        let rows = [
            take(Row::A, &q2),
            take(Row::B, &q2),
            take(Row::APrime, &q3),
            take(Row::BPrime, &q1),
        ];
        let provenance = core::array::from_fn(|_| vec![Provenance::Factual; q]);
        Ok(CondensedTable { rows, provenance })
    }
}

/// Joint outcome pair counts within one setting-pair block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarterProfile {
    pair: SettingPair,
    counts: [[usize; 3]; 3],
}

impl QuarterProfile {
    pub fn pair(&self) -> SettingPair {
        self.pair
    }

    pub fn count(&self, alice: Outcome, bob: Outcome) -> usize {
        self.counts[alice.index()][bob.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Marginal counts of Alice's outcomes.
    pub fn alice_marginal(&self) -> [usize; 3] {
        core::array::from_fn(|i| self.counts[i].iter().sum())
    }

    /// Marginal counts of Bob's outcomes.
    pub fn bob_marginal(&self) -> [usize; 3] {
        core::array::from_fn(|j| (0..3).map(|i| self.counts[i][j]).sum())
    }

    /// True when no slot has an undetected outcome.
    pub fn is_sign_only(&self) -> bool {
        let z = Outcome::Zero.index();
        (0..3).all(|i| self.counts[i][z] == 0 && self.counts[z][i] == 0)
    }

    /// Unnormalized correlation sum Σ a·b over the block.
    pub fn product_sum(&self) -> i64 {
        let mut s = 0i64;
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                s += (a.value() as i64) * (b.value() as i64) * self.count(a, b) as i64;
            }
        }
        s
    }

    pub(crate) fn counts(&self) -> &[[usize; 3]; 3] {
        &self.counts
    }

    pub(crate) fn from_counts(pair: SettingPair, counts: [[usize; 3]; 3]) -> Self {
        QuarterProfile { pair, counts }
    }
}

impl fmt::Display for QuarterProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{", self.pair)?;
        let mut first = true;
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                let c = self.count(a, b);
                if c > 0 {
                    if !first {
                        write!(f, ", ")?;
                    }
                    write!(f, "({a},{b}):{c}")?;
                    first = false;
                }
            }
        }
        write!(f, "}}")
    }
}

/// Fully populated half-size table: rows `a`, `b`, `a'`, `b'` of common
/// length, no empty cells, with per-cell provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedTable {
    rows: [Vec<Outcome>; 4],
    provenance: [Vec<Provenance>; 4],
}

impl CondensedTable {
    pub fn new(rows: [Vec<Outcome>; 4]) -> Result<Self> {
        let m = rows[0].len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::SpanLengthMismatch { row: "condensed", left: rows[0].len(), right: m });
        }
        let provenance = core::array::from_fn(|_| vec![Provenance::Factual; m]);
        Ok(CondensedTable { rows, provenance })
    }

    pub fn with_provenance(
        rows: [Vec<Outcome>; 4],
        provenance: [Vec<Provenance>; 4],
    ) -> Result<Self> {
        let table = CondensedTable::new(rows)?;
        let m = table.len();
        if provenance.iter().any(|p| p.len() != m) {
            return Err(Error::SpanLengthMismatch { row: "provenance", left: m, right: 0 });
        }
        Ok(CondensedTable { provenance, ..table })
    }

    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, row: Row) -> &[Outcome] {
        &self.rows[row.index()]
    }

    pub fn provenance(&self, row: Row) -> &[Provenance] {
        &self.provenance[row.index()]
    }

    /// The four values of one condensed column.
    pub fn column(&self, i: usize) -> [Outcome; 4] {
        core::array::from_fn(|r| self.rows[r][i])
    }

    /// True when every value is ±1.
    pub fn is_sign_only(&self) -> bool {
        self.rows.iter().flatten().all(|o| o.detected())
    }

    /// Map every value through the explicit single-detector encoding
    /// (+1 → 1, everything else → 0) for Clauser-Horne arithmetic.
    pub fn to_ch_encoding(&self) -> CondensedTable {
        let rows = core::array::from_fn(|r| {
            self.rows[r]
                .iter()
                .map(|o| if o.ch_bit() == 1 { Outcome::Plus } else { Outcome::Zero })
                .collect()
        });
        CondensedTable { rows, provenance: self.provenance.clone() }
    }
}

/// A run-table-shaped grid with every cell assigned and flagged factual or
/// counterfactual.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteTable {
    schedule: SettingSchedule,
    labels: SettingLabels,
    values: [Vec<Outcome>; 4],
    provenance: [Vec<Provenance>; 4],
}

impl CompleteTable {
    pub fn new(
        schedule: SettingSchedule,
        labels: SettingLabels,
        values: [Vec<Outcome>; 4],
        provenance: [Vec<Provenance>; 4],
    ) -> Result<Self> {
        let n = schedule.len();
        if values.iter().any(|r| r.len() != n) || provenance.iter().any(|p| p.len() != n) {
            return Err(Error::SpanLengthMismatch { row: "complete", left: n, right: 0 });
        }
        Ok(CompleteTable { schedule, labels, values, provenance })
    }

    pub fn schedule(&self) -> &SettingSchedule {
        &self.schedule
    }

    pub fn labels(&self) -> &SettingLabels {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.schedule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedule.is_empty()
    }

    pub fn value(&self, row: Row, slot: usize) -> Outcome {
        self.values[row.index()][slot]
    }

    pub fn provenance(&self, row: Row, slot: usize) -> Provenance {
        self.provenance[row.index()][slot]
    }

    pub fn row_values(&self, row: Row) -> &[Outcome] {
        &self.values[row.index()]
    }

    pub fn row_provenance(&self, row: Row) -> &[Provenance] {
        &self.provenance[row.index()]
    }

    /// The factual sub-record as a plain run table.
    pub fn factual_table(&self) -> RunTable {
        let records: Vec<(usize, Outcome, Outcome)> = (0..self.len())
            .map(|slot| {
                let pair = self.schedule.pair_at(slot).expect("slot in range");
                (
                    slot,
                    self.value(alice_row(pair.alice), slot),
                    self.value(bob_row(pair.bob), slot),
                )
            })
            .collect();
        RunTable::from_records(self.schedule.clone(), self.labels.clone(), &records)
            .expect("complete table covers every slot")
    }

    /// Sica check over the completed series (all cells participate).
    pub fn sica_report(&self) -> Result<SicaReport> {
        if !self.schedule.is_block_form() {
            return Err(Error::NotBlockForm);
        }
        sica_report_from(&self.schedule, |row, slot| Some(self.value(row, slot)))
    }

    /// Condense the complete table to half length.
    ///
    /// Each row's two identified spans are equal under the Sica condition;
    /// one copy is kept. The copy recorded earlier in slot order supplies
    /// the provenance flags, which is what makes the factual/counterfactual
    /// mixture of the condensed table visible.
    pub fn condense(&self) -> Result<CondensedTable> {
        let report = self.sica_report()?;
        if !report.holds {
            return Err(Error::SicaViolated);
        }
        if self.schedule.balanced_quarter_len().is_none() {
            return Err(Error::UnbalancedQuarters);
        }
        let mut rows: [Vec<Outcome>; 4] = core::array::from_fn(|_| Vec::new());
        let mut prov: [Vec<Provenance>; 4] = core::array::from_fn(|_| Vec::new());
        for row in Row::ALL {
            let (first_span, _) = identified_spans(&self.schedule, row);
            rows[row.index()] = first_span.iter().map(|&s| self.value(row, s)).collect();
            prov[row.index()] = first_span.iter().map(|&s| self.provenance(row, s)).collect();
        }
        CondensedTable::with_provenance(rows, prov)
    }
}

/// Result of a Sica-condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct SicaReport {
    pub holds: bool,
    pub violations: Vec<SicaViolation>,
}

/// One row whose two identified spans disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct SicaViolation {
    pub row: Row,
    /// Slots of the span recorded with the remote station at its first setting.
    pub left_slots: Vec<usize>,
    /// Slots of the span recorded with the remote station at its second setting.
    pub right_slots: Vec<usize>,
    /// Positions (into the spans) where the values differ.
    pub mismatches: Vec<usize>,
}

impl fmt::Display for SicaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = |v: &Vec<usize>| v.first().copied().unwrap_or(0);
        let hi = |v: &Vec<usize>| v.last().copied().unwrap_or(0);
        write!(
            f,
            "row {}: slots {}..={} vs {}..={} differ at {} position(s)",
            self.row.name(),
            lo(&self.left_slots),
            hi(&self.left_slots),
            lo(&self.right_slots),
            hi(&self.right_slots),
            self.mismatches.len()
        )
    }
}

/// Slots where the remote station of `row` sat at its first / second setting.
fn remote_spans(schedule: &SettingSchedule, row: Row) -> (Vec<usize>, Vec<usize>) {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (slot, pair) in schedule.slots().iter().enumerate() {
        let is_first = if row.is_alice() {
            pair.bob == BobSetting::Beta
        } else {
            pair.alice == AliceSetting::Alpha
        };
        if is_first {
            first.push(slot);
        } else {
            second.push(slot);
        }
    }
    (first, second)
}

/// The two spans whose equality the Sica condition demands for `row`,
/// ordered so the first span starts earlier in slot order.
fn identified_spans(schedule: &SettingSchedule, row: Row) -> (Vec<usize>, Vec<usize>) {
    let (first, second) = remote_spans(schedule, row);
    match (first.first(), second.first()) {
        (Some(&f), Some(&s)) if s < f => (second, first),
        _ => (first, second),
    }
}

/// Shared Sica check: `value(row, slot)` yields `None` for empty cells,
/// which simply drop out of the compared spans (factual tables).
fn sica_report_from(
    schedule: &SettingSchedule,
    value: impl Fn(Row, usize) -> Option<Outcome>,
) -> Result<SicaReport> {
    let mut violations = Vec::new();
    for row in Row::ALL {
        let (left, right) = remote_spans(schedule, row);
        let left: Vec<usize> = left.into_iter().filter(|&s| value(row, s).is_some()).collect();
        let right: Vec<usize> = right.into_iter().filter(|&s| value(row, s).is_some()).collect();
        if left.len() != right.len() {
            return Err(Error::SpanLengthMismatch {
                row: row.name(),
                left: left.len(),
                right: right.len(),
            });
        }
        let mismatches: Vec<usize> = (0..left.len())
            .filter(|&i| value(row, left[i]) != value(row, right[i]))
            .collect();
        if !mismatches.is_empty() {
            violations.push(SicaViolation { row, left_slots: left, right_slots: right, mismatches });
        }
    }
    Ok(SicaReport { holds: violations.is_empty(), violations })
}

/// Parse a short sign string like "-++-" or "+-0+" into outcomes.
///
/// Mostly a convenience for tests and fixtures.
pub fn outcomes(s: &str) -> Vec<Outcome> {
    s.chars()
        .map(|c| match c {
            '+' => Outcome::Plus,
            '-' => Outcome::Minus,
            '0' => Outcome::Zero,
            _ => panic!("bad outcome char {c:?}"),
        })
        .collect()
}

/// Build a balanced block-form table directly from per-quarter series.
///
/// `q1 = (a, b')`, `q2 = (a, b)`, `q3 = (a', b)`, `q4 = (a', b')`, each a
/// pair of equally long outcome sequences.
pub fn block_table_from_quarters(
    labels: SettingLabels,
    q1: (&[Outcome], &[Outcome]),
    q2: (&[Outcome], &[Outcome]),
    q3: (&[Outcome], &[Outcome]),
    q4: (&[Outcome], &[Outcome]),
) -> Result<RunTable> {
    let q = q1.0.len();
    for (x, y) in [q1, q2, q3, q4] {
        if x.len() != q || y.len() != q {
            return Err(Error::UnbalancedQuarters);
        }
    }
    let schedule = SettingSchedule::blocks(q);
    let mut records = Vec::with_capacity(4 * q);
    for (qi, (alice, bob)) in [q1, q2, q3, q4].into_iter().enumerate() {
        for i in 0..q {
            records.push((qi * q + i, alice[i], bob[i]));
        }
    }
    RunTable::from_records(schedule, labels, &records)
}
