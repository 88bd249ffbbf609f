//! Correlations, the CHSH parameter, Clauser-Horne counts and efficiencies.

use alloc::vec::Vec;

use crate::math;
use crate::outcome::Outcome;
use crate::schedule::{AliceSetting, BobSetting, SettingPair};
use crate::table::{CondensedTable, Row, RunTable};
use crate::{Error, Result};

/// How a pair correlation is normalized.
///
/// `PerCoincidence` divides by the number of slots where both stations
/// detected; `PerSlot` divides by every slot of the block, so undetected
/// slots dilute the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMode {
    PerCoincidence,
    PerSlot,
}

/// A single estimated correlation E for one setting pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationEstimate {
    pub pair: SettingPair,
    pub value: f64,
    /// Number of slots entering the denominator.
    pub samples: usize,
    pub mode: NormalizationMode,
}

/// Where a CHSH value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChshMode {
    /// Four disjoint factual blocks recorded at different times. Only the
    /// tautological bound S ≤ 4 applies.
    DisjointFactual,
    /// Shared-index sums over a condensed table; S ≤ 2 whenever all
    /// values are ±1.
    Condensed,
}

/// The CHSH combination S = |E(α,β) − E(α,β')| + |E(α',β) + E(α',β')|.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshResult {
    /// Correlations in canonical quarter order (α,β'), (α,β), (α',β), (α',β').
    pub correlations: [CorrelationEstimate; 4],
    pub s: f64,
    pub mode: ChshMode,
}

impl ChshResult {
    pub fn correlation_for(&self, pair: SettingPair) -> &CorrelationEstimate {
        &self.correlations[pair.quarter_index()]
    }
}

/// The Clauser-Horne count combination and its components.
#[derive(Debug, Clone, PartialEq)]
pub struct ChResult {
    /// "+,+" coincidence counts in canonical quarter order.
    pub coincidences: [usize; 4],
    /// Single detections with A = α (over all slots carrying that setting).
    pub singles_alpha: usize,
    /// Single detections with B = β.
    pub singles_beta: usize,
    /// J = N_c(α,β) + N_c(α,β') + N_c(α',β) − N_c(α',β') − S(α) − S(β).
    pub j: i64,
    /// Per-index terms T_i when computed on a condensed table.
    pub terms: Option<Vec<i64>>,
}

/// Detector identifiers for efficiency reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    AlicePlus,
    AliceMinus,
    BobPlus,
    BobMinus,
}

impl Detector {
    pub const ALL: [Detector; 4] =
        [Detector::AlicePlus, Detector::AliceMinus, Detector::BobPlus, Detector::BobMinus];

    pub fn name(self) -> &'static str {
        match self {
            Detector::AlicePlus => "A+",
            Detector::AliceMinus => "A-",
            Detector::BobPlus => "B+",
            Detector::BobMinus => "B-",
        }
    }
}

/// Singles and coincidence tallies for one detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DetectorStats {
    pub singles: usize,
    pub coincidences: usize,
}

impl DetectorStats {
    /// Coincidences divided by singles; absent when the detector never fired.
    pub fn eta(self) -> Option<f64> {
        if self.singles == 0 {
            None
        } else {
            Some(self.coincidences as f64 / self.singles as f64)
        }
    }
}

/// Per-detector and overall detection efficiencies.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyReport {
    /// Stats in the order A+, A-, B+, B-.
    pub detectors: [DetectorStats; 4],
}

impl EfficiencyReport {
    pub fn stats(&self, d: Detector) -> DetectorStats {
        self.detectors[Detector::ALL.iter().position(|x| *x == d).expect("known")]
    }

    pub fn eta(&self, d: Detector) -> Option<f64> {
        self.stats(d).eta()
    }

    /// All coincidence participations divided by all singles.
    pub fn overall(&self) -> Option<f64> {
        let singles: usize = self.detectors.iter().map(|d| d.singles).sum();
        let coincidences: usize = self.detectors.iter().map(|d| d.coincidences).sum();
        if singles == 0 {
            None
        } else {
            Some(coincidences as f64 / singles as f64)
        }
    }
}

/// Position of S·η relative to the bound value 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFlag {
    Below,
    AtBound,
    Above,
}

/// Correlation E for one setting pair of a factual table.
pub fn correlation(
    table: &RunTable,
    pair: SettingPair,
    mode: NormalizationMode,
) -> Result<CorrelationEstimate> {
    let slots = table.schedule().slots_with(pair);
    if slots.is_empty() {
        return Err(Error::PairAbsent(alloc::format!("{pair}")));
    }
    let mut sum = 0i64;
    let mut coincidences = 0usize;
    for &slot in &slots {
        let a = table.alice_outcome(slot);
        let b = table.bob_outcome(slot);
        if a.detected() && b.detected() {
            sum += (a.value() as i64) * (b.value() as i64);
            coincidences += 1;
        }
    }
    let samples = match mode {
        NormalizationMode::PerCoincidence => {
            if coincidences == 0 {
                return Err(Error::NoCoincidences);
            }
            coincidences
        }
        NormalizationMode::PerSlot => slots.len(),
    };
    Ok(CorrelationEstimate { pair, value: sum as f64 / samples as f64, samples, mode })
}

/// CHSH from the four disjoint factual blocks.
pub fn chsh(table: &RunTable, mode: NormalizationMode) -> Result<ChshResult> {
    let correlations = [
        correlation(table, SettingPair::CANONICAL[0], mode)?,
        correlation(table, SettingPair::CANONICAL[1], mode)?,
        correlation(table, SettingPair::CANONICAL[2], mode)?,
        correlation(table, SettingPair::CANONICAL[3], mode)?,
    ];
    let s = chsh_combination(
        correlations[1].value,
        correlations[0].value,
        correlations[2].value,
        correlations[3].value,
    );
    Ok(ChshResult { correlations, s, mode: ChshMode::DisjointFactual })
}

/// CHSH from the shared-index sums of a condensed table.
///
/// For tables whose values are all ±1 the result never exceeds 2; with
/// zero-filled cells only the tautological bound applies.
pub fn chsh_condensed(table: &CondensedTable) -> Result<ChshResult> {
    let m = table.len();
    if m == 0 {
        return Err(Error::EmptyTable);
    }
    let dot = |x: Row, y: Row| -> f64 {
        let s: i64 = table
            .row(x)
            .iter()
            .zip(table.row(y))
            .map(|(u, v)| (u.value() as i64) * (v.value() as i64))
            .sum();
        s as f64 / m as f64
    };
    let e_ab = dot(Row::A, Row::B);
    let e_abp = dot(Row::A, Row::BPrime);
    let e_apb = dot(Row::APrime, Row::B);
    let e_apbp = dot(Row::APrime, Row::BPrime);
    let s = chsh_combination(e_ab, e_abp, e_apb, e_apbp);
    if table.is_sign_only() {
        debug_assert!(s <= 2.0 + 1e-9, "condensed sign tables obey the bound");
    }
    let make = |pair: SettingPair, value: f64| CorrelationEstimate {
        pair,
        value,
        samples: m,
        mode: NormalizationMode::PerSlot,
    };
    Ok(ChshResult {
        correlations: [
            make(SettingPair::CANONICAL[0], e_abp),
            make(SettingPair::CANONICAL[1], e_ab),
            make(SettingPair::CANONICAL[2], e_apb),
            make(SettingPair::CANONICAL[3], e_apbp),
        ],
        s,
        mode: ChshMode::Condensed,
    })
}

fn chsh_combination(e_ab: f64, e_abp: f64, e_apb: f64, e_apbp: f64) -> f64 {
    math::abs(e_ab - e_abp) + math::abs(e_apb + e_apbp)
}

/// Map a factual table into the explicit single-detector {0,1} encoding:
/// +1 stays a detection, −1 and 0 become non-detections.
pub fn to_ch_encoding(table: &RunTable) -> RunTable {
    let records: Vec<(usize, Outcome, Outcome)> = (0..table.len())
        .map(|slot| {
            let a = table.alice_outcome(slot);
            let b = table.bob_outcome(slot);
            let map = |o: Outcome| if o.ch_bit() == 1 { Outcome::Plus } else { Outcome::Zero };
            (slot, map(a), map(b))
        })
        .collect();
    RunTable::from_records(table.schedule().clone(), table.labels().clone(), &records)
        .expect("same slots as source")
}

/// The Clauser-Horne combination J over a factual table in {0,1} encoding.
pub fn ch_j(table: &RunTable) -> Result<ChResult> {
    let mut coincidences = [0usize; 4];
    let mut singles_alpha = 0usize;
    let mut singles_beta = 0usize;
    for slot in 0..table.len() {
        let pair = table.schedule().pair_at(slot).expect("slot in range");
        let a = table.alice_outcome(slot);
        let b = table.bob_outcome(slot);
        if a == Outcome::Minus || b == Outcome::Minus {
            return Err(Error::NonBinaryOutcome);
        }
        if a == Outcome::Plus && b == Outcome::Plus {
            coincidences[pair.quarter_index()] += 1;
        }
        if pair.alice == AliceSetting::Alpha && a == Outcome::Plus {
            singles_alpha += 1;
        }
        if pair.bob == BobSetting::Beta && b == Outcome::Plus {
            singles_beta += 1;
        }
    }
    let j = coincidences[1] as i64 + coincidences[0] as i64 + coincidences[2] as i64
        - coincidences[3] as i64
        - singles_alpha as i64
        - singles_beta as i64;
    Ok(ChResult { coincidences, singles_alpha, singles_beta, j, terms: None })
}

/// Per-index Clauser-Horne terms over a condensed {0,1} table.
///
/// T_i = a(b + b') + a'(b − b') − a − b; every term is ≤ 0, which is the
/// whole content of the J ≤ 0 bound once the table is condensed.
pub fn ch_terms_condensed(table: &CondensedTable) -> Result<ChResult> {
    let m = table.len();
    let mut terms = Vec::with_capacity(m);
    let mut coincidences = [0usize; 4];
    let mut singles_alpha = 0usize;
    let mut singles_beta = 0usize;
    for i in 0..m {
        let [a, b, ap, bp] = table.column(i);
        if [a, b, ap, bp].iter().any(|o| *o == Outcome::Minus) {
            return Err(Error::NonBinaryOutcome);
        }
        let (a, b, ap, bp) =
            (a.ch_bit() as i64, b.ch_bit() as i64, ap.ch_bit() as i64, bp.ch_bit() as i64);
        coincidences[0] += (a * bp) as usize;
        coincidences[1] += (a * b) as usize;
        coincidences[2] += (ap * b) as usize;
        coincidences[3] += (ap * bp) as usize;
        singles_alpha += a as usize;
        singles_beta += b as usize;
        terms.push(a * (b + bp) + ap * (b - bp) - a - b);
    }
    let j = terms.iter().sum();
    Ok(ChResult { coincidences, singles_alpha, singles_beta, j, terms: Some(terms) })
}

/// Per-detector efficiencies: coincidences divided by singles.
pub fn efficiency(table: &RunTable) -> EfficiencyReport {
    let mut detectors = [DetectorStats::default(); 4];
    for slot in 0..table.len() {
        let a = table.alice_outcome(slot);
        let b = table.bob_outcome(slot);
        let coincidence = a.detected() && b.detected();
        let mut tally = |idx: usize, fired: bool| {
            if fired {
                detectors[idx].singles += 1;
                if coincidence {
                    detectors[idx].coincidences += 1;
                }
            }
        };
        tally(0, a == Outcome::Plus);
        tally(1, a == Outcome::Minus);
        tally(2, b == Outcome::Plus);
        tally(3, b == Outcome::Minus);
    }
    EfficiencyReport { detectors }
}

/// Diagnostic product S·η with a flag locating it against the value 2.
///
/// Purely informative; nothing is asserted about the product.
pub fn efficiency_bound_ratio(s: f64, eta: f64) -> Result<(f64, BoundFlag)> {
    if !(0.0..=4.0).contains(&s) {
        return Err(Error::InvalidChshValue(s));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidEfficiency(eta));
    }
    let product = s * eta;
    let flag = if math::abs(product - 2.0) <= 1e-9 {
        BoundFlag::AtBound
    } else if product < 2.0 {
        BoundFlag::Below
    } else {
        BoundFlag::Above
    };
    Ok((product, flag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::schedule::{SettingLabels, SettingSchedule};
    use crate::table::{block_table_from_quarters, outcomes};

    const Q1: SettingPair = SettingPair::CANONICAL[0];
    const Q2: SettingPair = SettingPair::CANONICAL[1];

    #[test]
    fn anticorrelated_block_gives_minus_one() {
        let e = correlation(&fixtures::sica16(), Q1, NormalizationMode::PerCoincidence).unwrap();
        assert_eq!(e.value, -1.0);
        assert_eq!(e.samples, 4);
    }

    #[test]
    fn correlated_block_gives_plus_one() {
        let e = correlation(&fixtures::chsh4(), Q2, NormalizationMode::PerCoincidence).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn all_zero_block_errors_per_coincidence_and_vanishes_per_slot() {
        let schedule = SettingSchedule::fixed(Q2, 4);
        let recs: Vec<_> = (0..4).map(|i| (i, Outcome::Zero, Outcome::Zero)).collect();
        let t = RunTable::from_records(schedule, SettingLabels::default(), &recs).unwrap();
        assert_eq!(
            correlation(&t, Q2, NormalizationMode::PerCoincidence),
            Err(Error::NoCoincidences)
        );
        let e = correlation(&t, Q2, NormalizationMode::PerSlot).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.samples, 4);
    }

    #[test]
    fn disjoint_factual_chsh_values() {
        assert_eq!(chsh(&fixtures::block16(), NormalizationMode::PerCoincidence).unwrap().s, 2.0);
        assert_eq!(chsh(&fixtures::sica16(), NormalizationMode::PerCoincidence).unwrap().s, 2.0);
        assert_eq!(chsh(&fixtures::chsh4(), NormalizationMode::PerCoincidence).unwrap().s, 4.0);
    }

    #[test]
    fn constant_table_gives_two() {
        let p = outcomes("++");
        let t = block_table_from_quarters(
            SettingLabels::default(),
            (&p, &p),
            (&p, &p),
            (&p, &p),
            (&p, &p),
        )
        .unwrap();
        assert_eq!(chsh(&t, NormalizationMode::PerCoincidence).unwrap().s, 2.0);
    }

    #[test]
    fn chsh_on_incomplete_schedule_errors() {
        let t = fixtures::six_slot_single_pair();
        assert!(matches!(
            chsh(&t, NormalizationMode::PerCoincidence),
            Err(Error::PairAbsent(_))
        ));
    }

    #[test]
    fn condensed_chsh_matches_frozen_values() {
        let r = chsh_condensed(&fixtures::sica16_condensed()).unwrap();
        assert_eq!(r.correlation_for(Q2).value, 1.0);
        assert_eq!(r.correlation_for(Q1).value, -1.0);
        assert_eq!(r.correlation_for(SettingPair::CANONICAL[2]).value, 0.0);
        assert_eq!(r.correlation_for(SettingPair::CANONICAL[3]).value, 0.0);
        assert_eq!(r.s, 2.0);

        let r = chsh_condensed(&fixtures::chsh4_condensed()).unwrap();
        assert_eq!(r.correlation_for(Q2).value, 1.0);
        assert_eq!(r.correlation_for(Q1).value, 0.0);
        assert_eq!(r.correlation_for(SettingPair::CANONICAL[2]).value, 0.0);
        assert_eq!(r.correlation_for(SettingPair::CANONICAL[3]).value, 1.0);
        assert_eq!(r.s, 2.0);
    }

    #[test]
    fn single_column_condensed_table() {
        let t = CondensedTable::new([
            outcomes("+"),
            outcomes("+"),
            outcomes("+"),
            outcomes("+"),
        ])
        .unwrap();
        assert_eq!(chsh_condensed(&t).unwrap().s, 2.0);
        assert_eq!(chsh_condensed(&CondensedTable::new(core::array::from_fn(|_| Vec::new())).unwrap()),
            Err(Error::EmptyTable));
    }

    #[test]
    fn exhaustive_single_column_bound_and_identity() {
        // All 4^4 sign assignments of one condensed column.
        for bits in 0..256usize {
            let pick = |k: usize| if bits >> k & 1 == 0 { Outcome::Plus } else { Outcome::Minus };
            let t = CondensedTable::new([
                alloc::vec![pick(0)],
                alloc::vec![pick(1)],
                alloc::vec![pick(2)],
                alloc::vec![pick(3)],
            ])
            .unwrap();
            let s = chsh_condensed(&t).unwrap().s;
            assert!(s <= 2.0, "bound violated at {bits:08b}: {s}");
            let b = pick(1).value() as i64;
            let bp = pick(3).value() as i64;
            assert_eq!((b - bp).abs() + (b + bp).abs(), 2);
        }
    }

    #[test]
    fn ch_j_on_constant_ones_table() {
        let q = 3;
        let ones = outcomes("+++");
        let t = block_table_from_quarters(
            SettingLabels::default(),
            (&ones, &ones),
            (&ones, &ones),
            (&ones, &ones),
            (&ones, &ones),
        )
        .unwrap();
        let r = ch_j(&t).unwrap();
        assert_eq!(r.coincidences, [q, q, q, q]);
        assert_eq!(r.singles_alpha, 2 * q);
        assert_eq!(r.singles_beta, 2 * q);
        assert_eq!(r.j, -(2 * q as i64));
    }

    #[test]
    fn ch_j_counts_a_single_coincidence() {
        let zeros = outcomes("00");
        let t = block_table_from_quarters(
            SettingLabels::default(),
            (&zeros, &zeros),
            (&zeros, &zeros),
            (&zeros, &zeros),
            (&outcomes("+0"), &outcomes("+0")),
        )
        .unwrap();
        let r = ch_j(&t).unwrap();
        assert_eq!(r.j, -1);

        let all_zero = block_table_from_quarters(
            SettingLabels::default(),
            (&zeros, &zeros),
            (&zeros, &zeros),
            (&zeros, &zeros),
            (&zeros, &zeros),
        )
        .unwrap();
        assert_eq!(ch_j(&all_zero).unwrap().j, 0);
    }

    #[test]
    fn ch_j_rejects_sign_outcomes() {
        assert_eq!(ch_j(&fixtures::chsh4()), Err(Error::NonBinaryOutcome));
        let mapped = to_ch_encoding(&fixtures::chsh4());
        assert!(ch_j(&mapped).is_ok());
    }

    #[test]
    fn ch_terms_case_analysis() {
        // Columns are (a, b, a', b').
        let col = |a: u8, ap: u8, b: u8, bp: u8| {
            let o = |x: u8| if x == 1 { Outcome::Plus } else { Outcome::Zero };
            CondensedTable::new([
                alloc::vec![o(a)],
                alloc::vec![o(b)],
                alloc::vec![o(ap)],
                alloc::vec![o(bp)],
            ])
            .unwrap()
        };
        assert_eq!(ch_terms_condensed(&col(1, 0, 1, 1)).unwrap().terms.unwrap(), alloc::vec![0]);
        assert_eq!(ch_terms_condensed(&col(0, 1, 0, 1)).unwrap().terms.unwrap(), alloc::vec![-1]);
        assert_eq!(ch_terms_condensed(&col(0, 0, 0, 0)).unwrap().terms.unwrap(), alloc::vec![0]);
    }

    #[test]
    fn ch_terms_never_positive_exhaustively() {
        let mut max_term = i64::MIN;
        for bits in 0..16u8 {
            let o = |k: u8| if bits >> k & 1 == 1 { Outcome::Plus } else { Outcome::Zero };
            let t = CondensedTable::new([
                alloc::vec![o(0)],
                alloc::vec![o(1)],
                alloc::vec![o(2)],
                alloc::vec![o(3)],
            ])
            .unwrap();
            let r = ch_terms_condensed(&t).unwrap();
            let term = r.terms.unwrap()[0];
            assert!(term <= 0);
            max_term = max_term.max(term);
        }
        assert_eq!(max_term, 0);
    }

    #[test]
    fn detector_efficiencies_on_the_six_slot_run() {
        let report = efficiency(&fixtures::six_slot_single_pair());
        let aplus = report.stats(Detector::AlicePlus);
        assert_eq!((aplus.coincidences, aplus.singles), (2, 3));
        assert_eq!(report.eta(Detector::AlicePlus), Some(2.0 / 3.0));
    }

    #[test]
    fn ideal_table_has_unit_efficiency() {
        let report = efficiency(&fixtures::sica16());
        for d in Detector::ALL {
            assert_eq!(report.eta(d), Some(1.0));
        }
        assert_eq!(report.overall(), Some(1.0));
    }

    #[test]
    fn silent_partner_station_gives_zero_efficiency() {
        let schedule = SettingSchedule::fixed(Q2, 3);
        let recs = [
            (0, Outcome::Plus, Outcome::Zero),
            (1, Outcome::Plus, Outcome::Zero),
            (2, Outcome::Zero, Outcome::Zero),
        ];
        let t = RunTable::from_records(schedule, SettingLabels::default(), &recs).unwrap();
        let report = efficiency(&t);
        assert_eq!(report.eta(Detector::AlicePlus), Some(0.0));
        assert_eq!(report.eta(Detector::BobPlus), None);
    }

    #[test]
    fn bound_ratio_flags() {
        assert_eq!(efficiency_bound_ratio(4.0, 0.5).unwrap(), (2.0, BoundFlag::AtBound));
        assert_eq!(efficiency_bound_ratio(2.0, 1.0).unwrap(), (2.0, BoundFlag::AtBound));
        let (v, flag) = efficiency_bound_ratio(2.0 * core::f64::consts::SQRT_2, 1.0).unwrap();
        assert!((v - 2.828).abs() < 1e-3);
        assert_eq!(flag, BoundFlag::Above);
        assert!(matches!(efficiency_bound_ratio(2.0, 0.0), Err(Error::InvalidEfficiency(_))));
        assert_eq!(efficiency_bound_ratio(1.0, 1.0).unwrap().1, BoundFlag::Below);
    }
}
