//! Embedded demonstration tables.
//!
//! Small frozen data sets exercised throughout the test suite and exported
//! by the CLI `fixtures` command, so every worked example ships with the
//! library instead of depending on external files.

use alloc::vec::Vec;

use crate::completion::FreeChoice;
use crate::outcome::{Outcome, Provenance};
use crate::schedule::{SettingLabels, SettingPair, SettingSchedule};
use crate::table::{block_table_from_quarters, outcomes, CompleteTable, CondensedTable, RunTable};

fn labels() -> SettingLabels {
    SettingLabels::default()
}

/// Six slots at one fixed setting pair with imperfect detection:
/// `a = (-1,+1,0,-1,+1,+1)`, `b = (-1,-1,+1,0,+1,0)`.
///
/// Coincidences sit at slots 0, 1 and 4; detector A+ has 3 singles and
/// 2 coincidences, so its efficiency is 2/3.
pub fn six_slot_single_pair() -> RunTable {
    let a = outcomes("-+0-++");
    let b = outcomes("--+0+0");
    let schedule = SettingSchedule::fixed(SettingPair::CANONICAL[1], 6);
    let records: Vec<_> = (0..6).map(|i| (i, a[i], b[i])).collect();
    RunTable::from_records(schedule, labels(), &records).expect("fixture data is well formed")
}

/// Sixteen-slot block run (four slots per pair) at ideal efficiency,
/// recorded *before* any reordering: the `a` series reads `(-,-,+,+)`
/// in the first quarter but `(-,+,-,+)` in the second.
///
/// Legitimately reordering the first quarter turns this into
/// [`sica16`]; its disjoint-factual CHSH value is exactly 2.
pub fn block16() -> RunTable {
    block_table_from_quarters(
        labels(),
        (&outcomes("--++"), &outcomes("++--")),
        (&outcomes("-+-+"), &outcomes("-+-+")),
        (&outcomes("-++-"), &outcomes("-+-+")),
        (&outcomes("-++-"), &outcomes("+-+-")),
    )
    .expect("fixture data is balanced")
}

/// Sixteen-slot block run satisfying the Sica condition: every measured
/// series appears identically in its two spans, so the table condenses.
pub fn sica16() -> RunTable {
    block_table_from_quarters(
        labels(),
        (&outcomes("-+-+"), &outcomes("+-+-")),
        (&outcomes("-+-+"), &outcomes("-+-+")),
        (&outcomes("-++-"), &outcomes("-+-+")),
        (&outcomes("-++-"), &outcomes("+-+-")),
    )
    .expect("fixture data is balanced")
}

/// The condensed form of [`sica16`]: four fully populated columns.
pub fn sica16_condensed() -> CondensedTable {
    CondensedTable::new([
        outcomes("-+-+"),
        outcomes("-+-+"),
        outcomes("-++-"),
        outcomes("+-+-"),
    ])
    .expect("fixture rows are equally long")
}

/// Two slots per pair with disjoint-factual CHSH value 4: the strongest
/// possible violation, and a table that admits no legitimate reordering
/// into Sica form (see the `b'` spans at slots 0-1 versus 6-7).
pub fn chsh4() -> RunTable {
    block_table_from_quarters(
        labels(),
        (&outcomes("-+"), &outcomes("+-")),
        (&outcomes("-+"), &outcomes("-+")),
        (&outcomes("-+"), &outcomes("-+")),
        (&outcomes("-+"), &outcomes("-+")),
    )
    .expect("fixture data is balanced")
}

/// A complete table drafted from [`chsh4`]: every never-performed cell
/// carries a counterfactual value chosen so the completed series satisfy
/// the Sica condition, while the factual cells still give CHSH = 4.
pub fn chsh4_completion() -> CompleteTable {
    use Provenance::{Counterfactual as C, Factual as F};
    let schedule = SettingSchedule::blocks(2);
    let values = [
        outcomes("-+-+-+-+"),
        outcomes("-+-+-+-+"),
        outcomes("+-+--+-+"),
        outcomes("+--++--+"),
    ];
    let provenance = [
        alloc::vec![F, F, F, F, C, C, C, C],
        alloc::vec![C, C, F, F, F, F, C, C],
        alloc::vec![C, C, C, C, F, F, F, F],
        alloc::vec![F, F, C, C, C, C, F, F],
    ];
    CompleteTable::new(schedule, labels(), values, provenance).expect("fixture grid is complete")
}

/// The free counterfactual blocks that reproduce [`chsh4_completion`]
/// through the completion constructor.
pub fn chsh4_choice() -> FreeChoice {
    FreeChoice::new(outcomes("-+"), outcomes("+-"))
}

/// The condensed form of [`chsh4_completion`]: a factual/counterfactual
/// mixture whose CHSH value is 2.
pub fn chsh4_condensed() -> CondensedTable {
    use Provenance::{Counterfactual as C, Factual as F};
    CondensedTable::with_provenance(
        [
            outcomes("-+-+"),
            outcomes("-+-+"),
            outcomes("+--+"),
            outcomes("+--+"),
        ],
        [
            alloc::vec![F, F, C, C],
            alloc::vec![C, C, F, F],
            alloc::vec![C, C, F, F],
            alloc::vec![F, F, C, C],
        ],
    )
    .expect("fixture rows are equally long")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Row;

    #[test]
    fn block16_reorders_to_sica16_profiles() {
        let before = block16();
        let after = sica16();
        for pair in SettingPair::CANONICAL {
            assert_eq!(
                before.quarter_profile(pair).unwrap(),
                after.quarter_profile(pair).unwrap(),
                "legitimate reordering must preserve {pair}",
            );
        }
    }

    #[test]
    fn completion_factual_cells_match_the_source_run() {
        let factual = chsh4_completion().factual_table();
        assert_eq!(factual, chsh4());
    }

    #[test]
    fn condensed_fixture_matches_complete_fixture() {
        let c = chsh4_completion().condense().unwrap();
        assert_eq!(c.row(Row::A), chsh4_condensed().row(Row::A));
        assert_eq!(c.row(Row::B), chsh4_condensed().row(Row::B));
        assert_eq!(c.row(Row::APrime), chsh4_condensed().row(Row::APrime));
        assert_eq!(c.row(Row::BPrime), chsh4_condensed().row(Row::BPrime));
    }
}
