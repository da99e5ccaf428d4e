//! Property tests for the structural invariants.

use proptest::collection::vec;
use proptest::prelude::*;

use claimgate::{
    congruence_classification, filter_eligible, quartiles, threshold_curve,
    ClassificationComparison, CongruenceAssumption, CorpusRecord, PairedClassificationOutcomes,
    Split, Task,
};

fn arb_record() -> impl Strategy<Value = CorpusRecord> {
    let split = prop_oneof![
        Just(Split::TrainTest),
        Just(Split::TrainValTest),
        Just(Split::CvPlusTest),
        Just(Split::CvOnly),
        Just(Split::NoneReported),
    ];
    let task = prop_oneof![Just(Task::Classification), Just(Task::Segmentation)];
    (
        "[a-z]{1,8}",
        task,
        split,
        proptest::option::of(2u64..5000),
        proptest::option::of(0.0f64..=1.0),
        proptest::option::of(0.0f64..=1.0),
    )
        .prop_map(|(paper_id, task, split, n_test, m1, m2)| {
            // Keep the rank-order invariant the ingester enforces.
            let (metric_a, metric_b) = match (m1, m2) {
                (Some(a), Some(b)) if b > a => (Some(b), Some(a)),
                pair => pair,
            };
            CorpusRecord {
                paper_id,
                task,
                split,
                n_test,
                metric_a,
                metric_b,
                sd_a: None,
                sd_b: None,
            }
        })
}

proptest! {
    #[test]
    fn threshold_curve_is_nonincreasing(
        estimates in vec(0.0f64..=0.5, 1..200),
        cuts in vec(0.001f64..=0.5, 1..12),
    ) {
        let mut thresholds = cuts;
        thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        thresholds.dedup();
        let curve = threshold_curve(&estimates, &thresholds).unwrap();
        for w in curve.cumulative_pct.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for &p in &curve.cumulative_pct {
            prop_assert!((0.0..=100.0).contains(&p));
        }
    }

    #[test]
    fn eligibility_partition_reconstructs_the_input(records in vec(arb_record(), 0..60)) {
        let (eligible, excluded) = filter_eligible(records.clone());
        prop_assert_eq!(eligible.len() + excluded.len(), records.len());
        // Order within each side follows the input, and every record lands on
        // exactly one side.
        let mut rebuilt = Vec::new();
        let mut e_iter = eligible.into_iter().peekable();
        let mut x_iter = excluded.into_iter().map(|x| x.record).peekable();
        for original in &records {
            if e_iter.peek() == Some(original) {
                rebuilt.push(e_iter.next().unwrap());
            } else {
                rebuilt.push(x_iter.next().unwrap());
            }
        }
        prop_assert_eq!(rebuilt, records);
    }

    #[test]
    fn clamp_lands_in_bounds_and_is_idempotent(
        n in 1u64..5000,
        acc_a in 0.0f64..=1.0,
        acc_b in 0.0f64..=1.0,
        assumed in 0.0f64..=1.0,
    ) {
        let (hi, lo) = if acc_a >= acc_b { (acc_a, acc_b) } else { (acc_b, acc_a) };
        let cmp = ClassificationComparison::new(n, hi, lo).unwrap();
        let (lower, upper) = cmp.congruence_bounds();
        let once = cmp.clamp_congruence(CongruenceAssumption::user_supplied(assumed));
        prop_assert!(once.value >= lower && once.value <= upper);
        let twice = cmp.clamp_congruence(once);
        prop_assert_eq!(once, twice);
        // Values already inside pass through untouched.
        if assumed >= lower && assumed <= upper {
            prop_assert_eq!(once.value, assumed);
            prop_assert!(!once.clamped);
        } else {
            prop_assert!(once.clamped);
        }
    }

    #[test]
    fn quartiles_are_ordered_and_permutation_invariant(values in vec(0.0f64..=1.0, 1..80)) {
        let (q1, med, q3) = quartiles(&values).unwrap();
        prop_assert!(q1 <= med && med <= q3);
        let mut reversed = values.clone();
        reversed.reverse();
        prop_assert_eq!(quartiles(&reversed).unwrap(), (q1, med, q3));
    }

    #[test]
    fn empirical_congruence_lies_within_the_implied_bounds(
        pairs in vec((any::<bool>(), any::<bool>()), 1..200),
    ) {
        let (a, b): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        let outcomes = PairedClassificationOutcomes::new(a, b).unwrap();
        let acc_a = outcomes.accuracy_a();
        let acc_b = outcomes.accuracy_b();
        let value = congruence_classification(&outcomes).value;
        let lower = (acc_a + acc_b - 1.0).max(0.0);
        let upper = acc_a.min(acc_b);
        prop_assert!(value >= lower - 1e-12 && value <= upper + 1e-12);
    }

    #[test]
    fn quartiles_are_monotone_under_pointwise_increase(
        values in vec(0.0f64..=1.0, 1..60),
        bump in 0.0f64..0.5,
    ) {
        let (q1, med, q3) = quartiles(&values).unwrap();
        let bumped: Vec<f64> = values.iter().map(|v| v + bump).collect();
        let (b1, b2, b3) = quartiles(&bumped).unwrap();
        prop_assert!(b1 >= q1 && b2 >= med && b3 >= q3);
    }
}
