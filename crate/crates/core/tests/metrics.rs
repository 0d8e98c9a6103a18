mod support;

use fetqc_core::eval::metrics::{classification_metrics, regression_metrics};
use proptest::prelude::*;
use support::criteria;

#[test]
fn metrics_match_oracles() {
    let detail = criteria::metric_oracles(300, 0x3e7).unwrap_or_else(|e| panic!("{e}"));
    eprintln!("{detail}");
}

#[test]
fn simulated_raters_recover_predicted_agreement() {
    let detail = criteria::rater_agreement(0xa9).unwrap_or_else(|e| panic!("{e}"));
    eprintln!("{detail}");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scores_stay_in_range(y in prop::collection::vec(0u8..2, 2..50), seed in any::<u64>()) {
        let score: Vec<f64> = y.iter().enumerate().map(|(i, _)| ((seed >> (i % 60)) & 7) as f64 / 7.0).collect();
        let m = classification_metrics(&y, &score, 0.5).unwrap();
        for v in [m.weighted_f1, m.precision, m.recall] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if let Some(a) = m.auc {
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn perfect_predictions_score_perfectly(truth in prop::collection::vec(0.0f64..4.0, 2..50)) {
        let m = regression_metrics(&truth, &truth).unwrap();
        prop_assert_eq!(m.mae, 0.0);
        if let Some(r2) = m.r2 {
            prop_assert_eq!(r2, 1.0);
        }
    }
}
