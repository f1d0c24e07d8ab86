//! Error measures for the two pipelines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One test-set prediction. For classification `actual`/`predicted` hold
/// decision levels; `recognized` is false when no rule fired.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub actual: f64,
    pub predicted: f64,
    pub recognized: bool,
}

impl PredictionRecord {
    pub fn regression(actual: f64, predicted: f64) -> Self {
        Self {
            actual,
            predicted,
            recognized: true,
        }
    }
}

/// `sqrt(Σ (predicted - actual)² / m)`.
pub fn rmse(records: &[PredictionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyData);
    }
    let sum: f64 = records.iter().map(|r| (r.predicted - r.actual).powi(2)).sum();
    Ok((sum / records.len() as f64).sqrt())
}

/// Mean squared level difference, where an unrecognized object contributes
/// exactly 1 whatever label it was given.
pub fn error_measure(records: &[PredictionRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyData);
    }
    let sum: f64 = records
        .iter()
        .map(|r| {
            if r.recognized {
                (r.actual - r.predicted).powi(2)
            } else {
                1.0
            }
        })
        .sum();
    Ok(sum / records.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_fixtures() {
        let exact: Vec<_> = (0..5).map(|i| PredictionRecord::regression(i as f64, i as f64)).collect();
        assert_eq!(rmse(&exact).unwrap(), 0.0);
        let r = [PredictionRecord::regression(0.0, 3.0), PredictionRecord::regression(0.0, 4.0)];
        assert!((rmse(&r).unwrap() - 12.5f64.sqrt()).abs() < 1e-12);
        assert!(rmse(&[]).is_err());
    }

    #[test]
    fn em_fixtures() {
        let rec = |a: f64, p: f64, ok: bool| PredictionRecord {
            actual: a,
            predicted: p,
            recognized: ok,
        };
        let correct = [rec(1.0, 1.0, true), rec(3.0, 3.0, true)];
        assert_eq!(error_measure(&correct).unwrap(), 0.0);

        let lost: Vec<_> = (0..19).map(|i| rec((i % 3 + 1) as f64, 4.0, false)).collect();
        assert_eq!(error_measure(&lost).unwrap(), 1.0);

        let mixed = [rec(1.0, 1.0, true), rec(2.0, 3.0, true), rec(3.0, 3.0, true)];
        assert!((error_measure(&mixed).unwrap() - 1.0 / 3.0).abs() < 1e-12);

        // fallback label 4 against actual 1 would add 9; the policy adds 1
        assert_eq!(error_measure(&[rec(1.0, 4.0, false), rec(2.0, 2.0, true)]).unwrap(), 0.5);
        assert!(error_measure(&[]).is_err());
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn records() -> impl Strategy<Value = Vec<PredictionRecord>> {
        prop::collection::vec(
            (1u32..=4, 1u32..=4, any::<bool>()).prop_map(|(a, p, ok)| PredictionRecord {
                actual: a as f64,
                predicted: p as f64,
                recognized: ok,
            }),
            1..40,
        )
    }

    proptest! {
        #[test]
        fn measures_ignore_order_and_duplication(mut recs in records(), seed in any::<u64>()) {
            let r0 = rmse(&recs).unwrap();
            let e0 = error_measure(&recs).unwrap();
            prop_assert!(r0 >= 0.0);
            prop_assert!(e0 <= 9.0);

            let doubled: Vec<_> = recs.iter().chain(recs.iter()).copied().collect();
            prop_assert!((rmse(&doubled).unwrap() - r0).abs() < 1e-12);
            prop_assert!((error_measure(&doubled).unwrap() - e0).abs() < 1e-12);

            let k = (seed as usize) % recs.len();
            recs.rotate_left(k);
            recs.reverse();
            prop_assert!((rmse(&recs).unwrap() - r0).abs() < 1e-12);
            prop_assert!((error_measure(&recs).unwrap() - e0).abs() < 1e-12);
        }

        #[test]
        fn rmse_zero_iff_exact(recs in records()) {
            let exact = recs.iter().all(|r| r.actual == r.predicted);
            prop_assert_eq!(rmse(&recs).unwrap() == 0.0, exact);
        }
    }
}
