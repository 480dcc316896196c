use std::cmp::Ordering;

use super::SelectionMode;
use crate::error::{Error, Result};

#[inline]
fn rank_cmp(values: &[f64], a: usize, b: usize) -> Ordering {
    values[a].total_cmp(&values[b]).then(a.cmp(&b))
}

/// Indices chosen by rank-based selection, ties going to the lower index.
///
/// `Best` and `LthDegree` yield one index; `MuAverage(μ)` yields the μ
/// smallest, ordered by rank.
pub fn select(values: &[f64], mode: SelectionMode) -> Result<Vec<usize>> {
    let lambda = values.len();
    mode.validate(lambda)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("selection needs finite objective values"));
    }
    let mut idx: Vec<usize> = (0..lambda).collect();
    match mode {
        SelectionMode::Best => {
            let best = idx
                .into_iter()
                .min_by(|&a, &b| rank_cmp(values, a, b))
                .expect("lambda >= 1");
            Ok(vec![best])
        }
        SelectionMode::LthDegree(ell) => {
            let (_, nth, _) = idx.select_nth_unstable_by(ell - 1, |&a, &b| rank_cmp(values, a, b));
            Ok(vec![*nth])
        }
        SelectionMode::MuAverage(mu) => {
            if mu < lambda {
                idx.select_nth_unstable_by(mu - 1, |&a, &b| rank_cmp(values, a, b));
            }
            idx.truncate(mu);
            idx.sort_unstable_by(|&a, &b| rank_cmp(values, a, b));
            Ok(idx)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(select(&[3.2, 0.5, 7.1], SelectionMode::Best).unwrap(), vec![1]);
        assert_eq!(select(&[5.0, 1.0, 3.0], SelectionMode::LthDegree(2)).unwrap(), vec![2]);
        assert_eq!(select(&[5.0, 1.0, 3.0], SelectionMode::MuAverage(2)).unwrap(), vec![1, 2]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(select(&[2.0, 1.0, 1.0, 1.0], SelectionMode::Best).unwrap(), vec![1]);
        assert_eq!(select(&[2.0, 1.0, 1.0, 1.0], SelectionMode::LthDegree(2)).unwrap(), vec![2]);
        assert_eq!(select(&[1.0, 1.0, 1.0], SelectionMode::MuAverage(2)).unwrap(), vec![0, 1]);
    }

    #[test]
    fn rejects_out_of_range_degree() {
        assert!(select(&[1.0, 2.0], SelectionMode::LthDegree(3)).is_err());
        assert!(select(&[1.0, 2.0], SelectionMode::MuAverage(3)).is_err());
        assert!(select(&[1.0, 2.0], SelectionMode::LthDegree(0)).is_err());
        assert!(select(&[], SelectionMode::Best).is_err());
        assert!(select(&[1.0, f64::NAN], SelectionMode::Best).is_err());
    }

    fn modes(lambda: usize) -> Vec<SelectionMode> {
        let mut m = vec![SelectionMode::Best];
        for k in [1, 2, lambda / 2, lambda] {
            if (1..=lambda).contains(&k) {
                m.push(SelectionMode::LthDegree(k));
                m.push(SelectionMode::MuAverage(k));
            }
        }
        m
    }

    proptest! {
        #[test]
        fn invariant_under_monotone_transforms(values in proptest::collection::vec(-50.0f64..50.0, 1..40)) {
            let transformed: Vec<f64> = values.iter().map(|v| (0.1 * v).exp() * 3.0 + v.powi(3)).collect();
            for mode in modes(values.len()) {
                prop_assert_eq!(select(&values, mode).unwrap(), select(&transformed, mode).unwrap());
            }
        }

        #[test]
        fn matches_full_sort(values in proptest::collection::vec(-5.0f64..5.0, 1..30)) {
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            let lambda = values.len();
            prop_assert_eq!(select(&values, SelectionMode::Best).unwrap(), vec![order[0]]);
            for k in 1..=lambda {
                prop_assert_eq!(select(&values, SelectionMode::LthDegree(k)).unwrap(), vec![order[k - 1]]);
                prop_assert_eq!(select(&values, SelectionMode::MuAverage(k)).unwrap(), order[..k].to_vec());
            }
        }
    }
}
