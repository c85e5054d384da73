use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    AveragePrecision,
    Auc,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::AveragePrecision => "average_precision",
            MetricKind::Auc => "auc",
        }
    }
}

/// Evaluates `scores` against binary `labels`.
///
/// Accuracy thresholds scores at 0.5. Average precision walks the scores in
/// descending order, ties kept in input order. AUC is the Mann-Whitney
/// statistic with half credit for tied scores.
pub fn metric(scores: &[f64], labels: &[bool], which: MetricKind) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::param(
            "scores",
            format!("{} scores for {} labels", scores.len(), labels.len()),
        ));
    }
    if scores.is_empty() {
        return Err(Error::MetricUndefined {
            metric: which.name(),
            reason: "no items".into(),
        });
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::param("scores", format!("score {s} outside [0, 1]")));
    }
    let positives = labels.iter().filter(|l| **l).count();
    let negatives = labels.len() - positives;
    if which != MetricKind::Accuracy && (positives == 0 || negatives == 0) {
        return Err(Error::MetricUndefined {
            metric: which.name(),
            reason: "labels contain a single class".into(),
        });
    }
    Ok(match which {
        MetricKind::Accuracy => {
            let correct = scores
                .iter()
                .zip(labels)
                .filter(|(s, l)| (**s >= 0.5) == **l)
                .count();
            correct as f64 / scores.len() as f64
        }
        MetricKind::AveragePrecision => {
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
            let mut hits = 0usize;
            let mut sum = 0.0;
            for (rank, &idx) in order.iter().enumerate() {
                if labels[idx] {
                    hits += 1;
                    sum += hits as f64 / (rank + 1) as f64;
                }
            }
            sum / positives as f64
        }
        MetricKind::Auc => {
            let ranks = crate::stats::ranks(scores);
            let pos_rank_sum: f64 = ranks
                .iter()
                .zip(labels)
                .filter(|(_, l)| **l)
                .map(|(r, _)| r)
                .sum();
            let p = positives as f64;
            (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let mut credit = 0.0;
        let mut pairs = 0.0;
        for (sp, _) in scores.iter().zip(labels).filter(|(_, l)| **l) {
            for (sn, _) in scores.iter().zip(labels).filter(|(_, l)| !**l) {
                pairs += 1.0;
                credit += if sp > sn { 1.0 } else if sp == sn { 0.5 } else { 0.0 };
            }
        }
        credit / pairs
    }

    #[test]
    fn metric_examples() {
        let labels = [true, false, true, false];
        let perfect = [1.0, 0.0, 1.0, 0.0];
        assert_eq!(metric(&perfect, &labels, MetricKind::Accuracy).unwrap(), 1.0);
        assert_eq!(metric(&perfect, &labels, MetricKind::Auc).unwrap(), 1.0);
        assert_eq!(metric(&perfect, &labels, MetricKind::AveragePrecision).unwrap(), 1.0);
        assert_eq!(metric(&[0.3; 4], &labels, MetricKind::Auc).unwrap(), 0.5);
        let acc = metric(&[1.0, 0.0, 1.0, 0.0], &[true, false, false, true], MetricKind::Accuracy).unwrap();
        assert_eq!(acc, 0.5);
    }

    #[test]
    fn average_precision_uses_stable_tie_order() {
        // ranking: 0.9(+) 0.5(-) 0.5(+) 0.1(-) -> (1/1 + 2/3) / 2
        let ap = metric(&[0.9, 0.5, 0.5, 0.1], &[true, false, true, false], MetricKind::AveragePrecision).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(
            metric(&[1.0, 0.0], &[true, true], MetricKind::Auc),
            Err(Error::MetricUndefined { .. })
        ));
        assert!(metric(&[1.0, 0.0], &[true, true], MetricKind::Accuracy).is_ok());
        assert!(metric(&[1.0], &[true, false], MetricKind::Accuracy).is_err());
        assert!(metric(&[1.2, 0.0], &[true, false], MetricKind::Accuracy).is_err());
        assert!(metric(&[], &[], MetricKind::Accuracy).is_err());
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_count(
            items in proptest::collection::vec((0u8..5, any::<bool>()), 2..40)
        ) {
            let scores: Vec<f64> = items.iter().map(|(s, _)| f64::from(*s) / 4.0).collect();
            let labels: Vec<bool> = items.iter().map(|(_, l)| *l).collect();
            prop_assume!(labels.iter().any(|l| *l) && labels.iter().any(|l| !*l));
            let auc = metric(&scores, &labels, MetricKind::Auc).unwrap();
            prop_assert!((auc - brute_auc(&scores, &labels)).abs() < 1e-12);
            let ap = metric(&scores, &labels, MetricKind::AveragePrecision).unwrap();
            prop_assert!((0.0..=1.0).contains(&ap));
        }
    }
}
