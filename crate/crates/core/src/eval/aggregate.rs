use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::pearson;
use crate::model::{AnnotationKind, QualityScore};

/// One scored (or failed) trial, the unit that [`aggregate`] groups into cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoredTrial {
    pub example_kinds: Vec<AnnotationKind>,
    pub test_kind: AnnotationKind,
    pub model_id: String,
    /// `None` when the trial failed and is excluded from the means.
    pub score: Option<QualityScore>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentResult {
    pub example_kinds: Vec<AnnotationKind>,
    pub test_kind: AnnotationKind,
    pub model_id: String,
    pub trial_scores: Vec<QualityScore>,
    #[serde(rename = "meanQE", with = "crate::model::ratio_string::option")]
    pub mean_q_e: Option<BigRational>,
    pub pearson_r: Option<f64>,
    pub trial_count: usize,
    pub excluded: usize,
}

/// Mean over the cells of one row of a model's matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Marginal {
    pub model_id: String,
    pub example_kinds: Vec<AnnotationKind>,
    #[serde(with = "crate::model::ratio_string::option")]
    pub mean: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMatrix {
    pub cells: Vec<ExperimentResult>,
    pub marginals: Vec<Marginal>,
}

impl ExperimentMatrix {
    pub fn cell(&self, model_id: &str, example_kinds: &[AnnotationKind], test_kind: AnnotationKind) -> Option<&ExperimentResult> {
        self.cells
            .iter()
            .find(|c| c.model_id == model_id && c.example_kinds == example_kinds && c.test_kind == test_kind)
    }
}

fn mean(values: impl IntoIterator<Item = BigRational>) -> Option<BigRational> {
    let (sum, n) = values.into_iter().fold((BigRational::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / BigRational::from_integer(BigInt::from(n)))
}

fn to_big(r: num_rational::Ratio<i64>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Per-cell means and correlations plus per-row marginals, in a stable order
/// independent of the order of `trials`.
pub fn aggregate(trials: &[ScoredTrial]) -> ExperimentMatrix {
    let mut groups: BTreeMap<(String, Vec<AnnotationKind>, AnnotationKind), Vec<&ScoredTrial>> = BTreeMap::new();
    for trial in trials {
        groups
            .entry((trial.model_id.clone(), trial.example_kinds.clone(), trial.test_kind))
            .or_default()
            .push(trial);
    }

    let mut cells = Vec::with_capacity(groups.len());
    for ((model_id, example_kinds, test_kind), group) in groups {
        let mut scores: Vec<QualityScore> = group.iter().filter_map(|t| t.score.clone()).collect();
        scores.sort_by(|a, b| a.q_e().cmp(&b.q_e()).then(a.annotation_count().cmp(&b.annotation_count())));
        let excluded = group.len() - scores.len();
        let q: Vec<_> = scores.iter().map(QualityScore::q_e).collect();
        let counts: Vec<_> = scores.iter().map(|s| num_rational::Ratio::from_integer(s.annotation_count() as i64)).collect();
        cells.push(ExperimentResult {
            mean_q_e: mean(q.iter().copied().map(to_big)),
            pearson_r: pearson(&q, &counts).ok(),
            trial_count: scores.len(),
            excluded,
            trial_scores: scores,
            example_kinds,
            test_kind,
            model_id,
        });
    }

    let mut rows: BTreeMap<(String, Vec<AnnotationKind>), Vec<BigRational>> = BTreeMap::new();
    for cell in &cells {
        let row = rows.entry((cell.model_id.clone(), cell.example_kinds.clone())).or_default();
        row.extend(cell.mean_q_e.clone());
    }
    let marginals = rows
        .into_iter()
        .map(|((model_id, example_kinds), means)| Marginal { model_id, example_kinds, mean: mean(means) })
        .collect();
    ExperimentMatrix { cells, marginals }
}

/// Fixed-point rendering with half-away-from-zero rounding, computed exactly.
pub fn format_decimal(value: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = (value * BigRational::from_integer(scale.clone())).round().to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    let sign = if negative { "-" } else { "" };
    if places == 0 { format!("{sign}{int}") } else { format!("{sign}{int}.{frac}") }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Depreciation, DepreciationReason, DepreciationTarget};
    use AnnotationKind::*;

    fn score(count: usize, missing: &[usize]) -> QualityScore {
        let deps = missing
            .iter()
            .map(|&i| Depreciation { target: DepreciationTarget::Annotation(i), reason: DepreciationReason::MissingValues })
            .collect();
        QualityScore::from_depreciations(count, deps).unwrap()
    }

    fn trial(example: AnnotationKind, test: AnnotationKind, score: Option<QualityScore>) -> ScoredTrial {
        ScoredTrial { example_kinds: vec![example], test_kind: test, model_id: "m".into(), score }
    }

    #[test]
    fn identical_scores() {
        let trials: Vec<_> = (0..3).map(|_| trial(Instance, Instance, Some(score(1, &[0])))).collect();
        let m = aggregate(&trials);
        assert_eq!(m.cells.len(), 1);
        assert_eq!(m.cells[0].mean_q_e, Some(BigRational::from_integer(5.into())));
        assert_eq!(m.cells[0].pearson_r, None);
    }

    #[test]
    fn exclusions_and_marginals() {
        let trials = vec![
            trial(Instance, Instance, Some(score(1, &[]))),
            trial(Instance, Instance, None),
            trial(Instance, Relation, Some(score(2, &[0]))),
        ];
        let m = aggregate(&trials);
        let cell = m.cell("m", &[Instance], Instance).unwrap();
        assert_eq!((cell.trial_count, cell.excluded), (1, 1));
        // (6 + 5.5) / 2
        assert_eq!(m.marginals[0].mean, Some(BigRational::new(23.into(), 4.into())));
    }

    #[test]
    fn decimal_formatting() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(format_decimal(&r(2152, 400), 2), "5.38");
        assert_eq!(format_decimal(&r(17, 3), 2), "5.67");
        assert_eq!(format_decimal(&r(1, 200), 2), "0.01");
        assert_eq!(format_decimal(&r(-1, 3), 2), "-0.33");
        assert_eq!(format_decimal(&r(6, 1), 2), "6.00");
        assert_eq!(format_decimal(&r(5, 2), 0), "3");
    }
}
