use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::ModelError;

pub const RATING_BASE: u8 = 3;
pub const RATING_FLOOR: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type", content = "index")]
pub enum DepreciationTarget {
    Prefix,
    Annotation(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DepreciationReason {
    WrongComponent,
    WrongCount,
    MissingValues,
    IncorrectValues,
}

impl DepreciationReason {
    fn applies_to(self, target: DepreciationTarget) -> bool {
        match self {
            DepreciationReason::WrongComponent | DepreciationReason::WrongCount => {
                target == DepreciationTarget::Prefix
            }
            DepreciationReason::MissingValues | DepreciationReason::IncorrectValues => {
                matches!(target, DepreciationTarget::Annotation(_))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Depreciation {
    pub target: DepreciationTarget,
    pub reason: DepreciationReason,
}

/// Prefix rating plus mean annotation rating, with the depreciations that produced them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QualityScore {
    prefix_rating: u8,
    annotation_ratings: Vec<u8>,
    #[serde(rename = "qE", with = "crate::model::ratio_string")]
    q_e: Ratio<i64>,
    depreciations: Vec<Depreciation>,
}

impl QualityScore {
    /// Derives every rating from the depreciation list: each rating starts at 3 and
    /// loses one point per depreciation on its target, never dropping below 1.
    pub fn from_depreciations(
        annotation_count: usize,
        depreciations: Vec<Depreciation>,
    ) -> Result<Self, ModelError> {
        if annotation_count == 0 {
            return Err(ModelError::EmptyAnnotationRatings);
        }
        let mut seen = std::collections::HashSet::new();
        for dep in &depreciations {
            if !dep.reason.applies_to(dep.target) {
                return Err(ModelError::InvalidDepreciation(format!("{:?} on {:?}", dep.reason, dep.target)));
            }
            if let DepreciationTarget::Annotation(i) = dep.target {
                if i >= annotation_count {
                    return Err(ModelError::InvalidDepreciation(format!("annotation index {i} out of range")));
                }
            }
            if !seen.insert(*dep) {
                return Err(ModelError::InvalidDepreciation(format!("duplicate {:?} on {:?}", dep.reason, dep.target)));
            }
        }
        let rating_for = |target: DepreciationTarget| {
            let hits = depreciations.iter().filter(|d| d.target == target).count() as u8;
            RATING_BASE.saturating_sub(hits).max(RATING_FLOOR)
        };
        let prefix_rating = rating_for(DepreciationTarget::Prefix);
        let annotation_ratings: Vec<u8> =
            (0..annotation_count).map(|i| rating_for(DepreciationTarget::Annotation(i))).collect();
        let q_e = crate::eval::q_e(prefix_rating, &annotation_ratings)
            .map_err(|e| ModelError::InvalidDepreciation(e.to_string()))?;
        Ok(Self { prefix_rating, annotation_ratings, q_e, depreciations })
    }

    pub fn prefix_rating(&self) -> u8 {
        self.prefix_rating
    }

    pub fn annotation_ratings(&self) -> &[u8] {
        &self.annotation_ratings
    }

    pub fn q_e(&self) -> Ratio<i64> {
        self.q_e
    }

    pub fn depreciations(&self) -> &[Depreciation] {
        &self.depreciations
    }

    pub fn annotation_count(&self) -> usize {
        self.annotation_ratings.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dep(target: DepreciationTarget, reason: DepreciationReason) -> Depreciation {
        Depreciation { target, reason }
    }

    #[test]
    fn textrazor_example_scores_four() {
        let score = QualityScore::from_depreciations(
            1,
            vec![
                dep(DepreciationTarget::Annotation(0), DepreciationReason::MissingValues),
                dep(DepreciationTarget::Annotation(0), DepreciationReason::IncorrectValues),
            ],
        )
        .unwrap();
        assert_eq!(score.prefix_rating(), 3);
        assert_eq!(score.annotation_ratings(), &[1]);
        assert_eq!(score.q_e(), Ratio::from_integer(4));
    }

    #[test]
    fn prefix_reasons_cannot_target_annotations() {
        let err = QualityScore::from_depreciations(
            1,
            vec![dep(DepreciationTarget::Annotation(0), DepreciationReason::WrongCount)],
        );
        assert!(err.is_err());
        let err = QualityScore::from_depreciations(
            1,
            vec![dep(DepreciationTarget::Prefix, DepreciationReason::MissingValues)],
        );
        assert!(err.is_err());
    }

    #[test]
    fn each_reason_counts_once_per_target() {
        let d = dep(DepreciationTarget::Annotation(0), DepreciationReason::MissingValues);
        assert!(QualityScore::from_depreciations(1, vec![d, d]).is_err());
    }

    #[test]
    fn no_annotations_is_an_error() {
        assert_eq!(QualityScore::from_depreciations(0, vec![]), Err(ModelError::EmptyAnnotationRatings));
    }

    #[test]
    fn serializes_qe_as_exact_rational() {
        let score = QualityScore::from_depreciations(
            3,
            vec![dep(DepreciationTarget::Annotation(1), DepreciationReason::MissingValues)],
        )
        .unwrap();
        let json = serde_json::to_value(&score).unwrap();
        assert_eq!(json["qE"], "17/3");
        let back: QualityScore = serde_json::from_value(json).unwrap();
        assert_eq!(back, score);
    }
}
