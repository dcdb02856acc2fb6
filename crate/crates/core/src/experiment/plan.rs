use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::model::{AnnotationKind, InputQueryKey, SubjectKind};
use crate::prompt::{kind_combinations, ExampleKind, MAX_SHOTS};

fn default_trials() -> usize {
    50
}

fn default_subject() -> SubjectKind {
    SubjectKind::OutputData
}

/// An experiment configuration as read from a plan file. Relative paths are
/// resolved against the plan file's directory by [`ExperimentPlan::load`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentPlan {
    pub shots: u8,
    #[serde(default = "default_subject")]
    pub subject_kind: SubjectKind,
    pub model_ids: Vec<String>,
    /// Defaults to every unordered selection with repetition of `shots` kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example_kind_combos: Option<Vec<Vec<ExampleKind>>>,
    /// Defaults to every kind of the subject.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_kinds: Vec<ExampleKind>,
    #[serde(default = "default_trials")]
    pub trials_per_cell: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub examples_path: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

pub fn subject_kinds(subject: SubjectKind) -> Vec<ExampleKind> {
    match subject {
        SubjectKind::OutputData => AnnotationKind::ALL.into_iter().map(ExampleKind::from).collect(),
        SubjectKind::InputData => InputQueryKey::ALL.into_iter().map(ExampleKind::from).collect(),
    }
}

impl ExperimentPlan {
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        let mut plan: Self =
            serde_json::from_str(&text).map_err(|e| ExperimentError::InvalidPlan(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut plan.dataset_path, &mut plan.corpus_path, &mut plan.examples_path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |m: String| Err(ExperimentError::InvalidPlan(m));
        if self.shots as usize > MAX_SHOTS {
            return invalid(format!("shots must be at most {MAX_SHOTS}"));
        }
        if self.trials_per_cell == 0 {
            return invalid("trialsPerCell must be at least 1".into());
        }
        if self.model_ids.is_empty() || self.model_ids.iter().any(|m| m.trim().is_empty()) {
            return invalid("modelIds must name at least one model".into());
        }
        let allowed = subject_kinds(self.subject_kind);
        for kind in self.test_kinds.iter().chain(self.combos().iter().flatten()) {
            if !allowed.contains(kind) {
                return invalid(format!("kind {kind} does not belong to {:?}", self.subject_kind));
            }
        }
        if let Some(combo) = self.combos().iter().find(|c| c.len() != self.shots as usize) {
            return invalid(format!("combo {combo:?} does not have {} kind(s)", self.shots));
        }
        Ok(())
    }

    pub fn combos(&self) -> Vec<Vec<ExampleKind>> {
        self.example_kind_combos
            .clone()
            .unwrap_or_else(|| kind_combinations(&subject_kinds(self.subject_kind), self.shots as usize))
    }

    pub fn tests(&self) -> Vec<ExampleKind> {
        if self.test_kinds.is_empty() {
            subject_kinds(self.subject_kind)
        } else {
            self.test_kinds.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(json: &str) -> Result<ExperimentPlan, ExperimentError> {
        let plan: ExperimentPlan = serde_json::from_str(json).map_err(|e| ExperimentError::InvalidPlan(e.to_string()))?;
        plan.validate().map(|_| plan)
    }

    #[test]
    fn defaults() {
        let p = plan(r#"{"shots": 2, "modelIds": ["m"]}"#).unwrap();
        assert_eq!(p.trials_per_cell, 50);
        assert_eq!(p.combos().len(), 10);
        assert_eq!(p.tests().len(), 4);
        let p = plan(r#"{"shots": 0, "subjectKind": "InputData", "modelIds": ["m"]}"#).unwrap();
        assert_eq!(p.combos(), vec![Vec::<ExampleKind>::new()]);
        assert_eq!(p.tests().len(), 6);
    }

    #[test]
    fn invalid_plans() {
        for bad in [
            r#"{"shots": 3, "modelIds": ["m"]}"#,
            r#"{"shots": 1, "modelIds": []}"#,
            r#"{"shots": 1, "modelIds": ["m"], "trialsPerCell": 0}"#,
            r#"{"shots": 1, "modelIds": ["m"], "testKinds": ["I1"]}"#,
            r#"{"shots": 1, "modelIds": ["m"], "exampleKindCombos": [["O1", "O2"]]}"#,
            r#"{"shots": 1, "modelIds": ["m"], "typo": 1}"#,
        ] {
            assert!(matches!(plan(bad), Err(ExperimentError::InvalidPlan(_))), "{bad}");
        }
    }

    #[test]
    fn relative_paths_follow_the_plan_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plan.json");
        std::fs::write(&path, r#"{"shots": 1, "modelIds": ["m"], "corpusPath": "corpus"}"#).unwrap();
        let p = ExperimentPlan::load(&path).unwrap();
        assert_eq!(p.corpus_path.unwrap(), dir.path().join("corpus"));
    }
}
