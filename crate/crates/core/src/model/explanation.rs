use serde::{Deserialize, Serialize};

use crate::digest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubjectKind {
    InputData,
    OutputData,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Template,
    Llm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Template => "template",
            Method::Llm => "llm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u8>,
    pub created_at: String,
}

/// Generated text for one input query or one component output.
///
/// Built only through [`Explanation::from_template`] and [`Explanation::from_llm`], so a
/// template explanation never carries model provenance and an LLM explanation always does.
/// The id is a content hash of source, method, model and prompt and is stable across restarts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Explanation {
    id: String,
    subject_kind: SubjectKind,
    method: Method,
    text: String,
    provenance: Provenance,
    source_ref: String,
}

impl Explanation {
    pub fn from_template(subject_kind: SubjectKind, text: String, source_ref: String) -> Self {
        let id = digest::content_id(&[&source_ref, Method::Template.as_str()]);
        Self {
            id,
            subject_kind,
            method: Method::Template,
            text,
            provenance: Provenance { model_id: None, prompt_text: None, shots: None, created_at: now() },
            source_ref,
        }
    }

    pub fn from_llm(
        subject_kind: SubjectKind,
        text: String,
        source_ref: String,
        model_id: String,
        prompt_text: String,
        shots: u8,
    ) -> Self {
        let id = digest::content_id(&[&source_ref, Method::Llm.as_str(), &model_id, &prompt_text]);
        Self {
            id,
            subject_kind,
            method: Method::Llm,
            text,
            provenance: Provenance {
                model_id: Some(model_id),
                prompt_text: Some(prompt_text),
                shots: Some(shots),
                created_at: now(),
            },
            source_ref,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn subject_kind(&self) -> SubjectKind {
        self.subject_kind
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn source_ref(&self) -> &str {
        &self.source_ref
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_explanations_have_no_model_provenance() {
        let e = Explanation::from_template(SubjectKind::InputData, "t".into(), "q:1".into());
        assert_eq!(e.method(), Method::Template);
        assert!(e.provenance().model_id.is_none());
        assert!(e.provenance().prompt_text.is_none());
        assert!(e.provenance().shots.is_none());
    }

    #[test]
    fn ids_are_content_addressed() {
        let a = Explanation::from_template(SubjectKind::OutputData, "x".into(), "ts:1".into());
        let b = Explanation::from_template(SubjectKind::OutputData, "x".into(), "ts:1".into());
        assert_eq!(a.id(), b.id());
        let c = Explanation::from_llm(SubjectKind::OutputData, "x".into(), "ts:1".into(), "m".into(), "p".into(), 1);
        let d = Explanation::from_llm(SubjectKind::OutputData, "x".into(), "ts:1".into(), "m2".into(), "p".into(), 1);
        assert_ne!(a.id(), c.id());
        assert_ne!(c.id(), d.id());
        assert_eq!(c.provenance().model_id.as_deref(), Some("m"));
    }
}
