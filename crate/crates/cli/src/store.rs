//! Explanations and ratings in one append-only NDJSON file.
//!
//! The file is compacted when opened. Readers work on immutable snapshots;
//! writers are serialized behind one lock and publish a new snapshot per write.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use arc_swap::ArcSwap;
use explain_core::model::{Annotation, Explanation};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Correctness,
    Usefulness,
    Quality,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Correctness, Metric::Usefulness, Metric::Quality];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Correctness => "correctness",
            Metric::Usefulness => "usefulness",
            Metric::Quality => "quality",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RatingRecord {
    pub explanation_id: String,
    pub rater_id: String,
    pub metric: Metric,
    pub value: u8,
    pub submitted_at: String,
}

/// An explanation with the data it explains, kept for listing and evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoredExplanation {
    #[serde(flatten)]
    pub explanation: Explanation,
    /// Query text or N-Triples.
    pub raw_data: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    /// `O1`..`O4` or `I1`..`I6`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<Annotation>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "camelCase")]
enum Line {
    Explanation(Box<StoredExplanation>),
    Rating(RatingRecord),
}

type RatingKey = (String, String, Metric);

#[derive(Clone, Debug, Default)]
pub struct Snapshot {
    explanations: BTreeMap<String, Arc<StoredExplanation>>,
    /// Ids in first-stored order.
    order: Vec<String>,
    ratings: BTreeMap<RatingKey, RatingRecord>,
}

impl Snapshot {
    fn apply(&mut self, line: Line) {
        match line {
            Line::Explanation(e) => {
                let id = e.explanation.id().to_string();
                if self.explanations.insert(id.clone(), Arc::new(*e)).is_none() {
                    self.order.push(id);
                }
            }
            Line::Rating(r) => {
                self.ratings.insert((r.explanation_id.clone(), r.rater_id.clone(), r.metric), r);
            }
        }
    }

    pub fn explanation(&self, id: &str) -> Option<&Arc<StoredExplanation>> {
        self.explanations.get(id)
    }

    pub fn explanations(&self) -> impl Iterator<Item = &Arc<StoredExplanation>> {
        self.order.iter().filter_map(|id| self.explanations.get(id))
    }

    pub fn ratings(&self) -> impl Iterator<Item = &RatingRecord> {
        self.ratings.values()
    }

    fn lines(&self) -> Vec<Line> {
        let explanations = self.explanations().map(|e| Line::Explanation(Box::new((**e).clone())));
        explanations.chain(self.ratings.values().cloned().map(Line::Rating)).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("unknown explanation {0}")]
    UnknownExplanation(String),
}

pub struct Store {
    path: PathBuf,
    snapshot: ArcSwap<Snapshot>,
    writer: Mutex<Option<File>>,
}

impl Store {
    /// Opens or creates the store, dropping superseded records from the file.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        let io = |e: std::io::Error| StoreError::Io { path: path.to_path_buf(), message: e.to_string() };
        let mut snapshot = Snapshot::default();
        if path.exists() {
            for (n, line) in BufReader::new(File::open(path).map_err(io)?).lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Line>(&line) {
                    Ok(record) => snapshot.apply(record),
                    Err(e) => tracing::warn!("{}: skipping line {}: {e}", path.display(), n + 1),
                }
            }
        } else if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        let compacted = path.with_extension("compacting");
        {
            let mut out = File::create(&compacted).map_err(io)?;
            for line in snapshot.lines() {
                writeln!(out, "{}", serde_json::to_string(&line).expect("records serialize")).map_err(io)?;
            }
            out.sync_all().map_err(io)?;
        }
        std::fs::rename(&compacted, path).map_err(io)?;
        let writer = OpenOptions::new().append(true).open(path).map_err(io)?;
        Ok(Self { path: path.to_path_buf(), snapshot: ArcSwap::from_pointee(snapshot), writer: Mutex::new(Some(writer)) })
    }

    /// A store that keeps nothing beyond the process.
    pub fn in_memory() -> Self {
        Self { path: PathBuf::new(), snapshot: ArcSwap::from_pointee(Snapshot::default()), writer: Mutex::new(None) }
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.load_full()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append(&self, line: Line) -> Result<(), StoreError> {
        let text = serde_json::to_string(&line).expect("records serialize");
        let mut writer = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(file) = writer.as_mut() {
            writeln!(file, "{text}")
                .and_then(|_| file.flush())
                .map_err(|e| StoreError::Io { path: self.path.clone(), message: e.to_string() })?;
        }
        let mut next = (*self.snapshot.load_full()).clone();
        next.apply(line);
        self.snapshot.store(Arc::new(next));
        Ok(())
    }

    /// Stores the explanation unless one with the same id is already present.
    pub fn put_explanation(&self, stored: StoredExplanation) -> Result<Arc<StoredExplanation>, StoreError> {
        if let Some(existing) = self.snapshot().explanation(stored.explanation.id()) {
            return Ok(existing.clone());
        }
        let id = stored.explanation.id().to_string();
        self.append(Line::Explanation(Box::new(stored)))?;
        Ok(self.snapshot().explanation(&id).expect("just stored").clone())
    }

    /// Stores the rating, replacing an earlier one by the same rater for the same metric.
    pub fn put_rating(&self, rating: RatingRecord) -> Result<(), StoreError> {
        if self.snapshot().explanation(&rating.explanation_id).is_none() {
            return Err(StoreError::UnknownExplanation(rating.explanation_id));
        }
        self.append(Line::Rating(rating))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use explain_core::model::SubjectKind;

    fn stored(text: &str) -> StoredExplanation {
        StoredExplanation {
            explanation: Explanation::from_template(SubjectKind::InputData, text.into(), format!("q:{text}")),
            raw_data: "SELECT * WHERE {}".into(),
            graph: None,
            component: None,
            kind: Some("I1".into()),
            annotations: Vec::new(),
        }
    }

    fn rating(id: &str, value: u8) -> RatingRecord {
        RatingRecord { explanation_id: id.into(), rater_id: "r".into(), metric: Metric::Correctness, value, submitted_at: "t".into() }
    }

    #[test]
    fn overwrite_and_compaction() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.ndjson");
        let id = {
            let store = Store::open(&path).unwrap();
            let e = store.put_explanation(stored("a")).unwrap();
            store.put_explanation(stored("a")).unwrap();
            store.put_rating(rating(e.explanation.id(), 2)).unwrap();
            store.put_rating(rating(e.explanation.id(), 5)).unwrap();
            assert!(matches!(store.put_rating(rating("nope", 1)), Err(StoreError::UnknownExplanation(_))));
            assert_eq!(store.snapshot().ratings().count(), 1);
            e.explanation.id().to_string()
        };
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
        let store = Store::open(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
        let snapshot = store.snapshot();
        assert_eq!(snapshot.ratings().next().unwrap().value, 5);
        assert_eq!(snapshot.explanation(&id).unwrap().kind.as_deref(), Some("I1"));
    }

    #[test]
    fn torn_last_line_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.ndjson");
        Store::open(&path).unwrap().put_explanation(stored("a")).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        write!(f, "{{\"record\":\"rating\",\"expl").unwrap();
        drop(f);
        assert_eq!(Store::open(&path).unwrap().snapshot().explanations().count(), 1);
    }
}
