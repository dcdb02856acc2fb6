//! Rule-based explanations: fixed texts for input queries and placeholder
//! templates for the annotations a component produced.
//!
//! A template file starts with `key: value` header lines (`id`, `kind`,
//! `forKind`, `locale`), then a `---` line, then the body. In the body `${name}`
//! is a placeholder and `&{ ... }` a conditional segment that is emitted only
//! when every placeholder inside it is bound.

mod engine;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnnotationKind, InputQueryKey};
use crate::rdf::RdfError;

pub use engine::{explain_input, explain_output, input_source_ref, item_bindings, output_source_ref, TemplateEngine};

/// Names a template body may refer to.
pub const BINDING_NAMES: &[&str] = &[
    "component",
    "numberOfAnnotations",
    "graph",
    "annotationType",
    "annotatedAt",
    "score",
    "hasBody",
    "start",
    "end",
    "questionId",
    "annotationId",
];

/// Placeholder values; a missing entry or `None` means the value is absent.
pub type Bindings = BTreeMap<String, Option<String>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template {id}: {message}")]
    Syntax { id: String, message: String },
    #[error("template {id}: unknown placeholder ${{{name}}}")]
    UnknownPlaceholder { id: String, name: String },
    #[error("no value bound for ${{{0}}}")]
    MissingBinding(String),
    #[error("the data contains no typed annotation")]
    NoAnnotations,
    #[error("no item template for annotation kind {0}")]
    UnknownAnnotationKind(AnnotationKind),
    #[error("no input template for query key {0}")]
    UnknownKey(InputQueryKey),
    #[error("template {0} is not loaded")]
    UnknownTemplate(String),
    #[error(transparent)]
    Rdf(#[from] RdfError),
    #[error("{0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateKind {
    InputFixed,
    OutputPrefix,
    OutputItem,
}

impl FromStr for TemplateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "InputFixed" => Ok(Self::InputFixed),
            "OutputPrefix" => Ok(Self::OutputPrefix),
            "OutputItem" => Ok(Self::OutputItem),
            other => Err(format!("unknown template kind {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Segment {
    Piece(Piece),
    Conditional(Vec<Piece>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    id: String,
    kind: TemplateKind,
    for_kind: Option<AnnotationKind>,
    locale: String,
    body: String,
    segments: Vec<Segment>,
}

impl Template {
    pub fn new(
        id: impl Into<String>,
        kind: TemplateKind,
        for_kind: Option<AnnotationKind>,
        body: impl Into<String>,
    ) -> Result<Self, TemplateError> {
        let id = id.into();
        let body = body.into();
        if kind == TemplateKind::OutputItem && for_kind.is_none() {
            return Err(TemplateError::Syntax { id, message: "an OutputItem template needs forKind".into() });
        }
        let segments = parse_body(&id, &body)?;
        Ok(Self { id, kind, for_kind, locale: "en".into(), body, segments })
    }

    /// Reads the header-plus-body file format.
    pub fn parse_file(text: &str) -> Result<Self, TemplateError> {
        let syntax = |message: String| TemplateError::Syntax { id: "<file>".into(), message };
        let (header, body) = text
            .split_once("\n---\n")
            .or_else(|| text.strip_suffix("\n---").map(|h| (h, "")))
            .ok_or_else(|| syntax("missing '---' separator".into()))?;
        let mut fields = BTreeMap::new();
        for line in header.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line.split_once(':').ok_or_else(|| syntax(format!("bad header line {line:?}")))?;
            fields.insert(key.trim(), value.trim());
        }
        let id = *fields.get("id").ok_or_else(|| syntax("header lacks id".into()))?;
        let kind: TemplateKind = fields
            .get("kind")
            .ok_or_else(|| syntax(format!("{id}: header lacks kind")))?
            .parse()
            .map_err(syntax)?;
        let for_kind = fields
            .get("forKind")
            .map(|k| k.parse::<AnnotationKind>())
            .transpose()
            .map_err(|e| syntax(e.to_string()))?;
        let body = body.strip_suffix('\n').unwrap_or(body);
        let mut template = Self::new(id, kind, for_kind, body)?;
        if let Some(locale) = fields.get("locale") {
            template.locale = locale.to_string();
        }
        Ok(template)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> TemplateKind {
        self.kind
    }

    pub fn for_kind(&self) -> Option<AnnotationKind> {
        self.for_kind
    }

    pub fn locale(&self) -> &str {
        &self.locale
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// Names used by the body, in order of first use.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut names: Vec<&str> = Vec::new();
        for segment in &self.segments {
            let pieces: &[Piece] = match segment {
                Segment::Piece(p) => std::slice::from_ref(p),
                Segment::Conditional(ps) => ps,
            };
            for piece in pieces {
                if let Piece::Slot(name) = piece {
                    if !names.contains(&name.as_str()) {
                        names.push(name);
                    }
                }
            }
        }
        names
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "id: {}", self.id)?;
        writeln!(f, "kind: {:?}", self.kind)?;
        if let Some(kind) = self.for_kind {
            writeln!(f, "forKind: {}", kind.code())?;
        }
        writeln!(f, "locale: {}", self.locale)?;
        writeln!(f, "---")?;
        writeln!(f, "{}", self.body)
    }
}

fn parse_body(id: &str, body: &str) -> Result<Vec<Segment>, TemplateError> {
    let syntax = |message: &str| TemplateError::Syntax { id: id.to_string(), message: message.to_string() };
    let mut segments = Vec::new();
    let mut text = String::new();
    let mut conditional: Option<Vec<Piece>> = None;
    let mut chars = body.chars().peekable();

    let flush = |text: &mut String, conditional: &mut Option<Vec<Piece>>, segments: &mut Vec<Segment>| {
        if text.is_empty() {
            return;
        }
        let piece = Piece::Text(std::mem::take(text));
        match conditional {
            Some(pieces) => pieces.push(piece),
            None => segments.push(Segment::Piece(piece)),
        }
    };

    while let Some(c) = chars.next() {
        match c {
            '$' if chars.peek() == Some(&'{') => {
                chars.next();
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(c) if c.is_ascii_alphanumeric() || c == '_' => name.push(c),
                        Some(_) => return Err(syntax("invalid character in placeholder name")),
                        None => return Err(syntax("unterminated placeholder")),
                    }
                }
                if !BINDING_NAMES.contains(&name.as_str()) {
                    return Err(TemplateError::UnknownPlaceholder { id: id.to_string(), name });
                }
                flush(&mut text, &mut conditional, &mut segments);
                match &mut conditional {
                    Some(pieces) => pieces.push(Piece::Slot(name)),
                    None => segments.push(Segment::Piece(Piece::Slot(name))),
                }
            }
            '&' if chars.peek() == Some(&'{') => {
                chars.next();
                if conditional.is_some() {
                    return Err(syntax("conditional segments cannot be nested"));
                }
                flush(&mut text, &mut conditional, &mut segments);
                conditional = Some(Vec::new());
            }
            '}' if conditional.is_some() => {
                flush(&mut text, &mut conditional, &mut segments);
                segments.push(Segment::Conditional(conditional.take().unwrap_or_default()));
            }
            c => text.push(c),
        }
    }
    if conditional.is_some() {
        return Err(syntax("unterminated conditional segment"));
    }
    flush(&mut text, &mut conditional, &mut segments);
    Ok(segments)
}

fn lookup<'b>(bindings: &'b Bindings, name: &str) -> Option<&'b str> {
    bindings.get(name).and_then(|v| v.as_deref())
}

/// Fills the placeholders; conditional segments with an absent value are dropped whole.
pub fn render_template(template: &Template, bindings: &Bindings) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.body.len());
    for segment in &template.segments {
        match segment {
            Segment::Piece(Piece::Text(t)) => out.push_str(t),
            Segment::Piece(Piece::Slot(name)) => {
                out.push_str(lookup(bindings, name).ok_or_else(|| TemplateError::MissingBinding(name.clone()))?)
            }
            Segment::Conditional(pieces) => {
                let complete = pieces.iter().all(|p| match p {
                    Piece::Slot(name) => lookup(bindings, name).is_some(),
                    Piece::Text(_) => true,
                });
                if complete {
                    for piece in pieces {
                        match piece {
                            Piece::Text(t) => out.push_str(t),
                            Piece::Slot(name) => out.push_str(lookup(bindings, name).unwrap_or_default()),
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
