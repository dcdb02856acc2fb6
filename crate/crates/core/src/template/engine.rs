use std::collections::BTreeMap;
use std::path::Path;

use once_cell::sync::Lazy;

use super::{render_template, Bindings, Template, TemplateError, TemplateKind};
use crate::digest::content_id;
use crate::model::{Annotation, Explanation, InputQueryKey, Iri, SubjectKind, TripleSet};
use crate::rdf::{group_annotations, to_ntriples, RdfError};
use crate::sparql::{InputQueryRecord, QueryRegistry};

const BUNDLED: &[&str] = &[
    include_str!("../../assets/templates/input-i1.tpl"),
    include_str!("../../assets/templates/input-i2.tpl"),
    include_str!("../../assets/templates/input-i3.tpl"),
    include_str!("../../assets/templates/input-i4.tpl"),
    include_str!("../../assets/templates/input-i5.tpl"),
    include_str!("../../assets/templates/input-i6.tpl"),
    include_str!("../../assets/templates/output-prefix.tpl"),
    include_str!("../../assets/templates/output-item-o1.tpl"),
    include_str!("../../assets/templates/output-item-o2.tpl"),
    include_str!("../../assets/templates/output-item-o3.tpl"),
    include_str!("../../assets/templates/output-item-o4.tpl"),
];

static STANDARD: Lazy<TemplateEngine> = Lazy::new(|| {
    let templates = BUNDLED.iter().map(|text| Template::parse_file(text).expect("bundled template parses"));
    TemplateEngine::from_templates(templates, QueryRegistry::standard().clone())
});

/// Loaded templates plus the query registry that maps keys to input templates.
#[derive(Clone, Debug)]
pub struct TemplateEngine {
    templates: BTreeMap<String, Template>,
    queries: QueryRegistry,
}

/// Values an item template can use for one annotation.
pub fn item_bindings(annotation: &Annotation) -> Bindings {
    let mut b = Bindings::new();
    b.insert("annotationId".into(), Some(annotation.id.clone()));
    b.insert("annotatedAt".into(), annotation.annotated_at.clone());
    b.insert("score".into(), annotation.score.as_ref().map(|s| s.lexical().to_string()));
    b.insert("hasBody".into(), annotation.body.as_ref().map(|t| t.value().to_string()));
    b.insert("start".into(), annotation.selector.map(|s| s.start.to_string()));
    b.insert("end".into(), annotation.selector.map(|s| s.end.to_string()));
    b.insert("questionId".into(), annotation.target_question.as_ref().map(Iri::to_string));
    b
}

impl TemplateEngine {
    pub fn standard() -> &'static TemplateEngine {
        &STANDARD
    }

    pub fn from_templates(templates: impl IntoIterator<Item = Template>, queries: QueryRegistry) -> Self {
        let templates = templates.into_iter().map(|t| (t.id().to_string(), t)).collect();
        Self { templates, queries }
    }

    /// The bundled templates, with every `*.tpl` file in `dir` added or replacing one of the same id.
    pub fn with_directory(dir: &Path) -> Result<Self, TemplateError> {
        let mut engine = Self::standard().clone();
        let io = |e: std::io::Error| TemplateError::Io(format!("{}: {e}", dir.display()));
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "tpl"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path).map_err(io)?;
            let template = Template::parse_file(&text).map_err(|e| match e {
                TemplateError::Syntax { message, .. } => {
                    TemplateError::Syntax { id: path.display().to_string(), message }
                }
                other => other,
            })?;
            engine.templates.insert(template.id().to_string(), template);
        }
        Ok(engine)
    }

    pub fn template(&self, id: &str) -> Option<&Template> {
        self.templates.get(id)
    }

    pub fn templates(&self) -> impl Iterator<Item = &Template> {
        self.templates.values()
    }

    pub fn queries(&self) -> &QueryRegistry {
        &self.queries
    }

    pub fn input_text(&self, key: InputQueryKey) -> Result<String, TemplateError> {
        let entry = self.queries.entry(key).ok_or(TemplateError::UnknownKey(key))?;
        let template = self
            .templates
            .get(&entry.template_id)
            .filter(|t| t.kind() == TemplateKind::InputFixed)
            .ok_or(TemplateError::UnknownKey(key))?;
        render_template(template, &Bindings::new())
    }

    pub fn explain_input(&self, record: &InputQueryRecord) -> Result<Explanation, TemplateError> {
        let text = self.input_text(record.key)?;
        Ok(Explanation::from_template(SubjectKind::InputData, text, input_source_ref(record)))
    }

    fn prefix_template(&self) -> Result<&Template, TemplateError> {
        self.templates
            .get("output-prefix")
            .filter(|t| t.kind() == TemplateKind::OutputPrefix)
            .or_else(|| self.templates.values().find(|t| t.kind() == TemplateKind::OutputPrefix))
            .ok_or_else(|| TemplateError::UnknownTemplate("output-prefix".into()))
    }

    /// Renders one annotation's list item, with `bindings` in place of the annotation's own values.
    pub fn render_item_with(&self, annotation: &Annotation, bindings: &Bindings) -> Result<String, TemplateError> {
        let template = self
            .templates
            .values()
            .find(|t| t.kind() == TemplateKind::OutputItem && t.for_kind() == Some(annotation.kind))
            .ok_or(TemplateError::UnknownAnnotationKind(annotation.kind))?;
        Ok(render_template(template, bindings)?.trim().to_string())
    }

    pub fn render_item(&self, annotation: &Annotation) -> Result<String, TemplateError> {
        self.render_item_with(annotation, &item_bindings(annotation))
    }

    /// Prefix followed by the numbered items, `" 1. ... 2. ..."`.
    pub fn render_output(&self, component: &Iri, graph: &Iri, annotations: &[Annotation]) -> Result<String, TemplateError> {
        let items = annotations.iter().map(|a| self.render_item(a)).collect::<Result<Vec<_>, _>>()?;
        self.compose_output(component, graph, annotations, &items)
    }

    /// Joins already rendered items under the prefix.
    pub fn compose_output(
        &self,
        component: &Iri,
        graph: &Iri,
        annotations: &[Annotation],
        items: &[String],
    ) -> Result<String, TemplateError> {
        if annotations.is_empty() {
            return Err(TemplateError::NoAnnotations);
        }
        let mut type_names: Vec<&str> = Vec::new();
        for a in annotations {
            if !type_names.contains(&a.kind.class_name()) {
                type_names.push(a.kind.class_name());
            }
        }
        let mut bindings = Bindings::new();
        bindings.insert("component".into(), Some(component.to_string()));
        bindings.insert("numberOfAnnotations".into(), Some(annotations.len().to_string()));
        bindings.insert("graph".into(), Some(graph.to_string()));
        bindings.insert("annotationType".into(), Some(type_names.join(", ")));
        let mut text = render_template(self.prefix_template()?, &bindings)?;
        for (i, item) in items.iter().enumerate() {
            text.push_str(&format!(" {}. {}", i + 1, item));
        }
        Ok(text)
    }

    pub fn explain_output(&self, set: &TripleSet) -> Result<Explanation, TemplateError> {
        let grouping = group_annotations(set).map_err(|e| match e {
            RdfError::MissingType => TemplateError::NoAnnotations,
            other => TemplateError::Rdf(other),
        })?;
        let text = self.render_output(set.component(), set.graph(), &grouping.annotations)?;
        Ok(Explanation::from_template(SubjectKind::OutputData, text, output_source_ref(set)))
    }
}

pub fn input_source_ref(record: &InputQueryRecord) -> String {
    format!("q:{}", content_id(&[&record.normalized_text]))
}

/// Content id of a triple set, independent of triple order.
pub fn output_source_ref(set: &TripleSet) -> String {
    let mut lines: Vec<&str> = Vec::new();
    let text = to_ntriples(set.triples());
    lines.extend(text.lines());
    lines.sort_unstable();
    lines.dedup();
    format!("ts:{}", content_id(&[set.graph().as_str(), set.component().as_str(), &lines.join("\n")]))
}

/// Fixed input explanation from the bundled templates.
pub fn explain_input(record: &InputQueryRecord) -> Result<Explanation, TemplateError> {
    TemplateEngine::standard().explain_input(record)
}

/// Output explanation from the bundled templates.
pub fn explain_output(set: &TripleSet) -> Result<Explanation, TemplateError> {
    TemplateEngine::standard().explain_output(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Method;
    use crate::rdf::parse_ntriples;

    const TEXTRAZOR: &str = r#"
0.4794646229033659 rdf:type qa:AnnotationOfSpotInstance .
0.4794646229033659 oa:annotatedBy urn:qanary:TextRazor .
0.4794646229033659 oa:annotatedAt "2023-10-18T07:57:57.82089Z"^^xsd:dateTime .
0.4794646229033659 oa:hasTarget dd4 .
dd4 oa:hasSelector b2d .
b2d oa:start 10 .
b2d oa:end 16 .
"#;

    fn set(text: &str) -> TripleSet {
        TripleSet::new(
            Iri::new("urn:graph:g").unwrap(),
            Iri::new("urn:qanary:TextRazor").unwrap(),
            parse_ntriples(text).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn spot_instance_output() {
        let e = explain_output(&set(TEXTRAZOR)).unwrap();
        assert_eq!(
            e.text(),
            "The component urn:qanary:TextRazor has added 1 annotation(s) to the graph and each annotation from type \
             AnnotationOfSpotInstance found the following entities from the origin question: 1. at \
             2023-10-18T07:57:57.82089Z starting from position 10 and ending at position 16"
        );
        assert_eq!(e.method(), Method::Template);
        assert!(e.source_ref().starts_with("ts:"));
        assert_eq!(e.id(), explain_output(&set(TEXTRAZOR)).unwrap().id());
    }

    #[test]
    fn source_ref_ignores_order() {
        let reversed: String = TEXTRAZOR.lines().rev().map(|l| format!("{l}\n")).collect();
        assert_eq!(output_source_ref(&set(TEXTRAZOR)), output_source_ref(&set(&reversed)));
    }

    #[test]
    fn no_annotations() {
        assert_eq!(explain_output(&set("x oa:start 1 .")), Err(TemplateError::NoAnnotations));
    }

    #[test]
    fn input_texts_are_fixed() {
        let entry = QueryRegistry::standard().entry(InputQueryKey::I1).unwrap();
        let record = QueryRegistry::standard().classify(&entry.text).unwrap();
        let e = explain_input(&record).unwrap();
        assert!(e.text().starts_with("All Annotations of the type AnnotationOfInstance has been requested"));
        assert_eq!(e.text(), explain_input(&record).unwrap().text());
        for key in InputQueryKey::ALL {
            let text = TemplateEngine::standard().input_text(key).unwrap();
            assert!(!text.contains("${") && !text.ends_with('\n'));
        }
    }

    #[test]
    fn unknown_key_without_template() {
        let engine = TemplateEngine::from_templates(Vec::new(), QueryRegistry::standard().clone());
        assert_eq!(engine.input_text(InputQueryKey::I3), Err(TemplateError::UnknownKey(InputQueryKey::I3)));
        let a = group_annotations(&set(TEXTRAZOR)).unwrap().annotations.remove(0);
        assert_eq!(engine.render_item(&a), Err(TemplateError::UnknownAnnotationKind(a.kind)));
    }

    #[test]
    fn directory_overrides() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("mine.tpl"),
            "id: output-item-o2\nkind: OutputItem\nforKind: O2\n---\nspan ${start}-${end}\n",
        )
        .unwrap();
        let engine = TemplateEngine::with_directory(dir.path()).unwrap();
        let e = engine.explain_output(&set(TEXTRAZOR)).unwrap();
        assert!(e.text().ends_with("1. span 10-16"));
    }
}
