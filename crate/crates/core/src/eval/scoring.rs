//! Heuristic value matching between an explanation text and the annotations it describes.

use std::collections::BTreeMap;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::model::{
    Annotation, Depreciation, DepreciationReason, DepreciationTarget, Iri, QualityScore, Term, RATING_BASE,
    RATING_FLOOR,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckField {
    Component,
    Count,
    AnnotatedAt,
    Score,
    Start,
    End,
    Body,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckStatus {
    Found,
    Missing,
    Incorrect,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueCheck {
    pub field: CheckField,
    pub expected: String,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stated: Option<String>,
}

/// A rating with the per-field evidence behind it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rated {
    pub rating: u8,
    pub checks: Vec<ValueCheck>,
}

impl Rated {
    fn from_checks(checks: Vec<ValueCheck>) -> Self {
        let missing = checks.iter().any(|c| c.status == CheckStatus::Missing);
        let incorrect = checks.iter().any(|c| c.status == CheckStatus::Incorrect);
        let rating = RATING_BASE.saturating_sub(u8::from(missing) + u8::from(incorrect)).max(RATING_FLOOR);
        Self { rating, checks }
    }

    pub fn has(&self, status: CheckStatus) -> bool {
        self.checks.iter().any(|c| c.status == status)
    }
}

/// Full scoring of one explanation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Evaluation {
    pub score: QualityScore,
    pub prefix: Rated,
    pub annotations: Vec<Rated>,
}

#[derive(Deserialize)]
struct CueLexicon {
    window: usize,
    count_window: usize,
    count: Vec<String>,
    score: Vec<String>,
    start: Vec<String>,
    end: Vec<String>,
    span: Vec<String>,
    body: Vec<String>,
    numbers: BTreeMap<String, u64>,
}

static CUES: Lazy<CueLexicon> =
    Lazy::new(|| toml::from_str(include_str!("../../assets/cues.toml")).expect("bundled cue lexicon parses"));

static NUMBER: Lazy<Regex> = Lazy::new(|| Regex::new(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$").unwrap());
static RANGE: Lazy<Regex> = Lazy::new(|| Regex::new(r"^(\d+)[-–](\d+)$").unwrap());
static CURIE: Lazy<Regex> = Lazy::new(|| Regex::new(r"^[A-Za-z][\w.-]*:[^\s:/]+$").unwrap());
static TIMESTAMP: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"\d{4}-\d{2}-\d{2}(?:[T ]\d{2}:\d{2}(?::\d{2}(?:\.\d+)?)?)?(?:Z|[+-]\d{2}:?\d{2})?").unwrap()
});
static QUERY: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)\b(select|ask|construct|describe)\b.*\bwhere\b").unwrap());
static COMPONENT: Lazy<Regex> = Lazy::new(|| Regex::new(r"urn:qanary:[\w.-]+").unwrap());

struct Token {
    clean: String,
    lower: String,
}

fn tokenize(text: &str) -> Vec<Token> {
    const EDGES: &[char] = &[
        '`', '"', '\'', '(', ')', '[', ']', '{', '}', '<', '>', ',', ';', '.', '!', '?', '*', '“', '”', '‘', '’',
    ];
    text.split_whitespace()
        .map(|raw| {
            let clean = raw.trim_matches(EDGES).trim_end_matches(':').trim_matches(EDGES).to_string();
            let lower = clean.to_lowercase();
            Token { clean, lower }
        })
        .filter(|t| !t.clean.is_empty())
        .collect()
}

/// Splits off the numbered list: returns the text before `1.` and the text of each item.
///
/// Markers must run 1, 2, 3, ...; of two consecutive candidates (`16. 2. at`) the later one wins.
pub fn split_items(text: &str) -> (String, Vec<String>) {
    let words: Vec<&str> = text.split_whitespace().collect();
    let mut markers = Vec::new();
    let mut expected = 1;
    let mut i = 0;
    while i < words.len() {
        let marker = format!("{expected}.");
        if words[i] == marker && i + 1 < words.len() && words[i + 1] != marker {
            markers.push(i);
            expected += 1;
        }
        i += 1;
    }
    let join = |range: &[&str]| range.join(" ");
    let Some(&first) = markers.first() else { return (join(&words), Vec::new()) };
    let mut items = Vec::with_capacity(markers.len());
    for (n, &at) in markers.iter().enumerate() {
        let stop = markers.get(n + 1).copied().unwrap_or(words.len());
        items.push(join(&words[at + 1..stop]));
    }
    (join(&words[..first]), items)
}

fn without_markers(text: &str) -> String {
    let (prefix, items) = split_items(text);
    std::iter::once(prefix).chain(items).filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" ")
}

fn strip_scheme(value: &str) -> &str {
    match value.find("://") {
        Some(idx) => &value[idx + 3..],
        None => value.strip_prefix("urn:").unwrap_or(value),
    }
}

fn contains_word(haystack: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    let is_word = |c: char| c.is_alphanumeric() || c == '-' || c == '_';
    haystack.match_indices(needle).any(|(idx, _)| {
        let before = haystack[..idx].chars().next_back();
        let after = haystack[idx + needle.len()..].chars().next();
        !before.is_some_and(is_word) && !after.is_some_and(is_word)
    })
}

fn trim_number(lexical: &str) -> String {
    let s = lexical.trim().trim_start_matches('+');
    if s.contains('.') && !s.contains(['e', 'E']) {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t.is_empty() || t == "-" { "0".to_string() } else { t.to_string() }
    } else {
        s.to_string()
    }
}

fn significant_digits(lexical: &str) -> usize {
    lexical.chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count()
}

/// Numbers agree after trimming trailing zeros, or when the stated value is the
/// expected one rounded to at least four significant digits.
pub fn numbers_match(stated: &str, expected: &str) -> bool {
    let (s, e) = (trim_number(stated), trim_number(expected));
    if s == e {
        return true;
    }
    let (Ok(sv), Ok(ev)) = (s.parse::<f64>(), e.parse::<f64>()) else { return false };
    if sv == ev {
        return true;
    }
    if significant_digits(&s) < 4 || s.contains(['e', 'E']) {
        return false;
    }
    let places = s.split_once('.').map_or(0, |(_, frac)| frac.len());
    trim_number(&format!("{ev:.places$}")) == s
}

fn is_number(token: &str) -> bool {
    NUMBER.is_match(token)
}

fn is_iri_like(token: &str) -> bool {
    token.contains("://") || token.starts_with("urn:") || (CURIE.is_match(token) && !TIMESTAMP.is_match(token))
}

fn iri_matches(stated: &str, expected: &Iri) -> bool {
    let exp = strip_scheme(expected.as_str());
    let st = strip_scheme(stated);
    if st == exp || format!("{st})") == exp || st.trim_end_matches('/') == exp.trim_end_matches('/') {
        return true;
    }
    // A CURIE is accepted when its local part names the same resource.
    !stated.contains("://")
        && !stated.starts_with("urn:")
        && stated.split_once(':').is_some_and(|(_, local)| local == expected.local_name())
}

fn timestamp_key(value: &str) -> String {
    value.replace(' ', "T")
}

/// First value of the wanted class in the window after each cue.
fn window_values<'t>(
    tokens: &'t [Token],
    cues: &[String],
    window: usize,
    accept: impl Fn(&str) -> bool,
) -> Vec<&'t str> {
    let mut out = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if !cues.contains(&token.lower) {
            continue;
        }
        if let Some(hit) = tokens[i + 1..].iter().take(window).find(|t| accept(&t.clean)) {
            out.push(hit.clean.as_str());
        }
    }
    out
}

/// Found if the own value was stated; otherwise Incorrect if something was stated
/// that fits neither this annotation nor a sibling; otherwise Missing or NotApplicable.
fn resolve(
    field: CheckField,
    expected: Option<String>,
    stated: &[String],
    own: impl Fn(&str) -> bool,
    sibling: impl Fn(&str) -> bool,
    found_elsewhere: bool,
) -> ValueCheck {
    let hit = stated.iter().find(|s| own(s));
    let stray = stated.iter().find(|s| !own(s) && !sibling(s));
    let (status, shown) = match (&expected, hit, stray) {
        (Some(_), Some(h), _) => (CheckStatus::Found, Some(h.clone())),
        (Some(_), None, _) if found_elsewhere => (CheckStatus::Found, None),
        (_, _, Some(s)) => (CheckStatus::Incorrect, Some(s.clone())),
        (Some(_), None, None) => (CheckStatus::Missing, None),
        (None, _, None) => (CheckStatus::NotApplicable, None),
    };
    ValueCheck { field, expected: expected.unwrap_or_default(), status, stated: shown }
}

/// Rates the prefix: one point off when the component is not recognized, one when the count is not.
pub fn score_prefix(text: &str, component: &Iri, expected_count: usize) -> Rated {
    let cues = &*CUES;
    let normalized = text.replace("(s)", "s");
    let lower = normalized.to_lowercase();

    let full = component.as_str().to_lowercase();
    let local = component.local_name().to_lowercase();
    let named = contains_word(&lower, &full) || contains_word(&lower, &local);
    let other = COMPONENT
        .find_iter(&normalized)
        .map(|m| m.as_str().trim_end_matches('.').to_string())
        .find(|m| !m.eq_ignore_ascii_case(component.as_str()));
    let component_check = ValueCheck {
        field: CheckField::Component,
        expected: component.to_string(),
        status: match (named, &other) {
            (true, _) => CheckStatus::Found,
            (false, Some(_)) => CheckStatus::Incorrect,
            (false, None) => CheckStatus::Missing,
        },
        stated: if named { Some(component.to_string()) } else { other },
    };

    let tokens = tokenize(&normalized);
    let mut stated = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if !cues.count.contains(&token.lower) {
            continue;
        }
        let value = tokens[i.saturating_sub(cues.count_window)..i].iter().rev().find_map(|t| {
            t.clean.parse::<u64>().ok().or_else(|| cues.numbers.get(&t.lower).copied())
        });
        stated.extend(value);
    }
    let expected = expected_count as u64;
    let count_check = ValueCheck {
        field: CheckField::Count,
        expected: expected.to_string(),
        status: if stated.contains(&expected) {
            CheckStatus::Found
        } else if stated.is_empty() {
            CheckStatus::Missing
        } else {
            CheckStatus::Incorrect
        },
        stated: stated.iter().find(|&&n| n == expected).or(stated.first()).map(u64::to_string),
    };
    let checks = vec![component_check, count_check];
    let misses = checks.iter().filter(|c| c.status != CheckStatus::Found).count() as u8;
    Rated { rating: RATING_BASE.saturating_sub(misses).max(RATING_FLOOR), checks }
}

/// Rates one annotation: one point off when any expected value is missing, one
/// when any stated value is wrong, each counted once.
pub fn score_annotation(text: &str, annotation: &Annotation) -> Rated {
    check_annotation(text, annotation, &[])
}

fn check_annotation(text: &str, ann: &Annotation, siblings: &[&Annotation]) -> Rated {
    let cues = &*CUES;
    let mut work = without_markers(text);

    // Literal bodies are matched on whitespace-normalized text and masked so the
    // numbers and IRIs inside a query do not pass for other values.
    let literal_body = |a: &Annotation| match &a.body {
        Some(Term::Literal(lit)) => Some(lit.lexical.split_whitespace().collect::<Vec<_>>().join(" ")),
        _ => None,
    };
    let own_literal = literal_body(ann);
    let literal_found = own_literal.as_ref().is_some_and(|l| !l.is_empty() && work.contains(l.as_str()));
    for lit in std::iter::once(ann).chain(siblings.iter().copied()).filter_map(literal_body) {
        if !lit.is_empty() {
            work = work.replace(&lit, " ");
        }
    }
    let query_stated: Vec<String> = QUERY.find_iter(&work).map(|m| m.as_str().to_string()).collect();

    let ts_found = ann.annotated_at.as_ref().is_some_and(|ts| {
        work.contains(ts.as_str()) || work.contains(&ts.replacen('T', " ", 1))
    });
    let timestamps: Vec<String> = TIMESTAMP.find_iter(&work).map(|m| m.as_str().to_string()).collect();
    let work = TIMESTAMP.replace_all(&work, " ").into_owned();
    let tokens = tokenize(&work);

    let ts_relates = |stated: &str, expected: &str| {
        let (s, e) = (timestamp_key(stated), timestamp_key(expected));
        e == s || e.starts_with(&s)
    };
    let mut checks = Vec::with_capacity(5);
    checks.push(resolve(
        CheckField::AnnotatedAt,
        ann.annotated_at.clone(),
        &timestamps,
        |s| ann.annotated_at.as_deref().is_some_and(|e| timestamp_key(s) == timestamp_key(e)),
        |s| {
            ann.annotated_at.as_deref().is_some_and(|e| ts_relates(s, e))
                || siblings.iter().any(|o| o.annotated_at.as_deref().is_some_and(|e| ts_relates(s, e)))
        },
        ts_found,
    ));

    let owned = |v: Vec<&str>| v.into_iter().map(str::to_string).collect::<Vec<_>>();
    let scores = owned(window_values(&tokens, &cues.score, cues.window, is_number));
    let score_of = |a: &Annotation| a.score.as_ref().map(|d| d.lexical().to_string());
    checks.push(resolve(
        CheckField::Score,
        score_of(ann),
        &scores,
        |s| score_of(ann).is_some_and(|e| numbers_match(s, &e)),
        |s| siblings.iter().any(|o| score_of(o).is_some_and(|e| numbers_match(s, &e))),
        false,
    ));

    let integer = |t: &str| t.parse::<u64>().is_ok();
    let range = |t: &str| RANGE.is_match(t);
    let range_part = |t: &str, idx: usize| RANGE.captures(t).map(|c| c[idx].to_string());
    let mut starts = Vec::new();
    let mut ends = Vec::new();
    for value in window_values(&tokens, &cues.start, cues.window, |t| integer(t) || range(t)) {
        starts.push(range_part(value, 1).unwrap_or_else(|| value.to_string()));
    }
    for value in window_values(&tokens, &cues.end, cues.window, |t| integer(t) || range(t)) {
        ends.push(range_part(value, 2).unwrap_or_else(|| value.to_string()));
    }
    for value in window_values(&tokens, &cues.span, cues.window, range) {
        starts.extend(range_part(value, 1));
        ends.extend(range_part(value, 2));
    }
    let start_of = |a: &Annotation| a.selector.map(|s| s.start.to_string());
    let end_of = |a: &Annotation| a.selector.map(|s| s.end.to_string());
    checks.push(resolve(
        CheckField::Start,
        start_of(ann),
        &starts,
        |s| start_of(ann).as_deref() == Some(s),
        |s| siblings.iter().any(|o| start_of(o).as_deref() == Some(s)),
        false,
    ));
    checks.push(resolve(
        CheckField::End,
        end_of(ann),
        &ends,
        |s| end_of(ann).as_deref() == Some(s),
        |s| siblings.iter().any(|o| end_of(o).as_deref() == Some(s)),
        false,
    ));

    let ignored: Vec<&Iri> = std::iter::once(ann)
        .chain(siblings.iter().copied())
        .flat_map(|a| [Some(&a.annotated_by), a.target_question.as_ref()])
        .flatten()
        .collect();
    let body_iri = |a: &Annotation| a.body.as_ref().and_then(Term::as_iri).cloned();
    let mut bodies = owned(window_values(&tokens, &cues.body, cues.window, is_iri_like));
    bodies.retain(|s| !ignored.iter().any(|i| iri_matches(s, i)));
    let body_check = match &ann.body {
        Some(Term::Literal(lit)) => {
            let stated = if literal_found { Vec::new() } else { query_stated };
            let mut check = resolve(CheckField::Body, Some(lit.lexical.clone()), &stated, |_| false, |_| false, literal_found);
            if check.status == CheckStatus::Found {
                check.stated = Some(lit.lexical.clone());
            }
            check
        }
        body => {
            let own_iri = body_iri(ann);
            let found = own_iri
                .as_ref()
                .is_some_and(|iri| work.contains(iri.as_str()) || work.contains(strip_scheme(iri.as_str())));
            resolve(
                CheckField::Body,
                body.as_ref().map(|b| b.value().to_string()),
                &bodies,
                |s| own_iri.as_ref().is_some_and(|i| iri_matches(s, i)),
                |s| siblings.iter().any(|o| body_iri(o).is_some_and(|i| iri_matches(s, &i))),
                found,
            )
        }
    };
    checks.push(body_check);
    Rated::from_checks(checks)
}

/// Scores a whole explanation against the annotations of the data it explains.
///
/// When the numbered items line up one-to-one with the annotations each item is
/// checked against its annotation; otherwise every annotation is checked against
/// the whole text, tolerating values that belong to one of its siblings.
pub fn score_explanation(text: &str, component: &Iri, annotations: &[Annotation]) -> Result<Evaluation, EvalError> {
    if annotations.is_empty() {
        return Err(EvalError::EmptyAnnotationList);
    }
    let (prefix_text, items) = split_items(text);
    let prefix = score_prefix(if items.is_empty() { text } else { &prefix_text }, component, annotations.len());

    let rated: Vec<Rated> = if items.len() == annotations.len() {
        annotations.iter().zip(&items).map(|(a, item)| check_annotation(item, a, &[])).collect()
    } else {
        annotations
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let siblings: Vec<&Annotation> =
                    annotations.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o).collect();
                check_annotation(text, a, &siblings)
            })
            .collect()
    };

    let mut deps = Vec::new();
    let prefix_dep = |field, reason| {
        prefix
            .checks
            .iter()
            .any(|c| c.field == field && c.status != CheckStatus::Found)
            .then_some(Depreciation { target: DepreciationTarget::Prefix, reason })
    };
    deps.extend(prefix_dep(CheckField::Component, DepreciationReason::WrongComponent));
    deps.extend(prefix_dep(CheckField::Count, DepreciationReason::WrongCount));
    for (i, r) in rated.iter().enumerate() {
        let target = DepreciationTarget::Annotation(i);
        if r.has(CheckStatus::Missing) {
            deps.push(Depreciation { target, reason: DepreciationReason::MissingValues });
        }
        if r.has(CheckStatus::Incorrect) {
            deps.push(Depreciation { target, reason: DepreciationReason::IncorrectValues });
        }
    }
    let score = QualityScore::from_depreciations(annotations.len(), deps).map_err(|e| EvalError::Model(e.to_string()))?;
    Ok(Evaluation { score, prefix, annotations: rated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnnotationKind, Decimal, Literal, Selector};

    const GENERATIVE: &str = "The component `urn:qanary:TextRazor` has added 1 annotation(s) to the graph: \
        1. on `2023-10-18T07:57:57.82089Z` with a confidence of `0.4794646229033659` and the resource \
        `http://qanary/#result0.4794646229033659`.";

    fn textrazor() -> Annotation {
        Annotation {
            id: "0.4794646229033659".into(),
            kind: AnnotationKind::SpotInstance,
            annotated_by: Iri::new("urn:qanary:TextRazor").unwrap(),
            annotated_at: Some("2023-10-18T07:57:57.82089Z".into()),
            score: None,
            target_question: None,
            selector: Some(Selector { start: 10, end: 16 }),
            body: None,
        }
    }

    fn status(rated: &Rated, field: CheckField) -> CheckStatus {
        rated.checks.iter().find(|c| c.field == field).unwrap().status
    }

    #[test]
    fn generative_example() {
        let component = Iri::new("urn:qanary:TextRazor").unwrap();
        assert_eq!(score_prefix(GENERATIVE, &component, 1).rating, 3);
        let rated = score_annotation(GENERATIVE, &textrazor());
        assert_eq!(rated.rating, 1);
        assert_eq!(status(&rated, CheckField::AnnotatedAt), CheckStatus::Found);
        assert_eq!(status(&rated, CheckField::Score), CheckStatus::Incorrect);
        assert_eq!(status(&rated, CheckField::Body), CheckStatus::Incorrect);
        assert_eq!(status(&rated, CheckField::Start), CheckStatus::Missing);
        let eval = score_explanation(GENERATIVE, &component, &[textrazor()]).unwrap();
        assert_eq!(eval.score.q_e(), num_rational::Ratio::from_integer(4));
    }

    #[test]
    fn prefix_depreciations() {
        let component = Iri::new("urn:qanary:TextRazor").unwrap();
        let wrong_count = GENERATIVE.replace("added 1 annotation", "added 2 annotation");
        assert_eq!(score_prefix(&wrong_count, &component, 1).rating, 2);
        let both = wrong_count.replace("TextRazor", "TagMeNER");
        let rated = score_prefix(&both, &component, 1);
        assert_eq!(rated.rating, 1);
        assert_eq!(status(&rated, CheckField::Component), CheckStatus::Incorrect);
        assert_eq!(score_prefix("Component TextRazor found two entities.", &component, 2).rating, 3);
    }

    #[test]
    fn template_item_scores_full_marks() {
        let item = "at 2023-10-18T07:57:57.82089Z starting from position 10 and ending at position 16";
        assert_eq!(score_annotation(item, &textrazor()).rating, 3);
        let missing_two = "at starting from position and ending at position";
        let rated = score_annotation(missing_two, &textrazor());
        assert_eq!(rated.rating, 2);
    }

    #[test]
    fn number_matching() {
        assert!(numbers_match("0.50", "0.5"));
        assert!(numbers_match("0.4795", "0.4794646229033659"));
        assert!(!numbers_match("0.48", "0.4794646229033659"));
        assert!(!numbers_match("0.4794", "0.4794646229033659"));
        assert!(numbers_match("16", "16"));
        assert!(!numbers_match("17", "16"));
    }

    #[test]
    fn list_markers() {
        let (prefix, items) = split_items("Intro: 1. at a ending at 16. 2. at b");
        assert_eq!(prefix, "Intro:");
        assert_eq!(items, ["at a ending at 16.", "at b"]);
        let (_, items) = split_items("nothing numbered");
        assert!(items.is_empty());
    }

    #[test]
    fn iri_body_with_and_without_scheme() {
        let ann = Annotation {
            kind: AnnotationKind::Instance,
            body: Some(Term::Iri(Iri::new("http://dbpedia.org/resource/Berlin").unwrap())),
            score: Decimal::parse("0.9"),
            selector: None,
            annotated_at: None,
            ..textrazor()
        };
        assert_eq!(score_annotation("the resource dbpedia.org/resource/Berlin with a confidence of 0.90", &ann).rating, 3);
        assert_eq!(score_annotation("the resource dbr:Berlin with a confidence of 0.9", &ann).rating, 3);
        let wrong = score_annotation("the resource http://dbpedia.org/resource/Paris with a confidence of 0.9", &ann);
        assert_eq!(wrong.rating, 2);
        assert_eq!(status(&wrong, CheckField::Body), CheckStatus::Incorrect);
    }

    #[test]
    fn sparql_body_is_masked() {
        let query = "SELECT ?x WHERE { ?x a <http://ex/C> } LIMIT 10";
        let ann = Annotation {
            kind: AnnotationKind::AnswerSparql,
            body: Some(Term::Literal(Literal::plain(query))),
            selector: Some(Selector { start: 0, end: 5 }),
            ..textrazor()
        };
        let text = format!(
            "on 2023-10-18T07:57:57.82089Z the SPARQL query {} was computed starting from position 0 and ending at position 5",
            query.replace(' ', "\n ")
        );
        assert_eq!(score_annotation(&text, &ann).rating, 3);
        let other = "on 2023-10-18T07:57:57.82089Z the SPARQL query SELECT ?y WHERE { ?y ?p ?o } was computed starting from position 0 and ending at position 5";
        assert_eq!(status(&score_annotation(other, &ann), CheckField::Body), CheckStatus::Incorrect);
    }

    #[test]
    fn sibling_values_are_tolerated_in_prose() {
        let a = Annotation { selector: Some(Selector { start: 0, end: 4 }), ..textrazor() };
        let b = Annotation { id: "b".into(), selector: Some(Selector { start: 10, end: 16 }), ..textrazor() };
        let text = "TextRazor added 2 annotations on 2023-10-18T07:57:57.82089Z: one from 0 to 4 and one from 10 to 16.";
        let component = a.annotated_by.clone();
        let eval = score_explanation(text, &component, &[a, b]).unwrap();
        assert_eq!(eval.score.q_e(), num_rational::Ratio::from_integer(6));
    }
}
