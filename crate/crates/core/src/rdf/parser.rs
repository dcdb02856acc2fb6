//! Reader for N-Triples and the prefixed shorthand used in Qanary dumps.
//!
//! Besides strict N-Triples the reader accepts CURIEs from the fixed prefix table,
//! `a` as predicate, bare numbers/booleans as typed literals, statements spread over
//! several lines, a terminal `.` glued to the object, and bare tokens such as
//! `0.4794646229033659` or `b2d50b76...` as blank-node-like local identifiers.

use crate::model::{resolve_curie, BlankNode, Iri, Literal, ModelError, PrefixTable, Term, Triple, RDF, XSD};

use super::RdfError;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Iri(String),
    Literal { lexical: String, datatype: Option<Box<Token>>, language: Option<String> },
    Blank(String),
    Variable(String),
    Word(String),
    Dot,
}

#[derive(Debug)]
struct Spanned {
    token: Token,
    line: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self { chars: text.chars().peekable(), line: 1 }
    }

    fn syntax(&self, message: impl Into<String>) -> RdfError {
        RdfError::Syntax { line: self.line, message: message.into() }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, RdfError> {
        let mut out = Vec::new();
        loop {
            self.skip_blank();
            let line = self.line;
            let Some(&c) = self.chars.peek() else { break };
            match c {
                '<' => {
                    let iri = self.iri_ref()?;
                    out.push(Spanned { token: Token::Iri(iri), line });
                }
                '"' => {
                    let (token, glued_dot) = self.literal()?;
                    out.push(Spanned { token, line });
                    if glued_dot {
                        out.push(Spanned { token: Token::Dot, line });
                    }
                }
                _ => {
                    let word = self.word();
                    if word == "." {
                        out.push(Spanned { token: Token::Dot, line });
                        continue;
                    }
                    let (body, dot) = strip_glued_dot(word);
                    let token = if let Some(label) = body.strip_prefix("_:") {
                        Token::Blank(label.to_string())
                    } else if body.starts_with('?') || body.starts_with('$') {
                        Token::Variable(body)
                    } else {
                        Token::Word(body)
                    };
                    out.push(Spanned { token, line });
                    if dot {
                        out.push(Spanned { token: Token::Dot, line });
                    }
                }
            }
        }
        Ok(out)
    }

    fn word(&mut self) -> String {
        let mut word = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                break;
            }
            word.push(c);
            self.bump();
        }
        word
    }

    fn iri_ref(&mut self) -> Result<String, RdfError> {
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(iri),
                Some(c) if c.is_whitespace() => return Err(self.syntax("whitespace inside IRI")),
                Some('\\') => iri.push(self.unicode_escape()?),
                Some(c) => iri.push(c),
                None => return Err(self.syntax("unterminated IRI")),
            }
        }
    }

    fn unicode_escape(&mut self) -> Result<char, RdfError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.syntax("invalid escape")),
        };
        let hex: String = (0..width).filter_map(|_| self.bump()).collect();
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.syntax(format!("invalid unicode escape \\u{hex}")))
    }

    /// Returns the literal and whether a statement terminator was glued to its tail.
    fn literal(&mut self) -> Result<(Token, bool), RdfError> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.chars.peek().copied() {
                    Some('u') | Some('U') => lexical.push(self.unicode_escape()?),
                    Some(c) => {
                        self.bump();
                        lexical.push(match c {
                            'n' => '\n',
                            'r' => '\r',
                            't' => '\t',
                            'b' => '\u{8}',
                            'f' => '\u{c}',
                            '"' | '\\' | '\'' => c,
                            _ => return Err(self.syntax(format!("invalid escape \\{c}"))),
                        });
                    }
                    None => return Err(self.syntax("unterminated string")),
                },
                Some(c) => lexical.push(c),
                None => return Err(self.syntax("unterminated string")),
            }
        }
        match self.chars.peek().copied() {
            Some('@') => {
                self.bump();
                let (tag, dot) = strip_glued_dot(self.word());
                if tag.is_empty() {
                    return Err(self.syntax("empty language tag"));
                }
                Ok((Token::Literal { lexical, datatype: None, language: Some(tag) }, dot))
            }
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(self.syntax("expected ^^ before datatype"));
                }
                let (datatype, dot) = if self.chars.peek() == Some(&'<') {
                    (Token::Iri(self.iri_ref()?), false)
                } else {
                    let (word, dot) = strip_glued_dot(self.word());
                    (Token::Word(word), dot)
                };
                Ok((Token::Literal { lexical, datatype: Some(Box::new(datatype)), language: None }, dot))
            }
            _ => Ok((Token::Literal { lexical, datatype: None, language: None }, false)),
        }
    }
}

fn strip_glued_dot(word: String) -> (String, bool) {
    match word.strip_suffix('.') {
        Some(body) if !body.is_empty() => (body.to_string(), true),
        _ => (word, false),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Position {
    Subject,
    Predicate,
    Object,
}

fn is_integer(word: &str) -> bool {
    let digits = word.strip_prefix(['+', '-']).unwrap_or(word);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

fn is_decimal(word: &str) -> bool {
    let body = word.strip_prefix(['+', '-']).unwrap_or(word);
    match body.split_once('.') {
        Some((int, frac)) => {
            !frac.is_empty() && int.chars().all(|c| c.is_ascii_digit()) && frac.chars().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

fn is_double(word: &str) -> bool {
    let Some(idx) = word.find(['e', 'E']) else { return false };
    let (mantissa, exp) = (&word[..idx], &word[idx + 1..]);
    (is_integer(mantissa) || is_decimal(mantissa) || is_decimal(&format!("{mantissa}0")))
        && is_integer(exp)
}

/// Bare numeric or boolean tokens in object position become typed literals.
pub(crate) fn bare_literal(word: &str) -> Option<Literal> {
    let datatype = if is_integer(word) {
        "integer"
    } else if is_decimal(word) {
        "decimal"
    } else if is_double(word) {
        "double"
    } else if word == "true" || word == "false" {
        "boolean"
    } else {
        return None;
    };
    Some(Literal::typed(word, Iri::from_parts(XSD, datatype)))
}

struct TermBuilder<'a> {
    prefixes: &'a PrefixTable,
}

impl TermBuilder<'_> {
    fn iri(&self, value: &str, line: usize) -> Result<Iri, RdfError> {
        Iri::new(value).map_err(|e| RdfError::Syntax { line, message: e.to_string() })
    }

    fn curie(&self, word: &str, line: usize) -> Result<Iri, RdfError> {
        resolve_curie(word, self.prefixes).map_err(|e| match e {
            ModelError::UnknownPrefix(p) => RdfError::Syntax { line, message: format!("unknown prefix {p:?}") },
            e => RdfError::Syntax { line, message: e.to_string() },
        })
    }

    fn term(&self, spanned: &Spanned, position: Position) -> Result<Term, RdfError> {
        let line = spanned.line;
        let syntax = |message: &str| RdfError::Syntax { line, message: message.to_string() };
        match &spanned.token {
            Token::Variable(name) => Err(RdfError::VariableNotAllowed { line, name: name.clone() }),
            Token::Dot => Err(syntax("unexpected '.'")),
            Token::Iri(value) => Ok(Term::Iri(self.iri(value, line)?)),
            Token::Blank(label) if position != Position::Predicate => {
                Ok(Term::Blank(BlankNode::new(label.clone()).map_err(|e| syntax(&e.to_string()))?))
            }
            Token::Blank(_) => Err(syntax("blank node in predicate position")),
            Token::Literal { lexical, datatype, language } => {
                if position != Position::Object {
                    return Err(syntax("literal outside object position"));
                }
                let datatype = match datatype.as_deref() {
                    None => None,
                    Some(Token::Iri(value)) => Some(self.iri(value, line)?),
                    Some(Token::Word(word)) => Some(self.curie(word, line)?),
                    Some(_) => return Err(syntax("invalid datatype")),
                };
                Ok(Term::Literal(match (datatype, language) {
                    (Some(datatype), None) => Literal::typed(lexical.clone(), datatype),
                    (datatype, language) => Literal { lexical: lexical.clone(), datatype, language: language.clone() },
                }))
            }
            Token::Word(word) => match position {
                Position::Predicate if word == "a" => Ok(Term::Iri(Iri::from_parts(RDF, "type"))),
                Position::Predicate if word.contains(':') => Ok(Term::Iri(self.curie(word, line)?)),
                Position::Predicate => Err(syntax(&format!("invalid predicate {word:?}"))),
                _ if word.contains(':') => Ok(Term::Iri(self.curie(word, line)?)),
                Position::Object => Ok(match bare_literal(word) {
                    Some(lit) => Term::Literal(lit),
                    None => Term::Blank(BlankNode::new(word.clone()).map_err(|e| syntax(&e.to_string()))?),
                }),
                Position::Subject => {
                    Ok(Term::Blank(BlankNode::new(word.clone()).map_err(|e| syntax(&e.to_string()))?))
                }
            },
        }
    }
}

/// Parses triples in input order.
pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>, RdfError> {
    parse_with_prefixes(text, &PrefixTable::standard())
}

pub fn parse_with_prefixes(text: &str, prefixes: &PrefixTable) -> Result<Vec<Triple>, RdfError> {
    let tokens = Lexer::new(text).tokens()?;
    // Groundedness is checked over the whole input first, so a variable anywhere
    // is reported as such rather than as a downstream syntax error.
    if let Some(var) = tokens.iter().find_map(|t| match &t.token {
        Token::Variable(name) => Some(RdfError::VariableNotAllowed { line: t.line, name: name.clone() }),
        _ => None,
    }) {
        return Err(var);
    }

    let builder = TermBuilder { prefixes };
    let mut triples = Vec::new();
    let mut iter = tokens.iter();
    while let Some(first) = iter.next() {
        let missing = |line: usize| RdfError::Syntax { line, message: "incomplete statement".into() };
        let predicate = iter.next().ok_or_else(|| missing(first.line))?;
        let object = iter.next().ok_or_else(|| missing(predicate.line))?;
        match iter.next() {
            Some(Spanned { token: Token::Dot, .. }) => {}
            Some(other) => {
                return Err(RdfError::Syntax { line: other.line, message: "expected '.' after object".into() })
            }
            None => return Err(RdfError::Syntax { line: object.line, message: "missing terminating '.'".into() }),
        }
        let subject = builder.term(first, Position::Subject)?;
        let Term::Iri(predicate_iri) = builder.term(predicate, Position::Predicate)? else {
            return Err(RdfError::Syntax { line: predicate.line, message: "predicate must be an IRI".into() });
        };
        let object = builder.term(object, Position::Object)?;
        let triple = Triple::new(subject, predicate_iri, object)
            .map_err(|e| RdfError::Syntax { line: first.line, message: e.to_string() })?;
        triples.push(triple);
    }
    Ok(triples)
}
