#[derive(Clone, Debug, PartialEq, Eq)]
pub(super) enum Lexeme {
    Word(String),
    Iri(String),
    Str(String),
    Punct(char),
}

/// Index one past the closing `>` if `chars[at]` opens an IRI reference.
fn iri_end(chars: &[char], at: usize) -> Option<usize> {
    let mut i = at + 1;
    while let Some(&c) = chars.get(i) {
        match c {
            '>' => return Some(i + 1),
            c if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') => return None,
            _ => i += 1,
        }
    }
    None
}

/// Index one past the end of the string literal starting at `chars[at]`.
fn string_end(chars: &[char], at: usize) -> usize {
    let quote = chars[at];
    let long = chars.get(at + 1) == Some(&quote) && chars.get(at + 2) == Some(&quote);
    let mut i = if long { at + 3 } else { at + 1 };
    while i < chars.len() {
        match chars[i] {
            '\\' => i += 2,
            c if c == quote && !long => return i + 1,
            c if c == quote && chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote) => return i + 3,
            _ => i += 1,
        }
    }
    chars.len()
}

fn skip_comment(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i] != '\n' {
        i += 1;
    }
    i
}

/// Strips comments and collapses whitespace runs to one space; IRIs and string
/// literals are copied unchanged.
pub fn normalize_query(raw: &str) -> String {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    let mut i = 0;
    let emit = |out: &mut String, pending: &mut bool, text: &[char]| {
        if *pending && !out.is_empty() {
            out.push(' ');
        }
        *pending = false;
        out.extend(text);
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            pending_space = true;
            i += 1;
        } else if c == '#' {
            i = skip_comment(&chars, i);
            pending_space = true;
        } else if c == '"' || c == '\'' {
            let end = string_end(&chars, i);
            emit(&mut out, &mut pending_space, &chars[i..end]);
            i = end;
        } else if let Some(end) = (c == '<').then(|| iri_end(&chars, i)).flatten() {
            emit(&mut out, &mut pending_space, &chars[i..end]);
            i = end;
        } else {
            emit(&mut out, &mut pending_space, &chars[i..=i]);
            i += 1;
        }
    }
    out
}

pub(super) fn lex(raw: &str) -> Vec<Lexeme> {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let is_break = |c: char| c.is_whitespace() || matches!(c, '{' | '}' | '(' | ')' | ',' | ';' | '#' | '"' | '\'');
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            i = skip_comment(&chars, i);
        } else if c == '"' || c == '\'' {
            let end = string_end(&chars, i);
            out.push(Lexeme::Str(chars[i..end].iter().collect()));
            i = end;
        } else if let Some(end) = (c == '<').then(|| iri_end(&chars, i)).flatten() {
            out.push(Lexeme::Iri(chars[i + 1..end - 1].iter().collect()));
            i = end;
        } else if matches!(c, '{' | '}' | '(' | ')' | ',' | ';') {
            out.push(Lexeme::Punct(c));
            i += 1;
        } else if c == '.' && chars.get(i + 1).is_none_or(|&n| is_break(n)) {
            out.push(Lexeme::Punct('.'));
            i += 1;
        } else {
            let start = i;
            while i < chars.len() && !is_break(chars[i]) {
                // A dot followed by a break ends the statement rather than the word.
                if chars[i] == '.' && chars.get(i + 1).is_none_or(|&n| is_break(n)) {
                    break;
                }
                i += 1;
            }
            out.push(Lexeme::Word(chars[start..i].iter().collect()));
        }
    }
    out
}
