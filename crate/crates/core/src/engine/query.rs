//! Query AST and its textual serialization.
//!
//! A term serializes as `pred:(kind payload)`. Terms of a basic query are
//! joined by ` AND `, basic queries by ` OR `; a multi-term basic query inside
//! a disjunction is parenthesized. Keyword and pattern tokens are written
//! bare when safe, otherwise double-quoted; phrase and value payloads are
//! always quoted. `*` is a wildcard.
//!
//! ```
//! use qf::engine::{BasicQuery, Query, SearchValue};
//!
//! let q = Query::or(vec![
//!     BasicQuery::single("intitle", SearchValue::keywords(["question", "42"])),
//!     BasicQuery::single("intitle", SearchValue::phrase("don't panic")),
//! ]);
//! assert_eq!(q.to_string(), r#"intitle:(keywords question 42) OR intitle:(phrase "don't panic")"#);
//! assert_eq!(q.to_string().parse::<Query>().unwrap(), q);
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Value,
    Keywords,
    Phrase,
    Pattern,
}

impl ValueKind {
    pub const ALL: [ValueKind; 4] = [
        ValueKind::Value,
        ValueKind::Keywords,
        ValueKind::Phrase,
        ValueKind::Pattern,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Value => "value",
            ValueKind::Keywords => "keywords",
            ValueKind::Phrase => "phrase",
            ValueKind::Pattern => "pattern",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValueKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ValueKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown value kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternItem {
    Literal(String),
    /// Exactly one arbitrary token.
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SearchValue {
    Value(String),
    Keywords(Vec<String>),
    Phrase(String),
    Pattern(Vec<PatternItem>),
}

impl SearchValue {
    /// Keywords from arbitrary strings; each is tokenized.
    pub fn keywords<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        SearchValue::Keywords(
            words
                .into_iter()
                .flat_map(|w| tokenize(w.as_ref()))
                .collect(),
        )
    }

    pub fn phrase(text: impl Into<String>) -> Self {
        SearchValue::Phrase(text.into())
    }

    pub fn value(text: impl Into<String>) -> Self {
        SearchValue::Value(text.into())
    }

    /// Pattern from items where `"*"` denotes a wildcard.
    pub fn pattern<S: AsRef<str>>(items: impl IntoIterator<Item = S>) -> Self {
        SearchValue::Pattern(
            items
                .into_iter()
                .map(|s| match s.as_ref() {
                    "*" => PatternItem::Wildcard,
                    lit => PatternItem::Literal(normalize_literal(lit)),
                })
                .collect(),
        )
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            SearchValue::Value(_) => ValueKind::Value,
            SearchValue::Keywords(_) => ValueKind::Keywords,
            SearchValue::Phrase(_) => ValueKind::Phrase,
            SearchValue::Pattern(_) => ValueKind::Pattern,
        }
    }

    /// The invariant violated by this value, if any.
    pub fn defect(&self) -> Option<&'static str> {
        match self {
            SearchValue::Keywords(k) if k.is_empty() => Some("empty keyword list"),
            SearchValue::Keywords(k) if k.iter().any(|w| tokenize(w).is_empty()) => {
                Some("keyword without searchable characters")
            }
            SearchValue::Pattern(items)
                if !items.iter().any(|i| matches!(i, PatternItem::Literal(_))) =>
            {
                Some("pattern without a literal token")
            }
            SearchValue::Pattern(items)
                if items
                    .iter()
                    .any(|i| matches!(i, PatternItem::Literal(l) if tokenize(l).len() != 1)) =>
            {
                Some("pattern literal is not a single token")
            }
            SearchValue::Phrase(p) if tokenize(p).is_empty() => Some("empty phrase"),
            SearchValue::Value(v) if tokenize(v).is_empty() => Some("empty value"),
            _ => None,
        }
    }
}

fn normalize_literal(lit: &str) -> String {
    let tokens = tokenize(lit);
    if tokens.len() == 1 {
        tokens.into_iter().next().unwrap()
    } else {
        lit.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub predicate: String,
    pub value: SearchValue,
}

impl Term {
    pub fn new(predicate: impl Into<String>, value: SearchValue) -> Self {
        Term {
            predicate: predicate.into(),
            value,
        }
    }
}

/// Conjunction of predicate terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasicQuery {
    pub terms: Vec<Term>,
}

impl BasicQuery {
    pub fn new(terms: Vec<Term>) -> Self {
        BasicQuery { terms }
    }

    pub fn single(predicate: impl Into<String>, value: SearchValue) -> Self {
        BasicQuery {
            terms: vec![Term::new(predicate, value)],
        }
    }
}

/// Disjunction of basic queries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub disjuncts: Vec<BasicQuery>,
}

impl Query {
    pub fn or(disjuncts: Vec<BasicQuery>) -> Self {
        Query { disjuncts }
    }

    /// Stable short identifier derived from the serialization.
    pub fn id(&self) -> String {
        format!("{:016x}", crate::seed::fnv1a64(self.to_string().as_bytes()))
    }
}

impl From<BasicQuery> for Query {
    fn from(q: BasicQuery) -> Self {
        Query { disjuncts: vec![q] }
    }
}

fn is_bare(token: &str) -> bool {
    !token.is_empty()
        && token != "*"
        && token != "AND"
        && token != "OR"
        && !token
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"' | '\\'))
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("\"")
}

fn write_token(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if is_bare(s) {
        f.write_str(s)
    } else {
        write_quoted(f, s)
    }
}

impl fmt::Display for SearchValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())?;
        match self {
            SearchValue::Value(v) | SearchValue::Phrase(v) => {
                f.write_str(" ")?;
                write_quoted(f, v)
            }
            SearchValue::Keywords(words) => {
                for w in words {
                    f.write_str(" ")?;
                    write_token(f, w)?;
                }
                Ok(())
            }
            SearchValue::Pattern(items) => {
                for item in items {
                    f.write_str(" ")?;
                    match item {
                        PatternItem::Wildcard => f.write_str("*")?,
                        PatternItem::Literal(l) => write_token(f, l)?,
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:({})", self.predicate, self.value)
    }
}

impl fmt::Display for BasicQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = self.disjuncts.len() > 1;
        for (i, q) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            if wrap && q.terms.len() > 1 {
                write!(f, "({q})")?;
            } else {
                write!(f, "{q}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse query at byte {at}: {message}")]
pub struct ParseQueryError {
    pub at: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

#[derive(Debug, PartialEq)]
enum Word {
    Bare(String),
    Quoted(String),
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseQueryError> {
        Err(ParseQueryError {
            at: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let save = self.pos;
        self.skip_ws();
        let rest = self.rest();
        if rest.starts_with(kw)
            && rest[kw.len()..]
                .chars()
                .next()
                .is_some_and(char::is_whitespace)
        {
            self.pos += kw.len();
            self.skip_ws();
            true
        } else {
            self.pos = save;
            false
        }
    }

    fn query(&mut self) -> Result<Query, ParseQueryError> {
        let mut disjuncts = vec![self.disjunct()?];
        while self.eat_keyword("OR") {
            disjuncts.push(self.disjunct()?);
        }
        self.skip_ws();
        if !self.rest().is_empty() {
            return self.err("trailing input");
        }
        Ok(Query { disjuncts })
    }

    fn disjunct(&mut self) -> Result<BasicQuery, ParseQueryError> {
        self.skip_ws();
        if self.eat("(") {
            let q = self.basic()?;
            self.skip_ws();
            if !self.eat(")") {
                return self.err("expected ')'");
            }
            Ok(q)
        } else {
            self.basic()
        }
    }

    fn basic(&mut self) -> Result<BasicQuery, ParseQueryError> {
        let mut terms = vec![self.term()?];
        while self.eat_keyword("AND") {
            terms.push(self.term()?);
        }
        Ok(BasicQuery { terms })
    }

    fn term(&mut self) -> Result<Term, ParseQueryError> {
        self.skip_ws();
        let name_len = self
            .rest()
            .find(|c: char| c == ':' || c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(self.rest().len());
        if name_len == 0 {
            return self.err("expected predicate name");
        }
        let predicate = self.rest()[..name_len].to_string();
        self.pos += name_len;
        if !self.eat(":(") {
            return self.err("expected ':(' after predicate");
        }
        self.skip_ws();
        let kind = match self.word()? {
            Some(Word::Bare(k)) => k.parse::<ValueKind>().or_else(|e| self.err(e))?,
            _ => return self.err("expected value kind"),
        };
        let mut words = Vec::new();
        loop {
            self.skip_ws();
            if self.eat(")") {
                break;
            }
            match self.word()? {
                Some(w) => words.push(w),
                None => return self.err("unterminated term"),
            }
        }
        let value = match kind {
            ValueKind::Value | ValueKind::Phrase => match words.as_slice() {
                [Word::Quoted(s)] | [Word::Bare(s)] => {
                    if kind == ValueKind::Value {
                        SearchValue::Value(s.clone())
                    } else {
                        SearchValue::Phrase(s.clone())
                    }
                }
                _ => return self.err("expected exactly one quoted payload"),
            },
            ValueKind::Keywords => SearchValue::Keywords(
                words
                    .into_iter()
                    .map(|w| match w {
                        Word::Bare(s) | Word::Quoted(s) => s,
                    })
                    .collect(),
            ),
            ValueKind::Pattern => SearchValue::Pattern(
                words
                    .into_iter()
                    .map(|w| match w {
                        Word::Bare(s) if s == "*" => PatternItem::Wildcard,
                        Word::Bare(s) | Word::Quoted(s) => PatternItem::Literal(s),
                    })
                    .collect(),
            ),
        };
        Ok(Term { predicate, value })
    }

    fn word(&mut self) -> Result<Option<Word>, ParseQueryError> {
        let rest = self.rest();
        if rest.is_empty() {
            return Ok(None);
        }
        if rest.starts_with('"') {
            let mut out = String::new();
            let mut chars = rest.char_indices().skip(1);
            while let Some((i, c)) = chars.next() {
                match c {
                    '\\' => match chars.next() {
                        Some((_, e)) => out.push(e),
                        None => break,
                    },
                    '"' => {
                        self.pos += i + 1;
                        return Ok(Some(Word::Quoted(out)));
                    }
                    _ => out.push(c),
                }
            }
            return self.err("unterminated quoted string");
        }
        let len = rest
            .find(|c: char| c.is_whitespace() || c == ')' || c == '(')
            .unwrap_or(rest.len());
        if len == 0 {
            return Ok(None);
        }
        self.pos += len;
        Ok(Some(Word::Bare(rest[..len].to_string())))
    }
}

impl FromStr for Query {
    type Err = ParseQueryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Parser { src: s, pos: 0 }.query()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn serializes_terms() {
        let q = BasicQuery::new(vec![
            Term::new("author", SearchValue::keywords(["smith"])),
            Term::new("year", SearchValue::value("2005")),
        ]);
        assert_eq!(q.to_string(), r#"author:(keywords smith) AND year:(value "2005")"#);
        let p = SearchValue::pattern(["MOMA", "*", "*", "*", "object"]);
        assert_eq!(
            Term::new("intitle", p).to_string(),
            "intitle:(pattern moma * * * object)"
        );
        let or = Query::or(vec![q.clone(), BasicQuery::single("intitle", SearchValue::phrase("a \"b\""))]);
        assert_eq!(
            or.to_string(),
            r#"(author:(keywords smith) AND year:(value "2005")) OR intitle:(phrase "a \"b\"")"#
        );
        assert_eq!(or.to_string().parse::<Query>().unwrap(), or);
    }

    #[test]
    fn parse_errors() {
        assert!("".parse::<Query>().is_err());
        assert!("intitle(keywords a)".parse::<Query>().is_err());
        assert!("intitle:(words a)".parse::<Query>().is_err());
        assert!("intitle:(phrase \"open".parse::<Query>().is_err());
        assert!("intitle:(keywords a) junk".parse::<Query>().is_err());
    }

    #[test]
    fn defects() {
        assert!(SearchValue::Keywords(vec![]).defect().is_some());
        assert!(SearchValue::pattern(["*", "*"]).defect().is_some());
        assert!(SearchValue::phrase("!!").defect().is_some());
        assert!(SearchValue::pattern(["a", "*"]).defect().is_none());
    }

    fn arb_token() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-z0-9]{1,8}",
            "[a-z]{1,4}'[a-z]{1,3}",
            Just("AND".to_string()),
            Just("*".to_string()),
            "[a-z ()\"\\\\]{1,6}",
        ]
    }

    fn arb_value() -> impl Strategy<Value = SearchValue> {
        prop_oneof![
            ".{0,12}".prop_map(SearchValue::Value),
            ".{0,12}".prop_map(SearchValue::Phrase),
            prop::collection::vec(arb_token(), 1..4).prop_map(SearchValue::Keywords),
            prop::collection::vec(
                prop_oneof![
                    arb_token().prop_map(PatternItem::Literal),
                    Just(PatternItem::Wildcard)
                ],
                1..5
            )
            .prop_map(SearchValue::Pattern),
        ]
    }

    fn arb_query() -> impl Strategy<Value = Query> {
        let term = ("[a-z]{1,8}", arb_value()).prop_map(|(p, v)| Term::new(p, v));
        let basic = prop::collection::vec(term, 1..4).prop_map(BasicQuery::new);
        prop::collection::vec(basic, 1..4).prop_map(Query::or)
    }

    proptest! {
        #[test]
        fn display_parse_roundtrip(q in arb_query()) {
            let text = q.to_string();
            prop_assert_eq!(text.parse::<Query>().unwrap(), q);
        }
    }
}
