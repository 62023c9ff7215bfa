//! Chat-format training examples for a hosted language model, and the way
//! back from its free-text answers to catalog artworks.
//!
//! The assistant message is a Python-literal style mapping from the six field
//! names to lists with one entry per artwork, wrapped in double quotes.
//! Missing values are written `'None'`, several values of one field are
//! joined with `|`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{prompt_text, ArtworkRecord, DatasetSplit, ExhibitionRecord, Field, TagProbabilityVector, TagVocabulary};
use crate::curation::TagPostings;
use crate::{Error, Result};

pub const SYSTEM_PROMPT: &str = "ArtCurator is a factual chatbot that is an expert in JSON format and in artworks and exhibitions from The Metropolitan Museum of Art.";

/// Separator for several values of one field inside a single list entry.
pub const MULTI_VALUE_SEPARATOR: char = '|';

const NONE: &str = "None";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub const fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatExample {
    pub system_content: String,
    pub user_content: String,
    pub assistant_content: String,
}

impl ChatExample {
    pub fn from_exhibition(ex: &ExhibitionRecord) -> Result<Self> {
        if ex.artworks.is_empty() {
            return Err(Error::Empty("exhibition artworks"));
        }
        let rows: Vec<PredictedRow> = ex.artworks.iter().map(PredictedRow::from_artwork).collect();
        Ok(ChatExample {
            system_content: SYSTEM_PROMPT.into(),
            user_content: prompt_text(&ex.title, &ex.overview_text),
            assistant_content: format_assistant_content(&rows),
        })
    }

    pub fn messages(&self) -> [ChatMessage; 3] {
        [
            ChatMessage {
                role: Role::System,
                content: self.system_content.clone(),
            },
            ChatMessage {
                role: Role::User,
                content: self.user_content.clone(),
            },
            ChatMessage {
                role: Role::Assistant,
                content: self.assistant_content.clone(),
            },
        ]
    }
}

/// Training examples for the train split, in corpus order. Exhibitions
/// without artworks are skipped and reported by index.
pub fn finetune_examples(exhibitions: &[ExhibitionRecord], split: &DatasetSplit) -> Result<(Vec<ChatExample>, Vec<usize>)> {
    if split.train.is_empty() {
        return Err(Error::Empty("train split"));
    }
    let mut train = split.train.clone();
    train.sort_unstable();
    let mut out = Vec::with_capacity(train.len());
    let mut skipped = Vec::new();
    for i in train {
        let ex = exhibitions
            .get(i)
            .ok_or_else(|| Error::invalid(format!("train index {i} out of range")))?;
        match ChatExample::from_exhibition(ex) {
            Ok(e) => out.push(e),
            Err(Error::Empty(_)) => skipped.push(i),
            Err(e) => return Err(e),
        }
    }
    Ok((out, skipped))
}

/// One predicted artwork: the values of each field, empty where missing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredictedRow(pub [Vec<String>; 6]);

impl PredictedRow {
    pub fn from_artwork(art: &ArtworkRecord) -> Self {
        PredictedRow(Field::ALL.map(|f| art.field_values(f).to_vec()))
    }

    pub fn get(&self, field: Field) -> &[String] {
        &self.0[field.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPrediction {
    pub rows: Vec<PredictedRow>,
    /// Whether the text carried a `Tags` list at all.
    pub has_tags: bool,
}

fn py_repr(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') { '"' } else { '\'' };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}

fn join_values(values: &[String]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(MULTI_VALUE_SEPARATOR);
        }
        s.push_str(v);
    }
    s
}

/// The quoted mapping used as the assistant message.
pub fn format_assistant_content(rows: &[PredictedRow]) -> String {
    let mut s = String::from("\"{");
    for (fi, field) in Field::ALL.into_iter().enumerate() {
        if fi > 0 {
            s.push_str(", ");
        }
        s.push_str(&py_repr(field.header()));
        s.push_str(": [");
        for (ri, row) in rows.iter().enumerate() {
            if ri > 0 {
                s.push_str(", ");
            }
            let vals = row.get(field);
            if vals.is_empty() {
                s.push_str(&py_repr(NONE));
            } else {
                s.push_str(&py_repr(&join_values(vals)));
            }
        }
        s.push(']');
    }
    s.push_str("}\"");
    s
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Str(String),
    Null,
    List(Vec<Value>),
    Map(Vec<(String, Value)>),
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            text,
            pos: 0,
        }
    }

    fn fail(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(&format!("expected '{}'", b as char)))
        }
    }

    fn value(&mut self) -> Result<Value> {
        match self.peek() {
            Some(b'{') => self.map(),
            Some(b'[') => self.list(),
            Some(q @ (b'\'' | b'"')) => self.string(q).map(Value::Str),
            Some(_) => self.bare(),
            None => Err(self.fail("unexpected end")),
        }
    }

    fn sequence<T>(&mut self, close: u8, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let mut out = Vec::new();
        loop {
            if self.peek() == Some(close) {
                self.pos += 1;
                return Ok(out);
            }
            out.push(item(self)?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(c) if c == close => {}
                _ => return Err(self.fail("expected ',' or closing bracket")),
            }
        }
    }

    fn map(&mut self) -> Result<Value> {
        self.expect(b'{')?;
        let entries = self.sequence(b'}', |p| {
            let key = match p.peek() {
                Some(q @ (b'\'' | b'"')) => p.string(q)?,
                _ => return Err(p.fail("expected quoted key")),
            };
            p.expect(b':')?;
            Ok((key, p.value()?))
        })?;
        Ok(Value::Map(entries))
    }

    fn list(&mut self) -> Result<Value> {
        self.expect(b'[')?;
        Ok(Value::List(self.sequence(b']', |p| p.value())?))
    }

    fn string(&mut self, quote: u8) -> Result<String> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            let rest = &self.text[self.pos..];
            let mut chars = rest.chars();
            let c = chars.next().ok_or_else(|| self.fail("unterminated string"))?;
            self.pos += c.len_utf8();
            match c {
                c if c as u32 == quote as u32 => return Ok(out),
                '\\' => {
                    let e = chars.next().ok_or_else(|| self.fail("unterminated escape"))?;
                    self.pos += e.len_utf8();
                    match e {
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        'u' => {
                            let hex = self.text.get(self.pos..self.pos + 4).ok_or_else(|| self.fail("short \\u escape"))?;
                            let code = u32::from_str_radix(hex, 16).map_err(|_| self.fail("bad \\u escape"))?;
                            out.push(char::from_u32(code).unwrap_or(char::REPLACEMENT_CHARACTER));
                            self.pos += 4;
                        }
                        other => out.push(other),
                    }
                }
                c => out.push(c),
            }
        }
    }

    fn bare(&mut self) -> Result<Value> {
        let start = self.pos;
        while self.pos < self.src.len() && !matches!(self.src[self.pos], b',' | b']' | b'}' | b':') {
            self.pos += 1;
        }
        let word = self.text[start..self.pos].trim();
        match word {
            "" => Err(self.fail("expected value")),
            "None" | "null" | "NaN" | "nan" => Ok(Value::Null),
            w if w.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'-' | b'+' | b'.')) => Ok(Value::Str(w.to_string())),
            _ => Err(self.fail("unquoted word")),
        }
    }
}

fn entry_values(v: &Value) -> Result<Vec<String>> {
    match v {
        Value::Null => Ok(Vec::new()),
        Value::Str(s) => {
            let s = s.trim();
            if s.is_empty() || s == NONE {
                Ok(Vec::new())
            } else {
                Ok(s
                    .split(MULTI_VALUE_SEPARATOR)
                    .map(str::trim)
                    .filter(|p| !p.is_empty() && *p != NONE)
                    .map(String::from)
                    .collect())
            }
        }
        _ => Err(Error::Parse("nested value inside a field list".into())),
    }
}

fn parse_mapping(body: &str) -> Result<ParsedPrediction> {
    let mut p = Parser::new(body);
    let entries = match p.value()? {
        Value::Map(e) => e,
        _ => return Err(Error::Parse("top level is not a mapping".into())),
    };
    if p.peek().is_some() {
        return Err(p.fail("trailing text after mapping"));
    }
    let by_key: BTreeMap<String, Value> = entries.into_iter().collect();
    let mut columns: [Option<Vec<Vec<String>>>; 6] = Default::default();
    for field in Field::ALL {
        let Some(v) = by_key.get(field.header()) else {
            if field == Field::Tags {
                continue;
            }
            return Err(Error::Parse(format!("missing key {:?}", field.header())));
        };
        let col = match v {
            Value::List(items) => items.iter().map(entry_values).collect::<Result<Vec<_>>>()?,
            other => vec![entry_values(other)?],
        };
        columns[field.index()] = Some(col);
    }
    let n = columns[0].as_ref().map_or(0, Vec::len);
    for field in Field::ALL {
        if let Some(c) = &columns[field.index()] {
            if c.len() != n {
                return Err(Error::Parse(format!(
                    "ragged lists: {:?} has {} entries, expected {n}",
                    field.header(),
                    c.len()
                )));
            }
        }
    }
    if n == 0 {
        return Err(Error::Parse("prediction has no rows".into()));
    }
    let has_tags = columns[Field::Tags.index()].is_some();
    let mut rows = vec![PredictedRow::default(); n];
    for field in Field::ALL {
        if let Some(col) = columns[field.index()].take() {
            for (row, vals) in rows.iter_mut().zip(col) {
                row.0[field.index()] = vals;
            }
        }
    }
    Ok(ParsedPrediction { rows, has_tags })
}

/// Undoes one level of JSON string escaping.
fn unescape_once(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(o) => out.push(o),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Tolerant reading of a model answer: single or double quotes, optional
/// outer quoting (plain or JSON-escaped), `None`/`null`, trailing commas and
/// surrounding prose. `Tags` may be absent; the other five keys are required
/// and all lists must have the same length.
pub fn parse_prediction(text: &str) -> Result<ParsedPrediction> {
    let (start, end) = match (text.find('{'), text.rfind('}')) {
        (Some(s), Some(e)) if s < e => (s, e),
        _ => return Err(Error::Parse("no mapping found".into())),
    };
    let body = &text[start..=end];
    match parse_mapping(body) {
        Ok(p) => Ok(p),
        Err(first) if body.contains("\\\"") || body.contains("\\'") => parse_mapping(&unescape_once(body)).map_err(|_| first),
        Err(e) => Err(e),
    }
}

/// Minimal chat-completion contract; implementations return the first
/// choice's message content.
pub trait ChatClient {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub prediction: ParsedPrediction,
    pub attempts: usize,
    pub raw: String,
}

pub fn query_messages(prompt: &str) -> [ChatMessage; 2] {
    [
        ChatMessage {
            role: Role::System,
            content: SYSTEM_PROMPT.into(),
        },
        ChatMessage {
            role: Role::User,
            content: prompt.into(),
        },
    ]
}

/// Sends the same request until the answer parses, at most `max_attempts`
/// times. Transport errors end the loop immediately.
pub fn query_finetuned<C: ChatClient + ?Sized>(prompt: &str, client: &mut C, max_attempts: usize) -> Result<QueryOutcome> {
    if max_attempts == 0 {
        return Err(Error::invalid("max_attempts must be at least 1"));
    }
    let messages = query_messages(prompt);
    let mut last_raw = String::new();
    for attempt in 1..=max_attempts {
        let raw = client.complete(&messages).map_err(|e| match e {
            Error::Provider { message, .. } => Error::Provider {
                attempts: attempt,
                message,
            },
            other => Error::Provider {
                attempts: attempt,
                message: other.to_string(),
            },
        })?;
        match parse_prediction(&raw) {
            Ok(prediction) => {
                return Ok(QueryOutcome {
                    prediction,
                    attempts: attempt,
                    raw,
                })
            }
            Err(_) => last_raw = raw,
        }
    }
    Err(Error::Exhausted {
        attempts: max_attempts,
        last_raw,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MappedSelection {
    pub object_ids: Vec<u64>,
    /// Hit score of each selected artwork.
    pub scores: Vec<f64>,
    /// Distinct predicted values that are not in the tag vocabulary.
    pub dropped_values: usize,
}

/// Per-field relative frequencies of the predicted values laid over the tag
/// vocabulary. Out-of-vocabulary values keep their share of the denominator
/// and are otherwise dropped.
pub fn prediction_probabilities(pred: &ParsedPrediction, vocab: &TagVocabulary) -> (TagProbabilityVector, usize) {
    let mut p = TagProbabilityVector::zeros(vocab.len());
    let mut dropped = BTreeMap::new();
    for field in Field::ALL {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        let mut total = 0usize;
        for row in &pred.rows {
            for v in row.get(field) {
                total += 1;
                *counts.entry(v.as_str()).or_default() += 1;
            }
        }
        for (value, c) in counts {
            match vocab.position(value) {
                Some(i) => p.values[i] += c as f64 / total as f64,
                None => {
                    dropped.insert(value, ());
                }
            }
        }
    }
    (p, dropped.len())
}

/// The `rows`-many artworks with the highest hit scores under the
/// prediction's tag frequencies. Empty when no predicted value is known.
pub fn map_prediction_to_artworks(pred: &ParsedPrediction, vocab: &TagVocabulary, postings: &TagPostings) -> Result<MappedSelection> {
    let (p, dropped_values) = prediction_probabilities(pred, vocab);
    if p.values.iter().all(|&v| v <= 0.0) || pred.rows.is_empty() {
        return Ok(MappedSelection {
            dropped_values,
            ..Default::default()
        });
    }
    let ranking = postings.top_k(&p, pred.rows.len())?;
    Ok(MappedSelection {
        object_ids: ranking.0.iter().map(|r| r.object_id).collect(),
        scores: ranking.0.iter().map(|r| r.hit).collect(),
        dropped_values,
    })
}
