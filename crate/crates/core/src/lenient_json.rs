//! JSON reading for `EXPLAIN` captures copied out of database clients.
//!
//! Three deviations from strict JSON are tolerated and nothing else:
//!
//! - non-JSON lines before and after the value (client banners, the echoed
//!   `EXPLAIN` statement, `1 row in set` trailers);
//! - a single trailing comma before `]` or `}`;
//! - duplicate object keys.
//!
//! [`parse_document`] keeps every object entry in source order, which the
//! MariaDB parser needs because older servers repeat the `"table"` key for
//! each table of a join. [`read_lenient_json`] collapses duplicates with the
//! last occurrence winning.

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 256;

/// A parsed JSON value that preserves duplicate keys and number lexemes.
#[derive(Debug, Clone, PartialEq)]
pub enum JsonDoc {
    Null,
    Bool(bool),
    /// The number exactly as written in the source.
    Number(String),
    String(String),
    Array(Vec<JsonDoc>),
    Object(Vec<(String, JsonDoc)>),
}

impl JsonDoc {
    /// Last value stored under `key`, if this is an object.
    pub fn get(&self, key: &str) -> Option<&JsonDoc> {
        match self {
            JsonDoc::Object(entries) => entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn entries(&self) -> &[(String, JsonDoc)] {
        match self {
            JsonDoc::Object(entries) => entries,
            _ => &[],
        }
    }

    pub fn is_object(&self) -> bool {
        matches!(self, JsonDoc::Object(_))
    }

    pub fn as_array(&self) -> Option<&[JsonDoc]> {
        match self {
            JsonDoc::Array(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            JsonDoc::String(s) => Some(s),
            _ => None,
        }
    }

    /// Numeric value of a number, or of a string holding a number
    /// (MySQL writes costs as strings).
    pub fn as_f64(&self) -> Option<f64> {
        let text = match self {
            JsonDoc::Number(n) => n.as_str(),
            JsonDoc::String(s) => s.trim(),
            _ => return None,
        };
        text.parse::<f64>().ok().filter(|v| v.is_finite())
    }

    /// Scalar rendered as attribute text; arrays of scalars are joined with
    /// `", "`. Objects and nested arrays yield `None`.
    pub fn scalar_text(&self) -> Option<String> {
        match self {
            JsonDoc::Null => Some("null".into()),
            JsonDoc::Bool(b) => Some(b.to_string()),
            JsonDoc::Number(n) => Some(n.clone()),
            JsonDoc::String(s) => Some(s.clone()),
            JsonDoc::Array(items) => items
                .iter()
                .map(|item| match item {
                    JsonDoc::Array(_) | JsonDoc::Object(_) => None,
                    other => other.scalar_text(),
                })
                .collect::<Option<Vec<_>>>()
                .map(|parts| parts.join(", ")),
            JsonDoc::Object(_) => None,
        }
    }

    /// Depth-first search for an object key anywhere below this value.
    pub fn contains_key(&self, key: &str) -> bool {
        match self {
            JsonDoc::Object(entries) => entries
                .iter()
                .any(|(k, v)| k == key || v.contains_key(key)),
            JsonDoc::Array(items) => items.iter().any(|v| v.contains_key(key)),
            _ => false,
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            JsonDoc::Null => Value::Null,
            JsonDoc::Bool(b) => Value::Bool(*b),
            JsonDoc::Number(n) => n
                .parse::<Number>()
                .map(Value::Number)
                .unwrap_or_else(|_| Value::String(n.clone())),
            JsonDoc::String(s) => Value::String(s.clone()),
            JsonDoc::Array(items) => Value::Array(items.iter().map(JsonDoc::to_value).collect()),
            JsonDoc::Object(entries) => {
                let mut map = Map::new();
                for (k, v) in entries {
                    map.insert(k.clone(), v.to_value());
                }
                Value::Object(map)
            }
        }
    }
}

/// Reads a JSON value leniently; duplicate keys resolve to the last one.
pub fn read_lenient_json(text: &str) -> Result<Value> {
    parse_document(text).map(|doc| doc.to_value())
}

/// Reads a JSON value leniently, keeping duplicate keys in source order.
pub fn parse_document(text: &str) -> Result<JsonDoc> {
    let mut whole = Parser::new(text, 0);
    let first_err = match whole.value_then_end() {
        Ok(doc) => return Ok(doc),
        Err(e) => e,
    };

    // Candidates nested inside a failed attempt are skipped so a broken
    // document never yields one of its inner objects.
    let mut best: Option<ParseFailure> = None;
    let mut resume = 0;
    for (start, ch) in text.char_indices() {
        if start < resume || (ch != '{' && ch != '[') {
            continue;
        }
        let mut parser = Parser::new(text, start);
        match parser.value() {
            Ok(doc) => return Ok(doc),
            Err(e) => {
                resume = e.pos;
                if best.as_ref().is_none_or(|b| e.pos > b.pos) {
                    best = Some(e);
                }
            }
        }
    }
    let failure = best.unwrap_or(first_err);
    let (line, column) = line_col(text, failure.pos);
    Err(Error::Json {
        line,
        column,
        reason: failure.reason,
    })
}

fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

#[derive(Debug)]
struct ParseFailure {
    pos: usize,
    reason: String,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    depth: usize,
}

type PResult<T> = std::result::Result<T, ParseFailure>;

impl<'a> Parser<'a> {
    fn new(src: &'a str, pos: usize) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos,
            depth: 0,
        }
    }

    fn fail<T>(&self, reason: impl Into<String>) -> PResult<T> {
        Err(ParseFailure {
            pos: self.pos,
            reason: reason.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(b) = self.bytes.get(self.pos) {
            if matches!(b, b' ' | b'\t' | b'\n' | b'\r') {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn value_then_end(&mut self) -> PResult<JsonDoc> {
        let doc = self.value()?;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return self.fail("trailing characters after JSON value");
        }
        Ok(doc)
    }

    fn value(&mut self) -> PResult<JsonDoc> {
        self.skip_ws();
        match self.peek() {
            None => self.fail("unexpected end of input"),
            Some(b'{') => self.object(),
            Some(b'[') => self.array(),
            Some(b'"') => self.string().map(JsonDoc::String),
            Some(b't') => self.literal("true", JsonDoc::Bool(true)),
            Some(b'f') => self.literal("false", JsonDoc::Bool(false)),
            Some(b'n') => self.literal("null", JsonDoc::Null),
            Some(b'-' | b'0'..=b'9') => self.number(),
            Some(_) => self.fail("expected a JSON value"),
        }
    }

    fn literal(&mut self, word: &str, doc: JsonDoc) -> PResult<JsonDoc> {
        if self.src[self.pos..].starts_with(word) {
            self.pos += word.len();
            Ok(doc)
        } else {
            self.fail(format!("expected `{word}`"))
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.fail("nesting too deep");
        }
        Ok(())
    }

    fn object(&mut self) -> PResult<JsonDoc> {
        self.enter()?;
        self.pos += 1;
        let mut entries = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b'}') {
            self.pos += 1;
            self.depth -= 1;
            return Ok(JsonDoc::Object(entries));
        }
        loop {
            self.skip_ws();
            if self.peek() != Some(b'"') {
                return self.fail("expected an object key");
            }
            let key = self.string()?;
            self.skip_ws();
            if self.peek() != Some(b':') {
                return self.fail("expected `:` after object key");
            }
            self.pos += 1;
            let value = self.value()?;
            entries.push((key, value));
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    self.skip_ws();
                    if self.peek() == Some(b'}') {
                        self.pos += 1;
                        break;
                    }
                }
                Some(b'}') => {
                    self.pos += 1;
                    break;
                }
                _ => return self.fail("expected `,` or `}`"),
            }
        }
        self.depth -= 1;
        Ok(JsonDoc::Object(entries))
    }

    fn array(&mut self) -> PResult<JsonDoc> {
        self.enter()?;
        self.pos += 1;
        let mut items = Vec::new();
        self.skip_ws();
        if self.peek() == Some(b']') {
            self.pos += 1;
            self.depth -= 1;
            return Ok(JsonDoc::Array(items));
        }
        loop {
            items.push(self.value()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    self.skip_ws();
                    if self.peek() == Some(b']') {
                        self.pos += 1;
                        break;
                    }
                }
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => return self.fail("expected `,` or `]`"),
            }
        }
        self.depth -= 1;
        Ok(JsonDoc::Array(items))
    }

    fn hex4(&mut self) -> PResult<u32> {
        let digits = self
            .src
            .get(self.pos..self.pos + 4)
            .filter(|d| d.bytes().all(|b| b.is_ascii_hexdigit()));
        match digits {
            Some(d) => {
                self.pos += 4;
                Ok(u32::from_str_radix(d, 16).unwrap())
            }
            None => self.fail("invalid \\u escape"),
        }
    }

    fn string(&mut self) -> PResult<String> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            let start = self.pos;
            while let Some(b) = self.peek() {
                if b == b'"' || b == b'\\' || b < 0x20 {
                    break;
                }
                self.pos += 1;
            }
            out.push_str(&self.src[start..self.pos]);
            match self.peek() {
                None => return self.fail("unterminated string"),
                Some(b'"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let Some(esc) = self.peek() else {
                        return self.fail("unterminated escape");
                    };
                    self.pos += 1;
                    match esc {
                        b'"' => out.push('"'),
                        b'\\' => out.push('\\'),
                        b'/' => out.push('/'),
                        b'b' => out.push('\u{8}'),
                        b'f' => out.push('\u{c}'),
                        b'n' => out.push('\n'),
                        b'r' => out.push('\r'),
                        b't' => out.push('\t'),
                        b'u' => {
                            let hi = self.hex4()?;
                            let code = if (0xD800..0xDC00).contains(&hi) {
                                if !self.src[self.pos..].starts_with("\\u") {
                                    return self.fail("unpaired surrogate");
                                }
                                self.pos += 2;
                                let lo = self.hex4()?;
                                if !(0xDC00..0xE000).contains(&lo) {
                                    return self.fail("invalid low surrogate");
                                }
                                0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
                            } else {
                                hi
                            };
                            match char::from_u32(code) {
                                Some(c) => out.push(c),
                                None => return self.fail("invalid unicode escape"),
                            }
                        }
                        _ => return self.fail("invalid escape"),
                    }
                }
                Some(_) => return self.fail("control character in string"),
            }
        }
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        self.pos - start
    }

    fn number(&mut self) -> PResult<JsonDoc> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        match self.peek() {
            Some(b'0') => self.pos += 1,
            Some(b'1'..=b'9') => {
                self.digits();
            }
            _ => return self.fail("invalid number"),
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            if self.digits() == 0 {
                return self.fail("expected digits after decimal point");
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return self.fail("expected exponent digits");
            }
        }
        Ok(JsonDoc::Number(self.src[start..self.pos].to_string()))
    }
}
