//! Streaming ingestion of OpenCorpora dictionary XML.
//!
//! The OpenCorpora export is a single XML document in the hundreds of
//! megabytes; only its `<lemmata>` section matters here. The parser walks
//! the document as a SAX-style event stream and yields one [`LemmaRecord`]
//! per `<lemma>` element, so memory stays flat no matter how large the input
//! is — nothing outside the current lemma is ever held.
//!
//! Every surrounding section (`<grammemes>`, `<restrictions>`,
//! `<linktypes>`, ...) is skipped, as are the grammeme annotations inside
//! `<l>` and `<f>` elements. Tokens are normalized on the way in; see
//! [`normalize_token`].

use std::collections::HashSet;
use std::collections::VecDeque;
use std::io::{self, BufReader, Read};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use crate::paradigm::{NormalizeError, WordForm};

/// One dictionary lemma: its identifier, normal form, and all word forms.
///
/// The normal form is always `inflected_forms[0]`; the remaining forms keep
/// document order with duplicates dropped (first occurrence wins).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaRecord {
    pub id: u64,
    pub normal_form: WordForm,
    pub inflected_forms: Vec<WordForm>,
}

/// Why ingestion of the XML stopped.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    MalformedXml {
        line: u64,
        column: u64,
        message: String,
    },
    #[error("lemma {id} at line {line}, column {column} has no <l> normal form")]
    MissingNormalForm { id: u64, line: u64, column: u64 },
    #[error("duplicate lemma id {id} at line {line}, column {column}")]
    DuplicateLemmaId { id: u64, line: u64, column: u64 },
    #[error("invalid token at line {line}, column {column}: {source}")]
    InvalidToken {
        line: u64,
        column: u64,
        #[source]
        source: NormalizeError,
    },
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
}

/// Normalizes a raw token: trims surrounding whitespace, lowercases, and —
/// when `fold_yo` is set — folds `ё` to `е`.
///
/// A token that is empty after trimming, or still contains whitespace
/// inside, is rejected. Normalizing an already-normalized token is a no-op.
pub fn normalize_token(raw: &str, fold_yo: bool) -> Result<WordForm, NormalizeError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(NormalizeError::EmptyToken);
    }
    if trimmed.chars().any(char::is_whitespace) {
        return Err(NormalizeError::WhitespaceInToken {
            token: trimmed.to_string(),
        });
    }
    let mut text = trimmed.to_lowercase();
    if fold_yo && text.contains('ё') {
        text = text.replace('ё', "е");
    }
    WordForm::new(text)
}

/// Maps absolute byte offsets to 1-based line/column pairs.
///
/// Newline offsets are recorded as bytes stream past; offsets older than the
/// parser's position are folded into running totals, so a multi-gigabyte
/// input never holds more than one event's worth of offsets.
#[derive(Debug, Default)]
struct LineTracker {
    folded_newlines: u64,
    last_folded: Option<u64>,
    recent: VecDeque<u64>,
}

impl LineTracker {
    fn record(&mut self, offset: u64) {
        self.recent.push_back(offset);
    }

    /// Drops recorded newlines strictly before `watermark`. Afterwards
    /// `line_col` may only be asked about positions at or past it.
    fn advance(&mut self, watermark: u64) {
        while self.recent.front().is_some_and(|&off| off < watermark) {
            self.last_folded = self.recent.pop_front();
            self.folded_newlines += 1;
        }
    }

    fn line_col(&self, pos: u64) -> (u64, u64) {
        let mut line = self.folded_newlines;
        let mut last = self.last_folded;
        for &off in &self.recent {
            if off >= pos {
                break;
            }
            line += 1;
            last = Some(off);
        }
        let column = match last {
            Some(off) => pos - off,
            None => pos + 1,
        };
        (line + 1, column)
    }
}

/// `Read` adapter that notes the offset of every newline it passes through.
struct CountingReader<R> {
    inner: R,
    offset: u64,
    tracker: LineTracker,
}

impl<R> CountingReader<R> {
    fn new(inner: R) -> Self {
        CountingReader {
            inner,
            offset: 0,
            tracker: LineTracker::default(),
        }
    }
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        for (i, &b) in buf[..n].iter().enumerate() {
            if b == b'\n' {
                self.tracker.record(self.offset + i as u64);
            }
        }
        self.offset += n as u64;
        Ok(n)
    }
}

/// Lemma being assembled between `<lemma>` and `</lemma>`.
struct PartialRecord {
    id: u64,
    start: (u64, u64),
    normal_form: Option<WordForm>,
    inflected_forms: Vec<WordForm>,
}

/// What one handled event means for the output stream.
enum Step {
    Continue,
    Emit(LemmaRecord),
    Finished,
}

/// Streaming parser over the `<lemmata>` section of an OpenCorpora export.
///
/// Iterate it to get `Result<LemmaRecord, IngestError>` items in document
/// order. Iteration ends at `</lemmata>` — trailing sections are never read
/// — or at the first error, which is yielded once before the stream ends.
pub struct LemmataParser<R: Read> {
    state: ParserState<R>,
    // Kept outside `state` so the borrow of the event buffer does not pin
    // the rest of the parser while an event is being handled.
    buf: Vec<u8>,
}

struct ParserState<R: Read> {
    reader: Reader<BufReader<CountingReader<R>>>,
    fold_yo: bool,
    in_lemmata: bool,
    current: Option<PartialRecord>,
    seen_ids: HashSet<u64>,
    finished: bool,
}

impl<R: Read> LemmataParser<R> {
    /// Parses `source` with `ё` folding on, the default used everywhere.
    pub fn new(source: R) -> Self {
        Self::with_fold_yo(source, true)
    }

    pub fn with_fold_yo(source: R, fold_yo: bool) -> Self {
        let reader = Reader::from_reader(BufReader::new(CountingReader::new(source)));
        LemmataParser {
            state: ParserState {
                reader,
                fold_yo,
                in_lemmata: false,
                current: None,
                seen_ids: HashSet::new(),
                finished: false,
            },
            buf: Vec::new(),
        }
    }
}

impl<R: Read> ParserState<R> {
    fn line_col(&mut self, pos: u64) -> (u64, u64) {
        self.reader.get_mut().get_mut().tracker.line_col(pos)
    }

    fn malformed(&mut self, pos: u64, message: impl Into<String>) -> IngestError {
        let (line, column) = self.line_col(pos);
        IngestError::MalformedXml {
            line,
            column,
            message: message.into(),
        }
    }

    /// Reads the `t` attribute of an `<l>` or `<f>` element, normalized.
    fn token_attribute(&mut self, tag: &BytesStart<'_>) -> Result<WordForm, IngestError> {
        let pos = self.reader.buffer_position();
        let raw = match tag.try_get_attribute("t") {
            Ok(Some(attr)) => match attr.unescape_value() {
                Ok(value) => value.into_owned(),
                Err(e) => return Err(self.malformed(pos, e.to_string())),
            },
            Ok(None) => {
                let name = String::from_utf8_lossy(tag.name().as_ref()).into_owned();
                return Err(self.malformed(pos, format!("<{name}> element has no t attribute")));
            }
            Err(e) => return Err(self.malformed(pos, e.to_string())),
        };
        normalize_token(&raw, self.fold_yo).map_err(|source| {
            let (line, column) = self.line_col(pos);
            IngestError::InvalidToken {
                line,
                column,
                source,
            }
        })
    }

    /// Opens a new record for a `<lemma>` start tag.
    fn begin_lemma(&mut self, tag: &BytesStart<'_>) -> Result<(), IngestError> {
        let pos = self.reader.buffer_position();
        let id = match tag.try_get_attribute("id") {
            Ok(Some(attr)) => match attr.unescape_value() {
                Ok(value) => match value.trim().parse::<u64>() {
                    Ok(id) => id,
                    Err(_) => {
                        return Err(
                            self.malformed(pos, format!("lemma id {value:?} is not an integer"))
                        )
                    }
                },
                Err(e) => return Err(self.malformed(pos, e.to_string())),
            },
            Ok(None) => return Err(self.malformed(pos, "<lemma> element has no id attribute")),
            Err(e) => return Err(self.malformed(pos, e.to_string())),
        };
        if !self.seen_ids.insert(id) {
            let (line, column) = self.line_col(pos);
            return Err(IngestError::DuplicateLemmaId { id, line, column });
        }
        self.current = Some(PartialRecord {
            id,
            start: self.line_col(pos),
            normal_form: None,
            inflected_forms: Vec::new(),
        });
        Ok(())
    }

    /// Closes the current record, checking it acquired a normal form.
    fn finish_lemma(&mut self) -> Result<Option<LemmaRecord>, IngestError> {
        let Some(partial) = self.current.take() else {
            return Ok(None); // stray </lemma>; not ours to judge
        };
        let (line, column) = partial.start;
        match partial.normal_form {
            Some(normal_form) => Ok(Some(LemmaRecord {
                id: partial.id,
                normal_form,
                inflected_forms: partial.inflected_forms,
            })),
            None => Err(IngestError::MissingNormalForm {
                id: partial.id,
                line,
                column,
            }),
        }
    }

    /// Handles one `<l>`/`<f>` element inside the current lemma.
    fn push_form(&mut self, tag: &BytesStart<'_>, is_normal: bool) -> Result<(), IngestError> {
        if self.current.is_none() {
            return Ok(()); // <l>/<f> outside a lemma; skipped like any junk
        }
        let form = self.token_attribute(tag)?;
        let partial = self.current.as_mut().unwrap();
        if is_normal {
            if partial.normal_form.is_none() {
                partial.normal_form = Some(form.clone());
                // The normal form leads the form list so every lemma
                // lemmatizes to itself.
                partial.inflected_forms.insert(0, form);
            }
            return Ok(());
        }
        if !partial.inflected_forms.contains(&form) {
            partial.inflected_forms.push(form);
        }
        Ok(())
    }

    fn handle_event(&mut self, event: Event<'_>) -> Result<Step, IngestError> {
        // The reader sits just past the event; folding line bookkeeping up
        // to here keeps the tracker small and still answers any position
        // query this event can raise.
        let watermark = self.reader.buffer_position();
        self.reader.get_mut().get_mut().tracker.advance(watermark);

        match event {
            Event::Start(ref tag) => self.handle_open(tag, false),
            Event::Empty(ref tag) => self.handle_open(tag, true),
            Event::End(ref tag) => match tag.name().as_ref() {
                b"lemma" => Ok(match self.finish_lemma()? {
                    Some(record) => Step::Emit(record),
                    None => Step::Continue,
                }),
                // Everything after </lemmata> is irrelevant; stop instead
                // of draining the rest of the file.
                b"lemmata" => Ok(Step::Finished),
                _ => Ok(Step::Continue),
            },
            Event::Eof => {
                if self.current.is_some() || self.in_lemmata {
                    let pos = self.reader.buffer_position();
                    return Err(self.malformed(pos, "unexpected end of file inside <lemmata>"));
                }
                Ok(Step::Finished)
            }
            _ => Ok(Step::Continue), // text, comments, declarations, ...
        }
    }

    /// Handles a start or self-closing tag.
    fn handle_open(&mut self, tag: &BytesStart<'_>, is_empty: bool) -> Result<Step, IngestError> {
        match tag.name().as_ref() {
            b"lemmata" => {
                if is_empty {
                    return Ok(Step::Finished); // <lemmata/>: empty dictionary
                }
                self.in_lemmata = true;
            }
            b"lemma" if self.in_lemmata && self.current.is_none() => {
                self.begin_lemma(tag)?;
                if is_empty {
                    // A childless <lemma/> can have no normal form.
                    self.finish_lemma()?;
                }
            }
            b"l" => self.push_form(tag, true)?,
            b"f" => self.push_form(tag, false)?,
            _ => {} // grammemes, links, <g> annotations, ...
        }
        Ok(Step::Continue)
    }
}

impl<R: Read> Iterator for LemmataParser<R> {
    type Item = Result<LemmaRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.state.finished {
            return None;
        }
        loop {
            self.buf.clear();
            let step = match self.state.reader.read_event_into(&mut self.buf) {
                Ok(event) => self.state.handle_event(event),
                Err(quick_xml::Error::Io(io_err)) => {
                    Err(IngestError::Io(io::Error::new(io_err.kind(), io_err.to_string())))
                }
                Err(other) => {
                    let pos = self.state.reader.error_position();
                    Err(self.state.malformed(pos, other.to_string()))
                }
            };
            match step {
                Ok(Step::Continue) => continue,
                Ok(Step::Emit(record)) => return Some(Ok(record)),
                Ok(Step::Finished) => {
                    self.state.finished = true;
                    return None;
                }
                Err(e) => {
                    self.state.finished = true;
                    return Some(Err(e));
                }
            }
        }
    }
}
