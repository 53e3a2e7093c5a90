//! Paradigms: compact rewrite rules from an inflected word form to its lemma.
//!
//! A paradigm says "cut so many code points off the front, so many off the
//! back, then glue these strings on". Storing one small rule per word form —
//! instead of the lemma string itself — is what keeps the compiled dictionary
//! an order of magnitude smaller than the source: Russian inflection mostly
//! reuses a few thousand distinct rules across hundreds of thousands of
//! lemmas.
//!
//! Rules are derived with a longest-common-substring alignment between the
//! lemma (normal form) and each inflected form, and the derivation guarantees
//! the round trip: applying the extracted paradigm to the inflected form
//! always reproduces the lemma exactly.
//!
//! All positions and lengths count Unicode code points, never bytes —
//! Cyrillic text is two bytes per letter in UTF-8, and byte arithmetic would
//! cut letters in half.

use std::borrow::Borrow;
use std::fmt;

use thiserror::Error;

/// A non-empty token with no internal whitespace, as produced by
/// normalization (see `normalize_token` in the ingest module).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordForm(String);

/// Why a raw token was rejected during normalization.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("token is empty")]
    EmptyToken,
    #[error("token {token:?} contains internal whitespace")]
    WhitespaceInToken { token: String },
}

impl WordForm {
    /// Wraps `text`, rejecting empty strings and strings with whitespace.
    ///
    /// The text is taken as-is; use `normalize_token` to lowercase and fold
    /// raw input first.
    pub fn new(text: impl Into<String>) -> Result<Self, NormalizeError> {
        let text = text.into();
        if text.is_empty() {
            return Err(NormalizeError::EmptyToken);
        }
        if text.chars().any(char::is_whitespace) {
            return Err(NormalizeError::WhitespaceInToken { token: text });
        }
        Ok(WordForm(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Length in code points (not bytes).
    pub fn char_len(&self) -> usize {
        self.0.chars().count()
    }
}

impl fmt::Display for WordForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for WordForm {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for WordForm {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for WordForm {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for WordForm {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// Rewrite rule mapping an inflected form to its lemma.
///
/// Applying the rule cuts `cut_prefix` code points from the front of the
/// form and `cut_suffix` from the back, then prepends `add_prefix` and
/// appends `add_suffix` to what is left.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Paradigm {
    pub cut_prefix: usize,
    pub cut_suffix: usize,
    pub add_prefix: String,
    pub add_suffix: String,
}

/// Why a paradigm could not be applied to a word form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParadigmError {
    #[error(
        "paradigm cuts {cut_prefix}+{cut_suffix} code points from a word of length {word_len}"
    )]
    CutExceedsLength {
        word_len: usize,
        cut_prefix: usize,
        cut_suffix: usize,
    },
    #[error("paradigm application produced an invalid word form")]
    InvalidResult,
}

impl Paradigm {
    pub fn new(
        cut_prefix: usize,
        cut_suffix: usize,
        add_prefix: impl Into<String>,
        add_suffix: impl Into<String>,
    ) -> Self {
        Paradigm {
            cut_prefix,
            cut_suffix,
            add_prefix: add_prefix.into(),
            add_suffix: add_suffix.into(),
        }
    }

    /// The rule that maps every form to itself: `(0, 0, "", "")`.
    pub fn identity() -> Self {
        Paradigm::new(0, 0, "", "")
    }

    pub fn is_identity(&self) -> bool {
        self.cut_prefix == 0
            && self.cut_suffix == 0
            && self.add_prefix.is_empty()
            && self.add_suffix.is_empty()
    }

    /// Applies the rule to `form`, producing the lemma it encodes.
    ///
    /// Fails if the cuts are longer than the form, or if a degenerate rule
    /// (possible only through hand-built or corrupted data, never through
    /// `extract`) would produce an empty or whitespace-bearing result.
    pub fn apply(&self, form: &WordForm) -> Result<WordForm, ParadigmError> {
        let s = form.as_str();
        let total = form.char_len();
        let cut = self.cut_prefix.checked_add(self.cut_suffix);
        if cut.is_none() || cut.unwrap() > total {
            return Err(ParadigmError::CutExceedsLength {
                word_len: total,
                cut_prefix: self.cut_prefix,
                cut_suffix: self.cut_suffix,
            });
        }
        let start = byte_offset(s, self.cut_prefix);
        let end = byte_offset(s, total - self.cut_suffix);
        let core = &s[start..end];

        let mut out =
            String::with_capacity(self.add_prefix.len() + core.len() + self.add_suffix.len());
        out.push_str(&self.add_prefix);
        out.push_str(core);
        out.push_str(&self.add_suffix);
        WordForm::new(out).map_err(|_| ParadigmError::InvalidResult)
    }

    /// Derives the rule that rewrites `inflected` into `normal`.
    ///
    /// The two forms are aligned on their longest common substring; the rule
    /// cuts whatever of `inflected` lies outside the alignment and adds
    /// whatever of `normal` does. When the forms share nothing, the rule
    /// degenerates to "erase the form, write out the lemma". By construction
    /// `extract(n, i).apply(i) == n` for every pair.
    pub fn extract(normal: &WordForm, inflected: &WordForm) -> Paradigm {
        let n = normal.as_str();
        let i = inflected.as_str();
        let (start_n, start_i, len) = longest_common_substring(n, i);
        if len == 0 {
            return Paradigm::new(0, inflected.char_len(), "", n);
        }
        let cut_prefix = start_i;
        let cut_suffix = inflected.char_len() - start_i - len;
        let prefix_end = byte_offset(n, start_n);
        let suffix_start = byte_offset(n, start_n + len);
        Paradigm::new(cut_prefix, cut_suffix, &n[..prefix_end], &n[suffix_start..])
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{:?},{:?})",
            self.cut_prefix, self.cut_suffix, self.add_prefix, self.add_suffix
        )
    }
}

/// Byte offset of the code point at index `idx`, or the string's length if
/// `idx` is one past the end.
fn byte_offset(s: &str, idx: usize) -> usize {
    s.char_indices().nth(idx).map_or(s.len(), |(i, _)| i)
}

/// Finds the longest common substring of `a` and `b` in code points.
///
/// Returns `(start_a, start_b, len)`, all in code points. Ties on length are
/// broken toward the smallest `start_a`, then the smallest `start_b`; two
/// strings with no common symbol yield `(0, 0, 0)`.
///
/// Dynamic programming over suffix-match lengths, O(|a|·|b|) time and
/// O(|b|) memory. Word forms are short, so quadratic is plenty.
pub fn longest_common_substring(a: &str, b: &str) -> (usize, usize, usize) {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() || b.is_empty() {
        return (0, 0, 0);
    }

    // prev[j+1] = length of the common suffix of a[..i] and b[..j+1].
    let mut prev = vec![0u32; b.len() + 1];
    let mut cur = vec![0u32; b.len() + 1];
    let mut best = (0, 0, 0);

    for (i, &ca) in a.iter().enumerate() {
        for (j, &cb) in b.iter().enumerate() {
            let len = if ca == cb { prev[j] + 1 } else { 0 };
            cur[j + 1] = len;
            let len = len as usize;
            // Strict '>' keeps the first maximum: scanning row-major means
            // the earliest end in `a`, then the earliest end in `b`, which
            // for a fixed length is exactly the smallest starts.
            if len > best.2 {
                best = (i + 1 - len, j + 1 - len, len);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}
