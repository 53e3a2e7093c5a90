//! Russian lemmatization for full-text search.
//!
//! Search engines match documents to queries word by word, and Russian
//! inflects heavily enough that a naive engine misses most matches: a
//! document saying `зарубил` never matches a query for `рубить`. The fix is
//! to index and query by lemma — the dictionary headword — instead of the
//! surface form. This crate provides both halves of that fix:
//!
//! * a **compiler** that distills the OpenCorpora morphological dictionary
//!   (a multi-hundred-megabyte XML export) into a compact binary file, and
//! * a **runtime** that loads the compiled file and maps any inflected form
//!   to its possible lemmas and their stable 32-bit hashes.
//!
//! The compact file works by factoring inflection into *paradigms*: tiny
//! `(cut_prefix, cut_suffix, add_prefix, add_suffix)` rewrite rules derived
//! from the longest common substring of a lemma and each of its forms. A
//! few thousand distinct rules cover hundreds of thousands of lemmas, so
//! each word form costs one small map entry rather than a stored string.
//!
//! # Compiling and querying
//!
//! ```
//! use rulemma_core::{invert_index, build_index, serialize, CompiledDictionary, LemmataParser};
//!
//! let xml = r#"<lemmata>
//!     <lemma id="1"><l t="рубить"/><f t="зарубил"/></lemma>
//! </lemmata>"#;
//!
//! let (paradigms, index) = build_index(LemmataParser::new(xml.as_bytes()))?;
//! let words = invert_index(&index);
//! let mut file = Vec::new();
//! serialize(&paradigms, &words, &mut file)?;
//!
//! let dict = CompiledDictionary::load(&file[..])?;
//! let candidates = dict.lemmatize("Зарубил")?;
//! assert_eq!(candidates[0].lemma.as_str(), "рубить");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The file format is two consecutive MessagePack maps: paradigm id to rule
//! quadruple, then word form to parallel `[[lemma hashes], [paradigm ids]]`
//! lists. Builds are deterministic — the same input always produces
//! byte-identical output.

pub mod builder;
pub mod hash;
pub mod ingest;
pub mod paradigm;
pub mod runtime;

mod msgpack;

pub use builder::{
    build_index, build_stats, invert_index, serialize, BuildError, LemmaIndex, ParadigmTable,
    Stats, WordEntry, WordMap,
};
pub use hash::{murmur3_32, LemmaHash};
pub use ingest::{normalize_token, IngestError, LemmaRecord, LemmataParser};
pub use paradigm::{
    longest_common_substring, NormalizeError, Paradigm, ParadigmError, WordForm,
};
pub use runtime::{CompiledDictionary, ConsistencyError, LemmaCandidate, LoadError};
