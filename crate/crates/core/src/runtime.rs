//! Lookup runtime over a compiled dictionary.
//!
//! Loading eagerly decodes and validates the whole file — paradigm ids must
//! be dense, every id a word form mentions must exist, the two parallel
//! lists of an entry must line up — so that lookups can proceed without
//! re-checking structure. What lookups do still verify, per candidate, is
//! semantic consistency: the lemma reconstructed by the paradigm must hash
//! to the value stored next to it. A mismatch means the file was built by a
//! writer whose hashing or paradigm semantics disagree with ours, and that
//! must surface as an error, not as silently wrong search results.

use std::io::{self, Read};

use thiserror::Error;

use crate::builder::{build_stats, ParadigmTable, Stats, WordEntry, WordMap};
use crate::hash::{murmur3_32, LemmaHash};
use crate::ingest::normalize_token;
use crate::msgpack::{DecodeError, Decoder};
use crate::paradigm::{Paradigm, ParadigmError, WordForm};

/// Why a dictionary file failed to load.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("invalid dictionary at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("word form {form:?} refers to paradigm {id}, but the table has {table_len} entries")]
    DanglingParadigmId {
        form: String,
        id: u64,
        table_len: usize,
    },
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
}

impl From<DecodeError> for LoadError {
    fn from(e: DecodeError) -> Self {
        LoadError::Format {
            offset: e.offset(),
            message: e.to_string(),
        }
    }
}

/// Why a lookup could not trust the dictionary's answer.
#[derive(Debug, Error)]
pub enum ConsistencyError {
    #[error(
        "form {form:?} with paradigm {paradigm_id} reconstructs {lemma:?} hashing to {actual}, but the file stores {stored}"
    )]
    HashMismatch {
        form: String,
        paradigm_id: u32,
        lemma: String,
        stored: LemmaHash,
        actual: LemmaHash,
    },
    #[error("form {form:?} cannot take paradigm {paradigm_id}: {source}")]
    BadParadigm {
        form: String,
        paradigm_id: u32,
        #[source]
        source: ParadigmError,
    },
}

/// One way of reading a word form: the lemma it may belong to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaCandidate {
    pub lemma: WordForm,
    pub lemma_hash: LemmaHash,
    pub paradigm_id: u32,
}

/// A dictionary loaded into memory, ready for lookups.
///
/// All query methods take `&self` and leave the dictionary untouched.
#[derive(Debug)]
pub struct CompiledDictionary {
    paradigms: ParadigmTable,
    words: WordMap,
    fold_yo: bool,
}

impl CompiledDictionary {
    /// Reads and validates a two-section dictionary file.
    pub fn load(mut source: impl Read) -> Result<Self, LoadError> {
        let mut bytes = Vec::new();
        source.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, LoadError> {
        // Every encoded element takes at least one byte, so a declared
        // count larger than what is left to read is a lie; rejecting it
        // up front keeps crafted headers from forcing huge allocations.
        fn guard_count(count: usize, d: &Decoder<'_>, total: usize) -> Result<(), LoadError> {
            let remaining = total - d.position();
            if count > remaining {
                return Err(LoadError::Format {
                    offset: d.position(),
                    message: format!(
                        "declared count {count} exceeds the {remaining} bytes remaining"
                    ),
                });
            }
            Ok(())
        }

        let mut d = Decoder::new(bytes);

        // Section 1: paradigm id -> [cut_prefix, cut_suffix, add_prefix,
        // add_suffix]. Writers emit ids in ascending order, but readers may
        // not rely on map order — only on the ids being dense.
        let paradigm_count = d.read_map_len()?;
        guard_count(paradigm_count, &d, bytes.len())?;
        let mut slots: Vec<Option<Paradigm>> = vec![None; paradigm_count];
        for _ in 0..paradigm_count {
            let id_offset = d.position();
            let id = d.read_uint()?;
            let arity = d.read_array_len()?;
            if arity != 4 {
                return Err(LoadError::Format {
                    offset: id_offset,
                    message: format!("paradigm {id} has {arity} fields instead of 4"),
                });
            }
            let cut_prefix = d.read_uint()? as usize;
            let cut_suffix = d.read_uint()? as usize;
            let add_prefix = d.read_str()?.to_owned();
            let add_suffix = d.read_str()?.to_owned();
            let slot = usize::try_from(id)
                .ok()
                .filter(|&i| i < paradigm_count)
                .ok_or_else(|| LoadError::Format {
                    offset: id_offset,
                    message: format!(
                        "paradigm id {id} out of range for a table of {paradigm_count}"
                    ),
                })?;
            if slots[slot].is_some() {
                return Err(LoadError::Format {
                    offset: id_offset,
                    message: format!("paradigm id {id} appears twice"),
                });
            }
            slots[slot] = Some(Paradigm::new(cut_prefix, cut_suffix, add_prefix, add_suffix));
        }
        let mut paradigms = ParadigmTable::new();
        for (slot, paradigm) in slots.into_iter().enumerate() {
            // Every slot is filled: n entries landed in n distinct slots.
            let paradigm = paradigm.expect("dense by construction");
            let id = paradigms.intern(paradigm);
            if id != slot as u32 {
                return Err(LoadError::Format {
                    offset: 0,
                    message: format!(
                        "paradigms {id} and {slot} are identical; the table must be deduplicated"
                    ),
                });
            }
        }

        // Section 2: word form -> [[hashes], [paradigm ids]].
        let word_count = d.read_map_len()?;
        guard_count(word_count, &d, bytes.len())?;
        let mut words = WordMap::default();
        for _ in 0..word_count {
            let entry_offset = d.position();
            let form = d.read_str()?;
            let form = WordForm::new(form).map_err(|e| LoadError::Format {
                offset: entry_offset,
                message: format!("invalid word form key: {e}"),
            })?;
            let arity = d.read_array_len()?;
            if arity != 2 {
                return Err(LoadError::Format {
                    offset: entry_offset,
                    message: format!(
                        "entry for {:?} has {arity} lists instead of 2",
                        form.as_str()
                    ),
                });
            }
            let hash_count = d.read_array_len()?;
            guard_count(hash_count, &d, bytes.len())?;
            let mut hashes = Vec::with_capacity(hash_count);
            for _ in 0..hash_count {
                let offset = d.position();
                let value = d.read_uint()?;
                let value = u32::try_from(value).map_err(|_| LoadError::Format {
                    offset,
                    message: format!("lemma hash {value} exceeds 32 bits"),
                })?;
                hashes.push(LemmaHash::new(value));
            }
            let id_count = d.read_array_len()?;
            if id_count != hash_count {
                return Err(LoadError::Format {
                    offset: entry_offset,
                    message: format!(
                        "entry for {:?} pairs {hash_count} hashes with {id_count} paradigm ids",
                        form.as_str()
                    ),
                });
            }
            if hash_count == 0 {
                return Err(LoadError::Format {
                    offset: entry_offset,
                    message: format!("entry for {:?} has no candidates", form.as_str()),
                });
            }
            let mut paradigm_ids = Vec::with_capacity(id_count);
            for _ in 0..id_count {
                let id = d.read_uint()?;
                let id = usize::try_from(id)
                    .ok()
                    .filter(|&i| i < paradigms.len())
                    .ok_or_else(|| LoadError::DanglingParadigmId {
                        form: form.as_str().to_owned(),
                        id,
                        table_len: paradigms.len(),
                    })?;
                paradigm_ids.push(id as u32);
            }
            if words
                .insert(
                    form.clone(),
                    WordEntry {
                        hashes,
                        paradigm_ids,
                    },
                )
                .is_some()
            {
                return Err(LoadError::Format {
                    offset: entry_offset,
                    message: format!("word form {:?} appears twice", form.as_str()),
                });
            }
        }

        if !d.is_at_end() {
            return Err(LoadError::Format {
                offset: d.position(),
                message: "trailing data after the word form section".to_string(),
            });
        }

        Ok(CompiledDictionary {
            paradigms,
            words,
            fold_yo: true,
        })
    }

    /// Sets whether lookups fold `ё` to `е` when normalizing queries.
    ///
    /// Defaults to on; it must match the setting the dictionary was compiled
    /// with, or `ё`-spelled queries will miss.
    pub fn with_fold_yo(mut self, fold_yo: bool) -> Self {
        self.fold_yo = fold_yo;
        self
    }

    pub fn paradigms(&self) -> &ParadigmTable {
        &self.paradigms
    }

    pub fn words(&self) -> &WordMap {
        &self.words
    }

    pub fn stats(&self) -> Stats {
        build_stats(&self.paradigms, &self.words)
    }

    /// Maps a raw token to its lemma candidates.
    ///
    /// The token is normalized first; a token that does not normalize (empty
    /// or containing whitespace) or is simply absent yields an empty list.
    /// Candidates come back in stored order — ascending `(hash, paradigm
    /// id)` — deduplicated by lemma text, since two entries may reconstruct
    /// the same lemma through different rules.
    pub fn lemmatize(&self, token: &str) -> Result<Vec<LemmaCandidate>, ConsistencyError> {
        let Ok(form) = normalize_token(token, self.fold_yo) else {
            return Ok(Vec::new());
        };
        let Some(entry) = self.words.get(form.as_str()) else {
            return Ok(Vec::new());
        };
        let mut candidates: Vec<LemmaCandidate> = Vec::with_capacity(entry.hashes.len());
        for (&stored, &paradigm_id) in entry.hashes.iter().zip(&entry.paradigm_ids) {
            let paradigm = self
                .paradigms
                .get(paradigm_id)
                .expect("paradigm ids are validated at load");
            let lemma = paradigm
                .apply(&form)
                .map_err(|source| ConsistencyError::BadParadigm {
                    form: form.as_str().to_owned(),
                    paradigm_id,
                    source,
                })?;
            let actual = murmur3_32(lemma.as_str());
            if actual != stored {
                return Err(ConsistencyError::HashMismatch {
                    form: form.as_str().to_owned(),
                    paradigm_id,
                    lemma: lemma.into_string(),
                    stored,
                    actual,
                });
            }
            if !candidates.iter().any(|c| c.lemma == lemma) {
                candidates.push(LemmaCandidate {
                    lemma,
                    lemma_hash: stored,
                    paradigm_id,
                });
            }
        }
        Ok(candidates)
    }

    /// Maps a raw token straight to its stored lemma hashes, for callers —
    /// index writers, query expanders — that never need the lemma text.
    ///
    /// No reconstruction happens, so no consistency check applies; unknown
    /// and unnormalizable tokens give an empty list.
    pub fn lemma_hashes(&self, token: &str) -> Vec<LemmaHash> {
        let Ok(form) = normalize_token(token, self.fold_yo) else {
            return Vec::new();
        };
        let Some(entry) = self.words.get(form.as_str()) else {
            return Vec::new();
        };
        let mut hashes: Vec<LemmaHash> = Vec::with_capacity(entry.hashes.len());
        for &hash in &entry.hashes {
            if !hashes.contains(&hash) {
                hashes.push(hash);
            }
        }
        hashes
    }
}
