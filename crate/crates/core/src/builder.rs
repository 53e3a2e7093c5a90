//! Dictionary compilation: from a stream of lemma records to the two-section
//! binary file.
//!
//! The build runs in two steps. First every (lemma, form) pair becomes an
//! entry in a lemma-keyed index, extracting and interning the paradigm on
//! the way; then the index is inverted into a word-form-keyed map — the
//! direction lookups need — and the paradigm table plus word map are written
//! out as two consecutive MessagePack maps.
//!
//! Everything downstream of ingestion is deterministic: the same records in
//! the same order produce byte-identical files. That is what makes compiled
//! dictionaries diffable and cacheable by checksum.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::collections::hash_map::Entry;
use std::io::{self, Write};

use thiserror::Error;

use crate::hash::{murmur3_32, LemmaHash};
use crate::ingest::{IngestError, LemmaRecord};
use crate::msgpack;
use crate::paradigm::{Paradigm, WordForm};

/// Why a dictionary build failed.
#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("write failed: {0}")]
    Io(#[from] io::Error),
}

/// Interning table assigning dense ids to distinct paradigms.
///
/// Ids are handed out in first-encounter order starting from 0, so a table
/// built from a deterministic record stream is itself deterministic.
#[derive(Debug, Default)]
pub struct ParadigmTable {
    by_id: Vec<Paradigm>,
    ids: HashMap<Paradigm, u32>,
}

impl ParadigmTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `paradigm`, assigning the next free one if it has
    /// not been seen before.
    pub fn intern(&mut self, paradigm: Paradigm) -> u32 {
        match self.ids.entry(paradigm) {
            Entry::Occupied(entry) => *entry.get(),
            Entry::Vacant(entry) => {
                let id = u32::try_from(self.by_id.len()).expect("more than 2^32 paradigms");
                self.by_id.push(entry.key().clone());
                entry.insert(id);
                id
            }
        }
    }

    pub fn get(&self, id: u32) -> Option<&Paradigm> {
        self.by_id.get(id as usize)
    }

    pub fn id_of(&self, paradigm: &Paradigm) -> Option<u32> {
        self.ids.get(paradigm).copied()
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    /// Iterates `(id, paradigm)` in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &Paradigm)> {
        self.by_id
            .iter()
            .enumerate()
            .map(|(id, p)| (id as u32, p))
    }
}

impl PartialEq for ParadigmTable {
    fn eq(&self, other: &Self) -> bool {
        self.by_id == other.by_id
    }
}

impl Eq for ParadigmTable {}

/// Lemma-keyed index: hash of the normal form to the set of
/// `(word form, paradigm id)` pairs that resolve to it.
///
/// The set is ordered, which makes iteration — and therefore everything
/// derived from this index — independent of hash-map iteration order.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct LemmaIndex {
    entries: BTreeMap<LemmaHash, BTreeSet<(WordForm, u32)>>,
}

impl LemmaIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, hash: LemmaHash, form: WordForm, paradigm_id: u32) {
        self.entries
            .entry(hash)
            .or_default()
            .insert((form, paradigm_id));
    }

    /// Number of distinct lemma hashes.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, hash: LemmaHash) -> Option<&BTreeSet<(WordForm, u32)>> {
        self.entries.get(&hash)
    }

    pub fn iter(&self) -> impl Iterator<Item = (LemmaHash, &BTreeSet<(WordForm, u32)>)> {
        self.entries.iter().map(|(&hash, set)| (hash, set))
    }
}

/// Lookup data for one word form: parallel lists of lemma hashes and the
/// paradigm ids that rewrite the form into each lemma.
///
/// Pairs are sorted ascending by `(hash, paradigm_id)`; `hashes[k]` always
/// belongs with `paradigm_ids[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordEntry {
    pub hashes: Vec<LemmaHash>,
    pub paradigm_ids: Vec<u32>,
}

/// Word-form-keyed map, the shape lookups and the file format need.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct WordMap {
    entries: BTreeMap<WordForm, WordEntry>,
}

impl WordMap {
    pub fn get(&self, form: &str) -> Option<&WordEntry> {
        self.entries.get(form)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iterates entries in ascending UTF-8 byte order of the word form.
    pub fn iter(&self) -> impl Iterator<Item = (&WordForm, &WordEntry)> {
        self.entries.iter()
    }

    pub(crate) fn insert(&mut self, form: WordForm, entry: WordEntry) -> Option<WordEntry> {
        self.entries.insert(form, entry)
    }
}

/// Sizes of a compiled dictionary, as reported by build logs and `stats`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stats {
    /// Distinct lemma hashes.
    pub lemma_count: usize,
    /// Distinct paradigms.
    pub paradigm_count: usize,
    /// Distinct word forms.
    pub word_form_count: usize,
}

/// Consumes a record stream and builds the paradigm table plus the
/// lemma-keyed index.
///
/// Distinct normal forms that collide on the 32-bit hash are merged by the
/// format; that is worth a warning in the log but never an error — full-text
/// search tolerates an occasional conflated lemma, and the reference corpus
/// has no collisions at all.
pub fn build_index(
    records: impl IntoIterator<Item = Result<LemmaRecord, IngestError>>,
) -> Result<(ParadigmTable, LemmaIndex), BuildError> {
    let mut table = ParadigmTable::new();
    let mut index = LemmaIndex::new();
    let mut first_with_hash: HashMap<LemmaHash, WordForm> = HashMap::new();

    for record in records {
        let record = record?;
        let hash = murmur3_32(record.normal_form.as_str());
        match first_with_hash.entry(hash) {
            Entry::Occupied(earlier) => {
                if earlier.get() != &record.normal_form {
                    log::warn!(
                        "lemma hash collision: {:?} and {:?} both hash to {}; their lemmas will be conflated",
                        earlier.get().as_str(),
                        record.normal_form.as_str(),
                        hash
                    );
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(record.normal_form.clone());
            }
        }
        for form in &record.inflected_forms {
            let paradigm = Paradigm::extract(&record.normal_form, form);
            let paradigm_id = table.intern(paradigm);
            index.insert(hash, form.clone(), paradigm_id);
        }
    }
    Ok((table, index))
}

/// Inverts the lemma-keyed index into the word-form-keyed map.
pub fn invert_index(index: &LemmaIndex) -> WordMap {
    let mut grouped: BTreeMap<&WordForm, BTreeSet<(LemmaHash, u32)>> = BTreeMap::new();
    for (hash, pairs) in index.iter() {
        for (form, paradigm_id) in pairs {
            grouped.entry(form).or_default().insert((hash, *paradigm_id));
        }
    }
    let mut words = WordMap::default();
    for (form, pairs) in grouped {
        let mut hashes = Vec::with_capacity(pairs.len());
        let mut paradigm_ids = Vec::with_capacity(pairs.len());
        for (hash, paradigm_id) in pairs {
            hashes.push(hash);
            paradigm_ids.push(paradigm_id);
        }
        words.insert(
            form.clone(),
            WordEntry {
                hashes,
                paradigm_ids,
            },
        );
    }
    words
}

/// Writes the two-section dictionary file.
///
/// Section one maps paradigm id to the `[cut_prefix, cut_suffix, add_prefix,
/// add_suffix]` quadruple; section two maps each word form to its parallel
/// `[[hashes], [paradigm ids]]` lists. Both sections are MessagePack maps
/// written back to back with no framing between them, keys in ascending
/// order, every value in its shortest encoding — so equal inputs serialize
/// to equal bytes.
pub fn serialize(
    table: &ParadigmTable,
    words: &WordMap,
    out: &mut impl Write,
) -> io::Result<()> {
    msgpack::write_map_len(out, table.len())?;
    for (id, paradigm) in table.iter() {
        msgpack::write_uint(out, u64::from(id))?;
        msgpack::write_array_len(out, 4)?;
        msgpack::write_uint(out, paradigm.cut_prefix as u64)?;
        msgpack::write_uint(out, paradigm.cut_suffix as u64)?;
        msgpack::write_str(out, &paradigm.add_prefix)?;
        msgpack::write_str(out, &paradigm.add_suffix)?;
    }

    msgpack::write_map_len(out, words.len())?;
    for (form, entry) in words.iter() {
        msgpack::write_str(out, form.as_str())?;
        msgpack::write_array_len(out, 2)?;
        msgpack::write_array_len(out, entry.hashes.len())?;
        for hash in &entry.hashes {
            msgpack::write_uint(out, u64::from(hash.value()))?;
        }
        msgpack::write_array_len(out, entry.paradigm_ids.len())?;
        for &paradigm_id in &entry.paradigm_ids {
            msgpack::write_uint(out, u64::from(paradigm_id))?;
        }
    }
    Ok(())
}

/// Counts what a compiled dictionary contains.
pub fn build_stats(table: &ParadigmTable, words: &WordMap) -> Stats {
    let lemma_count = words
        .iter()
        .flat_map(|(_, entry)| entry.hashes.iter().copied())
        .collect::<BTreeSet<_>>()
        .len();
    Stats {
        lemma_count,
        paradigm_count: table.len(),
        word_form_count: words.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wf(s: &str) -> WordForm {
        WordForm::new(s).unwrap()
    }

    fn record(id: u64, normal: &str, rest: &[&str]) -> Result<LemmaRecord, IngestError> {
        let normal_form = wf(normal);
        let mut inflected_forms = vec![normal_form.clone()];
        inflected_forms.extend(rest.iter().map(|s| wf(s)));
        Ok(LemmaRecord {
            id,
            normal_form,
            inflected_forms,
        })
    }

    #[test]
    fn interns_dense_ids_in_first_encounter_order() {
        let mut table = ParadigmTable::new();
        let identity = Paradigm::identity();
        let cut = Paradigm::new(2, 1, "", "ть");
        assert_eq!(table.intern(identity.clone()), 0);
        assert_eq!(table.intern(cut.clone()), 1);
        assert_eq!(table.intern(identity.clone()), 0, "re-interning is stable");
        assert_eq!(table.len(), 2);
        assert_eq!(table.get(0), Some(&identity));
        assert_eq!(table.get(1), Some(&cut));
        assert_eq!(table.get(2), None);
        assert_eq!(table.id_of(&cut), Some(1));
    }

    #[test]
    fn builds_index_for_single_lemma() {
        let (table, index) =
            build_index([record(1, "рубить", &["зарубил"])]).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.get(0), Some(&Paradigm::identity()));
        assert_eq!(table.get(1), Some(&Paradigm::new(2, 1, "", "ть")));

        let hash = murmur3_32("рубить");
        assert_eq!(index.len(), 1);
        let pairs: Vec<_> = index.get(hash).unwrap().iter().cloned().collect();
        assert_eq!(pairs, [(wf("зарубил"), 1), (wf("рубить"), 0)]);
    }

    #[test]
    fn shares_paradigms_across_lemmas() {
        let (table, index) = build_index([
            record(1, "еж", &["ежа", "ежу"]),
            record(2, "стол", &["стола", "столы"]),
        ])
        .unwrap();
        // Both genitives reduce to the same "cut one letter" rule.
        assert_eq!(table.len(), 2);
        assert_eq!(index.len(), 2);
        assert_eq!(
            table.iter().map(|(_, p)| p.clone()).collect::<Vec<_>>(),
            [Paradigm::identity(), Paradigm::new(0, 1, "", "")]
        );
    }

    #[test]
    fn identical_repeated_records_do_not_duplicate_pairs() {
        let (_, index) = build_index([
            record(1, "еж", &["ежа"]),
            record(2, "еж", &["ежа"]),
        ])
        .unwrap();
        assert_eq!(index.len(), 1);
        assert_eq!(index.get(murmur3_32("еж")).unwrap().len(), 2);
    }

    #[test]
    fn ingest_errors_abort_the_build() {
        let err = IngestError::MissingNormalForm {
            id: 4,
            line: 1,
            column: 1,
        };
        let result = build_index([record(1, "еж", &[]), Err(err)]);
        assert!(matches!(
            result.unwrap_err(),
            BuildError::Ingest(IngestError::MissingNormalForm { id: 4, .. })
        ));
    }

    #[test]
    fn colliding_lemmas_still_index_both_spellings() {
        // These two strings really collide under 32-bit murmur3.
        let (_, index) = build_index([
            record(1, "nrnvowhm", &[]),
            record(2, "jqoztgnp", &[]),
        ])
        .unwrap();
        let hash = murmur3_32("nrnvowhm");
        assert_eq!(hash, murmur3_32("jqoztgnp"));
        assert_eq!(index.len(), 1);
        assert_eq!(index.get(hash).unwrap().len(), 2);
    }

    #[test]
    fn inverts_to_word_keyed_map() {
        let (table, index) = build_index([
            record(1, "сталь", &["стали"]),
            record(2, "стать", &["стали", "стал"]),
        ])
        .unwrap();
        let words = invert_index(&index);
        assert_eq!(words.len(), 4); // сталь, стать, стали, стал

        let entry = words.get("стали").unwrap();
        assert_eq!(entry.hashes.len(), 2);
        assert_eq!(entry.paradigm_ids.len(), 2);
        // Pairs are sorted by (hash, paradigm id): стать hashes lower.
        assert_eq!(entry.hashes[0], murmur3_32("стать"));
        assert_eq!(entry.hashes[1], murmur3_32("сталь"));
        // Each paradigm really maps "стали" to its paired lemma.
        for (hash, &pid) in entry.hashes.iter().zip(&entry.paradigm_ids) {
            let lemma = table.get(pid).unwrap().apply(&wf("стали")).unwrap();
            assert_eq!(murmur3_32(lemma.as_str()), *hash);
        }
        assert_eq!(build_stats(&table, &words).lemma_count, 2);
    }

    #[test]
    fn empty_input_serializes_to_two_empty_maps() {
        let (table, index) = build_index([]).unwrap();
        let words = invert_index(&index);
        let mut buf = Vec::new();
        serialize(&table, &words, &mut buf).unwrap();
        assert_eq!(buf, [0x80, 0x80]);
        assert_eq!(
            build_stats(&table, &words),
            Stats {
                lemma_count: 0,
                paradigm_count: 0,
                word_form_count: 0
            }
        );
    }

    #[test]
    fn serialization_is_deterministic() {
        let build = || {
            let (table, index) = build_index([
                record(1, "рубить", &["зарубил"]),
                record(2, "еж", &["ежа", "ежу"]),
            ])
            .unwrap();
            let words = invert_index(&index);
            let mut buf = Vec::new();
            serialize(&table, &words, &mut buf).unwrap();
            buf
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn serialized_bytes_follow_the_documented_layout() {
        let (table, index) = build_index([record(1, "еж", &[])]).unwrap();
        let words = invert_index(&index);
        let mut buf = Vec::new();
        serialize(&table, &words, &mut buf).unwrap();

        let expected = [
            0x81, // section 1: one paradigm
            0x00, // id 0
            0x94, 0x00, 0x00, 0xa0, 0xa0, // [0, 0, "", ""]
            0x81, // section 2: one word form
            0xa4, 0xd0, 0xb5, 0xd0, 0xb6, // "еж"
            0x92, // [hashes, paradigm ids]
            0x91, 0xce, 0x63, 0x18, 0x70, 0x6e, // [1662546030]
            0x91, 0x00, // [0]
        ];
        assert_eq!(buf, expected);
    }

    #[test]
    fn stats_count_distinct_hashes_not_entries() {
        let (table, index) = build_index([
            record(1, "сталь", &["стали"]),
            record(2, "стать", &["стали"]),
        ])
        .unwrap();
        let words = invert_index(&index);
        assert_eq!(
            build_stats(&table, &words),
            Stats {
                lemma_count: 2,
                paradigm_count: 3,
                word_form_count: 3
            }
        );
    }
}
