//! Acceptance gate for the toolkit: one test per criterion, each printing a
//! single `[acceptance] ... PASS` line (visible with `--nocapture`). A
//! failing criterion fails its test.
//!
//! The oracles here are deliberately independent of the production code:
//! LCSS lengths come from substring enumeration rather than the shipped
//! dynamic program, hash vectors were pinned from a third-party
//! implementation, and the file format is re-read with a generic
//! MessagePack library.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rulemma_core::{
    build_index, build_stats, invert_index, longest_common_substring, murmur3_32, serialize,
    CompiledDictionary, LemmataParser, Paradigm, WordForm,
};

const SMALL_XML: &str = include_str!("../../core/tests/data/lemmata_small.xml");
const CORPUS_XML: &str = include_str!("../../core/tests/data/fixture_corpus.xml");
const VECTORS: &str = include_str!("../../core/tests/data/murmur3_vectors.tsv");

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rulemma"))
}

fn compile_with_cli(dir: &Path, xml: &str) -> PathBuf {
    let xml_path = dir.join("dict.xml");
    fs::write(&xml_path, xml).unwrap();
    let dict_path = dir.join("dict.bin");
    let output = bin()
        .arg("compile")
        .arg(&xml_path)
        .arg("-o")
        .arg(&dict_path)
        .output()
        .unwrap();
    assert!(output.status.success(), "compile failed: {output:?}");
    dict_path
}

/// Criterion 1: 10,000 randomized Cyrillic pairs satisfy
/// apply(extract(n, i), i) == n, in under five seconds.
#[test]
fn acceptance_01_round_trip_property() {
    let alphabet: Vec<char> = ('а'..='я').chain(['ё']).collect();
    let mut rng = StdRng::seed_from_u64(0x7261_6e64);
    let random_form = |rng: &mut StdRng| {
        let len = rng.random_range(1..=20);
        let text: String = (0..len)
            .map(|_| alphabet[rng.random_range(0..alphabet.len())])
            .collect();
        WordForm::new(text).unwrap()
    };

    let started = Instant::now();
    for case in 0..10_000 {
        let normal = random_form(&mut rng);
        let inflected = random_form(&mut rng);
        let paradigm = Paradigm::extract(&normal, &inflected);
        let recovered = paradigm
            .apply(&inflected)
            .unwrap_or_else(|e| panic!("case {case}: {paradigm} failed on {inflected}: {e}"));
        assert_eq!(
            recovered, normal,
            "case {case}: {paradigm} applied to {inflected}"
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(5),
        "10,000 round trips took {elapsed:?}"
    );
    println!("[acceptance] round-trip property (10,000 pairs in {elapsed:?}): PASS");
}

/// Criterion 2: the shipped LCSS agrees with a brute-force oracle on every
/// pair of strings up to length 8 over a 3-symbol alphabet.
///
/// 9,841 strings per side (lengths 0..=8 over {a, b, c}) make ~96.8 million
/// ordered pairs. The oracle knows nothing of dynamic programming: it
/// enumerates the substrings of one side into a membership table and scans
/// the other side's substrings longest-first.
#[test]
fn acceptance_02_lcss_oracle_equivalence() {
    const ALPHABET: usize = 3;
    const MAX_LEN: usize = 8;

    // Enumerate all strings, shortest first; `offsets[k]` is the code of
    // the first string of length k, making codes dense in 0..9841.
    let mut offsets = [0usize; MAX_LEN + 2];
    for k in 0..=MAX_LEN {
        offsets[k + 1] = offsets[k] + ALPHABET.pow(k as u32);
    }
    let total = offsets[MAX_LEN + 1];
    let mut strings = Vec::with_capacity(total);
    strings.push(String::new());
    for len in 1..=MAX_LEN {
        for base in offsets[len - 1]..offsets[len] {
            for symbol in 0..ALPHABET {
                let mut s = strings[base].clone();
                s.push((b'a' + symbol as u8) as char);
                strings.push(s);
            }
        }
    }
    assert_eq!(strings.len(), 9841);

    let code_of = |slice: &[u8]| -> usize {
        let mut value = 0usize;
        for &b in slice {
            value = value * ALPHABET + (b - b'a') as usize;
        }
        offsets[slice.len()] + value
    };

    // Substring codes of every string, grouped by length, longest first —
    // precomputed once for the right-hand side of each pair.
    let substring_groups: Vec<Vec<(usize, Vec<usize>)>> = strings
        .iter()
        .map(|s| {
            let bytes = s.as_bytes();
            (1..=bytes.len())
                .rev()
                .map(|len| {
                    let codes = (0..=bytes.len() - len)
                        .map(|start| code_of(&bytes[start..start + len]))
                        .collect();
                    (len, codes)
                })
                .collect()
        })
        .collect();

    let started = Instant::now();
    // Generation stamps stand in for clearing a membership table 9,841
    // times.
    let mut seen = vec![0u32; total];
    let mut generation = 0u32;
    let mut checked = 0u64;
    for a in &strings {
        generation += 1;
        let bytes = a.as_bytes();
        for len in 1..=bytes.len() {
            for start in 0..=bytes.len() - len {
                seen[code_of(&bytes[start..start + len])] = generation;
            }
        }
        for (b, groups) in strings.iter().zip(&substring_groups) {
            let mut oracle_len = 0;
            'search: for (len, codes) in groups {
                for &code in codes {
                    if seen[code] == generation {
                        oracle_len = *len;
                        break 'search;
                    }
                }
            }
            let produced = longest_common_substring(a, b).2;
            assert_eq!(produced, oracle_len, "lcss({a:?}, {b:?})");
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    assert_eq!(checked, 9841 * 9841);
    println!("[acceptance] LCSS oracle equivalence ({checked} pairs in {elapsed:?}): PASS");
}

/// Criterion 3: the worked example end-to-end — compiling a fixture with
/// рубить/зарубил yields paradigm (2,1,"","ть"), and the CLI maps зарубил
/// back to рубить exactly.
#[test]
fn acceptance_03_worked_example_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let dict_path = compile_with_cli(dir.path(), SMALL_XML);

    let dict = CompiledDictionary::load(File::open(&dict_path).unwrap()).unwrap();
    let expected = Paradigm::new(2, 1, "", "ть");
    assert!(
        dict.paradigms().id_of(&expected).is_some(),
        "paradigm (2,1,\"\",\"ть\") missing from the table"
    );
    let candidates = dict.lemmatize("зарубил").unwrap();
    assert_eq!(candidates.len(), 1);
    assert_eq!(candidates[0].lemma, "рубить");
    assert_eq!(candidates[0].paradigm_id, dict.paradigms().id_of(&expected).unwrap());

    let output = bin()
        .arg("lemmatize")
        .arg(&dict_path)
        .arg("зарубил")
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(String::from_utf8(output.stdout).unwrap(), "зарубил\tрубить\n");
    println!("[acceptance] §3 worked example end-to-end: PASS");
}

/// Criterion 4: fixture completeness — the committed corpus covers the
/// required lemmas and forms, every form lemmatizes back to its source
/// lemma, and the engineered ambiguity returns exactly two candidates.
#[test]
fn acceptance_04_fixture_completeness() {
    let records: Vec<_> = LemmataParser::new(CORPUS_XML.as_bytes())
        .collect::<Result<Vec<_>, _>>()
        .unwrap();
    assert!(records.len() >= 3, "fixture needs at least 3 lemmas");
    let form_count: usize = records.iter().map(|r| r.inflected_forms.len()).sum();
    assert!(form_count >= 12, "fixture has {form_count} forms, needs 12");
    let bezhat = records
        .iter()
        .find(|r| r.normal_form == "бежать")
        .expect("бежать present");
    for required in ["бегу", "бежишь", "бежит", "бежим", "бежите", "бежат"] {
        assert!(
            bezhat.inflected_forms.iter().any(|f| f == required),
            "missing form {required}"
        );
    }

    let dir = tempfile::tempdir().unwrap();
    let dict_path = compile_with_cli(dir.path(), CORPUS_XML);
    let dict = CompiledDictionary::load(File::open(&dict_path).unwrap()).unwrap();

    for record in &records {
        for form in &record.inflected_forms {
            let candidates = dict.lemmatize(form.as_str()).unwrap();
            assert!(
                candidates.iter().any(|c| c.lemma == record.normal_form),
                "{form} does not lemmatize to {}",
                record.normal_form
            );
        }
    }

    let ambiguous = dict.lemmatize("стали").unwrap();
    assert_eq!(
        ambiguous.len(),
        2,
        "стали must have exactly two candidates, got {ambiguous:?}"
    );
    println!("[acceptance] fixture completeness (incl. 2-way ambiguity): PASS");
}

/// Criterion 5: two independent CLI compiles of the fixture produce
/// byte-identical dictionaries.
#[test]
fn acceptance_05_deterministic_builds() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let first = fs::read(compile_with_cli(dir_a.path(), CORPUS_XML)).unwrap();
    let second = fs::read(compile_with_cli(dir_b.path(), CORPUS_XML)).unwrap();
    // Full byte-stream equality subsumes any checksum comparison.
    assert_eq!(first, second, "independent compiles must be byte-identical");
    println!("[acceptance] deterministic builds ({} bytes): PASS", first.len());
}

/// Criterion 6: serialization round-trip — load(serialize(T, W)) == (T, W),
/// and an independent MessagePack decoder sees the documented shape.
#[test]
fn acceptance_06_serialization_round_trip() {
    let (table, index) = build_index(LemmataParser::new(CORPUS_XML.as_bytes())).unwrap();
    let words = invert_index(&index);
    let mut bytes = Vec::new();
    serialize(&table, &words, &mut bytes).unwrap();

    // Our own runtime reproduces the structures exactly.
    let dict = CompiledDictionary::load(&bytes[..]).unwrap();
    assert_eq!(dict.paradigms(), &table);
    assert_eq!(dict.words(), &words);

    // rmpv — a generic MessagePack implementation that shares no code with
    // the writer — must read two maps of the documented shape.
    let mut cursor = &bytes[..];
    let section1 = rmpv::decode::read_value(&mut cursor).unwrap();
    let section2 = rmpv::decode::read_value(&mut cursor).unwrap();
    assert!(cursor.is_empty(), "exactly two values, no framing, no padding");

    let paradigms = section1.as_map().expect("section 1 is a map");
    assert_eq!(paradigms.len(), table.len());
    let mut decoded_ids = Vec::new();
    for (key, value) in paradigms {
        let id = key.as_u64().expect("paradigm key is an unsigned integer");
        decoded_ids.push(id);
        let quad = value.as_array().expect("paradigm value is an array");
        assert_eq!(quad.len(), 4);
        let cut_prefix = quad[0].as_u64().expect("cut_prefix uint") as usize;
        let cut_suffix = quad[1].as_u64().expect("cut_suffix uint") as usize;
        let add_prefix = quad[2].as_str().expect("add_prefix str");
        let add_suffix = quad[3].as_str().expect("add_suffix str");
        assert_eq!(
            table.get(id as u32),
            Some(&Paradigm::new(cut_prefix, cut_suffix, add_prefix, add_suffix))
        );
    }
    let sorted_ids: Vec<u64> = (0..table.len() as u64).collect();
    assert_eq!(decoded_ids, sorted_ids, "keys ascend densely from 0");

    let word_entries = section2.as_map().expect("section 2 is a map");
    assert_eq!(word_entries.len(), words.len());
    let mut previous_key: Option<&str> = None;
    for (key, value) in word_entries {
        let form = key.as_str().expect("word key is a string");
        if let Some(previous) = previous_key {
            assert!(
                previous.as_bytes() < form.as_bytes(),
                "keys ascend in UTF-8 byte order"
            );
        }
        previous_key = Some(form);
        let lists = value.as_array().expect("entry is an array");
        assert_eq!(lists.len(), 2);
        let hashes: Vec<u64> = lists[0]
            .as_array()
            .expect("hash list")
            .iter()
            .map(|v| v.as_u64().expect("hash uint"))
            .collect();
        let ids: Vec<u64> = lists[1]
            .as_array()
            .expect("paradigm id list")
            .iter()
            .map(|v| v.as_u64().expect("id uint"))
            .collect();
        assert_eq!(hashes.len(), ids.len(), "parallel lists agree in length");
        let entry = words.get(form).expect("entry exists in the builder's map");
        assert_eq!(
            hashes,
            entry.hashes.iter().map(|h| u64::from(h.value())).collect::<Vec<_>>()
        );
        assert_eq!(
            ids,
            entry.paradigm_ids.iter().map(|&p| u64::from(p)).collect::<Vec<_>>()
        );
        let mut pairs: Vec<(u64, u64)> = hashes.iter().copied().zip(ids.iter().copied()).collect();
        let unsorted = pairs.clone();
        pairs.sort();
        assert_eq!(pairs, unsorted, "pairs ascend by (hash, paradigm id)");
    }
    println!("[acceptance] serialization round-trip + independent decode: PASS");
}

/// Criterion 7: the hash implementation matches every entry of the pinned
/// cross-implementation vector file.
#[test]
fn acceptance_07_hash_conformance() {
    let mut checked = 0;
    for line in VECTORS.lines() {
        let (text, expected) = line.split_once('\t').expect("tab-separated vector");
        let expected: u32 = expected.parse().expect("decimal hash");
        assert_eq!(murmur3_32(text).value(), expected, "murmur3({text:?})");
        checked += 1;
    }
    assert!(checked >= 100, "vector file holds only {checked} entries");
    println!("[acceptance] hash conformance ({checked} pinned vectors): PASS");
}

/// Criterion 8: compiling a ≥100 MB input stays under 64 MB peak resident
/// memory — the parser must stream, never slurp.
#[cfg(unix)]
#[test]
// The child is reaped by `wait4`, which clippy does not recognize.
#[allow(clippy::zombie_processes)]
fn acceptance_08_streaming_memory_bound() {
    let dir = tempfile::tempdir().unwrap();
    let xml_path = dir.path().join("big.xml");
    let target_bytes = 100 * 1024 * 1024;

    // Inflate the fixture's lemmas with fresh ids until the file crosses
    // 100 MB. Forms repeat, so the dictionary stays small; only the
    // parser's streaming discipline is under test.
    let blocks = [
        "<l t=\"рубить\"/><f t=\"зарубил\"/>",
        "<l t=\"бежать\"/><f t=\"бегу\"/><f t=\"бежишь\"/><f t=\"бежит\"/><f t=\"бежим\"/><f t=\"бежите\"/><f t=\"бежат\"/>",
        "<l t=\"сталь\"/><f t=\"стали\"/>",
        "<l t=\"стать\"/><f t=\"стали\"/><f t=\"стал\"/><f t=\"стала\"/>",
        "<l t=\"ёж\"/><f t=\"ежа\"/><f t=\"ежу\"/>",
    ];
    {
        let mut out = BufWriter::new(File::create(&xml_path).unwrap());
        let mut written = 0usize;
        out.write_all(b"<dictionary><lemmata>\n").unwrap();
        let mut id = 0u64;
        while written < target_bytes {
            for block in &blocks {
                id += 1;
                let line = format!("<lemma id=\"{id}\">{block}</lemma>\n");
                written += line.len();
                out.write_all(line.as_bytes()).unwrap();
            }
        }
        out.write_all(b"</lemmata></dictionary>\n").unwrap();
        out.flush().unwrap();
    }
    let input_size = fs::metadata(&xml_path).unwrap().len();
    assert!(input_size >= target_bytes as u64);

    let dict_path = dir.path().join("big.bin");
    let child = bin()
        .arg("compile")
        .arg(&xml_path)
        .arg("-o")
        .arg(&dict_path)
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    let (status, max_rss_kb) = wait_with_rusage(child.id() as libc::pid_t);
    assert_eq!(status, 0, "compile of the inflated fixture failed");
    assert!(dict_path.exists());

    let peak_mb = max_rss_kb as f64 / 1024.0;
    assert!(
        max_rss_kb < 64 * 1024,
        "peak RSS {peak_mb:.1} MB exceeds the 64 MB bound"
    );
    // Sanity: the compile really did the work.
    let dict = CompiledDictionary::load(File::open(&dict_path).unwrap()).unwrap();
    assert_eq!(dict.stats().lemma_count, 5);
    println!(
        "[acceptance] streaming memory bound ({} MB input, peak RSS {peak_mb:.1} MB): PASS",
        input_size / (1024 * 1024)
    );
}

/// Reaps `pid`, returning its exit code and peak RSS in kilobytes.
#[cfg(unix)]
fn wait_with_rusage(pid: libc::pid_t) -> (i32, i64) {
    let mut status = 0i32;
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let reaped = unsafe { libc::wait4(pid, &mut status, 0, &mut usage) };
    assert_eq!(reaped, pid, "wait4 failed: {}", std::io::Error::last_os_error());
    let code = if libc::WIFEXITED(status) {
        libc::WEXITSTATUS(status)
    } else {
        -1
    };
    (code, usage.ru_maxrss)
}

/// Criterion 9 (informational): full-corpus magnitudes, only when a local
/// OpenCorpora dump is available via OPENCORPORA_XML.
#[test]
fn acceptance_09_full_corpus_informational() {
    let Some(path) = std::env::var_os("OPENCORPORA_XML") else {
        println!("[acceptance] full corpus: SKIP (set OPENCORPORA_XML to a local dump to enable)");
        return;
    };
    let started = Instant::now();
    let file = File::open(&path).expect("OPENCORPORA_XML must point at a readable file");
    let (table, index) =
        build_index(LemmataParser::new(std::io::BufReader::new(file))).unwrap();
    let words = invert_index(&index);
    let elapsed = started.elapsed();

    let stats = build_stats(&table, &words);
    let lemma_count = index.len();
    let paradigm_count = table.len();
    let reference = 391_842f64;
    assert!(
        (lemma_count as f64) > reference * 0.9 && (lemma_count as f64) < reference * 1.1,
        "lemma count {lemma_count} outside ±10% of {reference}"
    );
    assert!(
        (248..=24_880).contains(&paradigm_count),
        "paradigm count {paradigm_count} not within the expected order of magnitude"
    );
    assert!(
        elapsed < Duration::from_secs(600),
        "full build took {elapsed:?}"
    );
    println!(
        "[acceptance] full corpus ({lemma_count} lemmas, {paradigm_count} paradigms, {} forms in {elapsed:?}): PASS",
        stats.word_form_count
    );
}
