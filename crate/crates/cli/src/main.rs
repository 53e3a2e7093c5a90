//! Command-line front end for the lemmatization toolkit.
//!
//! `rulemma compile` distills an OpenCorpora XML export into the compact
//! binary dictionary; `lemmatize`, `lookup`, and `stats` work against the
//! compiled file. Exit codes are part of the interface: 0 success, 1 bad
//! input data, 2 I/O or load failure, 3 word not found.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rulemma_core::{
    build_index, build_stats, invert_index, serialize, BuildError, CompiledDictionary,
    IngestError, LemmataParser, ParadigmTable, WordMap,
};

const EXIT_DATA: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_NOT_FOUND: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rulemma",
    version,
    about = "Russian lemmatization: compile OpenCorpora XML into a compact dictionary,\n\
             then map inflected word forms to their lemmas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an OpenCorpora dictionary XML export into a binary dictionary.
    Compile {
        /// Path to the XML export, or `-` for standard input.
        input: PathBuf,
        /// Where to write the dictionary, or `-` for standard output.
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
        /// Keep `ё` distinct instead of folding it to `е`.
        #[arg(long)]
        no_fold_yo: bool,
    },
    /// Print lemma candidates for tokens given as arguments or on stdin.
    Lemmatize {
        /// Compiled dictionary file.
        dict: PathBuf,
        /// Tokens to lemmatize; with none given, whitespace-separated
        /// tokens stream from standard input.
        words: Vec<String>,
        /// Echo unknown tokens as their own lemma instead of `-`.
        #[arg(long)]
        fallback_identity: bool,
        /// Keep `ё` distinct when normalizing queries; must match how the
        /// dictionary was compiled.
        #[arg(long)]
        no_fold_yo: bool,
    },
    /// Show every candidate of one word with its hash and raw paradigm.
    Lookup {
        /// Compiled dictionary file.
        dict: PathBuf,
        /// Word to look up.
        word: String,
        /// Keep `ё` distinct when normalizing the query.
        #[arg(long)]
        no_fold_yo: bool,
    },
    /// Print the dictionary's sizes.
    Stats {
        /// Compiled dictionary file.
        dict: PathBuf,
    },
}

/// A command failure: the exit code to use, and the message to print —
/// unless the outcome speaks for itself, like a lookup miss.
struct Failure {
    code: u8,
    message: Option<String>,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: Some(message.into()),
        }
    }

    fn silent(code: u8) -> Self {
        Failure {
            code,
            message: None,
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure::new(EXIT_IO, message)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile {
            input,
            output,
            no_fold_yo,
        } => cmd_compile(&input, &output, !no_fold_yo),
        Command::Lemmatize {
            dict,
            words,
            fallback_identity,
            no_fold_yo,
        } => cmd_lemmatize(&dict, &words, fallback_identity, !no_fold_yo),
        Command::Lookup {
            dict,
            word,
            no_fold_yo,
        } => cmd_lookup(&dict, &word, !no_fold_yo),
        Command::Stats { dict } => cmd_stats(&dict),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            if let Some(message) = failure.message {
                eprintln!("rulemma: {message}");
            }
            ExitCode::from(failure.code)
        }
    }
}

fn is_stdio(path: &Path) -> bool {
    path == Path::new("-")
}

fn cmd_compile(input: &Path, output: &Path, fold_yo: bool) -> Result<(), Failure> {
    let source: Box<dyn Read> = if is_stdio(input) {
        Box::new(io::stdin().lock())
    } else {
        let file = File::open(input)
            .map_err(|e| Failure::io(format!("cannot open {}: {e}", input.display())))?;
        Box::new(file)
    };

    let records = LemmataParser::with_fold_yo(source, fold_yo);
    let (table, index) = build_index(records).map_err(|e| match &e {
        BuildError::Io(_) | BuildError::Ingest(IngestError::Io(_)) => Failure::io(e.to_string()),
        BuildError::Ingest(_) => Failure::new(EXIT_DATA, e.to_string()),
    })?;
    let words = invert_index(&index);

    if is_stdio(output) {
        let mut out = BufWriter::new(io::stdout().lock());
        serialize(&table, &words, &mut out)
            .and_then(|()| out.flush())
            .map_err(|e| Failure::io(format!("cannot write dictionary: {e}")))?;
    } else {
        write_atomically(output, &table, &words)?;
    }

    let stats = build_stats(&table, &words);
    eprintln!(
        "lemmas={} paradigms={} forms={}",
        stats.lemma_count, stats.paradigm_count, stats.word_form_count
    );
    Ok(())
}

/// Writes the dictionary beside its final path and renames it into place,
/// so a failed build never leaves a truncated file behind.
fn write_atomically(path: &Path, table: &ParadigmTable, words: &WordMap) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Failure::io(format!("cannot create temporary file in {}: {e}", dir.display())))?;
    {
        let mut out = BufWriter::new(tmp.as_file_mut());
        serialize(table, words, &mut out)
            .and_then(|()| out.flush())
            .map_err(|e| Failure::io(format!("cannot write dictionary: {e}")))?;
    }
    tmp.persist(path)
        .map_err(|e| Failure::io(format!("cannot move dictionary to {}: {}", path.display(), e.error)))?;
    Ok(())
}

fn load_dictionary(path: &Path, fold_yo: bool) -> Result<CompiledDictionary, Failure> {
    let file = File::open(path)
        .map_err(|e| Failure::io(format!("cannot open {}: {e}", path.display())))?;
    let dict = CompiledDictionary::load(BufReader::new(file))
        .map_err(|e| Failure::io(format!("cannot load {}: {e}", path.display())))?;
    Ok(dict.with_fold_yo(fold_yo))
}

fn cmd_lemmatize(
    dict_path: &Path,
    words: &[String],
    fallback_identity: bool,
    fold_yo: bool,
) -> Result<(), Failure> {
    let dict = load_dictionary(dict_path, fold_yo)?;
    let mut out = BufWriter::new(io::stdout().lock());
    if words.is_empty() {
        // Streaming mode: tokens arrive on stdin indefinitely; memory use
        // must not grow with input length.
        for line in io::stdin().lock().lines() {
            let line =
                line.map_err(|e| Failure::io(format!("cannot read standard input: {e}")))?;
            for token in line.split_whitespace() {
                write_lemmas(&dict, token, fallback_identity, &mut out)?;
            }
        }
    } else {
        for token in words {
            write_lemmas(&dict, token, fallback_identity, &mut out)?;
        }
    }
    out.flush()
        .map_err(|e| Failure::io(format!("cannot write output: {e}")))
}

fn write_lemmas(
    dict: &CompiledDictionary,
    token: &str,
    fallback_identity: bool,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let lemmas: Vec<String> = match dict.lemmatize(token) {
        Ok(candidates) => candidates
            .into_iter()
            .map(|c| c.lemma.into_string())
            .collect(),
        Err(e) => {
            // A corrupt entry poisons one token, not the whole stream.
            log::warn!("skipping candidates for {token:?}: {e}");
            Vec::new()
        }
    };
    let rendered = if lemmas.is_empty() {
        if fallback_identity {
            token.to_string()
        } else {
            "-".to_string()
        }
    } else {
        lemmas.join(",")
    };
    writeln!(out, "{token}\t{rendered}")
        .map_err(|e| Failure::io(format!("cannot write output: {e}")))
}

fn cmd_lookup(dict_path: &Path, word: &str, fold_yo: bool) -> Result<(), Failure> {
    let dict = load_dictionary(dict_path, fold_yo)?;
    let candidates = dict
        .lemmatize(word)
        .map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
    if candidates.is_empty() {
        return Err(Failure::silent(EXIT_NOT_FOUND));
    }
    let mut out = BufWriter::new(io::stdout().lock());
    for candidate in candidates {
        let paradigm = dict
            .paradigms()
            .get(candidate.paradigm_id)
            .expect("candidate ids come from the table");
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            candidate.lemma, candidate.lemma_hash, candidate.paradigm_id, paradigm
        )
        .map_err(|e| Failure::io(format!("cannot write output: {e}")))?;
    }
    out.flush()
        .map_err(|e| Failure::io(format!("cannot write output: {e}")))
}

fn cmd_stats(dict_path: &Path) -> Result<(), Failure> {
    let size = fs::metadata(dict_path)
        .map_err(|e| Failure::io(format!("cannot stat {}: {e}", dict_path.display())))?
        .len();
    let dict = load_dictionary(dict_path, true)?;
    let stats = dict.stats();
    println!("lemmas: {}", stats.lemma_count);
    println!("paradigms: {}", stats.paradigm_count);
    println!("word forms: {}", stats.word_form_count);
    println!("file size: {size} bytes");
    Ok(())
}
