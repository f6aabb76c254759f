//! Labeled text corpora: JSON Lines I/O and a seeded toy sentiment corpus.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One corpus line: `{"text": "...", "label": 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledText {
    pub text: String,
    pub label: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {source}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error("{}: corpus is empty", .0.display())]
    Empty(PathBuf),
}

/// Reads a JSON Lines corpus. Blank lines are skipped.
pub fn read_jsonl(path: &Path) -> Result<Vec<LabeledText>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.to_owned(),
        source,
    };
    let file = fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| CorpusError::Parse {
            path: path.to_owned(),
            line: i + 1,
            source,
        })?;
        out.push(item);
    }
    if out.is_empty() {
        return Err(CorpusError::Empty(path.to_owned()));
    }
    Ok(out)
}

pub fn write_jsonl(path: &Path, items: &[LabeledText]) -> Result<(), CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.to_owned(),
        source,
    };
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item).expect("corpus line serializes");
        buf.push(b'\n');
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(io)
}

const POSITIVE: &[&str] = &[
    "good", "great", "wonderful", "excellent", "fun", "brilliant", "moving", "charming",
];
const NEGATIVE: &[&str] = &[
    "bad", "awful", "boring", "terrible", "dull", "poor", "clumsy", "tedious",
];
const SUBJECTS: &[&str] = &[
    "movie", "film", "plot", "acting", "story", "script", "cast", "ending", "music",
];
const ADVERBS: &[&str] = &["really", "quite", "very", "truly", "rather", "so"];
const FILLER: &[&str] = &[
    "i", "watched", "it", "on", "sunday", "with", "friends", "at", "home", "yesterday",
];

/// Seeded synthetic sentiment corpus with labels 0 (negative) and 1
/// (positive).
///
/// Most sentences are one or two `the <subject> was [adverb] <adjective>`
/// clauses. Two-clause sentences joined by `but` take the polarity of the
/// second clause, which a bag-of-words model cannot always get right. About
/// one sentence in ten carries no sentiment word and a random label.
pub fn toy_sentiment(n: usize, seed: u64) -> Vec<LabeledText> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| toy_sentence(&mut rng)).collect()
}

fn toy_sentence(rng: &mut ChaCha8Rng) -> LabeledText {
    let clause = |rng: &mut ChaCha8Rng| -> (String, usize) {
        let label = rng.random_range(0..2usize);
        let adjectives = if label == 1 { POSITIVE } else { NEGATIVE };
        let subject = SUBJECTS.choose(rng).unwrap();
        let adjective = adjectives.choose(rng).unwrap();
        let text = if rng.random_bool(0.5) {
            let adverb = ADVERBS.choose(rng).unwrap();
            format!("the {subject} was {adverb} {adjective}")
        } else {
            format!("the {subject} was {adjective}")
        };
        (text, label)
    };
    let roll = rng.random::<f64>();
    if roll < 0.1 {
        let len = rng.random_range(3..=6);
        let words: Vec<&str> = (0..len).map(|_| *FILLER.choose(rng).unwrap()).collect();
        return LabeledText {
            text: words.join(" "),
            label: rng.random_range(0..2),
        };
    }
    let (first, label) = clause(rng);
    if roll < 0.6 {
        return LabeledText { text: first, label };
    }
    let (second, second_label) = clause(rng);
    let joiner = if second_label == label { "and" } else { "but" };
    LabeledText {
        text: format!("{first} {joiner} {second}"),
        label: second_label,
    }
}
