use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

/// Bundled list of the 5,000 most frequent French words.
pub const BUNDLED_FRENCH_5000: &str = include_str!("../../assets/corpus/fr_top5000.txt");

/// Ordered, duplicate-free word list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    words: Vec<String>,
}

impl Corpus {
    /// Parses one word per line. Blank lines are skipped, later duplicates
    /// dropped, and any interior whitespace rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut words = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let word = line.trim();
            if word.is_empty() {
                continue;
            }
            if word.chars().any(char::is_whitespace) {
                return Err(Error::InvalidWord {
                    line: i + 1,
                    word: word.to_string(),
                });
            }
            if seen.insert(word.to_string()) {
                words.push(word.to_string());
            }
        }
        if words.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self { words })
    }

    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let text: Vec<String> = words.into_iter().map(|w| w.as_ref().to_string()).collect();
        Self::parse(&text.join("\n"))
    }

    pub fn bundled_french() -> Self {
        Self::parse(BUNDLED_FRENCH_5000).expect("bundled corpus is well formed")
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Keeps the first `n` words (frequency order for frequency lists).
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let words: Vec<String> = self.words.iter().take(n).cloned().collect();
        if words.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self { words })
    }
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Encoding(format!("{}: {e}", path.display())))?;
    Corpus::parse(&text)
}
