use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};

/// CTC label used for "no character".
pub const BLANK: usize = 0;

/// Sorted character set; character `chars[i]` has label `i + 1` and label
/// `0` is the blank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct Alphabet {
    chars: Vec<char>,
    #[serde(skip)]
    index: HashMap<char, usize>,
}

impl Alphabet {
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let mut chars: Vec<char> = chars.into_iter().collect();
        chars.sort_unstable();
        chars.dedup();
        let index = chars.iter().enumerate().map(|(i, &c)| (c, i + 1)).collect();
        Self { chars, index }
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    /// Number of output classes including the blank.
    pub fn num_classes(&self) -> usize {
        self.chars.len() + 1
    }

    pub fn label(&self, c: char) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn encode(&self, word: &str) -> Result<Vec<usize>> {
        word.chars()
            .map(|c| self.label(c).ok_or(Error::UnknownChar(c)))
            .collect()
    }

    pub fn decode(&self, labels: &[usize]) -> Result<String> {
        labels
            .iter()
            .map(|&l| match l {
                1.. if l <= self.chars.len() => Ok(self.chars[l - 1]),
                _ => Err(Error::UnknownLabel {
                    label: l,
                    size: self.chars.len(),
                }),
            })
            .collect()
    }
}

impl From<String> for Alphabet {
    fn from(s: String) -> Self {
        Self::from_chars(s.chars())
    }
}

impl From<Alphabet> for String {
    fn from(a: Alphabet) -> Self {
        a.chars.into_iter().collect()
    }
}

pub fn build_alphabet(corpus: &Corpus) -> Alphabet {
    Alphabet::from_chars(corpus.words().iter().flat_map(|w| w.chars()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_follow_sorted_order() {
        let a = build_alphabet(&Corpus::from_words(["ab", "ba"]).unwrap());
        assert_eq!(a.chars(), &['a', 'b']);
        assert_eq!(a.label('a'), Some(1));
        assert_eq!(a.label('b'), Some(2));
        assert_eq!(a.num_classes(), 3);
    }

    #[test]
    fn cedilla_is_a_label() {
        let a = build_alphabet(&Corpus::from_words(["ça", "garçon"]).unwrap());
        assert!(a.chars().contains(&'ç'));
    }

    #[test]
    fn repeats_preserved_and_errors_reported() {
        let a = Alphabet::from_chars("ab".chars());
        assert_eq!(a.encode("aa").unwrap(), vec![1, 1]);
        assert!(matches!(a.encode("ax"), Err(Error::UnknownChar('x'))));
        assert!(a.decode(&[0]).is_err());
        assert!(a.decode(&[3]).is_err());
        assert_eq!(a.decode(&[2, 1]).unwrap(), "ba");
    }

    #[test]
    fn bundled_corpus_round_trips() {
        let corpus = Corpus::bundled_french();
        let a = build_alphabet(&corpus);
        for w in corpus.words() {
            let labels = a.encode(w).unwrap();
            assert!(labels.iter().all(|&l| l != BLANK));
            assert_eq!(&a.decode(&labels).unwrap(), w);
        }
    }

    #[test]
    fn serde_as_string() {
        let a = Alphabet::from_chars("éab".chars());
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, "\"abé\"");
        let back: Alphabet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.label('é'), Some(3));
    }
}
