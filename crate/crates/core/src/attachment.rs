//! Word-level attachment (from an external syntactic parser) and its lifting
//! to an attachment relation over mapped database elements.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::lexicon::PhraseKey;
use crate::schema::ElementRef;
use crate::tokenizer::CoveringAssignment;

/// Symmetric attachment over 1-based word positions of an `n`-word question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordAttachment {
    n: usize,
    pairs: BTreeSet<(usize, usize)>,
}

fn ordered<T: Ord>(a: T, b: T) -> (T, T) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl WordAttachment {
    pub fn empty(n: usize) -> Self {
        WordAttachment {
            n,
            pairs: BTreeSet::new(),
        }
    }

    /// Builds from index pairs, validating range; self-pairs are dropped.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut aw = WordAttachment::empty(n);
        for (k, (i, j)) in pairs.into_iter().enumerate() {
            aw.insert(i, j).map_err(|message| Error::Attachment {
                line: k + 1,
                message,
            })?;
        }
        Ok(aw)
    }

    fn insert(&mut self, i: usize, j: usize) -> Result<(), String> {
        for idx in [i, j] {
            if idx == 0 || idx > self.n {
                return Err(format!("index {idx} outside 1..={}", self.n));
            }
        }
        if i != j {
            self.pairs.insert(ordered(i, j));
        }
        Ok(())
    }

    /// Parses the attachment file format: one `i j` pair per line, `#`
    /// comments and blank lines ignored.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut aw = WordAttachment::empty(n);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Attachment {
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [i, j] = fields[..] else {
                return Err(err(format!("expected two indices, found `{line}`")));
            };
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| err(format!("`{s}` is not an index")))
            };
            aw.insert(parse(i)?, parse(j)?).map_err(err)?;
        }
        Ok(aw)
    }

    /// Every word attaches to every other word: the fallback when no parse
    /// is available.
    pub fn complete(n: usize) -> Self {
        let pairs = (1..=n)
            .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
            .collect();
        WordAttachment { n, pairs }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn attached(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&ordered(i, j))
    }
}

/// Symmetric attachment over the image of a mapping.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementAttachment {
    pairs: BTreeSet<(ElementRef, ElementRef)>,
}

impl ElementAttachment {
    pub fn attached(&self, a: ElementRef, b: ElementRef) -> bool {
        self.pairs.contains(&ordered(a, b))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (ElementRef, ElementRef)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_subset(&self, other: &ElementAttachment) -> bool {
        self.pairs.is_subset(&other.pairs)
    }
}

/// Lifts word attachment to elements: `{e, f}` is attached when some word
/// of a phrase mapped to `e` attaches to some word of a phrase mapped to `f`.
pub fn lift(
    aw: &WordAttachment,
    zeta: &CoveringAssignment,
    phi: &BTreeMap<PhraseKey, ElementRef>,
) -> ElementAttachment {
    let mut element_at = vec![None; aw.len() + 1];
    for occ in zeta.lexical_occurrences() {
        if let Some(&e) = phi.get(&occ.key) {
            for pos in occ.positions() {
                if pos < element_at.len() {
                    element_at[pos] = Some(e);
                }
            }
        }
    }
    let mut out = ElementAttachment::default();
    for (i, j) in aw.pairs() {
        if let (Some(a), Some(b)) = (element_at[i], element_at[j]) {
            if a != b {
                out.pairs.insert(ordered(a, b));
            }
        }
    }
    out
}
