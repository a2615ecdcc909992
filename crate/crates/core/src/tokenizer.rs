//! Covering assignments: every question word assigned to a complete
//! occurrence of a lexicon phrase, a Stop phrase or a WH phrase.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, Phrase, PhraseKey};
use crate::stem::stem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub raw: String,
    pub words: Vec<String>,
    pub stems: Vec<String>,
}

impl Question {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercases, drops commas and sentence punctuation, splits on whitespace.
pub fn normalize(raw: &str) -> Result<Question> {
    let lowered = raw.to_lowercase().replace(',', " ");
    let words: Vec<String> = lowered
        .split_whitespace()
        .map(|w| w.trim_matches(|c| matches!(c, '?' | '.' | '!')))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect();
    if words.is_empty() {
        return Err(Error::EmptyQuestion);
    }
    let stems = words.iter().map(|w| stem(w)).collect();
    Ok(Question {
        raw: raw.to_string(),
        words,
        stems,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OccurrenceKind {
    Lexical,
    Stop,
    Wh,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhraseOccurrence {
    /// 1-based position of the first word.
    pub start: usize,
    pub phrase: Phrase,
    pub kind: OccurrenceKind,
    pub key: PhraseKey,
}

impl PhraseOccurrence {
    pub fn end(&self) -> usize {
        self.start + self.key.len() - 1
    }

    pub fn positions(&self) -> RangeInclusive<usize> {
        self.start..=self.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoveringAssignment {
    pub occurrences: Vec<PhraseOccurrence>,
    pub lexical_phrases: BTreeSet<PhraseKey>,
}

impl CoveringAssignment {
    fn new(occurrences: Vec<PhraseOccurrence>) -> Self {
        let lexical_phrases = occurrences
            .iter()
            .filter(|o| o.kind == OccurrenceKind::Lexical)
            .map(|o| o.key.clone())
            .collect();
        CoveringAssignment {
            occurrences,
            lexical_phrases,
        }
    }

    pub fn wh_occurrences(&self) -> impl Iterator<Item = &PhraseOccurrence> {
        self.occurrences
            .iter()
            .filter(|o| o.kind == OccurrenceKind::Wh)
    }

    pub fn lexical_occurrences(&self) -> impl Iterator<Item = &PhraseOccurrence> {
        self.occurrences
            .iter()
            .filter(|o| o.kind == OccurrenceKind::Lexical)
    }

    pub fn has_wh(&self) -> bool {
        self.wh_occurrences().next().is_some()
    }

    /// Surface form of a lexical phrase as it occurs in this assignment.
    pub fn surface(&self, key: &PhraseKey) -> Option<&Phrase> {
        self.lexical_occurrences()
            .find(|o| &o.key == key)
            .map(|o| &o.phrase)
    }
}

/// Every phrase occurrence starting at each 0-based position, sorted.
fn occurrences_by_start(q: &Question, lex: &Lexicon) -> Vec<Vec<PhraseOccurrence>> {
    let lexical = lex
        .lexical_keys()
        .map(|(k, p)| (k, p, OccurrenceKind::Lexical));
    let stop = lex
        .stop_phrases()
        .iter()
        .map(|f| (&f.key, &f.phrase, OccurrenceKind::Stop));
    let wh = lex
        .wh_phrases()
        .iter()
        .map(|f| (&f.key, &f.phrase, OccurrenceKind::Wh));
    let all: Vec<_> = lexical.chain(stop).chain(wh).collect();

    (0..q.len())
        .map(|s| {
            let mut here: Vec<PhraseOccurrence> = all
                .iter()
                .filter(|(key, _, _)| key.matches_stems(&q.stems, s))
                .map(|&(key, phrase, kind)| PhraseOccurrence {
                    start: s + 1,
                    phrase: phrase.clone(),
                    kind,
                    key: key.clone(),
                })
                .collect();
            here.sort();
            here.dedup_by(|a, b| a.key == b.key && a.kind == b.kind);
            here
        })
        .collect()
}

/// All covering assignments of `q`, in lexicographic order of their
/// (start, phrase) sequences.
pub fn enumerate_assignments(q: &Question, lex: &Lexicon) -> Vec<CoveringAssignment> {
    let n = q.len();
    let by_start = occurrences_by_start(q, lex);

    // reachable[s]: positions s..n can be covered exactly.
    let mut reachable = vec![false; n + 1];
    reachable[n] = true;
    for s in (0..n).rev() {
        reachable[s] = by_start[s].iter().any(|o| reachable[s + o.key.len()]);
    }

    let mut out = Vec::new();
    if reachable[0] {
        let mut path = Vec::new();
        extend(0, &by_start, &reachable, &mut path, &mut out);
    }
    out
}

fn extend(
    s: usize,
    by_start: &[Vec<PhraseOccurrence>],
    reachable: &[bool],
    path: &mut Vec<PhraseOccurrence>,
    out: &mut Vec<CoveringAssignment>,
) {
    if s == by_start.len() {
        out.push(CoveringAssignment::new(path.clone()));
        return;
    }
    for occ in &by_start[s] {
        let next = s + occ.key.len();
        if reachable[next] {
            path.push(occ.clone());
            extend(next, by_start, reachable, path, out);
            path.pop();
        }
    }
}

/// Words of `q` that no phrase occurrence of any kind covers, in question
/// order without repeats.
pub fn uncovered_words(q: &Question, lex: &Lexicon) -> Vec<String> {
    let mut covered = vec![false; q.len()];
    for occ in occurrences_by_start(q, lex).iter().flatten() {
        for pos in occ.positions() {
            covered[pos - 1] = true;
        }
    }
    let mut seen = BTreeSet::new();
    q.words
        .iter()
        .zip(covered)
        .filter(|(w, c)| !c && seen.insert(w.as_str()))
        .map(|(w, _)| w.clone())
        .collect()
}
