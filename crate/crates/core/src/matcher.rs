//! Matching phrases to database elements and deciding tractability.
//!
//! For every covering assignment the lexical phrases are matched one-to-one
//! onto elements along lexicon edges. Each complete matching is checked with
//! every admissible focus against the value and attribute correspondence
//! constraints; the surviving valid mappings decide whether the question is
//! answered or rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::attachment::{lift, ElementAttachment, WordAttachment};
use crate::lexicon::{Lexicon, Phrase, PhraseKey};
use crate::schema::{ElementRef, ElementStore, ValueId};
use crate::tokenizer::{enumerate_assignments, uncovered_words, CoveringAssignment, Question};

/// Bipartite graph between the lexical phrases of an assignment and the
/// elements they may denote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchGraph {
    pub left: Vec<PhraseKey>,
    pub right: Vec<ElementRef>,
    /// `adjacency[i]` lists indices into `right`, ascending.
    pub adjacency: Vec<Vec<usize>>,
}

impl MatchGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }
}

pub fn build_match_graph(zeta: &CoveringAssignment, lex: &Lexicon) -> MatchGraph {
    let left: Vec<PhraseKey> = zeta.lexical_phrases.iter().cloned().collect();
    let options: Vec<BTreeSet<ElementRef>> = left.iter().map(|k| lex.elements_of_key(k)).collect();
    let right: Vec<ElementRef> = options
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let adjacency = options
        .iter()
        .map(|opts| {
            opts.iter()
                .map(|e| right.binary_search(e).expect("element collected above"))
                .collect()
        })
        .collect();
    MatchGraph {
        left,
        right,
        adjacency,
    }
}

/// An injective, total phrase → element mapping drawn from the lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateMapping {
    pub assignment: CoveringAssignment,
    pub pairs: BTreeMap<PhraseKey, ElementRef>,
}

impl CandidateMapping {
    pub fn element_set(&self) -> BTreeSet<ElementRef> {
        self.pairs.values().copied().collect()
    }
}

/// All complete matchings of `g`, each as a right-index per left node.
pub fn enumerate_complete_matchings(g: &MatchGraph) -> Vec<Vec<usize>> {
    enumerate_injections(&g.adjacency, g.right.len())
}

/// Enumerates every injective choice `left i -> adjacency[i][_]`, in
/// lexicographic order. A maximum-matching bound prunes branches that can no
/// longer be completed.
pub fn enumerate_injections(adjacency: &[Vec<usize>], right_count: usize) -> Vec<Vec<usize>> {
    let mut used = vec![false; right_count];
    let mut out = Vec::new();
    if max_matching(adjacency, 0, &used) < adjacency.len() {
        return out;
    }
    let mut chosen = Vec::with_capacity(adjacency.len());
    backtrack(adjacency, &mut used, &mut chosen, &mut out);
    out
}

fn backtrack(
    adjacency: &[Vec<usize>],
    used: &mut [bool],
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let i = chosen.len();
    if i == adjacency.len() {
        out.push(chosen.clone());
        return;
    }
    for &r in &adjacency[i] {
        if used[r] {
            continue;
        }
        used[r] = true;
        if max_matching(adjacency, i + 1, used) == adjacency.len() - i - 1 {
            chosen.push(r);
            backtrack(adjacency, used, chosen, out);
            chosen.pop();
        }
        used[r] = false;
    }
}

/// Size of a maximum matching of left nodes `from..` avoiding `blocked`
/// right nodes, by augmenting paths.
fn max_matching(adjacency: &[Vec<usize>], from: usize, blocked: &[bool]) -> usize {
    fn augment(
        l: usize,
        adjacency: &[Vec<usize>],
        blocked: &[bool],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &r in &adjacency[l] {
            if blocked[r] || seen[r] {
                continue;
            }
            seen[r] = true;
            if owner[r].is_none_or(|o| augment(o, adjacency, blocked, owner, seen)) {
                owner[r] = Some(l);
                return true;
            }
        }
        false
    }

    let mut owner = vec![None; blocked.len()];
    let mut size = 0;
    for l in from..adjacency.len() {
        let mut seen = vec![false; blocked.len()];
        if augment(l, adjacency, blocked, &mut owner, &mut seen) {
            size += 1;
        }
    }
    size
}

/// Candidate mappings for an assignment, in enumeration order.
pub fn candidate_mappings(zeta: &CoveringAssignment, lex: &Lexicon) -> Vec<CandidateMapping> {
    let g = build_match_graph(zeta, lex);
    enumerate_complete_matchings(&g)
        .into_iter()
        .map(|choice| CandidateMapping {
            assignment: zeta.clone(),
            pairs: g
                .left
                .iter()
                .cloned()
                .zip(choice.into_iter().map(|r| g.right[r]))
                .collect(),
        })
        .collect()
}

/// Pairs `(element, wh)` where `element` is an attribute or relation of the
/// mapping compatible with a WH word of the assignment, and some word of the
/// element's phrase attaches to that WH word.
pub fn focus_candidates(
    c: &CandidateMapping,
    aw: &WordAttachment,
    store: &ElementStore,
) -> Vec<(ElementRef, String)> {
    let zeta = &c.assignment;
    let mut out = BTreeSet::new();
    for occ in zeta.lexical_occurrences() {
        let Some(&element) = c.pairs.get(&occ.key) else {
            continue;
        };
        if !element.is_focusable() {
            continue;
        }
        let Ok(compatible) = store.comp_wh(element) else {
            continue;
        };
        for wh in zeta.wh_occurrences() {
            let word = wh.phrase.text();
            if !compatible.contains(&word) {
                continue;
            }
            let attached = occ
                .positions()
                .any(|i| wh.positions().any(|j| aw.attached(i, j)));
            if attached {
                out.insert((element, word));
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchOptions {
    /// Accept a value standing alone when its attribute is a primary key.
    pub key_ellipsis: bool,
    /// Require every relation to be supported by one of its attributes or
    /// values (the original, stricter formulation).
    pub legacy_constraint4: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            key_ellipsis: true,
            legacy_constraint4: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    UniqueFocus,
    ValueCorrespondence,
    AttributeCorrespondence,
    RelationCorrespondence,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::UniqueFocus => "unique focus",
            Constraint::ValueCorrespondence => "necessary value correspondence",
            Constraint::AttributeCorrespondence => "necessary attribute correspondence",
            Constraint::RelationCorrespondence => "necessary relation correspondence",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub constraint: Constraint,
    /// `None` when a mapping has no focus candidate at all.
    pub element: Option<ElementRef>,
}

/// Checks the correspondence constraints for `c` with `focus` designated.
/// Returns the first violation found.
pub fn check_valid(
    c: &CandidateMapping,
    focus: ElementRef,
    ae: &ElementAttachment,
    store: &ElementStore,
    opts: MatchOptions,
) -> Result<(), Violation> {
    let image = c.element_set();
    let violation = |constraint, element| Violation {
        constraint,
        element: Some(element),
    };
    if !focus.is_focusable() || !image.contains(&focus) {
        return Err(violation(Constraint::UniqueFocus, focus));
    }

    for &e in &image {
        let ElementRef::Value(v) = e else { continue };
        let attr = ElementRef::Attribute(store.value(v).attribute);
        let rel = ElementRef::Relation(store.owning_relation(e));
        let ok = (image.contains(&attr) && ae.attached(e, attr))
            || (image.contains(&rel) && ae.attached(e, rel))
            || (opts.key_ellipsis && store.is_key(store.value(v).attribute));
        if !ok {
            return Err(violation(Constraint::ValueCorrespondence, e));
        }
    }

    for &e in &image {
        let ElementRef::Attribute(a) = e else {
            continue;
        };
        if e == focus {
            continue;
        }
        let attached_values = image
            .iter()
            .filter(|&&v| match v {
                ElementRef::Value(v) => {
                    store.value(v).attribute == a && ae.attached(e, ElementRef::Value(v))
                }
                _ => false,
            })
            .count();
        if attached_values != 1 {
            return Err(violation(Constraint::AttributeCorrespondence, e));
        }
    }

    if opts.legacy_constraint4 {
        for &e in &image {
            let ElementRef::Relation(r) = e else { continue };
            let supported = image.iter().any(|&other| {
                !matches!(other, ElementRef::Relation(_)) && store.owning_relation(other) == r
            });
            if !supported {
                return Err(violation(Constraint::RelationCorrespondence, e));
            }
        }
    }
    Ok(())
}

/// A complete matching with a designated focus that passes every constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidMapping {
    pub candidate: CandidateMapping,
    pub focus: ElementRef,
    pub wh: String,
    pub ae: ElementAttachment,
}

impl ValidMapping {
    pub fn element_set(&self) -> BTreeSet<ElementRef> {
        self.candidate.element_set()
    }

    /// Values of the mapping ordered by first occurrence in the question.
    pub fn values_in_question_order(&self) -> Vec<ValueId> {
        let mut seen = BTreeSet::new();
        self.candidate
            .assignment
            .lexical_occurrences()
            .filter_map(|o| match self.candidate.pairs.get(&o.key) {
                Some(&ElementRef::Value(v)) if seen.insert(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    /// `(surface phrase, element)` pairs in question order.
    pub fn phrase_pairs(&self) -> Vec<(Phrase, ElementRef)> {
        let mut seen = BTreeSet::new();
        self.candidate
            .assignment
            .lexical_occurrences()
            .filter(|o| seen.insert(o.key.clone()))
            .filter_map(|o| {
                self.candidate
                    .pairs
                    .get(&o.key)
                    .map(|&e| (o.phrase.clone(), e))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reason {
    NoWh,
    UnknownWord,
    NoCompleteMatching,
    NoValidMapping,
    Ambiguous,
}

impl Reason {
    pub const ALL: [Reason; 5] = [
        Reason::NoWh,
        Reason::UnknownWord,
        Reason::NoCompleteMatching,
        Reason::NoValidMapping,
        Reason::Ambiguous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Reason::NoWh => "NO_WH",
            Reason::UnknownWord => "UNKNOWN_WORD",
            Reason::NoCompleteMatching => "NO_COMPLETE_MATCHING",
            Reason::NoValidMapping => "NO_VALID_MAPPING",
            Reason::Ambiguous => "AMBIGUOUS",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Answered,
    Rejected,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub assignments: usize,
    pub complete_matchings: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unknown_words: Vec<String>,
    /// Distinct constraint failures, rendered with element names.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TractabilityResult {
    pub status: Status,
    pub reason: Option<Reason>,
    pub valid_mappings: Vec<ValidMapping>,
    pub distinct_element_sets: usize,
    pub diagnostics: Diagnostics,
}

impl TractabilityResult {
    fn rejected(reason: Reason, diagnostics: Diagnostics) -> Self {
        TractabilityResult {
            status: Status::Rejected,
            reason: Some(reason),
            valid_mappings: Vec::new(),
            distinct_element_sets: 0,
            diagnostics,
        }
    }
}

const MAX_REPORTED_VIOLATIONS: usize = 16;

/// Runs tokenization, matching and validation over every assignment and
/// classifies the question.
pub fn classify(
    q: &Question,
    lex: &Lexicon,
    store: &ElementStore,
    aw: &WordAttachment,
    opts: MatchOptions,
) -> TractabilityResult {
    let zetas = enumerate_assignments(q, lex);
    let mut diagnostics = Diagnostics {
        assignments: zetas.len(),
        ..Diagnostics::default()
    };

    if zetas.is_empty() {
        diagnostics.unknown_words = uncovered_words(q, lex);
        let reason = if diagnostics.unknown_words.is_empty() {
            Reason::NoCompleteMatching
        } else {
            Reason::UnknownWord
        };
        return TractabilityResult::rejected(reason, diagnostics);
    }
    if !zetas.iter().any(CoveringAssignment::has_wh) {
        return TractabilityResult::rejected(Reason::NoWh, diagnostics);
    }

    let mut valid: Vec<ValidMapping> = Vec::new();
    let mut seen: BTreeSet<(BTreeSet<ElementRef>, ElementRef)> = BTreeSet::new();
    let mut violations = BTreeSet::new();
    for zeta in &zetas {
        for candidate in candidate_mappings(zeta, lex) {
            diagnostics.complete_matchings += 1;
            let ae = lift(aw, zeta, &candidate.pairs);
            let foci = focus_candidates(&candidate, aw, store);
            if foci.is_empty() {
                violations.insert(Violation {
                    constraint: Constraint::UniqueFocus,
                    element: None,
                });
                continue;
            }
            let mut tried = BTreeSet::new();
            for (focus, wh) in foci {
                if !tried.insert(focus) {
                    continue;
                }
                match check_valid(&candidate, focus, &ae, store, opts) {
                    Ok(()) => {
                        if seen.insert((candidate.element_set(), focus)) {
                            valid.push(ValidMapping {
                                candidate: candidate.clone(),
                                focus,
                                wh,
                                ae: ae.clone(),
                            });
                        }
                    }
                    Err(v) => {
                        violations.insert(v);
                    }
                }
            }
        }
    }

    if diagnostics.complete_matchings == 0 {
        return TractabilityResult::rejected(Reason::NoCompleteMatching, diagnostics);
    }
    if valid.is_empty() {
        diagnostics.violations = violations
            .iter()
            .take(MAX_REPORTED_VIOLATIONS)
            .map(|v| describe_violation(v, store))
            .collect();
        return TractabilityResult::rejected(Reason::NoValidMapping, diagnostics);
    }

    let distinct = valid
        .iter()
        .map(ValidMapping::element_set)
        .collect::<BTreeSet<_>>()
        .len();
    let (status, reason) = if distinct == 1 {
        (Status::Answered, None)
    } else {
        (Status::Rejected, Some(Reason::Ambiguous))
    };
    TractabilityResult {
        status,
        reason,
        valid_mappings: valid,
        distinct_element_sets: distinct,
        diagnostics,
    }
}

fn describe_violation(v: &Violation, store: &ElementStore) -> String {
    match v.element {
        None => {
            "unique focus: no attribute or relation is compatible with and attached to a WH word"
                .to_string()
        }
        Some(e) => format!("{} violated at {}", v.constraint, store.describe(e)),
    }
}
