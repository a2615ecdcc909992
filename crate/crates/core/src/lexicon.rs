//! Phrase → element lexicon with the Stop and WH phrase sets.
//!
//! Phrases are kept in their surface form and compared stemwise: two phrases
//! are the same lexical identity when their per-word stems agree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::schema::{ElementRef, ElementStore, ValueDecl};
use crate::stem::stem;

pub const DEFAULT_STOP: [&str; 12] = [
    "are", "the", "on", "a", "in", "is", "be", "of", "do", "with", "have", "has",
];

pub const DEFAULT_WH: [&str; 6] = ["who", "which", "what", "where", "when", "how"];

/// A non-empty sequence of lowercase words.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phrase(Vec<String>);

impl Phrase {
    pub fn new<S: AsRef<str>>(words: &[S]) -> Option<Self> {
        let words: Vec<String> = words.iter().map(|w| w.as_ref().to_lowercase()).collect();
        if words.is_empty()
            || words
                .iter()
                .any(|w| w.is_empty() || w.contains(char::is_whitespace))
        {
            return None;
        }
        Some(Phrase(words))
    }

    /// Splits on whitespace: `"major river"` → `[major river]`.
    pub fn parse(text: &str) -> Option<Self> {
        let words: Vec<&str> = text.split_whitespace().collect();
        Phrase::new(&words)
    }

    pub fn words(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn key(&self) -> PhraseKey {
        PhraseKey(self.0.iter().map(|w| stem(w)).collect())
    }

    pub fn text(&self) -> String {
        self.0.join(" ")
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(" "))
    }
}

/// The stemmed form of a phrase; the lexical identity used for lookup.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhraseKey(pub Vec<String>);

impl PhraseKey {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether the key matches the stemmed question words starting at the
    /// 0-based offset `start`.
    pub fn matches_stems(&self, stems: &[String], start: usize) -> bool {
        start + self.0.len() <= stems.len() && stems[start..start + self.0.len()] == self.0[..]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub phrase: Phrase,
    pub element: ElementRef,
}

/// A Stop or WH phrase together with its stemmed key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionPhrase {
    pub phrase: Phrase,
    pub key: PhraseKey,
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    index: BTreeMap<PhraseKey, BTreeSet<ElementRef>>,
    surface: BTreeMap<PhraseKey, Phrase>,
    stop: Vec<FunctionPhrase>,
    wh: Vec<FunctionPhrase>,
}

// Lexicon file layout.

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconFile {
    #[serde(default)]
    pub stop_extra: Vec<String>,
    #[serde(default)]
    pub wh_extra: Vec<String>,
    #[serde(default)]
    pub entries: Vec<EntryDecl>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDecl {
    pub phrase: Vec<String>,
    pub element: ElementDecl,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDecl {
    pub kind: ElementKind,
    pub relation: String,
    #[serde(default)]
    pub attribute: Option<String>,
    #[serde(default)]
    pub literal: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Relation,
    Attribute,
    Value,
}

impl LexiconFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::malformed("lexicon", e))
    }

    /// The value elements the lexicon names; these populate the store's V.
    pub fn value_decls(&self) -> Result<Vec<ValueDecl>> {
        let mut out = Vec::new();
        for entry in &self.entries {
            let el = &entry.element;
            if el.kind != ElementKind::Value {
                continue;
            }
            let (Some(attribute), Some(literal)) = (&el.attribute, &el.literal) else {
                return Err(Error::Malformed {
                    what: "lexicon",
                    message: format!(
                        "value entry for phrase {:?} needs both \"attribute\" and \"literal\"",
                        entry.phrase
                    ),
                });
            };
            out.push(ValueDecl {
                relation: el.relation.clone(),
                attribute: attribute.clone(),
                literal: literal.clone(),
            });
        }
        Ok(out)
    }
}

fn function_phrases(
    defaults: &[&str],
    extra: &[String],
    what: &'static str,
) -> Result<Vec<FunctionPhrase>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for text in defaults
        .iter()
        .copied()
        .chain(extra.iter().map(String::as_str))
    {
        let phrase = Phrase::parse(text).ok_or_else(|| Error::Malformed {
            what,
            message: format!("`{text}` is not a phrase"),
        })?;
        if seen.insert(phrase.clone()) {
            out.push(FunctionPhrase {
                key: phrase.key(),
                phrase,
            });
        }
    }
    Ok(out)
}

impl Lexicon {
    /// Parses a lexicon file against a store that already holds its values.
    pub fn load(text: &str, store: &ElementStore) -> Result<Self> {
        Lexicon::build(&LexiconFile::parse(text)?, store)
    }

    pub fn build(file: &LexiconFile, store: &ElementStore) -> Result<Self> {
        let stop = function_phrases(&DEFAULT_STOP, &file.stop_extra, "stop_extra")?;
        let wh = function_phrases(&DEFAULT_WH, &file.wh_extra, "wh_extra")?;

        let wh_texts: BTreeSet<String> = wh.iter().map(|p| p.phrase.text()).collect();
        let focusable = store
            .relations()
            .map(|(id, r)| (ElementRef::Relation(id), &r.wh_words))
            .chain(
                store
                    .attributes()
                    .map(|(id, a)| (ElementRef::Attribute(id), &a.wh_words)),
            );
        for (element, words) in focusable {
            if let Some(word) = words.iter().find(|w| !wh_texts.contains(*w)) {
                return Err(Error::UnknownWhWord {
                    element: store.describe(element),
                    word: word.clone(),
                });
            }
        }

        let mut lexicon = Lexicon {
            entries: Vec::new(),
            index: BTreeMap::new(),
            surface: BTreeMap::new(),
            stop,
            wh,
        };
        for (i, decl) in file.entries.iter().enumerate() {
            let phrase = Phrase::new(&decl.phrase).ok_or(Error::EmptyPhrase { index: i })?;
            let element = resolve(&decl.element, store)?;
            let key = phrase.key();
            if !lexicon
                .index
                .entry(key.clone())
                .or_default()
                .insert(element)
            {
                log::warn!(
                    "duplicate lexicon entry {} -> {} ignored",
                    phrase,
                    store.describe(element)
                );
                continue;
            }
            lexicon.surface.entry(key).or_insert_with(|| phrase.clone());
            lexicon.entries.push(LexiconEntry { phrase, element });
        }
        Ok(lexicon)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn stop_phrases(&self) -> &[FunctionPhrase] {
        &self.stop
    }

    pub fn wh_phrases(&self) -> &[FunctionPhrase] {
        &self.wh
    }

    /// Distinct lexical identities with their first surface form.
    pub fn lexical_keys(&self) -> impl Iterator<Item = (&PhraseKey, &Phrase)> {
        self.surface.iter()
    }

    pub fn elements_of(&self, phrase: &Phrase) -> BTreeSet<ElementRef> {
        self.elements_of_key(&phrase.key())
    }

    pub fn elements_of_key(&self, key: &PhraseKey) -> BTreeSet<ElementRef> {
        self.index.get(key).cloned().unwrap_or_default()
    }

    pub fn is_stop(&self, phrase: &Phrase) -> bool {
        let key = phrase.key();
        self.stop.iter().any(|p| p.key == key)
    }

    pub fn is_wh(&self, phrase: &Phrase) -> bool {
        let key = phrase.key();
        self.wh.iter().any(|p| p.key == key)
    }
}

fn resolve(decl: &ElementDecl, store: &ElementStore) -> Result<ElementRef> {
    let attribute = || {
        decl.attribute.as_deref().ok_or_else(|| Error::Malformed {
            what: "lexicon",
            message: format!(
                "element on relation `{}` is missing \"attribute\"",
                decl.relation
            ),
        })
    };
    Ok(match decl.kind {
        ElementKind::Relation => ElementRef::Relation(store.rel_id(&decl.relation)?),
        ElementKind::Attribute => {
            ElementRef::Attribute(store.attr_id(&decl.relation, attribute()?)?)
        }
        ElementKind::Value => {
            let literal = decl.literal.as_deref().ok_or_else(|| Error::Malformed {
                what: "lexicon",
                message: format!("value on `{}` is missing \"literal\"", decl.relation),
            })?;
            ElementRef::Value(store.value_id(&decl.relation, attribute()?, literal)?)
        }
    })
}

/// Whether phrase `p` matches question `q` at the 1-based position `i`,
/// comparing word stems.
pub fn phrase_matches_at<S: AsRef<str>>(q: &[S], i: usize, p: &Phrase) -> bool {
    if i == 0 || i + p.len() - 1 > q.len() {
        return false;
    }
    p.words()
        .iter()
        .enumerate()
        .all(|(m, word)| stem(q[i - 1 + m].as_ref()) == stem(word))
}
