//! End-to-end translation and batch evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::attachment::WordAttachment;
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, LexiconFile};
use crate::matcher::{classify, Diagnostics, MatchOptions, Reason, Status};
use crate::schema::{ElementStore, FkGraph};
use crate::sqlgen::{interpret, Interpretation};
use crate::tokenizer::normalize;

pub type TranslateOptions = MatchOptions;

/// A loaded schema and lexicon; immutable once built.
#[derive(Debug, Clone)]
pub struct Model {
    pub store: ElementStore,
    pub lexicon: Lexicon,
    pub graph: FkGraph,
}

impl Model {
    pub fn load(schema_text: &str, lexicon_text: &str) -> Result<Self> {
        let file = LexiconFile::parse(lexicon_text)?;
        let store = ElementStore::load(schema_text, &file.value_decls()?)?;
        let lexicon = Lexicon::build(&file, &store)?;
        let graph = store.fk_adjacency();
        Ok(Model {
            store,
            lexicon,
            graph,
        })
    }

    pub fn from_files(schema: &Path, lexicon: &Path) -> Result<Self> {
        Model::load(&fs::read_to_string(schema)?, &fs::read_to_string(lexicon)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationOutcome {
    pub question: String,
    pub words: Vec<String>,
    pub status: Status,
    pub reason: Option<Reason>,
    /// One per valid mapping. Filled for answered questions and, so that a
    /// user can pick one, for ambiguous ones.
    pub interpretations: Vec<Interpretation>,
    pub distinct_element_sets: usize,
    pub diagnostics: Diagnostics,
    pub timing_ms: f64,
}

impl TranslationOutcome {
    pub fn is_answered(&self) -> bool {
        self.status == Status::Answered
    }

    pub fn sql_texts(&self) -> Vec<&str> {
        self.interpretations
            .iter()
            .flat_map(|i| i.sql.iter().map(|q| q.text.as_str()))
            .collect()
    }
}

/// Translates one question. Without attachments every word is taken to
/// attach to every other word.
pub fn translate(
    question: &str,
    model: &Model,
    aw: Option<&WordAttachment>,
    opts: TranslateOptions,
) -> Result<TranslationOutcome> {
    let started = Instant::now();
    let q = normalize(question)?;
    let complete;
    let aw = match aw {
        Some(aw) if aw.len() != q.len() => {
            return Err(Error::Attachment {
                line: 0,
                message: format!(
                    "attachments cover {} words but the question has {}",
                    aw.len(),
                    q.len()
                ),
            })
        }
        Some(aw) => aw,
        None => {
            complete = WordAttachment::complete(q.len());
            &complete
        }
    };

    let result = classify(&q, &model.lexicon, &model.store, aw, opts);
    let interpretations = result
        .valid_mappings
        .iter()
        .map(|m| interpret(m, &model.store, &model.graph))
        .collect();
    Ok(TranslationOutcome {
        question: question.to_string(),
        words: q.words,
        status: result.status,
        reason: result.reason,
        interpretations,
        distinct_element_sets: result.distinct_element_sets,
        diagnostics: result.diagnostics,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchEntry {
    /// 1-based line number in the questions file.
    pub line: usize,
    pub question: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<TranslationOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold: Option<GoldCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldCheck {
    pub sql: String,
    /// Exact string match against an emitted query of a single-query answer.
    pub exact_match: bool,
    pub needs_review: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub total: usize,
    pub answered: usize,
    pub errored: usize,
    pub rejected: BTreeMap<Reason, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold_exact_matches: Option<usize>,
    pub outcomes: Vec<BatchEntry>,
}

impl BatchReport {
    fn new() -> Self {
        BatchReport {
            total: 0,
            answered: 0,
            errored: 0,
            rejected: Reason::ALL.iter().map(|&r| (r, 0)).collect(),
            gold_exact_matches: None,
            outcomes: Vec::new(),
        }
    }

    pub fn rejected_total(&self) -> usize {
        self.rejected.values().sum()
    }

    pub fn count(&self, reason: Reason) -> usize {
        self.rejected.get(&reason).copied().unwrap_or(0)
    }

    /// Label per question in input order: `ANSWERED`, a reason, or `ERROR`.
    pub fn labels(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .map(|e| match &e.outcome {
                Some(o) => o.reason.map_or("ANSWERED".to_string(), |r| r.to_string()),
                None => "ERROR".to_string(),
            })
            .collect()
    }

    /// Aligned-column summary.
    pub fn render_table(&self) -> String {
        let mut rows: Vec<(String, usize)> = vec![("ANSWERED".to_string(), self.answered)];
        rows.extend(self.rejected.iter().map(|(r, &n)| (r.to_string(), n)));
        if self.errored > 0 {
            rows.push(("ERROR".to_string(), self.errored));
        }
        rows.push(("TOTAL".to_string(), self.total));
        let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (label, n) in rows {
            let share = if self.total == 0 {
                0.0
            } else {
                100.0 * n as f64 / self.total as f64
            };
            let _ = writeln!(out, "{label:<width$}  {n:>6}  {share:>6.1}%");
        }
        if let Some(matched) = self.gold_exact_matches {
            let _ = writeln!(out, "{:<width$}  {matched:>6}", "GOLD_EXACT");
        }
        out
    }
}

/// Where per-question attachments come from in batch mode.
pub trait AttachmentSource {
    /// Raw attachment text for 1-based question line `k`, if any.
    fn attachment_text(&self, k: usize) -> Result<Option<String>>;
}

pub struct NoAttachments;

impl AttachmentSource for NoAttachments {
    fn attachment_text(&self, _: usize) -> Result<Option<String>> {
        Ok(None)
    }
}

/// Reads `<stem>.<k>.att` from a directory.
pub struct AttachmentDir<'a> {
    pub dir: &'a Path,
    pub stem: String,
}

impl AttachmentSource for AttachmentDir<'_> {
    fn attachment_text(&self, k: usize) -> Result<Option<String>> {
        let path = self.dir.join(format!("{}.{k}.att", self.stem));
        match fs::read_to_string(&path) {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}

/// Translates each non-blank line independently and aggregates the outcome.
/// `gold` holds one SQL string per line (blank for none).
pub fn batch_eval_text(
    questions: &str,
    model: &Model,
    attachments: &dyn AttachmentSource,
    gold: Option<&str>,
    opts: TranslateOptions,
) -> BatchReport {
    let gold_lines: Option<Vec<&str>> = gold.map(|g| g.lines().collect());
    let mut report = BatchReport::new();
    if gold_lines.is_some() {
        report.gold_exact_matches = Some(0);
    }

    for (i, line) in questions.lines().enumerate() {
        let question = line.trim();
        if question.is_empty() {
            continue;
        }
        let k = i + 1;
        report.total += 1;
        let attempt = attachments.attachment_text(k).and_then(|text| {
            let n = normalize(question)?.len();
            let aw = text.map(|t| WordAttachment::parse(&t, n)).transpose()?;
            translate(question, model, aw.as_ref(), opts)
        });
        let mut entry = BatchEntry {
            line: k,
            question: question.to_string(),
            outcome: None,
            error: None,
            gold: None,
        };
        match attempt {
            Ok(outcome) => {
                match outcome.reason {
                    None => report.answered += 1,
                    Some(r) => *report.rejected.entry(r).or_default() += 1,
                }
                let gold_sql = gold_lines
                    .as_ref()
                    .and_then(|g| g.get(i))
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty());
                if let Some(sql) = gold_sql {
                    let emitted = outcome.sql_texts();
                    let exact_match =
                        outcome.is_answered() && emitted.len() == 1 && emitted[0] == sql;
                    if exact_match {
                        *report.gold_exact_matches.get_or_insert(0) += 1;
                    }
                    entry.gold = Some(GoldCheck {
                        sql: sql.to_string(),
                        exact_match,
                        needs_review: !exact_match,
                    });
                }
                entry.outcome = Some(outcome);
            }
            Err(e) => {
                report.errored += 1;
                entry.error = Some(e.to_string());
            }
        }
        report.outcomes.push(entry);
    }
    report
}

/// File-level batch evaluation; attachments are looked up as
/// `<questions stem>.<line>.att` under `attachments_dir`.
pub fn batch_eval(
    questions_file: &Path,
    model: &Model,
    attachments_dir: Option<&Path>,
    gold_file: Option<&Path>,
    opts: TranslateOptions,
) -> Result<BatchReport> {
    let questions = fs::read_to_string(questions_file)?;
    let gold = gold_file.map(fs::read_to_string).transpose()?;
    let report = match attachments_dir {
        Some(dir) => {
            let stem = questions_file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            batch_eval_text(
                &questions,
                model,
                &AttachmentDir { dir, stem },
                gold.as_deref(),
                opts,
            )
        }
        None => batch_eval_text(&questions, model, &NoAttachments, gold.as_deref(), opts),
    };
    Ok(report)
}
