use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// One interpretation choice made by a user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub timestamp: String,
    pub question: String,
    pub chosen_interpretation: usize,
    pub chosen_sql: usize,
    pub client: String,
}

impl FeedbackRecord {
    pub fn new(
        at: DateTime<Utc>,
        question: &str,
        chosen_interpretation: usize,
        chosen_sql: usize,
        client: &str,
    ) -> Self {
        FeedbackRecord {
            timestamp: at.to_rfc3339_opts(SecondsFormat::Millis, true),
            question: question.to_string(),
            chosen_interpretation,
            chosen_sql,
            client: client.to_string(),
        }
    }
}

/// Append-only JSON-lines log. Each record is written with a single call
/// while the lock is held, so lines never interleave.
#[derive(Debug)]
pub struct FeedbackLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl FeedbackLog {
    pub fn open(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(FeedbackLog {
            path: path.to_path_buf(),
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &FeedbackRecord) -> io::Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut file = self
            .file
            .lock()
            .unwrap_or_else(|poisoned| poisoned.into_inner());
        file.write_all(&line)?;
        file.flush()
    }
}
