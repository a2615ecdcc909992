use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use precise_core::attachment::WordAttachment;
use precise_core::pipeline::batch_eval;
use precise_core::tokenizer::normalize;
use precise_core::{translate, Model, TranslateOptions, TranslationOutcome};
use precise_service::AppState;

#[derive(Parser)]
#[command(
    name = "precise",
    version,
    about = "Translate English questions into SQL, or refuse"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Schema description (JSON).
    #[arg(long)]
    schema: PathBuf,
    /// Lexicon (JSON).
    #[arg(long)]
    lexicon: PathBuf,
    /// Also require each relation to be supported by one of its attributes or values.
    #[arg(long)]
    legacy_constraint4: bool,
}

impl ModelArgs {
    fn load(&self) -> Result<Model> {
        Model::from_files(&self.schema, &self.lexicon).with_context(|| {
            format!(
                "loading {} and {}",
                self.schema.display(),
                self.lexicon.display()
            )
        })
    }

    fn options(&self) -> TranslateOptions {
        TranslateOptions {
            legacy_constraint4: self.legacy_constraint4,
            ..TranslateOptions::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Translate one question.
    Translate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        question: String,
        /// Word attachment pairs, one "i j" per line (1-based).
        #[arg(long)]
        attachments: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Translate every line of a questions file and report outcome counts.
    Batch {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        questions: PathBuf,
        /// Directory holding `<questions stem>.<line>.att` files.
        #[arg(long)]
        attachments_dir: Option<PathBuf>,
        /// One gold SQL per question line; blank lines mean no gold.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Where to write the JSON report.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// JSON-lines file that interpretation choices are appended to.
        #[arg(long)]
        feedback_log: PathBuf,
        /// Directory of static UI assets served at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

fn render_text(outcome: &TranslationOutcome) -> String {
    let mut out = String::new();
    match outcome.reason {
        None => out.push_str("ANSWERED\n"),
        Some(reason) => out.push_str(&format!("REJECTED {reason}\n")),
    }
    let d = &outcome.diagnostics;
    if !d.unknown_words.is_empty() {
        out.push_str(&format!("unknown words: {}\n", d.unknown_words.join(", ")));
    }
    for v in &d.violations {
        out.push_str(&format!("violated: {v}\n"));
    }
    for (i, interp) in outcome.interpretations.iter().enumerate() {
        out.push_str(&format!("[{i}] {}\n", interp.paraphrase));
        for sql in &interp.sql {
            out.push_str(&format!("    {sql}\n"));
        }
    }
    out
}

fn read_attachments(path: &Path, question: &str) -> Result<WordAttachment> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let n = normalize(question)?.len();
    WordAttachment::parse(&text, n).with_context(|| format!("in {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Translate {
            model,
            question,
            attachments,
            format,
        } => {
            let m = model.load()?;
            let aw = attachments
                .map(|p| read_attachments(&p, &question))
                .transpose()?;
            let outcome = translate(&question, &m, aw.as_ref(), model.options())?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&outcome)?),
                Format::Text => print!("{}", render_text(&outcome)),
            }
            Ok(if outcome.is_answered() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Batch {
            model,
            questions,
            attachments_dir,
            gold,
            out,
        } => {
            let m = model.load()?;
            let report = batch_eval(
                &questions,
                &m,
                attachments_dir.as_deref(),
                gold.as_deref(),
                model.options(),
            )
            .with_context(|| format!("evaluating {}", questions.display()))?;
            fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            print!("{}", report.render_table());
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            model,
            port,
            host,
            feedback_log,
            ui_dir,
        } => {
            let schema = fs::read_to_string(&model.schema)
                .with_context(|| format!("reading {}", model.schema.display()))?;
            let lexicon = fs::read_to_string(&model.lexicon)
                .with_context(|| format!("reading {}", model.lexicon.display()))?;
            let state = AppState::load(&schema, &lexicon, &feedback_log, model.options())
                .map_err(|e| anyhow::anyhow!(e))
                .context("starting service")?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(precise_service::serve(
                Arc::new(state),
                SocketAddr::new(host, port),
                ui_dir,
            ))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
