//! Command-line front end. Exit codes: 0 success, 1 invalid input or
//! configuration (including a missing upstream artifact), 2 runtime failure.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use eegdiff_core::experiments::Scheme;

use crate::config::Overrides;
use crate::pipeline::{self, FailureKind, Model, StageError};
use crate::report::format_accuracy;

#[derive(Debug, Parser)]
#[command(name = "eegdiff", version, about = "EEG task-difficulty pipeline: synthesize, preprocess, extract, select, train, evaluate")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Svm,
    Cnn,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Svm => Model::Svm,
            ModelArg::Cnn => Model::Cnn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    /// Pooled, balanced, stratified train/test split per repeat
    Independent,
    /// Leave one subject out
    Loso,
    /// Subject-independent split within the expert group
    Expert,
    /// Subject-independent split within the novice group
    Novice,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Independent => Scheme::SubjectIndependent,
            SchemeArg::Loso => Scheme::SubjectDependent,
            SchemeArg::Expert => Scheme::Expert,
            SchemeArg::Novice => Scheme::Novice,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic cohort with planted coherence into the dataset directory
    Synth,
    /// Band-pass filter, epoch and artifact-reject the dataset
    Preprocess,
    /// Extract the coherence feature matrix from the epoch store
    Features,
    /// Run stable recursive feature elimination and write the feature table
    Select,
    /// Train a model on the balanced full dataset
    Train {
        #[arg(value_enum)]
        model: ModelArg,
    },
    /// Repeated evaluation under one splitting scheme; writes a report
    Evaluate {
        #[arg(value_enum)]
        scheme: SchemeArg,
        #[arg(value_enum)]
        model: ModelArg,
    },
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), StageError> {
    let cfg = cli.overrides.resolve().map_err(|e| StageError {
        stage: "config",
        kind: FailureKind::Validation,
        message: e.to_string(),
    })?;
    let mut say = |line: String| {
        let _ = writeln!(stdout, "{line}");
    };
    match &cli.command {
        Command::Synth => {
            let paths = pipeline::cmd_synth(&cfg)?;
            say(format!("wrote {} recordings to {}", paths.len(), cfg.dataset_dir.display()));
        }
        Command::Preprocess => {
            let s = pipeline::cmd_preprocess(&cfg)?;
            say(format!("kept {} epochs, dropped {}", s.kept, s.dropped));
        }
        Command::Features => {
            let t = pipeline::cmd_features(&cfg)?;
            say(format!("{} epochs x {} features", t.features.n_rows(), t.features.n_cols()));
        }
        Command::Select => {
            let sel = pipeline::cmd_select(&cfg)?;
            say(crate::report::render_selection(&sel).trim_end().to_string());
        }
        Command::Train { model } => {
            let path = pipeline::cmd_train(&cfg, (*model).into())?;
            say(format!("wrote {}", path.display()));
        }
        Command::Evaluate { scheme, model } => {
            let (path, rep) = pipeline::cmd_evaluate(&cfg, (*scheme).into(), (*model).into())?;
            say(format!(
                "{} {}: {} -> {}",
                rep.scheme.name(),
                rep.classifier.name(),
                format_accuracy(rep.accuracy_mean, rep.accuracy_std),
                path.display()
            ));
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 1;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e.kind {
                FailureKind::Validation => 1,
                FailureKind::Runtime => 2,
            }
        }
    }
}
