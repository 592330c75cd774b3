use std::path::Path;

use varlab_core::avagrpo::TrainError;
use varlab_core::corpus::CorpusError;
use varlab_core::eval::EvalError;
use varlab_core::policy::SftError;

use crate::judge::JudgeError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message} (byte offset {offset})")]
    Format {
        path: String,
        line: usize,
        offset: usize,
        message: String,
    },
    #[error("config: `{field}` {reason}")]
    Config { field: String, reason: String },
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("training failed: {0}")]
    Train(#[from] TrainError),
    #[error(transparent)]
    Sft(#[from] SftError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
