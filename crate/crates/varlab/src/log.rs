//! Training and fitting logs: a header line followed by one JSON record per
//! step.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use varlab_core::avagrpo::StepRecord;

use crate::jsonl::format_error;
use crate::{jsonl, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub tool: String,
    pub command: String,
    pub seed: u64,
    /// Where the starting parameters came from: `scratch` or a checkpoint path.
    pub init: String,
    pub corpus: String,
    pub rewards: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Line {
    Header { header: LogHeader },
    Step(StepRecord),
}

/// Streams records to disk as training runs.
pub struct LogWriter {
    out: BufWriter<File>,
    path: String,
}

impl LogWriter {
    pub fn create(path: &Path, header: &LogHeader) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = Self {
            out: BufWriter::new(file),
            path: path.display().to_string(),
        };
        w.line(&Line::Header { header: header.clone() })?;
        Ok(w)
    }

    fn line(&mut self, line: &Line) -> Result<()> {
        let text = serde_json::to_string(line).expect("log lines serialize");
        writeln!(self.out, "{text}").map_err(|e| Error::io(Path::new(&self.path), e))
    }

    pub fn record(&mut self, r: &StepRecord) -> Result<()> {
        self.line(&Line::Step(r.clone()))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(Path::new(&self.path), e))
    }
}

pub fn read_train_log(path: &Path) -> Result<(LogHeader, Vec<StepRecord>)> {
    let mut lines = jsonl::read::<Line>(path)?.into_iter();
    let header = match lines.next() {
        Some(jsonl::Line {
            value: Line::Header { header },
            ..
        }) => header,
        Some(l) => return Err(format_error(path, l.line, l.offset, "first line must be the log header")),
        None => return Err(format_error(path, 1, 0, "empty log")),
    };
    let mut records = Vec::new();
    for l in lines {
        match l.value {
            Line::Step(r) => records.push(r),
            Line::Header { .. } => return Err(format_error(path, l.line, l.offset, "second header")),
        }
    }
    Ok((header, records))
}
