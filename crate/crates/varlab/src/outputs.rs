//! Model outputs: one `{"video_id", "text"}` per line.

use std::path::Path;

use varlab_core::eval::OutputRecord;

use crate::{jsonl, Result};

pub fn read_outputs(path: &Path) -> Result<Vec<OutputRecord>> {
    Ok(jsonl::read(path)?.into_iter().map(|l| l.value).collect())
}

pub fn write_outputs(path: &Path, outputs: &[OutputRecord]) -> Result<()> {
    jsonl::write(path, outputs)
}
