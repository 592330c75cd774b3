//! Run directories: `config.toml` (resolved settings), `VERSION` and
//! `run.log`, plus whatever artifacts the command writes.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::write_text;
use crate::{Error, Result, TOOL};

pub struct RunDir {
    root: PathBuf,
    log: File,
    quiet: bool,
}

impl RunDir {
    /// Creates `root` and writes the snapshot files. `command` is the
    /// invocation recorded at the top of `run.log`.
    pub fn create(root: &Path, config: &RunConfig, command: &str) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        write_text(&root.join("config.toml"), &config.to_toml())?;
        write_text(&root.join("VERSION"), &format!("{TOOL}\n"))?;
        let path = root.join("run.log");
        let log = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let mut run = Self {
            root: root.to_path_buf(),
            log,
            quiet: true,
        };
        run.say(&format!("{TOOL}: {command}"))?;
        run.quiet = false;
        Ok(run)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Prints a line and appends it to `run.log`.
    pub fn say(&mut self, line: &str) -> Result<()> {
        if !self.quiet {
            println!("{line}");
        }
        let path = self.root.join("run.log");
        writeln!(self.log, "{line}").map_err(|e| Error::io(&path, e))
    }
}
