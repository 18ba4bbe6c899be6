use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

/// Output directory of one subcommand; remembers every file it wrote.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `rows` under an explicit header, so an empty table still has one.
    pub fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: &[R]) -> Result<()> {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        self.note(name);
        Ok(())
    }

    /// Records a file written by other code.
    pub fn note(&mut self, name: &str) {
        self.written.push(name.to_string());
    }

    /// Writes `<command>.manifest.json` echoing the resolved config.
    pub fn manifest(&self, command: &str, config: &RunConfig) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            command: &'a str,
            version: &'a str,
            seed: u64,
            outputs: &'a [String],
            config: &'a RunConfig,
        }
        let m = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed: config.run.seed,
            outputs: &self.written,
            config,
        };
        let path = self.path(&format!("{command}.manifest.json"));
        fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}
