//! Output directory bookkeeping: every file is written atomically and listed
//! in `manifest.json`, which is written last.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use mbqs_core::io::{write_atomic, write_csv, write_json};

use crate::config::Settings;
use crate::error::CliError;

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::from(mbqs_core::Error::Io(e)))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn csv<T: Serialize>(
        &mut self,
        name: &str,
        comments: &[String],
        rows: &[T],
    ) -> Result<(), CliError> {
        write_csv(&self.dir.join(name), comments, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        write_json(&self.dir.join(name), value)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes `manifest.json` with the resolved parameters, the values set
    /// explicitly by flag or config file, and the files of this run.
    pub fn finish(
        mut self,
        command: &str,
        settings: &Settings,
        parameters: Map<String, Value>,
    ) -> Result<(), CliError> {
        self.files.sort();
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "parameters": parameters,
            "explicit": settings.explicit(),
            "files": self.files,
        });
        write_json(&self.dir.join("manifest.json"), &manifest)?;
        Ok(())
    }
}
