use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use framelab_core::io::{write_field, FieldHeader};
use framelab_core::transforms::PhaseField;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::RunConfig;
use crate::CliError;

/// The only part of a report that differs between identical runs.
#[derive(Clone, Debug, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: u64,
}

impl Header {
    pub fn now() -> Header {
        Header {
            tool: "framelab",
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    header: Header,
    command: &'a str,
    config: &'a RunConfig,
    violations: &'a [String],
    result: &'a T,
}

/// Output directory plus the list of files written to it.
pub struct Artifacts {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Artifacts, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Writes through a temporary file in the output directory, then renames.
    pub fn write_with(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        fill(tmp.as_file_mut())?;
        tmp.as_file_mut().flush()?;
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Io(e.into()))?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }

    pub fn report<T: Serialize>(
        &mut self,
        config: &RunConfig,
        violations: &[String],
        result: &T,
    ) -> Result<(), CliError> {
        let command = config.command.expect("resolved config");
        self.json(
            "report.json",
            &Envelope {
                header: Header::now(),
                command: command.name(),
                config,
                violations,
                result,
            },
        )
    }

    /// `name.csv` with `x,y,re,im` rows and `name.json` sidecar.
    pub fn field(&mut self, name: &str, field: &PhaseField, label: &str) -> Result<(), CliError> {
        self.write_with(&format!("{name}.csv"), |w| {
            write_field(w, field).map_err(CliError::Numerical)
        })?;
        self.json(&format!("{name}.json"), &FieldHeader::of(field, label))
    }

    /// One CSV row per sweep point.
    pub fn summary<T: Serialize>(&mut self, rows: &[T]) -> Result<(), CliError> {
        self.write_with("summary.csv", |w| {
            let mut wtr = csv::Writer::from_writer(w);
            for row in rows {
                wtr.serialize(row).map_err(|e| CliError::Io(e.into()))?;
            }
            wtr.flush()?;
            Ok(())
        })
    }
}
