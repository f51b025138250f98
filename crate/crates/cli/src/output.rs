use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped on every output file.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub command: String,
    pub version: &'static str,
    pub config_hash: String,
}

impl Meta {
    /// Hash of the resolved config plus subcommand arguments; the output directory is excluded.
    pub fn new<A: Serialize>(command: &str, cfg: &RunConfig, args: &A) -> Self {
        let mut c = cfg.clone();
        c.output_dir = None;
        let canon = serde_json::json!({ "command": command, "config": c, "args": args });
        let digest = Sha256::digest(canon.to_string().as_bytes());
        let hex: String = digest.iter().take(16).map(|b| format!("{b:02x}")).collect();
        Meta { command: command.into(), version: VERSION, config_hash: hex }
    }
}

/// CSV assembled in memory and written once.
pub struct CsvOut {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvOut {
    pub fn new(meta: &Meta, extra: &[(&str, String)], header: &[&str]) -> Result<Self, CliError> {
        let mut buf = Vec::new();
        write!(buf, "# szego {} command={} config_hash={}", meta.version, meta.command, meta.config_hash)?;
        for (k, v) in extra {
            write!(buf, " {k}={v}")?;
        }
        writeln!(buf)?;
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(header)?;
        Ok(CsvOut { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<u8>, CliError> {
        self.writer.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

/// Writes to `<out>/<name>` when an output directory is set, otherwise to stdout.
pub fn emit(cfg: &RunConfig, name: &str, bytes: &[u8]) -> Result<Option<PathBuf>, CliError> {
    match &cfg.output_dir {
        Some(dir) => Ok(Some(write_file(dir, name, bytes)?)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(None)
        }
    }
}

pub fn write_file(dir: &PathBuf, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, bytes)?;
    Ok(path)
}

/// Shortest round-trip formatting for f64.
pub fn num(x: f64) -> String {
    format!("{x}")
}
