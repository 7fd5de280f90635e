use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{Command, Common};
use crate::error::CliError;

pub const CLI_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything that determines the computed values. The output directory and
/// thread count are left out: they do not change any result.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a> {
    #[serde(flatten)]
    pub command: &'a Command,
    #[serde(flatten)]
    pub common: &'a Common,
    pub precision_bits: Option<u32>,
    /// SHA-256 of the input file, for commands that read one.
    pub input_sha256: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct Header<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub config_sha256: String,
    pub config: &'a RunConfig<'a>,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: &'a Header<'a>,
    result: &'a T,
}

pub struct Sink<'a> {
    header: Header<'a>,
    out: Option<PathBuf>,
}

impl<'a> Sink<'a> {
    pub fn new(config: &'a RunConfig<'a>, out: Option<PathBuf>) -> Result<Self, CliError> {
        let canonical = serde_json::to_vec(config)?;
        if let Some(dir) = &out {
            fs::create_dir_all(dir).map_err(|e| CliError::Resource(format!("cannot create {}: {e}", dir.display())))?;
        }
        Ok(Sink {
            header: Header {
                tool: "cltdioph",
                version: CLI_VERSION,
                core_version: cltdioph::VERSION,
                config_sha256: sha256_hex(&canonical),
                config,
            },
            out,
        })
    }

    /// Comment block that opens stdout and every CSV file.
    pub fn header_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# cltdioph {} (core {})",
            self.header.version, self.header.core_version
        );
        let _ = writeln!(s, "# command: {}", self.header.config.command.name());
        let _ = writeln!(s, "# config-sha256: {}", self.header.config_sha256);
        s
    }

    pub fn write_json<T: Serialize>(&self, name: &str, result: &T) -> Result<(), CliError> {
        let Some(dir) = &self.out else { return Ok(()) };
        let mut text = serde_json::to_string_pretty(&Document {
            header: &self.header,
            result,
        })?;
        text.push('\n');
        let path = dir.join(format!("{name}.json"));
        fs::write(&path, text).map_err(|e| CliError::Resource(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_csv(&self, name: &str, body: &str) -> Result<(), CliError> {
        let Some(dir) = &self.out else { return Ok(()) };
        let path = dir.join(format!("{name}.csv"));
        fs::write(&path, format!("{}{body}", self.header_block()))
            .map_err(|e| CliError::Resource(format!("cannot write {}: {e}", path.display())))
    }
}
