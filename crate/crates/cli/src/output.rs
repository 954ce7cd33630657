use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use relrips_core::CoreError;
use serde_json::{json, Value};

use crate::args::Format;

/// A usage problem found after argument parsing (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

/// Exit 2 for usage errors, 3 for resource caps, 1 for everything else.
pub fn error_exit(e: &anyhow::Error) -> ExitCode {
    let (kind, code) = if e.downcast_ref::<Usage>().is_some() {
        ("usage", 2)
    } else if let Some(core) = e.downcast_ref::<CoreError>() {
        if core.is_resource() {
            ("resource", 3)
        } else {
            ("domain", 1)
        }
    } else {
        ("domain", 1)
    };
    let body = json!({
        "error": {
            "kind": kind,
            "message": format!("{e:#}"),
            "exit_code": code,
        }
    });
    eprintln!("{body}");
    ExitCode::from(code)
}

/// A command result in every supported rendering.
pub struct Report {
    pub json: Value,
    pub csv: Option<(Vec<String>, Vec<Vec<String>>)>,
    pub text: String,
}

impl Report {
    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)?;
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = self.text.clone();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                s
            }
            Format::Csv => {
                let Some((header, rows)) = &self.csv else {
                    return Err(usage("csv output is available for delta and bcp only"));
                };
                let mut s = header.join(",");
                s.push('\n');
                for row in rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s
            }
        })
    }
}

/// Writes via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> anyhow::Result<()> {
    let text = report.render(format)?;
    match out {
        Some(path) => write_atomic(path, &text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
