//! Output files. CSV and `.dat` carry `#` header lines with the schema,
//! version and config fingerprint; numbers use 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header fields shared by every JSON output.
#[derive(Serialize)]
pub struct Provenance<'a> {
    pub schema: &'a str,
    pub version: &'a str,
    pub fingerprint: String,
    pub config: serde_json::Value,
}

impl<'a> Provenance<'a> {
    pub fn new(schema: &'a str, cfg: &RunConfig) -> Self {
        Provenance {
            schema,
            version: VERSION,
            fingerprint: cfg.fingerprint(),
            config: cfg.to_json(),
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn path_in(cfg: &RunConfig, name: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(&cfg.out).map_err(|e| Failure::config(format!("{}: {e}", cfg.out.display())))?;
    Ok(cfg.out.join(name))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::internal)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes `stem.csv` (comma-separated, header row) and `stem.dat`
/// (whitespace-separated, for gnuplot).
pub fn write_table(
    cfg: &RunConfig,
    stem: &str,
    schema: &str,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<(), Failure> {
    let header = format!(
        "# schema {schema}\n# version {VERSION}\n# fingerprint {}\n",
        cfg.fingerprint()
    );
    let mut csv = header.clone();
    csv.push_str(&columns.join(","));
    csv.push('\n');
    let mut dat = header;
    dat.push_str(&format!("# {}\n", columns.join(" ")));
    for row in rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
        dat.push_str(&row.join(" "));
        dat.push('\n');
    }
    fs::File::create(path_in(cfg, &format!("{stem}.csv"))?)?.write_all(csv.as_bytes())?;
    fs::File::create(path_in(cfg, &format!("{stem}.dat"))?)?.write_all(dat.as_bytes())?;
    Ok(())
}
