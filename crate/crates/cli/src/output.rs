//! Output envelopes, input hashing and exit codes.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Raised when a run finishes but its built-in oracle disagrees.
#[derive(Debug)]
pub struct OracleMismatch(pub String);

impl std::fmt::Display for OracleMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "oracle mismatch: {}", self.0)
    }
}

impl std::error::Error for OracleMismatch {}

/// Exit code for a failed run.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<OracleMismatch>().is_some() {
        return EXIT_NUMERIC;
    }
    use nlperim::Error as E;
    match e.downcast_ref::<nlperim::Error>() {
        Some(
            E::ToleranceNotMet { .. }
            | E::NoCancellation { .. }
            | E::Inconclusive
            | E::Regularity { .. }
            | E::Roughness(_)
            | E::AliasWarning { .. },
        ) => EXIT_NUMERIC,
        Some(E::Resolution { .. } | E::TooLarge { .. } | E::MemoryBudget { .. }) => EXIT_RESOURCE,
        _ => EXIT_INPUT,
    }
}

/// Hex SHA-256 of the canonical configuration followed by every input file.
pub fn input_hash<C: Serialize>(config: &C, files: &[Vec<u8>]) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config)?);
    for f in files {
        h.update((f.len() as u64).to_le_bytes());
        h.update(f);
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    config: &'a C,
    input_sha256: &'a str,
    result: &'a R,
}

/// A finished result, as JSON or as CSV rows.
pub enum Body<'a, R: Serialize> {
    Json(&'a R),
    Csv(String),
}

pub fn write<C: Serialize, R: Serialize>(
    out: &Option<PathBuf>,
    config: &C,
    hash: &str,
    body: Body<R>,
) -> Result<()> {
    let text = match body {
        Body::Json(r) => {
            let mut s = serde_json::to_string_pretty(&Envelope {
                config,
                input_sha256: hash,
                result: r,
            })?;
            s.push('\n');
            s
        }
        Body::Csv(rows) => {
            format!(
                "# config: {}\n# input_sha256: {hash}\n{rows}",
                serde_json::to_string(config)?
            )
        }
    };
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
