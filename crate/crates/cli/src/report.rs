use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::Failure;

/// Comment lines opening every report: tool version, subcommand, the hash of
/// the resolved config and the config itself.
pub fn header(command: &str, cfg: &ExperimentConfig) -> Result<String, Failure> {
    let json = serde_json::to_string(cfg)
        .map_err(|e| Failure::Runtime(format!("serializing config: {e}")))?;
    let hash = Sha256::digest(json.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok(format!(
        "# geometa {} {command}\n# config_sha256 {hex}\n# config {json}\n",
        env!("CARGO_PKG_VERSION")
    ))
}

/// Writes header and body to `out` (stdout when `None`) in one go.
pub fn emit(
    command: &str,
    cfg: &ExperimentConfig,
    out: Option<&Path>,
    body: &[u8],
) -> Result<(), Failure> {
    let mut bytes = header(command, cfg)?.into_bytes();
    bytes.extend_from_slice(body);
    let written = match out {
        Some(path) => {
            std::fs::write(path, &bytes).map_err(|e| format!("writing {}: {e}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|()| stdout.flush())
                .map_err(|e| format!("writing stdout: {e}"))
        }
    };
    written.map_err(Failure::Runtime)
}

pub fn csv_error(e: csv::Error) -> Failure {
    Failure::Runtime(format!("csv: {e}"))
}
