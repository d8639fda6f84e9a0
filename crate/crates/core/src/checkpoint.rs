//! Binary network checkpoint.
//!
//! Layout (all integers and floats little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `MEECKPT\0` |
//! | 4     | format version (`u32`, currently 1) |
//! | 4     | header length `h` (`u32`) |
//! | h     | UTF-8 JSON header: architecture and estimator metadata |
//! | 8     | parameter count `p` (`u64`) |
//! | 8·p   | θ as `f64`, in the network's canonical parameter order |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::network::{Architecture, Network};
use crate::{MeeError, Result};

pub const MAGIC: &[u8; 8] = b"MEECKPT\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub architecture: Architecture,
    /// Estimator that produced the parameters (`npdnn`, `spdnn`, ...).
    #[serde(default)]
    pub estimator: Option<String>,
    pub param_count: usize,
    pub crate_version: String,
}

pub fn encode(net: &Network, estimator: Option<&str>) -> Result<Vec<u8>> {
    let header = CheckpointHeader {
        architecture: net.architecture().clone(),
        estimator: estimator.map(str::to_owned),
        param_count: net.param_count(),
        crate_version: crate::VERSION.to_owned(),
    };
    let header = serde_json::to_vec(&header)?;
    let header_len = u32::try_from(header.len()).map_err(|_| MeeError::Format("checkpoint header too large".into()))?;
    let mut out = Vec::with_capacity(24 + header.len() + 8 * net.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&(net.param_count() as u64).to_le_bytes());
    for p in net.theta() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    Ok(out)
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(MeeError::Format(format!("checkpoint truncated while reading {what}")));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

pub fn decode(mut bytes: &[u8]) -> Result<(Network, CheckpointHeader)> {
    let cursor = &mut bytes;
    if take(cursor, 8, "magic")? != MAGIC {
        return Err(MeeError::Format("not a network checkpoint (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(cursor, 4, "version")?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(MeeError::Format(format!("unsupported checkpoint version {version}")));
    }
    let header_len = u32::from_le_bytes(take(cursor, 4, "header length")?.try_into().unwrap()) as usize;
    let header: CheckpointHeader = serde_json::from_slice(take(cursor, header_len, "header")?)?;
    let architecture = header.architecture.clone().validated()?;
    let count = u64::from_le_bytes(take(cursor, 8, "parameter count")?.try_into().unwrap()) as usize;
    if count != architecture.param_count() || count != header.param_count {
        return Err(MeeError::Format(format!(
            "parameter count {count} does not match architecture ({})",
            architecture.param_count()
        )));
    }
    let raw = take(cursor, 8 * count, "parameters")?;
    if !cursor.is_empty() {
        return Err(MeeError::Format("trailing bytes after parameters".into()));
    }
    let theta = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((Network::from_theta(architecture, theta)?, header))
}

pub fn save(path: impl AsRef<Path>, net: &Network, estimator: Option<&str>) -> Result<()> {
    std::fs::write(path, encode(net, estimator)?)?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<(Network, CheckpointHeader)> {
    decode(&std::fs::read(path)?)
}
