//! Append-only log of published versions.
//!
//! Each block is `u64 LE payload length` followed by the payload:
//! `u64 LE version_id`, the RFC 3339 `as_of` timestamp, `\n`, then the
//! canonical CSV of every repaired series. A block cut short by a crash is
//! dropped on open.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};

use crate::canonical::format_timestamp;
use crate::error::{Error, Result};

pub const LOG_FILE: &str = "versions.log";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub version_id: u64,
    pub as_of: DateTime<Utc>,
    pub csv: String,
}

pub fn encode_block(version_id: u64, as_of: &DateTime<Utc>, csv: &str) -> Vec<u8> {
    let ts = format_timestamp(as_of);
    let payload_len = 8 + ts.len() + 1 + csv.len();
    let mut out = Vec::with_capacity(8 + payload_len);
    out.extend_from_slice(&(payload_len as u64).to_le_bytes());
    out.extend_from_slice(&version_id.to_le_bytes());
    out.extend_from_slice(ts.as_bytes());
    out.push(b'\n');
    out.extend_from_slice(csv.as_bytes());
    out
}

/// Decodes all complete blocks. Returns them with the byte length they
/// cover; anything past that is an incomplete tail.
pub fn decode_blocks(data: &[u8]) -> Result<(Vec<Block>, usize)> {
    let mut blocks = Vec::new();
    let mut pos = 0;
    while data.len() - pos >= 8 {
        let len = u64::from_le_bytes(data[pos..pos + 8].try_into().expect("8 bytes")) as usize;
        let start = pos + 8;
        let Some(end) = start.checked_add(len).filter(|&e| e <= data.len()) else {
            break;
        };
        blocks.push(decode_payload(&data[start..end], blocks.len())?);
        pos = end;
    }
    Ok((blocks, pos))
}

fn decode_payload(payload: &[u8], index: usize) -> Result<Block> {
    let corrupt = |what: &str| Error::Persist(format!("block {index}: {what}"));
    if payload.len() < 8 {
        return Err(corrupt("payload shorter than version id"));
    }
    let version_id = u64::from_le_bytes(payload[..8].try_into().expect("8 bytes"));
    let rest = std::str::from_utf8(&payload[8..]).map_err(|_| corrupt("payload is not UTF-8"))?;
    let (ts, csv) = rest.split_once('\n').ok_or_else(|| corrupt("missing timestamp terminator"))?;
    let as_of = DateTime::parse_from_rfc3339(ts)
        .map_err(|e| corrupt(&format!("bad timestamp {ts:?}: {e}")))?
        .with_timezone(&Utc);
    Ok(Block {
        version_id,
        as_of,
        csv: csv.to_owned(),
    })
}

#[derive(Debug)]
pub struct VersionLog {
    path: PathBuf,
    file: File,
}

impl VersionLog {
    /// Opens the log for appending and returns the blocks already in it.
    pub fn open(path: &Path) -> Result<(Self, Vec<Block>)> {
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)?;
        let mut data = Vec::new();
        file.read_to_end(&mut data)?;
        let (blocks, good) = decode_blocks(&data)?;
        if good < data.len() {
            tracing::warn!(
                path = %path.display(),
                dropped = data.len() - good,
                "dropping incomplete trailing block from version log"
            );
            file.set_len(good as u64)?;
            file.seek(SeekFrom::End(0))?;
        }
        Ok((
            VersionLog {
                path: path.to_owned(),
                file,
            },
            blocks,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, version_id: u64, as_of: &DateTime<Utc>, csv: &str) -> Result<()> {
        self.file.write_all(&encode_block(version_id, as_of, csv))?;
        self.file.sync_data()?;
        Ok(())
    }
}
