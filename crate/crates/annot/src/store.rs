//! On-disk layout, one directory per campaign:
//!
//! ```text
//! <store>/campaigns/<id>/campaign.json      validated definition
//! <store>/campaigns/<id>/records.jsonl      accepted study records, append-only
//! <store>/campaigns/<id>/calibration.jsonl  calibration attempts, append-only
//! ```
//!
//! Recovery is a replay of both logs. A final line without its newline is a
//! torn append from a crash; it was never acknowledged, so it is dropped and
//! truncated away.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use prosync_core::model::RatingRecord;
use tokio::io::AsyncWriteExt;

use crate::campaign::Campaign;

pub const CAMPAIGN_FILE: &str = "campaign.json";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const CALIBRATION_FILE: &str = "calibration.jsonl";

pub fn campaigns_dir(root: &Path) -> PathBuf {
    root.join("campaigns")
}

pub fn campaign_dir(root: &Path, id: &str) -> PathBuf {
    campaigns_dir(root).join(id)
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

/// Parses a record log, truncating a torn final line.
pub fn read_log(path: &Path) -> io::Result<Vec<RatingRecord>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let complete = match text.rfind('\n') {
        Some(i) => i + 1,
        None => 0,
    };
    if complete < text.len() {
        tracing::warn!(path = %path.display(), "dropping torn final line");
        let f = fs::OpenOptions::new().write(true).open(path)?;
        f.set_len(complete as u64)?;
        f.sync_all()?;
    }
    text[..complete]
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn load_campaign(dir: &Path) -> io::Result<Campaign> {
    let text = fs::read_to_string(dir.join(CAMPAIGN_FILE))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", dir.display())))
}

/// Writes the definition atomically and creates empty logs.
pub fn create_campaign_dir(root: &Path, campaign: &Campaign) -> io::Result<PathBuf> {
    let dir = campaign_dir(root, &campaign.campaign_id);
    fs::create_dir_all(&dir)?;
    let tmp = dir.join("campaign.json.tmp");
    let body = serde_json::to_string_pretty(campaign).expect("campaign serializes");
    fs::write(&tmp, body + "\n")?;
    fs::File::open(&tmp)?.sync_all()?;
    fs::rename(&tmp, dir.join(CAMPAIGN_FILE))?;
    for f in [RECORDS_FILE, CALIBRATION_FILE] {
        fs::OpenOptions::new().create(true).append(true).open(dir.join(f))?;
    }
    Ok(dir)
}

/// Append handles for one campaign's logs. Owned by the campaign's writer.
pub struct LogWriter {
    records: tokio::fs::File,
    calibration: tokio::fs::File,
}

impl LogWriter {
    pub async fn open(dir: &Path) -> io::Result<Self> {
        let open = |name: &str| {
            let path = dir.join(name);
            async move {
                tokio::fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .await
            }
        };
        Ok(LogWriter {
            records: open(RECORDS_FILE).await?,
            calibration: open(CALIBRATION_FILE).await?,
        })
    }

    /// Appends one JSON line and waits until it is durable.
    pub async fn append(&mut self, calibration: bool, record: &RatingRecord) -> io::Result<()> {
        let mut line = serde_json::to_string(record).expect("record serializes");
        line.push('\n');
        let file = if calibration {
            &mut self.calibration
        } else {
            &mut self.records
        };
        file.write_all(line.as_bytes()).await?;
        file.flush().await?;
        file.sync_data().await
    }
}
