use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use prosync_core::ingest::write_ratings;
use prosync_core::model::{RatingRecord, Violation};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Mutex;

use crate::campaign::{Campaign, CampaignDefinition};
use crate::state::{CampaignState, Phase, SubmitError, Task};
use crate::store::{self, LogWriter};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown campaign {0}")]
    UnknownCampaign(String),
    #[error("invalid campaign definition")]
    InvalidDefinition(Vec<String>),
    #[error("campaign {0} already exists with a different definition")]
    DuplicateCampaign(String),
    #[error("submitted pair is not the annotator's current task")]
    NotCurrentTask,
    #[error("annotator already rated this pair")]
    DuplicateSubmission,
    #[error("submission violates the rating protocol")]
    ValidationFailed(Vec<Violation>),
    #[error("store at {path} is inconsistent: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitOutcome {
    pub status: String,
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_passed: Option<bool>,
}

/// One campaign: a serialized writer plus the latest immutable snapshot.
struct CampaignHandle {
    writer: Mutex<LogWriter>,
    snapshot: RwLock<Arc<CampaignState>>,
}

impl CampaignHandle {
    fn snapshot(&self) -> Arc<CampaignState> {
        self.snapshot.read().clone()
    }
}

/// All campaigns under one store directory.
pub struct Service {
    root: PathBuf,
    campaigns: RwLock<HashMap<String, Arc<CampaignHandle>>>,
    creating: Mutex<()>,
}

impl Service {
    /// Opens (or initializes) a store and replays every campaign in it.
    pub async fn open(root: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let root = root.into();
        let dir = store::campaigns_dir(&root);
        fs::create_dir_all(&dir)?;
        let mut campaigns = HashMap::new();
        let mut entries: Vec<_> = fs::read_dir(&dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if !path.join(store::CAMPAIGN_FILE).is_file() {
                continue;
            }
            let handle = load_handle(&path).await?;
            let id = handle.snapshot().campaign.campaign_id.clone();
            tracing::info!(campaign = %id, records = handle.snapshot().records.len(), "replayed");
            campaigns.insert(id, Arc::new(handle));
        }
        Ok(Service {
            root,
            campaigns: RwLock::new(campaigns),
            creating: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn handle(&self, id: &str) -> Result<Arc<CampaignHandle>, ServiceError> {
        self.campaigns
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownCampaign(id.to_string()))
    }

    /// Returns the campaign and whether it was newly created. Re-posting an
    /// identical definition is a no-op.
    pub async fn create_campaign(
        &self,
        def: CampaignDefinition,
    ) -> Result<(Arc<Campaign>, bool), ServiceError> {
        let campaign = def
            .into_campaign()
            .map_err(ServiceError::InvalidDefinition)?;
        let _guard = self.creating.lock().await;
        if let Ok(existing) = self.handle(&campaign.campaign_id) {
            let snap = existing.snapshot();
            return if *snap.campaign == campaign {
                Ok((snap.campaign.clone(), false))
            } else {
                Err(ServiceError::DuplicateCampaign(campaign.campaign_id))
            };
        }
        let dir = store::create_campaign_dir(&self.root, &campaign)?;
        let campaign = Arc::new(campaign);
        let handle = CampaignHandle {
            writer: Mutex::new(LogWriter::open(&dir).await?),
            snapshot: RwLock::new(Arc::new(CampaignState::new(campaign.clone()))),
        };
        self.campaigns
            .write()
            .insert(campaign.campaign_id.clone(), Arc::new(handle));
        tracing::info!(campaign = %campaign.campaign_id, pairs = campaign.pairs.len(), "created");
        Ok((campaign, true))
    }

    pub fn snapshot(&self, id: &str) -> Result<Arc<CampaignState>, ServiceError> {
        Ok(self.handle(id)?.snapshot())
    }

    pub fn campaign_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.campaigns.read().keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn next_task(&self, id: &str, annotator: &str) -> Result<Task, ServiceError> {
        Ok(self.snapshot(id)?.next_task(annotator))
    }

    /// Validates against the latest state and appends durably before the new
    /// snapshot is published. Submissions to one campaign are serialized.
    pub async fn submit(&self, id: &str, record: RatingRecord) -> Result<SubmitOutcome, ServiceError> {
        let handle = self.handle(id)?;
        let mut writer = handle.writer.lock().await;
        let current = handle.snapshot();
        let phase = current.check(&record).map_err(|e| match e {
            SubmitError::NotCurrentTask => ServiceError::NotCurrentTask,
            SubmitError::DuplicateSubmission => ServiceError::DuplicateSubmission,
            SubmitError::ValidationFailed(v) => ServiceError::ValidationFailed(v),
        })?;
        writer.append(phase == Phase::Calibration, &record).await?;
        let mut next = (*current).clone();
        let calibration_passed = next.apply(phase, record);
        *handle.snapshot.write() = Arc::new(next);
        Ok(SubmitOutcome {
            status: "accepted".into(),
            phase,
            calibration_passed,
        })
    }

    /// Accepted study records in submission order, as ratings JSON Lines.
    pub fn export(&self, id: &str) -> Result<String, ServiceError> {
        Ok(write_ratings(&self.snapshot(id)?.records))
    }
}

async fn load_handle(dir: &Path) -> Result<CampaignHandle, ServiceError> {
    let corrupt = |reason: String| ServiceError::Corrupt {
        path: dir.to_path_buf(),
        reason,
    };
    let campaign = store::load_campaign(dir).map_err(|e| corrupt(e.to_string()))?;
    let calibration =
        store::read_log(&dir.join(store::CALIBRATION_FILE)).map_err(|e| corrupt(e.to_string()))?;
    let records =
        store::read_log(&dir.join(store::RECORDS_FILE)).map_err(|e| corrupt(e.to_string()))?;
    let state = CampaignState::replay(Arc::new(campaign), calibration, records).map_err(corrupt)?;
    Ok(CampaignHandle {
        writer: Mutex::new(LogWriter::open(dir).await?),
        snapshot: RwLock::new(Arc::new(state)),
    })
}
