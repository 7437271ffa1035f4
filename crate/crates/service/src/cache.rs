//! Optional on-disk response cache keyed by model id and content hash.

use std::fs;
use std::path::PathBuf;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::api::PredictResponse;

#[derive(Debug, Clone)]
pub struct CacheConfig {
    pub dir: PathBuf,
    pub ttl: Duration,
}

#[derive(Debug, Clone)]
pub struct ResponseCache {
    cfg: CacheConfig,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    stored_at: u64,
    response: PredictResponse,
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl ResponseCache {
    pub fn open(cfg: CacheConfig) -> std::io::Result<Self> {
        fs::create_dir_all(&cfg.dir)?;
        Ok(Self { cfg })
    }

    pub fn key(model_id: &str, text: &str, detail: bool) -> String {
        let mut h = Sha256::new();
        h.update(model_id.as_bytes());
        h.update([0, u8::from(detail)]);
        h.update(text.as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.cfg.dir.join(format!("{key}.json"))
    }

    /// A fresh entry, or `None` when missing, expired or unreadable.
    pub fn get(&self, key: &str) -> Option<PredictResponse> {
        let raw = fs::read(self.path(key)).ok()?;
        let entry: Entry = serde_json::from_slice(&raw).ok()?;
        let age = now_secs().saturating_sub(entry.stored_at);
        (age < self.cfg.ttl.as_secs()).then_some(entry.response)
    }

    pub fn put(&self, key: &str, response: &PredictResponse) -> std::io::Result<()> {
        let entry = Entry {
            stored_at: now_secs(),
            response: response.clone(),
        };
        polarcascade::io::write_atomic(self.path(key), |w| {
            serde_json::to_writer(&mut *w, &entry).map_err(std::io::Error::other)
        })
    }
}
