//! Loaded models plus the handle request handlers read them through.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use polarcascade::cascade::{two_step_predict, CascadeConfig, CascadeError, CascadeVerdict};
use polarcascade::embed::{parse_table, EmbedError, WordVectorTable};
use polarcascade::nnet::{model_from_json, model_to_json, MlpModel, ModelMetadata, NnetError};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Hex characters kept from the content hash.
pub const MODEL_ID_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: NnetError },
    #[error("{path}: {source}")]
    Table { path: PathBuf, source: EmbedError },
    #[error("{which} model expects {model}-dimensional input, vector table has {table}")]
    DimMismatch {
        which: &'static str,
        model: usize,
        table: usize,
    },
    #[error(transparent)]
    Config(#[from] CascadeError),
}

#[derive(Debug, Clone)]
pub struct ModelPaths {
    pub polarity: PathBuf,
    pub neutral: PathBuf,
    pub embeddings: PathBuf,
}

#[derive(Debug)]
pub struct ModelRegistry {
    pub polarity: MlpModel,
    pub neutral: MlpModel,
    pub table: WordVectorTable,
    pub cfg: CascadeConfig,
    model_id: String,
}

impl ModelRegistry {
    /// Builds a registry from in-memory parts; the id hashes the canonical
    /// serialization of the models and the table.
    pub fn from_parts(
        polarity: MlpModel,
        neutral: MlpModel,
        table: WordVectorTable,
        cfg: CascadeConfig,
    ) -> Result<Self, RegistryError> {
        let meta = ModelMetadata::default();
        let mut table_text = Vec::new();
        table.write_text(&mut table_text).expect("in-memory write");
        let id = content_id(&[
            model_to_json(&polarity, &meta).as_bytes(),
            model_to_json(&neutral, &meta).as_bytes(),
            &table_text,
        ]);
        Self::assemble(polarity, neutral, table, cfg, id)
    }

    /// Loads the three files; the id hashes their exact bytes, so it is stable
    /// across restarts with identical files.
    pub fn load(paths: &ModelPaths, cfg: CascadeConfig) -> Result<Self, RegistryError> {
        let read = |p: &Path| fs::read(p).map_err(|source| RegistryError::Read { path: p.to_owned(), source });
        let (pol_bytes, neu_bytes, table_bytes) =
            (read(&paths.polarity)?, read(&paths.neutral)?, read(&paths.embeddings)?);
        let model = |bytes: &[u8], path: &Path| {
            let text = String::from_utf8_lossy(bytes);
            model_from_json(&text)
                .map(|(m, _)| m)
                .map_err(|source| RegistryError::Model { path: path.to_owned(), source })
        };
        let polarity = model(&pol_bytes, &paths.polarity)?;
        let neutral = model(&neu_bytes, &paths.neutral)?;
        let table = parse_table(table_bytes.as_slice()).map_err(|source| RegistryError::Table {
            path: paths.embeddings.clone(),
            source,
        })?;
        let id = content_id(&[&pol_bytes, &neu_bytes, &table_bytes]);
        Self::assemble(polarity, neutral, table, cfg, id)
    }

    fn assemble(
        polarity: MlpModel,
        neutral: MlpModel,
        table: WordVectorTable,
        cfg: CascadeConfig,
        model_id: String,
    ) -> Result<Self, RegistryError> {
        cfg.validate()?;
        for (which, m) in [("polarity", &polarity), ("neutral", &neutral)] {
            if m.input_dim() != table.dim() {
                return Err(RegistryError::DimMismatch {
                    which,
                    model: m.input_dim(),
                    table: table.dim(),
                });
            }
        }
        Ok(Self {
            polarity,
            neutral,
            table,
            cfg,
            model_id,
        })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn predict(&self, text: &str) -> Result<CascadeVerdict, CascadeError> {
        two_step_predict(&self.polarity, &self.neutral, &self.table, text, &self.cfg)
    }
}

/// SHA-256 over length-prefixed parts, truncated to [`MODEL_ID_LEN`] hex chars.
pub fn content_id(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let mut id = hex::encode(h.finalize());
    id.truncate(MODEL_ID_LEN);
    id
}

/// Shared, swappable slot. Readers clone the inner `Arc` and never block a
/// reload for longer than the pointer swap.
#[derive(Debug, Clone, Default)]
pub struct RegistryHandle(Arc<RwLock<Option<Arc<ModelRegistry>>>>);

impl RegistryHandle {
    pub fn new(registry: ModelRegistry) -> Self {
        Self(Arc::new(RwLock::new(Some(Arc::new(registry)))))
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn current(&self) -> Option<Arc<ModelRegistry>> {
        self.0.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Installs `registry`, returning the previous one.
    pub fn swap(&self, registry: ModelRegistry) -> Option<Arc<ModelRegistry>> {
        self.0.write().unwrap_or_else(|e| e.into_inner()).replace(Arc::new(registry))
    }

    pub fn unload(&self) -> Option<Arc<ModelRegistry>> {
        self.0.write().unwrap_or_else(|e| e.into_inner()).take()
    }
}
