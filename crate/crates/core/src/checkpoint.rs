//! Versioned JSON checkpoints of network parameters and training state.
//!
//! Floats are written in shortest round-trip form and parsed with full
//! precision, so `load(save(x)) == x` bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qnet::{Hyperparams, NetworkParams};
use crate::replay::ReplayMemory;

pub const CHECKPOINT_FORMAT: &str = "saccade-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (format {0:?})")]
    WrongFormat(String),
    #[error("unsupported checkpoint version {0} (this build reads version {CHECKPOINT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint was trained with a {checkpoint}x{checkpoint} window, requested {requested}x{requested}")]
    WindowMismatch { checkpoint: usize, requested: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    /// `[input, hidden, output]`.
    pub layer_dims: [usize; 3],
    pub window: usize,
    pub params: NetworkParams,
    pub hyperparams: Hyperparams,
    /// Actor steps taken so far.
    pub global_step: u64,
    pub learner_steps: u64,
    pub episodes_completed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplayMemory>,
}

impl Checkpoint {
    pub fn new(params: NetworkParams, window: usize, hyperparams: Hyperparams) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            layer_dims: params.layer_dims(),
            window,
            params,
            hyperparams,
            global_step: 0,
            learner_steps: 0,
            episodes_completed: 0,
            replay: None,
        }
    }

    pub fn to_json(&self) -> Result<String, CheckpointError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        let ckpt: Checkpoint = serde_json::from_str(text)?;
        ckpt.check()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Fails unless the checkpoint was trained on `k x k` windows.
    pub fn require_window(&self, k: usize) -> Result<(), CheckpointError> {
        if self.window != k {
            return Err(CheckpointError::WindowMismatch { checkpoint: self.window, requested: k });
        }
        Ok(())
    }

    fn check(&self) -> Result<(), CheckpointError> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(CheckpointError::WrongFormat(self.format.clone()));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::UnsupportedVersion(self.version));
        }
        self.params.validate().map_err(CheckpointError::Corrupt)?;
        if self.params.layer_dims() != self.layer_dims {
            return Err(CheckpointError::Corrupt(format!(
                "layer_dims {:?} disagree with stored layers {:?}",
                self.layer_dims,
                self.params.layer_dims()
            )));
        }
        if self.window * self.window != self.layer_dims[0] {
            return Err(CheckpointError::Corrupt(format!(
                "window {} does not match input width {}",
                self.window, self.layer_dims[0]
            )));
        }
        Ok(())
    }
}
