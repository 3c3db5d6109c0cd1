//! Saccadic visual search with deep Q-learning.
//!
//! An agent looks at a small window of a "maze of digits" and learns, from
//! a sparse reward at the goal digit, where to move its gaze next. The crate
//! contains the environments ([`env`]), a hand-written Q-network ([`qnet`]),
//! replay memory ([`replay`]), the actor/learner training loop ([`agent`]),
//! scoring and rendering ([`metrics`]), reference oracles ([`oracle`]) and the
//! command-line front end ([`cli`]).

pub mod agent;
pub mod checkpoint;
pub mod cli;
pub mod env;
pub mod metrics;
pub mod oracle;
pub mod qnet;
pub mod replay;

pub use agent::{run_training, ExperimentConfig, Family};
pub use env::{Action, Maze, MazeKind, Position, RewardConfig};
pub use qnet::{Hyperparams, NetworkParams, QValues};
