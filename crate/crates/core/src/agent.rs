//! Actor, learner and the training loop that interleaves them.
//!
//! The actor walks the maze with an epsilon-greedy policy and stores every
//! transition in replay memory. The learner samples minibatches, builds
//! targets that differ from the network's own predictions only at the
//! action actually taken, and applies one SGD update per minibatch. Both
//! share the network parameters and the replay memory.
//!
//! Two schedules exist. The deterministic one runs a single learner step
//! after every actor step (once the memory holds `warmup` experiences) on one
//! thread, and is a pure function of the configuration. The concurrent one
//! runs the learner on its own thread; the actor reads whatever parameter
//! snapshot was published last.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checkpoint::{Checkpoint, CheckpointError};
use crate::env::{self, Action, EnvError, Maze, MazeKind, Position, RewardConfig};
use crate::metrics::{self, EpisodeRecord, MetricsError, SaccadePath};
use crate::qnet::{self, Hyperparams, NetworkParams, QValues, QnetError};
use crate::replay::{Experience, ReplayError, ReplayMemory, SharedReplay};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("episode already finished; start a new one first")]
    EpisodeFinished,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Qnet(#[from] QnetError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AgentError>;

/// Experiment protocol: which mazes an episode starts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// One random maze for the whole run, a fresh start cell every episode.
    RandomFixed,
    /// A newly generated circle maze every episode.
    CircleFresh,
    /// A newly generated path maze every episode.
    PathFresh,
}

impl Family {
    pub fn maze_kind(self) -> MazeKind {
        match self {
            Family::RandomFixed => MazeKind::Random,
            Family::CircleFresh => MazeKind::Circle,
            Family::PathFresh => MazeKind::Path,
        }
    }

    pub fn fresh_maze_per_episode(self) -> bool {
        !matches!(self, Family::RandomFixed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    pub width: usize,
    pub height: usize,
    pub window: usize,
    pub episodes: usize,
    pub hyper: Hyperparams,
    pub rewards: RewardConfig,
    pub out_dir: Option<PathBuf>,
    pub deterministic: bool,
    /// Checkpoint cadence in episodes (0 disables periodic checkpoints).
    pub checkpoint_every: usize,
    /// Render every n-th episode's path (with its maze and trajectory).
    pub render_every: Option<usize>,
    /// Embed the replay memory in the final checkpoint.
    pub save_replay: bool,
    /// Print progress lines to stderr.
    pub verbose: bool,
}

impl ExperimentConfig {
    pub fn new(family: Family, width: usize, height: usize, window: usize, episodes: usize) -> Self {
        Self {
            family,
            width,
            height,
            window,
            episodes,
            hyper: Hyperparams::default(),
            rewards: RewardConfig::default(),
            out_dir: None,
            deterministic: true,
            checkpoint_every: 50,
            render_every: None,
            save_replay: false,
            verbose: false,
        }
    }

    pub fn seed(&self) -> u64 {
        self.hyper.seed
    }

    pub fn max_steps(&self) -> usize {
        self.hyper.max_steps_for(self.width, self.height)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(AgentError::Config(format!("maze must be at least 2x2, got {}x{}", self.width, self.height)));
        }
        if self.window.is_multiple_of(2) || self.window > self.width.min(self.height) {
            return Err(AgentError::Config(format!(
                "window {} must be odd and at most {}",
                self.window,
                self.width.min(self.height)
            )));
        }
        if !self.rewards.terminal_reward.is_finite() || !self.rewards.step_reward.is_finite() {
            return Err(AgentError::Config("rewards must be finite".into()));
        }
        if self.render_every == Some(0) {
            return Err(AgentError::Config("render interval must be at least 1".into()));
        }
        self.hyper.validate().map_err(|e| AgentError::Config(e.to_string()))
    }
}

// Independent random streams derived from the run seed.
const STREAM_MAZE: u64 = 1;
const STREAM_START: u64 = 2;
const STREAM_ACTOR: u64 = 3;
const STREAM_LEARNER: u64 = 4;
const STREAM_INIT: u64 = 5;
const STREAM_EVAL_MAZE: u64 = 6;
const STREAM_EVAL_START: u64 = 7;

pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Supplies the maze for each episode according to the family protocol.
#[derive(Debug, Clone)]
pub struct MazeSource {
    kind: MazeKind,
    width: usize,
    height: usize,
    fixed: Option<Arc<Maze>>,
    rng: ChaCha8Rng,
}

impl MazeSource {
    fn with_stream(config: &ExperimentConfig, stream: u64) -> Result<Self> {
        let fixed = if config.family.fresh_maze_per_episode() {
            None
        } else {
            Some(Arc::new(fixed_maze(config)?))
        };
        Ok(Self {
            kind: config.family.maze_kind(),
            width: config.width,
            height: config.height,
            fixed,
            rng: seeded_stream(config.seed(), stream),
        })
    }

    pub fn for_training(config: &ExperimentConfig) -> Result<Self> {
        Self::with_stream(config, STREAM_MAZE)
    }

    /// Evaluation mazes come from a stream training never touches; the
    /// fixed-maze family still uses the training maze.
    pub fn for_evaluation(config: &ExperimentConfig) -> Result<Self> {
        Self::with_stream(config, STREAM_EVAL_MAZE)
    }

    pub fn next_maze(&mut self) -> Result<Arc<Maze>> {
        if let Some(maze) = &self.fixed {
            return Ok(Arc::clone(maze));
        }
        let seed = self.rng.next_u64();
        Ok(Arc::new(self.kind.generate(self.width, self.height, seed)?))
    }
}

/// The single maze used by the fixed-maze family, a function of the run seed.
pub fn fixed_maze(config: &ExperimentConfig) -> Result<Maze> {
    let seed = seeded_stream(config.seed(), STREAM_MAZE).next_u64();
    Ok(config.family.maze_kind().generate(config.width, config.height, seed)?)
}

/// Uniform random cell other than the goal.
pub fn sample_start<R: Rng + ?Sized>(maze: &Maze, rng: &mut R) -> Position {
    let cells = maze.width() * maze.height();
    let goal_idx = maze.goal().row * maze.width() + maze.goal().col;
    let mut idx = rng.random_range(0..cells - 1);
    if idx >= goal_idx {
        idx += 1;
    }
    Position::new(idx / maze.width(), idx % maze.width())
}

/// With probability `epsilon` a uniformly random action, otherwise the greedy one.
pub fn select_action<R: Rng + ?Sized>(q: &QValues, epsilon: f64, rng: &mut R) -> Action {
    if rng.random::<f64>() < epsilon {
        Action::ALL[rng.random_range(0..Action::COUNT)]
    } else {
        q.argmax()
    }
}

/// Training inputs for one minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBatch {
    pub states: Vec<Vec<f64>>,
    pub targets: Vec<QValues>,
    /// The network's predictions at `states`, before any update.
    pub predictions: Vec<QValues>,
}

/// Targets equal to the current predictions except at the acted action,
/// which gets `r` for terminal transitions and `r + gamma * max Q(s')`
/// otherwise. Both passes use the same parameters.
pub fn build_targets(minibatch: &[Experience], params: &NetworkParams, gamma: f64) -> Result<TargetBatch> {
    if minibatch.is_empty() {
        return Err(QnetError::EmptyBatch.into());
    }
    let states: Vec<&[f64]> = minibatch.iter().map(|e| e.state.as_slice()).collect();
    let next_states: Vec<&[f64]> = minibatch.iter().map(|e| e.next_state.as_slice()).collect();
    let (predictions, _) = qnet::forward_batch(params, &states)?;
    let (next_q, _) = qnet::forward_batch(params, &next_states)?;
    let targets = minibatch
        .iter()
        .zip(&predictions)
        .zip(&next_q)
        .map(|((e, pred), next)| {
            let mut target = *pred;
            target.0[e.action.index()] = if e.terminal { e.reward } else { e.reward + gamma * next.max() };
            target
        })
        .collect();
    Ok(TargetBatch { states: minibatch.iter().map(|e| e.state.clone()).collect(), targets, predictions })
}

/// Where the actor puts its experiences.
pub trait ExperienceStore {
    fn store(&mut self, experience: Experience);
}

impl ExperienceStore for ReplayMemory {
    fn store(&mut self, experience: Experience) {
        self.push(experience);
    }
}

impl ExperienceStore for SharedReplay {
    fn store(&mut self, experience: Experience) {
        self.push(experience);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeStatus {
    Running,
    ReachedGoal,
    Truncated,
}

#[derive(Debug, Clone)]
pub struct ActorState {
    pub maze: Arc<Maze>,
    pub pos: Position,
    pub start: Position,
    pub steps: usize,
    pub episode: usize,
    pub global_step: u64,
    pub epsilon: f64,
    pub window: usize,
    pub max_steps: usize,
    pub status: EpisodeStatus,
    /// Cells visited this episode, start included.
    pub path: Vec<Position>,
    observation: Vec<f64>,
}

impl ActorState {
    pub fn new(maze: Arc<Maze>, start: Position, window: usize, max_steps: usize, hyper: &Hyperparams) -> Result<Self> {
        let observation = env::observe(&maze, start, window)?.encoded;
        Ok(Self {
            maze,
            pos: start,
            start,
            steps: 0,
            episode: 0,
            global_step: 0,
            epsilon: hyper.epsilon_at(0),
            window,
            max_steps,
            status: EpisodeStatus::Running,
            path: vec![start],
            observation,
        })
    }

    /// Resets per-episode state; global counters carry over.
    pub fn begin_episode(&mut self, maze: Arc<Maze>, start: Position, episode: usize) -> Result<()> {
        self.observation = env::observe(&maze, start, self.window)?.encoded;
        self.maze = maze;
        self.pos = start;
        self.start = start;
        self.steps = 0;
        self.episode = episode;
        self.status = EpisodeStatus::Running;
        self.path.clear();
        self.path.push(start);
        Ok(())
    }

    pub fn observation(&self) -> &[f64] {
        &self.observation
    }
}

#[derive(Debug, Clone)]
pub struct ActorStep {
    pub experience: Experience,
    pub status: EpisodeStatus,
    /// Exploration rate used to choose this step's action.
    pub epsilon: f64,
}

/// Observe, choose, move, store; then advance counters and the epsilon schedule.
pub fn actor_step<S: ExperienceStore + ?Sized, R: Rng + ?Sized>(
    state: &mut ActorState,
    params: &NetworkParams,
    memory: &mut S,
    hyper: &Hyperparams,
    rewards: &RewardConfig,
    rng: &mut R,
) -> Result<ActorStep> {
    if state.status != EpisodeStatus::Running {
        return Err(AgentError::EpisodeFinished);
    }
    let q = params.q_values(&state.observation)?;
    let epsilon = state.epsilon;
    let action = select_action(&q, epsilon, rng);
    let outcome = env::step(&state.maze, state.pos, action, rewards);
    let next_observation = env::observe(&state.maze, outcome.next_pos, state.window)?.encoded;
    let experience = Experience {
        state: std::mem::replace(&mut state.observation, next_observation.clone()),
        action,
        reward: outcome.reward,
        next_state: next_observation,
        terminal: outcome.reached_goal,
    };
    memory.store(experience.clone());

    state.pos = outcome.next_pos;
    state.path.push(outcome.next_pos);
    state.steps += 1;
    state.global_step += 1;
    state.epsilon = hyper.epsilon_at(state.global_step);
    state.status = if outcome.reached_goal {
        EpisodeStatus::ReachedGoal
    } else if state.steps >= state.max_steps {
        EpisodeStatus::Truncated
    } else {
        EpisodeStatus::Running
    };
    Ok(ActorStep { experience, status: state.status, epsilon })
}

/// One SGD update on a sampled minibatch. Returns the new parameters and
/// the pre-update loss.
pub fn train_on_batch(params: &NetworkParams, minibatch: &[Experience], hyper: &Hyperparams) -> Result<(NetworkParams, f64)> {
    let batch = build_targets(minibatch, params, hyper.gamma)?;
    Ok(qnet::train_minibatch(params, &batch.states, &batch.targets, hyper.alpha)?)
}

/// Samples and trains once, or returns `None` while the memory is still
/// below the warmup threshold. Never modifies the memory.
pub fn learner_step<R: Rng + ?Sized>(
    params: &NetworkParams,
    memory: &ReplayMemory,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<Option<(NetworkParams, f64)>> {
    if memory.len() < hyper.warmup() {
        return Ok(None);
    }
    let minibatch = memory.sample(hyper.batch_size, rng)?;
    train_on_batch(params, &minibatch, hyper).map(Some)
}

/// Latest published parameters. Readers get an immutable snapshot; the
/// learner swaps in whole new values.
#[derive(Debug, Clone)]
pub struct ParamStore(Arc<RwLock<Arc<NetworkParams>>>);

impl ParamStore {
    pub fn new(params: NetworkParams) -> Self {
        Self(Arc::new(RwLock::new(Arc::new(params))))
    }

    pub fn snapshot(&self) -> Arc<NetworkParams> {
        Arc::clone(&self.0.read().unwrap_or_else(|p| p.into_inner()))
    }

    pub fn publish(&self, params: NetworkParams) {
        *self.0.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(params);
    }
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub records: Vec<EpisodeRecord>,
    pub params: NetworkParams,
    pub global_step: u64,
    pub learner_steps: u64,
    /// The maze shared by every episode, for the fixed-maze family.
    pub fixed_maze: Option<Maze>,
}

/// File layout under the output directory.
pub mod layout {
    pub const EPISODE_LOG: &str = "episodes.csv";
    pub const CONVERGENCE: &str = "convergence.csv";
    pub const FINAL_CHECKPOINT: &str = "checkpoint.json";
    pub const CHECKPOINT_DIR: &str = "checkpoints";
    pub const RENDER_DIR: &str = "renders";
    pub const MAZE: &str = "maze.txt";
    pub const CONFIG: &str = "config.json";

    pub fn periodic_checkpoint(episodes_completed: usize) -> String {
        format!("ep{episodes_completed:05}.json")
    }
}

struct RunOutput {
    dir: PathBuf,
    log: BufWriter<File>,
}

impl RunOutput {
    fn create(dir: &Path, config: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir.join(layout::CHECKPOINT_DIR))?;
        if config.render_every.is_some() {
            fs::create_dir_all(dir.join(layout::RENDER_DIR))?;
        }
        fs::write(dir.join(layout::CONFIG), serde_json::to_string_pretty(config).map_err(CheckpointError::from)? + "\n")?;
        let mut log = BufWriter::new(File::create(dir.join(layout::EPISODE_LOG))?);
        writeln!(log, "{}", metrics::EPISODE_LOG_HEADER)?;
        log.flush()?;
        Ok(Self { dir: dir.to_path_buf(), log })
    }

    fn append(&mut self, record: &EpisodeRecord) -> Result<()> {
        let text = metrics::episode_log_string(std::slice::from_ref(record));
        let row = text.split_once('\n').map(|(_, row)| row).unwrap_or_default();
        self.log.write_all(row.as_bytes())?;
        self.log.flush()?;
        Ok(())
    }

    fn checkpoint(&self, ckpt: &Checkpoint, name: &str) -> Result<()> {
        ckpt.save(&self.dir.join(layout::CHECKPOINT_DIR).join(name))?;
        Ok(())
    }

    fn render(&self, maze: &Maze, path: &[Position], episode: usize) -> Result<()> {
        let dir = self.dir.join(layout::RENDER_DIR);
        let path = SaccadePath(path.to_vec());
        metrics::render_path(maze, &path, metrics::CELL_PX)?.write_ppm(&dir.join(format!("ep{episode:05}.ppm")))?;
        fs::write(dir.join(format!("ep{episode:05}_path.csv")), path.to_csv())?;
        fs::write(dir.join(format!("ep{episode:05}_maze.txt")), maze.to_text())?;
        Ok(())
    }
}

fn checkpoint_for(
    params: &NetworkParams,
    config: &ExperimentConfig,
    global_step: u64,
    learner_steps: u64,
    episodes_completed: usize,
) -> Checkpoint {
    let mut ckpt = Checkpoint::new(params.clone(), config.window, config.hyper.clone());
    ckpt.global_step = global_step;
    ckpt.learner_steps = learner_steps;
    ckpt.episodes_completed = episodes_completed;
    ckpt
}

fn episode_record(actor: &ActorState, last_epsilon: f64, losses: &[f64]) -> EpisodeRecord {
    let optimal_len = env::shortest_path_len(actor.start, actor.maze.goal());
    let reached_goal = actor.status == EpisodeStatus::ReachedGoal;
    EpisodeRecord {
        episode: actor.episode,
        start: actor.start,
        optimal_len,
        steps: actor.steps,
        ratio: metrics::episode_ratio(optimal_len, actor.steps, reached_goal),
        reached_goal,
        truncated: actor.status == EpisodeStatus::Truncated,
        epsilon: last_epsilon,
        mean_loss: (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64),
    }
}

/// Hooks shared by both schedules: logging, checkpoints, renders.
struct Bookkeeping<'a> {
    config: &'a ExperimentConfig,
    output: Option<RunOutput>,
    records: Vec<EpisodeRecord>,
}

impl Bookkeeping<'_> {
    fn start(&mut self, params: &NetworkParams, fixed_maze: Option<&Maze>) -> Result<()> {
        if let Some(out) = &self.output {
            if let Some(maze) = fixed_maze {
                fs::write(out.dir.join(layout::MAZE), maze.to_text())?;
            }
            out.checkpoint(&checkpoint_for(params, self.config, 0, 0, 0), &layout::periodic_checkpoint(0))?;
        }
        Ok(())
    }

    fn finish_episode(
        &mut self,
        actor: &ActorState,
        record: EpisodeRecord,
        params: impl FnOnce() -> NetworkParams,
        learner_steps: u64,
    ) -> Result<()> {
        let done = record.episode + 1;
        if self.config.verbose && (done.is_multiple_of(50) || done == self.config.episodes) {
            let tail = &self.records[self.records.len().saturating_sub(49)..];
            let recent = (tail.iter().map(|r| r.ratio).sum::<f64>() + record.ratio) / (tail.len() + 1) as f64;
            eprintln!(
                "episode {done}/{}: steps {} ratio {:.3} recent-mean {:.3} epsilon {:.3}",
                self.config.episodes, record.steps, record.ratio, recent, record.epsilon
            );
        }
        if let Some(out) = &mut self.output {
            out.append(&record)?;
            if self.config.render_every.is_some_and(|n| record.episode.is_multiple_of(n)) {
                out.render(&actor.maze, &actor.path, record.episode)?;
            }
            if self.config.checkpoint_every > 0 && done.is_multiple_of(self.config.checkpoint_every) {
                let ckpt = checkpoint_for(&params(), self.config, actor.global_step, learner_steps, done);
                out.checkpoint(&ckpt, &layout::periodic_checkpoint(done))?;
            }
        }
        self.records.push(record);
        Ok(())
    }

    fn finish(&mut self, params: &NetworkParams, global_step: u64, learner_steps: u64, replay: Option<ReplayMemory>) -> Result<()> {
        if let Some(out) = &self.output {
            metrics::write_convergence_csv(&self.records, &out.dir.join(layout::CONVERGENCE))?;
            let mut ckpt = checkpoint_for(params, self.config, global_step, learner_steps, self.records.len());
            ckpt.replay = replay;
            ckpt.save(&out.dir.join(layout::FINAL_CHECKPOINT))?;
        }
        Ok(())
    }
}

/// Runs `config.episodes` episodes and returns the per-episode records and
/// final parameters. With `out_dir` set it also writes the episode log,
/// convergence CSV, checkpoints and optional renders.
pub fn run_training(config: &ExperimentConfig) -> Result<TrainingReport> {
    config.validate()?;
    let input_dim = config.window * config.window;
    let init_seed = seeded_stream(config.seed(), STREAM_INIT).next_u64();
    let params = qnet::init_params(input_dim, config.hyper.hidden_size, init_seed);
    let mut mazes = MazeSource::for_training(config)?;
    let fixed = mazes.fixed.as_deref().cloned();
    let output = match &config.out_dir {
        Some(dir) => Some(RunOutput::create(dir, config)?),
        None => None,
    };
    let mut books = Bookkeeping { config, output, records: Vec::with_capacity(config.episodes) };
    books.start(&params, fixed.as_ref())?;

    let (params, global_step, learner_steps, memory) = if config.deterministic {
        train_deterministic(config, params, &mut mazes, &mut books)?
    } else {
        train_concurrent(config, params, &mut mazes, &mut books)?
    };
    books.finish(&params, global_step, learner_steps, config.save_replay.then_some(memory))?;
    Ok(TrainingReport { records: books.records, params, global_step, learner_steps, fixed_maze: fixed })
}

fn first_actor(config: &ExperimentConfig, mazes: &mut MazeSource, starts: &mut ChaCha8Rng) -> Result<Option<ActorState>> {
    if config.episodes == 0 {
        return Ok(None);
    }
    let maze = mazes.next_maze()?;
    let start = sample_start(&maze, starts);
    ActorState::new(maze, start, config.window, config.max_steps(), &config.hyper).map(Some)
}

fn train_deterministic(
    config: &ExperimentConfig,
    mut params: NetworkParams,
    mazes: &mut MazeSource,
    books: &mut Bookkeeping<'_>,
) -> Result<(NetworkParams, u64, u64, ReplayMemory)> {
    let hyper = &config.hyper;
    let mut starts = seeded_stream(config.seed(), STREAM_START);
    let mut actor_rng = seeded_stream(config.seed(), STREAM_ACTOR);
    let mut learner_rng = seeded_stream(config.seed(), STREAM_LEARNER);
    let mut memory = ReplayMemory::new(hyper.replay_capacity);
    let mut learner_steps = 0u64;
    let Some(mut actor) = first_actor(config, mazes, &mut starts)? else {
        return Ok((params, 0, 0, memory));
    };
    let mut losses = Vec::new();
    for episode in 0..config.episodes {
        if episode > 0 {
            let maze = mazes.next_maze()?;
            let start = sample_start(&maze, &mut starts);
            actor.begin_episode(maze, start, episode)?;
        }
        losses.clear();
        let mut last_epsilon = actor.epsilon;
        while actor.status == EpisodeStatus::Running {
            let step = actor_step(&mut actor, &params, &mut memory, hyper, &config.rewards, &mut actor_rng)?;
            last_epsilon = step.epsilon;
            if let Some((next, loss)) = learner_step(&params, &memory, hyper, &mut learner_rng)? {
                params = next;
                losses.push(loss);
                learner_steps += 1;
            }
        }
        let record = episode_record(&actor, last_epsilon, &losses);
        books.finish_episode(&actor, record, || params.clone(), learner_steps)?;
    }
    Ok((params, actor.global_step, learner_steps, memory))
}

#[derive(Default)]
struct LearnerShared {
    losses: Vec<f64>,
    steps: u64,
    error: Option<AgentError>,
}

fn train_concurrent(
    config: &ExperimentConfig,
    params: NetworkParams,
    mazes: &mut MazeSource,
    books: &mut Bookkeeping<'_>,
) -> Result<(NetworkParams, u64, u64, ReplayMemory)> {
    let hyper = &config.hyper;
    let store = ParamStore::new(params);
    let mut memory = SharedReplay::new(ReplayMemory::new(hyper.replay_capacity));
    let stop = AtomicBool::new(false);
    let shared = Mutex::new(LearnerShared::default());
    let mut starts = seeded_stream(config.seed(), STREAM_START);
    let mut actor_rng = seeded_stream(config.seed(), STREAM_ACTOR);

    let learner_memory = memory.clone();
    let actor_result: Result<u64> = std::thread::scope(|scope| {
        let learner = scope.spawn(|| {
            let memory = &learner_memory;
            let mut rng = seeded_stream(config.seed(), STREAM_LEARNER);
            while !stop.load(Ordering::Acquire) {
                if memory.len() < hyper.warmup() {
                    std::thread::yield_now();
                    continue;
                }
                let step = memory
                    .sample(hyper.batch_size, &mut rng)
                    .map_err(AgentError::from)
                    .and_then(|batch| train_on_batch(&store.snapshot(), &batch, hyper));
                let mut shared = shared.lock().unwrap_or_else(|p| p.into_inner());
                match step {
                    Ok((next, loss)) => {
                        store.publish(next);
                        shared.losses.push(loss);
                        shared.steps += 1;
                    }
                    Err(e) => {
                        shared.error = Some(e);
                        stop.store(true, Ordering::Release);
                    }
                }
            }
        });

        let result = (|| {
            let Some(mut actor) = first_actor(config, mazes, &mut starts)? else {
                return Ok(0);
            };
            for episode in 0..config.episodes {
                if episode > 0 {
                    let maze = mazes.next_maze()?;
                    let start = sample_start(&maze, &mut starts);
                    actor.begin_episode(maze, start, episode)?;
                }
                let mut last_epsilon = actor.epsilon;
                while actor.status == EpisodeStatus::Running {
                    if stop.load(Ordering::Acquire) {
                        let err = shared.lock().unwrap_or_else(|p| p.into_inner()).error.take();
                        return Err(err.unwrap_or(AgentError::Config("learner stopped".into())));
                    }
                    let params = store.snapshot();
                    let step = actor_step(&mut actor, &params, &mut memory, hyper, &config.rewards, &mut actor_rng)?;
                    last_epsilon = step.epsilon;
                }
                let (losses, learner_steps) = {
                    let mut shared = shared.lock().unwrap_or_else(|p| p.into_inner());
                    (std::mem::take(&mut shared.losses), shared.steps)
                };
                let record = episode_record(&actor, last_epsilon, &losses);
                books.finish_episode(&actor, record, || (*store.snapshot()).clone(), learner_steps)?;
            }
            Ok(actor.global_step)
        })();
        stop.store(true, Ordering::Release);
        learner.join().expect("learner thread panicked");
        result
    });
    let global_step = actor_result?;
    let shared = shared.into_inner().unwrap_or_else(|p| p.into_inner());
    if let Some(err) = shared.error {
        return Err(err);
    }
    let params = (*store.snapshot()).clone();
    Ok((params, global_step, shared.steps, memory.snapshot()))
}

/// Result of a greedy rollout.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub path: Vec<Position>,
    pub reached_goal: bool,
}

impl Rollout {
    pub fn steps(&self) -> usize {
        self.path.len() - 1
    }
}

/// Follows the greedy policy (epsilon = 0) until the goal or the step cap.
pub fn greedy_rollout(params: &NetworkParams, maze: &Maze, start: Position, window: usize, max_steps: usize) -> Result<Rollout> {
    let rewards = RewardConfig::default();
    let mut pos = start;
    let mut path = vec![start];
    while path.len() <= max_steps && pos != maze.goal() {
        let obs = env::observe(maze, pos, window)?;
        let action = params.q_values(&obs.encoded)?.argmax();
        pos = env::step(maze, pos, action, &rewards).next_pos;
        path.push(pos);
    }
    Ok(Rollout { reached_goal: pos == maze.goal(), path })
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub episodes: usize,
    pub reached: usize,
    pub reach_rate: f64,
    pub mean_ratio: f64,
    pub ratio_variance: f64,
    pub mean_steps: f64,
    pub records: Vec<EpisodeRecord>,
}

impl std::fmt::Display for EvalReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "episodes: {}", self.episodes)?;
        writeln!(f, "reached: {}", self.reached)?;
        writeln!(f, "reach_rate: {:.4}", self.reach_rate)?;
        writeln!(f, "mean_ratio: {:.4}", self.mean_ratio)?;
        writeln!(f, "ratio_variance: {:.4}", self.ratio_variance)?;
        write!(f, "mean_steps: {:.2}", self.mean_steps)
    }
}

/// Greedy episodes under the family protocol, on mazes and start cells
/// drawn from streams disjoint from training.
pub fn evaluate(params: &NetworkParams, config: &ExperimentConfig, episodes: usize) -> Result<EvalReport> {
    config.validate()?;
    if params.input_dim() != config.window * config.window {
        return Err(CheckpointError::WindowMismatch {
            checkpoint: (params.input_dim() as f64).sqrt().round() as usize,
            requested: config.window,
        }
        .into());
    }
    let mut mazes = MazeSource::for_evaluation(config)?;
    evaluate_with(params, config, episodes, || mazes.next_maze())
}

/// Greedy evaluation on caller-supplied mazes.
pub fn evaluate_with(
    params: &NetworkParams,
    config: &ExperimentConfig,
    episodes: usize,
    mut next_maze: impl FnMut() -> Result<Arc<Maze>>,
) -> Result<EvalReport> {
    let mut starts = seeded_stream(config.seed(), STREAM_EVAL_START);
    let mut records = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let maze = next_maze()?;
        let start = sample_start(&maze, &mut starts);
        let rollout = greedy_rollout(params, &maze, start, config.window, config.max_steps())?;
        let optimal_len = env::shortest_path_len(start, maze.goal());
        records.push(EpisodeRecord {
            episode,
            start,
            optimal_len,
            steps: rollout.steps(),
            ratio: metrics::episode_ratio(optimal_len, rollout.steps(), rollout.reached_goal),
            reached_goal: rollout.reached_goal,
            truncated: !rollout.reached_goal,
            epsilon: 0.0,
            mean_loss: None,
        });
    }
    let ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    let reached = records.iter().filter(|r| r.reached_goal).count();
    let steps: Vec<f64> = records.iter().map(|r| r.steps as f64).collect();
    Ok(EvalReport {
        episodes,
        reached,
        reach_rate: if episodes == 0 { 0.0 } else { reached as f64 / episodes as f64 },
        mean_ratio: metrics::mean(&ratios),
        ratio_variance: metrics::variance(&ratios),
        mean_steps: metrics::mean(&steps),
        records,
    })
}
