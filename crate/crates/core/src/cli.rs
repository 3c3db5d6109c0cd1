//! Command-line front end: `gen`, `train`, `eval` and `render`.
//!
//! Training options resolve in three layers: explicit flags win over values
//! from `--config FILE` (flat TOML), which win over built-in defaults.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::agent::{self, ExperimentConfig, Family};
use crate::checkpoint::Checkpoint;
use crate::env::{Maze, MazeKind, RewardConfig};
use crate::metrics::{self, SaccadePath};
use crate::qnet::Hyperparams;

#[derive(Debug, Parser)]
#[command(name = "saccade", version, about = "Q-learning saccadic search in mazes of digits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a maze and write it in the plain-text maze format.
    Gen(GenArgs),
    /// Train an agent and write logs, checkpoints and renders.
    Train(TrainArgs),
    /// Run greedy episodes with a trained checkpoint.
    Eval(EvalArgs),
    /// Draw a maze and an optional saccadic path as a PPM image.
    Render(RenderArgs),
}

/// Maze family on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    /// Random digits; training keeps one maze for the whole run.
    #[value(alias = "random_fixed", alias = "random-fixed")]
    #[serde(alias = "random_fixed")]
    Random,
    /// Digits fall off with distance to the goal; fresh maze per episode.
    #[value(alias = "circle_fresh", alias = "circle-fresh")]
    #[serde(alias = "circle_fresh")]
    Circle,
    /// A road of high digits leading to the goal; fresh maze per episode.
    #[value(alias = "path_fresh", alias = "path-fresh")]
    #[serde(alias = "path_fresh")]
    Path,
}

impl FamilyArg {
    pub fn family(self) -> Family {
        match self {
            FamilyArg::Random => Family::RandomFixed,
            FamilyArg::Circle => Family::CircleFresh,
            FamilyArg::Path => Family::PathFresh,
        }
    }

    pub fn maze_kind(self) -> MazeKind {
        self.family().maze_kind()
    }
}

/// `WIDTHxHEIGHT`, e.g. `20x20`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("invalid dimension {v:?} in {s:?}"));
        Ok(Size { width: parse(w)?, height: parse(h)? })
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl<'de> Deserialize<'de> for Size {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Maze family [default: random]
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Maze size as WIDTHxHEIGHT [default: 10x10]
    #[arg(long)]
    pub size: Option<Size>,
    /// Generator seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; prints to stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    /// Flat TOML file with any of the options below (flags take precedence)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Experiment family [default: random]
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Maze size as WIDTHxHEIGHT [default: 10x10]
    #[arg(long)]
    pub size: Option<Size>,
    /// Odd observation window side length [default: 3]
    #[arg(long)]
    pub window: Option<usize>,
    /// Number of training episodes [default: 500]
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Seed for every random choice in the run [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// SGD learning rate [default: 0.001]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Discount factor, in (0, 1) [default: 0.9]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Initial exploration rate [default: 1.0]
    #[arg(long)]
    pub epsilon_start: Option<f64>,
    /// Final exploration rate [default: 0.1]
    #[arg(long)]
    pub epsilon_end: Option<f64>,
    /// Actor steps over which epsilon decays linearly [default: 10000]
    #[arg(long)]
    pub epsilon_decay_steps: Option<u64>,
    /// Minibatch size [default: 32]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Replay memory capacity [default: 10000]
    #[arg(long)]
    pub capacity: Option<usize>,
    /// Hidden layer width [default: 128]
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Step cap per episode [default: 10 * (width + height)]
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Experiences stored before the learner starts [default: batch size]
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Reward for reaching the goal [default: 1.0]
    #[arg(long, allow_hyphen_values = true)]
    pub terminal_reward: Option<f64>,
    /// Reward for every other step [default: 0.0]
    #[arg(long, allow_hyphen_values = true)]
    pub step_reward: Option<f64>,
    /// Single-threaded actor/learner interleaving; the run is reproducible from the seed [default: off]
    #[arg(long)]
    pub deterministic: bool,
    /// Output directory [default: saccade-run]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a checkpoint every N episodes, 0 to keep only the initial and final ones [default: 50]
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Render every N-th episode's saccadic path [default: off]
    #[arg(long)]
    pub render_every: Option<usize>,
    /// Include the replay memory in the final checkpoint [default: off]
    #[arg(long)]
    pub save_replay: bool,
    /// Suppress progress output [default: off]
    #[arg(long)]
    pub quiet: bool,
}

/// Contents of a `--config` file; keys mirror the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub family: Option<FamilyArg>,
    pub size: Option<Size>,
    pub window: Option<usize>,
    pub episodes: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon_start: Option<f64>,
    pub epsilon_end: Option<f64>,
    pub epsilon_decay_steps: Option<u64>,
    pub batch_size: Option<usize>,
    pub capacity: Option<usize>,
    pub hidden: Option<usize>,
    pub max_steps: Option<usize>,
    pub warmup: Option<usize>,
    pub terminal_reward: Option<f64>,
    pub step_reward: Option<f64>,
    pub deterministic: Option<bool>,
    pub out: Option<PathBuf>,
    pub checkpoint_every: Option<usize>,
    pub render_every: Option<usize>,
    pub save_replay: Option<bool>,
    pub quiet: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

pub const DEFAULT_SIZE: Size = Size { width: 10, height: 10 };
pub const DEFAULT_WINDOW: usize = 3;
pub const DEFAULT_EPISODES: usize = 500;
pub const DEFAULT_OUT: &str = "saccade-run";
pub const DEFAULT_EVAL_EPISODES: usize = 100;

/// Merges flags, config file and defaults into a validated experiment.
pub fn resolve_train_config(args: &TrainArgs) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let d = Hyperparams::default();
    let r = RewardConfig::default();
    let size = args.size.or(file.size).unwrap_or(DEFAULT_SIZE);
    let family = args.family.or(file.family).unwrap_or(FamilyArg::Random);
    let hyper = Hyperparams {
        alpha: args.alpha.or(file.alpha).unwrap_or(d.alpha),
        gamma: args.gamma.or(file.gamma).unwrap_or(d.gamma),
        epsilon_start: args.epsilon_start.or(file.epsilon_start).unwrap_or(d.epsilon_start),
        epsilon_end: args.epsilon_end.or(file.epsilon_end).unwrap_or(d.epsilon_end),
        epsilon_decay_steps: args.epsilon_decay_steps.or(file.epsilon_decay_steps).unwrap_or(d.epsilon_decay_steps),
        batch_size: args.batch_size.or(file.batch_size).unwrap_or(d.batch_size),
        replay_capacity: args.capacity.or(file.capacity).unwrap_or(d.replay_capacity),
        hidden_size: args.hidden.or(file.hidden).unwrap_or(d.hidden_size),
        max_episode_steps: args.max_steps.or(file.max_steps),
        warmup_experiences: args.warmup.or(file.warmup),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
    };
    let config = ExperimentConfig {
        family: family.family(),
        width: size.width,
        height: size.height,
        window: args.window.or(file.window).unwrap_or(DEFAULT_WINDOW),
        episodes: args.episodes.or(file.episodes).unwrap_or(DEFAULT_EPISODES),
        hyper,
        rewards: RewardConfig {
            terminal_reward: args.terminal_reward.or(file.terminal_reward).unwrap_or(r.terminal_reward),
            step_reward: args.step_reward.or(file.step_reward).unwrap_or(r.step_reward),
        },
        out_dir: Some(args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))),
        deterministic: args.deterministic || file.deterministic.unwrap_or(false),
        checkpoint_every: args.checkpoint_every.or(file.checkpoint_every).unwrap_or(50),
        render_every: args.render_every.or(file.render_every),
        save_replay: args.save_replay || file.save_replay.unwrap_or(false),
        verbose: !(args.quiet || file.quiet.unwrap_or(false)),
    };
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint produced by `train`
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Experiment family [default: random]
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Maze size as WIDTHxHEIGHT [default: 10x10]
    #[arg(long)]
    pub size: Option<Size>,
    /// Observation window; must match the checkpoint [default: the checkpoint's]
    #[arg(long)]
    pub window: Option<usize>,
    /// Number of greedy episodes [default: 100]
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Run seed; the random family regenerates its training maze from it [default: the checkpoint's]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Step cap per episode [default: 10 * (width + height)]
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Evaluate on this maze file instead of generated mazes
    #[arg(long)]
    pub maze: Option<PathBuf>,
    /// Also write the report and per-episode log to this directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Maze in the plain-text maze format
    #[arg(long)]
    pub maze: PathBuf,
    /// Saccadic path CSV with header `row,col` [default: no path]
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Output PPM file
    #[arg(long)]
    pub out: PathBuf,
    /// Pixels per maze cell [default: 16]
    #[arg(long)]
    pub cell_px: Option<usize>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => cmd_gen(&args),
        Command::Train(args) => cmd_train(&args).map(|_| ()),
        Command::Eval(args) => cmd_eval(&args).map(|report| println!("{report}")),
        Command::Render(args) => cmd_render(&args),
    }
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let size = args.size.unwrap_or(DEFAULT_SIZE);
    let kind = args.family.unwrap_or(FamilyArg::Random).maze_kind();
    let maze = kind.generate(size.width, size.height, args.seed.unwrap_or(0))?;
    match &args.out {
        Some(path) => fs::write(path, maze.to_text()).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", maze.to_text()),
    }
    Ok(())
}

pub fn cmd_train(args: &TrainArgs) -> Result<agent::TrainingReport> {
    let config = resolve_train_config(args)?;
    let report = agent::run_training(&config)?;
    if config.verbose {
        let ratios: Vec<f64> = report.records.iter().map(|r| r.ratio).collect();
        let tail = &ratios[ratios.len().saturating_sub(50)..];
        let dir = config.out_dir.as_deref().unwrap_or(Path::new("."));
        eprintln!(
            "trained {} episodes ({} actor steps, {} learner steps); final-50 mean ratio {:.3}; outputs in {}",
            report.records.len(),
            report.global_step,
            report.learner_steps,
            metrics::mean(tail),
            dir.display()
        );
    }
    Ok(report)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<agent::EvalReport> {
    let ckpt = Checkpoint::load(&args.checkpoint).with_context(|| format!("loading {}", args.checkpoint.display()))?;
    let window = args.window.unwrap_or(ckpt.window);
    ckpt.require_window(window)?;
    let size = args.size.unwrap_or(DEFAULT_SIZE);
    let mut config = ExperimentConfig::new(args.family.unwrap_or(FamilyArg::Random).family(), size.width, size.height, window, 0);
    config.hyper = Hyperparams {
        seed: args.seed.unwrap_or(ckpt.hyperparams.seed),
        max_episode_steps: args.max_steps.or(ckpt.hyperparams.max_episode_steps),
        ..Hyperparams::default()
    };
    let episodes = args.episodes.unwrap_or(DEFAULT_EVAL_EPISODES);
    let report = match &args.maze {
        Some(path) => {
            let maze = std::sync::Arc::new(load_maze(path)?);
            config.width = maze.width();
            config.height = maze.height();
            config.validate()?;
            agent::evaluate_with(&ckpt.params, &config, episodes, || Ok(maze.clone()))?
        }
        None => agent::evaluate(&ckpt.params, &config, episodes)?,
    };
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("eval.txt"), format!("{report}\n"))?;
        fs::write(dir.join("eval_episodes.csv"), metrics::episode_log_string(&report.records))?;
    }
    Ok(report)
}

fn load_maze(path: &Path) -> Result<Maze> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Maze::parse(&text).with_context(|| format!("parsing maze {}", path.display()))
}

pub fn cmd_render(args: &RenderArgs) -> Result<()> {
    let maze = load_maze(&args.maze)?;
    let path = match &args.path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            SaccadePath::parse_csv(&text).with_context(|| format!("parsing path {}", p.display()))?
        }
        None => SaccadePath::default(),
    };
    let cell_px = args.cell_px.unwrap_or(metrics::CELL_PX);
    if cell_px == 0 {
        bail!("--cell-px must be positive");
    }
    metrics::render_path(&maze, &path, cell_px)?
        .write_ppm(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}
