//! Mazes of digits: generation, movement dynamics and windowed observations.
//!
//! A maze is a rectangular grid of digits `0..=9` with a single goal cell
//! holding `9`. The agent only ever sees a `k x k` window centred on its
//! current cell; cells outside the grid show up as the sentinel `-1`.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Digit marking the goal cell.
pub const GOAL_DIGIT: u8 = 9;

/// Raw window value for cells outside the maze.
pub const OUT_OF_BOUNDS: i8 = -1;

/// Encoded value for cells outside the maze.
pub const OUT_OF_BOUNDS_ENCODED: f64 = -1.0;

/// Restart budget for the path-maze walk.
pub const PATH_MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("maze dimensions {width}x{height} too small (need at least 2x2)")]
    DimensionTooSmall { width: usize, height: usize },
    #[error("invalid observation window {k} for a {width}x{height} maze (must be odd and fit the maze)")]
    InvalidWindow { k: usize, width: usize, height: usize },
    #[error("no self-avoiding path found after {attempts} attempts")]
    RetryExhausted { attempts: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid maze: {0}")]
    InvalidMaze(String),
}

pub type Result<T> = std::result::Result<T, EnvError>;

/// A cell coordinate inside a maze.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// One saccade: a unit move in one of the four compass directions.
///
/// The discriminant order (N, E, S, W) is also the tie-break order for
/// greedy action selection and the index order of Q-value vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl Action {
    pub const COUNT: usize = 4;
    pub const ALL: [Action; Action::COUNT] =
        [Action::North, Action::East, Action::South, Action::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Unit displacement as `(d_row, d_col)`.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Action::North => (-1, 0),
            Action::East => (0, 1),
            Action::South => (1, 0),
            Action::West => (0, -1),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Action::North => 'N',
            Action::East => 'E',
            Action::South => 'S',
            Action::West => 'W',
        }
    }
}

/// The three maze generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MazeKind {
    Random,
    Circle,
    Path,
}

impl MazeKind {
    pub fn generate(self, width: usize, height: usize, seed: u64) -> Result<Maze> {
        match self {
            MazeKind::Random => generate_random(width, height, seed),
            MazeKind::Circle => generate_circle(width, height, seed),
            MazeKind::Path => generate_path(width, height, seed),
        }
    }
}

impl fmt::Display for MazeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MazeKind::Random => "random",
            MazeKind::Circle => "circle",
            MazeKind::Path => "path",
        })
    }
}

/// Rectangular grid of digits with a unique goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Maze {
    width: usize,
    height: usize,
    cells: Vec<u8>,
    goal: Position,
}

impl Maze {
    /// Builds a maze from row-major cells, checking every invariant.
    pub fn from_cells(width: usize, height: usize, cells: Vec<u8>, goal: Position) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(EnvError::InvalidMaze(format!("empty dimensions {width}x{height}")));
        }
        if cells.len() != width * height {
            return Err(EnvError::InvalidMaze(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        if goal.row >= height || goal.col >= width {
            return Err(EnvError::InvalidMaze(format!("goal {goal} outside the maze")));
        }
        if let Some(bad) = cells.iter().find(|&&d| d > GOAL_DIGIT) {
            return Err(EnvError::InvalidMaze(format!("digit {bad} out of range")));
        }
        let nines = cells.iter().filter(|&&d| d == GOAL_DIGIT).count();
        if nines != 1 || cells[goal.row * width + goal.col] != GOAL_DIGIT {
            return Err(EnvError::InvalidMaze(format!(
                "expected exactly one 9 at the goal {goal}, found {nines}"
            )));
        }
        Ok(Self { width, height, cells, goal })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn goal(&self) -> Position {
        self.goal
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn contains(&self, pos: Position) -> bool {
        pos.row < self.height && pos.col < self.width
    }

    /// Digit at `pos`. Panics when `pos` is outside the maze.
    pub fn digit(&self, pos: Position) -> u8 {
        assert!(self.contains(pos), "position {pos} outside {}x{} maze", self.width, self.height);
        self.cells[pos.row * self.width + pos.col]
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.height).flat_map(move |row| (0..self.width).map(move |col| Position::new(row, col)))
    }

    /// Serializes to the plain-text maze format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.width, self.height, self.goal.row, self.goal.col);
        for row in self.cells.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|d| d.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the plain-text maze format. Errors name the offending line (1-based).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or(EnvError::Parse { line: 1, message: "empty maze file".into() })?;
        let fields = parse_numbers::<usize>(header, 1)?;
        let [width, height, goal_row, goal_col] = fields[..] else {
            return Err(EnvError::Parse {
                line: 1,
                message: format!("header needs 4 fields (width height goal_row goal_col), got {}", fields.len()),
            });
        };
        let mut cells = Vec::with_capacity(width * height);
        for row in 0..height {
            let (line_no, line) = lines.next().ok_or_else(|| EnvError::Parse {
                line: row + 2,
                message: format!("missing row {row} of {height}"),
            })?;
            let digits = parse_numbers::<u8>(line, line_no)?;
            if digits.len() != width {
                return Err(EnvError::Parse {
                    line: line_no,
                    message: format!("expected {width} digits, got {}", digits.len()),
                });
            }
            if let Some(d) = digits.iter().find(|&&d| d > GOAL_DIGIT) {
                return Err(EnvError::Parse { line: line_no, message: format!("digit {d} out of range 0-9") });
            }
            cells.extend(digits);
        }
        if let Some((line_no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(EnvError::Parse { line: line_no, message: format!("unexpected trailing content {extra:?}") });
        }
        Self::from_cells(width, height, cells, Position::new(goal_row, goal_col))
    }
}

impl FromStr for Maze {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self> {
        Maze::parse(s)
    }
}

fn parse_numbers<T: FromStr>(line: &str, line_no: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| EnvError::Parse { line: line_no, message: format!("invalid number {tok:?}") })
        })
        .collect()
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width < 2 || height < 2 {
        return Err(EnvError::DimensionTooSmall { width, height });
    }
    Ok(())
}

fn random_position<R: Rng>(width: usize, height: usize, rng: &mut R) -> Position {
    Position::new(rng.random_range(0..height), rng.random_range(0..width))
}

/// Uniform random digits in `0..=8` with the goal placed uniformly at random.
pub fn generate_random(width: usize, height: usize, seed: u64) -> Result<Maze> {
    check_dims(width, height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goal = random_position(width, height, &mut rng);
    let mut cells: Vec<u8> = (0..width * height).map(|_| rng.random_range(0..GOAL_DIGIT)).collect();
    cells[goal.row * width + goal.col] = GOAL_DIGIT;
    Maze::from_cells(width, height, cells, goal)
}

fn euclidean(a: Position, b: Position) -> f64 {
    let dr = a.row as f64 - b.row as f64;
    let dc = a.col as f64 - b.col as f64;
    (dr * dr + dc * dc).sqrt()
}

/// Digits fall off with Euclidean distance from a random goal:
/// `max(0, 9 - round(9 d / d_max))`, with non-goal cells capped at 8 so the
/// goal stays the only 9.
pub fn generate_circle(width: usize, height: usize, seed: u64) -> Result<Maze> {
    check_dims(width, height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let goal = random_position(width, height, &mut rng);
    let corners = [
        Position::new(0, 0),
        Position::new(0, width - 1),
        Position::new(height - 1, 0),
        Position::new(height - 1, width - 1),
    ];
    let d_max = corners.iter().map(|&c| euclidean(goal, c)).fold(0.0, f64::max);
    let mut cells = Vec::with_capacity(width * height);
    for row in 0..height {
        for col in 0..width {
            let pos = Position::new(row, col);
            if pos == goal {
                cells.push(GOAL_DIGIT);
                continue;
            }
            let level = 9.0 - (9.0 * euclidean(pos, goal) / d_max).round();
            cells.push(level.clamp(0.0, 8.0) as u8);
        }
    }
    Maze::from_cells(width, height, cells, goal)
}

fn neighbours(pos: Position, width: usize, height: usize) -> impl Iterator<Item = Position> {
    Action::ALL.into_iter().filter_map(move |a| {
        let (dr, dc) = a.delta();
        let row = pos.row.checked_add_signed(dr)?;
        let col = pos.col.checked_add_signed(dc)?;
        (row < height && col < width).then_some(Position::new(row, col))
    })
}

/// Probability that a path step is drawn among the moves that approach the goal.
const PATH_GOAL_BIAS: f64 = 0.6;

/// One attempt at a thin self-avoiding walk from `start` to `goal`.
///
/// A step may not touch earlier walk cells other than the current one, so
/// the walk never folds back onto itself. Returns `None` when the walk gets
/// stuck or exceeds its length budget.
fn try_walk<R: Rng>(start: Position, goal: Position, width: usize, height: usize, rng: &mut R) -> Option<Vec<Position>> {
    let max_len = 4 * (width + height);
    let mut on_walk = vec![false; width * height];
    let idx = |p: Position| p.row * width + p.col;
    let mut walk = vec![start];
    on_walk[idx(start)] = true;
    let mut current = start;
    while current != goal {
        if walk.len() > max_len {
            return None;
        }
        let candidates: Vec<Position> = neighbours(current, width, height)
            .filter(|&n| {
                !on_walk[idx(n)]
                    && (n == goal || neighbours(n, width, height).all(|m| m == current || !on_walk[idx(m)]))
            })
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let next = if candidates.contains(&goal) {
            goal
        } else {
            let dist = shortest_path_len(current, goal);
            let closer: Vec<Position> =
                candidates.iter().copied().filter(|&n| shortest_path_len(n, goal) < dist).collect();
            let pool = if !closer.is_empty() && rng.random_bool(PATH_GOAL_BIAS) { &closer } else { &candidates };
            *pool.choose(rng).expect("non-empty pool")
        };
        on_walk[idx(next)] = true;
        walk.push(next);
        current = next;
    }
    Some(walk)
}

/// A road of `7`/`8` digits running from a border cell to the goal, on a
/// background of digits `0..=4`.
pub fn generate_path(width: usize, height: usize, seed: u64) -> Result<Maze> {
    check_dims(width, height)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let border: Vec<Position> = (0..height)
        .flat_map(|row| (0..width).map(move |col| Position::new(row, col)))
        .filter(|p| p.row == 0 || p.col == 0 || p.row == height - 1 || p.col == width - 1)
        .collect();
    for _ in 0..PATH_MAX_ATTEMPTS {
        let goal = random_position(width, height, &mut rng);
        let start = *border.choose(&mut rng).expect("border is non-empty");
        if start == goal {
            continue;
        }
        let Some(walk) = try_walk(start, goal, width, height, &mut rng) else {
            continue;
        };
        let mut cells: Vec<u8> = (0..width * height).map(|_| rng.random_range(0..=4)).collect();
        for &p in &walk[..walk.len() - 1] {
            cells[p.row * width + p.col] = rng.random_range(7..=8);
        }
        cells[goal.row * width + goal.col] = GOAL_DIGIT;
        return Maze::from_cells(width, height, cells, goal);
    }
    Err(EnvError::RetryExhausted { attempts: PATH_MAX_ATTEMPTS })
}

/// The agent's view: a `k x k` window centred on its cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub k: usize,
    /// Row-major digits, `-1` outside the maze.
    pub raw: Vec<i8>,
    /// Network input: `digit / 9`, or `-1.0` outside the maze.
    pub encoded: Vec<f64>,
}

pub fn encode_cell(raw: i8) -> f64 {
    if raw < 0 {
        OUT_OF_BOUNDS_ENCODED
    } else {
        f64::from(raw) / 9.0
    }
}

pub fn check_window(maze: &Maze, k: usize) -> Result<()> {
    if k.is_multiple_of(2) || k > maze.width.min(maze.height) {
        return Err(EnvError::InvalidWindow { k, width: maze.width, height: maze.height });
    }
    Ok(())
}

pub fn observe(maze: &Maze, pos: Position, k: usize) -> Result<Observation> {
    check_window(maze, k)?;
    let half = (k / 2) as isize;
    let mut raw = Vec::with_capacity(k * k);
    for dr in -half..=half {
        for dc in -half..=half {
            let cell = pos
                .row
                .checked_add_signed(dr)
                .zip(pos.col.checked_add_signed(dc))
                .map(|(row, col)| Position::new(row, col))
                .filter(|&p| maze.contains(p));
            raw.push(cell.map_or(OUT_OF_BOUNDS, |p| maze.digit(p) as i8));
        }
    }
    let encoded = raw.iter().map(|&v| encode_cell(v)).collect();
    Ok(Observation { k, raw, encoded })
}

/// Rewards handed out by [`step`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub terminal_reward: f64,
    pub step_reward: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { terminal_reward: 1.0, step_reward: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_pos: Position,
    pub reward: f64,
    pub reached_goal: bool,
}

/// Moves one cell; moves off the edge leave the agent where it is.
pub fn step(maze: &Maze, pos: Position, action: Action, rewards: &RewardConfig) -> StepOutcome {
    debug_assert!(maze.contains(pos));
    let (dr, dc) = action.delta();
    let row = pos.row.saturating_add_signed(dr).min(maze.height - 1);
    let col = pos.col.saturating_add_signed(dc).min(maze.width - 1);
    let next_pos = Position::new(row, col);
    let reached_goal = next_pos == maze.goal;
    let reward = if reached_goal { rewards.terminal_reward } else { rewards.step_reward };
    StepOutcome { next_pos, reward, reached_goal }
}

/// Length of the shortest 4-connected path; the grid has no obstacles.
pub fn shortest_path_len(a: Position, b: Position) -> usize {
    a.row.abs_diff(b.row) + a.col.abs_diff(b.col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn component_from_goal(maze: &Maze, member: impl Fn(Position) -> bool) -> Vec<Position> {
        let mut seen = vec![maze.goal()];
        let mut stack = vec![maze.goal()];
        while let Some(p) = stack.pop() {
            for n in neighbours(p, maze.width(), maze.height()) {
                if member(n) && !seen.contains(&n) {
                    seen.push(n);
                    stack.push(n);
                }
            }
        }
        seen
    }

    #[test]
    fn random_maze_has_single_goal() {
        let maze = generate_random(10, 10, 7).unwrap();
        assert_eq!(maze.cells().iter().filter(|&&d| d == 9).count(), 1);
        assert_eq!(maze.digit(maze.goal()), 9);
    }

    #[test]
    fn random_maze_20x20_accepts_5x5_window() {
        let maze = generate_random(20, 20, 3).unwrap();
        assert_eq!((maze.width(), maze.height()), (20, 20));
        assert!(observe(&maze, Position::new(10, 10), 5).is_ok());
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in [MazeKind::Random, MazeKind::Circle, MazeKind::Path] {
            assert_eq!(kind.generate(12, 9, 99).unwrap(), kind.generate(12, 9, 99).unwrap());
        }
    }

    #[test]
    fn small_dimensions_rejected() {
        for kind in [MazeKind::Random, MazeKind::Circle, MazeKind::Path] {
            assert_eq!(kind.generate(1, 5, 0), Err(EnvError::DimensionTooSmall { width: 1, height: 5 }));
            assert!(kind.generate(5, 1, 0).is_err());
            assert!(kind.generate(2, 2, 0).is_ok());
        }
    }

    #[test]
    fn circle_goal_and_farthest_cell() {
        let maze = generate_circle(20, 20, 11).unwrap();
        assert_eq!(maze.digit(maze.goal()), 9);
        let far = maze
            .positions()
            .max_by(|&a, &b| euclidean(a, maze.goal()).total_cmp(&euclidean(b, maze.goal())))
            .unwrap();
        assert_eq!(maze.digit(far), 0);
    }

    #[test]
    fn circle_monotone_over_all_pairs() {
        for seed in 0..5 {
            let maze = generate_circle(20, 20, seed).unwrap();
            let cells: Vec<(f64, u8)> = maze.positions().map(|p| (euclidean(p, maze.goal()), maze.digit(p))).collect();
            for &(d1, v1) in &cells {
                for &(d2, v2) in &cells {
                    if d1 <= d2 {
                        assert!(v1 >= v2, "seed {seed}: d {d1} -> {v1}, d {d2} -> {v2}");
                    }
                }
            }
        }
    }

    #[test]
    fn path_digit_bands_and_connectivity() {
        for seed in 0..30 {
            let maze = generate_path(20, 20, seed).unwrap();
            let goal = maze.goal();
            let path_cells: Vec<Position> = maze.positions().filter(|&p| maze.digit(p) >= 7).collect();
            for p in maze.positions() {
                let d = maze.digit(p);
                if p == goal {
                    assert_eq!(d, 9);
                } else {
                    assert!(d <= 4 || d == 7 || d == 8, "digit {d} at {p}");
                }
            }
            let component = component_from_goal(&maze, |p| maze.digit(p) >= 7);
            assert_eq!(component.len(), path_cells.len(), "seed {seed}: road is disconnected");
            assert!(path_cells.len() >= 2);
            // The road starts on the border.
            assert!(path_cells.iter().any(|p| *p != goal && (p.row == 0 || p.col == 0 || p.row == 19 || p.col == 19)));
        }
    }

    #[test]
    fn observe_interior_window() {
        let maze = generate_random(10, 10, 1).unwrap();
        let obs = observe(&maze, Position::new(5, 5), 3).unwrap();
        assert_eq!(obs.raw.len(), 9);
        assert!(obs.raw.iter().all(|&v| (0..=9).contains(&v)));
        assert_eq!(obs.raw[4] as u8, maze.digit(Position::new(5, 5)));
        assert_eq!(obs.raw[0] as u8, maze.digit(Position::new(4, 4)));
        assert_eq!(obs.raw[8] as u8, maze.digit(Position::new(6, 6)));
    }

    #[test]
    fn observe_corner_pads_with_sentinel() {
        let maze = generate_random(10, 10, 1).unwrap();
        let obs = observe(&maze, Position::new(0, 0), 3).unwrap();
        assert_eq!(obs.raw.iter().filter(|&&v| v == OUT_OF_BOUNDS).count(), 5);
        for (raw, enc) in obs.raw.iter().zip(&obs.encoded) {
            if *raw == OUT_OF_BOUNDS {
                assert_eq!(*enc, -1.0);
            }
        }
    }

    #[test]
    fn observe_at_goal_centre_is_one() {
        let maze = generate_random(10, 10, 4).unwrap();
        let obs = observe(&maze, maze.goal(), 5).unwrap();
        assert_eq!(obs.raw[12], 9);
        assert_eq!(obs.encoded[12], 1.0);
    }

    #[test]
    fn observe_rejects_bad_windows() {
        let maze = generate_random(6, 4, 0).unwrap();
        assert!(matches!(observe(&maze, Position::new(0, 0), 2), Err(EnvError::InvalidWindow { .. })));
        assert!(matches!(observe(&maze, Position::new(0, 0), 5), Err(EnvError::InvalidWindow { .. })));
        assert!(observe(&maze, Position::new(0, 0), 3).is_ok());
    }

    #[test]
    fn step_into_goal_is_terminal() {
        let maze = generate_random(10, 10, 5).unwrap();
        let goal = maze.goal();
        let rewards = RewardConfig::default();
        for action in Action::ALL {
            let (dr, dc) = action.delta();
            // Stand on the opposite side of the goal and move towards it.
            let Some(row) = goal.row.checked_add_signed(-dr) else { continue };
            let Some(col) = goal.col.checked_add_signed(-dc) else { continue };
            let from = Position::new(row, col);
            if !maze.contains(from) {
                continue;
            }
            let out = step(&maze, from, action, &rewards);
            assert!(out.reached_goal);
            assert_eq!(out.next_pos, goal);
            assert_eq!(out.reward, 1.0);
        }
    }

    #[test]
    fn step_clamps_at_border() {
        let maze = Maze::from_cells(2, 2, vec![0, 1, 2, 9], Position::new(1, 1)).unwrap();
        let out = step(&maze, Position::new(0, 0), Action::North, &RewardConfig::default());
        assert_eq!(out.next_pos, Position::new(0, 0));
        assert!(!out.reached_goal);
        assert_eq!(out.reward, 0.0);
        let out = step(&maze, Position::new(0, 0), Action::West, &RewardConfig::default());
        assert_eq!(out.next_pos, Position::new(0, 0));
    }

    #[test]
    fn non_terminal_step_gets_step_reward() {
        let maze = Maze::from_cells(3, 3, vec![0, 0, 0, 0, 0, 0, 0, 0, 9], Position::new(2, 2)).unwrap();
        let rewards = RewardConfig { terminal_reward: 1.0, step_reward: -0.25 };
        for action in Action::ALL {
            let out = step(&maze, Position::new(0, 0), action, &rewards);
            assert_eq!(out.reward, -0.25);
        }
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(shortest_path_len(Position::new(2, 2), Position::new(2, 2)), 0);
        assert_eq!(shortest_path_len(Position::new(0, 0), Position::new(3, 4)), 7);
    }

    #[test]
    fn text_round_trip_is_byte_identical() {
        let maze = generate_path(13, 7, 21).unwrap();
        let text = maze.to_text();
        let parsed = Maze::parse(&text).unwrap();
        assert_eq!(parsed, maze);
        assert_eq!(parsed.to_text(), text);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = Maze::parse("2 2 1 1\n0 1\n2 x\n").unwrap_err();
        assert!(matches!(err, EnvError::Parse { line: 3, .. }), "{err}");
        let err = Maze::parse("2 2 1 1\n0 1\n").unwrap_err();
        assert!(matches!(err, EnvError::Parse { line: 3, .. }), "{err}");
        let err = Maze::parse("2 2\n").unwrap_err();
        assert!(matches!(err, EnvError::Parse { line: 1, .. }), "{err}");
        let err = Maze::parse("2 2 1 1\n0 1 4\n2 9\n").unwrap_err();
        assert!(matches!(err, EnvError::Parse { line: 2, .. }), "{err}");
        // Two nines is structurally invalid.
        assert!(matches!(Maze::parse("2 2 1 1\n9 1\n2 9\n"), Err(EnvError::InvalidMaze(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn generated_mazes_hold_invariants(w in 2usize..24, h in 2usize..24, seed: u64, kind in 0usize..3) {
            let kind = [MazeKind::Random, MazeKind::Circle, MazeKind::Path][kind];
            let maze = kind.generate(w, h, seed).unwrap();
            prop_assert_eq!(maze.cells().len(), w * h);
            prop_assert!(maze.cells().iter().all(|&d| d <= 9));
            prop_assert_eq!(maze.cells().iter().filter(|&&d| d == 9).count(), 1);
            prop_assert_eq!(maze.digit(maze.goal()), 9);
            prop_assert_eq!(Maze::parse(&maze.to_text()).unwrap(), maze);
        }

        #[test]
        fn observation_invariants(seed: u64, row in 0usize..15, col in 0usize..11, half in 0usize..6) {
            let maze = generate_random(11, 15, seed).unwrap();
            let k = 2 * half + 1;
            prop_assume!(k <= 11);
            let pos = Position::new(row, col);
            let obs = observe(&maze, pos, k).unwrap();
            prop_assert_eq!(&obs, &observe(&maze, pos, k).unwrap());
            prop_assert_eq!(obs.raw.len(), k * k);
            prop_assert_eq!(obs.raw[k * k / 2] as u8, maze.digit(pos));
            for (&r, &e) in obs.raw.iter().zip(&obs.encoded) {
                if r < 0 {
                    prop_assert_eq!(e, -1.0);
                } else {
                    prop_assert_eq!(e, f64::from(r) / 9.0);
                    prop_assert!((0.0..=1.0).contains(&e));
                }
            }
        }

        #[test]
        fn step_stays_in_bounds(seed: u64, row in 0usize..8, col in 0usize..5, a in 0usize..4) {
            let maze = generate_random(5, 8, seed).unwrap();
            let out = step(&maze, Position::new(row, col), Action::from_index(a).unwrap(), &RewardConfig::default());
            prop_assert!(maze.contains(out.next_pos));
            prop_assert_eq!(out.reached_goal, out.next_pos == maze.goal());
            prop_assert!(shortest_path_len(Position::new(row, col), out.next_pos) <= 1);
        }
    }
}
