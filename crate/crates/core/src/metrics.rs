//! Episode scoring, convergence CSVs and saccadic-path images.
//!
//! The per-episode score ("current" ratio) is the shortest-path length
//! divided by the number of steps the agent actually took; the "average"
//! ratio is the running mean of all scores so far.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::env::{Maze, Position};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no episodes recorded")]
    EmptyLog,
    #[error("path position {pos} lies outside the {width}x{height} maze")]
    OutOfBounds { pos: Position, width: usize, height: usize },
    #[error("path jumps from {from} to {to}")]
    Discontinuous { from: Position, to: Position },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Outcome of one training or evaluation episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub start: Position,
    pub optimal_len: usize,
    pub steps: usize,
    pub ratio: f64,
    pub reached_goal: bool,
    pub truncated: bool,
    /// Exploration rate in effect for the episode's last action.
    pub epsilon: f64,
    /// Mean learner loss over the episode, `None` if the learner did not run.
    pub mean_loss: Option<f64>,
}

pub const EPISODE_LOG_HEADER: &str =
    "episode,start_row,start_col,optimal_len,steps,ratio,reached_goal,truncated,epsilon,mean_loss";

pub const CONVERGENCE_HEADER: &str = "episode,current_ratio,average_ratio";

/// Shortest path over steps taken; 0 for failed episodes, 1 when starting on the goal.
pub fn episode_ratio(optimal_len: usize, steps_taken: usize, reached_goal: bool) -> f64 {
    if !reached_goal {
        0.0
    } else if optimal_len == 0 {
        1.0
    } else {
        optimal_len as f64 / steps_taken as f64
    }
}

/// Mean ratio over all given records.
pub fn running_average(records: &[EpisodeRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(MetricsError::EmptyLog);
    }
    Ok(prefix_means(records.iter().map(|r| r.ratio)).pop().expect("non-empty"))
}

/// Running means `mean(x[0..=i])` for every `i`, summed left to right.
pub fn prefix_means(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut sum = 0.0;
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            sum += v;
            sum / (i + 1) as f64
        })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    mean(&values.iter().map(|v| (v - m) * (v - m)).collect::<Vec<_>>())
}

pub fn episode_log_string(records: &[EpisodeRecord]) -> String {
    let mut out = String::from(EPISODE_LOG_HEADER);
    out.push('\n');
    for r in records {
        let loss = r.mean_loss.map(|l| l.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.episode, r.start.row, r.start.col, r.optimal_len, r.steps, r.ratio, r.reached_goal, r.truncated, r.epsilon, loss
        );
    }
    out
}

fn field<T: std::str::FromStr>(fields: &[&str], idx: usize, line: usize) -> Result<T> {
    let raw = fields.get(idx).ok_or_else(|| MetricsError::Parse { line, message: format!("missing column {idx}") })?;
    raw.parse().map_err(|_| MetricsError::Parse { line, message: format!("cannot parse {raw:?} in column {idx}") })
}

fn data_lines<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h == header => Ok(lines.filter(|(_, l)| !l.is_empty())),
        _ => Err(MetricsError::Parse { line: 1, message: format!("expected header {header:?}") }),
    }
}

pub fn parse_episode_log(text: &str) -> Result<Vec<EpisodeRecord>> {
    data_lines(text, EPISODE_LOG_HEADER)?
        .map(|(line, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 10 {
                return Err(MetricsError::Parse { line, message: format!("expected 10 columns, got {}", f.len()) });
            }
            Ok(EpisodeRecord {
                episode: field(&f, 0, line)?,
                start: Position::new(field(&f, 1, line)?, field(&f, 2, line)?),
                optimal_len: field(&f, 3, line)?,
                steps: field(&f, 4, line)?,
                ratio: field(&f, 5, line)?,
                reached_goal: field(&f, 6, line)?,
                truncated: field(&f, 7, line)?,
                epsilon: field(&f, 8, line)?,
                mean_loss: if f[9].is_empty() { None } else { Some(field(&f, 9, line)?) },
            })
        })
        .collect()
}

pub fn convergence_csv_string(records: &[EpisodeRecord]) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    let averages = prefix_means(records.iter().map(|r| r.ratio));
    for (r, avg) in records.iter().zip(averages) {
        let _ = writeln!(out, "{},{},{}", r.episode, r.ratio, avg);
    }
    out
}

pub fn write_convergence_csv(records: &[EpisodeRecord], path: &Path) -> Result<()> {
    fs::write(path, convergence_csv_string(records))?;
    Ok(())
}

/// One row of a convergence CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub episode: usize,
    pub current_ratio: f64,
    pub average_ratio: f64,
}

pub fn parse_convergence_csv(text: &str) -> Result<Vec<ConvergenceRow>> {
    data_lines(text, CONVERGENCE_HEADER)?
        .map(|(line, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 3 {
                return Err(MetricsError::Parse { line, message: format!("expected 3 columns, got {}", f.len()) });
            }
            Ok(ConvergenceRow {
                episode: field(&f, 0, line)?,
                current_ratio: field(&f, 1, line)?,
                average_ratio: field(&f, 2, line)?,
            })
        })
        .collect()
}

/// Ordered cells visited by the agent, start first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SaccadePath(pub Vec<Position>);

impl SaccadePath {
    /// In bounds, and consecutive cells are equal or 4-adjacent.
    pub fn validate(&self, maze: &Maze) -> Result<()> {
        for &pos in &self.0 {
            if !maze.contains(pos) {
                return Err(MetricsError::OutOfBounds { pos, width: maze.width(), height: maze.height() });
            }
        }
        for pair in self.0.windows(2) {
            if crate::env::shortest_path_len(pair[0], pair[1]) > 1 {
                return Err(MetricsError::Discontinuous { from: pair[0], to: pair[1] });
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col\n");
        for p in &self.0 {
            let _ = writeln!(out, "{},{}", p.row, p.col);
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        data_lines(text, "row,col")?
            .map(|(line, l)| {
                let f: Vec<&str> = l.split(',').collect();
                if f.len() != 2 {
                    return Err(MetricsError::Parse { line, message: format!("expected 2 columns, got {}", f.len()) });
                }
                Ok(Position::new(field(&f, 0, line)?, field(&f, 1, line)?))
            })
            .collect::<Result<Vec<_>>>()
            .map(SaccadePath)
    }
}

/// Pixels per maze cell in rendered images.
pub const CELL_PX: usize = 16;

/// Cell colours indexed by digit: a dark-gray to warm-orange ramp, white goal.
pub const DIGIT_COLORS: [[u8; 3]; 10] = [
    [20, 20, 24],
    [45, 45, 50],
    [72, 70, 72],
    [100, 92, 86],
    [128, 108, 88],
    [156, 120, 80],
    [184, 130, 66],
    [208, 140, 52],
    [232, 158, 40],
    [255, 255, 255],
];

const GOAL_CROSS: [u8; 3] = [220, 20, 20];
const AGENT_CIRCLE: [u8; 3] = [255, 255, 255];
const PATH_DARKEST: f64 = 70.0;

/// An RGB raster written as binary PPM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, pixels: vec![0; width * height * 3] }
    }

    fn put(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return;
        }
        let i = (y as usize * self.width + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn fill_rect(&mut self, x0: usize, y0: usize, w: usize, h: usize, color: [u8; 3]) {
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                self.put(x as i64, y as i64, color);
            }
        }
    }

    /// Bresenham line, two pixels thick.
    fn line(&mut self, (mut x0, mut y0): (i64, i64), (x1, y1): (i64, i64), color: [u8; 3]) {
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            for (ox, oy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                self.put(x0 + ox, y0 + oy, color);
            }
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    fn ring(&mut self, (cx, cy): (f64, f64), radius: f64, color: [u8; 3]) {
        let r = radius.ceil() as i64 + 2;
        for y in (cy as i64 - r)..=(cy as i64 + r) {
            for x in (cx as i64 - r)..=(cx as i64 + r) {
                let d = ((x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2)).sqrt();
                if (d - radius).abs() <= 1.0 {
                    self.put(x, y, color);
                }
            }
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_ppm())?;
        Ok(())
    }
}

/// Renders the maze with the goal cross, the age-shaded green path, and a
/// white circle on the final position.
pub fn render_path(maze: &Maze, path: &SaccadePath, cell_px: usize) -> Result<Image> {
    path.validate(maze)?;
    let mut img = Image::new(maze.width() * cell_px, maze.height() * cell_px);
    for pos in maze.positions() {
        img.fill_rect(pos.col * cell_px, pos.row * cell_px, cell_px, cell_px, DIGIT_COLORS[maze.digit(pos) as usize]);
    }
    let centre = |p: Position| ((p.col * cell_px + cell_px / 2) as i64, (p.row * cell_px + cell_px / 2) as i64);

    let segments = path.0.len().saturating_sub(1);
    for (i, pair) in path.0.windows(2).enumerate() {
        // Oldest segment darkest, newest at full brightness.
        let t = (i + 1) as f64 / segments as f64;
        let green = (PATH_DARKEST + (255.0 - PATH_DARKEST) * t).round() as u8;
        img.line(centre(pair[0]), centre(pair[1]), [0, green, 0]);
    }

    let goal = maze.goal();
    let margin = (cell_px / 5) as i64;
    let (gx, gy) = ((goal.col * cell_px) as i64, (goal.row * cell_px) as i64);
    let far = cell_px as i64 - 1 - margin;
    img.line((gx + margin, gy + margin), (gx + far - 1, gy + far - 1), GOAL_CROSS);
    img.line((gx + margin, gy + far - 1), (gx + far - 1, gy + margin), GOAL_CROSS);

    if let Some(&last) = path.0.last() {
        let c = (last.col as f64 * cell_px as f64 + cell_px as f64 / 2.0, last.row as f64 * cell_px as f64 + cell_px as f64 / 2.0);
        img.ring(c, cell_px as f64 * 0.32, AGENT_CIRCLE);
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::generate_random;

    fn record(episode: usize, ratio: f64) -> EpisodeRecord {
        EpisodeRecord {
            episode,
            start: Position::new(0, 0),
            optimal_len: 1,
            steps: 1,
            ratio,
            reached_goal: ratio > 0.0,
            truncated: ratio == 0.0,
            epsilon: 0.5,
            mean_loss: None,
        }
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(episode_ratio(10, 10, true), 1.0);
        assert!((episode_ratio(23, 27, true) - 0.8518518518518519).abs() < 1e-15);
        assert_eq!((episode_ratio(23, 27, true) * 100.0).round() / 100.0, 0.85);
        assert_eq!(episode_ratio(5, 20, true), 0.25);
        assert_eq!(episode_ratio(5, 200, false), 0.0);
        assert_eq!(episode_ratio(0, 0, true), 1.0);
    }

    #[test]
    fn running_average_examples() {
        assert_eq!(running_average(&[record(0, 0.5)]).unwrap(), 0.5);
        assert_eq!(running_average(&[record(0, 1.0), record(1, 0.0)]).unwrap(), 0.5);
        assert!(matches!(running_average(&[]), Err(MetricsError::EmptyLog)));
    }

    #[test]
    fn convergence_csv_examples() {
        assert_eq!(convergence_csv_string(&[]), "episode,current_ratio,average_ratio\n");
        let text = convergence_csv_string(&[record(0, 1.0), record(1, 0.0)]);
        assert_eq!(text, "episode,current_ratio,average_ratio\n0,1,1\n1,0,0.5\n");
        let rows = parse_convergence_csv(&text).unwrap();
        assert_eq!(rows[1].average_ratio, 0.5);
    }

    #[test]
    fn episode_log_round_trip() {
        let mut a = record(0, 23.0 / 27.0);
        a.mean_loss = Some(0.012345678901234);
        let records = vec![a, record(1, 0.0)];
        let text = episode_log_string(&records);
        assert!(text.starts_with(EPISODE_LOG_HEADER));
        assert_eq!(parse_episode_log(&text).unwrap(), records);
    }

    #[test]
    fn path_validation() {
        let maze = generate_random(4, 4, 0).unwrap();
        assert!(SaccadePath(vec![Position::new(0, 0), Position::new(0, 1), Position::new(0, 1)]).validate(&maze).is_ok());
        assert!(matches!(
            SaccadePath(vec![Position::new(0, 0), Position::new(1, 1)]).validate(&maze),
            Err(MetricsError::Discontinuous { .. })
        ));
        assert!(matches!(SaccadePath(vec![Position::new(4, 0)]).validate(&maze), Err(MetricsError::OutOfBounds { .. })));
        let path = SaccadePath(vec![Position::new(3, 2), Position::new(2, 2)]);
        assert_eq!(SaccadePath::parse_csv(&path.to_csv()).unwrap(), path);
    }

    #[test]
    fn empty_path_draws_only_the_goal_cross() {
        let maze = generate_random(6, 5, 3).unwrap();
        let img = render_path(&maze, &SaccadePath::default(), CELL_PX).unwrap();
        assert_eq!((img.width, img.height), (6 * CELL_PX, 5 * CELL_PX));
        let g = maze.goal();
        let has_red = (0..CELL_PX).any(|dy| (0..CELL_PX).any(|dx| img.pixel(g.col * CELL_PX + dx, g.row * CELL_PX + dy) == GOAL_CROSS));
        assert!(has_red);
        assert!(!img.pixels.chunks(3).any(|p| p[0] == 0 && p[1] > 0 && p[2] == 0), "no green without a path");
    }

    #[test]
    fn single_cell_path_draws_circle_without_segments() {
        let maze = generate_random(6, 6, 3).unwrap();
        let cell = maze.positions().find(|&p| p != maze.goal()).unwrap();
        let img = render_path(&maze, &SaccadePath(vec![cell]), CELL_PX).unwrap();
        assert!(!img.pixels.chunks(3).any(|p| p[0] == 0 && p[1] > 0 && p[2] == 0));
        let white = (0..CELL_PX)
            .flat_map(|dy| (0..CELL_PX).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| img.pixel(cell.col * CELL_PX + dx, cell.row * CELL_PX + dy) == AGENT_CIRCLE)
            .count();
        assert!(white > 10);
    }

    #[test]
    fn path_brightness_increases_with_age() {
        let maze = Maze::from_cells(4, 1, vec![0, 0, 0, 9], Position::new(0, 3)).unwrap();
        let path = SaccadePath((0..4).map(|c| Position::new(0, c)).collect());
        let img = render_path(&maze, &path, CELL_PX).unwrap();
        let y = CELL_PX / 2;
        let g1 = img.pixel(CELL_PX, y)[1];
        let g2 = img.pixel(2 * CELL_PX, y)[1];
        assert!(g1 < g2, "{g1} {g2}");
    }

    #[test]
    fn ppm_header() {
        let img = Image::new(3, 2);
        let bytes = img.to_ppm();
        assert!(bytes.starts_with(b"P6\n3 2\n255\n"));
        assert_eq!(bytes.len(), 11 + 18);
    }
}
