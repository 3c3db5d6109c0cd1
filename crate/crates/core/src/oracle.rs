//! Reference implementations used to cross-check the main machinery:
//! breadth-first shortest paths and exact tabular Q-learning on the true
//! (fully observed) agent position.

use std::collections::VecDeque;

use rand::Rng;

use crate::agent::{sample_start, select_action};
use crate::env::{self, Action, Maze, Position, RewardConfig};
use crate::qnet::{Hyperparams, QValues};

/// 4-connected BFS distance between two cells.
pub fn bfs_shortest(maze: &Maze, a: Position, b: Position) -> usize {
    let (w, h) = (maze.width(), maze.height());
    let mut dist = vec![usize::MAX; w * h];
    let mut queue = VecDeque::from([a]);
    dist[a.row * w + a.col] = 0;
    while let Some(p) = queue.pop_front() {
        let d = dist[p.row * w + p.col];
        if p == b {
            return d;
        }
        for action in Action::ALL {
            let (dr, dc) = action.delta();
            let (Some(row), Some(col)) = (p.row.checked_add_signed(dr), p.col.checked_add_signed(dc)) else {
                continue;
            };
            if row < h && col < w && dist[row * w + col] == usize::MAX {
                dist[row * w + col] = d + 1;
                queue.push_back(Position::new(row, col));
            }
        }
    }
    unreachable!("obstacle-free grids are connected")
}

/// Q estimates for every (cell, action) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    width: usize,
    values: Vec<QValues>,
}

impl TabularQ {
    pub fn zeros(maze: &Maze) -> Self {
        Self { width: maze.width(), values: vec![QValues::default(); maze.width() * maze.height()] }
    }

    pub fn q(&self, pos: Position) -> &QValues {
        &self.values[pos.row * self.width + pos.col]
    }

    fn q_mut(&mut self, pos: Position) -> &mut QValues {
        &mut self.values[pos.row * self.width + pos.col]
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flat_map(|q| q.0)
    }

    /// Greedy walk from `start`; returns the step count if the goal is reached within `max_steps`.
    pub fn greedy_steps(&self, maze: &Maze, start: Position, max_steps: usize) -> Option<usize> {
        let rewards = RewardConfig::default();
        let mut pos = start;
        for steps in 0..=max_steps {
            if pos == maze.goal() {
                return Some(steps);
            }
            pos = env::step(maze, pos, self.q(pos).argmax(), &rewards).next_pos;
        }
        None
    }
}

/// Epsilon-greedy episodes from random starts, updating the table with
/// `Q += alpha * (r + gamma * max Q(s') - Q)`. Transitions into the goal set
/// `Q` to the reward directly.
pub fn tabular_q_learn<R: Rng + ?Sized>(
    maze: &Maze,
    hyper: &Hyperparams,
    rewards: &RewardConfig,
    episodes: usize,
    rng: &mut R,
) -> TabularQ {
    let mut table = TabularQ::zeros(maze);
    let max_steps = hyper.max_steps_for(maze.width(), maze.height());
    let mut global_step = 0u64;
    for _ in 0..episodes {
        let mut pos = sample_start(maze, rng);
        for _ in 0..max_steps {
            let action = select_action(table.q(pos), hyper.epsilon_at(global_step), rng);
            global_step += 1;
            let out = env::step(maze, pos, action, rewards);
            let slot = &mut table.q_mut(pos).0[action.index()];
            if out.reached_goal {
                *slot = out.reward;
                break;
            }
            let next_max = table.q(out.next_pos).max();
            let slot = &mut table.q_mut(pos).0[action.index()];
            *slot += hyper.alpha * (out.reward + hyper.gamma * next_max - *slot);
            pos = out.next_pos;
        }
    }
    table
}
