//! Top-layer decision making on a finite grid abstraction.
//!
//! The continuous workspace [-1,1]^2 is cut into n x n square cells. Cell
//! (i, j) covers [-1 + 2i/n, -1 + 2(i+1)/n] x [-1 + 2j/n, -1 + 2(j+1)/n],
//! so i runs along the first axis and j along the second. The decision layer
//! plans over cells only; everything metric (centroids, target-set
//! approximation) is handled here so lower layers can stay geometric.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Right,
    Up,
    Left,
    Down,
    Stay,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Right => "right",
            Action::Up => "up",
            Action::Left => "left",
            Action::Down => "down",
            Action::Stay => "stay",
        }
    }
}

/// Expansion order used everywhere a tie between neighbors must be broken.
const MOVE_ORDER: [Action; 4] = [Action::Right, Action::Up, Action::Left, Action::Down];

pub type Cell = (usize, usize);

#[derive(Debug, Clone)]
pub struct GridWorld {
    pub n: usize,
    pub s1: BTreeSet<Cell>,
    pub s2: BTreeSet<Cell>,
    /// Cells the mission planner must route around. They stay valid states
    /// of the step map; only the search refuses to enter them.
    pub forbidden: BTreeSet<Cell>,
}

impl GridWorld {
    pub fn new(
        n: usize,
        s1: BTreeSet<Cell>,
        s2: BTreeSet<Cell>,
        forbidden: BTreeSet<Cell>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("grid.n", "must be at least 1"));
        }
        let inside = |c: &Cell| c.0 < n && c.1 < n;
        if s1.is_empty() || !s1.iter().all(inside) {
            return Err(Error::config(
                "grid.s1",
                "first target set must be nonempty and inside the grid",
            ));
        }
        if s2.is_empty() || !s2.iter().all(inside) {
            return Err(Error::config(
                "grid.s2",
                "second target set must be nonempty and inside the grid",
            ));
        }
        if !forbidden.iter().all(inside) {
            return Err(Error::config("grid.forbidden", "cell outside the grid"));
        }
        Ok(GridWorld { n, s1, s2, forbidden })
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.0 < self.n && c.1 < self.n
    }
}

/// Deterministic step map. Moves that would exit the grid are inadmissible.
pub fn mdp_step(grid: &GridWorld, cell: Cell, action: Action) -> Result<Cell> {
    let (i, j) = cell;
    if !grid.contains(cell) {
        return Err(Error::Domain(format!("cell ({i}, {j}) outside the grid")));
    }
    let next = match action {
        Action::Right if i + 1 < grid.n => Some((i + 1, j)),
        Action::Up if j + 1 < grid.n => Some((i, j + 1)),
        Action::Left if i > 0 => Some((i - 1, j)),
        Action::Down if j > 0 => Some((i, j - 1)),
        Action::Stay => Some((i, j)),
        _ => None,
    };
    next.ok_or(Error::InadmissibleAction {
        action: action.name().into(),
        x: i,
        y: j,
    })
}

/// Centroid of cell (i, j) on the n x n grid over [-1, 1]^2.
pub fn cell_centroid(n: usize, cell: Cell) -> (f64, f64) {
    let h = 2.0 / n as f64;
    (
        -1.0 + h * (cell.0 as f64 + 0.5),
        -1.0 + h * (cell.1 as f64 + 0.5),
    )
}

/// Half the side length of one cell.
pub fn cell_half_width(n: usize) -> f64 {
    1.0 / n as f64
}

fn cell_corners(n: usize, cell: Cell) -> [(f64, f64); 4] {
    let h = 2.0 / n as f64;
    let x0 = -1.0 + h * cell.0 as f64;
    let y0 = -1.0 + h * cell.1 as f64;
    [(x0, y0), (x0 + h, y0), (x0, y0 + h), (x0 + h, y0 + h)]
}

/// Cells entirely contained in the set (all four corners satisfy the
/// predicate). For a convex set this is exact. Can legitimately be empty
/// when the set is small relative to the cell size; callers that need a
/// nonempty abstraction must check.
pub fn cells_inside(n: usize, set: &dyn Fn(f64, f64) -> bool) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if cell_corners(n, (i, j)).iter().all(|&(x, y)| set(x, y)) {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Cells that touch the set, decided on a 3x3 sample of each cell (corners,
/// edge midpoints, centroid). Sampling can miss a set that intersects a cell
/// only between sample points; adequate for the target geometries used here,
/// where the sets always reach a corner or the centroid.
pub fn cells_intersecting(n: usize, set: &dyn Fn(f64, f64) -> bool) -> BTreeSet<Cell> {
    let h = 2.0 / n as f64;
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            let x0 = -1.0 + h * i as f64;
            let y0 = -1.0 + h * j as f64;
            let hit = (0..3).any(|a| {
                (0..3).any(|b| set(x0 + h * a as f64 / 2.0, y0 + h * b as f64 / 2.0))
            });
            if hit {
                out.insert((i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct GridPlan {
    /// Visited cells, start first. One longer than `actions`.
    pub cells: Vec<Cell>,
    pub actions: Vec<Action>,
    /// Index into `cells` where the first target set is reached.
    pub s1_index: usize,
}

/// Shortest path to one target set by breadth-first search. Neighbors are
/// expanded right, up, left, down, so among equally near targets the one
/// discovered first in that order wins. Forbidden cells are not entered.
fn bfs(grid: &GridWorld, start: Cell, targets: &BTreeSet<Cell>) -> Result<Vec<Cell>> {
    if grid.forbidden.contains(&start) {
        return Err(Error::NoPlan(format!(
            "start cell ({}, {}) is forbidden",
            start.0, start.1
        )));
    }
    let n = grid.n;
    let idx = |c: Cell| c.1 * n + c.0;
    let mut parent: Vec<Option<Cell>> = vec![None; n * n];
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::new();
    seen[idx(start)] = true;
    queue.push_back(start);
    while let Some(cur) = queue.pop_front() {
        if targets.contains(&cur) {
            let mut path = vec![cur];
            let mut c = cur;
            while let Some(p) = parent[idx(c)] {
                path.push(p);
                c = p;
            }
            path.reverse();
            return Ok(path);
        }
        for action in MOVE_ORDER {
            if let Ok(next) = mdp_step(grid, cur, action) {
                if !seen[idx(next)] && !grid.forbidden.contains(&next) {
                    seen[idx(next)] = true;
                    parent[idx(next)] = Some(cur);
                    queue.push_back(next);
                }
            }
        }
    }
    Err(Error::NoPlan(
        "target set unreachable from the start cell".into(),
    ))
}

/// Mission plan: reach the first target set, then the second, by two chained
/// breadth-first searches. The plan is a cell sequence plus the moves
/// between consecutive cells.
pub fn plan_sequential_reachability(grid: &GridWorld, start: Cell) -> Result<GridPlan> {
    if !grid.contains(start) {
        return Err(Error::Domain(format!(
            "start cell ({}, {}) outside the grid",
            start.0, start.1
        )));
    }
    let leg1 = bfs(grid, start, &grid.s1)?;
    let waypoint = *leg1.last().expect("bfs paths are nonempty");
    let leg2 = bfs(grid, waypoint, &grid.s2)?;
    let s1_index = leg1.len() - 1;
    let mut cells = leg1;
    cells.extend_from_slice(&leg2[1..]);
    let actions = cells
        .windows(2)
        .map(|w| match (w[1].0 as i64 - w[0].0 as i64, w[1].1 as i64 - w[0].1 as i64) {
            (1, 0) => Action::Right,
            (-1, 0) => Action::Left,
            (0, 1) => Action::Up,
            (0, -1) => Action::Down,
            _ => Action::Stay,
        })
        .collect();
    Ok(GridPlan {
        cells,
        actions,
        s1_index,
    })
}
