//! Occupancy grid used by the path planner.
//!
//! Cell `(c, r)` covers `[c*s, (c+1)*s] x [r*s, (r+1)*s]`. A cell is blocked iff
//! its square overlaps an obstacle with positive area; touching along an edge
//! or at a corner does not block it.

use crate::error::{Error, Result};
use crate::geometry::{Obstacle, Vec2};
use crate::world::Environment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub cell_size: f64,
    pub cols: usize,
    pub rows: usize,
    pub blocked: Vec<bool>,
    pub threat: Vec<bool>,
}

/// Rasterizes the environment's obstacles. The threat layer starts empty.
pub fn rasterize(env: &Environment, cell_size: f64) -> Result<GridMap> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(Error::InvalidCellSize(cell_size));
    }
    let cols = (env.width / cell_size).ceil() as usize;
    let rows = (env.height / cell_size).ceil() as usize;
    let mut grid = GridMap {
        cell_size,
        cols,
        rows,
        blocked: vec![false; cols * rows],
        threat: vec![false; cols * rows],
    };
    for o in &env.obstacles {
        // candidate index range, then the exact open-overlap test per cell
        let c0 = ((o.xmin / cell_size).floor().max(0.0) as usize).min(cols.saturating_sub(1));
        let c1 = ((o.xmax / cell_size).ceil().max(0.0) as usize).min(cols);
        let r0 = ((o.ymin / cell_size).floor().max(0.0) as usize).min(rows.saturating_sub(1));
        let r1 = ((o.ymax / cell_size).ceil().max(0.0) as usize).min(rows);
        for r in r0..r1 {
            for c in c0..c1 {
                if grid.cell_rect(Cell::new(c, r)).overlaps_open(o) {
                    let i = grid.index(Cell::new(c, r));
                    grid.blocked[i] = true;
                }
            }
        }
    }
    Ok(grid)
}

impl GridMap {
    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.cols + cell.col
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.cols, index / self.cols)
    }

    pub fn cell_rect(&self, cell: Cell) -> Obstacle {
        let s = self.cell_size;
        Obstacle::new(
            cell.col as f64 * s,
            cell.row as f64 * s,
            (cell.col + 1) as f64 * s,
            (cell.row + 1) as f64 * s,
        )
    }

    pub fn centre(&self, cell: Cell) -> Vec2 {
        let s = self.cell_size;
        Vec2::new((cell.col as f64 + 0.5) * s, (cell.row as f64 + 0.5) * s)
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, p: Vec2) -> Cell {
        let c = (p.x / self.cell_size).floor().max(0.0) as usize;
        let r = (p.y / self.cell_size).floor().max(0.0) as usize;
        Cell::new(c.min(self.cols - 1), r.min(self.rows - 1))
    }

    pub fn is_blocked(&self, cell: Cell) -> bool {
        self.blocked[self.index(cell)]
    }

    pub fn is_threat(&self, cell: Cell) -> bool {
        self.threat[self.index(cell)]
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn threat_count(&self) -> usize {
        self.threat.iter().filter(|&&b| b).count()
    }

    pub fn clear_threat(&mut self) {
        self.threat.iter_mut().for_each(|t| *t = false);
    }

    /// In-grid 8-neighbourhood of `cell`.
    pub fn neighbours(&self, cell: Cell) -> impl Iterator<Item = (Cell, i32, i32)> + '_ {
        const OFFSETS: [(i32, i32); 8] =
            [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        OFFSETS.iter().filter_map(move |&(dc, dr)| {
            let c = cell.col as i64 + dc as i64;
            let r = cell.row as i64 + dr as i64;
            (c >= 0 && r >= 0 && (c as usize) < self.cols && (r as usize) < self.rows)
                .then(|| (Cell::new(c as usize, r as usize), dc, dr))
        })
    }

    /// Unblocked cell whose centre is closest to `p` (ties: lowest index).
    pub fn nearest_free_cell(&self, p: Vec2) -> Option<Cell> {
        let home = self.cell_of(p);
        if !self.is_blocked(home) {
            return Some(home);
        }
        // grow square rings until a free cell is found, then finish that ring
        // plus one more so a closer centre in the next ring is not missed
        let max_ring = self.cols.max(self.rows);
        let mut best: Option<(f64, usize)> = None;
        for ring in 1..=max_ring {
            let c0 = home.col as i64 - ring as i64;
            let c1 = home.col as i64 + ring as i64;
            let r0 = home.row as i64 - ring as i64;
            let r1 = home.row as i64 + ring as i64;
            for r in r0..=r1 {
                for c in c0..=c1 {
                    let on_ring = r == r0 || r == r1 || c == c0 || c == c1;
                    if !on_ring || c < 0 || r < 0 || c as usize >= self.cols || r as usize >= self.rows {
                        continue;
                    }
                    let cell = Cell::new(c as usize, r as usize);
                    if self.is_blocked(cell) {
                        continue;
                    }
                    let d = self.centre(cell).dist(p);
                    let i = self.index(cell);
                    if best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                        best = Some((d, i));
                    }
                }
            }
            if let Some((bd, _)) = best {
                if (ring as f64 - 1.0) * self.cell_size > bd {
                    break;
                }
            }
        }
        best.map(|(_, i)| self.cell_at(i))
    }
}
