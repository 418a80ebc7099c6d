//! Uniform cell grid for cutoff-limited pair sums.
//!
//! Cells are at least `reach` wide, so every point within `reach` of a query
//! lies in the 3x3 block of cells around it. Candidates are returned in
//! ascending slot order; since out-of-range pairs contribute exactly zero,
//! sums over candidates match full slot-order sums bit for bit.

use crate::geometry::{BoundaryMode, Vec2, WorldGeometry};

const MAX_CELLS_PER_AXIS: usize = 256;

pub(crate) struct CellGrid {
    nx: usize,
    ny: usize,
    cell: Vec2,
    periodic: bool,
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl CellGrid {
    /// Bins the active points. Returns `None` when a grid would not help
    /// (fewer than three cells across a periodic axis), in which case callers
    /// fall back to scanning every slot.
    pub(crate) fn build(points: &[Vec2], active: impl Fn(usize) -> bool, world: &WorldGeometry, reach: f64) -> Option<Self> {
        let periodic = world.boundary_mode == BoundaryMode::Periodic;
        let cells = |l: f64| -> usize {
            let n = (l / reach).floor();
            if n.is_finite() && n >= 1.0 {
                (n as usize).min(MAX_CELLS_PER_AXIS)
            } else if n.is_infinite() && n > 0.0 {
                MAX_CELLS_PER_AXIS
            } else {
                1
            }
        };
        let nx = cells(world.extent.x);
        let ny = cells(world.extent.y);
        if periodic && (nx < 3 || ny < 3) {
            return None;
        }
        if !periodic && nx * ny == 1 {
            return None;
        }
        let mut grid = CellGrid {
            nx,
            ny,
            cell: Vec2::new(world.extent.x / nx as f64, world.extent.y / ny as f64),
            periodic,
            starts: vec![0; nx * ny + 1],
            items: Vec::new(),
        };
        let keys: Vec<Option<usize>> = (0..points.len())
            .map(|i| active(i).then(|| grid.key(points[i])))
            .collect();
        for k in keys.iter().flatten() {
            grid.starts[k + 1] += 1;
        }
        for c in 0..nx * ny {
            grid.starts[c + 1] += grid.starts[c];
        }
        let mut fill = grid.starts.clone();
        grid.items = vec![0; grid.starts[nx * ny]];
        // Slots are visited in order, so each cell's list is ascending.
        for (i, k) in keys.iter().enumerate() {
            if let Some(k) = *k {
                grid.items[fill[k]] = i;
                fill[k] += 1;
            }
        }
        Some(grid)
    }

    fn coord(&self, v: f64, l: f64, cell: f64, n: usize) -> usize {
        let v = if self.periodic { v.rem_euclid(l) } else { v };
        let c = (v / cell).floor();
        if c.is_nan() || c < 0.0 {
            0
        } else {
            (c as usize).min(n - 1)
        }
    }

    fn key(&self, p: Vec2) -> usize {
        let i = self.coord(p.x, self.cell.x * self.nx as f64, self.cell.x, self.nx);
        let j = self.coord(p.y, self.cell.y * self.ny as f64, self.cell.y, self.ny);
        j * self.nx + i
    }

    fn around(&self, c: usize, n: usize) -> impl Iterator<Item = usize> {
        let periodic = self.periodic;
        (-1isize..=1).filter_map(move |o| {
            let v = c as isize + o;
            if periodic {
                Some(v.rem_euclid(n as isize) as usize)
            } else if v < 0 || v >= n as isize {
                None
            } else {
                Some(v as usize)
            }
        })
    }

    /// Slots that may lie within `reach` of `p`, sorted ascending, into `out`.
    pub(crate) fn candidates(&self, p: Vec2, out: &mut Vec<usize>) {
        out.clear();
        let k = self.key(p);
        let (ci, cj) = (k % self.nx, k / self.nx);
        for j in self.around(cj, self.ny) {
            for i in self.around(ci, self.nx) {
                let c = j * self.nx + i;
                out.extend_from_slice(&self.items[self.starts[c]..self.starts[c + 1]]);
            }
        }
        out.sort_unstable();
    }
}
