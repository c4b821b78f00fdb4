use crate::error::{Error, Result};

/// Uniform lattice on `[-T, T]^dim`, row-major (`i0 * n + i1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGrid {
    dim: usize,
    n: usize,
    halfwidth: f64,
    h: f64,
}

pub const MIN_POINTS_PER_AXIS: usize = 33;

impl LogGrid {
    pub fn new(dim: usize, n_per_axis: usize, halfwidth: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1,2}}")));
        }
        if n_per_axis < MIN_POINTS_PER_AXIS {
            return Err(Error::GridTooCoarse { n: n_per_axis });
        }
        if n_per_axis % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "n_per_axis = {n_per_axis} must be odd so that 0 is a grid point"
            )));
        }
        if !(halfwidth.is_finite() && halfwidth > 0.0) {
            return Err(Error::InvalidGrid(format!("halfwidth {halfwidth} must be positive")));
        }
        Ok(Self {
            dim,
            n: n_per_axis,
            halfwidth,
            h: 2.0 * halfwidth / (n_per_axis - 1) as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same box with `2(n - 1) + 1` points per axis.
    pub fn refined(&self) -> Self {
        Self::new(self.dim, 2 * (self.n - 1) + 1, self.halfwidth).expect("refinement stays valid")
    }

    pub fn coord(&self, i: usize) -> f64 {
        if 2 * i + 1 == self.n {
            0.0
        } else {
            -self.halfwidth + i as f64 * self.h
        }
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.n, idx % self.n],
        }
    }

    pub fn flat_index(&self, ij: [usize; 2]) -> usize {
        match self.dim {
            1 => ij[0],
            _ => ij[0] * self.n + ij[1],
        }
    }

    /// Coordinates of a flat index; the second entry is zero in one dimension.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.multi_index(idx);
        match self.dim {
            1 => [self.coord(i), 0.0],
            _ => [self.coord(i), self.coord(j)],
        }
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Not on the boundary of the box.
    pub fn is_interior(&self, idx: usize) -> bool {
        let ij = self.multi_index(idx);
        (0..self.dim).all(|a| ij[a] > 0 && ij[a] + 1 < self.n)
    }

    /// Inside the inner half-box `|t_i| <= T/2`.
    pub fn in_inner_half(&self, idx: usize) -> bool {
        let p = self.point(idx);
        (0..self.dim).all(|a| p[a].abs() <= 0.5 * self.halfwidth + 1e-12)
    }

    /// Lebesgue measure of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Neighbour offsets along each axis, `None` off the grid.
    pub fn neighbour(&self, idx: usize, axis: usize, step: isize) -> Option<usize> {
        let mut ij = self.multi_index(idx);
        let k = ij[axis] as isize + step;
        if k < 0 || k >= self.n as isize {
            return None;
        }
        ij[axis] = k as usize;
        Some(self.flat_index(ij))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert_eq!(LogGrid::new(1, 31, 12.0), Err(Error::GridTooCoarse { n: 31 }));
        assert!(matches!(LogGrid::new(1, 34, 12.0), Err(Error::InvalidGrid(_))));
        assert!(LogGrid::new(3, 33, 12.0).is_err());
        assert!(LogGrid::new(2, 33, -1.0).is_err());
    }

    #[test]
    fn layout() {
        let g = LogGrid::new(1, 257, 12.0).unwrap();
        assert_eq!(g.spacing(), 24.0 / 256.0);
        assert_eq!(g.coord(128), 0.0);
        assert_eq!(g.coord(0), -12.0);
        assert_eq!(g.coord(256), 12.0);
        let g2 = LogGrid::new(2, 33, 6.0).unwrap();
        assert_eq!(g2.len(), 33 * 33);
        let k = g2.flat_index([3, 7]);
        assert_eq!(g2.multi_index(k), [3, 7]);
        assert_eq!(g2.point(k), [g2.coord(3), g2.coord(7)]);
        assert!(!g2.is_interior(g2.flat_index([0, 5])));
        assert!(g2.is_interior(g2.flat_index([1, 31])));
        assert_eq!(g2.neighbour(k, 1, -8), None);
        assert_eq!(g2.neighbour(k, 0, 1), Some(g2.flat_index([4, 7])));
        assert_eq!(g.refined().n_per_axis(), 513);
    }
}
