//! Uniform sampling grids.

use crate::error::LctError;

/// A uniform grid: points `start + k * step` for `0 <= k < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self, LctError> {
        if count == 0 {
            return Err(LctError::EmptyGrid);
        }
        assert!(step > 0.0, "grid step must be positive");
        Ok(Grid { start, step, count })
    }

    /// Symmetric grid on [-half_width, half_width] with `count` points.
    pub fn symmetric(half_width: f64, count: usize) -> Result<Self, LctError> {
        if count == 0 {
            return Err(LctError::EmptyGrid);
        }
        let step = 2.0 * half_width / count as f64;
        Grid::new(-half_width, step, count)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|k| self.point(k))
    }

    pub fn end(&self) -> f64 {
        self.point(self.count.saturating_sub(1))
    }

    /// Grid with every point multiplied by `factor` (factor > 0).
    pub fn scaled(&self, factor: f64) -> Grid {
        Grid {
            start: self.start * factor,
            step: self.step * factor,
            count: self.count,
        }
    }

    /// Index of `x` if it lies on the grid within `tol * step`, else None.
    pub fn index_of(&self, x: f64, tol: f64) -> Option<usize> {
        let raw = (x - self.start) / self.step;
        let idx = raw.round();
        if (raw - idx).abs() > tol || idx < 0.0 || idx >= self.count as f64 {
            None
        } else {
            Some(idx as usize)
        }
    }
}
