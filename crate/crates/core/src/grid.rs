//! Uniform grids and sampled functions on them.

use serde::Serialize;

use crate::expr::{evaluate_real, Bindings, Expr, ExprError};

pub const MIN_GRID_POINTS: usize = 64;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {MIN_GRID_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("empty interval [{0}, {1}]")]
    EmptyInterval(f64, f64),
}

/// `n` equally spaced nodes on `[x0, x1]`, both ends included.
///
/// `inset_lo` / `inset_hi` record how far the ends were pulled in from a
/// singular endpoint of the physical domain (0 when not applicable).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub n: usize,
    pub inset_lo: f64,
    pub inset_hi: f64,
}

impl Grid {
    pub fn new(x0: f64, x1: f64, n: usize) -> Result<Grid, GridError> {
        if n < MIN_GRID_POINTS {
            return Err(GridError::TooFewPoints(n));
        }
        if !(x0.is_finite() && x1.is_finite()) || x1 <= x0 {
            return Err(GridError::EmptyInterval(x0, x1));
        }
        Ok(Grid { x0, x1, n, inset_lo: 0.0, inset_hi: 0.0 })
    }

    pub fn with_insets(mut self, lo: f64, hi: f64) -> Grid {
        self.inset_lo = lo;
        self.inset_hi = hi;
        self
    }

    pub fn h(&self) -> f64 {
        (self.x1 - self.x0) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.x1
        } else {
            self.x0 + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Same interval with the spacing halved (2N − 1 nodes).
    pub fn refined(&self) -> Grid {
        Grid { n: 2 * self.n - 1, ..self.clone() }
    }

    /// Index of the node closest to `x` (clamped to the grid).
    pub fn nearest(&self, x: f64) -> usize {
        let t = ((x - self.x0) / self.h()).round();
        (t.max(0.0) as usize).min(self.n - 1)
    }
}

/// Values on a uniform set of nodes starting at `x0` with spacing `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(x0: f64, h: f64, values: Vec<f64>) -> GridFunction {
        GridFunction { x0, h, values }
    }

    pub fn on(grid: &Grid, values: Vec<f64>) -> GridFunction {
        debug_assert_eq!(values.len(), grid.n);
        GridFunction { x0: grid.x0, h: grid.h(), values }
    }

    /// Sample `e` at every node of `grid`, with `var` bound to the node.
    pub fn sample(e: &Expr, var: &str, b: &Bindings, grid: &Grid) -> Result<GridFunction, ExprError> {
        let mut b = b.clone();
        let values = grid
            .nodes()
            .into_iter()
            .map(|x| {
                b.set(var, x);
                evaluate_real(e, &b)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GridFunction::on(grid, values))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn dot(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.h
    }

    /// Discrete L² norm (rectangle rule; the Dirichlet ends carry no weight).
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(mut self) -> GridFunction {
        let n = self.norm();
        if n > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= n);
        }
        self
    }

    pub fn cosine(&self, other: &GridFunction) -> f64 {
        self.dot(other) / (self.norm() * other.norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of strict sign changes, ignoring values below `floor`·max.
    pub fn sign_changes(&self, floor: f64) -> usize {
        let cut = floor * self.max_abs();
        let mut last = 0.0f64;
        let mut changes = 0;
        for &v in &self.values {
            if v.abs() <= cut {
                continue;
            }
            if last != 0.0 && last.signum() != v.signum() {
                changes += 1;
            }
            last = v;
        }
        changes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_refinement() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        assert!((g.h() - 0.01).abs() < 1e-15);
        assert_eq!(g.node(100), 1.0);
        let r = g.refined();
        assert_eq!(r.n, 201);
        assert!((r.h() - 0.005).abs() < 1e-15);
        assert_eq!(g.nearest(0.333), 33);
    }

    #[test]
    fn rejects_coarse_or_empty() {
        assert_eq!(Grid::new(0.0, 1.0, 10), Err(GridError::TooFewPoints(10)));
        assert!(Grid::new(1.0, 1.0, 100).is_err());
    }

    #[test]
    fn sign_changes_ignore_noise() {
        let f = GridFunction::new(0.0, 1.0, vec![0.0, 1.0, 2.0, -1e-14, 1.0, -1.0, 0.0]);
        assert_eq!(f.sign_changes(1e-8), 1);
    }
}
