//! Uniform meshes for the unit interval in space and the unit horizon in time.

use crate::error::{Error, Result};

/// Uniform mesh of Omega = (0, 1) with `n_cells` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    n_cells: usize,
    nodes: Vec<f64>,
}

impl SpaceGrid {
    pub fn uniform(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidArgument {
                what: "space grid",
                detail: "n_cells must be positive".into(),
            });
        }
        let nodes = (0..=n_cells).map(|i| i as f64 / n_cells as f64).collect();
        Ok(Self { n_cells, nodes })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Element width h = 1 / n_cells.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n_cells as f64
    }
}

/// Uniform time mesh of [0, T] with T = 1 and `n_steps` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    n_steps: usize,
    t: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidArgument {
                what: "time grid",
                detail: "n_steps must be positive".into(),
            });
        }
        let t = (0..=n_steps).map(|i| i as f64 / n_steps as f64).collect();
        Ok(Self { n_steps, t })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of time nodes, n_steps + 1.
    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n_steps as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_grid_endpoints_and_spacing() {
        let g = SpaceGrid::uniform(100).unwrap();
        assert_eq!(g.nodes().len(), 101);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[100], 1.0);
        let h = g.spacing();
        for w in g.nodes().windows(2) {
            assert!((w[1] - w[0] - h).abs() < 1e-15);
        }
    }

    #[test]
    fn time_grid_endpoints() {
        let g = TimeGrid::uniform(200).unwrap();
        assert_eq!(g.n_nodes(), 201);
        assert_eq!(g.times()[0], 0.0);
        assert_eq!(g.times()[200], 1.0);
        assert!((g.step() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(SpaceGrid::uniform(0).is_err());
        assert!(TimeGrid::uniform(0).is_err());
    }
}
