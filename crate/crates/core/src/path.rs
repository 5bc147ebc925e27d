//! Discrete admissible paths `t_k ↦ z_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::PhaseVector;

/// Nodes on a strictly increasing time grid; node 0 is the initial condition.
/// Nodes are stored flat as `[x; y]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretePath {
    times: Vec<f64>,
    nodes: Vec<Vec<f64>>,
}

impl DiscretePath {
    pub fn new(times: Vec<f64>, nodes: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InadmissiblePath("a path needs at least one step".into()));
        }
        if times.len() != nodes.len() {
            return Err(Error::InadmissiblePath(format!("{} times for {} nodes", times.len(), nodes.len())));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InadmissiblePath("time grid is not strictly increasing".into()));
        }
        let d = nodes[0].len();
        if d == 0 || !d.is_multiple_of(2) || nodes.iter().any(|z| z.len() != d) {
            return Err(Error::InadmissiblePath("nodes must share one even phase dimension".into()));
        }
        Ok(Self { times, nodes })
    }

    /// Grid `t_k = k·dt`.
    pub fn uniform(dt: f64, nodes: Vec<Vec<f64>>) -> Result<Self> {
        let times = (0..nodes.len()).map(|k| k as f64 * dt).collect();
        Self::new(times, nodes)
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn flat(&self, k: usize) -> &[f64] {
        &self.nodes[k]
    }

    pub fn node(&self, k: usize) -> PhaseVector {
        PhaseVector::from_flat(&self.nodes[k]).expect("even dimension checked at construction")
    }

    pub fn set_node(&mut self, k: usize, z: Vec<f64>) {
        assert!(k > 0, "the initial node is fixed");
        assert_eq!(z.len(), self.nodes[k].len());
        self.nodes[k] = z;
    }

    pub fn phase_dim(&self) -> usize {
        self.nodes[0].len()
    }

    /// Rejects paths whose first node differs from `z0` by more than `tol`.
    pub fn check_initial(&self, z0: &[f64], tol: f64) -> Result<()> {
        if z0.len() != self.phase_dim() {
            return Err(Error::DimensionMismatch { expected: self.phase_dim(), got: z0.len() });
        }
        let d = crate::vector::max_abs(&crate::vector::sub(&self.nodes[0], z0));
        if d > tol * (1.0 + crate::vector::max_abs(z0)) {
            return Err(Error::InadmissiblePath(format!("initial node deviates from z0 by {d:e}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(DiscretePath::uniform(0.1, vec![vec![0.0, 0.0]]).is_err());
        assert!(DiscretePath::new(vec![0.0, 0.0], vec![vec![0.0, 0.0]; 2]).is_err());
        assert!(DiscretePath::uniform(0.1, vec![vec![0.0]; 2]).is_err());
        let p = DiscretePath::uniform(0.5, vec![vec![1.0, 0.0], vec![0.5, 0.1]]).unwrap();
        assert_eq!(p.times(), &[0.0, 0.5]);
        assert!(p.check_initial(&[1.0, 0.0], 1e-12).is_ok());
        assert!(p.check_initial(&[1.1, 0.0], 1e-12).is_err());
    }
}
