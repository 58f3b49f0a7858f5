use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Minimum node count accepted for any grid.
pub const MIN_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Periodic interval `[0, period)`.
    Torus,
    /// Truncated line `[-L, L]`, endpoints included.
    Line,
}

/// Spatial discretization of a torus or of a truncated line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    topology: Topology,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
    /// Torus: the period. Line: the full length `2L`.
    extent: f64,
}

impl Grid {
    /// The standard `2π`-periodic torus with `n` equispaced nodes.
    pub fn torus(n: usize) -> Result<Self> {
        Self::torus_with_period(n, 2.0 * PI)
    }

    /// Periodic box `[0, period)`. Used for solitary-wave evolution on a large box.
    pub fn torus_with_period(n: usize, period: f64) -> Result<Self> {
        check_node_count(n)?;
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Usage(format!("torus period must be positive, got {period}")));
        }
        let h = period / n as f64;
        Ok(Self {
            topology: Topology::Torus,
            nodes: (0..n).map(|j| j as f64 * h).collect(),
            weights: vec![h; n],
            spacing: h,
            extent: period,
        })
    }

    /// Uniform nodes on `[-half_length, half_length]` with trapezoid weights.
    pub fn line(n: usize, half_length: f64) -> Result<Self> {
        check_node_count(n)?;
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Usage(format!("line half-length must be positive, got {half_length}")));
        }
        let h = 2.0 * half_length / (n - 1) as f64;
        let nodes = (0..n)
            .map(|j| {
                // symmetric construction keeps x_j = -x_{n-1-j} exactly
                let t = j as f64 - 0.5 * (n - 1) as f64;
                t * h
            })
            .collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Self {
            topology: Topology::Line,
            nodes,
            weights,
            spacing: h,
            extent: 2.0 * half_length,
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_torus(&self) -> bool {
        self.topology == Topology::Torus
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Period of a torus grid (`None` on the line).
    pub fn period(&self) -> Option<f64> {
        self.is_torus().then_some(self.extent)
    }

    /// Half-length `L` of a line grid (`None` on a torus).
    pub fn half_length(&self) -> Option<f64> {
        (!self.is_torus()).then_some(0.5 * self.extent)
    }

    /// Same domain, `factor` times as many nodes (line grids keep both endpoints).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        match self.topology {
            Topology::Torus => Self::torus_with_period(self.n() * factor, self.extent),
            Topology::Line => Self::line(self.n() * factor, 0.5 * self.extent),
        }
    }

    /// Weighted sum of samples: the rectangle rule on a torus (spectrally
    /// accurate for smooth periodic integrands), trapezoid on the line.
    pub fn quadrature(&self, samples: &[f64]) -> Result<f64> {
        check_len(self.n(), samples.len())?;
        Ok(self.weights.iter().zip(samples).map(|(w, s)| w * s).sum())
    }

    pub(crate) fn integrate_unchecked(&self, samples: &[f64]) -> f64 {
        self.weights.iter().zip(samples).map(|(w, s)| w * s).sum()
    }

    /// Weighted L² inner product of two real sample vectors.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        check_len(self.n(), f.len())?;
        check_len(self.n(), g.len())?;
        Ok(self.weights.iter().zip(f.iter().zip(g)).map(|(w, (a, b))| w * a * b).sum())
    }
}

/// Free-function form of [`Grid::quadrature`].
pub fn quadrature(grid: &Grid, samples: &[f64]) -> Result<f64> {
    grid.quadrature(samples)
}

fn check_node_count(n: usize) -> Result<()> {
    if n < MIN_NODES || n % 2 != 0 {
        return Err(Error::Usage(format!(
            "grid needs an even node count >= {MIN_NODES}, got {n}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_layout() {
        let g = Grid::torus(64).unwrap();
        assert_eq!(g.n(), 64);
        assert!((g.nodes()[1] - 2.0 * PI / 64.0).abs() < 1e-15);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 2.0 * PI).abs() < 1e-12 * 2.0 * PI);
    }

    #[test]
    fn line_layout() {
        let g = Grid::line(100, 7.5).unwrap();
        assert!((g.nodes()[0] + 7.5).abs() < 1e-13);
        assert!((g.nodes()[99] - 7.5).abs() < 1e-13);
        let total: f64 = g.weights().iter().sum();
        assert!((total - 15.0).abs() < 1e-12 * 15.0);
        for j in 0..50 {
            assert_eq!(g.nodes()[j], -g.nodes()[99 - j]);
        }
    }

    #[test]
    fn rejects_bad_node_counts() {
        assert!(matches!(Grid::torus(15), Err(Error::Usage(_))));
        assert!(matches!(Grid::torus(8), Err(Error::Usage(_))));
        assert!(matches!(Grid::line(33, 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn quadrature_constant_and_sin2() {
        let g = Grid::torus(256).unwrap();
        let ones = vec![1.0; 256];
        assert!((g.quadrature(&ones).unwrap() - 2.0 * PI).abs() < 1e-12);
        let s: Vec<f64> = g.nodes().iter().map(|x| x.sin().powi(2)).collect();
        assert!((g.quadrature(&s).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn quadrature_length_mismatch() {
        let g = Grid::torus(32).unwrap();
        assert_eq!(
            g.quadrature(&[1.0; 31]),
            Err(Error::Dimension { expected: 32, got: 31 })
        );
    }

    #[test]
    fn torus_exact_for_low_degree_trig() {
        let n = 64;
        let g = Grid::torus(n).unwrap();
        for m in 1..n / 2 {
            let c: Vec<f64> = g.nodes().iter().map(|x| (m as f64 * x).cos()).collect();
            let s: Vec<f64> = g.nodes().iter().map(|x| (m as f64 * x).sin()).collect();
            assert!(g.quadrature(&c).unwrap().abs() < 1e-12, "cos {m}");
            assert!(g.quadrature(&s).unwrap().abs() < 1e-12, "sin {m}");
        }
    }
}
