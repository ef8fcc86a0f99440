//! Uniform momentum grid with second-order stencils, and the periodic
//! spatial grid with Fourier differentiation.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniform nodes on `[-P, P]`, endpoints included.
///
/// First and second derivatives use centered differences in the interior and
/// second-order one-sided differences at the two end nodes. Integrals use the
/// trapezoid rule.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    nodes: Vec<f64>,
    spacing: f64,
    p_max: f64,
}

impl MomentumGrid {
    pub fn uniform(n: usize, p_max: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::GridMismatch(format!("momentum grid needs at least 8 nodes, got {n}")));
        }
        if !(p_max.is_finite() && p_max > 0.0) {
            return Err(Error::InvalidParameter(format!("p_max must be positive, got {p_max}")));
        }
        let spacing = 2.0 * p_max / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| -p_max + spacing * i as f64).collect();
        // exact symmetry
        for i in 0..n / 2 {
            nodes[n - 1 - i] = -nodes[i];
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(MomentumGrid { nodes, spacing, p_max })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nodes.len() {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    pub fn integrate(&self, g: &[f64]) -> f64 {
        g.iter().enumerate().map(|(i, v)| self.weight(i) * v).sum()
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| self.weight(i) * x * y)
            .sum()
    }

    pub fn norm_sq(&self, a: &[f64]) -> f64 {
        self.dot(a, a)
    }

    pub fn derivative_into(&self, g: &[f64], out: &mut [f64]) {
        let n = g.len();
        let inv = 0.5 / self.spacing;
        out[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) * inv;
        for i in 1..n - 1 {
            out[i] = (g[i + 1] - g[i - 1]) * inv;
        }
        out[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) * inv;
    }

    pub fn derivative(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        self.derivative_into(g, &mut out);
        out
    }

    pub fn second_derivative_into(&self, g: &[f64], out: &mut [f64]) {
        let n = g.len();
        let inv = 1.0 / (self.spacing * self.spacing);
        out[0] = (2.0 * g[0] - 5.0 * g[1] + 4.0 * g[2] - g[3]) * inv;
        for i in 1..n - 1 {
            out[i] = (g[i + 1] - 2.0 * g[i] + g[i - 1]) * inv;
        }
        out[n - 1] = (2.0 * g[n - 1] - 5.0 * g[n - 2] + 4.0 * g[n - 3] - g[n - 4]) * inv;
    }

    pub fn second_derivative(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; g.len()];
        self.second_derivative_into(g, &mut out);
        out
    }

    /// Forward differences `(g[i+1] - g[i]) / h` at the interface midpoints.
    pub fn interface_difference(&self, g: &[f64]) -> Vec<f64> {
        g.windows(2).map(|w| (w[1] - w[0]) / self.spacing).collect()
    }
}

/// Periodic grid `x_i = i L / N` on a one-dimensional torus.
#[derive(Clone)]
pub struct TorusGrid {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl TorusGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::GridMismatch(format!("torus grid needs at least 4 nodes, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!("torus length must be positive, got {length}")));
        }
        let mut planner = FftPlanner::new();
        Ok(TorusGrid {
            n,
            length,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| i as f64 * self.spacing()).collect()
    }

    fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n;
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        2.0 * PI * signed / self.length
    }

    /// Spectral derivative of a periodic sample; the Nyquist mode is dropped.
    pub fn derivative(&self, g: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut buf: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            if n % 2 == 0 && k == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c *= Complex64::new(0.0, self.wavenumber(k));
            }
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}
