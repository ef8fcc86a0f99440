//! Model configuration: particle statistics, transport nonlinearity and the
//! equilibrium constant.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Quantum statistics selector, `kappa` in the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Statistics {
    /// Fermi-Dirac, kappa = -1.
    Fermion,
    /// Maxwell-Boltzmann, kappa = 0.
    Classical,
    /// Bose-Einstein, kappa = +1.
    Boson,
}

impl Statistics {
    pub fn kappa(self) -> f64 {
        match self {
            Statistics::Fermion => -1.0,
            Statistics::Classical => 0.0,
            Statistics::Boson => 1.0,
        }
    }

    pub fn from_kappa(kappa: i64) -> Result<Self> {
        match kappa {
            -1 => Ok(Statistics::Fermion),
            0 => Ok(Statistics::Classical),
            1 => Ok(Statistics::Boson),
            k => Err(Error::InvalidParameter(format!("kappa must be -1, 0 or 1, got {k}"))),
        }
    }
}

impl TryFrom<i8> for Statistics {
    type Error = Error;
    fn try_from(k: i8) -> Result<Self> {
        Statistics::from_kappa(k as i64)
    }
}

impl From<Statistics> for i8 {
    fn from(s: Statistics) -> i8 {
        s.kappa() as i8
    }
}

/// Whether the quantum nonlinearity also enters the transport term, `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Transport {
    /// sigma = 0: free streaming `p . grad_x f`.
    Linear,
    /// sigma = 1: `p . grad_x (f + kappa f^2)`.
    Nonlinear,
}

impl Transport {
    pub fn sigma(self) -> f64 {
        match self {
            Transport::Linear => 0.0,
            Transport::Nonlinear => 1.0,
        }
    }

    pub fn from_sigma(sigma: i64) -> Result<Self> {
        match sigma {
            0 => Ok(Transport::Linear),
            1 => Ok(Transport::Nonlinear),
            s => Err(Error::InvalidParameter(format!("sigma must be 0 or 1, got {s}"))),
        }
    }
}

impl TryFrom<i8> for Transport {
    type Error = Error;
    fn try_from(s: i8) -> Result<Self> {
        Transport::from_sigma(s as i64)
    }
}

impl From<Transport> for i8 {
    fn from(t: Transport) -> i8 {
        t.sigma() as i8
    }
}

/// Tail contract: the equilibrium must have decayed below this at `|p| = p_max`.
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "kappa")]
    pub statistics: Statistics,
    #[serde(rename = "sigma")]
    pub transport: Transport,
    pub theta: f64,
    pub dim: usize,
    pub p_max: f64,
    pub torus_length: f64,
}

impl ModelParams {
    /// One-dimensional parameters with `p_max = 8` and a torus of length `2 pi`.
    pub fn new(statistics: Statistics, transport: Transport, theta: f64) -> Self {
        ModelParams {
            statistics,
            transport,
            theta,
            dim: 1,
            p_max: 8.0,
            torus_length: 2.0 * PI,
        }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_p_max(mut self, p_max: f64) -> Self {
        self.p_max = p_max;
        self
    }

    pub fn with_torus_length(mut self, length: f64) -> Self {
        self.torus_length = length;
        self
    }

    /// Same configuration with `theta` fixed by the total phase-space mass.
    pub fn with_mass(self, mass: f64) -> Result<Self> {
        let theta = crate::equilibrium::theta_of_mass(mass, &self)?;
        Ok(ModelParams { theta, ..self })
    }

    pub fn kappa(&self) -> f64 {
        self.statistics.kappa()
    }

    pub fn sigma(&self) -> f64 {
        self.transport.sigma()
    }

    /// Volume of the spatial torus, `L^d`.
    pub fn torus_volume(&self) -> f64 {
        self.torus_length.powi(self.dim as i32)
    }

    /// Structural checks that hold for any use of the parameters.
    pub fn check_basic(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite, got {}", self.theta)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(self.p_max.is_finite() && self.p_max > 0.0) {
            return Err(Error::InvalidParameter(format!("p_max must be positive, got {}", self.p_max)));
        }
        if !(self.torus_length.is_finite() && self.torus_length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "torus_length must be positive, got {}",
                self.torus_length
            )));
        }
        if self.statistics == Statistics::Boson && self.theta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bosonic equilibria need theta > 0, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Checks required before a phase-space computation or an evolution run:
    /// `theta > 0` for quantum statistics and a negligible equilibrium tail at `p_max`.
    pub fn validate(&self) -> Result<()> {
        self.check_basic()?;
        if self.statistics != Statistics::Classical && self.theta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "quantum statistics require theta > 0 for runs, got {}",
                self.theta
            )));
        }
        let tail = crate::equilibrium::occupation(0.5 * self.p_max * self.p_max + self.theta, self.kappa());
        if tail >= TAIL_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "p_max = {} too small: f_inf(p_max) = {tail:e} >= {TAIL_TOLERANCE:e}",
                self.p_max
            )));
        }
        Ok(())
    }

    /// True unless `kappa = sigma = 1` with `theta <= theta*`, where the
    /// transport damping coefficient is known to change sign.
    pub fn in_guaranteed_regime(&self) -> bool {
        if self.statistics == Statistics::Boson && self.transport == Transport::Nonlinear {
            self.theta > crate::threshold::theta_star()
        } else {
            self.statistics == Statistics::Classical || self.theta > 0.0
        }
    }
}
