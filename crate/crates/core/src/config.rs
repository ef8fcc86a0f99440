//! Flat `key = value` run configuration with `#` comments.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::EquilibriumProfile;
use crate::field::{smooth_random_slice, PerturbationField, PhaseGrid};

use crate::error::{Error, Result};
use crate::params::{ModelParams, Statistics, Transport};
use crate::solver::{Reconstruction, SolverConfig, Splitting};

/// Shape of the initial perturbation `g0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationShape {
    /// `cos(k x) He_n(p) sqrt(mu_inf)`.
    Hermite,
    /// `cos(k x)` times a seeded random Hermite combination in `p`.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: ModelParams,
    /// When set, `theta` is solved from the mass.
    pub mass: Option<f64>,
    pub n_x: usize,
    pub n_p: usize,
    pub solver: SolverConfig,
    pub epsilon: f64,
    pub mode_x: usize,
    pub mode_p: usize,
    pub shape: PerturbationShape,
    pub seed: u64,
    /// Momentum nodes for the spectral-gap estimate.
    pub gap_n_p: usize,
    /// Also run the linearized flow in `evolve`.
    pub linearized: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::new(Statistics::Fermion, Transport::Linear, 1.0),
            mass: None,
            n_x: 64,
            n_p: 128,
            solver: SolverConfig {
                dt: 2e-3,
                t_end: 20.0,
                output_stride: 5,
                ..SolverConfig::default()
            },
            epsilon: 1e-2,
            mode_x: 1,
            mode_p: 0,
            shape: PerturbationShape::Hermite,
            seed: 20_240_601,
            gap_n_p: 256,
            linearized: true,
            out_dir: None,
        }
    }
}

/// Number with an optional `pi` factor: `6.5`, `pi`, `2pi`, `0.5*pi`.
fn parse_number(key: &str, value: &str) -> Result<f64> {
    let v = value.trim();
    let bad = || Error::Config(format!("{key}: cannot parse {value:?} as a number"));
    if let Some(head) = v.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let factor = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
        return Ok(factor * PI);
    }
    v.parse::<f64>().map_err(|_| bad())
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?} as an integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected true or false, got {other:?}"))),
    }
}

/// Splits the text into key-value pairs, rejecting malformed lines and duplicates.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got {raw:?}", n + 1)))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key:?}", n + 1)));
        }
    }
    Ok(map)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut theta = None;
        for (key, value) in parse_pairs(text)? {
            let k = key.as_str();
            let v = value.as_str();
            match k {
                "kappa" => cfg.params.statistics = Statistics::from_kappa(parse_int(k, v)?).map_err(config)?,
                "sigma" => cfg.params.transport = Transport::from_sigma(parse_int(k, v)?).map_err(config)?,
                "theta" => theta = Some(parse_number(k, v)?),
                "mass" => cfg.mass = Some(parse_number(k, v)?),
                "dim" => cfg.params.dim = parse_int(k, v)?,
                "p_max" => cfg.params.p_max = parse_number(k, v)?,
                "torus_length" => cfg.params.torus_length = parse_number(k, v)?,
                "n_x" => cfg.n_x = parse_int(k, v)?,
                "n_p" => cfg.n_p = parse_int(k, v)?,
                "dt" => cfg.solver.dt = parse_number(k, v)?,
                "t_end" => cfg.solver.t_end = parse_number(k, v)?,
                "scheme" => {
                    cfg.solver.scheme = match v {
                        "strang" => Splitting::Strang,
                        "splitting_order1" | "lie" => Splitting::Lie,
                        _ => return Err(Error::Config(format!("scheme: unknown value {v:?}"))),
                    }
                }
                "cfl_safety" => cfg.solver.cfl_safety = parse_number(k, v)?,
                "output_stride" => cfg.solver.output_stride = parse_int(k, v)?,
                "snapshot_stride" => cfg.solver.snapshot_stride = parse_int(k, v)?,
                "reconstruction" => {
                    cfg.solver.reconstruction = match v {
                        "first_order" => Reconstruction::FirstOrder,
                        "minmod" => Reconstruction::Minmod,
                        _ => return Err(Error::Config(format!("reconstruction: unknown value {v:?}"))),
                    }
                }
                "epsilon" => cfg.epsilon = parse_number(k, v)?,
                "mode_x" => cfg.mode_x = parse_int(k, v)?,
                "mode_p" => cfg.mode_p = parse_int(k, v)?,
                "shape" => {
                    cfg.shape = match v {
                        "hermite" => PerturbationShape::Hermite,
                        "random" => PerturbationShape::Random,
                        _ => return Err(Error::Config(format!("shape: unknown value {v:?}"))),
                    }
                }
                "seed" => cfg.seed = parse_int(k, v)?,
                "gap_n_p" => cfg.gap_n_p = parse_int(k, v)?,
                "linearized" => cfg.linearized = parse_bool(k, v)?,
                "out_dir" => cfg.out_dir = Some(PathBuf::from(v)),
                _ => return Err(Error::Config(format!("unknown key {k:?}"))),
            }
        }
        match (theta, cfg.mass) {
            (Some(_), Some(_)) => return Err(Error::Config("give either theta or mass, not both".into())),
            (None, None) => return Err(Error::Config("one of theta or mass is required".into())),
            (Some(t), None) => cfg.params.theta = t,
            (None, Some(_)) => cfg.params.theta = f64::NAN,
        }
        let probe = ModelParams { theta: if theta.is_some() { cfg.params.theta } else { 1.0 }, ..cfg.params };
        probe.check_basic().map_err(config)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Solves `theta` from the mass when needed and checks the parameter contract.
    pub fn resolve(&mut self) -> Result<()> {
        if let Some(m) = self.mass {
            self.params.theta = crate::equilibrium::theta_of_mass(m, &self.params)?;
        }
        self.params.check_basic()
    }

    /// Everything an evolution run needs, checked before any grid is built.
    pub fn validate_run(&self) -> Result<()> {
        self.params.validate().map_err(config)?;
        if self.params.dim != 1 {
            return Err(Error::Config(format!("evolution is one-dimensional, got dim = {}", self.params.dim)));
        }
        self.solver.validate()?;
        if self.n_x < 4 || self.n_p < 8 {
            return Err(Error::Config(format!("grid too small: n_x = {}, n_p = {}", self.n_x, self.n_p)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::Config(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if self.mode_x == 0 && self.epsilon > 0.0 {
            return Err(Error::Config(
                "mode_x = 0 changes the mass; use mode_x >= 1 for a mean-free perturbation".into(),
            ));
        }
        // the speed bound uses |1 + 2 sigma kappa f| <= 3 for f in [0, 1]
        let bound = self.params.p_max * if self.params.sigma() != 0.0 { 3.0 } else { 1.0 };
        let hx = self.params.torus_length / self.n_x as f64;
        self.solver.check_cfl(bound, hx)
    }
}

impl RunConfig {
    /// Unit-norm, mean-free `g0` of the configured shape.
    pub fn initial_perturbation(&self, grid: &PhaseGrid, prof: &EquilibriumProfile) -> PerturbationField {
        match self.shape {
            PerturbationShape::Hermite => PerturbationField::fourier_hermite_mode(grid, prof, self.mode_x, self.mode_p),
            PerturbationShape::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let slice = smooth_random_slice(&mut rng, &prof.p_grid, &prof.sqrt_mu_inf, self.mode_p.max(2));
                let wave = 2.0 * PI * self.mode_x as f64 / grid.x.length();
                let x = grid.x.nodes();
                let mut values = Array2::zeros(grid.shape());
                for ((i, j), v) in values.indexed_iter_mut() {
                    *v = (wave * x[i]).cos() * slice[j];
                }
                let mut g = PerturbationField { values };
                g.remove_global_equilibrium(grid, prof);
                let norm = grid.norm_sq(&g.values).sqrt();
                g.values /= norm;
                g
            }
        }
    }
}

fn config(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) | Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fixture_style_text() {
        let text = "# fermions\nkappa = -1\nsigma = 1   # nonlinear transport\ntheta = 1.0\ntorus_length = 2pi\n\nn_x = 32\nscheme = splitting_order1\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.params.statistics, Statistics::Fermion);
        assert_eq!(cfg.params.transport, Transport::Nonlinear);
        assert_eq!(cfg.params.theta, 1.0);
        assert_eq!(cfg.params.torus_length, 2.0 * PI);
        assert_eq!(cfg.n_x, 32);
        assert_eq!(cfg.solver.scheme, Splitting::Lie);
        cfg.validate_run().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "kappa = 2\ntheta = 1",
            "theta = 1\ntheta = 2",
            "theta = 1\nmass = 2",
            "kappa = 1",
            "theta = abc",
            "theta = 1\nwhat = 3",
            "theta 1",
            "theta = 1\np_max = -1",
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
        let cfg = RunConfig::parse("theta = 1\ndt = 0.5").unwrap();
        assert_eq!(cfg.validate_run().unwrap_err().exit_code(), 2);
        let cfg = RunConfig::parse("kappa = 1\nsigma = 1\ntheta = 0.01\np_max = 3").unwrap();
        assert_eq!(cfg.validate_run().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn mass_resolves_theta() {
        let mut cfg = RunConfig::parse("kappa = 0\nmass = 2pi\ntorus_length = 1").unwrap();
        cfg.resolve().unwrap();
        assert!((cfg.params.theta + (2.0 * PI / (2.0 * PI).sqrt()).ln()).abs() < 1e-9);
        let mut cfg = RunConfig::parse("kappa = 1\ndim = 3\nmass = 1e6").unwrap();
        assert!(matches!(cfg.resolve(), Err(Error::SupercriticalMass { .. })));
    }

    #[test]
    fn perturbations_are_unit_and_mean_free() {
        for shape in ["hermite", "random"] {
            let cfg = RunConfig::parse(&format!("theta = 1\nn_x = 16\nn_p = 64\nshape = {shape}\nmode_p = 2")).unwrap();
            let grid = PhaseGrid::new(cfg.n_x, cfg.n_p, &cfg.params).unwrap();
            let prof = EquilibriumProfile::build(&cfg.params, grid.p.nodes()).unwrap();
            let g = cfg.initial_perturbation(&grid, &prof);
            assert!((grid.norm_sq(&g.values) - 1.0).abs() < 1e-12);
            assert!(g.is_mean_free(&grid, &prof, 1e-10));
            assert_eq!(g, cfg.initial_perturbation(&grid, &prof), "{shape} must be deterministic");
        }
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse_number("x", "pi").unwrap(), PI);
        assert_eq!(parse_number("x", "0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_number("x", " 1e-3 ").unwrap(), 1e-3);
        assert!(parse_number("x", "2 rad").is_err());
    }
}
