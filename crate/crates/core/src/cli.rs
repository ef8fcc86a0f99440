//! Command-line front end and the evolution driver shared with the tests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_pairs, RunConfig};
use crate::diagnostics::{
    fit_decay_rate, select_coefficients, DecayReport, DiagnosticsRecorder, DiagnosticsSeries, FitWindow,
    FunctionalCoefficients,
};
use crate::equilibrium::{critical_mass, mass_of_theta, CriticalMass, EquilibriumProfile};
use crate::error::{Error, Result};
use crate::field::{DistributionField, PhaseGrid};
use crate::io;
use crate::linop::{estimate_spectral_gap, CoercivityReport};
use crate::params::{ModelParams, Statistics};
use crate::solver::{evolve, evolve_linearized};
use crate::threshold::{compute_theta_star, ThresholdReport};

#[derive(Debug, Parser)]
#[command(name = "qkfp", version, about = "Kinetic Fokker-Planck model for bosons and fermions")]
pub struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for random initial data, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the equilibrium and write profile.csv.
    Equilibrium(ModelArgs),
    /// Compute the bosonic damping threshold theta*.
    ThetaStar,
    /// Estimate the spectral gap and coercivity constants.
    SpectralGap {
        #[command(flatten)]
        model: ModelArgs,
        /// Also compute on a grid twice as fine and report the change.
        #[arg(long)]
        refine: bool,
    },
    /// Evolve the nonlinear (and linearized) model from a perturbed equilibrium.
    Evolve,
    /// Fit an exponential decay rate to a diagnostics column.
    DecayRate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "w_l2")]
        column: String,
        #[arg(long)]
        t_lo: Option<f64>,
        #[arg(long)]
        t_hi: Option<f64>,
    },
}

/// Parameter overrides applied on top of `--config`.
#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<i64>,
    #[arg(long)]
    pub sigma: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long)]
    pub mass: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub p_max: Option<String>,
    #[arg(long)]
    pub torus_length: Option<String>,
    #[arg(long)]
    pub n_p: Option<usize>,
}

impl ModelArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut put = |k: &'static str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k, x));
            }
        };
        put("kappa", self.kappa.map(|k| k.to_string()));
        put("sigma", self.sigma.map(|s| s.to_string()));
        put("theta", self.theta.clone());
        put("mass", self.mass.clone());
        put("dim", self.dim.map(|d| d.to_string()));
        put("p_max", self.p_max.clone());
        put("torus_length", self.torus_length.clone());
        v
    }
}

/// Loads `--config` (if any) and applies overrides. Setting one of `theta` and
/// `mass` on the command line replaces the other from the file.
fn load_config(path: Option<&Path>, overrides: &[(&str, String)], seed: Option<u64>) -> Result<RunConfig> {
    let text = match path {
        Some(p) => {
            fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?
        }
        None => String::new(),
    };
    let mut pairs: BTreeMap<String, String> = parse_pairs(&text)?;
    for (k, v) in overrides {
        if *k == "theta" {
            pairs.remove("mass");
        }
        if *k == "mass" {
            pairs.remove("theta");
        }
        pairs.insert((*k).to_string(), v.clone());
    }
    if let Some(s) = seed {
        pairs.insert("seed".into(), s.to_string());
    }
    let merged: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    RunConfig::parse(&merged)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct EquilibriumSummary {
    pub params: ModelParams,
    pub mass: f64,
    /// Bosons only.
    pub critical_mass: Option<CriticalMass>,
    /// `int mu_inf dp` (one-dimensional runs only).
    pub rho_inf: Option<f64>,
    /// `min (1/4 + 2 kappa mu_inf)` on the grid.
    pub quarter_shift_min: Option<f64>,
    pub in_guaranteed_regime: bool,
}

fn cmd_equilibrium(cli: &Cli, args: &ModelArgs) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref(), &args.overrides(), cli.seed)?;
    if let Some(n) = args.n_p {
        cfg.n_p = n;
    }
    cfg.resolve()?;
    let params = cfg.params;
    let mass = mass_of_theta(params.theta, &params)?;
    let mut summary = EquilibriumSummary {
        params,
        mass,
        critical_mass: match params.statistics {
            Statistics::Boson => Some(critical_mass(&params)?),
            _ => None,
        },
        rho_inf: None,
        quarter_shift_min: None,
        in_guaranteed_regime: params.in_guaranteed_regime(),
    };
    let out = cli.out.clone().or(cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let profile = if params.dim == 1 {
        let grid = crate::grid::MomentumGrid::uniform(cfg.n_p, params.p_max)?;
        let prof = EquilibriumProfile::build(&params, grid.nodes())?;
        summary.rho_inf = Some(prof.rho_inf);
        summary.quarter_shift_min = Some(prof.quarter_shift_min());
        Some(prof)
    } else {
        None
    };
    ensure_dir(&out)?;
    if let Some(prof) = profile {
        io::write_profile_csv(&prof, io::create(&out.join("profile.csv"))?)?;
    }
    io::write_json(&summary, &out.join("equilibrium.json"))?;
    print_json(&summary)
}

fn cmd_theta_star(cli: &Cli) -> Result<()> {
    let report: ThresholdReport = compute_theta_star()?;
    if let Some(out) = &cli.out {
        ensure_dir(out)?;
        io::write_json(&report, &out.join("theta_star.json"))?;
    }
    print_json(&report)
}

fn cmd_spectral_gap(cli: &Cli, args: &ModelArgs, refine: bool) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref(), &args.overrides(), cli.seed)?;
    cfg.resolve()?;
    cfg.params.validate()?;
    let n_p = args.n_p.unwrap_or(cfg.gap_n_p);
    let out = cli.out.clone().or(cfg.out_dir.clone());
    if refine {
        let r = CoercivityReport::refine(&cfg.params, n_p)?;
        if let Some(out) = out {
            ensure_dir(&out)?;
            io::write_json(&r, &out.join("spectral_gap.json"))?;
        }
        print_json(&r)
    } else {
        let r = CoercivityReport::compute(&cfg.params, n_p)?;
        if let Some(out) = out {
            ensure_dir(&out)?;
            io::write_json(&r, &out.join("spectral_gap.json"))?;
        }
        print_json(&r)
    }
}

/// Where the functional coefficients came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    Selected,
    /// Selection failed outside the guaranteed regime; unit weights are used for monitoring only.
    UnitFallback,
}

/// Fit result or the reason no fit was possible.
#[derive(Clone, Debug, Serialize)]
pub struct FitOutcome {
    pub report: Option<DecayReport>,
    pub error: Option<String>,
}

impl From<Result<DecayReport>> for FitOutcome {
    fn from(r: Result<DecayReport>) -> Self {
        match r {
            Ok(report) => FitOutcome {
                report: Some(report),
                error: None,
            },
            Err(e) => FitOutcome {
                report: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesFits {
    pub w_l2: FitOutcome,
    /// Fitted on the same window as `w_l2`.
    pub rel_entropy: FitOutcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveReport {
    pub params: ModelParams,
    pub in_guaranteed_regime: bool,
    pub regime_note: Option<String>,
    pub coefficients: FunctionalCoefficients,
    pub coefficient_source: CoefficientSource,
    pub selection_error: Option<String>,
    pub coercivity: CoercivityReport,
    pub epsilon: f64,
    pub nonlinear: SeriesFits,
    pub linearized: Option<SeriesFits>,
}

/// Everything an `evolve` run produces.
#[derive(Clone, Debug)]
pub struct EvolveOutput {
    pub report: EvolveReport,
    pub diagnostics: DiagnosticsSeries,
    pub linear_diagnostics: Option<DiagnosticsSeries>,
    pub snapshots: Vec<DistributionField>,
}

/// Fits the weighted `L^2` norm, then the relative entropy on the same window.
pub fn fit_series(series: &DiagnosticsSeries) -> SeriesFits {
    let l2 = fit_decay_rate(&series.times, &series.w_l2, &FitWindow::default(), "w_l2");
    let window = match &l2 {
        Ok(r) => FitWindow {
            t_lo: r.fit_window.0,
            t_hi: Some(r.fit_window.1),
            ..FitWindow::default()
        },
        Err(_) => FitWindow::default(),
    };
    let ent = fit_decay_rate(&series.times, &series.rel_entropy, &window, "rel_entropy");
    SeriesFits {
        w_l2: l2.into(),
        rel_entropy: ent.into(),
    }
}

/// Validates, evolves and fits. Nothing is written here; invalid
/// configurations fail before any grid-sized work starts.
pub fn run_evolve(cfg: &RunConfig) -> Result<EvolveOutput> {
    let mut cfg = cfg.clone();
    cfg.resolve()?;
    cfg.validate_run()?;
    let params = cfg.params;
    let grid = PhaseGrid::new(cfg.n_x, cfg.n_p, &params)?;
    let prof = EquilibriumProfile::build(&params, grid.p.nodes())?;
    let g0 = cfg.initial_perturbation(&grid, &prof);
    let f0 = g0.to_distribution(&prof, cfg.epsilon, 0.0);
    f0.check_invariants(&params).map_err(|e| Error::Config(format!("initial data: {e}")))?;

    let coercivity = estimate_spectral_gap(&prof, &grid.p)?;
    let in_regime = params.in_guaranteed_regime();
    let (coefficients, coefficient_source, selection_error) = match select_coefficients(&coercivity, &prof) {
        Ok(c) => (c, CoefficientSource::Selected, None),
        Err(e @ Error::Infeasible { .. }) if !in_regime => {
            (FunctionalCoefficients::UNIT, CoefficientSource::UnitFallback, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let regime_note = (!in_regime).then(|| "outside guaranteed regime".to_string());

    let recorder = DiagnosticsRecorder::new(&prof, &grid, coefficients)?;
    let traj = evolve(&f0, &cfg.solver, &prof, &grid, &recorder)?;
    let nonlinear = fit_series(&traj.diagnostics);

    let (linearized, linear_diagnostics) = if cfg.linearized {
        let mut g = g0.clone();
        g.values *= cfg.epsilon;
        let lin = evolve_linearized(&g, &cfg.solver, &prof, &grid, &recorder)?;
        (Some(fit_series(&lin.diagnostics)), Some(lin.diagnostics))
    } else {
        (None, None)
    };

    Ok(EvolveOutput {
        report: EvolveReport {
            params,
            in_guaranteed_regime: in_regime,
            regime_note,
            coefficients,
            coefficient_source,
            selection_error,
            coercivity,
            epsilon: cfg.epsilon,
            nonlinear,
            linearized,
        },
        diagnostics: traj.diagnostics,
        linear_diagnostics,
        snapshots: traj.snapshots,
    })
}

fn cmd_evolve(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("evolve requires --config".into()))?;
    let cfg = load_config(Some(path), &[], cli.seed)?;
    let out = cli
        .out
        .clone()
        .or(cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("qkfp_out"));
    let result = run_evolve(&cfg);
    let output = match result {
        Ok(o) => o,
        Err(Error::Abort(a)) => {
            if let Some(last) = &a.last_good {
                let mut params = cfg.params;
                if let Some(m) = cfg.mass {
                    params.theta = crate::equilibrium::theta_of_mass(m, &params)?;
                }
                let grid = PhaseGrid::new(cfg.n_x, cfg.n_p, &params)?;
                ensure_dir(&out)?;
                io::write_snapshot(last, &grid, &params, io::create(&out.join("abort_state.csv"))?)?;
            }
            return Err(Error::Abort(a));
        }
        Err(e) => return Err(e),
    };
    let params = output.report.params;
    let grid = PhaseGrid::new(cfg.n_x, cfg.n_p, &params)?;
    ensure_dir(&out)?;
    output.diagnostics.write_csv(io::create(&out.join("diagnostics.csv"))?)?;
    if let Some(lin) = &output.linear_diagnostics {
        lin.write_csv(io::create(&out.join("linear_diagnostics.csv"))?)?;
    }
    for (n, snap) in output.snapshots.iter().enumerate() {
        let path = out.join(format!("snapshot_{n:05}.csv"));
        io::write_snapshot(snap, &grid, &params, io::create(&path)?)?;
    }
    io::write_json(&output.report, &out.join("decay.json"))?;
    if let Some(note) = &output.report.regime_note {
        eprintln!("warning: {note}");
    }
    print_json(&output.report)
}

fn cmd_decay_rate(input: &Path, column: &str, t_lo: Option<f64>, t_hi: Option<f64>) -> Result<()> {
    let file = fs::File::open(input)?;
    let series = DiagnosticsSeries::read_csv(file)?;
    let values = series.column(column)?;
    let window = FitWindow {
        t_lo: t_lo.unwrap_or(FitWindow::default().t_lo),
        t_hi,
        ..FitWindow::default()
    };
    let report = fit_decay_rate(&series.times, values, &window, column)?;
    print_json(&report)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Equilibrium(args) => cmd_equilibrium(cli, args),
        Command::ThetaStar => cmd_theta_star(cli),
        Command::SpectralGap { model, refine } => cmd_spectral_gap(cli, model, *refine),
        Command::Evolve => cmd_evolve(cli),
        Command::DecayRate {
            input,
            column,
            t_lo,
            t_hi,
        } => cmd_decay_rate(input, column, *t_lo, *t_hi),
    }
}

/// Sizes the global thread pool from `QKFP_THREADS` when set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QKFP_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("QKFP_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}
