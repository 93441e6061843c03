//! Batch front end: JSON configuration parsing, suite orchestration, and
//! reproducible reports. Exit codes: 0 all checks passed, 1 verification
//! failure, 2 configuration or runtime error. Reports are byte-identical
//! across reruns with the same config and seed; wall-clock metadata lives in
//! a sidecar file.

use crate::bethe_solver::{self, SolverConfig};
use crate::duality::{self, DualityStatus};
use crate::limits::{self, GaudinSpec};
use crate::numerics::{self, C};
use crate::operator_oracle;
use crate::rs_model::{self, FlowConfig, Regime, RsParams, RsState};
use crate::xxz_bethe::{self, BetheRoots, ChainSpec};
use clap::Parser;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config schema violation in {path}: {message}")]
    Schema { path: String, message: String },
    #[error("config invariant violation ({field}): {message}")]
    Invariant { field: String, message: String },
    #[error("runtime error: {0}")]
    Runtime(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "trig-qc", version, about = "Quantum-classical duality checks")]
pub struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for reports (default: current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also emit CSV artifacts (trajectories, spectra).
    #[arg(long)]
    pub csv: bool,
    /// Override the end-to-end verification tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyDuality,
    SolveBethe,
    CheckIdentity,
    SimulateRs,
    LimitGaudin,
    LimitXx,
    OracleDiag,
    FullSuite,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub n: usize,
    #[serde(with = "crate::numerics::json_complex::vec")]
    pub q: Vec<C>,
    #[serde(with = "crate::numerics::json_complex::vec")]
    pub twist: Vec<C>,
    #[serde(with = "crate::numerics::json_complex")]
    pub hbar: C,
}

impl ChainConfig {
    fn to_spec(&self) -> Result<ChainSpec> {
        ChainSpec::new(self.n, self.q.clone(), self.twist.clone(), self.hbar).map_err(|e| {
            CliError::Invariant {
                field: "chain".into(),
                message: e.to_string(),
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaudinConfig {
    pub n: usize,
    #[serde(with = "crate::numerics::json_complex::vec")]
    pub q: Vec<C>,
    #[serde(with = "crate::numerics::json_complex::vec")]
    pub v: Vec<C>,
    #[serde(with = "crate::numerics::json_complex")]
    pub hbar: C,
}

impl GaudinConfig {
    fn to_spec(&self) -> Result<GaudinSpec> {
        GaudinSpec::new(self.n, self.q.clone(), self.v.clone(), self.hbar).map_err(|e| {
            CliError::Invariant {
                field: "gaudin".into(),
                message: e.to_string(),
            }
        })
    }
}

fn default_steps() -> usize {
    4000
}

fn default_samples() -> usize {
    50
}

fn default_t_end() -> f64 {
    5.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsSimConfig {
    #[serde(with = "crate::numerics::json_complex")]
    pub eta: C,
    #[serde(with = "crate::numerics::json_complex")]
    pub nu: C,
    #[serde(with = "crate::numerics::json_complex::vec")]
    pub q: Vec<C>,
    #[serde(default, with = "crate::numerics::json_complex::opt_vec")]
    pub p: Option<Vec<C>>,
    #[serde(default, with = "crate::numerics::json_complex::opt_vec")]
    pub qdot: Option<Vec<C>>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_instances() -> usize {
    200
}

fn default_max_n() -> usize {
    6
}

fn default_identity_hbar() -> C {
    C::new(0.3, 0.1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_identity_hbar", with = "crate::numerics::json_complex")]
    pub hbar: C,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            instances: default_instances(),
            max_n: default_max_n(),
            hbar: default_identity_hbar(),
        }
    }
}

/// Fully resolved run configuration; embedded verbatim in every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub chain: Option<ChainConfig>,
    #[serde(default)]
    pub gaudin: Option<GaudinConfig>,
    #[serde(default)]
    pub rs: Option<RsSimConfig>,
    #[serde(default)]
    pub identity: Option<IdentityConfig>,
    #[serde(default)]
    pub occupations: Option<Vec<usize>>,
    /// Explicit Bethe roots (one list per nesting level); when absent the
    /// sector is enumerated by the solver.
    #[serde(default, with = "crate::numerics::json_complex::opt_vec_vec")]
    pub roots: Option<Vec<Vec<C>>>,
    #[serde(default, with = "crate::numerics::json_complex::opt")]
    pub eta: Option<C>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
}

fn default_seed() -> u64 {
    1
}

impl RunConfig {
    fn eta(&self) -> C {
        self.eta.unwrap_or(C::new(1.0, 0.0))
    }

    fn solver(&self) -> SolverConfig {
        let mut cfg = self.solver.clone().unwrap_or_default();
        cfg.seed = self.seed;
        cfg
    }

    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn chain(&self) -> Result<ChainSpec> {
        self.chain
            .as_ref()
            .ok_or_else(|| CliError::Invariant {
                field: "chain".into(),
                message: "this command requires a \"chain\" section".into(),
            })?
            .to_spec()
    }

    fn gaudin(&self) -> Result<GaudinSpec> {
        self.gaudin
            .as_ref()
            .ok_or_else(|| CliError::Invariant {
                field: "gaudin".into(),
                message: "this command requires a \"gaudin\" section".into(),
            })?
            .to_spec()
    }

    fn occupations(&self, n: usize) -> Vec<usize> {
        self.occupations.clone().unwrap_or_else(|| vec![0; n - 1])
    }
}

/// Parse and validate a config file; all structural invariants are checked
/// here so later stages can assume a well-formed run.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    // eager invariant checks with precise diagnostics
    if let Some(chain) = &cfg.chain {
        chain.to_spec()?;
    }
    if let Some(gaudin) = &cfg.gaudin {
        gaudin.to_spec()?;
    }
    if let Some(rs) = &cfg.rs {
        if rs.p.is_none() && rs.qdot.is_none() {
            return Err(CliError::Invariant {
                field: "rs".into(),
                message: "either \"p\" or \"qdot\" must be given".into(),
            });
        }
    }
    Ok(cfg)
}

/// Outcome of one suite run: the machine-readable report plus any CSV
/// artifacts (name, contents).
#[derive(Debug)]
pub struct SuiteOutcome {
    pub passed: bool,
    pub report: Value,
    pub csv: Vec<(String, String)>,
}

fn status_line(name: &str, passed: bool) {
    println!("{name}: {}", if passed { "pass" } else { "FAIL" });
}

fn solutions_for(
    cfg: &RunConfig,
    spec: &ChainSpec,
    occupations: &[usize],
) -> Result<Vec<BetheRoots>> {
    if let Some(levels) = &cfg.roots {
        let roots = BetheRoots::new(occupations.to_vec(), levels.clone()).map_err(|e| {
            CliError::Invariant {
                field: "roots".into(),
                message: e.to_string(),
            }
        })?;
        return Ok(vec![roots]);
    }
    let set = bethe_solver::enumerate_sector(spec, occupations, &cfg.solver()).map_err(runtime)?;
    Ok(set.solutions)
}

fn cmd_verify_duality(cfg: &RunConfig) -> Result<(Value, bool)> {
    let spec = cfg.chain()?;
    let occ = cfg.occupations(spec.rank());
    let tol = cfg.tol_or(1e-8);
    let solutions = solutions_for(cfg, &spec, &occ)?;
    let reports: Vec<_> = solutions
        .iter()
        .map(|roots| duality::verify_duality(&spec, roots, cfg.eta(), tol))
        .collect();
    let passed = !reports.is_empty() && reports.iter().all(|r| r.status == DualityStatus::Verified);
    Ok((
        json!({
            "tolerance": tol,
            "solutions": reports.len(),
            "reports": reports,
        }),
        passed,
    ))
}

fn cmd_solve_bethe(cfg: &RunConfig) -> Result<(Value, bool)> {
    let spec = cfg.chain()?;
    let occ = cfg.occupations(spec.rank());
    let set = bethe_solver::enumerate_sector(&spec, &occ, &cfg.solver()).map_err(runtime)?;
    let passed = set.found == set.expected;
    Ok((serde_json::to_value(&set).map_err(runtime)?, passed))
}

fn cmd_check_identity(cfg: &RunConfig) -> Result<(Value, bool)> {
    let idc = cfg.identity.clone().unwrap_or_default();
    let tol = cfg.tol_or(1e-9);
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut max_mult: f64 = 0.0;
    let mut max_add: f64 = 0.0;
    let mut skipped = 0usize;
    let mut done = 0usize;
    while done < idc.instances {
        let n = rng.gen_range(1..=idc.max_n);
        let m = rng.gen_range(0..=n);
        let sample = |rng: &mut StdRng| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let x: Vec<C> = (0..n).map(|_| sample(&mut rng)).collect();
        let y: Vec<C> = (0..m).map(|_| sample(&mut rng)).collect();
        let g = sample(&mut rng) + C::new(1.5, 0.0);
        let omega = sample(&mut rng);
        match (
            duality::det_identity_check(&x, &y, g, idc.hbar),
            duality::gaudin_identity_check(&x, &y, omega, idc.hbar + C::new(1.0, 0.0)),
        ) {
            (Ok(dm), Ok(da)) => {
                max_mult = max_mult.max(dm);
                max_add = max_add.max(da);
                done += 1;
            }
            _ => {
                skipped += 1;
                if skipped > 10 * idc.instances {
                    return Err(CliError::Runtime(
                        "identity fuzz: too many singular draws".into(),
                    ));
                }
            }
        }
    }
    let passed = max_mult < tol && max_add < tol;
    Ok((
        json!({
            "instances": idc.instances,
            "skipped_singular": skipped,
            "tolerance": tol,
            "max_deviation_multiplicative": max_mult,
            "max_deviation_additive": max_add,
        }),
        passed,
    ))
}

fn cmd_simulate_rs(cfg: &RunConfig, want_csv: bool) -> Result<(Value, bool, Vec<(String, String)>)> {
    let rs = cfg.rs.as_ref().ok_or_else(|| CliError::Invariant {
        field: "rs".into(),
        message: "this command requires an \"rs\" section".into(),
    })?;
    let params = RsParams::new(rs.eta, rs.nu).map_err(|e| CliError::Invariant {
        field: "rs".into(),
        message: e.to_string(),
    })?;
    let state = match (&rs.qdot, &rs.p) {
        (Some(qdot), _) => RsState::from_velocities(rs.q.clone(), qdot.clone()),
        (_, Some(p)) => RsState::from_momenta(rs.q.clone(), p.clone()),
        _ => unreachable!("checked at parse time"),
    };
    let flow = FlowConfig {
        steps: rs.steps,
        samples: rs.samples,
        regime: Regime::Generic,
    };
    let trajectory =
        rs_model::integrate_flow(&params, &state, rs.t_end, &flow).map_err(runtime)?;
    let drift = trajectory.max_spectral_drift();
    let tol = cfg.tol_or(1e-7);
    let mut csv = Vec::new();
    if want_csv {
        csv.push(("trajectory.csv".to_string(), trajectory.to_csv()));
    }
    Ok((
        json!({
            "t_end": rs.t_end,
            "steps": rs.steps,
            "samples": trajectory.samples.len(),
            "tolerance": tol,
            "max_spectral_drift": drift,
        }),
        drift <= tol,
        csv,
    ))
}

fn cmd_limit_gaudin(cfg: &RunConfig) -> Result<(Value, bool)> {
    let gspec = cfg.gaudin()?;
    let occ = cfg.occupations(gspec.rank());
    let tol = cfg.tol_or(1e-7);
    let solver = cfg.solver();
    let solutions = limits::gaudin_sector_solutions(&gspec, &occ, &solver).map_err(runtime)?;
    let reports: Vec<_> = solutions
        .iter()
        .map(|roots| limits::verify_gaudin_duality(&gspec, roots, tol))
        .collect();
    let mut passed =
        !reports.is_empty() && reports.iter().all(|r| r.status == DualityStatus::Verified);
    // O(eps) convergence from the XXZ chain (meaningful only when some
    // string has length >= 2)
    let sizes = xxz_bethe::weight_vector(gspec.rank(), gspec.sites(), &occ);
    let mut eps_slope = None;
    if sizes.iter().any(|&m| m >= 2) && !solutions.is_empty() {
        let slope =
            limits::gaudin_epsilon_slope(&gspec, &solutions[0], &[1e-2, 1e-3], &solver)
                .map_err(runtime)?;
        passed &= (slope.slope - 1.0).abs() <= 0.15;
        eps_slope = Some(slope);
    }
    let p0 = vec![C::new(0.0, 0.0); gspec.sites()];
    let nonrel = limits::nonrel_limit_check(gspec.hbar(), gspec.q(), &p0, &[1e-2, 1e-3, 1e-4])
        .map_err(runtime)?;
    passed &= (nonrel.slope - 1.0).abs() <= 0.1;
    Ok((
        json!({
            "tolerance": tol,
            "solutions": reports.len(),
            "reports": reports,
            "epsilon_slope": eps_slope,
            "nonrel_slope": nonrel,
        }),
        passed,
    ))
}

fn cmd_limit_xx(cfg: &RunConfig) -> Result<(Value, bool)> {
    let spec = cfg.chain()?;
    if (spec.hbar() - limits::xx_hbar()).norm() > 1e-12 {
        return Err(CliError::Invariant {
            field: "chain.hbar".into(),
            message: "limit-xx requires hbar = i*pi/2".into(),
        });
    }
    let occ = cfg.occupations(spec.rank());
    let tol = cfg.tol_or(1e-9);
    let solutions = solutions_for(cfg, &spec, &occ)?;
    let centroid = spec.q().iter().sum::<C>() / spec.sites() as f64;
    let z_samples = [
        centroid + C::new(2.0, 0.6),
        centroid + C::new(-1.7, 1.1),
        centroid + C::new(0.9, -1.4),
    ];
    let mut reports = Vec::new();
    let mut max_gap: f64 = 0.0;
    for roots in &solutions {
        let quantities = limits::xx_quantities(&spec, roots, &z_samples).map_err(runtime)?;
        max_gap = max_gap.max(quantities.specialization_gap);
        reports.push(limits::xx_verify_duality(&spec, roots, cfg.eta(), tol));
    }
    let passed = !reports.is_empty()
        && reports.iter().all(|r| r.status == DualityStatus::Verified)
        && max_gap < 1e-12;
    Ok((
        json!({
            "tolerance": tol,
            "solutions": reports.len(),
            "max_specialization_gap": max_gap,
            "reports": reports,
        }),
        passed,
    ))
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

fn cmd_oracle_diag(cfg: &RunConfig) -> Result<(Value, bool)> {
    let spec = cfg.chain()?;
    let tol = cfg.tol_or(1e-7);
    let eta = cfg.eta();
    let commutativity = operator_oracle::commutativity_report(&spec).map_err(runtime)?;
    let mut passed = commutativity.transfer_transfer < 1e-8
        && commutativity.max_h_h < 1e-8
        && commutativity.max_h_weight < 1e-8;
    let hbar = spec.hbar();
    let mut sectors = Vec::new();
    for sizes in compositions(spec.sites(), spec.rank()) {
        let weights: Vec<i64> = sizes.iter().map(|&m| m as i64).collect();
        let spectrum = operator_oracle::sector_spectra(&spec, &weights).map_err(runtime)?;
        let mut predicted = Vec::new();
        for (a, &m) in sizes.iter().enumerate() {
            for alpha in 0..m {
                predicted
                    .push((hbar * (2.0 * alpha as f64 - (m as f64 - 1.0))).exp() * spec.twist()[a]);
            }
        }
        let expected_c: C = sizes
            .iter()
            .enumerate()
            .map(|(a, &m)| spec.twist()[a] * (hbar * m as f64).cosh())
            .sum();
        let expected_h_sum: C = sizes
            .iter()
            .enumerate()
            .map(|(a, &m)| spec.twist()[a] * (hbar * m as f64).sinh())
            .sum();
        let mut worst_match: f64 = 0.0;
        let mut worst_sum_rule: f64 = 0.0;
        for state in &spectrum.states {
            let qdot: Vec<C> = state.h_values.iter().map(|&h| eta * h / hbar.sinh()).collect();
            let params = RsParams::new(eta, hbar / eta).map_err(runtime)?;
            let lax = rs_model::lax_from_velocities(&params, spec.q(), &qdot).map_err(runtime)?;
            let computed = numerics::eigenvalues(&lax).map_err(runtime)?;
            worst_match = worst_match.max(numerics::multiset_match_distance(&predicted, &computed));
            let h_sum: C = state.h_values.iter().sum();
            worst_sum_rule = worst_sum_rule
                .max((state.constant_c - expected_c).norm())
                .max((h_sum - expected_h_sum).norm());
        }
        passed &= worst_match <= tol && worst_sum_rule <= 1e-9;
        sectors.push(json!({
            "weights": weights,
            "states": spectrum.states.len(),
            "max_string_match_distance": worst_match,
            "max_sum_rule_deviation": worst_sum_rule,
        }));
    }
    Ok((
        json!({
            "tolerance": tol,
            "commutativity": commutativity,
            "sectors": sectors,
        }),
        passed,
    ))
}

/// Execute the configured command (or every applicable command for
/// full-suite) and assemble the deterministic report.
pub fn run_suite(cfg: &RunConfig, want_csv: bool) -> Result<SuiteOutcome> {
    let mut results = serde_json::Map::new();
    let mut csv = Vec::new();
    let mut all_passed = true;
    let mut ran_any = false;
    let commands: Vec<Command> = match cfg.command {
        Command::FullSuite => {
            let mut list = vec![Command::CheckIdentity];
            if cfg.chain.is_some() {
                let is_xx = cfg
                    .chain
                    .as_ref()
                    .map(|c| (c.hbar - limits::xx_hbar()).norm() <= 1e-12)
                    .unwrap_or(false);
                if is_xx {
                    list.push(Command::LimitXx);
                } else {
                    list.extend([Command::VerifyDuality, Command::SolveBethe]);
                }
                list.push(Command::OracleDiag);
            }
            if cfg.rs.is_some() {
                list.push(Command::SimulateRs);
            }
            if cfg.gaudin.is_some() {
                list.push(Command::LimitGaudin);
            }
            list
        }
        single => vec![single],
    };
    for command in commands {
        let (name, outcome) = match command {
            Command::VerifyDuality => ("verify-duality", cmd_verify_duality(cfg)?),
            Command::SolveBethe => ("solve-bethe", cmd_solve_bethe(cfg)?),
            Command::CheckIdentity => ("check-identity", cmd_check_identity(cfg)?),
            Command::SimulateRs => {
                let (value, passed, mut artifacts) = cmd_simulate_rs(cfg, want_csv)?;
                csv.append(&mut artifacts);
                ("simulate-rs", (value, passed))
            }
            Command::LimitGaudin => ("limit-gaudin", cmd_limit_gaudin(cfg)?),
            Command::LimitXx => ("limit-xx", cmd_limit_xx(cfg)?),
            Command::OracleDiag => ("oracle-diag", cmd_oracle_diag(cfg)?),
            Command::FullSuite => unreachable!("expanded above"),
        };
        let (value, passed) = outcome;
        status_line(name, passed);
        all_passed &= passed;
        ran_any = true;
        results.insert(
            name.to_string(),
            json!({ "passed": passed, "result": value }),
        );
    }
    if !ran_any {
        return Err(CliError::Invariant {
            field: "command".into(),
            message: "full-suite found no applicable sections".into(),
        });
    }
    let report = json!({
        "artifact_version": ARTIFACT_VERSION,
        "config": cfg,
        "passed": all_passed,
        "results": Value::Object(results),
    });
    Ok(SuiteOutcome {
        passed: all_passed,
        report,
        csv,
    })
}

/// Write report.json (deterministic), meta.json (timestamps), and CSVs.
pub fn write_artifacts(outcome: &SuiteOutcome, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let write = |name: &str, contents: &str| -> Result<()> {
        let path = out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    let mut report = serde_json::to_string_pretty(&outcome.report).map_err(runtime)?;
    report.push('\n');
    write("report.json", &report)?;
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = format!("{{\n  \"unix_timestamp\": {stamp}\n}}\n");
    write("meta.json", &meta)?;
    for (name, contents) in &outcome.csv {
        write(name, contents)?;
    }
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let mut cfg = match parse_config(&cli.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.tol = Some(tol);
    }
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match run_suite(&cfg, cli.csv) {
        Ok(outcome) => {
            if let Err(e) = write_artifacts(&outcome, &out_dir) {
                eprintln!("error: {e}");
                return 2;
            }
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
