//! Experiment configuration, the subcommand runner and its CSV artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SinnError};
use crate::geometry::{Domain, TagRule};
use crate::inverse::basis_eval;
use crate::metrics::relative_error;
use crate::net::{Activation, NetworkBundle};
use crate::problem::{builtin_case, ManufacturedCase, Physics, ProblemSpec};
use crate::residual::LossBreakdown;
use crate::train::{march, solve, solve_inverse, solve_pinn, FieldErrors, InverseConfig, TrainConfig};
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verify,
    #[serde(alias = "sinn")]
    Solve,
    Pinn,
    Compare,
    March,
    Inverse,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::Solve => "solve",
            Mode::Pinn => "pinn",
            Mode::Compare => "compare",
            Mode::March => "march",
            Mode::Inverse => "inverse",
        }
    }
}

/// Replacements for parts of a builtin case.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseOverrides {
    pub time_interval: Option<(f64, f64)>,
    pub domain: Option<Domain>,
    pub tagging: Option<TagRule>,
}

/// Thresholds checked when gating is on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gate {
    /// L₂ relative error of `u` at the final time.
    pub u: f64,
    /// L₂ relative error of each gradient component at the final time.
    pub flux: f64,
    /// Largest allowed ratio of any march step's error to the first step's.
    pub growth: f64,
    /// Max pointwise relative error of the recovered conductivity.
    pub kappa: f64,
}

impl Default for Gate {
    fn default() -> Self {
        Gate {
            u: 1e-2,
            flux: 5e-2,
            growth: 10.0,
            kappa: 5e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub case: String,
    pub overrides: CaseOverrides,
    pub train: TrainConfig,
    pub inverse: InverseConfig,
    pub output: PathBuf,
    /// Seeds for repeated runs; `train.seed` alone when empty.
    pub seeds: Vec<u64>,
    /// Activation sweep for `solve`; `train.activation` alone when empty.
    pub activations: Vec<Activation>,
    /// Subintervals for `march`.
    pub steps: usize,
    /// Time samples of the PINN baseline.
    pub pinn_samples: usize,
    pub gate: Gate,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: None,
            case: "heat_fgm".into(),
            overrides: CaseOverrides::default(),
            train: TrainConfig::default(),
            inverse: InverseConfig::default(),
            output: PathBuf::from("out"),
            seeds: Vec::new(),
            activations: Vec::new(),
            steps: 1,
            pinn_samples: 5,
            gate: Gate::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| SinnError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SinnError::Config(e.to_string()))
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.problem()?.0.validate()?;
        if self.steps == 0 || self.pinn_samples == 0 {
            return Err(SinnError::Config("steps and pinn_samples must be positive".into()));
        }
        if !(0.0..=0.2).contains(&self.inverse.noise) || !(self.inverse.fraction > 0.0 && self.inverse.fraction <= 1.0) {
            return Err(SinnError::Config("inverse noise must lie in [0, 0.2], fraction in (0, 1]".into()));
        }
        Ok(())
    }

    /// The builtin case with overrides applied.
    pub fn problem(&self) -> Result<(ProblemSpec, ManufacturedCase)> {
        let (mut spec, case) = builtin_case(&self.case)?;
        if let Some(t) = self.overrides.time_interval {
            spec.time_interval = t;
        }
        if let Some(d) = &self.overrides.domain {
            spec.domain = d.clone();
        }
        if let Some(r) = &self.overrides.tagging {
            spec.tagging = r.clone();
        }
        Ok((spec, case))
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.train.seed]
        } else {
            self.seeds.clone()
        }
    }

    pub fn activations(&self) -> Vec<Activation> {
        if self.activations.is_empty() {
            vec![self.train.activation]
        } else {
            self.activations.clone()
        }
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub mode: Mode,
    pub output: PathBuf,
    pub artifacts: Vec<PathBuf>,
    /// Human-readable lines, one per result.
    pub summary: Vec<String>,
    /// Failed self-checks and optimizer aborts; always fatal.
    pub failures: Vec<String>,
    /// Tolerance violations; fatal only under `--gate`.
    pub violations: Vec<String>,
}

impl RunOutcome {
    pub fn succeeded(&self, gate: bool) -> bool {
        self.failures.is_empty() && (!gate || self.violations.is_empty())
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    fn checkpoint(&mut self, name: &str, bundle: &NetworkBundle) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        bundle.write_checkpoint(&mut w)?;
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    fn loss_terms(&mut self, name: &str, terms: &[LossBreakdown]) -> Result<()> {
        let Some(first) = terms.first() else {
            return Ok(());
        };
        let p = first.pde.len();
        let mut header = vec!["epoch".to_string()];
        for prefix in ["pde", "dbc", "nbc"] {
            header.extend((1..=p).map(|j| format!("{prefix}_{j}")));
        }
        header.extend(["initial".into(), "total".into()]);
        let rows: Vec<Vec<String>> = terms
            .iter()
            .enumerate()
            .map(|(e, b)| {
                let mut r = vec![e.to_string()];
                r.extend(b.pde.iter().chain(&b.dirichlet).chain(&b.neumann).map(|v| fmt_f64(*v)));
                r.extend([fmt_f64(b.initial), fmt_f64(b.total)]);
                r
            })
            .collect();
        self.csv(name, &header, &rows)
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn error_cells(e: &FieldErrors) -> Vec<String> {
    vec![fmt_f64(e.u), fmt_f64(e.grad[0]), fmt_f64(e.grad[1]), fmt_f64(e.grad[2])]
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn gate_errors(gate: &Gate, label: &str, e: &FieldErrors, violations: &mut Vec<String>) {
    if !(e.u <= gate.u) {
        violations.push(format!("{label}: u error {:.3e} > {:.3e}", e.u, gate.u));
    }
    for (i, g) in e.grad.iter().enumerate() {
        if !(*g <= gate.flux) {
            violations.push(format!("{label}: flux {i} error {g:.3e} > {:.3e}", gate.flux));
        }
    }
}

/// Runs `mode` (or the configured mode) and writes everything under
/// `config.output`. Gate checks are always evaluated; the caller decides
/// whether violations are fatal.
pub fn run(config: &RunConfig, mode: Option<Mode>) -> Result<RunOutcome> {
    config.validate()?;
    let mode = mode
        .or(config.mode)
        .ok_or_else(|| SinnError::Config("no mode given".into()))?;
    fs::create_dir_all(&config.output)?;
    let mut art = Artifacts {
        dir: config.output.clone(),
        written: Vec::new(),
    };
    let mut summary = Vec::new();
    let mut violations = Vec::new();
    let mut failures = Vec::new();
    let (spec, case) = config.problem()?;
    let mut train = config.train.clone();
    train.record_terms = true;

    match mode {
        Mode::Verify => {
            let checks = verify::run_all(train.seed)?;
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| {
                    vec![
                        c.suite.to_string(),
                        c.name.clone(),
                        fmt_f64(c.value),
                        fmt_f64(c.tolerance),
                        c.passed().to_string(),
                    ]
                })
                .collect();
            art.csv("verify.csv", &strings(&["suite", "check", "value", "tolerance", "passed"]), &rows)?;
            for c in &checks {
                let status = if c.passed() { "PASS" } else { "FAIL" };
                summary.push(format!("{status} {}/{}: {:.3e} (tol {:.1e})", c.suite, c.name, c.value, c.tolerance));
                if !c.passed() {
                    failures.push(format!("{}/{} failed", c.suite, c.name));
                }
            }
        }
        Mode::Solve | Mode::Pinn => {
            let mut rows = Vec::new();
            let mut node_rows = Vec::new();
            for act in config.activations() {
                for seed in config.seeds() {
                    let cfg = TrainConfig {
                        seed,
                        activation: act,
                        ..train.clone()
                    };
                    let (bundle, report) = if mode == Mode::Solve {
                        solve(&spec, &cfg, Some(&case))?
                    } else {
                        solve_pinn(&spec, &cfg, config.pinn_samples, Some(&case))?
                    };
                    let tag = format!("{}_{seed}", act.name());
                    art.loss_terms(&format!("loss_{tag}.csv"), &report.terms)?;
                    art.checkpoint(&format!("bundle_{tag}.ckpt"), &bundle)?;
                    for e in &report.node_errors {
                        let mut r = vec![act.name().to_string(), seed.to_string(), fmt_f64(e.time)];
                        r.extend(error_cells(e));
                        node_rows.push(r);
                    }
                    let end = report.end_errors.ok_or_else(|| SinnError::MissingData("final-time errors".into()))?;
                    let mut r = vec![act.name().to_string(), seed.to_string()];
                    r.extend(error_cells(&end));
                    r.extend([fmt_f64(report.final_loss.total), fmt_f64(report.wall_clock)]);
                    rows.push(r);
                    summary.push(format!(
                        "{} seed {seed}: u {:.3e}, u_x {:.3e}, u_y {:.3e}, u_z {:.3e}, {:.1} s",
                        act.name(),
                        end.u,
                        end.grad[0],
                        end.grad[1],
                        end.grad[2],
                        report.wall_clock
                    ));
                    gate_errors(&config.gate, &tag, &end, &mut violations);
                    if let Some(why) = report.aborted {
                        failures.push(format!("{tag}: optimizer aborted: {why}"));
                    }
                }
            }
            art.csv(
                "errors.csv",
                &strings(&["activation", "seed", "u", "u_x", "u_y", "u_z", "loss", "wall_clock"]),
                &rows,
            )?;
            art.csv(
                "node_errors.csv",
                &strings(&["activation", "seed", "time", "u", "u_x", "u_y", "u_z"]),
                &node_rows,
            )?;
        }
        Mode::Compare => {
            let mut rows = Vec::new();
            let (mut sinn_u, mut pinn_u) = (Vec::new(), Vec::new());
            for seed in config.seeds() {
                let cfg = TrainConfig { seed, ..train.clone() };
                let (_, s) = solve(&spec, &cfg, Some(&case))?;
                let (_, p) = solve_pinn(&spec, &cfg, config.pinn_samples, Some(&case))?;
                let (se, pe) = match (s.end_errors, p.end_errors) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(SinnError::MissingData("final-time errors".into())),
                };
                art.loss_terms(&format!("loss_sinn_{seed}.csv"), &s.terms)?;
                art.loss_terms(&format!("loss_pinn_{seed}.csv"), &p.terms)?;
                let mut r = vec![seed.to_string()];
                r.extend(error_cells(&se));
                r.push(fmt_f64(s.wall_clock));
                r.extend(error_cells(&pe));
                r.push(fmt_f64(p.wall_clock));
                rows.push(r);
                summary.push(format!(
                    "seed {seed}: SINN u {:.3e} in {:.1} s, PINN u {:.3e} in {:.1} s",
                    se.u, s.wall_clock, pe.u, p.wall_clock
                ));
                for (who, r) in [("SINN", &s), ("PINN", &p)] {
                    if let Some(why) = &r.aborted {
                        failures.push(format!("{who} seed {seed}: optimizer aborted: {why}"));
                    }
                }
                sinn_u.push(se.u);
                pinn_u.push(pe.u);
            }
            let (ms, mp) = (median(sinn_u), median(pinn_u));
            summary.push(format!("median u error: SINN {ms:.3e}, PINN {mp:.3e}"));
            if !(ms < mp) {
                violations.push(format!("SINN median error {ms:.3e} not below PINN {mp:.3e}"));
            }
            art.csv(
                "compare.csv",
                &strings(&[
                    "seed", "sinn_u", "sinn_u_x", "sinn_u_y", "sinn_u_z", "sinn_wall_clock", "pinn_u", "pinn_u_x",
                    "pinn_u_y", "pinn_u_z", "pinn_wall_clock",
                ]),
                &rows,
            )?;
        }
        Mode::March => {
            let m = march(&spec, &train, config.steps, Some(&case))?;
            let mut rows = Vec::new();
            for (i, (r, b)) in m.steps.iter().zip(&m.bundles).enumerate() {
                art.checkpoint(&format!("bundle_step{:03}.ckpt", i + 1), b)?;
                art.loss_terms(&format!("loss_step{:03}.csv", i + 1), &r.terms)?;
                let e = r.end_errors.ok_or_else(|| SinnError::MissingData("step errors".into()))?;
                let mut row = vec![(i + 1).to_string(), fmt_f64(r.t_start), fmt_f64(r.t_end)];
                row.extend(error_cells(&e));
                row.extend([fmt_f64(r.final_loss.total), fmt_f64(r.wall_clock)]);
                rows.push(row);
                summary.push(format!("step {} (t = {:.3}): u {:.3e}", i + 1, r.t_end, e.u));
            }
            art.csv(
                "march.csv",
                &strings(&["step", "t_start", "t_end", "u", "u_x", "u_y", "u_z", "loss", "wall_clock"]),
                &rows,
            )?;
            let errs: Vec<f64> = m.steps.iter().filter_map(|r| r.end_errors.map(|e| e.u)).collect();
            if let Some(&first) = errs.first() {
                let worst = errs.iter().copied().fold(0.0, f64::max);
                summary.push(format!("worst step error / first step error = {:.2}", worst / first));
                if !(worst <= config.gate.growth * first) {
                    violations.push(format!("error grew by {:.2}x", worst / first));
                }
            }
            if let Some(why) = m.aborted {
                failures.push(format!("march stopped early: {why}"));
            }
        }
        Mode::Inverse => {
            let out = solve_inverse(&spec, &train, &config.inverse, Some(&case))?;
            art.checkpoint("bundle.ckpt", &out.bundle)?;
            art.loss_terms("loss.csv", &out.report.terms)?;
            let Physics::Heat { kappa, rhoc } = &spec.physics else {
                return Err(SinnError::InvalidArgument("inverse mode supports heat problems only".into()));
            };
            let mut rows = Vec::new();
            for &x in &out.grid {
                let (d, _) = basis_eval(&out.basis, &out.params.alpha, x)?;
                let (k, r) = (kappa.eval(x, 0.0).value, rhoc.eval(x, 0.0).value);
                let (kh, rh) = (out.params.lambda1 * d, out.params.lambda2 * d);
                rows.push(vec![
                    fmt_f64(x[0]),
                    fmt_f64(x[1]),
                    fmt_f64(x[2]),
                    fmt_f64(kh),
                    fmt_f64(k),
                    fmt_f64(relative_error(k, kh).value),
                    fmt_f64(rh),
                    fmt_f64(r),
                    fmt_f64(relative_error(r, rh).value),
                ]);
            }
            art.csv(
                "recovered.csv",
                &strings(&["x", "y", "z", "kappa_hat", "kappa", "kappa_rel_err", "rhoc_hat", "rhoc", "rhoc_rel_err"]),
                &rows,
            )?;
            let mut prow: Vec<Vec<String>> = out
                .basis
                .terms()
                .iter()
                .zip(&out.params.alpha)
                .map(|(e, a)| vec![format!("alpha_{}_{}_{}", e[0], e[1], e[2]), fmt_f64(*a)])
                .collect();
            prow.push(vec!["lambda1".into(), fmt_f64(out.params.lambda1)]);
            prow.push(vec!["lambda2".into(), fmt_f64(out.params.lambda2)]);
            prow.push(vec!["kappa_max_rel_error".into(), fmt_f64(out.kappa_error)]);
            prow.push(vec!["rhoc_max_rel_error".into(), fmt_f64(out.rhoc_error)]);
            art.csv("params.csv", &strings(&["name", "value"]), &prow)?;
            summary.push(format!(
                "kappa max relative error {:.3e}, rhoc {:.3e}, lambda1 {:.4}, lambda2 {:.4}",
                out.kappa_error, out.rhoc_error, out.params.lambda1, out.params.lambda2
            ));
            if let Some(why) = &out.report.aborted {
                failures.push(format!("optimizer aborted: {why}"));
            }
            if !(out.kappa_error <= config.gate.kappa) {
                violations.push(format!("kappa error {:.3e} > {:.3e}", out.kappa_error, config.gate.kappa));
            }
        }
    }

    write_manifest(config, mode, &mut art)?;
    Ok(RunOutcome {
        mode,
        output: config.output.clone(),
        artifacts: art.written,
        summary,
        failures,
        violations,
    })
}

fn write_manifest(config: &RunConfig, mode: Mode, art: &mut Artifacts) -> Result<()> {
    let resolved = RunConfig {
        mode: Some(mode),
        ..config.clone()
    };
    let cfg_path = art.dir.join("config.toml");
    fs::write(&cfg_path, resolved.to_toml()?)?;
    art.written.push(cfg_path);
    let seeds: Vec<String> = config.seeds().iter().map(u64::to_string).collect();
    let lines = [
        ("mode", mode.name().to_string()),
        ("case", config.case.clone()),
        ("config_sha256", resolved.hash()?),
        ("config_file", "config.toml".into()),
        ("seeds", seeds.join(",")),
        ("test_seed", config.train.test_seed.to_string()),
        ("reproducible", config.train.reproducible.to_string()),
        ("version", env!("CARGO_PKG_VERSION").to_string()),
        (
            "artifacts",
            art.written
                .iter()
                .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                .collect::<Vec<_>>()
                .join(","),
        ),
    ];
    let path = art.dir.join("manifest.txt");
    let mut f = BufWriter::new(File::create(&path)?);
    for (k, v) in lines {
        writeln!(f, "{k}={v}")?;
    }
    f.flush()?;
    art.written.push(path);
    Ok(())
}
