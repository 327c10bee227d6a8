//! Training drivers built on the losses in `residual`.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::optim::{optimize, optimize_scaled, LbfgsConfig, Objective, OptimResult, Optimizer};
use super::state::{advance_state, CarriedState, NodalField};
use crate::error::{invalid, Result};
use crate::geometry::{sample_interior, Domain, PointSet, SamplingStrategy};
use crate::inverse::{basis_enumerate, material_fields, select_overspecified, InverseParams, PolyBasis};
use crate::metrics::l2_relative_error;
use crate::net::{Activation, BatchJets, Jet2, JetLayout, NetworkBundle, Normalization};
use crate::problem::{ManufacturedCase, Physics, ProblemSpec};
use crate::quadrature::{map_nodes, SpectralOperator};
use crate::residual::{pinn_time_samples, reconstruct, LossBreakdown, PinnLoss, ResidualOptions, SinnLoss};

/// Reference magnitude of the network outputs of a subinterval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputScale {
    /// RMS of the boundary data of the integrand.
    #[default]
    Data,
    /// RMS of the carried `u` at the interior points over `dt^order`, so
    /// that a unit output changes `u` by its own magnitude across the
    /// subinterval. Falls back to `Data` when the carried field vanishes.
    State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub iterations: usize,
    pub optimizer: Optimizer,
    /// L-BFGS iterations run after the main optimizer; 0 disables.
    pub refine_iterations: usize,
    pub refine: LbfgsConfig,
    pub seed: u64,
    /// Gauss nodes per subinterval; the case default when absent.
    pub nodes: Option<usize>,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub interior_points: usize,
    pub boundary_points: usize,
    pub sampling: SamplingStrategy,
    /// Evaluate sub-networks serially. Results are bit-identical either way;
    /// the flag only pins the execution order.
    pub reproducible: bool,
    /// Start each subinterval from the previous bundle instead of a fresh
    /// initialization.
    pub warm_start: bool,
    /// See `ResidualOptions::nondimensionalize`.
    pub nondimensionalize: bool,
    /// Center and scale the inputs and scale the outputs per `output_scale`.
    pub normalize: bool,
    pub output_scale: OutputScale,
    pub test_interior: usize,
    pub test_boundary: usize,
    pub test_seed: u64,
    /// Keep the per-iteration loss breakdown.
    pub record_terms: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 1000,
            optimizer: Optimizer::default(),
            refine_iterations: 0,
            refine: LbfgsConfig::default(),
            seed: 0,
            nodes: None,
            hidden: vec![15, 15],
            activation: Activation::Swish,
            interior_points: 1000,
            boundary_points: 1092,
            sampling: SamplingStrategy::Halton,
            reproducible: true,
            warm_start: false,
            nondimensionalize: true,
            normalize: true,
            output_scale: OutputScale::Data,
            test_interior: 2000,
            test_boundary: 2000,
            test_seed: 7919,
            record_terms: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("iterations must be at least 1"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(invalid("hidden layers must be non-empty with positive widths"));
        }
        if self.interior_points == 0 {
            return Err(invalid("interior point count must be positive"));
        }
        if self.test_interior + self.test_boundary == 0 {
            return Err(invalid("test point counts must not both be zero"));
        }
        if matches!(self.nodes, Some(0)) {
            return Err(invalid("node count must be positive"));
        }
        if let Optimizer::Adam(a) = &self.optimizer {
            if !(a.lr > 0.0) {
                return Err(invalid("learning rate must be positive"));
            }
        }
        Ok(())
    }

    fn residual_options(&self) -> ResidualOptions {
        ResidualOptions {
            nondimensionalize: self.nondimensionalize,
        }
    }

    fn sizes(&self, inputs: usize) -> Vec<usize> {
        let mut s = vec![inputs];
        s.extend(&self.hidden);
        s.push(1);
        s
    }
}

/// L₂ relative errors of `u` and its gradient components at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldErrors {
    pub time: f64,
    pub u: f64,
    pub grad: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    pub t_start: f64,
    pub t_end: f64,
    pub loss_history: Vec<f64>,
    pub best_history: Vec<f64>,
    /// Per-iteration loss terms when `record_terms` is set.
    pub terms: Vec<LossBreakdown>,
    /// Breakdown at the returned parameters.
    pub final_loss: LossBreakdown,
    pub wall_clock: f64,
    /// Errors at the node times (PINN: at the time samples).
    pub node_errors: Vec<FieldErrors>,
    pub end_errors: Option<FieldErrors>,
    pub aborted: Option<String>,
}

/// Fresh test points, independent of the training points.
pub fn test_points(spec: &ProblemSpec, cfg: &TrainConfig) -> Result<Vec<[f64; 3]>> {
    let set = PointSet::generate(
        &spec.domain,
        cfg.test_interior,
        cfg.test_boundary,
        SamplingStrategy::Halton,
        &crate::geometry::TagRule::all(crate::geometry::Tag::Dirichlet),
        cfg.test_seed,
    )?;
    Ok(set.interior.into_iter().chain(set.boundary.into_iter().map(|b| b.point)).collect())
}

/// Errors of `jets` against the exact `u(·, t)` at `points`.
pub fn field_errors(case: &ManufacturedCase, points: &[[f64; 3]], t: f64, jets: &[Jet2]) -> Result<FieldErrors> {
    let exact: Vec<Jet2> = points.iter().map(|&x| case.u(x, t)).collect();
    let channel = |f: &dyn Fn(&Jet2) -> f64| -> Result<f64> {
        let e: Vec<f64> = exact.iter().map(f).collect();
        let n: Vec<f64> = jets.iter().map(f).collect();
        Ok(l2_relative_error(&e, &n)?.value)
    };
    Ok(FieldErrors {
        time: t,
        u: channel(&|j| j.value)?,
        grad: [
            channel(&|j| j.gradient[0])?,
            channel(&|j| j.gradient[1])?,
            channel(&|j| j.gradient[2])?,
        ],
    })
}

fn spatial_normalization(domain: &Domain, output: f64) -> Normalization {
    let (lo, hi) = domain.bounds();
    let extent = (0..3).map(|i| hi[i] - lo[i]).fold(0.0, f64::max);
    Normalization {
        shift: (0..3).map(|i| 0.5 * (lo[i] + hi[i])).collect(),
        scale: vec![2.0 / extent; 3],
        output,
    }
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

fn mix_seed(seed: u64, step: usize) -> u64 {
    seed ^ (step as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Main optimizer run followed by the optional L-BFGS refinement.
fn run_optimizer(
    obj: &mut dyn Objective,
    init: &[f64],
    cfg: &TrainConfig,
    lr_scale: Option<&[f64]>,
) -> Result<OptimResult> {
    let mut r = optimize_scaled(obj, init, &cfg.optimizer, cfg.iterations, lr_scale)?;
    if cfg.refine_iterations > 0 && r.aborted.is_none() {
        let best = r.best_loss;
        let s = optimize(obj, &r.params, &Optimizer::Lbfgs(cfg.refine), cfg.refine_iterations)?;
        r.history.extend(&s.history);
        r.best_history.extend(s.best_history.iter().map(|b| b.min(best)));
        if s.best_loss < best {
            r.params = s.params;
            r.best_loss = s.best_loss;
        }
        r.aborted = s.aborted;
    }
    Ok(r)
}

struct BundleObjective<'a, F> {
    bundle: NetworkBundle,
    inputs: &'a ndarray::Array2<f64>,
    loss: F,
    last: Option<LossBreakdown>,
    terms: Vec<LossBreakdown>,
    record: bool,
}

impl<F> Objective for BundleObjective<'_, F>
where
    F: Fn(&[BatchJets]) -> Result<(LossBreakdown, Vec<BatchJets>)>,
{
    fn eval(&mut self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.bundle.params_load(params)?;
        let mut last = None;
        let out = self.bundle.loss_gradient(self.inputs, |jets| {
            let (b, adj) = (self.loss)(jets)?;
            let total = b.total;
            last = Some(b);
            Ok((total, adj))
        })?;
        self.last = last;
        Ok(out)
    }

    fn accept(&mut self, _iteration: usize) {
        if self.record {
            if let Some(b) = &self.last {
                self.terms.push(b.clone());
            }
        }
    }
}

fn breakdown_at<F>(bundle: &NetworkBundle, inputs: &ndarray::Array2<f64>, loss: F) -> Result<LossBreakdown>
where
    F: Fn(&[BatchJets]) -> Result<(LossBreakdown, Vec<BatchJets>)>,
{
    Ok(loss(&bundle.eval(inputs))?.0)
}

/// Trains one subinterval `[state.t_start(), + dt]`. `warm` seeds the
/// parameters when given; errors are measured against `case` when given.
pub fn solve_subinterval(
    spec: &ProblemSpec,
    state: &CarriedState,
    cfg: &TrainConfig,
    dt: f64,
    step: usize,
    case: Option<&ManufacturedCase>,
    warm: Option<&NetworkBundle>,
) -> Result<(NetworkBundle, TrainReport)> {
    cfg.validate()?;
    if !(dt > 0.0) {
        return Err(invalid("subinterval width must be positive"));
    }
    let (t0, t1) = spec.time_interval;
    let t_start = state.t_start();
    if t_start < t0 - 1e-12 || t_start + dt > t1 + 1e-9 * (t1 - t0).abs().max(1.0) {
        return Err(invalid(format!(
            "subinterval [{t_start}, {}] leaves the time interval [{t0}, {t1}]",
            t_start + dt
        )));
    }
    let started = Instant::now();
    let p = cfg.nodes.unwrap_or(spec.default_nodes);
    let op = SpectralOperator::new(p)?;
    let points = PointSet::generate(
        &spec.domain,
        cfg.interior_points,
        cfg.boundary_points,
        cfg.sampling,
        &spec.tagging,
        cfg.seed,
    )?;
    let loss = SinnLoss::new(spec, state, &op, dt, &points, cfg.residual_options())?;
    let output = match cfg.output_scale {
        OutputScale::Data => loss.data_scale(),
        OutputScale::State => {
            let prev = state.prev_at(&points.interior);
            let u: Vec<f64> = prev.iter().map(|j| j.u.value).collect();
            let s = rms(&u) / dt.powi(spec.physics.order() as i32);
            if s > 0.0 && s.is_finite() {
                s
            } else {
                loss.data_scale()
            }
        }
    };
    let mut bundle = match warm {
        Some(b) if cfg.warm_start && b.len() == p => {
            let mut b = b.clone();
            if cfg.normalize {
                b.set_output_scale(output)?;
            }
            b
        }
        _ => {
            let norm = if cfg.normalize {
                spatial_normalization(&spec.domain, output)
            } else {
                Normalization::identity(3)
            };
            NetworkBundle::init(p, &cfg.sizes(3), cfg.activation, JetLayout::spatial(), norm, mix_seed(cfg.seed, step))?
        }
    };
    bundle.set_parallel(!cfg.reproducible);
    let init = bundle.params_flatten();
    let eval = |jets: &[BatchJets]| loss.evaluate(jets);
    let mut obj = BundleObjective {
        bundle: bundle.clone(),
        inputs: loss.inputs(),
        loss: eval,
        last: None,
        terms: Vec::new(),
        record: cfg.record_terms,
    };
    let result = run_optimizer(&mut obj, &init, cfg, None)?;
    bundle.params_load(&result.params)?;
    let final_loss = breakdown_at(&bundle, loss.inputs(), eval)?;
    let wall_clock = started.elapsed().as_secs_f64();

    let mut report = TrainReport {
        t_start,
        t_end: t_start + dt,
        loss_history: result.history,
        best_history: result.best_history,
        terms: obj.terms,
        final_loss,
        wall_clock,
        aborted: result.aborted,
        ..TrainReport::default()
    };
    if let Some(case) = case {
        let test = test_points(spec, cfg)?;
        let prev = state.prev_at(&test);
        let nodal = bundle.nodal_jets(&test);
        let times = map_nodes(op.rule(), t_start, t_start + dt)?;
        let mut per_node = vec![Vec::with_capacity(test.len()); p];
        for i in 0..test.len() {
            let u_i: Vec<Jet2> = nodal.iter().map(|k| k[i]).collect();
            for (j, u) in reconstruct(spec.kind(), &op, &prev[i], &u_i, dt).into_iter().enumerate() {
                per_node[j].push(u);
            }
        }
        report.node_errors = per_node
            .iter()
            .zip(&times)
            .map(|(jets, &t)| field_errors(case, &test, t, jets))
            .collect::<Result<_>>()?;
        let next = advance_state(state, Arc::new(bundle.clone()), &op, dt);
        let end: Vec<Jet2> = next.prev_at(&test).into_iter().map(|pj| pj.u).collect();
        report.end_errors = Some(field_errors(case, &test, t_start + dt, &end)?);
    }
    Ok((bundle, report))
}

/// A single subinterval spanning the whole time interval.
pub fn solve(spec: &ProblemSpec, cfg: &TrainConfig, case: Option<&ManufacturedCase>) -> Result<(NetworkBundle, TrainReport)> {
    let state = CarriedState::new(spec);
    let dt = spec.time_interval.1 - spec.time_interval.0;
    solve_subinterval(spec, &state, cfg, dt, 0, case, None)
}

#[derive(Clone, Default)]
pub struct MarchReport {
    pub steps: Vec<TrainReport>,
    pub bundles: Vec<NetworkBundle>,
    /// Set when an optimizer abort stopped the march early.
    pub aborted: Option<String>,
}

/// Solves `steps` equal subintervals in sequence, carrying the solution.
pub fn march(spec: &ProblemSpec, cfg: &TrainConfig, steps: usize, case: Option<&ManufacturedCase>) -> Result<MarchReport> {
    if steps == 0 {
        return Err(invalid("march needs at least one step"));
    }
    let dt = (spec.time_interval.1 - spec.time_interval.0) / steps as f64;
    let p = cfg.nodes.unwrap_or(spec.default_nodes);
    let op = SpectralOperator::new(p)?;
    let mut state = CarriedState::new(spec);
    let mut out = MarchReport::default();
    for step in 0..steps {
        let (bundle, report) = solve_subinterval(spec, &state, cfg, dt, step, case, out.bundles.last())?;
        let aborted = report.aborted.clone();
        state = advance_state(&state, Arc::new(bundle.clone()), &op, dt);
        out.steps.push(report);
        out.bundles.push(bundle);
        if let Some(why) = aborted {
            out.aborted = Some(format!("step {step}: {why}"));
            break;
        }
    }
    Ok(out)
}

/// Space-time PINN on the whole interval with `samples` evenly spaced times.
pub fn solve_pinn(
    spec: &ProblemSpec,
    cfg: &TrainConfig,
    samples: usize,
    case: Option<&ManufacturedCase>,
) -> Result<(NetworkBundle, TrainReport)> {
    cfg.validate()?;
    if samples == 0 {
        return Err(invalid("PINN needs at least one time sample"));
    }
    let started = Instant::now();
    let (t0, t1) = spec.time_interval;
    let times = pinn_time_samples(t0, t1, samples);
    let points = PointSet::generate(
        &spec.domain,
        cfg.interior_points,
        cfg.boundary_points,
        cfg.sampling,
        &spec.tagging,
        cfg.seed,
    )?;
    let loss = PinnLoss::new(spec, &points, &times, cfg.residual_options())?;
    let norm = if cfg.normalize {
        let s = spatial_normalization(&spec.domain, loss.data_scale());
        Normalization {
            shift: [s.shift, vec![0.5 * (t0 + t1)]].concat(),
            scale: [s.scale, vec![2.0 / (t1 - t0)]].concat(),
            output: s.output,
        }
    } else {
        Normalization::identity(4)
    };
    let mut bundle = NetworkBundle::init(1, &cfg.sizes(4), cfg.activation, JetLayout::space_time(), norm, mix_seed(cfg.seed, 0))?;
    bundle.set_parallel(!cfg.reproducible);
    let init = bundle.params_flatten();
    let eval = |jets: &[BatchJets]| loss.evaluate(jets);
    let mut obj = BundleObjective {
        bundle: bundle.clone(),
        inputs: loss.inputs(),
        loss: eval,
        last: None,
        terms: Vec::new(),
        record: cfg.record_terms,
    };
    let result = run_optimizer(&mut obj, &init, cfg, None)?;
    bundle.params_load(&result.params)?;
    let final_loss = breakdown_at(&bundle, loss.inputs(), eval)?;
    let wall_clock = started.elapsed().as_secs_f64();
    let mut report = TrainReport {
        t_start: t0,
        t_end: t1,
        loss_history: result.history,
        best_history: result.best_history,
        terms: obj.terms,
        final_loss,
        wall_clock,
        aborted: result.aborted,
        ..TrainReport::default()
    };
    if let Some(case) = case {
        let test = test_points(spec, cfg)?;
        report.node_errors = times
            .iter()
            .map(|&t| field_errors(case, &test, t, &pinn_jets(&bundle, &test, t)))
            .collect::<Result<_>>()?;
        report.end_errors = report.node_errors.last().copied();
    }
    Ok((bundle, report))
}

/// Spatial jets of a space-time network at time `t`.
pub fn pinn_jets(bundle: &NetworkBundle, points: &[[f64; 3]], t: f64) -> Vec<Jet2> {
    if points.is_empty() {
        return Vec::new();
    }
    let inputs = ndarray::Array2::from_shape_fn((4, points.len()), |(i, c)| if i < 3 { points[c][i] } else { t });
    let j = &bundle.eval(&inputs)[0];
    (0..points.len())
        .map(|c| Jet2 {
            value: j.value()[c],
            gradient: [j.grad(0)[c], j.grad(1)[c], j.grad(2)[c]],
            laplacian: j.second(0)[c],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InverseConfig {
    /// Total degree of the polynomial basis.
    pub order: usize,
    /// Fraction of boundary points with flux measurements.
    pub fraction: f64,
    /// Multiplicative noise level on the flux measurements.
    pub noise: f64,
    pub seed: u64,
    /// Adam learning-rate multiplier for the material parameters.
    pub lr_multiplier: f64,
    /// Held-out evaluation grid size (points per axis of the bounding box).
    pub grid: usize,
}

impl Default for InverseConfig {
    fn default() -> Self {
        InverseConfig {
            order: 3,
            fraction: 0.2,
            noise: 0.0,
            seed: 0,
            lr_multiplier: 10.0,
            grid: 10,
        }
    }
}

pub struct InverseOutcome {
    pub bundle: NetworkBundle,
    pub params: InverseParams,
    pub basis: PolyBasis,
    pub report: TrainReport,
    /// Max pointwise relative error of κ̂ and ρ̂c on the held-out grid.
    pub kappa_error: f64,
    pub rhoc_error: f64,
    pub grid: Vec<[f64; 3]>,
}

struct InverseObjective<'a> {
    bundle: NetworkBundle,
    params: InverseParams,
    loss: &'a SinnLoss,
    last: Option<LossBreakdown>,
    terms: Vec<LossBreakdown>,
    record: bool,
}

impl Objective for InverseObjective<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.bundle.num_params();
        self.bundle.params_load(&x[..n])?;
        self.params.load(&x[n..])?;
        let mut extra = Vec::new();
        let mut last = None;
        let (value, mut grad) = self.bundle.loss_gradient(self.loss.inputs(), |jets| {
            let (b, adj, pg) = self.loss.evaluate_inverse(jets, &self.params)?;
            let total = b.total;
            extra = pg;
            last = Some(b);
            Ok((total, adj))
        })?;
        self.last = last;
        grad.extend(extra);
        Ok((value, grad))
    }

    fn accept(&mut self, _iteration: usize) {
        if self.record {
            if let Some(b) = &self.last {
                self.terms.push(b.clone());
            }
        }
    }
}

/// Joint training of the networks and the material parameters over the
/// whole interval.
pub fn solve_inverse(
    spec: &ProblemSpec,
    cfg: &TrainConfig,
    inv: &InverseConfig,
    case: Option<&ManufacturedCase>,
) -> Result<InverseOutcome> {
    cfg.validate()?;
    let Physics::Heat { kappa, rhoc } = &spec.physics else {
        return Err(invalid("inverse mode supports heat problems only"));
    };
    if inv.grid == 0 || !(inv.lr_multiplier > 0.0) {
        return Err(invalid("inverse grid size and learning-rate multiplier must be positive"));
    }
    let started = Instant::now();
    let basis = basis_enumerate(inv.order)?;
    let p = cfg.nodes.unwrap_or(spec.default_nodes);
    let op = SpectralOperator::new(p)?;
    let state = CarriedState::new(spec);
    let (t0, t1) = spec.time_interval;
    let dt = t1 - t0;
    let points = PointSet::generate(
        &spec.domain,
        cfg.interior_points,
        cfg.boundary_points,
        cfg.sampling,
        &spec.tagging,
        cfg.seed,
    )?;
    let over = select_overspecified(&points.boundary, inv.fraction, inv.seed)?;
    let loss = SinnLoss::inverse(
        spec,
        &state,
        &op,
        dt,
        &points,
        &over,
        inv.noise,
        inv.seed.wrapping_add(1),
        &basis,
        cfg.residual_options(),
    )?;
    let norm = if cfg.normalize {
        spatial_normalization(&spec.domain, loss.data_scale())
    } else {
        Normalization::identity(3)
    };
    let mut bundle = NetworkBundle::init(p, &cfg.sizes(3), cfg.activation, JetLayout::spatial(), norm, mix_seed(cfg.seed, 0))?;
    bundle.set_parallel(!cfg.reproducible);
    let mut params = InverseParams::initial(&basis);
    let n = bundle.num_params();
    let init = [bundle.params_flatten(), params.flatten()].concat();
    let lr_scale: Vec<f64> = (0..init.len())
        .map(|i| if i < n { 1.0 } else { inv.lr_multiplier })
        .collect();
    let mut obj = InverseObjective {
        bundle: bundle.clone(),
        params: params.clone(),
        loss: &loss,
        last: None,
        terms: Vec::new(),
        record: cfg.record_terms,
    };
    let result = run_optimizer(&mut obj, &init, cfg, Some(&lr_scale))?;
    bundle.params_load(&result.params[..n])?;
    params.load(&result.params[n..])?;
    let final_loss = loss.evaluate_inverse(&bundle.eval(loss.inputs()), &params)?.0;

    let grid = sample_interior(&spec.domain, inv.grid.pow(3), SamplingStrategy::Grid, inv.seed)?;
    let (mut kappa_error, mut rhoc_error) = (0.0f64, 0.0f64);
    for &x in &grid {
        let (k_hat, r_hat) = material_fields(&params, &basis, x)?;
        let k = kappa.eval(x, 0.0).value;
        let r = rhoc.eval(x, 0.0).value;
        kappa_error = kappa_error.max(((k_hat.value - k) / k).abs());
        rhoc_error = rhoc_error.max(((r_hat.value - r) / r).abs());
    }
    let mut report = TrainReport {
        t_start: t0,
        t_end: t1,
        loss_history: result.history,
        best_history: result.best_history,
        terms: obj.terms,
        final_loss,
        wall_clock: started.elapsed().as_secs_f64(),
        aborted: result.aborted,
        ..TrainReport::default()
    };
    if let Some(case) = case {
        let test = test_points(spec, cfg)?;
        let next = advance_state(&state, Arc::new(bundle.clone()), &op, dt);
        let end: Vec<Jet2> = next.prev_at(&test).into_iter().map(|pj| pj.u).collect();
        report.end_errors = Some(field_errors(case, &test, t1, &end)?);
    }
    Ok(InverseOutcome {
        bundle,
        params,
        basis,
        report,
        kappa_error,
        rhoc_error,
        grid,
    })
}
