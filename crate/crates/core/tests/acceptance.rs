//! Acceptance criteria 1–10. Each criterion prints one PASS/FAIL line to
//! stderr; the test fails if any criterion fails.
//!
//! `SINN_CRITERIA=1,2,10` restricts the run to the listed criteria.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sinn_core::geometry::{PointSet, SamplingStrategy};
use sinn_core::metrics::{l2_relative_error, relative_error};
use sinn_core::net::{init_network, Activation, BatchJets, JetLayout, NetworkBundle, Normalization};
use sinn_core::problem::{apply_operator, builtin_case, ManufacturedCase, ProblemSpec, BUILTIN_CASES};
use sinn_core::quadrature::{map_nodes, SpectralOperator};
use sinn_core::residual::{pde_residuals, PinnLoss, ResidualOptions, SinnLoss};
use sinn_core::train::{
    march, solve, solve_inverse, solve_pinn, AdamConfig, CarriedState, ExactNodal, FieldErrors, InverseConfig,
    LbfgsConfig, NodalField, Optimizer, PrevJets, TrainConfig,
};
use sinn_core::verify;

const SEEDS: [u64; 3] = [0, 1, 2];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Desk-scale forward protocol: 2×15 Swish, 1000 interior and 1092 boundary
/// Halton points, 2000 Adam iterations decaying from 1e-2 to 1e-4.
fn forward_config(seed: u64) -> TrainConfig {
    TrainConfig {
        iterations: 2000,
        optimizer: Optimizer::Adam(AdamConfig {
            lr: 1e-2,
            final_lr_factor: 0.01,
            ..AdamConfig::default()
        }),
        seed,
        hidden: vec![15, 15],
        activation: Activation::Swish,
        interior_points: 1000,
        boundary_points: 1092,
        ..TrainConfig::default()
    }
}

/// Final-time errors of one forward run per seed.
fn forward_runs(spec: &ProblemSpec, case: &ManufacturedCase, cfg: impl Fn(u64) -> TrainConfig) -> Vec<FieldErrors> {
    SEEDS
        .iter()
        .map(|&s| {
            let (_, r) = solve(spec, &cfg(s), Some(case)).unwrap();
            assert!(r.aborted.is_none(), "{}: {:?}", spec.name, r.aborted);
            r.end_errors.unwrap()
        })
        .collect()
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(" ")
}

fn describe(errs: &[FieldErrors]) -> String {
    errs.iter()
        .map(|e| format!("[u {:.2e}, grad {:.2e} {:.2e} {:.2e}]", e.u, e.grad[0], e.grad[1], e.grad[2]))
        .collect::<Vec<_>>()
        .join(" ")
}

// Criterion 1 -------------------------------------------------------------

/// Adaptive Simpson with Richardson correction.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let exactness = verify::quadrature_checks(12).unwrap();
    let worst_monomial = exactness.iter().map(|c| c.value).fold(0.0, f64::max);

    let op = SpectralOperator::new(10).unwrap();
    let (t0, dt) = (0.0, 1.0);
    let times = map_nodes(op.rule(), t0, t0 + dt).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_oracle = 0.0f64;
    for _ in 0..20 {
        let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let (a, b, k) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..6.3), rng.gen_range(-1.0..1.0));
        let f = move |t: f64| c[0] + c[1] * (a * t + b).sin() + c[2] * (k * t).exp();
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let single = op.integrate_single(dt, &values).unwrap();
        let double = op.integrate_double(dt, &values).unwrap();
        for (j, &tj) in times.iter().enumerate() {
            let inner = |s: f64| adaptive_simpson(&f, t0, s, 1e-14);
            let s1 = inner(tj);
            let s2 = adaptive_simpson(&inner, t0, tj, 1e-13);
            worst_oracle = worst_oracle.max((single[j] - s1).abs()).max((double[j] - s2).abs());
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst_monomial <= 1e-12 && worst_oracle <= 1e-9 && secs < 1.0,
        format!(
            "monomial rel err {worst_monomial:.2e} (<= 1e-12), oracle abs err {worst_oracle:.2e} (<= 1e-9), {secs:.2} s"
        ),
    )
}

// Criterion 2 -------------------------------------------------------------

fn fd5(f: &mut dyn FnMut(f64) -> f64, h: f64) -> f64 {
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    // Jets of single networks against central differences.
    let h = 1e-4;
    let (mut grad_err, mut lap_err) = (0.0f64, 0.0f64);
    for c in 0..100 {
        let act = Activation::ALL[c % Activation::ALL.len()];
        let width = rng.gen_range(4..16);
        let net = init_network(&[3, width, width, 1], act, rng.gen()).unwrap();
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let jet = net.forward_jet(x);
        let f = |i: usize, d: f64| {
            let mut y = x;
            y[i] += d;
            net.forward(&y)
        };
        let f0 = net.forward(&x);
        let mut lap = 0.0;
        for i in 0..3 {
            let (fp, fm) = (f(i, h), f(i, -h));
            let fd = (fp - fm) / (2.0 * h);
            grad_err = grad_err.max((jet.gradient[i] - fd).abs() / fd.abs().max(1e-3));
            lap += (fp - 2.0 * f0 + fm) / (h * h);
        }
        lap_err = lap_err.max((jet.laplacian - lap).abs() / lap.abs().max(1e-2));
    }

    // Full SINN heat loss with respect to the network parameters.
    let (spec, _) = builtin_case("heat_nl_a").unwrap();
    let op = SpectralOperator::new(5).unwrap();
    let state = CarriedState::new(&spec);
    let pts = PointSet::generate(&spec.domain, 40, 60, SamplingStrategy::Halton, &spec.tagging, 5).unwrap();
    let loss = SinnLoss::new(&spec, &state, &op, 0.2, &pts, ResidualOptions::default()).unwrap();
    let norm = Normalization {
        shift: vec![0.5; 3],
        scale: vec![2.0; 3],
        output: loss.data_scale(),
    };
    let mut bundle = NetworkBundle::init(5, &[3, 8, 8, 1], Activation::Tanh, JetLayout::spatial(), norm, 11).unwrap();
    let (_, grad) = bundle.loss_gradient(loss.inputs(), |j| {
        let (b, adj) = loss.evaluate(j)?;
        Ok((b.total, adj))
    })
    .unwrap();
    let params = bundle.params_flatten();
    let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    // Coordinates carrying at least a thousandth of the largest partial.
    let significant: Vec<usize> = (0..grad.len()).filter(|&i| grad[i].abs() >= 1e-3 * gmax).collect();
    let mut loss_err = 0.0f64;
    let checked = 60.min(significant.len());
    for _ in 0..checked {
        let i = significant[rng.gen_range(0..significant.len())];
        let mut at = |d: f64| {
            let mut p = params.clone();
            p[i] += d;
            bundle.params_load(&p).unwrap();
            loss.evaluate(&bundle.eval(loss.inputs())).unwrap().0.total
        };
        let fd = fd5(&mut at, 1e-3);
        loss_err = loss_err.max((fd - grad[i]).abs() / grad[i].abs());
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        grad_err <= 1e-6 && lap_err <= 1e-4 && loss_err <= 1e-5 && secs < 30.0,
        format!(
            "jet grad {grad_err:.2e} (<= 1e-6), laplacian {lap_err:.2e} (<= 1e-4), \
             loss gradient {loss_err:.2e} over {checked} coordinates (<= 1e-5), {secs:.1} s"
        ),
    )
}

// Criterion 3 -------------------------------------------------------------

fn criterion_3() -> Outcome {
    let started = Instant::now();
    let checks = verify::manufactured_checks(200, 3).unwrap();
    let worst = checks.iter().map(|c| c.value).fold(0.0, f64::max);
    let secs = started.elapsed().as_secs_f64();
    outcome(
        checks.len() == BUILTIN_CASES.len() && checks.iter().all(|c| c.passed()) && secs < 10.0,
        format!("{} cases, worst scaled residual {worst:.2e} (<= 1e-5), {secs:.2} s", checks.len()),
    )
}

// Criteria 4–6 ------------------------------------------------------------

fn forward_criterion(name: &str, u_tol: f64, flux_tol: Option<f64>, budget: f64) -> Outcome {
    let started = Instant::now();
    let (spec, case) = builtin_case(name).unwrap();
    let errs = forward_runs(&spec, &case, forward_config);
    let mu = median(errs.iter().map(|e| e.u).collect());
    let mg: [f64; 3] = std::array::from_fn(|i| median(errs.iter().map(|e| e.grad[i]).collect()));
    let secs = started.elapsed().as_secs_f64();
    let flux_ok = flux_tol.map_or(true, |t| mg.iter().all(|g| *g <= t));
    outcome(
        mu <= u_tol && flux_ok && secs <= budget,
        format!(
            "{name}: median u {mu:.2e} (<= {u_tol:.0e}), median grad {:.2e} {:.2e} {:.2e}{}; runs {}; {secs:.0} s",
            mg[0],
            mg[1],
            mg[2],
            flux_tol.map_or(String::new(), |t| format!(" (<= {t:.0e})")),
            describe(&errs)
        ),
    )
}

fn criterion_6() -> Outcome {
    let a = forward_criterion("wave_linear", 2e-2, None, 900.0);
    let b = forward_criterion("wave_sine_gordon", 2e-2, None, 900.0);

    // Longer sine-Gordon run with ten nodes and three hidden layers.
    let started = Instant::now();
    let (mut spec, case) = builtin_case("wave_sine_gordon").unwrap();
    spec.time_interval = (0.0, 2.0);
    let errs = forward_runs(&spec, &case, |s| TrainConfig {
        iterations: 1000,
        nodes: Some(10),
        hidden: vec![15, 15, 15],
        ..forward_config(s)
    });
    let mu = median(errs.iter().map(|e| e.u).collect());
    let secs = started.elapsed().as_secs_f64();
    let c_ok = mu <= 2e-2 && secs <= 900.0;
    outcome(
        a.passed && b.passed && c_ok,
        format!(
            "{} | {} | wave_sine_gordon on [0, 2], p = 10: median u {mu:.2e} (<= 2e-2); runs {}; {secs:.0} s",
            a.detail,
            b.detail,
            describe(&errs)
        ),
    )
}

// Criterion 7 -------------------------------------------------------------

fn criterion_7() -> Outcome {
    let started = Instant::now();
    let (mut spec, case) = builtin_case("longtime_fgm").unwrap();
    spec.time_interval = (0.0, 40.0);
    let cfg = TrainConfig {
        iterations: 1000,
        refine_iterations: 1500,
        refine: LbfgsConfig::default(),
        nodes: Some(10),
        interior_points: 600,
        boundary_points: 600,
        warm_start: true,
        ..forward_config(0)
    };
    let m = march(&spec, &cfg, 20, Some(&case)).unwrap();
    let errs: Vec<f64> = m.steps.iter().map(|r| r.end_errors.unwrap().u).collect();
    let first = errs[0];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let secs = started.elapsed().as_secs_f64();
    outcome(
        m.aborted.is_none() && errs.len() == 20 && worst <= 10.0 * first && secs <= 3600.0,
        format!(
            "20 steps of dt = 2: step-1 error {first:.2e}, worst {worst:.2e}, ratio {:.2} (<= 10); per step [{}]; {secs:.0} s",
            worst / first,
            sci(&errs)
        ),
    )
}

// Criterion 8 -------------------------------------------------------------

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let (spec, case) = builtin_case("inverse_poly").unwrap();
    let cfg = TrainConfig {
        refine_iterations: 1000,
        ..forward_config(0)
    };
    let run = |noise: f64| {
        let inv = InverseConfig {
            order: 3,
            fraction: 0.2,
            noise,
            ..InverseConfig::default()
        };
        let out = solve_inverse(&spec, &cfg, &inv, Some(&case)).unwrap();
        assert_eq!(out.basis.len(), 20);
        assert!(out.report.aborted.is_none());
        out.kappa_error
    };
    let clean = run(0.0);
    let noisy = run(0.05);
    let secs = started.elapsed().as_secs_f64();
    outcome(
        clean <= 5e-2 && noisy <= 1e-1 && secs <= 1200.0,
        format!("kappa max rel err clean {clean:.2e} (<= 5e-2), 5% noise {noisy:.2e} (<= 1e-1); {secs:.0} s"),
    )
}

// Criterion 9 -------------------------------------------------------------

fn criterion_9() -> Outcome {
    let started = Instant::now();
    let (spec, case) = builtin_case("heat_fgm").unwrap();
    let p = spec.default_nodes;
    let (mut sinn, mut pinn, mut sinn_t, mut pinn_t) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &s in &SEEDS {
        let cfg = TrainConfig {
            iterations: 1000,
            ..forward_config(s)
        };
        let (_, a) = solve(&spec, &cfg, Some(&case)).unwrap();
        let (_, b) = solve_pinn(&spec, &cfg, p, Some(&case)).unwrap();
        sinn.push(a.end_errors.unwrap().u);
        pinn.push(b.end_errors.unwrap().u);
        sinn_t.push(a.wall_clock);
        pinn_t.push(b.wall_clock);
    }
    let (ms, mp) = (median(sinn.clone()), median(pinn.clone()));
    let secs = started.elapsed().as_secs_f64();
    outcome(
        ms < mp && secs <= 1200.0,
        format!(
            "median u SINN {ms:.2e} < PINN {mp:.2e}; per seed SINN [{}] PINN [{}]; \
             median wall clock SINN {:.1} s, PINN {:.1} s (reported only); {secs:.0} s",
            sci(&sinn),
            sci(&pinn),
            median(sinn_t),
            median(pinn_t)
        ),
    )
}

// Criterion 10 ------------------------------------------------------------

fn spatial_jets(points: &[[f64; 3]], field: &dyn NodalField) -> Vec<BatchJets> {
    field
        .nodal_jets(points)
        .into_iter()
        .map(|col| {
            let mut j = BatchJets::zeros(&JetLayout::spatial(), points.len());
            let d = j.data_mut();
            for (c, jet) in col.iter().enumerate() {
                d[[0, c]] = jet.value;
                for i in 0..3 {
                    d[[1 + i, c]] = jet.gradient[i];
                }
                d[[4, c]] = jet.laplacian;
            }
            j
        })
        .collect()
}

fn columns(loss: &SinnLoss) -> Vec<[f64; 3]> {
    let inp = loss.inputs();
    (0..inp.ncols()).map(|c| [inp[[0, c]], inp[[1, c]], inp[[2, c]]]).collect()
}

/// `t^degree · g(x)` with the source regenerated for `spec`'s operator.
fn polynomial_in_time(base: &str, degree: i32) -> (ProblemSpec, ManufacturedCase) {
    let (mut spec, _) = builtin_case(base).unwrap();
    let d = f64::from(degree);
    let case = ManufacturedCase::separable(
        "poly",
        Arc::new(move |t: f64| {
            [
                t.powi(degree),
                d * t.powi(degree - 1),
                d * (d - 1.0) * t.powi(degree - 2),
            ]
        }),
        Arc::new(|[x, y, z]: [f64; 3]| sinn_core::net::Jet2 {
            value: 1.0 + x * x + y * z,
            gradient: [2.0 * x, z, y],
            laplacian: 2.0,
        }),
    );
    let physics = spec.physics.clone();
    let order = physics.order();
    let c = case.clone();
    spec.source = Arc::new(move |x, t| apply_operator(&physics, x, &c.u(x, t), c.time_derivative(x, t, order).value));
    (spec, case)
}

fn criterion_10() -> Outcome {
    let started = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;

    // Exact integrands make every SINN and PINN loss vanish.
    let mut worst_null = 0.0f64;
    for name in ["heat_fgm", "heat_nl_a", "wave_linear", "wave_sine_gordon"] {
        let (spec, case) = builtin_case(name).unwrap();
        let pts = PointSet::generate(&spec.domain, 30, 60, SamplingStrategy::Halton, &spec.tagging, 4).unwrap();
        let op = SpectralOperator::new(10).unwrap();
        let state = CarriedState::new(&spec);
        let loss = SinnLoss::new(&spec, &state, &op, 0.05, &pts, ResidualOptions::default()).unwrap();
        let field = ExactNodal {
            case: case.clone(),
            times: loss.node_times().to_vec(),
            order: spec.physics.order(),
        };
        let (b, _) = loss.evaluate(&spatial_jets(&columns(&loss), &field)).unwrap();
        worst_null = worst_null.max(b.total);

        let pinn = PinnLoss::new(&spec, &pts, &[0.1, 0.2], ResidualOptions::default()).unwrap();
        let inp = pinn.inputs();
        let mut j = BatchJets::zeros(&JetLayout::space_time(), inp.ncols());
        for c in 0..inp.ncols() {
            let (x, t) = ([inp[[0, c]], inp[[1, c]], inp[[2, c]]], inp[[3, c]]);
            let u = case.u(x, t);
            let d = j.data_mut();
            d[[0, c]] = u.value;
            for i in 0..3 {
                d[[1 + i, c]] = u.gradient[i];
            }
            d[[4, c]] = case.time_derivative(x, t, 1).value;
            d[[5, c]] = u.laplacian;
            d[[6, c]] = case.time_derivative(x, t, 2).value;
        }
        worst_null = worst_null.max(pinn.evaluate(&[j]).unwrap().0.total);
    }
    ok &= worst_null < 1e-16;
    notes.push(format!("exact-configuration loss {worst_null:.1e} (< 1e-16)"));

    // Integrands polynomial in time are reconstructed exactly.
    let mut worst_poly = 0.0f64;
    for (base, degree, p) in [("heat_nl_a", 2, 3), ("heat_fgm", 4, 5), ("wave_linear", 3, 3), ("wave_sine_gordon", 4, 4)] {
        let (spec, case) = polynomial_in_time(base, degree);
        let op = SpectralOperator::new(p).unwrap();
        let (t0, dt) = (0.2, 0.6);
        let times = map_nodes(op.rule(), t0, t0 + dt).unwrap();
        let order = spec.physics.order();
        for x in [[0.1, 0.2, 0.3], [0.7, 0.4, 0.9], [0.5, 0.5, 0.5]] {
            let prev = PrevJets {
                u: case.u(x, t0),
                v: case.time_derivative(x, t0, 1),
            };
            let nodal: Vec<_> = times.iter().map(|&t| case.time_derivative(x, t, order)).collect();
            let r = pde_residuals(&spec, &op, &prev, &nodal, x, t0, dt).unwrap();
            worst_poly = r.iter().fold(worst_poly, |m, v| m.max(v.abs()));
        }
    }
    ok &= worst_poly <= 1e-10;
    notes.push(format!("polynomial-in-time residual {worst_poly:.1e} (<= 1e-10)"));

    // Marching with injected exact nodal values stays on the exact solution.
    let (spec, case) = builtin_case("heat_nl_a").unwrap();
    let pts = PointSet::generate(&spec.domain, 20, 40, SamplingStrategy::Halton, &spec.tagging, 8).unwrap();
    let op = SpectralOperator::new(10).unwrap();
    let mut state = CarriedState::new(&spec);
    let mut worst_march = 0.0f64;
    for _ in 0..4 {
        let loss = SinnLoss::new(&spec, &state, &op, 0.05, &pts, ResidualOptions::default()).unwrap();
        let field = ExactNodal {
            case: case.clone(),
            times: loss.node_times().to_vec(),
            order: 1,
        };
        worst_march = worst_march.max(loss.evaluate(&spatial_jets(&columns(&loss), &field)).unwrap().0.total);
        state.push(0.05, Arc::new(field), op.clone());
    }
    let carried: Vec<f64> = state.prev_at(&pts.interior).iter().map(|p| p.u.value).collect();
    let exact: Vec<f64> = pts.interior.iter().map(|&x| case.u(x, 0.2).value).collect();
    let drift = l2_relative_error(&exact, &carried).unwrap().value;
    ok &= worst_march < 1e-16 && drift <= 1e-12;
    notes.push(format!("marching loss {worst_march:.1e} (< 1e-16), carried-state drift {drift:.1e} (<= 1e-12)"));

    // Metrics against one-line reimplementations.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_metric = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..40);
        let e: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let m: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let want = e.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            / e.iter().map(|a| a * a).sum::<f64>().sqrt();
        let got = l2_relative_error(&e, &m).unwrap().value;
        worst_metric = worst_metric.max((got - want).abs() / want.max(1.0));
        worst_metric = worst_metric.max((relative_error(e[0], m[0]).value - ((e[0] - m[0]) / e[0]).abs()).abs());
    }
    ok &= worst_metric <= 1e-14;
    notes.push(format!("metric purity {worst_metric:.1e} (<= 1e-14)"));

    let secs = started.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    notes.push(format!("{secs:.2} s"));
    outcome(ok, notes.join("; "))
}

#[test]
fn acceptance_criteria() {
    let selected: Option<Vec<usize>> = std::env::var("SINN_CRITERIA")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, || forward_criterion("heat_fgm", 1e-2, Some(5e-2), 600.0)),
        (5, || forward_criterion("heat_nl_a", 1e-2, None, 600.0)),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (n, run) in criteria {
        if selected.as_ref().is_some_and(|s| !s.contains(&n)) {
            continue;
        }
        let o = run();
        let status = if o.passed { "PASS" } else { "FAIL" };
        writeln!(err, "criterion {n:>2}: {status}  {}", o.detail).unwrap();
        if !o.passed {
            failed.push(n);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
