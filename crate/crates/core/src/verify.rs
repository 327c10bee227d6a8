//! Self-checks run by the `verify` subcommand: quadrature exactness,
//! manufactured-source consistency and derivative finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{sample_interior, SamplingStrategy};
use crate::net::{init_network, Activation};
use crate::problem::{builtin_case, verify_manufactured, BUILTIN_CASES};
use crate::quadrature::SpectralOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

/// Single and double integrals of `t^m`, `m < p`, from −1 to every node of
/// the reference subinterval `[−1, 1]`, for `p = 1..=max_nodes`. Worst
/// pointwise relative error per `p`.
///
/// The reference interval keeps every antiderivative bounded away from zero
/// relative to the nodal data; on `[0, 1]` the values near `t = 0` are tiny
/// and the pointwise relative error measures only roundoff amplification.
pub fn quadrature_checks(max_nodes: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for p in 1..=max_nodes {
        let op = SpectralOperator::new(p)?;
        let t = op.rule().nodes();
        let mut worst = 0.0f64;
        for m in 0..p as i32 {
            let values: Vec<f64> = t.iter().map(|x| x.powi(m)).collect();
            let single = op.integrate_single(2.0, &values)?;
            let double = op.integrate_double(2.0, &values)?;
            let m1 = f64::from(m + 1);
            let a1 = (-1.0f64).powi(m + 1);
            let a2 = (-1.0f64).powi(m + 2);
            for j in 0..p {
                let want1 = (t[j].powi(m + 1) - a1) / m1;
                let want2 = (t[j].powi(m + 2) - a2) / (m1 * (m1 + 1.0)) - a1 * (t[j] + 1.0) / m1;
                worst = worst.max(rel(single[j], want1)).max(rel(double[j], want2));
            }
        }
        out.push(Check {
            suite: "quadrature",
            name: format!("p={p}"),
            value: worst,
            tolerance: 1e-12,
        });
    }
    Ok(out)
}

/// `max |LHS(u) − f| / (1 + max |f|)` per builtin case over `samples`
/// interior points at random times.
pub fn manufactured_checks(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for name in BUILTIN_CASES {
        let (spec, case) = builtin_case(name)?;
        let pts = sample_interior(&spec.domain, samples, SamplingStrategy::Halton, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t0, t1) = spec.time_interval;
        let times: Vec<f64> = (0..samples).map(|_| rng.gen_range(t0..t1)).collect();
        let max_f = pts
            .iter()
            .zip(&times)
            .map(|(&x, &t)| spec.source(x, t).abs())
            .fold(0.0, f64::max);
        let r = verify_manufactured(&spec, &case, &pts, &times);
        out.push(Check {
            suite: "manufactured",
            name: name.to_string(),
            value: r / (1.0 + max_f),
            tolerance: 1e-5,
        });
    }
    Ok(out)
}

/// Network jets against central differences over `cases` random networks,
/// points and activations: worst gradient and Laplacian relative errors.
pub fn jet_checks(cases: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-4;
    let (mut grad_err, mut lap_err) = (0.0f64, 0.0f64);
    for c in 0..cases {
        let act = Activation::ALL[c % Activation::ALL.len()];
        let width = rng.gen_range(4..16);
        let net = init_network(&[3, width, width, 1], act, rng.gen())?;
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let j = net.forward_jet(x);
        let f = |d: [f64; 3]| net.forward(&[x[0] + d[0], x[1] + d[1], x[2] + d[2]]);
        let f0 = f([0.0; 3]);
        let mut lap = 0.0;
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = h;
            let (fp, fm) = (f(e), f(e.map(|v| -v)));
            let fd = (fp - fm) / (2.0 * h);
            grad_err = grad_err.max((j.gradient[i] - fd).abs() / fd.abs().max(1e-3));
            lap += (fp - 2.0 * f0 + fm) / (h * h);
        }
        lap_err = lap_err.max((j.laplacian - lap).abs() / lap.abs().max(1e-2));
    }
    Ok(vec![
        Check {
            suite: "derivatives",
            name: "gradient".into(),
            value: grad_err,
            tolerance: 1e-6,
        },
        Check {
            suite: "derivatives",
            name: "laplacian".into(),
            value: lap_err,
            tolerance: 1e-4,
        },
    ])
}

/// All suites with their default sizes.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    let mut out = quadrature_checks(12)?;
    out.extend(manufactured_checks(200, seed)?);
    out.extend(jet_checks(100, seed)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let checks = run_all(3).unwrap();
        assert_eq!(checks.len(), 12 + BUILTIN_CASES.len() + 2);
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
