//! Gauss–Legendre rules and the spectral integration operators built on them.
//!
//! A subinterval `[t0, t0 + dt]` is mapped onto `[-1, 1]`. Nodal values `U_k`
//! of an integrand define its interpolating polynomial, and the operators here
//! integrate that polynomial exactly from `t0` up to each node (single and
//! double antiderivatives) and up to the right endpoint.
//!
//! Cardinal polynomials are expanded in the Legendre basis, where the
//! coefficients follow from the quadrature rule itself and the antiderivatives
//! of `P_n` have closed forms. No numerical integration is involved.

use crate::error::{invalid, Result, SinnError};

/// Largest supported node count.
pub const MAX_NODES: usize = 64;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_STEPS: usize = 100;

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
pub fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// `P_0(x) ..= P_n(x)`.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(x);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// Single antiderivatives `Q_n(x) = ∫_{-1}^x P_n` and double antiderivatives
/// `R_n(x) = ∫_{-1}^x Q_n` for `n < count`.
fn legendre_antiderivatives(count: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let p = legendre_all(count + 1, x);
    let mut q = Vec::with_capacity(count + 1);
    q.push(x + 1.0);
    for n in 1..=count {
        q.push((p[n + 1] - p[n - 1]) / (2 * n + 1) as f64);
    }
    let mut r = Vec::with_capacity(count);
    r.push(0.5 * (x + 1.0) * (x + 1.0));
    for n in 1..count {
        r.push((q[n + 1] - q[n - 1]) / (2 * n + 1) as f64);
    }
    q.truncate(count);
    (q, r)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of `w_k f(ξ_k)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Builds the `p`-point Gauss–Legendre rule by Newton iteration on `P_p`.
///
/// Roots converge when the Newton correction `|P_p / P_p'|` falls below
/// `1e-14`. Only the non-negative half is computed; the other half is mirrored
/// so the node set is exactly symmetric.
pub fn gauss_rule(p: usize) -> Result<GaussRule> {
    if p == 0 || p > MAX_NODES {
        return Err(invalid(format!("node count must be in 1..={MAX_NODES}, got {p}")));
    }
    let mut nodes = vec![0.0; p];
    let mut weights = vec![0.0; p];
    let pf = p as f64;
    for i in 0..p.div_ceil(2) {
        let mirror = p - 1 - i;
        let mut x = if mirror == i {
            0.0
        } else {
            (std::f64::consts::PI * (i as f64 + 0.75) / (pf + 0.5)).cos()
        };
        if mirror != i {
            let mut correction = f64::INFINITY;
            for _ in 0..NEWTON_MAX_STEPS {
                let (value, deriv) = legendre_eval(p, x);
                correction = value / deriv;
                x -= correction;
                if correction.abs() < NEWTON_TOL {
                    break;
                }
            }
            if !(correction.abs() < NEWTON_TOL) {
                return Err(SinnError::NoConvergence {
                    degree: p,
                    index: i,
                    correction,
                });
            }
        }
        let (_, deriv) = legendre_eval(p, x);
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[mirror] = x;
        nodes[i] = -x;
        weights[mirror] = w;
        weights[i] = w;
    }
    Ok(GaussRule { nodes, weights })
}

/// Affine image of the rule's nodes in `[t_start, t_end]`.
pub fn map_nodes(rule: &GaussRule, t_start: f64, t_end: f64) -> Result<Vec<f64>> {
    if !(t_end > t_start) {
        return Err(invalid(format!(
            "interval end {t_end} must exceed start {t_start}"
        )));
    }
    let dt = t_end - t_start;
    Ok(rule
        .nodes
        .iter()
        .map(|&xi| t_start + dt * (xi + 1.0) * 0.5)
        .collect())
}

/// Single and double spectral integration operators for one node count.
///
/// `single[j][k] = ½ ∫_{-1}^{ξ_j} ℓ_k`, `double[j][k] = ¼ ∫_{-1}^{ξ_j} ∫_{-1}^{τ} ℓ_k`,
/// with `ℓ_k` the Lagrange cardinal polynomials on the nodes. The interval
/// scale factors live inside the matrices, so on a subinterval of width `dt`
/// the integrals are `dt · single · U` and `dt² · double · U`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    rule: GaussRule,
    /// Legendre coefficients of the cardinal polynomials, row `k` for `ℓ_k`.
    cardinal: Vec<f64>,
    single: Vec<f64>,
    double: Vec<f64>,
    end_single: Vec<f64>,
    end_double: Vec<f64>,
}

/// Builds the spectral operator for a rule.
pub fn build_spectral_operator(rule: &GaussRule) -> SpectralOperator {
    let p = rule.len();
    let mut cardinal = vec![0.0; p * p];
    for (k, (&xk, &wk)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let pk = legendre_all(p - 1, xk);
        for n in 0..p {
            cardinal[k * p + n] = 0.5 * (2 * n + 1) as f64 * wk * pk[n];
        }
    }
    let mut op = SpectralOperator {
        rule: rule.clone(),
        cardinal,
        single: vec![0.0; p * p],
        double: vec![0.0; p * p],
        end_single: Vec::new(),
        end_double: Vec::new(),
    };
    for j in 0..p {
        let (s, d) = op.weights_at(rule.nodes[j]);
        op.single[j * p..(j + 1) * p].copy_from_slice(&s);
        op.double[j * p..(j + 1) * p].copy_from_slice(&d);
    }
    let (s, d) = op.weights_at(1.0);
    op.end_single = s;
    op.end_double = d;
    op
}

impl SpectralOperator {
    /// Convenience: rule plus operator for `p` nodes.
    pub fn new(p: usize) -> Result<Self> {
        Ok(build_spectral_operator(&gauss_rule(p)?))
    }

    pub fn nodes(&self) -> usize {
        self.rule.len()
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    /// Entry `(j, k)` of the single-integration matrix.
    pub fn single(&self, j: usize, k: usize) -> f64 {
        self.single[j * self.nodes() + k]
    }

    /// Entry `(j, k)` of the double-integration matrix.
    pub fn double(&self, j: usize, k: usize) -> f64 {
        self.double[j * self.nodes() + k]
    }

    pub fn single_row(&self, j: usize) -> &[f64] {
        let p = self.nodes();
        &self.single[j * p..(j + 1) * p]
    }

    pub fn double_row(&self, j: usize) -> &[f64] {
        let p = self.nodes();
        &self.double[j * p..(j + 1) * p]
    }

    /// Right-endpoint single-integration weights (`weights / 2`).
    pub fn end_single(&self) -> &[f64] {
        &self.end_single
    }

    /// Right-endpoint double-integration weights.
    pub fn end_double(&self) -> &[f64] {
        &self.end_double
    }

    /// Integration weights from `-1` up to an arbitrary reference point
    /// `xi ∈ [-1, 1]`, already carrying the ½ and ¼ factors.
    pub fn weights_at(&self, xi: f64) -> (Vec<f64>, Vec<f64>) {
        let p = self.nodes();
        let (q, r) = legendre_antiderivatives(p, xi);
        let mut single = vec![0.0; p];
        let mut double = vec![0.0; p];
        for k in 0..p {
            let c = &self.cardinal[k * p..(k + 1) * p];
            single[k] = 0.5 * c.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
            double[k] = 0.25 * c.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
        }
        (single, double)
    }

    /// Evaluates the interpolating polynomial of nodal values at `xi`.
    pub fn interpolate(&self, values: &[f64], xi: f64) -> f64 {
        let p = self.nodes();
        let pn = legendre_all(p - 1, xi);
        (0..p)
            .map(|k| {
                let c = &self.cardinal[k * p..(k + 1) * p];
                values[k] * c.iter().zip(&pn).map(|(a, b)| a * b).sum::<f64>()
            })
            .sum()
    }

    fn check(&self, dt: f64, values: &[f64]) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid(format!("subinterval width must be positive, got {dt}")));
        }
        if values.len() != self.nodes() {
            return Err(SinnError::LengthMismatch {
                expected: self.nodes(),
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SinnError::NonFinite {
                point: i,
                context: "nodal integrand value".into(),
            });
        }
        Ok(())
    }

    /// `dt · S1 · U`: integrals from the subinterval start to each node.
    pub fn integrate_single(&self, dt: f64, values: &[f64]) -> Result<Vec<f64>> {
        self.check(dt, values)?;
        Ok(mat_vec(&self.single, values, dt))
    }

    /// `dt² · S2 · U`: double integrals from the subinterval start to each node.
    pub fn integrate_double(&self, dt: f64, values: &[f64]) -> Result<Vec<f64>> {
        self.check(dt, values)?;
        Ok(mat_vec(&self.double, values, dt * dt))
    }

    /// Single and double integrals over the whole subinterval.
    pub fn end_values(&self, dt: f64, values: &[f64]) -> Result<(f64, f64)> {
        self.check(dt, values)?;
        let s: f64 = self.end_single.iter().zip(values).map(|(a, b)| a * b).sum();
        let d: f64 = self.end_double.iter().zip(values).map(|(a, b)| a * b).sum();
        Ok((dt * s, dt * dt * d))
    }
}

fn mat_vec(m: &[f64], v: &[f64], scale: f64) -> Vec<f64> {
    let p = v.len();
    (0..p)
        .map(|j| scale * m[j * p..(j + 1) * p].iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}
