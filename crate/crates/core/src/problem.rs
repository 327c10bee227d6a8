//! Heat and wave problem definitions and the library of manufactured cases.
//!
//! Heat: `ρc·u_t − ∇·(κ∇u) = f`, with Neumann data `q = −κ ∂u/∂n`.
//! Wave: `u_tt − w²Δu + N(u) = f`, with Neumann data `q = ∂u/∂n`.
//!
//! Every builtin case has a separable fabricated solution `u = T(t)·g(x)` and a
//! source written out by hand; `verify_manufactured` checks the two agree.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SinnError};
use crate::geometry::{Axis, Domain, Region, Tag, TagRule};
use crate::net::Jet2;

/// Spatial field with value, gradient and Laplacian.
pub type ScalarField = Arc<dyn Fn([f64; 3]) -> Jet2 + Send + Sync>;
/// `f(x, t)`.
pub type SourceFn = Arc<dyn Fn([f64; 3], f64) -> f64 + Send + Sync>;
/// `(T, T', T'')` at `t`.
pub type TimeFactor = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

pub const BUILTIN_CASES: [&str; 8] = [
    "heat_fgm",
    "heat_nl_a",
    "heat_nl_b",
    "wave_linear",
    "wave_sine_gordon",
    "inverse_fgm",
    "longtime_fgm",
    "inverse_poly",
];

/// Coefficient value with its explicit spatial gradient and `∂/∂u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub value: f64,
    pub grad: [f64; 3],
    pub du: f64,
}

#[derive(Clone)]
pub enum CoefficientField {
    Constant(f64),
    /// `base · d(x)`.
    SpatialProduct { base: f64, d: ScalarField },
    /// `a·u + b`.
    AffineInU { a: f64, b: f64 },
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientField::Constant(c) => write!(f, "Constant({c})"),
            CoefficientField::SpatialProduct { base, .. } => write!(f, "SpatialProduct({base}·d)"),
            CoefficientField::AffineInU { a, b } => write!(f, "AffineInU({a}·u + {b})"),
        }
    }
}

impl CoefficientField {
    pub fn eval(&self, x: [f64; 3], u: f64) -> Coefficient {
        match self {
            CoefficientField::Constant(c) => Coefficient {
                value: *c,
                grad: [0.0; 3],
                du: 0.0,
            },
            CoefficientField::SpatialProduct { base, d } => {
                let j = d(x);
                Coefficient {
                    value: base * j.value,
                    grad: j.gradient.map(|g| base * g),
                    du: 0.0,
                }
            }
            CoefficientField::AffineInU { a, b } => Coefficient {
                value: a * u + b,
                grad: [0.0; 3],
                du: *a,
            },
        }
    }

    /// The spatial profile `d` of a `SpatialProduct`.
    pub fn profile(&self) -> Option<&ScalarField> {
        match self {
            CoefficientField::SpatialProduct { d, .. } => Some(d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    None,
    /// `N(u) = sin u` (sine-Gordon).
    Sine,
}

impl Nonlinearity {
    /// `(N(u), N'(u))`.
    pub fn eval(self, u: f64) -> (f64, f64) {
        match self {
            Nonlinearity::None => (0.0, 0.0),
            Nonlinearity::Sine => u.sin_cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Heat,
    Wave,
}

#[derive(Debug, Clone)]
pub enum Physics {
    Heat {
        rhoc: CoefficientField,
        kappa: CoefficientField,
    },
    Wave {
        speed_sq: f64,
        nonlinearity: Nonlinearity,
    },
}

impl Physics {
    pub fn kind(&self) -> Kind {
        match self {
            Physics::Heat { .. } => Kind::Heat,
            Physics::Wave { .. } => Kind::Wave,
        }
    }

    /// Order of the time derivative the networks approximate.
    pub fn order(&self) -> usize {
        match self {
            Physics::Heat { .. } => 1,
            Physics::Wave { .. } => 2,
        }
    }
}

/// Boundary data `ū`, `q̄` and their time derivatives.
pub trait BoundaryData: Send + Sync {
    /// `∂^order ū / ∂t^order`.
    fn dirichlet(&self, x: [f64; 3], t: f64, order: usize) -> Result<f64>;
    /// `∂^order q̄ / ∂t^order`.
    fn neumann(&self, x: [f64; 3], normal: [f64; 3], t: f64, order: usize) -> Result<f64>;
}

/// Fabricated solution `u = T(t)·g(x)`.
#[derive(Clone)]
pub struct ManufacturedCase {
    name: String,
    time: TimeFactor,
    space: ScalarField,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ManufacturedCase({})", self.name)
    }
}

impl ManufacturedCase {
    pub fn separable(name: impl Into<String>, time: TimeFactor, space: ScalarField) -> Self {
        ManufacturedCase {
            name: name.into(),
            time,
            space,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn u(&self, x: [f64; 3], t: f64) -> Jet2 {
        self.time_derivative(x, t, 0)
    }

    /// Spatial jet of `∂^order u / ∂t^order`, `order ≤ 2`.
    pub fn time_derivative(&self, x: [f64; 3], t: f64, order: usize) -> Jet2 {
        assert!(order <= 2, "time derivatives above second order are not tabulated");
        (self.space)(x).scaled((self.time)(t)[order])
    }
}

struct ManufacturedData {
    case: ManufacturedCase,
    physics: Physics,
}

impl BoundaryData for ManufacturedData {
    fn dirichlet(&self, x: [f64; 3], t: f64, order: usize) -> Result<f64> {
        if order > 2 {
            return Err(SinnError::MissingData(format!("ū derivative of order {order}")));
        }
        Ok(self.case.time_derivative(x, t, order).value)
    }

    fn neumann(&self, x: [f64; 3], n: [f64; 3], t: f64, order: usize) -> Result<f64> {
        let dn = |j: &Jet2| j.gradient[0] * n[0] + j.gradient[1] * n[1] + j.gradient[2] * n[2];
        match &self.physics {
            Physics::Heat { kappa, .. } => {
                let u = self.case.u(x, t);
                let k = kappa.eval(x, u.value);
                match order {
                    0 => Ok(-k.value * dn(&u)),
                    1 => {
                        let ut = self.case.time_derivative(x, t, 1);
                        Ok(-k.du * ut.value * dn(&u) - k.value * dn(&ut))
                    }
                    _ => Err(SinnError::MissingData(format!("heat q̄ derivative of order {order}"))),
                }
            }
            Physics::Wave { .. } => {
                if order > 2 {
                    return Err(SinnError::MissingData(format!("q̄ derivative of order {order}")));
                }
                Ok(dn(&self.case.time_derivative(x, t, order)))
            }
        }
    }
}

/// One dynamic PDE instance.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub physics: Physics,
    pub source: SourceFn,
    pub u0: ScalarField,
    /// Initial velocity, wave problems only.
    pub v0: Option<ScalarField>,
    pub boundary: Arc<dyn BoundaryData>,
    pub domain: Domain,
    pub time_interval: (f64, f64),
    pub tagging: TagRule,
    /// Gauss node count used unless a run overrides it.
    pub default_nodes: usize,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("physics", &self.physics)
            .field("domain", &self.domain)
            .field("time_interval", &self.time_interval)
            .field("tagging", &self.tagging)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn kind(&self) -> Kind {
        self.physics.kind()
    }

    pub fn source(&self, x: [f64; 3], t: f64) -> f64 {
        (self.source)(x, t)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        let (t0, t1) = self.time_interval;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(SinnError::Config(format!("bad time interval [{t0}, {t1}]")));
        }
        match (&self.physics, &self.v0) {
            (Physics::Wave { speed_sq, .. }, Some(_)) if *speed_sq > 0.0 => Ok(()),
            (Physics::Heat { .. }, None) => Ok(()),
            _ => Err(SinnError::Config(
                "wave problems need w² > 0 and v0; heat problems take no v0".into(),
            )),
        }
    }
}

/// `(Ū, Q̄)` at a node time: first time derivatives for heat, second for wave.
pub fn bc_data_derivatives(
    spec: &ProblemSpec,
    x: [f64; 3],
    normal: [f64; 3],
    t: f64,
) -> Result<(f64, f64)> {
    let order = spec.physics.order();
    Ok((
        spec.boundary.dirichlet(x, t, order)?,
        spec.boundary.neumann(x, normal, t, order)?,
    ))
}

fn jet(value: f64, gradient: [f64; 3], laplacian: f64) -> Jet2 {
    Jet2 {
        value,
        gradient,
        laplacian,
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `c·e^{a·x}` as a jet.
fn exp_jet(a: [f64; 3], x: [f64; 3]) -> Jet2 {
    let e = dot(a, x).exp();
    jet(e, a.map(|v| v * e), dot(a, a) * e)
}

fn field(f: impl Fn([f64; 3]) -> Jet2 + Send + Sync + 'static) -> ScalarField {
    Arc::new(f)
}

fn time(f: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> TimeFactor {
    Arc::new(f)
}

fn source(f: impl Fn([f64; 3], f64) -> f64 + Send + Sync + 'static) -> SourceFn {
    Arc::new(f)
}

fn unit_split(axis: Axis, value: f64, tag: Tag) -> TagRule {
    TagRule::split(Region::Below { axis, value }, tag)
}

struct CaseParts {
    physics: Physics,
    time: TimeFactor,
    space: ScalarField,
    source: SourceFn,
    domain: Domain,
    interval: (f64, f64),
    tagging: TagRule,
    nodes: usize,
}

fn assemble(name: &str, parts: CaseParts) -> (ProblemSpec, ManufacturedCase) {
    let case = ManufacturedCase::separable(name, parts.time, parts.space);
    let c0 = case.clone();
    let u0 = field(move |x| c0.u(x, 0.0));
    let v0 = match parts.physics {
        Physics::Wave { .. } => {
            let c1 = case.clone();
            Some(field(move |x| c1.time_derivative(x, 0.0, 1)))
        }
        Physics::Heat { .. } => None,
    };
    let spec = ProblemSpec {
        name: name.to_string(),
        physics: parts.physics.clone(),
        source: parts.source,
        u0,
        v0,
        boundary: Arc::new(ManufacturedData {
            case: case.clone(),
            physics: parts.physics,
        }),
        domain: parts.domain,
        time_interval: parts.interval,
        tagging: parts.tagging,
        default_nodes: parts.nodes,
    };
    (spec, case)
}

fn heat_fgm() -> CaseParts {
    let d = field(|[x, y, z]| {
        jet(
            0.5 * (2.0 * x).cos() + 0.2 * (3.0 * y).sin() + 0.2 * z.cos() + 1.0,
            [-(2.0 * x).sin(), 0.6 * (3.0 * y).cos(), -0.2 * z.sin()],
            -2.0 * (2.0 * x).cos() - 1.8 * (3.0 * y).sin() - 0.2 * z.cos(),
        )
    });
    let space = field(|[x, y, z]| {
        let s = x + 2.0 * y + 3.0 * z;
        jet(s * s, [2.0 * s, 4.0 * s, 6.0 * s], 28.0)
    });
    let dd = d.clone();
    CaseParts {
        physics: Physics::Heat {
            rhoc: CoefficientField::SpatialProduct {
                base: 2.2,
                d: d.clone(),
            },
            kappa: CoefficientField::SpatialProduct { base: 1.3, d },
        },
        time: time(|t| [30.0 * (t.sin() + 0.5), 30.0 * t.cos(), -30.0 * t.sin()]),
        space,
        source: source(move |x, t| {
            let [px, py, pz] = x;
            let s = px + 2.0 * py + 3.0 * pz;
            let d = dd(x).value;
            let grad_term = s * (-(2.0 * px).sin() + 1.2 * (3.0 * py).cos() - 0.6 * pz.sin());
            66.0 * d * t.cos() * s * s - 78.0 * (t.sin() + 0.5) * (grad_term + 14.0 * d)
        }),
        domain: Domain::unit_box(),
        interval: (0.0, 1.0),
        tagging: unit_split(Axis::X, 0.4, Tag::Neumann),
        nodes: 5,
    }
}

fn heat_nl_a() -> CaseParts {
    let space = field(|[x, y, z]| {
        let (s, c) = (x + y).sin_cos();
        let e = (y + 2.0 * z).exp();
        jet(s + e, [c, c + e, 2.0 * e], -2.0 * s + 5.0 * e)
    });
    let g = space.clone();
    CaseParts {
        physics: Physics::Heat {
            rhoc: CoefficientField::Constant(150.0),
            kappa: CoefficientField::AffineInU { a: 0.05, b: 50.0 },
        },
        time: time(|t| [30.0 * (t.cos() + 1.2), -30.0 * t.sin(), -30.0 * t.cos()]),
        space,
        source: source(move |x, t| {
            let gj = g(x);
            let tt = 30.0 * (t.cos() + 1.2);
            let grad_sq = dot(gj.gradient, gj.gradient);
            -4500.0 * t.sin() * gj.value
                - 0.05 * tt * tt * grad_sq
                - (0.05 * tt * gj.value + 50.0) * tt * gj.laplacian
        }),
        domain: Domain::unit_box(),
        interval: (0.0, 1.0),
        tagging: unit_split(Axis::Z, 0.5, Tag::Neumann),
        nodes: 5,
    }
}

fn heat_nl_b() -> CaseParts {
    const A: [f64; 3] = [0.3, 0.9, 0.2];
    CaseParts {
        physics: Physics::Heat {
            rhoc: CoefficientField::Constant(150.0),
            kappa: CoefficientField::AffineInU { a: 0.35, b: 20.0 },
        },
        time: time(|t| [50.0 * (t.cos() + 1.2), -50.0 * t.sin(), -50.0 * t.cos()]),
        space: field(|x| exp_jet(A, x)),
        source: source(|x, t| {
            let e = dot(A, x).exp();
            let tt = 50.0 * (t.cos() + 1.2);
            -7500.0 * t.sin() * e - 0.658 * tt * tt * e * e - 18.8 * tt * e
        }),
        domain: Domain::unit_box(),
        interval: (0.0, 2.0),
        tagging: unit_split(Axis::Z, 0.5, Tag::Neumann),
        nodes: 8,
    }
}

fn wave_linear() -> CaseParts {
    CaseParts {
        physics: Physics::Wave {
            speed_sq: 250000.0,
            nonlinearity: Nonlinearity::None,
        },
        time: time(|t| {
            let (s, c) = (2.0 * t).sin_cos();
            [s, 2.0 * c, -4.0 * s]
        }),
        space: field(|x| exp_jet([1.0; 3], x)),
        source: source(|[x, y, z], t| -750004.0 * (2.0 * t).sin() * (x + y + z).exp()),
        domain: Domain::Cylinder {
            base: [0.0; 3],
            radius: 0.15,
            height: 0.9,
        },
        interval: (0.0, 1.0),
        tagging: TagRule {
            dirichlet: vec![Region::NormalAcross { axis: Axis::Z }],
            neumann: vec![Region::NormalAlong { axis: Axis::Z }],
            default: None,
        },
        nodes: 5,
    }
}

fn wave_sine_gordon() -> CaseParts {
    let space = field(|[x, y, z]| {
        let s = 2.0 * x + y;
        let e = (y + 2.0 * z).exp();
        jet(s * s + e, [4.0 * s, 2.0 * s + e, 2.0 * e], 10.0 + 5.0 * e)
    });
    let g = space.clone();
    CaseParts {
        physics: Physics::Wave {
            speed_sq: 1.0,
            nonlinearity: Nonlinearity::Sine,
        },
        time: time(|t| {
            let (s, c) = t.sin_cos();
            let e = s.exp();
            [e, c * e, (c * c - s) * e]
        }),
        space,
        source: source(move |x, t| {
            let gj = g(x);
            let (s, c) = t.sin_cos();
            let tt = s.exp();
            (c * c - s) * tt * gj.value - tt * gj.laplacian + (tt * gj.value).sin()
        }),
        domain: Domain::Box {
            min: [0.0; 3],
            max: [1.84, 0.5, 0.66],
        },
        interval: (0.0, 1.0),
        tagging: unit_split(Axis::Y, 0.28, Tag::Dirichlet),
        nodes: 5,
    }
}

const INV_A: [f64; 3] = [0.2, 0.7, 0.1];

fn inverse_time() -> TimeFactor {
    time(|t| {
        let (s, c) = (2.0 * t).sin_cos();
        [100.0 * (s + 1.6), 200.0 * c, -400.0 * s]
    })
}

fn inverse_with(d: ScalarField) -> CaseParts {
    let dd = d.clone();
    CaseParts {
        physics: Physics::Heat {
            rhoc: CoefficientField::SpatialProduct {
                base: 36.0,
                d: d.clone(),
            },
            kappa: CoefficientField::SpatialProduct { base: 15.0, d },
        },
        time: inverse_time(),
        space: field(|x| exp_jet(INV_A, x)),
        source: source(move |x, t| {
            let e = dot(INV_A, x).exp();
            let dj = dd(x);
            let tt = 100.0 * ((2.0 * t).sin() + 1.6);
            7200.0 * dj.value * (2.0 * t).cos() * e
                - 15.0 * tt * e * (dot(dj.gradient, INV_A) + 0.54 * dj.value)
        }),
        domain: Domain::unit_box(),
        interval: (0.0, 1.0),
        tagging: TagRule::all(Tag::Dirichlet),
        nodes: 6,
    }
}

fn inverse_fgm() -> CaseParts {
    inverse_with(field(|[x, y, z]| {
        let ex = (0.1 * x).exp();
        jet(
            ex + y.sin() + z * z,
            [0.1 * ex, y.cos(), 2.0 * z],
            0.01 * ex - y.sin() + 2.0,
        )
    }))
}

/// Same equation as `inverse_fgm` but with a quadratic `d`, so that a
/// polynomial basis of order ≥ 2 contains the truth.
fn inverse_poly() -> CaseParts {
    inverse_with(field(|[x, y, z]| {
        jet(
            1.0 + 0.4 * x + 0.3 * y * y + 0.2 * x * z + 0.5 * z * z,
            [0.4 + 0.2 * z, 0.6 * y, 0.2 * x + z],
            1.6,
        )
    }))
}

fn longtime_fgm() -> CaseParts {
    const B: [f64; 3] = [0.6, 0.1, 0.3];
    const A: [f64; 3] = [0.3, 0.5, 0.2];
    let d = field(|x| exp_jet(B, x));
    CaseParts {
        physics: Physics::Heat {
            rhoc: CoefficientField::SpatialProduct {
                base: 2.5,
                d: d.clone(),
            },
            kappa: CoefficientField::SpatialProduct { base: 1.8, d },
        },
        time: time(|t| [25.0 * (t.sin() + 1.5), 25.0 * t.cos(), -25.0 * t.sin()]),
        space: field(|x| exp_jet(A, x)),
        source: source(|x, t| {
            let de = (dot(A, x) + dot(B, x)).exp();
            de * (62.5 * t.cos() - 30.15 * (t.sin() + 1.5))
        }),
        domain: Domain::unit_box(),
        interval: (0.0, 100.0),
        tagging: unit_split(Axis::Z, 0.65, Tag::Dirichlet),
        nodes: 10,
    }
}

pub fn builtin_case(name: &str) -> Result<(ProblemSpec, ManufacturedCase)> {
    let parts = match name {
        "heat_fgm" => heat_fgm(),
        "heat_nl_a" => heat_nl_a(),
        "heat_nl_b" => heat_nl_b(),
        "wave_linear" => wave_linear(),
        "wave_sine_gordon" => wave_sine_gordon(),
        "inverse_fgm" => inverse_fgm(),
        "inverse_poly" => inverse_poly(),
        "longtime_fgm" => longtime_fgm(),
        _ => return Err(SinnError::UnknownCase(name.to_string())),
    };
    Ok(assemble(name, parts))
}

/// Fourth-order central differences of `f` at `t`: first and second derivative.
fn time_derivatives(f: impl Fn(f64) -> f64, t: f64, h: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (f(t - 2.0 * h), f(t - h), f(t), f(t + h), f(t + 2.0 * h));
    let d1 = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    let d2 = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * c) / (12.0 * h * h);
    (d1, d2)
}

/// Left-hand side of the governing equation applied to `u`, with the time
/// derivative supplied.
pub fn apply_operator(physics: &Physics, x: [f64; 3], u: &Jet2, time_derivative: f64) -> f64 {
    match physics {
        Physics::Heat { rhoc, kappa } => {
            let r = rhoc.eval(x, u.value);
            let k = kappa.eval(x, u.value);
            let grad_k = [0, 1, 2].map(|i| k.grad[i] + k.du * u.gradient[i]);
            r.value * time_derivative - dot(grad_k, u.gradient) - k.value * u.laplacian
        }
        Physics::Wave {
            speed_sq,
            nonlinearity,
        } => time_derivative - speed_sq * u.laplacian + nonlinearity.eval(u.value).0,
    }
}

/// Largest `|LHS(u) − f|` over the sample pairs `(points[i], times[i])`.
pub fn verify_manufactured(
    spec: &ProblemSpec,
    case: &ManufacturedCase,
    points: &[[f64; 3]],
    times: &[f64],
) -> f64 {
    let h = 1e-5;
    points
        .iter()
        .zip(times)
        .map(|(&x, &t)| {
            let (d1, d2) = time_derivatives(|s| case.u(x, s).value, t, h);
            let dt = if spec.kind() == Kind::Heat { d1 } else { d2 };
            (apply_operator(&spec.physics, x, &case.u(x, t), dt) - spec.source(x, t)).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_interior, SamplingStrategy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn samples(spec: &ProblemSpec, n: usize, seed: u64) -> (Vec<[f64; 3]>, Vec<f64>) {
        let pts = sample_interior(&spec.domain, n, SamplingStrategy::Halton, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t0, t1) = spec.time_interval;
        let times = (0..n).map(|_| rng.gen_range(t0..t1)).collect();
        (pts, times)
    }

    #[test]
    fn every_builtin_is_consistent() {
        for name in BUILTIN_CASES {
            let (spec, case) = builtin_case(name).unwrap();
            spec.validate().unwrap();
            let (pts, times) = samples(&spec, 200, 7);
            let max_f = pts
                .iter()
                .zip(&times)
                .map(|(&x, &t)| spec.source(x, t).abs())
                .fold(0.0, f64::max);
            let r = verify_manufactured(&spec, &case, &pts, &times);
            assert!(r <= 1e-5 * (1.0 + max_f), "{name}: {r} vs max|f| {max_f}");
        }
    }

    #[test]
    fn corrupted_source_is_detected() {
        let (mut spec, case) = builtin_case("heat_fgm").unwrap();
        let f = spec.source.clone();
        spec.source = Arc::new(move |x, t| f(x, t) + 1.0);
        let (pts, times) = samples(&spec, 20, 1);
        let r = verify_manufactured(&spec, &case, &pts, &times);
        assert!((r - 1.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn zero_solution_zero_source() {
        let (mut spec, _) = builtin_case("heat_fgm").unwrap();
        spec.source = Arc::new(|_, _| 0.0);
        let zero = ManufacturedCase::separable(
            "zero",
            Arc::new(|_| [0.0; 3]),
            Arc::new(|_| Jet2::ZERO),
        );
        let (pts, times) = samples(&spec, 10, 2);
        assert_eq!(verify_manufactured(&spec, &zero, &pts, &times), 0.0);
    }

    #[test]
    fn unknown_case() {
        assert!(matches!(builtin_case("gear"), Err(SinnError::UnknownCase(_))));
    }

    #[test]
    fn time_factors_match_differences() {
        for name in BUILTIN_CASES {
            let (spec, case) = builtin_case(name).unwrap();
            let x = [0.13, 0.27, 0.31];
            for t in [0.1, 0.55, 0.9] {
                let (d1, d2) = time_derivatives(|s| case.u(x, s).value, t, 1e-4);
                let u1 = case.time_derivative(x, t, 1).value;
                let u2 = case.time_derivative(x, t, 2).value;
                assert!((d1 - u1).abs() <= 1e-8 * (1.0 + u1.abs()), "{name} u_t");
                assert!((d2 - u2).abs() <= 1e-5 * (1.0 + u2.abs()), "{name} u_tt");
            }
            if let Some(v0) = &spec.v0 {
                assert_eq!(v0(x), case.time_derivative(x, 0.0, 1));
            }
            assert_eq!((spec.u0)(x), case.u(x, 0.0));
        }
    }

    #[test]
    fn bc_derivative_examples() {
        let (spec, _) = builtin_case("heat_fgm").unwrap();
        let x = [0.2, 0.4, 0.1];
        let t = 0.7;
        let (ubar, _) = bc_data_derivatives(&spec, x, [1.0, 0.0, 0.0], t).unwrap();
        let s: f64 = 0.2 + 0.8 + 0.3;
        assert!((ubar - 30.0 * t.cos() * s * s).abs() < 1e-12);

        let (spec, _) = builtin_case("wave_linear").unwrap();
        let (ubar, qbar) = bc_data_derivatives(&spec, x, [0.0, 0.0, 1.0], t).unwrap();
        let e = (0.2f64 + 0.4 + 0.1).exp();
        assert!((ubar + 4.0 * (2.0 * t).sin() * e).abs() < 1e-12);
        assert!((qbar + 4.0 * (2.0 * t).sin() * e).abs() < 1e-12);
    }

    #[test]
    fn heat_flux_derivative_matches_differences() {
        for name in ["heat_fgm", "heat_nl_a"] {
            let (spec, _) = builtin_case(name).unwrap();
            let x = [0.3, 0.6, 0.2];
            let n = [0.0, -1.0, 0.0];
            let t = 0.4;
            let q = |s: f64| spec.boundary.neumann(x, n, s, 0).unwrap();
            let (fd, _) = time_derivatives(q, t, 1e-4);
            let exact = spec.boundary.neumann(x, n, t, 1).unwrap();
            assert!((fd - exact).abs() <= 1e-8 * (1.0 + exact.abs()), "{name}: {fd} vs {exact}");
            assert!(spec.boundary.neumann(x, n, t, 2).is_err());
        }
    }

    #[test]
    fn coefficient_gradients_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for name in ["heat_fgm", "inverse_fgm", "inverse_poly", "longtime_fgm"] {
            let (spec, _) = builtin_case(name).unwrap();
            let Physics::Heat { rhoc, kappa } = &spec.physics else {
                unreachable!()
            };
            for field in [rhoc, kappa] {
                for _ in 0..100 {
                    let x: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
                    let c = field.eval(x, 0.0);
                    assert!(c.value > 0.0);
                    for i in 0..3 {
                        let mut xp = x;
                        let mut xm = x;
                        xp[i] += h;
                        xm[i] -= h;
                        let fd = (field.eval(xp, 0.0).value - field.eval(xm, 0.0).value) / (2.0 * h);
                        assert!(
                            (fd - c.grad[i]).abs() <= 1e-7 * c.grad[i].abs().max(1.0),
                            "{name} ∂{i}: {fd} vs {}",
                            c.grad[i]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn spatial_jets_match_differences() {
        let h = 1e-4;
        for name in BUILTIN_CASES {
            let (_, case) = builtin_case(name).unwrap();
            let x = [0.11, 0.23, 0.37];
            let j = case.u(x, 0.3);
            let mut lap = 0.0;
            for i in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let (fp, fm) = (case.u(xp, 0.3).value, case.u(xm, 0.3).value);
                let g = (fp - fm) / (2.0 * h);
                assert!((g - j.gradient[i]).abs() <= 1e-6 * (1.0 + g.abs()), "{name}");
                lap += (fp - 2.0 * j.value + fm) / (h * h);
            }
            assert!((lap - j.laplacian).abs() <= 1e-4 * (1.0 + lap.abs()), "{name}");
        }
    }

    #[test]
    fn spec_validation() {
        let (mut spec, _) = builtin_case("wave_linear").unwrap();
        spec.v0 = None;
        assert!(spec.validate().is_err());
        let (mut spec, _) = builtin_case("heat_fgm").unwrap();
        spec.time_interval = (1.0, 1.0);
        assert!(spec.validate().is_err());
    }
}
