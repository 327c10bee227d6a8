//! The running solution carried across time-marching subintervals.

use std::sync::Arc;

use crate::net::{spatial_inputs, Jet2, NetworkBundle};
use crate::problem::{Kind, ManufacturedCase, ProblemSpec, ScalarField};
use crate::quadrature::SpectralOperator;

/// `u` (and `u_t` for wave problems) at the start of a subinterval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrevJets {
    pub u: Jet2,
    /// Zero for heat problems.
    pub v: Jet2,
}

/// Jets of the nodal integrands `U_k` at arbitrary points.
pub trait NodalField: Send + Sync {
    fn nodes(&self) -> usize;

    /// `out[k][i]` is the jet of `U_k` at `points[i]`.
    fn nodal_jets(&self, points: &[[f64; 3]]) -> Vec<Vec<Jet2>>;
}

impl NodalField for NetworkBundle {
    fn nodes(&self) -> usize {
        self.len()
    }

    fn nodal_jets(&self, points: &[[f64; 3]]) -> Vec<Vec<Jet2>> {
        if points.is_empty() {
            return vec![Vec::new(); self.len()];
        }
        self.eval(&spatial_inputs(points))
            .iter()
            .map(|j| {
                (0..points.len())
                    .map(|i| Jet2 {
                        value: j.value()[i],
                        gradient: [j.grad(0)[i], j.grad(1)[i], j.grad(2)[i]],
                        laplacian: j.second(0)[i],
                    })
                    .collect()
            })
            .collect()
    }
}

/// Exact nodal integrands of a manufactured case: `∂^order u/∂t^order` at
/// the node times.
#[derive(Debug, Clone)]
pub struct ExactNodal {
    pub case: ManufacturedCase,
    pub times: Vec<f64>,
    pub order: usize,
}

impl NodalField for ExactNodal {
    fn nodes(&self) -> usize {
        self.times.len()
    }

    fn nodal_jets(&self, points: &[[f64; 3]]) -> Vec<Vec<Jet2>> {
        self.times
            .iter()
            .map(|&t| {
                points
                    .iter()
                    .map(|&x| self.case.time_derivative(x, t, self.order))
                    .collect()
            })
            .collect()
    }
}

/// A completed subinterval.
#[derive(Clone)]
pub struct Step {
    pub dt: f64,
    pub field: Arc<dyn NodalField>,
    pub op: SpectralOperator,
}

/// Initial data plus every completed subinterval; `u` at the current start
/// time is the initial value plus the end-of-interval integrals of each step.
#[derive(Clone)]
pub struct CarriedState {
    kind: Kind,
    u0: ScalarField,
    v0: Option<ScalarField>,
    t0: f64,
    history: Vec<Step>,
}

impl CarriedState {
    pub fn new(spec: &ProblemSpec) -> Self {
        CarriedState {
            kind: spec.kind(),
            u0: spec.u0.clone(),
            v0: spec.v0.clone(),
            t0: spec.time_interval.0,
            history: Vec::new(),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn history(&self) -> &[Step] {
        &self.history
    }

    /// Start time of the next subinterval.
    pub fn t_start(&self) -> f64 {
        self.t0 + self.history.iter().map(|s| s.dt).sum::<f64>()
    }

    pub fn prev_at(&self, points: &[[f64; 3]]) -> Vec<PrevJets> {
        let mut out: Vec<PrevJets> = points
            .iter()
            .map(|&x| PrevJets {
                u: (self.u0)(x),
                v: self.v0.as_ref().map_or(Jet2::ZERO, |v0| v0(x)),
            })
            .collect();
        for step in &self.history {
            let nodal = step.field.nodal_jets(points);
            let (ws, we) = (step.op.end_single(), step.op.end_double());
            for (i, prev) in out.iter_mut().enumerate() {
                let mut du = Jet2::ZERO;
                let mut dv = Jet2::ZERO;
                for (k, u_k) in nodal.iter().enumerate() {
                    match self.kind {
                        Kind::Heat => du = du.add_scaled(step.dt * ws[k], &u_k[i]),
                        Kind::Wave => {
                            du = du.add_scaled(step.dt * step.dt * we[k], &u_k[i]);
                            dv = dv.add_scaled(step.dt * ws[k], &u_k[i]);
                        }
                    }
                }
                if self.kind == Kind::Wave {
                    du = du.add_scaled(step.dt, &prev.v);
                }
                prev.u = prev.u + du;
                prev.v = prev.v + dv;
            }
        }
        out
    }

    pub fn push(&mut self, dt: f64, field: Arc<dyn NodalField>, op: SpectralOperator) {
        self.history.push(Step { dt, field, op });
    }
}

/// State after one more completed subinterval.
pub fn advance_state(
    state: &CarriedState,
    field: Arc<dyn NodalField>,
    op: &SpectralOperator,
    dt: f64,
) -> CarriedState {
    let mut next = state.clone();
    next.push(dt, field, op.clone());
    next
}
