//! Residuals and mean-square losses for the spectral-in-time networks, the
//! inverse variant with a parametrized material profile, and the
//! space-time PINN baseline.
//!
//! Every loss returns, next to its value, the adjoint `∂loss/∂jets` of the
//! network outputs, which `NetworkBundle::loss_gradient` turns into a
//! parameter gradient.

use ndarray::Array2;

use crate::error::{invalid, Result, SinnError};
use crate::geometry::{PointSet, Tag};
use crate::inverse::{add_noise, InverseParams, PolyBasis};
use crate::net::{BatchJets, Jet2, JetLayout};
use crate::problem::{bc_data_derivatives, Coefficient, Kind, Physics, ProblemSpec};
use crate::quadrature::{map_nodes, SpectralOperator};
use crate::train::{CarriedState, PrevJets};

/// Per-node loss terms; `initial` is only used by the PINN baseline.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossBreakdown {
    pub pde: Vec<f64>,
    pub dirichlet: Vec<f64>,
    pub neumann: Vec<f64>,
    pub initial: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn zeros(nodes: usize) -> Self {
        LossBreakdown {
            pde: vec![0.0; nodes],
            dirichlet: vec![0.0; nodes],
            neumann: vec![0.0; nodes],
            initial: 0.0,
            total: 0.0,
        }
    }

    fn finish(mut self) -> Self {
        self.total = self.pde.iter().chain(&self.dirichlet).chain(&self.neumann).sum::<f64>()
            + self.initial;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    /// Divide the PDE and Neumann residuals by fixed material scales so that
    /// every loss term is measured in units of the network output: heat PDE
    /// by a mean `ρc`, heat Neumann by a mean `κ`, wave PDE by `w²` when
    /// `w² > 1`. Off means raw residuals.
    pub nondimensionalize: bool,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        ResidualOptions {
            nondimensionalize: true,
        }
    }
}

/// Constant factors applied to the PDE and Neumann residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualScales {
    pub pde: f64,
    pub neumann: f64,
}

impl ResidualScales {
    pub const UNIT: ResidualScales = ResidualScales {
        pde: 1.0,
        neumann: 1.0,
    };

    /// Scales for `physics` with heat coefficients averaged over `samples`
    /// of `(x, u)`.
    pub fn new(physics: &Physics, opts: ResidualOptions, samples: &[([f64; 3], f64)]) -> Self {
        if !opts.nondimensionalize {
            return Self::UNIT;
        }
        let inverse_mean = |f: &dyn Fn([f64; 3], f64) -> f64| {
            let m = samples.iter().map(|&(x, u)| f(x, u).abs()).sum::<f64>() / samples.len().max(1) as f64;
            if m > 0.0 && m.is_finite() {
                1.0 / m
            } else {
                1.0
            }
        };
        match physics {
            Physics::Heat { rhoc, kappa } => ResidualScales {
                pde: inverse_mean(&|x, u| rhoc.eval(x, u).value),
                neumann: inverse_mean(&|x, u| kappa.eval(x, u).value),
            },
            Physics::Wave { speed_sq, .. } => ResidualScales {
                pde: if *speed_sq > 1.0 { 1.0 / speed_sq } else { 1.0 },
                neumann: 1.0,
            },
        }
    }
}

/// Sensitivity of a residual to the jet of `u` and to its time derivative.
#[derive(Debug, Clone, Copy, Default)]
struct Sens {
    value: f64,
    grad: [f64; 3],
    lap: f64,
    time: f64,
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `∇·(κ∇u) + f − ρc·u_t` for coefficients already evaluated at `u`.
/// Assumes `κ` and `ρc` are at most affine in `u`.
fn heat_residual(k: &Coefficient, r: &Coefficient, u: &Jet2, ut: f64, f: f64) -> (f64, Sens) {
    let gk = [0, 1, 2].map(|i| k.grad[i] + k.du * u.gradient[i]);
    let res = dot(gk, u.gradient) + k.value * u.laplacian + f - r.value * ut;
    let sens = Sens {
        value: k.du * u.laplacian - r.du * ut,
        grad: [0, 1, 2].map(|i| k.grad[i] + 2.0 * k.du * u.gradient[i]),
        lap: k.value,
        time: -r.value,
    };
    (res, sens)
}

/// `w²Δu − N(u) + f − u_tt`.
fn wave_residual(physics: &Physics, u: &Jet2, utt: f64, f: f64) -> (f64, Sens) {
    let Physics::Wave {
        speed_sq,
        nonlinearity,
    } = physics
    else {
        unreachable!("wave residual on heat physics")
    };
    let (n, dn) = nonlinearity.eval(u.value);
    let res = speed_sq * u.laplacian - n + f - utt;
    let sens = Sens {
        value: -dn,
        grad: [0.0; 3],
        lap: *speed_sq,
        time: -1.0,
    };
    (res, sens)
}

fn scaled((r, s): (f64, Sens), c: f64) -> (f64, Sens) {
    (
        c * r,
        Sens {
            value: c * s.value,
            grad: s.grad.map(|g| c * g),
            lap: c * s.lap,
            time: c * s.time,
        },
    )
}

/// `u` at every node of a subinterval from the carried state and the nodal
/// integrands: `u_prev + dt·S1·U` (heat) or
/// `u_prev + v_prev·(T_j − t_start) + dt²·S2·U` (wave).
pub fn reconstruct(
    kind: Kind,
    op: &SpectralOperator,
    prev: &PrevJets,
    nodal: &[Jet2],
    dt: f64,
) -> Vec<Jet2> {
    let xi = op.rule().nodes();
    (0..op.nodes())
        .map(|j| {
            let (row, c, base) = match kind {
                Kind::Heat => (op.single_row(j), dt, prev.u),
                Kind::Wave => (
                    op.double_row(j),
                    dt * dt,
                    prev.u.add_scaled(0.5 * dt * (xi[j] + 1.0), &prev.v),
                ),
            };
            row.iter()
                .zip(nodal)
                .fold(base, |acc, (s, uk)| acc.add_scaled(c * s, uk))
        })
        .collect()
}

fn physics_coefficients(physics: &Physics, x: [f64; 3], u: f64) -> (Coefficient, Coefficient) {
    match physics {
        Physics::Heat { rhoc, kappa } => (kappa.eval(x, u), rhoc.eval(x, u)),
        Physics::Wave { .. } => unreachable!("coefficients requested for wave physics"),
    }
}

/// Unscaled PDE residual at every node for one point, with the nodal
/// integrands given.
pub fn pde_residuals(
    spec: &ProblemSpec,
    op: &SpectralOperator,
    prev: &PrevJets,
    nodal: &[Jet2],
    x: [f64; 3],
    t_start: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let times = map_nodes(op.rule(), t_start, t_start + dt)?;
    let u = reconstruct(spec.kind(), op, prev, nodal, dt);
    let out: Vec<f64> = (0..op.nodes())
        .map(|j| {
            let f = spec.source(x, times[j]);
            match spec.kind() {
                Kind::Heat => {
                    let (k, r) = physics_coefficients(&spec.physics, x, u[j].value);
                    heat_residual(&k, &r, &u[j], nodal[j].value, f).0
                }
                Kind::Wave => wave_residual(&spec.physics, &u[j], nodal[j].value, f).0,
            }
        })
        .collect();
    if let Some(j) = out.iter().position(|r| !r.is_finite()) {
        return Err(SinnError::NonFinite {
            point: j,
            context: format!("PDE residual at node {j}, x = {x:?}"),
        });
    }
    Ok(out)
}

/// Unscaled boundary residual at node time `t` from the nodal integrand `big_u` and the
/// reconstructed `u` (only used by the `u`-dependent heat flux).
pub fn bc_residual(
    spec: &ProblemSpec,
    tag: Tag,
    x: [f64; 3],
    normal: [f64; 3],
    big_u: &Jet2,
    u: &Jet2,
    t: f64,
) -> Result<f64> {
    let (ubar, qbar) = bc_data_derivatives(spec, x, normal, t)?;
    Ok(match tag {
        Tag::Dirichlet => big_u.value - ubar,
        Tag::Neumann => match &spec.physics {
            Physics::Heat { kappa, .. } => {
                let k = kappa.eval(x, u.value);
                k.value * dot(big_u.gradient, normal)
                    + k.du * big_u.value * dot(u.gradient, normal)
                    + qbar
            }
            Physics::Wave { .. } => dot(big_u.gradient, normal) - qbar,
        },
    })
}

struct InverseData {
    interior_terms: Vec<Vec<(f64, [f64; 3])>>,
    neumann_terms: Vec<Vec<(f64, [f64; 3])>>,
}

/// All fixed data of one subinterval's training problem: points, carried
/// state, sources and boundary data at the node times.
pub struct SinnLoss {
    physics: Physics,
    kind: Kind,
    scales: ResidualScales,
    op: SpectralOperator,
    dt: f64,
    times: Vec<f64>,
    interior: Vec<[f64; 3]>,
    prev_interior: Vec<PrevJets>,
    /// `source[i * p + j]`.
    source: Vec<f64>,
    dirichlet: Vec<[f64; 3]>,
    dirichlet_data: Vec<f64>,
    neumann: Vec<([f64; 3], [f64; 3])>,
    prev_neumann: Vec<PrevJets>,
    neumann_data: Vec<f64>,
    inputs: Array2<f64>,
    inverse: Option<InverseData>,
}

impl SinnLoss {
    /// Forward problem on `points` over `[state.t_start(), + dt]`.
    pub fn new(
        spec: &ProblemSpec,
        state: &CarriedState,
        op: &SpectralOperator,
        dt: f64,
        points: &PointSet,
        opts: ResidualOptions,
    ) -> Result<Self> {
        let dirichlet: Vec<_> = points.with_tag(Tag::Dirichlet).map(|b| b.point).collect();
        let neumann: Vec<_> = points
            .with_tag(Tag::Neumann)
            .map(|b| (b.point, b.normal))
            .collect();
        let mut loss = Self::assemble(spec, state, op, dt, &points.interior, dirichlet, neumann, opts)?;
        let order = spec.physics.order();
        loss.neumann_data = loss.node_data(|x, t| {
            let (x, n) = x;
            spec.boundary.neumann(x, n, t, order)
        }, &loss.neumann.clone())?;
        Ok(loss)
    }

    /// Inverse problem: Dirichlet data on every boundary point, Neumann data
    /// only on `overspecified`, perturbed by multiplicative noise.
    #[allow(clippy::too_many_arguments)]
    pub fn inverse(
        spec: &ProblemSpec,
        state: &CarriedState,
        op: &SpectralOperator,
        dt: f64,
        points: &PointSet,
        overspecified: &[usize],
        noise: f64,
        noise_seed: u64,
        basis: &PolyBasis,
        opts: ResidualOptions,
    ) -> Result<Self> {
        if spec.kind() != Kind::Heat {
            return Err(invalid("inverse mode supports heat problems only"));
        }
        let dirichlet: Vec<_> = points.boundary.iter().map(|b| b.point).collect();
        let neumann = overspecified
            .iter()
            .map(|&i| {
                points
                    .boundary
                    .get(i)
                    .map(|b| (b.point, b.normal))
                    .ok_or_else(|| invalid(format!("overspecified index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut loss = Self::assemble(spec, state, op, dt, &points.interior, dirichlet, neumann, opts)?;
        let clean = loss.node_data(|(x, n), t| spec.boundary.neumann(x, n, t, 1), &loss.neumann.clone())?;
        loss.neumann_data = add_noise(&clean, noise, noise_seed)?;
        // the material is unknown, so the scales come from the data instead:
        // source and flux magnitudes relative to the Dirichlet data
        loss.scales = if opts.nondimensionalize {
            let u = rms(&loss.dirichlet_data);
            let ratio = |v: &[f64]| {
                let r = u / rms(v);
                if r > 0.0 && r.is_finite() {
                    r
                } else {
                    1.0
                }
            };
            ResidualScales {
                pde: ratio(&loss.source),
                neumann: ratio(&loss.neumann_data),
            }
        } else {
            ResidualScales::UNIT
        };
        loss.inverse = Some(InverseData {
            interior_terms: loss.interior.iter().map(|&x| basis.terms_at(x)).collect(),
            neumann_terms: loss.neumann.iter().map(|&(x, _)| basis.terms_at(x)).collect(),
        });
        Ok(loss)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        spec: &ProblemSpec,
        state: &CarriedState,
        op: &SpectralOperator,
        dt: f64,
        interior: &[[f64; 3]],
        dirichlet: Vec<[f64; 3]>,
        neumann: Vec<([f64; 3], [f64; 3])>,
        opts: ResidualOptions,
    ) -> Result<Self> {
        if interior.is_empty() {
            return Err(invalid("no interior collocation points"));
        }
        let t_start = state.t_start();
        let times = map_nodes(op.rule(), t_start, t_start + dt)?;
        let neumann_points: Vec<[f64; 3]> = neumann.iter().map(|&(x, _)| x).collect();
        let all: Vec<[f64; 3]> = interior
            .iter()
            .chain(&dirichlet)
            .chain(&neumann_points)
            .copied()
            .collect();
        let mut loss = SinnLoss {
            physics: spec.physics.clone(),
            kind: spec.kind(),
            scales: ResidualScales::UNIT,
            op: op.clone(),
            dt,
            times,
            interior: interior.to_vec(),
            prev_interior: state.prev_at(interior),
            source: Vec::new(),
            dirichlet,
            dirichlet_data: Vec::new(),
            prev_neumann: state.prev_at(&neumann_points),
            neumann,
            neumann_data: Vec::new(),
            inputs: crate::net::spatial_inputs(&all),
            inverse: None,
        };
        let samples: Vec<([f64; 3], f64)> = loss
            .interior
            .iter()
            .zip(&loss.prev_interior)
            .map(|(&x, pj)| (x, pj.u.value))
            .collect();
        loss.scales = ResidualScales::new(&spec.physics, opts, &samples);
        loss.source = loss.node_data(|x, t| Ok(spec.source(x, t)), &loss.interior.clone())?;
        let order = spec.physics.order();
        loss.dirichlet_data =
            loss.node_data(|x, t| spec.boundary.dirichlet(x, t, order), &loss.dirichlet.clone())?;
        Ok(loss)
    }

    fn node_data<P: Copy>(&self, f: impl Fn(P, f64) -> Result<f64>, points: &[P]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(points.len() * self.times.len());
        for &x in points {
            for &t in &self.times {
                out.push(f(x, t)?);
            }
        }
        Ok(out)
    }

    /// Inputs `(3, N_PDE + N_DBC + N_NBC)` at which the bundle is evaluated.
    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    pub fn node_times(&self) -> &[f64] {
        &self.times
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.interior.len(), self.dirichlet.len(), self.neumann.len())
    }

    /// Neumann data at the node times, `[i * p + j]`.
    pub fn neumann_data(&self) -> &[f64] {
        &self.neumann_data
    }

    /// Root-mean-square of the Dirichlet data, a natural output scale for
    /// the networks.
    pub fn data_scale(&self) -> f64 {
        let pick = if self.dirichlet_data.is_empty() {
            &self.neumann_data
        } else {
            &self.dirichlet_data
        };
        let r = rms(pick);
        if r > 0.0 && r.is_finite() {
            r
        } else {
            1.0
        }
    }

    pub fn evaluate(&self, jets: &[BatchJets]) -> Result<(LossBreakdown, Vec<BatchJets>)> {
        let (b, adj, _) = self.evaluate_impl(jets, None)?;
        Ok((b, adj))
    }

    /// Loss, network adjoints, and gradient with respect to `[α…, λ₁, λ₂]`.
    pub fn evaluate_inverse(
        &self,
        jets: &[BatchJets],
        params: &InverseParams,
    ) -> Result<(LossBreakdown, Vec<BatchJets>, Vec<f64>)> {
        if self.inverse.is_none() {
            return Err(invalid("loss was not built for an inverse problem"));
        }
        self.evaluate_impl(jets, Some(params))
    }

    fn evaluate_impl(
        &self,
        jets: &[BatchJets],
        params: Option<&InverseParams>,
    ) -> Result<(LossBreakdown, Vec<BatchJets>, Vec<f64>)> {
        let p = self.op.nodes();
        if jets.len() != p {
            return Err(SinnError::LengthMismatch {
                expected: p,
                actual: jets.len(),
            });
        }
        let (ni, nd, nn) = self.counts();
        let layout = JetLayout::spatial();
        let mut adj: Vec<BatchJets> = (0..p).map(|_| BatchJets::zeros(&layout, ni + nd + nn)).collect();
        let mut loss = LossBreakdown::zeros(p);
        let mut pgrad = params.map_or(Vec::new(), |q| vec![0.0; q.len()]);
        let (c, matrix): (f64, Vec<&[f64]>) = match self.kind {
            Kind::Heat => (self.dt, (0..p).map(|j| self.op.single_row(j)).collect()),
            Kind::Wave => (self.dt * self.dt, (0..p).map(|j| self.op.double_row(j)).collect()),
        };
        let nodal_at = |col: usize| -> Vec<Jet2> {
            jets.iter()
                .map(|jk| {
                    let d = jk.data();
                    Jet2 {
                        value: d[[0, col]],
                        gradient: [d[[1, col]], d[[2, col]], d[[3, col]]],
                        laplacian: d[[4, col]],
                    }
                })
                .collect()
        };
        // pushes adjoints of the reconstructed u_j back onto the nodal jets
        let scatter = |adj: &mut [BatchJets], col: usize, au: &[Sens]| {
            for k in 0..p {
                let mut s = Sens::default();
                for j in 0..p {
                    let w = c * matrix[j][k];
                    s.value += w * au[j].value;
                    for i in 0..3 {
                        s.grad[i] += w * au[j].grad[i];
                    }
                    s.lap += w * au[j].lap;
                }
                let d = adj[k].data_mut();
                d[[0, col]] += s.value;
                for i in 0..3 {
                    d[[1 + i, col]] += s.grad[i];
                }
                d[[4, col]] += s.lap;
            }
        };
        let material = |terms: &[(f64, [f64; 3])], q: &InverseParams| -> (f64, [f64; 3]) {
            let mut d = 0.0;
            let mut g = [0.0; 3];
            for (a, (v, gv)) in q.alpha.iter().zip(terms) {
                d += a * v;
                for i in 0..3 {
                    g[i] += a * gv[i];
                }
            }
            (d, g)
        };

        let mut au = vec![Sens::default(); p];
        for i in 0..ni {
            let x = self.interior[i];
            let nodal = nodal_at(i);
            let u = reconstruct(self.kind, &self.op, &self.prev_interior[i], &nodal, self.dt);
            let inv = params.map(|q| {
                let terms = &self.inverse.as_ref().expect("inverse data").interior_terms[i];
                (q, terms, material(terms, q))
            });
            for j in 0..p {
                let f = self.source[i * p + j];
                let (r, s) = match self.kind {
                    Kind::Heat => {
                        let (k, rc) = match inv {
                            Some((q, _, (d, g))) => (
                                Coefficient {
                                    value: q.lambda1 * d,
                                    grad: g.map(|v| q.lambda1 * v),
                                    du: 0.0,
                                },
                                Coefficient {
                                    value: q.lambda2 * d,
                                    grad: g.map(|v| q.lambda2 * v),
                                    du: 0.0,
                                },
                            ),
                            None => physics_coefficients(&self.physics, x, u[j].value),
                        };
                        heat_residual(&k, &rc, &u[j], nodal[j].value, f)
                    }
                    Kind::Wave => wave_residual(&self.physics, &u[j], nodal[j].value, f),
                };
                let c = self.scales.pde;
                let (r, s) = scaled((r, s), c);
                if !r.is_finite() {
                    return Err(SinnError::NonFinite {
                        point: i,
                        context: format!("PDE residual at node {j}, x = {x:?}"),
                    });
                }
                loss.pde[j] += r * r / ni as f64;
                let a = 2.0 * r / ni as f64;
                au[j] = Sens {
                    value: a * s.value,
                    grad: s.grad.map(|g| a * g),
                    lap: a * s.lap,
                    time: 0.0,
                };
                adj[j].data_mut()[[0, i]] += a * s.time;
                if let Some((q, terms, (d, g))) = inv {
                    let a = a * c;
                    let m = q.alpha.len();
                    let uj = &u[j];
                    let big_u = nodal[j].value;
                    pgrad[m] += a * (dot(g, uj.gradient) + d * uj.laplacian);
                    pgrad[m + 1] -= a * d * big_u;
                    for (t, (bv, bg)) in terms.iter().enumerate() {
                        pgrad[t] += a
                            * (q.lambda1 * (dot(*bg, uj.gradient) + bv * uj.laplacian)
                                - q.lambda2 * bv * big_u);
                    }
                }
            }
            scatter(&mut adj, i, &au);
        }

        for i in 0..nd {
            let col = ni + i;
            for j in 0..p {
                let r = jets[j].data()[[0, col]] - self.dirichlet_data[i * p + j];
                loss.dirichlet[j] += r * r / nd as f64;
                adj[j].data_mut()[[0, col]] += 2.0 * r / nd as f64;
            }
        }

        for i in 0..nn {
            let col = ni + nd + i;
            let (x, n) = self.neumann[i];
            let nodal = nodal_at(col);
            let u = reconstruct(self.kind, &self.op, &self.prev_neumann[i], &nodal, self.dt);
            let inv = params.map(|q| {
                let terms = &self.inverse.as_ref().expect("inverse data").neumann_terms[i];
                (q, terms, material(terms, q).0)
            });
            let mut any_u = false;
            for j in 0..p {
                let du_n = dot(nodal[j].gradient, n);
                let data = self.neumann_data[i * p + j];
                let (r, k) = match self.kind {
                    Kind::Heat => {
                        let k = match inv {
                            Some((q, _, d)) => Coefficient {
                                value: q.lambda1 * d,
                                grad: [0.0; 3],
                                du: 0.0,
                            },
                            None => physics_coefficients(&self.physics, x, u[j].value).0,
                        };
                        let un = dot(u[j].gradient, n);
                        (k.value * du_n + k.du * nodal[j].value * un + data, k)
                    }
                    Kind::Wave => (
                        du_n - data,
                        Coefficient {
                            value: 1.0,
                            grad: [0.0; 3],
                            du: 0.0,
                        },
                    ),
                };
                let c = self.scales.neumann;
                loss.neumann[j] += c * c * r * r / nn as f64;
                let a = 2.0 * c * c * r / nn as f64;
                {
                    let d = adj[j].data_mut();
                    for m in 0..3 {
                        d[[1 + m, col]] += a * k.value * n[m];
                    }
                    d[[0, col]] += a * k.du * dot(u[j].gradient, n);
                }
                au[j] = Sens {
                    value: a * k.du * du_n,
                    grad: n.map(|v| a * k.du * nodal[j].value * v),
                    lap: 0.0,
                    time: 0.0,
                };
                any_u |= k.du != 0.0;
                if let Some((q, terms, d)) = inv {
                    let m = q.alpha.len();
                    pgrad[m] += a * d * du_n;
                    for (t, (bv, _)) in terms.iter().enumerate() {
                        pgrad[t] += a * q.lambda1 * bv * du_n;
                    }
                }
            }
            if any_u {
                scatter(&mut adj, col, &au);
            }
        }
        Ok((loss.finish(), adj, pgrad))
    }
}

/// Evenly spaced samples `t0 + (t1 − t0)·i/n`, `i = 1..=n`.
pub fn pinn_time_samples(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect()
}

/// Loss of a single space-time network over PDE, boundary and initial
/// conditions at a fixed set of time samples.
pub struct PinnLoss {
    physics: Physics,
    kind: Kind,
    scales: ResidualScales,
    samples: usize,
    n_interior: usize,
    n_dirichlet: usize,
    n_neumann: usize,
    n_initial: usize,
    source: Vec<f64>,
    dirichlet_data: Vec<f64>,
    neumann: Vec<([f64; 3], [f64; 3])>,
    neumann_data: Vec<f64>,
    interior: Vec<[f64; 3]>,
    initial_u: Vec<f64>,
    initial_v: Vec<f64>,
    inputs: Array2<f64>,
}

impl PinnLoss {
    pub fn new(
        spec: &ProblemSpec,
        points: &PointSet,
        times: &[f64],
        opts: ResidualOptions,
    ) -> Result<Self> {
        if times.is_empty() || points.interior.is_empty() {
            return Err(invalid("PINN loss needs time samples and interior points"));
        }
        let t0 = spec.time_interval.0;
        let dirichlet: Vec<[f64; 3]> = points.with_tag(Tag::Dirichlet).map(|b| b.point).collect();
        let neumann: Vec<_> = points
            .with_tag(Tag::Neumann)
            .map(|b| (b.point, b.normal))
            .collect();
        let mut cols: Vec<[f64; 4]> = Vec::new();
        let mut source = Vec::new();
        for &t in times {
            for &x in &points.interior {
                cols.push([x[0], x[1], x[2], t]);
                source.push(spec.source(x, t));
            }
        }
        let mut dirichlet_data = Vec::new();
        for &t in times {
            for &x in &dirichlet {
                cols.push([x[0], x[1], x[2], t]);
                dirichlet_data.push(spec.boundary.dirichlet(x, t, 0)?);
            }
        }
        let mut neumann_data = Vec::new();
        for &t in times {
            for &(x, n) in &neumann {
                cols.push([x[0], x[1], x[2], t]);
                neumann_data.push(spec.boundary.neumann(x, n, t, 0)?);
            }
        }
        let mut initial_u = Vec::new();
        let mut initial_v = Vec::new();
        for &x in &points.interior {
            cols.push([x[0], x[1], x[2], t0]);
            initial_u.push((spec.u0)(x).value);
            if let Some(v0) = &spec.v0 {
                initial_v.push(v0(x).value);
            }
        }
        let inputs = Array2::from_shape_fn((4, cols.len()), |(i, c)| cols[c][i]);
        let u0_samples: Vec<([f64; 3], f64)> = points.interior.iter().zip(&initial_u).map(|(&x, &u)| (x, u)).collect();
        Ok(PinnLoss {
            physics: spec.physics.clone(),
            kind: spec.kind(),
            scales: ResidualScales::new(&spec.physics, opts, &u0_samples),
            samples: times.len(),
            n_interior: points.interior.len(),
            n_dirichlet: dirichlet.len(),
            n_neumann: neumann.len(),
            n_initial: points.interior.len(),
            source,
            dirichlet_data,
            neumann,
            neumann_data,
            interior: points.interior.clone(),
            initial_u,
            initial_v,
            inputs,
        })
    }

    /// Inputs `(4, columns)` at which the network is evaluated.
    pub fn inputs(&self) -> &Array2<f64> {
        &self.inputs
    }

    /// Root-mean-square of the Dirichlet data (fallback: initial data).
    pub fn data_scale(&self) -> f64 {
        let pick = if self.dirichlet_data.is_empty() {
            &self.initial_u
        } else {
            &self.dirichlet_data
        };
        let r = rms(pick);
        if r > 0.0 && r.is_finite() {
            r
        } else {
            1.0
        }
    }

    pub fn evaluate(&self, jets: &[BatchJets]) -> Result<(LossBreakdown, Vec<BatchJets>)> {
        if jets.len() != 1 {
            return Err(SinnError::LengthMismatch {
                expected: 1,
                actual: jets.len(),
            });
        }
        let j = &jets[0];
        let d = j.data();
        let mut adj = BatchJets::zeros(j.layout(), j.points());
        let mut loss = LossBreakdown::zeros(self.samples);
        let jet_at = |col: usize| Jet2 {
            value: d[[0, col]],
            gradient: [d[[1, col]], d[[2, col]], d[[3, col]]],
            laplacian: d[[5, col]],
        };
        let (ni, nd, nn) = (self.n_interior, self.n_dirichlet, self.n_neumann);
        let ns = self.samples;
        let mut col = 0;
        for s in 0..ns {
            for i in 0..ni {
                let x = self.interior[i];
                let u = jet_at(col);
                let f = self.source[s * ni + i];
                let (r, sens, time_row) = match self.kind {
                    Kind::Heat => {
                        let (k, rc) = physics_coefficients(&self.physics, x, u.value);
                        let (r, sens) = heat_residual(&k, &rc, &u, d[[4, col]], f);
                        (r, sens, 4)
                    }
                    Kind::Wave => {
                        let (r, sens) = wave_residual(&self.physics, &u, d[[6, col]], f);
                        (r, sens, 6)
                    }
                };
                let (r, sens) = scaled((r, sens), self.scales.pde);
                if !r.is_finite() {
                    return Err(SinnError::NonFinite {
                        point: col,
                        context: "PINN PDE residual".into(),
                    });
                }
                loss.pde[s] += r * r / ni as f64;
                let a = 2.0 * r / ni as f64;
                let ad = adj.data_mut();
                ad[[0, col]] += a * sens.value;
                for m in 0..3 {
                    ad[[1 + m, col]] += a * sens.grad[m];
                }
                ad[[5, col]] += a * sens.lap;
                ad[[time_row, col]] += a * sens.time;
                col += 1;
            }
        }
        for s in 0..ns {
            for i in 0..nd {
                let r = d[[0, col]] - self.dirichlet_data[s * nd + i];
                loss.dirichlet[s] += r * r / nd as f64;
                adj.data_mut()[[0, col]] += 2.0 * r / nd as f64;
                col += 1;
            }
        }
        for s in 0..ns {
            for i in 0..nn {
                let (x, n) = self.neumann[i];
                let u = jet_at(col);
                let un = dot(u.gradient, n);
                let q = self.neumann_data[s * nn + i];
                let (r, dr_dgrad, dr_du) = match self.kind {
                    Kind::Heat => {
                        let (k, _) = physics_coefficients(&self.physics, x, u.value);
                        (k.value * un + q, k.value, k.du * un)
                    }
                    Kind::Wave => (un - q, 1.0, 0.0),
                };
                let c = self.scales.neumann;
                loss.neumann[s] += c * c * r * r / nn as f64;
                let a = 2.0 * c * c * r / nn as f64;
                let ad = adj.data_mut();
                for m in 0..3 {
                    ad[[1 + m, col]] += a * dr_dgrad * n[m];
                }
                ad[[0, col]] += a * dr_du;
                col += 1;
            }
        }
        let n0 = self.n_initial as f64;
        for i in 0..self.n_initial {
            let r = d[[0, col]] - self.initial_u[i];
            loss.initial += r * r / n0;
            adj.data_mut()[[0, col]] += 2.0 * r / n0;
            if self.kind == Kind::Wave {
                let rv = d[[4, col]] - self.initial_v[i];
                loss.initial += rv * rv / n0;
                adj.data_mut()[[4, col]] += 2.0 * rv / n0;
            }
            col += 1;
        }
        Ok((loss.finish(), vec![adj]))
    }
}
