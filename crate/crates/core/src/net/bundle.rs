use std::io::{Read, Write};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Activation, BatchJets, Jet2, JetLayout, Mlp, Tape};
use crate::error::{invalid, Result, SinnError};

/// Affine input map and output scale wrapped around every sub-network:
/// `U(x) = output · N((x − shift) ⊙ scale)`.
///
/// All inputs inside one second-order group must share a scale, so group
/// sums of pure second derivatives transform by a single factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
    pub output: f64,
}

impl Normalization {
    pub fn identity(inputs: usize) -> Self {
        Normalization {
            shift: vec![0.0; inputs],
            scale: vec![1.0; inputs],
            output: 1.0,
        }
    }

    /// Factor mapping normalized-input jet channel `c` to physical units.
    fn channel_factors(&self, layout: &JetLayout) -> Vec<f64> {
        let mut f = vec![self.output];
        f.extend(self.scale.iter().map(|s| self.output * s));
        for g in layout.groups() {
            let s = self.scale[g[0]];
            f.push(self.output * s * s);
        }
        f
    }

    fn validate(&self, layout: &JetLayout) -> Result<()> {
        let n = layout.inputs();
        if self.shift.len() != n || self.scale.len() != n {
            return Err(invalid("normalization width does not match the inputs"));
        }
        let all = self.shift.iter().chain(&self.scale).chain([&self.output]);
        if all.clone().any(|v| !v.is_finite()) || self.scale.iter().any(|&s| s <= 0.0) {
            return Err(invalid("normalization factors must be finite, scales positive"));
        }
        if self.output == 0.0 {
            return Err(invalid("output scale must be non-zero"));
        }
        for g in layout.groups() {
            if g.iter().any(|&i| self.scale[i] != self.scale[g[0]]) {
                return Err(invalid("inputs in one second-order group need equal scales"));
            }
        }
        Ok(())
    }
}

/// `p` independent sub-networks with one architecture and activation.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkBundle {
    nets: Vec<Mlp>,
    layout: JetLayout,
    norm: Normalization,
    parallel: bool,
}

impl NetworkBundle {
    pub fn new(nets: Vec<Mlp>, layout: JetLayout, norm: Normalization) -> Result<Self> {
        let first = nets.first().ok_or_else(|| invalid("bundle needs at least one network"))?;
        if nets
            .iter()
            .any(|n| n.sizes() != first.sizes() || n.activation() != first.activation())
        {
            return Err(invalid("sub-networks must share architecture and activation"));
        }
        if first.input_dim() != layout.inputs() {
            return Err(invalid("network input width does not match the jet layout"));
        }
        norm.validate(&layout)?;
        Ok(NetworkBundle {
            nets,
            layout,
            norm,
            parallel: false,
        })
    }

    /// `count` Glorot-initialized networks drawn from one seeded stream.
    pub fn init(
        count: usize,
        sizes: &[usize],
        activation: Activation,
        layout: JetLayout,
        norm: Normalization,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nets = (0..count)
            .map(|_| Mlp::glorot(sizes, activation, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(nets, layout, norm)
    }

    /// Evaluate sub-networks on the rayon pool. Results are identical either
    /// way because each sub-network owns its slice of the gradient.
    pub fn set_parallel(&mut self, parallel: bool) {
        self.parallel = parallel;
    }

    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }

    pub fn nets(&self) -> &[Mlp] {
        &self.nets
    }

    pub fn layout(&self) -> &JetLayout {
        &self.layout
    }

    pub fn normalization(&self) -> &Normalization {
        &self.norm
    }

    pub fn activation(&self) -> Activation {
        self.nets[0].activation()
    }

    /// Sets the output scale and compensates in the output layers, leaving
    /// the represented functions unchanged.
    pub fn set_output_scale(&mut self, output: f64) -> Result<()> {
        if !(output.is_finite() && output > 0.0) {
            return Err(invalid(format!("output scale must be positive, got {output}")));
        }
        let factor = self.norm.output / output;
        for net in &mut self.nets {
            net.scale_output(factor);
        }
        self.norm.output = output;
        Ok(())
    }

    pub fn sizes(&self) -> &[usize] {
        self.nets[0].sizes()
    }

    pub fn params_per_net(&self) -> usize {
        self.nets[0].num_params()
    }

    pub fn num_params(&self) -> usize {
        self.len() * self.params_per_net()
    }

    /// Sub-network index, then layer, row-major weights, then biases.
    pub fn params_flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for net in &self.nets {
            net.write_params(&mut out);
        }
        out
    }

    pub fn params_load(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(SinnError::LengthMismatch {
                expected: self.num_params(),
                actual: params.len(),
            });
        }
        let mut at = 0;
        for net in &mut self.nets {
            at += net.read_params(&params[at..])?;
        }
        Ok(())
    }

    fn normalized(&self, inputs: &Array2<f64>) -> Array2<f64> {
        let mut x = inputs.clone();
        for (i, mut row) in x.rows_mut().into_iter().enumerate() {
            let (s, c) = (self.norm.shift[i], self.norm.scale[i]);
            row.mapv_inplace(|v| (v - s) * c);
        }
        x
    }

    fn rescale(&self, jets: &mut BatchJets) {
        let f = self.norm.channel_factors(&self.layout);
        for (c, mut row) in jets.data_mut().rows_mut().into_iter().enumerate() {
            row *= f[c];
        }
    }

    /// Jets of every sub-network at physical points, `inputs` shaped
    /// `(input_dim, points)`.
    pub fn eval(&self, inputs: &Array2<f64>) -> Vec<BatchJets> {
        self.eval_with_tape(inputs).0
    }

    pub fn eval_with_tape(&self, inputs: &Array2<f64>) -> (Vec<BatchJets>, Vec<Tape>) {
        let x = self.normalized(inputs);
        let run = |net: &Mlp| {
            let (mut jets, tape) = net.forward_jets(&self.layout, &x);
            self.rescale(&mut jets);
            (jets, tape)
        };
        if self.parallel {
            self.nets.par_iter().map(run).unzip()
        } else {
            self.nets.iter().map(run).unzip()
        }
    }

    /// Parameter gradient of `Σ_k Σ adjoint_k ⊙ jets_k`, flattened in
    /// `params_flatten` order.
    pub fn backward(&self, tapes: &[Tape], adjoints: &[BatchJets]) -> Vec<f64> {
        assert_eq!(tapes.len(), self.len());
        assert_eq!(adjoints.len(), self.len());
        let grad_one = |k: usize| {
            let mut adj = adjoints[k].clone();
            self.rescale(&mut adj);
            self.nets[k].backward_jets(&self.layout, &tapes[k], &adj)
        };
        let parts: Vec<Vec<f64>> = if self.parallel {
            (0..self.len()).into_par_iter().map(grad_one).collect()
        } else {
            (0..self.len()).map(grad_one).collect()
        };
        parts.concat()
    }

    /// Loss value and parameter gradient for a loss built from the jets of
    /// all sub-networks at `inputs`. `loss` returns the value together with
    /// `∂loss/∂jets` for each sub-network.
    pub fn loss_gradient<F>(&self, inputs: &Array2<f64>, loss: F) -> Result<(f64, Vec<f64>)>
    where
        F: FnOnce(&[BatchJets]) -> Result<(f64, Vec<BatchJets>)>,
    {
        let (jets, tapes) = self.eval_with_tape(inputs);
        let (value, adjoints) = loss(&jets)?;
        if adjoints.len() != self.len() {
            return Err(SinnError::LengthMismatch {
                expected: self.len(),
                actual: adjoints.len(),
            });
        }
        for adj in &adjoints {
            if let Some(point) = adj.first_non_finite() {
                return Err(SinnError::NonFinite {
                    point,
                    context: "loss adjoint".into(),
                });
            }
        }
        let grad = self.backward(&tapes, &adjoints);
        if grad.iter().any(|g| !g.is_finite()) {
            let point = jets
                .iter()
                .find_map(|j| j.first_non_finite())
                .unwrap_or(0);
            return Err(SinnError::NonFinite {
                point,
                context: "parameter gradient".into(),
            });
        }
        Ok((value, grad))
    }

    /// Single-point jet of sub-network `k` (spatial bundles only).
    pub fn jet(&self, k: usize, x: [f64; 3]) -> Jet2 {
        let n = &self.norm;
        let xi = [
            (x[0] - n.shift[0]) * n.scale[0],
            (x[1] - n.shift[1]) * n.scale[1],
            (x[2] - n.shift[2]) * n.scale[2],
        ];
        let j = self.nets[k].forward_jet(xi);
        Jet2 {
            value: n.output * j.value,
            gradient: [
                n.output * n.scale[0] * j.gradient[0],
                n.output * n.scale[1] * j.gradient[1],
                n.output * n.scale[2] * j.gradient[2],
            ],
            laplacian: n.output * n.scale[0] * n.scale[0] * j.laplacian,
        }
    }

    /// Plain output of sub-network `k` at a physical input.
    pub fn value(&self, k: usize, x: &[f64]) -> f64 {
        let xi: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| (v - self.norm.shift[i]) * self.norm.scale[i])
            .collect();
        self.norm.output * self.nets[k].forward(&xi)
    }
}

/// Packs points as the `(3, n)` input matrix expected by `eval`.
pub fn spatial_inputs(points: &[[f64; 3]]) -> Array2<f64> {
    Array2::from_shape_fn((3, points.len()), |(i, p)| points[p][i])
}

const MAGIC: &[u8; 8] = b"SINNCKPT";
const VERSION: u32 = 1;

fn put_u32(w: &mut impl Write, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64(w: &mut impl Write, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(get_u64(r)?))
}

impl NetworkBundle {
    /// Writes the checkpoint layout described in the crate README: magic,
    /// version, activation id, network count, layer sizes, jet layout id,
    /// normalization, then the flat little-endian parameter vector.
    pub fn write_checkpoint(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        put_u32(w, VERSION)?;
        put_u32(w, self.activation().id())?;
        put_u32(w, self.len() as u32)?;
        put_u32(w, self.sizes().len() as u32)?;
        for &s in self.sizes() {
            put_u32(w, s as u32)?;
        }
        put_u32(w, self.layout.id())?;
        for &v in self.norm.shift.iter().chain(&self.norm.scale) {
            put_f64(w, v)?;
        }
        put_f64(w, self.norm.output)?;
        let params = self.params_flatten();
        w.write_all(&(params.len() as u64).to_le_bytes())?;
        for v in params {
            put_f64(w, v)?;
        }
        Ok(())
    }

    pub fn read_checkpoint(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SinnError::Checkpoint("bad magic".into()));
        }
        let version = get_u32(r)?;
        if version != VERSION {
            return Err(SinnError::Checkpoint(format!("unsupported version {version}")));
        }
        let activation = Activation::from_id(get_u32(r)?)
            .ok_or_else(|| SinnError::Checkpoint("unknown activation id".into()))?;
        let count = get_u32(r)? as usize;
        let n_sizes = get_u32(r)? as usize;
        if n_sizes > 64 {
            return Err(SinnError::Checkpoint("implausible layer count".into()));
        }
        let sizes = (0..n_sizes)
            .map(|_| get_u32(r).map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let layout = JetLayout::from_id(get_u32(r)?)
            .ok_or_else(|| SinnError::Checkpoint("unknown jet layout".into()))?;
        let n_in = layout.inputs();
        let shift = (0..n_in).map(|_| get_f64(r)).collect::<Result<Vec<_>>>()?;
        let scale = (0..n_in).map(|_| get_f64(r)).collect::<Result<Vec<_>>>()?;
        let output = get_f64(r)?;
        let n_params = get_u64(r)? as usize;
        let nets = (0..count)
            .map(|_| Mlp::zeros(&sizes, activation))
            .collect::<Result<Vec<_>>>()?;
        let mut bundle = NetworkBundle::new(
            nets,
            layout,
            Normalization {
                shift,
                scale,
                output,
            },
        )?;
        if n_params != bundle.num_params() {
            return Err(SinnError::Checkpoint(format!(
                "parameter count {n_params} does not match architecture ({})",
                bundle.num_params()
            )));
        }
        let params = (0..n_params).map(|_| get_f64(r)).collect::<Result<Vec<_>>>()?;
        bundle.params_load(&params)?;
        Ok(bundle)
    }
}
