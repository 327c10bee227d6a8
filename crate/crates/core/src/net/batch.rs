//! Batched jet propagation and its reverse pass.
//!
//! A batch of `B` points is carried through the network as a stack of
//! channel blocks `[value | ∂_0 .. ∂_{D-1} | second_0 ..]`, each `B` columns
//! wide, so every dense layer is a single matrix product over the stack. The
//! reverse pass differentiates the propagated jets with respect to weights and
//! biases, which is what lets a loss built from Laplacians be trained.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView1, ArrayViewMut1};

use super::{Activation, Mlp};

/// Channel layout of a batch evaluation: `inputs` first derivatives plus one
/// channel per group, holding `Σ_{i ∈ group} ∂²/∂x_i²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetLayout {
    inputs: usize,
    groups: Vec<Vec<usize>>,
}

impl JetLayout {
    /// Three spatial inputs, one Laplacian channel.
    pub fn spatial() -> Self {
        JetLayout {
            inputs: 3,
            groups: vec![vec![0, 1, 2]],
        }
    }

    /// `(x, y, z, t)` inputs: spatial Laplacian and `∂²/∂t²` channels.
    pub fn space_time() -> Self {
        JetLayout {
            inputs: 4,
            groups: vec![vec![0, 1, 2], vec![3]],
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn channels(&self) -> usize {
        1 + self.inputs + self.groups.len()
    }

    pub(crate) fn id(&self) -> u32 {
        if *self == Self::spatial() {
            0
        } else {
            1
        }
    }

    pub(crate) fn from_id(id: u32) -> Option<Self> {
        match id {
            0 => Some(Self::spatial()),
            1 => Some(Self::space_time()),
            _ => None,
        }
    }
}

/// Jets of one scalar output at a batch of points, shape `(channels, points)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchJets {
    layout: JetLayout,
    data: Array2<f64>,
}

impl BatchJets {
    pub fn zeros(layout: &JetLayout, points: usize) -> Self {
        BatchJets {
            layout: layout.clone(),
            data: Array2::zeros((layout.channels(), points)),
        }
    }

    pub fn layout(&self) -> &JetLayout {
        &self.layout
    }

    pub fn points(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn value(&self) -> ArrayView1<'_, f64> {
        self.data.row(0)
    }

    pub fn value_mut(&mut self) -> ArrayViewMut1<'_, f64> {
        self.data.row_mut(0)
    }

    pub fn grad(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(1 + i)
    }

    pub fn grad_mut(&mut self, i: usize) -> ArrayViewMut1<'_, f64> {
        self.data.row_mut(1 + i)
    }

    pub fn second(&self, g: usize) -> ArrayView1<'_, f64> {
        self.data.row(1 + self.layout.inputs + g)
    }

    pub fn second_mut(&mut self, g: usize) -> ArrayViewMut1<'_, f64> {
        let row = 1 + self.layout.inputs + g;
        self.data.row_mut(row)
    }

    /// Index of the first point carrying a non-finite channel, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        (0..self.points()).find(|&p| self.data.column(p).iter().any(|v| !v.is_finite()))
    }
}

struct HiddenTape {
    z: Array2<f64>,
    d1: Array2<f64>,
    d2: Array2<f64>,
    d3: Array2<f64>,
}

/// Intermediate values kept from a forward jet pass for the reverse pass.
pub struct Tape {
    inputs: Vec<Array2<f64>>,
    hidden: Vec<HiddenTape>,
    points: usize,
}

fn input_stack(layout: &JetLayout, inputs: &Array2<f64>) -> Array2<f64> {
    let b = inputs.ncols();
    let mut h = Array2::zeros((layout.inputs, layout.channels() * b));
    h.slice_mut(s![.., 0..b]).assign(inputs);
    for i in 0..layout.inputs {
        h.slice_mut(s![i, (1 + i) * b..(2 + i) * b]).fill(1.0);
    }
    h
}

fn activate(
    act: Activation,
    layout: &JetLayout,
    z: &Array2<f64>,
    b: usize,
) -> (Array2<f64>, HiddenTapeParts) {
    let n = z.nrows();
    let d = layout.inputs;
    let mut a = Array2::zeros(z.raw_dim());
    let mut d1 = Array2::zeros((n, b));
    let mut d2 = Array2::zeros((n, b));
    let mut d3 = Array2::zeros((n, b));
    for r in 0..n {
        let zr = z.row(r);
        let zr = zr.as_slice().expect("standard layout");
        let mut ar = a.row_mut(r);
        let ar = ar.as_slice_mut().expect("standard layout");
        let (d1r, d2r, d3r) = (
            d1.row_mut(r).into_slice().unwrap(),
            d2.row_mut(r).into_slice().unwrap(),
            d3.row_mut(r).into_slice().unwrap(),
        );
        for p in 0..b {
            let [s0, s1, s2, s3] = act.eval3(zr[p]);
            ar[p] = s0;
            d1r[p] = s1;
            d2r[p] = s2;
            d3r[p] = s3;
        }
        for i in 0..d {
            let off = (1 + i) * b;
            for p in 0..b {
                ar[off + p] = d1r[p] * zr[off + p];
            }
        }
        for (g, members) in layout.groups.iter().enumerate() {
            let off = (1 + d + g) * b;
            for p in 0..b {
                let sq: f64 = members
                    .iter()
                    .map(|&i| {
                        let v = zr[(1 + i) * b + p];
                        v * v
                    })
                    .sum();
                ar[off + p] = d2r[p] * sq + d1r[p] * zr[off + p];
            }
        }
    }
    (a, (d1, d2, d3))
}

type HiddenTapeParts = (Array2<f64>, Array2<f64>, Array2<f64>);

/// Reverse of `activate`: overwrites the adjoint of the activated stack with
/// the adjoint of the pre-activation stack.
fn activate_backward(layout: &JetLayout, tape: &HiddenTape, adj: &mut Array2<f64>, b: usize) {
    let d = layout.inputs;
    let ng = layout.groups.len();
    let mut zbar_v = vec![0.0; b];
    let member_of: Vec<Vec<usize>> = (0..d)
        .map(|i| (0..ng).filter(|&g| layout.groups[g].contains(&i)).collect())
        .collect();
    for r in 0..tape.z.nrows() {
        let zr = tape.z.row(r);
        let zr = zr.as_slice().unwrap();
        let d1r = tape.d1.row(r);
        let d1r = d1r.as_slice().unwrap();
        let d2r = tape.d2.row(r);
        let d2r = d2r.as_slice().unwrap();
        let d3r = tape.d3.row(r);
        let d3r = d3r.as_slice().unwrap();
        let mut ar = adj.row_mut(r);
        let ar = ar.as_slice_mut().unwrap();

        for p in 0..b {
            zbar_v[p] = ar[p] * d1r[p];
        }
        // gradient channels read the second-order adjoints before those are overwritten
        for i in 0..d {
            let off = (1 + i) * b;
            for p in 0..b {
                let a_g = ar[off + p];
                let zg = zr[off + p];
                zbar_v[p] += a_g * d2r[p] * zg;
                let mut zbar_g = a_g * d1r[p];
                for &g in &member_of[i] {
                    zbar_g += 2.0 * ar[(1 + d + g) * b + p] * d2r[p] * zg;
                }
                ar[off + p] = zbar_g;
            }
        }
        for g in 0..ng {
            let off = (1 + d + g) * b;
            for p in 0..b {
                let a_s = ar[off + p];
                let sq: f64 = layout.groups[g]
                    .iter()
                    .map(|&i| {
                        let v = zr[(1 + i) * b + p];
                        v * v
                    })
                    .sum();
                zbar_v[p] += a_s * (d3r[p] * sq + d2r[p] * zr[off + p]);
                ar[off + p] = a_s * d1r[p];
            }
        }
        ar[..b].copy_from_slice(&zbar_v);
    }
}

impl Mlp {
    /// Jets of the network output at a batch of points (`inputs` is
    /// `(input_dim, points)`), plus the tape for `backward_jets`.
    pub fn forward_jets(&self, layout: &JetLayout, inputs: &Array2<f64>) -> (BatchJets, Tape) {
        assert_eq!(inputs.nrows(), self.input_dim(), "input width mismatch");
        assert_eq!(layout.inputs, self.input_dim(), "layout width mismatch");
        let b = inputs.ncols();
        let c = layout.channels();
        let mut h = input_stack(layout, inputs);
        let mut tape = Tape {
            inputs: Vec::new(),
            hidden: Vec::new(),
            points: b,
        };
        let last = self.weights().len() - 1;
        for (l, (w, bias)) in self.weights().iter().zip(self.biases()).enumerate() {
            let mut z = Array2::zeros((w.nrows(), c * b));
            general_mat_mul(1.0, w, &h, 0.0, &mut z);
            for (r, &br) in bias.iter().enumerate() {
                z.slice_mut(s![r, 0..b]).mapv_inplace(|v| v + br);
            }
            tape.inputs.push(h);
            if l == last {
                let data = z
                    .into_shape_with_order((c, b))
                    .expect("single output row");
                return (
                    BatchJets {
                        layout: layout.clone(),
                        data,
                    },
                    tape,
                );
            }
            let (a, (d1, d2, d3)) = activate(self.activation(), layout, &z, b);
            tape.hidden.push(HiddenTape { z, d1, d2, d3 });
            h = a;
        }
        unreachable!("network has at least one layer")
    }

    /// Parameter gradient of `Σ adjoint ⊙ jets`, in `write_params` order.
    pub fn backward_jets(&self, layout: &JetLayout, tape: &Tape, adjoint: &BatchJets) -> Vec<f64> {
        let b = tape.points;
        let c = layout.channels();
        assert_eq!(adjoint.points(), b, "adjoint batch size mismatch");
        let n_layers = self.weights().len();
        let mut grads: Vec<(Array2<f64>, Vec<f64>)> = Vec::with_capacity(n_layers);
        let mut delta = adjoint
            .data
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((1, c * b))
            .expect("contiguous adjoint");
        for l in (0..n_layers).rev() {
            let w = &self.weights()[l];
            let h = &tape.inputs[l];
            let mut dw = Array2::zeros(w.raw_dim());
            general_mat_mul(1.0, &delta, &h.t(), 0.0, &mut dw);
            let db: Vec<f64> = (0..w.nrows())
                .map(|r| delta.slice(s![r, 0..b]).sum())
                .collect();
            grads.push((dw, db));
            if l == 0 {
                break;
            }
            let mut hbar = Array2::zeros(h.raw_dim());
            general_mat_mul(1.0, &w.t(), &delta, 0.0, &mut hbar);
            activate_backward(layout, &tape.hidden[l - 1], &mut hbar, b);
            delta = hbar;
        }
        let mut out = Vec::with_capacity(self.num_params());
        for (dw, db) in grads.iter().rev() {
            out.extend(dw.iter());
            out.extend(db.iter());
        }
        out
    }
}
