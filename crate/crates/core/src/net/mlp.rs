use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Activation;
use crate::error::{invalid, Result, SinnError};

/// Value, spatial gradient and Laplacian of a scalar field at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: [f64; 3],
    pub laplacian: f64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 {
        value: 0.0,
        gradient: [0.0; 3],
        laplacian: 0.0,
    };

    pub fn constant(value: f64) -> Self {
        Jet2 {
            value,
            ..Jet2::ZERO
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Jet2 {
            value: c * self.value,
            gradient: self.gradient.map(|g| c * g),
            laplacian: c * self.laplacian,
        }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: f64, other: &Jet2) -> Self {
        Jet2 {
            value: self.value + c * other.value,
            gradient: [
                self.gradient[0] + c * other.gradient[0],
                self.gradient[1] + c * other.gradient[1],
                self.gradient[2] + c * other.gradient[2],
            ],
            laplacian: self.laplacian + c * other.laplacian,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.laplacian.is_finite()
    }
}

impl std::ops::Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        self.add_scaled(1.0, &rhs)
    }
}

/// Dense feed-forward network with a linear output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    activation: Activation,
}

fn check_arch(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(invalid("network needs input, at least one hidden, and output layer"));
    }
    if sizes.contains(&0) {
        return Err(invalid(format!("zero-width layer in {sizes:?}")));
    }
    if *sizes.last().unwrap() != 1 {
        return Err(invalid("output width must be 1"));
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
pub fn init_network(sizes: &[usize], activation: Activation, seed: u64) -> Result<Mlp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Mlp::glorot(sizes, activation, &mut rng)
}

impl Mlp {
    pub fn glorot(sizes: &[usize], activation: Activation, rng: &mut impl Rng) -> Result<Self> {
        check_arch(sizes)?;
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for w in sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let limit = (6.0 / (n_in + n_out) as f64).sqrt();
            weights.push(Array2::from_shape_fn((n_out, n_in), |_| {
                rng.gen_range(-limit..=limit)
            }));
            biases.push(Array1::zeros(n_out));
        }
        Ok(Mlp {
            sizes: sizes.to_vec(),
            weights,
            biases,
            activation,
        })
    }

    /// All-zero network of the given shape.
    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        check_arch(sizes)?;
        Ok(Mlp {
            sizes: sizes.to_vec(),
            weights: sizes
                .windows(2)
                .map(|w| Array2::zeros((w[1], w[0])))
                .collect(),
            biases: sizes[1..].iter().map(|&n| Array1::zeros(n)).collect(),
            activation,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    /// Multiplies the output layer by `factor`.
    pub fn scale_output(&mut self, factor: f64) {
        let last = self.weights.len() - 1;
        self.weights[last] *= factor;
        self.biases[last] *= factor;
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn num_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Appends parameters layer by layer: row-major weights, then biases.
    pub fn write_params(&self, out: &mut Vec<f64>) {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
    }

    /// Reads parameters in `write_params` order; returns the count consumed.
    pub fn read_params(&mut self, src: &[f64]) -> Result<usize> {
        let n = self.num_params();
        if src.len() < n {
            return Err(SinnError::LengthMismatch {
                expected: n,
                actual: src.len(),
            });
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut() {
                *v = src[at];
                at += 1;
            }
            for v in b.iter_mut() {
                *v = src[at];
                at += 1;
            }
        }
        Ok(at)
    }

    /// Plain forward pass.
    pub fn forward(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.input_dim(), "input width mismatch");
        let mut h: Vec<f64> = x.to_vec();
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = b.to_vec();
            for (r, zr) in z.iter_mut().enumerate() {
                for (c, hc) in h.iter().enumerate() {
                    *zr += w[[r, c]] * hc;
                }
            }
            if l < last {
                for v in z.iter_mut() {
                    *v = self.activation.eval3(*v)[0];
                }
            }
            h = z;
        }
        h[0]
    }

    /// Value, gradient and Laplacian with respect to the three inputs, by
    /// propagating `(value, ∇, Δ)` triples through each layer.
    pub fn forward_jet(&self, x: [f64; 3]) -> Jet2 {
        assert_eq!(self.input_dim(), 3, "forward_jet expects a 3-input network");
        let mut val: Vec<f64> = x.to_vec();
        let mut grad: Vec<[f64; 3]> = (0..3)
            .map(|i| {
                let mut g = [0.0; 3];
                g[i] = 1.0;
                g
            })
            .collect();
        let mut lap = vec![0.0; 3];
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let n_out = w.nrows();
            let mut zv = b.to_vec();
            let mut zg = vec![[0.0; 3]; n_out];
            let mut zl = vec![0.0; n_out];
            for r in 0..n_out {
                for c in 0..val.len() {
                    let wrc = w[[r, c]];
                    zv[r] += wrc * val[c];
                    for i in 0..3 {
                        zg[r][i] += wrc * grad[c][i];
                    }
                    zl[r] += wrc * lap[c];
                }
            }
            if l < last {
                for r in 0..n_out {
                    let [s0, s1, s2, _] = self.activation.eval3(zv[r]);
                    let sq: f64 = zg[r].iter().map(|g| g * g).sum();
                    zl[r] = s2 * sq + s1 * zl[r];
                    for g in zg[r].iter_mut() {
                        *g *= s1;
                    }
                    zv[r] = s0;
                }
            }
            val = zv;
            grad = zg;
            lap = zl;
        }
        Jet2 {
            value: val[0],
            gradient: grad[0],
            laplacian: lap[0],
        }
    }
}
