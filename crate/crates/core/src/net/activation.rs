use serde::{Deserialize, Serialize};

/// Hidden-layer nonlinearity.
///
/// Besides the value and first two derivatives needed for spatial jets, each
/// kind also supplies the third derivative, which appears when parameter
/// gradients are propagated back through a Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Swish,
    Softplus,
    Arctan,
    Mish,
}

impl Activation {
    pub const ALL: [Activation; 6] = [
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Swish,
        Activation::Softplus,
        Activation::Arctan,
        Activation::Mish,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Swish => "swish",
            Activation::Softplus => "softplus",
            Activation::Arctan => "arctan",
            Activation::Mish => "mish",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(name))
    }

    /// Stable numeric id used in checkpoint headers.
    pub fn id(self) -> u32 {
        match self {
            Activation::Sigmoid => 0,
            Activation::Tanh => 1,
            Activation::Swish => 2,
            Activation::Softplus => 3,
            Activation::Arctan => 4,
            Activation::Mish => 5,
        }
    }

    pub fn from_id(id: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.id() == id)
    }

    /// `(σ, σ′, σ″)` at `x`.
    pub fn eval(self, x: f64) -> (f64, f64, f64) {
        let [v, d1, d2, _] = self.eval3(x);
        (v, d1, d2)
    }

    /// `[σ, σ′, σ″, σ‴]` at `x`.
    #[inline]
    pub fn eval3(self, x: f64) -> [f64; 4] {
        match self {
            Activation::Sigmoid => sigmoid_jet(x),
            Activation::Tanh => {
                let t = x.tanh();
                let d1 = 1.0 - t * t;
                let d2 = -2.0 * t * d1;
                let d3 = -2.0 * d1 * d1 + 4.0 * t * t * d1;
                [t, d1, d2, d3]
            }
            Activation::Swish => {
                let [s, s1, s2, s3] = sigmoid_jet(x);
                [x * s, s + x * s1, 2.0 * s1 + x * s2, 3.0 * s2 + x * s3]
            }
            Activation::Softplus => {
                let [s, s1, s2, _] = sigmoid_jet(x);
                [softplus(x), s, s1, s2]
            }
            Activation::Arctan => {
                let q = 1.0 / (1.0 + x * x);
                [x.atan(), q, -2.0 * x * q * q, (6.0 * x * x - 2.0) * q * q * q]
            }
            Activation::Mish => {
                let [s, s1, s2, _] = sigmoid_jet(x);
                let g = softplus(x).tanh();
                let h = 1.0 - g * g;
                let g1 = h * s;
                let g2 = -2.0 * g * g1 * s + h * s1;
                let g3 = -2.0 * g1 * g1 * s - 2.0 * g * g2 * s - 4.0 * g * g1 * s1 + h * s2;
                [x * g, g + x * g1, 2.0 * g1 + x * g2, 3.0 * g2 + x * g3]
            }
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid_jet(x: f64) -> [f64; 4] {
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    let s1 = s * (1.0 - s);
    let s2 = s1 * (1.0 - 2.0 * s);
    let s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
    [s, s1, s2, s3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn values_at_zero() {
        let (v, d1, d2) = Activation::Mish.eval(0.0);
        assert_eq!(v, 0.0);
        assert_abs_diff_eq!(d1, 0.6, epsilon = 1e-15);
        assert!(d2.is_finite());
        let (v, d1, d2) = Activation::Swish.eval(0.0);
        assert_eq!((v, d1, d2), (0.0, 0.5, 0.5));
        assert_eq!(Activation::Tanh.eval(0.0), (0.0, 1.0, 0.0));
    }

    #[test]
    fn softplus_overflow_branch() {
        let [v, d1, _, _] = Activation::Softplus.eval3(700.0);
        assert!(v.is_finite());
        assert_abs_diff_eq!(v, 700.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d1, 1.0, epsilon = 1e-15);
        let below = softplus(30.0);
        let above = softplus(30.0 + 1e-12);
        assert!((above - below).abs() < 1e-10);
    }

    #[test]
    fn derivatives_match_central_differences() {
        // five-point stencil keeps truncation and roundoff both below 1e-11
        let h = 1e-3;
        for act in Activation::ALL {
            for i in 0..=200 {
                let x = -10.0 + 0.1 * i as f64;
                let jet = act.eval3(x);
                let p1 = act.eval3(x + h);
                let p2 = act.eval3(x + 2.0 * h);
                let m1 = act.eval3(x - h);
                let m2 = act.eval3(x - 2.0 * h);
                for order in 0..3 {
                    let fd = (8.0 * (p1[order] - m1[order]) - (p2[order] - m2[order])) / (12.0 * h);
                    let exact = jet[order + 1];
                    let scale = exact.abs().max(1e-3);
                    assert!(
                        (fd - exact).abs() / scale <= 1e-7,
                        "{act} order {} at {x}: fd {fd} vs {exact}",
                        order + 1
                    );
                }
            }
        }
    }

    #[test]
    fn finite_on_wide_range() {
        for act in Activation::ALL {
            for i in -500..=500 {
                let x = i as f64 * 0.1;
                assert!(act.eval3(x).iter().all(|v| v.is_finite()), "{act} at {x}");
            }
        }
    }

    #[test]
    fn names_and_ids_round_trip() {
        for act in Activation::ALL {
            assert_eq!(Activation::from_name(act.name()), Some(act));
            assert_eq!(Activation::from_id(act.id()), Some(act));
        }
        assert_eq!(Activation::from_name("relu"), None);
    }
}
