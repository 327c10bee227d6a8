//! Polynomial parametrization of an unknown material profile, plus the data
//! handling (noise, overspecified subsets) used by inverse runs.
//!
//! The profile is `d̂(x) = Σ α_m x^a y^b z^c` over all monomials of total
//! degree `≤ s`, and the material fields are `κ̂ = λ₁·d̂`, `ρ̂c = λ₂·d̂`.
//! Only those products are identifiable: `(cλ, α/c)` gives the same fields.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result, SinnError};
use crate::geometry::BoundaryPoint;
use crate::problem::Coefficient;

pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyBasis {
    order: usize,
    /// Exponents of `x, y, z` per term.
    terms: Vec<[u32; 3]>,
}

/// Number of monomials of total degree `≤ s` in three variables.
pub fn term_count(s: usize) -> usize {
    (s + 1) * (s + 2) * (s + 3) / 6
}

/// Monomials ordered lexicographically in `(p, q, r)` with exponents
/// `(p − q − r, q, r)`.
pub fn basis_enumerate(s: usize) -> Result<PolyBasis> {
    if s > MAX_ORDER {
        return Err(invalid(format!("basis order {s} exceeds {MAX_ORDER}")));
    }
    let mut terms = Vec::with_capacity(term_count(s));
    for p in 0..=s as u32 {
        for q in 0..=p {
            for r in 0..=p - q {
                terms.push([p - q - r, q, r]);
            }
        }
    }
    Ok(PolyBasis { order: s, terms })
}

fn pow_and_derivative(x: f64, e: u32) -> (f64, f64) {
    if e == 0 {
        (1.0, 0.0)
    } else {
        let lower = x.powi(e as i32 - 1);
        (lower * x, e as f64 * lower)
    }
}

impl PolyBasis {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[[u32; 3]] {
        &self.terms
    }

    /// Value and gradient of every basis monomial at `x`.
    pub fn terms_at(&self, x: [f64; 3]) -> Vec<(f64, [f64; 3])> {
        self.terms
            .iter()
            .map(|e| {
                let [(vx, dx), (vy, dy), (vz, dz)] = [0, 1, 2].map(|i| pow_and_derivative(x[i], e[i]));
                (vx * vy * vz, [dx * vy * vz, vx * dy * vz, vx * vy * dz])
            })
            .collect()
    }
}

/// `(d̂(x), ∇d̂(x))` for coefficients `alpha`.
pub fn basis_eval(basis: &PolyBasis, alpha: &[f64], x: [f64; 3]) -> Result<(f64, [f64; 3])> {
    if alpha.len() != basis.len() {
        return Err(SinnError::LengthMismatch {
            expected: basis.len(),
            actual: alpha.len(),
        });
    }
    let mut value = 0.0;
    let mut grad = [0.0; 3];
    for (a, (v, g)) in alpha.iter().zip(basis.terms_at(x)) {
        value += a * v;
        for i in 0..3 {
            grad[i] += a * g[i];
        }
    }
    Ok((value, grad))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseParams {
    pub alpha: Vec<f64>,
    /// Scale of `κ̂`.
    pub lambda1: f64,
    /// Scale of `ρ̂c`.
    pub lambda2: f64,
}

impl InverseParams {
    /// Constant unit profile, unit scales.
    pub fn initial(basis: &PolyBasis) -> Self {
        let mut alpha = vec![0.0; basis.len()];
        alpha[0] = 1.0;
        InverseParams {
            alpha,
            lambda1: 1.0,
            lambda2: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `[α…, λ₁, λ₂]`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = self.alpha.clone();
        v.push(self.lambda1);
        v.push(self.lambda2);
        v
    }

    pub fn load(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.len() {
            return Err(SinnError::LengthMismatch {
                expected: self.len(),
                actual: v.len(),
            });
        }
        let n = self.alpha.len();
        self.alpha.copy_from_slice(&v[..n]);
        self.lambda1 = v[n];
        self.lambda2 = v[n + 1];
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|v| v.is_finite())
    }
}

/// `(κ̂, ρ̂c)` at `x`.
pub fn material_fields(
    params: &InverseParams,
    basis: &PolyBasis,
    x: [f64; 3],
) -> Result<(Coefficient, Coefficient)> {
    let (d, g) = basis_eval(basis, &params.alpha, x)?;
    let scaled = |l: f64| Coefficient {
        value: l * d,
        grad: g.map(|v| l * v),
        du: 0.0,
    };
    Ok((scaled(params.lambda1), scaled(params.lambda2)))
}

/// `vᵢ·(1 + level·εᵢ)` with `εᵢ` uniform on `[−1, 1]`.
pub fn add_noise(values: &[f64], level: f64, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..=0.2).contains(&level) {
        return Err(invalid(format!("noise level {level} outside [0, 0.2]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(values
        .iter()
        .map(|v| v * (1.0 + level * rng.gen_range(-1.0..=1.0)))
        .collect())
}

/// Sorted random subset of boundary indices, `round(fraction·count)` long.
pub fn select_overspecified(boundary: &[BoundaryPoint], fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(invalid(format!("overspecified fraction {fraction} outside (0, 1]")));
    }
    let k = (fraction * boundary.len() as f64).round() as usize;
    if k == 0 {
        return Err(invalid("overspecified subset is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, boundary.len(), k).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Tag;
    use proptest::prelude::{any, prop, prop_assert, proptest};

    #[test]
    fn enumeration_examples() {
        let b0 = basis_enumerate(0).unwrap();
        assert_eq!(b0.terms(), &[[0, 0, 0]]);
        let b1 = basis_enumerate(1).unwrap();
        let mut t = b1.terms().to_vec();
        t.sort();
        assert_eq!(t, vec![[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0]]);
        assert_eq!(basis_enumerate(3).unwrap().len(), 20);
        assert!(basis_enumerate(7).is_err());
    }

    #[test]
    fn enumeration_counts_and_uniqueness() {
        for s in 0..=MAX_ORDER {
            let b = basis_enumerate(s).unwrap();
            assert_eq!(b.len(), term_count(s));
            let mut t = b.terms().to_vec();
            t.sort();
            t.dedup();
            assert_eq!(t.len(), b.len());
            assert!(b.terms().iter().all(|e| e.iter().sum::<u32>() as usize <= s));
        }
    }

    #[test]
    fn eval_examples() {
        let b = basis_enumerate(2).unwrap();
        let mut alpha = vec![0.0; b.len()];
        alpha[0] = 2.5;
        assert_eq!(basis_eval(&b, &alpha, [0.3, 0.1, 0.9]).unwrap(), (2.5, [0.0; 3]));

        let xy = b.terms().iter().position(|e| *e == [1, 1, 0]).unwrap();
        let mut alpha = vec![0.0; b.len()];
        alpha[xy] = 1.0;
        let (v, g) = basis_eval(&b, &alpha, [0.3, 0.7, 0.2]).unwrap();
        assert!((v - 0.21).abs() < 1e-15);
        assert_eq!(g, [0.7, 0.3, 0.0]);
        assert!(basis_eval(&b, &alpha[1..], [0.0; 3]).is_err());
    }

    #[test]
    fn material_field_scales() {
        let b = basis_enumerate(1).unwrap();
        let mut p = InverseParams::initial(&b);
        p.alpha = vec![1.0, 0.5, -0.2, 0.3];
        p.lambda1 = 15.0;
        p.lambda2 = 36.0;
        let x = [0.2, 0.4, 0.6];
        let (k, r) = material_fields(&p, &b, x).unwrap();
        let (d, _) = basis_eval(&b, &p.alpha, x).unwrap();
        assert!((k.value - 15.0 * d).abs() < 1e-14);
        assert!((r.value - 36.0 * d).abs() < 1e-13);
        p.lambda1 = 0.0;
        assert_eq!(material_fields(&p, &b, x).unwrap().0.value, 0.0);
    }

    #[test]
    fn params_round_trip() {
        let b = basis_enumerate(2).unwrap();
        let p = InverseParams::initial(&b);
        assert_eq!(p.len(), 12);
        let mut q = p.clone();
        let mut v = p.flatten();
        v[3] = 0.7;
        q.load(&v).unwrap();
        assert_eq!(q.flatten(), v);
        assert!(q.load(&v[1..]).is_err());
    }

    #[test]
    fn noise_examples() {
        let v: Vec<f64> = (1..=50).map(|i| i as f64 * 0.3 - 4.0).collect();
        assert_eq!(add_noise(&v, 0.0, 1).unwrap(), v);
        let n = add_noise(&v, 0.05, 1).unwrap();
        assert!(v.iter().zip(&n).all(|(a, b)| (a - b).abs() <= 0.05 * a.abs() + 1e-15));
        assert_eq!(n, add_noise(&v, 0.05, 1).unwrap());
        assert_ne!(n, add_noise(&v, 0.05, 2).unwrap());
        assert!(add_noise(&v, 0.3, 1).is_err());
    }

    #[test]
    fn overspecified_selection() {
        let pts = vec![
            BoundaryPoint {
                point: [0.0; 3],
                normal: [1.0, 0.0, 0.0],
                tag: Tag::Dirichlet,
            };
            100
        ];
        assert_eq!(select_overspecified(&pts, 1.0, 0).unwrap(), (0..100).collect::<Vec<_>>());
        let s = select_overspecified(&pts, 0.2, 3).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, select_overspecified(&pts, 0.2, 3).unwrap());
        assert!(select_overspecified(&pts, 0.001, 0).is_err());
        assert!(select_overspecified(&pts, 0.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn gradients_match_differences(
            s in 0usize..=4,
            seed in any::<u64>(),
            x in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let b = basis_enumerate(s).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let alpha: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, g) = basis_eval(&b, &alpha, x).unwrap();
            let h = 1e-4;
            for i in 0..3 {
                let at = |d: f64| {
                    let mut y = x;
                    y[i] += d;
                    basis_eval(&b, &alpha, y).unwrap().0
                };
                let fd = (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
                prop_assert!((fd - g[i]).abs() <= 1e-9 * g[i].abs().max(1.0), "{} vs {}", fd, g[i]);
            }
        }

        #[test]
        fn scale_ambiguity(c in 0.1f64..10.0, x in prop::array::uniform3(0.0f64..1.0)) {
            let b = basis_enumerate(2).unwrap();
            let alpha: Vec<f64> = (0..b.len()).map(|i| 0.1 * i as f64 - 0.3).collect();
            let p = InverseParams { alpha: alpha.clone(), lambda1: 15.0, lambda2: 36.0 };
            let q = InverseParams {
                alpha: alpha.iter().map(|a| a / c).collect(),
                lambda1: 15.0 * c,
                lambda2: 36.0 * c,
            };
            let (k1, r1) = material_fields(&p, &b, x).unwrap();
            let (k2, r2) = material_fields(&q, &b, x).unwrap();
            prop_assert!((k1.value - k2.value).abs() <= 1e-12 * k1.value.abs().max(1.0));
            prop_assert!((r1.value - r2.value).abs() <= 1e-12 * r1.value.abs().max(1.0));
        }
    }
}
