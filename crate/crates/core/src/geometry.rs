//! Simple 3D domains, collocation and boundary point sampling, and
//! Dirichlet/Neumann tagging of boundary points.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SinnError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Domain {
    Box { min: [f64; 3], max: [f64; 3] },
    Sphere { center: [f64; 3], radius: f64 },
    /// Axis along `z`, starting at `base` (center of the lower cap).
    Cylinder { base: [f64; 3], radius: f64, height: f64 },
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl Domain {
    pub fn unit_box() -> Self {
        Domain::Box {
            min: [0.0; 3],
            max: [1.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Domain::Box { min, max } => {
                if !finite(min) || !finite(max) || (0..3).any(|i| max[i] <= min[i]) {
                    return Err(invalid(format!("box needs max > min, got {min:?} {max:?}")));
                }
            }
            Domain::Sphere { center, radius } => {
                if !finite(center) || !(*radius > 0.0 && radius.is_finite()) {
                    return Err(invalid(format!("bad sphere radius {radius}")));
                }
            }
            Domain::Cylinder {
                base,
                radius,
                height,
            } => {
                if !finite(base)
                    || !(*radius > 0.0 && radius.is_finite())
                    || !(*height > 0.0 && height.is_finite())
                {
                    return Err(invalid(format!(
                        "bad cylinder radius {radius} / height {height}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        match *self {
            Domain::Box { min, max } => (min, max),
            Domain::Sphere { center: c, radius: r } => {
                ([c[0] - r, c[1] - r, c[2] - r], [c[0] + r, c[1] + r, c[2] + r])
            }
            Domain::Cylinder {
                base: b,
                radius: r,
                height: h,
            } => ([b[0] - r, b[1] - r, b[2]], [b[0] + r, b[1] + r, b[2] + h]),
        }
    }

    /// Largest distance between two points of the domain.
    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Box { min, max } => norm([max[0] - min[0], max[1] - min[1], max[2] - min[2]]),
            Domain::Sphere { radius, .. } => 2.0 * radius,
            Domain::Cylinder { radius, height, .. } => (4.0 * radius * radius + height * height).sqrt(),
        }
    }

    pub fn volume(&self) -> f64 {
        match *self {
            Domain::Box { min, max } => (0..3).map(|i| max[i] - min[i]).product(),
            Domain::Sphere { radius, .. } => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
            Domain::Cylinder { radius, height, .. } => std::f64::consts::PI * radius * radius * height,
        }
    }

    /// Negative inside, zero on the surface, positive outside.
    pub fn signed_distance(&self, x: [f64; 3]) -> f64 {
        match *self {
            Domain::Box { min, max } => {
                let mut outside = [0.0; 3];
                let mut inside = f64::NEG_INFINITY;
                for i in 0..3 {
                    let half = 0.5 * (max[i] - min[i]);
                    let q = (x[i] - 0.5 * (max[i] + min[i])).abs() - half;
                    outside[i] = q.max(0.0);
                    inside = inside.max(q);
                }
                norm(outside) + inside.min(0.0)
            }
            Domain::Sphere { center, radius } => {
                norm([x[0] - center[0], x[1] - center[1], x[2] - center[2]]) - radius
            }
            Domain::Cylinder {
                base,
                radius,
                height,
            } => {
                let dr = (x[0] - base[0]).hypot(x[1] - base[1]) - radius;
                let dz = (x[2] - base[2] - 0.5 * height).abs() - 0.5 * height;
                dr.max(dz).min(0.0) + dr.max(0.0).hypot(dz.max(0.0))
            }
        }
    }

    /// Margin used to keep interior points off the surface.
    pub fn interior_margin(&self) -> f64 {
        1e-9 * self.diameter()
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        self.signed_distance(x) < -self.interior_margin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SamplingStrategy {
    Grid,
    #[default]
    Halton,
}

/// Radical inverse of `index` in `base`.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// Seeded starting index into a Halton sequence.
fn halton_offset(seed: u64) -> u64 {
    1 + ChaCha8Rng::seed_from_u64(seed).gen_range(0..1_000_000u64)
}

fn halton3(i: u64) -> [f64; 3] {
    [radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)]
}

/// `n` points strictly inside `domain`.
pub fn sample_interior(
    domain: &Domain,
    n: usize,
    strategy: SamplingStrategy,
    seed: u64,
) -> Result<Vec<[f64; 3]>> {
    domain.validate()?;
    if n == 0 {
        return Err(invalid("interior point count must be at least 1"));
    }
    match strategy {
        SamplingStrategy::Halton => sample_halton(domain, n, seed),
        SamplingStrategy::Grid => sample_grid(domain, n),
    }
}

fn sample_halton(domain: &Domain, n: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
    let (lo, hi) = domain.bounds();
    let start = halton_offset(seed);
    let mut out = Vec::with_capacity(n);
    for k in 0..100 * n as u64 {
        let h = halton3(start + k);
        let x = [0, 1, 2].map(|i| lo[i] + h[i] * (hi[i] - lo[i]));
        if domain.contains(x) {
            out.push(x);
            if out.len() == n {
                return Ok(out);
            }
        }
    }
    Err(invalid(format!(
        "only {} of {n} interior points accepted within {} proposals",
        out.len(),
        100 * n
    )))
}

/// Cell-centred lattice over the bounding box, refined until at least `n`
/// points fall inside; a surplus is thinned by even striding.
fn sample_grid(domain: &Domain, n: usize) -> Result<Vec<[f64; 3]>> {
    let (lo, hi) = domain.bounds();
    let ext = [0, 1, 2].map(|i| hi[i] - lo[i]);
    let mut h = (domain.volume() / n as f64).cbrt();
    for _ in 0..200 {
        let k = ext.map(|e| ((e / h).round() as usize).max(1));
        let mut pts = Vec::new();
        for a in 0..k[0] {
            for b in 0..k[1] {
                for c in 0..k[2] {
                    let idx = [a, b, c];
                    let x = [0, 1, 2].map(|i| lo[i] + (idx[i] as f64 + 0.5) * ext[i] / k[i] as f64);
                    if domain.contains(x) {
                        pts.push(x);
                    }
                }
            }
        }
        if pts.len() >= n {
            let m = pts.len();
            return Ok((0..n).map(|i| pts[i * m / n]).collect());
        }
        h *= 0.97;
    }
    Err(invalid(format!("grid refinement could not reach {n} interior points")))
}

/// Splits `n` across `parts` in proportion to `weights` (largest remainder).
fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - counts[a] as f64;
        let rb = exact[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// `n` surface points with outward unit normals.
pub fn sample_boundary(domain: &Domain, n: usize, seed: u64) -> Result<Vec<([f64; 3], [f64; 3])>> {
    domain.validate()?;
    if n == 0 {
        return Err(invalid("boundary point count must be at least 1"));
    }
    let start = halton_offset(seed ^ 0x5eed_b0b0);
    let mut out = Vec::with_capacity(n);
    match *domain {
        Domain::Box { min, max } => {
            let ext = [0, 1, 2].map(|i| max[i] - min[i]);
            // faces in order -x, +x, -y, +y, -z, +z
            let areas: Vec<f64> = (0..6)
                .map(|f| {
                    let axis = f / 2;
                    ext[(axis + 1) % 3] * ext[(axis + 2) % 3]
                })
                .collect();
            let counts = apportion(n, &areas);
            let mut k = start;
            for (f, &count) in counts.iter().enumerate() {
                let axis = f / 2;
                let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
                let upper = f % 2 == 1;
                let mut normal = [0.0; 3];
                normal[axis] = if upper { 1.0 } else { -1.0 };
                for _ in 0..count {
                    let mut x = [0.0; 3];
                    x[axis] = if upper { max[axis] } else { min[axis] };
                    x[a1] = min[a1] + radical_inverse(k, 2) * ext[a1];
                    x[a2] = min[a2] + radical_inverse(k, 3) * ext[a2];
                    out.push((x, normal));
                    k += 1;
                }
            }
        }
        Domain::Sphere { center, radius } => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let phase = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..std::f64::consts::TAU);
            for i in 0..n {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let theta = phase + golden * i as f64;
                let nrm = [rho * theta.cos(), rho * theta.sin(), z];
                let s = 1.0 / norm(nrm);
                let nrm = nrm.map(|v| v * s);
                let x = [0, 1, 2].map(|d| center[d] + radius * nrm[d]);
                out.push((x, nrm));
            }
        }
        Domain::Cylinder {
            base,
            radius,
            height,
        } => {
            let cap = std::f64::consts::PI * radius * radius;
            let lateral = std::f64::consts::TAU * radius * height;
            let counts = apportion(n, &[lateral, cap, cap]);
            let mut k = start;
            for _ in 0..counts[0] {
                let theta = std::f64::consts::TAU * radical_inverse(k, 2);
                let z = base[2] + height * radical_inverse(k, 3);
                let nrm = [theta.cos(), theta.sin(), 0.0];
                out.push(([base[0] + radius * nrm[0], base[1] + radius * nrm[1], z], nrm));
                k += 1;
            }
            for (c, &count) in counts[1..].iter().enumerate() {
                let (z, nz) = if c == 0 {
                    (base[2], -1.0)
                } else {
                    (base[2] + height, 1.0)
                };
                for _ in 0..count {
                    let r = radius * radical_inverse(k, 2).sqrt();
                    let theta = std::f64::consts::TAU * radical_inverse(k, 3);
                    out.push((
                        [base[0] + r * theta.cos(), base[1] + r * theta.sin(), z],
                        [0.0, 0.0, nz],
                    ));
                    k += 1;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Dirichlet,
    Neumann,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::Dirichlet => "dirichlet",
            Tag::Neumann => "neumann",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Predicate on a boundary point and its normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    All,
    /// Coordinate `≤ value`.
    Below { axis: Axis, value: f64 },
    /// Coordinate `≥ value`.
    Above { axis: Axis, value: f64 },
    /// Normal parallel to the axis (cylinder caps, box faces).
    NormalAlong { axis: Axis },
    /// Normal orthogonal to the axis (cylinder lateral surface).
    NormalAcross { axis: Axis },
}

impl Region {
    pub fn matches(&self, x: [f64; 3], normal: [f64; 3]) -> bool {
        const TOL: f64 = 1e-9;
        match *self {
            Region::All => true,
            Region::Below { axis, value } => x[axis.index()] <= value,
            Region::Above { axis, value } => x[axis.index()] >= value,
            Region::NormalAlong { axis } => normal[axis.index()].abs() >= 1.0 - TOL,
            Region::NormalAcross { axis } => normal[axis.index()].abs() <= TOL,
        }
    }
}

/// Regions for each condition; `default` covers points no region claims.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagRule {
    #[serde(default)]
    pub dirichlet: Vec<Region>,
    #[serde(default)]
    pub neumann: Vec<Region>,
    #[serde(default)]
    pub default: Option<Tag>,
}

impl TagRule {
    pub fn all(tag: Tag) -> Self {
        TagRule {
            default: Some(tag),
            ..Default::default()
        }
    }

    /// Points in `region` get `tag`, all others the opposite condition.
    pub fn split(region: Region, tag: Tag) -> Self {
        let (dirichlet, neumann, default) = match tag {
            Tag::Dirichlet => (vec![region], vec![], Tag::Neumann),
            Tag::Neumann => (vec![], vec![region], Tag::Dirichlet),
        };
        TagRule {
            dirichlet,
            neumann,
            default: Some(default),
        }
    }

    pub fn tag(&self, x: [f64; 3], normal: [f64; 3]) -> Result<Tag> {
        let d = self.dirichlet.iter().any(|r| r.matches(x, normal));
        let n = self.neumann.iter().any(|r| r.matches(x, normal));
        match (d, n, self.default) {
            (true, true, _) => Err(SinnError::Config(format!(
                "boundary point {x:?} is tagged both dirichlet and neumann"
            ))),
            (true, false, _) => Ok(Tag::Dirichlet),
            (false, true, _) => Ok(Tag::Neumann),
            (false, false, Some(t)) => Ok(t),
            (false, false, None) => Err(SinnError::Config(format!(
                "boundary point {x:?} is not covered by the tagging rule"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: [f64; 3],
    pub normal: [f64; 3],
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    pub interior: Vec<[f64; 3]>,
    pub boundary: Vec<BoundaryPoint>,
}

pub fn tag_boundary(points: &[([f64; 3], [f64; 3])], rule: &TagRule) -> Result<Vec<BoundaryPoint>> {
    points
        .iter()
        .map(|&(point, normal)| {
            Ok(BoundaryPoint {
                point,
                normal,
                tag: rule.tag(point, normal)?,
            })
        })
        .collect()
}

impl PointSet {
    /// Interior and tagged boundary points; the boundary stream uses a seed
    /// derived from `seed`.
    pub fn generate(
        domain: &Domain,
        n_interior: usize,
        n_boundary: usize,
        strategy: SamplingStrategy,
        rule: &TagRule,
        seed: u64,
    ) -> Result<Self> {
        let interior = sample_interior(domain, n_interior, strategy, seed)?;
        let raw = sample_boundary(domain, n_boundary, seed.wrapping_add(1))?;
        Ok(PointSet {
            interior,
            boundary: tag_boundary(&raw, rule)?,
        })
    }

    pub fn with_tag(&self, tag: Tag) -> impl Iterator<Item = &BoundaryPoint> {
        self.boundary.iter().filter(move |b| b.tag == tag)
    }

    pub fn count(&self, tag: Tag) -> usize {
        self.with_tag(tag).count()
    }

    /// Rows `x, y, z, nx, ny, nz, tag`; interior rows carry a zero normal.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "y", "z", "nx", "ny", "nz", "tag"])?;
        let fmt = |v: f64| format!("{v:.16e}");
        for x in &self.interior {
            let mut row: Vec<String> = x.iter().map(|&v| fmt(v)).collect();
            row.extend(["0".into(), "0".into(), "0".into(), "interior".into()]);
            wr.write_record(&row)?;
        }
        for b in &self.boundary {
            let mut row: Vec<String> = b.point.iter().chain(&b.normal).map(|&v| fmt(v)).collect();
            row.push(b.tag.name().into());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cylinder() -> Domain {
        Domain::Cylinder {
            base: [0.0; 3],
            radius: 0.15,
            height: 0.9,
        }
    }

    fn shapes() -> Vec<Domain> {
        vec![
            Domain::unit_box(),
            Domain::Box {
                min: [0.0; 3],
                max: [1.84, 0.5, 0.66],
            },
            Domain::Sphere {
                center: [0.2, -0.1, 0.3],
                radius: 0.7,
            },
            cylinder(),
        ]
    }

    #[test]
    fn grid_unit_box_eight() {
        let mut pts = sample_interior(&Domain::unit_box(), 8, SamplingStrategy::Grid, 0).unwrap();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = Vec::new();
        for a in [0.25, 0.75] {
            for b in [0.25, 0.75] {
                for c in [0.25, 0.75] {
                    expect.push([a, b, c]);
                }
            }
        }
        assert_eq!(pts, expect);
    }

    #[test]
    fn halton_is_deterministic_and_seeded() {
        let d = Domain::unit_box();
        let a = sample_interior(&d, 50, SamplingStrategy::Halton, 4).unwrap();
        let b = sample_interior(&d, 50, SamplingStrategy::Halton, 4).unwrap();
        let c = sample_interior(&d, 50, SamplingStrategy::Halton, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn radical_inverse_values() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn apportion_sums() {
        assert_eq!(apportion(10, &[1.0, 1.0, 2.0]).iter().sum::<usize>(), 10);
        assert_eq!(apportion(6, &[1.0; 6]), vec![1; 6]);
    }

    #[test]
    fn invalid_domains() {
        let bad = Domain::Box {
            min: [0.0; 3],
            max: [1.0, 0.0, 1.0],
        };
        assert!(sample_interior(&bad, 4, SamplingStrategy::Halton, 0).is_err());
        assert!(sample_interior(&Domain::unit_box(), 0, SamplingStrategy::Halton, 0).is_err());
        let flat = Domain::Sphere {
            center: [0.0; 3],
            radius: -1.0,
        };
        assert!(sample_boundary(&flat, 3, 0).is_err());
    }

    #[test]
    fn analytic_normals() {
        let s = Domain::Sphere {
            center: [1.0, 2.0, 3.0],
            radius: 0.5,
        };
        for (x, n) in sample_boundary(&s, 200, 1).unwrap() {
            for i in 0..3 {
                assert!(((x[i] - [1.0, 2.0, 3.0][i]) / 0.5 - n[i]).abs() < 1e-12);
            }
        }
        for (_, n) in sample_boundary(&Domain::unit_box(), 100, 1).unwrap() {
            assert_eq!(n.iter().filter(|v| v.abs() == 1.0).count(), 1);
            assert_eq!(n.iter().filter(|&&v| v == 0.0).count(), 2);
        }
        for (x, n) in sample_boundary(&cylinder(), 300, 1).unwrap() {
            if n[2] == 0.0 {
                assert!((x[0] / 0.15 - n[0]).abs() < 1e-12);
                assert!((x[1] / 0.15 - n[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn box_faces_proportional_to_area() {
        let d = Domain::Box {
            min: [0.0; 3],
            max: [2.0, 1.0, 1.0],
        };
        let pts = sample_boundary(&d, 1000, 0).unwrap();
        let x_faces = pts.iter().filter(|(_, n)| n[0] != 0.0).count();
        // x faces are 2 of total area 10
        assert_eq!(x_faces, 200);
    }

    #[test]
    fn tagging_rules() {
        let d = Domain::unit_box();
        let raw = sample_boundary(&d, 600, 2).unwrap();
        let rule = TagRule::split(
            Region::Below {
                axis: Axis::Z,
                value: 0.5,
            },
            Tag::Neumann,
        );
        let tagged = tag_boundary(&raw, &rule).unwrap();
        for b in &tagged {
            assert_eq!(b.tag == Tag::Neumann, b.point[2] <= 0.5);
        }
        let all = tag_boundary(&raw, &TagRule::all(Tag::Dirichlet)).unwrap();
        assert!(all.iter().all(|b| b.tag == Tag::Dirichlet));

        let caps = TagRule {
            dirichlet: vec![Region::NormalAcross { axis: Axis::Z }],
            neumann: vec![Region::NormalAlong { axis: Axis::Z }],
            default: None,
        };
        let cyl = tag_boundary(&sample_boundary(&cylinder(), 300, 0).unwrap(), &caps).unwrap();
        for b in &cyl {
            let on_cap = b.point[2] == 0.0 || b.point[2] == 0.9;
            assert_eq!(b.tag == Tag::Neumann, on_cap);
        }

        let uncovered = TagRule {
            neumann: vec![Region::Below {
                axis: Axis::X,
                value: 0.0,
            }],
            ..Default::default()
        };
        assert!(matches!(
            tag_boundary(&raw, &uncovered),
            Err(SinnError::Config(_))
        ));
        let double = TagRule {
            dirichlet: vec![Region::All],
            neumann: vec![Region::All],
            default: None,
        };
        assert!(tag_boundary(&raw, &double).is_err());
    }

    #[test]
    fn csv_export() {
        let ps = PointSet::generate(
            &Domain::unit_box(),
            3,
            4,
            SamplingStrategy::Halton,
            &TagRule::all(Tag::Neumann),
            0,
        )
        .unwrap();
        let mut buf = Vec::new();
        ps.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.starts_with("x,y,z,nx,ny,nz,tag"));
        assert_eq!(text.matches("neumann").count(), 4);
        assert_eq!(ps.count(Tag::Neumann) + ps.count(Tag::Dirichlet), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn surface_residence_and_outward_normals(shape in 0usize..4, n in 1usize..300, seed in 0u64..1000) {
            let d = &shapes()[shape];
            for (x, nrm) in sample_boundary(d, n, seed).unwrap() {
                prop_assert!(d.signed_distance(x).abs() <= 1e-10);
                prop_assert!((norm(nrm) - 1.0).abs() <= 1e-12);
                let out = [0, 1, 2].map(|i| x[i] + 1e-6 * nrm[i]);
                let inn = [0, 1, 2].map(|i| x[i] - 1e-6 * nrm[i]);
                prop_assert!(d.signed_distance(out) > 0.0);
                prop_assert!(d.signed_distance(inn) < 0.0);
            }
        }

        #[test]
        fn interior_points_strictly_inside(shape in 0usize..4, n in 1usize..400, seed in 0u64..1000, grid in any::<bool>()) {
            let d = &shapes()[shape];
            let strategy = if grid { SamplingStrategy::Grid } else { SamplingStrategy::Halton };
            let pts = sample_interior(d, n, strategy, seed).unwrap();
            prop_assert_eq!(pts.len(), n);
            for x in pts {
                prop_assert!(d.signed_distance(x) < -d.interior_margin());
            }
        }
    }
}
