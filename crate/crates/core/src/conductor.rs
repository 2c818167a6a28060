//! Finite candidate sets discretizing conductors.

use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::{sq_distance, Configuration};

/// Ordered finite point set in `R^p` with a representative spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    dim: usize,
    coords: Vec<f64>,
    mesh_scale: f64,
    label: String,
}

impl CandidateSet {
    /// Validates the invariants: at least two distinct points and `0 < h <= diam`.
    pub fn new(dim: usize, coords: Vec<f64>, mesh_scale: f64, label: impl Into<String>) -> Result<Self> {
        let cfg = Configuration::new(dim, coords)?;
        let coords = cfg.coords().to_vec();
        let set = Self {
            dim,
            coords,
            mesh_scale,
            label: label.into(),
        };
        if set.len() < 2 {
            return Err(Error::TooFewPoints {
                required: 2,
                found: set.len(),
            });
        }
        let first = set.point(0);
        if set.points().all(|p| p == first) {
            return Err(Error::InvalidParameter(
                "candidate set needs at least 2 distinct points".into(),
            ));
        }
        if !(mesh_scale > 0.0) || !mesh_scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mesh scale must be > 0, got {mesh_scale}"
            )));
        }
        // the bounding-box diagonal bounds the diameter from above
        let (lo, hi) = set.bounding_box();
        let diag = sq_distance(&lo, &hi).sqrt();
        if mesh_scale > diag * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "mesh scale {mesh_scale} exceeds set diameter bound {diag}"
            )));
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn mesh_scale(&self) -> f64 {
        self.mesh_scale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for d in 0..self.dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    /// Index of the candidate nearest to `x` (lowest index on ties).
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut best = (f64::INFINITY, 0);
        for (i, p) in self.points().enumerate() {
            let d = sq_distance(p, x);
            if d < best.0 {
                best = (d, i);
            }
        }
        Ok(best.1)
    }

    /// The configuration formed by the given candidate indices, in order.
    pub fn configuration(&self, indices: &[usize]) -> Configuration {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Configuration::new(self.dim, coords).expect("candidate dimension is consistent")
    }
}

/// `m` equally spaced points on `[a, b]`, endpoints included.
pub fn interval_grid(a: f64, b: f64, m: usize) -> Result<CandidateSet> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("interval needs a < b, got [{a}, {b}]")));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("interval grid needs M >= 2, got {m}")));
    }
    let coords = axis(a, b, m);
    CandidateSet::new(1, coords, (b - a) / (m - 1) as f64, format!("interval[{a},{b}]x{m}"))
}

/// Tensor grid with `m` points per axis on the box `[lower, upper]`.
pub fn box_grid(lower: &[f64], upper: &[f64], m: usize) -> Result<CandidateSet> {
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch {
            expected: lower.len(),
            found: upper.len(),
        });
    }
    if lower.is_empty() {
        return Err(Error::InvalidParameter("box needs dimension >= 1".into()));
    }
    if lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
        return Err(Error::InvalidParameter(format!(
            "degenerate box: lower {lower:?} must be < upper {upper:?} componentwise"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("box grid needs M >= 2 per axis, got {m}")));
    }
    let axes: Vec<Vec<f64>> = lower.iter().zip(upper).map(|(&l, &u)| axis(l, u, m)).collect();
    let h = lower
        .iter()
        .zip(upper)
        .map(|(l, u)| (u - l) / (m - 1) as f64)
        .fold(0.0, f64::max);
    let coords = tensor(&axes, |_| true);
    CandidateSet::new(lower.len(), coords, h, format!("box{lower:?}-{upper:?}x{m}"))
}

/// Tensor grid on `[-radius, radius]^p` intersected with the closed ball.
pub fn ball_grid(radius: f64, p: usize, m: usize) -> Result<CandidateSet> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("ball radius must be > 0, got {radius}")));
    }
    if p == 0 {
        return Err(Error::InvalidParameter("ball dimension must be >= 1".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!("ball grid needs M >= 2 per axis, got {m}")));
    }
    let ax = axis(-radius, radius, m);
    let axes = vec![ax; p];
    let r2 = radius * radius * (1.0 + 1e-12);
    let coords = tensor(&axes, |x| x.iter().map(|v| v * v).sum::<f64>() <= r2);
    let count = coords.len() / p;
    if count < 2 {
        return Err(Error::InvalidParameter(format!(
            "ball grid with {m} points per axis leaves {count} points inside radius {radius}"
        )));
    }
    let h = 2.0 * radius / (m - 1) as f64;
    CandidateSet::new(p, coords, h, format!("ball(r={radius},p={p})x{m}"))
}

/// `m` quasi-uniform points on the unit sphere `S^2` (Fibonacci spiral).
pub fn sphere_points(p: usize, m: usize) -> Result<CandidateSet> {
    if p != 3 {
        return Err(Error::Unsupported(format!("sphere points only for p = 3, got {p}")));
    }
    if m < 4 {
        return Err(Error::InvalidParameter(format!("sphere needs M >= 4, got {m}")));
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut coords = Vec::with_capacity(3 * m);
    for i in 0..m {
        let z = 1.0 - (2 * i + 1) as f64 / m as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * i as f64;
        coords.extend_from_slice(&[r * phi.cos(), r * phi.sin(), z]);
    }
    let h = min_pairwise_distance(3, &coords);
    CandidateSet::new(3, coords, h, format!("sphere x{m}"))
}

/// Reads a comma-separated point cloud, one point per row.
///
/// A first row that does not parse as numbers is taken to be a header.
pub fn load_points(path: impl AsRef<Path>) -> Result<CandidateSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_points(&text, &path.display().to_string())
}

pub fn parse_points(text: &str, label: &str) -> Result<CandidateSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut dim = 0;
    let mut coords = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 1;
        let record = record.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if coords.is_empty() && dim == 0 && record.iter().all(|f| f.parse::<f64>().is_err()) => {
                // header row
                continue;
            }
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    msg: e.to_string(),
                })
            }
        };
        if dim == 0 {
            dim = values.len();
        } else if values.len() != dim {
            return Err(Error::Parse {
                line,
                msg: format!("expected {dim} columns, found {}", values.len()),
            });
        }
        coords.extend(values);
    }
    if dim == 0 {
        return Err(Error::TooFewPoints { required: 2, found: 0 });
    }
    let h = min_pairwise_distance(dim, &coords);
    if !h.is_finite() {
        return Err(Error::InvalidParameter(
            "candidate set needs at least 2 distinct points".into(),
        ));
    }
    CandidateSet::new(dim, coords, h, label)
}

/// Smallest nonzero distance between points, `+inf` if all points coincide.
pub fn min_pairwise_distance(dim: usize, coords: &[f64]) -> f64 {
    let pts: Vec<&[f64]> = coords.chunks_exact(dim).collect();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = sq_distance(pts[i], pts[j]);
            if d > 0.0 && d < best {
                best = d;
            }
        }
    }
    best.sqrt()
}

// Equally spaced axis; the upper half is measured from `b` so that symmetric
// intervals give grids that are exactly closed under negation.
fn axis(a: f64, b: f64, m: usize) -> Vec<f64> {
    let n = (m - 1) as f64;
    (0..m)
        .map(|i| {
            if 2 * i <= m - 1 {
                a + (b - a) * (i as f64 / n)
            } else {
                b - (b - a) * ((m - 1 - i) as f64 / n)
            }
        })
        .collect()
}

// Row-major tensor product; the last axis varies fastest.
fn tensor(axes: &[Vec<f64>], keep: impl Fn(&[f64]) -> bool) -> Vec<f64> {
    let p = axes.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; p];
    let mut x = vec![0.0; p];
    loop {
        for d in 0..p {
            x[d] = axes[d][idx[d]];
        }
        if keep(&x) {
            out.extend_from_slice(&x);
        }
        let mut d = p;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn exact_diameter(c: &CandidateSet) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                d = d.max(sq_distance(c.point(i), c.point(j)));
            }
        }
        d.sqrt()
    }

    #[test]
    fn interval_examples() {
        let g = interval_grid(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.coords(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.mesh_scale(), 0.5);
        let g = interval_grid(0.0, 1.0, 2).unwrap();
        assert_eq!(g.coords(), &[0.0, 1.0]);
        assert_eq!(g.mesh_scale(), 1.0);
        let g = interval_grid(-1.0, 1.0, 2001).unwrap();
        assert_eq!(g.len(), 2001);
        assert!((g.mesh_scale() - 0.001).abs() < 1e-15);
        assert_eq!(g.point(1000), &[0.0]);
        assert!(interval_grid(1.0, 1.0, 3).is_err());
        assert!(interval_grid(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn box_examples() {
        let g = box_grid(&[0.0, 0.0], &[1.0, 1.0], 3).unwrap();
        assert_eq!(g.len(), 9);
        assert!(g.points().any(|p| p == [0.5, 0.5]));
        let g = box_grid(&[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
        assert_eq!(g.coords(), &[0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
        let g = box_grid(&[0.0, 0.0], &[1.0, 1.0], 101).unwrap();
        assert_eq!(g.len(), 10201);
        assert!((g.mesh_scale() - 0.01).abs() < 1e-15);
        assert_eq!(g.point(0), &[0.0, 0.0]);
        assert!(box_grid(&[0.0, 1.0], &[1.0, 1.0], 3).is_err());
    }

    #[test]
    fn ball_examples() {
        let g = ball_grid(1.0, 2, 3).unwrap();
        assert_eq!(g.len(), 5);
        for p in [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
            assert!(g.points().any(|q| q == p));
        }
        assert!(ball_grid(1.0, 2, 2).is_err());

        let g = ball_grid(1.0, 3, 21).unwrap();
        // independent filter over integer lattice: |(i,j,k)| <= 10
        let mut brute = 0;
        for i in -10i32..=10 {
            for j in -10i32..=10 {
                for k in -10i32..=10 {
                    if i * i + j * j + k * k <= 100 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(g.len(), brute);
        assert!(g.points().all(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1.0 + 1e-12));
    }

    #[test]
    fn sphere_examples() {
        let g = sphere_points(3, 4).unwrap();
        assert_eq!(g.len(), 4);
        for p in g.points() {
            assert!((p.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() < 1e-12);
        }
        let g = sphere_points(3, 100).unwrap();
        assert!(g.mesh_scale() > 0.0);
        let mut mean = [0.0; 3];
        for p in g.points() {
            for d in 0..3 {
                mean[d] += p[d] / 100.0;
            }
        }
        assert!(mean.iter().map(|v| v * v).sum::<f64>().sqrt() <= 0.05);
        assert!(sphere_points(2, 10).is_err());
    }

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_examples() {
        let f = write_tmp("-1\n0\n1\n");
        let c = load_points(f.path()).unwrap();
        assert_eq!(c.dim(), 1);
        assert_eq!(c.coords(), &[-1.0, 0.0, 1.0]);
        assert_eq!(c.mesh_scale(), 1.0);

        let f = write_tmp("0,0\n1,0\n");
        let c = load_points(f.path()).unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.mesh_scale(), 1.0);

        let f = write_tmp("0,0\n0,0\n");
        assert!(load_points(f.path()).is_err());
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            parse_points("0,0\n1\n", "t"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_points("0\nabc\n", "t"), Err(Error::Parse { line: 2, .. })));
        let c = parse_points("x1,x2\n0,0\n3,4\n", "t").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.mesh_scale(), 5.0);
        assert!(load_points("/nonexistent/points.csv").is_err());
    }

    #[test]
    fn generated_sets_satisfy_invariants() {
        let sets = [
            interval_grid(-2.0, 3.0, 17).unwrap(),
            box_grid(&[0.0, -1.0], &[1.0, 2.0], 7).unwrap(),
            ball_grid(1.3, 3, 9).unwrap(),
            sphere_points(3, 30).unwrap(),
        ];
        for s in &sets {
            assert!(s.mesh_scale() > 0.0);
            assert!(s.mesh_scale() <= exact_diameter(s));
            assert!(s.len() >= 2);
        }
    }

    proptest! {
        #[test]
        fn symmetric_interval_closed_under_negation(c in 0.01f64..100.0, m in 2usize..400) {
            let g = interval_grid(-c, c, m).unwrap();
            for i in 0..m {
                prop_assert_eq!(g.point(i)[0], -g.point(m - 1 - i)[0]);
            }
        }

        #[test]
        fn ball_inside_radius(r in 0.1f64..5.0, m in 3usize..12, p in 2usize..4) {
            if let Ok(g) = ball_grid(r, p, m) {
                for x in g.points() {
                    prop_assert!(x.iter().map(|v| v * v).sum::<f64>().sqrt() <= r + 1e-12);
                }
            }
        }
    }
}
