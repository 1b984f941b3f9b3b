//! Scattered sample sites, fixed-radius neighborhoods, and the compactly
//! supported weight kernel.
//!
//! Neighborhoods are built between a source cloud (where the field is
//! sampled) and a target cloud (where functionals are estimated). Distances
//! honor an optional periodic box through the minimum-image convention.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{from_f64, to_f64, Real};

/// Scattered sample sites in 1 or 2 spatial dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
    periodic: Option<Vec<T>>,
}

impl<T: Real> PointCloud<T> {
    /// Builds a cloud from flattened coordinates (`len = n * dim`).
    pub fn new(dim: usize, coords: Vec<T>, periodic: Option<Vec<T>>) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(Error::InvalidArgument(format!(
                "spatial dimension must be 1 or 2, got {dim}"
            )));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "coordinate buffer length {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                context: "point cloud coordinates",
            });
        }
        if let Some(box_lengths) = &periodic {
            if box_lengths.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "periodic box",
                    expected: dim,
                    got: box_lengths.len(),
                });
            }
            if box_lengths.iter().any(|l| *l <= T::zero()) {
                return Err(Error::InvalidArgument(
                    "periodic box lengths must be positive".into(),
                ));
            }
            for (i, chunk) in coords.chunks(dim).enumerate() {
                for (k, &c) in chunk.iter().enumerate() {
                    if c < T::zero() || c >= box_lengths[k] {
                        return Err(Error::InvalidArgument(format!(
                            "point {i} coordinate {k} = {} outside periodic box [0, {})",
                            to_f64(c),
                            to_f64(box_lengths[k])
                        )));
                    }
                }
            }
        }
        Ok(Self {
            dim,
            coords,
            periodic,
        })
    }

    /// Uniformly spaced 1D sites `start + i*h`, endpoint included.
    pub fn line(n: usize, start: T, end: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("line cloud needs >= 2 points".into()));
        }
        let h = (end - start) / from_usize_t::<T>(n - 1);
        let coords = (0..n).map(|i| start + h * from_usize_t::<T>(i)).collect();
        Self::new(1, coords, None)
    }

    /// `n` equispaced sites on a periodic interval of length `period`
    /// (`x_i = i * period / n`).
    pub fn periodic_line(n: usize, period: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("line cloud needs >= 2 points".into()));
        }
        let h = period / from_usize_t::<T>(n);
        let coords = (0..n).map(|i| h * from_usize_t::<T>(i)).collect();
        Self::new(1, coords, Some(vec![period]))
    }

    /// `nx * ny` equispaced sites on a periodic box of the given side lengths.
    pub fn periodic_grid(nx: usize, ny: usize, lengths: [T; 2]) -> Result<Self> {
        let hx = lengths[0] / from_usize_t::<T>(nx);
        let hy = lengths[1] / from_usize_t::<T>(ny);
        let mut coords = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                coords.push(hx * from_usize_t::<T>(i));
                coords.push(hy * from_usize_t::<T>(j));
            }
        }
        Self::new(2, coords, Some(lengths.to_vec()))
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// True when the cloud holds no points.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Spatial dimension (1 or 2).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Per-axis period lengths, if the cloud is periodic.
    pub fn periodic_box(&self) -> Option<&[T]> {
        self.periodic.as_deref()
    }

    /// Flattened coordinate buffer.
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Minimum-image displacement `to - from`, written into `out[..dim]`.
    pub fn displacement(&self, from: &[T], to: &[T], out: &mut [T]) {
        for k in 0..self.dim {
            let mut d = to[k] - from[k];
            if let Some(box_lengths) = &self.periodic {
                let period = box_lengths[k];
                d -= period * (d / period).round();
            }
            out[k] = d;
        }
    }

    /// Minimum-image Euclidean distance between two raw positions.
    pub fn distance(&self, from: &[T], to: &[T]) -> T {
        let mut delta = [T::zero(); 2];
        self.displacement(from, to, &mut delta[..self.dim]);
        norm(&delta[..self.dim])
    }

    /// Translates every point by `shift` (wrapping into the box if periodic).
    pub fn translated(&self, shift: &[T]) -> Result<Self> {
        let mut coords = self.coords.clone();
        for chunk in coords.chunks_mut(self.dim) {
            for k in 0..self.dim {
                chunk[k] += shift[k];
                if let Some(box_lengths) = &self.periodic {
                    let period = box_lengths[k];
                    chunk[k] -= period * (chunk[k] / period).floor();
                }
            }
        }
        Self::new(self.dim, coords, self.periodic.clone())
    }

    /// Deterministic random subsample of `count` points (used as the target
    /// cloud of strided layers and pooling stages).
    pub fn subsample(&self, count: usize, seed: u64) -> Result<Self> {
        if count == 0 || count > self.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot subsample {count} of {} points",
                self.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices: Vec<usize> = (0..self.len()).collect();
        indices.shuffle(&mut rng);
        indices.truncate(count);
        indices.sort_unstable();
        let mut coords = Vec::with_capacity(count * self.dim);
        for &i in &indices {
            coords.extend_from_slice(self.point(i));
        }
        Self::new(self.dim, coords, self.periodic.clone())
    }

    /// Fingerprint of the cloud geometry, mixed into provenance hashes.
    pub fn fingerprint(&self) -> u64 {
        let mut h = fnv_seed();
        h = fnv_u64(h, self.dim as u64);
        for &c in &self.coords {
            h = fnv_u64(h, to_f64(c).to_bits());
        }
        if let Some(box_lengths) = &self.periodic {
            for &l in box_lengths {
                h = fnv_u64(h, to_f64(l).to_bits());
            }
        }
        h
    }
}

#[inline]
fn from_usize_t<T: Real>(n: usize) -> T {
    crate::scalar::from_usize(n)
}

fn norm<T: Real>(v: &[T]) -> T {
    let mut s = T::zero();
    for &x in v {
        s += x * x;
    }
    s.sqrt()
}

pub(crate) fn fnv_seed() -> u64 {
    0xcbf2_9ce4_8422_2325
}

pub(crate) fn fnv_u64(mut h: u64, x: u64) -> u64 {
    for byte in x.to_le_bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Compactly supported radial weight `(1 - r/epsilon)^power` for `r < epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightKernel<T> {
    epsilon: T,
    power: u32,
}

impl<T: Real> WeightKernel<T> {
    pub fn new(epsilon: T, power: u32) -> Result<Self> {
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(
                "kernel support radius must be positive and finite".into(),
            ));
        }
        Ok(Self { epsilon, power })
    }

    /// Support radius.
    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Exponent of the cutoff polynomial.
    pub fn power(&self) -> u32 {
        self.power
    }

    /// Kernel value at radius `r >= 0`; zero at and beyond the support radius.
    pub fn weight(&self, r: T) -> T {
        if r >= self.epsilon {
            return T::zero();
        }
        (T::one() - r / self.epsilon).powi(self.power as i32)
    }

    /// Radial derivative `d w / d r`; zero outside the support.
    pub fn weight_derivative(&self, r: T) -> T {
        if r >= self.epsilon || self.power == 0 {
            return T::zero();
        }
        let p = from_f64::<T>(self.power as f64);
        -(p / self.epsilon) * (T::one() - r / self.epsilon).powi(self.power as i32 - 1)
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        let mut h = fnv_seed();
        h = fnv_u64(h, to_f64(self.epsilon).to_bits());
        h = fnv_u64(h, self.power as u64);
        h
    }
}

/// Fixed-radius adjacency between a source and a target cloud.
///
/// For each target index the stored source indices are strictly closer than
/// the query radius and sorted ascending, so a list is a deterministic
/// function of the two clouds and the radius.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList<T> {
    offsets: Vec<usize>,
    indices: Vec<usize>,
    distances: Vec<T>,
}

impl<T: Real> NeighborList<T> {
    /// Number of target points.
    pub fn target_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Source indices adjacent to target `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Distances matching [`Self::neighbors`].
    pub fn distances(&self, i: usize) -> &[T] {
        &self.distances[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Neighbor count of target `i`.
    pub fn count(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }
}

fn check_compatible<T: Real>(source: &PointCloud<T>, target: &PointCloud<T>) -> Result<()> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            context: "neighbor query clouds",
            expected: source.dim(),
            got: target.dim(),
        });
    }
    let same_periodicity = match (source.periodic_box(), target.periodic_box()) {
        (None, None) => true,
        (Some(a), Some(b)) => a == b,
        _ => false,
    };
    if !same_periodicity {
        return Err(Error::InvalidArgument(
            "source and target clouds must share periodicity".into(),
        ));
    }
    Ok(())
}

/// Builds the fixed-radius neighbor list, dispatching to the uniform-grid
/// index for large queries. Both paths return identical lists.
pub fn build_neighbors<T: Real>(
    source: &PointCloud<T>,
    target: &PointCloud<T>,
    epsilon: T,
) -> Result<NeighborList<T>> {
    if source.len() * target.len() > 32_768 {
        build_neighbors_grid(source, target, epsilon)
    } else {
        build_neighbors_brute(source, target, epsilon)
    }
}

/// Reference quadratic-scan neighbor search.
pub fn build_neighbors_brute<T: Real>(
    source: &PointCloud<T>,
    target: &PointCloud<T>,
    epsilon: T,
) -> Result<NeighborList<T>> {
    check_compatible(source, target)?;
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument("query radius must be positive".into()));
    }
    let mut offsets = Vec::with_capacity(target.len() + 1);
    let mut indices = Vec::new();
    let mut distances = Vec::new();
    offsets.push(0);
    for i in 0..target.len() {
        let t = target.point(i);
        for j in 0..source.len() {
            let r = source.distance(t, source.point(j));
            if r < epsilon {
                indices.push(j);
                distances.push(r);
            }
        }
        if indices.len() == *offsets.last().unwrap() {
            return Err(Error::EmptyNeighborhood { target: i });
        }
        offsets.push(indices.len());
    }
    Ok(NeighborList {
        offsets,
        indices,
        distances,
    })
}

/// Uniform-grid accelerated neighbor search. Produces exactly the list the
/// brute-force scan produces.
pub fn build_neighbors_grid<T: Real>(
    source: &PointCloud<T>,
    target: &PointCloud<T>,
    epsilon: T,
) -> Result<NeighborList<T>> {
    check_compatible(source, target)?;
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument("query radius must be positive".into()));
    }
    let dim = source.dim();
    let eps = to_f64(epsilon);

    // Grid extents: the periodic box when present, else the bounding box of
    // both clouds. Cell edge >= epsilon so a one-ring scan is sufficient.
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let periodic = source.periodic_box().map(|b| {
        let mut p = [0.0f64; 2];
        for (k, &l) in b.iter().enumerate() {
            p[k] = to_f64(l);
        }
        p
    });
    if periodic.is_some() {
        for k in 0..dim {
            lo[k] = 0.0;
            hi[k] = periodic.unwrap()[k];
        }
    } else {
        for cloud in [source, target] {
            for i in 0..cloud.len() {
                for (k, &c) in cloud.point(i).iter().enumerate() {
                    let c = to_f64(c);
                    lo[k] = lo[k].min(c);
                    hi[k] = hi[k].max(c);
                }
            }
        }
    }

    let mut cells = [1usize; 2];
    let mut cell_size = [1.0f64; 2];
    for k in 0..dim {
        let extent = (hi[k] - lo[k]).max(eps * 1e-9);
        cells[k] = ((extent / eps).floor() as usize).max(1);
        if periodic.is_none() {
            // Non-periodic: cells may exceed the extent; size stays >= eps.
            cell_size[k] = extent / cells[k] as f64;
            if cell_size[k] < eps {
                cell_size[k] = eps;
                cells[k] = ((extent / eps).ceil() as usize).max(1);
            }
        } else {
            cell_size[k] = extent / cells[k] as f64;
        }
    }

    let cell_of = |p: &[T]| -> [usize; 2] {
        let mut c = [0usize; 2];
        for k in 0..dim {
            let x = to_f64(p[k]) - lo[k];
            let idx = (x / cell_size[k]).floor() as isize;
            c[k] = idx.clamp(0, cells[k] as isize - 1) as usize;
        }
        c
    };
    let flat = |c: [usize; 2]| -> usize { c[1] * cells[0] + c[0] };

    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); cells[0] * cells[1].max(1)];
    for j in 0..source.len() {
        buckets[flat(cell_of(source.point(j)))].push(j);
    }

    let ring = |c: usize, k: usize| -> Vec<usize> {
        let n = cells[k] as isize;
        let mut out = Vec::with_capacity(3);
        for d in -1..=1isize {
            let mut idx = c as isize + d;
            if periodic.is_some() {
                idx = idx.rem_euclid(n);
            } else if idx < 0 || idx >= n {
                continue;
            }
            let idx = idx as usize;
            if !out.contains(&idx) {
                out.push(idx);
            }
        }
        out
    };

    let mut offsets = Vec::with_capacity(target.len() + 1);
    let mut indices = Vec::new();
    let mut distances = Vec::new();
    offsets.push(0);
    let mut candidates: Vec<usize> = Vec::new();
    for i in 0..target.len() {
        let t = target.point(i);
        let c = cell_of(t);
        candidates.clear();
        let cols = ring(c[0], 0);
        if dim == 1 {
            for &cx in &cols {
                candidates.extend_from_slice(&buckets[cx]);
            }
        } else {
            for &cy in &ring(c[1], 1) {
                for &cx in &cols {
                    candidates.extend_from_slice(&buckets[flat([cx, cy])]);
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        for &j in candidates.iter() {
            let r = source.distance(t, source.point(j));
            if r < epsilon {
                indices.push(j);
                distances.push(r);
            }
        }
        if indices.len() == *offsets.last().unwrap() {
            return Err(Error::EmptyNeighborhood { target: i });
        }
        offsets.push(indices.len());
    }
    Ok(NeighborList {
        offsets,
        indices,
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cloud_1d(xs: &[f64]) -> PointCloud<f64> {
        PointCloud::new(1, xs.to_vec(), None).unwrap()
    }

    #[test]
    fn three_point_line_neighbors() {
        let c = cloud_1d(&[0.0, 0.5, 1.0]);
        let nl = build_neighbors_brute(&c, &c, 0.6).unwrap();
        assert_eq!(nl.neighbors(0), &[0, 1]);
        assert_eq!(nl.neighbors(1), &[0, 1, 2]);
        assert_eq!(nl.neighbors(2), &[1, 2]);
    }

    #[test]
    fn periodic_wrap_distance() {
        let c = PointCloud::new(1, vec![0.05, 0.95], Some(vec![1.0])).unwrap();
        let nl = build_neighbors_brute(&c, &c, 0.2).unwrap();
        assert_eq!(nl.neighbors(0), &[0, 1]);
        assert_eq!(nl.neighbors(1), &[0, 1]);
        let r = nl.distances(0)[1];
        assert!((r - 0.1).abs() < 1e-14);
    }

    #[test]
    fn zero_neighbors_is_an_error() {
        let src = cloud_1d(&[0.0, 1.0]);
        let tgt = cloud_1d(&[10.0]);
        let err = build_neighbors_brute(&src, &tgt, 0.5).unwrap_err();
        assert!(matches!(err, Error::EmptyNeighborhood { target: 0 }));
    }

    #[test]
    fn dim_mismatch_is_an_error() {
        let a = cloud_1d(&[0.0, 1.0]);
        let b = PointCloud::new(2, vec![0.0, 0.0], None).unwrap();
        assert!(build_neighbors_brute(&a, &b, 0.5).is_err());
    }

    #[test]
    fn weight_kernel_values() {
        let k = WeightKernel::new(1.0, 2).unwrap();
        assert_eq!(k.weight(0.0), 1.0);
        assert!((k.weight(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(k.weight(1.1), 0.0);
        assert_eq!(k.weight(1.0), 0.0);
    }

    #[test]
    fn weight_continuous_at_support_boundary() {
        let k = WeightKernel::new(2.0, 1).unwrap();
        let just_inside = k.weight(2.0 - 1e-12);
        assert!(just_inside.abs() < 1e-11);
        assert_eq!(k.weight(2.0), 0.0);
    }

    #[test]
    fn weight_monotone_nonincreasing() {
        let k = WeightKernel::new(0.7, 4).unwrap();
        let mut prev = k.weight(0.0);
        for i in 1..100 {
            let r = 0.7 * i as f64 / 90.0;
            let w = k.weight(r);
            assert!(w <= prev + 1e-15);
            prev = w;
        }
    }

    #[test]
    fn weight_derivative_matches_finite_difference() {
        let k = WeightKernel::new(0.9, 4).unwrap();
        for &r in &[0.1, 0.3, 0.62, 0.85] {
            let h = 1e-6;
            let fd = (k.weight(r + h) - k.weight(r - h)) / (2.0 * h);
            assert!((k.weight_derivative(r) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_matches_brute_force_on_random_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for case in 0..100 {
            let dim = if case % 2 == 0 { 1 } else { 2 };
            let n = 30 + (case % 7) * 17;
            let periodic = case % 3 == 0;
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
            let boxv = periodic.then(|| vec![1.0; dim]);
            let cloud = PointCloud::new(dim, coords, boxv).unwrap();
            let eps = 0.05 + 0.2 * rng.gen::<f64>();
            let brute = build_neighbors_brute(&cloud, &cloud, eps);
            let grid = build_neighbors_grid(&cloud, &cloud, eps);
            match (brute, grid) {
                (Ok(b), Ok(g)) => assert_eq!(b, g, "case {case}"),
                (Err(_), Err(_)) => {}
                (b, g) => panic!("case {case}: brute {b:?} vs grid {g:?}"),
            }
        }
    }

    #[test]
    fn grid_matches_brute_force_on_uniform_square() {
        // 400 uniform points in the unit square.
        let mut coords = Vec::new();
        for j in 0..20 {
            for i in 0..20 {
                coords.push(i as f64 / 19.0);
                coords.push(j as f64 / 19.0);
            }
        }
        let cloud = PointCloud::new(2, coords, None).unwrap();
        let b = build_neighbors_brute(&cloud, &cloud, 0.12).unwrap();
        let g = build_neighbors_grid(&cloud, &cloud, 0.12).unwrap();
        assert_eq!(b, g);
    }

    #[test]
    fn self_query_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let coords: Vec<f64> = (0..60).map(|_| rng.gen::<f64>()).collect();
        let cloud = PointCloud::new(2, coords, None).unwrap();
        let nl = build_neighbors_brute(&cloud, &cloud, 0.35).unwrap();
        for i in 0..cloud.len() {
            for &j in nl.neighbors(i) {
                assert!(nl.neighbors(j).contains(&i));
            }
        }
    }

    #[test]
    fn subsample_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coords: Vec<f64> = (0..50).map(|_| rng.gen::<f64>()).collect();
        let cloud = PointCloud::new(1, coords, None).unwrap();
        let a = cloud.subsample(20, 99).unwrap();
        let b = cloud.subsample(20, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
    }
}
