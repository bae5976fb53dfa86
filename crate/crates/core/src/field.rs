//! Discrete model of `ℝ^n` as a periodic grid, of the upper half-space as
//! grid × log-spaced scales, and of cones, Carleson boxes and balls with
//! quadrature weights.
//!
//! Geometry parameters (period, scales, radii) are plain `f64`; sample data
//! and quadrature weights live in the generic scalar `T`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::space::BanachSpaceDesc;

/// Periodic grid with `n` samples per axis on `[0, period)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub dim: usize,
    pub n: usize,
    pub period: f64,
}

impl SpatialGrid {
    pub fn new(dim: usize, n: usize, period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("grid dimension {dim} not in {{1, 2}}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("samples per axis {n} is not a power of two ≥ 2")));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!("period {period} must be positive")));
        }
        Ok(Self { dim, n, period })
    }

    pub fn line(n: usize, period: f64) -> Result<Self> {
        Self::new(1, n, period)
    }

    /// Number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Cell measure `Δy^n`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total measure `L^n` of the torus.
    pub fn volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    pub fn log2_n(&self) -> u32 {
        self.n.trailing_zeros()
    }

    /// Axis indices of flat index `i` (row-major; the second entry is 0 in 1-D).
    #[inline]
    pub fn coords(&self, i: usize) -> [usize; 2] {
        if self.dim == 1 {
            [i, 0]
        } else {
            [i / self.n, i % self.n]
        }
    }

    #[inline]
    pub fn flat(&self, c: [usize; 2]) -> usize {
        if self.dim == 1 {
            c[0]
        } else {
            c[0] * self.n + c[1]
        }
    }

    /// Coordinates of grid point `i`.
    pub fn point(&self, i: usize) -> [f64; 2] {
        let c = self.coords(i);
        let h = self.spacing();
        [c[0] as f64 * h, c[1] as f64 * h]
    }

    /// Flat index of `i` translated by the integer offset `off` (periodic).
    #[inline]
    pub fn offset(&self, i: usize, off: [isize; 2]) -> usize {
        let mask = self.n - 1;
        if self.dim == 1 {
            ((i as isize + off[0]) as usize) & mask
        } else {
            let r = ((i / self.n) as isize + off[0]) as usize & mask;
            let c = ((i % self.n) as isize + off[1]) as usize & mask;
            r * self.n + c
        }
    }

    /// Representative of an integer offset in `[-n/2, n/2)` per axis.
    #[inline]
    fn wrap_offset(&self, m: isize) -> isize {
        let n = self.n as isize;
        let r = m.rem_euclid(n);
        if r >= n / 2 {
            r - n
        } else {
            r
        }
    }

    /// Torus distance of an integer offset.
    #[inline]
    pub fn offset_dist(&self, off: [isize; 2]) -> f64 {
        let a = self.wrap_offset(off[0]) as f64;
        let b = if self.dim == 1 { 0.0 } else { self.wrap_offset(off[1]) as f64 };
        (a * a + b * b).sqrt() * self.spacing()
    }

    /// Torus distance between grid points `i` and `j`, computed from integer offsets.
    pub fn index_dist(&self, i: usize, j: usize) -> f64 {
        let a = self.coords(i);
        let b = self.coords(j);
        self.offset_dist([b[0] as isize - a[0] as isize, b[1] as isize - a[1] as isize])
    }

    /// Radii of the dyadic ball family `{L·2^{-j} : j = 2..=log₂ N}`, largest first.
    pub fn dyadic_radii(&self) -> Vec<f64> {
        (2..=self.log2_n())
            .map(|j| self.period / (1u64 << j) as f64)
            .collect()
    }

    /// Offsets of all grid points at torus distance `< radius`, sorted by
    /// distance (then lexicographically). Each residue appears once.
    pub fn stencil(&self, radius: f64) -> Stencil {
        let half = (self.n / 2) as isize;
        let lo = -half;
        let mut entries: Vec<([isize; 2], f64)> = Vec::new();
        let second: Vec<isize> = if self.dim == 1 { vec![0] } else { (lo..half).collect() };
        for a in lo..half {
            for &b in &second {
                let d = self.offset_dist([a, b]);
                if d < radius {
                    entries.push(([a, b], d));
                }
            }
        }
        entries.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        Stencil {
            offsets: entries.iter().map(|e| e.0).collect(),
        }
    }

    /// Grid points inside `ball`, i.e. at torus distance `< r(B)` from its centre.
    pub fn ball_points(&self, ball: &Ball) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| torus_dist(self, &self.point(i)[..self.dim], &ball.center[..self.dim]) < ball.radius)
            .collect()
    }
}

/// Distance on the torus `ℝ^n / Lℤ^n`.
pub fn torus_dist(grid: &SpatialGrid, x: &[f64], y: &[f64]) -> f64 {
    let l = grid.period;
    x.iter()
        .zip(y)
        .take(grid.dim)
        .map(|(a, b)| {
            let d = (b - a).rem_euclid(l);
            let d = d.min(l - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Integer offsets of a discrete ball, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub offsets: Vec<[isize; 2]>,
}

impl Stencil {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Flat indices of the stencil placed at `i`.
    pub fn around<'a>(&'a self, grid: &'a SpatialGrid, i: usize) -> impl Iterator<Item = usize> + 'a {
        self.offsets.iter().map(move |&o| grid.offset(i, o))
    }
}

/// Log-uniform scale nodes `t_k = t_min·(t_max/t_min)^{k/(K-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

impl ScaleGrid {
    pub fn new(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale range [{t_min}, {t_max}] must satisfy 0 < t_min < t_max"
            )));
        }
        if count < 2 {
            return Err(Error::Empty(format!("scale grid with {count} nodes")));
        }
        Ok(Self { t_min, t_max, count })
    }

    /// `Δlog t`.
    pub fn dlog(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.count - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            self.t_max
        } else {
            self.t_min * (self.dlog() * k as f64).exp()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.node(k)).collect()
    }

    /// Number of nodes with `t_k < min(h, t_max)`; these are the scales a
    /// truncated cone at height `h` sees. `None` is `h = ∞`.
    pub fn cone_levels(&self, h: Option<f64>) -> usize {
        let cap = h.map_or(self.t_max, |h| h.min(self.t_max));
        (0..self.count).take_while(|&k| self.node(k) < cap).count()
    }

    /// The same range sampled twice as finely in `log t`.
    pub fn refined(&self) -> Self {
        Self {
            count: 2 * self.count - 1,
            ..*self
        }
    }
}

/// Ball on the torus; radius restricted to `(0, L/4]` so it does not self-overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Ball {
    pub fn new(grid: &SpatialGrid, center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= grid.period / 4.0) {
            return Err(Error::InvalidParameter(format!(
                "ball radius {radius} outside (0, L/4 = {}]",
                grid.period / 4.0
            )));
        }
        Ok(Self { center, radius })
    }

    /// Ball centred at grid point `i`.
    pub fn at_index(grid: &SpatialGrid, i: usize, radius: f64) -> Result<Self> {
        Self::new(grid, grid.point(i), radius)
    }

    /// Concentric ball with radius scaled by `factor` (not range-checked).
    pub fn dilate(&self, factor: f64) -> Self {
        Self {
            center: self.center,
            radius: self.radius * factor,
        }
    }
}

/// X-valued samples on the spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    pub grid: SpatialGrid,
    pub space: BanachSpaceDesc,
    /// `grid.len() × space.dim` coefficients, point-major.
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(grid: SpatialGrid, space: BanachSpaceDesc, values: Vec<Complex<T>>) -> Result<Self> {
        let expected = grid.len() * space.dim;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { grid, space, values })
    }

    pub fn from_fn(
        grid: SpatialGrid,
        space: BanachSpaceDesc,
        mut f: impl FnMut([f64; 2], usize) -> Complex<T>,
    ) -> Self {
        let mut values = Vec::with_capacity(grid.len() * space.dim);
        for i in 0..grid.len() {
            let p = grid.point(i);
            for c in 0..space.dim {
                values.push(f(p, c));
            }
        }
        Self { grid, space, values }
    }

    /// Scalar function from real samples.
    pub fn scalar_from_real(grid: SpatialGrid, samples: &[T]) -> Result<Self> {
        Self::new(
            grid,
            BanachSpaceDesc::scalar(),
            samples.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        )
    }

    pub fn constant(grid: SpatialGrid, space: BanachSpaceDesc, value: &[Complex<T>]) -> Result<Self> {
        if value.len() != space.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim,
                got: value.len(),
            });
        }
        Ok(Self::from_fn(grid, space, |_, c| value[c]))
    }

    pub fn zeros(grid: SpatialGrid, space: BanachSpaceDesc) -> Self {
        Self {
            grid,
            space,
            values: vec![Complex::new(T::zero(), T::zero()); grid.len() * space.dim],
        }
    }

    #[inline]
    pub fn value(&self, i: usize) -> &[Complex<T>] {
        let d = self.space.dim;
        &self.values[i * d..(i + 1) * d]
    }

    pub fn norms(&self) -> Vec<T> {
        (0..self.grid.len()).map(|i| self.space.norm_of(self.value(i))).collect()
    }

    /// Component `c` as a contiguous grid array.
    pub fn component(&self, c: usize) -> Vec<Complex<T>> {
        let d = self.space.dim;
        self.values.iter().skip(c).step_by(d).copied().collect()
    }

    /// `f(· − v)` for an integer grid vector `v`.
    pub fn shifted(&self, v: [isize; 2]) -> Self {
        let d = self.space.dim;
        let mut out = self.values.clone();
        for i in 0..self.grid.len() {
            let j = self.grid.offset(i, v);
            out[j * d..(j + 1) * d].copy_from_slice(self.value(i));
        }
        Self { values: out, ..self.clone() }
    }

    /// `f(λ·)` for an integer factor `λ`, sampled exactly on the same grid.
    pub fn dilated(&self, factor: usize) -> Self {
        let mut out = Vec::with_capacity(self.values.len());
        for i in 0..self.grid.len() {
            let c = self.grid.coords(i);
            let j = self.grid.flat([(c[0] * factor) % self.grid.n, (c[1] * factor) % self.grid.n]);
            out.extend_from_slice(self.value(j));
        }
        Self { values: out, ..self.clone() }
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.space != other.space {
            return Err(Error::GridMismatch("cannot add functions on different grids/spaces".into()));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    /// Reinterpret the same coefficients as elements of another space of equal dimension.
    pub fn with_space(mut self, space: BanachSpaceDesc) -> Result<Self> {
        if space.dim != self.space.dim {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim,
                got: space.dim,
            });
        }
        self.space = space;
        Ok(self)
    }
}

/// X-valued samples `F(y_i, t_k)` on grid × scales.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceField<T> {
    pub grid: SpatialGrid,
    pub scales: ScaleGrid,
    pub space: BanachSpaceDesc,
    /// Scale-major storage: index `(k·|grid| + i)·d + c`.
    pub values: Vec<Complex<T>>,
}

impl<T: Real> HalfSpaceField<T> {
    pub fn new(
        grid: SpatialGrid,
        scales: ScaleGrid,
        space: BanachSpaceDesc,
        values: Vec<Complex<T>>,
    ) -> Result<Self> {
        let expected = grid.len() * scales.count * space.dim;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            scales,
            space,
            values,
        })
    }

    pub fn zeros(grid: SpatialGrid, scales: ScaleGrid, space: BanachSpaceDesc) -> Self {
        Self {
            grid,
            scales,
            space,
            values: vec![Complex::new(T::zero(), T::zero()); grid.len() * scales.count * space.dim],
        }
    }

    pub fn from_fn(
        grid: SpatialGrid,
        scales: ScaleGrid,
        space: BanachSpaceDesc,
        mut f: impl FnMut(usize, usize, usize) -> Complex<T>,
    ) -> Self {
        let mut values = Vec::with_capacity(grid.len() * scales.count * space.dim);
        for k in 0..scales.count {
            for i in 0..grid.len() {
                for c in 0..space.dim {
                    values.push(f(i, k, c));
                }
            }
        }
        Self {
            grid,
            scales,
            space,
            values,
        }
    }

    #[inline]
    pub fn atom_index(&self, i: usize, k: usize) -> usize {
        k * self.grid.len() + i
    }

    #[inline]
    pub fn value(&self, i: usize, k: usize) -> &[Complex<T>] {
        let d = self.space.dim;
        let a = self.atom_index(i, k);
        &self.values[a * d..(a + 1) * d]
    }

    #[inline]
    pub fn value_mut(&mut self, i: usize, k: usize) -> &mut [Complex<T>] {
        let d = self.space.dim;
        let a = self.atom_index(i, k);
        &mut self.values[a * d..(a + 1) * d]
    }

    /// All samples of one scale, point-major.
    pub fn scale_slice(&self, k: usize) -> &[Complex<T>] {
        let m = self.grid.len() * self.space.dim;
        &self.values[k * m..(k + 1) * m]
    }

    /// `‖F(y_i, t_k)‖²_X` for every atom, scale-major.
    pub fn norms_sqr(&self) -> Vec<T> {
        let d = self.space.dim;
        self.values
            .chunks_exact(d)
            .map(|v| {
                let n = self.space.norm_of(v);
                n * n
            })
            .collect()
    }

    /// Pointwise product `G·F` with a scalar field `G` on the same grids.
    pub fn multiplied_by(&self, g: &HalfSpaceField<T>) -> Result<Self> {
        self.check_same_grids(g)?;
        if !g.space.is_scalar() {
            return Err(Error::NotScalar(g.space.dim));
        }
        let d = self.space.dim;
        let values = self
            .values
            .chunks_exact(d)
            .zip(&g.values)
            .flat_map(|(v, s)| v.iter().map(move |x| x * s))
            .collect();
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self {
            values: self.values.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// `F(· − v, ·)` for an integer grid vector `v`.
    pub fn shifted(&self, v: [isize; 2]) -> Self {
        let mut out = self.clone();
        for k in 0..self.scales.count {
            for i in 0..self.grid.len() {
                let j = self.grid.offset(i, v);
                out.value_mut(j, k).copy_from_slice(self.value(i, k));
            }
        }
        out
    }

    /// Lift onto the grid with twice as many points per axis: the original
    /// samples land on even indices, new points take the average of their
    /// coarse neighbours.
    pub fn refined_spatially(&self) -> Result<Self> {
        let fine = SpatialGrid::new(self.grid.dim, 2 * self.grid.n, self.grid.period)?;
        let d = self.space.dim;
        let half = T::lit(0.5);
        let mut out = Self::zeros(fine, self.scales, self.space);
        for k in 0..self.scales.count {
            for j in 0..fine.len() {
                let c = fine.coords(j);
                let odd: Vec<usize> = (0..self.grid.dim).filter(|&a| c[a] % 2 == 1).collect();
                let base = [c[0] / 2, c[1] / 2];
                // average over the 2^{#odd} coarse corners
                let mut corners = vec![base];
                for &a in &odd {
                    let extra: Vec<[usize; 2]> = corners
                        .iter()
                        .map(|b| {
                            let mut nb = *b;
                            nb[a] = (nb[a] + 1) % self.grid.n;
                            nb
                        })
                        .collect();
                    corners.extend(extra);
                }
                let scale = half.powi(odd.len() as i32);
                let dst = out.value_mut(j, k);
                for corner in corners {
                    let src = self.value(self.grid.flat(corner), k);
                    for c in 0..d {
                        dst[c] += src[c] * scale;
                    }
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn check_same_grids(&self, other: &HalfSpaceField<T>) -> Result<()> {
        if self.grid != other.grid || self.scales != other.scales {
            return Err(Error::GridMismatch(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.grid, self.scales, other.grid, other.scales
            )));
        }
        Ok(())
    }
}

/// One quadrature atom `(y_i, t_k)` with weight `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub i: usize,
    pub k: usize,
    pub weight: T,
}

/// A subset of the discrete half-space with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    pub atoms: Vec<Atom<T>>,
}

impl<T: Real> Region<T> {
    pub fn empty() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sum of weights.
    pub fn measure(&self) -> T {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn contains(&self, i: usize, k: usize) -> bool {
        self.atoms.iter().any(|a| a.i == i && a.k == k)
    }

    pub fn is_subset_of(&self, other: &Region<T>) -> bool {
        self.atoms.iter().all(|a| other.contains(a.i, a.k))
    }

    /// Checks that every atom lies in the `grid × scales` rectangle.
    pub fn check_within(&self, grid: &SpatialGrid, scales: &ScaleGrid) -> Result<()> {
        match self.atoms.iter().find(|a| a.i >= grid.len() || a.k >= scales.count) {
            Some(a) => Err(Error::InvalidParameter(format!(
                "region atom ({}, {}) outside the {}×{} sample rectangle",
                a.i,
                a.k,
                grid.len(),
                scales.count
            ))),
            None => Ok(()),
        }
    }
}

/// `dμ = dy dt / t^{n+1}` weight of atom `(·, t_k)`.
#[inline]
pub fn cone_weight(grid: &SpatialGrid, scales: &ScaleGrid, k: usize) -> f64 {
    grid.cell_measure() * scales.dlog() * scales.node(k).powi(-(grid.dim as i32))
}

/// Truncated cone `Γ_α^h(x) = {(y, t) : |y − x| < α t, t < h}` at an arbitrary point `x`.
/// `h = None` is an untruncated cone.
pub fn cone_region<T: Real>(
    grid: &SpatialGrid,
    scales: &ScaleGrid,
    x: &[f64],
    aperture: f64,
    height: Option<f64>,
) -> Region<T> {
    let levels = scales.cone_levels(height);
    let mut atoms = Vec::new();
    for k in 0..levels {
        let r = aperture * scales.node(k);
        let w = T::lit(cone_weight(grid, scales, k));
        for i in 0..grid.len() {
            if torus_dist(grid, &grid.point(i)[..grid.dim], x) < r {
                atoms.push(Atom { i, k, weight: w });
            }
        }
    }
    Region { atoms }
}

/// Truncated cone with vertex at grid point `x`, membership decided by
/// integer offsets (the same rule the functional sweeps use).
pub fn cone_region_at<T: Real>(
    grid: &SpatialGrid,
    scales: &ScaleGrid,
    x: usize,
    aperture: f64,
    height: Option<f64>,
) -> Region<T> {
    let levels = scales.cone_levels(height);
    let mut atoms = Vec::new();
    for k in 0..levels {
        let w = T::lit(cone_weight(grid, scales, k));
        let stencil = grid.stencil(aperture * scales.node(k));
        atoms.extend(stencil.around(grid, x).map(|i| Atom { i, k, weight: w }));
    }
    Region { atoms }
}

/// Carleson box `B × (0, r(B))` with `dy dt / t` weights.
pub fn box_region<T: Real>(grid: &SpatialGrid, scales: &ScaleGrid, ball: &Ball) -> Region<T> {
    let w = T::lit(grid.cell_measure() * scales.dlog());
    let points = grid.ball_points(ball);
    let mut atoms = Vec::new();
    for k in (0..scales.count).take_while(|&k| scales.node(k) < ball.radius) {
        atoms.extend(points.iter().map(|&i| Atom { i, k, weight: w }));
    }
    Region { atoms }
}
