//! Dyadic cubes and Whitney decompositions, the stopping time `τ`, the
//! Fubini-type comparison and the good-λ measure table.
//!
//! Open sets are unions of grid cells, represented by their centre points.
//! A cube is "in" a set when it holds grid points of that set, and distances
//! to the complement are distances to the complement's grid points. Cubes
//! go three levels below the grid cells, which is fine enough for every
//! point of the set to sit in a cube far from the complement.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{cone_weight, HalfSpaceField, SpatialGrid, Stencil};
use crate::functionals::{c_fun_from, csv_err, ConeFunctional, FunctionalProfile};
use crate::gaussnorm::GaussConfig;
use crate::scalar::Real;

/// Levels below the grid cells available to the Whitney construction.
pub const SUBCELL_LEVELS: u32 = 3;

/// Dyadic cube of side `L·2^{-level}`; with `h = Δy` it is
/// `index·side − h/2 + [0, side)^n`, so level `log₂ N` cubes are the grid cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub index: [u64; 2],
}

impl DyadicCube {
    pub fn side(&self, grid: &SpatialGrid) -> f64 {
        grid.period / (1u64 << self.level) as f64
    }

    /// `√n · side`.
    pub fn diam(&self, grid: &SpatialGrid) -> f64 {
        (grid.dim as f64).sqrt() * self.side(grid)
    }

    /// Lower corner.
    pub fn corner(&self, grid: &SpatialGrid) -> [f64; 2] {
        let s = self.side(grid);
        let h = grid.spacing() / 2.0;
        let c1 = if grid.dim == 2 { self.index[1] as f64 * s - h } else { 0.0 };
        [self.index[0] as f64 * s - h, c1]
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube {
            level: self.level - 1,
            index: [self.index[0] / 2, self.index[1] / 2],
        })
    }

    /// Whether `self ⊆ other`.
    pub fn is_within(&self, other: &DyadicCube) -> bool {
        if self.level < other.level {
            return false;
        }
        let s = self.level - other.level;
        self.index[0] >> s == other.index[0] && self.index[1] >> s == other.index[1]
    }

    /// Translate by `v` cubes of this level (periodic).
    pub fn shifted(&self, grid: &SpatialGrid, v: [i64; 2]) -> DyadicCube {
        let m = 1i64 << self.level;
        let w = |i: u64, d: i64| (i as i64 + d).rem_euclid(m) as u64;
        DyadicCube {
            level: self.level,
            index: [w(self.index[0], v[0]), if grid.dim == 2 { w(self.index[1], v[1]) } else { 0 }],
        }
    }
}

/// Integer geometry in units of `Δy / 2^SUBCELL_LEVELS`.
struct Units {
    dim: usize,
    span: i64,
    jmax: u32,
}

impl Units {
    fn new(grid: &SpatialGrid) -> Self {
        Self {
            dim: grid.dim,
            span: (grid.n as i64) << SUBCELL_LEVELS,
            jmax: grid.log2_n() + SUBCELL_LEVELS,
        }
    }

    fn side(&self, level: u32) -> i64 {
        1i64 << (self.jmax - level)
    }

    /// Position of grid point coordinate `i`: the centre of its cell.
    fn pos(&self, i: usize) -> i64 {
        ((i as i64) << SUBCELL_LEVELS) + (1 << (SUBCELL_LEVELS - 1))
    }

    fn cube_of(&self, grid: &SpatialGrid, x: usize, level: u32) -> DyadicCube {
        let c = grid.coords(x);
        let s = self.side(level);
        let idx = |a: usize| (self.pos(c[a]) / s) as u64;
        DyadicCube {
            level,
            index: [idx(0), if self.dim == 2 { idx(1) } else { 0 }],
        }
    }

    /// Squared torus distance from grid point `z` to the closed cube.
    fn dist2(&self, grid: &SpatialGrid, cube: &DyadicCube, z: usize) -> i64 {
        let s = self.side(cube.level);
        let c = grid.coords(z);
        (0..self.dim)
            .map(|a| {
                let u = (self.pos(c[a]) - cube.index[a] as i64 * s).rem_euclid(self.span);
                let d = if u <= s { 0 } else { (u - s).min(self.span - u) };
                d * d
            })
            .sum()
    }
}

/// Disjoint dyadic cubes covering an open set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyDecomposition {
    pub grid: SpatialGrid,
    pub cubes: Vec<DyadicCube>,
    /// Hash of the source mask.
    pub source: u64,
}

fn mask_id(mask: &[bool]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    mask.hash(&mut h);
    h.finish()
}

/// Maximal cubes among `{Q_x : x ∈ G}`, `Q_x` the smallest dyadic cube
/// containing `x` with `d(Q, G^c) ≤ 4 diam(Q)`. `mask[i]` marks grid point
/// `i` as a member of `G`.
pub fn whitney(grid: &SpatialGrid, mask: &[bool]) -> Result<WhitneyDecomposition> {
    if mask.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            got: mask.len(),
        });
    }
    let source = mask_id(mask);
    let outside: Vec<usize> = (0..grid.len()).filter(|&i| !mask[i]).collect();
    if outside.is_empty() {
        return Err(Error::InvalidParameter("Whitney decomposition needs a non-empty complement".into()));
    }
    let u = Units::new(grid);
    let n = grid.dim as i64;
    let mut cache: HashMap<DyadicCube, bool> = HashMap::new();
    let mut near = |cube: DyadicCube| -> bool {
        *cache.entry(cube).or_insert_with(|| {
            let d2 = outside.iter().map(|&z| u.dist2(grid, &cube, z)).min().unwrap();
            let s = u.side(cube.level);
            d2 <= 16 * n * s * s
        })
    };
    let mut chosen: Vec<DyadicCube> = Vec::new();
    for x in (0..grid.len()).filter(|&i| mask[i]) {
        let mut level = 0;
        while level < u.jmax && near(u.cube_of(grid, x, level + 1)) {
            level += 1;
        }
        chosen.push(u.cube_of(grid, x, level));
    }
    chosen.sort();
    chosen.dedup();
    let maximal: Vec<DyadicCube> = chosen
        .iter()
        .filter(|c| !chosen.iter().any(|o| o != *c && c.is_within(o)))
        .copied()
        .collect();
    Ok(WhitneyDecomposition {
        grid: *grid,
        cubes: maximal,
        source,
    })
}

/// Violations found by [`check_whitney`]; empty when the decomposition is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCheck {
    pub violations: Vec<String>,
}

impl WhitneyCheck {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn box_contains(grid: &SpatialGrid, lo: &[f64; 2], side: f64, p: &[f64; 2]) -> bool {
    (0..grid.dim).all(|a| {
        let u = (p[a] - lo[a]).rem_euclid(grid.period);
        u < side
    })
}

/// Torus distance from a point to a closed box, minimising over the nine
/// (or three) nearest periodic images.
fn box_point_dist(grid: &SpatialGrid, lo: &[f64; 2], side: f64, p: &[f64; 2]) -> f64 {
    const IMAGES: [[f64; 2]; 9] = [[0.0, 0.0], [-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0], [-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]];
    let images = if grid.dim == 1 { &IMAGES[..3] } else { &IMAGES[..] };
    let l = grid.period;
    images
        .iter()
        .map(|s| {
            (0..grid.dim)
                .map(|a| {
                    let v = p[a] + s[a] * l;
                    let d = if v < lo[a] {
                        lo[a] - v
                    } else if v > lo[a] + side {
                        v - lo[a] - side
                    } else {
                        0.0
                    };
                    d * d
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Independent verification of disjointness, exact cover of `G`'s grid
/// points and `diam(Q) < d(Q, G^c) ≤ 4 diam(Q)`.
pub fn check_whitney(w: &WhitneyDecomposition, mask: &[bool]) -> WhitneyCheck {
    let grid = &w.grid;
    let mut out = WhitneyCheck::default();
    let geo: Vec<([f64; 2], f64)> = w.cubes.iter().map(|c| (c.corner(grid), c.side(grid))).collect();
    let tol = 1e-9 * grid.spacing();
    for i in 0..geo.len() {
        for j in i + 1..geo.len() {
            let (a, sa) = geo[i];
            let (b, sb) = geo[j];
            // periodic interval overlap on every axis means the boxes intersect
            let overlap = (0..grid.dim).all(|ax| {
                let d = (b[ax] - a[ax]).rem_euclid(grid.period);
                d < sa - tol || grid.period - d < sb - tol
            });
            if overlap {
                out.violations.push(format!("cubes {:?} and {:?} overlap", w.cubes[i], w.cubes[j]));
            }
        }
    }
    for x in 0..grid.len() {
        let p = grid.point(x);
        let hits = geo.iter().filter(|(lo, s)| box_contains(grid, lo, *s, &p)).count();
        if mask[x] && hits != 1 {
            out.violations.push(format!("point {x} of G is covered {hits} times"));
        }
        if !mask[x] && hits != 0 {
            out.violations.push(format!("point {x} outside G is covered"));
        }
    }
    let outside: Vec<[f64; 2]> = (0..grid.len()).filter(|&i| !mask[i]).map(|i| grid.point(i)).collect();
    for (c, (lo, s)) in w.cubes.iter().zip(&geo) {
        let d = outside.iter().map(|p| box_point_dist(grid, lo, *s, p)).fold(f64::INFINITY, f64::min);
        let diam = c.diam(grid);
        if !(diam < d - tol && d <= 4.0 * diam + tol) {
            out.violations.push(format!("cube {c:?}: diam {diam}, distance {d}"));
        }
    }
    out
}

/// A value of `τ`: a scale node or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopHeight {
    Node(usize),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingProfile {
    pub grid: SpatialGrid,
    pub scale_nodes: Vec<f64>,
    pub tau: Vec<StopHeight>,
    pub rho: f64,
    pub q: f64,
    pub alpha: f64,
}

impl StoppingProfile {
    /// `τ(x)` as a number (`+∞` for the sentinel).
    pub fn height(&self, x: usize) -> f64 {
        match self.tau[x] {
            StopHeight::Node(k) => self.scale_nodes[k],
            StopHeight::Infinite => f64::INFINITY,
        }
    }

    /// `|B ∩ {τ > r(B)}|` as a point count, for the ball of radius `r` at grid point `c`.
    pub fn count_above(&self, st: &Stencil, c: usize, r: f64) -> usize {
        st.around(&self.grid, c).filter(|&x| self.height(x) > r).count()
    }
}

/// `τ(x)`: the largest truncation height in `{t_0, …, t_{K-1}, ∞}` before the
/// first one with `A^(α)(F|h)(x) > ρ C_q^(α)(F)(x)`.
pub fn stopping_time<T: Real>(
    cone: &ConeFunctional<'_, T>,
    cq: &FunctionalProfile<T>,
    rho: f64,
    q: f64,
    field_scales: &[f64],
) -> Result<StoppingProfile> {
    if !(rho > 1.0) {
        return Err(Error::InvalidParameter(format!("ρ = {rho} must exceed 1")));
    }
    let grid = cq.grid;
    let k_count = field_scales.len();
    let r = T::lit(rho);
    let tau = (0..grid.len())
        .map(|x| {
            let theta = r * cq.values[x];
            let mut last = StopHeight::Node(0);
            for k in 1..k_count {
                if cone.at(x, Some(field_scales[k])).value > theta {
                    return last;
                }
                last = StopHeight::Node(k);
            }
            if cone.at(x, None).value > theta {
                last
            } else {
                StopHeight::Infinite
            }
        })
        .collect();
    Ok(StoppingProfile {
        grid,
        scale_nodes: field_scales.to_vec(),
        tau,
        rho,
        q,
        alpha: cone.alpha(),
    })
}

/// Convenience wrapper computing `C_q^(α)(F)` and `τ` in one go.
pub fn stopping_time_for<T: Real>(f: &HalfSpaceField<T>, q: f64, rho: f64, alpha: f64, cfg: &GaussConfig) -> Result<StoppingProfile> {
    let cone = ConeFunctional::new(f, alpha, cfg)?;
    let cq = c_fun_from(&cone, q)?;
    stopping_time(&cone, &cq, rho, q, &f.scales.nodes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FubiniDefect {
    /// `C₀ ∫ ∬_{Γ^{τ(x)}(x)} H dμ dx − ∬ H dy dt/t`.
    pub defect: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Both sides of the Fubini identity over the cone-eligible scales
/// (`t_k < t_max`), with `C₀ = (1 − ρ^{-q})^{-1}`.
pub fn fubini_defect<T: Real>(h: &HalfSpaceField<T>, tau: &StoppingProfile) -> Result<FubiniDefect> {
    if !h.space.is_scalar() {
        return Err(Error::NotScalar(h.space.dim));
    }
    if h.grid != tau.grid || h.scales.count != tau.scale_nodes.len() {
        return Err(Error::GridMismatch("field and stopping profile differ".into()));
    }
    if let Some(n) = h.values.iter().position(|z| z.re < T::zero() || z.im != T::zero() || z.re.is_nan()) {
        return Err(Error::Negative(n));
    }
    let grid = h.grid;
    let scales = h.scales;
    let levels = scales.cone_levels(None);
    let stencils: Vec<Stencil> = (0..levels).map(|k| grid.stencil(tau.alpha * scales.node(k))).collect();
    let val = |y: usize, k: usize| h.value(y, k)[0].re.to_f64_lossy();
    let cell = grid.cell_measure();
    let mut inner = 0.0;
    for x in 0..grid.len() {
        let lv = match tau.tau[x] {
            StopHeight::Node(k) => scales.cone_levels(Some(tau.scale_nodes[k])),
            StopHeight::Infinite => levels,
        };
        for (k, st) in stencils.iter().enumerate().take(lv) {
            let w = cone_weight(&grid, &scales, k);
            inner += cell * w * st.around(&grid, x).map(|y| val(y, k)).sum::<f64>();
        }
    }
    let c0 = 1.0 / (1.0 - tau.rho.powf(-tau.q));
    let rhs: f64 = (0..levels)
        .map(|k| (0..grid.len()).map(|y| val(y, k)).sum::<f64>() * cell * scales.dlog())
        .sum();
    let lhs = c0 * inner;
    Ok(FubiniDefect {
        defect: lhs - rhs,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodLambdaRow {
    pub gamma: f64,
    pub lambda: f64,
    pub m_lhs: f64,
    pub m_cq: f64,
    pub m_beta: f64,
    pub fitted_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodLambdaTable {
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub rows: Vec<GoodLambdaRow>,
    /// `β t_max > L/2`: the wide cones wrap around the torus.
    pub wraps: bool,
}

impl GoodLambdaTable {
    /// Fitted `C` per `γ`, in input order.
    pub fn fitted(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for r in &self.rows {
            if out.last().map(|l| l.0) != Some(r.gamma) {
                out.push((r.gamma, r.fitted_c));
            }
        }
        out
    }

    /// Whether `m_lhs ≤ m_cq + C γ^q m_beta` on every row with the row's fitted `C`.
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| {
            r.fitted_c.is_finite()
                && r.m_lhs <= r.m_cq + r.fitted_c * r.gamma.powf(self.q) * r.m_beta * (1.0 + 1e-12) + 1e-300
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["gamma", "lambda", "m_lhs", "m_cq", "m_beta", "fitted_C"]).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record(
                [r.gamma, r.lambda, r.m_lhs, r.m_cq, r.m_beta, r.fitted_c].map(|v| v.to_string()),
            )
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Set measures `|{A^(α) > 2λ}|`, `|{C_q^(α) > γλ}|`, `|{A^(β) > λ}|` and the
/// least `C` making the good-λ inequality hold across all `λ` at each `γ`.
pub fn good_lambda_table<T: Real>(
    f: &HalfSpaceField<T>,
    alpha: f64,
    beta: f64,
    q: f64,
    gammas: &[f64],
    lambdas: &[f64],
    cfg: &GaussConfig,
) -> Result<GoodLambdaTable> {
    if gammas.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
        return Err(Error::InvalidParameter("γ must lie in (0, 1]".into()));
    }
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter("λ must be positive".into()));
    }
    let cone_a = ConeFunctional::new(f, alpha, cfg)?;
    let a = cone_a.profile(None);
    let cq = c_fun_from(&cone_a, q)?;
    let a_beta = ConeFunctional::new(f, beta, cfg)?.profile(None);
    let cell = f.grid.cell_measure();
    let measure = |p: &FunctionalProfile<T>, level: f64| p.values.iter().filter(|v| v.to_f64_lossy() > level).count() as f64 * cell;
    let mut rows = Vec::new();
    for &g in gammas {
        let mut block: Vec<GoodLambdaRow> = lambdas
            .iter()
            .map(|&l| GoodLambdaRow {
                gamma: g,
                lambda: l,
                m_lhs: measure(&a, 2.0 * l),
                m_cq: measure(&cq, g * l),
                m_beta: measure(&a_beta, l),
                fitted_c: 0.0,
            })
            .collect();
        let c = block
            .iter()
            .map(|r| {
                let excess = r.m_lhs - r.m_cq;
                if excess <= 0.0 {
                    0.0
                } else if r.m_beta == 0.0 {
                    f64::INFINITY
                } else {
                    excess / (g.powf(q) * r.m_beta)
                }
            })
            .fold(0.0, f64::max);
        for r in block.iter_mut() {
            r.fitted_c = c;
        }
        rows.extend(block);
    }
    Ok(GoodLambdaTable {
        alpha,
        beta,
        q,
        rows,
        wraps: beta * f.scales.t_max > f.grid.period / 2.0,
    })
}

/// Scalar field of nonnegative reals, for [`fubini_defect`] inputs.
pub fn nonnegative_field<T: Real>(
    grid: SpatialGrid,
    scales: crate::field::ScaleGrid,
    mut f: impl FnMut(usize, usize) -> T,
) -> HalfSpaceField<T> {
    HalfSpaceField::from_fn(grid, scales, crate::space::BanachSpaceDesc::scalar(), |i, k, _| {
        Complex::new(f(i, k), T::zero())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScaleGrid;
    use crate::space::BanachSpaceDesc;

    #[test]
    fn whole_torus_is_rejected_and_empty_set_is_empty() {
        let g = SpatialGrid::line(16, 1.0).unwrap();
        assert!(whitney(&g, &[true; 16]).is_err());
        assert!(whitney(&g, &[false; 16]).unwrap().cubes.is_empty());
    }

    #[test]
    fn single_cell_is_refined() {
        let g = SpatialGrid::line(16, 1.0).unwrap();
        let mut mask = [false; 16];
        mask[5] = true;
        let w = whitney(&g, &mask).unwrap();
        assert!(check_whitney(&w, &mask).is_valid(), "{:?}", check_whitney(&w, &mask));
        // the cell itself is at distance Δy/2 < diam, so a finer cube is used
        assert_eq!(w.cubes.len(), 1);
        assert!(w.cubes[0].level > g.log2_n());
    }

    #[test]
    fn interval_decomposition_is_valid_and_shift_equivariant() {
        let g = SpatialGrid::line(64, 1.0).unwrap();
        let mask: Vec<bool> = (0..64).map(|i| (5..40).contains(&i)).collect();
        let w = whitney(&g, &mask).unwrap();
        assert!(check_whitney(&w, &mask).is_valid());
        assert!(w.cubes.len() > 2);
        let shifted: Vec<bool> = (0..64).map(|i| mask[(i + 48) % 64]).collect();
        let ws = whitney(&g, &shifted).unwrap();
        let mut moved: Vec<DyadicCube> = w
            .cubes
            .iter()
            .map(|c| c.shifted(&g, [(1i64 << c.level) / 4, 0]))
            .collect();
        moved.sort();
        let mut got = ws.cubes.clone();
        got.sort();
        assert_eq!(moved, got);
    }

    #[test]
    fn checker_flags_bad_cubes() {
        let g = SpatialGrid::line(16, 1.0).unwrap();
        let mask: Vec<bool> = (0..16).map(|i| i < 8).collect();
        let bad = WhitneyDecomposition {
            grid: g,
            cubes: vec![DyadicCube { level: 1, index: [0, 0] }],
            source: 0,
        };
        assert!(!check_whitney(&bad, &mask).is_valid());
    }

    #[test]
    fn zero_field_never_stops() {
        let g = SpatialGrid::line(32, 1.0).unwrap();
        let s = ScaleGrid::new(1.5 / 32.0, 0.25, 8).unwrap();
        let f = HalfSpaceField::<f64>::zeros(g, s, BanachSpaceDesc::scalar());
        let tau = stopping_time_for(&f, 1.0, 2.0, 1.0, &GaussConfig::default()).unwrap();
        assert!(tau.tau.iter().all(|t| *t == StopHeight::Infinite));
        let h = nonnegative_field(g, s, |_, _| 0.0f64);
        assert_eq!(fubini_defect(&h, &tau).unwrap().defect, 0.0);
    }

    #[test]
    fn fubini_slab_closed_form() {
        let g = SpatialGrid::line(64, 1.0).unwrap();
        let s = ScaleGrid::new(1.5 / 64.0, 0.25, 8).unwrap();
        let tau = StoppingProfile {
            grid: g,
            scale_nodes: s.nodes(),
            tau: vec![StopHeight::Infinite; 64],
            rho: 2.0,
            q: 1.0,
            alpha: 1.0,
        };
        let k0 = 3;
        let h = nonnegative_field(g, s, |_, k| if k == k0 { 1.0f64 } else { 0.0 });
        let d = fubini_defect(&h, &tau).unwrap();
        let slab = g.stencil(s.node(k0)).len() as f64;
        let lhs = 2.0 * 64.0 * g.cell_measure() * cone_weight(&g, &s, k0) * slab;
        let rhs = s.dlog();
        assert!((d.lhs - lhs).abs() < 1e-12 && (d.rhs - rhs).abs() < 1e-12);
        assert!(d.defect >= 0.0);
        let neg = nonnegative_field(g, s, |_, _| -1.0f64);
        assert!(matches!(fubini_defect(&neg, &tau), Err(Error::Negative(_))));
    }

    #[test]
    fn good_lambda_zero_field() {
        let g = SpatialGrid::line(32, 1.0).unwrap();
        let s = ScaleGrid::new(1.5 / 32.0, 0.25, 8).unwrap();
        let f = HalfSpaceField::<f64>::zeros(g, s, BanachSpaceDesc::scalar());
        let t = good_lambda_table(&f, 1.0, 11.0, 1.0, &[1.0, 0.5], &[0.1, 1.0], &GaussConfig::default()).unwrap();
        assert!(t.rows.iter().all(|r| r.m_lhs == 0.0 && r.m_cq == 0.0 && r.m_beta == 0.0));
        assert!(t.holds());
        assert!(t.wraps);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("gamma,lambda,m_lhs,m_cq,m_beta,fitted_C"));
    }
}
