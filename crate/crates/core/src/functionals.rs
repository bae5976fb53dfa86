//! Conical square functions `A^(α)(F|h)`, Carleson functionals `C_q^(α)(F)`,
//! the non-tangential maximal function `N^(α)(G)`, the vector BMO norm and
//! the Hardy–Littlewood maximal function on the dyadic ball family.
//!
//! Sums over a cone run scale by scale, and within a scale nearest point
//! first. Enlarging the aperture or the height therefore only appends
//! non-negative terms, so the Hilbert-path values are monotone bit for bit,
//! and translating the field permutes the results exactly.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{cone_weight, HalfSpaceField, SampledFunction, SpatialGrid, Stencil};
use crate::gaussnorm::{Covariance, GaussConfig, GaussEstimate, GaussianDraws};
use crate::scalar::{from_usize, Real};
use crate::space::BanachSpaceDesc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    A,
    ATrunc,
    Cq,
    N,
    Bmo,
    M,
}

/// A real profile over the spatial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalProfile<T> {
    pub kind: FunctionalKind,
    pub alpha: Option<f64>,
    /// Truncation height; `None` for `h = ∞`, which is realised as `t_max`.
    pub height: Option<f64>,
    pub q: Option<f64>,
    pub t_max: Option<f64>,
    pub grid: SpatialGrid,
    pub values: Vec<T>,
    pub stderr: Vec<T>,
}

impl<T: Real> FunctionalProfile<T> {
    fn new(kind: FunctionalKind, grid: SpatialGrid, values: Vec<T>, stderr: Vec<T>) -> Self {
        Self {
            kind,
            alpha: None,
            height: None,
            q: None,
            t_max: None,
            grid,
            values,
            stderr,
        }
    }

    pub fn sup(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    /// `(Σ_x Δy^n v(x)^p)^{1/p}`; `p = ∞` is the maximum.
    pub fn lp_norm(&self, p: f64) -> T {
        if p.is_infinite() {
            return self.sup();
        }
        let cell = T::lit(self.grid.cell_measure());
        let pp = T::lit(p);
        (self.values.iter().map(|v| v.powf(pp)).sum::<T>() * cell).powf(T::one() / pp)
    }

    pub fn is_exact(&self) -> bool {
        self.stderr.iter().all(|s| *s == T::zero())
    }

    /// Scalar function carrying the values, for TSF1 output.
    pub fn to_function(&self) -> SampledFunction<T> {
        SampledFunction {
            grid: self.grid,
            space: BanachSpaceDesc::scalar(),
            values: self.values.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        }
    }

    /// CSV with columns `x0[, x1], value, stderr`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["x0"];
        if self.grid.dim == 2 {
            header.push("x1");
        }
        header.extend(["value", "stderr"]);
        out.write_record(&header).map_err(csv_err)?;
        for i in 0..self.grid.len() {
            let p = self.grid.point(i);
            let mut row = vec![p[0].to_string()];
            if self.grid.dim == 2 {
                row.push(p[1].to_string());
            }
            row.push(self.values[i].to_f64_lossy().to_string());
            row.push(self.stderr[i].to_f64_lossy().to_string());
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be positive")))
    }
}

enum Partial<T> {
    /// `Σ_{k'≤k} w_{k'} Σ_{y ∈ cone slice} ‖F(y,k')‖²`, indexed `[k][x]`.
    Exact(Vec<Vec<T>>),
    /// Cumulative covariances, indexed `[k][x]`, with shared Gaussian draws.
    Mc(Vec<Vec<Covariance<T>>>, GaussianDraws<T>),
}

/// Cumulative cone sums of a field for one aperture, from which
/// `A^(α)(F|h)(x)` is read off for every height.
pub struct ConeFunctional<'a, T: Real> {
    field: &'a HalfSpaceField<T>,
    alpha: f64,
    levels: usize,
    partial: Partial<T>,
}

impl<'a, T: Real> ConeFunctional<'a, T> {
    pub fn new(field: &'a HalfSpaceField<T>, alpha: f64, cfg: &GaussConfig) -> Result<Self> {
        check_positive("aperture", alpha)?;
        let grid = field.grid;
        let scales = field.scales;
        let levels = scales.cone_levels(None);
        let stencils: Vec<Stencil> = (0..levels).map(|k| grid.stencil(alpha * scales.node(k))).collect();
        let partial = if cfg.uses_exact(&field.space) {
            let nsq: Vec<T> = field
                .values
                .chunks_exact(field.space.dim)
                .map(|v| v.iter().map(|z| z.norm_sqr()).sum())
                .collect();
            let mut cum: Vec<Vec<T>> = Vec::with_capacity(levels);
            for (k, st) in stencils.iter().enumerate() {
                let w = T::lit(cone_weight(&grid, &scales, k));
                let slab = &nsq[k * grid.len()..(k + 1) * grid.len()];
                let prev = cum.last();
                let row: Vec<T> = (0..grid.len())
                    .into_par_iter()
                    .map(|x| {
                        let s: T = st.around(&grid, x).fold(T::zero(), |acc, y| acc + slab[y]);
                        let base = prev.map_or(T::zero(), |p| p[x]);
                        base + w * s
                    })
                    .collect();
                cum.push(row);
            }
            Partial::Exact(cum)
        } else {
            if cfg.trials < 2 {
                return Err(Error::InvalidParameter("Monte Carlo needs at least 2 trials".into()));
            }
            let d = field.space.dim;
            let mut cum: Vec<Vec<Covariance<T>>> = Vec::with_capacity(levels);
            for (k, st) in stencils.iter().enumerate() {
                let w = T::lit(cone_weight(&grid, &scales, k));
                let prev = cum.last();
                let row: Vec<Covariance<T>> = (0..grid.len())
                    .into_par_iter()
                    .map(|x| {
                        let mut c = Covariance::zeros(d);
                        for y in st.around(&grid, x) {
                            c.add_outer(T::one(), field.value(y, k));
                        }
                        let mut out = prev.map_or_else(|| Covariance::zeros(d), |p| p[x].clone());
                        out.add_scaled(w, &c);
                        out
                    })
                    .collect();
                cum.push(row);
            }
            Partial::Mc(cum, GaussianDraws::new(&cfg.rng, cfg.trials, d))
        };
        Ok(Self {
            field,
            alpha,
            levels,
            partial,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.partial, Partial::Exact(_))
    }

    /// Number of scale levels inside the cone truncated at `h`.
    pub fn levels_for(&self, height: Option<f64>) -> usize {
        self.field.scales.cone_levels(height).min(self.levels)
    }

    /// `A^(α)(F|h)(x)` for a cone using the first `levels` scales.
    pub fn at_levels(&self, x: usize, levels: usize) -> GaussEstimate<T> {
        if levels == 0 {
            return GaussEstimate::exact(T::zero());
        }
        match &self.partial {
            Partial::Exact(cum) => GaussEstimate::exact(cum[levels - 1][x].sqrt()),
            Partial::Mc(cum, z) => {
                let cov = &cum[levels - 1][x];
                if cov.trace() == T::zero() {
                    GaussEstimate {
                        value: T::zero(),
                        stderr: T::zero(),
                        trials: z.trials(),
                        exact: false,
                    }
                } else {
                    z.estimate(&self.field.space, cov)
                }
            }
        }
    }

    pub fn at(&self, x: usize, height: Option<f64>) -> GaussEstimate<T> {
        self.at_levels(x, self.levels_for(height))
    }

    /// Values and standard errors over the grid for one height.
    pub fn sweep(&self, height: Option<f64>) -> (Vec<T>, Vec<T>) {
        let levels = self.levels_for(height);
        let est: Vec<GaussEstimate<T>> = (0..self.field.grid.len())
            .into_par_iter()
            .map(|x| self.at_levels(x, levels))
            .collect();
        (est.iter().map(|e| e.value).collect(), est.iter().map(|e| e.stderr).collect())
    }

    pub fn profile(&self, height: Option<f64>) -> FunctionalProfile<T> {
        let (values, stderr) = self.sweep(height);
        let kind = if height.is_some() {
            FunctionalKind::ATrunc
        } else {
            FunctionalKind::A
        };
        FunctionalProfile {
            alpha: Some(self.alpha),
            height,
            t_max: Some(self.field.scales.t_max),
            ..FunctionalProfile::new(kind, self.field.grid, values, stderr)
        }
    }
}

/// `A^(α)(F|h)` on the whole grid; `h = None` is `h = ∞`.
pub fn a_fun<T: Real>(f: &HalfSpaceField<T>, alpha: f64, height: Option<f64>, cfg: &GaussConfig) -> Result<FunctionalProfile<T>> {
    if let Some(h) = height {
        check_positive("height", h)?;
    }
    Ok(ConeFunctional::new(f, alpha, cfg)?.profile(height))
}

/// For every centre `c`: the mean of `v` over the grid points of `B(c, r)`.
fn window_means<T: Real>(grid: &SpatialGrid, st: &Stencil, v: &[T]) -> Vec<T> {
    let inv = T::one() / from_usize::<T>(st.len());
    (0..grid.len())
        .into_par_iter()
        .map(|c| st.around(grid, c).fold(T::zero(), |acc, y| acc + v[y]) * inv)
        .collect()
}

/// For every `x`: the centre `c` with `x ∈ B(c, r)` maximising `means[c]`
/// (first such centre in stencil order on ties).
fn covering_argmax<T: Real>(grid: &SpatialGrid, st: &Stencil, means: &[T]) -> Vec<usize> {
    (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut best = x;
            let mut val = T::neg_infinity();
            for c in st.around(grid, x) {
                if means[c] > val {
                    val = means[c];
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// `C_q^(α)(F)(x) = sup_{B ∋ x} ((1/|B|) Σ_{y∈B} A^(α)(F|r(B))(y)^q)^{1/q}` over
/// grid-centred balls with dyadic radii.
pub fn c_fun<T: Real>(f: &HalfSpaceField<T>, q: f64, alpha: f64, cfg: &GaussConfig) -> Result<FunctionalProfile<T>> {
    let cone = ConeFunctional::new(f, alpha, cfg)?;
    c_fun_from(&cone, q)
}

/// `C_q` from precomputed cone sums, so several `q` share one sweep.
pub fn c_fun_from<T: Real>(cone: &ConeFunctional<'_, T>, q: f64) -> Result<FunctionalProfile<T>> {
    check_positive("q", q)?;
    let grid = cone.field.grid;
    let qq = T::lit(q);
    let mut best = vec![T::zero(); grid.len()];
    let mut best_se = vec![T::zero(); grid.len()];
    for r in grid.dyadic_radii() {
        let st = grid.stencil(r);
        let (a, se) = cone.sweep(Some(r));
        let pow: Vec<T> = a.iter().map(|v| v.powf(qq)).collect();
        let means = window_means(&grid, &st, &pow);
        let arg = covering_argmax(&grid, &st, &means);
        // d(mean)/dA_y = q A_y^{q-1} / |B|, errors added linearly (shared draws)
        let dpow: Vec<T> = a
            .iter()
            .zip(&se)
            .map(|(&v, &s)| if s == T::zero() || v == T::zero() { T::zero() } else { qq * v.powf(qq - T::one()) * s })
            .collect();
        let se_means = if cone.is_exact() {
            None
        } else {
            Some(window_means(&grid, &st, &dpow))
        };
        for x in 0..grid.len() {
            let m = means[arg[x]];
            let c = m.powf(T::one() / qq);
            if c > best[x] {
                best[x] = c;
                best_se[x] = match &se_means {
                    Some(sm) if m > T::zero() => c / (qq * m) * sm[arg[x]],
                    _ => T::zero(),
                };
            }
        }
    }
    Ok(FunctionalProfile {
        alpha: Some(cone.alpha),
        q: Some(q),
        t_max: Some(cone.field.scales.t_max),
        ..FunctionalProfile::new(FunctionalKind::Cq, grid, best, best_se)
    })
}

/// `N^(α)(G)(x) = sup_{Γ_α(x)} |G|` for a scalar field.
pub fn n_fun<T: Real>(g: &HalfSpaceField<T>, alpha: f64) -> Result<FunctionalProfile<T>> {
    if !g.space.is_scalar() {
        return Err(Error::NotScalar(g.space.dim));
    }
    check_positive("aperture", alpha)?;
    let grid = g.grid;
    let levels = g.scales.cone_levels(None);
    let stencils: Vec<Stencil> = (0..levels).map(|k| grid.stencil(alpha * g.scales.node(k))).collect();
    let values: Vec<T> = (0..grid.len())
        .into_par_iter()
        .map(|x| {
            let mut m = T::zero();
            for (k, st) in stencils.iter().enumerate() {
                for y in st.around(&grid, x) {
                    m = m.max(g.value(y, k)[0].norm());
                }
            }
            m
        })
        .collect();
    Ok(FunctionalProfile {
        alpha: Some(alpha),
        t_max: Some(g.scales.t_max),
        ..FunctionalProfile::new(FunctionalKind::N, grid, values, vec![T::zero(); grid.len()])
    })
}

/// Mean oscillation `(1/|B|) Σ_{x∈B} ‖f(x) − f_B‖_X` for every grid-centred ball of radius `r`.
fn oscillations<T: Real>(f: &SampledFunction<T>, st: &Stencil) -> Vec<T> {
    let grid = f.grid;
    let d = f.space.dim;
    let inv = T::one() / from_usize::<T>(st.len());
    (0..grid.len())
        .into_par_iter()
        .map(|c| {
            let mut mean = vec![Complex::new(T::zero(), T::zero()); d];
            for y in st.around(&grid, c) {
                for (m, v) in mean.iter_mut().zip(f.value(y)) {
                    *m += v;
                }
            }
            for m in mean.iter_mut() {
                *m *= inv;
            }
            let mut diff = vec![Complex::new(T::zero(), T::zero()); d];
            let mut total = T::zero();
            for y in st.around(&grid, c) {
                for ((o, v), m) in diff.iter_mut().zip(f.value(y)).zip(&mean) {
                    *o = v - m;
                }
                total += f.space.norm_of(&diff);
            }
            total * inv
        })
        .collect()
}

/// `sup_B (1/|B∩grid|) Σ_{x∈B} ‖f(x) − mean_B f‖_X` over dyadic-radius grid-centred balls.
pub fn bmo_norm<T: Real>(f: &SampledFunction<T>) -> T {
    f.grid
        .dyadic_radii()
        .into_iter()
        .flat_map(|r| oscillations(f, &f.grid.stencil(r)))
        .fold(T::zero(), T::max)
}

/// Largest mean oscillation over balls containing each `x`.
pub fn bmo_profile<T: Real>(f: &SampledFunction<T>) -> FunctionalProfile<T> {
    let grid = f.grid;
    let mut best = vec![T::zero(); grid.len()];
    for r in grid.dyadic_radii() {
        let st = grid.stencil(r);
        let osc = oscillations(f, &st);
        let arg = covering_argmax(&grid, &st, &osc);
        for x in 0..grid.len() {
            best[x] = best[x].max(osc[arg[x]]);
        }
    }
    FunctionalProfile::new(FunctionalKind::Bmo, grid, best, vec![T::zero(); grid.len()])
}

/// `M g(x) = max_{B ∋ x} (1/|B|) Σ_B |g|`.
pub fn maximal_fn<T: Real>(g: &SampledFunction<T>) -> Result<FunctionalProfile<T>> {
    if !g.space.is_scalar() {
        return Err(Error::NotScalar(g.space.dim));
    }
    let abs: Vec<T> = g.values.iter().map(|z| z.norm()).collect();
    Ok(maximal_of_values(&g.grid, &abs))
}

/// Maximal function of a nonnegative real array on the grid.
pub fn maximal_of_values<T: Real>(grid: &SpatialGrid, v: &[T]) -> FunctionalProfile<T> {
    let mut best = vec![T::zero(); grid.len()];
    for r in grid.dyadic_radii() {
        let st = grid.stencil(r);
        let means = window_means(grid, &st, v);
        let arg = covering_argmax(grid, &st, &means);
        for x in 0..grid.len() {
            best[x] = best[x].max(means[arg[x]]);
        }
    }
    FunctionalProfile::new(FunctionalKind::M, *grid, best, vec![T::zero(); grid.len()])
}

/// `sup_B (1/|B|) ∬_{B×(0,r(B))} ‖F‖² dy dt/t` over dyadic-radius grid-centred balls.
pub fn carleson_box_sup<T: Real>(f: &HalfSpaceField<T>) -> T {
    let grid = f.grid;
    let scales = f.scales;
    let nsq: Vec<T> = f.norms_sqr();
    let dlog = T::lit(scales.dlog());
    grid.dyadic_radii()
        .into_iter()
        .map(|r| {
            let st = grid.stencil(r);
            let levels = (0..scales.count).take_while(|&k| scales.node(k) < r).count();
            (0..grid.len())
                .into_par_iter()
                .map(|c| {
                    let mut s = T::zero();
                    for k in 0..levels {
                        let slab = &nsq[k * grid.len()..(k + 1) * grid.len()];
                        s += st.around(&grid, c).fold(T::zero(), |acc, y| acc + slab[y]);
                    }
                    s * dlog / from_usize::<T>(st.len())
                })
                .reduce(T::zero, T::max)
        })
        .fold(T::zero(), T::max)
}
