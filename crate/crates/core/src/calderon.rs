//! Test functions, the resolution `F(x, t) = f * ψ_t(x)`, non-degeneracy
//! margins and the complementary function of a non-degenerate `ψ`.
//!
//! Transforms use `ψ̂(ξ) = ∫ ψ(x) e^{-i x·ξ} dx`, so `(ψ_t)^ = ψ̂(t·)`.
//! Closed forms are evaluated in `f64`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{HalfSpaceField, SampledFunction, ScaleGrid, SpatialGrid};
use crate::fourier::{lattice_frequency, FourierPlan};
use crate::scalar::Real;

type C64 = Complex<f64>;
pub type TransformFn = Arc<dyn Fn(&[f64; 2]) -> C64 + Send + Sync>;

/// A test function described by its Fourier transform and, when known, its
/// spatial profile.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub dim: usize,
    transform: TransformFn,
    spatial: Option<TransformFn>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("integral", &self.integral())
            .finish()
    }
}

#[inline]
fn sq(x: &[f64; 2], dim: usize) -> f64 {
    if dim == 1 {
        x[0] * x[0]
    } else {
        x[0] * x[0] + x[1] * x[1]
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("test functions exist for n ∈ {{1, 2}}, got {dim}")))
    }
}

/// `e^{-1/x}` glued to its mirror: 0 for `x ≤ 0`, 1 for `x ≥ 1`, `C^∞`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Smooth window on `log r`: zero outside `(lo, hi)`, one on the interior
/// after ramps of width `frac·log(hi/lo)`.
pub fn log_window(r: f64, lo: f64, hi: f64, frac: f64) -> f64 {
    if !(r > lo && r < hi) {
        return 0.0;
    }
    let (u, a, b) = (r.ln(), lo.ln(), hi.ln());
    let w = frac * (b - a);
    smooth_step((u - a) / w) * smooth_step((b - u) / w)
}

impl TestFunction {
    /// Test function from a transform closure (no spatial closed form).
    pub fn from_transform(
        name: impl Into<String>,
        dim: usize,
        transform: impl Fn(&[f64; 2]) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            name: name.into(),
            dim,
            transform: Arc::new(transform),
            spatial: None,
        })
    }

    /// `ψ = −Δg` with `g` the standard Gaussian density; `ψ̂(ξ) = |ξ|² e^{-|ξ|²/2}`.
    pub fn mexican_hat(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let c = (2.0 * PI).powf(-(dim as f64) / 2.0);
        Ok(Self {
            name: "mexican_hat".into(),
            dim,
            transform: Arc::new(move |xi| {
                let r2 = sq(xi, dim);
                C64::new(r2 * (-r2 / 2.0).exp(), 0.0)
            }),
            spatial: Some(Arc::new(move |x| {
                let r2 = sq(x, dim);
                C64::new((dim as f64 - r2) * c * (-r2 / 2.0).exp(), 0.0)
            })),
        })
    }

    /// `ψ = ∂₁ g`; `ψ̂(ξ) = i ξ₁ e^{-|ξ|²/2}`. Degenerate along `ξ₁ = 0` when `n = 2`.
    pub fn dgauss_1(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let c = (2.0 * PI).powf(-(dim as f64) / 2.0);
        Ok(Self {
            name: "dgauss_1".into(),
            dim,
            transform: Arc::new(move |xi| C64::new(0.0, xi[0] * (-sq(xi, dim) / 2.0).exp())),
            spatial: Some(Arc::new(move |x| C64::new(-x[0] * c * (-sq(x, dim) / 2.0).exp(), 0.0))),
        })
    }

    /// Radial bump on `log|ξ|` supported in `1/2 < |ξ| < 4`.
    pub fn bandpass_meyer(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            name: "bandpass_meyer".into(),
            dim,
            transform: Arc::new(move |xi| C64::new(log_window(sq(xi, dim).sqrt(), 0.5, 4.0, 0.4), 0.0)),
            spatial: None,
        })
    }

    /// Standard Gaussian density, `∫ = 1`.
    pub fn gauss_bump(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let c = (2.0 * PI).powf(-(dim as f64) / 2.0);
        Ok(Self {
            name: "gauss_bump".into(),
            dim,
            transform: Arc::new(move |xi| C64::new((-sq(xi, dim) / 2.0).exp(), 0.0)),
            spatial: Some(Arc::new(move |x| C64::new(c * (-sq(x, dim) / 2.0).exp(), 0.0))),
        })
    }

    /// Built-in family by name.
    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        match name {
            "mexican_hat" => Self::mexican_hat(dim),
            "dgauss_1" => Self::dgauss_1(dim),
            "bandpass_meyer" => Self::bandpass_meyer(dim),
            "gauss_bump" => Self::gauss_bump(dim),
            other => Err(Error::InvalidParameter(format!("unknown test function `{other}`"))),
        }
    }

    /// Test function tabulated by samples of `ψ` on a grid (origin at index 0).
    /// The transform is the scaled DFT, interpolated log-linearly in `|ξ|`
    /// along each half-axis for `n = 1` and bilinearly for `n = 2`; zero
    /// outside the lattice band.
    pub fn tabulated<T: Real>(name: impl Into<String>, samples: &SampledFunction<T>) -> Result<Self> {
        if !samples.space.is_scalar() {
            return Err(Error::NotScalar(samples.space.dim));
        }
        let grid = samples.grid;
        let mut data: Vec<C64> = samples
            .values
            .iter()
            .map(|z| C64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
            .collect();
        FourierPlan::<f64>::new(&grid).forward(&mut data);
        let cell = grid.cell_measure();
        let table: Vec<C64> = data.iter().map(|z| z * cell).collect();
        let n = grid.n as isize;
        let step = 2.0 * PI / grid.period;
        let at = move |m: [isize; 2]| -> C64 {
            if m.iter().any(|&v| v < -n / 2 || v >= n / 2) {
                return C64::new(0.0, 0.0);
            }
            let w = |v: isize| v.rem_euclid(n) as usize;
            table[grid.flat([w(m[0]), w(m[1])])]
        };
        let transform: TransformFn = if grid.dim == 1 {
            Arc::new(move |xi| {
                let s = xi[0] / step;
                let a = s.abs();
                let sign = if s < 0.0 { -1 } else { 1 };
                if a < 1.0 {
                    let z0 = at([0, 0]);
                    let z1 = at([sign, 0]);
                    return z0 + (z1 - z0) * a;
                }
                let lo = a.floor();
                let m0 = lo as isize;
                let frac = if lo == a { 0.0 } else { (a.ln() - lo.ln()) / ((lo + 1.0).ln() - lo.ln()) };
                let z0 = at([sign * m0, 0]);
                let z1 = at([sign * (m0 + 1), 0]);
                z0 + (z1 - z0) * frac
            })
        } else {
            Arc::new(move |xi| {
                let (s0, s1) = (xi[0] / step, xi[1] / step);
                let (f0, f1) = (s0.floor(), s1.floor());
                let (a, b) = (s0 - f0, s1 - f1);
                let (m0, m1) = (f0 as isize, f1 as isize);
                at([m0, m1]) * ((1.0 - a) * (1.0 - b))
                    + at([m0 + 1, m1]) * (a * (1.0 - b))
                    + at([m0, m1 + 1]) * ((1.0 - a) * b)
                    + at([m0 + 1, m1 + 1]) * (a * b)
            })
        };
        Ok(Self {
            name: name.into(),
            dim: grid.dim,
            transform,
            spatial: None,
        })
    }

    /// `ψ̂(ξ)`.
    #[inline]
    pub fn hat(&self, xi: &[f64; 2]) -> C64 {
        (self.transform)(xi)
    }

    /// `(ψ_t)^(ξ) = ψ̂(tξ)`.
    #[inline]
    pub fn hat_dilated(&self, t: f64, xi: &[f64; 2]) -> C64 {
        self.hat(&[t * xi[0], t * xi[1]])
    }

    /// Closed-form `ψ(x)`, if known.
    pub fn spatial(&self, x: &[f64; 2]) -> Option<C64> {
        self.spatial.as_ref().map(|s| s(x))
    }

    pub fn has_spatial_form(&self) -> bool {
        self.spatial.is_some()
    }

    /// `m₀ = ∫ψ = ψ̂(0)`.
    pub fn integral(&self) -> C64 {
        self.hat(&[0.0, 0.0])
    }

    pub fn has_vanishing_integral(&self) -> bool {
        self.integral().norm() < 1e-12
    }

    /// `ψ̃(x) = ψ(−x)`.
    pub fn reflected(&self) -> Self {
        let t = self.transform.clone();
        let s = self.spatial.clone();
        Self {
            name: format!("{}~", self.name),
            dim: self.dim,
            transform: Arc::new(move |xi| t(&[-xi[0], -xi[1]])),
            spatial: s.map(|s| -> TransformFn { Arc::new(move |x| s(&[-x[0], -x[1]])) }),
        }
    }

    /// `ψ̂(t ξ_m)` on the frequency lattice, in FFT order.
    pub fn lattice_multiplier<T: Real>(&self, grid: &SpatialGrid, t: f64) -> Vec<Complex<T>> {
        (0..grid.len())
            .map(|i| {
                let z = self.hat_dilated(t, &lattice_frequency(grid, i));
                Complex::new(T::lit(z.re), T::lit(z.im))
            })
            .collect()
    }

    /// Samples of the periodised `ψ_t` on the grid,
    /// `L^{-n} Σ_m ψ̂(t ξ_m) e^{i ξ_m·y}`.
    pub fn spatial_samples<T: Real>(&self, grid: &SpatialGrid, t: f64) -> Vec<Complex<T>> {
        let mut v = self.lattice_multiplier::<T>(grid, t);
        FourierPlan::new(grid).inverse(&mut v);
        let s = T::lit(1.0 / grid.cell_measure());
        v.iter().map(|z| z * s).collect()
    }
}

fn check_grid(psi: &TestFunction, grid: &SpatialGrid) -> Result<()> {
    if psi.dim != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            got: psi.dim,
        });
    }
    Ok(())
}

/// Per-component DFTs of `f`, each in FFT order.
pub(crate) fn component_spectra<T: Real>(f: &SampledFunction<T>, plan: &FourierPlan<T>) -> Vec<Vec<Complex<T>>> {
    (0..f.space.dim)
        .map(|c| {
            let mut v = f.component(c);
            plan.forward(&mut v);
            v
        })
        .collect()
}

/// `F(·, t_k) = f * ψ_{t_k}` for every scale, as exact cyclic convolutions.
pub fn resolve<T: Real>(f: &SampledFunction<T>, psi: &TestFunction, scales: &ScaleGrid) -> Result<HalfSpaceField<T>> {
    check_grid(psi, &f.grid)?;
    let grid = f.grid;
    let plan = FourierPlan::<T>::new(&grid);
    let spectra = component_spectra(f, &plan);
    let d = f.space.dim;
    let m = grid.len();
    let slabs: Vec<Vec<Complex<T>>> = (0..scales.count)
        .into_par_iter()
        .map(|k| {
            let mult = psi.lattice_multiplier::<T>(&grid, scales.node(k));
            let mut slab = vec![Complex::new(T::zero(), T::zero()); m * d];
            let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
            for (c, spec) in spectra.iter().enumerate() {
                for ((b, s), w) in buf.iter_mut().zip(spec).zip(&mult) {
                    *b = s * w;
                }
                plan.inverse(&mut buf);
                for (i, z) in buf.iter().enumerate() {
                    slab[i * d + c] = *z;
                }
            }
            slab
        })
        .collect();
    HalfSpaceField::new(grid, *scales, f.space, slabs.concat())
}

/// Unit directions probed by the margin: `±1` on the line, `D` equally
/// spaced angles in the plane.
pub fn probe_directions(dim: usize, count: usize) -> Vec<[f64; 2]> {
    if dim == 1 {
        (0..count.min(2)).map(|j| [if j == 0 { 1.0 } else { -1.0 }, 0.0]).collect()
    } else {
        (0..count)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / count as f64;
                [a.cos(), a.sin()]
            })
            .collect()
    }
}

/// `min_{directions} max_k |ψ̂(t_k ξ)|`, with the minimising direction.
pub fn nondegeneracy_margin_with_direction(psi: &TestFunction, directions: usize, scales: &ScaleGrid) -> (f64, [f64; 2]) {
    let nodes = scales.nodes();
    probe_directions(psi.dim, directions.max(1))
        .into_iter()
        .map(|u| {
            let best = nodes.iter().map(|&t| psi.hat_dilated(t, &u).norm()).fold(0.0, f64::max);
            (best, u)
        })
        .fold((f64::INFINITY, [0.0, 0.0]), |a, b| if b.0 < a.0 { b } else { a })
}

pub fn nondegeneracy_margin(psi: &TestFunction, directions: usize, scales: &ScaleGrid) -> f64 {
    nondegeneracy_margin_with_direction(psi, directions, scales).0
}

/// Annulus cutoff `χ` on `a < |ξ| < b`, ramps of width `ramp·log(b/a)` in
/// `log|ξ|`, and the number of midpoint nodes used for the radial integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiParams {
    pub a: f64,
    pub b: f64,
    pub ramp: f64,
    pub quad_points: usize,
}

impl ChiParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let p = Self {
            a,
            b,
            ramp: 0.25,
            quad_points: 1024,
        };
        p.validate()?;
        Ok(p)
    }

    /// `a = 8π/L`, `b = πN/(4L)`.
    pub fn for_grid(grid: &SpatialGrid) -> Result<Self> {
        Self::new(8.0 * PI / grid.period, PI * grid.n as f64 / (4.0 * grid.period))
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < self.b && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "annulus requires 0 < a < b, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if !(self.ramp > 0.0 && self.ramp <= 0.5) || self.quad_points < 8 {
            return Err(Error::InvalidParameter(format!("bad cutoff shape {self:?}")));
        }
        Ok(())
    }

    pub fn chi(&self, r: f64) -> f64 {
        log_window(r, self.a, self.b, self.ramp)
    }

    /// `∫_0^∞ χ(s)|ψ̂(s u)|² ds/s` by the midpoint rule in `log s`.
    pub fn denominator(&self, psi: &TestFunction, u: &[f64; 2]) -> f64 {
        let (la, lb) = (self.a.ln(), self.b.ln());
        let h = (lb - la) / self.quad_points as f64;
        (0..self.quad_points)
            .map(|j| {
                let s = (la + (j as f64 + 0.5) * h).exp();
                self.chi(s) * psi.hat_dilated(s, u).norm_sqr()
            })
            .sum::<f64>()
            * h
    }
}

/// Number of angles tabulating the denominator in the plane.
const ANGLES: usize = 1024;

/// The complementary function: `φ̂(−ξ) = χ(ξ) conj ψ̂(ξ) / ∫ χ(tξ)|ψ̂(tξ)|² dt/t`.
pub fn complementary(psi: &TestFunction, chi: &ChiParams) -> Result<TestFunction> {
    chi.validate()?;
    let dirs = if psi.dim == 1 {
        probe_directions(1, 2)
    } else {
        probe_directions(2, ANGLES)
    };
    let den: Vec<f64> = dirs.iter().map(|u| chi.denominator(psi, u)).collect();
    let peak = den.iter().cloned().fold(0.0, f64::max);
    for (u, &d) in dirs.iter().zip(&den) {
        if !(d > 1e-12 * peak.max(1e-300)) || d < 1e-200 {
            return Err(Error::Degenerate {
                name: psi.name.clone(),
                margin: d,
                direction: u[..psi.dim].to_vec(),
            });
        }
    }
    let dim = psi.dim;
    let source = psi.clone();
    let c = *chi;
    let lookup = move |u: &[f64; 2]| -> f64 {
        if dim == 1 {
            if u[0] >= 0.0 {
                den[0]
            } else {
                den[1]
            }
        } else {
            let a = u[1].atan2(u[0]).rem_euclid(2.0 * PI) / (2.0 * PI) * ANGLES as f64;
            let j = (a.floor() as usize) % ANGLES;
            let f = a - a.floor();
            den[j] * (1.0 - f) + den[(j + 1) % ANGLES] * f
        }
    };
    TestFunction::from_transform(format!("complementary({})", psi.name), dim, move |eta| {
        let xi = [-eta[0], -eta[1]];
        let r = sq(&xi, dim).sqrt();
        let w = c.chi(r);
        if w == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let u = [xi[0] / r, xi[1] / r];
        source.hat(&xi).conj() * (w / lookup(&u))
    })
}

/// `max_ξ |Σ_k Δlog t ψ̂(t_k ξ) φ̂(−t_k ξ) − 1|` over the sample frequencies.
pub fn reproducing_residual(psi: &TestFunction, phi: &TestFunction, freqs: &[[f64; 2]], quad: &ScaleGrid) -> f64 {
    let h = quad.dlog();
    let nodes = quad.nodes();
    freqs
        .iter()
        .map(|xi| {
            let s: C64 = nodes
                .iter()
                .map(|&t| psi.hat_dilated(t, xi) * phi.hat_dilated(t, &[-xi[0], -xi[1]]))
                .sum::<C64>()
                * h;
            (s - 1.0).norm()
        })
        .fold(0.0, f64::max)
}
