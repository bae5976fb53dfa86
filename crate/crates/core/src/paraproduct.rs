//! The paraproduct `P(f, u) = ∫ ψ_t * [(ψ_t * f)(φ_t * u)] dt/t`, its pairing
//! with dual-valued functions, and `L^p` norms.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calderon::{component_spectra, TestFunction};
use crate::error::{Error, Result};
use crate::field::{SampledFunction, ScaleGrid};
use crate::fourier::FourierPlan;
use crate::scalar::Real;
use crate::space::pair_raw;

/// Sampled `P(f, u)` with per-scale diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaproductResult<T> {
    pub field: SampledFunction<T>,
    /// `Σ_x Δy^n ⟨slice_k, g⟩ Δlog t` per scale, when `g` was supplied.
    pub pairing: Option<Complex<T>>,
    /// `L²` norm of each scale's contribution `Δlog t · ψ_t * [...]`.
    pub slice_norms: Vec<T>,
    /// Largest end-slice norm relative to the largest slice norm.
    pub tail: T,
    /// Set when `tail` exceeds [`TAIL_TOLERANCE`].
    pub truncated: bool,
}

pub const TAIL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParaproductSummary {
    pub pairing_re: Option<f64>,
    pub pairing_im: Option<f64>,
    pub tail: f64,
    pub truncated: bool,
    pub slice_norms: usize,
}

impl<T: Real> ParaproductResult<T> {
    pub fn summary(&self) -> ParaproductSummary {
        ParaproductSummary {
            pairing_re: self.pairing.map(|z| z.re.to_f64_lossy()),
            pairing_im: self.pairing.map(|z| z.im.to_f64_lossy()),
            tail: self.tail.to_f64_lossy(),
            truncated: self.truncated,
            slice_norms: self.slice_norms.len(),
        }
    }
}

/// `f * ψ_t`, componentwise, as a cyclic convolution.
pub fn convolve<T: Real>(f: &SampledFunction<T>, psi: &TestFunction, t: f64) -> Result<SampledFunction<T>> {
    check_dim(f, psi)?;
    let plan = FourierPlan::<T>::new(&f.grid);
    let mult = psi.lattice_multiplier::<T>(&f.grid, t);
    let d = f.space.dim;
    let mut out = f.clone();
    for (c, mut spec) in component_spectra(f, &plan).into_iter().enumerate() {
        for (s, m) in spec.iter_mut().zip(&mult) {
            *s *= m;
        }
        plan.inverse(&mut spec);
        for (i, z) in spec.into_iter().enumerate() {
            out.values[i * d + c] = z;
        }
    }
    Ok(out)
}

fn check_dim<T: Real>(f: &SampledFunction<T>, psi: &TestFunction) -> Result<()> {
    if psi.dim != f.grid.dim {
        return Err(Error::DimensionMismatch {
            expected: f.grid.dim,
            got: psi.dim,
        });
    }
    Ok(())
}

fn check_inputs<T: Real>(f: &SampledFunction<T>, u: &SampledFunction<T>, psi: &TestFunction, phi: &TestFunction) -> Result<()> {
    if !psi.has_vanishing_integral() {
        return Err(Error::NonzeroIntegral(psi.name.clone()));
    }
    if f.grid != u.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", f.grid, u.grid)));
    }
    if !u.space.is_scalar() {
        return Err(Error::NotScalar(u.space.dim));
    }
    check_dim(f, psi)?;
    check_dim(f, phi)
}

/// Contribution `Δlog t · ψ_t * [(ψ_t * f)(φ_t * u)]` of every scale, point-major.
fn slices<T: Real>(
    f: &SampledFunction<T>,
    u: &SampledFunction<T>,
    psi: &TestFunction,
    phi: &TestFunction,
    scales: &ScaleGrid,
) -> Vec<Vec<Complex<T>>> {
    let grid = f.grid;
    let plan = FourierPlan::<T>::new(&grid);
    let f_hat = component_spectra(f, &plan);
    let mut u_hat = u.component(0);
    plan.forward(&mut u_hat);
    let d = f.space.dim;
    let m = grid.len();
    let dlog = T::lit(scales.dlog());
    (0..scales.count)
        .into_par_iter()
        .map(|k| {
            let t = scales.node(k);
            let mp = psi.lattice_multiplier::<T>(&grid, t);
            let mf = phi.lattice_multiplier::<T>(&grid, t);
            let mut v: Vec<Complex<T>> = u_hat.iter().zip(&mf).map(|(a, b)| a * b).collect();
            plan.inverse(&mut v);
            let mut out = vec![Complex::new(T::zero(), T::zero()); m * d];
            let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
            for (c, spec) in f_hat.iter().enumerate() {
                for ((b, s), w) in buf.iter_mut().zip(spec).zip(&mp) {
                    *b = s * w;
                }
                plan.inverse(&mut buf);
                for (b, vv) in buf.iter_mut().zip(&v) {
                    *b *= vv;
                }
                plan.forward(&mut buf);
                for (b, w) in buf.iter_mut().zip(&mp) {
                    *b *= w;
                }
                plan.inverse(&mut buf);
                for (i, z) in buf.iter().enumerate() {
                    out[i * d + c] = z * dlog;
                }
            }
            out
        })
        .collect()
}

fn slice_l2<T: Real>(s: &[Complex<T>], cell: T) -> T {
    (s.iter().map(|z| z.norm_sqr()).sum::<T>() * cell).sqrt()
}

/// `P(f, u)` on the grid, summed over the scale nodes in increasing order.
pub fn paraproduct<T: Real>(
    f: &SampledFunction<T>,
    u: &SampledFunction<T>,
    psi: &TestFunction,
    phi: &TestFunction,
    scales: &ScaleGrid,
) -> Result<ParaproductResult<T>> {
    check_inputs(f, u, psi, phi)?;
    let parts = slices(f, u, psi, phi, scales);
    let mut field = SampledFunction::zeros(f.grid, f.space);
    for p in &parts {
        for (a, b) in field.values.iter_mut().zip(p) {
            *a += b;
        }
    }
    let cell = T::lit(f.grid.cell_measure());
    let slice_norms: Vec<T> = parts.iter().map(|p| slice_l2(p, cell)).collect();
    let peak = slice_norms.iter().copied().fold(T::zero(), T::max);
    let tail = if peak > T::zero() {
        slice_norms[0].max(*slice_norms.last().unwrap()) / peak
    } else {
        T::zero()
    };
    Ok(ParaproductResult {
        field,
        pairing: None,
        slice_norms,
        tail,
        truncated: tail > T::lit(TAIL_TOLERANCE),
    })
}

/// `Σ_k Δlog t Σ_x Δy^n ⟨ψ_{t_k} * [(ψ_{t_k} * f)(φ_{t_k} * u)](x), g(x)⟩`.
pub fn pair_paraproduct<T: Real>(
    f: &SampledFunction<T>,
    u: &SampledFunction<T>,
    g: &SampledFunction<T>,
    psi: &TestFunction,
    phi: &TestFunction,
    scales: &ScaleGrid,
) -> Result<Complex<T>> {
    check_inputs(f, u, psi, phi)?;
    if g.space != f.space.dual() || g.grid != f.grid {
        return Err(Error::SpaceMismatch(format!(
            "g in {:?} is not in the dual of {:?} on the same grid",
            g.space, f.space
        )));
    }
    let d = f.space.dim;
    let cell = T::lit(f.grid.cell_measure());
    let total = slices(f, u, psi, phi, scales)
        .iter()
        .map(|s| {
            s.chunks_exact(d)
                .zip(g.values.chunks_exact(d))
                .map(|(a, b)| pair_raw(a, b))
                .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
                * cell
        })
        .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z);
    Ok(total)
}

/// `(Σ_x Δy^n ‖v(x)‖_X^p)^{1/p}`; `p = ∞` gives the maximum.
pub fn lp_norm<T: Real>(v: &SampledFunction<T>, p: f64) -> Result<T> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("L^p exponent {p} below 1")));
    }
    let norms = v.norms();
    if p.is_infinite() {
        return Ok(norms.into_iter().fold(T::zero(), T::max));
    }
    let pp = T::lit(p);
    let cell = T::lit(v.grid.cell_measure());
    Ok((norms.iter().map(|x| x.powf(pp)).sum::<T>() * cell).powf(T::one() / pp))
}
