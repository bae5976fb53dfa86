//! Gauss norms `‖F·1_R‖_{γ(X)}` of fields restricted to regions.
//!
//! In a Hilbert space the norm is the weighted `L²` sum. Otherwise it is
//! estimated by Monte Carlo, either literally (one Gaussian per region atom)
//! or from the `d × d` covariance `Σ w F F^*` of the Gaussian sum, which has
//! the same distribution and costs `d` Gaussians per trial.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Atom, HalfSpaceField, Region};
use crate::scalar::{from_usize, Real};
use crate::space::{complex_gaussian, pair_raw, BanachSpaceDesc, RandomSource};

/// Estimate of a Gauss norm. `stderr = 0` exactly when `exact`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussEstimate<T> {
    pub value: T,
    pub stderr: T,
    pub trials: usize,
    pub exact: bool,
}

impl<T: Real> GaussEstimate<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            stderr: T::zero(),
            trials: 0,
            exact: true,
        }
    }

    /// `sqrt(mean)` of the squared-norm samples with delta-method stderr.
    pub fn from_squares(squares: &[T]) -> Self {
        let n = from_usize::<T>(squares.len());
        let mean = squares.iter().copied().sum::<T>() / n;
        let var = squares.iter().map(|&s| (s - mean) * (s - mean)).sum::<T>() / (n - T::one());
        let value = mean.sqrt();
        let se_mean = (var / n).sqrt();
        let stderr = if value > T::zero() {
            se_mean / (value + value)
        } else {
            T::zero()
        };
        Self {
            value,
            stderr,
            trials: squares.len(),
            exact: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum McMethod {
    /// One Gaussian per region atom.
    #[default]
    Atoms,
    /// Gaussian vector with the covariance of the atom sum.
    Covariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussConfig {
    pub trials: usize,
    pub rng: RandomSource,
    /// Use Monte Carlo even when the exact formula applies.
    pub force_mc: bool,
    pub method: McMethod,
}

impl Default for GaussConfig {
    fn default() -> Self {
        Self {
            trials: 2000,
            rng: RandomSource::new(0),
            force_mc: false,
            method: McMethod::Atoms,
        }
    }
}

impl GaussConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng: RandomSource::new(seed),
            ..Self::default()
        }
    }

    pub(crate) fn uses_exact(&self, space: &BanachSpaceDesc) -> bool {
        space.is_hilbert() && !self.force_mc
    }

    fn check_trials(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::InvalidParameter(format!(
                "Monte Carlo needs at least 2 trials, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

/// `‖v‖²` in `ℓ^q_d`.
#[inline]
pub(crate) fn norm_sqr<T: Real>(space: &BanachSpaceDesc, v: &[Complex<T>]) -> T {
    if space.is_hilbert() {
        v.iter().map(|z| z.norm_sqr()).sum()
    } else {
        let n = space.norm_of(v);
        n * n
    }
}

/// `d × d` Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance<T> {
    pub dim: usize,
    pub entries: Vec<Complex<T>>,
}

impl<T: Real> Covariance<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    /// `self += w · v v^*`.
    #[inline]
    pub fn add_outer(&mut self, w: T, v: &[Complex<T>]) {
        let d = self.dim;
        for r in 0..d {
            let vr = v[r] * w;
            for c in 0..d {
                self.entries[r * d + c] += vr * v[c].conj();
            }
        }
    }

    pub fn add_scaled(&mut self, w: T, other: &Covariance<T>) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * w;
        }
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).sum()
    }

    /// Lower-triangular `L` with `L L^* = self`; columns with a non-positive
    /// pivot (relative to the trace) are set to zero.
    pub fn cholesky(&self) -> Vec<Complex<T>> {
        let d = self.dim;
        let mut l = vec![Complex::new(T::zero(), T::zero()); d * d];
        let floor = self.trace() * T::epsilon() * from_usize::<T>(4 * d);
        for j in 0..d {
            let mut diag = self.entries[j * d + j].re;
            for k in 0..j {
                diag -= l[j * d + k].norm_sqr();
            }
            if diag <= floor {
                continue;
            }
            let ljj = diag.sqrt();
            l[j * d + j] = Complex::new(ljj, T::zero());
            for i in j + 1..d {
                let mut s = self.entries[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k].conj();
                }
                l[i * d + j] = s / ljj;
            }
        }
        l
    }
}

/// Fixed standard complex Gaussian vectors reused across many covariances.
#[derive(Debug, Clone)]
pub struct GaussianDraws<T> {
    pub dim: usize,
    /// `trials × dim`, trial-major.
    pub z: Vec<Complex<T>>,
}

impl<T: Real> GaussianDraws<T> {
    pub fn new(rng: &RandomSource, trials: usize, dim: usize) -> Self {
        let mut r = rng.rng();
        let z = (0..trials * dim).map(|_| complex_gaussian(&mut r)).collect();
        Self { dim, z }
    }

    pub fn trials(&self) -> usize {
        self.z.len() / self.dim.max(1)
    }

    /// Estimate of `sqrt(E‖S‖²)` for `S` with covariance `cov`.
    pub fn estimate(&self, space: &BanachSpaceDesc, cov: &Covariance<T>) -> GaussEstimate<T> {
        let d = self.dim;
        let l = cov.cholesky();
        let mut s = vec![Complex::new(T::zero(), T::zero()); d];
        let squares: Vec<T> = self
            .z
            .chunks_exact(d)
            .map(|z| {
                for r in 0..d {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for c in 0..=r {
                        acc += l[r * d + c] * z[c];
                    }
                    s[r] = acc;
                }
                norm_sqr(space, &s)
            })
            .collect();
        GaussEstimate::from_squares(&squares)
    }
}

/// Atoms sorted by `(k, i)` so that sums do not depend on the order of `R`.
fn canonical<T: Real>(region: &Region<T>) -> Vec<Atom<T>> {
    let mut atoms = region.atoms.clone();
    atoms.sort_by_key(|a| (a.k, a.i));
    atoms
}

/// `Σ_{(i,k)∈R} w_{ik} F_{ik} F_{ik}^*`.
pub fn region_covariance<T: Real>(f: &HalfSpaceField<T>, region: &Region<T>) -> Covariance<T> {
    let mut cov = Covariance::zeros(f.space.dim);
    for a in &canonical(region) {
        cov.add_outer(a.weight, f.value(a.i, a.k));
    }
    cov
}

/// `sqrt(Σ_R w ‖F‖²)`.
pub fn hilbert_value<T: Real>(f: &HalfSpaceField<T>, region: &Region<T>) -> T {
    canonical(region)
        .iter()
        .map(|a| a.weight * f.value(a.i, a.k).iter().map(|z| z.norm_sqr()).sum::<T>())
        .sum::<T>()
        .sqrt()
}

fn atoms_estimate<T: Real>(f: &HalfSpaceField<T>, region: &Region<T>, cfg: &GaussConfig) -> GaussEstimate<T> {
    let d = f.space.dim;
    let atoms = canonical(region);
    let roots: Vec<T> = atoms.iter().map(|a| a.weight.sqrt()).collect();
    let squares: Vec<T> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = cfg.rng.derive(t as u64).rng();
            let mut s = vec![Complex::new(T::zero(), T::zero()); d];
            for (a, &r) in atoms.iter().zip(&roots) {
                let g: Complex<T> = complex_gaussian(&mut rng);
                let g = g * r;
                for (acc, v) in s.iter_mut().zip(f.value(a.i, a.k)) {
                    *acc += g * v;
                }
            }
            norm_sqr(&f.space, &s)
        })
        .collect();
    GaussEstimate::from_squares(&squares)
}

/// `‖F·1_R‖_{γ(X)}`.
pub fn gauss_norm<T: Real>(f: &HalfSpaceField<T>, region: &Region<T>, cfg: &GaussConfig) -> Result<GaussEstimate<T>> {
    region.check_within(&f.grid, &f.scales)?;
    if region.is_empty() {
        return Ok(GaussEstimate::exact(T::zero()));
    }
    if cfg.uses_exact(&f.space) {
        return Ok(GaussEstimate::exact(hilbert_value(f, region)));
    }
    cfg.check_trials()?;
    Ok(match cfg.method {
        McMethod::Atoms => atoms_estimate(f, region, cfg),
        McMethod::Covariance => {
            GaussianDraws::new(&cfg.rng, cfg.trials, f.space.dim).estimate(&f.space, &region_covariance(f, region))
        }
    })
}

/// A signed defect with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Defect<T> {
    pub value: T,
    pub stderr: T,
}

/// `∫_R |⟨F, G⟩| dμ − ‖F 1_R‖_γ ‖G 1_R‖_γ`; the duality bound says this is `≤ 0`.
pub fn duality_defect<T: Real>(
    f: &HalfSpaceField<T>,
    g: &HalfSpaceField<T>,
    region: &Region<T>,
    cfg: &GaussConfig,
) -> Result<Defect<T>> {
    f.check_same_grids(g)?;
    if g.space != f.space.dual() {
        return Err(Error::SpaceMismatch(format!(
            "{:?} is not the dual of {:?}",
            g.space, f.space
        )));
    }
    let lhs: T = region
        .atoms
        .iter()
        .map(|a| a.weight * pair_raw(f.value(a.i, a.k), g.value(a.i, a.k)).norm())
        .sum();
    let nf = gauss_norm(f, region, cfg)?;
    let ng = gauss_norm(g, region, cfg)?;
    let stderr = ((ng.value * nf.stderr).powi(2) + (nf.value * ng.stderr).powi(2)).sqrt();
    Ok(Defect {
        value: lhs - nf.value * ng.value,
        stderr,
    })
}

/// `|‖v·F 1_R‖_γ − ‖F 1_R‖_γ|` for a unimodular scalar `v`, with common random numbers.
pub fn unimodular_invariance_defect<T: Real>(
    f: &HalfSpaceField<T>,
    region: &Region<T>,
    v: &HalfSpaceField<T>,
    cfg: &GaussConfig,
) -> Result<Defect<T>> {
    f.check_same_grids(v)?;
    if !v.space.is_scalar() {
        return Err(Error::NotScalar(v.space.dim));
    }
    let tol = T::lit(1e-9);
    for (n, a) in region.atoms.iter().enumerate() {
        if (v.value(a.i, a.k)[0].norm() - T::one()).abs() > tol {
            return Err(Error::NotUnimodular(n));
        }
    }
    let vf = f.multiplied_by(v)?;
    let a = gauss_norm(&vf, region, cfg)?;
    let b = gauss_norm(f, region, cfg)?;
    Ok(Defect {
        value: (a.value - b.value).abs(),
        stderr: (a.stderr * a.stderr + b.stderr * b.stderr).sqrt(),
    })
}
