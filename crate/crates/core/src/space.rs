//! Finite-dimensional target spaces `ℓ^q_d`, duality, random sources and
//! Gaussian/Rademacher constants.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Real};

/// Exponent of an `ℓ^q` space. `q = ∞` is a tag, never a float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    /// Hölder conjugate: `1/q + 1/q' = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(q) if q == 1.0 => Exponent::Infinity,
            Exponent::Finite(q) => Exponent::Finite(q / (q - 1.0)),
        }
    }

    /// The exponent as an `f64`, `+inf` for the tag. Only used at file boundaries.
    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(q) => q,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn from_f64(q: f64) -> Result<Exponent> {
        if q == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if q.is_finite() && q >= 1.0 {
            Ok(Exponent::Finite(q))
        } else {
            Err(Error::InvalidParameter(format!("exponent {q} outside [1, ∞]")))
        }
    }
}

/// Space family. Only `ℓ^q_d` is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpaceFamily {
    #[default]
    EllQ,
}

/// Description of the complex Banach space `ℓ^q_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanachSpaceDesc {
    #[serde(default)]
    pub family: SpaceFamily,
    pub dim: usize,
    pub exponent: Exponent,
}

impl BanachSpaceDesc {
    pub fn new(dim: usize, exponent: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("space dimension must be positive".into()));
        }
        if let Exponent::Finite(q) = exponent {
            if !(q.is_finite() && q >= 1.0) {
                return Err(Error::InvalidParameter(format!("exponent {q} outside [1, ∞]")));
            }
        }
        Ok(Self {
            family: SpaceFamily::EllQ,
            dim,
            exponent,
        })
    }

    /// `ℓ^q_d` with finite `q ≥ 1`.
    pub fn ell(q: f64, dim: usize) -> Result<Self> {
        Self::new(dim, Exponent::Finite(q))
    }

    pub fn ell_inf(dim: usize) -> Result<Self> {
        Self::new(dim, Exponent::Infinity)
    }

    /// `ℓ²_d`.
    pub fn hilbert(dim: usize) -> Self {
        Self::new(dim, Exponent::Finite(2.0)).expect("positive dimension")
    }

    /// The scalar field ℂ, modelled as `ℓ²_1`.
    pub fn scalar() -> Self {
        Self::hilbert(1)
    }

    pub fn dual(&self) -> Self {
        Self {
            family: self.family,
            dim: self.dim,
            exponent: self.exponent.conjugate(),
        }
    }

    /// Whether the norm is Euclidean, i.e. Gauss norms reduce to weighted `L²`.
    pub fn is_hilbert(&self) -> bool {
        self.dim == 1 || self.exponent == Exponent::Finite(2.0)
    }

    pub fn is_scalar(&self) -> bool {
        self.dim == 1
    }

    /// Norm of a raw coefficient slice; panics in debug builds on length mismatch.
    pub fn norm_of<T: Real>(&self, v: &[Complex<T>]) -> T {
        debug_assert_eq!(v.len(), self.dim);
        match self.exponent {
            Exponent::Infinity => v.iter().map(|z| z.norm()).fold(T::zero(), T::max),
            Exponent::Finite(q) if q == 1.0 => v.iter().map(|z| z.norm()).sum(),
            Exponent::Finite(q) if q == 2.0 => v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt(),
            Exponent::Finite(q) => {
                let m = v.iter().map(|z| z.norm()).fold(T::zero(), T::max);
                if m == T::zero() {
                    return T::zero();
                }
                let q = T::lit(q);
                let s: T = v.iter().map(|z| (z.norm() / m).powf(q)).sum();
                m * s.powf(q.recip())
            }
        }
    }

    /// Checked norm of a raw coefficient slice.
    pub fn try_norm_of<T: Real>(&self, v: &[Complex<T>]) -> Result<T> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(self.norm_of(v))
    }
}

/// An element of a described space.
#[derive(Debug, Clone, PartialEq)]
pub struct XVector<T> {
    pub space: BanachSpaceDesc,
    pub entries: Vec<Complex<T>>,
}

impl<T: Real> XVector<T> {
    pub fn new(space: BanachSpaceDesc, entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.len() != space.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim,
                got: entries.len(),
            });
        }
        Ok(Self { space, entries })
    }

    pub fn from_real(space: BanachSpaceDesc, entries: &[T]) -> Result<Self> {
        Self::new(space, entries.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    pub fn zeros(space: BanachSpaceDesc) -> Self {
        Self {
            space,
            entries: vec![Complex::new(T::zero(), T::zero()); space.dim],
        }
    }

    pub fn norm(&self) -> T {
        self.space.norm_of(&self.entries)
    }
}

/// `‖v‖_X` for `v ∈ space`.
pub fn norm<T: Real>(space: &BanachSpaceDesc, v: &XVector<T>) -> Result<T> {
    if v.space.dim != space.dim || v.entries.len() != space.dim {
        return Err(Error::DimensionMismatch {
            expected: space.dim,
            got: v.entries.len(),
        });
    }
    Ok(space.norm_of(&v.entries))
}

/// Bilinear duality pairing `Σ_i x_i · x'_i` between `X` and `X'`.
pub fn pair<T: Real>(x: &XVector<T>, xd: &XVector<T>) -> Result<Complex<T>> {
    if x.entries.len() != xd.entries.len() {
        return Err(Error::DimensionMismatch {
            expected: x.entries.len(),
            got: xd.entries.len(),
        });
    }
    if xd.space != x.space.dual() {
        return Err(Error::SpaceMismatch(format!(
            "{:?} is not the dual of {:?}",
            xd.space.exponent, x.space.exponent
        )));
    }
    Ok(pair_raw(&x.entries, &xd.entries))
}

#[inline]
pub(crate) fn pair_raw<T: Real>(x: &[Complex<T>], xd: &[Complex<T>]) -> Complex<T> {
    x.iter()
        .zip(xd)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b)
}

/// Reproducible random stream identified by `(seed, stream)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// An independent child stream; deterministic in `(self, sub)`.
    pub fn derive(&self, sub: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(sub.wrapping_add(0x5851_F42D_4C95_7F2D))),
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One complex standard Gaussian with `E|γ|² = 1`.
#[inline]
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(
        T::lit(re * std::f64::consts::FRAC_1_SQRT_2),
        T::lit(im * std::f64::consts::FRAC_1_SQRT_2),
    )
}

/// `count` i.i.d. complex standard Gaussians drawn from the start of `rng`'s stream.
pub fn draw_gaussians<T: Real>(rng: &RandomSource, count: usize) -> Vec<Complex<T>> {
    let mut r = rng.rng();
    (0..count).map(|_| complex_gaussian(&mut r)).collect()
}

/// Gauss bound of the family `{λ I : λ ∈ values}`, which equals `sup |λ|`.
pub fn gauss_bound_scalars<T: Real>(values: &[Complex<T>]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Empty("gauss bound of an empty family".into()));
    }
    Ok(values.iter().map(|z| z.norm()).fold(T::zero(), T::max))
}

const MAX_ENUMERATED_SIGNS: usize = 16;
const SIGN_SAMPLES: usize = 4096;

fn check_type_exponent(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 2.0) {
        return Err(Error::InvalidParameter(format!("type exponent {q} outside (0, 2]")));
    }
    Ok(())
}

/// `E‖Σ ε_k y_k‖ / (Σ ‖y_k‖^q)^{1/q}` for one tuple. The expectation is
/// enumerated exactly for up to 16 terms and sampled beyond that.
pub fn type_ratio<T: Real>(
    space: &BanachSpaceDesc,
    q: f64,
    ys: &[Vec<Complex<T>>],
    rng: &RandomSource,
) -> Result<T> {
    check_type_exponent(q)?;
    if ys.is_empty() {
        return Err(Error::Empty("type ratio needs at least one vector".into()));
    }
    for y in ys {
        if y.len() != space.dim {
            return Err(Error::DimensionMismatch {
                expected: space.dim,
                got: y.len(),
            });
        }
    }
    let qt = T::lit(q);
    let denom: T = ys
        .iter()
        .map(|y| space.norm_of(y).powf(qt))
        .sum::<T>()
        .powf(qt.recip());
    if denom == T::zero() {
        return Ok(T::zero());
    }
    let n = ys.len();
    let mut acc = vec![Complex::new(T::zero(), T::zero()); space.dim];
    let mut signed_norm = |signs: &mut dyn FnMut(usize) -> bool| {
        acc.iter_mut().for_each(|a| *a = Complex::new(T::zero(), T::zero()));
        for (k, y) in ys.iter().enumerate() {
            let plus = signs(k);
            for (a, v) in acc.iter_mut().zip(y) {
                if plus {
                    *a += v;
                } else {
                    *a -= v;
                }
            }
        }
        space.norm_of(&acc)
    };
    let expectation = if n <= MAX_ENUMERATED_SIGNS {
        // ε and -ε give the same norm, so fix ε_0 = +1.
        let patterns = 1usize << (n - 1);
        let mut total = T::zero();
        for mask in 0..patterns {
            total += signed_norm(&mut |k| k == 0 || (mask >> (k - 1)) & 1 == 0);
        }
        total / from_usize::<T>(patterns)
    } else {
        let mut r = rng.rng();
        let mut total = T::zero();
        for _ in 0..SIGN_SAMPLES {
            let bits: Vec<bool> = (0..n).map(|_| r.random::<bool>()).collect();
            total += signed_norm(&mut |k| bits[k]);
        }
        total / from_usize::<T>(SIGN_SAMPLES)
    };
    Ok(expectation / denom)
}

/// Empirical lower bound for the type-`q` constant: the largest
/// [`type_ratio`] over `trials` random Gaussian tuples of length `n_terms`.
pub fn type_constant<T: Real>(
    space: &BanachSpaceDesc,
    q: f64,
    n_terms: usize,
    trials: usize,
    rng: &RandomSource,
) -> Result<T> {
    check_type_exponent(q)?;
    if n_terms == 0 || trials == 0 {
        return Err(Error::InvalidParameter("type constant needs N ≥ 1 and trials ≥ 1".into()));
    }
    let mut best = T::zero();
    for trial in 0..trials {
        let src = rng.derive(trial as u64);
        let mut r = src.rng();
        let ys: Vec<Vec<Complex<T>>> = (0..n_terms)
            .map(|_| (0..space.dim).map(|_| complex_gaussian(&mut r)).collect())
            .collect();
        best = best.max(type_ratio(space, q, &ys, &src.derive(u64::MAX))?);
    }
    Ok(best)
}
