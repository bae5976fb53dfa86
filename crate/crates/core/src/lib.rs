//! Tent-space functionals on periodic grids: conical square functions,
//! Carleson functionals, Gauss norms, Whitney cubes, stopping times and
//! paraproducts for sampled functions with values in `ℓ^q_d`.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix `f64`, which is what the harness uses.

pub mod calderon;
pub mod decomp;
pub mod error;
pub mod field;
pub mod fourier;
pub mod functionals;
pub mod gaussnorm;
pub mod paraproduct;
pub mod scalar;
pub mod space;
pub mod tsf;

pub use calderon::{ChiParams, TestFunction};
pub use decomp::{DyadicCube, StopHeight, StoppingProfile, WhitneyDecomposition};
pub use error::{Error, Result};
pub use field::{Ball, ScaleGrid, SpatialGrid};
pub use functionals::FunctionalKind;
pub use gaussnorm::{GaussConfig, McMethod};
pub use scalar::Real;
pub use space::{BanachSpaceDesc, Exponent, RandomSource};

pub type XVector = space::XVector<f64>;
pub type SampledFunction = field::SampledFunction<f64>;
pub type HalfSpaceField = field::HalfSpaceField<f64>;
pub type Region = field::Region<f64>;
pub type GaussEstimate = gaussnorm::GaussEstimate<f64>;
pub type FunctionalProfile = functionals::FunctionalProfile<f64>;
pub type ParaproductResult = paraproduct::ParaproductResult<f64>;
pub type TsfData = tsf::TsfData<f64>;
pub type Complex64 = num_complex::Complex<f64>;
