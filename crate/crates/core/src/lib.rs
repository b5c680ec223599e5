//! Numerical free probability toolkit.
//!
//! The crate computes free additive and multiplicative convolution moments
//! exactly through non-crossing partitions ([`nc`]), densities of
//! `μ ⊞ μ_s(t)` through semicircular subordination ([`stieltjes`]), and
//! simulates symmetric random matrices built from stationary Gaussian fields
//! on `ℤ²` ([`field`], [`matrix`]).

pub mod eigen;
pub mod error;
pub mod field;
pub mod fmt;
pub mod matrix;
pub mod measure;
pub mod nc;
pub mod par;
pub mod rng;
pub mod stieltjes;

pub use error::{Error, Result};
pub use field::{sample_field, FieldSample, FieldSampler, SpectralDensity2D, TrigPoly};
pub use matrix::{build_gbar, build_wigner, build_wn, eigenvalues, esd_moments, EmpiricalSpectrum, SymmetricMatrix};
pub use measure::{ks_distance, quantile_r, semicircle_density, MeasureRep, QuantileFunctionR};
pub use nc::{
    add_conv_moments, cumulants_from_moments, enumerate_nc, kreweras, moments_from_cumulants, mult_conv_moments,
    MomentSequence, NCPartition,
};
pub use stieltjes::{atom_scan, cauchy_transform, density_of_plus_semicircle, subordinate_semicircle, DensityProfile};
