//! Bilinear pseudo-differential operators with `S_{0,0}`-type symbols on
//! periodic grids.
//!
//! The crate provides
//!
//! - scaled discrete Fourier transforms that reproduce the continuum
//!   conventions `F f(ξ) = ∫ e^{-ix·ξ} f(x) dx` exactly on band-limited
//!   grid data ([`grid`]),
//! - smooth cutoff windows with exact supports and exact partitions of
//!   unity ([`window`]),
//! - Besov and Sobolev norms via Littlewood-Paley projections, together
//!   with the peak operator `S_R` and a square-function estimate probe
//!   ([`norms`]),
//! - three evaluation paths for the bilinear operator `T_σ`, the
//!   `σ_{j,K,ν}` symbol decomposition and its spectral-support law
//!   ([`bilinear`]),
//! - constructors for the dyadic sharpness symbols and modulated bump
//!   functions, plus finite-difference symbol-class seminorm estimation
//!   ([`symbols`]),
//! - scripted experiments: closed-form identity checks, growth-exponent
//!   sweeps, boundedness-ratio probes and square-function/lattice-sum
//!   stability bundles ([`experiments`]),
//! - JSON interchange for fields, symbols, configs and reports ([`io`]).
//!
//! All numerics are generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the concrete aliases below fix `f64` for everyday
//! use.

use std::fmt::Debug;
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

pub mod bilinear;
pub mod error;
pub mod experiments;
mod fft;
pub mod grid;
pub mod io;
pub mod norms;
pub mod symbols;
pub mod window;

pub use error::{Error, Result};

/// Floating-point scalar the whole crate is generic over.
pub trait Scalar:
    Float + FloatConst + NumAssign + FromPrimitive + ToPrimitive + Sum + FftNum + Debug
{
    /// Shorthand for lossless conversion from `f64` literals.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 conversion")
    }
}

impl<T> Scalar for T where
    T: Float + FloatConst + NumAssign + FromPrimitive + ToPrimitive + Sum + FftNum + Debug
{
}

/// Default scalar type.
pub type Real = f64;
/// Complex value over the default scalar.
pub type CReal = Complex<Real>;
/// Space-side field over the default scalar.
pub type Field = grid::SampledField<Real>;
/// Frequency-side field over the default scalar.
pub type Spectrum = grid::SpectralField<Real>;
/// Grid over the default scalar.
pub type Grid = grid::GridSpec<Real>;
