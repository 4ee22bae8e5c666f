//! Periodic grids and scaled discrete Fourier transforms.
//!
//! The spatial domain is the torus `[-πP, πP)^n` sampled at `N` points per
//! axis; the frequency lattice is `(1/P)·Z^n` truncated to signed indices
//! `m ∈ [-N/2, N/2)^n` in wraparound (FFT) order.  With `Δx = 2πP/N` and
//! `Δξ = 1/P` the relation `Δx·Δξ·N = 2π` holds per axis, so the scaled
//! transform pair below inverts exactly and Plancherel holds to rounding.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fft::dft_nd;
use crate::window::ScalarWindow;
use crate::Scalar;

/// Maximum supported dimension (stack buffers for lattice coordinates).
pub const MAX_DIM: usize = 4;

/// Periodic grid metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    dimension: usize,
    samples_per_axis: usize,
    period_scale: T,
}

impl<T: Scalar> GridSpec<T> {
    /// A new grid; `samples_per_axis` must be a power of two and
    /// `period_scale` positive.
    pub fn new(dimension: usize, samples_per_axis: usize, period_scale: T) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "dimension must be in 1..={MAX_DIM}, got {dimension}"
            )));
        }
        if !samples_per_axis.is_power_of_two() || samples_per_axis < 2 {
            return Err(Error::InvalidParameter(format!(
                "samples_per_axis must be a power of two >= 2, got {samples_per_axis}"
            )));
        }
        if !(period_scale > T::zero()) || !period_scale.is_finite() {
            return Err(Error::InvalidParameter(
                "period_scale must be a positive finite real".into(),
            ));
        }
        Ok(Self {
            dimension,
            samples_per_axis,
            period_scale,
        })
    }

    /// The desk preset: n = 1, N = 2^14, P = 16 (Nyquist 512).
    pub fn desk() -> Self {
        Self {
            dimension: 1,
            samples_per_axis: 1 << 14,
            period_scale: T::from_f64_lossy(16.0),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn period_scale(&self) -> T {
        self.period_scale
    }

    /// Total number of lattice points `N^n`.
    pub fn len(&self) -> usize {
        self.samples_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spatial spacing `Δx = 2πP/N`.
    pub fn delta_x(&self) -> T {
        T::TAU() * self.period_scale / T::from_f64_lossy(self.samples_per_axis as f64)
    }

    /// Frequency spacing `Δξ = 1/P`.
    pub fn delta_xi(&self) -> T {
        self.period_scale.recip()
    }

    /// Nyquist frequency `N/(2P)`; the lattice reaches `-Nyquist` and stops
    /// one spacing short of `+Nyquist`.
    pub fn nyquist(&self) -> T {
        T::from_f64_lossy(self.samples_per_axis as f64 / 2.0) / self.period_scale
    }

    /// Largest frequency magnitude on the lattice, `√n · Nyquist`.
    pub fn max_frequency(&self) -> T {
        self.nyquist() * T::from_f64_lossy(self.dimension as f64).sqrt()
    }

    /// `Δx^n`.
    pub fn cell_volume_x(&self) -> T {
        self.delta_x().powi(self.dimension as i32)
    }

    /// `Δξ^n`.
    pub fn cell_volume_xi(&self) -> T {
        self.delta_xi().powi(self.dimension as i32)
    }

    /// Decompose a flat row-major index into per-axis raw indices.
    #[inline]
    pub fn axis_indices(&self, flat: usize, out: &mut [usize]) {
        let n = self.samples_per_axis;
        let mut rest = flat;
        for a in (0..self.dimension).rev() {
            out[a] = rest % n;
            rest /= n;
        }
    }

    /// Signed frequency index per axis, `m ∈ [-N/2, N/2)`, wraparound order.
    #[inline]
    pub fn signed_indices(&self, flat: usize, out: &mut [i64]) {
        let n = self.samples_per_axis;
        let half = n / 2;
        let mut rest = flat;
        for a in (0..self.dimension).rev() {
            let k = rest % n;
            rest /= n;
            out[a] = if k < half { k as i64 } else { k as i64 - n as i64 };
        }
    }

    /// Lattice frequency `ξ_m = m/P` for a flat index.
    #[inline]
    pub fn frequency(&self, flat: usize, out: &mut [T]) {
        let mut m = [0i64; MAX_DIM];
        self.signed_indices(flat, &mut m);
        let dxi = self.delta_xi();
        for a in 0..self.dimension {
            out[a] = T::from_f64_lossy(m[a] as f64) * dxi;
        }
    }

    /// Lattice position `x_k = -πP + kΔx` for a flat index.
    #[inline]
    pub fn position(&self, flat: usize, out: &mut [T]) {
        let mut k = [0usize; MAX_DIM];
        self.axis_indices(flat, &mut k);
        let dx = self.delta_x();
        let origin = -T::PI() * self.period_scale;
        for a in 0..self.dimension {
            out[a] = origin + T::from_f64_lossy(k[a] as f64) * dx;
        }
    }

    /// Flat index for signed frequency indices, wrapping each axis mod N.
    pub fn flat_from_signed(&self, m: &[i64]) -> usize {
        let n = self.samples_per_axis as i64;
        let mut flat = 0usize;
        for a in 0..self.dimension {
            let wrapped = m[a].rem_euclid(n) as usize;
            flat = flat * self.samples_per_axis + wrapped;
        }
        flat
    }

    /// Parity `(-1)^{Σ_i m_i}` of a flat index; relates the raw DFT to the
    /// continuum-convention transform on the `[-πP, πP)` origin.
    #[inline]
    fn parity(&self, flat: usize) -> bool {
        let n = self.samples_per_axis;
        let mut rest = flat;
        let mut acc = 0usize;
        for _ in 0..self.dimension {
            acc ^= rest % n;
            rest /= n;
        }
        acc & 1 == 1
    }

    fn check_same(&self, other: &Self, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {:?} vs {:?}",
                self, other
            )))
        }
    }
}

fn check_finite<T: Scalar>(values: &[Complex<T>], context: &'static str) -> Result<()> {
    for (index, v) in values.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite { index, context });
        }
    }
    Ok(())
}

macro_rules! field_common {
    ($name:ident, $context:literal) => {
        impl<T: Scalar> $name<T> {
            /// Wrap a value array, validating length and finiteness.
            pub fn from_values(grid: GridSpec<T>, values: Vec<Complex<T>>) -> Result<Self> {
                if values.len() != grid.len() {
                    return Err(Error::InvalidParameter(format!(
                        concat!($context, " length {} does not match grid size {}"),
                        values.len(),
                        grid.len()
                    )));
                }
                check_finite(&values, $context)?;
                Ok(Self { grid, values })
            }

            /// The zero field.
            pub fn zeros(grid: GridSpec<T>) -> Self {
                Self {
                    values: vec![Complex::zero(); grid.len()],
                    grid,
                }
            }

            pub fn grid(&self) -> &GridSpec<T> {
                &self.grid
            }

            pub fn values(&self) -> &[Complex<T>] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [Complex<T>] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<Complex<T>> {
                self.values
            }

            /// Pointwise scaling by a complex constant.
            pub fn scaled(&self, c: Complex<T>) -> Self {
                Self {
                    grid: self.grid,
                    values: self.values.iter().map(|v| v * c).collect(),
                }
            }

            /// Pointwise sum; grids must agree.
            pub fn add(&self, other: &Self) -> Result<Self> {
                self.grid.check_same(&other.grid, "field addition")?;
                Ok(Self {
                    grid: self.grid,
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(a, b)| a + b)
                        .collect(),
                })
            }

            /// Pointwise difference; grids must agree.
            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.grid.check_same(&other.grid, "field subtraction")?;
                Ok(Self {
                    grid: self.grid,
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(a, b)| a - b)
                        .collect(),
                })
            }

            /// Largest pointwise magnitude.
            pub fn max_abs(&self) -> T {
                self.values
                    .iter()
                    .fold(T::zero(), |acc, v| acc.max(v.norm()))
            }
        }
    };
}

/// Complex samples on the space lattice `x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField<T> {
    grid: GridSpec<T>,
    values: Vec<Complex<T>>,
}

/// Complex samples on the frequency lattice `ξ_m` (wraparound order).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    grid: GridSpec<T>,
    values: Vec<Complex<T>>,
}

field_common!(SampledField, "sampled field");
field_common!(SpectralField, "spectral field");

impl<T: Scalar> SampledField<T> {
    /// Pointwise product; grids must agree.
    pub fn mul_pointwise(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid, "pointwise product")?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Field of pointwise magnitudes `|f|`.
    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|v| Complex::new(v.norm(), T::zero()))
                .collect(),
        }
    }
}

/// Forward transform `F(ξ_m) = Δx^n Σ_k e^{-i x_k·ξ_m} f(x_k)`.
///
/// Together with [`inverse_transform`] this is an exact two-sided inverse
/// pair on the grid.
pub fn forward_transform<T: Scalar>(f: &SampledField<T>) -> Result<SpectralField<T>> {
    check_finite(&f.values, "forward transform input")?;
    let grid = f.grid;
    let mut buf = f.values.clone();
    dft_nd(&mut buf, grid.dimension(), grid.samples_per_axis(), false);
    let scale = grid.cell_volume_x();
    for (flat, v) in buf.iter_mut().enumerate() {
        let s = if grid.parity(flat) { -scale } else { scale };
        *v = *v * s;
    }
    Ok(SpectralField { grid, values: buf })
}

/// Inverse transform `f(x_k) = (2π)^{-n} Δξ^n Σ_m e^{i x_k·ξ_m} F(ξ_m)`.
pub fn inverse_transform<T: Scalar>(spec: &SpectralField<T>) -> Result<SampledField<T>> {
    check_finite(&spec.values, "inverse transform input")?;
    let grid = spec.grid;
    let mut buf = spec.values.clone();
    for (flat, v) in buf.iter_mut().enumerate() {
        if grid.parity(flat) {
            *v = -*v;
        }
    }
    dft_nd(&mut buf, grid.dimension(), grid.samples_per_axis(), true);
    let scale = grid.cell_volume_xi()
        / T::TAU().powi(grid.dimension() as i32);
    for v in buf.iter_mut() {
        *v = *v * scale;
    }
    Ok(SampledField { grid, values: buf })
}

/// Apply the Fourier multiplier `m(D)f = F^{-1}[m·f̂]`.
///
/// Errors if the window evaluates to a non-finite value at any lattice
/// frequency, naming the frequency.
pub fn apply_multiplier<T: Scalar>(
    m: &ScalarWindow<T>,
    f: &SampledField<T>,
) -> Result<SampledField<T>> {
    let spec = forward_transform(f)?;
    let weighted = multiply_spectrum(m, &spec)?;
    inverse_transform(&weighted)
}

/// Multiply a spectrum pointwise by a window evaluated on the lattice.
///
/// Windows with a small support box are evaluated only inside the box
/// (they are exact zeros outside by construction), which makes narrow
/// band/cell multipliers cheap on large grids.
pub fn multiply_spectrum<T: Scalar>(
    m: &ScalarWindow<T>,
    spec: &SpectralField<T>,
) -> Result<SpectralField<T>> {
    let grid = spec.grid;
    let dim = grid.dimension();
    let mut xi = [T::zero(); MAX_DIM];

    if let Some(indices) = boxed_indices(&grid, m) {
        let mut out = vec![Complex::zero(); spec.values.len()];
        for flat in indices {
            grid.frequency(flat, &mut xi);
            let w = m.eval(&xi[..dim]);
            if !w.is_finite() {
                return Err(Error::NonFiniteMultiplier {
                    frequency: xi[..dim]
                        .iter()
                        .map(|t| t.to_f64().unwrap_or(f64::NAN))
                        .collect(),
                });
            }
            out[flat] = spec.values[flat] * w;
        }
        return Ok(SpectralField { grid, values: out });
    }

    let mut out = spec.values.clone();
    for (flat, v) in out.iter_mut().enumerate() {
        grid.frequency(flat, &mut xi);
        let w = m.eval(&xi[..dim]);
        if !w.is_finite() {
            return Err(Error::NonFiniteMultiplier {
                frequency: xi[..dim]
                    .iter()
                    .map(|t| t.to_f64().unwrap_or(f64::NAN))
                    .collect(),
            });
        }
        *v = *v * w;
    }
    Ok(SpectralField { grid, values: out })
}

/// Flat lattice indices inside a window's support box, when the box covers
/// less than half of each axis; `None` means "just scan everything".
fn boxed_indices<T: Scalar>(grid: &GridSpec<T>, m: &ScalarWindow<T>) -> Option<Vec<usize>> {
    let dim = grid.dimension();
    let bx = m.support_box(dim)?;
    let n = grid.samples_per_axis() as i64;
    let half = n / 2;
    let p = grid.period_scale().to_f64()?;
    let mut per_axis: Vec<Vec<usize>> = Vec::with_capacity(dim);
    let mut total = 1usize;
    for (lo, hi) in bx {
        let lo = (lo.to_f64()? * p).ceil() as i64;
        let hi = (hi.to_f64()? * p).floor() as i64;
        let lo = lo.max(-half);
        let hi = hi.min(half - 1);
        if lo > hi {
            return Some(Vec::new());
        }
        let count = (hi - lo + 1) as usize;
        if count * 2 > n as usize {
            return None;
        }
        per_axis.push((lo..=hi).map(|v| v.rem_euclid(n) as usize).collect());
        total *= count;
    }
    let mut out = Vec::with_capacity(total);
    let mut stack = vec![0usize];
    for axis in per_axis {
        let mut next = Vec::with_capacity(stack.len() * axis.len());
        for base in &stack {
            for idx in &axis {
                next.push(base * grid.samples_per_axis() + idx);
            }
        }
        stack = next;
    }
    out.extend(stack);
    Some(out)
}

/// Riemann-sum `L^p` norm `(Σ_k |f(x_k)|^p Δx^n)^{1/p}`; `p = ∞` takes the
/// maximum.  Requires `p ≥ 1`; `ℓ^q` aggregation with `q < 1` lives in the
/// norms module.
pub fn lp_norm<T: Scalar>(f: &SampledField<T>, p: T) -> Result<T> {
    if p.is_nan() || p < T::one() {
        return Err(Error::InvalidParameter(format!(
            "lp_norm requires p >= 1 or p = inf, got {:?}",
            p
        )));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let vol = f.grid.cell_volume_x();
    let two = T::from_f64_lossy(2.0);
    let sum = if p == two {
        f.values.iter().map(|v| v.norm_sqr()).sum::<T>()
    } else if p == T::one() {
        f.values.iter().map(|v| v.norm()).sum::<T>()
    } else {
        f.values.iter().map(|v| v.norm().powf(p)).sum::<T>()
    };
    Ok((sum * vol).powf(p.recip()))
}

/// Weighted spectral `ℓ²` norm `((2π)^{-n} Σ_m |F(ξ_m)|² Δξ^n)^{1/2}`;
/// equals the space-side `L²` norm exactly (Plancherel).
pub fn spectral_l2_norm<T: Scalar>(spec: &SpectralField<T>) -> T {
    let grid = spec.grid;
    let scale = grid.cell_volume_xi() / T::TAU().powi(grid.dimension() as i32);
    (spec.values.iter().map(|v| v.norm_sqr()).sum::<T>() * scale).sqrt()
}
