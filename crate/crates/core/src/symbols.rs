//! Constructors for the dyadic sharpness symbols and their test functions,
//! plus finite-difference seminorm estimation for the two symbol classes.
//!
//! The sharpness symbols are truncated dyadic sums built from the window
//! triple in [`crate::window::sharpness_windows`]; the test functions are
//! modulated bumps whose spectra are shifts `bump(ξ ∓ 2^j e₁)`.  All
//! closed-form identities these satisfy (one-term survival, modulated
//! products) hold exactly on the lattice because the windows plateau at 1
//! on the relevant supports.

use num_complex::Complex;

use crate::bilinear::{SeparableTerm, Symbol};
use crate::error::{Error, Result};
use crate::grid::{inverse_transform, GridSpec, SampledField, SpectralField, MAX_DIM};
use crate::window::{sharpness_windows, ScalarWindow};
use crate::Scalar;

/// Symbol class variant: uniform Hörmander weight `(1+|ξ₁|+|ξ₂|)^m` or the
/// product weight `(1+|ξ₁|)^{m₁}(1+|ξ₂|)^{m₂}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassVariant<T> {
    Hormander { m: T },
    Product { m1: T, m2: T },
}

/// A symbol class with the derivative-order cap used by the estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSpec<T> {
    pub variant: ClassVariant<T>,
    /// Max derivative order per variable (finite-difference sweep cap).
    pub max_order: usize,
}

impl<T: Scalar> ClassSpec<T> {
    pub fn hormander(m: T) -> Self {
        Self {
            variant: ClassVariant::Hormander { m },
            max_order: 4,
        }
    }

    pub fn product(m1: T, m2: T) -> Self {
        Self {
            variant: ClassVariant::Product { m1, m2 },
            max_order: 4,
        }
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    fn weight(&self, xi1: T, xi2: T) -> T {
        match self.variant {
            ClassVariant::Hormander { m } => (T::one() + xi1.abs() + xi2.abs()).powf(m),
            ClassVariant::Product { m1, m2 } => {
                (T::one() + xi1.abs()).powf(m1) * (T::one() + xi2.abs()).powf(m2)
            }
        }
    }
}

fn validate_k_range<T: Scalar>(grid: &GridSpec<T>, k_min: u32, k_max: u32) -> Result<()> {
    if k_min < 1 || k_min > k_max {
        return Err(Error::InvalidParameter(format!(
            "dyadic range needs 1 <= k_min <= k_max, got [{k_min}, {k_max}]"
        )));
    }
    let nyq = grid.nyquist().to_f64().expect("finite");
    let limit = nyq.log2() - 1.0;
    if (k_max as f64) > limit {
        return Err(Error::NyquistExceeded {
            required: 2.0f64.powi(k_max as i32 + 1),
            nyquist: nyq,
        });
    }
    Ok(())
}

/// The uniform-class sharpness symbol
/// `σ(ξ₁,ξ₂) = Σ_{k=k_min}^{k_max} 2^{-kn/2} cover(2^{-k}ξ₁)·annulus(2^{-k}ξ₂)`.
///
/// Truncation at `k_max` is exact for inputs band-limited below `2^{k_max}`;
/// the range must stay below the grid Nyquist frequency.
pub fn make_sharpness_symbol_hormander<T: Scalar>(
    grid: &GridSpec<T>,
    k_min: u32,
    k_max: u32,
) -> Result<Symbol<T>> {
    validate_k_range(grid, k_min, k_max)?;
    let w = sharpness_windows::<T>();
    let n = grid.dimension() as f64;
    let terms = (k_min..=k_max)
        .map(|k| {
            SeparableTerm::new(
                T::from_f64_lossy(2.0f64.powf(-(k as f64) * n / 2.0)),
                ScalarWindow::DyadicRescale {
                    base: Box::new(w.cover.clone()),
                    scale_exponent: k as i32,
                },
                ScalarWindow::DyadicRescale {
                    base: Box::new(w.annulus.clone()),
                    scale_exponent: k as i32,
                },
            )
        })
        .collect();
    Ok(Symbol::separable(terms))
}

fn dyadic_annulus_sum<T: Scalar>(m: T, k_min: u32, k_max: u32) -> ScalarWindow<T> {
    let w = sharpness_windows::<T>();
    ScalarWindow::Sum {
        terms: (k_min..=k_max)
            .map(|k| {
                (
                    T::from_f64_lossy(2.0).powf(m * T::from_f64_lossy(k as f64)),
                    ScalarWindow::DyadicRescale {
                        base: Box::new(w.annulus.clone()),
                        scale_exponent: k as i32,
                    },
                )
            })
            .collect(),
    }
}

/// The product-class sharpness symbol
/// `σ(ξ₁,ξ₂) = (Σ_{k₁} 2^{m₁k₁} annulus(2^{-k₁}ξ₁))·(Σ_{k₂} 2^{m₂k₂} annulus(2^{-k₂}ξ₂))`.
pub fn make_sharpness_symbol_product<T: Scalar>(
    grid: &GridSpec<T>,
    m1: T,
    m2: T,
    k_min: u32,
    k_max: u32,
) -> Result<Symbol<T>> {
    validate_k_range(grid, k_min, k_max)?;
    Ok(Symbol::separable(vec![SeparableTerm::new(
        T::one(),
        dyadic_annulus_sum(m1, k_min, k_max),
        dyadic_annulus_sum(m2, k_min, k_max),
    )]))
}

/// The mixed sharpness symbol
/// `σ(ξ₁,ξ₂) = cover(ξ₁)·(Σ_{k₂} 2^{m₂k₂} annulus(2^{-k₂}ξ₂))`,
/// the witness for the `s - max{s_i, s̃_i} ≤ -m_i` necessity direction.
pub fn make_sharpness_symbol_mixed<T: Scalar>(
    grid: &GridSpec<T>,
    m2: T,
    k_min: u32,
    k_max: u32,
) -> Result<Symbol<T>> {
    validate_k_range(grid, k_min, k_max)?;
    let w = sharpness_windows::<T>();
    Ok(Symbol::separable(vec![SeparableTerm::new(
        T::one(),
        w.cover.clone(),
        dyadic_annulus_sum(m2, k_min, k_max),
    )]))
}

/// A modulated bump: the field with spectrum `bump(ξ - sign·2^j e₁)`,
/// equal to `e^{i·sign·2^j x·e₁}·F^{-1}bump(x)` on the grid.
///
/// `sign = -1` is the first-slot test function, `sign = +1` the second-slot
/// one.  Requires `2^j + √2 < Nyquist` and a period scale that puts `2^j`
/// on the frequency lattice.
pub fn make_modulated_bump<T: Scalar>(
    grid: &GridSpec<T>,
    j: u32,
    sign: i8,
) -> Result<SampledField<T>> {
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidParameter(format!(
            "modulation sign must be ±1, got {sign}"
        )));
    }
    let freq = 2.0f64.powi(j as i32);
    let nyq = grid.nyquist().to_f64().expect("finite");
    if freq + 2.0f64.sqrt() >= nyq {
        return Err(Error::NyquistExceeded {
            required: freq + 2.0f64.sqrt(),
            nyquist: nyq,
        });
    }
    let m0 = freq * grid.period_scale().to_f64().expect("finite");
    if (m0 - m0.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "2^{j} is not on the frequency lattice (period scale {:?})",
            grid.period_scale()
        )));
    }
    let shift = T::from_f64_lossy(sign as f64 * freq);
    let bump = sharpness_windows::<T>().bump;
    spectral_window_field(grid, move |xi: &mut [T]| {
        xi[0] = xi[0] - shift;
        bump.eval(xi)
    })
}

/// The low bump: the field with spectrum `bump(ξ)` (real and even).
pub fn make_low_bump<T: Scalar>(grid: &GridSpec<T>) -> Result<SampledField<T>> {
    let bump = sharpness_windows::<T>().bump;
    spectral_window_field(grid, move |xi: &mut [T]| bump.eval(xi))
}

fn spectral_window_field<T: Scalar>(
    grid: &GridSpec<T>,
    eval: impl Fn(&mut [T]) -> T,
) -> Result<SampledField<T>> {
    let n = grid.dimension();
    let mut spec = SpectralField::zeros(*grid);
    let mut xi = [T::zero(); MAX_DIM];
    for flat in 0..grid.len() {
        grid.frequency(flat, &mut xi);
        let v = eval(&mut xi[..n]);
        spec.values_mut()[flat] = Complex::new(v, T::zero());
    }
    inverse_transform(&spec)
}

/// One row of a seminorm table: the multi-index `(α, β₁, β₂)` with the
/// weighted finite-difference sup, globally and per dyadic band.
#[derive(Debug, Clone)]
pub struct SeminormEntry<T> {
    pub alpha: usize,
    pub beta1: usize,
    pub beta2: usize,
    pub global_sup: T,
    pub per_band: Vec<(u32, T)>,
}

/// Finite-difference class-seminorm table.
#[derive(Debug, Clone)]
pub struct SeminormTable<T> {
    pub entries: Vec<SeminormEntry<T>>,
    pub bands: Vec<u32>,
}

impl<T: Scalar> SeminormTable<T> {
    pub fn entry(&self, alpha: usize, beta1: usize, beta2: usize) -> Option<&SeminormEntry<T>> {
        self.entries
            .iter()
            .find(|e| e.alpha == alpha && e.beta1 == beta1 && e.beta2 == beta2)
    }
}

/// Sampling plan for [`seminorm_estimate`].
#[derive(Debug, Clone)]
pub struct SeminormOptions {
    /// Dyadic bands `k` to tabulate (`|ξ_i| ~ 2^k` shells).
    pub bands: Vec<u32>,
    /// Sample points per frequency axis per band.
    pub samples_per_axis: usize,
    /// Sample points along x (only matters for x-dependent symbols).
    pub x_samples: usize,
}

impl Default for SeminormOptions {
    fn default() -> Self {
        Self {
            bands: (1..=6).collect(),
            samples_per_axis: 16,
            x_samples: 1,
        }
    }
}

// central-difference stencils of 4th-order accuracy, orders 0..=4
const STENCILS: [&[(i32, f64)]; 5] = [
    &[(0, 1.0)],
    &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
    &[
        (-2, -1.0 / 12.0),
        (-1, 16.0 / 12.0),
        (0, -30.0 / 12.0),
        (1, 16.0 / 12.0),
        (2, -1.0 / 12.0),
    ],
    &[
        (-3, 1.0 / 8.0),
        (-2, -1.0),
        (-1, 13.0 / 8.0),
        (1, -13.0 / 8.0),
        (2, 1.0),
        (3, -1.0 / 8.0),
    ],
    &[
        (-3, -1.0 / 6.0),
        (-2, 2.0),
        (-1, -13.0 / 2.0),
        (0, 28.0 / 3.0),
        (1, -13.0 / 2.0),
        (2, 2.0),
        (3, -1.0 / 6.0),
    ],
];

/// Estimate class seminorms of a symbol by finite differences.
///
/// For each multi-index `(α, β₁, β₂)` up to the class order cap, returns
/// `sup |∂^α_x ∂^{β₁}_{ξ₁} ∂^{β₂}_{ξ₂} σ| / weight` over sampled points,
/// tabulated per dyadic band.  Analytic (separable) symbols are sampled
/// off-lattice with step `Δξ/2`; sampled symbols use the lattice step.
/// Supported for n = 1 grids.
pub fn seminorm_estimate<T: Scalar>(
    symbol: &Symbol<T>,
    grid: &GridSpec<T>,
    class: &ClassSpec<T>,
    opts: &SeminormOptions,
) -> Result<SeminormTable<T>> {
    if grid.dimension() != 1 {
        return Err(Error::InvalidParameter(
            "seminorm estimation runs on n = 1 grids".into(),
        ));
    }
    let analytic = matches!(symbol, Symbol::Separable(_));
    let h = if analytic {
        grid.delta_xi() * T::from_f64_lossy(0.5)
    } else {
        grid.delta_xi()
    };
    let hx = grid.delta_x();
    let x_dependent = !symbol.is_x_independent();
    let max_alpha = if x_dependent { class.max_order } else { 0 };
    let nyq = grid.nyquist();

    let eval = |x: T, xi1: T, xi2: T| -> Result<Complex<T>> {
        let v = eval_symbol_point(symbol, grid, x, xi1, xi2);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite difference quotient near (x={:?}, xi1={:?}, xi2={:?})",
                x, xi1, xi2
            )));
        }
        Ok(v)
    };

    let x_points: Vec<T> = (0..opts.x_samples.max(1))
        .map(|i| {
            let frac = (i as f64 + 0.5) / opts.x_samples.max(1) as f64;
            T::from_f64_lossy((frac - 0.5) * 2.0 * std::f64::consts::PI)
                * grid.period_scale()
        })
        .collect();

    let mut entries = Vec::new();
    for alpha in 0..=max_alpha {
        for beta1 in 0..=class.max_order {
            for beta2 in 0..=class.max_order {
                let mut per_band: Vec<(u32, T)> = Vec::new();
                for &band in &opts.bands {
                    let reach = T::from_f64_lossy(2.0f64.powi(band as i32 + 1));
                    if reach > nyq {
                        continue;
                    }
                    let mut sup = T::zero();
                    for i in 0..opts.samples_per_axis {
                        for jj in 0..opts.samples_per_axis {
                            // cover the band shell [2^{k-1}, 2^{k+1}] on both sides
                            let t1 = sample_in_band::<T>(band, i, opts.samples_per_axis);
                            let t2 = sample_in_band::<T>(band, jj, opts.samples_per_axis);
                            for &x in &x_points {
                                let d = fd_derivative(
                                    &eval, x, t1, t2, alpha, beta1, beta2, hx, h,
                                )?;
                                let w = class.weight(t1, t2);
                                sup = sup.max(d / w);
                            }
                        }
                    }
                    per_band.push((band, sup));
                }
                let global_sup = per_band
                    .iter()
                    .map(|(_, v)| *v)
                    .fold(T::zero(), |a, b| a.max(b));
                entries.push(SeminormEntry {
                    alpha,
                    beta1,
                    beta2,
                    global_sup,
                    per_band,
                });
            }
        }
    }
    Ok(SeminormTable {
        entries,
        bands: opts.bands.clone(),
    })
}

fn sample_in_band<T: Scalar>(band: u32, i: usize, count: usize) -> T {
    // symmetric sweep over ±[2^{k-1}, 2^{k+1}]
    let lo = 2.0f64.powi(band as i32 - 1);
    let hi = 2.0f64.powi(band as i32 + 1);
    let half = count.max(2) / 2;
    let (side, idx) = if i < half { (-1.0, i) } else { (1.0, i - half) };
    let frac = (idx as f64 + 0.5) / half as f64;
    T::from_f64_lossy(side * (lo + (hi - lo) * frac))
}

#[allow(clippy::too_many_arguments)]
fn fd_derivative<T: Scalar>(
    eval: &impl Fn(T, T, T) -> Result<Complex<T>>,
    x: T,
    xi1: T,
    xi2: T,
    alpha: usize,
    beta1: usize,
    beta2: usize,
    hx: T,
    h: T,
) -> Result<T> {
    let sx = STENCILS[alpha];
    let s1 = STENCILS[beta1];
    let s2 = STENCILS[beta2];
    let mut acc = Complex::new(T::zero(), T::zero());
    for (ox, cx) in sx {
        for (o1, c1) in s1 {
            for (o2, c2) in s2 {
                let coeff = T::from_f64_lossy(cx * c1 * c2);
                let v = eval(
                    x + hx * T::from_f64_lossy(*ox as f64),
                    xi1 + h * T::from_f64_lossy(*o1 as f64),
                    xi2 + h * T::from_f64_lossy(*o2 as f64),
                )?;
                acc += v * coeff;
            }
        }
    }
    let denom = hx.powi(alpha as i32) * h.powi(beta1 as i32) * h.powi(beta2 as i32);
    Ok(acc.norm() / denom)
}

fn eval_symbol_point<T: Scalar>(
    symbol: &Symbol<T>,
    grid: &GridSpec<T>,
    x: T,
    xi1: T,
    xi2: T,
) -> Complex<T> {
    match symbol {
        Symbol::Separable(terms) => {
            let mut acc = Complex::new(T::zero(), T::zero());
            for t in terms {
                let w = t.coefficient * t.factor1.eval(&[xi1]) * t.factor2.eval(&[xi2]);
                if w == T::zero() {
                    continue;
                }
                acc += match &t.x_modulation {
                    None => Complex::new(w, T::zero()),
                    Some(mu) => {
                        let eta = T::from_f64_lossy(mu[0] as f64) * grid.delta_xi();
                        Complex::from_polar(w, x * eta)
                    }
                };
            }
            acc
        }
        Symbol::XIndependent(s) => {
            let p = grid.period_scale().to_f64().expect("finite");
            let m1 = nearest_index(grid, xi1.to_f64().unwrap_or(0.0) * p);
            let m2 = nearest_index(grid, xi2.to_f64().unwrap_or(0.0) * p);
            match (m1, m2) {
                (Some(a), Some(b)) => {
                    s.values()[a * grid.len() + b]
                }
                _ => Complex::new(T::zero(), T::zero()),
            }
        }
        Symbol::General(s) => {
            let p = grid.period_scale().to_f64().expect("finite");
            let dx = grid.delta_x().to_f64().expect("finite");
            let origin = -std::f64::consts::PI * p;
            let xf = x.to_f64().unwrap_or(0.0);
            let k = (((xf - origin) / dx).round() as i64)
                .rem_euclid(grid.samples_per_axis() as i64) as usize;
            let m1 = (xi1.to_f64().unwrap_or(0.0) * p).round() as i64;
            let m2 = (xi2.to_f64().unwrap_or(0.0) * p).round() as i64;
            s.at(k, m1, m2)
        }
    }
}

fn nearest_index<T: Scalar>(grid: &GridSpec<T>, m: f64) -> Option<usize> {
    let half = (grid.samples_per_axis() / 2) as i64;
    let m = m.round() as i64;
    if (-half..half).contains(&m) {
        Some(m.rem_euclid(grid.samples_per_axis() as i64) as usize)
    } else {
        None
    }
}
