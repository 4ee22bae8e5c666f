//! The bilinear operator `T_σ`, its evaluation paths, the trilinear
//! pairing, and the `σ_{j,K,ν}` decomposition with its spectral-support
//! law.
//!
//! `T_σ(f₁,f₂)(x) = (2π)^{-2n} ∫∫ e^{ix·(ξ₁+ξ₂)} σ(x,ξ₁,ξ₂) f̂₁(ξ₁) f̂₂(ξ₂) dξ₁dξ₂`
//!
//! Three paths compute the same quadrature: a brute-force double sum (the
//! oracle), an `O(N^{2n} log N)` path for x-independent symbols, and a
//! fast multiplier-product path for separable sums.  They agree to
//! rounding wherever more than one applies.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::dft_line;
use crate::grid::{
    forward_transform, inverse_transform, multiply_spectrum, GridSpec, SampledField,
    SpectralField, MAX_DIM,
};
use crate::norms::peak_operator;
use crate::symbols::ClassSpec;
use crate::window::ScalarWindow;
use crate::Scalar;

/// One term `c · m₁(ξ₁) m₂(ξ₂)` of a separable sum, optionally modulated
/// in x by a lattice frequency (`e^{i x·η}` with `η = μ·Δξ`).  Modulated
/// terms are how synthetically x-band-limited symbols are expressed.
#[derive(Debug, Clone)]
pub struct SeparableTerm<T> {
    pub coefficient: T,
    pub factor1: ScalarWindow<T>,
    pub factor2: ScalarWindow<T>,
    /// Signed lattice index μ of the x-modulation frequency, if any.
    pub x_modulation: Option<Vec<i64>>,
}

impl<T: Scalar> SeparableTerm<T> {
    pub fn new(coefficient: T, factor1: ScalarWindow<T>, factor2: ScalarWindow<T>) -> Self {
        Self {
            coefficient,
            factor1,
            factor2,
            x_modulation: None,
        }
    }

    pub fn modulated(mut self, mu: Vec<i64>) -> Self {
        if mu.iter().any(|c| *c != 0) {
            self.x_modulation = Some(mu);
        }
        self
    }

    fn is_x_independent(&self) -> bool {
        self.x_modulation.is_none()
    }
}

/// Complex samples of an x-independent symbol over the `(ξ₁, ξ₂)` lattice,
/// row-major with `m₁` outer, both axes in wraparound order.
#[derive(Debug, Clone)]
pub struct XIndependentSampled<T> {
    grid: GridSpec<T>,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> XIndependentSampled<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        let expect = grid.len() * grid.len();
        if values.len() != expect {
            return Err(Error::InvalidParameter(format!(
                "x-independent symbol needs {expect} samples, got {}",
                values.len()
            )));
        }
        for (index, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite {
                    index,
                    context: "x-independent symbol samples",
                });
            }
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    #[inline]
    fn at(&self, m1_flat: usize, m2_flat: usize) -> Complex<T> {
        self.values[m1_flat * self.grid.len() + m2_flat]
    }
}

/// Complex samples of a general symbol over the `(x, ξ₁, ξ₂)` lattice
/// (n = 1 only).  The frequency axes are truncated to the centered box
/// `m ∈ [-M/2, M/2)` with `M ≤ N`; the symbol is treated as zero outside,
/// which is exact when its numerical bandwidth fits the box.
#[derive(Debug, Clone)]
pub struct GeneralSampled<T> {
    grid: GridSpec<T>,
    box_len: usize,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> GeneralSampled<T> {
    pub fn new(grid: GridSpec<T>, box_len: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if grid.dimension() != 1 {
            return Err(Error::InvalidParameter(
                "general sampled symbols are supported for n = 1 only".into(),
            ));
        }
        if !box_len.is_power_of_two() || box_len > grid.samples_per_axis() {
            return Err(Error::InvalidParameter(format!(
                "symbol frequency box must be a power of two <= N, got {box_len}"
            )));
        }
        let expect = grid.len() * box_len * box_len;
        if values.len() != expect {
            return Err(Error::InvalidParameter(format!(
                "general symbol needs {expect} samples, got {}",
                values.len()
            )));
        }
        for (index, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite {
                    index,
                    context: "general symbol samples",
                });
            }
        }
        Ok(Self {
            grid,
            box_len,
            values,
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn box_len(&self) -> usize {
        self.box_len
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// Map a full-grid signed frequency index into the symbol box, if inside.
    #[inline]
    fn box_index(&self, m_signed: i64) -> Option<usize> {
        let half = (self.box_len / 2) as i64;
        if (-half..half).contains(&m_signed) {
            Some(m_signed.rem_euclid(self.box_len as i64) as usize)
        } else {
            None
        }
    }

    #[inline]
    pub(crate) fn at(&self, x_flat: usize, m1_signed: i64, m2_signed: i64) -> Complex<T> {
        match (self.box_index(m1_signed), self.box_index(m2_signed)) {
            (Some(b1), Some(b2)) => self.values[(x_flat * self.box_len + b1) * self.box_len + b2],
            _ => Complex::zero(),
        }
    }
}

/// A bilinear symbol `σ(x, ξ₁, ξ₂)` in one of three representations.
#[derive(Debug, Clone)]
pub enum Symbol<T> {
    /// `σ(x,ξ₁,ξ₂) = Σ_t c_t e^{ix·η_t} m₁ₜ(ξ₁) m₂ₜ(ξ₂)`.
    Separable(Vec<SeparableTerm<T>>),
    /// Sampled x-independent symbol.
    XIndependent(XIndependentSampled<T>),
    /// Sampled general symbol.
    General(GeneralSampled<T>),
}

impl<T: Scalar> Symbol<T> {
    /// The constant symbol `σ ≡ c` (so `T_σ(f₁,f₂) = c·f₁f₂`).
    pub fn constant(c: T) -> Self {
        Symbol::Separable(vec![SeparableTerm::new(
            c,
            ScalarWindow::constant(T::one()),
            ScalarWindow::constant(T::one()),
        )])
    }

    pub fn separable(terms: Vec<SeparableTerm<T>>) -> Self {
        Symbol::Separable(terms)
    }

    pub fn is_x_independent(&self) -> bool {
        match self {
            Symbol::Separable(terms) => terms.iter().all(|t| t.is_x_independent()),
            Symbol::XIndependent(_) => true,
            Symbol::General(_) => false,
        }
    }

    /// True when the symbol is provably zero on the whole lattice.
    pub fn is_zero(&self, dim: usize) -> bool {
        match self {
            Symbol::Separable(terms) => terms.iter().all(|t| {
                t.coefficient == T::zero()
                    || t.factor1.is_empty_support(dim)
                    || t.factor2.is_empty_support(dim)
            }),
            Symbol::XIndependent(s) => s.values.iter().all(|v| v.is_zero()),
            Symbol::General(s) => s.values.iter().all(|v| v.is_zero()),
        }
    }

    /// Evaluate at lattice indices (the brute-force quadrature route).
    pub fn eval_flat(
        &self,
        grid: &GridSpec<T>,
        x_flat: usize,
        m1_flat: usize,
        m2_flat: usize,
    ) -> Complex<T> {
        let dim = grid.dimension();
        let mut xi1 = [T::zero(); MAX_DIM];
        let mut xi2 = [T::zero(); MAX_DIM];
        match self {
            Symbol::Separable(terms) => {
                grid.frequency(m1_flat, &mut xi1);
                grid.frequency(m2_flat, &mut xi2);
                let mut acc = Complex::zero();
                for t in terms {
                    let w =
                        t.coefficient * t.factor1.eval(&xi1[..dim]) * t.factor2.eval(&xi2[..dim]);
                    if w == T::zero() {
                        continue;
                    }
                    acc += match &t.x_modulation {
                        None => Complex::new(w, T::zero()),
                        Some(mu) => {
                            let mut x = [T::zero(); MAX_DIM];
                            grid.position(x_flat, &mut x);
                            let mut phase = T::zero();
                            for (a, c) in mu.iter().enumerate().take(dim) {
                                phase =
                                    phase + x[a] * T::from_f64_lossy(*c as f64) * grid.delta_xi();
                            }
                            Complex::from_polar(w, phase)
                        }
                    };
                }
                acc
            }
            Symbol::XIndependent(s) => s.at(m1_flat, m2_flat),
            Symbol::General(s) => {
                let mut m1 = [0i64; MAX_DIM];
                let mut m2 = [0i64; MAX_DIM];
                grid.signed_indices(m1_flat, &mut m1);
                grid.signed_indices(m2_flat, &mut m2);
                s.at(x_flat, m1[0], m2[0])
            }
        }
    }
}

fn check_shared_grid<T: Scalar>(
    symbol_grid: Option<&GridSpec<T>>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
) -> Result<GridSpec<T>> {
    if f1.grid() != f2.grid() {
        return Err(Error::GridMismatch(format!(
            "inputs on different grids: {:?} vs {:?}",
            f1.grid(),
            f2.grid()
        )));
    }
    if let Some(g) = symbol_grid {
        if g != f1.grid() {
            return Err(Error::GridMismatch(format!(
                "symbol sampled on {:?}, fields on {:?}",
                g,
                f1.grid()
            )));
        }
    }
    Ok(*f1.grid())
}

fn symbol_grid<T: Scalar>(symbol: &Symbol<T>) -> Option<&GridSpec<T>> {
    match symbol {
        Symbol::Separable(_) => None,
        Symbol::XIndependent(s) => Some(s.grid()),
        Symbol::General(s) => Some(s.grid()),
    }
}

/// Direct quadrature of the defining double sum; `O(N^{3n})`, the oracle
/// the fast paths are checked against.
pub fn apply_bilinear_bruteforce<T: Scalar>(
    symbol: &Symbol<T>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
) -> Result<SampledField<T>> {
    let grid = check_shared_grid(symbol_grid(symbol), f1, f2)?;
    let spec1 = forward_transform(f1)?;
    let spec2 = forward_transform(f2)?;
    let len = grid.len();
    let dim = grid.dimension() as i32;
    let scale = grid.cell_volume_xi() * grid.cell_volume_xi() / T::TAU().powi(2 * dim);

    let values: Vec<Complex<T>> = (0..len)
        .into_par_iter()
        .map(|x_flat| {
            // phase table e^{i x·ξ_m} over the frequency lattice
            let mut x = [T::zero(); MAX_DIM];
            grid.position(x_flat, &mut x);
            let mut xi = [T::zero(); MAX_DIM];
            let phases: Vec<Complex<T>> = (0..len)
                .map(|m| {
                    grid.frequency(m, &mut xi);
                    let mut dot = T::zero();
                    for a in 0..grid.dimension() {
                        dot = dot + x[a] * xi[a];
                    }
                    Complex::from_polar(T::one(), dot)
                })
                .collect();
            let mut acc = Complex::zero();
            for m1 in 0..len {
                let a1 = phases[m1] * spec1.values()[m1];
                if a1.is_zero() {
                    continue;
                }
                let mut inner = Complex::zero();
                for m2 in 0..len {
                    let sv = symbol.eval_flat(&grid, x_flat, m1, m2);
                    if sv.is_zero() {
                        continue;
                    }
                    inner += sv * spec2.values()[m2] * phases[m2];
                }
                acc += a1 * inner;
            }
            acc * scale
        })
        .collect();
    SampledField::from_values(grid, values)
}

/// `O(N^{2n} log N)` path for x-independent symbols: for each ξ₁ slice,
/// `T(x) += (2π)^{-n} Δξ^n e^{ix·ξ₁} f̂₁(ξ₁) · F^{-1}[σ(ξ₁,·) f̂₂](x)`.
pub fn apply_bilinear_xindep<T: Scalar>(
    symbol: &Symbol<T>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
) -> Result<SampledField<T>> {
    if !symbol.is_x_independent() {
        return Err(Error::InvalidParameter(
            "x-dependent symbol rejected by the x-independent path".into(),
        ));
    }
    let grid = check_shared_grid(symbol_grid(symbol), f1, f2)?;
    let spec1 = forward_transform(f1)?;
    let spec2 = forward_transform(f2)?;
    let len = grid.len();
    let n = grid.dimension();
    let n_axis = grid.samples_per_axis();

    // twiddle table: e^{i x_k·ξ_m} = (-1)^{Σ m_a} · tw[(Σ k_a·j_a) mod N]
    let tw: Vec<Complex<T>> = (0..n_axis)
        .map(|j| {
            Complex::from_polar(
                T::one(),
                T::TAU() * T::from_f64_lossy(j as f64) / T::from_f64_lossy(n_axis as f64),
            )
        })
        .collect();

    // per-term factor tables for separable symbols
    let term_tables: Option<Vec<(T, Vec<T>, Vec<T>)>> = match symbol {
        Symbol::Separable(terms) => Some(
            terms
                .iter()
                .map(|t| {
                    let mut xi = [T::zero(); MAX_DIM];
                    let mut tab = |w: &ScalarWindow<T>| {
                        (0..len)
                            .map(|m| {
                                grid.frequency(m, &mut xi);
                                w.eval(&xi[..n])
                            })
                            .collect::<Vec<T>>()
                    };
                    (t.coefficient, tab(&t.factor1), tab(&t.factor2))
                })
                .collect(),
        ),
        _ => None,
    };

    let scale = grid.cell_volume_xi() / T::TAU().powi(n as i32);
    let chunk = (len / (rayon::current_num_threads() * 4)).max(1);
    let m1_chunks: Vec<Vec<usize>> = (0..len)
        .collect::<Vec<_>>()
        .chunks(chunk)
        .map(|c| c.to_vec())
        .collect();
    let partials: Vec<Vec<Complex<T>>> = m1_chunks
        .into_par_iter()
        .map(|m1s| -> Result<Vec<Complex<T>>> {
            let mut acc = vec![Complex::<T>::zero(); len];
            let mut row = vec![Complex::<T>::zero(); len];
            let mut k_idx = [0usize; MAX_DIM];
            let mut m_idx = [0usize; MAX_DIM];
            for m1 in m1s {
                let a1 = spec1.values()[m1];
                if a1.is_zero() {
                    continue;
                }
                // row = σ(ξ_{m1}, ·) ⊙ f̂₂
                match (symbol, &term_tables) {
                    (Symbol::Separable(_), Some(tables)) => {
                        row.iter_mut().for_each(|v| *v = Complex::zero());
                        let mut any = false;
                        for (c, t1, t2) in tables {
                            let w1 = *c * t1[m1];
                            if w1 == T::zero() {
                                continue;
                            }
                            any = true;
                            for (slot, (w2, f2v)) in
                                row.iter_mut().zip(t2.iter().zip(spec2.values()))
                            {
                                *slot += f2v * (w1 * *w2);
                            }
                        }
                        if !any {
                            continue;
                        }
                    }
                    (Symbol::XIndependent(s), _) => {
                        for (m2, slot) in row.iter_mut().enumerate() {
                            *slot = s.at(m1, m2) * spec2.values()[m2];
                        }
                    }
                    _ => unreachable!("x-dependence checked above"),
                }
                if row.iter().all(|v| v.is_zero()) {
                    continue;
                }
                let g = inverse_transform(&SpectralField::from_values(grid, row.clone())?)?;
                // accumulate e^{ix·ξ_{m1}}·f̂₁(ξ_{m1})·g(x) over x
                grid.axis_indices(m1, &mut m_idx);
                let parity = m_idx.iter().take(n).map(|j| j % 2).sum::<usize>() % 2 == 1;
                let base = if parity { -a1 } else { a1 };
                for (x_flat, (slot, gv)) in acc.iter_mut().zip(g.values()).enumerate() {
                    grid.axis_indices(x_flat, &mut k_idx);
                    let mut idx = 0usize;
                    for a in 0..n {
                        idx = (idx + k_idx[a] * m_idx[a]) % n_axis;
                    }
                    *slot += base * tw[idx] * gv;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut values = vec![Complex::<T>::zero(); len];
    for partial in partials {
        for (slot, v) in values.iter_mut().zip(partial) {
            *slot += v;
        }
    }
    for v in values.iter_mut() {
        *v = *v * scale;
    }
    SampledField::from_values(grid, values)
}

/// Fast path for separable sums:
/// `T = Σ_t c_t e^{ix·η_t} (m₁ₜ(D)f₁)·(m₂ₜ(D)f₂)`.
pub fn apply_bilinear_separable<T: Scalar>(
    symbol: &Symbol<T>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
) -> Result<SampledField<T>> {
    let terms = match symbol {
        Symbol::Separable(terms) => terms,
        _ => {
            return Err(Error::InvalidParameter(
                "separable path requires a separable-sum symbol".into(),
            ))
        }
    };
    let grid = check_shared_grid(None, f1, f2)?;
    let n = grid.dimension();
    let spec1 = forward_transform(f1)?;
    let spec2 = forward_transform(f2)?;
    let mut acc = vec![Complex::<T>::zero(); grid.len()];
    for t in terms {
        if t.coefficient == T::zero()
            || t.factor1.is_empty_support(n)
            || t.factor2.is_empty_support(n)
        {
            continue;
        }
        let w1 = multiply_spectrum(&t.factor1, &spec1)?;
        if w1.values().iter().all(|v| v.is_zero()) {
            continue;
        }
        let w2 = multiply_spectrum(&t.factor2, &spec2)?;
        if w2.values().iter().all(|v| v.is_zero()) {
            continue;
        }
        let u = inverse_transform(&w1)?;
        let v = inverse_transform(&w2)?;
        match &t.x_modulation {
            None => {
                for ((slot, uv), vv) in acc.iter_mut().zip(u.values()).zip(v.values()) {
                    *slot += uv * vv * t.coefficient;
                }
            }
            Some(mu) => {
                let mut x = [T::zero(); MAX_DIM];
                let dxi = grid.delta_xi();
                for (x_flat, (slot, (uv, vv))) in acc
                    .iter_mut()
                    .zip(u.values().iter().zip(v.values()))
                    .enumerate()
                {
                    grid.position(x_flat, &mut x);
                    let mut phase = T::zero();
                    for (a, c) in mu.iter().enumerate().take(n) {
                        phase = phase + x[a] * T::from_f64_lossy(*c as f64) * dxi;
                    }
                    *slot += uv * vv * Complex::from_polar(t.coefficient, phase);
                }
            }
        }
    }
    SampledField::from_values(grid, acc)
}

/// Dispatch to the cheapest applicable path.
pub fn apply_bilinear<T: Scalar>(
    symbol: &Symbol<T>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
) -> Result<SampledField<T>> {
    match symbol {
        Symbol::Separable(_) => apply_bilinear_separable(symbol, f1, f2),
        Symbol::XIndependent(_) => apply_bilinear_xindep(symbol, f1, f2),
        Symbol::General(_) => apply_bilinear_bruteforce(symbol, f1, f2),
    }
}

/// Trilinear pairing `⟨T_σ(f₁,f₂), g⟩ = Σ_k T(x_k)·conj(g(x_k))·Δx^n`
/// (conjugation in the second slot).
pub fn trilinear_pairing<T: Scalar>(
    symbol: &Symbol<T>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
    g: &SampledField<T>,
) -> Result<Complex<T>> {
    check_shared_grid(None, f1, g)?;
    let t = apply_bilinear(symbol, f1, f2)?;
    Ok(pair_fields(&t, g))
}

/// `Σ_k a(x_k)·conj(b(x_k))·Δx^n` for fields on one grid.
pub fn pair_fields<T: Scalar>(a: &SampledField<T>, b: &SampledField<T>) -> Complex<T> {
    let vol = a.grid().cell_volume_x();
    a.values()
        .iter()
        .zip(b.values())
        .fold(Complex::zero(), |acc, (x, y)| acc + x * y.conj())
        * vol
}

/// One piece `σ_{j,K,ν}` of the symbol decomposition
/// `σ_{j,K,ν} = [ψ_j(D_x)σ]·ψ_{k₁}(ξ₁)ψ_{k₂}(ξ₂)φ(ξ₁-ν₁)φ(ξ₂-ν₂)`.
#[derive(Debug, Clone)]
pub struct SymbolPiece<T> {
    pub j: u32,
    pub k: (u32, u32),
    pub nu: (Vec<i64>, Vec<i64>),
    /// The piece itself, in the cheapest representation the base admits.
    pub symbol: Symbol<T>,
}

impl<T: Scalar> SymbolPiece<T> {
    /// True when the piece is identically zero (disjoint window supports,
    /// or `j ≥ 1` on an x-independent base).
    pub fn is_zero(&self, dim: usize) -> bool {
        self.symbol.is_zero(dim)
    }

    /// The support-law box half width `2^{j+2}`.
    pub fn box_half_width(&self) -> T {
        T::from_f64_lossy(2.0f64.powi(self.j as i32 + 2))
    }
}

/// Materialize the decomposition piece `σ_{j,K,ν}`.
///
/// For an x-independent base `ψ_j(D_x)` is a spike multiplier: only `j = 0`
/// yields a nonzero piece.  Separable bases stay separable (each factor
/// picks up the band and cell windows); sampled bases are re-sampled.
pub fn decompose_symbol<T: Scalar>(
    symbol: &Symbol<T>,
    grid: &GridSpec<T>,
    j: u32,
    k: (u32, u32),
    nu: (&[i64], &[i64]),
) -> Result<SymbolPiece<T>> {
    let n = grid.dimension();
    if nu.0.len() != n || nu.1.len() != n {
        return Err(Error::InvalidParameter(format!(
            "cell indices must have dimension {n}"
        )));
    }
    let band1 = ScalarWindow::DyadicBand { level: k.0 };
    let band2 = ScalarWindow::DyadicBand { level: k.1 };
    let cell1 = ScalarWindow::CubeCell {
        center: nu.0.to_vec(),
    };
    let cell2 = ScalarWindow::CubeCell {
        center: nu.1.to_vec(),
    };
    let piece_symbol = match symbol {
        Symbol::Separable(terms) => {
            let mut out = Vec::new();
            for t in terms {
                // ψ_j acts on the x-modulation spike exactly
                let eta_weight = match &t.x_modulation {
                    None => {
                        if j == 0 {
                            T::one()
                        } else {
                            T::zero()
                        }
                    }
                    Some(mu) => {
                        let mut eta = [T::zero(); MAX_DIM];
                        for (a, c) in mu.iter().enumerate().take(n) {
                            eta[a] = T::from_f64_lossy(*c as f64) * grid.delta_xi();
                        }
                        ScalarWindow::DyadicBand { level: j }.eval(&eta[..n])
                    }
                };
                if eta_weight == T::zero() {
                    continue;
                }
                let factor1 = ScalarWindow::Product {
                    factors: vec![t.factor1.clone(), band1.clone(), cell1.clone()],
                };
                let factor2 = ScalarWindow::Product {
                    factors: vec![t.factor2.clone(), band2.clone(), cell2.clone()],
                };
                if factor1.is_empty_support(n) || factor2.is_empty_support(n) {
                    continue;
                }
                let mut piece_term =
                    SeparableTerm::new(t.coefficient * eta_weight, factor1, factor2);
                piece_term.x_modulation = t.x_modulation.clone();
                out.push(piece_term);
            }
            Symbol::Separable(out)
        }
        Symbol::XIndependent(s) => {
            if s.grid() != grid {
                return Err(Error::GridMismatch(
                    "decomposition grid differs from the symbol sample grid".into(),
                ));
            }
            if j >= 1 {
                Symbol::Separable(vec![])
            } else {
                let len = grid.len();
                let w1 = window_table(grid, &[&band1, &cell1]);
                let w2 = window_table(grid, &[&band2, &cell2]);
                let mut values = s.values.clone();
                for m1 in 0..len {
                    let a = w1[m1];
                    let row = &mut values[m1 * len..(m1 + 1) * len];
                    if a == T::zero() {
                        row.iter_mut().for_each(|v| *v = Complex::zero());
                        continue;
                    }
                    for (v, b) in row.iter_mut().zip(&w2) {
                        *v = *v * (a * *b);
                    }
                }
                Symbol::XIndependent(XIndependentSampled {
                    grid: *grid,
                    values,
                })
            }
        }
        Symbol::General(s) => {
            if s.grid() != grid {
                return Err(Error::GridMismatch(
                    "decomposition grid differs from the symbol sample grid".into(),
                ));
            }
            // band-limit in x by DFT along the x axis, then window (ξ₁, ξ₂)
            let len = grid.len();
            let m = s.box_len;
            let band_x = ScalarWindow::DyadicBand { level: j };
            let mut eta = [T::zero(); MAX_DIM];
            let psi_x: Vec<T> = (0..len)
                .map(|flat| {
                    grid.frequency(flat, &mut eta);
                    band_x.eval(&eta[..1])
                })
                .collect();
            let w1 = box_window_table(grid, m, &[&band1, &cell1]);
            let w2 = box_window_table(grid, m, &[&band2, &cell2]);
            let mut values = s.values.clone();
            let inv_len = T::from_f64_lossy(len as f64).recip();
            let mut line = vec![Complex::<T>::zero(); len];
            for b1 in 0..m {
                for b2 in 0..m {
                    let w = w1[b1] * w2[b2];
                    let col = b1 * m + b2;
                    if w == T::zero() {
                        for x in 0..len {
                            values[x * m * m + col] = Complex::zero();
                        }
                        continue;
                    }
                    for (x, slot) in line.iter_mut().enumerate() {
                        *slot = values[x * m * m + col];
                    }
                    dft_line(&mut line, false);
                    for (slot, psi) in line.iter_mut().zip(&psi_x) {
                        *slot = *slot * *psi;
                    }
                    dft_line(&mut line, true);
                    for (x, slot) in line.iter().enumerate() {
                        values[x * m * m + col] = slot * (w * inv_len);
                    }
                }
            }
            Symbol::General(GeneralSampled {
                grid: *grid,
                box_len: m,
                values,
            })
        }
    };
    Ok(SymbolPiece {
        j,
        k,
        nu: (nu.0.to_vec(), nu.1.to_vec()),
        symbol: piece_symbol,
    })
}

fn window_table<T: Scalar>(grid: &GridSpec<T>, windows: &[&ScalarWindow<T>]) -> Vec<T> {
    let n = grid.dimension();
    let mut xi = [T::zero(); MAX_DIM];
    (0..grid.len())
        .map(|flat| {
            grid.frequency(flat, &mut xi);
            windows
                .iter()
                .fold(T::one(), |acc, w| acc * w.eval(&xi[..n]))
        })
        .collect()
}

fn box_window_table<T: Scalar>(
    grid: &GridSpec<T>,
    box_len: usize,
    windows: &[&ScalarWindow<T>],
) -> Vec<T> {
    let dxi = grid.delta_xi();
    (0..box_len)
        .map(|b| {
            let m_signed = if b < box_len / 2 {
                b as i64
            } else {
                b as i64 - box_len as i64
            };
            let xi = [T::from_f64_lossy(m_signed as f64) * dxi];
            windows.iter().fold(T::one(), |acc, w| acc * w.eval(&xi))
        })
        .collect()
}

/// Outcome of a spectral-support check.
#[derive(Debug, Clone)]
pub struct LeakageReport<T> {
    /// Fraction of spectral ℓ² mass outside the support box.
    pub leakage: T,
    /// Total spectral ℓ² mass (squared magnitudes summed).
    pub total_mass: T,
    /// Half width of the box used.
    pub box_half_width: T,
}

/// Check the spectral-support law: the output spectrum of a decomposition
/// piece lives in `ν₁+ν₂+[-2^{j+2}, 2^{j+2}]^n`; leakage beyond rounding
/// indicates a broken window or transform.
pub fn support_check<T: Scalar>(
    piece: &SymbolPiece<T>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
) -> Result<LeakageReport<T>> {
    support_check_with_box(piece, f1, f2, piece.box_half_width())
}

/// Same as [`support_check`] with an explicit box half width (shrinking the
/// box below `2^{j+2}` is the negative control).
pub fn support_check_with_box<T: Scalar>(
    piece: &SymbolPiece<T>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
    half_width: T,
) -> Result<LeakageReport<T>> {
    let grid = check_shared_grid(None, f1, f2)?;
    let n = grid.dimension();
    let out = apply_bilinear(&piece.symbol, f1, f2)?;
    let spec = forward_transform(&out)?;
    let mut xi = [T::zero(); MAX_DIM];
    let center: Vec<T> = (0..n)
        .map(|a| T::from_f64_lossy((piece.nu.0[a] + piece.nu.1[a]) as f64))
        .collect();
    let mut inside = T::zero();
    let mut outside = T::zero();
    for (flat, v) in spec.values().iter().enumerate() {
        grid.frequency(flat, &mut xi);
        let mass = v.norm_sqr();
        let in_box = (0..n).all(|a| (xi[a] - center[a]).abs() <= half_width);
        if in_box {
            inside = inside + mass;
        } else {
            outside = outside + mass;
        }
    }
    let total = inside + outside;
    let leakage = if total > T::zero() {
        outside / total
    } else {
        T::zero()
    };
    Ok(LeakageReport {
        leakage,
        total_mass: total,
        box_half_width: half_width,
    })
}

/// Pointwise bound probe: returns
/// `max_x |T_{σ_{j,K,ν}}(f₁,f₂)(x)| / (2^{w(K,j)}·S(f₁)(x)·S(f₂)(x))`
/// with `w = max{k₁,k₂}·m - j·N` for the Hörmander class and
/// `w = k₁m₁ + k₂m₂ - j·N` for the product class.  Cross-(j,K) stability
/// of this maximum is the testable surrogate for the uniform constant.
pub fn pointwise_bound_check<T: Scalar>(
    piece: &SymbolPiece<T>,
    f1: &SampledField<T>,
    f2: &SampledField<T>,
    class: &ClassSpec<T>,
    n_decay: T,
) -> Result<T> {
    check_shared_grid(None, f1, f2)?;
    if f1.max_abs() == T::zero() || f2.max_abs() == T::zero() {
        return Ok(T::zero());
    }
    let out = apply_bilinear(&piece.symbol, f1, f2)?;
    let s1 = peak_operator(f1, T::one())?;
    let s2 = peak_operator(f2, T::one())?;
    let (k1, k2) = piece.k;
    let j = T::from_f64_lossy(piece.j as f64);
    let exponent = match class.variant {
        crate::symbols::ClassVariant::Hormander { m } => {
            T::from_f64_lossy(k1.max(k2) as f64) * m - j * n_decay
        }
        crate::symbols::ClassVariant::Product { m1, m2 } => {
            T::from_f64_lossy(k1 as f64) * m1 + T::from_f64_lossy(k2 as f64) * m2 - j * n_decay
        }
    };
    let weight = T::from_f64_lossy(2.0).powf(exponent);
    let mut max_ratio = T::zero();
    for ((tv, s1v), s2v) in out.values().iter().zip(s1.values()).zip(s2.values()) {
        // S(f) is strictly positive for nonzero f: the kernel has no zeros
        let denom = weight * s1v.re * s2v.re;
        max_ratio = max_ratio.max(tv.norm() / denom);
    }
    Ok(max_ratio)
}
