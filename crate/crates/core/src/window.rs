//! Smooth cutoff windows with exact supports.
//!
//! Every cutoff is built from the C^∞ step [`smoothstep`], which is exactly
//! 0 for `t ≤ 0` and exactly 1 for `t ≥ 1` and satisfies the complement
//! identity `h(t) + h(1-t) = 1`.  Supports are therefore exact (true zeros,
//! not small values) and both partitions of unity below hold to rounding.

use std::fmt;
use std::sync::Arc;

use crate::Scalar;

/// `h(t) = η(t)/(η(t)+η(1-t))` with `η(t) = exp(-1/t)` for `t > 0`, else 0.
///
/// `h ≡ 0` for `t ≤ 0`, `h ≡ 1` for `t ≥ 1`, and `h(t) + h(1-t) = 1`.
pub fn smoothstep<T: Scalar>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let a = (-t.recip()).exp();
    let b = (-(T::one() - t).recip()).exp();
    a / (a + b)
}

/// Analytic window given by an arbitrary evaluation rule.
#[derive(Clone)]
pub struct AnalyticWindow<T> {
    /// Human-readable tag for diagnostics.
    pub tag: String,
    /// Optional per-axis support box (conservative).
    pub support: Option<Vec<(T, T)>>,
    func: Arc<dyn Fn(&[T]) -> T + Send + Sync>,
}

impl<T> fmt::Debug for AnalyticWindow<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnalyticWindow({})", self.tag)
    }
}

/// A real-valued window on frequency space, evaluable at any point.
#[derive(Debug, Clone)]
pub enum ScalarWindow<T> {
    /// Radial flat-top bump: 1 on `|ξ| ≤ inner`, 0 on `|ξ| ≥ outer`.
    FlatBump { inner: T, outer: T },
    /// Radial annulus: 1 on `r₂ ≤ |ξ| ≤ r₃`, 0 outside `(r₁, r₄)`.
    FlatAnnulus { r: [T; 4] },
    /// `base(2^{-scale_exponent}·ξ)`.
    DyadicRescale {
        base: Box<ScalarWindow<T>>,
        scale_exponent: i32,
    },
    /// Tensor cell `φ(ξ - ν)` of the unit-cube partition, `φ(ξ) = Π w(ξ_i)`,
    /// `w(t) = h(1 - |t|)`; the integer translates sum to 1 exactly.
    CubeCell { center: Vec<i64> },
    /// Bessel weight `(1 + |ξ|²)^{s/2}`.
    SobolevWeight { s: T },
    /// Littlewood-Paley band `ψ_ℓ`: low-pass bump for `ℓ = 0`, dyadic
    /// annulus difference `ψ_0(2^{-ℓ}ξ) - ψ_0(2^{-ℓ+1}ξ)` for `ℓ ≥ 1`.
    DyadicBand { level: u32 },
    /// Constant value (σ ≡ 1 symbols, factorization tests).
    Constant { value: T },
    /// `Σ c_i · w_i(ξ)`.
    Sum { terms: Vec<(T, ScalarWindow<T>)> },
    /// `Π w_i(ξ)`.
    Product { factors: Vec<ScalarWindow<T>> },
    /// Escape hatch for windows without a closed descriptor.
    Analytic(AnalyticWindow<T>),
}

fn radial<T: Scalar>(xi: &[T]) -> T {
    match xi.len() {
        1 => xi[0].abs(),
        _ => xi.iter().map(|v| *v * *v).sum::<T>().sqrt(),
    }
}

/// Radial low-pass profile of [`ScalarWindow::FlatBump`] with radii (1, 2);
/// the building block of the dyadic bands.
#[inline]
fn base_bump<T: Scalar>(r: T) -> T {
    smoothstep(T::from_f64_lossy(2.0) - r)
}

impl<T: Scalar> ScalarWindow<T> {
    /// Constant window.
    pub fn constant(value: T) -> Self {
        ScalarWindow::Constant { value }
    }

    /// Analytic window from a closure, with an optional support box.
    pub fn analytic(
        tag: impl Into<String>,
        support: Option<Vec<(T, T)>>,
        f: impl Fn(&[T]) -> T + Send + Sync + 'static,
    ) -> Self {
        ScalarWindow::Analytic(AnalyticWindow {
            tag: tag.into(),
            support,
            func: Arc::new(f),
        })
    }

    /// Evaluate at a frequency point.
    pub fn eval(&self, xi: &[T]) -> T {
        match self {
            ScalarWindow::FlatBump { inner, outer } => {
                let r = radial(xi);
                smoothstep((*outer - r) / (*outer - *inner))
            }
            ScalarWindow::FlatAnnulus { r } => {
                let s = radial(xi);
                let rising = smoothstep((s - r[0]) / (r[1] - r[0]));
                if rising == T::zero() {
                    return T::zero();
                }
                rising * smoothstep((r[3] - s) / (r[3] - r[2]))
            }
            ScalarWindow::DyadicRescale {
                base,
                scale_exponent,
            } => {
                let factor = T::from_f64_lossy(2.0).powi(-scale_exponent);
                let mut scaled = [T::zero(); crate::grid::MAX_DIM];
                for (slot, v) in scaled.iter_mut().zip(xi) {
                    *slot = *v * factor;
                }
                base.eval(&scaled[..xi.len()])
            }
            ScalarWindow::CubeCell { center } => {
                let mut acc = T::one();
                for (v, c) in xi.iter().zip(center) {
                    let t = *v - T::from_f64_lossy(*c as f64);
                    acc = acc * smoothstep(T::one() - t.abs());
                    if acc == T::zero() {
                        return T::zero();
                    }
                }
                acc
            }
            ScalarWindow::SobolevWeight { s } => {
                let r2 = xi.iter().map(|v| *v * *v).sum::<T>();
                (T::one() + r2).powf(*s / T::from_f64_lossy(2.0))
            }
            ScalarWindow::DyadicBand { level } => {
                let r = radial(xi);
                if *level == 0 {
                    base_bump(r)
                } else {
                    let lo = r * T::from_f64_lossy(2.0).powi(-(*level as i32));
                    base_bump(lo) - base_bump(lo + lo)
                }
            }
            ScalarWindow::Constant { value } => *value,
            ScalarWindow::Sum { terms } => terms
                .iter()
                .fold(T::zero(), |acc, (c, w)| acc + *c * w.eval(xi)),
            ScalarWindow::Product { factors } => {
                let mut acc = T::one();
                for f in factors {
                    acc = acc * f.eval(xi);
                    if acc == T::zero() {
                        return T::zero();
                    }
                }
                acc
            }
            ScalarWindow::Analytic(a) => (a.func)(xi),
        }
    }

    /// Conservative per-axis support box, or `None` when unbounded.
    /// An empty box (lo > hi on some axis) marks an identically-zero window.
    pub fn support_box(&self, dim: usize) -> Option<Vec<(T, T)>> {
        match self {
            ScalarWindow::FlatBump { outer, .. } => Some(vec![(-*outer, *outer); dim]),
            ScalarWindow::FlatAnnulus { r } => Some(vec![(-r[3], r[3]); dim]),
            ScalarWindow::DyadicRescale {
                base,
                scale_exponent,
            } => {
                let factor = T::from_f64_lossy(2.0).powi(*scale_exponent);
                base.support_box(dim)
                    .map(|b| b.into_iter().map(|(lo, hi)| (lo * factor, hi * factor)).collect())
            }
            ScalarWindow::CubeCell { center } => Some(
                (0..dim)
                    .map(|a| {
                        let c = T::from_f64_lossy(*center.get(a).unwrap_or(&0) as f64);
                        (c - T::one(), c + T::one())
                    })
                    .collect(),
            ),
            ScalarWindow::SobolevWeight { .. } => None,
            ScalarWindow::DyadicBand { level } => {
                let hi = T::from_f64_lossy(2.0).powi(*level as i32 + 1);
                Some(vec![(-hi, hi); dim])
            }
            ScalarWindow::Constant { value } => {
                if *value == T::zero() {
                    Some(vec![(T::one(), T::zero()); dim])
                } else {
                    None
                }
            }
            ScalarWindow::Sum { terms } => {
                // hull of the term boxes; any unbounded term makes the sum unbounded
                let mut hull: Option<Vec<(T, T)>> = None;
                for (c, w) in terms {
                    if *c == T::zero() {
                        continue;
                    }
                    let b = w.support_box(dim)?;
                    if b.iter().any(|(lo, hi)| lo > hi) {
                        continue;
                    }
                    hull = Some(match hull {
                        None => b,
                        Some(h) => h
                            .into_iter()
                            .zip(b)
                            .map(|((l1, h1), (l2, h2))| (l1.min(l2), h1.max(h2)))
                            .collect(),
                    });
                }
                Some(hull.unwrap_or_else(|| vec![(T::one(), T::zero()); dim]))
            }
            ScalarWindow::Product { factors } => {
                let mut inter: Option<Vec<(T, T)>> = None;
                for f in factors {
                    if let Some(b) = f.support_box(dim) {
                        inter = Some(match inter {
                            None => b,
                            Some(h) => h
                                .into_iter()
                                .zip(b)
                                .map(|((l1, h1), (l2, h2))| (l1.max(l2), h1.min(h2)))
                                .collect(),
                        });
                    }
                }
                inter
            }
            ScalarWindow::Analytic(a) => a.support.clone(),
        }
    }

    /// True when the support box is provably empty.
    pub fn is_empty_support(&self, dim: usize) -> bool {
        match self.support_box(dim) {
            Some(b) => b.iter().any(|(lo, hi)| lo > hi),
            None => false,
        }
    }
}

/// The Littlewood-Paley family `{ψ_ℓ}_{ℓ=0..ℓ_max}`.
///
/// `ψ_0` is the flat bump with radii (1, 2); for `ℓ ≥ 1`, `ψ_ℓ` is
/// supported in `{2^{ℓ-1} ≤ |ξ| ≤ 2^{ℓ+1}}` and
/// `Σ_{ℓ=0}^{ℓ_max} ψ_ℓ(ξ) = 1` for `|ξ| ≤ 2^{ℓ_max}` (telescoping).
pub fn dyadic_partition<T: Scalar>(l_max: u32) -> Vec<ScalarWindow<T>> {
    (0..=l_max)
        .map(|level| ScalarWindow::DyadicBand { level })
        .collect()
}

/// One cell `φ(· - ν)` of the unit-cube partition of unity.
pub fn cube_partition_cell<T: Scalar>(nu: &[i64]) -> ScalarWindow<T> {
    ScalarWindow::CubeCell {
        center: nu.to_vec(),
    }
}

/// Windows used by the sharpness constructions.
pub struct SharpnessWindows<T> {
    /// Narrow bump: 1 on `|ξ| ≤ 2^{1/4}`, supported in `|ξ| ≤ 2^{1/2}`.
    /// Its shifts `bump(ξ ∓ 2^j e₁)` are the test-function spectra.
    pub bump: ScalarWindow<T>,
    /// Plateau cover: 1 on `|ξ| ≤ 2^{1/2}` (the whole bump support),
    /// supported in `|ξ| ≤ 2`.
    pub cover: ScalarWindow<T>,
    /// Annulus selector: 1 on `2^{-1/4} ≤ |ξ| ≤ 2^{1/4}` (the shells where
    /// the shifted bumps live), supported in `2^{-1/2} ≤ |ξ| ≤ 2^{1/2}`.
    pub annulus: ScalarWindow<T>,
}

/// The window triple behind the dyadic sharpness symbols.
pub fn sharpness_windows<T: Scalar>() -> SharpnessWindows<T> {
    let q = |e: f64| T::from_f64_lossy(2.0f64.powf(e));
    SharpnessWindows {
        bump: ScalarWindow::FlatBump {
            inner: q(0.25),
            outer: q(0.5),
        },
        cover: ScalarWindow::FlatBump {
            inner: q(0.5),
            outer: q(1.0),
        },
        annulus: ScalarWindow::FlatAnnulus {
            r: [q(-0.5), q(-0.25), q(0.25), q(0.5)],
        },
    }
}

/// Radial bump equal to 1 on the unit cube `[-1,1]^n` and supported in
/// `[-2,2]^n`; dominates the cube-partition cells.
pub fn cube_cover<T: Scalar>(dim: usize) -> ScalarWindow<T> {
    ScalarWindow::FlatBump {
        inner: T::from_f64_lossy(dim as f64).sqrt(),
        outer: T::from_f64_lossy(2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smoothstep_support_and_symmetry() {
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(2.0), 1.0);
        assert_relative_eq!(smoothstep(0.5), 0.5);
        // complement identity across the transition; the 1e-14 slack covers
        // rounding of the 1-t argument, not the identity itself
        for i in 1..100 {
            let t = i as f64 / 100.0;
            assert!((smoothstep(t) + smoothstep(1.0 - t) - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn dyadic_bands_peak_on_their_shells() {
        // ψ_ℓ(2^ℓ e₁) = δ_{ℓℓ'} since ψ(ξ) = 1 exactly at |ξ| = 1
        let family = dyadic_partition::<f64>(6);
        for l in 1..=6u32 {
            for (lp, w) in family.iter().enumerate() {
                let v = w.eval(&[2.0f64.powi(l as i32)]);
                if lp as u32 == l {
                    assert_eq!(v, 1.0, "psi_{lp} at 2^{l}");
                } else {
                    assert_eq!(v, 0.0, "psi_{lp} at 2^{l}");
                }
            }
        }
    }

    #[test]
    fn dyadic_partition_sums_to_one() {
        let l_max = 5u32;
        let family = dyadic_partition::<f64>(l_max);
        let reach = 2.0f64.powi(l_max as i32);
        let mut worst: f64 = 0.0;
        for i in 0..=4096 {
            let xi = -reach + 2.0 * reach * (i as f64) / 4096.0;
            let sum: f64 = family.iter().map(|w| w.eval(&[xi])).sum();
            worst = worst.max((sum - 1.0).abs());
            for w in &family {
                let v = w.eval(&[xi]);
                assert!((0.0..=1.0 + 1e-15).contains(&v), "range violation {v}");
            }
        }
        assert!(worst <= 1e-14, "partition defect {worst}");
    }

    #[test]
    fn dyadic_band_support_is_exact() {
        let w = ScalarWindow::DyadicBand { level: 3 };
        // supp ψ_3 ⊂ {4 ≤ |ξ| ≤ 16}, with exact zeros outside
        for xi in [0.0, 1.0, 3.999, 16.0, 20.0, -16.0] {
            assert_eq!(w.eval(&[xi]), 0.0, "xi = {xi}");
        }
        assert!(w.eval(&[8.0]) == 1.0);
        assert!(w.eval(&[5.0]) > 0.0);
    }

    #[test]
    fn cube_partition_is_exact() {
        // Σ_{ν ∈ [-3,3]} w(t - ν) = 1 on [-2, 2]
        let cells: Vec<_> = (-3i64..=3).map(|nu| cube_partition_cell::<f64>(&[nu])).collect();
        for i in 0..=2000 {
            let t = -2.0 + 4.0 * (i as f64) / 2000.0;
            let sum: f64 = cells.iter().map(|c| c.eval(&[t])).sum();
            assert!((sum - 1.0).abs() <= 1e-15, "t = {t}: defect {}", (sum - 1.0).abs());
        }
        let w0 = cube_partition_cell::<f64>(&[0]);
        assert_eq!(w0.eval(&[0.0]), 1.0);
        assert_eq!(w0.eval(&[1.0]), 0.0);
        assert_eq!(w0.eval(&[-1.2]), 0.0);
    }

    #[test]
    fn cube_partition_2d() {
        let mut cells = Vec::new();
        for a in -2i64..=2 {
            for b in -2i64..=2 {
                cells.push(cube_partition_cell::<f64>(&[a, b]));
            }
        }
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.7), (1.2, 0.9), (-1.0, 1.0)] {
            let sum: f64 = cells.iter().map(|c| c.eval(&[x, y])).sum();
            assert!((sum - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn sharpness_triple_plateaus_and_supports() {
        let w = sharpness_windows::<f64>();
        // plateau membership: 1.2 ≤ 2^{1/2}
        assert_eq!(w.cover.eval(&[1.2]), 1.0);
        // annulus equals 1 on the unit shell
        assert_eq!(w.annulus.eval(&[1.0]), 1.0);
        // bump vanishes past its support radius
        assert_eq!(w.bump.eval(&[1.5]), 0.0);
        assert_eq!(w.bump.eval(&[0.0]), 1.0);
        assert_eq!(w.annulus.eval(&[0.5]), 0.0);
        assert_eq!(w.annulus.eval(&[1.5]), 0.0);
        assert_eq!(w.cover.eval(&[2.0]), 0.0);
        // cover is 1 on the whole bump support
        assert_eq!(w.cover.eval(&[2.0f64.powf(0.5)]), 1.0);
    }

    #[test]
    fn cube_cover_dominates_unit_cube() {
        let w = cube_cover::<f64>(2);
        assert_eq!(w.eval(&[1.0, 1.0]), 1.0);
        assert_eq!(w.eval(&[0.5, -0.5]), 1.0);
        assert_eq!(w.eval(&[2.0, 1.0]), 0.0);
    }

    #[test]
    fn rescale_and_support_boxes() {
        let w = ScalarWindow::DyadicRescale {
            base: Box::new(ScalarWindow::FlatBump {
                inner: 1.0,
                outer: 2.0,
            }),
            scale_exponent: 3,
        };
        assert_eq!(w.eval(&[8.0]), 1.0);
        assert_eq!(w.eval(&[16.0]), 0.0);
        let b = w.support_box(1).unwrap();
        assert_eq!(b[0], (-16.0, 16.0));

        let prod = ScalarWindow::<f64>::Product {
            factors: vec![
                ScalarWindow::DyadicBand { level: 2 },
                ScalarWindow::CubeCell { center: vec![40] },
            ],
        };
        assert!(prod.is_empty_support(1));
        let prod2 = ScalarWindow::<f64>::Product {
            factors: vec![
                ScalarWindow::DyadicBand { level: 5 },
                ScalarWindow::CubeCell { center: vec![40] },
            ],
        };
        assert!(!prod2.is_empty_support(1));
        assert!(prod2.eval(&[40.0]) > 0.0);
    }

    #[test]
    fn windows_stay_in_unit_range() {
        let windows: Vec<ScalarWindow<f64>> = vec![
            ScalarWindow::FlatBump {
                inner: 1.0,
                outer: 2.0,
            },
            ScalarWindow::FlatAnnulus {
                r: [0.5, 1.0, 2.0, 4.0],
            },
            ScalarWindow::CubeCell { center: vec![1] },
            ScalarWindow::DyadicBand { level: 4 },
        ];
        for w in &windows {
            for i in 0..=3000 {
                let xi = -40.0 + 80.0 * (i as f64) / 3000.0;
                let v = w.eval(&[xi]);
                assert!((0.0..=1.0).contains(&v), "{w:?} at {xi}: {v}");
            }
        }
    }
}
