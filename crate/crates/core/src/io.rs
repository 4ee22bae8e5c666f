//! JSON interchange formats: field files, window and symbol descriptors,
//! run configs, and report serialization (JSON + flat CSV).
//!
//! Field files store complex samples as `[re, im]` pairs in row-major
//! lattice order; frequency-side files use the wraparound index convention
//! `m ∈ [-N/2, N/2)` (index 0 is the zero frequency).  All payloads are
//! `f64` regardless of the in-memory scalar type.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::bilinear::{GeneralSampled, SeparableTerm, Symbol, XIndependentSampled};
use crate::error::{Error, Result};
use crate::experiments::ExperimentReport;
use crate::grid::{inverse_transform, GridSpec, SampledField, SpectralField};
use crate::symbols::{
    make_sharpness_symbol_hormander, make_sharpness_symbol_mixed, make_sharpness_symbol_product,
};
use crate::window::{AnalyticWindow, ScalarWindow};
use crate::Scalar;

/// Which lattice a field file lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSide {
    Space,
    Frequency,
}

/// On-disk field format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldFile {
    pub dimension: usize,
    pub samples_per_axis: usize,
    pub period_scale: f64,
    pub side: FieldSide,
    pub values: Vec<[f64; 2]>,
}

/// A deserialized field, on whichever side the file declared.
#[derive(Debug, Clone)]
pub enum FieldData<T> {
    Space(SampledField<T>),
    Frequency(SpectralField<T>),
}

impl<T: Scalar> FieldData<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        match self {
            FieldData::Space(f) => f.grid(),
            FieldData::Frequency(f) => f.grid(),
        }
    }

    /// Space-side view, applying the inverse transform if needed.
    pub fn into_sampled(self) -> Result<SampledField<T>> {
        match self {
            FieldData::Space(f) => Ok(f),
            FieldData::Frequency(spec) => inverse_transform(&spec),
        }
    }
}

fn complex_values<T: Scalar>(values: &[[f64; 2]]) -> Vec<Complex<T>> {
    values
        .iter()
        .map(|[re, im]| Complex::new(T::from_f64_lossy(*re), T::from_f64_lossy(*im)))
        .collect()
}

fn flat_values<T: Scalar>(values: &[Complex<T>]) -> Vec<[f64; 2]> {
    values
        .iter()
        .map(|v| {
            [
                v.re.to_f64().unwrap_or(f64::NAN),
                v.im.to_f64().unwrap_or(f64::NAN),
            ]
        })
        .collect()
}

impl FieldFile {
    pub fn from_sampled<T: Scalar>(f: &SampledField<T>) -> Self {
        FieldFile {
            dimension: f.grid().dimension(),
            samples_per_axis: f.grid().samples_per_axis(),
            period_scale: f.grid().period_scale().to_f64().unwrap_or(f64::NAN),
            side: FieldSide::Space,
            values: flat_values(f.values()),
        }
    }

    pub fn from_spectral<T: Scalar>(f: &SpectralField<T>) -> Self {
        FieldFile {
            dimension: f.grid().dimension(),
            samples_per_axis: f.grid().samples_per_axis(),
            period_scale: f.grid().period_scale().to_f64().unwrap_or(f64::NAN),
            side: FieldSide::Frequency,
            values: flat_values(f.values()),
        }
    }

    pub fn into_field<T: Scalar>(self) -> Result<FieldData<T>> {
        let grid = GridSpec::new(
            self.dimension,
            self.samples_per_axis,
            T::from_f64_lossy(self.period_scale),
        )?;
        let values = complex_values(&self.values);
        Ok(match self.side {
            FieldSide::Space => FieldData::Space(SampledField::from_values(grid, values)?),
            FieldSide::Frequency => {
                FieldData::Frequency(SpectralField::from_values(grid, values)?)
            }
        })
    }
}

/// Read a field file from disk.
pub fn read_field<T: Scalar>(path: &Path) -> Result<FieldData<T>> {
    let text = fs::read_to_string(path)?;
    let file: FieldFile = serde_json::from_str(&text)?;
    file.into_field()
}

/// Write a field file to disk.
pub fn write_field_file(path: &Path, file: &FieldFile) -> Result<()> {
    fs::write(path, serde_json::to_string(file)?)?;
    Ok(())
}

/// On-disk window descriptor; mirrors [`ScalarWindow`] except for analytic
/// closures, which have no serial form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSpec {
    FlatBump {
        inner: f64,
        outer: f64,
    },
    FlatAnnulus {
        r: [f64; 4],
    },
    DyadicRescale {
        base: Box<WindowSpec>,
        scale_exponent: i32,
    },
    CubeCell {
        center: Vec<i64>,
    },
    SobolevWeight {
        s: f64,
    },
    DyadicBand {
        level: u32,
    },
    Constant {
        value: f64,
    },
    Sum {
        terms: Vec<(f64, WindowSpec)>,
    },
    Product {
        factors: Vec<WindowSpec>,
    },
}

impl WindowSpec {
    pub fn to_window<T: Scalar>(&self) -> ScalarWindow<T> {
        let f = T::from_f64_lossy;
        match self {
            WindowSpec::FlatBump { inner, outer } => ScalarWindow::FlatBump {
                inner: f(*inner),
                outer: f(*outer),
            },
            WindowSpec::FlatAnnulus { r } => ScalarWindow::FlatAnnulus {
                r: [f(r[0]), f(r[1]), f(r[2]), f(r[3])],
            },
            WindowSpec::DyadicRescale {
                base,
                scale_exponent,
            } => ScalarWindow::DyadicRescale {
                base: Box::new(base.to_window()),
                scale_exponent: *scale_exponent,
            },
            WindowSpec::CubeCell { center } => ScalarWindow::CubeCell {
                center: center.clone(),
            },
            WindowSpec::SobolevWeight { s } => ScalarWindow::SobolevWeight { s: f(*s) },
            WindowSpec::DyadicBand { level } => ScalarWindow::DyadicBand { level: *level },
            WindowSpec::Constant { value } => ScalarWindow::Constant { value: f(*value) },
            WindowSpec::Sum { terms } => ScalarWindow::Sum {
                terms: terms
                    .iter()
                    .map(|(c, w)| (f(*c), w.to_window()))
                    .collect(),
            },
            WindowSpec::Product { factors } => ScalarWindow::Product {
                factors: factors.iter().map(|w| w.to_window()).collect(),
            },
        }
    }

    pub fn from_window<T: Scalar>(window: &ScalarWindow<T>) -> Result<Self> {
        let g = |v: T| v.to_f64().unwrap_or(f64::NAN);
        Ok(match window {
            ScalarWindow::FlatBump { inner, outer } => WindowSpec::FlatBump {
                inner: g(*inner),
                outer: g(*outer),
            },
            ScalarWindow::FlatAnnulus { r } => WindowSpec::FlatAnnulus {
                r: [g(r[0]), g(r[1]), g(r[2]), g(r[3])],
            },
            ScalarWindow::DyadicRescale {
                base,
                scale_exponent,
            } => WindowSpec::DyadicRescale {
                base: Box::new(Self::from_window(base)?),
                scale_exponent: *scale_exponent,
            },
            ScalarWindow::CubeCell { center } => WindowSpec::CubeCell {
                center: center.clone(),
            },
            ScalarWindow::SobolevWeight { s } => WindowSpec::SobolevWeight { s: g(*s) },
            ScalarWindow::DyadicBand { level } => WindowSpec::DyadicBand { level: *level },
            ScalarWindow::Constant { value } => WindowSpec::Constant { value: g(*value) },
            ScalarWindow::Sum { terms } => WindowSpec::Sum {
                terms: terms
                    .iter()
                    .map(|(c, w)| Ok((g(*c), Self::from_window(w)?)))
                    .collect::<Result<_>>()?,
            },
            ScalarWindow::Product { factors } => WindowSpec::Product {
                factors: factors
                    .iter()
                    .map(Self::from_window)
                    .collect::<Result<_>>()?,
            },
            ScalarWindow::Analytic(AnalyticWindow { tag, .. }) => {
                return Err(Error::InvalidParameter(format!(
                    "analytic window '{tag}' has no serial descriptor"
                )))
            }
        })
    }
}

/// One separable term in a symbol file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub coefficient: f64,
    pub m1: WindowSpec,
    pub m2: WindowSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_modulation: Option<Vec<i64>>,
}

/// On-disk symbol format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum SymbolFile {
    SeparableSum {
        terms: Vec<TermSpec>,
    },
    XIndependentSampled {
        dimension: usize,
        samples_per_axis: usize,
        period_scale: f64,
        values: Vec<[f64; 2]>,
    },
    GeneralSampled {
        dimension: usize,
        samples_per_axis: usize,
        period_scale: f64,
        frequency_box: usize,
        values: Vec<[f64; 2]>,
    },
}

impl SymbolFile {
    pub fn from_symbol<T: Scalar>(symbol: &Symbol<T>) -> Result<Self> {
        Ok(match symbol {
            Symbol::Separable(terms) => SymbolFile::SeparableSum {
                terms: terms
                    .iter()
                    .map(|t| {
                        Ok(TermSpec {
                            coefficient: t.coefficient.to_f64().unwrap_or(f64::NAN),
                            m1: WindowSpec::from_window(&t.factor1)?,
                            m2: WindowSpec::from_window(&t.factor2)?,
                            x_modulation: t.x_modulation.clone(),
                        })
                    })
                    .collect::<Result<_>>()?,
            },
            Symbol::XIndependent(s) => SymbolFile::XIndependentSampled {
                dimension: s.grid().dimension(),
                samples_per_axis: s.grid().samples_per_axis(),
                period_scale: s.grid().period_scale().to_f64().unwrap_or(f64::NAN),
                values: flat_values(s.values()),
            },
            Symbol::General(s) => SymbolFile::GeneralSampled {
                dimension: s.grid().dimension(),
                samples_per_axis: s.grid().samples_per_axis(),
                period_scale: s.grid().period_scale().to_f64().unwrap_or(f64::NAN),
                frequency_box: s.box_len(),
                values: flat_values(s.values()),
            },
        })
    }

    pub fn into_symbol<T: Scalar>(self) -> Result<Symbol<T>> {
        Ok(match self {
            SymbolFile::SeparableSum { terms } => Symbol::separable(
                terms
                    .into_iter()
                    .map(|t| {
                        let mut term = SeparableTerm::new(
                            T::from_f64_lossy(t.coefficient),
                            t.m1.to_window(),
                            t.m2.to_window(),
                        );
                        if let Some(mu) = t.x_modulation {
                            term = term.modulated(mu);
                        }
                        term
                    })
                    .collect(),
            ),
            SymbolFile::XIndependentSampled {
                dimension,
                samples_per_axis,
                period_scale,
                values,
            } => {
                let grid =
                    GridSpec::new(dimension, samples_per_axis, T::from_f64_lossy(period_scale))?;
                Symbol::XIndependent(XIndependentSampled::new(grid, complex_values(&values))?)
            }
            SymbolFile::GeneralSampled {
                dimension,
                samples_per_axis,
                period_scale,
                frequency_box,
                values,
            } => {
                let grid =
                    GridSpec::new(dimension, samples_per_axis, T::from_f64_lossy(period_scale))?;
                Symbol::General(GeneralSampled::new(
                    grid,
                    frequency_box,
                    complex_values(&values),
                )?)
            }
        })
    }
}

/// Read a symbol file from disk.
pub fn read_symbol<T: Scalar>(path: &Path) -> Result<Symbol<T>> {
    let text = fs::read_to_string(path)?;
    let file: SymbolFile = serde_json::from_str(&text)?;
    file.into_symbol()
}

/// Write a symbol file to disk.
pub fn write_symbol<T: Scalar>(path: &Path, symbol: &Symbol<T>) -> Result<()> {
    fs::write(path, serde_json::to_string(&SymbolFile::from_symbol(symbol)?)?)?;
    Ok(())
}

/// High-level symbol descriptor (the `make-symbol` families).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SymbolDescriptor {
    /// The uniform-class dyadic sum of order -n/2.
    DefSymbol { k_min: u32, k_max: u32 },
    /// The product-class pair of dyadic sums.
    Product {
        m1: f64,
        m2: f64,
        k_min: u32,
        k_max: u32,
    },
    /// The mixed cover × dyadic-sum symbol.
    Mixed { m2: f64, k_min: u32, k_max: u32 },
    /// σ ≡ value.
    Constant { value: f64 },
}

impl SymbolDescriptor {
    pub fn build<T: Scalar>(&self, grid: &GridSpec<T>) -> Result<Symbol<T>> {
        match self {
            SymbolDescriptor::DefSymbol { k_min, k_max } => {
                make_sharpness_symbol_hormander(grid, *k_min, *k_max)
            }
            SymbolDescriptor::Product {
                m1,
                m2,
                k_min,
                k_max,
            } => make_sharpness_symbol_product(
                grid,
                T::from_f64_lossy(*m1),
                T::from_f64_lossy(*m2),
                *k_min,
                *k_max,
            ),
            SymbolDescriptor::Mixed { m2, k_min, k_max } => {
                make_sharpness_symbol_mixed(grid, T::from_f64_lossy(*m2), *k_min, *k_max)
            }
            SymbolDescriptor::Constant { value } => Ok(Symbol::constant(T::from_f64_lossy(*value))),
        }
    }
}

/// Grid block of a run config: either a named preset or explicit values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Preset(String),
    Explicit {
        dimension: usize,
        samples_per_axis: usize,
        period_scale: f64,
    },
}

impl GridConfig {
    pub fn build<T: Scalar>(&self) -> Result<GridSpec<T>> {
        match self {
            GridConfig::Preset(name) => match name.as_str() {
                "desk" => Ok(GridSpec::desk()),
                other => Err(Error::Parse(format!(
                    "unknown grid preset '{other}' (expected \"desk\")"
                ))),
            },
            GridConfig::Explicit {
                dimension,
                samples_per_axis,
                period_scale,
            } => GridSpec::new(
                *dimension,
                *samples_per_axis,
                T::from_f64_lossy(*period_scale),
            ),
        }
    }
}

/// Experiment run config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub seed: u64,
    /// Suites to run, in order (see `SuiteKind`).
    pub suites: Vec<String>,
}

pub fn read_run_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Flat CSV for a report list; columns
/// `experiment,j,norm,ratio,slope,expected,pass`, one row per sweep record.
/// Byte-deterministic for a fixed report list.
pub fn reports_to_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("experiment,j,norm,ratio,slope,expected,pass\n");
    for report in reports {
        for record in &report.records {
            let slope = report
                .slope
                .map(|s| s.to_string())
                .unwrap_or_default();
            let expected = report
                .expected_exponent
                .map(|e| e.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_escape(&report.experiment),
                record.j,
                record.output_norm,
                record.ratio,
                slope,
                expected,
                report.pass
            ));
        }
    }
    out
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Two-column (j, norm) plot data for one report.
pub fn report_plot_data(report: &ExperimentReport) -> String {
    let mut out = String::new();
    for record in &report.records {
        out.push_str(&format!("{} {}\n", record.j, record.output_norm));
    }
    out
}

/// File-system name for a report's plot-data file.
pub fn plot_file_name(report: &ExperimentReport, index: usize) -> String {
    let slug: String = report
        .experiment
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect();
    format!("{index:02}_{slug}.dat")
}
