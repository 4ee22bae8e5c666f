//! Command-line front end: norms of field files, bilinear operator
//! application with cross-path comparison, symbol/function constructors,
//! and the scripted experiment suites.
//!
//! Exit codes: 0 success, 1 experiment assertion failure, 2 usage/config
//! error, 3 numeric failure (non-finite data).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use besovbilin::bilinear::{
    apply_bilinear, apply_bilinear_bruteforce, apply_bilinear_separable, apply_bilinear_xindep,
    Symbol,
};
use besovbilin::error::Error;
use besovbilin::experiments::{run_suite, ExperimentReport, SuiteKind};
use besovbilin::grid::{forward_transform, GridSpec, SampledField, SpectralField};
use besovbilin::io::{
    plot_file_name, read_field, read_run_config, read_symbol, report_plot_data, reports_to_csv,
    write_field_file, write_symbol, FieldFile, SymbolDescriptor,
};
use besovbilin::norms::{besov_norm_detailed, sobolev_norm, BesovParams, SobolevParams};
use besovbilin::symbols::{make_low_bump, make_modulated_bump};
use besovbilin::Real;

#[derive(Parser)]
#[command(
    name = "besovbilin",
    version,
    about = "Bilinear pseudo-differential operators and Besov/Sobolev norms on periodic grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Named grid preset; `desk` is n=1, N=2^14, P=16.
    #[arg(long, value_name = "NAME")]
    grid_preset: Option<String>,
    /// Grid dimension n.
    #[arg(long, default_value_t = 1)]
    dimension: usize,
    /// Samples per axis N (power of two).
    #[arg(long, default_value_t = 1 << 14)]
    samples_per_axis: usize,
    /// Period scale P (domain is [-πP, πP)^n).
    #[arg(long, default_value_t = 16.0)]
    period_scale: f64,
}

impl GridArgs {
    fn build(&self) -> Result<GridSpec<Real>, Error> {
        match self.grid_preset.as_deref() {
            Some("desk") => Ok(GridSpec::desk()),
            Some(other) => Err(Error::Parse(format!(
                "unknown grid preset '{other}' (expected \"desk\")"
            ))),
            None => GridSpec::new(self.dimension, self.samples_per_axis, self.period_scale),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PathChoice {
    Auto,
    BruteForce,
    XIndependent,
    Separable,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FunctionKind {
    /// Field with spectrum bump(ξ) (low-frequency reference bump).
    LowBump,
    /// Field with spectrum bump(ξ - sign·2^j e₁).
    ModulatedBump,
    /// Unit spectral spike at a given frequency.
    Spike,
    /// Seeded random band-limited field.
    Random,
    /// The zero field.
    Zero,
}

#[derive(Subcommand)]
enum Command {
    /// Besov norm of a field file, with per-band norms.
    BesovNorm {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Band cutoff ℓ_max; defaults to the full grid capture.
        #[arg(long)]
        band_cutoff: Option<u32>,
    },
    /// Sobolev norm of a field file.
    SobolevNorm {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
    },
    /// Apply the bilinear operator to two field files.
    ApplyOp {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        f1: PathBuf,
        #[arg(long)]
        f2: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = PathChoice::Auto)]
        path: PathChoice,
        /// Also run every applicable path and print the max relative
        /// cross-path deviation.
        #[arg(long)]
        compare_paths: bool,
    },
    /// Construct a symbol file from a family descriptor.
    MakeSymbol {
        /// Inline JSON descriptor, e.g. {"family":"def-symbol","k_min":5,"k_max":8}.
        #[arg(long, value_name = "JSON")]
        descriptor: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Construct a field file.
    MakeFunction {
        #[arg(long, value_enum)]
        kind: FunctionKind,
        /// Dyadic level for modulated bumps.
        #[arg(long)]
        j: Option<u32>,
        /// Modulation sign (+1 or -1).
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i8,
        /// Spike frequency (first axis) for `spike`.
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
        /// Band limits for `random`.
        #[arg(long, default_value_t = 0.0)]
        band_lo: f64,
        #[arg(long)]
        band_hi: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the frequency-side file instead of space samples.
        #[arg(long)]
        spectral: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run experiment suites and write JSON + CSV reports.
    Experiment {
        /// Run config file; flags below override nothing when present.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Suites to run (closed-form, sharpness, boundedness, lemmas, all).
        #[arg(long)]
        suite: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
        /// Also emit two-column plot-data files per experiment.
        #[arg(long)]
        plot_data: bool,
        #[command(flatten)]
        grid: GridArgs,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("BESOVBILIN_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NonFinite { .. } | Error::NonFiniteMultiplier { .. } => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::BesovNorm {
            field,
            s,
            p,
            q,
            band_cutoff,
        } => cmd_besov_norm(&field, s, p, q, band_cutoff),
        Command::SobolevNorm { field, s, p } => cmd_sobolev_norm(&field, s, p),
        Command::ApplyOp {
            symbol,
            f1,
            f2,
            out,
            path,
            compare_paths,
        } => cmd_apply_op(&symbol, &f1, &f2, &out, path, compare_paths),
        Command::MakeSymbol {
            descriptor,
            out,
            grid,
        } => cmd_make_symbol(&descriptor, &out, &grid),
        Command::MakeFunction {
            kind,
            j,
            sign,
            xi,
            band_lo,
            band_hi,
            seed,
            spectral,
            out,
            grid,
        } => cmd_make_function(kind, j, sign, xi, band_lo, band_hi, seed, spectral, &out, &grid),
        Command::Experiment {
            config,
            suite,
            seed,
            out_dir,
            plot_data,
            grid,
        } => cmd_experiment(config.as_deref(), &suite, seed, &out_dir, plot_data, &grid),
    }
}

fn load_sampled(path: &Path) -> Result<SampledField<Real>, Error> {
    read_field::<Real>(path)?.into_sampled()
}

fn cmd_besov_norm(
    field: &Path,
    s: f64,
    p: f64,
    q: f64,
    band_cutoff: Option<u32>,
) -> Result<ExitCode, Error> {
    let f = load_sampled(field)?;
    let params = match band_cutoff {
        Some(cutoff) => BesovParams::new(s, p, q, cutoff)?,
        None => BesovParams::for_grid(s, p, q, f.grid())?,
    };
    let (norm, bands) = besov_norm_detailed(&f, &params)?;
    let per_band: Vec<serde_json::Value> = bands
        .iter()
        .map(|(l, n)| serde_json::json!({"l": l, "band_norm": n}))
        .collect();
    println!(
        "{}",
        serde_json::json!({"norm": norm, "per_band": per_band})
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sobolev_norm(field: &Path, s: f64, p: f64) -> Result<ExitCode, Error> {
    let f = load_sampled(field)?;
    let norm = sobolev_norm(&f, &SobolevParams::new(s, p)?)?;
    println!("{}", serde_json::json!({ "norm": norm }));
    Ok(ExitCode::SUCCESS)
}

fn cmd_apply_op(
    symbol_path: &Path,
    f1_path: &Path,
    f2_path: &Path,
    out: &Path,
    path: PathChoice,
    compare_paths: bool,
) -> Result<ExitCode, Error> {
    let symbol: Symbol<Real> = read_symbol(symbol_path)?;
    let f1 = load_sampled(f1_path)?;
    let f2 = load_sampled(f2_path)?;
    let result = match path {
        PathChoice::Auto => apply_bilinear(&symbol, &f1, &f2)?,
        PathChoice::BruteForce => apply_bilinear_bruteforce(&symbol, &f1, &f2)?,
        PathChoice::XIndependent => apply_bilinear_xindep(&symbol, &f1, &f2)?,
        PathChoice::Separable => apply_bilinear_separable(&symbol, &f1, &f2)?,
    };
    write_field_file(out, &FieldFile::from_sampled(&result))?;
    if compare_paths {
        // the brute-force quadrature costs O(N^{3n}) and the ξ₁-slice path
        // O(N^{2n} log N); skip whichever the grid makes impractical
        let len = f1.grid().len() as u64;
        let brute_ok = len.pow(3) <= 1 << 26;
        let xindep_ok = len.pow(2) <= 1 << 30;
        let mut outputs = vec![("requested", result.clone())];
        if brute_ok && !matches!(path, PathChoice::BruteForce) {
            outputs.push(("brute-force", apply_bilinear_bruteforce(&symbol, &f1, &f2)?));
        }
        if xindep_ok && symbol.is_x_independent() && !matches!(path, PathChoice::XIndependent) {
            outputs.push(("x-independent", apply_bilinear_xindep(&symbol, &f1, &f2)?));
        }
        if matches!(symbol, Symbol::Separable(_)) && !matches!(path, PathChoice::Separable) {
            outputs.push(("separable", apply_bilinear_separable(&symbol, &f1, &f2)?));
        }
        let scale = outputs[0].1.max_abs().max(f64::MIN_POSITIVE);
        let mut deviation: f64 = 0.0;
        for a in 0..outputs.len() {
            for b in a + 1..outputs.len() {
                deviation =
                    deviation.max(outputs[a].1.sub(&outputs[b].1)?.max_abs() / scale);
            }
        }
        let names: Vec<&str> = outputs.iter().map(|(n, _)| *n).collect();
        println!(
            "{}",
            serde_json::json!({
                "paths_compared": names,
                "max_relative_deviation": deviation
            })
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_make_symbol(descriptor: &str, out: &Path, grid: &GridArgs) -> Result<ExitCode, Error> {
    let grid = grid.build()?;
    let descriptor: SymbolDescriptor = serde_json::from_str(descriptor)?;
    let symbol = descriptor.build::<Real>(&grid)?;
    write_symbol(out, &symbol)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_make_function(
    kind: FunctionKind,
    j: Option<u32>,
    sign: i8,
    xi: Option<f64>,
    band_lo: f64,
    band_hi: Option<f64>,
    seed: u64,
    spectral: bool,
    out: &Path,
    grid: &GridArgs,
) -> Result<ExitCode, Error> {
    let grid = grid.build()?;
    let field = match kind {
        FunctionKind::LowBump => make_low_bump(&grid)?,
        FunctionKind::ModulatedBump => {
            let j = j.ok_or_else(|| {
                Error::InvalidParameter("modulated-bump needs --j".into())
            })?;
            make_modulated_bump(&grid, j, sign)?
        }
        FunctionKind::Spike => {
            let xi = xi.ok_or_else(|| Error::InvalidParameter("spike needs --xi".into()))?;
            let m = xi * grid.period_scale();
            if (m - m.round()).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "spike frequency {xi} is not on the lattice (spacing {})",
                    grid.delta_xi()
                )));
            }
            let mut signed = vec![0i64; grid.dimension()];
            signed[0] = m.round() as i64;
            let half = grid.samples_per_axis() as i64 / 2;
            if signed[0] < -half || signed[0] >= half {
                return Err(Error::NyquistExceeded {
                    required: xi.abs(),
                    nyquist: grid.nyquist(),
                });
            }
            let mut spec = SpectralField::zeros(grid);
            let idx = grid.flat_from_signed(&signed);
            spec.values_mut()[idx] = besovbilin::CReal::new(1.0, 0.0);
            besovbilin::grid::inverse_transform(&spec)?
        }
        FunctionKind::Random => {
            let hi = band_hi.unwrap_or(grid.nyquist() * 0.9);
            besovbilin::experiments::seeded_band_limited_field(&grid, band_lo, hi, seed)?
        }
        FunctionKind::Zero => SampledField::zeros(grid),
    };
    let file = if spectral {
        FieldFile::from_spectral(&forward_transform(&field)?)
    } else {
        FieldFile::from_sampled(&field)
    };
    write_field_file(out, &file)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_experiment(
    config: Option<&Path>,
    suites: &[String],
    seed: u64,
    out_dir: &Path,
    plot_data: bool,
    grid: &GridArgs,
) -> Result<ExitCode, Error> {
    let (grid, seed, suite_names) = match config {
        Some(path) => {
            let config = read_run_config(path)?;
            (config.grid.build::<Real>()?, config.seed, config.suites)
        }
        None => (grid.build()?, seed, suites.to_vec()),
    };
    if suite_names.is_empty() {
        return Err(Error::InvalidParameter(
            "no experiments selected; pass --suite or a config with a non-empty suite list".into(),
        ));
    }
    let kinds = suite_names
        .iter()
        .map(|s| s.parse::<SuiteKind>())
        .collect::<Result<Vec<_>, _>>()?;

    std::fs::create_dir_all(out_dir)?;
    let mut reports: Vec<ExperimentReport> = Vec::new();
    for kind in kinds {
        reports.extend(run_suite(kind, &grid, seed)?);
    }
    for report in &reports {
        println!(
            "{} {}",
            if report.pass { "PASS" } else { "FAIL" },
            report.experiment
        );
    }
    std::fs::write(
        out_dir.join("reports.json"),
        serde_json::to_string_pretty(&reports)?,
    )?;
    std::fs::write(out_dir.join("reports.csv"), reports_to_csv(&reports))?;
    if plot_data {
        for (i, report) in reports.iter().enumerate() {
            std::fs::write(
                out_dir.join(plot_file_name(report, i)),
                report_plot_data(report),
            )?;
        }
    }
    if reports.iter().all(|r| r.pass) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
