//! One entry point per figure, each reduced to flat [`Record`]s.

use qse_core::{
    bc_theoretical_entropy, entropy_fraction_profile, qs_theoretical_entropy, Distribution, OracleConfig, QsConfig,
    DEFAULT_CONVERGENCE_TOL, DEFAULT_SEED,
};

use crate::config::{ExperimentConfig, Method, DEFAULT_REPETITIONS, DEFAULT_SAMPLE_SIZES};
use crate::error::{BenchError, Result};
use crate::studies::{bootstrap_iqr_study, compare_methods, optimal_hyperparameter_study, quantile_bias_study};
use crate::sweep::run_bias_sweep;
use crate::table::{curve_records, spec_label, Record};

pub const FIGURE_IDS: std::ops::RangeInclusive<u32> = 1..=12;

pub const ORACLE_GRID: [usize; 10] = [3, 5, 10, 20, 30, 50, 100, 200, 500, 1000];
pub const QUANTILE_PROBABILITIES: [f64; 3] = [0.90, 0.95, 0.99];
pub const QUANTILE_NZ_GRID: [usize; 7] = [100, 200, 500, 1000, 2000, 5000, 10000];
pub const QUANTILE_NK_GRID: [usize; 6] = [10, 20, 50, 100, 200, 500];

#[derive(Clone, Debug, PartialEq)]
pub struct FigureOptions {
    pub repetitions: usize,
    pub base_seed: u64,
    pub sample_sizes: Vec<usize>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self { repetitions: DEFAULT_REPETITIONS, base_seed: DEFAULT_SEED, sample_sizes: DEFAULT_SAMPLE_SIZES.to_vec() }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FigureOutput {
    pub records: Vec<Record>,
    /// `spec/method/n_s/grid_value` of every cell whose failure rate
    /// exceeded the limit.
    pub invalid: Vec<String>,
}

impl FigureOutput {
    fn push(&mut self, record: Record, valid: bool) {
        if !valid {
            self.invalid
                .push(format!("{}/{}/{}/{}", record.spec, record.method, record.n_s, record.grid_value));
        }
        self.records.push(record);
    }
}

fn unimodal() -> [Distribution; 3] {
    [Distribution::unit_gaussian(), Distribution::unit_exponential(), Distribution::unit_lognormal()]
}

pub fn run_figure(id: u32, opts: &FigureOptions) -> Result<FigureOutput> {
    let mut out = FigureOutput::default();
    match id {
        1 => oracle_thresholds(&mut out)?,
        2 => quantile_accuracy(&mut out, opts)?,
        3 => entropy_fractions(&mut out)?,
        4 => sweeps(&mut out, &unimodal(), Method::Qs, None, opts)?,
        5 => sweeps(&mut out, &unimodal(), Method::Qs, Some(&[0.25]), opts)?,
        6 => bootstrap_calibration(&mut out, opts)?,
        7 => sweeps(&mut out, &unimodal(), Method::Bc, None, opts)?,
        8 => optima(&mut out, &unimodal(), Method::Bc, opts)?,
        9 => bimodal(&mut out, opts)?,
        10 => sweeps(&mut out, &Distribution::benchmark_suite(), Method::Kd, None, opts)?,
        11 => optima(&mut out, &Distribution::benchmark_suite(), Method::Kd, opts)?,
        12 => comparison(&mut out, opts)?,
        _ => return Err(BenchError::Config(format!("unknown figure {id}; expected 1-12"))),
    }
    Ok(out)
}

fn oracle_thresholds(out: &mut FigureOutput) -> Result<()> {
    let cfg = OracleConfig::default();
    for spec in unimodal() {
        let truth = spec.true_entropy()?;
        let label = spec_label(&spec);
        for n in ORACLE_GRID {
            let qs = qs_theoretical_entropy(&spec, n, &cfg)?;
            out.push(Record::exact(&label, "qs", n as f64, qs, Some(truth)), true);
        }
        for n in ORACLE_GRID {
            let bc = bc_theoretical_entropy(&spec, n, &cfg)?;
            out.push(Record::exact(&label, "bc", n as f64, bc, Some(truth)), true);
        }
    }
    Ok(())
}

fn quantile_accuracy(out: &mut FigureOutput, opts: &FigureOptions) -> Result<()> {
    let spec = Distribution::unit_lognormal();
    let mut settings: Vec<(usize, usize)> = QUANTILE_NZ_GRID.iter().map(|&nz| (nz, 500)).collect();
    settings.extend(QUANTILE_NK_GRID.iter().map(|&nk| (1000, nk)));
    for cell in quantile_bias_study(&spec, &settings, &QUANTILE_PROBABILITIES, opts.repetitions, opts.base_seed)? {
        out.push(Record::from_quantile(&spec, &cell), true);
    }
    Ok(())
}

fn entropy_fractions(out: &mut FigureOutput) -> Result<()> {
    let cfg = OracleConfig::default();
    let mut specs = vec![Distribution::uniform(0.0, std::f64::consts::E)?];
    specs.extend(unimodal());
    for n_z in [100, 1000] {
        for spec in &specs {
            let label = spec_label(spec);
            let method = format!("qs:nz{n_z}");
            for (j, f) in entropy_fraction_profile(spec, n_z, &cfg)?.into_iter().enumerate() {
                out.push(Record::exact(&label, &method, (j + 1) as f64, f, None), true);
            }
        }
    }
    Ok(())
}

fn sweeps(
    out: &mut FigureOutput,
    specs: &[Distribution],
    method: Method,
    grid: Option<&[f64]>,
    opts: &FigureOptions,
) -> Result<()> {
    for spec in specs {
        let mut cfg = ExperimentConfig::new(spec.clone(), method)
            .with_sample_sizes(&opts.sample_sizes)
            .with_repetitions(opts.repetitions)
            .with_seed(opts.base_seed);
        if let Some(g) = grid {
            cfg = cfg.with_grid(g);
        }
        let curve = run_bias_sweep(&cfg)?;
        for (record, cell) in curve_records(&curve).into_iter().zip(&curve.cells) {
            out.push(record, cell.is_valid());
        }
    }
    Ok(())
}

fn optima(out: &mut FigureOutput, specs: &[Distribution], method: Method, opts: &FigureOptions) -> Result<()> {
    let label = format!("{}:optimum", method.label());
    for spec in specs {
        let cfg = ExperimentConfig::new(spec.clone(), method)
            .with_sample_sizes(&opts.sample_sizes)
            .with_repetitions(opts.repetitions)
            .with_seed(opts.base_seed);
        for cell in optimal_hyperparameter_study(&cfg)? {
            out.push(Record::from_optimum(spec, &label, &cell), cell.is_valid());
        }
    }
    Ok(())
}

fn bootstrap_calibration(out: &mut FigureOutput, opts: &FigureOptions) -> Result<()> {
    let spec = Distribution::unit_gaussian();
    let qs = QsConfig::default();
    let cells = bootstrap_iqr_study(&spec, &opts.sample_sizes, opts.repetitions, &qs, opts.base_seed)?;
    for cell in cells {
        out.push(Record::from_iqr(&spec, 0.25, &cell), cell.is_valid());
    }
    Ok(())
}

fn bimodal(out: &mut FigureOutput, opts: &FigureOptions) -> Result<()> {
    let spec = Distribution::bimodal();
    let label = spec_label(&spec);
    let cfg = OracleConfig::default();
    let truth = spec.true_entropy()?;
    let converged = qse_core::converge_entropy(&spec, &cfg, DEFAULT_CONVERGENCE_TOL)?;
    let mut n = 16;
    while n <= converged.n_quantiles {
        let h = qs_theoretical_entropy(&spec, n, &cfg)?;
        out.push(Record::exact(&label, "qs:oracle", n as f64, h, Some(truth)), true);
        n *= 2;
    }
    sweeps(out, &[spec], Method::Qs, None, opts)
}

fn comparison(out: &mut FigureOutput, opts: &FigureOptions) -> Result<()> {
    let cells = compare_methods(&Distribution::benchmark_suite(), &opts.sample_sizes, opts.repetitions, opts.base_seed)?;
    for mc in &cells {
        out.push(Record::from_method_cell(mc), mc.cell.is_valid());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_figure_is_rejected() {
        assert!(run_figure(0, &FigureOptions::default()).is_err());
        assert!(run_figure(13, &FigureOptions::default()).is_err());
    }

    #[test]
    fn oracle_figures_are_exact_rows() {
        let one = run_figure(1, &FigureOptions::default()).unwrap();
        assert_eq!(one.records.len(), 3 * 2 * ORACLE_GRID.len());
        assert!(one.invalid.is_empty());
        let three = run_figure(3, &FigureOptions::default()).unwrap();
        assert_eq!(three.records.len(), 4 * (100 + 1000));
    }

    #[test]
    fn small_sweep_figure() {
        let opts = FigureOptions { repetitions: 4, base_seed: 1, sample_sizes: vec![50] };
        let fig = run_figure(5, &opts).unwrap();
        assert_eq!(fig.records.len(), 3);
        assert!(fig.records.iter().all(|r| r.grid_value == 0.25 && r.n_s == 50));
    }
}
