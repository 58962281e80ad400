//! Experiment orchestration: synthetic observations, single-experiment runs
//! with structured text outputs, and the prior x noise sweeps behind the
//! reference tables.

pub mod config;
pub mod phcheck;

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::forward::{
    example_spec, example_spec_on, max_relative_field_error, solve_forward_field, BoundaryTrace,
    ForwardSolver, RobinPath,
};
use crate::priors::{build_covariance, PriorModel};
use crate::sampler::{relative_error, run_chain, ChainResult, NoiseModel};
use crate::topology::PhWeightParams;

pub use config::{
    example_defaults, parse_config_file, parse_config_str, reference_betas, ExperimentConfig,
    CONFIG_VERSION, REFERENCE_AMPLITUDE, REFERENCE_ETA_W, TABLE_NOISE_LEVELS,
};

/// When the nominal noise level is zero the observations are exact; the
/// misfit still needs a positive scale, so sigma falls back to this
/// relative floor.
pub const MIN_RELATIVE_NOISE: f64 = 1e-6;

/// One synthetic observation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub y: Vec<f64>,
    pub epsilon: f64,
    pub seed: u64,
}

/// Multiplicative noise: Y_n = F_n (1 + epsilon w_n) with independent
/// standard normal w_n, one per observation.
pub fn perturb_trace(trace: &BoundaryTrace, epsilon: f64, rng: &mut impl Rng) -> Vec<f64> {
    trace
        .values
        .iter()
        .map(|&v| {
            let w: f64 = rng.sample(StandardNormal);
            v * (1.0 + epsilon * w)
        })
        .collect()
}

/// `perturb_trace` with its own deterministic stream, recording the seed.
pub fn generate_observations(trace: &BoundaryTrace, epsilon: f64, seed: u64) -> ObservationSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ObservationSet {
        y: perturb_trace(trace, epsilon, &mut rng),
        epsilon,
        seed,
    }
}

/// Observation noise scale: an explicit override, or
/// max(epsilon, MIN_RELATIVE_NOISE) * max |Y|. Returns the value and the
/// rule recorded in the metadata.
pub fn resolve_sigma(
    epsilon: f64,
    sigma_override: Option<f64>,
    y: &[f64],
) -> Result<(f64, &'static str)> {
    if let Some(s) = sigma_override {
        return Ok((s, "override"));
    }
    let max_y = y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let sigma = epsilon.max(MIN_RELATIVE_NOISE) * max_y;
    if !(sigma > 0.0) {
        return Err(Error::Config(
            "cannot derive sigma from identically zero observations; set sigma explicitly".into(),
        ));
    }
    Ok((sigma, "relative-max"))
}

/// Summary row of one experiment.
#[derive(Debug, Clone)]
pub struct ErrorTableRow {
    pub example_id: u8,
    pub epsilon: f64,
    pub prior: &'static str,
    pub lambda_hat: Option<f64>,
    pub e_r: f64,
    pub acceptance_rate: f64,
    pub wall_time: Duration,
}

/// Everything an experiment produced, for callers that want more than the
/// summary row.
pub struct RunOutput {
    pub row: ErrorTableRow,
    pub result: ChainResult,
    pub gamma_true: RobinPath,
    pub observations: ObservationSet,
    pub sigma: f64,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

/// Pointwise quantile (linear interpolation) of already sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Freedman-Diaconis histogram of the post-burn-in trace:
/// (bin_lo, bin_hi, count, density) rows.
pub fn freedman_diaconis_histogram(values: &[f64]) -> Vec<(f64, f64, usize, f64)> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let width = 2.0 * iqr / (n as f64).cbrt();
    if width <= 0.0 || max <= min {
        let density = if max > min { 1.0 / (max - min) } else { 0.0 };
        return vec![(min, max, n, density)];
    }
    let bins = (((max - min) / width).ceil() as usize).max(1);
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &sorted {
        let k = (((v - min) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let lo = min + k as f64 * width;
            (lo, lo + width, c, c as f64 / (n as f64 * width))
        })
        .collect()
}

fn metadata_text(
    cfg: &ExperimentConfig,
    sigma: f64,
    sigma_rule: &str,
    jitter_effective: f64,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "config_version = {CONFIG_VERSION}");
    let _ = writeln!(s, "example_id = {}", cfg.example_id);
    let _ = writeln!(s, "noise_level = {}", cfg.noise_level);
    let _ = writeln!(s, "prior = {}", cfg.prior.label());
    if let PriorModel::PhGaussian(PhWeightParams { tau, eta_w }) = cfg.prior {
        let _ = writeln!(s, "tau = {tau}");
        let _ = writeln!(s, "eta_w = {eta_w}");
    }
    let _ = writeln!(s, "length_scale = {}", cfg.length_scale);
    let _ = writeln!(s, "amplitude = {}", cfg.amplitude);
    let _ = writeln!(s, "jitter_requested = {}", cfg.jitter);
    let _ = writeln!(s, "jitter_effective = {jitter_effective}");
    let _ = writeln!(s, "n_samples = {}", cfg.sampler.n_samples);
    let _ = writeln!(s, "beta = {}", cfg.sampler.beta);
    let _ = writeln!(
        s,
        "warmup_beta = {}",
        cfg.sampler.warmup_beta.unwrap_or(cfg.sampler.beta)
    );
    let _ = writeln!(s, "burn_in_fraction = {}", cfg.sampler.burn_in_fraction);
    let _ = writeln!(s, "m1 = {}", cfg.hyper.m1);
    let _ = writeln!(s, "m2 = {}", cfg.hyper.m2);
    let _ = writeln!(s, "lambda_init = {}", cfg.sampler.lambda_init);
    let _ = writeln!(
        s,
        "lambda_warmup_fraction = {}",
        cfg.sampler.lambda_warmup_fraction
    );
    let _ = writeln!(s, "mode = {}", cfg.sampler.mode.label());
    let _ = writeln!(s, "chain_seed = {}", cfg.sampler.seed);
    let _ = writeln!(s, "data_seed = {}", cfg.data_seed);
    let _ = writeln!(s, "sigma = {sigma}");
    let _ = writeln!(s, "sigma_rule = {sigma_rule}");
    let _ = writeln!(s, "space_cells = 100");
    let _ = writeln!(s, "time_steps = 200");
    s
}

/// Run one experiment: build the example, synthesize observations, run the
/// chain, and write `posterior_mean.csv`, `lambda_trace.csv`,
/// `lambda_histogram.csv`, `summary.csv`, `metadata.txt` plus a
/// non-deterministic `timing.txt` into the configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let (spec, exact) = example_spec(cfg.example_id)?;
    let trace = ForwardSolver::new(&spec).solve_trace(&exact.gamma_exact)?;
    let obs = generate_observations(&trace, cfg.noise_level, cfg.data_seed);
    let (sigma, sigma_rule) = resolve_sigma(cfg.noise_level, cfg.sigma_override, &obs.y)?;
    let cov = build_covariance(&spec.time, cfg.length_scale, cfg.amplitude, cfg.jitter)?;
    let y = BoundaryTrace {
        values: obs.y.clone(),
    };

    let start = Instant::now();
    let result = run_chain(
        &spec,
        &y,
        &cov,
        &cfg.prior,
        &NoiseModel { sigma },
        &cfg.hyper,
        &cfg.sampler,
    )?;
    let wall_time = start.elapsed();
    let e_r = relative_error(&result.posterior_mean, &exact.gamma_exact)?;

    std::fs::create_dir_all(&cfg.out_dir)?;

    let mut mean_csv = String::from("t,gamma_hat,band_lo,band_hi,gamma_true\n");
    for (i, &t) in spec.time.times().iter().enumerate() {
        let _ = writeln!(
            mean_csv,
            "{},{},{},{},{}",
            t,
            result.posterior_mean.values[i],
            result.band_lo.values[i],
            result.band_hi.values[i],
            exact.gamma_exact.values[i]
        );
    }
    write_atomic(&cfg.out_dir.join("posterior_mean.csv"), &mean_csv)?;

    let mut trace_csv = String::from("iteration,lambda\n");
    for (i, &l) in result.lambda_trace.iter().enumerate() {
        let _ = writeln!(trace_csv, "{},{}", i + 1, l);
    }
    write_atomic(&cfg.out_dir.join("lambda_trace.csv"), &trace_csv)?;

    let burn = (cfg.sampler.burn_in_fraction * cfg.sampler.n_samples as f64).floor() as usize;
    let post_burn = if result.lambda_trace.len() > burn {
        &result.lambda_trace[burn..]
    } else {
        &[]
    };
    let mut hist_csv = String::from("bin_lo,bin_hi,count,density\n");
    for (lo, hi, count, density) in freedman_diaconis_histogram(post_burn) {
        let _ = writeln!(hist_csv, "{lo},{hi},{count},{density}");
    }
    write_atomic(&cfg.out_dir.join("lambda_histogram.csv"), &hist_csv)?;

    let lambda_cell = match result.lambda_hat {
        Some(l) => format!("{l}"),
        None => "/".into(),
    };
    let summary = format!(
        "example_id,epsilon,prior,lambda_hat,e_r,acceptance_rate,mean_reg,nonfinite_rejections\n\
         {},{},{},{},{},{},{},{}\n",
        cfg.example_id,
        cfg.noise_level,
        cfg.prior.label(),
        lambda_cell,
        e_r,
        result.acceptance_rate,
        result.mean_reg,
        result.nonfinite_rejections
    );
    write_atomic(&cfg.out_dir.join("summary.csv"), &summary)?;

    write_atomic(
        &cfg.out_dir.join("metadata.txt"),
        &metadata_text(cfg, sigma, sigma_rule, cov.jitter_effective()),
    )?;

    // wall time is diagnostic only and lives outside the deterministic
    // output set
    write_atomic(
        &cfg.out_dir.join("timing.txt"),
        &format!("wall_time_seconds = {}\n", wall_time.as_secs_f64()),
    )?;

    Ok(RunOutput {
        row: ErrorTableRow {
            example_id: cfg.example_id,
            epsilon: cfg.noise_level,
            prior: cfg.prior.label(),
            lambda_hat: result.lambda_hat,
            e_r,
            acceptance_rate: result.acceptance_rate,
            wall_time,
        },
        result,
        gamma_true: exact.gamma_exact,
        observations: obs,
        sigma,
    })
}

/// Options of a table sweep.
#[derive(Debug, Clone)]
pub struct TableOptions {
    pub out_dir: std::path::PathBuf,
    pub workers: usize,
    pub mode: crate::sampler::AcceptanceMode,
    pub n_samples: usize,
    /// Fixed step size for both phases; None keeps the per-example,
    /// per-prior reference values.
    pub beta: Option<f64>,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            out_dir: std::path::PathBuf::from("tables"),
            workers: 2,
            mode: crate::sampler::AcceptanceMode::StandardPcn,
            n_samples: 100_000,
            beta: None,
        }
    }
}

/// Seed-resolved summary of one sweep cell.
#[derive(Debug, Clone)]
pub struct TableCell {
    pub example_id: u8,
    pub epsilon: f64,
    pub prior: &'static str,
    pub per_seed: Vec<ErrorTableRow>,
    pub mean_e_r: f64,
    pub mean_lambda_hat: Option<f64>,
}

fn reference_priors() -> [PriorModel; 3] {
    [
        PriorModel::Gaussian,
        PriorModel::TvGaussian,
        PriorModel::PhGaussian(PhWeightParams {
            tau: 3.0,
            eta_w: config::REFERENCE_ETA_W,
        }),
    ]
}

/// Run the full 3-prior x 3-noise grid of one or more examples over the
/// given seeds and write one table file per example (per-seed rows plus
/// seed-averaged rows; the plain Gaussian carries "/" in the lambda
/// column). Experiments run concurrently up to `opts.workers`.
pub fn reproduce_tables(which: &[u8], seeds: &[u64], opts: &TableOptions) -> Result<Vec<TableCell>> {
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let mut configs = Vec::new();
    for &example_id in which {
        for &eps in &TABLE_NOISE_LEVELS {
            for prior in reference_priors() {
                for &seed in seeds {
                    let mut cfg = ExperimentConfig::reference(example_id, eps, prior, seed)?;
                    cfg.sampler.mode = opts.mode;
                    cfg.sampler.n_samples = opts.n_samples;
                    if let Some(beta) = opts.beta {
                        cfg.sampler.beta = beta;
                        cfg.sampler.warmup_beta = Some(beta);
                    }
                    cfg.out_dir = opts.out_dir.join(format!(
                        "example{}/eps{}/{}/seed{}",
                        example_id,
                        eps,
                        prior.label(),
                        seed
                    ));
                    configs.push(cfg);
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let rows: Result<Vec<ErrorTableRow>> = pool.install(|| {
        use rayon::prelude::*;
        configs
            .par_iter()
            .map(|cfg| run_experiment(cfg).map(|out| out.row))
            .collect()
    });
    let rows = rows?;

    // group rows back into cells (configs were generated in a fixed order)
    let per_cell = seeds.len();
    let mut cells = Vec::new();
    for chunk in rows.chunks(per_cell) {
        let mean_e_r = chunk.iter().map(|r| r.e_r).sum::<f64>() / chunk.len() as f64;
        let lambda_hats: Vec<f64> = chunk.iter().filter_map(|r| r.lambda_hat).collect();
        let mean_lambda_hat = if lambda_hats.len() == chunk.len() {
            Some(lambda_hats.iter().sum::<f64>() / lambda_hats.len() as f64)
        } else {
            None
        };
        cells.push(TableCell {
            example_id: chunk[0].example_id,
            epsilon: chunk[0].epsilon,
            prior: chunk[0].prior,
            per_seed: chunk.to_vec(),
            mean_e_r,
            mean_lambda_hat,
        });
    }

    std::fs::create_dir_all(&opts.out_dir)?;
    for &example_id in which {
        let mut csv = String::from("epsilon,prior,seed,lambda_hat,e_r,acceptance_rate\n");
        for cell in cells.iter().filter(|c| c.example_id == example_id) {
            for (row, &seed) in cell.per_seed.iter().zip(seeds) {
                let lambda = row
                    .lambda_hat
                    .map(|l| format!("{l}"))
                    .unwrap_or_else(|| "/".into());
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    cell.epsilon, cell.prior, seed, lambda, row.e_r, row.acceptance_rate
                );
            }
            let lambda = cell
                .mean_lambda_hat
                .map(|l| format!("{l}"))
                .unwrap_or_else(|| "/".into());
            let mean_acc = cell.per_seed.iter().map(|r| r.acceptance_rate).sum::<f64>()
                / cell.per_seed.len() as f64;
            let _ = writeln!(
                csv,
                "{},{},avg,{},{},{}",
                cell.epsilon, cell.prior, lambda, cell.mean_e_r, mean_acc
            );
        }
        write_atomic(
            &opts.out_dir.join(format!("table_example{example_id}.csv")),
            &csv,
        )?;
    }
    Ok(cells)
}

/// One row of the manufactured-solution convergence report.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub example_id: u8,
    pub coarse_error: f64,
    pub fine_error: f64,
    pub order: f64,
}

/// Solve each example with its exact Robin path on the reference grid and
/// once refined 2x in space and time; report max relative nodal errors and
/// the observed order.
pub fn forward_convergence_report() -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for id in 1..=3u8 {
        let (spec_c, exact_c) = example_spec_on(id, 100, 200)?;
        let field_c = solve_forward_field(&spec_c, &exact_c.gamma_exact)?;
        let coarse_error = max_relative_field_error(&field_c, &spec_c, &exact_c.u_exact);
        let (spec_f, exact_f) = example_spec_on(id, 200, 400)?;
        let field_f = solve_forward_field(&spec_f, &exact_f.gamma_exact)?;
        let fine_error = max_relative_field_error(&field_f, &spec_f, &exact_f.u_exact);
        rows.push(ConvergenceRow {
            example_id: id,
            coarse_error,
            fine_error,
            order: (coarse_error / fine_error).log2(),
        });
    }
    Ok(rows)
}
