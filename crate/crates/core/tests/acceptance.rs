//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! The two reconstruction criteria share one set of full-length chains
//! (Example 1 at 1% noise and Example 3 at 5% noise, three priors, three
//! seeds each), run once behind a lazy static and summarized immediately so
//! the sample storage is dropped.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use robin_inverse::forward::{BoundaryTrace, ProblemSpec};
use robin_inverse::grid::{SpaceGrid, TimeGrid};
use robin_inverse::harness::{
    self, forward_convergence_report, phcheck, ExperimentConfig, TABLE_NOISE_LEVELS,
};
use robin_inverse::priors::{build_covariance, PriorModel};
use robin_inverse::sampler::{
    gibbs_lambda, run_chain, AcceptanceMode, HyperPrior, NoiseModel, SamplerConfig,
};
use robin_inverse::topology::PhWeightParams;

const SEEDS: [u64; 3] = [1, 2, 3];

fn ph_prior() -> PriorModel {
    PriorModel::PhGaussian(PhWeightParams {
        tau: 3.0,
        eta_w: harness::REFERENCE_ETA_W,
    })
}

/// Everything a criterion needs from one finished chain; the samples
/// themselves are dropped inside the worker.
#[derive(Debug, Clone)]
struct SlimRun {
    example_id: u8,
    prior: &'static str,
    seed: u64,
    e_r: f64,
    lambda_hat: Option<f64>,
    mean_reg: f64,
    m1: f64,
    m2: f64,
    /// Fraction of time nodes where the exact path lies inside the
    /// pointwise 95% band.
    coverage: f64,
}

fn run_slim(example_id: u8, epsilon: f64, prior: PriorModel, seed: u64) -> SlimRun {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut cfg = ExperimentConfig::reference(example_id, epsilon, prior, seed).unwrap();
    cfg.out_dir = dir.path().to_path_buf();
    let out = harness::run_experiment(&cfg).expect("experiment");
    let n = out.gamma_true.values.len();
    let covered = out
        .gamma_true
        .values
        .iter()
        .enumerate()
        .filter(|(i, &g)| {
            out.result.band_lo.values[*i] <= g && g <= out.result.band_hi.values[*i]
        })
        .count();
    SlimRun {
        example_id,
        prior: out.row.prior,
        seed,
        e_r: out.row.e_r,
        lambda_hat: out.row.lambda_hat,
        mean_reg: out.result.mean_reg,
        m1: cfg.hyper.m1,
        m2: cfg.hyper.m2,
        coverage: covered as f64 / n as f64,
    }
}

fn shared_runs() -> &'static Vec<SlimRun> {
    static RUNS: OnceLock<Vec<SlimRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut jobs = Vec::new();
        for prior in [PriorModel::Gaussian, PriorModel::TvGaussian, ph_prior()] {
            for &seed in &SEEDS {
                jobs.push((1u8, 0.01, prior, seed));
                jobs.push((3u8, 0.05, prior, seed));
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(2)
            .build()
            .unwrap();
        pool.install(|| {
            use rayon::prelude::*;
            jobs.par_iter()
                .map(|&(ex, eps, prior, seed)| run_slim(ex, eps, prior, seed))
                .collect()
        })
    })
}

fn seed_avg(runs: &[SlimRun], example_id: u8, prior: &str, f: impl Fn(&SlimRun) -> f64) -> f64 {
    let vals: Vec<f64> = runs
        .iter()
        .filter(|r| r.example_id == example_id && r.prior == prior)
        .map(f)
        .collect();
    assert_eq!(vals.len(), SEEDS.len());
    vals.iter().sum::<f64>() / vals.len() as f64
}

#[test]
fn criterion_1_forward_solver_accuracy() {
    let start = Instant::now();
    let rows = forward_convergence_report().unwrap();
    let elapsed = start.elapsed();
    let mut ok = elapsed.as_secs_f64() < 5.0;
    for row in &rows {
        ok &= row.coarse_error <= 1e-2 && row.order >= 1.8;
    }
    println!(
        "criterion 1 (forward accuracy + order): {} — errors {:?}, orders {:?}, {:.2}s",
        if ok { "PASS" } else { "FAIL" },
        rows.iter().map(|r| r.coarse_error).collect::<Vec<_>>(),
        rows.iter().map(|r| r.order).collect::<Vec<_>>(),
        elapsed.as_secs_f64()
    );
    assert!(ok);
}

#[test]
fn criterion_2_persistence_correctness() {
    let start = Instant::now();
    let oracle = phcheck::exhaustive_oracle_comparison(&[0.0, 1.0, 2.0, 3.0], 8);
    let tv_dev = phcheck::tv_identity_max_deviation(1000, 2024);
    let elapsed = start.elapsed();
    let ok = oracle.is_ok() && tv_dev <= 1e-12 && elapsed.as_secs_f64() < 10.0;
    println!(
        "criterion 2 (persistence oracle + TV identity): {} — {} sequences, max TV deviation {:.2e}, {:.2}s",
        if ok { "PASS" } else { "FAIL" },
        oracle.as_ref().map(|n| *n).unwrap_or(0),
        tv_dev,
        elapsed.as_secs_f64()
    );
    if let Err(m) = oracle {
        panic!("oracle mismatch: {m}");
    }
    assert!(ok);
}

#[test]
fn criterion_3_gibbs_and_pcn_distributions() {
    let start = Instant::now();

    // Gibbs conditional with R = 0 reduces to Gamma(m1, m2)
    let hyper = HyperPrior { m1: 50.0, m2: 0.1 };
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| gibbs_lambda(0.0, &hyper, &mut rng))
        .collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|&l| (l - mean) * (l - mean)).sum::<f64>() / (n - 1.0);
    let expect_mean = 500.0;
    let expect_var = 50.0 / (0.1 * 0.1);
    let gibbs_ok =
        (mean - expect_mean).abs() <= 0.01 * expect_mean && (var - expect_var).abs() <= 0.01 * expect_var;

    // zero data makes the misfit vanish for every path, so the chain must
    // preserve the reference measure; KS on thinned samples at each node
    let spec = ProblemSpec {
        conductivity: Box::new(|_| 1.0),
        source: Box::new(|_, _| 0.0),
        flux_left: Box::new(|_| 0.0),
        robin_rhs: Box::new(|_| 0.0),
        initial: Box::new(|_| 0.0),
        space: SpaceGrid::uniform(4).unwrap(),
        time: TimeGrid::uniform(12).unwrap(),
    };
    let y = BoundaryTrace {
        values: vec![0.0; 12],
    };
    let cov = build_covariance(&spec.time, 0.25, 0.1, 1e-10).unwrap();
    let thin = 21usize;
    let target = 10_000usize;
    let total = (thin * target) * 10 / 7 + 1000;
    let config = SamplerConfig {
        n_samples: total,
        beta: 0.5,
        burn_in_fraction: 0.3,
        lambda_init: 1.0,
        lambda_warmup_fraction: 0.0,
        warmup_beta: None,
        mode: AcceptanceMode::StandardPcn,
        seed: 1618,
    };
    let result = run_chain(
        &spec,
        &y,
        &cov,
        &PriorModel::Gaussian,
        &NoiseModel { sigma: 1.0 },
        &hyper,
        &config,
    )
    .unwrap();
    let thinned: Vec<&robin_inverse::forward::RobinPath> =
        result.kept_samples.iter().step_by(thin).take(target).collect();
    assert_eq!(thinned.len(), target);

    // two-sided KS against N(0, C_ii) at the 1% level
    let crit = 1.628 / (target as f64).sqrt();
    let mut worst_d: f64 = 0.0;
    for i in 0..cov.dim() {
        let mut xs: Vec<f64> = thinned.iter().map(|s| s.values[i]).collect();
        xs.sort_by(f64::total_cmp);
        let normal = Normal::new(0.0, cov.matrix()[(i, i)].sqrt()).unwrap();
        let m = xs.len() as f64;
        let mut d: f64 = 0.0;
        for (k, &x) in xs.iter().enumerate() {
            let cdf = normal.cdf(x);
            d = d.max(((k + 1) as f64 / m - cdf).abs());
            d = d.max((cdf - k as f64 / m).abs());
        }
        worst_d = worst_d.max(d);
    }
    let ks_ok = worst_d < crit;

    let elapsed = start.elapsed();
    let ok = gibbs_ok && ks_ok && elapsed.as_secs_f64() < 30.0;
    println!(
        "criterion 3 (Gibbs conditional + pCN invariance): {} — Gamma mean {:.2}/{expect_mean}, \
         var {:.1}/{expect_var}, worst KS {:.4} (crit {:.4}), {:.2}s",
        if ok { "PASS" } else { "FAIL" },
        mean,
        var,
        worst_d,
        crit,
        elapsed.as_secs_f64()
    );
    assert!(ok);
}

#[test]
fn criterion_4_example1_table_row() {
    let runs = shared_runs();
    let g = seed_avg(runs, 1, "gaussian", |r| r.e_r);
    let tv = seed_avg(runs, 1, "tv-gaussian", |r| r.e_r);
    let ph = seed_avg(runs, 1, "ph-gaussian", |r| r.e_r);
    let g_band = (0.015..=0.065).contains(&g);
    let tv_band = (0.006..=0.026).contains(&tv);
    let ph_band = (0.003..=0.013).contains(&ph);
    let ordering = ph <= tv && tv <= g;
    let ok = g_band && tv_band && ph_band && ordering;
    println!(
        "criterion 4 (smooth-case table row): {} — seed-averaged e_r: \
         Gaussian {:.4} in [0.015,0.065] {}; TV {:.4} in [0.006,0.026] {}; \
         PH {:.4} in [0.003,0.013] {}; ordering PH<=TV<=G {}",
        if ok { "PASS" } else { "FAIL" },
        g,
        if g_band { "ok" } else { "out" },
        tv,
        if tv_band { "ok" } else { "out" },
        ph,
        if ph_band { "ok" } else { "out" },
        if ordering { "ok" } else { "violated" },
    );
    assert!(ok);
}

#[test]
fn criterion_5_example3_discontinuous() {
    let runs = shared_runs();
    let g = seed_avg(runs, 3, "gaussian", |r| r.e_r);
    let tv = seed_avg(runs, 3, "tv-gaussian", |r| r.e_r);
    let ph = seed_avg(runs, 3, "ph-gaussian", |r| r.e_r);
    let lam_tv = seed_avg(runs, 3, "tv-gaussian", |r| r.lambda_hat.unwrap());
    let lam_ph = seed_avg(runs, 3, "ph-gaussian", |r| r.lambda_hat.unwrap());
    let ordering = ph < tv && tv < g;
    let ph_band = ph <= 0.37;
    let lam_ph_band = (25.0..=120.0).contains(&lam_ph);
    let lam_tv_band = (85.0..=350.0).contains(&lam_tv);
    let ok = ordering && ph_band && lam_ph_band && lam_tv_band;
    println!(
        "criterion 5 (discontinuous case): {} — e_r G {:.4} TV {:.4} PH {:.4} (order {}), \
         lambda TV {:.1} in [85,350] {}, lambda PH {:.1} in [25,120] {}",
        if ok { "PASS" } else { "FAIL" },
        g,
        tv,
        ph,
        if ordering { "ok" } else { "violated" },
        lam_tv,
        if lam_tv_band { "ok" } else { "out" },
        lam_ph,
        if lam_ph_band { "ok" } else { "out" },
    );
    assert!(ok);
}

#[test]
fn criterion_6_lambda_back_consistency() {
    let runs = shared_runs();
    let mut ok = true;
    let mut worst = 0.0f64;
    for r in runs.iter().filter(|r| r.lambda_hat.is_some()) {
        let lambda_hat = r.lambda_hat.unwrap();
        let predicted = r.m1 / (r.m2 + r.mean_reg);
        let rel = (lambda_hat - predicted).abs() / lambda_hat;
        worst = worst.max(rel);
        if rel > 0.15 {
            ok = false;
            println!(
                "  run ex{} {} seed {}: lambda_hat {:.2} vs m1/(m2+mean_reg) {:.2} (rel {:.3})",
                r.example_id, r.prior, r.seed, lambda_hat, predicted, rel
            );
        }
    }
    println!(
        "criterion 6 (lambda back-consistency): {} — worst relative gap {:.3} (limit 0.15)",
        if ok { "PASS" } else { "FAIL" },
        worst
    );
    assert!(ok);
}

#[test]
fn criterion_7_credible_band_coverage() {
    let runs = shared_runs();
    let cov = runs
        .iter()
        .filter(|r| r.example_id == 1 && r.prior == "ph-gaussian")
        .map(|r| r.coverage)
        .collect::<Vec<_>>();
    let avg = cov.iter().sum::<f64>() / cov.len() as f64;
    let ok = avg >= 0.85;
    println!(
        "criterion 7 (credible band coverage): {} — exact path inside the 95% band at {:.1}% of nodes (per seed {:?})",
        if ok { "PASS" } else { "FAIL" },
        avg * 100.0,
        cov.iter().map(|c| (c * 1000.0).round() / 10.0).collect::<Vec<_>>()
    );
    assert!(ok);
}

#[test]
fn criterion_8_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::reference(1, 0.01, ph_prior(), 77).unwrap();
    cfg.sampler.n_samples = 2_000;
    cfg.out_dir = dir.path().join("first");
    harness::run_experiment(&cfg).unwrap();
    let mut cfg2 = cfg.clone();
    cfg2.out_dir = dir.path().join("second");
    harness::run_experiment(&cfg2).unwrap();

    let mut ok = true;
    for name in [
        "posterior_mean.csv",
        "lambda_trace.csv",
        "lambda_histogram.csv",
        "summary.csv",
        "metadata.txt",
    ] {
        let a = std::fs::read(cfg.out_dir.join(name)).unwrap();
        let b = std::fs::read(cfg2.out_dir.join(name)).unwrap();
        if a != b {
            ok = false;
            println!("  {name} differs between reruns");
        }
    }
    // wall time is recorded separately, outside the deterministic set
    ok &= cfg.out_dir.join("timing.txt").exists();
    println!(
        "criterion 8 (determinism): {} — identical config and seed reproduce all outputs byte for byte",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
    let _ = TABLE_NOISE_LEVELS;
}
