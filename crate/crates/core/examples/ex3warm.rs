use rayon::prelude::*;
use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::topology::PhWeightParams;

fn main() {
    let mut jobs: Vec<(f64, PriorModel, &str)> = Vec::new();
    for beta in [0.05, 0.1, 0.2] {
        jobs.push((beta, PriorModel::Gaussian, "g"));
        jobs.push((beta, PriorModel::TvGaussian, "tv"));
        jobs.push((beta, PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 }), "ph1"));
        jobs.push((beta, PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 10.0 }), "ph10"));
    }
    let results: Vec<String> = jobs
        .par_iter()
        .map(|&(beta, prior, tag)| {
            let mut cfg = ExperimentConfig::reference(3, 0.05, prior, 1).unwrap();
            cfg.sampler.n_samples = 100_000;
            cfg.sampler.beta = beta;
            cfg.amplitude = 0.31623;
            cfg.sampler.lambda_warmup_fraction = 0.5;
            cfg.sampler.burn_in_fraction = 0.5;
            cfg.out_dir = std::env::temp_dir().join(format!("e3w_{tag}_{beta}"));
            let out = run_experiment(&cfg).unwrap();
            let lam = out.row.lambda_hat.map(|l| format!("{l:8.2}")).unwrap_or(format!("{:>8}", "/"));
            format!(
                "beta {:4} {:4}: e_r {:.4}  lambda {}  acc {:.3}  mean_reg {:8.3}",
                beta, tag, out.row.e_r, lam, out.row.acceptance_rate, out.result.mean_reg
            )
        })
        .collect();
    for r in results { println!("{r}"); }
}
