use rayon::prelude::*;
use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::topology::PhWeightParams;

fn main() {
    let mut jobs = Vec::new();
    for amplitude in [0.1, 0.31623] {
        for beta in [0.1, 0.2] {
            for prior in [PriorModel::TvGaussian, PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 })] {
                jobs.push((amplitude, beta, prior, 100_000usize));
            }
        }
    }
    jobs.push((0.1, 0.05, PriorModel::TvGaussian, 400_000));
    let results: Vec<String> = jobs
        .par_iter()
        .map(|&(amplitude, beta, prior, n)| {
            let mut cfg = ExperimentConfig::reference(3, 0.05, prior, 1).unwrap();
            cfg.sampler.n_samples = n;
            cfg.sampler.beta = beta;
            cfg.amplitude = amplitude;
            cfg.out_dir = std::env::temp_dir().join(format!("e3p_{}_{}_{}_{}", prior.label(), amplitude, beta, n));
            let out = run_experiment(&cfg).unwrap();
            let lam = out.row.lambda_hat.map(|l| format!("{l:8.2}")).unwrap_or(format!("{:>8}", "/"));
            format!(
                "amp {:7} beta {:4} n {:6} {:12}: e_r {:.4}  lambda {}  acc {:.3}  mean_reg {:8.3}",
                amplitude, beta, n, prior.label(), out.row.e_r, lam, out.row.acceptance_rate, out.result.mean_reg
            )
        })
        .collect();
    for r in results { println!("{r}"); }
}
