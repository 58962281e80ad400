use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::topology::PhWeightParams;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(30_000);
    for amplitude in [0.1, 0.31623] {
        for beta in [0.01, 0.02, 0.05] {
            for prior in [
                PriorModel::Gaussian,
                PriorModel::TvGaussian,
                PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 }),
            ] {
                let mut cfg = ExperimentConfig::reference(3, 0.05, prior, 1).unwrap();
                cfg.sampler.n_samples = n;
                cfg.sampler.beta = beta;
                cfg.amplitude = amplitude;
                cfg.out_dir = std::env::temp_dir().join(format!("e3_{}_{}_{}", prior.label(), amplitude, beta));
                let out = run_experiment(&cfg).unwrap();
                let lam = out.row.lambda_hat.map(|l| format!("{l:8.2}")).unwrap_or(format!("{:>8}", "/"));
                println!(
                    "amp {:7} beta {:5} {:12}: e_r {:.4}  lambda {}  acc {:.3}  mean_reg {:8.3}",
                    amplitude, beta, prior.label(), out.row.e_r, lam, out.row.acceptance_rate, out.result.mean_reg
                );
            }
        }
        println!();
    }
}
