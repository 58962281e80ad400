use rayon::prelude::*;
use robin_inverse::forward::RobinPath;
use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::sampler::relative_error;
use robin_inverse::topology::PhWeightParams;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(100_000);
    let seed: u64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1);
    let mut jobs = Vec::new();
    for amplitude in [0.1, 0.31623] {
        for beta in [0.01, 0.02, 0.05] {
            for prior in [
                PriorModel::Gaussian,
                PriorModel::TvGaussian,
                PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 }),
            ] {
                jobs.push((amplitude, beta, prior));
            }
        }
    }
    let results: Vec<String> = jobs
        .par_iter()
        .map(|&(amplitude, beta, prior)| {
            let mut cfg = ExperimentConfig::reference(3, 0.05, prior, seed).unwrap();
            cfg.sampler.n_samples = n;
            cfg.sampler.beta = beta;
            cfg.amplitude = amplitude;
            cfg.out_dir = std::env::temp_dir().join(format!("e3f_{}_{}_{}", prior.label(), amplitude, beta));
            let out = run_experiment(&cfg).unwrap();
            let kept = &out.result.kept_samples;
            let half = &kept[kept.len() / 2..];
            let dim = out.gamma_true.values.len();
            let mut tail_mean = vec![0.0; dim];
            for s in half {
                for (a, &v) in tail_mean.iter_mut().zip(&s.values) { *a += v; }
            }
            for a in tail_mean.iter_mut() { *a /= half.len() as f64; }
            let tail_e = relative_error(&RobinPath::new(tail_mean), &out.gamma_true).unwrap();
            let lam = out.row.lambda_hat.map(|l| format!("{l:8.2}")).unwrap_or(format!("{:>8}", "/"));
            format!(
                "amp {:7} beta {:5} {:12}: e_r {:.4}  tail_e {:.4}  lambda {}  acc {:.3}  mean_reg {:8.3}",
                amplitude, beta, prior.label(), out.row.e_r, tail_e, lam, out.row.acceptance_rate, out.result.mean_reg
            )
        })
        .collect();
    for r in results { println!("{r}"); }
}
