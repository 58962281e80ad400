use robin_inverse::forward::RobinPath;
use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::sampler::relative_error;
use robin_inverse::topology::PhWeightParams;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let example_id: u8 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1);
    let eps: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let n: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(100_000);
    let beta: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.02);

    for prior in [
        PriorModel::Gaussian,
        PriorModel::TvGaussian,
        PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 }),
    ] {
        let mut cfg = ExperimentConfig::reference(example_id, eps, prior, 1).unwrap();
        cfg.sampler.n_samples = n;
        cfg.sampler.beta = beta;
        cfg.out_dir = std::env::temp_dir().join(format!("tr_{}_{}", prior.label(), beta));
        let out = run_experiment(&cfg).unwrap();
        // mean over the last half of the kept window
        let kept = &out.result.kept_samples;
        let half = &kept[kept.len() / 2..];
        let dim = out.gamma_true.values.len();
        let mut tail_mean = vec![0.0; dim];
        for s in half {
            for (a, &v) in tail_mean.iter_mut().zip(&s.values) {
                *a += v;
            }
        }
        for a in tail_mean.iter_mut() {
            *a /= half.len() as f64;
        }
        let tail_e = relative_error(&RobinPath::new(tail_mean), &out.gamma_true).unwrap();
        let last_e = relative_error(kept.last().unwrap(), &out.gamma_true).unwrap();
        let lam = out.row.lambda_hat.map(|l| format!("{l:8.3}")).unwrap_or(format!("{:>8}", "/"));
        println!(
            "{:12}: e_r {:.4}  tail_e {:.4}  last_e {:.4}  lambda {}  acc {:.3}",
            prior.label(), out.row.e_r, tail_e, last_e, lam, out.row.acceptance_rate
        );
    }
}
