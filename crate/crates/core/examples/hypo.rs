use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::topology::PhWeightParams;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let example_id: u8 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1);
    let eps: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let n: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(100_000);
    let beta: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.02);
    let amplitude: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(0.1);
    let sigma: Option<f64> = args.get(6).map(|s| s.parse().unwrap());

    for prior in [
        PriorModel::Gaussian,
        PriorModel::TvGaussian,
        PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 }),
    ] {
        let mut cfg = ExperimentConfig::reference(example_id, eps, prior, 1).unwrap();
        cfg.sampler.n_samples = n;
        cfg.sampler.beta = beta;
        cfg.amplitude = amplitude;
        cfg.sigma_override = sigma;
        cfg.out_dir = std::env::temp_dir().join(format!("hy_{}_{}", prior.label(), amplitude));
        let out = run_experiment(&cfg).unwrap();
        let lam = out.row.lambda_hat.map(|l| format!("{l:8.3}")).unwrap_or(format!("{:>8}", "/"));
        let covered = out.gamma_true.values.iter().enumerate()
            .filter(|(i, &g)| out.result.band_lo.values[*i] <= g && g <= out.result.band_hi.values[*i])
            .count();
        println!(
            "{:12}: e_r {:.4}  lambda {}  acc {:.3}  mean_reg {:8.3}  cover {}/201",
            prior.label(), out.row.e_r, lam, out.row.acceptance_rate, out.result.mean_reg, covered
        );
    }
}
