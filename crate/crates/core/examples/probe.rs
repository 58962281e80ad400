use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::topology::PhWeightParams;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let example_id: u8 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1);
    let eps: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.01);
    let n: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(100_000);
    let seed: u64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(1);

    for prior in [
        PriorModel::Gaussian,
        PriorModel::TvGaussian,
        PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 }),
    ] {
        let mut cfg = ExperimentConfig::reference(example_id, eps, prior, seed).unwrap();
        cfg.sampler.n_samples = n;
        cfg.out_dir = std::env::temp_dir().join(format!("probe_{}_{}", prior.label(), seed));
        let t0 = Instant::now();
        let out = run_experiment(&cfg).unwrap();
        let lam = out.row.lambda_hat.map(|l| format!("{l:.3}")).unwrap_or("/".into());
        // band coverage of the truth
        let covered = out.gamma_true.values.iter().enumerate()
            .filter(|(i, &g)| out.result.band_lo.values[*i] <= g && g <= out.result.band_hi.values[*i])
            .count();
        println!(
            "ex{} eps {} {:12} seed {}: e_r {:.4}  lambda {}  acc {:.3}  mean_reg {:.3}  cover {}/{}  [{:.0?}]",
            example_id, eps, prior.label(), seed, out.row.e_r, lam,
            out.row.acceptance_rate, out.result.mean_reg,
            covered, out.gamma_true.values.len(), t0.elapsed()
        );
    }
}
