use rayon::prelude::*;
use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::topology::PhWeightParams;

fn main() {
    let mut jobs = Vec::new();
    for (li, b2) in [(50.0, 0.003), (50.0, 0.002), (100.0, 0.003)] {
        for prior in [PriorModel::TvGaussian, PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: REFERENCE_ETA_W })] {
            for seed in [1u64, 2, 3] {
                jobs.push((li, b2, prior, seed));
            }
        }
    }
    let mut results: Vec<String> = jobs
        .par_iter()
        .map(|&(li, b2, prior, seed)| {
            let mut cfg = ExperimentConfig::reference(3, 0.05, prior, seed).unwrap();
            cfg.sampler.lambda_init = li;
            cfg.sampler.beta = b2;
            cfg.sampler.warmup_beta = Some(0.05);
            cfg.out_dir = std::env::temp_dir().join(format!("e3fin_{}_{}_{}_{}", prior.label(), li, b2, seed));
            let out = run_experiment(&cfg).unwrap();
            let covered = out.gamma_true.values.iter().enumerate()
                .filter(|(i, &g)| out.result.band_lo.values[*i] <= g && g <= out.result.band_hi.values[*i])
                .count();
            let lam = out.row.lambda_hat.map(|l| format!("{l:8.2}")).unwrap_or(format!("{:>8}", "/"));
            format!(
                "li {:5} b2 {:5} {:12} seed {}: e_r {:.4}  lambda {}  mean_reg {:6.3}  acc {:.3}  cover {}/201",
                li, b2, prior.label(), seed, out.row.e_r, lam, out.result.mean_reg, out.row.acceptance_rate, covered
            )
        })
        .collect();
    results.sort();
    for r in results { println!("{r}"); }
}
