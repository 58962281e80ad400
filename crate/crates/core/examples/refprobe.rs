use rayon::prelude::*;
use robin_inverse::harness::*;
use robin_inverse::priors::PriorModel;
use robin_inverse::topology::PhWeightParams;

fn main() {
    let mut jobs = Vec::new();
    for prior in [
        PriorModel::Gaussian,
        PriorModel::TvGaussian,
        PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: REFERENCE_ETA_W }),
    ] {
        for seed in [1u64, 2, 3] {
            jobs.push((1u8, 0.01, prior, seed));
            jobs.push((3u8, 0.05, prior, seed));
        }
    }
    let mut results: Vec<(u8, String, u64, f64, Option<f64>, f64, f64, usize)> = jobs
        .par_iter()
        .map(|&(ex, eps, prior, seed)| {
            let mut cfg = ExperimentConfig::reference(ex, eps, prior, seed).unwrap();
            cfg.out_dir = std::env::temp_dir().join(format!("ref_{}_{}_{}", ex, prior.label(), seed));
            let out = run_experiment(&cfg).unwrap();
            let covered = out.gamma_true.values.iter().enumerate()
                .filter(|(i, &g)| out.result.band_lo.values[*i] <= g && g <= out.result.band_hi.values[*i])
                .count();
            (ex, prior.label().to_string(), seed, out.row.e_r, out.row.lambda_hat,
             out.result.mean_reg, out.row.acceptance_rate, covered)
        })
        .collect();
    results.sort_by(|a, b| (a.0, &a.1, a.2).cmp(&(b.0, &b.1, b.2)));
    for (ex, prior, seed, e_r, lam, mreg, acc, cover) in &results {
        let lam_s = lam.map(|l| format!("{l:8.2}")).unwrap_or(format!("{:>8}", "/"));
        println!("ex{ex} {prior:12} seed {seed}: e_r {e_r:.4}  lambda {lam_s}  mean_reg {mreg:7.3}  acc {acc:.3}  cover {cover}/201");
    }
    // seed averages
    for ex in [1u8, 3] {
        for prior in ["gaussian", "tv-gaussian", "ph-gaussian"] {
            let sel: Vec<_> = results.iter().filter(|r| r.0 == ex && r.1 == prior).collect();
            let e: f64 = sel.iter().map(|r| r.3).sum::<f64>() / sel.len() as f64;
            let lam: Option<f64> = sel[0].4.map(|_| sel.iter().map(|r| r.4.unwrap()).sum::<f64>() / sel.len() as f64);
            let lam_s = lam.map(|l| format!("{l:8.2}")).unwrap_or(format!("{:>8}", "/"));
            println!("AVG ex{ex} {prior:12}: e_r {e:.4}  lambda {lam_s}");
        }
    }
}
