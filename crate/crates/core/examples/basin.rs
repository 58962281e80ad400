use rayon::prelude::*;
use robin_inverse::forward::*;
use robin_inverse::harness::*;
use robin_inverse::priors::*;
use robin_inverse::sampler::*;
use robin_inverse::topology::PhWeightParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chain_from_truth(prior: PriorModel, beta: f64, lambda0: f64, n: usize) -> String {
    let (spec, exact) = example_spec(3).unwrap();
    let solver = ForwardSolver::new(&spec);
    let trace = solver.solve_trace(&exact.gamma_exact).unwrap();
    let obs = generate_observations(&trace, 0.05, 1);
    let y = BoundaryTrace { values: obs.y.clone() };
    let (sigma, _) = resolve_sigma(0.05, None, &obs.y).unwrap();
    let noise = NoiseModel { sigma };
    let cov = build_covariance(&spec.time, 0.03, 0.31623, 1e-10).unwrap();
    let hyper = HyperPrior { m1: 200.0, m2: 0.1 };
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    let mut gamma = exact.gamma_exact.clone();
    let mut phi = misfit(&gamma, &y, &noise, &spec).unwrap();
    let mut reg = regularizer(&prior, &gamma);
    let mut lambda = lambda0;
    let mut checkpoints = String::new();
    let mut mean = vec![0.0; gamma.len()];
    let mut reg_acc = 0.0;
    let mut kept = 0usize;
    for it in 1..=n {
        let prop = pcn_propose(&gamma, beta, &cov, &mut rng);
        let prop_phi = misfit(&prop, &y, &noise, &spec).unwrap();
        let prop_reg = regularizer(&prior, &prop);
        let d = accept_step(prop_phi + lambda * prop_reg, phi + lambda * reg, &mut rng);
        if d.accepted {
            gamma = prop;
            phi = prop_phi;
            reg = prop_reg;
        }
        lambda = gibbs_lambda(reg, &hyper, &mut rng);
        if it > n / 2 {
            kept += 1;
            reg_acc += reg;
            for (a, &v) in mean.iter_mut().zip(&gamma.values) { *a += v; }
        }
        if it % (n / 4) == 0 {
            let e = relative_error(&gamma, &exact.gamma_exact).unwrap();
            checkpoints.push_str(&format!(" e@{}k={:.3}", it / 1000, e));
        }
    }
    for a in mean.iter_mut() { *a /= kept as f64; }
    let e_mean = relative_error(&RobinPath::new(mean), &exact.gamma_exact).unwrap();
    let mean_reg = reg_acc / kept as f64;
    format!(
        "{:18} beta {:4}: e_r(mean) {:.4}  lambda_eq {:7.2}  mean_reg {:.3} |{}",
        format!("{}", prior.label()), beta, e_mean, 200.0 / (0.1 + mean_reg), mean_reg, checkpoints
    )
}

fn main() {
    let jobs: Vec<(PriorModel, f64, f64)> = vec![
        (PriorModel::TvGaussian, 0.05, 174.0),
        (PriorModel::TvGaussian, 0.1, 174.0),
        (PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 }), 0.05, 58.0),
        (PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 }), 0.1, 58.0),
        (PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 10.0 }), 0.05, 58.0),
        (PriorModel::Gaussian, 0.05, 1.0),
    ];
    let out: Vec<String> = jobs.par_iter().map(|&(p, b, l0)| chain_from_truth(p, b, l0, 100_000)).collect();
    for line in out { println!("{line}"); }
}
