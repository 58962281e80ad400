use rayon::prelude::*;
use robin_inverse::forward::*;
use robin_inverse::harness::*;
use robin_inverse::priors::*;
use robin_inverse::sampler::*;
use robin_inverse::topology::PhWeightParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chain(prior: PriorModel, beta: f64, noise_scale: f64, n: usize, tag: &str) -> String {
    let (spec, exact) = example_spec(3).unwrap();
    let solver = ForwardSolver::new(&spec);
    let trace = solver.solve_trace(&exact.gamma_exact).unwrap();
    let obs = generate_observations(&trace, 0.05, 1);
    let y = BoundaryTrace { values: obs.y.clone() };
    let (sigma, _) = resolve_sigma(0.05, None, &obs.y).unwrap();
    let noise = NoiseModel { sigma };
    let cov = build_covariance(&spec.time, 0.03, 0.31623, 1e-10).unwrap();
    let hyper = HyperPrior { m1: 200.0, m2: 0.1 };
    let mut rng = ChaCha8Rng::seed_from_u64(1234);

    // start: truth plus a scaled rough draw, like the end of a Gaussian phase
    let draw = cov.sample(&mut rng);
    let mut gamma = RobinPath::new(
        exact.gamma_exact.values.iter().zip(&draw.values).map(|(&g, &d)| g + noise_scale * d).collect(),
    );
    let mut phi = misfit(&gamma, &y, &noise, &spec).unwrap();
    let mut reg = regularizer(&prior, &gamma);
    let mut lambda = 200.0 / (0.1 + reg);
    let mut checkpoints = String::new();
    let mut mean = vec![0.0; gamma.len()];
    let mut lam_acc = 0.0;
    let mut reg_acc = 0.0;
    let mut kept = 0usize;
    for it in 1..=n {
        let prop = pcn_propose(&gamma, beta, &cov, &mut rng);
        let prop_phi = misfit(&prop, &y, &noise, &spec).unwrap();
        let prop_reg = regularizer(&prior, &prop);
        let d = accept_step(prop_phi + lambda * prop_reg, phi + lambda * reg, &mut rng);
        if d.accepted { gamma = prop; phi = prop_phi; reg = prop_reg; }
        lambda = gibbs_lambda(reg, &hyper, &mut rng);
        if it > n / 2 {
            kept += 1;
            lam_acc += lambda;
            reg_acc += reg;
            for (a, &v) in mean.iter_mut().zip(&gamma.values) { *a += v; }
        }
        if it % (n / 5) == 0 {
            let e = relative_error(&gamma, &exact.gamma_exact).unwrap();
            checkpoints.push_str(&format!(" ({}k: e{:.2} L{:.0} R{:.2})", it / 1000, e, lambda, reg));
        }
    }
    for a in mean.iter_mut() { *a /= kept as f64; }
    let e_mean = relative_error(&RobinPath::new(mean), &exact.gamma_exact).unwrap();
    format!(
        "{tag:18} beta {beta:5} ns {noise_scale:3}: e_r(mean) {:.4}  lam_hat {:7.1}  mean_reg {:.3} |{}",
        e_mean, lam_acc / kept as f64, reg_acc / kept as f64, checkpoints
    )
}

fn main() {
    let tv = PriorModel::TvGaussian;
    let ph = PriorModel::PhGaussian(PhWeightParams { tau: 3.0, eta_w: 1.0 });
    let jobs: Vec<(PriorModel, f64, f64, &str)> = vec![
        (tv, 0.003, 0.3, "tv"),
        (tv, 0.005, 0.3, "tv"),
        (tv, 0.01, 0.3, "tv"),
        (ph, 0.005, 0.3, "ph"),
        (ph, 0.01, 0.3, "ph"),
        (tv, 0.005, 1.0, "tv-rough"),
        (ph, 0.005, 1.0, "ph-rough"),
    ];
    let out: Vec<String> = jobs.par_iter().map(|&(p, b, ns, t)| chain(p, b, ns, 100_000, t)).collect();
    for line in out { println!("{line}"); }
}
