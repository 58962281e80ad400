use robin_inverse::forward::*;
use robin_inverse::harness::*;
use robin_inverse::priors::*;
use robin_inverse::sampler::*;

fn main() {
    let (spec, exact) = example_spec(3).unwrap();
    let solver = ForwardSolver::new(&spec);
    let trace = solver.solve_trace(&exact.gamma_exact).unwrap();
    let eps = 0.05;
    let obs = generate_observations(&trace, eps, 1);
    let y = BoundaryTrace { values: obs.y.clone() };
    let flat = RobinPath::zeros(201);
    let (m1, m2) = (200.0, 0.1);

    for (label, sigma) in [
        ("eps*max|Y|", eps * obs.y.iter().fold(0.0f64, |m, &v| m.max(v.abs()))),
        ("eps*mean|Y|", eps * obs.y.iter().map(|v| v.abs()).sum::<f64>() / obs.y.len() as f64),
        ("eps*max|Y|/2", 0.5 * eps * obs.y.iter().fold(0.0f64, |m, &v| m.max(v.abs()))),
    ] {
        let noise = NoiseModel { sigma };
        let phi_flat = misfit(&flat, &y, &noise, &spec).unwrap();
        let phi_true = misfit(&exact.gamma_exact, &y, &noise, &spec).unwrap();
        let r_true = tv_regularizer(&exact.gamma_exact);
        // lambda marginalized: log p(gamma|Y) ~ -Phi - m1 ln(m2 + R)
        let lp_flat = -phi_flat - m1 * (m2 + 0.0f64).ln();
        let lp_true = -phi_true - m1 * (m2 + r_true).ln();
        println!(
            "sigma={label} ({sigma:.4}): Phi(flat)={phi_flat:.1} Phi(true)={phi_true:.1} gap={:.1}  barrier={:.1}  marginal pref: {}",
            phi_flat - phi_true,
            m1 * ((m2 + r_true) / m2).ln(),
            if lp_true > lp_flat { "TRUTH" } else { "FLAT" }
        );
    }
    // also example 1 for contrast (m1 = 50, eps = 0.01)
    let (spec1, exact1) = example_spec(1).unwrap();
    let tr1 = ForwardSolver::new(&spec1).solve_trace(&exact1.gamma_exact).unwrap();
    let obs1 = generate_observations(&tr1, 0.01, 1);
    let y1 = BoundaryTrace { values: obs1.y.clone() };
    let sigma1 = 0.01 * obs1.y.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let noise1 = NoiseModel { sigma: sigma1 };
    let flat2 = RobinPath::new(vec![2.0; 201]);
    let phi_flat2 = misfit(&flat2, &y1, &noise1, &spec1).unwrap();
    let phi_true1 = misfit(&exact1.gamma_exact, &y1, &noise1, &spec1).unwrap();
    let r_true1 = tv_regularizer(&exact1.gamma_exact);
    println!(
        "ex1: Phi(flat2)={phi_flat2:.1} Phi(true)={phi_true1:.1} gap={:.1} barrier={:.1}",
        phi_flat2 - phi_true1,
        50.0 * ((0.1 + r_true1) / 0.1f64).ln()
    );
}
