use robin_inverse::forward::*;

fn main() {
    let (spec, exact) = example_spec(1).unwrap();
    let solver = ForwardSolver::new(&spec);
    let base = solver.solve_trace(&exact.gamma_exact).unwrap();
    // perturb gamma at one node, see max trace response (l2 and linf)
    for node in [40usize, 100, 160, 180, 190, 195, 199, 200] {
        let mut g = exact.gamma_exact.clone();
        g.values[node] += 1.0;
        let tr = solver.solve_trace(&g).unwrap();
        let linf = tr.values.iter().zip(&base.values).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        let l2: f64 = tr.values.iter().zip(&base.values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        println!("node {:3} (t={:.3}): |dF|_inf = {:.3e}, |dF|_2 = {:.3e}", node, node as f64 / 200.0, linf, l2);
    }
    println!("noise sigma at 1%: {:.3e}", 0.01 * base.values.iter().fold(0.0f64, |m, &v| m.max(v.abs())));
}
