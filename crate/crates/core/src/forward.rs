//! Forward heat problem: linear finite elements in space, Crank-Nicolson in
//! time, with a flux condition on the left boundary and a Robin condition
//! gamma(t) u(1,t) on the right. Exposes the forward map gamma -> u(0, t)
//! together with manufactured problem builders for the three reference
//! examples.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::grid::{SpaceGrid, TimeGrid};

pub type ScalarField = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type TimePath = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeField = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Full description of one forward initial-boundary value problem:
///
/// ```text
/// u_t - (alpha(x) u_x)_x = f(x,t)          in (0,1) x (0,1]
/// alpha u_x = h0(t)                        at x = 0
/// alpha u_x + gamma(t) u = h1(t)           at x = 1
/// u(x,0) = g(x)
/// ```
pub struct ProblemSpec {
    pub conductivity: ScalarField,
    pub source: SpaceTimeField,
    pub flux_left: TimePath,
    pub robin_rhs: TimePath,
    pub initial: ScalarField,
    pub space: SpaceGrid,
    pub time: TimeGrid,
}

/// The unknown gamma(t) discretized at the time nodes; the object of
/// inference.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinPath {
    pub values: Vec<f64>,
}

impl RobinPath {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            values: vec![0.0; n_nodes],
        }
    }

    /// Discretize a function of time on the grid nodes.
    pub fn from_fn(time: &TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: time.times().iter().map(|&t| f(t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Computed boundary temperatures u(0, t_n) for n = 1..n_steps.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Analytic solution of a manufactured problem, with the exact Robin path
/// discretized on the problem's time grid.
pub struct ExactSolution {
    pub u_exact: SpaceTimeField,
    pub gamma_exact: RobinPath,
}

/// Space-time field on the grid nodes; `values[n][i]` is u(x_i, t_n).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<Vec<f64>>,
}

/// Precomputed Crank-Nicolson stepper for one `ProblemSpec`.
///
/// Everything that does not depend on gamma is assembled once: the constant
/// tridiagonals of M/dt +- (1/2)K and the per-step load vectors (source term
/// by midpoint quadrature per element, plus the boundary data). A solve for
/// a given gamma is then a sequence of O(n) tridiagonal sweeps, which is what
/// makes 1e5-iteration MCMC chains affordable.
pub struct ForwardSolver {
    n: usize, // space cells; n+1 nodes
    n_steps: usize,
    // A = M/dt + K/2 (gamma term added per step at the last diagonal entry)
    a_sub: Vec<f64>,
    a_dia: Vec<f64>,
    // B = M/dt - K/2
    b_sub: Vec<f64>,
    b_dia: Vec<f64>,
    b_sup: Vec<f64>,
    // Thomas elimination of A depends on gamma only through the last
    // diagonal entry, so the multipliers cp[i] = A_sup[i] / den_i and the
    // reciprocals 1 / den_i for i < n are fixed per problem.
    cp: Vec<f64>,
    inv_den: Vec<f64>,
    pivot_failure: Option<f64>,
    // load[step * (n+1) + i]: time-averaged source + boundary data for the
    // step t_step -> t_{step+1}
    load: Vec<f64>,
    initial: Vec<f64>,
}

impl ForwardSolver {
    pub fn new(spec: &ProblemSpec) -> Self {
        let n = spec.space.n_cells();
        let h = spec.space.spacing();
        let n_steps = spec.time.n_steps();
        let dt = spec.time.step();
        let xs = spec.space.nodes();
        let ts = spec.time.times();

        // Conductivity at element midpoints.
        let alpha_mid: Vec<f64> = (0..n)
            .map(|e| (spec.conductivity)(0.5 * (xs[e] + xs[e + 1])))
            .collect();

        // Consistent mass matrix: h/6 * tridiag(1, 4, 1), halved rows at the ends.
        let mut m_dia = vec![2.0 * h / 3.0; n + 1];
        m_dia[0] = h / 3.0;
        m_dia[n] = h / 3.0;
        let m_off = h / 6.0;

        // Stiffness: per element (alpha_e / h) [[1,-1],[-1,1]].
        let mut k_dia = vec![0.0; n + 1];
        let mut k_off = vec![0.0; n];
        for e in 0..n {
            let w = alpha_mid[e] / h;
            k_dia[e] += w;
            k_dia[e + 1] += w;
            k_off[e] -= w;
        }

        let mut a_sub = vec![0.0; n];
        let mut a_dia = vec![0.0; n + 1];
        let mut b_sub = vec![0.0; n];
        let mut b_dia = vec![0.0; n + 1];
        let mut b_sup = vec![0.0; n];
        for i in 0..=n {
            a_dia[i] = m_dia[i] / dt + 0.5 * k_dia[i];
            b_dia[i] = m_dia[i] / dt - 0.5 * k_dia[i];
        }
        for e in 0..n {
            a_sub[e] = m_off / dt + 0.5 * k_off[e];
            b_sub[e] = m_off / dt - 0.5 * k_off[e];
            b_sup[e] = m_off / dt - 0.5 * k_off[e];
        }
        // symmetric A: a_sup == a_sub

        // forward elimination of the gamma-independent rows 0..n-1
        let mut cp = vec![0.0; n];
        let mut inv_den = vec![0.0; n];
        let mut pivot_failure = None;
        let mut den = a_dia[0];
        for i in 0..n {
            if den == 0.0 || !den.is_finite() {
                pivot_failure = Some(den);
                break;
            }
            inv_den[i] = 1.0 / den;
            cp[i] = a_sub[i] / den;
            den = a_dia[i + 1] - a_sub[i] * cp[i];
        }

        // Per-step loads: source by midpoint quadrature per element, data
        // averaged over the two time levels of the step.
        let mut load = vec![0.0; n_steps * (n + 1)];
        for s in 0..n_steps {
            let (t0, t1) = (ts[s], ts[s + 1]);
            let row = &mut load[s * (n + 1)..(s + 1) * (n + 1)];
            for e in 0..n {
                let xm = 0.5 * (xs[e] + xs[e + 1]);
                let fm = 0.5 * ((spec.source)(xm, t0) + (spec.source)(xm, t1));
                let contrib = 0.5 * h * fm;
                row[e] += contrib;
                row[e + 1] += contrib;
            }
            row[0] -= 0.5 * ((spec.flux_left)(t0) + (spec.flux_left)(t1));
            row[n] += 0.5 * ((spec.robin_rhs)(t0) + (spec.robin_rhs)(t1));
        }

        let initial = xs.iter().map(|&x| (spec.initial)(x)).collect();

        Self {
            n,
            n_steps,
            a_sub,
            a_dia,
            b_sub,
            b_dia,
            b_sup,
            cp,
            inv_den,
            pivot_failure,
            load,
            initial,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    fn check_gamma(&self, gamma: &RobinPath) -> Result<()> {
        if gamma.len() != self.n_steps + 1 {
            return Err(Error::DimensionMismatch {
                what: "Robin path",
                expected: self.n_steps + 1,
                got: gamma.len(),
            });
        }
        Ok(())
    }

    /// Advance one Crank-Nicolson step in place. `step` is 1-based, used
    /// only for error reporting.
    ///
    /// The Robin term is integrated trapezoidally as
    /// (1/2)(gamma_new u_new + gamma_old u_old), like the boundary data. A
    /// jump of gamma at a node then cancels exactly against the matching
    /// jump in the Robin right-hand side, which keeps second order for
    /// discontinuous coefficients.
    fn advance(
        &self,
        step: usize,
        gamma_old: f64,
        gamma_new: f64,
        u: &mut [f64],
        g: &mut [f64],
    ) -> Result<()> {
        if let Some(pivot) = self.pivot_failure {
            return Err(Error::TridiagonalBreakdown { step, pivot });
        }
        let n = self.n;
        let row = &self.load[(step - 1) * (n + 1)..step * (n + 1)];

        // fused rhs build (B u + load) and forward substitution with the
        // precomputed multipliers
        let mut rhs = self.b_dia[0] * u[0] + self.b_sup[0] * u[1] + row[0];
        g[0] = rhs * self.inv_den[0];
        for i in 1..n {
            rhs = self.b_sub[i - 1] * u[i - 1]
                + self.b_dia[i] * u[i]
                + self.b_sup[i] * u[i + 1]
                + row[i];
            g[i] = (rhs - self.a_sub[i - 1] * g[i - 1]) * self.inv_den[i];
        }

        // the only gamma-dependent pivot is the last one
        rhs = self.b_sub[n - 1] * u[n - 1] + (self.b_dia[n] - 0.5 * gamma_old) * u[n] + row[n];
        let den = (self.a_dia[n] + 0.5 * gamma_new) - self.a_sub[n - 1] * self.cp[n - 1];
        if !den.is_finite() {
            return Err(Error::NonFiniteStep { step });
        }
        if den == 0.0 {
            return Err(Error::TridiagonalBreakdown { step, pivot: den });
        }
        g[n] = (rhs - self.a_sub[n - 1] * g[n - 1]) / den;

        u[n] = g[n];
        for i in (0..n).rev() {
            u[i] = g[i] - self.cp[i] * u[i + 1];
        }

        for &v in u.iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteStep { step });
            }
        }
        Ok(())
    }

    /// Boundary trace u(0, t_n) for n = 1..n_steps.
    pub fn solve_trace(&self, gamma: &RobinPath) -> Result<BoundaryTrace> {
        self.check_gamma(gamma)?;
        let n = self.n;
        let mut u = self.initial.clone();
        let mut g = vec![0.0; n + 1];
        let mut trace = Vec::with_capacity(self.n_steps);
        for s in 1..=self.n_steps {
            self.advance(s, gamma.values[s - 1], gamma.values[s], &mut u, &mut g)?;
            trace.push(u[0]);
        }
        Ok(BoundaryTrace { values: trace })
    }

    /// All nodal values u(x_i, t_n); the boundary trace is column 0 of
    /// rows 1..n_steps.
    pub fn solve_field(&self, gamma: &RobinPath) -> Result<Field> {
        self.check_gamma(gamma)?;
        let n = self.n;
        let mut u = self.initial.clone();
        let mut g = vec![0.0; n + 1];
        let mut values = Vec::with_capacity(self.n_steps + 1);
        values.push(u.clone());
        for s in 1..=self.n_steps {
            self.advance(s, gamma.values[s - 1], gamma.values[s], &mut u, &mut g)?;
            values.push(u.clone());
        }
        Ok(Field { values })
    }
}

/// Forward map F: gamma -> u(0, t; gamma) at the observation times.
pub fn solve_forward(spec: &ProblemSpec, gamma: &RobinPath) -> Result<BoundaryTrace> {
    ForwardSolver::new(spec).solve_trace(gamma)
}

/// Full space-time solution on the grid nodes.
pub fn solve_forward_field(spec: &ProblemSpec, gamma: &RobinPath) -> Result<Field> {
    ForwardSolver::new(spec).solve_field(gamma)
}

/// Exact Robin coefficient of example 2: a triangle peaking at t = 1/2.
fn gamma_triangle(t: f64) -> f64 {
    if t <= 0.5 {
        2.0 * t
    } else {
        2.0 * (1.0 - t)
    }
}

/// Exact Robin coefficient of example 3: (1/2) on [3/10, 7/10], 0 elsewhere.
fn gamma_indicator(t: f64) -> f64 {
    if (0.3..=0.7).contains(&t) {
        0.5
    } else {
        0.0
    }
}

/// Manufactured problem `id` in {1, 2, 3} on an n_cells x n_steps grid.
///
/// The data (source, boundary values, initial value) are derived by
/// substituting the chosen analytic solution into the equation, so the
/// returned `ExactSolution` satisfies the problem exactly:
///
/// * 1: alpha = 1, u = e^{2x} sin t,      gamma = 2 + sin(2 pi t)
/// * 2: alpha = 1, u = (x+1)(t+1),        gamma = triangle
/// * 3: alpha = e^x, u = (x^2+1) sin(pi t), gamma = (1/2) 1_{[0.3, 0.7]}
pub fn example_spec_on(
    id: u8,
    n_cells: usize,
    n_steps: usize,
) -> Result<(ProblemSpec, ExactSolution)> {
    let space = SpaceGrid::uniform(n_cells)?;
    let time = TimeGrid::uniform(n_steps)?;
    match id {
        1 => {
            let gamma = |t: f64| 2.0 + (2.0 * PI * t).sin();
            let spec = ProblemSpec {
                conductivity: Box::new(|_| 1.0),
                source: Box::new(|x, t| (2.0 * x).exp() * (t.cos() - 4.0 * t.sin())),
                flux_left: Box::new(|t| 2.0 * t.sin()),
                robin_rhs: Box::new(move |t| {
                    2.0 * E * E * t.sin() + gamma(t) * E * E * t.sin()
                }),
                initial: Box::new(|_| 0.0),
                space,
                time: time.clone(),
            };
            let exact = ExactSolution {
                u_exact: Box::new(|x, t| (2.0 * x).exp() * t.sin()),
                gamma_exact: RobinPath::from_fn(&time, gamma),
            };
            Ok((spec, exact))
        }
        2 => {
            let spec = ProblemSpec {
                conductivity: Box::new(|_| 1.0),
                source: Box::new(|x, _| x + 1.0),
                flux_left: Box::new(|t| t + 1.0),
                robin_rhs: Box::new(|t| (t + 1.0) * (1.0 + 2.0 * gamma_triangle(t))),
                initial: Box::new(|x| x + 1.0),
                space,
                time: time.clone(),
            };
            let exact = ExactSolution {
                u_exact: Box::new(|x, t| (x + 1.0) * (t + 1.0)),
                gamma_exact: RobinPath::from_fn(&time, gamma_triangle),
            };
            Ok((spec, exact))
        }
        3 => {
            let spec = ProblemSpec {
                conductivity: Box::new(|x| x.exp()),
                source: Box::new(|x, t| {
                    PI * (x * x + 1.0) * (PI * t).cos()
                        - (2.0 * x + 2.0) * x.exp() * (PI * t).sin()
                }),
                flux_left: Box::new(|_| 0.0),
                robin_rhs: Box::new(|t| (PI * t).sin() * (2.0 * E + 2.0 * gamma_indicator(t))),
                initial: Box::new(|_| 0.0),
                space,
                time: time.clone(),
            };
            let exact = ExactSolution {
                u_exact: Box::new(|x, t| (x * x + 1.0) * (PI * t).sin()),
                gamma_exact: RobinPath::from_fn(&time, gamma_indicator),
            };
            Ok((spec, exact))
        }
        _ => Err(Error::InvalidArgument {
            what: "example id",
            detail: format!("must be 1, 2 or 3, got {id}"),
        }),
    }
}

/// Manufactured problem `id` on the reference 100 x 200 grid.
pub fn example_spec(id: u8) -> Result<(ProblemSpec, ExactSolution)> {
    example_spec_on(id, 100, 200)
}

/// max_i,n |field - exact| / max_i,n |exact| over all grid nodes.
pub fn max_relative_field_error(
    field: &Field,
    spec: &ProblemSpec,
    u_exact: &SpaceTimeField,
) -> f64 {
    let xs = spec.space.nodes();
    let ts = spec.time.times();
    let mut max_err: f64 = 0.0;
    let mut max_exact: f64 = 0.0;
    for (row, &t) in field.values.iter().zip(ts) {
        for (&v, &x) in row.iter().zip(xs) {
            let e = u_exact(x, t);
            max_err = max_err.max((v - e).abs());
            max_exact = max_exact.max(e.abs());
        }
    }
    if max_exact == 0.0 {
        max_err
    } else {
        max_err / max_exact
    }
}
