//! Gaussian reference measure on the time grid (squared-exponential kernel,
//! Cholesky factor, Cameron-Martin norm) and the lambda-free regularizers of
//! the three prior models.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::forward::RobinPath;
use crate::grid::TimeGrid;
use crate::topology::{ph_regularizer, PhWeightParams};

/// Jitter escalation used when the kernel matrix is numerically
/// rank-deficient: start here, multiply by 10, give up past the cap.
const JITTER_START: f64 = 1e-10;
const JITTER_CAP: f64 = 1e-6;

/// Squared-exponential covariance delta^2 exp(-|t_i - t_j|^2 / (2 l^2)) on
/// the time grid, with its lower-triangular Cholesky factor.
pub struct CovarianceOperator {
    grid: TimeGrid,
    length_scale: f64,
    amplitude: f64,
    jitter_requested: f64,
    jitter_effective: f64,
    matrix: DMatrix<f64>,
    factor: DMatrix<f64>,
}

/// Kernel matrix plus `jitter` on the diagonal.
fn kernel_matrix(grid: &TimeGrid, l: f64, delta: f64, jitter: f64) -> DMatrix<f64> {
    let ts = grid.times();
    let n = ts.len();
    let d2 = delta * delta;
    let inv = 1.0 / (2.0 * l * l);
    DMatrix::from_fn(n, n, |i, j| {
        let r = ts[i] - ts[j];
        let v = d2 * (-r * r * inv).exp();
        if i == j {
            v + jitter
        } else {
            v
        }
    })
}

/// Build the covariance operator, escalating the diagonal jitter until the
/// Cholesky factorization succeeds.
pub fn build_covariance(
    grid: &TimeGrid,
    length_scale: f64,
    amplitude: f64,
    jitter: f64,
) -> Result<CovarianceOperator> {
    if !(length_scale > 0.0) {
        return Err(Error::InvalidArgument {
            what: "length_scale",
            detail: format!("must be > 0, got {length_scale}"),
        });
    }
    if !(amplitude > 0.0) {
        return Err(Error::InvalidArgument {
            what: "amplitude",
            detail: format!("must be > 0, got {amplitude}"),
        });
    }
    if !(jitter >= 0.0) {
        return Err(Error::InvalidArgument {
            what: "jitter",
            detail: format!("must be >= 0, got {jitter}"),
        });
    }

    let mut current = jitter;
    loop {
        let matrix = kernel_matrix(grid, length_scale, amplitude, current);
        if let Some(chol) = Cholesky::<f64, Dyn>::new(matrix.clone()) {
            return Ok(CovarianceOperator {
                grid: grid.clone(),
                length_scale,
                amplitude,
                jitter_requested: jitter,
                jitter_effective: current,
                matrix,
                factor: chol.unpack(),
            });
        }
        let next = if current <= 0.0 {
            JITTER_START
        } else {
            current * 10.0
        };
        if next > JITTER_CAP {
            return Err(Error::CovarianceFactorization {
                length_scale,
                amplitude,
                n: grid.n_nodes(),
                max_jitter: current.max(jitter),
            });
        }
        current = next;
    }
}

impl CovarianceOperator {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Number of time nodes.
    pub fn dim(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn jitter_requested(&self) -> f64 {
        self.jitter_requested
    }

    /// Jitter actually on the diagonal after escalation.
    pub fn jitter_effective(&self) -> f64 {
        self.jitter_effective
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular factor L with L L^T = matrix.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// factor * z for a caller-supplied vector of standard normals.
    pub fn sample_with(&self, z: &[f64]) -> Result<RobinPath> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "standard normal vector",
                expected: self.dim(),
                got: z.len(),
            });
        }
        let zv = DVector::from_column_slice(z);
        let out = &self.factor * zv;
        Ok(RobinPath::new(out.data.into()))
    }

    /// Draw from N(0, matrix).
    pub fn sample(&self, rng: &mut impl Rng) -> RobinPath {
        let z: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        self.sample_with(&z).expect("dimension is correct by construction")
    }

    /// Squared Cameron-Martin norm gamma^T matrix^{-1} gamma, computed as
    /// |L^{-1} gamma|^2 with one triangular solve.
    pub fn cm_norm_sq(&self, gamma: &RobinPath) -> Result<f64> {
        if gamma.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "Robin path",
                expected: self.dim(),
                got: gamma.len(),
            });
        }
        let v = DVector::from_column_slice(&gamma.values);
        let x = self
            .factor
            .solve_lower_triangular(&v)
            .expect("factor has positive diagonal by construction");
        Ok(x.norm_squared())
    }
}

/// Which regularizer augments the Gaussian reference measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorModel {
    Gaussian,
    TvGaussian,
    PhGaussian(PhWeightParams),
}

impl PriorModel {
    pub fn label(&self) -> &'static str {
        match self {
            PriorModel::Gaussian => "gaussian",
            PriorModel::TvGaussian => "tv-gaussian",
            PriorModel::PhGaussian(_) => "ph-gaussian",
        }
    }

    /// Hierarchical models carry a sampled regularization strength; the
    /// plain Gaussian does not.
    pub fn is_hierarchical(&self) -> bool {
        !matches!(self, PriorModel::Gaussian)
    }
}

/// Sum of absolute increments of the path.
pub fn tv_regularizer(gamma: &RobinPath) -> f64 {
    gamma.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// The lambda-free regularizer value R(gamma) for the given prior model.
pub fn regularizer(prior: &PriorModel, gamma: &RobinPath) -> f64 {
    match prior {
        PriorModel::Gaussian => 0.0,
        PriorModel::TvGaussian => tv_regularizer(gamma),
        PriorModel::PhGaussian(params) => ph_regularizer(&gamma.values, params),
    }
}
