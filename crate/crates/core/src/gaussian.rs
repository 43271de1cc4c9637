//! Multivariate normal distributions and the divergences between them.
//!
//! All divergences are in nats. Covariances are general symmetric positive
//! definite matrices; each [`GaussianNd`] carries its lower Cholesky factor so
//! repeated evaluations don't refactorize.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Relative tolerance for accepting a covariance as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Scale of the one-shot diagonal jitter, relative to `trace / dim`.
pub const JITTER_SCALE: f64 = 1e-9;

/// Smallest sample count accepted by [`js_divergence_mc`].
pub const MIN_MC_SAMPLES: usize = 10_000;

#[derive(Debug, Clone)]
pub struct GaussianNd {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl GaussianNd {
    /// Validates dimensions, finiteness, symmetry and positive definiteness.
    ///
    /// A covariance that fails Cholesky factorization gets a single jitter of
    /// `1e-9 * trace / dim` on the diagonal; if that still fails the call
    /// errors instead of inflating further.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(Error::InvalidInput("gaussian dimension must be positive".into()));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::InvalidInput(format!(
                "covariance is {}x{} but mean has length {dim}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite gaussian parameter".into()));
        }
        let scale = cov.amax();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let gap = (cov[(i, j)] - cov[(j, i)]).abs();
                if gap > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::InvalidInput(format!(
                        "covariance not symmetric at ({i},{j}): {} vs {}",
                        cov[(i, j)],
                        cov[(j, i)]
                    )));
                }
            }
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        let chol = factorize(&cov)?;
        Ok(Self { mean, cov, chol })
    }

    pub fn from_diagonal(mean: &[f64], variances: &[f64]) -> Result<Self> {
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::from_diagonal(&DVector::from_column_slice(variances)),
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower-triangular Cholesky factor `L` with `L Lᵀ = cov` (up to jitter).
    pub fn cholesky_l(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn log_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        2.0 * (0..self.dim()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    /// Log of the density at `x`.
    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x.len())?;
        let diff = x - &self.mean;
        let whitened = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&diff)
            .ok_or_else(|| Error::Numeric("singular cholesky factor".into()))?;
        Ok(-0.5 * (whitened.norm_squared() + self.dim() as f64 * LN_2PI + self.log_det()))
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if other != self.dim() {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: expected {}, got {other}",
                self.dim()
            )));
        }
        Ok(())
    }
}

fn factorize(cov: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(chol) = Cholesky::new(cov.clone()) {
        return Ok(chol);
    }
    let dim = cov.nrows();
    let eps = JITTER_SCALE * cov.trace() / dim as f64;
    if eps > 0.0 {
        let jittered = cov + DMatrix::identity(dim, dim) * eps;
        if let Some(chol) = Cholesky::new(jittered) {
            return Ok(chol);
        }
    }
    let min_diag = cov.diagonal().min();
    Err(Error::Numeric(format!(
        "covariance ({dim}x{dim}, trace {:.3e}, min diagonal {min_diag:.3e}) is not positive definite even after jitter {eps:.3e}",
        cov.trace()
    )))
}

/// Closed-form `KL(p ‖ q)` between two Gaussians of equal dimension.
pub fn kl_divergence(p: &GaussianNd, q: &GaussianNd) -> Result<f64> {
    q.check_dim(p.dim())?;
    let k = p.dim() as f64;
    let lq = q.chol.l_dirty();
    let singular = || Error::Numeric("singular covariance in KL divergence".into());

    let delta = &p.mean - &q.mean;
    let maha = lq.solve_lower_triangular(&delta).ok_or_else(singular)?.norm_squared();
    // tr(Σq⁻¹ Σp) = ‖Lq⁻¹ Lp‖²_F
    let trace = lq
        .solve_lower_triangular(&p.chol.l())
        .ok_or_else(singular)?
        .norm_squared();

    Ok(0.5 * (q.log_det() - p.log_det() - k + maha + trace))
}

/// Gaussian with the first two moments of the equal-weight mixture of `p` and `q`.
///
/// The construction is symmetric in its arguments bit-for-bit.
pub fn moment_matched_midpoint(p: &GaussianNd, q: &GaussianNd) -> Result<GaussianNd> {
    q.check_dim(p.dim())?;
    let delta = &p.mean - &q.mean;
    let mean = (&p.mean + &q.mean) * 0.5;
    let cov = (&p.cov + &q.cov) * 0.5 + (&delta * delta.transpose()) * 0.25;
    GaussianNd::new(mean, cov)
}

/// Jensen-Shannon divergence with the mixture replaced by its moment-matched
/// Gaussian. Symmetric and non-negative; not bounded by `ln 2`.
pub fn js_divergence(p: &GaussianNd, q: &GaussianNd) -> Result<f64> {
    let m = moment_matched_midpoint(p, q)?;
    Ok(0.5 * kl_divergence(p, &m)? + 0.5 * kl_divergence(q, &m)?)
}

/// Monte Carlo estimate of the exact Jensen-Shannon divergence using the true
/// two-component mixture density. Draws `samples / 2` points from each side.
pub fn js_divergence_mc(p: &GaussianNd, q: &GaussianNd, samples: usize, seed: u64) -> Result<f64> {
    q.check_dim(p.dim())?;
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "monte carlo JS needs at least {MIN_MC_SAMPLES} samples, got {samples}"
        )));
    }
    let half = samples / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_side = WhitenedPair::new(p, q);
    let q_side = WhitenedPair::new(q, p);

    let from_p = p_side.mean_log_ratio(half, &mut rng);
    let from_q = q_side.mean_log_ratio(half, &mut rng);
    Ok(0.5 * from_p + 0.5 * from_q)
}

/// Samples from `own` and evaluates `log own(x) - log m(x)`.
struct WhitenedPair {
    dim: usize,
    own_mean: Vec<f64>,
    own_l: Vec<f64>,
    own_norm: f64,
    other_mean: Vec<f64>,
    other_l: Vec<f64>,
    other_norm: f64,
}

impl WhitenedPair {
    fn new(own: &GaussianNd, other: &GaussianNd) -> Self {
        let dim = own.dim();
        let flat = |g: &GaussianNd| {
            let l = g.chol.l();
            let mut out = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    out.push(l[(i, j)]);
                }
            }
            out
        };
        let norm = |g: &GaussianNd| -0.5 * (dim as f64 * LN_2PI + g.log_det());
        Self {
            dim,
            own_mean: own.mean.iter().copied().collect(),
            own_l: flat(own),
            own_norm: norm(own),
            other_mean: other.mean.iter().copied().collect(),
            other_l: flat(other),
            other_norm: norm(other),
        }
    }

    fn mean_log_ratio(&self, count: usize, rng: &mut ChaCha8Rng) -> f64 {
        let dim = self.dim;
        let mut z = vec![0.0; dim];
        let mut x = vec![0.0; dim];
        let mut y = vec![0.0; dim];
        let mut total = 0.0;
        for _ in 0..count {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(rng);
            }
            for i in 0..dim {
                let row = &self.own_l[i * dim..i * dim + i + 1];
                x[i] = self.own_mean[i] + row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
            }
            // forward substitution: L_other y = x - mean_other
            for i in 0..dim {
                let row = &self.other_l[i * dim..(i + 1) * dim];
                let acc: f64 = (0..i).map(|j| row[j] * y[j]).sum();
                y[i] = (x[i] - self.other_mean[i] - acc) / row[i];
            }
            let log_own = self.own_norm - 0.5 * z.iter().map(|v| v * v).sum::<f64>();
            let log_other = self.other_norm - 0.5 * y.iter().map(|v| v * v).sum::<f64>();
            let hi = log_own.max(log_other);
            let log_mix = hi + ((log_own - hi).exp() + (log_other - hi).exp()).ln() - std::f64::consts::LN_2;
            total += log_own - log_mix;
        }
        total / count as f64
    }
}
