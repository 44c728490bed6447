//! Empirical membership tests and Gaussian simulation on `S^d x G`.

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupModel, Verdict};
use crate::kernels::{kernel_gram, KernelSpec, SpaceTimePoint};
use crate::linalg::{eigen_extremes, hermitian_gap, psd_verdict};

/// Largest imaginary part (relative to the real scale) accepted in a
/// covariance matrix before simulation.
pub const IMAGINARY_TOL: f64 = 1e-12;

/// Trials used by [`find_witness`].
pub const WITNESS_TRIALS: usize = 200;

/// `n` points uniform on `S^d`, as normalized Gaussian vectors in `R^{d+1}`.
pub fn sample_sphere(d: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_sphere_with(&mut ChaCha8Rng::seed_from_u64(seed), d, n)
}

pub fn sample_sphere_with<R: Rng + ?Sized>(rng: &mut R, d: usize, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..=d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm > 1e-300 {
                break v.into_iter().map(|a| a / norm).collect();
            }
        })
        .collect()
}

/// Geodesic distance `arccos(<xi, eta>)`.
pub fn great_circle(xi: &[f64], eta: &[f64]) -> Result<f64> {
    if xi.len() != eta.len() {
        return Err(Error::domain("points live in different dimensions"));
    }
    let dot: f64 = xi.iter().zip(eta).map(|(a, b)| a * b).sum();
    Ok(dot.clamp(-1.0, 1.0).acos())
}

/// How group elements are drawn for a membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GroupSampler {
    /// The model's own validation distribution.
    #[default]
    ModelDefault,
    /// Every point at the identity: tests the spatial restriction `f(., e)`.
    Identity,
}

/// A reproducible set of points on `S^d x G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub d: usize,
    pub points: Vec<SpaceTimePoint>,
    pub seed: u64,
}

impl Configuration {
    /// `n_points` points drawn with `seed`.
    pub fn sample(model: &GroupModel, d: usize, n_points: usize, sampler: GroupSampler, seed: u64) -> Self {
        Self::sample_stream(model, d, n_points, sampler, seed, 0)
    }

    fn sample_stream(model: &GroupModel, d: usize, n_points: usize, sampler: GroupSampler, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let xs = sample_sphere_with(&mut rng, d, n_points);
        let us = match sampler {
            GroupSampler::ModelDefault => model.sample_elements(&mut rng, n_points),
            GroupSampler::Identity => vec![model.identity(); n_points],
        };
        let points = xs.into_iter().zip(us).map(|(xi, u)| SpaceTimePoint { xi, u }).collect();
        Self { d, points, seed }
    }
}

/// Outcome of an empirical PSD test. `witness` holds the configuration of
/// the worst trial when the verdict is `fail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eig: f64,
    pub max_eig: f64,
    pub hermitian_gap: f64,
    pub verdict: Verdict,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Configuration>,
}

/// Eigen-tests the Gram matrix of `spec` at one configuration.
pub fn check_configuration(spec: &KernelSpec, model: &GroupModel, config: &Configuration) -> Result<PsdReport> {
    let gram = kernel_gram(spec, model, &config.points)?;
    let (min_eig, max_eig) = eigen_extremes(&gram)?;
    let verdict = Verdict::from_bool(psd_verdict(min_eig, max_eig));
    Ok(PsdReport {
        min_eig,
        max_eig,
        hermitian_gap: hermitian_gap(&gram),
        verdict,
        trials: 1,
        witness: (!verdict.passed()).then(|| config.clone()),
    })
}

/// Runs `trials` independent configurations of `n_points` points on
/// `S^d x G` and returns the worst one. Trial `t` uses stream `t` of the
/// generator seeded with `seed`, so results do not depend on scheduling.
pub fn membership_test(
    spec: &KernelSpec,
    model: &GroupModel,
    d: usize,
    sampler: GroupSampler,
    trials: usize,
    n_points: usize,
    seed: u64,
) -> Result<PsdReport> {
    run_trials(spec, model, d, sampler, trials, seed, |_| n_points)
}

fn run_trials(
    spec: &KernelSpec,
    model: &GroupModel,
    d: usize,
    sampler: GroupSampler,
    trials: usize,
    seed: u64,
    points_for: impl Fn(usize) -> usize + Sync,
) -> Result<PsdReport> {
    if d < 1 {
        return Err(Error::domain("sphere dimension must be >= 1"));
    }
    if trials < 1 {
        return Err(Error::domain("trials must be >= 1"));
    }
    spec.validate(model, "kernel")?;
    let reports: Vec<PsdReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let n_points = points_for(t);
            if n_points < 1 {
                return Err(Error::domain("n_points must be >= 1"));
            }
            let config = Configuration::sample_stream(model, d, n_points, sampler, seed, t as u64);
            check_configuration(spec, model, &config)
        })
        .collect::<Result<_>>()?;
    let hermitian_gap = reports.iter().map(|r| r.hermitian_gap).fold(0.0, f64::max);
    // a failing trial outranks a passing one; ties go to the lower min_eig
    let rank = |r: &PsdReport| (r.verdict.passed(), r.min_eig);
    let mut worst = reports
        .into_iter()
        .reduce(|a, b| if rank(&b).partial_cmp(&rank(&a)) == Some(std::cmp::Ordering::Less) { b } else { a })
        .expect("at least one trial");
    worst.trials = trials;
    worst.hermitian_gap = hermitian_gap;
    Ok(worst)
}

/// Searches for a configuration whose Gram matrix is not PSD, over
/// [`WITNESS_TRIALS`] trials with 10 to 30 points each. A `pass` verdict
/// is inconclusive, not a proof of membership.
pub fn find_witness(spec: &KernelSpec, model: &GroupModel, d: usize, sampler: GroupSampler, seed: u64) -> Result<PsdReport> {
    run_trials(spec, model, d, sampler, WITNESS_TRIALS, seed, |t| 10 + t % 21)
}

/// Default diagonal jitter `1e-10 * trace / n` of a covariance matrix.
pub fn default_jitter(cov: &DMatrix<f64>) -> f64 {
    let n = cov.nrows().max(1);
    1e-10 * cov.trace().abs() / n as f64
}

/// Draws from a zero-mean Gaussian field.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSamples {
    /// One row per sample, one column per configuration point.
    pub samples: DMatrix<f64>,
    /// Jitter that made the factorization succeed.
    pub jitter: f64,
}

/// `n_samples` draws of a real Gaussian field with covariance given by the
/// Gram matrix of `spec` at `config`, via Cholesky of `Gram + jitter I`.
/// The jitter escalates to `10x` and `100x` (of the default when `jitter`
/// is zero) before giving up.
pub fn gaussian_sample(
    spec: &KernelSpec,
    model: &GroupModel,
    config: &Configuration,
    n_samples: usize,
    seed: u64,
    jitter: Option<f64>,
) -> Result<GaussianSamples> {
    spec.validate(model, "kernel")?;
    let gram = kernel_gram(spec, model, &config.points)?;
    let scale = gram.iter().map(|v| v.re.abs()).fold(1.0, f64::max);
    let worst_im = gram.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if worst_im > IMAGINARY_TOL * scale {
        return Err(Error::NotRealValued(worst_im));
    }
    let (min_eig, max_eig) = eigen_extremes(&gram)?;
    if !psd_verdict(min_eig, max_eig) {
        return Err(Error::NotPositiveSemidefinite(min_eig));
    }
    let cov = gram.map(|v: Complex64| v.re);
    let n = cov.nrows();
    let requested = jitter.unwrap_or_else(|| default_jitter(&cov));
    if !(requested >= 0.0 && requested.is_finite()) {
        return Err(Error::domain(format!("jitter must be >= 0, got {requested}")));
    }
    let base = if requested > 0.0 { requested } else { default_jitter(&cov) };
    let mut factor = None;
    for j in [requested, 10.0 * base, 100.0 * base] {
        let shifted = &cov + DMatrix::identity(n, n) * j;
        if let Some(chol) = Cholesky::new(shifted) {
            factor = Some((chol.l(), j));
            break;
        }
    }
    let (l, used) = factor.ok_or_else(|| Error::Factorization(format!("Cholesky failed up to jitter {}", 100.0 * base)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::from_fn(n, n_samples, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(GaussianSamples { samples: (l * z).transpose(), jitter: used })
}
