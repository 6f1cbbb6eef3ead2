//! Pivotal bootstrap for the extrinsic `T` statistics.
//!
//! Resample `r` draws its n indices from a ChaCha8 stream keyed by
//! `(seed, r)`, so the draws do not depend on how resamples are scheduled
//! across threads. Each resample is studentized by its own `D*`, `G*_n`
//! while the candidate slot holds the original sample mean.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    check_alpha, marginal_summary_refs, marginal_t_parts, summarize, summarize_refs, t_statistic, ExtrinsicSummary,
    ShapeSample, DEFAULT_GAP_TOL,
};
use crate::error::{Error, Result};
use crate::shape::ProjectiveShape;

/// Fraction of skipped resamples above which the warning flag is raised.
pub const SKIP_WARNING_FRACTION: f64 = 0.05;

/// Sorted bootstrap draws of `T*` (or `T*_s`).
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDistribution {
    /// ascending draws from the resamples that were not skipped
    pub values: Vec<f64>,
    /// requested resample count
    pub b: usize,
    /// resamples dropped for focality or a singular `G*_n`
    pub skipped: usize,
    pub seed: u64,
    pub warning: bool,
}

impl BootstrapDistribution {
    fn from_draws(draws: Vec<Option<f64>>, seed: u64) -> Result<Self> {
        let b = draws.len();
        let mut values: Vec<f64> = draws.into_iter().flatten().collect();
        let skipped = b - values.len();
        if 2 * skipped > b {
            return Err(Error::TooManySkipped { skipped, total: b });
        }
        values.sort_by(f64::total_cmp);
        let warning = skipped as f64 >= SKIP_WARNING_FRACTION * b as f64;
        Ok(BootstrapDistribution { values, b, skipped, seed, warning })
    }

    /// `c*_{1−α}`, the ⌈(1−α)B'⌉-th smallest retained draw.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let len = self.values.len();
        let x = (1.0 - alpha) * len as f64;
        // absorb rounding noise in products like 0.95 * 400
        let rank = if (x - x.round()).abs() < 1e-9 { x.round() } else { x.ceil() };
        let rank = (rank as usize).clamp(1, len);
        Ok(self.values[rank - 1])
    }
}

/// The n indices of resample `r`.
pub fn resample_indices(seed: u64, r: usize, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn check_b(b: usize) -> Result<()> {
    if b == 0 {
        return Err(Error::InvalidInput("bootstrap needs B >= 1 resamples".into()));
    }
    Ok(())
}

fn draws<F>(sample: &ShapeSample, b: usize, seed: u64, stat: F) -> Vec<Option<f64>>
where
    F: Fn(&[&ProjectiveShape]) -> Result<f64> + Sync,
{
    let obs = sample.observations();
    (0..b)
        .into_par_iter()
        .map(|r| {
            let resample: Vec<&ProjectiveShape> =
                resample_indices(seed, r, obs.len()).into_iter().map(|i| &obs[i]).collect();
            stat(&resample).ok()
        })
        .collect()
}

/// Bootstrap distribution of `T*` with the default focality tolerance.
pub fn bootstrap_t(sample: &ShapeSample, b: usize, seed: u64) -> Result<BootstrapDistribution> {
    bootstrap_t_with(sample, b, seed, DEFAULT_GAP_TOL)
}

pub fn bootstrap_t_with(sample: &ShapeSample, b: usize, seed: u64, gap_tol: f64) -> Result<BootstrapDistribution> {
    check_b(b)?;
    let mean = super::extrinsic_mean(sample, gap_tol)?.mean;
    let d = draws(sample, b, seed, |obs| t_statistic(&summarize_refs(obs, gap_tol)?, &mean));
    BootstrapDistribution::from_draws(d, seed)
}

/// Bootstrap distribution of `T*_s` for the 0-based marginal `s`.
pub fn marginal_bootstrap_t(sample: &ShapeSample, s: usize, b: usize, seed: u64) -> Result<BootstrapDistribution> {
    super::check_marginal(sample.q(), s)?;
    check_b(b)?;
    let mean = super::extrinsic_mean(sample, DEFAULT_GAP_TOL)?.mean;
    let gamma = mean.axes()[s].coords().clone();
    let d = draws(sample, b, seed, |obs| {
        let (me, g) = marginal_summary_refs(obs, s, DEFAULT_GAP_TOL)?;
        marginal_t_parts(&me, &g, obs.len(), &gamma)
    });
    BootstrapDistribution::from_draws(d, seed)
}

/// `marginal_bootstrap_t` for every marginal, sharing the resample indices.
pub fn marginal_bootstrap_all(sample: &ShapeSample, b: usize, seed: u64) -> Result<Vec<BootstrapDistribution>> {
    (0..sample.q()).map(|s| marginal_bootstrap_t(sample, s, b, seed)).collect()
}

/// Whether `candidate` lies in the bootstrap region `{T ≤ c*_{1−α}}`.
pub fn region_contains_bootstrap(
    summary: &ExtrinsicSummary,
    dist: &BootstrapDistribution,
    candidate: &ProjectiveShape,
    alpha: f64,
) -> Result<bool> {
    let c = dist.critical_value(alpha)?;
    Ok(t_statistic(summary, candidate)? <= c)
}

/// Intersection of the per-marginal bootstrap regions at level `α/q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousRegion {
    pub summary: ExtrinsicSummary,
    pub alpha: f64,
    pub marginals: Vec<BootstrapDistribution>,
    /// `c*_{s,1−α/q}` for each marginal
    pub cutoffs: Vec<f64>,
}

impl SimultaneousRegion {
    pub fn contains(&self, candidate: &ProjectiveShape) -> Result<bool> {
        if candidate.q() != self.summary.q() {
            return Err(Error::DimensionMismatch { expected: self.summary.q(), got: candidate.q() });
        }
        for (s, c) in self.cutoffs.iter().enumerate() {
            if super::marginal_t(&self.summary, s, &candidate.axes()[s])? > *c {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn simultaneous_region(sample: &ShapeSample, alpha: f64, b: usize, seed: u64) -> Result<SimultaneousRegion> {
    check_alpha(alpha)?;
    let summary = summarize(sample, DEFAULT_GAP_TOL)?;
    let marginals = marginal_bootstrap_all(sample, b, seed)?;
    let level = alpha / sample.q() as f64;
    let cutoffs = marginals.iter().map(|d| d.critical_value(level)).collect::<Result<Vec<_>>>()?;
    Ok(SimultaneousRegion { summary, alpha, marginals, cutoffs })
}

pub fn simultaneous_region_contains(
    sample: &ShapeSample,
    candidate: &ProjectiveShape,
    alpha: f64,
    b: usize,
    seed: u64,
) -> Result<bool> {
    simultaneous_region(sample, alpha, b, seed)?.contains(candidate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::ProjectivePoint;

    fn wobble(n: usize, q: usize) -> ShapeSample {
        let obs = (0..n)
            .map(|r| {
                let axes = (0..q)
                    .map(|s| {
                        let a = 0.1 * ((r * 7 + s * 3) as f64).sin();
                        let b = 0.1 * ((r * 5 + s * 11) as f64).cos();
                        ProjectivePoint::from_slice(&[a, b, 1.0]).unwrap()
                    })
                    .collect();
                ProjectiveShape::new(axes).unwrap()
            })
            .collect();
        ShapeSample::new(obs).unwrap()
    }

    #[test]
    fn indices_are_reproducible() {
        assert_eq!(resample_indices(9, 3, 50), resample_indices(9, 3, 50));
        assert_ne!(resample_indices(9, 3, 50), resample_indices(9, 4, 50));
        assert!(resample_indices(1, 0, 7).iter().all(|&i| i < 7));
    }

    #[test]
    fn identical_shapes_skip_everything() {
        let s0 = ProjectiveShape::new(vec![ProjectivePoint::from_slice(&[0.1, 0.2, 1.0]).unwrap()]).unwrap();
        let sample = ShapeSample::new(vec![s0; 10]).unwrap();
        assert!(matches!(bootstrap_t(&sample, 50, 1), Err(Error::TooManySkipped { skipped: 50, total: 50 })));
        assert!(matches!(marginal_bootstrap_t(&sample, 0, 50, 1), Err(Error::TooManySkipped { .. })));
    }

    #[test]
    fn same_seed_same_values() {
        let sample = wobble(20, 2);
        let a = bootstrap_t(&sample, 60, 42).unwrap();
        let b = bootstrap_t(&sample, 60, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.values.windows(2).all(|w| w[0] <= w[1]));
        assert_ne!(a.values, bootstrap_t(&sample, 60, 43).unwrap().values);
    }

    #[test]
    fn critical_value_order_statistic() {
        let dist = BootstrapDistribution {
            values: (1..=400).map(f64::from).collect(),
            b: 400,
            skipped: 0,
            seed: 0,
            warning: false,
        };
        assert_eq!(dist.critical_value(0.05).unwrap(), 380.0);
        assert_eq!(dist.critical_value(0.051).unwrap(), 380.0);
        assert_eq!(dist.critical_value(0.049).unwrap(), 381.0);
        assert_eq!(dist.critical_value(1e-9).unwrap(), 400.0);
    }

    #[test]
    fn sample_mean_in_every_region() {
        let sample = wobble(20, 2);
        let summary = summarize(&sample, DEFAULT_GAP_TOL).unwrap();
        let dist = bootstrap_t(&sample, 50, 7).unwrap();
        assert!(region_contains_bootstrap(&summary, &dist, &summary.mean, 0.05).unwrap());
        assert!(simultaneous_region_contains(&sample, &summary.mean, 0.05, 50, 7).unwrap());
    }

    #[test]
    fn single_marginal_bonferroni_is_plain_bootstrap() {
        let sample = wobble(20, 1);
        let summary = summarize(&sample, DEFAULT_GAP_TOL).unwrap();
        let full = bootstrap_t(&sample, 80, 3).unwrap();
        let marg = marginal_bootstrap_t(&sample, 0, 80, 3).unwrap();
        assert_eq!(full.values.len(), marg.values.len());
        for (a, b) in full.values.iter().zip(&marg.values) {
            assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
        let region = simultaneous_region(&sample, 0.1, 80, 3).unwrap();
        for c in [0.0, 0.02, 0.05, 0.1] {
            let cand = ProjectiveShape::new(vec![ProjectivePoint::from_slice(&[c, -c, 1.0]).unwrap()]).unwrap();
            assert_eq!(
                region.contains(&cand).unwrap(),
                region_contains_bootstrap(&summary, &marg, &cand, 0.1).unwrap()
            );
        }
    }
}
