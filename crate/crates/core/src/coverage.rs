//! Monte Carlo coverage of the confidence regions.
//!
//! Each trial draws a true shape from a random k-ad in ℝPᵐ, samples n
//! concentrated shapes around it with [`TangentModel`], builds every
//! requested region and records whether it contains the truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::simulate::{random_shape, TangentModel};
use crate::stats::{
    bootstrap_t, region_contains_asymptotic, region_contains_bootstrap, simultaneous_region, summarize, DEFAULT_GAP_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Asymptotic,
    Bootstrap,
    Bonferroni,
}

impl RegionKind {
    pub const ALL: [RegionKind; 3] = [RegionKind::Asymptotic, RegionKind::Bootstrap, RegionKind::Bonferroni];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::Asymptotic => "asymptotic",
            RegionKind::Bootstrap => "bootstrap",
            RegionKind::Bonferroni => "bonferroni",
        }
    }

    fn needs_bootstrap(&self) -> bool {
        !matches!(self, RegionKind::Asymptotic)
    }
}

impl std::str::FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown region type '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub m: usize,
    pub q: usize,
    pub n: usize,
    pub trials: usize,
    /// tangent noise scale of the sampling model
    pub sigma: f64,
    /// cross-marginal correlation of the tangent noise
    pub correlation: f64,
    pub alpha: f64,
    pub b: usize,
    pub seed: u64,
    pub regions: Vec<RegionKind>,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            m: 3,
            q: 1,
            n: 20,
            trials: 200,
            sigma: 0.05,
            correlation: 0.0,
            alpha: 0.05,
            b: 400,
            seed: 0,
            regions: RegionKind::ALL.to_vec(),
        }
    }
}

impl CoverageConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidInput("coverage needs at least one trial".into()));
        }
        if self.m == 0 || self.q == 0 || self.n == 0 {
            return Err(Error::InvalidInput("m, q and n must all be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.regions.is_empty() {
            return Err(Error::InvalidInput("no region type requested".into()));
        }
        if self.b == 0 && self.regions.iter().any(RegionKind::needs_bootstrap) {
            return Err(Error::InvalidInput("bootstrap regions need B >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCoverage {
    pub kind: RegionKind,
    pub covered: usize,
    /// trials in which the region could be built
    pub evaluated: usize,
    /// trials lost to focal samples, singular covariances or skipped resamples
    pub failed: usize,
}

impl RegionCoverage {
    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.evaluated as f64
    }

    /// Binomial standard error of [`coverage`](Self::coverage).
    pub fn standard_error(&self) -> f64 {
        let p = self.coverage();
        (p * (1.0 - p) / self.evaluated as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub config: CoverageConfig,
    pub regions: Vec<RegionCoverage>,
}

fn is_statistical(e: &Error) -> bool {
    e.exit_code() == 4
}

fn trial(config: &CoverageConfig, t: usize) -> Result<Vec<Option<bool>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(t as u64);
    let truth = random_shape(&mut rng, config.m, config.q)?;
    let sample = TangentModel::new(truth.clone(), config.sigma, config.correlation)?.sample(&mut rng, config.n)?;
    let boot_seed: u64 = rng.random();

    let summary = match summarize(&sample, DEFAULT_GAP_TOL) {
        Ok(s) => s,
        Err(e) if is_statistical(&e) => return Ok(vec![None; config.regions.len()]),
        Err(e) => return Err(e),
    };
    config
        .regions
        .iter()
        .map(|kind| {
            let outcome = match kind {
                RegionKind::Asymptotic => region_contains_asymptotic(&summary, &truth, config.alpha),
                RegionKind::Bootstrap => bootstrap_t(&sample, config.b, boot_seed)
                    .and_then(|d| region_contains_bootstrap(&summary, &d, &truth, config.alpha)),
                RegionKind::Bonferroni => {
                    simultaneous_region(&sample, config.alpha, config.b, boot_seed).and_then(|r| r.contains(&truth))
                }
            };
            match outcome {
                Ok(c) => Ok(Some(c)),
                Err(e) if is_statistical(&e) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Runs every trial (in parallel, reproducibly) and tallies coverage.
pub fn run_coverage(config: &CoverageConfig) -> Result<CoverageReport> {
    config.validate()?;
    let outcomes = (0..config.trials).into_par_iter().map(|t| trial(config, t)).collect::<Result<Vec<_>>>()?;
    let regions = config
        .regions
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let mut rc = RegionCoverage { kind, covered: 0, evaluated: 0, failed: 0 };
            for o in &outcomes {
                match o[i] {
                    Some(c) => {
                        rc.evaluated += 1;
                        rc.covered += usize::from(c);
                    }
                    None => rc.failed += 1,
                }
            }
            rc
        })
        .collect();
    Ok(CoverageReport { config: config.clone(), regions })
}
