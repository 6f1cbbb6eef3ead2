use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::camera::{reconstruct_configuration, Correspondences};
use crate::coverage::{run_coverage, CoverageConfig};
use crate::error::{Error, Result};
use crate::projective::{ProjectivePoint, DEFAULT_EPS_AFFINE};
use crate::shape::{shape_of, FrameSelection, KAd};
use crate::simulate::{simulate_pairs, SceneConfig};
use crate::stats::{asymptotic_test, bootstrap_t_with, summarize, DEFAULT_GAP_TOL};

use super::document::{fmt_f64, Document, Table};
use super::files::{CorrespondenceFile, PointsFile, ShapesFile};
use super::{COVERAGE_KIND, MEAN_TEST_KIND, RECONSTRUCTION_KIND};

/// Settings shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    /// bootstrap resamples; 0 skips the bootstrap
    pub b: usize,
    pub seed: u64,
    pub gap_tol: f64,
    pub eps_affine: f64,
    /// frame landmark labels; `None` takes the first m+2 landmarks
    pub frame: Option<Vec<i64>>,
    pub noise_sigma: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.05,
            b: 400,
            seed: 0,
            gap_tol: DEFAULT_GAP_TOL,
            eps_affine: DEFAULT_EPS_AFFINE,
            frame: None,
            noise_sigma: 0.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.gap_tol >= 0.0 && self.eps_affine >= 0.0) {
            return Err(Error::InvalidInput("tolerances must be nonnegative".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("noise must be >= 0, got {}", self.noise_sigma)));
        }
        Ok(())
    }
}

/// Projective reconstruction of one image pair.
pub fn reconstruct(corr: &CorrespondenceFile) -> Result<Document> {
    let rec = reconstruct_configuration(&Correspondences::from_pixels(&corr.rows)?)?;
    let mut doc = Document::new(RECONSTRUCTION_KIND);
    doc.field("pair", &corr.pair)
        .field("m", 3)
        .field("k", rec.points.len())
        .field_f64("max_residual", rec.max_residual());

    let mut f = Table::new("fundamental", &["c1", "c2", "c3"]);
    for row in rec.fundamental.matrix().row_iter() {
        f.push(row.iter().map(|&v| fmt_f64(v)).collect());
    }
    doc.tables.push(f);
    doc.tables.push(PointsFile { labels: rec.labels.clone(), points: rec.points.clone() }.table());
    let mut res = Table::new("residuals", &["label", "residual"]);
    for (l, r) in rec.labels.iter().zip(&rec.residuals) {
        res.push(vec![l.to_string(), fmt_f64(*r)]);
    }
    doc.tables.push(res);
    Ok(doc)
}

fn labelled_points(doc: &Document) -> Result<PointsFile> {
    if doc.kind == CorrespondenceFile::KIND {
        let corr = CorrespondenceFile::from_document(doc)?;
        let rec = reconstruct_configuration(&Correspondences::from_pixels(&corr.rows)?)?;
        Ok(PointsFile { labels: rec.labels, points: rec.points })
    } else {
        PointsFile::from_document(doc)
    }
}

fn reorder(p: PointsFile, order: &[i64]) -> Result<Vec<ProjectivePoint>> {
    if p.labels.len() != order.len() {
        return Err(Error::InvalidInput(format!("inputs have {} and {} landmarks", order.len(), p.labels.len())));
    }
    order
        .iter()
        .map(|l| {
            p.labels
                .iter()
                .position(|x| x == l)
                .map(|i| p.points[i].clone())
                .ok_or_else(|| Error::InvalidInput(format!("landmark label {l} missing from an input")))
        })
        .collect()
}

/// Projective shapes of one or more configurations, one observation each.
///
/// Inputs are correspondence files (reconstructed first), point files or
/// reconstruction reports. Landmarks are matched by label and ordered as in
/// the first input.
pub fn shape(inputs: &[Document], config: &RunConfig) -> Result<ShapesFile> {
    let first = inputs.first().ok_or_else(|| Error::InvalidInput("no input configurations".into()))?;
    let head = labelled_points(first)?;
    let order = head.labels.clone();
    let m = head.m();
    let mut kads = vec![KAd::new(head.points)?];
    for doc in &inputs[1..] {
        kads.push(KAd::new(reorder(labelled_points(doc)?, &order)?)?);
    }
    if let Some(k) = kads.iter().find(|k| k.m() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: k.m() });
    }
    let frame_labels = match &config.frame {
        Some(f) => f.clone(),
        None => order.iter().take(m + 2).copied().collect(),
    };
    for (i, l) in frame_labels.iter().enumerate() {
        if frame_labels[..i].contains(l) {
            return Err(Error::DegenerateFrame(format!("frame label {l} repeated")));
        }
    }
    let indices = frame_labels
        .iter()
        .map(|l| {
            order
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::DegenerateFrame(format!("frame label {l} is not a landmark")))
        })
        .collect::<Result<Vec<_>>>()?;
    let sel = FrameSelection::new(indices, &kads[0])?;
    let shapes = kads.iter().map(|k| shape_of(k, &sel)).collect::<Result<Vec<_>>>()?;
    Ok(ShapesFile { m, frame: frame_labels, shapes })
}

/// One-sample test of `H₀: μ = μ₀` with asymptotic and bootstrap cutoffs.
pub fn mean_test(sample: &ShapesFile, hypothesized: &ShapesFile, config: &RunConfig) -> Result<Document> {
    config.validate()?;
    if !sample.frame.is_empty() && !hypothesized.frame.is_empty() && sample.frame != hypothesized.frame {
        return Err(Error::InvalidInput("sample and hypothesis use different frames".into()));
    }
    let mu0 = hypothesized.single()?;
    let data = sample.sample()?;
    let summary = summarize(&data, config.gap_tol)?;
    let report = asymptotic_test(&summary, mu0, config.alpha)?;

    let mut doc = Document::new(MEAN_TEST_KIND);
    doc.field("n", summary.n)
        .field("m", summary.m())
        .field("q", summary.q())
        .field("dof", report.dof)
        .field_f64("alpha", config.alpha)
        .field_f64("statistic", report.statistic)
        .field("method", report.method.as_str())
        .field_f64("p_value", report.p_value)
        .field_f64("critical_value", report.critical_value)
        .field("reject", report.reject)
        .field("boot", config.b);
    if config.b > 0 {
        let dist = bootstrap_t_with(&data, config.b, config.seed, config.gap_tol)?;
        let c = dist.critical_value(config.alpha)?;
        let exceed = dist.values.iter().filter(|&&v| v >= report.statistic).count();
        doc.field("seed", config.seed)
            .field_f64("bootstrap_critical_value", c)
            .field_f64("bootstrap_p_value", exceed as f64 / dist.values.len() as f64)
            .field("bootstrap_reject", report.statistic > c)
            .field("skipped", dist.skipped)
            .field("skip_warning", dist.warning);
    }
    Ok(doc)
}

/// Files produced by [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub pairs: Vec<CorrespondenceFile>,
    pub world: PointsFile,
    /// shape of the world k-ad w.r.t. landmarks 1..=5, absent for planar scenes
    pub truth: Option<ShapesFile>,
}

/// Photographs one random k-ad with `pairs` camera pairs.
pub fn simulate(config: &RunConfig, k: usize, pairs: usize, planar: bool) -> Result<Simulation> {
    config.validate()?;
    if pairs == 0 {
        return Err(Error::InvalidInput("need at least one image pair".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scenes = simulate_pairs(&mut rng, &SceneConfig { k, noise_sigma: config.noise_sigma, planar }, pairs)?;
    let world = scenes[0].world.clone();
    let labels: Vec<i64> = (1..=k as i64).collect();
    let truth = if planar {
        None
    } else {
        let shapes = vec![shape_of(&world, &FrameSelection::leading(3))?];
        Some(ShapesFile { m: 3, frame: labels[..5].to_vec(), shapes })
    };
    Ok(Simulation {
        pairs: scenes
            .iter()
            .enumerate()
            .map(|(i, s)| CorrespondenceFile { pair: format!("pair_{:03}", i + 1), rows: s.pixels.clone() })
            .collect(),
        world: PointsFile { labels: labels.clone(), points: world.points().to_vec() },
        truth,
    })
}

/// Monte Carlo coverage report.
pub fn coverage(config: &CoverageConfig) -> Result<Document> {
    let report = run_coverage(config)?;
    let c = &report.config;
    let mut doc = Document::new(COVERAGE_KIND);
    doc.field("m", c.m)
        .field("q", c.q)
        .field("n", c.n)
        .field("trials", c.trials)
        .field_f64("sigma", c.sigma)
        .field_f64("correlation", c.correlation)
        .field_f64("alpha", c.alpha)
        .field_f64("nominal", 1.0 - c.alpha)
        .field("boot", c.b)
        .field("seed", c.seed);
    let mut t = Table::new("regions", &["region", "covered", "evaluated", "failed", "coverage", "standard_error"]);
    for r in &report.regions {
        t.push(vec![
            r.kind.as_str().into(),
            r.covered.to_string(),
            r.evaluated.to_string(),
            r.failed.to_string(),
            fmt_f64(r.coverage()),
            fmt_f64(r.standard_error()),
        ]);
    }
    doc.tables.push(t);
    Ok(doc)
}
