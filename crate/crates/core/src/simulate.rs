//! Synthetic data: two-camera scenes and concentrated shape samples.

use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, Unit, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::camera::{
    camera_matrix, essential_from_pose, fundamental_from_essential, CameraIntrinsics, CameraPose, Correspondences,
    FundamentalMatrix,
};
use crate::error::{Error, Result};
use crate::projective::{ProjectiveFrame, ProjectivePoint};
use crate::shape::{shape_of, FrameSelection, KAd, ProjectiveShape};
use crate::stats::ShapeSample;

/// Attempts at drawing a usable configuration before giving up.
pub const MAX_ATTEMPTS: usize = 100;
/// Scene centre on the optical axis of the first camera.
pub const SCENE_DEPTH: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    /// number of landmarks, at least 8
    pub k: usize,
    /// standard deviation of the pixel noise
    pub noise_sigma: f64,
    /// put every landmark on one plane
    pub planar: bool,
}

impl SceneConfig {
    pub fn new(k: usize, noise_sigma: f64) -> Self {
        SceneConfig { k, noise_sigma, planar: false }
    }
}

/// A 3D k-ad seen by two cameras with shared intrinsics.
///
/// The first camera is `(A | 0)`, the second `(AR | At)`.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub world: KAd,
    pub intrinsics: CameraIntrinsics,
    pub pose: CameraPose,
    /// `(label, x₁, y₁, x₂, y₂)` rows, labels 1..=k
    pub pixels: Vec<(i64, [f64; 4])>,
    pub correspondences: Correspondences,
}

impl SyntheticScene {
    /// The exact fundamental matrix of the two cameras.
    pub fn fundamental(&self) -> Result<FundamentalMatrix> {
        fundamental_from_essential(&essential_from_pose(&self.pose)?, &self.intrinsics.matrix())
    }

    /// Projective shape of the world k-ad w.r.t. the leading frame.
    pub fn true_shape(&self) -> Result<ProjectiveShape> {
        shape_of(&self.world, &FrameSelection::leading(3))
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn random_intrinsics<R: Rng + ?Sized>(rng: &mut R) -> Result<CameraIntrinsics> {
    CameraIntrinsics::new(
        uniform(rng, 700.0, 900.0),
        1.0,
        uniform(rng, 0.95, 1.05),
        uniform(rng, -0.01, 0.01),
        320.0 + uniform(rng, -20.0, 20.0),
        240.0 + uniform(rng, -20.0, 20.0),
    )
}

/// Second camera orbiting the scene centre by 10 to 40 degrees.
fn random_pose<R: Rng + ?Sized>(rng: &mut R) -> Result<CameraPose> {
    let phi = uniform(rng, 0.0, std::f64::consts::TAU);
    let axis = Unit::new_normalize(Vector3::new(phi.cos(), phi.sin(), uniform(rng, -0.3, 0.3)));
    let angle = uniform(rng, 10.0, 40.0).to_radians();
    let r: Matrix3<f64> = Rotation3::from_axis_angle(&axis, angle).into_inner();
    let centre = Vector3::new(0.0, 0.0, SCENE_DEPTH);
    let c2 = centre - r.transpose() * centre;
    CameraPose::new(r, -(r * c2))
}

fn random_world<R: Rng + ?Sized>(rng: &mut R, k: usize, planar: bool) -> Vec<Vector3<f64>> {
    (0..k)
        .map(|_| {
            let z = if planar { SCENE_DEPTH } else { SCENE_DEPTH + uniform(rng, -1.0, 1.0) };
            Vector3::new(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), z)
        })
        .collect()
}

fn try_world<R: Rng + ?Sized>(rng: &mut R, config: &SceneConfig) -> Result<KAd> {
    let points = random_world(rng, config.k, config.planar)
        .iter()
        .map(|x| ProjectivePoint::affine_embed(x.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    let kad = KAd::new(points)?;
    if !config.planar {
        ProjectiveFrame::new(kad.points()[..5].to_vec())?;
    }
    Ok(kad)
}

fn try_views<R: Rng + ?Sized>(rng: &mut R, world: &KAd, noise_sigma: f64) -> Result<SyntheticScene> {
    let intrinsics = random_intrinsics(rng)?;
    let pose = random_pose(rng)?;
    let b1 = camera_matrix(&intrinsics, &CameraPose::identity());
    let b2 = camera_matrix(&intrinsics, &pose);
    let mut pixels = Vec::with_capacity(world.k());
    for (i, p) in world.points().iter().enumerate() {
        let x = Vector3::from_column_slice(&p.affine_coords()?);
        if (pose.r * x + pose.t).z < 0.5 {
            return Err(Error::Simulation("landmark behind the second camera".into()));
        }
        let mut pix = [0.0; 4];
        for (j, b) in [&b1, &b2].into_iter().enumerate() {
            let u = b.project(p)?.affine_coords()?;
            pix[2 * j] = u[0] + noise_sigma * gaussian(rng);
            pix[2 * j + 1] = u[1] + noise_sigma * gaussian(rng);
        }
        pixels.push((i as i64 + 1, pix));
    }
    let correspondences = Correspondences::from_pixels(&pixels)?;
    Ok(SyntheticScene { world: world.clone(), intrinsics, pose, pixels, correspondences })
}

fn retry<T>(mut f: impl FnMut() -> Result<T>) -> Result<T> {
    let mut last = None;
    for _ in 0..MAX_ATTEMPTS {
        match f() {
            Ok(v) => return Ok(v),
            Err(e) => last = Some(e),
        }
    }
    Err(Error::Simulation(format!(
        "no usable configuration after {MAX_ATTEMPTS} attempts ({})",
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn check_config(config: &SceneConfig) -> Result<()> {
    if config.k < 8 {
        return Err(Error::InvalidInput(format!("a scene needs k >= 8 landmarks, got {}", config.k)));
    }
    if !(config.noise_sigma >= 0.0 && config.noise_sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("noise sigma must be >= 0, got {}", config.noise_sigma)));
    }
    Ok(())
}

/// A k-ad in the box `[−1, 1]² × [4, 6]` whose first five landmarks are in
/// general position (all on the plane `z = 5` when `planar` is set).
pub fn simulate_world<R: Rng + ?Sized>(rng: &mut R, config: &SceneConfig) -> Result<KAd> {
    check_config(config)?;
    retry(|| try_world(rng, config))
}

/// Two fresh cameras looking at `world`, redrawn until every landmark is in
/// front of both.
pub fn simulate_views<R: Rng + ?Sized>(rng: &mut R, world: &KAd, noise_sigma: f64) -> Result<SyntheticScene> {
    if world.m() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: world.m() });
    }
    retry(|| try_views(rng, world, noise_sigma))
}

/// A random world k-ad and one pair of views of it.
pub fn simulate_scene<R: Rng + ?Sized>(rng: &mut R, config: &SceneConfig) -> Result<SyntheticScene> {
    let world = simulate_world(rng, config)?;
    simulate_views(rng, &world, config.noise_sigma)
}

/// One world k-ad photographed by `pairs` independent camera pairs.
pub fn simulate_pairs<R: Rng + ?Sized>(rng: &mut R, config: &SceneConfig, pairs: usize) -> Result<Vec<SyntheticScene>> {
    let world = simulate_world(rng, config)?;
    (0..pairs).map(|_| simulate_views(rng, &world, config.noise_sigma)).collect()
}

/// Random rotation of ℝⁿ, Haar distributed, determinant +1.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if crate::linalg::det(&q) < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Orthonormal basis of the complement of the unit vector `mu`, as columns.
pub fn complement_basis(mu: &DVector<f64>) -> DMatrix<f64> {
    let n = mu.len();
    let last = n - 1;
    let mut v = mu.clone();
    v[last] += if mu[last] >= 0.0 { 1.0 } else { -1.0 };
    // Householder reflection sending e_last to ∓mu
    let h = DMatrix::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared());
    h.columns(0, last).into_owned()
}

/// Axes `[μ_s + σ z_s]` with isotropic Gaussian tangent noise `z_s`.
///
/// With `correlation = ρ` the tangent noise of different marginals shares a
/// common component, `z_s = √ρ w + √(1−ρ) e_s`. Each `z_s` is marginally
/// isotropic, so the extrinsic mean of the model is exactly `μ`.
#[derive(Debug, Clone)]
pub struct TangentModel {
    mean: ProjectiveShape,
    bases: Vec<DMatrix<f64>>,
    sigma: f64,
    correlation: f64,
}

impl TangentModel {
    pub fn new(mean: ProjectiveShape, sigma: f64, correlation: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("tangent sigma must be > 0, got {sigma}")));
        }
        if !(0.0..=1.0).contains(&correlation) {
            return Err(Error::InvalidInput(format!("correlation must lie in [0, 1], got {correlation}")));
        }
        let bases = mean.axes().iter().map(|a| complement_basis(a.coords())).collect();
        Ok(TangentModel { mean, bases, sigma, correlation })
    }

    pub fn mean(&self) -> &ProjectiveShape {
        &self.mean
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ProjectiveShape> {
        let m = self.mean.m();
        let common = DVector::from_fn(m, |_, _| gaussian(rng));
        let (a, b) = (self.correlation.sqrt(), (1.0 - self.correlation).sqrt());
        let axes = self
            .mean
            .axes()
            .iter()
            .zip(&self.bases)
            .map(|(mu, basis)| {
                let own = DVector::from_fn(m, |_, _| gaussian(rng));
                let z = &common * a + own * b;
                ProjectivePoint::new(mu.coords() + basis * z * self.sigma)
            })
            .collect::<Result<Vec<_>>>()?;
        ProjectiveShape::new(axes)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<ShapeSample> {
        ShapeSample::new((0..n).map(|_| self.sample_one(rng)).collect::<Result<Vec<_>>>()?)
    }
}

/// Shape of a random k-ad in general position in ℝPᵐ, with `k = m + 2 + q`.
pub fn random_shape<R: Rng + ?Sized>(rng: &mut R, m: usize, q: usize) -> Result<ProjectiveShape> {
    for _ in 0..MAX_ATTEMPTS {
        let points = (0..m + 2 + q)
            .map(|_| {
                let u: Vec<f64> = (0..m).map(|_| uniform(rng, -1.0, 1.0)).collect();
                ProjectivePoint::affine_embed(&u)
            })
            .collect::<Result<Vec<_>>>()?;
        let kad = KAd::new(points)?;
        if let Ok(shape) = shape_of(&kad, &FrameSelection::leading(m)) {
            return Ok(shape);
        }
    }
    Err(Error::Simulation(format!("no general-position {}-ad after {MAX_ATTEMPTS} attempts", m + 2 + q)))
}
