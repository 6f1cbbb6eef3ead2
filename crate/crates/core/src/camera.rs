//! Pinhole cameras, epipolar geometry and two-view reconstruction.
//!
//! Image points are elements of ℝP² given in homogeneous pixel coordinates.
//! The fundamental matrix `F` of a camera pair satisfies `v₂ᵀ F v₁ = 0` for
//! every pair of matched pixels, and once `F` is factored as `t_× R` the
//! cameras `(I | 0)` and `(R | t)` reproduce both images. Any other choice of
//! factorization changes the reconstructed points by a single projective
//! transformation of ℝP³, so the projective shape of the reconstruction is
//! well defined.

use std::collections::HashSet;

use nalgebra::{DMatrix, Matrix3, Matrix3x2, Matrix3x4, Vector3};

use crate::error::{Error, Result};
use crate::projective::{apply_projective_map, ProjectivePoint};

/// Relative threshold on the second-smallest singular value of the
/// eight-point design matrix.
pub const DESIGN_RANK_TOL: f64 = 1e-8;
/// Relative threshold on σ₂/σ₁ for a matrix to count as rank two.
pub const RANK_TWO_TOL: f64 = 1e-10;
/// Threshold on the smallest singular value of `(−t | v₂)` with unit columns.
pub const BASELINE_TOL: f64 = 1e-10;
const ORTHO_TOL: f64 = 1e-10;

/// Internal camera parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    /// focal length
    pub f: f64,
    /// pixels per unit length along u
    pub k_u: f64,
    /// pixels per unit length along v
    pub k_v: f64,
    /// skew factor, `cot θ`
    pub k_c: f64,
    pub u0: f64,
    pub v0: f64,
}

impl CameraIntrinsics {
    pub fn new(f: f64, k_u: f64, k_v: f64, k_c: f64, u0: f64, v0: f64) -> Result<Self> {
        if !(f > 0.0 && k_u > 0.0 && k_v > 0.0) {
            return Err(Error::InvalidInput(format!("intrinsics need f, k_u, k_v > 0 (got {f}, {k_u}, {k_v})")));
        }
        if ![k_c, u0, v0].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite intrinsic parameter".into()));
        }
        Ok(CameraIntrinsics { f, k_u, k_v, k_c, u0, v0 })
    }

    /// The calibrated camera: `A = I`.
    pub fn identity() -> Self {
        CameraIntrinsics { f: 1.0, k_u: 1.0, k_v: 1.0, k_c: 0.0, u0: 0.0, v0: 0.0 }
    }

    /// `A = [[k_u f, k_c f, u₀], [0, k_v f, v₀], [0, 0, 1]]`, the calibration
    /// matrix times the focal block.
    pub fn matrix(&self) -> Matrix3<f64> {
        #[rustfmt::skip]
        let a = Matrix3::new(
            self.k_u * self.f, self.k_c * self.f, self.u0,
            0.0,               self.k_v * self.f, self.v0,
            0.0,               0.0,               1.0,
        );
        a
    }
}

/// Rigid motion `x ↦ R x + t` from world to camera coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub r: Matrix3<f64>,
    pub t: Vector3<f64>,
}

impl CameraPose {
    pub fn new(r: Matrix3<f64>, t: Vector3<f64>) -> Result<Self> {
        check_rotation(&r)?;
        Ok(CameraPose { r, t })
    }

    pub fn identity() -> Self {
        CameraPose { r: Matrix3::identity(), t: Vector3::zeros() }
    }
}

pub(crate) fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    let err = (r.transpose() * r - Matrix3::identity()).abs().max();
    if err > ORTHO_TOL {
        return Err(Error::NotRotation(format!("|RᵀR − I| = {err:e}")));
    }
    let d = r.determinant();
    if (d - 1.0).abs() > ORTHO_TOL {
        return Err(Error::NotRotation(format!("det R = {d}")));
    }
    Ok(())
}

/// A 3×4 camera matrix `B = (P | p)` of rank three.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionMatrix {
    b: Matrix3x4<f64>,
}

impl ProjectionMatrix {
    pub fn new(b: Matrix3x4<f64>) -> Result<Self> {
        let fro = b.norm();
        if fro == 0.0 || !fro.is_finite() {
            return Err(Error::InvalidInput("camera matrix must be finite and nonzero".into()));
        }
        let sv = (b / fro).svd(false, false).singular_values;
        if sv[2] <= 1e-10 {
            return Err(Error::InvalidInput(format!("camera matrix must have rank 3 (σ₃ = {:e})", sv[2])));
        }
        Ok(ProjectionMatrix { b })
    }

    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.b
    }

    /// The left 3×3 block `P`.
    pub fn p(&self) -> Matrix3<f64> {
        self.b.fixed_view::<3, 3>(0, 0).into_owned()
    }

    /// The last column `p`.
    pub fn p_vec(&self) -> Vector3<f64> {
        self.b.column(3).into_owned()
    }

    /// Image of a world point; fails for points on the principal plane's
    /// kernel (the camera center).
    pub fn project(&self, world: &ProjectivePoint) -> Result<ProjectivePoint> {
        if world.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: world.dim() });
        }
        let b = DMatrix::from_column_slice(3, 4, self.b.as_slice());
        apply_projective_map(&b, world)
    }
}

/// `B = (A R | A t)`.
pub fn camera_matrix(c: &CameraIntrinsics, pose: &CameraPose) -> ProjectionMatrix {
    let a = c.matrix();
    let mut b = Matrix3x4::zeros();
    b.fixed_view_mut::<3, 3>(0, 0).copy_from(&(a * pose.r));
    b.set_column(3, &(a * pose.t));
    ProjectionMatrix { b }
}

/// The matrix of `y ↦ t × y`.
pub fn cross_matrix(t: &Vector3<f64>) -> Matrix3<f64> {
    #[rustfmt::skip]
    let m = Matrix3::new(
        0.0,   -t[2],  t[1],
        t[2],   0.0,  -t[0],
        -t[1],  t[0],  0.0,
    );
    m
}

/// Scales to unit Frobenius norm and makes the largest-magnitude entry
/// positive (row-major scan, first wins on ties).
fn normalize_projective_matrix(m: &Matrix3<f64>) -> Matrix3<f64> {
    let n = m / m.norm();
    let mut best = (0, 0);
    for i in 0..3 {
        for j in 0..3 {
            if n[(i, j)].abs() > n[best].abs() {
                best = (i, j);
            }
        }
    }
    if n[best] < 0.0 {
        -n
    } else {
        n
    }
}

/// `E = t_× R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialMatrix {
    e: Matrix3<f64>,
}

impl EssentialMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.e
    }
}

pub fn essential_from_pose(pose: &CameraPose) -> Result<EssentialMatrix> {
    if pose.t.norm() <= 1e-10 {
        return Err(Error::ZeroTranslation);
    }
    Ok(EssentialMatrix { e: cross_matrix(&pose.t) * pose.r })
}

/// A rank-two 3×3 matrix with unit Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix {
    f: Matrix3<f64>,
}

impl FundamentalMatrix {
    /// Projects `m` onto the rank-two matrices (closest in Frobenius norm)
    /// and applies the scale/sign convention.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) || m.norm() == 0.0 {
            return Err(Error::InvalidInput("fundamental matrix must be finite and nonzero".into()));
        }
        let svd = (m / m.norm()).svd(true, true);
        let s = svd.singular_values;
        if s[1] <= RANK_TWO_TOL * s[0] {
            return Err(Error::RankDeficient);
        }
        let u = svd.u.unwrap();
        let v_t = svd.v_t.unwrap();
        let d = Matrix3::from_diagonal(&Vector3::new(s[0], s[1], 0.0));
        Ok(FundamentalMatrix { f: normalize_projective_matrix(&(u * d * v_t)) })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.f
    }

    /// `v₂ᵀ F v₁` on unit representatives.
    pub fn epipolar_residual(&self, v1: &ProjectivePoint, v2: &ProjectivePoint) -> f64 {
        let a = Vector3::from_column_slice(v1.coords().as_slice());
        let b = Vector3::from_column_slice(v2.coords().as_slice());
        b.dot(&(self.f * a))
    }

    /// Frobenius distance between the two matrices as points of ℝP⁸.
    pub fn distance(&self, other: &FundamentalMatrix) -> f64 {
        (self.f - other.f).norm().min((self.f + other.f).norm())
    }

    /// Epipole of the second image, the unit left null vector `Fᵀe = 0`.
    pub fn left_epipole(&self) -> Vector3<f64> {
        let svd = self.f.svd(true, false);
        svd.u.unwrap().column(2).into_owned()
    }
}

/// `F = A⁻ᵀ E A⁻¹`.
pub fn fundamental_from_essential(e: &EssentialMatrix, a: &Matrix3<f64>) -> Result<FundamentalMatrix> {
    let a_inv = a.try_inverse().ok_or(Error::SingularIntrinsics)?;
    if !a_inv.iter().all(|x| x.is_finite()) {
        return Err(Error::SingularIntrinsics);
    }
    FundamentalMatrix::from_matrix(&(a_inv.transpose() * e.e * a_inv))
}

/// One labelled pair of matched image points.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub label: i64,
    pub first: ProjectivePoint,
    pub second: ProjectivePoint,
}

/// Matched landmarks in two images, with unique labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondences {
    pairs: Vec<Correspondence>,
}

impl Correspondences {
    pub fn new(pairs: Vec<Correspondence>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &pairs {
            if c.first.dim() != 2 || c.second.dim() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, got: c.first.dim().max(c.second.dim()) });
            }
            if !seen.insert(c.label) {
                return Err(Error::InvalidInput(format!("duplicate landmark label {}", c.label)));
            }
        }
        Ok(Correspondences { pairs })
    }

    /// Builds from affine pixel coordinates `(label, x₁, y₁, x₂, y₂)`.
    pub fn from_pixels(rows: &[(i64, [f64; 4])]) -> Result<Self> {
        let pairs = rows
            .iter()
            .map(|(label, p)| {
                Ok(Correspondence {
                    label: *label,
                    first: ProjectivePoint::affine_embed(&p[..2])?,
                    second: ProjectivePoint::affine_embed(&p[2..])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[Correspondence] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn labels(&self) -> Vec<i64> {
        self.pairs.iter().map(|c| c.label).collect()
    }
}

/// Similarity moving the centroid to the origin and the RMS radius to √2.
fn isotropic_normalization(points: &[[f64; 2]]) -> Result<Matrix3<f64>> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let ms = points.iter().map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sum::<f64>() / n;
    if !(ms > 0.0) {
        return Err(Error::DegenerateConfiguration("all image points coincide".into()));
    }
    let s = 2f64.sqrt() / ms.sqrt();
    #[rustfmt::skip]
    let t = Matrix3::new(
        s,   0.0, -s * cx,
        0.0, s,   -s * cy,
        0.0, 0.0, 1.0,
    );
    Ok(t)
}

fn affine_pair(p: &ProjectivePoint) -> Result<[f64; 2]> {
    let u = p.affine_coords()?;
    Ok([u[0], u[1]])
}

/// Normalized eight-point estimate of `F`.
///
/// Each image is normalized isotropically, the stacked constraints
/// `ỹ₂ᵀ F ỹ₁ = 0` are solved for the right singular vector of the smallest
/// singular value, rank two is enforced, and the normalization undone.
pub fn estimate_fundamental(corr: &Correspondences) -> Result<FundamentalMatrix> {
    let (f_hat, t1, t2) = estimate_normalized(corr)?;
    FundamentalMatrix::from_matrix(&(t2.transpose() * f_hat.f * t1))
}

/// Rank-two estimate in normalized image coordinates, with the two
/// normalizing similarities.
fn estimate_normalized(corr: &Correspondences) -> Result<(FundamentalMatrix, Matrix3<f64>, Matrix3<f64>)> {
    let k = corr.len();
    if k < 8 {
        return Err(Error::TooFewMatches(k));
    }
    let x1: Vec<[f64; 2]> = corr.pairs.iter().map(|c| affine_pair(&c.first)).collect::<Result<_>>()?;
    let x2: Vec<[f64; 2]> = corr.pairs.iter().map(|c| affine_pair(&c.second)).collect::<Result<_>>()?;
    let t1 = isotropic_normalization(&x1)?;
    let t2 = isotropic_normalization(&x2)?;

    // zero rows pad the system to 9 rows so the full right basis is available
    let rows = k.max(9);
    let mut design = DMatrix::<f64>::zeros(rows, 9);
    for (i, (a, b)) in x1.iter().zip(&x2).enumerate() {
        let y1 = t1 * Vector3::new(a[0], a[1], 1.0);
        let y2 = t2 * Vector3::new(b[0], b[1], 1.0);
        for r in 0..3 {
            for c in 0..3 {
                design[(i, 3 * r + c)] = y2[r] * y1[c];
            }
        }
    }
    let svd = design.svd(false, true);
    let s = &svd.singular_values;
    if s[7] < DESIGN_RANK_TOL * s[0] {
        return Err(Error::DegenerateConfiguration(format!(
            "design matrix has a multi-dimensional null space (σ₈/σ₁ = {:e}); \
             points may be coplanar or cameras may share a center",
            s[7] / s[0]
        )));
    }
    let v_t = svd.v_t.unwrap();
    let f_hat = Matrix3::from_row_slice(v_t.row(8).transpose().as_slice());
    Ok((FundamentalMatrix::from_matrix(&f_hat)?, t1, t2))
}

/// A factorization `F = t_× R` with cameras `(I | 0)` and `(R | t)`.
///
/// `R` is nonsingular but in general not a rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoViewFactorization {
    pub r: Matrix3<f64>,
    pub t: Vector3<f64>,
}

impl TwoViewFactorization {
    /// Camera matrices `((I | 0), (R | t))`.
    pub fn cameras(&self) -> (Matrix3x4<f64>, Matrix3x4<f64>) {
        let mut b1 = Matrix3x4::zeros();
        b1.fixed_view_mut::<3, 3>(0, 0).fill_with_identity();
        let mut b2 = Matrix3x4::zeros();
        b2.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.r);
        b2.set_column(3, &self.t);
        (b1, b2)
    }
}

/// Factors `F = t_× R` with `t` the unit left null vector of `F` and
/// `R = −t_× F + t wᵀ`, `w ∈ {e₁, e₂, e₃}` chosen to maximize `|det R|`.
pub fn factor_fundamental(f: &FundamentalMatrix) -> Result<TwoViewFactorization> {
    let svd = f.f.svd(true, false);
    let s = svd.singular_values;
    if s[1] <= RANK_TWO_TOL * s[0] {
        return Err(Error::RankDeficient);
    }
    let t: Vector3<f64> = svd.u.unwrap().column(2).into_owned();
    let base = -cross_matrix(&t) * f.f;
    let mut best: Option<(f64, Matrix3<f64>)> = None;
    for i in 0..3 {
        let r = base + t * Vector3::ith(i, 1.0).transpose();
        let d = r.determinant().abs();
        if best.as_ref().is_none_or(|(bd, _)| d > *bd) {
            best = Some((d, r));
        }
    }
    let (d, r) = best.unwrap();
    if d <= 1e-12 {
        return Err(Error::RankDeficient);
    }
    Ok(TwoViewFactorization { r, t })
}

/// Recovers `[u] ∈ ℝP³` with `(I|0)u ∝ v₁` and `(R|t)u ≈ v₂`.
///
/// Solves `(−t | v₂)(a, b)ᵀ = R v₁` in the least-squares sense and returns
/// `u = (v₁, a)`.
pub fn triangulate(fac: &TwoViewFactorization, v1: &ProjectivePoint, v2: &ProjectivePoint) -> Result<ProjectivePoint> {
    if v1.dim() != 2 || v2.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: v1.dim().max(v2.dim()) });
    }
    let x1 = Vector3::from_column_slice(v1.coords().as_slice());
    let x2 = Vector3::from_column_slice(v2.coords().as_slice());
    let tn = fac.t.norm();
    if tn == 0.0 {
        return Err(Error::ZeroTranslation);
    }
    let a_mat = Matrix3x2::from_columns(&[-fac.t / tn, x2]);
    let svd = a_mat.svd(true, true);
    if svd.singular_values[1] <= BASELINE_TOL {
        return Err(Error::EpipolarDegenerate);
    }
    let rhs = fac.r * x1;
    let sol = svd.solve(&rhs, 0.0).map_err(|_| Error::EpipolarDegenerate)?;
    let a = sol[0] / tn;
    ProjectivePoint::from_slice(&[x1[0], x1[1], x1[2], a])
}

/// Result of reconstructing a configuration from one image pair.
///
/// Triangulation runs in isotropically normalized image coordinates
/// `y₁ = T₁v₁`, `y₂ = T₂v₂`, with `factorization` taken of
/// `T₂⁻ᵀ F T₁⁻¹`. The pixel cameras are `T₁⁻¹(I|0)` and `T₂⁻¹(R|t)`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// `F` in pixel coordinates.
    pub fundamental: FundamentalMatrix,
    pub factorization: TwoViewFactorization,
    pub normalization: (Matrix3<f64>, Matrix3<f64>),
    pub labels: Vec<i64>,
    pub points: Vec<ProjectivePoint>,
    /// Per landmark, the larger axial distance between a normalized image
    /// point and its reprojection.
    pub residuals: Vec<f64>,
}

impl Reconstruction {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// The two camera matrices in pixel coordinates.
    pub fn pixel_cameras(&self) -> (ProjectionMatrix, ProjectionMatrix) {
        let (b1, b2) = self.factorization.cameras();
        let (t1, t2) = self.normalization;
        let inv = |t: Matrix3<f64>| t.try_inverse().expect("similarity is invertible");
        (ProjectionMatrix { b: inv(t1) * b1 }, ProjectionMatrix { b: inv(t2) * b2 })
    }
}

fn reprojection_residual(
    fac: &TwoViewFactorization,
    u: &ProjectivePoint,
    v1: &ProjectivePoint,
    v2: &ProjectivePoint,
) -> Result<f64> {
    let (b1, b2) = fac.cameras();
    let r1 = ProjectionMatrix { b: b1 }.project(u)?.axial_distance(v1)?;
    let r2 = ProjectionMatrix { b: b2 }.project(u)?.axial_distance(v2)?;
    Ok(r1.max(r2))
}

fn apply3(t: &Matrix3<f64>, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    let x = t * Vector3::from_column_slice(p.coords().as_slice());
    ProjectivePoint::from_slice(x.as_slice())
}

/// Estimates `F`, factors it and triangulates every matched pair.
pub fn reconstruct_configuration(corr: &Correspondences) -> Result<Reconstruction> {
    let (f_hat, t1, t2) = estimate_normalized(corr)?;
    let fundamental = FundamentalMatrix::from_matrix(&(t2.transpose() * f_hat.f * t1))?;
    let factorization = factor_fundamental(&f_hat)?;
    let mut points = Vec::with_capacity(corr.len());
    let mut residuals = Vec::with_capacity(corr.len());
    for c in &corr.pairs {
        let (y1, y2) = (apply3(&t1, &c.first)?, apply3(&t2, &c.second)?);
        let u = triangulate(&factorization, &y1, &y2)?;
        residuals.push(reprojection_residual(&factorization, &u, &y1, &y2)?);
        points.push(u);
    }
    Ok(Reconstruction { fundamental, factorization, normalization: (t1, t2), labels: corr.labels(), points, residuals })
}
