//! Points, transformations and frames of real projective space ℝPᵐ.
//!
//! A point of ℝPᵐ is a line through the origin of ℝᵐ⁺¹. It is stored as a
//! unit homogeneous vector whose sign carries no meaning: every comparison
//! goes through `|x·y|`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Default threshold on `|x[m+1]|` below which a point is treated as lying
/// on the hyperplane at infinity.
pub const DEFAULT_EPS_AFFINE: f64 = 1e-10;
/// Default threshold on `‖Bx‖` below which a point is treated as lying in
/// the kernel of a projective map.
pub const DEFAULT_EPS_KERNEL: f64 = 1e-10;
/// Minimum `|det|` of the unit-row matrix of any m+1 frame points.
pub const GENERAL_POSITION_TOL: f64 = 1e-8;
/// Minimum reciprocal condition number `σ_min/σ_max` of a transform matrix.
pub const SINGULARITY_TOL: f64 = 1e-12;

/// A point of ℝPᵐ, i.e. an axis `{x, -x}` on the unit sphere of ℝᵐ⁺¹.
#[derive(Debug, Clone)]
pub struct ProjectivePoint {
    coords: DVector<f64>,
}

impl ProjectivePoint {
    /// Builds the point `[x]` from any nonzero homogeneous vector.
    ///
    /// Vectors that are unit to within a few ulps are stored unchanged.
    pub fn new(x: DVector<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "homogeneous vector needs at least 2 coordinates, got {}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite homogeneous coordinate".into()));
        }
        let norm = x.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("zero vector is not a projective point".into()));
        }
        if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(ProjectivePoint { coords: x });
        }
        Ok(ProjectivePoint { coords: x / norm })
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(x))
    }

    /// The standard basis axis `[e_{i+1}]` of ℝPᵐ.
    pub fn basis(m: usize, i: usize) -> Self {
        let mut x = DVector::zeros(m + 1);
        x[i] = 1.0;
        ProjectivePoint { coords: x }
    }

    /// The unit point `[1:…:1]` of ℝPᵐ.
    pub fn unit(m: usize) -> Self {
        let x = DVector::from_element(m + 1, 1.0 / ((m + 1) as f64).sqrt());
        ProjectivePoint { coords: x }
    }

    /// Affine embedding `u ↦ [u¹:…:uᵐ:1]` of ℝᵐ into ℝPᵐ.
    pub fn affine_embed(u: &[f64]) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::InvalidInput("affine vector must have m >= 1 entries".into()));
        }
        let mut x = DVector::from_element(u.len() + 1, 1.0);
        x.rows_mut(0, u.len()).copy_from_slice(u);
        Self::new(x)
    }

    /// Inhomogeneous coordinates `u^j = x^j / x^{m+1}` with the default
    /// threshold.
    pub fn affine_coords(&self) -> Result<Vec<f64>> {
        self.affine_coords_with(DEFAULT_EPS_AFFINE)
    }

    pub fn affine_coords_with(&self, eps_affine: f64) -> Result<Vec<f64>> {
        let m = self.dim();
        let last = self.coords[m];
        if last.abs() <= eps_affine {
            return Err(Error::PointAtInfinity { last });
        }
        Ok(self.coords.rows(0, m).iter().map(|x| x / last).collect())
    }

    /// Dimension m of the ambient projective space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// A unit homogeneous representative. The sign is arbitrary.
    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    /// The same axis with the opposite representative.
    pub fn antipode(&self) -> Self {
        ProjectivePoint { coords: -&self.coords }
    }

    /// `√(1 − (xᵀy)²)`, the sine of the angle between the two axes.
    ///
    /// Evaluated as `‖x − y‖ ‖x + y‖ / 2`, which keeps full precision for
    /// nearly equal axes and is exactly zero for `y = ±x`.
    pub fn axial_distance(&self, other: &ProjectivePoint) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let minus = (&self.coords - &other.coords).norm();
        let plus = (&self.coords + &other.coords).norm();
        Ok((0.5 * minus * plus).min(1.0))
    }

    /// Axial equality: `axial_distance ≤ tol`.
    pub fn approx_eq(&self, other: &ProjectivePoint, tol: f64) -> bool {
        self.axial_distance(other).is_ok_and(|d| d <= tol)
    }
}

impl PartialEq for ProjectivePoint {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 1e-12)
    }
}

/// `β([x]) = [Bx]` for any (m+1)×(m′+1) matrix `B`, defined outside `P(ker B)`.
pub fn apply_projective_map(b: &DMatrix<f64>, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    apply_projective_map_with(b, p, DEFAULT_EPS_KERNEL)
}

pub fn apply_projective_map_with(b: &DMatrix<f64>, p: &ProjectivePoint, eps_kernel: f64) -> Result<ProjectivePoint> {
    if b.ncols() != p.coords.len() {
        return Err(Error::DimensionMismatch { expected: b.ncols(), got: p.coords.len() });
    }
    let y = b * &p.coords;
    let norm = y.norm();
    if norm <= eps_kernel {
        return Err(Error::InKernel { norm });
    }
    Ok(ProjectivePoint { coords: y / norm })
}

/// A projective transformation of ℝPᵐ, given by a nonsingular matrix up to
/// scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveTransform {
    matrix: DMatrix<f64>,
}

impl ProjectiveTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 2 {
            return Err(Error::InvalidInput(format!(
                "transform matrix must be square of size >= 2, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let fro = matrix.norm();
        if !fro.is_finite() || fro == 0.0 {
            return Err(Error::SingularMatrix { det: 0.0 });
        }
        let sv = matrix.singular_values();
        if !(sv.min() > SINGULARITY_TOL * sv.max()) {
            return Err(Error::SingularMatrix { det: linalg::det(&(&matrix / fro)) });
        }
        Ok(ProjectiveTransform { matrix })
    }

    pub fn identity(m: usize) -> Self {
        ProjectiveTransform { matrix: DMatrix::identity(m + 1, m + 1) }
    }

    /// The affine map `u ↦ Au + b` as the block matrix `[[A, b], [0ᵀ, 1]]`.
    pub fn affine(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m || b.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: b.len() });
        }
        let mut mat = DMatrix::identity(m + 1, m + 1);
        mat.view_mut((0, 0), (m, m)).copy_from(a);
        mat.view_mut((0, m), (m, 1)).copy_from(b);
        Self::new(mat)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn apply(&self, p: &ProjectivePoint) -> Result<ProjectivePoint> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: p.dim() });
        }
        let y = &self.matrix * &p.coords;
        let norm = y.norm();
        Ok(ProjectivePoint { coords: y / norm })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ProjectiveTransform) -> Result<ProjectiveTransform> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(ProjectiveTransform { matrix: &self.matrix * &other.matrix })
    }

    pub fn inverse(&self) -> ProjectiveTransform {
        let inv = self.matrix.clone().try_inverse().expect("nonsingular by construction");
        ProjectiveTransform { matrix: inv }
    }
}

/// An ordered set of m+2 points of ℝPᵐ in general position.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveFrame {
    points: Vec<ProjectivePoint>,
}

impl ProjectiveFrame {
    pub fn new(points: Vec<ProjectivePoint>) -> Result<Self> {
        let m = match points.first() {
            Some(p) => p.dim(),
            None => return Err(Error::DegenerateFrame("empty frame".into())),
        };
        if points.len() != m + 2 {
            return Err(Error::DegenerateFrame(format!(
                "a frame of RP^{m} needs {} points, got {}",
                m + 2,
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: p.dim() });
        }
        for skip in 0..m + 2 {
            let cols: Vec<DVector<f64>> =
                points.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| p.coords.clone()).collect();
            let d = linalg::det(&DMatrix::from_columns(&cols));
            if !(d.abs() > GENERAL_POSITION_TOL) {
                return Err(Error::DegenerateFrame(format!(
                    "points other than #{} are linearly dependent (|det| = {:e})",
                    skip + 1,
                    d.abs()
                )));
            }
        }
        Ok(ProjectiveFrame { points })
    }

    /// `([e₁], …, [e_{m+1}], [e₁ + … + e_{m+1}])`.
    pub fn standard(m: usize) -> Self {
        let mut points: Vec<_> = (0..=m).map(|i| ProjectivePoint::basis(m, i)).collect();
        points.push(ProjectivePoint::unit(m));
        ProjectiveFrame { points }
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points.len() - 2
    }

    /// Matrix with the first m+1 frame points as columns.
    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        let cols: Vec<DVector<f64>> = self.points[..=m].iter().map(|p| p.coords.clone()).collect();
        DMatrix::from_columns(&cols)
    }

    /// Solves `U λ = x_{m+2}`: the column scalings that make the first m+1
    /// representatives sum to the last one.
    fn scalings(&self, lu: &nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> Result<DVector<f64>> {
        let m = self.dim();
        lu.solve(&self.points[m + 1].coords)
            .ok_or_else(|| Error::DegenerateFrame("first m+1 points are dependent".into()))
    }
}

/// The transformation sending `frame` onto the standard frame.
///
/// Constructed as the inverse of `U·diag(λ)`, the classical map that sends
/// the standard frame onto `frame`.
pub fn frame_to_standard(frame: &ProjectiveFrame) -> Result<ProjectiveTransform> {
    let u = frame.basis_matrix();
    let lambda = frame.scalings(&u.clone().lu())?;
    if let Some(i) = lambda.iter().position(|l| l.abs() <= f64::EPSILON) {
        return Err(Error::DegenerateFrame(format!("unit point has no component along #{}", i + 1)));
    }
    let forward = u * DMatrix::from_diagonal(&lambda);
    let inverse = forward.try_inverse().ok_or_else(|| Error::DegenerateFrame("frame matrix is singular".into()))?;
    ProjectiveTransform::new(inverse)
}

/// Projective coordinates `p^π` of `p` with respect to `frame`.
///
/// With `v = U⁻¹x` and `λ = U⁻¹x_{m+2}`, the coordinates are
/// `[v¹/λ¹ : … : v^{m+1}/λ^{m+1}]`.
pub fn projective_coordinates(p: &ProjectivePoint, frame: &ProjectiveFrame) -> Result<ProjectivePoint> {
    if p.dim() != frame.dim() {
        return Err(Error::DimensionMismatch { expected: frame.dim(), got: p.dim() });
    }
    let lu = frame.basis_matrix().lu();
    let lambda = frame.scalings(&lu)?;
    let v = lu.solve(&p.coords).ok_or_else(|| Error::DegenerateFrame("first m+1 points are dependent".into()))?;
    let mut y = v;
    for (yj, lj) in y.iter_mut().zip(lambda.iter()) {
        if lj.abs() <= f64::EPSILON {
            return Err(Error::DegenerateFrame("unit point has a vanishing coordinate".into()));
        }
        *yj /= lj;
    }
    ProjectivePoint::new(y)
}
