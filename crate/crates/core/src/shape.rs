//! Projective shapes of k-ads.
//!
//! Fixing m+2 landmarks of a k-ad in ℝPᵐ as a projective frame, the
//! projective coordinates of the remaining q = k − m − 2 landmarks are a
//! point of (ℝPᵐ)^q that does not change when the whole k-ad is moved by a
//! projective transformation. That q-tuple of axes is the projective shape.

use nalgebra::DMatrix;

use crate::camera::{reconstruct_configuration, Correspondences};
use crate::error::{Error, Result};
use crate::linalg;
use crate::projective::{projective_coordinates, ProjectiveFrame, ProjectivePoint, ProjectiveTransform};

/// An ordered configuration of k landmarks in ℝPᵐ with k ≥ m + 3.
#[derive(Debug, Clone, PartialEq)]
pub struct KAd {
    points: Vec<ProjectivePoint>,
}

impl KAd {
    pub fn new(points: Vec<ProjectivePoint>) -> Result<Self> {
        let m = points.first().map(|p| p.dim()).ok_or_else(|| Error::InvalidInput("empty k-ad".into()))?;
        if let Some(p) = points.iter().find(|p| p.dim() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: p.dim() });
        }
        if points.len() < m + 3 {
            return Err(Error::InvalidInput(format!(
                "a k-ad in RP^{m} needs at least {} landmarks, got {}",
                m + 3,
                points.len()
            )));
        }
        Ok(KAd { points })
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn m(&self) -> usize {
        self.points[0].dim()
    }

    /// The diagonal action `(p₁, …, p_k) ↦ (β p₁, …, β p_k)`.
    pub fn transform(&self, t: &ProjectiveTransform) -> Result<KAd> {
        let points = self.points.iter().map(|p| t.apply(p)).collect::<Result<Vec<_>>>()?;
        Ok(KAd { points })
    }
}

/// Positions (0-based) of the m+2 landmarks used as projective frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSelection {
    indices: Vec<usize>,
}

impl FrameSelection {
    /// Checks distinctness, range and general position against `kad`.
    pub fn new(indices: Vec<usize>, kad: &KAd) -> Result<Self> {
        let sel = FrameSelection { indices };
        sel.frame(kad)?;
        Ok(sel)
    }

    /// The first m+2 landmarks, without checking general position.
    pub fn leading(m: usize) -> Self {
        FrameSelection { indices: (0..m + 2).collect() }
    }

    /// The lexicographically first (m+2)-subset in general position.
    pub fn first_valid(kad: &KAd) -> Result<Self> {
        let m = kad.m();
        let k = kad.k();
        let mut idx: Vec<usize> = (0..m + 2).collect();
        loop {
            if let Ok(sel) = FrameSelection::new(idx.clone(), kad) {
                return Ok(sel);
            }
            // next combination in lexicographic order
            let r = idx.len();
            let mut i = r;
            while i > 0 && idx[i - 1] == k - r + i - 1 {
                i -= 1;
            }
            if i == 0 {
                return Err(Error::DegenerateFrame("no subset of landmarks is in general position".into()));
            }
            idx[i - 1] += 1;
            for j in i..r {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// The frame formed by the selected landmarks of `kad`.
    pub fn frame(&self, kad: &KAd) -> Result<ProjectiveFrame> {
        let m = kad.m();
        if self.indices.len() != m + 2 {
            return Err(Error::DegenerateFrame(format!("frame needs {} landmarks, got {}", m + 2, self.indices.len())));
        }
        let mut seen = vec![false; kad.k()];
        for &i in &self.indices {
            if i >= kad.k() {
                return Err(Error::DegenerateFrame(format!("landmark index {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DegenerateFrame(format!("landmark index {i} repeated")));
            }
        }
        ProjectiveFrame::new(self.indices.iter().map(|&i| kad.points[i].clone()).collect())
    }
}

/// A point of (ℝPᵐ)^q: the frame coordinates of the non-frame landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveShape {
    axes: Vec<ProjectivePoint>,
}

impl ProjectiveShape {
    pub fn new(axes: Vec<ProjectivePoint>) -> Result<Self> {
        let m = axes
            .first()
            .map(|p| p.dim())
            .ok_or_else(|| Error::InvalidInput("a projective shape needs q >= 1 axes".into()))?;
        if let Some(p) = axes.iter().find(|p| p.dim() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: p.dim() });
        }
        Ok(ProjectiveShape { axes })
    }

    pub fn axes(&self) -> &[ProjectivePoint] {
        &self.axes
    }

    pub fn m(&self) -> usize {
        self.axes[0].dim()
    }

    pub fn q(&self) -> usize {
        self.axes.len()
    }

    /// Number of landmarks, `q + m + 2`.
    pub fn k(&self) -> usize {
        self.q() + self.m() + 2
    }
}

/// `j_k(shape)`: one rank-one projector `x xᵀ` per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedShape {
    pub matrices: Vec<DMatrix<f64>>,
}

impl EmbeddedShape {
    /// `(A₁, …, A_q) ↦ (R₁A₁R₁ᵀ, …, R_qA_qR_qᵀ)`.
    pub fn conjugate(&self, rotations: &[DMatrix<f64>]) -> Result<EmbeddedShape> {
        if rotations.len() != self.matrices.len() {
            return Err(Error::DimensionMismatch { expected: self.matrices.len(), got: rotations.len() });
        }
        let matrices = self.matrices.iter().zip(rotations).map(|(a, r)| r * a * r.transpose()).collect();
        Ok(EmbeddedShape { matrices })
    }
}

/// Projective shape of `kad` relative to the selected frame. Non-frame
/// landmarks keep their order in the k-ad.
pub fn shape_of(kad: &KAd, frame: &FrameSelection) -> Result<ProjectiveShape> {
    let pi = frame.frame(kad)?;
    let axes = kad
        .points
        .iter()
        .enumerate()
        .filter(|(i, _)| !frame.indices.contains(i))
        .map(|(_, p)| projective_coordinates(p, &pi))
        .collect::<Result<Vec<_>>>()?;
    ProjectiveShape::new(axes)
}

pub fn embed(shape: &ProjectiveShape) -> EmbeddedShape {
    let matrices = shape
        .axes
        .iter()
        .map(|a| {
            let x = a.coords();
            x * x.transpose()
        })
        .collect();
    EmbeddedShape { matrices }
}

fn check_special_orthogonal(r: &DMatrix<f64>, n: usize) -> Result<()> {
    if r.nrows() != n || r.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: r.nrows() });
    }
    let err = (r.transpose() * r - DMatrix::<f64>::identity(n, n)).abs().max();
    if err > 1e-10 {
        return Err(Error::NotRotation(format!("|RᵀR − I| = {err:e}")));
    }
    let d = linalg::det(r);
    if (d - 1.0).abs() > 1e-10 {
        return Err(Error::NotRotation(format!("det R = {d}")));
    }
    Ok(())
}

/// `([x₁], …, [x_q]) ↦ ([R₁x₁], …, [R_qx_q])` for `R_s ∈ SO(m+1)`.
pub fn so_action(rotations: &[DMatrix<f64>], shape: &ProjectiveShape) -> Result<ProjectiveShape> {
    if rotations.len() != shape.q() {
        return Err(Error::DimensionMismatch { expected: shape.q(), got: rotations.len() });
    }
    let n = shape.m() + 1;
    let axes = rotations
        .iter()
        .zip(&shape.axes)
        .map(|(r, a)| {
            check_special_orthogonal(r, n)?;
            ProjectivePoint::new(r * a.coords())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectiveShape { axes })
}

/// Largest axial distance over the q marginals.
pub fn shape_distance(a: &ProjectiveShape, b: &ProjectiveShape) -> Result<f64> {
    if a.q() != b.q() {
        return Err(Error::DimensionMismatch { expected: a.q(), got: b.q() });
    }
    a.axes.iter().zip(&b.axes).map(|(x, y)| x.axial_distance(y)).try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
}

/// Distance between the projective shape of `original` and that of its
/// two-view reconstruction from `corr`.
pub fn verify_reconstruction_shape(original: &KAd, corr: &Correspondences, frame: &FrameSelection) -> Result<f64> {
    if original.m() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: original.m() });
    }
    if corr.len() != original.k() {
        return Err(Error::DimensionMismatch { expected: original.k(), got: corr.len() });
    }
    let rec = reconstruct_configuration(corr)?;
    let rebuilt = KAd::new(rec.points)?;
    shape_distance(&shape_of(original, frame)?, &shape_of(&rebuilt, frame)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn pt(x: &[f64]) -> ProjectivePoint {
        ProjectivePoint::from_slice(x).unwrap()
    }

    fn rot2(theta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    }

    #[test]
    fn standard_frame_leaves_points_unchanged() {
        let mut pts = ProjectiveFrame::standard(2).points().to_vec();
        let extra = [pt(&[0.3, -0.2, 0.9]), pt(&[1.0, 2.0, -0.5])];
        pts.extend(extra.iter().cloned());
        let kad = KAd::new(pts).unwrap();
        let s = shape_of(&kad, &FrameSelection::leading(2)).unwrap();
        assert_eq!(s.q(), 2);
        for (a, b) in s.axes().iter().zip(&extra) {
            assert!(a.approx_eq(b, 1e-14));
        }
    }

    #[test]
    fn single_axis_shape() {
        let mut pts = ProjectiveFrame::standard(3).points().to_vec();
        pts.push(pt(&[0.1, 0.2, 0.3, 1.0]));
        let kad = KAd::new(pts).unwrap();
        let s = shape_of(&kad, &FrameSelection::leading(3)).unwrap();
        assert_eq!((s.q(), s.m(), s.k()), (1, 3, 6));
    }

    #[test]
    fn kad_too_small() {
        let pts = ProjectiveFrame::standard(2).points().to_vec();
        assert!(KAd::new(pts).is_err());
    }

    #[test]
    fn first_valid_skips_degenerate_landmarks() {
        // landmark 1 equals landmark 0, so any frame containing both fails
        let pts = vec![
            pt(&[1.0, 0.0, 0.0]),
            pt(&[1.0, 0.0, 0.0]),
            pt(&[0.0, 1.0, 0.0]),
            pt(&[0.0, 0.0, 1.0]),
            pt(&[1.0, 1.0, 1.0]),
            pt(&[0.2, 0.5, 1.0]),
        ];
        let kad = KAd::new(pts).unwrap();
        assert!(FrameSelection::new(vec![0, 1, 2, 3], &kad).is_err());
        assert_eq!(FrameSelection::first_valid(&kad).unwrap().indices(), &[0, 2, 3, 4]);
    }

    #[test]
    fn bad_frame_indices() {
        let mut pts = ProjectiveFrame::standard(2).points().to_vec();
        pts.push(pt(&[0.3, -0.2, 0.9]));
        let kad = KAd::new(pts).unwrap();
        assert!(matches!(FrameSelection::new(vec![0, 1, 2, 9], &kad), Err(Error::DegenerateFrame(_))));
        assert!(matches!(FrameSelection::new(vec![0, 1, 2, 2], &kad), Err(Error::DegenerateFrame(_))));
        assert!(matches!(FrameSelection::new(vec![0, 1, 2], &kad), Err(Error::DegenerateFrame(_))));
    }

    #[test]
    fn embed_examples() {
        let e = embed(&ProjectiveShape::new(vec![ProjectivePoint::basis(2, 0)]).unwrap());
        let mut corner = DMatrix::zeros(3, 3);
        corner[(0, 0)] = 1.0;
        assert_eq!(e.matrices[0], corner);

        let e = embed(&ProjectiveShape::new(vec![pt(&[1.0, 1.0])]).unwrap());
        assert_relative_eq!(e.matrices[0], DMatrix::from_element(2, 2, 0.5), epsilon = 1e-15);

        let x = pt(&[0.3, -0.4, 0.5]);
        let a = embed(&ProjectiveShape::new(vec![x.clone()]).unwrap());
        let b = embed(&ProjectiveShape::new(vec![x.antipode()]).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn embedded_matrices_are_rank_one_projectors() {
        let s = ProjectiveShape::new(vec![pt(&[0.3, -0.4, 0.5, 0.1]), pt(&[1.0, 2.0, 3.0, 4.0])]).unwrap();
        for a in embed(&s).matrices {
            let e = linalg::SymmetricEigen::new(&a).unwrap();
            assert_relative_eq!(e.values, DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]), epsilon = 1e-10);
            assert_relative_eq!(a.trace(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn so_action_examples() {
        let s = ProjectiveShape::new(vec![pt(&[0.6, 0.8]), pt(&[1.0, -1.0])]).unwrap();
        let id = vec![DMatrix::identity(2, 2); 2];
        assert_eq!(so_action(&id, &s).unwrap(), s);

        let r = vec![rot2(0.3), rot2(-1.1)];
        let lhs = embed(&so_action(&r, &s).unwrap());
        let rhs = embed(&s).conjugate(&r).unwrap();
        for (a, b) in lhs.matrices.iter().zip(&rhs.matrices) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }

        let r2 = vec![rot2(0.7), rot2(0.2)];
        let twice = so_action(&r2, &so_action(&r, &s).unwrap()).unwrap();
        let product: Vec<_> = r2.iter().zip(&r).map(|(a, b)| a * b).collect();
        assert!(shape_distance(&twice, &so_action(&product, &s).unwrap()).unwrap() < 1e-15);

        let reflect = vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]); 2];
        assert!(matches!(so_action(&reflect, &s), Err(Error::NotRotation(_))));
    }

    #[test]
    fn shape_distance_examples() {
        let a = ProjectiveShape::new(vec![pt(&[1.0, 0.0, 0.0]), pt(&[0.0, 1.0, 0.0])]).unwrap();
        let b = ProjectiveShape::new(vec![pt(&[1.0, 0.0, 0.0]), pt(&[0.0, 0.0, 1.0])]).unwrap();
        assert_eq!(shape_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(shape_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(shape_distance(&b, &a).unwrap(), shape_distance(&a, &b).unwrap());
        let c = ProjectiveShape::new(vec![pt(&[1.0, 0.0, 0.0])]).unwrap();
        assert!(shape_distance(&a, &c).is_err());
    }
}
