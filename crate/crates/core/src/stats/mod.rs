//! Extrinsic means and Hotelling-type inference on (ℝPᵐ)^q.
//!
//! Each axis `[x]` is embedded as the projector `x xᵀ`. For a sample
//! `Y_r = ([X¹_r], …, [X^q_r])`, marginal `s` has moment matrix
//! `J_s = n⁻¹ Σ_r X^s_r X^sᵀ_r` with ascending eigenvalues `d_s(1..=m+1)` and
//! unit eigenvectors `g_s(1..=m+1)`. The extrinsic sample mean is
//! `([g_1(m+1)], …, [g_q(m+1)])`, defined when every top eigenvalue is simple.
//!
//! The extrinsic sample covariance `G_n` is the (mq)×(mq) matrix indexed by
//! pairs `(s, a)`, `a ≤ m`, in lexicographic order:
//!
//! ```text
//! G_n[(s,a),(t,b)] = n⁻¹ (d_s(m+1) − d_s(a))⁻¹ (d_t(m+1) − d_t(b))⁻¹
//!                    Σ_r (g_s(a)ᵀX^s_r)(g_t(b)ᵀX^t_r)(g_s(m+1)ᵀX^s_r)(g_t(m+1)ᵀX^t_r)
//! ```
//!
//! and for a candidate mean `([γ_1], …, [γ_q])` the statistic
//! `T = n v ᵀ G_n⁻¹ v` with `v = (γ_1ᵀD_1, …, γ_qᵀD_q)`, `D_s = (g_s(1), …, g_s(m))`,
//! is asymptotically χ² with mq degrees of freedom at the true mean.
//!
//! Sign conventions: eigenvectors are reported with their largest component
//! positive, and a candidate axis `γ_s` is always flipped to satisfy
//! `γ_sᵀ g_s(m+1) ≥ 0` before evaluation. Every statistic is therefore
//! independent of which representative of an axis the caller supplies.

pub mod bootstrap;
pub mod chi2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, SymmetricEigen};
use crate::projective::ProjectivePoint;
use crate::shape::ProjectiveShape;

pub use bootstrap::{
    bootstrap_t, bootstrap_t_with, marginal_bootstrap_all, marginal_bootstrap_t, region_contains_bootstrap,
    simultaneous_region, simultaneous_region_contains, BootstrapDistribution, SimultaneousRegion,
};
pub use chi2::{chi2_cdf, chi2_quantile, chi2_sf};

/// Minimum eigen-gap `d_s(m+1) − d_s(m)` for a sample to count as nonfocal.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;
/// Largest condition number of `G_n` accepted for inversion.
pub const MAX_CONDITION: f64 = 1e12;

/// A sample of projective shapes with common (m, q).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSample {
    observations: Vec<ProjectiveShape>,
}

impl ShapeSample {
    pub fn new(observations: Vec<ProjectiveShape>) -> Result<Self> {
        let first = observations
            .first()
            .ok_or_else(|| Error::InvalidInput("a shape sample needs n >= 1 observations".into()))?;
        let (m, q) = (first.m(), first.q());
        for o in &observations {
            if o.m() != m {
                return Err(Error::DimensionMismatch { expected: m, got: o.m() });
            }
            if o.q() != q {
                return Err(Error::DimensionMismatch { expected: q, got: o.q() });
            }
        }
        Ok(ShapeSample { observations })
    }

    pub fn observations(&self) -> &[ProjectiveShape] {
        &self.observations
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn m(&self) -> usize {
        self.observations[0].m()
    }

    pub fn q(&self) -> usize {
        self.observations[0].q()
    }

    fn refs(&self) -> Vec<&ProjectiveShape> {
        self.observations.iter().collect()
    }
}

/// Eigen-structure of one marginal moment matrix `J_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalEigen {
    /// `d_s(1) ≤ … ≤ d_s(m+1)`
    pub values: DVector<f64>,
    /// columns `g_s(1), …, g_s(m+1)`
    pub vectors: DMatrix<f64>,
}

impl MarginalEigen {
    fn from_moment(j: &DMatrix<f64>) -> Result<Self> {
        let e = SymmetricEigen::new(j)?;
        let mut vectors = e.vectors;
        for mut c in vectors.column_iter_mut() {
            let mut v = c.clone_owned();
            canonical_sign(&mut v);
            c.copy_from(&v);
        }
        Ok(MarginalEigen { values: e.values, vectors })
    }

    pub fn m(&self) -> usize {
        self.values.len() - 1
    }

    /// `d_s(m+1) − d_s(m)`.
    pub fn gap(&self) -> f64 {
        let m = self.m();
        self.values[m] - self.values[m - 1]
    }

    /// `g_s(m+1)`, the representative of the mean axis.
    pub fn top(&self) -> DVector<f64> {
        self.vectors.column(self.m()).into_owned()
    }

    /// `D_s = (g_s(1), …, g_s(m))`.
    pub fn d_matrix(&self) -> DMatrix<f64> {
        self.vectors.columns(0, self.m()).into_owned()
    }
}

fn moment_matrix_refs(obs: &[&ProjectiveShape], s: usize) -> DMatrix<f64> {
    let dim = obs[0].m() + 1;
    let mut j = DMatrix::zeros(dim, dim);
    for o in obs {
        let x = o.axes()[s].coords();
        j.syger(1.0, x, x, 1.0);
    }
    j / obs.len() as f64
}

fn check_marginal(sample_q: usize, s: usize) -> Result<()> {
    if s >= sample_q {
        return Err(Error::InvalidInput(format!("marginal index {s} out of range (q = {sample_q})")));
    }
    Ok(())
}

/// `J_s = n⁻¹ Σ_r X^s_r X^sᵀ_r` for the 0-based marginal `s`.
pub fn moment_matrix(sample: &ShapeSample, s: usize) -> Result<DMatrix<f64>> {
    check_marginal(sample.q(), s)?;
    let mut j = moment_matrix_refs(&sample.refs(), s);
    // syger fills the lower triangle only
    j.fill_upper_triangle_with_lower_triangle();
    Ok(j)
}

fn marginal_eigen_refs(obs: &[&ProjectiveShape], s: usize, gap_tol: f64) -> Result<MarginalEigen> {
    let mut j = moment_matrix_refs(obs, s);
    j.fill_upper_triangle_with_lower_triangle();
    let me = MarginalEigen::from_moment(&j)?;
    let gap = me.gap();
    if !(gap > gap_tol) {
        return Err(Error::FocalSample { marginal: s, gap });
    }
    Ok(me)
}

/// Sample extrinsic mean together with the per-marginal eigen-structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrinsicMean {
    pub mean: ProjectiveShape,
    pub marginals: Vec<MarginalEigen>,
    pub n: usize,
}

fn extrinsic_mean_refs(obs: &[&ProjectiveShape], gap_tol: f64) -> Result<ExtrinsicMean> {
    let q = obs[0].q();
    let marginals = (0..q).map(|s| marginal_eigen_refs(obs, s, gap_tol)).collect::<Result<Vec<_>>>()?;
    let axes = marginals.iter().map(|me| ProjectivePoint::new(me.top())).collect::<Result<Vec<_>>>()?;
    Ok(ExtrinsicMean { mean: ProjectiveShape::new(axes)?, marginals, n: obs.len() })
}

/// `([g_1(m+1)], …, [g_q(m+1)])`; fails with `FocalSample` when a top
/// eigenvalue is not separated from the next by more than `gap_tol`.
pub fn extrinsic_mean(sample: &ShapeSample, gap_tol: f64) -> Result<ExtrinsicMean> {
    extrinsic_mean_refs(&sample.refs(), gap_tol)
}

/// Tangent coordinates `(g_s(a)ᵀX)(g_s(m+1)ᵀX) / (d_s(m+1) − d_s(a))` of one
/// observation, stacked over `(s, a)` in lexicographic order.
fn tangent_scores(o: &ProjectiveShape, marginals: &[(usize, &MarginalEigen)], out: &mut DVector<f64>) {
    let m = marginals[0].1.m();
    for (s, &(axis, me)) in marginals.iter().enumerate() {
        let x = o.axes()[axis].coords();
        let top = me.vectors.column(m).dot(x);
        for a in 0..m {
            let w = me.values[m] - me.values[a];
            out[s * m + a] = me.vectors.column(a).dot(x) * top / w;
        }
    }
}

/// `G_n` restricted to the listed `(axis index, eigen-structure)` pairs.
fn covariance_refs(
    obs: &[&ProjectiveShape],
    marginals: &[(usize, &MarginalEigen)],
    gap_tol: f64,
) -> Result<DMatrix<f64>> {
    let m = marginals[0].1.m();
    let dim = m * marginals.len();
    for &(s, me) in marginals {
        let gap = me.gap();
        if !(gap > gap_tol) {
            return Err(Error::FocalSample { marginal: s, gap });
        }
    }
    let mut g = DMatrix::zeros(dim, dim);
    let mut z = DVector::zeros(dim);
    for o in obs {
        tangent_scores(o, marginals, &mut z);
        g.syger(1.0, &z, &z, 1.0);
    }
    g.fill_upper_triangle_with_lower_triangle();
    Ok(g / obs.len() as f64)
}

/// The extrinsic sample covariance `G_n`.
pub fn extrinsic_covariance(sample: &ShapeSample, marginals: &[MarginalEigen]) -> Result<DMatrix<f64>> {
    if marginals.len() != sample.q() {
        return Err(Error::DimensionMismatch { expected: sample.q(), got: marginals.len() });
    }
    if marginals.iter().any(|me| me.m() != sample.m()) {
        return Err(Error::DimensionMismatch { expected: sample.m(), got: marginals[0].m() });
    }
    let pairs: Vec<_> = marginals.iter().enumerate().collect();
    covariance_refs(&sample.refs(), &pairs, DEFAULT_GAP_TOL)
}

/// Everything needed to evaluate `T` at any candidate mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrinsicSummary {
    pub mean: ProjectiveShape,
    pub marginals: Vec<MarginalEigen>,
    pub g_n: DMatrix<f64>,
    pub n: usize,
}

impl ExtrinsicSummary {
    pub fn m(&self) -> usize {
        self.mean.m()
    }

    pub fn q(&self) -> usize {
        self.mean.q()
    }

    /// Degrees of freedom of the limiting χ², `mq`.
    pub fn dof(&self) -> usize {
        self.m() * self.q()
    }

    /// The m×m diagonal block `G_{s,n}` of `G_n`.
    pub fn marginal_block(&self, s: usize) -> DMatrix<f64> {
        let m = self.m();
        self.g_n.view((s * m, s * m), (m, m)).into_owned()
    }
}

pub(crate) fn summarize_refs(obs: &[&ProjectiveShape], gap_tol: f64) -> Result<ExtrinsicSummary> {
    let em = extrinsic_mean_refs(obs, gap_tol)?;
    let pairs: Vec<_> = em.marginals.iter().enumerate().collect();
    let g_n = covariance_refs(obs, &pairs, gap_tol)?;
    Ok(ExtrinsicSummary { mean: em.mean, marginals: em.marginals, g_n, n: em.n })
}

/// Eigen-structure and m×m covariance block of marginal `s` alone.
pub(crate) fn marginal_summary_refs(
    obs: &[&ProjectiveShape],
    s: usize,
    gap_tol: f64,
) -> Result<(MarginalEigen, DMatrix<f64>)> {
    let me = marginal_eigen_refs(obs, s, gap_tol)?;
    let g = covariance_refs(obs, &[(s, &me)], gap_tol)?;
    Ok((me, g))
}

/// Extrinsic mean and covariance in one pass.
pub fn summarize(sample: &ShapeSample, gap_tol: f64) -> Result<ExtrinsicSummary> {
    summarize_refs(&sample.refs(), gap_tol)
}

/// `γ` flipped, if needed, so that `γᵀ g ≥ 0`.
fn aligned(gamma: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
    if gamma.dot(g) < 0.0 {
        -gamma
    } else {
        gamma.clone()
    }
}

fn check_candidate(summary: &ExtrinsicSummary, candidate: &ProjectiveShape) -> Result<()> {
    if candidate.q() != summary.q() {
        return Err(Error::DimensionMismatch { expected: summary.q(), got: candidate.q() });
    }
    if candidate.m() != summary.m() {
        return Err(Error::DimensionMismatch { expected: summary.m(), got: candidate.m() });
    }
    Ok(())
}

fn invert_checked(g: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let e = SymmetricEigen::new(g)?;
    let condition = e.condition_number();
    if !(condition < MAX_CONDITION) {
        return Err(Error::SingularCovariance { condition });
    }
    Ok(e)
}

/// Tangent coordinates `γ_sᵀD_s` of a single candidate axis.
fn marginal_offset(me: &MarginalEigen, gamma: &DVector<f64>) -> DVector<f64> {
    let gamma = aligned(gamma, &me.top());
    me.d_matrix().tr_mul(&gamma)
}

/// `T = n (γ_1ᵀD_1, …, γ_qᵀD_q) G_n⁻¹ (…)ᵀ`.
pub fn t_statistic(summary: &ExtrinsicSummary, hypothesized: &ProjectiveShape) -> Result<f64> {
    check_candidate(summary, hypothesized)?;
    let m = summary.m();
    let mut v = DVector::zeros(summary.dof());
    for (s, (me, axis)) in summary.marginals.iter().zip(hypothesized.axes()).enumerate() {
        v.rows_mut(s * m, m).copy_from(&marginal_offset(me, axis.coords()));
    }
    let e = invert_checked(&summary.g_n)?;
    Ok(summary.n as f64 * e.inverse_quadratic_form(&v))
}

/// `T_s = n γ_sᵀ D_s G_{s,n}⁻¹ D_sᵀ γ_s` for the 0-based marginal `s`.
pub fn marginal_t(summary: &ExtrinsicSummary, s: usize, axis: &ProjectivePoint) -> Result<f64> {
    check_marginal(summary.q(), s)?;
    if axis.dim() != summary.m() {
        return Err(Error::DimensionMismatch { expected: summary.m(), got: axis.dim() });
    }
    marginal_t_parts(&summary.marginals[s], &summary.marginal_block(s), summary.n, axis.coords())
}

pub(crate) fn marginal_t_parts(me: &MarginalEigen, g: &DMatrix<f64>, n: usize, gamma: &DVector<f64>) -> Result<f64> {
    let v = marginal_offset(me, gamma);
    let e = invert_checked(g)?;
    Ok(n as f64 * e.inverse_quadratic_form(&v))
}

/// How a critical value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestMethod {
    Asymptotic,
    Bootstrap,
}

impl TestMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestMethod::Asymptotic => "asymptotic",
            TestMethod::Bootstrap => "bootstrap",
        }
    }
}

/// Outcome of a one-sample test `H₀: μ = μ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub method: TestMethod,
    pub alpha: f64,
    pub critical_value: f64,
    pub reject: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Large-sample χ²_{mq} test; rejects when `T` exceeds the `1 − α` quantile.
pub fn asymptotic_test(summary: &ExtrinsicSummary, hypothesized: &ProjectiveShape, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let statistic = t_statistic(summary, hypothesized)?;
    let dof = summary.dof();
    let critical_value = chi2_quantile(1.0 - alpha, dof)?;
    Ok(TestReport {
        statistic,
        dof,
        p_value: chi2_sf(statistic, dof)?,
        method: TestMethod::Asymptotic,
        alpha,
        critical_value,
        reject: statistic > critical_value,
    })
}

/// Whether `candidate` lies in the asymptotic `1 − α` confidence region.
pub fn region_contains_asymptotic(summary: &ExtrinsicSummary, candidate: &ProjectiveShape, alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    let t = t_statistic(summary, candidate)?;
    Ok(t <= chi2_quantile(1.0 - alpha, summary.dof())?)
}
