//! Random generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use projshape::projective::{ProjectivePoint, ProjectiveTransform};
use projshape::shape::{shape_of, FrameSelection, KAd, ProjectiveShape};
use projshape::stats::ShapeSample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn random_point<R: Rng>(rng: &mut R, m: usize) -> ProjectivePoint {
    ProjectivePoint::new(gaussian_vec(rng, m + 1)).unwrap()
}

/// A k-ad whose leading m+2 landmarks form a valid frame.
pub fn random_kad<R: Rng>(rng: &mut R, m: usize, k: usize) -> KAd {
    loop {
        let kad = KAd::new((0..k).map(|_| random_point(rng, m)).collect()).unwrap();
        if FrameSelection::leading(m).frame(&kad).is_ok() {
            return kad;
        }
    }
}

/// A reasonably conditioned element of PGL(m+1).
pub fn random_transform<R: Rng>(rng: &mut R, m: usize) -> ProjectiveTransform {
    loop {
        let a = DMatrix::from_fn(m + 1, m + 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let sv = a.singular_values();
        if sv.min() > 0.1 * sv.max() {
            return ProjectiveTransform::new(a).unwrap();
        }
    }
}

pub fn flip_signs<R: Rng>(rng: &mut R, shape: &ProjectiveShape) -> ProjectiveShape {
    ProjectiveShape::new(
        shape.axes().iter().map(|a| if rng.random::<bool>() { a.antipode() } else { a.clone() }).collect(),
    )
    .unwrap()
}

pub fn flip_sample<R: Rng>(rng: &mut R, sample: &ShapeSample) -> ShapeSample {
    ShapeSample::new(sample.observations().iter().map(|o| flip_signs(rng, o)).collect()).unwrap()
}

/// n shapes scattered around a random mean with tangent spread `sigma`.
pub fn concentrated_sample<R: Rng>(rng: &mut R, m: usize, q: usize, n: usize, sigma: f64) -> ShapeSample {
    let mean = shape_of(&random_kad(rng, m, m + 2 + q), &FrameSelection::leading(m)).unwrap();
    let obs = (0..n)
        .map(|_| {
            ProjectiveShape::new(
                mean.axes()
                    .iter()
                    .map(|a| ProjectivePoint::new(a.coords() + gaussian_vec(rng, m + 1) * sigma).unwrap())
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    ShapeSample::new(obs).unwrap()
}

/// Upper-triangular coordinates of a symmetric matrix w.r.t. the basis
/// `E_ab + E_ba` (a ≤ b): off-diagonal entries as they are, diagonal halved.
fn sym_coords(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut c = Vec::new();
    for i in 0..n {
        for j in i..n {
            c.push(if i == j { a[(i, j)] / 2.0 } else { a[(i, j)] });
        }
    }
    c
}

fn sym_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] += 1.0;
            e[(j, i)] += 1.0;
            out.push(e);
        }
    }
    out
}

/// Projection onto rank-one projectors: the top eigenprojector, via
/// nalgebra's own symmetric eigensolver.
fn top_projector(j: &DMatrix<f64>) -> DMatrix<f64> {
    let e = j.clone().symmetric_eigen();
    let (i, _) = e.eigenvalues.argmax();
    let g = e.eigenvectors.column(i);
    g * g.transpose()
}

/// Orthonormal eigenvectors of `j` in ascending eigenvalue order.
fn ascending_eigenvectors(j: &DMatrix<f64>) -> DMatrix<f64> {
    let e = j.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..j.nrows()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    DMatrix::from_columns(&idx.iter().map(|&i| e.eigenvectors.column(i).into_owned()).collect::<Vec<_>>())
}

/// Σ_E from the general extrinsic-covariance recipe.
///
/// Σ is the covariance of the embedded observations in symmetric-matrix
/// coordinates. The differential of the projection at the embedded mean is
/// taken by central differences with step `h` along each basis matrix and
/// read off in the tangent frame `g_a gᵀ + g g_aᵀ` of the image point.
/// Also returns the eigenvector matrices that define that frame.
pub fn extrinsic_covariance_oracle(embedded: &[Vec<DMatrix<f64>>], h: f64) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
    let q = embedded[0].len();
    let dim = embedded[0][0].nrows();
    let m = dim - 1;
    let n = embedded.len() as f64;
    let p = dim * (dim + 1) / 2;

    let means: Vec<DMatrix<f64>> =
        (0..q).map(|s| embedded.iter().map(|o| &o[s]).fold(DMatrix::zeros(dim, dim), |acc, x| acc + x) / n).collect();

    // coordinates of every observation, stacked over marginals
    let coords: Vec<DVector<f64>> =
        embedded.iter().map(|o| DVector::from_iterator(q * p, o.iter().flat_map(sym_coords))).collect();
    let mean_c = coords.iter().fold(DVector::zeros(q * p), |acc, c| acc + c) / n;
    let sigma = coords.iter().fold(DMatrix::zeros(q * p, q * p), |acc, c| {
        let d = c - &mean_c;
        acc + &d * d.transpose()
    }) / n;

    let basis = sym_basis(dim);
    let mut jac = DMatrix::zeros(q * m, q * p);
    let mut frames = Vec::with_capacity(q);
    for s in 0..q {
        let g = ascending_eigenvectors(&means[s]);
        let top = g.column(m);
        for (b, e) in basis.iter().enumerate() {
            let dp = (top_projector(&(&means[s] + e * h)) - top_projector(&(&means[s] - e * h))) / (2.0 * h);
            for a in 0..m {
                let ga = g.column(a);
                let frame = ga * top.transpose() + top * ga.transpose();
                jac[(s * m + a, s * p + b)] = dp.dot(&frame) / 2.0;
            }
        }
        frames.push(g);
    }
    (&jac * sigma * jac.transpose(), frames)
}

/// `D G Dᵀ` with `D = diag(D_1, …, D_q)`: a tangent covariance written in
/// ambient coordinates, independent of the basis chosen inside each tangent
/// space. The top eigenvectors are sign-aligned with `reference` first.
pub fn ambient(cov: &DMatrix<f64>, frames: &[DMatrix<f64>], reference: &[DMatrix<f64>]) -> DMatrix<f64> {
    let m = frames[0].nrows() - 1;
    let q = frames.len();
    let mut d = DMatrix::zeros(q * (m + 1), q * m);
    for (s, (g, r)) in frames.iter().zip(reference).enumerate() {
        let sign = g.column(m).dot(&r.column(m)).signum();
        d.view_mut((s * (m + 1), s * m), (m + 1, m)).copy_from(&(g.columns(0, m) * sign));
    }
    &d * cov * d.transpose()
}

pub fn embed_sample(sample: &ShapeSample) -> Vec<Vec<DMatrix<f64>>> {
    sample
        .observations()
        .iter()
        .map(|o| o.axes().iter().map(|a| a.coords() * a.coords().transpose()).collect())
        .collect()
}

/// Population Σ_E of a sampler, by Monte Carlo over `draws` observations
/// and the numerical projection differential at the population mean.
pub fn population_extrinsic_cov_oracle<F>(mut sampler: F, draws: usize) -> (DMatrix<f64>, Vec<DMatrix<f64>>)
where
    F: FnMut() -> ProjectiveShape,
{
    let sample = ShapeSample::new((0..draws).map(|_| sampler()).collect()).unwrap();
    extrinsic_covariance_oracle(&embed_sample(&sample), 1e-6)
}

/// Proptest settings without a regression file.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { failure_persistence: None, ..proptest::test_runner::Config::with_cases(n) }
}
