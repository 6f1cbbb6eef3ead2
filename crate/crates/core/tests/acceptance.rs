//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::DMatrix;
use projshape::coverage::{CoverageConfig, RegionKind};
use projshape::io::{self, Document, RunConfig, ShapesFile};
use projshape::shape::{shape_distance, shape_of, verify_reconstruction_shape, FrameSelection};
use projshape::simulate::{random_shape, simulate_scene, SceneConfig, TangentModel};
use projshape::stats::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn stream(seed: u64, i: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(i as u64);
    r
}

fn projective_invariance() -> Outcome {
    let worst = (0..1000)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(101, i);
            let m = 2 + i % 2;
            let k = rng.random_range(m + 3..=m + 8);
            let kad = random_kad(&mut rng, m, k);
            let t = random_transform(&mut rng, m);
            let sel = FrameSelection::leading(m);
            let a = shape_of(&kad, &sel).unwrap();
            let b = shape_of(&kad.transform(&t).unwrap(), &sel).unwrap();
            shape_distance(&a, &b).unwrap()
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst < 1e-9, format!("max axial distance {worst:.3e} over 1000 pairs (tol 1e-9)"))
}

fn reconstruction_keeps_shape() -> Outcome {
    let worst = (0..100)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(102, i);
            let scene = simulate_scene(&mut rng, &SceneConfig::new(10, 0.0)).unwrap();
            verify_reconstruction_shape(&scene.world, &scene.correspondences, &FrameSelection::leading(3)).unwrap()
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst < 1e-6, format!("max shape distance {worst:.3e} over 100 scenes (tol 1e-6)"))
}

fn eight_point() -> Outcome {
    let (dist, rank) = (0..100)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(103, i);
            let scene = simulate_scene(&mut rng, &SceneConfig::new(10, 0.0)).unwrap();
            let est = projshape::camera::estimate_fundamental(&scene.correspondences).unwrap();
            let sv = est.matrix().singular_values();
            let mut sv: Vec<f64> = sv.iter().copied().collect();
            sv.sort_by(|a, b| b.total_cmp(a));
            (est.distance(&scene.fundamental().unwrap()), sv[2] / sv[0])
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    outcome(dist < 1e-7 && rank < 1e-12, format!("max F distance {dist:.3e} (tol 1e-7), max σ₃/σ₁ {rank:.3e}"))
}

fn covariance_oracle() -> Outcome {
    let mut rng = stream(104, 0);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let m = 1 + i % 3;
        let q = 1 + (i / 3) % 2;
        let n = rng.random_range(4..=20);
        let sample = concentrated_sample(&mut rng, m, q, n, 0.3);
        let summary = summarize(&sample, DEFAULT_GAP_TOL).unwrap();
        let (oracle, g) = extrinsic_covariance_oracle(&embed_sample(&sample), 1e-6);
        let lib: Vec<DMatrix<f64>> = summary.marginals.iter().map(|me| me.vectors.clone()).collect();
        let diff = ambient(&oracle, &g, &lib) - ambient(&summary.g_n, &lib, &lib);
        worst = worst.max(diff.abs().max());
    }
    outcome(worst < 1e-5, format!("max |G_n - oracle| {worst:.3e} over 50 samples (tol 1e-5)"))
}

fn chi_square_limit() -> Outcome {
    let (m, q, n, reps) = (3, 3, 200, 2000);
    let mut t: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(105, i);
            let truth = random_shape(&mut rng, m, q).unwrap();
            let sample = TangentModel::new(truth.clone(), 0.05, 0.0).unwrap().sample(&mut rng, n).unwrap();
            t_statistic(&summarize(&sample, DEFAULT_GAP_TOL).unwrap(), &truth).unwrap()
        })
        .collect();
    t.sort_by(f64::total_cmp);
    let dof = m * q;
    let ks = t
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = chi2_cdf(x, dof).unwrap();
            (f - i as f64 / reps as f64).abs().max((i + 1) as f64 / reps as f64 - f)
        })
        .fold(0.0, f64::max);
    outcome(ks < 0.08, format!("KS distance {ks:.4} from chi-square(9) over 2000 replicates (tol 0.08)"))
}

fn coverage_of(config: CoverageConfig) -> (f64, usize, usize) {
    let report = projshape::coverage::run_coverage(&config).unwrap();
    let r = &report.regions[0];
    (r.coverage(), r.evaluated, r.failed)
}

fn asymptotic_coverage() -> Outcome {
    let (c, ev, failed) = coverage_of(CoverageConfig {
        n: 100,
        trials: 500,
        seed: 106,
        regions: vec![RegionKind::Asymptotic],
        ..Default::default()
    });
    outcome(
        (0.90..=0.98).contains(&c),
        format!("coverage {c:.3} over {ev} trials, {failed} failed (m=3, q=1, n=100; target [0.90, 0.98])"),
    )
}

fn bootstrap_coverage() -> Outcome {
    let (c, ev, failed) = coverage_of(CoverageConfig {
        n: 20,
        trials: 200,
        b: 400,
        seed: 107,
        regions: vec![RegionKind::Bootstrap],
        ..Default::default()
    });
    outcome(
        (0.88..=1.0).contains(&c),
        format!("coverage {c:.3} over {ev} trials, {failed} failed (m=3, q=1, n=20, B=400; target [0.88, 1.00])"),
    )
}

fn bonferroni_coverage() -> Outcome {
    let (c, ev, failed) = coverage_of(CoverageConfig {
        q: 3,
        n: 20,
        trials: 200,
        b: 400,
        seed: 108,
        regions: vec![RegionKind::Bonferroni],
        ..Default::default()
    });
    outcome(
        c >= 0.93,
        format!("coverage {c:.3} over {ev} trials, {failed} failed (m=3, q=3, n=20, B=400; target >= 0.93)"),
    )
}

fn all_reports(dir: &std::path::Path) -> Vec<String> {
    let mut out = Vec::new();
    let config = RunConfig { seed: 5, noise_sigma: 0.5, ..Default::default() };
    let sim = io::simulate(&config, 8, 40, false).unwrap();
    out.extend(sim.pairs.iter().map(|p| p.to_document().render()));
    out.push(sim.world.to_document().render());
    let recs: Vec<Document> = sim.pairs.iter().map(|p| io::reconstruct(p).unwrap()).collect();
    out.extend(recs.iter().map(|r| r.render()));
    let shapes = io::shape(&recs, &config).unwrap();
    out.push(shapes.to_document().render());

    // through files, as the command line does
    let path = dir.join("shapes.txt");
    shapes.to_document().write(&path).unwrap();
    let sample = ShapesFile::from_document(&Document::read(&path).unwrap()).unwrap();
    let truth = sim.truth.unwrap();
    out.push(io::mean_test(&sample, &truth, &RunConfig { b: 300, seed: 8, ..Default::default() }).unwrap().render());

    let cov = CoverageConfig { q: 2, trials: 24, n: 15, b: 100, seed: 9, ..Default::default() };
    out.push(io::coverage(&cov).unwrap().render());
    out
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("projshape-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let max = std::thread::available_parallelism().map_or(8, |n| n.get()).max(8) * 4;
    let runs: Vec<Vec<String>> = [1, 2, max, max]
        .iter()
        .map(|&threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| all_reports(&dir))
        })
        .collect();
    let _ = std::fs::remove_dir_all(&dir);
    let same = runs.iter().all(|r| r == &runs[0]);
    outcome(same, format!("{} reports identical across 1, 2, {max}, {max} threads: {same}", runs[0].len()))
}

fn sign_invariance() -> Outcome {
    let mut rng = stream(110, 0);
    let (m, q, n, alpha) = (2, 3, 15, 0.05);
    let sample = concentrated_sample(&mut rng, m, q, n, 0.2);
    let summary = summarize(&sample, DEFAULT_GAP_TOL).unwrap();
    let candidates: Vec<_> = (0..4)
        .map(|_| {
            let j = rng.random_range(0..n);
            flip_signs(&mut rng, &sample.observations()[j])
        })
        .chain(std::iter::once(extrinsic_mean(&sample, DEFAULT_GAP_TOL).unwrap().mean))
        .collect();
    let dist = bootstrap_t(&sample, 50, 3).unwrap();
    let region = simultaneous_region(&sample, alpha, 50, 4).unwrap();

    let eval = |summary: &ExtrinsicSummary,
                dist: &BootstrapDistribution,
                region: &SimultaneousRegion,
                c: &projshape::shape::ProjectiveShape| {
        let mut values = vec![t_statistic(summary, c).unwrap()];
        values.extend((0..q).map(|s| marginal_t(summary, s, &c.axes()[s]).unwrap()));
        let preds = [
            region_contains_asymptotic(summary, c, alpha).unwrap(),
            region_contains_bootstrap(summary, dist, c, alpha).unwrap(),
            region.contains(c).unwrap(),
        ];
        (values, preds)
    };
    let base: Vec<_> = candidates.iter().map(|c| eval(&summary, &dist, &region, c)).collect();
    let base_boot = dist.values.clone();

    let mut worst: f64 = 0.0;
    let mut preds_agree = true;
    for _ in 0..1000 {
        let flipped = flip_sample(&mut rng, &sample);
        let fs = summarize(&flipped, DEFAULT_GAP_TOL).unwrap();
        let fd = bootstrap_t(&flipped, 50, 3).unwrap();
        let fr = simultaneous_region(&flipped, alpha, 50, 4).unwrap();
        for (a, b) in fd.values.iter().zip(&base_boot) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
        for (c, (bv, bp)) in candidates.iter().zip(&base) {
            let (v, p) = eval(&fs, &fd, &fr, &flip_signs(&mut rng, c));
            for (x, y) in v.iter().zip(bv) {
                worst = worst.max((x - y).abs() / y.abs().max(1.0));
            }
            preds_agree &= p == *bp;
        }
    }
    outcome(
        worst < 1e-12 && preds_agree,
        format!("max relative change {worst:.3e} (tol 1e-12), predicates unchanged: {preds_agree}"),
    )
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let secs = Duration::from_secs;
    let criteria: [Criterion; 10] = [
        ("projective invariance", secs(10), projective_invariance),
        ("reconstruction keeps the shape", secs(30), reconstruction_keeps_shape),
        ("eight-point exactness", secs(10), eight_point),
        ("covariance oracle", secs(60), covariance_oracle),
        ("chi-square limit", secs(600), chi_square_limit),
        ("asymptotic region coverage", secs(600), asymptotic_coverage),
        ("bootstrap region coverage", secs(3600), bootstrap_coverage),
        ("bonferroni region coverage", secs(3600), bonferroni_coverage),
        ("determinism", secs(5), determinism),
        ("sign invariance", secs(10), sign_invariance),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let ok = o.pass && elapsed <= *budget;
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {name}: {} [{:.2}s, budget {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
