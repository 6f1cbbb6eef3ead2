use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use projshape::coverage::{CoverageConfig, RegionKind};
use projshape::io::{self, CorrespondenceFile, Document, RunConfig, ShapesFile};
use projshape::{Error, Result};

/// Projective shape reconstruction and inference.
#[derive(Parser)]
#[command(name = "projshape", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct the 3D configuration of one image pair
    Reconstruct {
        corr: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Projective shapes of one or more configurations
    Shape {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// frame landmark labels, comma separated
        #[arg(long, value_delimiter = ',')]
        frame: Option<Vec<i64>>,
        #[command(flatten)]
        out: Out,
    },
    /// Test whether a shape sample has the hypothesized extrinsic mean
    MeanTest {
        sample: PathBuf,
        hypothesis: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// bootstrap resamples, 0 for the asymptotic test only
        #[arg(long, default_value_t = 400)]
        boot: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Simulate image pairs of a random 3D configuration
    Simulate {
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        pairs: usize,
        /// pixel noise standard deviation
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// place every landmark on one plane
        #[arg(long)]
        planar: bool,
        /// output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo coverage of the confidence regions
    Coverage {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// tangent noise scale
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0.0)]
        correlation: f64,
        #[arg(long, value_delimiter = ',', default_value = "asymptotic,bootstrap,bonferroni")]
        regions: Vec<RegionKind>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 400)]
        boot: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Args)]
struct Out {
    /// report path, stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Out {
    fn emit(&self, doc: &Document) -> Result<()> {
        match &self.out {
            Some(p) => doc.write(p),
            None => {
                print!("{}", doc.render());
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Reconstruct { corr, out } => {
            let corr = CorrespondenceFile::from_document(&Document::read(&corr)?)?;
            out.emit(&io::reconstruct(&corr)?)
        }
        Command::Shape { inputs, frame, out } => {
            let docs = inputs.iter().map(|p| Document::read(p)).collect::<Result<Vec<_>>>()?;
            let config = RunConfig { frame, ..Default::default() };
            out.emit(&io::shape(&docs, &config)?.to_document())
        }
        Command::MeanTest { sample, hypothesis, alpha, boot, seed, out } => {
            let sample = ShapesFile::from_document(&Document::read(&sample)?)?;
            let hyp = ShapesFile::from_document(&Document::read(&hypothesis)?)?;
            let config = RunConfig { alpha, b: boot, seed, ..Default::default() };
            out.emit(&io::mean_test(&sample, &hyp, &config)?)
        }
        Command::Simulate { k, pairs, noise, seed, planar, out } => {
            let config = RunConfig { seed, noise_sigma: noise, ..Default::default() };
            let sim = io::simulate(&config, k, pairs, planar)?;
            write_simulation(&out, &sim)
        }
        Command::Coverage { trials, n, m, q, noise, correlation, regions, alpha, boot, seed, out } => {
            let config = CoverageConfig { m, q, n, trials, sigma: noise, correlation, alpha, b: boot, seed, regions };
            out.emit(&io::coverage(&config)?)
        }
    }
}

fn write_simulation(dir: &Path, sim: &io::Simulation) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    for p in &sim.pairs {
        p.to_document().write(&dir.join(format!("{}.txt", p.pair)))?;
    }
    sim.world.to_document().write(&dir.join("world.txt"))?;
    if let Some(t) = &sim.truth {
        t.to_document().write(&dir.join("truth.txt"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
