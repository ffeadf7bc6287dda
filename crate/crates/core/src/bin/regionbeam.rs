//! Command-line pipeline: scene simulation, target separation, SI-SDR
//! evaluation, and beampattern export.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use regionbeam::beamform::BeamGrid;
use regionbeam::features::{PosteriorMode, PosteriorWeights};
use regionbeam::scene::{
    beampattern_to_file, evaluate_scenes, separate_to_dir, simulate_to_dir, BeamformerKind,
    FeatureMode, GridFormat, MaskSource, RunConfig, SimConfig,
};
use regionbeam::Error;

#[derive(Parser)]
#[command(
    name = "regionbeam",
    about = "Near-field multichannel target-speech separation pipeline",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render in-car scenes (mixture + stems + manifest) from a config.
    Simulate {
        /// JSON simulation config; defaults apply for omitted fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; one scene_NNNN subdirectory per scene.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's preset (s1, s1+2, s1+3, ...).
        #[arg(long)]
        preset: Option<String>,
        /// Overrides the config's scene count.
        #[arg(long)]
        num_scenes: Option<usize>,
    },
    /// Separate the target from a rendered scene directory.
    Separate {
        /// Scene directory produced by `simulate`.
        #[arg(long)]
        scene_dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Also dump the feature and mask maps as raw float32.
        #[arg(long)]
        dump_features: bool,
    },
    /// SI-SDR report over scene directories for one or more conditions.
    Evaluate {
        /// Root directory holding scene_NNNN subdirectories.
        #[arg(long)]
        root: PathBuf,
        /// Condition labels, as printed by `separate` (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        conditions: Vec<String>,
        /// Report CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        ref_channel: usize,
    },
    /// Export the beamformer's spatial response over a 3D grid.
    Beampattern {
        #[arg(long)]
        scene_dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Azimuth sweep in degrees: start:stop:step.
        #[arg(long, default_value = "0:360:5")]
        az: String,
        /// Elevation sweep in degrees: start:stop:step.
        #[arg(long, default_value = "-6:18:8")]
        el: String,
        /// Distance sweep in meters: start:stop:step.
        #[arg(long, default_value = "0.5:3.0:0.5")]
        dist: String,
        /// Frequency-bin sweep: start:stop:step.
        #[arg(long, default_value = "16:200:8")]
        bands: String,
        #[arg(long)]
        out: PathBuf,
        /// Write raw float32 + JSON sidecar instead of CSV.
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Location input: sf-center, sf-perturbed or rf-region.
    #[arg(long, default_value = "rf-region")]
    mode: String,
    /// Posterior for rf-region: uniform, heuristic or mlp.
    #[arg(long, default_value = "heuristic")]
    posterior: String,
    /// Softmax temperature for the heuristic posterior.
    #[arg(long, default_value_t = 5.0)]
    beta: f64,
    /// Attention weight file (BW3D format) for --posterior mlp.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Mask source: oracle-irm or feature.
    #[arg(long, default_value = "oracle-irm")]
    mask: String,
    /// Beamformer: mvdr, mcwf or mask-only.
    #[arg(long, default_value = "mvdr")]
    beamformer: String,
    #[arg(long, default_value_t = 0)]
    ref_channel: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    fn to_config(&self) -> Result<RunConfig, Error> {
        let mode = match self.mode.as_str() {
            "sf-center" => FeatureMode::SfCenter,
            "sf-perturbed" => FeatureMode::SfPerturbed,
            "rf-region" => FeatureMode::RfRegion,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown mode {other}; expected sf-center, sf-perturbed or rf-region"
                )))
            }
        };
        let posterior = match self.posterior.as_str() {
            "uniform" => PosteriorMode::Uniform,
            "heuristic" => PosteriorMode::Heuristic { beta: self.beta },
            "mlp" => {
                let path = self.weights.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("--posterior mlp requires --weights".into())
                })?;
                PosteriorMode::Mlp(PosteriorWeights::read_from(path)?)
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown posterior {other}; expected uniform, heuristic or mlp"
                )))
            }
        };
        let mask = match self.mask.as_str() {
            "oracle-irm" => MaskSource::OracleIrm,
            "feature" => MaskSource::Feature,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown mask source {other}; expected oracle-irm or feature"
                )))
            }
        };
        let beamformer = match self.beamformer.as_str() {
            "mvdr" => BeamformerKind::Mvdr,
            "mcwf" => BeamformerKind::Mcwf,
            "mask-only" => BeamformerKind::MaskOnly,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown beamformer {other}; expected mvdr, mcwf or mask-only"
                )))
            }
        };
        let cfg = RunConfig {
            mode,
            posterior,
            mask,
            beamformer,
            ref_channel: self.ref_channel,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_sweep(s: &str, name: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "{name} sweep must be start:stop:step, got {s}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number {p} in {name} sweep")))
        })
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 {
        return Err(Error::InvalidArgument(format!("{name} step must be > 0")));
    }
    let mut out = Vec::new();
    let mut x = start;
    while x < stop - 1e-9 {
        out.push(x);
        x += step;
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} sweep is empty")));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            preset,
            num_scenes,
        } => {
            let mut cfg = match config {
                Some(path) => SimConfig::from_file(&path)?,
                None => SimConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(p) = preset {
                cfg.preset = p;
            }
            if let Some(n) = num_scenes {
                cfg.num_scenes = n;
            }
            cfg.validate()?;
            let dirs = simulate_to_dir(&cfg, &out)?;
            for d in &dirs {
                println!("rendered {}", d.display());
            }
            Ok(())
        }
        Command::Separate {
            scene_dir,
            run,
            dump_features,
        } => {
            let cfg = run.to_config()?;
            let path = separate_to_dir(&scene_dir, &cfg, dump_features)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Evaluate {
            root,
            conditions,
            out,
            ref_channel,
        } => {
            let mut dirs: Vec<PathBuf> = std::fs::read_dir(&root)
                .map_err(|e| Error::io(&root, e))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.join("scene.json").exists())
                .collect();
            dirs.sort();
            let report = evaluate_scenes(&dirs, &conditions, ref_channel)?;
            report.write_csv(&out)?;
            for cond in report.conditions() {
                if let Some(delta) = report.mean_delta(&cond) {
                    println!("{cond}: mean SI-SDR improvement {delta:+.2} dB");
                }
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Beampattern {
            scene_dir,
            run,
            az,
            el,
            dist,
            bands,
            out,
            raw,
        } => {
            let cfg = run.to_config()?;
            let grid = BeamGrid {
                azimuths: parse_sweep(&az, "azimuth")?
                    .into_iter()
                    .map(f64::to_radians)
                    .collect(),
                elevations: parse_sweep(&el, "elevation")?
                    .into_iter()
                    .map(f64::to_radians)
                    .collect(),
                distances: parse_sweep(&dist, "distance")?,
            };
            let band_bins: Vec<usize> = parse_sweep(&bands, "band")?
                .into_iter()
                .map(|b| b as usize)
                .collect();
            let format = if raw { GridFormat::Raw } else { GridFormat::Csv };
            beampattern_to_file(&scene_dir, &cfg, &grid, &band_bins, &out, format)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::File { .. } | Error::Format(_) => 3,
        Error::Numerical(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
