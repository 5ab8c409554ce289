//! `lift3d` command-line interface.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when inputs cannot be read
//! or are invalid.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lift3d::bev::{emit_bev, BevOptions};
use lift3d::eval::MatchConfig;
use lift3d::fog::FogParams;
use lift3d::io::{load_manifest, read_boxes, to_json_string, write_boxes, write_file, PipelineConfig};
use lift3d::pipeline::{build_pseudo_dataset, run_eval, run_inflate, write_report, PseudoOptions};

#[derive(Debug, Parser)]
#[command(name = "lift3d", version, about = "3D boxes from 2D instance masks, with nuScenes-style scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Infer 3D boxes for every detection of a dataset.
    Inflate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dataset root holding frames.json.
        #[arg(long)]
        root: PathBuf,
        /// Predictions JSON to write.
        #[arg(long)]
        out: PathBuf,
        /// Where to write the list of dropped detections.
        #[arg(long)]
        drops: Option<PathBuf>,
    },
    /// Score predictions against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Comma-separated classes; defaults to the ground-truth labels.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<String>>,
        /// Pipeline config whose `eval` section sets the matching rules.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report JSON to write; a text table is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a fogged copy of a dataset.
    Fog {
        #[arg(long)]
        beta: f64,
        #[command(flatten)]
        dirs: DatasetDirs,
        #[command(flatten)]
        ambient: Ambient,
    },
    /// Write a copy of a dataset with depth-derived point clouds.
    PseudoDepth {
        #[arg(long, default_value_t = lift3d::lift::DEFAULT_STRIDE)]
        stride: usize,
        /// Also fog the images.
        #[arg(long)]
        beta: Option<f64>,
        #[command(flatten)]
        dirs: DatasetDirs,
        #[command(flatten)]
        ambient: Ambient,
    },
    /// Plot one frame's boxes from above as SVG.
    Bev {
        #[arg(long)]
        frame: String,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        gt: Option<PathBuf>,
        /// Dataset root; when given, boxes are drawn around that frame's ego pose.
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        meters_per_px: f64,
        #[arg(long, default_value_t = 50.0)]
        range: f64,
    },
}

#[derive(Debug, Args)]
struct DatasetDirs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct Ambient {
    /// Ambient light as `r,g,b` in [0, 255].
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [255.0, 255.0, 255.0])]
    ambient: Vec<f64>,
}

impl Ambient {
    fn fog(&self, beta: f64) -> anyhow::Result<FogParams> {
        let a = [self.ambient[0], self.ambient[1], self.ambient[2]];
        Ok(FogParams::new(beta, a)?)
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<PipelineConfig> {
    match path {
        Some(p) => Ok(PipelineConfig::load(p)?),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Inflate {
            config,
            root,
            out,
            drops,
        } => {
            let config = load_config(config.as_deref())?;
            let result = run_inflate(&config, &root)?;
            write_boxes(&out, &result.predictions)?;
            if let Some(path) = drops {
                write_file(&path, to_json_string(&result.drops).as_bytes())?;
            }
            eprintln!(
                "wrote {} boxes to {} ({} detections dropped)",
                result.predictions.len(),
                out.display(),
                result.drops.len()
            );
        }
        Command::Eval {
            pred,
            gt,
            classes,
            config,
            out,
        } => {
            let match_config: MatchConfig = load_config(config.as_deref())?.eval;
            let report = run_eval(&pred, &gt, classes.as_deref(), &match_config)?;
            print!("{}", report.to_table());
            if let Some(path) = out {
                write_report(&path, &report)?;
            }
        }
        Command::Fog { beta, dirs, ambient } => {
            let options = PseudoOptions {
                fog: Some(ambient.fog(beta)?),
                stride: None,
            };
            report_pseudo(&dirs, &options)?;
        }
        Command::PseudoDepth {
            stride,
            beta,
            dirs,
            ambient,
        } => {
            let options = PseudoOptions {
                fog: beta.map(|b| ambient.fog(b)).transpose()?,
                stride: Some(stride),
            };
            report_pseudo(&dirs, &options)?;
        }
        Command::Bev {
            frame,
            pred,
            gt,
            root,
            out,
            meters_per_px,
            range,
        } => {
            if !(meters_per_px > 0.0 && range > 0.0) {
                bail!("--meters-per-px and --range must be positive");
            }
            let read = |p: Option<PathBuf>| -> anyhow::Result<Vec<_>> {
                p.map(|p| read_boxes(&p)).transpose().map(Option::unwrap_or_default).map_err(Into::into)
            };
            let (preds, gts) = (read(pred)?, read(gt)?);
            let ego_from_global = match root {
                Some(root) => {
                    let frames = load_manifest(&root)?;
                    let bundle = frames
                        .iter()
                        .find(|f| f.frame_id == frame)
                        .with_context(|| format!("frame {frame:?} is not in {}", root.display()))?;
                    Some(bundle.ego_from_global())
                }
                None => None,
            };
            let options = BevOptions {
                meters_per_px,
                range_m: range,
                ego_from_global,
            };
            write_file(&out, emit_bev(&preds, &gts, &frame, &options).as_bytes())?;
        }
    }
    Ok(())
}

fn report_pseudo(dirs: &DatasetDirs, options: &PseudoOptions) -> anyhow::Result<()> {
    let summary = build_pseudo_dataset(&dirs.input, &dirs.output, options)?;
    eprintln!(
        "wrote {} frames to {} ({} skipped without depth)",
        summary.frames_written.len(),
        dirs.output.display(),
        summary.frames_skipped.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
