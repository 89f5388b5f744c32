use clap::{Parser, Subcommand};
use mealsynth::pipeline::{self, manifest::write_json, Manifest, PipelineConfig};
use mealsynth::Error;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mealsynth", version, about = "Synthetic meal-scene dataset generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compose, render and annotate a dataset.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        scenes: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Keep a random subset of views per scene.
    Subsample {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        views: usize,
        #[arg(long)]
        seed: u64,
        /// Defaults to `manifest_<views>views.json` next to the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assign scenes to train/val/test.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated train,val,test fractions.
        #[arg(long, default_value = "0.6,0.2,0.2")]
        ratios: String,
        #[arg(long)]
        seed: u64,
        /// Defaults to `splits.json` next to the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nutrition histograms and class statistics.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a dataset directory for missing files and annotation errors.
    Validate {
        #[arg(long)]
        dir: PathBuf,
        /// Fraction of images whose rasters are inspected.
        #[arg(long, default_value_t = 1.0)]
        sample: f64,
    },
}

fn parse_ratios(text: &str) -> Result<[f64; 3], Error> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::validation("ratios", format!("`{text}`: {e}")))?;
    parts
        .try_into()
        .map_err(|_| Error::validation("ratios", format!("`{text}` must have three entries")))
}

fn sibling(manifest: &Path, name: &str) -> PathBuf {
    manifest.parent().unwrap_or(Path::new(".")).join(name)
}

fn run(cli: Cli) -> Result<(serde_json::Value, bool), Error> {
    match cli.command {
        Command::Generate {
            config,
            seed,
            scenes,
            out,
            workers,
        } => {
            let cfg = PipelineConfig::load(&config)?;
            let m = pipeline::generate_dataset(&cfg, seed, scenes, &out, workers)?;
            Ok((
                json!({
                    "manifest": out.join(pipeline::MANIFEST_FILE),
                    "scenes": m.scenes.len(),
                    "images": m.images.len(),
                    "content_hash": m.content_hash,
                }),
                true,
            ))
        }
        Command::Subsample {
            manifest,
            views,
            seed,
            out,
        } => {
            let m = Manifest::read(&manifest)?;
            let mut sub = pipeline::subsample_views(&m, views, seed)?;
            let out = out.unwrap_or_else(|| sibling(&manifest, &format!("manifest_{views}views.json")));
            let root = m.root_for(&manifest);
            let out_dir = out.parent().unwrap_or(Path::new("."));
            let same_dir = match (root.canonicalize(), out_dir.canonicalize()) {
                (Ok(a), Ok(b)) => a == b,
                _ => root == out_dir,
            };
            if !same_dir {
                sub.dataset_root = Some(root.canonicalize().map_err(|e| Error::io(&root, e))?);
                sub.seal();
            }
            sub.write(&out)?;
            Ok((
                json!({"manifest": out, "scenes": sub.scenes.len(), "images": sub.images.len(), "content_hash": sub.content_hash}),
                true,
            ))
        }
        Command::Split {
            manifest,
            ratios,
            seed,
            out,
        } => {
            let m = Manifest::read(&manifest)?;
            let assignment = pipeline::split(&m, parse_ratios(&ratios)?, seed)?;
            let out = out.unwrap_or_else(|| sibling(&manifest, "splits.json"));
            write_json(&out, &assignment)?;
            Ok((json!({"splits": out, "counts": assignment.counts}), true))
        }
        Command::Stats { manifest, out } => {
            let m = Manifest::read(&manifest)?;
            let report = pipeline::stats(&m)?;
            write_json(&out, &report)?;
            Ok((
                json!({
                    "report": out,
                    "scenes": report.scene_count,
                    "mean_items_per_scene": report.mean_items_per_scene,
                }),
                true,
            ))
        }
        Command::Validate { dir, sample } => {
            let report = pipeline::validate(&dir, sample)?;
            let passed = report.passed;
            Ok((serde_json::to_value(report).expect("report serialises"), passed))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok((summary, ok)) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serialises");
            // a closed pipe (e.g. `| head`) is not an error worth a panic
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            let report = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
