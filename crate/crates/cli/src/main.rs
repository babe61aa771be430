//! `respwin`: window-size study of MFCC + KNN respiratory-sound classification.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use respwin::classifier::loocv_evaluate;
use respwin::dataset::build_manifest_from_diagnosis;
use respwin::experiment::{
    emit_report, extract_window_features, generate_synthetic_corpus, run_sweep_with,
    summarize_sweep, FeatureCache, InputDigest, SweepOptions,
};
use respwin::features::features_to_csv;
use respwin::fsutil::{sha256_file, write_atomic};
use respwin::{load_manifest, ClassLabel};
use serde::Serialize;

use crate::config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "respwin",
    version,
    about = "Respiratory-sound classification vs analysis window size"
)]
struct Cli {
    /// Worker threads for clip and fold parallelism (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a manifest from an ICBHI-style audio directory and diagnosis file
    Ingest {
        /// Directory holding `<subject>_*.wav` recordings
        audio_dir: PathBuf,
        /// Two-column `subject_id diagnosis` file
        diagnosis_file: PathBuf,
        /// Manifest CSV to write
        out_manifest: PathBuf,
    },
    /// Generate a deterministic synthetic corpus with a manifest
    Synth {
        /// Number of normal clips
        n_normal: usize,
        /// Number of abnormal clips
        n_abnormal: usize,
        /// Output directory
        out_dir: PathBuf,
        /// Generator seed
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Leave-one-out evaluation at a single window size
    Eval {
        /// Manifest CSV (`path,label,subject_id`)
        manifest: PathBuf,
        /// Window length in seconds
        #[arg(long)]
        window: f64,
        /// TOML config file, or a previous run.json
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the evaluation JSON; run.json goes next to it
        #[arg(long, default_value = "eval.json")]
        out: PathBuf,
        /// Also write the unstandardized feature vectors as CSV
        #[arg(long)]
        dump_features: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate every window size and write sweep.csv, sweep.svg and summary.json
    Sweep {
        /// Manifest CSV (`path,label,subject_id`)
        manifest: PathBuf,
        /// TOML config file, or a previous run.json
        #[arg(long)]
        config: Option<PathBuf>,
        /// Report directory
        #[arg(long, default_value = "sweep-out")]
        out_dir: PathBuf,
        /// Window sizes in seconds, comma separated
        #[arg(long, value_delimiter = ',')]
        window_sizes: Option<Vec<f64>>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Serialize)]
struct Provenance<'a> {
    command: &'a str,
    version: &'a str,
    manifest: String,
    manifest_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    window_seconds: Option<f64>,
    config: &'a RunConfig,
    inputs: &'a [InputDigest],
}

fn write_provenance(dir: &Path, p: &Provenance<'_>) -> Result<()> {
    let body = serde_json::to_string_pretty(p)? + "\n";
    write_atomic(&dir.join("run.json"), body.as_bytes())?;
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    respwin::fsutil::create_dir_all(&parent_dir(path))?;
    Ok(())
}

fn cmd_ingest(audio_dir: &Path, diagnosis_file: &Path, out: &Path) -> Result<()> {
    ensure_parent(out)?;
    let summary = build_manifest_from_diagnosis(audio_dir, diagnosis_file, out)?;
    println!("{} normal / {} abnormal", summary.normal, summary.abnormal);
    if let Some(p) = &summary.warnings_path {
        eprintln!(
            "warning: {} file(s) excluded, see {}",
            summary.warnings.len(),
            p.display()
        );
    }
    Ok(())
}

fn cmd_synth(n_normal: usize, n_abnormal: usize, seed: u64, out_dir: &Path) -> Result<()> {
    let manifest = generate_synthetic_corpus(n_normal, n_abnormal, seed, out_dir)?;
    println!(
        "wrote {} clips and {}",
        n_normal + n_abnormal,
        manifest.display()
    );
    Ok(())
}

fn open_cache(config: &RunConfig) -> Result<Option<FeatureCache>> {
    Ok(match &config.cache_dir {
        Some(d) => Some(FeatureCache::open(d)?),
        None => None,
    })
}

fn cmd_eval(
    manifest: &Path,
    window: f64,
    config: &RunConfig,
    out: &Path,
    dump_features: Option<&Path>,
) -> Result<()> {
    let dataset = load_manifest(manifest)?;
    let sweep = config.sweep_config();
    sweep.mfcc.validate()?;
    let cache = open_cache(config)?;
    let opts = SweepOptions {
        cache: cache.as_ref(),
        ..Default::default()
    };
    let features = extract_window_features(&dataset, &[window], config.offset, &config.mfcc, opts)?;
    let vectors = &features.per_window[0];
    let result = loocv_evaluate(vectors, &config.knn, config.zscore_mode)?;

    let c = result.confusion;
    println!(
        "window {window} s, k = {}: accuracy {:.4} ({} / {})",
        config.knn.k,
        result.accuracy,
        c.true_normal + c.true_abnormal,
        c.total()
    );
    println!(
        "confusion: tn {} fa {} fn {} ta {}",
        c.true_normal, c.false_abnormal, c.false_normal, c.true_abnormal
    );

    let body = serde_json::to_string_pretty(&result)? + "\n";
    ensure_parent(out)?;
    write_atomic(out, body.as_bytes())?;
    if let Some(path) = dump_features {
        ensure_parent(path)?;
        write_atomic(path, features_to_csv(vectors)?.as_bytes())?;
    }
    write_provenance(
        &parent_dir(out),
        &Provenance {
            command: "eval",
            version: env!("CARGO_PKG_VERSION"),
            manifest: manifest.display().to_string(),
            manifest_sha256: sha256_file(manifest)?,
            window_seconds: Some(window),
            config,
            inputs: &features.inputs,
        },
    )
}

fn cmd_sweep(manifest: &Path, config: &RunConfig, out_dir: &Path) -> Result<()> {
    let dataset = load_manifest(manifest)?;
    println!(
        "{} recordings ({} normal / {} abnormal), {} window sizes",
        dataset.len(),
        dataset.count(ClassLabel::Normal),
        dataset.count(ClassLabel::Abnormal),
        config.window_sizes.len()
    );
    let cache = open_cache(config)?;
    let opts = SweepOptions {
        cache: cache.as_ref(),
        ..Default::default()
    };
    let result = run_sweep_with(&dataset, &config.sweep_config(), opts)?;
    emit_report(&result, out_dir)?;
    write_provenance(
        out_dir,
        &Provenance {
            command: "sweep",
            version: env!("CARGO_PKG_VERSION"),
            manifest: manifest.display().to_string(),
            manifest_sha256: sha256_file(manifest)?,
            window_seconds: None,
            config,
            inputs: &result.inputs,
        },
    )?;

    let summary = summarize_sweep(&result)?;
    let p = &summary.primary;
    println!(
        "peak: {} s, accuracy {:.4} (k = {})",
        p.peak_window_seconds, p.peak_accuracy, p.k
    );
    for curve in &summary.k_sweep {
        let fmt = |v: Option<f64>| v.map(|x| format!("{:.4}", x)).unwrap_or_else(|| "-".into());
        println!(
            "  k = {}: mean 2-10 s {}, mean 11-20 s {}, peak {:.4} at {} s",
            curve.k,
            fmt(curve.mean_accuracy_2_to_10),
            fmt(curve.mean_accuracy_11_to_20),
            curve.peak_accuracy,
            curve.peak_window_seconds
        );
    }
    println!("reports written to {}", out_dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(respwin::Error::Config("--jobs must be at least 1".into()).into());
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| anyhow::anyhow!("configuring worker pool: {e}"))?;
    }
    match cli.command {
        Command::Ingest {
            audio_dir,
            diagnosis_file,
            out_manifest,
        } => cmd_ingest(&audio_dir, &diagnosis_file, &out_manifest),
        Command::Synth {
            n_normal,
            n_abnormal,
            out_dir,
            seed,
        } => cmd_synth(n_normal, n_abnormal, seed, &out_dir),
        Command::Eval {
            manifest,
            window,
            config,
            out,
            dump_features,
            overrides,
        } => {
            let config = RunConfig::resolve(config.as_deref(), &overrides)?;
            cmd_eval(&manifest, window, &config, &out, dump_features.as_deref())
        }
        Command::Sweep {
            manifest,
            config,
            out_dir,
            window_sizes,
            overrides,
        } => {
            let mut config = RunConfig::resolve(config.as_deref(), &overrides)?;
            if let Some(w) = window_sizes {
                config.window_sizes = w;
            }
            cmd_sweep(&manifest, &config, &out_dir)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<respwin::Error>())
        .map(|e| e.exit_code() as u8)
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
