use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use mammocad::enhance::enhance;
use mammocad::features::{extract_features, FEATURE_NAMES};
use mammocad::image::{load_pgm, save_pgm, BinaryMask, GrayImage};
use mammocad::pipeline::{
    detect, evaluate, generate_phantom, load_dataset, parse_info_file, render_overlay,
    split_dataset, train_model, CorpusSpec, DatasetEntry, PipelineConfig, PipelineError,
};
use mammocad::segment::segment_detailed;
use mammocad::svm::{load_model, save_model};

/// Mass detection in mammograms.
#[derive(Parser)]
#[command(name = "mammocad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance one image.
    Enhance {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Enhance and segment one image; write the region mask and a region table.
    Segment {
        input: PathBuf,
        #[arg(long)]
        out_mask: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write the feature vector of every segmented region as CSV.
    Features {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train a classifier on the training split of a dataset.
    Train {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        info: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Train on every image instead of the training split.
        #[arg(long)]
        all: bool,
    },
    /// Classify the regions of one image; detections go to stdout as CSV.
    Predict {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Info file whose circles for this image are drawn on the overlay.
        #[arg(long)]
        info: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate a model on the test split of a dataset.
    Evaluate {
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        info: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Evaluate every image instead of the test split.
        #[arg(long)]
        all: bool,
    },
    /// Generate a phantom corpus: one PGM per phantom plus `info.txt`.
    Phantom {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, PipelineError> {
    fs::read(path).map_err(|e| io_error(path, e))
}

fn read_text(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn load_image(path: &Path) -> Result<GrayImage, PipelineError> {
    load_pgm(&read(path)?).map_err(|source| PipelineError::ImageFile {
        path: path.to_path_buf(),
        source,
    })
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, PipelineError> {
    let cfg = match path {
        Some(p) => PipelineConfig::from_toml(&read_text(p)?)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", p.display())))?,
        None => PipelineConfig::default(),
    };
    info!("config:\n{}", cfg.to_toml());
    Ok(cfg)
}

fn csv_error(path: &Path, e: csv::Error) -> PipelineError {
    io_error(path, std::io::Error::other(e))
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

fn reference_of(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned())
}

fn subset(entries: &[DatasetEntry], indices: &[usize]) -> Vec<DatasetEntry> {
    indices.iter().map(|&i| entries[i].clone()).collect()
}

fn run(command: Command) -> Result<(), PipelineError> {
    match command {
        Command::Enhance {
            input,
            output,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let out = enhance(&load_image(&input)?, &cfg.enhance)?;
            write(&output, save_pgm(&out))
        }
        Command::Segment {
            input,
            out_mask,
            out_csv,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let img = load_image(&input)?;
            let seg = segment_detailed(&enhance(&img, &cfg.enhance)?, &cfg.segment)?;
            let mut bits = vec![false; img.width() * img.height()];
            for region in &seg.regions {
                for &(r, c) in region.pixels() {
                    bits[r * img.width() + c] = true;
                }
            }
            let mask = BinaryMask::new(img.width(), img.height(), bits)?;
            write(&out_mask, save_pgm(&mask.to_image()))?;
            let header: Vec<String> = [
                "region",
                "label",
                "area",
                "centroid_row",
                "centroid_col",
                "min_row",
                "min_col",
                "max_row",
                "max_col",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let rows: Vec<Vec<String>> = seg
                .regions
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let (cr, cc) = r.centroid();
                    let b = r.bbox();
                    vec![
                        i.to_string(),
                        r.label().to_string(),
                        r.area().to_string(),
                        cr.to_string(),
                        cc.to_string(),
                        b.min_row.to_string(),
                        b.min_col.to_string(),
                        b.max_row.to_string(),
                        b.max_col.to_string(),
                    ]
                })
                .collect();
            write_csv(&out_csv, &header, &rows)?;
            info!(
                "threshold {:?}, {} regions",
                seg.threshold,
                seg.regions.len()
            );
            Ok(())
        }
        Command::Features { input, out, config } => {
            let cfg = load_config(config.as_deref())?;
            let img = load_image(&input)?;
            let seg = segment_detailed(&enhance(&img, &cfg.enhance)?, &cfg.segment)?;
            let mut header = vec!["region".to_string()];
            header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
            let rows: Vec<Vec<String>> = seg
                .regions
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut row = vec![i.to_string()];
                    row.extend(extract_features(r).values().iter().map(|v| v.to_string()));
                    row
                })
                .collect();
            write_csv(&out, &header, &rows)
        }
        Command::Train {
            images,
            info: info_path,
            out,
            config,
            all,
        } => {
            let cfg = load_config(config.as_deref())?;
            let entries = load_dataset(&images, &read_text(&info_path)?)?;
            let entries = if all {
                entries
            } else {
                subset(&entries, &split_dataset(&entries, &cfg.split).0)
            };
            info!("training on {} images", entries.len());
            let (outcome, set) = train_model(&entries, &cfg)?;
            write(&out, save_model(&outcome.model))?;
            println!(
                "samples={} positive={} negative={} support_vectors={} converged={} passes={}",
                set.samples.len(),
                set.positives(),
                set.negatives(),
                outcome.support_vector_count(),
                outcome.converged,
                outcome.passes
            );
            Ok(())
        }
        Command::Predict {
            input,
            model,
            overlay,
            info: info_path,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            let model = load_model(&read(&model)?)?;
            let img = load_image(&input)?;
            let reference = reference_of(&input);
            let detections = detect(&model, &img, &cfg, &reference)?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let stdout = Path::new("<stdout>");
            w.write_record([
                "image",
                "region",
                "score",
                "predicted",
                "area",
                "centroid_row",
                "centroid_col",
                "min_row",
                "min_col",
                "max_row",
                "max_col",
            ])
            .map_err(|e| csv_error(stdout, e))?;
            for d in &detections {
                let predicted = match d.predicted {
                    mammocad::pipeline::Prediction::Tumor => "tumor",
                    mammocad::pipeline::Prediction::Normal => "normal",
                };
                w.write_record([
                    d.image_ref.clone(),
                    d.region_index.to_string(),
                    d.score.to_string(),
                    predicted.to_string(),
                    d.area.to_string(),
                    d.centroid.0.to_string(),
                    d.centroid.1.to_string(),
                    d.bbox.min_row.to_string(),
                    d.bbox.min_col.to_string(),
                    d.bbox.max_row.to_string(),
                    d.bbox.max_col.to_string(),
                ])
                .map_err(|e| csv_error(stdout, e))?;
            }
            w.flush().map_err(|e| io_error(stdout, e))?;
            if let Some(path) = overlay {
                let records = match info_path {
                    Some(p) => parse_info_file(&read_text(&p)?)?
                        .into_iter()
                        .filter(|r| r.reference == reference)
                        .collect(),
                    None => Vec::new(),
                };
                write(
                    &path,
                    save_pgm(&render_overlay(&img, &detections, &records)),
                )?;
            }
            Ok(())
        }
        Command::Evaluate {
            images,
            info: info_path,
            model,
            report,
            config,
            all,
        } => {
            let cfg = load_config(config.as_deref())?;
            let model = load_model(&read(&model)?)?;
            let entries = load_dataset(&images, &read_text(&info_path)?)?;
            let entries = if all {
                entries
            } else {
                subset(&entries, &split_dataset(&entries, &cfg.split).1)
            };
            info!("evaluating {} images", entries.len());
            let rep = evaluate(&model, &entries, &cfg)?;
            write(&report, rep.to_json())?;
            let sensitivity = rep
                .sensitivity
                .map_or_else(|| "undefined".to_string(), |s| s.to_string());
            println!(
                "images={} lesions={} tp={} fn={} fp={} tn={} sensitivity={}",
                rep.images, rep.lesions, rep.tp, rep.fn_, rep.fp, rep.tn, sensitivity
            );
            Ok(())
        }
        Command::Phantom { spec, out_dir } => {
            let corpus: CorpusSpec = toml::from_str(&read_text(&spec)?)
                .map_err(|e| PipelineError::Config(format!("{}: {e}", spec.display())))?;
            fs::create_dir_all(&out_dir).map_err(|e| io_error(&out_dir, e))?;
            let mut info_lines = String::new();
            for p in corpus.phantoms()? {
                let (img, records) = generate_phantom(&p)?;
                write(
                    &out_dir.join(format!("{}.pgm", p.reference)),
                    save_pgm(&img),
                )?;
                for r in records {
                    info_lines.push_str(&r.to_string());
                    info_lines.push('\n');
                }
            }
            write(&out_dir.join("info.txt"), info_lines)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
