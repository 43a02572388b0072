use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use firecast::error::{Error, Result};
use firecast::fcm::ActivationVector;
use firecast::io;
use firecast::localize::{detect_fire, DEFAULT_QUANTILE};
use firecast::nn::{self, Architecture, InputSpec, Model, TrainConfig};
use firecast::pipeline::{run_fire_scenario, DetectionLog, FireObservation, Window, DEFAULT_CAP, WILDFIRE_CONCEPT};

#[derive(Parser)]
#[command(name = "firecast", version, about = "Wildfire detection and fuzzy cognitive map forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic fire/nofire dataset of PGM images
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 400)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        size: usize,
    },
    /// Train a classifier on DIR/fire and DIR/nofire
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 16)]
        batch: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        filters: usize,
        #[arg(long, default_value_t = 3)]
        kernel: usize,
        #[arg(long, default_value_t = 2)]
        pool: usize,
        #[arg(long, default_value_t = 128)]
        hidden: usize,
    },
    /// Report loss and accuracy of a model on a labelled dataset
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Classify one image and localise the fire if present
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value_t = DEFAULT_QUANTILE)]
        quantile: f64,
    },
    /// Fuzzy cognitive map commands
    Fcm {
        #[command(subcommand)]
        command: FcmCommand,
    },
    /// Classify a folder of timestamped images and run the wildfire scenario
    Pipeline {
        #[arg(long)]
        model: PathBuf,
        /// PGM files whose names start with an epoch-seconds timestamp
        #[arg(long)]
        images: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: Window,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Baseline activations as {"values": [...]}; defaults to all 0.5
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, default_value_t = WILDFIRE_CONCEPT)]
        wildfire_concept: usize,
        #[arg(long, default_value_t = DEFAULT_QUANTILE)]
        quantile: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum FcmCommand {
    /// Iterate a map from an initial state until it settles
    Run {
        #[arg(long)]
        map: PathBuf,
        /// Initial activations as {"values": [...]}; defaults to all 0.5
        #[arg(long)]
        init: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let start = a.trim().parse::<i64>().map_err(|e| format!("bad window start: {e}"))?;
    let end = b.trim().parse::<i64>().map_err(|e| format!("bad window end: {e}"))?;
    Window::new(start, end).map_err(|e| e.to_string())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct EpochLine {
    epoch: usize,
    loss: f64,
    accuracy: f64,
}

fn leading_timestamp(path: &Path) -> Result<i64> {
    let stem = path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let digits: String = stem.chars().take_while(char::is_ascii_digit).collect();
    digits
        .parse()
        .map_err(|_| Error::Input("file name must start with an epoch-seconds timestamp".into()).in_file(path))
}

fn pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::from(e).in_file(dir))? {
        let path = entry.map_err(|e| Error::from(e).in_file(dir))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { out, count, seed, size } => {
            let m = io::synth_generate(&out, count, seed, size)?;
            print_json(&serde_json::json!({
                "root": m.root,
                "fire": m.fire.len(),
                "nofire": m.nofire.len(),
            }))
        }
        Command::Train {
            data,
            model,
            epochs,
            lr,
            batch,
            seed,
            filters,
            kernel,
            pool,
            hidden,
        } => {
            let images = io::dataset_load(&data)?;
            let first = &images[0].image;
            let arch = Architecture {
                input: InputSpec::new(first.height(), first.width(), 1),
                filters,
                kernel,
                pool_window: pool,
                hidden_units: hidden,
            };
            let samples = io::to_samples(&images);
            let mut net = Model::new(arch, seed)?;
            let cfg = TrainConfig {
                learning_rate: lr,
                epochs,
                batch_size: batch,
                seed,
            };
            let mut print_err = None;
            nn::train(&mut net, &samples, &cfg, |epoch, m| {
                if print_err.is_none() {
                    print_err = print_json(&EpochLine {
                        epoch: epoch + 1,
                        loss: m.loss,
                        accuracy: m.accuracy,
                    })
                    .err();
                }
            })?;
            if let Some(e) = print_err {
                return Err(e);
            }
            io::model_save(&net, &model)
        }
        Command::Eval { data, model } => {
            let net = io::model_load(&model)?;
            let samples = io::to_samples(&io::dataset_load(&data)?);
            print_json(&nn::evaluate(&net, &samples)?)
        }
        Command::Classify { model, image, quantile } => {
            let net = io::model_load(&model)?;
            let img = io::pgm_load(&image)?;
            print_json(&detect_fire(&net, &img, quantile).map_err(|e| e.in_file(&image))?)
        }
        Command::Fcm {
            command: FcmCommand::Run { map, init },
        } => {
            let fcm = io::fcm_file_load(&map)?;
            let initial = match init {
                Some(p) => io::load_activation(p)?,
                None => ActivationVector::uniform(fcm.size(), 0.5)?,
            };
            print_json(&fcm.run(&initial)?)
        }
        Command::Pipeline {
            model,
            images,
            map,
            window,
            cap,
            baseline,
            wildfire_concept,
            quantile,
            format,
        } => {
            let net = io::model_load(&model)?;
            let fcm = io::fcm_file_load(&map)?;
            let mut entries = Vec::new();
            for path in pgm_files(&images)? {
                let t = leading_timestamp(&path)?;
                let img = io::pgm_load(&path)?;
                let d = detect_fire(&net, &img, quantile).map_err(|e| e.in_file(&path))?;
                entries.push((t, d));
            }
            let log = DetectionLog::from_unsorted(entries);
            let observation = FireObservation::from_log(&log, window, cap)?;
            let base = match baseline {
                Some(p) => io::load_activation(p)?,
                None => ActivationVector::uniform(fcm.size(), 0.5)?,
            };
            let report = run_fire_scenario(&fcm, &base, &observation, wildfire_concept)?;
            match format {
                Format::Json => {
                    println!("{}", report.to_json()?);
                    Ok(())
                }
                Format::Table => {
                    print!("{}", report.to_table());
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
