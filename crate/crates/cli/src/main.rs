// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sightline::config::{AppConfig, BackendSpec, DESCRIBER_ENV, JUDGE_ENV, SEGMENTER_ENV};
use sightline::mock_backend::{self, Backends};
use sightline::server::{self, AppState};
use sightline_core::eval::dataset::{import_mme, import_pope, read_jsonl, write_jsonl, DirImageSource};
use sightline_core::eval::{
    compare, run_mme, run_pope, run_qa90, summary, Augmenter, EvalContext, EvalReport, JudgeRubric, MmeSubtask,
    Strategy,
};
use sightline_core::session::{parse_script, replay, PipelineConfig};
use sightline_core::{DepthImage, Execution, PromptTemplate, RgbImage};

/// Exit status when a run finished but some records failed.
const EVAL_ERRORS: u8 = 3;

#[derive(Parser)]
#[command(name = "sightline", version, about = "Segmentation-grounded scene description")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the session API.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Replay a gesture script offline and print one JSON line per response.
    Demo {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        depth: Option<PathBuf>,
        #[arg(long)]
        script: PathBuf,
        /// Same file format as `serve --config`; mocks by default.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Serve /segment and /describe from the in-process mocks.
    MockBackend {
        #[arg(long, default_value_t = 9000)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Mock backend spec (`kind = "mock"`) used for both endpoints.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// POPE binary QA.
    RunPope(EvalArgs),
    /// MME existence and count.
    RunMme(EvalArgs),
    /// Judge-scored description quality.
    RunQa90 {
        #[command(flatten)]
        eval: EvalArgs,
        /// Judge backend spec.
        #[arg(long)]
        judge: PathBuf,
        #[arg(long)]
        rubric: Option<PathBuf>,
    },
    /// Compare two reports of the same benchmark.
    Report {
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Vec<PathBuf>,
        /// Also write the comparison as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Convert one POPE strategy file to the harness JSON-lines format.
    ImportPope {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert an MME tab-separated subtask file.
    ImportMme {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        subtask: MmeSubtask,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// JSON-lines dataset.
    #[arg(long)]
    data: PathBuf,
    /// Directory the dataset's image names are relative to.
    #[arg(long)]
    images: PathBuf,
    /// Describer backend spec.
    #[arg(long)]
    backend: PathBuf,
    /// Prepend the segmentation knowledge sentence.
    #[arg(long)]
    augment: bool,
    /// Segmenter backend spec, required with --augment.
    #[arg(long)]
    segmenter: Option<PathBuf>,
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Report label; defaults to "augmented" or "baseline".
    #[arg(long)]
    label: Option<String>,
    /// Concurrent records; 0 picks automatically, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    /// Exit 0 even when some records failed.
    #[arg(long)]
    allow_errors: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. } | Command::MockBackend { .. }) {
        "info"
    } else {
        "warn"
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level)),
        )
        .init();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Serve { config, port } => serve(config.as_deref(), port),
        Command::Demo { image, depth, script, config } => demo(&image, depth.as_deref(), &script, config.as_deref()),
        Command::MockBackend { port, bind, config } => mock(&bind, port, config.as_deref()),
        Command::RunPope(args) => evaluate(Bench::Pope, &args),
        Command::RunMme(args) => evaluate(Bench::Mme, &args),
        Command::RunQa90 { eval, judge, rubric } => evaluate(Bench::Qa90 { judge, rubric }, &eval),
        Command::Report { compare: paths, json } => report(&paths, json.as_deref()),
        Command::ImportPope { input, strategy, out } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let imported = import_pope(&text, strategy)?;
            write_records(&out, &imported.records)?;
            println!(
                "{} records, {} yes / {} no",
                imported.records.len(),
                imported.balance.yes,
                imported.balance.no
            );
            for (questions, images) in &imported.questions_per_image {
                println!("  {images} images with {questions} questions");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ImportMme { input, subtask, out } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let imported = import_mme(&text, subtask)?;
            write_records(&out, &imported.records)?;
            println!("{} images", imported.records.len());
            for (image, n) in &imported.rejected {
                println!("  skipped {image}: {n} questions");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_app_config(path: Option<&Path>) -> Result<AppConfig> {
    path.map_or_else(|| Ok(AppConfig::default()), AppConfig::load)
}

fn serve(config: Option<&Path>, port: u16) -> Result<ExitCode> {
    let cfg = load_app_config(config)?;
    let state = Arc::new(AppState::new(
        cfg.service()?,
        Duration::from_secs(cfg.server.session_ttl_secs),
        cfg.server.auth_token.clone(),
    ));
    let app = server::router(state.clone(), cfg.server.max_upload_bytes);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((cfg.server.bind.as_str(), port)).await?;
        tracing::info!("listening on {}", listener.local_addr()?);
        let sweeper = state.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(Duration::from_secs(60));
            loop {
                tick.tick().await;
                let n = sweeper.store.purge_expired();
                if n > 0 {
                    tracing::info!("expired {n} idle sessions");
                }
            }
        });
        axum::serve(listener, app).with_graceful_shutdown(shutdown()).await?;
        Ok(ExitCode::SUCCESS)
    })
}

fn mock(bind: &str, port: u16, config: Option<&Path>) -> Result<ExitCode> {
    let spec = match config {
        Some(p) => BackendSpec::load(p)?,
        None => BackendSpec::default(),
    };
    if !matches!(spec, BackendSpec::Mock(_)) {
        bail!("mock-backend needs a kind = \"mock\" spec");
    }
    let app = mock_backend::router(Backends { segmenter: spec.segmenter("")?, describer: spec.describer("")? });
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((bind, port)).await?;
        tracing::info!("mock backend on {}", listener.local_addr()?);
        axum::serve(listener, app).with_graceful_shutdown(shutdown()).await?;
        Ok(ExitCode::SUCCESS)
    })
}

async fn shutdown() {
    let _ = tokio::signal::ctrl_c().await;
}

fn demo(image: &Path, depth: Option<&Path>, script: &Path, config: Option<&Path>) -> Result<ExitCode> {
    let service = load_app_config(config)?.service()?;
    let rgb = RgbImage::load(image).with_context(|| format!("loading {}", image.display()))?;
    let depth = depth.map(|p| DepthImage::load(p).with_context(|| format!("loading {}", p.display()))).transpose()?;
    let text = std::fs::read_to_string(script).with_context(|| format!("reading {}", script.display()))?;
    let gestures = parse_script(&text)?;
    let mut out = std::io::stdout().lock();
    for event in replay(&service, &rgb, depth.as_ref(), &gestures) {
        serde_json::to_writer(&mut out, &event)?;
        writeln!(out)?;
    }
    Ok(ExitCode::SUCCESS)
}

enum Bench {
    Pope,
    Mme,
    Qa90 { judge: PathBuf, rubric: Option<PathBuf> },
}

fn evaluate(bench: Bench, args: &EvalArgs) -> Result<ExitCode> {
    let describer = BackendSpec::load(&args.backend)?.describer(DESCRIBER_ENV)?;
    let template = match &args.template {
        Some(p) => PromptTemplate::load(p)?,
        None => PromptTemplate::default(),
    };
    let pipeline = PipelineConfig::default();
    let segmenter = match (&args.segmenter, args.augment) {
        (Some(p), true) => Some(BackendSpec::load(p)?.segmenter(SEGMENTER_ENV)?),
        (None, true) => bail!("--augment needs --segmenter"),
        (_, false) => None,
    };
    let images = DirImageSource::new(&args.images);
    let ctx = EvalContext {
        images: &images,
        describer: describer.as_ref(),
        augment: segmenter.as_deref().map(|s| Augmenter { segmenter: s, template: &template, pipeline: &pipeline }),
        execution: Execution::from_parallelism(args.parallelism),
        label: args.label.clone().unwrap_or_else(|| if args.augment { "augmented" } else { "baseline" }.into()),
    };
    let report = match bench {
        Bench::Pope => EvalReport::Pope(run_pope(&read_jsonl(&args.data)?, &ctx)?),
        Bench::Mme => EvalReport::Mme(run_mme(&read_jsonl(&args.data)?, &ctx)?),
        Bench::Qa90 { judge, rubric } => {
            let judge = BackendSpec::load(&judge)?.describer(JUDGE_ENV)?;
            let rubric = match rubric {
                Some(p) => JudgeRubric::load(p)?,
                None => JudgeRubric::default(),
            };
            EvalReport::Qa90(run_qa90(&read_jsonl(&args.data)?, &ctx, judge.as_ref(), &rubric)?)
        }
    };
    report.save(&args.out)?;
    print!("{}", summary(&report));
    let errors = report.error_count();
    if errors > 0 {
        eprintln!("{errors} records failed; see {}", args.out.display());
        if !args.allow_errors {
            return Ok(ExitCode::from(EVAL_ERRORS));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report(paths: &[PathBuf], json: Option<&Path>) -> Result<ExitCode> {
    let [a, b] = paths else { bail!("--compare takes two report files") };
    let cmp = compare(&EvalReport::load(a)?, &EvalReport::load(b)?)?;
    print!("{}", cmp.text);
    if let Some(p) = json {
        std::fs::write(p, serde_json::to_string_pretty(&cmp.json)? + "\n")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn write_records<T: serde::Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_jsonl(&mut w, records)?;
    w.flush()?;
    Ok(())
}
