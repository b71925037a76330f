//! `biasbench`: runs pipeline stages from one config file.
//!
//! Exit status is 0 on success, 1 when a stage fails (an `error.json`
//! report is written to the output directory) and 2 for configuration or
//! usage errors.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use biasbench_core::pipeline::{
    resolve_out_dir, AnnotationMode, ErrorReport, Pipeline, PipelineConfig, Stage, StageStatus,
    ERROR_REPORT,
};
use biasbench_core::Error;
use biasbench_hub::Hub;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "biasbench",
    version,
    about = "Synthetic face-verification bias benchmark"
)]
struct Cli {
    /// TOML or JSON config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root.
    #[arg(long, global = true, env = "BIASBENCH_OUT")]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Leave pairs of a prototype with itself out of the curves.
    #[arg(long, global = true)]
    exclude_self_slots: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the stand-in world.
    World,
    /// Sample labelled latents.
    Sample,
    /// Fit attribute directions.
    Directions,
    /// Place prototypes for every candidate seed.
    Prototypes,
    /// Screen and diversity-filter seeds.
    Curate,
    /// Build attribute sequences for the kept seeds.
    Variants,
    /// Build positive, negative and cross-group pairs.
    Pairs,
    /// Collect ratings; uses the configured mode without a subcommand.
    Annotate {
        #[command(subcommand)]
        mode: Option<AnnotateMode>,
    },
    /// Consensus scores and the realism filter.
    Aggregate,
    /// Embed every face.
    Embed,
    /// Curves, gaps and similarity statistics.
    Analyze,
    /// CSV, SVG and summary files.
    Report,
    /// Run several stages in order.
    Run {
        /// Comma-separated stage names or `all`.
        #[arg(long, default_value = "all")]
        stages: String,
    },
}

#[derive(Debug, Subcommand)]
enum AnnotateMode {
    /// Simulated raters.
    Simulate,
    /// Serve the rating API until interrupted.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        host: Option<String>,
    },
}

enum Action {
    Stages(Vec<Stage>),
    Serve,
}

fn fail(out: Option<&Path>, stage: Option<Stage>, e: &Error, code: u8) -> ExitCode {
    let report = ErrorReport {
        stage,
        kind: e.kind().into(),
        message: e.to_string(),
    };
    if let Some(dir) = out {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(
                dir.join(ERROR_REPORT),
                serde_json::to_vec_pretty(&report).unwrap_or_default(),
            );
        }
    }
    eprintln!(
        "{}",
        serde_json::to_string(&report).unwrap_or_else(|_| e.to_string())
    );
    ExitCode::from(code)
}

fn configure(cli: &Cli) -> Result<(PipelineConfig, Action), Error> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if cli.exclude_self_slots {
        cfg.analysis.include_self_slots = false;
    }
    let action = match &cli.command {
        Command::World => Action::Stages(vec![Stage::World]),
        Command::Sample => Action::Stages(vec![Stage::Sample]),
        Command::Directions => Action::Stages(vec![Stage::Directions]),
        Command::Prototypes => Action::Stages(vec![Stage::Prototypes]),
        Command::Curate => Action::Stages(vec![Stage::Curate]),
        Command::Variants => Action::Stages(vec![Stage::Variants]),
        Command::Pairs => Action::Stages(vec![Stage::Pairs]),
        Command::Aggregate => Action::Stages(vec![Stage::Aggregate]),
        Command::Embed => Action::Stages(vec![Stage::Embed]),
        Command::Analyze => Action::Stages(vec![Stage::Analyze]),
        Command::Report => Action::Stages(vec![Stage::Report]),
        Command::Run { stages } => Action::Stages(Stage::parse_list(stages)?),
        Command::Annotate {
            mode: Some(AnnotateMode::Simulate),
        } => {
            cfg.annotation.mode = AnnotationMode::Simulate;
            Action::Stages(vec![Stage::Annotate])
        }
        Command::Annotate {
            mode: Some(AnnotateMode::Serve { port, host }),
        } => {
            cfg.annotation.mode = AnnotationMode::Serve;
            if let Some(p) = port {
                cfg.annotation.port = *p;
            }
            if let Some(h) = host {
                cfg.annotation.host = h.clone();
            }
            Action::Serve
        }
        Command::Annotate { mode: None } => match cfg.annotation.mode {
            AnnotationMode::Simulate => Action::Stages(vec![Stage::Annotate]),
            AnnotationMode::Serve => Action::Serve,
        },
    };
    cfg.validate()?;
    Ok((cfg, action))
}

fn serve(pipeline: &Pipeline) -> Result<(), Error> {
    let a = &pipeline.config().annotation;
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| Error::Config(format!("bad listen address {}:{}: {e}", a.host, a.port)))?;
    let hub = Arc::new(Hub::new(pipeline.annotation_queue()?));
    let image_dir = a.image_dir.clone();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io(Path::new("<runtime>"), e))?;
    eprintln!("serving rating tasks on http://{addr}");
    runtime
        .block_on(biasbench_hub::serve(hub, image_dir, addr))
        .map_err(|e| Error::io(Path::new(&addr.to_string()), e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, action) = match configure(&cli) {
        Ok(v) => v,
        Err(e) => return fail(cli.out.as_deref(), None, &e, 2),
    };
    let out = resolve_out_dir(cli.out.clone(), None, &cfg);
    let pipeline = match Pipeline::new(cfg, &out) {
        Ok(p) => p,
        Err(e) => return fail(Some(&out), None, &e, 2),
    };
    match action {
        Action::Stages(stages) => match pipeline.run_reporting(&stages) {
            Ok(report) => {
                for (stage, status) in report.stages {
                    let s = match status {
                        StageStatus::Ran => "ran",
                        StageStatus::Cached => "cached",
                    };
                    println!("{stage}\t{s}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                let stage =
                    biasbench_core::jsonl::read_json::<ErrorReport>(&out.join(ERROR_REPORT))
                        .ok()
                        .and_then(|r| r.stage);
                eprintln!(
                    "{}",
                    serde_json::to_string(&ErrorReport {
                        stage,
                        kind: e.kind().into(),
                        message: e.to_string()
                    })
                    .unwrap_or_default()
                );
                ExitCode::from(1)
            }
        },
        Action::Serve => match serve(&pipeline) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(Some(&out), Some(Stage::Annotate), &e, 1),
        },
    }
}
