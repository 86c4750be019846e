use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use newstag::corpus::{generate_synthetic, parse_corpus, write_corpus, ParseOptions, ParseReport};
use newstag::credibility::all_data_credibility;
use newstag::graph::{
    build_direct_graph, export_graph, normalize, write_dot, write_relation_matrix, write_vocabulary,
};
use newstag::harness::{
    case_study, convergence_trace, grid_search_mu, popularity_analysis, purity_analysis, run_ablation,
    run_experiment, sweep_detection_time, sweep_training_fraction, write_case_study_csv, write_grid_csv,
    write_predictions, write_sweep_csv, ExperimentConfig, Model, SweepPoint,
};
use newstag::Corpus;

use crate::args::{AnalyzeCommand, Command, InputArgs, RelationArg, ReplayArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] newstag::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_parameter_error() => 1,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Contents of `<out>.config.json`.
#[derive(Serialize, Deserialize)]
struct Echo {
    tool: String,
    version: String,
    invocation: Command,
    effective: serde_json::Value,
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn same_file(a: &Path, b: &Path) -> bool {
    if a == b {
        return true;
    }
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn guard_outputs(input: Option<&Path>, outputs: &[PathBuf]) -> Result<()> {
    for (i, out) in outputs.iter().enumerate() {
        if input.is_some_and(|inp| same_file(inp, out)) {
            return Err(CliError::Usage(format!(
                "output {} would overwrite the input",
                out.display()
            )));
        }
        if outputs[..i].iter().any(|o| same_file(o, out)) {
            return Err(CliError::Usage(format!("output {} is used twice", out.display())));
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_echo(out: &Path, command: &Command, effective: serde_json::Value) -> Result<()> {
    let echo = Echo {
        tool: "newstag".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        invocation: command.clone(),
        effective,
    };
    write_json(&sidecar(out, ".config.json"), &echo)
}

fn load(input: &InputArgs) -> Result<(Corpus, ParseReport)> {
    let file = File::open(&input.input).map_err(|source| CliError::Io {
        path: input.input.clone(),
        source,
    })?;
    let opts = ParseOptions {
        lenient: input.lenient,
        ..Default::default()
    };
    let (corpus, report) = parse_corpus(BufReader::new(file), &opts)?;
    info!(
        "loaded {} news ({} labeled), {} posts, {} hashtags",
        report.news, report.labeled, report.posts, report.hashtags
    );
    Ok((corpus, report))
}

fn validated(cfg: ExperimentConfig) -> Result<ExperimentConfig> {
    cfg.validate()?;
    Ok(cfg)
}

fn summary_line(label: &str, r: &newstag::MetricsReport) {
    println!(
        "{label}: macro_f1 {:.4} ± {:.4}, micro_f1 {:.4} ± {:.4} over {} repetitions",
        r.macro_f1.mean,
        r.macro_f1.std,
        r.micro_f1.mean,
        r.micro_f1.std,
        r.repetitions.len()
    );
}

fn sweep_effective(cfg: &ExperimentConfig, points: &[f64]) -> serde_json::Value {
    json!({ "experiment": cfg, "points": points })
}

fn write_sweep(out: &Path, points: &[SweepPoint]) -> Result<()> {
    let mut w = create(out)?;
    write_sweep_csv(points, &mut w)?;
    for p in points {
        summary_line(&p.x, &p.report);
    }
    Ok(())
}

pub fn dispatch(command: Command) -> Result<()> {
    match &command {
        Command::Validate(a) => {
            if let Some(out) = &a.out {
                guard_outputs(Some(&a.input.input), &[out.clone(), sidecar(out, ".config.json")])?;
            }
            let (_, report) = load(&a.input)?;
            println!(
                "ok: {} news ({} labeled), {} posts, {} hashtags, {} skipped lines, {} rejected hashtags",
                report.news,
                report.labeled,
                report.posts,
                report.hashtags,
                report.skipped.len(),
                report.rejected_hashtags
            );
            if let Some(out) = &a.out {
                write_json(out, &report)?;
                write_echo(out, &command, json!({ "lenient": a.input.lenient }))?;
            }
        }
        Command::Synth(a) => {
            let params = a.params()?;
            let out = &a.out.out;
            let mut outputs = vec![out.clone(), sidecar(out, ".config.json")];
            if params.chain_depth > 0 {
                outputs.push(sidecar(out, ".chains.json"));
            }
            guard_outputs(None, &outputs)?;
            let synth = generate_synthetic(&params, a.seed)?;
            let mut w = create(out)?;
            write_corpus(&synth.corpus, &mut w)?;
            if params.chain_depth > 0 {
                write_json(
                    &outputs[2],
                    &json!({
                        "designated": synth.designated,
                        "bridges": synth.bridges,
                        "designated_hashtags": synth.designated_hashtags,
                    }),
                )?;
            }
            write_echo(out, &command, json!({ "seed": a.seed, "params": params }))?;
            println!("wrote {} news to {}", synth.corpus.len(), out.display());
        }
        Command::BuildGraph(a) => {
            let mut cfg = ExperimentConfig::default();
            a.graph.apply(&mut cfg);
            let cfg = validated(cfg)?;
            let out = &a.out.out;
            guard_outputs(
                Some(&a.input.input),
                &[out.clone(), sidecar(out, ".vocab"), sidecar(out, ".config.json")],
            )?;
            let (corpus, _) = load(&a.input)?;
            let model = Model::build(&corpus, &cfg)?;
            write_relation_matrix(model.relation(), create(out)?)?;
            write_vocabulary(model.vocabulary(), create(&sidecar(out, ".vocab"))?)?;
            write_echo(out, &command, json!({ "experiment": cfg }))?;
            println!(
                "{}: {} hashtags, {} stored entries",
                model.relation().kind,
                model.relation().dim(),
                model.relation().matrix().nnz()
            );
        }
        Command::Run(a) => {
            let cfg = validated(a.experiment.config())?;
            let out = &a.out.out;
            let mut outputs = vec![out.clone(), sidecar(out, ".config.json")];
            if a.predictions {
                outputs.push(sidecar(out, ".predictions.csv"));
            }
            guard_outputs(Some(&a.input.input), &outputs)?;
            let (corpus, _) = load(&a.input)?;
            let outcome = run_experiment(&corpus, &cfg)?;
            write_json(out, &outcome.report)?;
            if a.predictions {
                // predictions refer to the corpus the model saw
                let seen = match cfg.time_horizon_hours {
                    Some(h) => newstag::corpus::filter_by_time(&corpus, h)?.0,
                    None => corpus,
                };
                write_predictions(&seen, &outcome.repetitions[0], create(&outputs[2])?)?;
            }
            write_echo(out, &command, json!({ "experiment": cfg }))?;
            summary_line(cfg.method.as_str(), &outcome.report);
        }
        Command::Ablate(a) => {
            let cfg = validated(a.experiment.config())?;
            let out = &a.out.out;
            guard_outputs(Some(&a.input.input), &[out.clone(), sidecar(out, ".config.json")])?;
            let (corpus, _) = load(&a.input)?;
            let reports = run_ablation(&corpus, &cfg)?;
            write_json(out, &reports)?;
            write_echo(out, &command, json!({ "experiment": cfg }))?;
            for r in &reports {
                summary_line(r.method.as_str(), r);
            }
        }
        Command::GridMu(a) => {
            let cfg = validated(a.experiment.config())?;
            let out = &a.out.out;
            guard_outputs(
                Some(&a.input.input),
                &[out.clone(), sidecar(out, ".json"), sidecar(out, ".config.json")],
            )?;
            let (corpus, _) = load(&a.input)?;
            let report = grid_search_mu(&corpus, &cfg, &a.grid)?;
            write_grid_csv(&report, create(out)?)?;
            write_json(&sidecar(out, ".json"), &report)?;
            write_echo(out, &command, json!({ "experiment": cfg, "grid": a.grid }))?;
            if !report.excluded.is_empty() {
                info!("skipped grid values outside (0,1): {:?}", report.excluded);
            }
            println!("best mu {}", report.best_mu);
        }
        Command::SweepVolume(a) => {
            let cfg = validated(a.experiment.config())?;
            let out = &a.out.out;
            guard_outputs(Some(&a.input.input), &[out.clone(), sidecar(out, ".config.json")])?;
            let (corpus, _) = load(&a.input)?;
            let points = sweep_training_fraction(&corpus, &cfg, &a.fractions)?;
            write_sweep(out, &points)?;
            write_echo(out, &command, sweep_effective(&cfg, &a.fractions))?;
        }
        Command::SweepTime(a) => {
            let cfg = validated(a.experiment.config())?;
            let out = &a.out.out;
            guard_outputs(Some(&a.input.input), &[out.clone(), sidecar(out, ".config.json")])?;
            let (corpus, _) = load(&a.input)?;
            let points = sweep_detection_time(&corpus, &cfg, &a.horizons)?;
            write_sweep(out, &points)?;
            write_echo(out, &command, sweep_effective(&cfg, &a.horizons))?;
        }
        Command::Analyze(analysis) => analyze(&command, analysis)?,
        Command::Export(a) => {
            let mut cfg = ExperimentConfig::default();
            a.graph.apply(&mut cfg);
            let cfg = validated(cfg)?;
            let prefix = &a.out.out;
            let mut outputs = vec![
                sidecar(prefix, ".edges.tsv"),
                sidecar(prefix, ".nodes.tsv"),
                sidecar(prefix, ".config.json"),
            ];
            if a.dot {
                outputs.push(sidecar(prefix, ".dot"));
            }
            guard_outputs(Some(&a.input.input), &outputs)?;
            let (corpus, _) = load(&a.input)?;
            let relation = match a.relation {
                RelationArg::Direct => build_direct_graph(&corpus, cfg.method.weighted()).to_relation(),
                RelationArg::Normalized => normalize(&build_direct_graph(&corpus, cfg.method.weighted()))?,
                RelationArg::All => Model::build(&corpus, &cfg)?.relation().clone(),
            };
            let vocab = corpus.vocabulary();
            let c_star = all_data_credibility(&corpus, vocab, cfg.method.per_post());
            export_graph(&relation, vocab, Some(&c_star), create(&outputs[0])?, create(&outputs[1])?)?;
            if a.dot {
                write_dot(&relation, vocab, Some(&c_star), create(&outputs[3])?)?;
            }
            write_echo(prefix, &command, json!({ "experiment": cfg }))?;
            println!("exported {} hashtags to {}.*", vocab.len(), prefix.display());
        }
        Command::Replay(a) => replay(a)?,
    }
    Ok(())
}

fn analyze(command: &Command, analysis: &AnalyzeCommand) -> Result<()> {
    match analysis {
        AnalyzeCommand::Purity(a) => {
            let out = &a.out.out;
            guard_outputs(Some(&a.input.input), &[out.clone(), sidecar(out, ".config.json")])?;
            let (corpus, _) = load(&a.input)?;
            let s = purity_analysis(&corpus);
            s.write_csv(create(out)?)?;
            write_echo(out, command, json!({}))?;
            println!(
                "hashtags: {} fake-only, {} true-only, {} mixed; {} labeled news without hashtags",
                s.fake_only_hashtags, s.true_only_hashtags, s.mixed_hashtags, s.hashtag_free_news
            );
        }
        AnalyzeCommand::Popularity(a) => {
            let out = &a.out.out;
            let counts = sidecar(out, ".counts.csv");
            guard_outputs(
                Some(&a.input.input),
                &[out.clone(), counts.clone(), sidecar(out, ".config.json")],
            )?;
            let (corpus, _) = load(&a.input)?;
            let r = popularity_analysis(&corpus, &a.checkpoints)?;
            r.write_summary_csv(create(out)?)?;
            r.write_counts_csv(create(&counts)?)?;
            write_echo(out, command, json!({ "checkpoints": a.checkpoints }))?;
            println!(
                "{} news summarized, {} without publish time excluded",
                r.per_news.len(),
                r.untimed_news
            );
        }
        AnalyzeCommand::CaseStudy(a) => {
            let cfg = validated(a.experiment.config())?;
            let out = &a.out.out;
            guard_outputs(Some(&a.input.input), &[out.clone(), sidecar(out, ".config.json")])?;
            let (corpus, _) = load(&a.input)?;
            let rows = case_study(&corpus, &cfg, &a.watchlist)?;
            write_case_study_csv(&rows, create(out)?)?;
            write_echo(out, command, json!({ "experiment": cfg }))?;
            let absent = rows.iter().filter(|r| r.c_star.is_none()).count();
            println!("{} hashtags reported, {} absent", rows.len(), absent);
        }
        AnalyzeCommand::Convergence(a) => {
            let cfg = validated(a.experiment.config())?;
            let out = &a.out.out;
            guard_outputs(Some(&a.input.input), &[out.clone(), sidecar(out, ".config.json")])?;
            let (corpus, _) = load(&a.input)?;
            let r = convergence_trace(&corpus, &cfg)?;
            r.write_csv(create(out)?)?;
            write_echo(out, command, json!({ "experiment": cfg }))?;
            println!("{} closure terms, {} propagation iterations", r.closure.len(), r.max_norm.len());
        }
    }
    Ok(())
}

fn replay(a: &ReplayArgs) -> Result<()> {
    let file = File::open(&a.config).map_err(|source| CliError::Io {
        path: a.config.clone(),
        source,
    })?;
    let echo: Echo = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| newstag::Error::Format(format!("{}: {e}", a.config.display())))?;
    let mut command = echo.invocation;
    if let Some(out) = &a.out {
        match command.out_mut() {
            Some(slot) => *slot = out.clone(),
            None => return Err(CliError::Usage("recorded command has no output path".into())),
        }
    }
    if let Some(out) = command.out_mut() {
        if same_file(&sidecar(out, ".config.json"), &a.config) {
            return Err(CliError::Usage(
                "replay would overwrite its own config file; pass --out".into(),
            ));
        }
    }
    info!("replaying {}", command.name());
    dispatch(command)
}
