use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use gbs_graph::engine::{
    ingest_samples, simulate_code, simulate_many, write_samples, LossModel, SampleSet,
    SimulateOptions, DEFAULT_CUTOFF_PAIRS,
};
use gbs_graph::features::{
    default_loss_grid, default_orbits, fv_events_from_samples, fv_orbits_from_samples,
    AnalyticModel, AnalyticReference, OrbitId, DEFAULT_EVENTS, DEFAULT_N_MAX,
};
use gbs_graph::io::{
    build_catalog, ingest_report, load_sample_dir, render_svg, sample_file, write_csv, write_file,
    write_fv_csv, FvRecord,
};
use gbs_graph::report::{class_of, fig2, fig3, fig4};
use gbs_graph::{make_embedding, Error, GraphCode};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "gbs-graph", version, about = "Gaussian boson sampling of graphs embedded on an 8-mode device")]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Photon-pair cutoff of probability tables.
    #[arg(long, global = true, default_value_t = DEFAULT_CUTOFF_PAIRS)]
    cutoff_pairs: usize,

    /// Output file, or directory for commands that write several files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Catalog of embeddable graphs.
    Enumerate {
        /// Include all 1024 candidates with rejection reasons.
        #[arg(long)]
        all_candidates: bool,
    },
    /// Isomorphism class of each code (all embeddable codes if none given).
    Classify { codes: Vec<GraphCode> },
    /// Embedding parameters of one graph.
    Embed { code: GraphCode },
    /// Sample photon patterns.
    Simulate(SimulateArgs),
    /// Validate a sample file and summarize it.
    Ingest { file: PathBuf },
    /// Event or orbit feature vectors, sampled and/or analytic.
    Fv(FvArgs),
    /// Relative deviation of sampled events from the analytic values over
    /// a loss-factor grid.
    Deviation(DeviationArgs),
    /// Figure data as CSV plus a static SVG.
    Figure(FigureArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Graph code; omit with --all.
    code: Option<GraphCode>,

    /// Every embeddable code, one file each under --out.
    #[arg(long, conflicts_with = "code")]
    all: bool,

    #[arg(long, default_value_t = 100_000)]
    shots: usize,

    /// Transmission η applied by binomial thinning.
    #[arg(long, value_name = "ETA")]
    loss: Option<f64>,

    /// Clamp counts to clicks.
    #[arg(long)]
    threshold: bool,
}

#[derive(Args, Debug)]
struct FvArgs {
    /// Sample files.
    #[arg(long = "samples", num_args = 1..)]
    samples: Vec<PathBuf>,

    /// Graph for the analytic vector.
    #[arg(long)]
    code: Option<GraphCode>,

    /// Comma-separated event totals.
    #[arg(long, value_delimiter = ',')]
    events: Option<Vec<usize>>,

    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    n_max: usize,

    /// Semicolon-separated orbits, e.g. "1,1,1;2,1,1".
    #[arg(long)]
    orbits: Option<String>,

    /// Transmission η of the analytic vector; defaults to that of the samples.
    #[arg(long, value_name = "ETA")]
    loss: Option<f64>,
}

#[derive(Args, Debug)]
struct DeviationArgs {
    file: PathBuf,

    #[arg(long)]
    code: Option<GraphCode>,

    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EVENTS)]
    events: Vec<usize>,

    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    n_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FigureKind {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Args, Debug)]
struct FigureArgs {
    kind: FigureKind,

    /// Directory of per-code sample files (fig2, fig4) or one sample file (fig3).
    #[arg(long)]
    samples: PathBuf,

    /// Graph of the fig3 samples; defaults to the code in their metadata.
    #[arg(long)]
    code: Option<GraphCode>,

    /// Event total plotted by fig2.
    #[arg(long, default_value_t = 6)]
    event: usize,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(Error::Io {
                        path: "<stdout>".into(),
                        source: e,
                    }
                    .into())
                }
                _ => {}
            }
        }
    }
    Ok(())
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(buf)
}

fn json_bytes<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn format_or(cli: &Cli, default: Format, allowed: &[Format]) -> CliResult<Format> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        usage(format!("--format {f:?} is not supported by this command").to_lowercase())
    }
}

fn loss_model(eta: Option<f64>) -> CliResult<LossModel> {
    Ok(eta.map(LossModel::from_transmission).transpose()?.unwrap_or_else(LossModel::lossless))
}

fn embeddable_codes() -> Vec<GraphCode> {
    build_catalog(false).records.iter().map(|r| r.code).collect()
}

fn cmd_enumerate(cli: &Cli, all_candidates: bool) -> CliResult<()> {
    let catalog = build_catalog(all_candidates);
    info!(
        "{} records, {} embeddable",
        catalog.records.len(),
        catalog.embeddable().count()
    );
    let bytes = match format_or(cli, Format::Json, &[Format::Json, Format::Csv])? {
        Format::Json => json_bytes(&catalog)?,
        _ => {
            let opt = |x: Option<String>| x.unwrap_or_default();
            let rows: Vec<Vec<String>> = catalog
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.code.to_string(),
                        r.embeddable.to_string(),
                        opt(r.class.map(|c| c.label().to_string())),
                        opt(r.rank.map(|x| x.to_string())),
                        opt(r.m.map(gbs_graph::io::fmt_sig)),
                        opt(r.singular_value.map(gbs_graph::io::fmt_sig)),
                        opt(r.reason.clone()),
                    ]
                })
                .collect();
            csv_bytes(
                &["code", "embeddable", "class", "rank", "m", "singular_value", "reason"],
                &rows,
            )?
        }
    };
    emit(cli.out.as_deref(), &bytes)
}

fn cmd_classify(cli: &Cli, codes: &[GraphCode]) -> CliResult<()> {
    let codes = if codes.is_empty() {
        embeddable_codes()
    } else {
        codes.to_vec()
    };
    let rows: Vec<(GraphCode, String, bool)> = codes
        .iter()
        .map(|&c| (c, class_of(c).label().to_string(), make_embedding(c).is_ok()))
        .collect();
    let bytes = match format_or(cli, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => {
            let v: Vec<serde_json::Value> = rows
                .iter()
                .map(|(c, class, emb)| serde_json::json!({"code": c, "class": class, "embeddable": emb}))
                .collect();
            json_bytes(&v)?
        }
        _ => {
            let rows: Vec<Vec<String>> = rows
                .into_iter()
                .map(|(c, class, emb)| vec![c.to_string(), class, emb.to_string()])
                .collect();
            csv_bytes(&["code", "class", "embeddable"], &rows)?
        }
    };
    emit(cli.out.as_deref(), &bytes)
}

fn cmd_embed(cli: &Cli, code: GraphCode) -> CliResult<()> {
    format_or(cli, Format::Json, &[Format::Json])?;
    let spec = make_embedding(code)?;
    let mut value = serde_json::to_value(&spec).map_err(Error::from)?;
    value["class"] = serde_json::json!(class_of(code).label());
    emit(cli.out.as_deref(), &json_bytes(&value)?)
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> CliResult<()> {
    let opts = SimulateOptions {
        shots: args.shots,
        seed: cli.seed,
        loss: loss_model(args.loss)?,
        threshold: args.threshold,
        cutoff_pairs: cli.cutoff_pairs,
    };
    if args.all {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("samples"));
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let sets = simulate_many(&embeddable_codes(), &opts)?;
        for (code, set) in &sets {
            write_samples(&sample_file(&dir, *code), set)?;
        }
        info!("wrote {} sample files to {}", sets.len(), dir.display());
        return Ok(());
    }
    let Some(code) = args.code else {
        return usage("simulate needs a code or --all");
    };
    let set = simulate_code(code, &opts)?;
    if let Some(used) = set.meta.cutoff_pairs.filter(|&c| c != cli.cutoff_pairs) {
        warn!(
            "cutoff raised from {} to {used} pairs to cover 0.99 of the distribution",
            cli.cutoff_pairs
        );
    }
    let path = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("{code}.jsonl")));
    write_samples(&path, &set)?;
    info!("wrote {} shots to {}", set.len(), path.display());
    Ok(())
}

fn cmd_ingest(cli: &Cli, file: &Path) -> CliResult<()> {
    format_or(cli, Format::Json, &[Format::Json])?;
    let set = ingest_samples(file)?;
    let report = ingest_report(&set)?;
    if report.loss_signature {
        warn!(
            "{:.4} of shots have an odd photon total: loss signature",
            report.odd_total_fraction
        );
    }
    emit(cli.out.as_deref(), &json_bytes(&report)?)
}

fn parse_orbits(spec: &str) -> CliResult<Vec<OrbitId>> {
    Ok(spec
        .split(';')
        .map(str::parse)
        .collect::<Result<Vec<OrbitId>, Error>>()?)
}

fn cmd_fv(cli: &Cli, args: &FvArgs) -> CliResult<()> {
    format_or(cli, Format::Csv, &[Format::Csv])?;
    if args.samples.is_empty() && args.code.is_none() {
        return usage("fv needs --samples, --code, or both");
    }
    let orbits = args.orbits.as_deref().map(parse_orbits).transpose()?;
    let events = match (&args.events, &orbits) {
        (Some(e), _) => Some(e.clone()),
        (None, None) => Some(DEFAULT_EVENTS.to_vec()),
        (None, Some(_)) => None,
    };

    let mut records = Vec::new();
    let mut first_set: Option<SampleSet> = None;
    for path in &args.samples {
        let set = ingest_samples(path)?;
        if set.meta.threshold {
            warn!("{}: click data; analytic values assume photon-number detection", path.display());
        }
        let code = set.meta.code.or(args.code);
        let class = code.map(class_of);
        if let Some(ks) = &events {
            let fv = fv_events_from_samples(&set, ks, args.n_max)?;
            records.push(FvRecord { code, class, fv });
        }
        if let Some(os) = &orbits {
            let fv = fv_orbits_from_samples(&set, os)?;
            records.push(FvRecord { code, class, fv });
        }
        first_set.get_or_insert(set);
    }

    if let Some(code) = args.code {
        let spec = make_embedding(code)?;
        let matching = first_set.as_ref().filter(|s| s.meta.code.is_none_or(|c| c == code));
        let model = match matching {
            Some(set) => AnalyticModel::for_samples(spec, &set.meta, cli.cutoff_pairs)?,
            None => AnalyticModel::new(spec, cli.cutoff_pairs, AnalyticReference::Exact)?,
        };
        let eta = args.loss.or_else(|| matching.and_then(|s| s.meta.loss));
        let loss = loss_model(eta)?;
        let class = Some(class_of(code));
        if let Some(ks) = &events {
            let fv = model.events(ks, args.n_max, loss);
            records.push(FvRecord { code: Some(code), class, fv });
        }
        if let Some(os) = &orbits {
            let fv = model.orbits(os, loss);
            records.push(FvRecord { code: Some(code), class, fv });
        }
    }

    let mut buf = Vec::new();
    write_fv_csv(&mut buf, &records)?;
    emit(cli.out.as_deref(), &buf)
}

fn samples_code(set: &SampleSet, given: Option<GraphCode>) -> CliResult<GraphCode> {
    match given.or(set.meta.code) {
        Some(c) => Ok(c),
        None => usage("the sample file names no code; pass --code"),
    }
}

fn cmd_deviation(cli: &Cli, args: &DeviationArgs) -> CliResult<()> {
    let set = ingest_samples(&args.file)?;
    let code = samples_code(&set, args.code)?;
    let fig = fig3(code, &set, &args.events, args.n_max, &default_loss_grid(), cli.cutoff_pairs)?;
    for (label, x) in &fig.crossings {
        match x {
            Some(x) => info!("{label}: matches at loss factor {x:.4}"),
            None => info!("{label}: no crossing on the grid"),
        }
    }
    let bytes = match format_or(cli, Format::Csv, &[Format::Csv, Format::Json])? {
        Format::Json => {
            let crossings: Vec<serde_json::Value> = fig
                .crossings
                .iter()
                .map(|(l, x)| serde_json::json!({"label": l.to_string(), "loss_factor": x}))
                .collect();
            let labels: Vec<String> = fig.curve.labels.iter().map(ToString::to_string).collect();
            json_bytes(&serde_json::json!({
                "code": code,
                "loss_factors": fig.curve.loss_factors,
                "labels": labels,
                "deviations": fig.curve.deviations,
                "crossings": crossings,
            }))?
        }
        _ => csv_bytes(&gbs_graph::report::Fig3::HEADER, &fig.csv_rows())?,
    };
    emit(cli.out.as_deref(), &bytes)
}

fn cmd_figure(cli: &Cli, args: &FigureArgs) -> CliResult<()> {
    let svg = match cli.format {
        None | Some(Format::Svg) => true,
        Some(Format::Csv) => false,
        Some(Format::Json) => return usage("figures are written as csv and svg"),
    };
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let put = |name: &str, bytes: &[u8]| -> CliResult<()> {
        let path = dir.join(name);
        write_file(&path, bytes)?;
        info!("wrote {}", path.display());
        Ok(())
    };
    match args.kind {
        FigureKind::Fig2 => {
            let samples = load_sample_dir(&args.samples, &embeddable_codes())?;
            let fig = fig2(&samples, args.event, DEFAULT_N_MAX, cli.cutoff_pairs)?;
            put("fig2.csv", &csv_bytes(&gbs_graph::report::Fig2::HEADER, &fig.csv_rows())?)?;
            if svg {
                put("fig2.svg", render_svg(&[fig.plot()]).as_bytes())?;
            }
        }
        FigureKind::Fig3 => {
            let set = ingest_samples(&args.samples)?;
            let code = samples_code(&set, args.code)?;
            let fig = fig3(code, &set, &DEFAULT_EVENTS, DEFAULT_N_MAX, &default_loss_grid(), cli.cutoff_pairs)?;
            put("fig3.csv", &csv_bytes(&gbs_graph::report::Fig3::HEADER, &fig.csv_rows())?)?;
            put(
                "fig3_crossings.csv",
                &csv_bytes(&gbs_graph::report::Fig3::CROSSING_HEADER, &fig.crossing_rows())?,
            )?;
            if svg {
                put("fig3.svg", render_svg(&[fig.plot()]).as_bytes())?;
            }
        }
        FigureKind::Fig4 => {
            let samples = load_sample_dir(&args.samples, &embeddable_codes())?;
            let fig = fig4(&samples, &default_orbits())?;
            let header = fig.header();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            put("fig4.csv", &csv_bytes(&header, &fig.csv_rows())?)?;
            put(
                "fig4_spread.csv",
                &csv_bytes(&gbs_graph::report::Fig4::SPREAD_HEADER, &fig.spread_rows())?,
            )?;
            if let Some((d, tail)) = fig.p3_s3_distance {
                println!("analytic 2P3-2S3 orbit distance: {d:.6e} (truncation bound {tail:.1e})");
            }
            println!(
                "classes separated from their nearest neighbour: {}/{}",
                fig.separated_count(),
                fig.spreads.len()
            );
            if svg {
                put("fig4.svg", render_svg(&fig.plots()).as_bytes())?;
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Enumerate { all_candidates } => cmd_enumerate(cli, *all_candidates),
        Command::Classify { codes } => cmd_classify(cli, codes),
        Command::Embed { code } => cmd_embed(cli, *code),
        Command::Simulate(args) => cmd_simulate(cli, args),
        Command::Ingest { file } => cmd_ingest(cli, file),
        Command::Fv(args) => cmd_fv(cli, args),
        Command::Deviation(args) => cmd_deviation(cli, args),
        Command::Figure(args) => cmd_figure(cli, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(
        env_logger::Env::default().default_filter_or(if cli.verbose { "info" } else { "warn" }),
    )
    .init();

    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(CliError::Usage(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Ok(Err(CliError::Core(e))) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_IO })
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
