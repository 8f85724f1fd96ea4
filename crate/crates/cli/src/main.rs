use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use persona_lab::dpr::{evaluate_routing, RoutingMemory};
use persona_lab::ingest::{load_bundle, read_corpus, BundlePaths, DprConfig, StudyConfig, Strictness};
use persona_lab::report::{self, persist_report, Cell, Format, Report, Table, Which};
use persona_lab::steer::synthetic::{planted_fixture, PlantedSpec};
use persona_lab::steer::{identify_trait_neurons, read_samples, samples_to_text};
use persona_lab::{Error, Memory, Network, NeuronMap, PersonaCondition, Polarity, Steering, Trait};

#[derive(Parser)]
#[command(name = "persona-lab", version, about = "Persona steering, persona-effect analysis and persona routing")]
struct Cli {
    /// Suppress informational lines on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score hidden units of a network and write the trait-neuron map (CSV).
    Identify(IdentifyArgs),
    /// Compare unsteered, high- and low-steered activations.
    SteerDemo(SteerDemoArgs),
    /// Run persona-effect analyses over a study bundle.
    Analyze(AnalyzeArgs),
    /// Build a routing memory or evaluate one.
    #[command(subcommand)]
    Route(RouteCommand),
}

#[derive(Args)]
struct IdentifyArgs {
    /// Network file.
    network: PathBuf,
    /// High-trait samples, one whitespace-separated vector per line.
    high: PathBuf,
    /// Low-trait samples.
    low: PathBuf,
    /// Trait letter or name.
    #[arg(long = "trait", value_name = "TRAIT", value_parser = parse_trait)]
    target: Trait,
    /// Selection threshold on |delta|.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SteerDemoArgs {
    /// Network file. Without it a planted fixture is generated from --seed.
    #[arg(long, requires = "map")]
    network: Option<PathBuf>,
    /// Trait-neuron map for --network.
    #[arg(long, requires = "network")]
    map: Option<PathBuf>,
    /// Input samples (defaults to the fixture's first high and low samples).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Trait for a generated fixture.
    #[arg(long = "trait", value_name = "TRAIT", default_value = "O", value_parser = parse_trait)]
    target: Trait,
    /// Threshold for a generated fixture.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Steering strength.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the generated fixture (network.txt, high.txt, low.txt) here.
    #[arg(long, value_name = "DIR", conflicts_with = "network")]
    emit_fixture: Option<PathBuf>,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct StrictnessArgs {
    /// Fail on incomplete (model, dataset) blocks (default).
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Drop incomplete (model, dataset) blocks with a warning.
    #[arg(long)]
    lenient: bool,
}

impl StrictnessArgs {
    fn get(&self) -> Strictness {
        if self.lenient {
            Strictness::Lenient
        } else {
            Strictness::Strict
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    Rq1,
    Rq2,
    Rq3,
    Rq4,
    All,
}

impl From<WhichArg> for Which {
    fn from(w: WhichArg) -> Self {
        match w {
            WhichArg::Rq1 => Which::Rq1,
            WhichArg::Rq2 => Which::Rq2,
            WhichArg::Rq3 => Which::Rq3,
            WhichArg::Rq4 => Which::Rq4,
            WhichArg::All => Which::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    which: WhichArg,
    /// Result-record files (JSON lines, or CSV by extension).
    #[arg(long, required = true, num_args = 1..)]
    records: Vec<PathBuf>,
    /// Model metadata files (JSON lines).
    #[arg(long, required = true, num_args = 1..)]
    models: Vec<PathBuf>,
    /// Study config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report directory (default: the config's output_dir, else ./reports).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    strictness: StrictnessArgs,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Also write SVG heatmaps of the per-persona matrices.
    #[arg(long)]
    render: bool,
}

#[derive(Subcommand)]
enum RouteCommand {
    /// Split a corpus and persist the reference part as a routing memory.
    Build(RouteBuildArgs),
    /// Route the held-out items of a corpus through a memory.
    Eval(RouteEvalArgs),
}

#[derive(Args)]
struct RouteBuildArgs {
    /// Corpus (JSON lines).
    corpus: PathBuf,
    /// Study config; its dpr block supplies seed and ratio defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Split seed [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Reference fraction [default: 0.9].
    #[arg(long)]
    ratio: Option<f64>,
    /// Memory file to write.
    #[arg(long, default_value = "routing-memory.json")]
    out: PathBuf,
}

#[derive(Args)]
struct RouteEvalArgs {
    /// Corpus the memory was built from.
    corpus: PathBuf,
    /// Memory file from `route build`.
    #[arg(long, default_value = "routing-memory.json")]
    memory: PathBuf,
    /// Report directory.
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

/// Trait letter or name, any case.
fn parse_trait(s: &str) -> Result<Trait, String> {
    Trait::ALL
        .into_iter()
        .find(|t| t.letter().eq_ignore_ascii_case(s) || t.name().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("expected one of A C E N O or a trait name, got {s:?}"))
}

/// Exit status 2: bad arguments or unreadable inputs.
struct Usage(String);

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

struct Log {
    quiet: bool,
}

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn warn(&self, msg: impl AsRef<str>) {
        eprintln!("warning: {}", msg.as_ref());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log { quiet: cli.quiet };
    let result = match cli.command {
        Command::Identify(a) => identify(a, &log),
        Command::SteerDemo(a) => steer_demo(a, &log),
        Command::Analyze(a) => analyze(a, &log),
        Command::Route(RouteCommand::Build(a)) => route_build(a, &log),
        Command::Route(RouteCommand::Eval(a)) => route_eval(a, &log),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("Run with --help for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(report) => {
                    for issue in report.errors.iter().chain(&report.warnings) {
                        eprintln!("  {issue}");
                    }
                    ExitCode::from(1)
                }
                Error::Io(_) | Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn require_file(path: &Path, what: &str) -> Result<(), Usage> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Usage(format!("{what} {} does not exist", path.display())))
    }
}

fn emit(out: Option<&Path>, text: &str, log: &Log) -> CliResult {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(Error::from)?;
            }
            std::fs::write(p, text).map_err(Error::from)?;
            log.info(format!("wrote {}", p.display()));
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)?;
        }
    }
    Ok(())
}

fn identify(a: IdentifyArgs, log: &Log) -> CliResult {
    require_file(&a.network, "network file")?;
    require_file(&a.high, "high corpus")?;
    require_file(&a.low, "low corpus")?;
    let net = Network::load(&a.network)?;
    let high = read_samples(&a.high)?;
    let low = read_samples(&a.low)?;
    let map = identify_trait_neurons(&net, a.target, &high, &low, a.tau)?;
    log.info(format!(
        "{}: {} positive, {} negative of {} units",
        a.target.name(),
        map.positive().len(),
        map.negative().len(),
        net.neuron_count()
    ));
    emit(a.out.as_deref(), &map.to_csv_string()?, log)
}

fn mean_over<'a>(values: impl Iterator<Item = &'a f64>) -> Cell {
    let v: Vec<f64> = values.copied().collect();
    if v.is_empty() {
        Cell::Empty
    } else {
        Cell::Real(v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn steer_demo(a: SteerDemoArgs, log: &Log) -> CliResult {
    let (net, map, samples) = match (&a.network, &a.map) {
        (Some(net_path), Some(map_path)) => {
            require_file(net_path, "network file")?;
            require_file(map_path, "neuron map")?;
            let input = a
                .input
                .as_ref()
                .ok_or_else(|| Usage("--input is required with --network".into()))?;
            require_file(input, "input file")?;
            let file = std::fs::File::open(map_path).map_err(Error::from)?;
            (Network::load(net_path)?, NeuronMap::read_csv(file)?, read_samples(input)?)
        }
        _ => {
            let fx = planted_fixture::<f64>(&PlantedSpec::default(), a.seed)?;
            if let Some(dir) = &a.emit_fixture {
                std::fs::create_dir_all(dir).map_err(Error::from)?;
                fx.network.save(&dir.join("network.txt"))?;
                std::fs::write(dir.join("high.txt"), samples_to_text(&fx.high)).map_err(Error::from)?;
                std::fs::write(dir.join("low.txt"), samples_to_text(&fx.low)).map_err(Error::from)?;
                log.info(format!("wrote fixture to {}", dir.display()));
            }
            let map = identify_trait_neurons(&fx.network, a.target, &fx.high, &fx.low, a.tau)?;
            let samples = match &a.input {
                Some(p) => {
                    require_file(p, "input file")?;
                    read_samples(p)?
                }
                None => vec![fx.high[0].clone(), fx.low[0].clone()],
            };
            (fx.network, map, samples)
        }
    };

    let target = map.target_trait();
    let conditions = [
        PersonaCondition::Baseline,
        PersonaCondition::Polar(target, Polarity::High),
        PersonaCondition::Polar(target, Polarity::Low),
    ];
    let mut table = Table::new(["sample", "condition", "positive_mean", "negative_mean", "output_mean"]);
    for (i, x) in samples.iter().enumerate() {
        for &c in &conditions {
            let cfg = Steering::for_persona(&map, c, a.alpha)?;
            let acts = net.forward(x, cfg.as_ref())?;
            let out = acts.output();
            table.push(vec![
                Cell::Int(i),
                Cell::text(c.code()),
                mean_over(map.positive().iter().filter_map(|&n| acts.get(n))),
                mean_over(map.negative().iter().filter_map(|&n| acts.get(n))),
                mean_over(out.iter()),
            ]);
        }
    }
    emit(a.out.as_deref(), &table.render(a.format.into())?, log)
}

fn analyze(a: AnalyzeArgs, log: &Log) -> CliResult {
    for p in a.records.iter().chain(&a.models).chain(&a.config) {
        require_file(p, "input")?;
    }
    let paths = BundlePaths {
        records: a.records,
        models: a.models,
        config: a.config,
    };
    let bundle = load_bundle(&paths, a.strictness.get())?;
    for w in &bundle.warnings {
        log.warn(w.to_string());
    }
    let out = a
        .out
        .or(bundle.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("reports"));
    let output = report::analyze(&bundle.study, a.which.into(), &out, a.format.into(), a.render)?;
    for w in &output.warnings {
        log.warn(w);
    }
    for f in &output.files {
        log.info(format!("wrote {}", f.display()));
    }
    Ok(())
}

fn route_build(a: RouteBuildArgs, log: &Log) -> CliResult {
    require_file(&a.corpus, "corpus")?;
    let defaults = match &a.config {
        Some(p) => {
            require_file(p, "config")?;
            StudyConfig::load(p)?.dpr
        }
        None => DprConfig::default(),
    };
    let seed = a.seed.unwrap_or(defaults.seed);
    let ratio = a.ratio.unwrap_or(defaults.ratio);
    let items = read_corpus(&a.corpus)?;
    let (memory, test): (Memory, _) = RoutingMemory::build(items, ratio, seed)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
    }
    memory.save(&a.out)?;
    log.info(format!(
        "{}: {} reference, {} held out; fallback {}; wrote {}",
        memory.dataset(),
        memory.reference().len(),
        test.len(),
        memory.fallback_persona().code(),
        a.out.display()
    ));
    Ok(())
}

fn route_eval(a: RouteEvalArgs, log: &Log) -> CliResult {
    require_file(&a.corpus, "corpus")?;
    require_file(&a.memory, "routing memory")?;
    let memory = Memory::load(&a.memory)?;
    let items = read_corpus(&a.corpus)?;
    let split = memory.split();
    if items.len() != split.total {
        return Err(Usage(format!(
            "corpus has {} items but the memory was built from {}",
            items.len(),
            split.total
        ))
        .into());
    }
    let test: Vec<_> = items.into_iter().filter(|it| !memory.contains(&it.item_id)).collect();
    let result = evaluate_routing(&memory, &test)?;

    let format: Format = a.format.into();
    std::fs::create_dir_all(&a.out).map_err(Error::from)?;
    let ext = format.extension();
    let reports: [(&str, &dyn Report); 3] = [
        ("routing_summary", &report::RoutingSummary(&result)),
        (
            "routing_details",
            &report::RoutingDetails {
                report: &result,
                seed: split.seed,
                ratio: split.ratio,
            },
        ),
        ("routing_results", &report::RoutingResultsTable(&result)),
    ];
    for (stem, r) in reports {
        let path = a.out.join(format!("{stem}.{ext}"));
        persist_report(r, &path, format)?;
        log.info(format!("wrote {}", path.display()));
    }
    log.info(format!(
        "{}: {}/{} hits ({:.2}%), best static {} {:.2}%",
        result.dataset,
        result.hits,
        result.sampled,
        result.accuracy,
        result.best_persona.code(),
        result.best_baseline
    ));
    Ok(())
}
