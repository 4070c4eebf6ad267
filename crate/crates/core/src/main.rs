//! Command-line front end: corpus analysis, Markov simulation, corpus
//! generation, signature batteries and parameter sweeps.
//!
//! Every JSON report carries the effective configuration and master seed
//! next to its results. The `run` record (wall-clock start and elapsed time)
//! is the only part that changes between identical invocations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use scriptforge::boundary::{self, Weighting};
use scriptforge::corpus::{self, Corpus, LoadOptions, Scheme, StorageOrder};
use scriptforge::evaluate::{
    self, BatteryParams, BatteryResult, GeneratorSpec, Reference, SignatureReport, SignatureThresholds,
    SweepPoint,
};
use scriptforge::generators::{
    grille, naibbe, slot, GeneratedCorpus, GrilleConfig, KvConfig, NaibbeConfig, SlotConfig,
};
use scriptforge::positional::{self, Position};
use scriptforge::{markov, ngram, seed, Bootstrap, Error};

#[derive(Debug, Parser, Serialize)]
#[command(name = "scriptforge", version, about = "Directional and positional structure metrics for segmented texts")]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, env = "SCRIPTFORGE_SEED", default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    jobs: Option<usize>,

    /// Output directory (`generate`: output corpus file). Reports go to
    /// stdout when omitted.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Directional asymmetries, boundary statistics and positional profile of a corpus.
    Analyze(AnalyzeArgs),
    /// Word-level Markov dissociation experiment.
    Simulate(SimulateArgs),
    /// Write a generated corpus and its provenance record.
    Generate(GenerateArgs),
    /// Score a corpus, or a battery of generated corpora, on the four signatures.
    Evaluate(EvaluateArgs),
    /// Run a declared grid of generator batteries.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SchemeArg {
    Eva,
    Chars,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Eva => Scheme::Eva,
            SchemeArg::Chars => Scheme::Chars,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct CorpusArgs {
    /// Sentence-per-line corpus file.
    #[arg(long)]
    corpus: PathBuf,

    #[arg(long, value_enum, default_value_t = SchemeArg::Eva)]
    scheme: SchemeArg,

    /// Grapheme inventory for the EVA scheme (default: bundled EVA inventory).
    #[arg(long)]
    inventory: Option<PathBuf>,

    /// The file stores right-to-left text in logical order; reverse word
    /// order before analysis.
    #[arg(long)]
    rtl: bool,

    /// Character scheme: keep digits and punctuation.
    #[arg(long)]
    keep_non_letters: bool,
}

#[derive(Debug, Args, Serialize)]
struct AnalyzeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Character n-gram orders, e.g. `2-4` or `1,3,5`.
    #[arg(long, default_value = "2-4")]
    n: Orders,

    /// Boundary gram sizes for the cross-boundary asymmetry.
    #[arg(long, default_value = "1-4")]
    cb_n: Orders,

    /// Bootstrap replicates (0 disables intervals).
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,

    /// Additive smoothing for the character models.
    #[arg(long, default_value_t = 1.0)]
    smoothing: f64,

    #[arg(long, value_enum, default_value_t = WeightingArg::SentenceMean)]
    weighting: WeightingArg,

    /// Shuffled copies for the shuffle control and MI decomposition.
    #[arg(long, default_value_t = 10)]
    shuffles: usize,

    /// Signature thresholds file (`key = value`).
    #[arg(long)]
    thresholds: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WeightingArg {
    SentenceMean,
    Pooled,
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Self {
        match w {
            WeightingArg::SentenceMean => Weighting::SentenceMean,
            WeightingArg::Pooled => Weighting::Pooled,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,

    /// Chain orders, e.g. `1,2`.
    #[arg(long, default_value = "1,2")]
    k: Orders,

    #[arg(long, default_value_t = 10)]
    runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Slot,
    Grille,
    Naibbe,
}

#[derive(Debug, Clone, Args, Serialize)]
struct GeneratorArgs {
    #[arg(long, value_enum)]
    kind: Kind,

    /// Generator configuration (`key = value`); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Naibbe plaintext file (overrides a `plaintext` key in the config).
    #[arg(long)]
    plaintext: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    #[command(flatten)]
    generator: GeneratorArgs,

    #[arg(long, default_value_t = 37_000)]
    words: usize,
}

#[derive(Debug, Args, Serialize)]
struct BatteryArgs {
    #[arg(long, default_value_t = 20)]
    runs: usize,

    #[arg(long, default_value_t = 37_000)]
    words: usize,

    /// Bootstrap replicates for the battery intervals.
    #[arg(long, default_value_t = 1000)]
    bootstrap: usize,

    /// `analyze` report (or bare signature record) of the reference corpus.
    #[arg(long)]
    reference: Option<PathBuf>,

    /// Signature thresholds file (`key = value`).
    #[arg(long)]
    thresholds: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    /// Score this corpus instead of running a generator battery.
    #[arg(long, conflicts_with = "kind")]
    corpus: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = SchemeArg::Eva)]
    scheme: SchemeArg,

    /// Grapheme inventory for the EVA scheme (default: bundled EVA inventory).
    #[arg(long)]
    inventory: Option<PathBuf>,

    /// Generator to run a battery of.
    #[arg(long, value_enum, required_unless_present = "corpus")]
    kind: Option<Kind>,

    /// Generator configuration (`key = value`); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Naibbe plaintext file (overrides a `plaintext` key in the config).
    #[arg(long)]
    plaintext: Option<PathBuf>,

    #[command(flatten)]
    battery: BatteryArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Grid {
    SlotAblations,
    SlotSweeps,
    GrilleSkew,
    GrilleSweeps,
    GrilleConfigs,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    /// Which grid of configurations to run.
    #[arg(long, value_enum)]
    grid: Grid,

    /// Base generator configuration the grid varies.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Skew values for `grille-skew`.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    alphas: Vec<f64>,

    /// Natural-language corpus for learned and row-sequential grille tables.
    #[arg(long)]
    language_source: Option<PathBuf>,

    /// Random-text corpus for the learned-random grille table.
    #[arg(long)]
    random_source: Option<PathBuf>,

    /// Tokenization of the grille source corpora.
    #[arg(long, value_enum, default_value_t = SchemeArg::Chars)]
    source_scheme: SchemeArg,

    #[command(flatten)]
    battery: BatteryArgs,
}

/// Comma-separated orders and inclusive ranges, e.g. `1,3-5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
struct Orders(Vec<usize>);

impl std::str::FromStr for Orders {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_orders(s).map(Orders)
    }
}

fn parse_orders(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = |_| format!("bad order {part:?}");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(bad)?),
        }
    }
    if out.is_empty() {
        return Err("no orders given".into());
    }
    Ok(out)
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Lib(e) if !e.is_data_error() => 1,
            Failure::Lib(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Internal(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
        Err(_) => ExitCode::from(3),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(format!("thread pool: {e}")))?;
    }
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let report = match &cli.command {
        Command::Analyze(a) => analyze(cli, a)?,
        Command::Simulate(a) => simulate(cli, a)?,
        Command::Generate(a) => return generate(cli, a),
        Command::Evaluate(a) => evaluate_cmd(cli, a)?,
        Command::Sweep(a) => sweep_cmd(cli, a)?,
    };
    let mut doc = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
        "config": serde_json::to_value(cli).map_err(internal)?,
        "results": report.json,
    });
    doc["run"] = json!({ "started_unix": started, "elapsed_ms": clock.elapsed().as_millis() as u64 });
    let name = command_name(&cli.command);
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
            write_file(&dir.join(format!("{name}.json")), &pretty(&doc)?)?;
            for (file, body) in &report.files {
                write_file(&dir.join(file), body)?;
            }
        }
        None => println!("{}", pretty(&doc)?),
    }
    Ok(())
}

/// JSON results plus auxiliary CSV files written next to the report.
struct Report {
    json: Value,
    files: Vec<(String, String)>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze(_) => "analyze",
        Command::Simulate(_) => "simulate",
        Command::Generate(_) => "generate",
        Command::Evaluate(_) => "evaluate",
        Command::Sweep(_) => "sweep",
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn pretty(v: &Value) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(internal)?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| Failure::Lib(Error::Io { path: path.to_path_buf(), source: e }))
}

fn to_json<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(internal)
}

fn load_options(scheme: SchemeArg, inventory: Option<&Path>) -> CliResult<LoadOptions> {
    let mut opts = LoadOptions::new(scheme.into());
    if let Some(p) = inventory {
        opts.inventory = Some(corpus::GraphemeInventory::load(p)?);
    }
    Ok(opts)
}

fn load(args: &CorpusArgs) -> CliResult<(Corpus, usize)> {
    let mut opts = load_options(args.scheme, args.inventory.as_deref())?;
    opts.keep_non_letters = args.keep_non_letters;
    if args.rtl {
        opts.storage_order = StorageOrder::LogicalRtl;
    }
    let loaded = corpus::load_corpus(&args.corpus, &opts)?;
    let c = if args.rtl {
        corpus::visual_transform(&loaded.corpus)?
    } else {
        loaded.corpus
    };
    Ok((c, loaded.dropped_words))
}

fn corpus_summary(c: &Corpus, dropped: usize) -> Value {
    json!({
        "name": c.name,
        "sentences": c.sentences.len(),
        "words": c.word_count(),
        "graphemes": c.alphabet().len(),
        "dropped_words": dropped,
    })
}

fn thresholds(path: Option<&Path>) -> CliResult<SignatureThresholds> {
    Ok(match path {
        Some(p) => SignatureThresholds::load(p)?,
        None => SignatureThresholds::default(),
    })
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> CliResult<Report> {
    let (c, dropped) = load(&a.corpus)?;
    let th = thresholds(a.thresholds.as_deref())?;
    let mut deltas = Vec::new();
    for &n in &a.n.0 {
        let bs = Bootstrap::new(a.bootstrap, seed::derive_named(cli.seed, &format!("delta-char-{n}")));
        deltas.push(to_json(&ngram::delta_char(&c, n, a.smoothing, &bs)?)?);
    }
    let mut cb = Vec::new();
    for &n in &a.cb_n.0 {
        let bs = Bootstrap::new(a.bootstrap, seed::derive_named(cli.seed, &format!("delta-cb-{n}")));
        let r = boundary::cross_boundary(&c, n, &bs, a.weighting.into())?;
        let shuffle = if a.shuffles > 0 {
            Some(boundary::shuffle_control(
                &c,
                n,
                seed::derive_named(cli.seed, &format!("shuffle-{n}")),
                a.shuffles,
            )?)
        } else {
            None
        };
        cb.push(json!({ "result": to_json(&r)?, "shuffle_control": to_json(&shuffle)? }));
    }
    let pc = positional::classify(&c, positional::DEFAULT_THRESHOLD);
    let graphemes: Vec<Value> = pc
        .iter()
        .map(|(s, g)| {
            json!({
                "grapheme": c.symbol(s),
                "initial": g.initial,
                "final": g.r#final,
                "class": g.class,
            })
        })
        .collect();
    let extremes: Vec<Value> = positional::extreme_ratios(&pc, positional::DEFAULT_EXTREME_RATIO)
        .iter()
        .map(|e| json!({ "grapheme": c.symbol(e.grapheme), "ratio": e.ratio, "side": e.side }))
        .collect();
    let decomposition =
        positional::mi_decomposition(&c, &pc, seed::derive_named(cli.seed, "mi-decomposition"), a.shuffles)?;
    let mut dists = serde_json::Map::new();
    let mut rank_csv = String::from("position,rank,count\n");
    for (key, pos) in [("initial", Position::Initial), ("final", Position::Final), ("combined", Position::Combined)] {
        let d = positional::boundary_distribution(&c, pos)?;
        for (i, k) in d.rank_freq.iter().enumerate() {
            rank_csv.push_str(&format!("{key},{},{k}\n", i + 1));
        }
        dists.insert(key.into(), to_json(&d)?);
    }
    let signatures = evaluate::evaluate_corpus(&c, &th)?;
    let json = json!({
        "corpus": corpus_summary(&c, dropped),
        "delta_char": deltas,
        "cross_boundary": cb,
        "positional": {
            "threshold": pc.threshold,
            "graphemes": graphemes,
            "polarization": positional::polarization_index(&pc)?,
            "e_to_s": positional::end_to_start_rate(&c, &pc)?,
            "extreme_ratios": extremes,
            "bilateral": positional::bilateral_extremity(&pc),
        },
        "mi_decomposition": to_json(&decomposition)?,
        "boundary_distribution": dists,
        "thresholds": to_json(&th)?,
        "signatures": to_json(&signatures)?,
    });
    Ok(Report {
        json,
        files: vec![("rank_frequency.csv".into(), rank_csv)],
    })
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> CliResult<Report> {
    let (c, dropped) = load(&a.corpus)?;
    let mut reports = Vec::new();
    for &k in &a.k.0 {
        let r = markov::dissociation_experiment(&c, k, a.runs, seed::derive_named(cli.seed, &format!("markov-{k}")))?;
        reports.push(to_json(&r)?);
    }
    Ok(Report {
        json: json!({ "corpus": corpus_summary(&c, dropped), "dissociation": reports }),
        files: Vec::new(),
    })
}

/// A generator plus the paths its configuration pulled in.
struct LoadedGenerator {
    spec: GeneratorSpec,
    inputs: Value,
}

fn read_kv(path: Option<&Path>) -> CliResult<KvConfig> {
    Ok(match path {
        Some(p) => KvConfig::load(p)?,
        None => KvConfig::default(),
    })
}

fn load_generator(kind: Kind, config: Option<&Path>, plaintext: Option<&Path>) -> CliResult<LoadedGenerator> {
    let mut kv = read_kv(config)?;
    Ok(match kind {
        Kind::Slot => LoadedGenerator {
            spec: GeneratorSpec::Slot(SlotConfig::from_kv(kv)?),
            inputs: Value::Null,
        },
        Kind::Grille => {
            let source = kv.take_str("source");
            let scheme = match kv.take_str("source_scheme").as_deref() {
                None | Some("chars") => SchemeArg::Chars,
                Some("eva") => SchemeArg::Eva,
                Some(other) => return Err(Failure::Usage(format!("unknown source_scheme {other:?}"))),
            };
            let mut cfg = GrilleConfig::from_kv(kv)?;
            if let Some(src) = &source {
                let opts = load_options(scheme, None)?;
                cfg = cfg.with_source(Arc::new(corpus::load_corpus(Path::new(src), &opts)?.corpus));
            }
            LoadedGenerator {
                spec: GeneratorSpec::Grille(cfg),
                inputs: json!({ "source": source, "source_scheme": scheme }),
            }
        }
        Kind::Naibbe => {
            let from_config = kv.take_str("plaintext").map(PathBuf::from);
            let path = plaintext
                .map(Path::to_path_buf)
                .or(from_config)
                .ok_or_else(|| Failure::Usage("naibbe needs a plaintext (--plaintext or `plaintext =`)".into()))?;
            let text = fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            LoadedGenerator {
                spec: GeneratorSpec::Naibbe {
                    cfg: NaibbeConfig::from_kv(kv)?,
                    plaintext: Arc::new(text),
                },
                inputs: json!({ "plaintext": path }),
            }
        }
    })
}

fn generate(cli: &Cli, a: &GenerateArgs) -> CliResult<()> {
    let g = &a.generator;
    let loaded = load_generator(g.kind, g.config.as_deref(), g.plaintext.as_deref())?;
    let out: GeneratedCorpus = match &loaded.spec {
        GeneratorSpec::Slot(c) => slot::generate_slot_corpus(c, a.words, cli.seed)?,
        GeneratorSpec::Grille(c) => grille::generate_grille_corpus(c, a.words, cli.seed)?,
        GeneratorSpec::Naibbe { cfg, plaintext } => naibbe::generate_naibbe_corpus(cfg, plaintext, a.words, cli.seed)?,
        GeneratorSpec::Fixed(_) => unreachable!("the command line never builds a fixed generator"),
    };
    let text = out.corpus.to_text();
    match &cli.out {
        Some(path) => {
            write_file(path, &text)?;
            let sidecar = json!({
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "seed": cli.seed,
                "config": to_json(cli)?,
                "inputs": loaded.inputs,
                "provenance": to_json(&out.provenance)?,
                "words": out.corpus.word_count(),
                "sentences": out.corpus.sentences.len(),
            });
            let mut name = path.as_os_str().to_owned();
            name.push(".provenance.json");
            write_file(Path::new(&name), &pretty(&sidecar)?)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

type ReferenceRow = (String, SignatureReport);

/// Reference values for Cohen's d and, when the file holds a full
/// signature record, a reference row for the interpretation matrix.
fn load_reference(path: Option<&Path>) -> CliResult<(Option<Reference>, Option<ReferenceRow>)> {
    let Some(p) = path else {
        return Ok((None, None));
    };
    let reference = Reference::load(p)?;
    let text = fs::read_to_string(p).map_err(|e| Error::Io { path: p.to_path_buf(), source: e })?;
    let full = serde_json::from_str::<Value>(&text)
        .ok()
        .and_then(|v| {
            let record = v
                .pointer("/results/signatures")
                .or_else(|| v.get("signatures"))
                .cloned()
                .unwrap_or(v);
            serde_json::from_value::<SignatureReport>(record).ok()
        })
        .map(|r| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (format!("{name} (observed)"), r)
        });
    Ok((Some(reference), full))
}

fn battery_params(cli: &Cli, b: &BatteryArgs, reference: Option<Reference>) -> CliResult<BatteryParams> {
    Ok(BatteryParams {
        runs: b.runs,
        words: b.words,
        seed: cli.seed,
        bootstrap: b.bootstrap,
        thresholds: thresholds(b.thresholds.as_deref())?,
        reference,
    })
}

fn evaluate_cmd(cli: &Cli, a: &EvaluateArgs) -> CliResult<Report> {
    let (reference, observed) = load_reference(a.battery.reference.as_deref())?;
    let observed_row = observed.as_ref().map(|(n, r)| (n.as_str(), r));
    if let Some(path) = &a.corpus {
        let opts = load_options(a.scheme, a.inventory.as_deref())?;
        let loaded = corpus::load_corpus(path, &opts)?;
        let th = thresholds(a.battery.thresholds.as_deref())?;
        let report = evaluate::evaluate_corpus(&loaded.corpus, &th)?;
        let mut matrix = evaluate::matrix_csv(&[], Some((&loaded.corpus.name, &report)));
        if let Some((name, r)) = observed_row {
            let extra = evaluate::matrix_csv(&[], Some((name, r)));
            matrix.push_str(extra.lines().nth(1).unwrap_or_default());
            matrix.push('\n');
        }
        return Ok(Report {
            json: json!({
                "corpus": corpus_summary(&loaded.corpus, loaded.dropped_words),
                "thresholds": to_json(&th)?,
                "signatures": to_json(&report)?,
                "reference": to_json(&reference)?,
            }),
            files: vec![("matrix.csv".into(), matrix)],
        });
    }
    let kind = a.kind.ok_or_else(|| Failure::Usage("evaluate needs --corpus or --kind".into()))?;
    let loaded = load_generator(kind, a.config.as_deref(), a.plaintext.as_deref())?;
    let p = battery_params(cli, &a.battery, reference)?;
    let label = match &a.config {
        Some(c) => c.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        None => format!("{} (defaults)", loaded.spec.kind()),
    };
    let result = evaluate::run_battery(&label, &loaded.spec, &p)?;
    let results = std::slice::from_ref(&result);
    Ok(Report {
        json: json!({
            "inputs": loaded.inputs,
            "params": to_json(&p)?,
            "battery": to_json(&result)?,
        }),
        files: vec![
            ("matrix.csv".into(), evaluate::matrix_csv(results, observed_row)),
            ("sweep.csv".into(), evaluate::sweep_csv(results)),
        ],
    })
}

fn load_source(path: Option<&Path>, scheme: SchemeArg) -> CliResult<Option<Arc<Corpus>>> {
    match path {
        Some(p) => Ok(Some(Arc::new(corpus::load_corpus(p, &LoadOptions::new(scheme.into()))?.corpus))),
        None => Ok(None),
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs) -> CliResult<Report> {
    let (reference, observed) = load_reference(a.battery.reference.as_deref())?;
    let p = battery_params(cli, &a.battery, reference)?;
    let slot_base = || -> CliResult<SlotConfig> { Ok(SlotConfig::from_kv(read_kv(a.config.as_deref())?)?) };
    let grille_base = || -> CliResult<GrilleConfig> { Ok(GrilleConfig::from_kv(read_kv(a.config.as_deref())?)?) };
    let groups: Vec<(String, Vec<SweepPoint>)> = match a.grid {
        Grid::SlotAblations => vec![("ablations".into(), evaluate::slot_ablation_grid(&slot_base()?))],
        Grid::SlotSweeps => evaluate::slot_sweep_grids(&slot_base()?)
            .into_iter()
            .map(|(n, g)| (n.to_string(), g))
            .collect(),
        Grid::GrilleSkew => vec![("column skew".into(), evaluate::grille_skew_grid(&grille_base()?, &a.alphas))],
        Grid::GrilleSweeps => evaluate::grille_sweep_grids(&grille_base()?)
            .into_iter()
            .map(|(n, g)| (n.to_string(), g))
            .collect(),
        Grid::GrilleConfigs => {
            let lang = load_source(a.language_source.as_deref(), a.source_scheme)?;
            let random = load_source(a.random_source.as_deref(), a.source_scheme)?;
            vec![("configurations".into(), evaluate::grille_config_grid(&grille_base()?, lang, random))]
        }
    };
    let mut all: Vec<BatteryResult> = Vec::new();
    let mut group_json = Vec::new();
    let mut files = Vec::new();
    for (name, grid) in &groups {
        let results = evaluate::sweep(grid, &p)?;
        files.push((format!("sweep_{}.csv", slug(name)), evaluate::sweep_csv(&results)));
        group_json.push(json!({ "name": name, "results": to_json(&results)? }));
        all.extend(results);
    }
    let observed_row = observed.as_ref().map(|(n, r)| (n.as_str(), r));
    files.push(("matrix.csv".into(), evaluate::matrix_csv(&all, observed_row)));
    Ok(Report {
        json: json!({ "params": to_json(&p)?, "groups": group_json }),
        files,
    })
}
