mod config;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use obpe::analysis::{compare_vocabs, corpus_overlap, vocab_composition, Weighting};
use obpe::synthlab::{find_overlapping_tokens, shift_text, synth_run, ShiftSpec, SynthConfig};
use obpe::{
    encoded_size, load_corpus, smoothing_multipliers, train, LanguageId, MixWeight, PowerParam, SizeBasis,
    Tokenizer, TrainerConfig, Vocabulary, MARKER_ESCAPE,
};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
    name = "obpe",
    version,
    about = "Overlap-aware BPE vocabulary tools",
    args_override_self = true
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// File of `key = value` option defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus statistics and smoothing weights.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Train a vocabulary.
    Train(TrainArgs),
    /// Segment text, or report encoded sizes of a corpus.
    Encode(EncodeArgs),
    /// Vocabulary composition and overlap.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Synthetic overlap-controlled corpora.
    #[command(subcommand)]
    Synth(SynthCmd),
}

#[derive(Subcommand)]
enum CorpusCmd {
    Stats(ManifestArgs),
    Weights(WeightsArgs),
}

#[derive(Subcommand)]
enum StatsCmd {
    Composition(CompositionArgs),
    Overlap(OverlapArgs),
    Compare(CompareArgs),
}

#[derive(Subcommand)]
enum SynthCmd {
    Run(SynthRunArgs),
    Shift(ShiftArgs),
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ManifestArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_parser = parse_exponent)]
    exponent: f64,
    #[arg(long, default_value = "words")]
    basis: SizeBasis,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Clone)]
struct TrainOpts {
    #[arg(long)]
    budget: usize,
    #[arg(long, value_parser = parse_alpha, default_value = "0.5")]
    alpha: MixWeight,
    #[arg(long, value_parser = parse_p, default_value = "-inf", allow_hyphen_values = true)]
    p: PowerParam,
    /// Size-smoothing exponent in (0, 1].
    #[arg(long, value_parser = parse_exponent)]
    smoothing: Option<f64>,
    #[arg(long, default_value = "words")]
    basis: SizeBasis,
    /// Comma-separated tokens forced into the vocabulary first.
    #[arg(long, value_delimiter = ',')]
    seed_tokens: Vec<String>,
    #[arg(long, default_value = MARKER_ESCAPE)]
    marker: String,
}

impl TrainOpts {
    fn config(&self) -> TrainerConfig {
        TrainerConfig {
            budget: self.budget,
            alpha: self.alpha,
            p: self.p,
            smoothing: self.smoothing,
            size_basis: self.basis,
            marker: self.marker.clone(),
            seed_tokens: self.seed_tokens.clone(),
            ..TrainerConfig::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    opts: TrainOpts,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    vocab: PathBuf,
    /// Text to segment, one sentence per line (stdin if absent).
    #[arg(long, conflicts_with = "sizes")]
    input: Option<PathBuf>,
    /// Report per-language encoded sizes of the manifest's corpus.
    #[arg(long, requires = "manifest")]
    sizes: bool,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Reject characters outside the vocabulary instead of emitting unknowns.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CompositionArgs {
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "all")]
    weighting: Weighting,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OverlapArgs {
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    li: LanguageId,
    #[arg(long)]
    lh: LanguageId,
    #[arg(long, value_parser = parse_p, default_value = "-inf", allow_hyphen_values = true)]
    p: PowerParam,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "all")]
    weighting: Weighting,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SynthRunArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    li: LanguageId,
    #[arg(long)]
    lh: LanguageId,
    /// Comma-separated retention fractions in [0, 1].
    #[arg(long, value_delimiter = ',', value_parser = parse_fraction, required = true)]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample each fraction with its own seed instead of nesting.
    #[arg(long)]
    independent: bool,
    #[command(flatten)]
    opts: TrainOpts,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ShiftArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Where to write the spec if new characters extended its mapping.
    #[arg(long)]
    spec_out: Option<PathBuf>,
}

fn parse_alpha(s: &str) -> Result<MixWeight, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    MixWeight::new(v).map_err(|e| e.to_string())
}

fn parse_p(s: &str) -> Result<PowerParam, String> {
    s.parse().map_err(|e: obpe::Error| e.to_string())
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1], got {v}"))
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must lie in [0, 1], got {v}"))
    }
}

/// Provenance lines written at the top of every output.
struct Header(Vec<(String, String)>);

impl Header {
    fn new(command: &str) -> Self {
        Header(vec![("command".into(), command.into())])
    }

    fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.push((key.into(), value.to_string()));
        self
    }

    fn train(self, opts: &TrainOpts) -> Self {
        self.with("budget", opts.budget)
            .with("alpha", opts.alpha)
            .with("p", opts.p)
            .with(
                "smoothing",
                opts.smoothing.map_or("none".into(), |s| s.to_string()),
            )
            .with("basis", opts.basis)
    }

    fn with_fraction(&self, fraction: f64) -> Header {
        Header(self.0.clone()).with("fraction", fraction)
    }

    fn text(&self) -> String {
        let mut out = String::from("#obpe v1\n");
        for (k, v) in &self.0 {
            let _ = writeln!(out, "#{k} {v}");
        }
        out
    }

    fn json(&self) -> Value {
        let mut map = Map::new();
        map.insert("format".into(), json!("obpe v1"));
        for (k, v) in &self.0 {
            map.insert(k.clone(), json!(v));
        }
        Value::Object(map)
    }
}

fn emit(output: &Output, header: &Header, body: &str) -> Result<()> {
    let text = header.text() + body;
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn show(p: &Path) -> String {
    p.display().to_string()
}

fn corpus_stats(args: &ManifestArgs) -> Result<()> {
    let corpus = load_corpus(&args.manifest)?;
    let mut body = String::from("lang,class,words,distinct,lines\n");
    for (i, lang) in corpus.languages().iter().enumerate() {
        let table = corpus.table(i);
        let words: f64 = table.values().sum();
        let _ = writeln!(
            body,
            "{},{},{},{},{}",
            lang.id,
            lang.class,
            words,
            table.len(),
            corpus.line_counts()[i]
        );
    }
    emit(
        &args.output,
        &Header::new("corpus stats").with("manifest", show(&args.manifest)),
        &body,
    )
}

fn corpus_weights(args: &WeightsArgs) -> Result<()> {
    let corpus = load_corpus(&args.manifest)?;
    let sizes = corpus.sizes(args.basis);
    let weights = smoothing_multipliers(&sizes, args.exponent)?;
    let total: f64 = sizes.iter().map(|(_, s)| s).sum();
    let mut body = String::from("lang,size,share,smoothed_share,multiplier\n");
    for (id, size) in &sizes {
        let m = weights.get(id).expect("weight per language");
        let share = size / total;
        let _ = writeln!(body, "{id},{size},{share},{},{m}", share * m);
    }
    let header = Header::new("corpus weights")
        .with("manifest", show(&args.manifest))
        .with("exponent", args.exponent)
        .with("basis", args.basis);
    emit(&args.output, &header, &body)
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let corpus = load_corpus(&args.manifest)?;
    let vocab = train(&corpus, &args.opts.config())?;
    if vocab.early_stop {
        eprintln!(
            "warning: no pairs left; stopped at {} of {} tokens",
            vocab.len(),
            args.opts.budget
        );
    }
    vocab.save(&args.out)?;
    Ok(())
}

fn run_encode(args: &EncodeArgs) -> Result<()> {
    let vocab = Vocabulary::load(&args.vocab)?;
    let header = Header::new("encode").with("vocab", show(&args.vocab));
    if args.sizes {
        let manifest = args.manifest.as_ref().expect("clap enforces --manifest");
        let corpus = load_corpus(manifest)?;
        let sizes = encoded_size(&corpus, &vocab)?;
        let mut body = String::from("lang,tokens,words,unknown\n");
        for s in &sizes.per_language {
            let _ = writeln!(body, "{},{},{},{}", s.lang, s.tokens, s.words, s.unknown);
        }
        let _ = writeln!(body, "total,{},{},", sizes.total_tokens, sizes.total_words);
        return emit(&args.output, &header.with("manifest", show(manifest)), &body);
    }
    let text = match &args.input {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let tok = Tokenizer::new(&vocab).strict(args.strict);
    let mut body = String::new();
    for line in text.lines() {
        body.push_str(&tok.encode_line(line)?.join(" "));
        body.push('\n');
    }
    emit(&args.output, &header, &body)
}

fn stats_composition(args: &CompositionArgs) -> Result<()> {
    let vocab = Vocabulary::load(&args.vocab)?;
    let corpus = load_corpus(&args.manifest)?;
    let report = vocab_composition(&vocab, &corpus)?;
    let header = Header::new("stats composition")
        .with("vocab", show(&args.vocab))
        .with("manifest", show(&args.manifest))
        .with("weighting", args.weighting);
    emit(&args.output, &header, &report.to_csv(args.weighting))
}

fn stats_overlap(args: &OverlapArgs) -> Result<()> {
    let vocab = Vocabulary::load(&args.vocab)?;
    let corpus = load_corpus(&args.manifest)?;
    let overlap = corpus_overlap(&vocab, &corpus, &args.li, &args.lh, args.p)?;
    let shared = find_overlapping_tokens(&vocab, &corpus, &args.li, &args.lh)?;
    let header = Header::new("stats overlap")
        .with("vocab", show(&args.vocab))
        .with("manifest", show(&args.manifest));
    let body = format!(
        "li,lh,p,overlap,shared_tokens\n{},{},{},{},{}\n",
        args.li,
        args.lh,
        args.p,
        overlap,
        shared.len()
    );
    emit(&args.output, &header, &body)
}

fn stats_compare(args: &CompareArgs) -> Result<()> {
    let a = Vocabulary::load(&args.a)?;
    let b = Vocabulary::load(&args.b)?;
    let corpus = load_corpus(&args.manifest)?;
    let cmp = compare_vocabs(&a, &b, &corpus, args.weighting)?;
    let header = Header::new("stats compare")
        .with("a", show(&args.a))
        .with("b", show(&args.b))
        .with("manifest", show(&args.manifest))
        .with("weighting", args.weighting);
    emit(&args.output, &header, &cmp.to_csv())
}

fn sorted(set: &BTreeSet<String>) -> Value {
    json!(set.iter().collect::<Vec<_>>())
}

fn run_synth(args: &SynthRunArgs) -> Result<()> {
    let corpus = load_corpus(&args.manifest)?;
    let cfg = SynthConfig {
        li: args.li.clone(),
        lh: args.lh.clone(),
        fractions: args.fractions.clone(),
        seed: args.seed,
        independent: args.independent,
        trainer: args.opts.config(),
    };
    let outcome = synth_run(&corpus, &cfg)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    outcome.pair_vocab.save(&args.out_dir.join("pair.vocab"))?;

    let header = Header::new("synth run")
        .with("manifest", show(&args.manifest))
        .with("li", &args.li)
        .with("lh", &args.lh)
        .with("seed", args.seed)
        .with("independent", args.independent)
        .train(&args.opts);
    let mut summary = Vec::new();
    for run in &outcome.runs {
        let dir = args.out_dir.join(format!("f{}", run.fraction));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("spec.json"), run.spec.to_json())?;
        run.vocab.save(&dir.join("vocab.txt"))?;
        let mut table = header.with_fraction(run.fraction).text();
        table.push_str("word\tcount\n");
        for (w, c) in &run.shifted {
            let _ = writeln!(table, "{w}\t{c}");
        }
        fs::write(dir.join("shifted.tsv"), table)?;
        let report = json!({
            "header": header.with_fraction(run.fraction).json(),
            "fraction": run.fraction,
            "overlap_set": sorted(&outcome.overlap),
            "retained": sorted(&run.spec.retained),
            "post_shift_overlap": sorted(&run.post_shift_overlap),
            "retrained_overlap": sorted(&run.retrained_overlap),
        });
        write_json(&dir.join("report.json"), &report)?;
        summary.push(json!({
            "fraction": run.fraction,
            "retained": run.spec.retained.len(),
            "post_shift_overlap": run.post_shift_overlap.len(),
            "retrained_overlap": run.retrained_overlap.len(),
        }));
    }
    let report = json!({
        "header": header.json(),
        "overlap_set": sorted(&outcome.overlap),
        "runs": summary,
    });
    write_json(&args.out_dir.join("report.json"), &report)
}

fn run_shift(args: &ShiftArgs) -> Result<()> {
    let raw = fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let mut spec = ShiftSpec::from_json(&raw)?;
    let before = spec.mapping.len();
    let vocab = Vocabulary::load(&args.vocab)?;
    let file = fs::File::open(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let lines = io::BufReader::new(file).lines().collect::<io::Result<Vec<_>>>()?;
    let shifted = shift_text(&lines, &mut spec, &vocab)?;
    let mut body = String::new();
    for line in shifted {
        body.push_str(&line);
        body.push('\n');
    }
    fs::write(&args.output, body).with_context(|| format!("writing {}", args.output.display()))?;
    if spec.mapping.len() != before {
        match &args.spec_out {
            Some(path) => fs::write(path, spec.to_json())?,
            None => eprintln!(
                "warning: mapping grew by {} characters; pass --spec-out to keep it",
                spec.mapping.len() - before
            ),
        }
    }
    Ok(())
}

/// Subcommand words in argv, found by walking the command tree.
fn subcommand_path(args: &[OsString]) -> Vec<String> {
    let mut cmd = Cli::command();
    let mut path = Vec::new();
    for arg in args.iter().skip(1) {
        let Some(word) = arg.to_str() else { continue };
        let Some(sub) = cmd.find_subcommand(word).cloned() else {
            continue;
        };
        path.push(word.to_string());
        if !sub.has_subcommands() {
            break;
        }
        cmd = sub;
    }
    path
}

/// Value of `--config`, if present, read straight from argv.
fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let a = a.to_str()?;
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Parses argv with `--config` defaults inserted ahead of explicit flags.
fn parse(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    let args = match config_path(&args) {
        Some(path) => {
            let entries = config::read_config(&path)
                .map_err(|e| Cli::command().error(clap::error::ErrorKind::Io, format!("{e:#}")))?;
            let names = subcommand_path(&args);
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            config::merge_args(&args, &names, &entries)
        }
        None => args,
    };
    let matches = Cli::command().try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!(obpe::Error::InvalidParameter("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("thread pool: {e}"))?;
    }
    match cli.command {
        Command::Corpus(CorpusCmd::Stats(a)) => corpus_stats(&a),
        Command::Corpus(CorpusCmd::Weights(a)) => corpus_weights(&a),
        Command::Train(a) => run_train(&a),
        Command::Encode(a) => run_encode(&a),
        Command::Stats(StatsCmd::Composition(a)) => stats_composition(&a),
        Command::Stats(StatsCmd::Overlap(a)) => stats_overlap(&a),
        Command::Stats(StatsCmd::Compare(a)) => stats_compare(&a),
        Command::Synth(SynthCmd::Run(a)) => run_synth(&a),
        Command::Synth(SynthCmd::Shift(a)) => run_shift(&a),
    }
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn one_line(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg.replace('\n', " ")
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<obpe::Error>() {
        Some(obpe::Error::InvalidParameter(_)) => 1,
        _ => 2,
    }
}

/// Clap's message up to the usage block, on one line.
fn usage_line(err: &clap::Error) -> String {
    let msg = err.render().to_string();
    let text: Vec<&str> = msg
        .lines()
        .take_while(|l| !l.starts_with("Usage:"))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    text.join(" ")
}

/// Runs one invocation and returns the process exit status.
fn run(args: Vec<OsString>) -> u8 {
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", usage_line(&e));
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
