//! The `noisekit` command line: inject character noise into corpora,
//! evaluate translation quality, fit robustness slopes, generate noisy
//! training data, and drive external systems over the line protocol.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error. Diagnostics go to
//! stderr prefixed `error:` / `warn:`. All outputs are written atomically
//! and every subcommand is idempotent for identical inputs and flags.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use noisekit::analysis::{
    build_trajectory, emit_report, fit_decline_slope, fit_slope, win_loss, ReportEntry,
};
use noisekit::corpus::{
    load_plain_corpus, write_noised_jsonl, write_plain_corpus, ParallelCorpus, ScoreFile, Segment,
};
use noisekit::datagen::{
    make_correction_training_set, make_mt_training_set, make_validation_set, write_training_set,
    MixSpec,
};
use noisekit::error::Error as CoreError;
use noisekit::experiment::{run_experiment, ExperimentManifest};
use noisekit::fsutil;
use noisekit::metrics::{
    bleu_corpus, chrf_corpus, chrf_sentence, delta_qe, faux_metric, fertility, token_f1,
    tokenize_segments, BleuParams, BleuTokenizer, BpeMerges, CharPieces, ChrfParams, FauxBase,
    PieceTokenizer, Smoothing, WhitespacePieces,
};
use noisekit::noise::{make_noise_ladder, NoiseEngine, NoiseSpec, NoiseType};
use noisekit::worker;

use config::FileConfig;

#[derive(Parser)]
#[command(name = "noisekit", version, about = "Character-noise robustness toolkit for MT corpora")]
struct Cli {
    /// TOML file with defaults for --seed / --layout / --jobs (flags win).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for data-parallel stages; output is identical for
    /// any value.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Noise a corpus once at a fixed level
    Noise(NoiseArgs),
    /// Emit the ten-level noise ladder (p = 0.1 … 1.0) plus a manifest
    Ladder(LadderArgs),
    /// Corpus-level evaluation metrics
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Fit a robustness slope to a trajectory CSV
    Slope(SlopeArgs),
    /// Average subword pieces per whitespace word
    Fertility(FertilityArgs),
    /// Generate noisy finetuning pairs (translation or correction)
    GenTrain(GenTrainArgs),
    /// Generate a clean+noised validation set
    GenValid(GenValidArgs),
    /// Run a manifest-driven experiment (ladders → systems → scores → report)
    Pipeline(PipelineArgs),
    /// Rebuild the slope report from persisted run directories
    Report(ReportArgs),
    /// Serve the line protocol as a reference translator/corrector/scorer
    Worker(WorkerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseTypeArg {
    Swap,
    Dupe,
    Drop,
    Key,
}

impl From<NoiseTypeArg> for NoiseType {
    fn from(value: NoiseTypeArg) -> NoiseType {
        match value {
            NoiseTypeArg::Swap => NoiseType::Swap,
            NoiseTypeArg::Dupe => NoiseType::Dupe,
            NoiseTypeArg::Drop => NoiseType::Drop,
            NoiseTypeArg::Key => NoiseType::Key,
        }
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// Input corpus (one segment per line)
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Output noised corpus (JSONL with provenance)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long = "type", value_enum)]
    noise_type: NoiseTypeArg,
    /// Per-token perturbation probability in [0, 1]
    #[arg(long)]
    p: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Keyboard layout id (qwerty|qwertz|azerty|dubeolsik) or a layout file
    #[arg(long)]
    layout: Option<String>,
    /// Also write the noised text as plain lines
    #[arg(long, value_name = "FILE")]
    plain_out: Option<PathBuf>,
    /// Corpus identifier recorded in provenance
    #[arg(long, default_value = "corpus")]
    base_id: String,
}

#[derive(Args)]
struct LadderArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Directory for the ten JSONL files and ladder manifest
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[arg(long = "type", value_enum)]
    noise_type: NoiseTypeArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    layout: Option<String>,
    #[arg(long, default_value = "corpus")]
    base_id: String,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Character n-gram F-score
    Chrf(ChrfArgs),
    /// Corpus BLEU
    Bleu(BleuArgs),
    /// Mean per-segment bag-of-tokens F1
    TokenF1(PairArgs),
    /// Mean clean-minus-noisy QE difference over two score files
    DeltaQe(DeltaQeArgs),
    /// Faux metric: clean-source hypotheses as pseudoreferences
    Faux(FauxArgs),
    /// Sentence-level improvement/harm fractions between two score files
    WinLoss(WinLossArgs),
}

#[derive(Args)]
struct PairArgs {
    #[arg(long, value_name = "FILE")]
    hyp: PathBuf,
    #[arg(long = "ref", value_name = "FILE")]
    reference: PathBuf,
    /// Also write per-segment scores as TSV
    #[arg(long, value_name = "FILE")]
    per_segment: Option<PathBuf>,
}

#[derive(Args)]
struct ChrfArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 6)]
    char_order: usize,
    #[arg(long, default_value_t = 0)]
    word_order: usize,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Keep whitespace inside character n-grams
    #[arg(long)]
    whitespace: bool,
    /// Average over all orders instead of the orders present
    #[arg(long)]
    no_effective_order: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothingArg {
    Exp,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum BleuTokenizerArg {
    Whitespace,
    Char,
    Pretokenized,
}

#[derive(Args)]
struct BleuArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 4)]
    max_order: usize,
    #[arg(long, value_enum, default_value_t = SmoothingArg::Exp)]
    smoothing: SmoothingArg,
    #[arg(long, value_enum, default_value_t = BleuTokenizerArg::Whitespace)]
    tokenizer: BleuTokenizerArg,
}

#[derive(Args)]
struct DeltaQeArgs {
    /// Score file of the clean-source run (TSV)
    #[arg(long, value_name = "FILE")]
    clean: PathBuf,
    /// Score file of the noisy-source run (TSV)
    #[arg(long, value_name = "FILE")]
    noisy: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FauxBaseArg {
    Bleu,
    Chrf,
}

#[derive(Args)]
struct FauxArgs {
    /// Hypotheses translated from the noisy source
    #[arg(long, value_name = "FILE")]
    hyp_noisy: PathBuf,
    /// Hypotheses translated from the clean source (pseudoreference)
    #[arg(long, value_name = "FILE")]
    hyp_clean: PathBuf,
    #[arg(long, value_enum)]
    base: FauxBaseArg,
}

#[derive(Args)]
struct WinLossArgs {
    /// Per-segment scores of the baseline system (TSV)
    #[arg(long, value_name = "FILE")]
    baseline: PathBuf,
    /// Per-segment scores of the challenger system (TSV)
    #[arg(long, value_name = "FILE")]
    challenger: PathBuf,
    /// Score band within which segments count as tied
    #[arg(long, default_value_t = 0.0)]
    tie_epsilon: f64,
    /// Noise level label carried into the output
    #[arg(long, default_value_t = 0.0)]
    p: f64,
}

#[derive(Args)]
struct SlopeArgs {
    /// Trajectory CSV with a `p,score` header; the p=0 row is the clean score
    #[arg(long, value_name = "FILE")]
    traj: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TokenizerArg {
    Whitespace,
    Char,
    Bpe,
}

#[derive(Args)]
struct FertilityArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = TokenizerArg::Whitespace)]
    tokenizer: TokenizerArg,
    /// BPE merges file (required for --tokenizer bpe)
    #[arg(long, value_name = "FILE")]
    merges: Option<PathBuf>,
    /// Also write each segment's pieces, space-joined, one line per segment
    #[arg(long, value_name = "FILE")]
    pieces_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Translation,
    Correction,
}

#[derive(Args)]
struct GenTrainArgs {
    /// Clean source corpus
    #[arg(long, value_name = "FILE")]
    source: PathBuf,
    /// Clean target corpus (required for --task translation)
    #[arg(long, value_name = "FILE")]
    target: Option<PathBuf>,
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Number of pairs to subsample (uniform, seeded, prefix-nested)
    #[arg(long)]
    size: usize,
    /// Per-type rates, e.g. swap=0.15,dupe=0.15,drop=0.15,key=0.15
    #[arg(long, value_name = "LIST")]
    rates: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    layout: Option<String>,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Output file stem
    #[arg(long)]
    name: String,
    /// Language pair recorded for translation sets, e.g. en-pt
    #[arg(long, default_value = "en-xx")]
    lang_pair: String,
}

#[derive(Args)]
struct GenValidArgs {
    #[arg(long, value_name = "FILE")]
    source: PathBuf,
    #[arg(long, value_name = "FILE")]
    target: Option<PathBuf>,
    /// Per-type corruption rate for the noised copy
    #[arg(long, default_value_t = 0.2)]
    rate: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    layout: Option<String>,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[arg(long)]
    name: String,
}

#[derive(Args)]
struct PipelineArgs {
    /// Experiment manifest (TOML)
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Root directory for run artifacts
    #[arg(long, value_name = "DIR", default_value = "runs")]
    runs_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// One experiment directory under the runs root
    #[arg(long, value_name = "DIR")]
    runs: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct WorkerArgs {
    /// Worker mode and flags (see `noisekit worker --help`)
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    args: Vec<String>,
}

/// Usage problems exit 2; data problems exit 1.
enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Data(anyhow!(e))
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn main() {
    let cli = Cli::parse(); // clap exits 2 on usage errors, 0 on help/version
    let code = match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            2
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file_config = match &cli.config {
        Some(path) => FileConfig::load(path).map_err(|e| usage(format!("{e:#}")))?,
        None => FileConfig::default(),
    };
    if let Some(jobs) = cli.jobs.or(file_config.jobs) {
        if jobs == 0 {
            return Err(usage("--jobs must be ≥ 1"));
        }
        // Ignore the error if a pool already exists (e.g. repeated in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let seed_default = file_config.seed.unwrap_or(0);
    let layout_default = file_config.layout.clone();

    match cli.command {
        Command::Noise(args) => cmd_noise(args, seed_default, layout_default),
        Command::Ladder(args) => cmd_ladder(args, seed_default, layout_default),
        Command::Eval(args) => cmd_eval(args),
        Command::Slope(args) => cmd_slope(args),
        Command::Fertility(args) => cmd_fertility(args),
        Command::GenTrain(args) => cmd_gen_train(args, seed_default, layout_default),
        Command::GenValid(args) => cmd_gen_valid(args, seed_default, layout_default),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Report(args) => cmd_report(args),
        Command::Worker(args) => cmd_worker(args),
    }
}

fn load_corpus(path: &Path) -> Result<Vec<Segment>, CliError> {
    load_plain_corpus(path).map_err(|e| CliError::Data(anyhow!(e)))
}

fn cmd_noise(args: NoiseArgs, seed_default: u64, layout_default: Option<String>) -> Result<(), CliError> {
    let layout = args.layout.or(layout_default);
    let spec = NoiseSpec::new(
        args.noise_type.into(),
        args.p,
        args.seed.unwrap_or(seed_default),
        layout,
    )
    .map_err(|e| usage(e.to_string()))?;
    let engine = NoiseEngine::new(spec)?;
    let segments = load_corpus(&args.input)?;
    let noised = engine.noise_corpus(&args.base_id, &segments);
    write_noised_jsonl(&noised, &args.out)?;
    if let Some(plain) = &args.plain_out {
        write_plain_corpus(plain, &noised.to_segments())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LadderManifest {
    base_id: String,
    noise_type: String,
    seed: u64,
    layout: Option<String>,
    layout_checksum: Option<String>,
    input: String,
    input_sha256: String,
    files: Vec<LadderFile>,
}

#[derive(Serialize)]
struct LadderFile {
    p: f64,
    path: String,
    sha256: String,
}

fn cmd_ladder(args: LadderArgs, seed_default: u64, layout_default: Option<String>) -> Result<(), CliError> {
    let noise_type: NoiseType = args.noise_type.into();
    let layout = args.layout.or(layout_default);
    if noise_type == NoiseType::Key && layout.is_none() {
        return Err(usage("key noise requires --layout"));
    }
    if noise_type != NoiseType::Key && layout.is_some() {
        return Err(usage("--layout applies to key noise only"));
    }
    let seed = args.seed.unwrap_or(seed_default);
    let segments = load_corpus(&args.input)?;
    let ladder = make_noise_ladder(&args.base_id, &segments, noise_type, layout.clone(), seed)?;

    let mut files = Vec::new();
    let mut layout_checksum = None;
    for (i, rung) in ladder.iter().enumerate() {
        let p = (i + 1) as f64 / 10.0;
        let name = format!("{}-p{:.1}.jsonl", noise_type, p);
        let path = args.out_dir.join(&name);
        write_noised_jsonl(rung, &path)?;
        layout_checksum = layout_checksum.or_else(|| rung.layout_checksum.clone());
        files.push(LadderFile { p, path: name, sha256: fsutil::sha256_file(&path)? });
    }
    let manifest = LadderManifest {
        base_id: args.base_id,
        noise_type: noise_type.id().to_string(),
        seed,
        layout,
        layout_checksum,
        input: args.input.display().to_string(),
        input_sha256: fsutil::sha256_file(&args.input)?,
        files,
    };
    fsutil::write_atomic(
        &args.out_dir.join("ladder.json"),
        (serde_json::to_string_pretty(&manifest).unwrap() + "\n").as_bytes(),
    )?;
    Ok(())
}

fn load_pair(pair: &PairArgs) -> Result<(Vec<Segment>, Vec<Segment>), CliError> {
    let hyp = load_corpus(&pair.hyp)?;
    let reference = load_corpus(&pair.reference)?;
    Ok((hyp, reference))
}

fn texts(segments: &[Segment]) -> Vec<&str> {
    segments.iter().map(|s| s.text.as_str()).collect()
}

fn cmd_eval(command: EvalCommand) -> Result<(), CliError> {
    let score = match command {
        EvalCommand::Chrf(args) => {
            let params = ChrfParams {
                char_order: args.char_order,
                word_order: args.word_order,
                beta: args.beta,
                whitespace: args.whitespace,
                effective_order: !args.no_effective_order,
            };
            params.validate().map_err(|e| usage(e.to_string()))?;
            let (hyp, reference) = load_pair(&args.pair)?;
            if let Some(out) = &args.pair.per_segment {
                let rows: Vec<(usize, f64)> = hyp
                    .iter()
                    .zip(&reference)
                    .map(|(h, r)| (h.index, chrf_sentence(&h.text, &r.text, &params)))
                    .collect();
                ScoreFile::new("eval", "chrf", rows)?.write(out)?;
            }
            chrf_corpus(&texts(&hyp), &texts(&reference), &params)?
        }
        EvalCommand::Bleu(args) => {
            let params = BleuParams {
                max_order: args.max_order,
                smoothing: match args.smoothing {
                    SmoothingArg::Exp => Smoothing::Exp,
                    SmoothingArg::None => Smoothing::None,
                },
                tokenizer: match args.tokenizer {
                    BleuTokenizerArg::Whitespace => BleuTokenizer::Whitespace,
                    BleuTokenizerArg::Char => BleuTokenizer::Char,
                    BleuTokenizerArg::Pretokenized => BleuTokenizer::Pretokenized,
                },
            };
            params.validate().map_err(|e| usage(e.to_string()))?;
            let (hyp, reference) = load_pair(&args.pair)?;
            bleu_corpus(&texts(&hyp), &texts(&reference), &params)?
        }
        EvalCommand::TokenF1(pair) => {
            let (hyp, reference) = load_pair(&pair)?;
            if hyp.len() != reference.len() {
                return Err(CliError::Data(anyhow!(
                    "{} hypothesis lines vs {} reference lines",
                    hyp.len(),
                    reference.len()
                )));
            }
            if hyp.is_empty() {
                return Err(CliError::Data(anyhow!("token-f1 over zero segments")));
            }
            let rows: Vec<(usize, f64)> = hyp
                .iter()
                .zip(&reference)
                .map(|(h, r)| {
                    let ht: Vec<&str> = h.text.split_whitespace().collect();
                    let rt: Vec<&str> = r.text.split_whitespace().collect();
                    (h.index, token_f1(&ht, &rt))
                })
                .collect();
            if let Some(out) = &pair.per_segment {
                ScoreFile::new("eval", "token-f1", rows.clone())?.write(out)?;
            }
            rows.iter().map(|(_, v)| v).sum::<f64>() / rows.len() as f64
        }
        EvalCommand::DeltaQe(args) => {
            let clean = ScoreFile::read(&args.clean)?;
            let noisy = ScoreFile::read(&args.noisy)?;
            delta_qe(&clean, &noisy)?
        }
        EvalCommand::Faux(args) => {
            let noisy = load_corpus(&args.hyp_noisy)?;
            let clean = load_corpus(&args.hyp_clean)?;
            let bleu_params = BleuParams::default();
            let chrf_params = ChrfParams::default();
            let base = match args.base {
                FauxBaseArg::Bleu => FauxBase::Bleu(&bleu_params),
                FauxBaseArg::Chrf => FauxBase::Chrf(&chrf_params),
            };
            faux_metric(&texts(&noisy), &texts(&clean), base)?
        }
        EvalCommand::WinLoss(args) => {
            if args.tie_epsilon < 0.0 {
                return Err(usage("--tie-epsilon must be ≥ 0"));
            }
            let baseline = ScoreFile::read(&args.baseline)?;
            let challenger = ScoreFile::read(&args.challenger)?;
            let b = win_loss(args.p, &baseline, &challenger, args.tie_epsilon)?;
            println!(
                "improved={:.4} harmed={:.4} tied={:.4} n={}",
                b.improved, b.harmed, b.tied, b.n_segments
            );
            return Ok(());
        }
    };
    println!("{score:.4}");
    Ok(())
}

fn cmd_slope(args: SlopeArgs) -> Result<(), CliError> {
    let src = fsutil::read_utf8(&args.traj)?;
    let mut clean: Option<f64> = None;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (lineno, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == "p,score" || line.starts_with('#') {
            continue;
        }
        let (p, score) = line
            .split_once(',')
            .ok_or_else(|| CliError::Data(anyhow!("{}:{}: expected `p,score`", args.traj.display(), lineno + 1)))?;
        let parse = |v: &str| -> Result<f64, CliError> {
            v.trim()
                .parse()
                .map_err(|_| CliError::Data(anyhow!("{}:{}: bad number `{v}`", args.traj.display(), lineno + 1)))
        };
        let (p, score) = (parse(p)?, parse(score)?);
        if p == 0.0 {
            if clean.replace(score).is_some() {
                return Err(CliError::Data(anyhow!("two p=0 rows in trajectory")));
            }
        } else {
            points.push((p, score));
        }
    }
    let clean = clean.ok_or_else(|| {
        CliError::Data(anyhow!("trajectory needs a p=0 row carrying the clean score"))
    })?;
    let declines: Vec<(f64, f64)> = points.iter().map(|&(p, s)| (p, s - clean)).collect();
    let fit = fit_decline_slope(&declines)?;
    println!("{:.4}", fit.slope);
    Ok(())
}

fn cmd_fertility(args: FertilityArgs) -> Result<(), CliError> {
    let segments = load_corpus(&args.input)?;
    let tokenizer: Box<dyn PieceTokenizer> = match args.tokenizer {
        TokenizerArg::Whitespace => Box::new(WhitespacePieces),
        TokenizerArg::Char => Box::new(CharPieces),
        TokenizerArg::Bpe => {
            let merges = args
                .merges
                .as_ref()
                .ok_or_else(|| usage("--tokenizer bpe requires --merges"))?;
            Box::new(BpeMerges::load(merges)?)
        }
    };
    if let Some(out) = &args.pieces_out {
        let pieces = tokenize_segments(&segments, tokenizer.as_ref());
        let lines: Vec<Segment> = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| Segment { index: i, text: p.join(" ") })
            .collect();
        write_plain_corpus(out, &lines)?;
    }
    let value = fertility(&segments, tokenizer.as_ref())?;
    println!("{value:.4}");
    Ok(())
}

fn parse_rates(spec: &str) -> Result<BTreeMap<NoiseType, f64>, CliError> {
    let mut rates = BTreeMap::new();
    for part in spec.split(',') {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("bad rate entry `{part}`; expected type=rate")))?;
        let noise_type: NoiseType = name.trim().parse().map_err(|e: CoreError| usage(e.to_string()))?;
        let rate: f64 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad rate `{value}` for {name}")))?;
        if rates.insert(noise_type, rate).is_some() {
            return Err(usage(format!("rate for {name} given twice")));
        }
    }
    Ok(rates)
}

fn mix_from_args(
    rates: Option<&str>,
    seed: u64,
    layout: Option<String>,
) -> Result<MixSpec, CliError> {
    let mix = match rates {
        Some(spec) => MixSpec { rates: parse_rates(spec)?, seed, layout },
        None => {
            // default recipe: 15% per type; key only with a layout
            MixSpec::uniform(0.15, seed, layout).map_err(|e| usage(e.to_string()))?
        }
    };
    mix.validate().map_err(|e| usage(e.to_string()))?;
    Ok(mix)
}

fn cmd_gen_train(args: GenTrainArgs, seed_default: u64, layout_default: Option<String>) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or(seed_default);
    let layout = args.layout.or(layout_default);
    let mix = mix_from_args(args.rates.as_deref(), seed, layout)?;

    let (pairs, sources) = match args.task {
        TaskArg::Translation => {
            let target = args
                .target
                .as_ref()
                .ok_or_else(|| usage("--task translation requires --target"))?;
            let (src_lang, tgt_lang) = args
                .lang_pair
                .split_once('-')
                .ok_or_else(|| usage("--lang-pair must look like en-pt"))?;
            let corpus = ParallelCorpus::load(
                &args.source,
                Some(target),
                (src_lang.to_string(), tgt_lang.to_string()),
            )?;
            let pairs = make_mt_training_set(&corpus, &mix, args.size)?;
            (pairs, vec![args.source.clone(), target.clone()])
        }
        TaskArg::Correction => {
            if args.target.is_some() {
                return Err(usage("--target applies to --task translation only"));
            }
            let source = load_corpus(&args.source)?;
            let pairs = make_correction_training_set(&source, &mix, args.size)?;
            (pairs, vec![args.source.clone()])
        }
    };
    let files = write_training_set(&args.out_dir, &args.name, &pairs, &mix, &sources)?;
    println!("{}", files.manifest.display());
    Ok(())
}

fn cmd_gen_valid(args: GenValidArgs, seed_default: u64, layout_default: Option<String>) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or(seed_default);
    let layout = args.layout.or(layout_default);
    let corpus = ParallelCorpus::load(
        &args.source,
        args.target.as_deref(),
        ("xx".to_string(), "xx".to_string()),
    )?;
    let validation = make_validation_set(&corpus, args.rate, seed, layout)
        .map_err(|e| match e {
            CoreError::InvalidParam(_) => usage(e.to_string()),
            other => CliError::Data(anyhow!(other)),
        })?;

    let source_out = args.out_dir.join(format!("{}.source.txt", args.name));
    write_plain_corpus(&source_out, &validation.corpus.source)?;
    if let Some(target) = &validation.corpus.target {
        write_plain_corpus(&args.out_dir.join(format!("{}.target.txt", args.name)), target)?;
    }
    write_noised_jsonl(
        &validation.provenance,
        &args.out_dir.join(format!("{}.provenance.jsonl", args.name)),
    )?;
    println!("{}", source_out.display());
    Ok(())
}

fn cmd_pipeline(args: PipelineArgs) -> Result<(), CliError> {
    let manifest = ExperimentManifest::load(&args.manifest).map_err(|e| match e {
        CoreError::InvalidParam(_) => usage(e.to_string()),
        other => CliError::Data(anyhow!(other)),
    })?;
    let report = run_experiment(&manifest, &args.runs_dir)?;
    for entry in &report.entries {
        println!(
            "{}\t{}\t{}\tclean={:.4}\tslope={:.4}",
            entry.trajectory.system,
            entry.trajectory.metric,
            entry.trajectory.noise_type,
            entry.trajectory.clean_score,
            entry.fit.slope
        );
    }
    eprintln!("# external calls: {}", report.external_calls);
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let entries = collect_entries(&args.runs)?;
    let files = emit_report(&args.out, &entries, &[])?;
    for file in files {
        println!("{}", file.display());
    }
    Ok(())
}

/// Clean-run scores plus the `(label, p, scores)` rungs for one metric.
type MetricRuns = (Option<ScoreFile>, Vec<(String, f64, ScoreFile)>);

/// Rebuilds report entries from persisted run directories:
/// `<runs>/<system>/<corpus-id>/scores/<metric>.tsv` with corpus ids
/// `clean` and `<noise>-p<level>`.
fn collect_entries(runs: &Path) -> Result<Vec<ReportEntry>, CliError> {
    let mut entries = Vec::new();
    if !runs.exists() {
        return Ok(entries);
    }
    let mut systems: Vec<PathBuf> = std::fs::read_dir(runs)
        .with_context(|| format!("reading {}", runs.display()))
        .map_err(CliError::Data)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n != "corpora" && n != "report"))
        .collect();
    systems.sort();

    for system_dir in systems {
        let system = system_dir.file_name().unwrap().to_string_lossy().to_string();
        // metric id → (clean scores, ladder of (label, p, scores))
        let mut per_metric: BTreeMap<String, MetricRuns> = BTreeMap::new();
        let mut corpora: Vec<PathBuf> = std::fs::read_dir(&system_dir)
            .map_err(|e| CliError::Data(anyhow!(e)))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_dir())
            .collect();
        corpora.sort();
        for corpus_dir in corpora {
            let corpus_id = corpus_dir.file_name().unwrap().to_string_lossy().to_string();
            let scores_dir = corpus_dir.join("scores");
            if !scores_dir.is_dir() {
                continue;
            }
            let mut score_files: Vec<PathBuf> = std::fs::read_dir(&scores_dir)
                .map_err(|e| CliError::Data(anyhow!(e)))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
                .collect();
            score_files.sort();
            for tsv in score_files {
                let metric = tsv.file_stem().unwrap().to_string_lossy().to_string();
                let scores = ScoreFile::read(&tsv)?;
                let slot = per_metric.entry(metric).or_default();
                if corpus_id == "clean" {
                    slot.0 = Some(scores);
                } else if let Some((label, p)) = parse_rung_id(&corpus_id) {
                    slot.1.push((label, p, scores));
                } else {
                    eprintln!("warn: skipping unrecognized corpus id `{corpus_id}`");
                }
            }
        }
        for (metric, (clean, rungs)) in per_metric {
            let Some(clean) = clean else {
                eprintln!("warn: {system}/{metric} has no clean run; skipped");
                continue;
            };
            let mut by_label: BTreeMap<String, Vec<(f64, ScoreFile)>> = BTreeMap::new();
            for (label, p, scores) in rungs {
                by_label.entry(label).or_default().push((p, scores));
            }
            for (label, runs) in by_label {
                let trajectory = build_trajectory(&system, &metric, &label, &clean, &runs)?;
                let fit = fit_slope(&trajectory)?;
                entries.push(ReportEntry { trajectory, fit });
            }
        }
    }
    Ok(entries)
}

fn parse_rung_id(corpus_id: &str) -> Option<(String, f64)> {
    let (label, p) = corpus_id.rsplit_once("-p")?;
    let p: f64 = p.parse().ok()?;
    (p > 0.0 && p <= 1.0).then(|| (label.to_string(), p))
}

fn cmd_worker(args: WorkerArgs) -> Result<(), CliError> {
    let config = worker::parse_worker_args(&args.args).map_err(|e| usage(e.to_string()))?;
    let code = worker::run_worker(&config)?;
    if code != 0 {
        std::process::exit(code);
    }
    Ok(())
}
