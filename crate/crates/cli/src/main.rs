use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use mutantgraph::accounts::{
    build_account_network, labels_csv, leaning_stats, load_leaning_seeds, propagate_labels, repeat_offenders,
    DEFAULT_MAX_ROUNDS, DEFAULT_REPEAT_THRESHOLD,
};
use mutantgraph::campaigns::{
    campaign_stats, clique_groups, component_groups, extract_campaigns, load_campaigns, save_campaigns,
    similarity_distribution, Grouping, DEFAULT_MIN_SIZE,
};
use mutantgraph::corpus::{
    ingest_posts, load_corpus, parse_timestamp, save_corpus, save_posts_jsonl, IngestConfig, PostCollection,
};
use mutantgraph::embedstore::{align, load_embeddings, AlignMode, AlignedCorpus};
use mutantgraph::evalkit::{
    bands, brute_force_oracle, generate_synthetic, sample_calibration_pairs, sample_campaign_audit, score_detection,
    summarize_audit_labels, summarize_calibration_labels, verify_generated, PlantedTruth, SynthConfig,
};
use mutantgraph::pipeline::{report_summary, run_pipeline, write_components, RunConfig};
use mutantgraph::simgraph::{
    all_maximal_cliques, build_graph_with, connected_components, ApproxParams, GraphMode, SimilarityGraph,
    DEFAULT_NODE_CAP, DEFAULT_THETA,
};
use mutantgraph::temporal::{pair_report, read_pairs, IST_OFFSET_SECONDS};

const EMBEDDER_ENV: &str = "MUTANTGRAPH_EMBEDDER";

#[derive(Parser)]
#[command(name = "mutantgraph", version, about = "Detect coordinated text-mutation campaigns")]
struct Cli {
    /// Worker threads for parallel stages (results do not depend on it).
    #[arg(long, global = true, env = "MUTANTGRAPH_THREADS")]
    threads: Option<usize>,
    /// Seed for sampling and synthetic generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML config: the run config for `run`, the generator config for `synth`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a posts JSONL file into a corpus file.
    Ingest(IngestArgs),
    /// Check an EMB1 file, optionally against a posts file.
    ValidateEmbeddings(ValidateArgs),
    /// Pair posts with their vectors.
    Align(AlignArgs),
    /// Threshold cosine similarity into a graph.
    BuildGraph(BuildGraphArgs),
    /// Write the connected components of a graph.
    Components(ComponentsArgs),
    /// Extract campaigns and their statistics.
    Detect(DetectArgs),
    /// Account network, repeat participants and leaning analysis.
    Accounts(AccountsArgs),
    /// Daily timelines and lead-lag for campaign pairs.
    Timeline(TimelineArgs),
    /// Generate a synthetic corpus with planted campaigns.
    Synth(SynthArgs),
    /// Brute-force similarity graph for checking the engine.
    Oracle(OracleArgs),
    /// Score detected campaigns against planted truth.
    Score(ScoreArgs),
    /// Sample cosine-band pairs for threshold calibration.
    Calibrate(CalibrateArgs),
    /// Sample campaigns for manual audit.
    AuditSample(AuditArgs),
    /// Summarize a labeled calibration or audit sheet.
    SummarizeLabels(LabelsArgs),
    /// Run the full pipeline into an output directory.
    Run(RunArgs),
    /// Print headline numbers for a run directory.
    ReportSummary(SummaryArgs),
    /// Compute embeddings with the external adapter named by MUTANTGRAPH_EMBEDDER.
    Embed(EmbedArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    posts: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Additional accepted platform tag (repeatable).
    #[arg(long = "extra-platform")]
    extra_platforms: Vec<String>,
    #[arg(long, requires = "window_end")]
    window_start: Option<String>,
    #[arg(long, requires = "window_start")]
    window_end: Option<String>,
    /// Also write the normalized posts as JSONL.
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    emb: PathBuf,
    /// Posts JSONL or corpus file to check alignment against.
    #[arg(long)]
    posts: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    /// Posts JSONL or corpus file.
    #[arg(long)]
    posts: PathBuf,
    #[arg(long)]
    emb: PathBuf,
    #[arg(long, default_value = "strict")]
    mode: AlignMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildGraphArgs {
    /// Aligned corpus file.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    #[arg(long, default_value = "exact")]
    mode: GraphMode,
    #[arg(long)]
    out: PathBuf,
    /// Also dump edges as CSV `node_a,node_b,score`.
    #[arg(long)]
    edges_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ComponentsArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Aligned corpus for post ids; row numbers are written without it.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_SIZE)]
    min_size: usize,
    #[arg(long, default_value = "component")]
    grouping: Grouping,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    #[arg(long)]
    out: PathBuf,
    /// Stats JSON path; printed to stdout when absent.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Similarity histogram CSV `bin_low,count`.
    #[arg(long)]
    hist: Option<PathBuf>,
}

#[derive(Args)]
struct AccountsArgs {
    #[arg(long)]
    campaigns: PathBuf,
    /// Seed labels CSV `platform,source,leaning`.
    #[arg(long)]
    seeds: Option<PathBuf>,
    #[arg(long, requires = "seeds")]
    propagate: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    max_rounds: usize,
    #[arg(long, default_value_t = DEFAULT_REPEAT_THRESHOLD)]
    repeat_threshold: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct TimelineArgs {
    #[arg(long)]
    campaigns: PathBuf,
    /// Aligned corpus, corpus file or posts JSONL.
    #[arg(long)]
    corpus: PathBuf,
    /// CSV `campaign_a,campaign_b,label`.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = IST_OFFSET_SECONDS, allow_negative_numbers = true)]
    tz_offset: i32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    posts: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    campaigns: Option<usize>,
    /// Skip the pairwise construction check.
    #[arg(long)]
    no_verify: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    emb: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THETA)]
    theta: f64,
    /// Allow more rows than the oracle's size guard.
    #[arg(long)]
    allow_large: bool,
    #[arg(long)]
    edges_csv: Option<PathBuf>,
    /// Compare against a graph file built by the engine.
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    detected: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    match_threshold: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 50)]
    per_band: usize,
    #[arg(long, default_value_t = mutantgraph::evalkit::CALIBRATION_START)]
    start: f64,
    #[arg(long, default_value_t = mutantgraph::evalkit::CALIBRATION_STEP)]
    step: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    campaigns: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LabelsArgs {
    #[arg(long, value_parser = ["calibration", "audit"])]
    kind: String,
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    posts: Option<PathBuf>,
    #[arg(long)]
    emb: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    mode: Option<GraphMode>,
    #[arg(long)]
    grouping: Option<Grouping>,
    #[arg(long)]
    min_size: Option<usize>,
    #[arg(long)]
    seeds: Option<PathBuf>,
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Args)]
struct SummaryArgs {
    #[arg(long)]
    dir: PathBuf,
    /// Summarize even if manifest digests do not match.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 64)]
    batch: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if !matches!(cli.command, Cmd::Run(_)) {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().ok();
    }
    let seed = cli.seed;
    let config = cli.config;
    match cli.command {
        Cmd::Ingest(a) => ingest(a),
        Cmd::ValidateEmbeddings(a) => validate(a),
        Cmd::Align(a) => align_cmd(a),
        Cmd::BuildGraph(a) => build_graph_cmd(a, seed.unwrap_or(0)),
        Cmd::Components(a) => components(a),
        Cmd::Detect(a) => detect(a),
        Cmd::Accounts(a) => accounts(a),
        Cmd::Timeline(a) => timeline(a),
        Cmd::Synth(a) => synth(a, config.as_deref(), seed.unwrap_or(42)),
        Cmd::Oracle(a) => oracle(a),
        Cmd::Score(a) => score(a),
        Cmd::Calibrate(a) => calibrate(a, seed.unwrap_or(0)),
        Cmd::AuditSample(a) => audit(a, seed.unwrap_or(0)),
        Cmd::SummarizeLabels(a) => summarize_labels(a),
        Cmd::Run(a) => run(a, config.as_deref(), seed, threads),
        Cmd::ReportSummary(a) => summary(a),
        Cmd::Embed(a) => embed(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => {
            let mut out = create(p)?;
            serde_json::to_writer_pretty(&mut out, value)?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads posts from a corpus file (by magic) or a JSONL file.
fn read_posts(path: &Path) -> Result<PostCollection> {
    let mut magic = [0u8; 8];
    let is_corpus = File::open(path)
        .and_then(|mut f| io::Read::read_exact(&mut f, &mut magic))
        .map(|_| &magic == b"MGCORPUS")
        .unwrap_or(false);
    if is_corpus {
        return Ok(load_corpus(path)?);
    }
    let report = ingest_posts(path, &IngestConfig::default())?;
    if !report.skipped.is_empty() {
        warn!("{} malformed lines skipped in {}", report.skipped.len(), path.display());
    }
    Ok(report.posts)
}

fn ingest(a: IngestArgs) -> Result<()> {
    let window = match (&a.window_start, &a.window_end) {
        (Some(s), Some(e)) => {
            let p = |t: &str| parse_timestamp(t).with_context(|| format!("bad timestamp {t:?}"));
            Some((p(s)?, p(e)?))
        }
        _ => None,
    };
    let report = ingest_posts(
        &a.posts,
        &IngestConfig {
            extra_platforms: a.extra_platforms,
            window,
        },
    )?;
    for s in &report.skipped {
        warn!("line {}: {}", s.line, s.reason);
    }
    save_corpus(&report.posts, &a.out)?;
    if let Some(jsonl) = &a.jsonl {
        save_posts_jsonl(&report.posts, jsonl)?;
    }
    println!("ingested {} posts, skipped {} lines", report.posts.len(), report.skipped.len());
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<()> {
    let matrix = load_embeddings(&a.emb)?;
    let mut zero = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (row, id) in matrix.ids().iter().enumerate() {
        let norm = mutantgraph::embedstore::dot(matrix.row(row), matrix.row(row)).sqrt();
        if norm == 0.0 {
            zero.push(id.clone());
        }
        lo = lo.min(norm);
        hi = hi.max(norm);
    }
    println!("records {}  dim {}", matrix.len(), matrix.dim());
    if !matrix.is_empty() {
        println!("norm range [{lo:.6}, {hi:.6}]");
    }
    let mut errors = zero.len();
    if let Some(first) = zero.first() {
        println!("zero vectors: {} (first {first:?})", zero.len());
    }
    if let Some(posts) = &a.posts {
        let posts = read_posts(posts)?;
        let report = align(&posts, &matrix, AlignMode::Lenient)?;
        println!(
            "posts without vector: {}  vectors without post: {}",
            report.posts_without_vector.len(),
            report.vectors_without_post.len()
        );
        errors += report.posts_without_vector.len();
    }
    if errors > 0 {
        bail!("{errors} validation errors");
    }
    println!("ok");
    Ok(())
}

fn align_cmd(a: AlignArgs) -> Result<()> {
    let posts = read_posts(&a.posts)?;
    let matrix = load_embeddings(&a.emb)?.unit_normalize()?;
    let report = align(&posts, &matrix, a.mode)?;
    if !report.posts_without_vector.is_empty() {
        warn!("{} posts dropped without a vector", report.posts_without_vector.len());
    }
    if !report.vectors_without_post.is_empty() {
        warn!("{} vectors ignored without a post", report.vectors_without_post.len());
    }
    report.corpus.save(&a.out)?;
    println!("aligned {} posts", report.corpus.len());
    Ok(())
}

fn build_graph_cmd(a: BuildGraphArgs, seed: u64) -> Result<()> {
    let corpus = AlignedCorpus::load(&a.corpus)?;
    let params = ApproxParams {
        seed,
        ..ApproxParams::default()
    };
    let graph = build_graph_with(corpus.matrix(), a.theta, a.mode, &params)?;
    graph.save(&a.out)?;
    if let Some(path) = &a.edges_csv {
        let mut out = create(path)?;
        graph.write_edge_csv(&mut out)?;
        out.flush()?;
    }
    write_json(None, &graph.diagnostics())
}

fn components(a: ComponentsArgs) -> Result<()> {
    let graph = SimilarityGraph::load(&a.graph)?;
    let ids: Vec<String> = match &a.corpus {
        Some(p) => AlignedCorpus::load(p)?.matrix().ids().to_vec(),
        None => (0..graph.node_count()).map(|i| i.to_string()).collect(),
    };
    if ids.len() != graph.node_count() {
        bail!("corpus has {} rows but the graph has {} nodes", ids.len(), graph.node_count());
    }
    let components = connected_components(&graph);
    let mut out = create(&a.out)?;
    write_components(&components, &ids, &mut out)?;
    out.flush()?;
    println!("{} components", components.len());
    Ok(())
}

fn detect(a: DetectArgs) -> Result<()> {
    let graph = SimilarityGraph::load(&a.graph)?;
    let corpus = AlignedCorpus::load(&a.corpus)?;
    if corpus.len() != graph.node_count() {
        bail!("corpus has {} rows but the graph has {} nodes", corpus.len(), graph.node_count());
    }
    let components = connected_components(&graph);
    let groups = match a.grouping {
        Grouping::Component => component_groups(&components),
        Grouping::Clique => {
            let sets = all_maximal_cliques(&components, &graph, a.node_cap);
            let capped = sets.iter().filter(|s| s.approximated).count();
            if capped > 0 {
                warn!("{capped} components exceeded the node cap and were kept whole");
            }
            clique_groups(&sets)
        }
    };
    let campaigns = extract_campaigns(&groups, &corpus, a.min_size);
    save_campaigns(&campaigns, &a.out)?;
    let hist = similarity_distribution(&campaigns, &graph, &corpus);
    if let Some(path) = &a.hist {
        let mut out = create(path)?;
        hist.write_csv(&mut out)?;
        out.flush()?;
    }
    let stats = campaign_stats(&campaigns, corpus.len(), Some(hist));
    info!("{} campaigns", campaigns.len());
    write_json(a.stats.as_deref(), &stats)
}

fn accounts(a: AccountsArgs) -> Result<()> {
    let campaigns = load_campaigns(&a.campaigns)?;
    fs::create_dir_all(&a.out_dir)?;
    let network = build_account_network(&campaigns);
    let mut out = create(&a.out_dir.join("network.csv"))?;
    network.write_edge_csv(&mut out)?;
    out.flush()?;
    let offenders = repeat_offenders(&campaigns, a.repeat_threshold);
    let mut w = csv::Writer::from_writer(create(&a.out_dir.join("repeat_offenders.csv"))?);
    w.write_record(["platform", "source", "campaigns"])?;
    for (key, n) in &offenders {
        w.write_record([key.platform().as_str(), key.key(), &n.to_string()])?;
    }
    w.flush()?;
    println!(
        "{} accounts, {} edges, {} in at least {} campaigns",
        network.nodes().len(),
        network.edges().len(),
        offenders.len(),
        a.repeat_threshold
    );
    if let Some(path) = &a.seeds {
        let seeds = load_leaning_seeds(path)?;
        let labels = if a.propagate {
            let p = propagate_labels(&network, &seeds, a.max_rounds)?;
            if !p.converged {
                warn!("propagation stopped after {} rounds without converging", p.rounds);
            }
            println!("propagated in {} rounds ({} seeds used)", p.rounds, p.seeds_used);
            p.labels
        } else {
            seeds.clone()
        };
        let mut out = create(&a.out_dir.join("labels.csv"))?;
        labels_csv(&labels, &seeds, &mut out)?;
        out.flush()?;
        write_json(Some(&a.out_dir.join("participation.json")), &leaning_stats(&campaigns, &labels))?;
    }
    Ok(())
}

fn timeline(a: TimelineArgs) -> Result<()> {
    let campaigns = load_campaigns(&a.campaigns)?;
    let posts = match AlignedCorpus::load(&a.corpus) {
        Ok(c) => c.posts().clone(),
        Err(_) => read_posts(&a.corpus)?,
    };
    let pairs = read_pairs(File::open(&a.pairs).with_context(|| a.pairs.display().to_string())?)?;
    let report = pair_report(&pairs, &campaigns, &posts, a.tz_offset)?;
    write_json(Some(&a.out), &report)
}

fn synth(a: SynthArgs, config: Option<&Path>, seed: u64) -> Result<()> {
    let mut cfg = match config {
        Some(p) => SynthConfig::from_toml(&fs::read_to_string(p).with_context(|| p.display().to_string())?)?,
        None => SynthConfig::default(),
    };
    cfg.posts = a.posts.unwrap_or(cfg.posts);
    cfg.dim = a.dim.unwrap_or(cfg.dim);
    cfg.campaigns = a.campaigns.unwrap_or(cfg.campaigns);
    let s = generate_synthetic(&cfg, seed)?;
    if !a.no_verify {
        let check = verify_generated(&s, 2_000, seed);
        if check.within_violations + check.cross_violations > 0 {
            bail!("generated corpus violates its constraints: {check:?}");
        }
        info!("construction check passed on {} posts", check.posts_checked);
    }
    fs::create_dir_all(&a.out_dir)?;
    save_posts_jsonl(&s.posts, a.out_dir.join("posts.jsonl"))?;
    s.matrix.save(a.out_dir.join("embeddings.emb1"))?;
    write_json(Some(&a.out_dir.join("truth.json")), &s.truth)?;
    println!(
        "{} posts, {} planted campaigns ({} detectable) in {}",
        s.posts.len(),
        s.truth.campaigns.len(),
        s.truth.detectable().count(),
        a.out_dir.display()
    );
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<()> {
    let matrix = load_embeddings(&a.emb)?.unit_normalize()?;
    let o = brute_force_oracle(&matrix, a.theta, a.allow_large)?;
    println!("{} edges, {} components", o.graph.edges().len(), o.components.len());
    if let Some(path) = &a.edges_csv {
        let mut out = create(path)?;
        o.graph.write_edge_csv(&mut out)?;
        out.flush()?;
    }
    if let Some(path) = &a.compare {
        let engine = SimilarityGraph::load(path)?;
        if engine.edge_pairs() != o.graph.edge_pairs() {
            bail!("engine graph differs from the oracle");
        }
        println!("engine graph matches the oracle");
    }
    Ok(())
}

fn score(a: ScoreArgs) -> Result<()> {
    let detected = load_campaigns(&a.detected)?;
    let truth: PlantedTruth = serde_json::from_reader(File::open(&a.truth).with_context(|| a.truth.display().to_string())?)?;
    let s = score_detection(&detected, &truth, a.match_threshold)?;
    println!("precision {:.4}  recall {:.4}  f1 {:.4}", s.precision, s.recall, s.f1);
    if a.out.is_some() {
        write_json(a.out.as_deref(), &s)?;
    }
    Ok(())
}

fn calibrate(a: CalibrateArgs, seed: u64) -> Result<()> {
    let corpus = AlignedCorpus::load(&a.corpus)?;
    let sheet = sample_calibration_pairs(&corpus, &bands(a.start, a.step), a.per_band, seed)?;
    for band in &sheet.bands {
        if let Some(note) = &band.note {
            warn!("band [{:.2}, {:.2}): {note}", band.band.low, band.band.high);
        }
    }
    let mut out = create(&a.out)?;
    sheet.write_csv(corpus.posts(), &mut out)?;
    out.flush()?;
    Ok(())
}

fn audit(a: AuditArgs, seed: u64) -> Result<()> {
    let campaigns = load_campaigns(&a.campaigns)?;
    let posts = match AlignedCorpus::load(&a.corpus) {
        Ok(c) => c.posts().clone(),
        Err(_) => read_posts(&a.corpus)?,
    };
    let sheet = sample_campaign_audit(&campaigns, a.n, seed)?;
    let mut out = create(&a.out)?;
    sheet.write_csv(&campaigns, &posts, &mut out)?;
    out.flush()?;
    Ok(())
}

fn summarize_labels(a: LabelsArgs) -> Result<()> {
    let input = File::open(&a.input).with_context(|| a.input.display().to_string())?;
    if a.kind == "calibration" {
        write_json(None, &summarize_calibration_labels(input)?)
    } else {
        write_json(None, &summarize_audit_labels(input)?)
    }
}

fn run(a: RunArgs, config: Option<&Path>, seed: Option<u64>, threads: usize) -> Result<()> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.posts {
        cfg.posts = Some(v);
    }
    if let Some(v) = a.emb {
        cfg.embeddings = Some(v);
    }
    if let Some(v) = a.out_dir {
        cfg.out_dir = Some(v);
    }
    if let Some(v) = a.seeds {
        cfg.seeds = Some(v);
    }
    if let Some(v) = a.pairs {
        cfg.pairs = Some(v);
    }
    cfg.theta = a.theta.unwrap_or(cfg.theta);
    cfg.mode = a.mode.unwrap_or(cfg.mode);
    cfg.grouping = a.grouping.unwrap_or(cfg.grouping);
    cfg.min_size = a.min_size.unwrap_or(cfg.min_size);
    cfg.seed = seed.unwrap_or(cfg.seed);
    let manifest = run_pipeline(&cfg, threads)?;
    for stage in &manifest.stages {
        println!("{:<12} {:?} {:.2}s", stage.name, stage.status, stage.seconds);
    }
    Ok(())
}

fn summary(a: SummaryArgs) -> Result<()> {
    let s = report_summary(&a.dir, a.force)?;
    if a.json {
        write_json(None, &s)
    } else {
        print!("{}", s.render());
        Ok(())
    }
}

fn embed(a: EmbedArgs) -> Result<()> {
    let Some(exe) = std::env::var_os(EMBEDDER_ENV) else {
        bail!("{EMBEDDER_ENV} is not set; point it at the embedder adapter executable");
    };
    if a.batch == 0 {
        bail!("batch must be at least 1");
    }
    let status = Command::new(&exe)
        .arg("--input")
        .arg(&a.input)
        .arg("--output")
        .arg(&a.output)
        .arg("--model")
        .arg(&a.model)
        .arg("--batch")
        .arg(a.batch.to_string())
        .status()
        .with_context(|| format!("running {}", PathBuf::from(&exe).display()))?;
    if !status.success() {
        bail!("embedder exited with {status}");
    }
    let matrix = load_embeddings(&a.output)?;
    println!("{} vectors of dim {} in {}", matrix.len(), matrix.dim(), a.output.display());
    Ok(())
}
