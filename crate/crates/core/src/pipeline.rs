//! End-to-end batch run with a manifest, and the summary over a run directory.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::accounts::{
    build_account_network, labels_csv, leaning_stats, load_leaning_seeds, propagate_labels, repeat_offenders,
    seeds_outside, ParticipationTable, DEFAULT_MAX_ROUNDS, DEFAULT_REPEAT_THRESHOLD,
};
use crate::campaigns::{
    campaign_stats, clique_groups, component_groups, extract_campaigns, load_campaigns, save_campaigns,
    similarity_distribution, CampaignStats, Grouping, DEFAULT_MIN_SIZE,
};
use crate::corpus::{ingest_posts, parse_timestamp, save_corpus, IngestConfig};
use crate::embedstore::{align, load_embeddings, AlignMode};
use crate::error::{Error, IoContext, Result};
use crate::simgraph::{
    all_maximal_cliques, build_graph_with, clique_fraction, connected_components, ApproxParams, Component,
    GraphMode, SimilarityGraph, DEFAULT_NODE_CAP, DEFAULT_THETA,
};
use crate::temporal::{pair_report, read_pairs, IST_OFFSET_SECONDS};

pub const MANIFEST: &str = "manifest.json";
pub const CAMPAIGNS: &str = "campaigns.jsonl";
pub const STATS: &str = "stats.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub posts: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub theta: f64,
    pub mode: GraphMode,
    pub grouping: Grouping,
    pub min_size: usize,
    pub node_cap: usize,
    pub align: AlignMode,
    pub seed: u64,
    pub extra_platforms: Vec<String>,
    /// Inclusive `[start, end]` timestamps in `YYYY-MM-DDTHH:MM:SSZ` form.
    pub window: Option<[String; 2]>,
    pub seeds: Option<PathBuf>,
    pub propagate: bool,
    pub max_rounds: usize,
    pub repeat_threshold: usize,
    pub pairs: Option<PathBuf>,
    pub tz_offset_seconds: i32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            posts: None,
            embeddings: None,
            out_dir: None,
            theta: DEFAULT_THETA,
            mode: GraphMode::Exact,
            grouping: Grouping::Component,
            min_size: DEFAULT_MIN_SIZE,
            node_cap: DEFAULT_NODE_CAP,
            align: AlignMode::Strict,
            seed: 0,
            extra_platforms: Vec::new(),
            window: None,
            seeds: None,
            propagate: true,
            max_rounds: DEFAULT_MAX_ROUNDS,
            repeat_threshold: DEFAULT_REPEAT_THRESHOLD,
            pairs: None,
            tz_offset_seconds: IST_OFFSET_SECONDS,
        }
    }
}

impl RunConfig {
    /// Parses a TOML config; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<RunConfig> {
        let mut config: RunConfig = toml::from_str(text)?;
        for p in [
            &mut config.posts,
            &mut config.embeddings,
            &mut config.out_dir,
            &mut config.seeds,
            &mut config.pairs,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).at(path)?;
        RunConfig::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn ingest_config(&self) -> Result<IngestConfig> {
        let window = match &self.window {
            None => None,
            Some([a, b]) => {
                let parse = |s: &str| {
                    parse_timestamp(s).ok_or_else(|| Error::InvalidArgument(format!("bad window timestamp {s:?}")))
                };
                Some((parse(a)?, parse(b)?))
            }
        };
        Ok(IngestConfig {
            extra_platforms: self.extra_platforms.clone(),
            window,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub seconds: f64,
    pub counts: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub threads: usize,
    pub config: RunConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub stages: Vec<StageRecord>,
    pub failed_stage: Option<String>,
}

pub fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let mut file = File::open(path).at(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = file.read(&mut buf).at(path)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}

fn digest(role: &str, path: &Path) -> Result<FileDigest> {
    let (sha256, bytes) = sha256_file(path)?;
    Ok(FileDigest {
        role: role.to_string(),
        path: path.to_path_buf(),
        sha256,
        bytes,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).at(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").at(path)?;
    out.flush().at(path)
}

fn create<P: AsRef<Path>>(path: P) -> Result<BufWriter<File>> {
    let path = path.as_ref();
    Ok(BufWriter::new(File::create(path).at(path)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub size: usize,
    pub is_clique: bool,
    pub edge_count: usize,
    pub members: Vec<String>,
}

pub fn write_components<W: Write>(components: &[Component], ids: &[String], mut out: W) -> Result<()> {
    for c in components {
        let record = ComponentRecord {
            size: c.len(),
            is_clique: c.is_clique,
            edge_count: c.edge_count,
            members: c.nodes.iter().map(|&n| ids[n as usize].clone()).collect(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n").at("<components>")?;
    }
    Ok(())
}

struct Recorder {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Recorder {
    fn stage<T>(
        &mut self,
        name: &'static str,
        body: impl FnOnce(&mut BTreeMap<String, f64>) -> Result<T>,
    ) -> Result<T> {
        let started = Instant::now();
        let mut counts = BTreeMap::new();
        let result = body(&mut counts);
        let mut record = StageRecord {
            name: name.to_string(),
            status: StageStatus::Ok,
            seconds: started.elapsed().as_secs_f64(),
            counts,
            error: None,
        };
        match result {
            Ok(value) => {
                log::info!("stage {name} done in {:.2}s", record.seconds);
                self.manifest.stages.push(record);
                Ok(value)
            }
            Err(e) => {
                record.status = StageStatus::Failed;
                record.error = Some(e.to_string());
                self.manifest.stages.push(record);
                self.manifest.failed_stage = Some(name.to_string());
                self.write()?;
                Err(Error::Stage {
                    stage: name,
                    source: Box::new(e),
                })
            }
        }
    }

    fn skip(&mut self, name: &str) {
        self.manifest.stages.push(StageRecord {
            name: name.to_string(),
            status: StageStatus::Skipped,
            seconds: 0.0,
            counts: BTreeMap::new(),
            error: None,
        });
    }

    fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let d = digest(role, path)?;
        self.manifest.inputs.push(d);
        Ok(())
    }

    fn output(&mut self, role: &str, name: &str) -> Result<()> {
        let d = digest(role, &self.dir.join(name))?;
        self.manifest.outputs.push(FileDigest {
            path: PathBuf::from(name),
            ..d
        });
        Ok(())
    }

    fn write(&self) -> Result<()> {
        write_json(&self.dir.join(MANIFEST), &self.manifest)
    }
}

fn required<'a>(value: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("run config has no {what} path")))
}

/// Runs every configured stage into the output directory. Outputs other
/// than the manifest do not depend on `threads`.
pub fn run_pipeline(config: &RunConfig, threads: usize) -> Result<RunManifest> {
    let out_dir = required(&config.out_dir, "out_dir")?.to_path_buf();
    fs::create_dir_all(&out_dir).at(&out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let mut rec = Recorder {
        dir: out_dir.clone(),
        manifest: RunManifest {
            tool: "mutantgraph".into(),
            version: TOOL_VERSION.into(),
            threads: threads.max(1),
            config: config.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            stages: Vec::new(),
            failed_stage: None,
        },
    };
    pool.install(|| run_stages(config, &out_dir, &mut rec))?;
    rec.write()?;
    Ok(rec.manifest)
}

fn run_stages(config: &RunConfig, dir: &Path, rec: &mut Recorder) -> Result<()> {
    let posts = rec.stage("ingest", |counts| {
        let path = required(&config.posts, "posts")?;
        let report = ingest_posts(path, &config.ingest_config()?)?;
        for s in &report.skipped {
            log::warn!("ingest skipped line {}: {}", s.line, s.reason);
        }
        counts.insert("posts".into(), report.posts.len() as f64);
        counts.insert("skipped_lines".into(), report.skipped.len() as f64);
        save_corpus(&report.posts, dir.join("corpus.bin"))?;
        Ok(report.posts)
    })?;
    rec.input("posts", required(&config.posts, "posts")?)?;

    let corpus = rec.stage("align", |counts| {
        let path = required(&config.embeddings, "embeddings")?;
        let matrix = load_embeddings(path)?.unit_normalize()?;
        let report = align(&posts, &matrix, config.align)?;
        counts.insert("aligned".into(), report.corpus.len() as f64);
        counts.insert("posts_without_vector".into(), report.posts_without_vector.len() as f64);
        counts.insert("vectors_without_post".into(), report.vectors_without_post.len() as f64);
        report.corpus.save(dir.join("aligned.bin"))?;
        Ok(report.corpus)
    })?;
    rec.input("embeddings", required(&config.embeddings, "embeddings")?)?;

    let (graph, components) = rec.stage("build-graph", |counts| {
        let params = ApproxParams {
            seed: config.seed,
            ..ApproxParams::default()
        };
        let graph = build_graph_with(corpus.matrix(), config.theta, config.mode, &params)?;
        graph.save(dir.join("graph.bin"))?;
        let components = connected_components(&graph);
        write_components(&components, corpus.matrix().ids(), create(dir.join("components.jsonl"))?)?;
        let diagnostics = graph.diagnostics();
        write_json(&dir.join("graph_diagnostics.json"), &diagnostics)?;
        counts.insert("edges".into(), graph.edges().len() as f64);
        counts.insert("components".into(), components.len() as f64);
        if let Ok(f) = clique_fraction(&components) {
            counts.insert("clique_fraction".into(), f.fraction);
        }
        if let Some(a) = &diagnostics.approx {
            counts.insert("approx_recall".into(), a.recall);
        }
        Ok((graph, components))
    })?;

    let campaigns = rec.stage("detect", |counts| {
        let groups = match config.grouping {
            Grouping::Component => component_groups(&components),
            Grouping::Clique => {
                let sets = all_maximal_cliques(&components, &graph, config.node_cap);
                let approximated = sets.iter().filter(|s| s.approximated).count();
                if approximated > 0 {
                    log::warn!("{approximated} components exceeded the clique node cap and were kept whole");
                }
                counts.insert("approximated_components".into(), approximated as f64);
                clique_groups(&sets)
            }
        };
        let campaigns = extract_campaigns(&groups, &corpus, config.min_size);
        let hist = similarity_distribution(&campaigns, &graph, &corpus);
        hist.write_csv(create(dir.join("similarity_hist.csv"))?)?;
        let stats = campaign_stats(&campaigns, corpus.len(), Some(hist));
        write_size_hist(&stats, create(dir.join("size_hist.csv"))?)?;
        write_json(&dir.join(STATS), &stats)?;
        save_campaigns(&campaigns, dir.join(CAMPAIGNS))?;
        counts.insert("campaigns".into(), campaigns.len() as f64);
        counts.insert("coverage".into(), stats.coverage);
        Ok(campaigns)
    })?;
    rec.output("campaigns", CAMPAIGNS)?;
    rec.output("stats", STATS)?;

    let accounts_dir = dir.join("accounts");
    rec.stage("accounts", |counts| {
        fs::create_dir_all(&accounts_dir).at(&accounts_dir)?;
        let network = build_account_network(&campaigns);
        network.write_edge_csv(create(accounts_dir.join("network.csv"))?)?;
        let offenders = repeat_offenders(&campaigns, config.repeat_threshold);
        let mut w = csv::Writer::from_writer(create(accounts_dir.join("repeat_offenders.csv"))?);
        w.write_record(["platform", "source", "campaigns"])?;
        for (key, n) in &offenders {
            w.write_record([key.platform().as_str(), key.key(), &n.to_string()])?;
        }
        w.flush().at(&accounts_dir)?;
        counts.insert("accounts".into(), network.nodes().len() as f64);
        counts.insert("edges".into(), network.edges().len() as f64);
        counts.insert("repeat_offenders".into(), offenders.len() as f64);
        if let Some(path) = &config.seeds {
            let seeds = load_leaning_seeds(path)?;
            let outside = seeds_outside(&network, &seeds);
            if !outside.is_empty() {
                log::warn!("{} seed accounts are not in the network", outside.len());
            }
            let labels = if config.propagate {
                let p = propagate_labels(&network, &seeds, config.max_rounds)?;
                if !p.converged {
                    log::warn!("label propagation stopped after {} rounds without converging", p.rounds);
                }
                counts.insert("rounds".into(), p.rounds as f64);
                p.labels
            } else {
                seeds.clone()
            };
            labels_csv(&labels, &seeds, create(accounts_dir.join("labels.csv"))?)?;
            write_json(&accounts_dir.join("participation.json"), &leaning_stats(&campaigns, &labels))?;
            counts.insert("labeled".into(), labels.len() as f64);
        }
        Ok(())
    })?;
    if let Some(path) = &config.seeds {
        rec.input("seeds", path)?;
    }

    match &config.pairs {
        None => rec.skip("timeline"),
        Some(path) => {
            rec.stage("timeline", |counts| {
                let pairs = read_pairs(File::open(path).at(path)?)?;
                let report = pair_report(&pairs, &campaigns, corpus.posts(), config.tz_offset_seconds)?;
                write_json(&dir.join("timelines.json"), &report)?;
                counts.insert("pairs".into(), report.pairs.len() as f64);
                Ok(())
            })?;
            rec.input("pairs", path)?;
        }
    }
    Ok(())
}

fn write_size_hist<W: Write>(stats: &CampaignStats, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_low", "count"])?;
    for bin in &stats.size_histogram {
        w.write_record([bin.low.to_string(), bin.count.to_string()])?;
    }
    w.flush().at("<size histogram>")?;
    Ok(())
}

/// Headline numbers for a finished run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub campaigns: usize,
    pub corpus_size: usize,
    pub mean_size: f64,
    pub largest: usize,
    pub campaigns_at_least_100: usize,
    pub coverage_percent: f64,
    pub mean_unique_mutant_percent: f64,
    pub twitter_only: usize,
    pub facebook_only: usize,
    pub cross_platform: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub leaning: Option<ParticipationTable>,
}

/// Verifies the manifest digests and summarizes the run. A digest mismatch
/// is an error unless `force` is set.
pub fn report_summary(dir: &Path, force: bool) -> Result<RunSummary> {
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.exists() {
        return Err(Error::InvalidArgument(format!(
            "{} has no {MANIFEST}; the run stage never started",
            dir.display()
        )));
    }
    let manifest: RunManifest = serde_json::from_reader(File::open(&manifest_path).at(&manifest_path)?)?;
    if let Some(stage) = &manifest.failed_stage {
        return Err(Error::InvalidArgument(format!("run failed at stage {stage}")));
    }
    let mismatches = verify_manifest(dir, &manifest)?;
    if !mismatches.is_empty() {
        let msg = format!("digest mismatch for {}", mismatches.join(", "));
        if force {
            log::warn!("{msg}; continuing because the override is set");
        } else {
            return Err(Error::InvalidArgument(format!("{msg}; refusing to summarize")));
        }
    }
    let need = |name: &str, stage: &str| {
        let p = dir.join(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::InvalidArgument(format!("missing {name}: the {stage} stage has not run")))
        }
    };
    let campaigns = load_campaigns(need(CAMPAIGNS, "detect")?)?;
    let stats_path = need(STATS, "detect")?;
    let stats: CampaignStats = serde_json::from_reader(File::open(&stats_path).at(&stats_path)?)?;
    let participation = dir.join("accounts").join("participation.json");
    let leaning = if participation.exists() {
        Some(serde_json::from_reader(File::open(&participation).at(&participation)?)?)
    } else {
        None
    };
    let recomputed = campaign_stats(&campaigns, stats.corpus_size, None);
    Ok(RunSummary {
        campaigns: recomputed.campaign_count,
        corpus_size: recomputed.corpus_size,
        mean_size: recomputed.mean_size,
        largest: recomputed.max_size,
        campaigns_at_least_100: recomputed.campaigns_at_least_100,
        coverage_percent: 100.0 * recomputed.coverage,
        mean_unique_mutant_percent: 100.0 * recomputed.mean_unique_mutant_fraction,
        twitter_only: recomputed.platform_spread.twitter_only,
        facebook_only: recomputed.platform_spread.facebook_only,
        cross_platform: recomputed.platform_spread.cross,
        leaning,
    })
}

/// Roles whose current digest differs from the manifest.
pub fn verify_manifest(dir: &Path, manifest: &RunManifest) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for d in &manifest.inputs {
        match sha256_file(&d.path) {
            Ok((sha, _)) if sha == d.sha256 => {}
            _ => bad.push(format!("input {}", d.role)),
        }
    }
    for d in &manifest.outputs {
        match sha256_file(&dir.join(&d.path)) {
            Ok((sha, _)) if sha == d.sha256 => {}
            _ => bad.push(format!("output {}", d.role)),
        }
    }
    Ok(bad)
}

impl RunSummary {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| s.push_str(&format!("{k:<28}{v}\n"));
        line("campaigns", self.campaigns.to_string());
        line("corpus size", self.corpus_size.to_string());
        line("mean campaign size", format!("{:.2}", self.mean_size));
        line("largest campaign", self.largest.to_string());
        line("campaigns with >= 100 posts", self.campaigns_at_least_100.to_string());
        line("coverage", format!("{:.2}%", self.coverage_percent));
        line("mean unique mutants", format!("{:.2}%", self.mean_unique_mutant_percent));
        line("twitter only", self.twitter_only.to_string());
        line("facebook only", self.facebook_only.to_string());
        line("cross platform", self.cross_platform.to_string());
        if let Some(table) = &self.leaning {
            for share in &table.accounts.shares {
                line(&format!("accounts {:?}", share.group), format!("{:.2}%", share.percent));
            }
            line("accounts unlabeled", table.accounts.unlabeled.to_string());
        }
        s
    }
}

/// Loads a graph and its components; shared by the stage subcommands.
pub fn load_graph_components(path: &Path) -> Result<(SimilarityGraph, Vec<Component>)> {
    let graph = SimilarityGraph::load(path)?;
    let components = connected_components(&graph);
    Ok((graph, components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::write_posts_jsonl;
    use crate::evalkit::{generate_synthetic, SynthConfig};

    fn bundle(dir: &Path) -> RunConfig {
        let s = generate_synthetic(
            &SynthConfig {
                posts: 400,
                dim: 24,
                campaigns: 5,
                min_campaign_size: 10,
                max_campaign_size: 25,
                ..SynthConfig::default()
            },
            5,
        )
        .unwrap();
        write_posts_jsonl(&s.posts, File::create(dir.join("posts.jsonl")).unwrap()).unwrap();
        s.matrix.save(dir.join("embs.emb1")).unwrap();
        RunConfig {
            posts: Some(dir.join("posts.jsonl")),
            embeddings: Some(dir.join("embs.emb1")),
            out_dir: Some(dir.join("out")),
            ..RunConfig::default()
        }
    }

    #[test]
    fn full_run_and_summary() {
        let tmp = tempfile::tempdir().unwrap();
        let config = bundle(tmp.path());
        let m = run_pipeline(&config, 2).unwrap();
        assert!(m.failed_stage.is_none());
        let out = tmp.path().join("out");
        for f in [MANIFEST, CAMPAIGNS, STATS, "graph.bin", "aligned.bin", "corpus.bin", "components.jsonl", "similarity_hist.csv"] {
            assert!(out.join(f).exists(), "{f}");
        }
        let summary = report_summary(&out, false).unwrap();
        assert_eq!(summary.campaigns, 5);
        assert!(summary.render().contains("mean campaign size"));
    }

    #[test]
    fn missing_embeddings_fails_at_align() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = bundle(tmp.path());
        config.embeddings = Some(tmp.path().join("nope.emb1"));
        match run_pipeline(&config, 1) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "align"),
            other => panic!("{other:?}"),
        }
        let m: RunManifest =
            serde_json::from_reader(File::open(tmp.path().join("out").join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(m.failed_stage.as_deref(), Some("align"));
        assert!(tmp.path().join("out/corpus.bin").exists());
    }

    #[test]
    fn tampering_is_detected() {
        let tmp = tempfile::tempdir().unwrap();
        let config = bundle(tmp.path());
        run_pipeline(&config, 1).unwrap();
        fs::write(tmp.path().join("posts.jsonl"), "{}\n").unwrap();
        let out = tmp.path().join("out");
        assert!(report_summary(&out, false).is_err());
        assert!(report_summary(&out, true).is_ok());
    }

    #[test]
    fn config_paths_resolve_against_file() {
        let c = RunConfig::from_toml("posts = \"p.jsonl\"\ntheta = 0.9\ngrouping = \"clique\"\n", Path::new("/data")).unwrap();
        assert_eq!(c.posts.unwrap(), PathBuf::from("/data/p.jsonl"));
        assert_eq!(c.theta, 0.9);
        assert_eq!(c.grouping, Grouping::Clique);
        assert!(RunConfig::from_toml("thetaa = 1", Path::new(".")).is_err());
    }
}
