//! Evaluation tooling: calibration and audit sheets, the planted synthetic
//! corpus generator, the brute-force graph oracle and detection scoring.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::io::{Read, Write};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accounts::{CoParticipationGraph, Labels, Leaning};
use crate::campaigns::{Campaign, DEFAULT_MIN_SIZE};
use crate::corpus::{normalize_text, parse_timestamp, Platform, Post, PostCollection, SourceKey};
use crate::embedstore::{AlignedCorpus, EmbeddingMatrix};
use crate::error::{Error, IoContext, Result};
use crate::simgraph::{Component, Edge, SimilarityGraph};

pub const ORACLE_ROW_GUARD: usize = 20_000;
pub const CALIBRATION_START: f64 = 0.5;
pub const CALIBRATION_STEP: f64 = 0.05;

// ---------------------------------------------------------------------------
// Calibration sheet

/// Half-open cosine band `[low, high)`; the top band also includes `high`
/// when it reaches 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

impl Band {
    pub fn contains(&self, score: f64) -> bool {
        score >= self.low && (score < self.high || (self.high >= 1.0 && score <= self.high))
    }
}

/// Bands from `start` in steps of `step` up to 1.0.
pub fn bands(start: f64, step: f64) -> Vec<Band> {
    let count = ((1.0 - start) / step).round() as usize;
    (0..count)
        .map(|i| Band {
            low: start + i as f64 * step,
            high: if i + 1 == count { 1.0 } else { start + (i + 1) as f64 * step },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPair {
    pub post_a: String,
    pub post_b: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBand {
    pub band: Band,
    pub pairs: Vec<CalibrationPair>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSheet {
    pub seed: u64,
    pub per_band: usize,
    pub bands: Vec<CalibrationBand>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn pair_key(seed: u64, a: usize, b: usize) -> u64 {
    splitmix(splitmix(seed ^ a as u64).wrapping_add(b as u64))
}

fn keep_smallest(list: &mut Vec<(u64, u32, u32, f64)>, k: usize) {
    if list.len() > 2 * k {
        list.sort_unstable_by_key(|x| (x.0, x.1, x.2));
        list.truncate(k);
    }
}

/// Uniform sample without replacement of up to `per_band` pairs per band.
///
/// Every pair gets a seeded pseudo-random key and each band keeps its
/// `per_band` smallest keys, so the draw is independent of scheduling.
pub fn sample_calibration_pairs(corpus: &AlignedCorpus, bands: &[Band], per_band: usize, seed: u64) -> Result<CalibrationSheet> {
    if per_band == 0 {
        return Err(Error::InvalidArgument("per_band must be at least 1".into()));
    }
    let matrix = corpus.matrix();
    let n = matrix.len();
    let merged = (0..n)
        .into_par_iter()
        .fold(
            || vec![Vec::new(); bands.len()],
            |mut acc: Vec<Vec<(u64, u32, u32, f64)>>, a| {
                let u = matrix.row(a);
                for b in a + 1..n {
                    let score = crate::embedstore::dot(u, matrix.row(b));
                    if let Some(i) = bands.iter().position(|band| band.contains(score)) {
                        acc[i].push((pair_key(seed, a, b), a as u32, b as u32, score));
                        keep_smallest(&mut acc[i], per_band);
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![Vec::new(); bands.len()],
            |mut x, y| {
                for (xs, ys) in x.iter_mut().zip(y) {
                    xs.extend(ys);
                    keep_smallest(xs, per_band);
                }
                x
            },
        );
    let bands = bands
        .iter()
        .zip(merged)
        .map(|(&band, mut found)| {
            found.sort_unstable_by_key(|x| (x.0, x.1, x.2));
            found.truncate(per_band);
            let note = match found.len() {
                0 => Some("no pairs in this band".to_string()),
                k if k < per_band => Some(format!("only {k} pairs in this band")),
                _ => None,
            };
            CalibrationBand {
                band,
                pairs: found
                    .into_iter()
                    .map(|(_, a, b, score)| CalibrationPair {
                        post_a: corpus.post(a as usize).post_id.clone(),
                        post_b: corpus.post(b as usize).post_id.clone(),
                        score,
                    })
                    .collect(),
                note,
            }
        })
        .collect();
    Ok(CalibrationSheet { seed, per_band, bands })
}

impl CalibrationSheet {
    /// CSV `band_low,band_high,post_a,post_b,score,text_a,text_b,label`.
    pub fn write_csv<W: Write>(&self, posts: &PostCollection, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["band_low", "band_high", "post_a", "post_b", "score", "text_a", "text_b", "label"])?;
        let text = |id: &str| posts.get(id).map(|p| p.text_norm.clone()).unwrap_or_default();
        for band in &self.bands {
            for p in &band.pairs {
                w.write_record([
                    format!("{:.2}", band.band.low),
                    format!("{:.2}", band.band.high),
                    p.post_a.clone(),
                    p.post_b.clone(),
                    format!("{:.6}", p.score),
                    text(&p.post_a),
                    text(&p.post_b),
                    String::new(),
                ])?;
            }
        }
        w.flush().at("<calibration sheet>")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandLabelSummary {
    pub band_low: f64,
    pub labeled: usize,
    pub positive: usize,
    pub positive_fraction: f64,
}

/// Summarizes a human-labeled calibration sheet: fraction labeled 1 per band.
pub fn summarize_calibration_labels<R: Read>(input: R) -> Result<Vec<BandLabelSummary>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("calibration sheet lacks a {name:?} column")))
    };
    let (band_col, label_col) = (col("band_low")?, col("label")?);
    let mut by_band: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let label = record.get(label_col).unwrap_or("");
        if label.is_empty() {
            continue;
        }
        let entry = by_band.entry(record[band_col].to_string()).or_default();
        entry.0 += 1;
        entry.1 += usize::from(parse_binary(label)?);
    }
    by_band
        .into_iter()
        .map(|(band, (labeled, positive))| {
            Ok(BandLabelSummary {
                band_low: band
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad band {band:?}")))?,
                labeled,
                positive,
                positive_fraction: positive as f64 / labeled as f64,
            })
        })
        .collect()
}

fn parse_binary(label: &str) -> Result<bool> {
    match label {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(Error::InvalidArgument(format!("label {other:?} is not 0 or 1"))),
    }
}

// ---------------------------------------------------------------------------
// Campaign audit sheet

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSheet {
    pub seed: u64,
    pub campaign_ids: Vec<String>,
}

/// Draws `n` campaigns without replacement for manual review.
pub fn sample_campaign_audit(campaigns: &[Campaign], n: usize, seed: u64) -> Result<AuditSheet> {
    if n > campaigns.len() {
        return Err(Error::InvalidArgument(format!(
            "audit sample of {n} exceeds the {} campaigns available",
            campaigns.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, campaigns.len(), n).into_vec();
    picked.sort_unstable();
    Ok(AuditSheet {
        seed,
        campaign_ids: picked.into_iter().map(|i| campaigns[i].campaign_id.clone()).collect(),
    })
}

impl AuditSheet {
    /// CSV `campaign_id,member_index,post_id,text,label,label_b`; one row per
    /// member. Annotators fill the label columns on any row of a campaign.
    pub fn write_csv<W: Write>(&self, campaigns: &[Campaign], posts: &PostCollection, out: W) -> Result<()> {
        let by_id: HashMap<&str, &Campaign> = campaigns.iter().map(|c| (c.campaign_id.as_str(), c)).collect();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["campaign_id", "member_index", "post_id", "text", "label", "label_b"])?;
        for id in &self.campaign_ids {
            let c = by_id.get(id.as_str()).ok_or_else(|| Error::UnknownCampaign(id.clone()))?;
            for (i, m) in c.members.iter().enumerate() {
                let text = posts.get(m).map(|p| p.text_norm.as_str()).unwrap_or("");
                w.write_record([id.as_str(), &i.to_string(), m, text, "", ""])?;
            }
        }
        w.flush().at("<audit sheet>")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub campaigns: usize,
    pub positive_a: usize,
    /// Set when a second annotator column is filled.
    pub agreement: Option<f64>,
    /// Campaigns both annotators marked 1 (disagreements count as 0).
    pub conservative_positive: Option<usize>,
    pub conservative_fraction: Option<f64>,
}

pub fn summarize_audit_labels<R: Read>(input: R) -> Result<AuditSummary> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let id_col = find("campaign_id").ok_or_else(|| Error::InvalidArgument("audit sheet lacks campaign_id".into()))?;
    let a_col = find("label").ok_or_else(|| Error::InvalidArgument("audit sheet lacks label".into()))?;
    let b_col = find("label_b");
    let mut labels: BTreeMap<String, (Option<bool>, Option<bool>)> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let entry = labels.entry(record[id_col].to_string()).or_default();
        if let Some(v) = record.get(a_col).filter(|s| !s.is_empty()) {
            entry.0.get_or_insert(parse_binary(v)?);
        }
        if let Some(v) = b_col.and_then(|c| record.get(c)).filter(|s| !s.is_empty()) {
            entry.1.get_or_insert(parse_binary(v)?);
        }
    }
    let labeled: Vec<(bool, Option<bool>)> = labels.values().filter_map(|(a, b)| a.map(|a| (a, *b))).collect();
    let both: Vec<(bool, bool)> = labeled.iter().filter_map(|&(a, b)| b.map(|b| (a, b))).collect();
    let (agreement, conservative_positive, conservative_fraction) = if both.is_empty() {
        (None, None, None)
    } else {
        let agree = both.iter().filter(|(a, b)| a == b).count();
        let positive = both.iter().filter(|(a, b)| *a && *b).count();
        (
            Some(agree as f64 / both.len() as f64),
            Some(positive),
            Some(positive as f64 / both.len() as f64),
        )
    };
    Ok(AuditSummary {
        campaigns: labeled.len(),
        positive_a: labeled.iter().filter(|(a, _)| *a).count(),
        agreement,
        conservative_positive,
        conservative_fraction,
    })
}

// ---------------------------------------------------------------------------
// Synthetic corpus with planted campaigns

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub posts: usize,
    pub dim: usize,
    pub campaigns: usize,
    pub min_campaign_size: usize,
    pub max_campaign_size: usize,
    /// Floor on every within-campaign cosine.
    pub c_in: f64,
    /// Ceiling on every cross-campaign and noise cosine.
    pub c_out: f64,
    /// Share of members (after the first) that copy an earlier member.
    pub duplicate_fraction: f64,
    /// Share of members that reuse another member's source.
    pub same_source_fraction: f64,
    /// Campaign platform profile weights: Twitter only, Facebook only, cross.
    pub platform_mix: [f64; 3],
    /// Share of Facebook posts among noise and cross-platform campaign members.
    pub facebook_fraction: f64,
    pub start: String,
    pub span_days: u32,
    pub campaign_duration_days: u32,
    /// Size rule the truth is scored against.
    pub min_size: usize,
    /// Optional event tags assigned round-robin to campaigns and noise.
    pub events: Vec<String>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            posts: 10_000,
            dim: 64,
            campaigns: 50,
            min_campaign_size: 10,
            max_campaign_size: 100,
            c_in: 0.86,
            c_out: 0.80,
            duplicate_fraction: 0.5,
            same_source_fraction: 0.0,
            platform_mix: [0.65, 0.05, 0.30],
            facebook_fraction: 0.3,
            start: "2021-01-01T00:00:00Z".into(),
            span_days: 60,
            campaign_duration_days: 7,
            min_size: DEFAULT_MIN_SIZE,
            events: Vec::new(),
        }
    }
}

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<SynthConfig> {
        Ok(toml::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCampaign {
    pub index: usize,
    /// All generated member ids.
    pub members: Vec<String>,
    /// Members left after the one-post-per-source rule.
    pub expected_members: Vec<String>,
    pub half_angle: f64,
    pub duplicates: usize,
    pub same_source_members: usize,
    pub platform_profile: String,
    pub start: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub seed: u64,
    pub config: SynthConfig,
    pub min_size: usize,
    pub campaigns: Vec<PlantedCampaign>,
    pub noise: Vec<String>,
}

impl PlantedTruth {
    /// Planted campaigns that survive dedup and the size rule.
    pub fn detectable(&self) -> impl Iterator<Item = &PlantedCampaign> {
        self.campaigns.iter().filter(move |c| c.expected_members.len() >= self.min_size)
    }
}

pub struct SyntheticCorpus {
    pub posts: PostCollection,
    pub matrix: EmbeddingMatrix,
    pub truth: PlantedTruth,
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn dot64(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Unit vector at angle `alpha` from `center`, in a random direction.
fn perturb(rng: &mut ChaCha8Rng, center: &[f64], alpha: f64) -> Vec<f64> {
    loop {
        let mut u = random_unit(rng, center.len());
        let along = dot64(&u, center);
        for (x, c) in u.iter_mut().zip(center) {
            *x -= along * c;
        }
        let norm = dot64(&u, &u).sqrt();
        if norm < 1e-6 {
            continue;
        }
        let (s, c) = alpha.sin_cos();
        return center.iter().zip(&u).map(|(ci, ui)| c * ci + s * ui / norm).collect();
    }
}

fn to_unit_f32(v: &[f64]) -> Vec<f32> {
    let norm = dot64(v, v).sqrt();
    v.iter().map(|x| (x / norm) as f32).collect()
}

struct Draft {
    vector: Vec<f32>,
    text: String,
    platform: Platform,
    source: String,
    timestamp: i64,
    event: Option<String>,
    campaign: Option<usize>,
}

const CLAIMS: [&str; 8] = [
    "the new law protects everyone",
    "farmers deserve a fair price",
    "this policy will hurt the poor",
    "support the protest today",
    "the government must listen",
    "spread the truth about the bill",
    "our leader is working for the nation",
    "they are misleading the public",
];
const FRAMES: [&str; 6] = ["Breaking:", "Please share:", "Read this:", "Truth:", "Must watch:", "Important:"];

/// Generates posts, unit embeddings and the planted ground truth.
///
/// Campaign members lie in a cone of half-angle `acos(c_in)/2` around a
/// campaign center, so every within-campaign cosine is at least `c_in`.
/// Centers are rejection-sampled to be at least `acos(c_out) + 2·half_angle`
/// apart, noise points at least `acos(c_out) + half_angle` from every center
/// and `acos(c_out)` from each other, which bounds every other cosine by
/// `c_out`.
pub fn generate_synthetic(config: &SynthConfig, seed: u64) -> Result<SyntheticCorpus> {
    validate_synth(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = config.dim;
    let margin = 2e-3;
    let half_angle = (config.c_in.acos() - margin).max(0.0) / 2.0;
    let sep_out = config.c_out.acos() + margin;
    let center_cos_max = (sep_out + 2.0 * half_angle).min(std::f64::consts::PI).cos();
    let noise_center_cos_max = (sep_out + half_angle).min(std::f64::consts::PI).cos();
    let noise_cos_max = sep_out.cos();
    let start = parse_timestamp(&config.start)
        .ok_or_else(|| Error::InvalidArgument(format!("bad start timestamp {:?}", config.start)))?;
    let span = i64::from(config.span_days.max(1)) * 86_400;
    let duration = (i64::from(config.campaign_duration_days.max(1)) * 86_400).min(span);

    let sizes: Vec<usize> = (0..config.campaigns)
        .map(|_| rng.random_range(config.min_campaign_size..=config.max_campaign_size))
        .collect();
    let planted_posts: usize = sizes.iter().sum();
    if planted_posts > config.posts {
        return Err(Error::Infeasible(format!(
            "{planted_posts} campaign posts do not fit in a corpus of {}",
            config.posts
        )));
    }

    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(config.campaigns);
    let attempts_per_center = 20_000;
    for k in 0..config.campaigns {
        let mut tries = 0;
        loop {
            tries += 1;
            if tries > attempts_per_center {
                return Err(Error::Infeasible(format!(
                    "could not place campaign center {k} with cosine <= {center_cos_max:.3} to the others in dim {dim}; use a larger dim"
                )));
            }
            let c = random_unit(&mut rng, dim);
            if centers.iter().all(|o| dot64(o, &c) <= center_cos_max) {
                centers.push(c);
                break;
            }
        }
    }

    let event_for = |i: usize| -> Option<String> {
        (!config.events.is_empty()).then(|| config.events[i % config.events.len()].clone())
    };
    let pick_platform = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(config.facebook_fraction.clamp(0.0, 1.0)) {
            Platform::Facebook
        } else {
            Platform::Twitter
        }
    };
    let source_name = |platform: &Platform, n: usize| match platform {
        Platform::Facebook => format!("group{n}"),
        _ => format!("acct{n}"),
    };

    let mut drafts: Vec<Draft> = Vec::with_capacity(config.posts);
    let mut source_counter = 0usize;
    let mut planted_meta = Vec::with_capacity(config.campaigns);
    let mix_total: f64 = config.platform_mix.iter().sum();
    for (k, (&size, center)) in sizes.iter().zip(&centers).enumerate() {
        let roll = rng.random::<f64>() * mix_total;
        let profile = if roll < config.platform_mix[0] {
            "twitter_only"
        } else if roll < config.platform_mix[0] + config.platform_mix[1] {
            "facebook_only"
        } else {
            "cross"
        };
        let c_start = start + rng.random_range(0..=(span - duration).max(0));
        let duplicates = (config.duplicate_fraction * (size - 1) as f64).round() as usize;
        let same_source = (config.same_source_fraction * size as f64).round() as usize;
        let claim = CLAIMS[k % CLAIMS.len()];
        let first = drafts.len();
        for m in 0..size {
            let platform = match profile {
                "twitter_only" => Platform::Twitter,
                "facebook_only" => Platform::Facebook,
                _ if m == 0 => Platform::Twitter,
                _ if m == 1 => Platform::Facebook,
                _ => pick_platform(&mut rng),
            };
            let timestamp = c_start + rng.random_range(0..duration);
            let source = source_name(&platform, source_counter);
            source_counter += 1;
            let is_duplicate = m > 0 && m >= size - duplicates;
            let (vector, text) = if is_duplicate {
                let original = first + rng.random_range(0..(size - duplicates).max(1));
                (drafts[original].vector.clone(), drafts[original].text.clone())
            } else {
                let alpha = half_angle * rng.random::<f64>().sqrt();
                let v = to_unit_f32(&perturb(&mut rng, center, alpha));
                let frame = FRAMES[m % FRAMES.len()];
                (v, format!("{frame} {claim} #c{k} v{m}"))
            };
            drafts.push(Draft {
                vector,
                text,
                platform,
                source,
                timestamp,
                event: event_for(k),
                campaign: Some(k),
            });
        }
        // Reuse sources within the campaign so the dedup rule has work to do.
        let members: Vec<usize> = (first..first + size).collect();
        let mut reusers = members.clone();
        reusers.shuffle(&mut rng);
        for &r in reusers.iter().take(same_source.min(size.saturating_sub(1))) {
            let donor = members[rng.random_range(0..size)];
            if donor != r {
                drafts[r].source = drafts[donor].source.clone();
                drafts[r].platform = drafts[donor].platform.clone();
            }
        }
        planted_meta.push((profile.to_string(), c_start, duplicates, same_source));
    }

    let noise_count = config.posts - planted_posts;
    let mut noise_vectors: Vec<Vec<f64>> = Vec::with_capacity(noise_count);
    for _ in 0..noise_count {
        noise_vectors.push(draw_noise(&mut rng, dim, &centers, noise_center_cos_max)?);
    }
    // Pairwise noise separation: resample violators until none remain.
    for round in 0.. {
        let violators = noise_violators(&noise_vectors, noise_cos_max);
        if violators.is_empty() {
            break;
        }
        if round >= 50 {
            return Err(Error::Infeasible(format!(
                "{} noise posts still closer than cosine {noise_cos_max:.3} in dim {dim}; use a larger dim",
                violators.len()
            )));
        }
        for v in violators {
            noise_vectors[v] = draw_noise(&mut rng, dim, &centers, noise_center_cos_max)?;
        }
    }
    for (i, v) in noise_vectors.iter().enumerate() {
        let platform = pick_platform(&mut rng);
        let source = source_name(&platform, source_counter);
        source_counter += 1;
        drafts.push(Draft {
            vector: to_unit_f32(v),
            text: format!("{} unrelated note {i}", FRAMES[i % FRAMES.len()]),
            platform,
            source,
            timestamp: start + rng.random_range(0..span),
            event: event_for(i),
            campaign: None,
        });
    }

    drafts.shuffle(&mut rng);
    let mut posts = Vec::with_capacity(drafts.len());
    let mut rows = Vec::with_capacity(drafts.len());
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); config.campaigns];
    let mut noise = Vec::new();
    for (row, d) in drafts.into_iter().enumerate() {
        let post_id = format!("p{row:06}");
        match d.campaign {
            Some(k) => members[k].push(row),
            None => noise.push(post_id.clone()),
        }
        posts.push(Post {
            source_key: SourceKey::new(d.platform.clone(), &d.source).expect("non-empty"),
            platform: d.platform,
            text_norm: normalize_text(&d.text),
            text_raw: d.text,
            timestamp: d.timestamp,
            language_hint: Some("en".into()),
            event: d.event,
            post_id: post_id.clone(),
        });
        rows.push((post_id, d.vector));
    }
    let campaigns = members
        .into_iter()
        .zip(planted_meta)
        .enumerate()
        .map(|(index, (rows, (profile, c_start, duplicates, same_source)))| {
            let mut ordered = rows.clone();
            ordered.sort_by(|&x, &y| {
                posts[x]
                    .timestamp
                    .cmp(&posts[y].timestamp)
                    .then_with(|| posts[x].post_id.cmp(&posts[y].post_id))
            });
            let mut seen = HashSet::new();
            let expected_members = ordered
                .iter()
                .filter(|&&r| seen.insert(posts[r].source_key.clone()))
                .map(|&r| posts[r].post_id.clone())
                .collect();
            PlantedCampaign {
                index,
                members: rows.iter().map(|&r| posts[r].post_id.clone()).collect(),
                expected_members,
                half_angle,
                duplicates,
                same_source_members: same_source,
                platform_profile: profile,
                start: c_start,
            }
        })
        .collect();
    Ok(SyntheticCorpus {
        posts: PostCollection::new(posts)?,
        matrix: EmbeddingMatrix::from_rows(dim, rows)?,
        truth: PlantedTruth {
            seed,
            config: config.clone(),
            min_size: config.min_size,
            campaigns,
            noise,
        },
    })
}

fn validate_synth(config: &SynthConfig) -> Result<()> {
    let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
    if config.dim < 2 {
        return bad("dim must be at least 2");
    }
    if !(config.c_out < config.c_in && config.c_in < 1.0 && config.c_out > -1.0) {
        return bad("need -1 < c_out < c_in < 1");
    }
    if config.campaigns > 0 && (config.min_campaign_size < 1 || config.min_campaign_size > config.max_campaign_size) {
        return bad("campaign size range is empty");
    }
    if !(0.0..=1.0).contains(&config.duplicate_fraction) || !(0.0..=1.0).contains(&config.same_source_fraction) {
        return bad("fractions must lie in [0, 1]");
    }
    if config.platform_mix.iter().any(|&w| w < 0.0) || config.platform_mix.iter().sum::<f64>() <= 0.0 {
        return bad("platform_mix weights must be non-negative and not all zero");
    }
    Ok(())
}

fn draw_noise(rng: &mut ChaCha8Rng, dim: usize, centers: &[Vec<f64>], max_cos: f64) -> Result<Vec<f64>> {
    for _ in 0..20_000 {
        let v = random_unit(rng, dim);
        if centers.iter().all(|c| dot64(c, &v) <= max_cos) {
            return Ok(v);
        }
    }
    Err(Error::Infeasible(format!(
        "no room for noise posts away from {} campaign cones in dim {dim}; use a larger dim",
        centers.len()
    )))
}

/// Later member of each noise pair whose cosine exceeds `max_cos`.
fn noise_violators(vectors: &[Vec<f64>], max_cos: f64) -> Vec<usize> {
    let mut out: Vec<usize> = (0..vectors.len())
        .into_par_iter()
        .filter(|&j| (0..j).any(|i| dot64(&vectors[i], &vectors[j]) > max_cos))
        .collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorCheck {
    pub posts_checked: usize,
    pub exhaustive: bool,
    pub min_within: Option<f64>,
    pub max_cross: Option<f64>,
    pub within_violations: usize,
    pub cross_violations: usize,
}

/// Checks the planted pairwise constraints on the generated vectors:
/// exhaustively up to `exhaustive_limit` posts, on a seeded subsample above.
pub fn verify_generated(
    synthetic: &SyntheticCorpus,
    exhaustive_limit: usize,
    seed: u64,
) -> GeneratorCheck {
    let n = synthetic.matrix.len();
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for c in &synthetic.truth.campaigns {
        for m in &c.members {
            owner.insert(m.as_str(), c.index);
        }
    }
    let exhaustive = n <= exhaustive_limit;
    let rows: Vec<usize> = if exhaustive {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, n, exhaustive_limit).into_vec();
        picked.sort_unstable();
        picked
    };
    let group = |r: usize| owner.get(synthetic.matrix.ids()[r].as_str()).copied();
    let (c_in, c_out) = (synthetic.truth.config.c_in, synthetic.truth.config.c_out);
    let mut check = GeneratorCheck {
        posts_checked: rows.len(),
        exhaustive,
        min_within: None,
        max_cross: None,
        within_violations: 0,
        cross_violations: 0,
    };
    for (i, &a) in rows.iter().enumerate() {
        for &b in &rows[i + 1..] {
            let mut s = 0.0f64;
            for (x, y) in synthetic.matrix.row(a).iter().zip(synthetic.matrix.row(b)) {
                s += f64::from(*x) * f64::from(*y);
            }
            match (group(a), group(b)) {
                (Some(x), Some(y)) if x == y => {
                    check.min_within = Some(check.min_within.map_or(s, |m: f64| m.min(s)));
                    check.within_violations += usize::from(s < c_in);
                }
                _ => {
                    check.max_cross = Some(check.max_cross.map_or(s, |m: f64| m.max(s)));
                    check.cross_violations += usize::from(s > c_out);
                }
            }
        }
    }
    check
}

// ---------------------------------------------------------------------------
// Two-community co-participation graphs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityConfig {
    pub nodes: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub seed_fraction: f64,
}

impl Default for CommunityConfig {
    fn default() -> Self {
        CommunityConfig {
            nodes: 200,
            p_in: 0.3,
            p_out: 0.01,
            seed_fraction: 0.1,
        }
    }
}

pub struct PlantedCommunities {
    pub graph: CoParticipationGraph,
    pub seeds: Labels,
    pub held_out: Labels,
}

/// Splits `nodes` into a BJP_SUPPORTER half and a BJP_OPPOSITION half with
/// Bernoulli edges (weight 1) and draws `seed_fraction` of each half as seeds.
pub fn planted_communities(config: &CommunityConfig, seed: u64) -> PlantedCommunities {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.nodes;
    let half = n / 2;
    let truth = |i: usize| if i < half { Leaning::BjpSupporter } else { Leaning::BjpOpposition };
    let nodes: Vec<SourceKey> = (0..n)
        .map(|i| SourceKey::new(Platform::Twitter, &format!("acct{i:04}")).expect("non-empty"))
        .collect();
    let mut weights = HashMap::new();
    for a in 0..n {
        for b in a + 1..n {
            let p = if truth(a) == truth(b) { config.p_in } else { config.p_out };
            if rng.random_bool(p) {
                weights.insert((a as u32, b as u32), 1u32);
            }
        }
    }
    let mut seeds = Labels::new();
    let mut held_out = Labels::new();
    for side in [0..half, half..n] {
        let len = side.len();
        let take = ((len as f64) * config.seed_fraction).round() as usize;
        let picked: HashSet<usize> = index::sample(&mut rng, len, take.min(len))
            .into_iter()
            .map(|i| side.start + i)
            .collect();
        for i in side {
            let target = if picked.contains(&i) { &mut seeds } else { &mut held_out };
            target.insert(nodes[i].clone(), truth(i));
        }
    }
    let mut counts = vec![0usize; n];
    for &(a, b) in weights.keys() {
        counts[a as usize] += 1;
        counts[b as usize] += 1;
    }
    PlantedCommunities {
        graph: CoParticipationGraph::from_parts(nodes, counts.into_iter().map(|c| c.max(1)).collect(), weights),
        seeds,
        held_out,
    }
}

// ---------------------------------------------------------------------------
// Brute-force oracle

pub struct OracleOutput {
    pub graph: SimilarityGraph,
    pub components: Vec<Component>,
}

/// Naive all-pairs graph and breadth-first components, independent of the
/// blocked sweep and union-find used by the engine.
pub fn brute_force_oracle(matrix: &EmbeddingMatrix, theta: f64, allow_large: bool) -> Result<OracleOutput> {
    let n = matrix.len();
    if n > ORACLE_ROW_GUARD && !allow_large {
        return Err(Error::InvalidArgument(format!(
            "oracle refused {n} rows (guard {ORACLE_ROW_GUARD}); pass the override to force it"
        )));
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let mut s = 0.0f64;
            for k in 0..matrix.dim() {
                s += f64::from(matrix.row(a)[k]) * f64::from(matrix.row(b)[k]);
            }
            if s >= theta {
                edges.push(Edge {
                    a: a as u32,
                    b: b as u32,
                    score: s,
                });
            }
        }
    }
    let graph = SimilarityGraph::from_edges(n, theta, edges)?;
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in graph.edges() {
        neighbors[e.a as usize].push(e.b);
        neighbors[e.b as usize].push(e.a);
    }
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] || neighbors[start].is_empty() {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut nodes = Vec::new();
        while let Some(v) = queue.pop_front() {
            nodes.push(v as u32);
            for &u in &neighbors[v] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    queue.push_back(u as usize);
                }
            }
        }
        nodes.sort_unstable();
        let member: HashSet<u32> = nodes.iter().copied().collect();
        let edge_count = nodes
            .iter()
            .map(|&v| neighbors[v as usize].iter().filter(|u| member.contains(u)).count())
            .sum::<usize>()
            / 2;
        let k = nodes.len();
        components.push(Component {
            nodes,
            is_clique: edge_count == k * (k - 1) / 2,
            edge_count,
        });
    }
    components.sort_by(|x, y| y.len().cmp(&x.len()).then(x.nodes[0].cmp(&y.nodes[0])));
    Ok(OracleOutput { graph, components })
}

// ---------------------------------------------------------------------------
// Detection scoring

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub planted: usize,
    pub matched: Option<String>,
    pub best_jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    pub detected: usize,
    pub planted: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub table: Vec<MatchRow>,
}

fn jaccard(overlap: usize, a: usize, b: usize) -> f64 {
    let union = a + b - overlap;
    if union == 0 {
        0.0
    } else {
        overlap as f64 / union as f64
    }
}

/// Greedy one-to-one matching by descending Jaccard; pairs below
/// `match_threshold` never match. Empty denominators report 0.
pub fn score_detection(detected: &[Campaign], truth: &PlantedTruth, match_threshold: f64) -> Result<DetectionScore> {
    if !(match_threshold > 0.0 && match_threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("match threshold {match_threshold} outside (0, 1]")));
    }
    let planted: Vec<&PlantedCampaign> = truth.detectable().collect();
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (t, c) in planted.iter().enumerate() {
        for m in &c.expected_members {
            owner.insert(m.as_str(), t);
        }
    }
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    let mut best = vec![0.0f64; planted.len()];
    for (d, c) in detected.iter().enumerate() {
        let mut overlaps: BTreeMap<usize, usize> = BTreeMap::new();
        for m in &c.members {
            if let Some(&t) = owner.get(m.as_str()) {
                *overlaps.entry(t).or_default() += 1;
            }
        }
        for (t, overlap) in overlaps {
            let j = jaccard(overlap, c.members.len(), planted[t].expected_members.len());
            best[t] = best[t].max(j);
            candidates.push((j, t, d));
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut planted_used = vec![None; planted.len()];
    let mut detected_used = vec![false; detected.len()];
    for (j, t, d) in candidates {
        if j + 1e-12 < match_threshold || planted_used[t].is_some() || detected_used[d] {
            continue;
        }
        planted_used[t] = Some(d);
        detected_used[d] = true;
    }
    let matched = planted_used.iter().filter(|m| m.is_some()).count();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(matched, detected.len());
    let recall = ratio(matched, planted.len());
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(DetectionScore {
        detected: detected.len(),
        planted: planted.len(),
        matched,
        precision,
        recall,
        f1,
        table: planted
            .iter()
            .enumerate()
            .map(|(t, c)| MatchRow {
                planted: c.index,
                matched: planted_used[t].map(|d| detected[d].campaign_id.clone()),
                best_jaccard: best[t],
            })
            .collect(),
    })
}
