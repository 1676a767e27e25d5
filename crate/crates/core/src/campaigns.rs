//! Campaign extraction (per-source dedup and size rule) and campaign-level
//! statistics.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Platform, SourceKey};
use crate::embedstore::AlignedCorpus;
use crate::error::{Error, IoContext, Result};
use crate::simgraph::{CliqueSet, Component, SimilarityGraph};

pub const DEFAULT_MIN_SIZE: usize = 10;
pub const SIMILARITY_BIN_WIDTH: f64 = 0.005;
/// Scores at or above `1 - DUPLICATE_EPSILON` count as exact duplicates;
/// identical f32 unit vectors do not always dot to exactly 1.0.
const DUPLICATE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    #[default]
    Component,
    Clique,
}

impl std::str::FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "component" => Ok(Grouping::Component),
            "clique" => Ok(Grouping::Clique),
            other => Err(Error::InvalidArgument(format!("unknown grouping {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlatformSpread {
    TwitterOnly,
    FacebookOnly,
    /// A single platform other than Twitter or Facebook.
    OtherOnly,
    Cross,
}

/// One amplification campaign; also the `campaigns.jsonl` record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub campaign_id: String,
    pub size: usize,
    /// Post ids ordered by (timestamp, post_id).
    pub members: Vec<String>,
    /// Source of each member, index-aligned with `members`.
    pub sources: Vec<SourceKey>,
    pub platforms: BTreeSet<Platform>,
    pub platform_spread: PlatformSpread,
    pub unique_mutant_count: usize,
    pub unique_mutant_fraction: f64,
    pub representative_text: String,
    /// Distinct Facebook groups/pages among members.
    pub facebook_sources: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<String>,
}

/// Groups in component mode: one per component.
pub fn component_groups(components: &[Component]) -> Vec<Vec<u32>> {
    components.iter().map(|c| c.nodes.clone()).collect()
}

/// Groups in clique mode. Maximal cliques may overlap, so nodes are assigned
/// greedily to the largest clique first (ties lexicographic); a clique keeps
/// only its not-yet-assigned nodes, which still form a clique.
pub fn clique_groups(clique_sets: &[CliqueSet]) -> Vec<Vec<u32>> {
    let mut all: Vec<&Vec<u32>> = clique_sets.iter().flat_map(|s| s.cliques.iter()).collect();
    all.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x.cmp(y)));
    let mut taken = HashSet::new();
    let mut groups = Vec::new();
    for clique in all {
        let rest: Vec<u32> = clique.iter().copied().filter(|v| !taken.contains(v)).collect();
        if rest.len() >= 2 {
            taken.extend(rest.iter().copied());
            groups.push(rest);
        }
    }
    groups
}

pub fn campaign_id(members: &[String]) -> String {
    let mut sorted: Vec<&str> = members.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    let mut hasher = Sha256::new();
    for id in sorted {
        hasher.update(id.as_bytes());
        hasher.update([0]);
    }
    hex::encode(&hasher.finalize()[..8])
}

pub fn platform_spread_of<'a>(platforms: impl IntoIterator<Item = &'a Platform>) -> PlatformSpread {
    let set: BTreeSet<&Platform> = platforms.into_iter().collect();
    match set.len() {
        1 => match set.into_iter().next().expect("one") {
            Platform::Twitter => PlatformSpread::TwitterOnly,
            Platform::Facebook => PlatformSpread::FacebookOnly,
            Platform::Other(_) => PlatformSpread::OtherOnly,
        },
        _ => PlatformSpread::Cross,
    }
}

pub fn platform_spread(campaign: &Campaign) -> PlatformSpread {
    platform_spread_of(&campaign.platforms)
}

fn build_campaign(mut rows: Vec<u32>, corpus: &AlignedCorpus, min_size: usize) -> Option<Campaign> {
    rows.sort_by(|&x, &y| {
        let (px, py) = (corpus.post(x as usize), corpus.post(y as usize));
        px.timestamp.cmp(&py.timestamp).then_with(|| px.post_id.cmp(&py.post_id))
    });
    let mut seen = HashSet::new();
    rows.retain(|&r| seen.insert(&corpus.post(r as usize).source_key));
    if rows.len() < min_size || rows.is_empty() {
        return None;
    }
    let posts: Vec<_> = rows.iter().map(|&r| corpus.post(r as usize)).collect();
    let members: Vec<String> = posts.iter().map(|p| p.post_id.clone()).collect();
    let platforms: BTreeSet<Platform> = posts.iter().map(|p| p.platform.clone()).collect();
    let unique_mutant_count = posts.iter().map(|p| p.text_norm.as_str()).collect::<HashSet<_>>().len();
    let mut representative = posts[0];
    for p in &posts[1..] {
        if p.text_norm.chars().count() > representative.text_norm.chars().count() {
            representative = p;
        }
    }
    let events: BTreeSet<&String> = posts.iter().filter_map(|p| p.event.as_ref()).collect();
    Some(Campaign {
        campaign_id: campaign_id(&members),
        size: members.len(),
        platform_spread: platform_spread_of(&platforms),
        platforms,
        unique_mutant_count,
        unique_mutant_fraction: unique_mutant_count as f64 / members.len() as f64,
        representative_text: representative.text_norm.clone(),
        facebook_sources: posts
            .iter()
            .filter(|p| p.platform == Platform::Facebook)
            .count(),
        sources: posts.iter().map(|p| p.source_key.clone()).collect(),
        events: events.into_iter().cloned().collect(),
        members,
    })
}

/// Applies the one-post-per-source rule (earliest timestamp kept, ties by
/// post_id) and drops groups smaller than `min_size` after dedup. Output is
/// sorted by size descending, then campaign id.
pub fn extract_campaigns(groups: &[Vec<u32>], corpus: &AlignedCorpus, min_size: usize) -> Vec<Campaign> {
    let mut campaigns: Vec<Campaign> = groups
        .par_iter()
        .filter_map(|g| build_campaign(g.clone(), corpus, min_size))
        .collect();
    campaigns.sort_by(|x, y| y.size.cmp(&x.size).then_with(|| x.campaign_id.cmp(&y.campaign_id)));
    campaigns
}

/// Distinct normalized texts over campaign size, looked up in the corpus.
pub fn unique_mutant_fraction(campaign: &Campaign, corpus: &AlignedCorpus) -> Result<f64> {
    let mut texts = HashSet::new();
    for id in &campaign.members {
        let post = corpus
            .posts()
            .get(id)
            .ok_or_else(|| Error::InvalidArgument(format!("campaign member {id:?} not in corpus")))?;
        texts.insert(post.text_norm.as_str());
    }
    if campaign.members.is_empty() {
        return Err(Error::Empty("campaign has no members"));
    }
    Ok(texts.len() as f64 / campaign.members.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityHistogram {
    pub theta: f64,
    pub bin_width: f64,
    /// Bins `[theta + i*w, theta + (i+1)*w)`, followed by a final bin at 1.0
    /// holding exact duplicates.
    pub bins: Vec<HistogramBin>,
    pub pairs: usize,
}

impl SimilarityHistogram {
    pub fn new(theta: f64) -> SimilarityHistogram {
        let regular = ((1.0 - theta) / SIMILARITY_BIN_WIDTH).round().max(0.0) as usize;
        let mut bins: Vec<HistogramBin> = (0..regular)
            .map(|i| HistogramBin {
                low: theta + i as f64 * SIMILARITY_BIN_WIDTH,
                count: 0,
            })
            .collect();
        bins.push(HistogramBin { low: 1.0, count: 0 });
        SimilarityHistogram {
            theta,
            bin_width: SIMILARITY_BIN_WIDTH,
            bins,
            pairs: 0,
        }
    }

    pub fn bin_index(&self, score: f64) -> usize {
        let last = self.bins.len() - 1;
        if score >= 1.0 - DUPLICATE_EPSILON || last == 0 {
            return last;
        }
        let raw = ((score - self.theta) / self.bin_width + 1e-9).floor();
        (raw.max(0.0) as usize).min(last - 1)
    }

    pub fn add(&mut self, score: f64) {
        let i = self.bin_index(score);
        self.bins[i].count += 1;
        self.pairs += 1;
    }

    /// CSV `bin_low,count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["bin_low", "count"])?;
        for bin in &self.bins {
            writer.write_record([format!("{:.3}", bin.low), bin.count.to_string()])?;
        }
        writer.flush().at("<histogram>")?;
        Ok(())
    }
}

/// Histogram of edge scores between members of the same campaign.
pub fn similarity_distribution(
    campaigns: &[Campaign],
    graph: &SimilarityGraph,
    corpus: &AlignedCorpus,
) -> SimilarityHistogram {
    let mut owner: HashMap<u32, usize> = HashMap::new();
    for (i, c) in campaigns.iter().enumerate() {
        for id in &c.members {
            if let Some(row) = corpus.row_of(id) {
                owner.insert(row as u32, i);
            }
        }
    }
    let mut hist = SimilarityHistogram::new(graph.theta());
    for e in graph.edges() {
        match (owner.get(&e.a), owner.get(&e.b)) {
            (Some(x), Some(y)) if x == y => hist.add(e.score),
            _ => {}
        }
    }
    hist
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeBin {
    /// Inclusive lower bound; bins are `[low, 2*low)`.
    pub low: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionBin {
    pub low: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadCounts {
    pub twitter_only: usize,
    pub facebook_only: usize,
    pub other_only: usize,
    pub cross: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub campaign_count: usize,
    pub corpus_size: usize,
    pub messages_covered: usize,
    pub coverage: f64,
    pub mean_size: f64,
    pub median_size: f64,
    pub max_size: usize,
    pub campaigns_at_least_100: usize,
    pub size_histogram: Vec<SizeBin>,
    pub mean_unique_mutant_fraction: f64,
    pub unique_mutant_histogram: Vec<FractionBin>,
    pub platform_spread: SpreadCounts,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub similarity: Option<SimilarityHistogram>,
}

pub fn campaign_stats(campaigns: &[Campaign], corpus_size: usize, similarity: Option<SimilarityHistogram>) -> CampaignStats {
    let mut ordered: Vec<&Campaign> = campaigns.iter().collect();
    ordered.sort_by(|x, y| x.campaign_id.cmp(&y.campaign_id));
    let count = ordered.len();
    let covered: usize = ordered.iter().map(|c| c.size).sum();
    let mut sizes: Vec<usize> = ordered.iter().map(|c| c.size).collect();
    sizes.sort_unstable();
    let median = match count {
        0 => 0.0,
        n if n % 2 == 1 => sizes[n / 2] as f64,
        n => (sizes[n / 2 - 1] + sizes[n / 2]) as f64 / 2.0,
    };
    let mut size_histogram: Vec<SizeBin> = Vec::new();
    for &s in &sizes {
        let low = 1usize << (usize::BITS - 1 - s.max(1).leading_zeros());
        match size_histogram.last_mut() {
            Some(bin) if bin.low == low => bin.count += 1,
            _ => size_histogram.push(SizeBin { low, count: 1 }),
        }
    }
    let mut unique_mutant_histogram: Vec<FractionBin> = (0..10)
        .map(|i| FractionBin {
            low: i as f64 / 10.0,
            count: 0,
        })
        .collect();
    for c in &ordered {
        let i = ((c.unique_mutant_fraction * 10.0 + 1e-9).floor() as usize).min(9);
        unique_mutant_histogram[i].count += 1;
    }
    let mut spread = SpreadCounts {
        twitter_only: 0,
        facebook_only: 0,
        other_only: 0,
        cross: 0,
    };
    for c in &ordered {
        match c.platform_spread {
            PlatformSpread::TwitterOnly => spread.twitter_only += 1,
            PlatformSpread::FacebookOnly => spread.facebook_only += 1,
            PlatformSpread::OtherOnly => spread.other_only += 1,
            PlatformSpread::Cross => spread.cross += 1,
        }
    }
    let mean = |total: f64| if count == 0 { 0.0 } else { total / count as f64 };
    CampaignStats {
        campaign_count: count,
        corpus_size,
        messages_covered: covered,
        coverage: if corpus_size == 0 { 0.0 } else { covered as f64 / corpus_size as f64 },
        mean_size: mean(covered as f64),
        median_size: median,
        max_size: sizes.last().copied().unwrap_or(0),
        campaigns_at_least_100: sizes.iter().filter(|&&s| s >= 100).count(),
        size_histogram,
        mean_unique_mutant_fraction: mean(ordered.iter().map(|c| c.unique_mutant_fraction).sum()),
        unique_mutant_histogram,
        platform_spread: spread,
        similarity,
    }
}

pub fn write_campaigns<W: Write>(campaigns: &[Campaign], mut out: W) -> Result<()> {
    for c in campaigns {
        serde_json::to_writer(&mut out, c)?;
        out.write_all(b"\n").at("<campaigns>")?;
    }
    Ok(())
}

pub fn save_campaigns(campaigns: &[Campaign], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path).at(path)?);
    write_campaigns(campaigns, &mut out)?;
    out.flush().at(path)
}

pub fn load_campaigns(path: impl AsRef<Path>) -> Result<Vec<Campaign>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).at(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.at(path)?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{normalize_text, Post, PostCollection};
    use crate::embedstore::{align, AlignMode, EmbeddingMatrix};
    use crate::simgraph::Edge;
    use proptest::prelude::*;

    pub(crate) fn corpus(specs: &[(&str, Platform, &str, &str, i64)]) -> AlignedCorpus {
        let posts: Vec<Post> = specs
            .iter()
            .map(|(id, platform, source, text, ts)| Post {
                post_id: id.to_string(),
                platform: platform.clone(),
                source_key: SourceKey::new(platform.clone(), source).unwrap(),
                text_raw: text.to_string(),
                text_norm: normalize_text(text),
                timestamp: *ts,
                language_hint: None,
                event: None,
            })
            .collect();
        let matrix = EmbeddingMatrix::from_rows(
            1,
            posts.iter().map(|p| (p.post_id.clone(), vec![1.0])).collect(),
        )
        .unwrap();
        align(&PostCollection::new(posts).unwrap(), &matrix, AlignMode::Strict)
            .unwrap()
            .corpus
    }

    #[test]
    fn dedup_keeps_earliest_per_handle() {
        // 12 posts; p0, p5, p9 share "@x" with p9 the earliest.
        let mut specs = Vec::new();
        for i in 0..12 {
            let source = if [0, 5, 9].contains(&i) { "@X".to_string() } else { format!("u{i}") };
            let ts = if i == 9 { 10 } else { 100 + i as i64 };
            specs.push((format!("p{i}"), source, ts));
        }
        let specs: Vec<(&str, Platform, &str, &str, i64)> = specs
            .iter()
            .map(|(id, s, ts)| (id.as_str(), Platform::Twitter, s.as_str(), "claim", *ts))
            .collect();
        let c = corpus(&specs);
        let campaigns = extract_campaigns(&[(0..12).collect()], &c, 10);
        assert_eq!(campaigns.len(), 1);
        let camp = &campaigns[0];
        assert_eq!(camp.size, 10);
        assert!(camp.members.contains(&"p9".to_string()));
        assert!(!camp.members.contains(&"p0".to_string()));
        assert!(!camp.members.contains(&"p5".to_string()));
        assert_eq!(camp.members[0], "p9");
    }

    #[test]
    fn size_rule_boundaries() {
        let ten: Vec<(String, String)> = (0..10).map(|i| (format!("p{i}"), format!("u{i}"))).collect();
        let specs: Vec<_> = ten
            .iter()
            .map(|(id, s)| (id.as_str(), Platform::Twitter, s.as_str(), "t", 0))
            .collect();
        let c = corpus(&specs);
        assert_eq!(extract_campaigns(&[(0..10).collect()], &c, 10)[0].size, 10);

        let eleven: Vec<(String, String)> = (0..11).map(|i| (format!("p{i}"), format!("u{}", i % 4))).collect();
        let specs: Vec<_> = eleven
            .iter()
            .map(|(id, s)| (id.as_str(), Platform::Twitter, s.as_str(), "t", 0))
            .collect();
        let c = corpus(&specs);
        assert!(extract_campaigns(&[(0..11).collect()], &c, 10).is_empty());
    }

    #[test]
    fn mutant_fraction_and_spread() {
        let texts = ["a", "a", "b", "b", "c", "c", "d", "d", "d", "d"];
        let ids: Vec<String> = (0..10).map(|i| format!("p{i}")).collect();
        let srcs: Vec<String> = (0..10).map(|i| format!("u{i}")).collect();
        let specs: Vec<_> = (0..10)
            .map(|i| {
                let platform = if i == 3 { Platform::Facebook } else { Platform::Twitter };
                (ids[i].as_str(), platform, srcs[i].as_str(), texts[i], i as i64)
            })
            .collect();
        let c = corpus(&specs);
        let camp = &extract_campaigns(&[(0..10).collect()], &c, 10)[0];
        assert_eq!(unique_mutant_fraction(camp, &c).unwrap(), 0.4);
        assert_eq!(camp.unique_mutant_fraction, 0.4);
        assert_eq!(platform_spread(camp), PlatformSpread::Cross);
        assert_eq!(camp.facebook_sources, 1);
        assert_eq!(
            platform_spread_of(&[Platform::Twitter, Platform::Twitter]),
            PlatformSpread::TwitterOnly
        );
        assert_eq!(platform_spread_of(&[Platform::Facebook]), PlatformSpread::FacebookOnly);

        let same: Vec<_> = (0..10)
            .map(|i| (ids[i].as_str(), Platform::Twitter, srcs[i].as_str(), "same  text", 0))
            .collect();
        let c = corpus(&same);
        let camp = &extract_campaigns(&[(0..10).collect()], &c, 10)[0];
        assert_eq!(camp.unique_mutant_fraction, 0.1);
        let distinct: Vec<_> = (0..10)
            .map(|i| (ids[i].as_str(), Platform::Twitter, srcs[i].as_str(), ids[i].as_str(), 0))
            .collect();
        let c = corpus(&distinct);
        assert_eq!(extract_campaigns(&[(0..10).collect()], &c, 10)[0].unique_mutant_fraction, 1.0);
    }

    #[test]
    fn histogram_bins() {
        let mut h = SimilarityHistogram::new(0.85);
        assert_eq!(h.bins.len(), 31);
        assert_eq!(h.bin_index(0.85), 0);
        assert_eq!(h.bin_index(0.8549), 0);
        assert_eq!(h.bin_index(0.855), 1);
        assert_eq!(h.bin_index(0.9999), 29);
        assert_eq!(h.bin_index(1.0), 30);
        assert_eq!(h.bin_index(0.99999999), 30);
        h.add(0.85);
        h.add(1.0);
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("bin_low,count\n0.850,1\n0.855,0\n"));
        assert!(text.ends_with("0.995,0\n1.000,1\n"));
    }

    #[test]
    fn similarity_distribution_examples() {
        let specs: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|id| (*id, Platform::Twitter, *id, "dup", 0))
            .collect();
        let c = corpus(&specs);
        let camp = extract_campaigns(&[vec![0, 1, 2]], &c, 3);
        let all_ones: Vec<Edge> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(a, b)| Edge { a, b, score: 1.0 })
            .collect();
        let g = SimilarityGraph::from_edges(3, 0.85, all_ones).unwrap();
        let h = similarity_distribution(&camp, &g, &c);
        assert_eq!(h.bins.last().unwrap().count, 3);
        assert_eq!(h.pairs, 3);

        let boundary: Vec<Edge> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(a, b)| Edge { a, b, score: 0.85 })
            .collect();
        let g = SimilarityGraph::from_edges(3, 0.85, boundary).unwrap();
        assert_eq!(similarity_distribution(&camp, &g, &c).bins[0].count, 3);
    }

    #[test]
    fn stats_examples() {
        let mk = |id: &str, size: usize| Campaign {
            campaign_id: id.into(),
            size,
            members: (0..size).map(|i| format!("{id}{i}")).collect(),
            sources: vec![],
            platforms: BTreeSet::from([Platform::Twitter]),
            platform_spread: PlatformSpread::TwitterOnly,
            unique_mutant_count: size,
            unique_mutant_fraction: 1.0,
            representative_text: String::new(),
            facebook_sources: 0,
            events: vec![],
        };
        let stats = campaign_stats(&[mk("a", 10), mk("b", 20)], 100, None);
        assert_eq!(stats.mean_size, 15.0);
        assert!((stats.coverage - 0.30).abs() < 1e-12);
        assert_eq!(stats.median_size, 15.0);
        assert_eq!(stats.max_size, 20);
        assert_eq!(
            stats.size_histogram,
            vec![SizeBin { low: 8, count: 1 }, SizeBin { low: 16, count: 1 }]
        );
        let empty = campaign_stats(&[], 100, None);
        assert_eq!(empty.campaign_count, 0);
        assert_eq!(empty.coverage, 0.0);
        assert_eq!(empty.mean_size, 0.0);
    }

    #[test]
    fn clique_groups_are_disjoint() {
        let sets = vec![CliqueSet {
            cliques: vec![vec![0, 1, 2], vec![2, 3, 4, 5]],
            approximated: false,
        }];
        assert_eq!(clique_groups(&sets), vec![vec![2, 3, 4, 5], vec![0, 1]]);
    }

    proptest! {
        #[test]
        fn extraction_invariants(
            groups in prop::collection::vec(prop::collection::vec(0usize..6, 0..25), 1..6),
            seeds in prop::collection::vec(0i64..50, 150),
            min_size in 1usize..6,
        ) {
            // Disjoint groups over a shared corpus; sources drawn from a small pool.
            let mut specs_owned = Vec::new();
            let mut group_rows = Vec::new();
            let mut row = 0u32;
            for (g, sources) in groups.iter().enumerate() {
                let mut rows = Vec::new();
                for (i, s) in sources.iter().enumerate() {
                    specs_owned.push((format!("g{g}p{i}"), format!("s{s}"), format!("t{}", s % 3), seeds[row as usize % 150]));
                    rows.push(row);
                    row += 1;
                }
                group_rows.push(rows);
            }
            let specs: Vec<_> = specs_owned.iter()
                .map(|(id, s, t, ts)| (id.as_str(), Platform::Twitter, s.as_str(), t.as_str(), *ts))
                .collect();
            let c = corpus(&specs);
            let campaigns = extract_campaigns(&group_rows, &c, min_size);
            let mut all_members = HashSet::new();
            for camp in &campaigns {
                prop_assert!(camp.size >= min_size);
                let distinct: HashSet<_> = camp.sources.iter().collect();
                prop_assert_eq!(distinct.len(), camp.size);
                prop_assert!(camp.unique_mutant_fraction > 0.0 && camp.unique_mutant_fraction <= 1.0);
                let all_distinct_texts = camp.unique_mutant_count == camp.size;
                prop_assert_eq!(camp.unique_mutant_fraction == 1.0, all_distinct_texts);
                for m in &camp.members {
                    prop_assert!(all_members.insert(m.clone()));
                }
            }
            prop_assert!(all_members.len() <= c.len());
        }
    }
}
