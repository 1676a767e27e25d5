//! Account co-participation network, repeat offenders, leaning seeds,
//! label propagation and participation tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::campaigns::Campaign;
use crate::corpus::{Platform, SourceKey};
use crate::error::{Error, IoContext, Result};

pub const DEFAULT_REPEAT_THRESHOLD: usize = 5;
pub const DEFAULT_MAX_ROUNDS: usize = 100;

/// Account leaning. Declaration order is the propagation tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Leaning {
    BjpAffiliate,
    BjpSupporter,
    IncAffiliate,
    IncSupporter,
    AapAffiliate,
    BjpOpposition,
    Unlabeled,
}

impl Leaning {
    pub const ALL: [Leaning; 7] = [
        Leaning::BjpAffiliate,
        Leaning::BjpSupporter,
        Leaning::IncAffiliate,
        Leaning::IncSupporter,
        Leaning::AapAffiliate,
        Leaning::BjpOpposition,
        Leaning::Unlabeled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Leaning::BjpAffiliate => "BJP_AFFILIATE",
            Leaning::BjpSupporter => "BJP_SUPPORTER",
            Leaning::IncAffiliate => "INC_AFFILIATE",
            Leaning::IncSupporter => "INC_SUPPORTER",
            Leaning::AapAffiliate => "AAP_AFFILIATE",
            Leaning::BjpOpposition => "BJP_OPPOSITION",
            Leaning::Unlabeled => "UNLABELED",
        }
    }

    pub fn group(self) -> Option<LeaningGroup> {
        match self {
            Leaning::BjpAffiliate | Leaning::BjpSupporter => Some(LeaningGroup::Bjp),
            Leaning::IncAffiliate | Leaning::IncSupporter | Leaning::AapAffiliate => {
                Some(LeaningGroup::OtherParties)
            }
            Leaning::BjpOpposition => Some(LeaningGroup::Opposition),
            Leaning::Unlabeled => None,
        }
    }

    fn rank(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Leaning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Leaning {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let wanted = s.trim().to_uppercase();
        Leaning::ALL
            .into_iter()
            .find(|l| l.as_str() == wanted)
            .ok_or_else(|| s.to_string())
    }
}

/// Coarse leaning groups used in participation tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LeaningGroup {
    Bjp,
    Opposition,
    OtherParties,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CampaignLeaning {
    Bjp,
    Opposition,
    OtherParties,
    Mixed,
    Unlabeled,
}

impl From<LeaningGroup> for CampaignLeaning {
    fn from(g: LeaningGroup) -> Self {
        match g {
            LeaningGroup::Bjp => CampaignLeaning::Bjp,
            LeaningGroup::Opposition => CampaignLeaning::Opposition,
            LeaningGroup::OtherParties => CampaignLeaning::OtherParties,
        }
    }
}

pub type Labels = BTreeMap<SourceKey, Leaning>;

/// Accounts linked when they share a campaign; weight counts shared campaigns.
#[derive(Debug, Clone, PartialEq)]
pub struct CoParticipationGraph {
    nodes: Vec<SourceKey>,
    index: HashMap<SourceKey, u32>,
    campaign_counts: Vec<usize>,
    /// `(a, b, weight)` with `a < b`, sorted.
    edges: Vec<(u32, u32, u32)>,
    adjacency: Vec<Vec<(u32, u32)>>,
}

impl CoParticipationGraph {
    pub fn from_parts(nodes: Vec<SourceKey>, campaign_counts: Vec<usize>, weights: HashMap<(u32, u32), u32>) -> Self {
        let index = nodes.iter().enumerate().map(|(i, k)| (k.clone(), i as u32)).collect();
        let mut edges: Vec<(u32, u32, u32)> = weights.into_iter().map(|((a, b), w)| (a, b, w)).collect();
        edges.sort_unstable();
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for &(a, b, w) in &edges {
            adjacency[a as usize].push((b, w));
            adjacency[b as usize].push((a, w));
        }
        CoParticipationGraph {
            nodes,
            index,
            campaign_counts,
            edges,
            adjacency,
        }
    }

    pub fn nodes(&self) -> &[SourceKey] {
        &self.nodes
    }

    pub fn node_of(&self, key: &SourceKey) -> Option<u32> {
        self.index.get(key).copied()
    }

    pub fn campaign_count(&self, node: u32) -> usize {
        self.campaign_counts[node as usize]
    }

    pub fn edges(&self) -> &[(u32, u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, node: u32) -> &[(u32, u32)] {
        &self.adjacency[node as usize]
    }

    pub fn weight(&self, a: &SourceKey, b: &SourceKey) -> u32 {
        match (self.node_of(a), self.node_of(b)) {
            (Some(x), Some(y)) => self.neighbors(x).iter().find(|(n, _)| *n == y).map_or(0, |(_, w)| *w),
            _ => 0,
        }
    }

    /// CSV `source_a,source_b,weight`.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["source_a", "source_b", "weight"])?;
        for &(a, b, w) in &self.edges {
            writer.write_record([
                self.nodes[a as usize].to_string(),
                self.nodes[b as usize].to_string(),
                w.to_string(),
            ])?;
        }
        writer.flush().at("<account edges>")?;
        Ok(())
    }
}

pub fn build_account_network(campaigns: &[Campaign]) -> CoParticipationGraph {
    let nodes: Vec<SourceKey> = campaigns
        .iter()
        .flat_map(|c| c.sources.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&SourceKey, u32> = nodes.iter().enumerate().map(|(i, k)| (k, i as u32)).collect();
    let per_campaign: Vec<Vec<u32>> = campaigns
        .par_iter()
        .map(|c| {
            let mut ids: Vec<u32> = c.sources.iter().map(|s| index[s]).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect();
    let mut counts = vec![0usize; nodes.len()];
    let mut weights: HashMap<(u32, u32), u32> = HashMap::new();
    for ids in &per_campaign {
        for (i, &a) in ids.iter().enumerate() {
            counts[a as usize] += 1;
            for &b in &ids[i + 1..] {
                *weights.entry((a, b)).or_default() += 1;
            }
        }
    }
    CoParticipationGraph::from_parts(nodes, counts, weights)
}

/// Accounts in at least `k` distinct campaigns, most active first.
pub fn repeat_offenders(campaigns: &[Campaign], k: usize) -> Vec<(SourceKey, usize)> {
    let mut counts: BTreeMap<&SourceKey, usize> = BTreeMap::new();
    for c in campaigns {
        for s in c.sources.iter().collect::<BTreeSet<_>>() {
            *counts.entry(s).or_default() += 1;
        }
    }
    let mut out: Vec<(SourceKey, usize)> = counts
        .into_iter()
        .filter(|&(_, n)| n >= k.max(1))
        .map(|(s, n)| (s.clone(), n))
        .collect();
    out.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    out
}

/// Reads `platform,source,leaning` rows (an optional header is skipped).
/// Sources are canonicalized like post sources.
pub fn read_leaning_seeds<R: Read>(input: R) -> Result<Labels> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut seeds = Labels::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if line == 1 && record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("platform")) {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::InvalidArgument(format!("seeds line {line}: expected 3 fields")));
        }
        let platform: Platform = record[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("seeds line {line}: bad platform")))?;
        let key = SourceKey::new(platform, &record[1])
            .ok_or_else(|| Error::InvalidArgument(format!("seeds line {line}: empty source")))?;
        let leaning: Leaning = record[2].parse().map_err(|value| Error::UnknownLeaning { line, value })?;
        if leaning == Leaning::Unlabeled {
            log::warn!("seeds line {line}: UNLABELED seed ignored");
            continue;
        }
        if let Some(previous) = seeds.insert(key.clone(), leaning) {
            if previous != leaning {
                return Err(Error::ConflictingSeed {
                    line,
                    source_key: key.to_string(),
                });
            }
        }
    }
    Ok(seeds)
}

pub fn load_leaning_seeds(path: impl AsRef<std::path::Path>) -> Result<Labels> {
    let path = path.as_ref();
    read_leaning_seeds(std::fs::File::open(path).at(path)?)
}

/// Seeds whose account is not part of the network (kept, but reported).
pub fn seeds_outside(graph: &CoParticipationGraph, seeds: &Labels) -> Vec<SourceKey> {
    seeds.keys().filter(|k| graph.node_of(k).is_none()).cloned().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub labels: Labels,
    pub rounds: usize,
    pub converged: bool,
    pub seeds_used: usize,
    pub seeds_ignored: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelOrigin {
    Seed,
    Propagated,
    Unlabeled,
}

/// Synchronous weighted label propagation. Every round each non-seed node
/// takes the label with the largest summed edge weight among its labeled
/// neighbors (ties to the earliest [`Leaning`]); nodes with no labeled
/// neighbor keep their label. Seeds never change.
pub fn propagate_labels(graph: &CoParticipationGraph, seeds: &Labels, max_rounds: usize) -> Result<Propagation> {
    if seeds.is_empty() {
        return Err(Error::Empty("no seed labels"));
    }
    let n = graph.nodes().len();
    let mut current = vec![Leaning::Unlabeled; n];
    let mut fixed = vec![false; n];
    let mut used = 0;
    for (key, &leaning) in seeds {
        match graph.node_of(key) {
            Some(v) => {
                current[v as usize] = leaning;
                fixed[v as usize] = true;
                used += 1;
            }
            None => log::warn!("seed {key} is not in the account network"),
        }
    }
    let mut rounds = 0;
    let mut converged = false;
    while rounds < max_rounds {
        rounds += 1;
        let next: Vec<Leaning> = (0..n)
            .into_par_iter()
            .map(|v| {
                if fixed[v] {
                    return current[v];
                }
                let mut tally = [0u64; 6];
                for &(u, w) in graph.neighbors(v as u32) {
                    let l = current[u as usize];
                    if l != Leaning::Unlabeled {
                        tally[l.rank()] += u64::from(w);
                    }
                }
                let best = (0..6).fold(None, |best: Option<usize>, i| match best {
                    _ if tally[i] == 0 => best,
                    Some(b) if tally[b] >= tally[i] => Some(b),
                    _ => Some(i),
                });
                best.map_or(current[v], |i| Leaning::ALL[i])
            })
            .collect();
        if next == current {
            converged = true;
            break;
        }
        current = next;
    }
    let labels = graph.nodes().iter().cloned().zip(current).collect();
    Ok(Propagation {
        labels,
        rounds,
        converged,
        seeds_used: used,
        seeds_ignored: seeds.len() - used,
    })
}

/// Fraction of held-out accounts whose propagated label matches; missing
/// or UNLABELED propagations count as disagreement.
pub fn propagation_agreement(propagated: &Labels, held_out: &Labels) -> Result<f64> {
    if held_out.is_empty() {
        return Err(Error::Empty("no held-out labels"));
    }
    let hits = held_out
        .iter()
        .filter(|(k, l)| propagated.get(*k).is_some_and(|p| p == *l && *p != Leaning::Unlabeled))
        .count();
    Ok(hits as f64 / held_out.len() as f64)
}

pub fn labels_csv<W: Write>(propagation: &Labels, seeds: &Labels, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["platform", "source", "leaning", "origin"])?;
    for (key, &leaning) in propagation {
        let origin = if seeds.contains_key(key) {
            LabelOrigin::Seed
        } else if leaning == Leaning::Unlabeled {
            LabelOrigin::Unlabeled
        } else {
            LabelOrigin::Propagated
        };
        let origin = match origin {
            LabelOrigin::Seed => "seed",
            LabelOrigin::Propagated => "propagated",
            LabelOrigin::Unlabeled => "unlabeled",
        };
        writer.write_record([key.platform().as_str(), key.key(), leaning.as_str(), origin])?;
    }
    writer.flush().at("<labels>")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupShare<G> {
    pub group: G,
    pub count: usize,
    pub percent: f64,
}

/// Shares over labeled entries; UNLABELED is counted but excluded from the
/// denominators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareTable<G> {
    pub labeled: usize,
    pub unlabeled: usize,
    pub shares: Vec<GroupShare<G>>,
}

impl<G: Ord + Copy> ShareTable<G> {
    fn from_counts(counts: &BTreeMap<G, usize>, unlabeled: usize) -> Self {
        let labeled: usize = counts.values().sum();
        let shares = if labeled == 0 {
            Vec::new()
        } else {
            counts
                .iter()
                .map(|(&group, &count)| GroupShare {
                    group,
                    count,
                    percent: 100.0 * count as f64 / labeled as f64,
                })
                .collect()
        };
        ShareTable {
            labeled,
            unlabeled,
            shares,
        }
    }

    pub fn percent(&self, group: G) -> Option<f64> {
        self.shares.iter().find(|s| s.group == group).map(|s| s.percent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipationTable {
    pub accounts: ShareTable<LeaningGroup>,
    pub by_platform: BTreeMap<String, ShareTable<LeaningGroup>>,
    pub by_event: BTreeMap<String, ShareTable<LeaningGroup>>,
    /// Plurality leaning per campaign; MIXED entries count as labeled.
    pub campaigns: ShareTable<CampaignLeaning>,
}

fn account_table<'a>(accounts: impl Iterator<Item = &'a SourceKey>, labels: &Labels) -> ShareTable<LeaningGroup> {
    let mut counts = BTreeMap::new();
    let mut unlabeled = 0;
    for key in accounts {
        match labels.get(key).and_then(|l| l.group()) {
            Some(g) => *counts.entry(g).or_insert(0) += 1,
            None => unlabeled += 1,
        }
    }
    ShareTable::from_counts(&counts, unlabeled)
}

pub fn leaning_stats(campaigns: &[Campaign], labels: &Labels) -> ParticipationTable {
    let accounts: BTreeSet<&SourceKey> = campaigns.iter().flat_map(|c| c.sources.iter()).collect();
    let mut by_platform_keys: BTreeMap<String, Vec<&SourceKey>> = BTreeMap::new();
    for key in &accounts {
        by_platform_keys.entry(key.platform().to_string()).or_default().push(key);
    }
    let mut by_event_keys: BTreeMap<String, BTreeSet<&SourceKey>> = BTreeMap::new();
    for c in campaigns {
        for event in &c.events {
            by_event_keys.entry(event.clone()).or_default().extend(c.sources.iter());
        }
    }
    let mut campaign_counts = BTreeMap::new();
    let mut campaign_unlabeled = 0;
    for c in campaigns {
        match campaign_leaning(c, labels) {
            CampaignLeaning::Unlabeled => campaign_unlabeled += 1,
            other => *campaign_counts.entry(other).or_insert(0) += 1,
        }
    }
    ParticipationTable {
        accounts: account_table(accounts.iter().copied(), labels),
        by_platform: by_platform_keys
            .into_iter()
            .map(|(p, keys)| (p, account_table(keys.into_iter(), labels)))
            .collect(),
        by_event: by_event_keys
            .into_iter()
            .map(|(e, keys)| (e, account_table(keys.into_iter(), labels)))
            .collect(),
        campaigns: ShareTable::from_counts(&campaign_counts, campaign_unlabeled),
    }
}

/// Plurality coarse group among labeled member sources.
pub fn campaign_leaning(campaign: &Campaign, labels: &Labels) -> CampaignLeaning {
    let mut counts: BTreeMap<LeaningGroup, usize> = BTreeMap::new();
    for s in campaign.sources.iter().collect::<BTreeSet<_>>() {
        if let Some(g) = labels.get(s).and_then(|l| l.group()) {
            *counts.entry(g).or_default() += 1;
        }
    }
    let Some(&top) = counts.values().max() else {
        return CampaignLeaning::Unlabeled;
    };
    let mut leaders = counts.iter().filter(|(_, &n)| n == top);
    match (leaders.next(), leaders.next()) {
        (Some((&g, _)), None) => g.into(),
        _ => CampaignLeaning::Mixed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaigns::PlatformSpread;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn key(s: &str) -> SourceKey {
        SourceKey::new(Platform::Twitter, s).unwrap()
    }

    fn campaign(id: &str, sources: &[&str]) -> Campaign {
        Campaign {
            campaign_id: id.into(),
            size: sources.len(),
            members: sources.iter().map(|s| format!("{id}-{s}")).collect(),
            sources: sources.iter().map(|s| key(s)).collect(),
            platforms: BTreeSet::from([Platform::Twitter]),
            platform_spread: PlatformSpread::TwitterOnly,
            unique_mutant_count: sources.len(),
            unique_mutant_fraction: 1.0,
            representative_text: String::new(),
            facebook_sources: 0,
            events: vec![],
        }
    }

    #[test]
    fn network_examples() {
        let g = build_account_network(&[campaign("c1", &["a", "b", "c"])]);
        assert_eq!(g.edges().len(), 3);
        assert!(g.edges().iter().all(|e| e.2 == 1));

        let g = build_account_network(&[campaign("c1", &["a", "b"]), campaign("c2", &["a", "b", "c"])]);
        assert_eq!(g.weight(&key("a"), &key("b")), 2);
        assert_eq!(g.weight(&key("b"), &key("a")), 2);
        assert_eq!(g.campaign_count(g.node_of(&key("a")).unwrap()), 2);

        let g = build_account_network(&[campaign("c1", &["a", "b"]), campaign("c2", &["c", "d"])]);
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.weight(&key("a"), &key("c")), 0);
        let mut csv = Vec::new();
        g.write_edge_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "source_a,source_b,weight\ntwitter:a,twitter:b,1\ntwitter:c,twitter:d,1\n"
        );
    }

    #[test]
    fn repeat_offender_threshold() {
        let mut cs: Vec<Campaign> = (0..5).map(|i| campaign(&format!("c{i}"), &["a", "x"])).collect();
        cs[4].sources.pop();
        let five = repeat_offenders(&cs, 5);
        assert_eq!(five, vec![(key("a"), 5)]);
        let four = repeat_offenders(&cs, 4);
        assert_eq!(four, vec![(key("a"), 5), (key("x"), 4)]);
    }

    #[test]
    fn seed_parsing() {
        let seeds = read_leaning_seeds("platform,source,leaning\ntwitter,UserA,BJP_SUPPORTER\n".as_bytes()).unwrap();
        assert_eq!(seeds.get(&key("usera")), Some(&Leaning::BjpSupporter));
        match read_leaning_seeds("twitter,a,BJP_SUPPORTER\ntwitter,b,CENTRIST\n".as_bytes()) {
            Err(Error::UnknownLeaning { line, value }) => {
                assert_eq!(line, 2);
                assert_eq!(value, "CENTRIST");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_leaning_seeds("twitter,a,BJP_SUPPORTER\ntwitter,A,INC_SUPPORTER\n".as_bytes()),
            Err(Error::ConflictingSeed { line: 2, .. })
        ));
    }

    fn graph_from(edges: &[(&str, &str, u32)], extra_nodes: &[&str]) -> CoParticipationGraph {
        let mut names: BTreeSet<&str> = extra_nodes.iter().copied().collect();
        for (a, b, _) in edges {
            names.insert(a);
            names.insert(b);
        }
        let nodes: Vec<SourceKey> = names.iter().map(|n| key(n)).collect();
        let idx = |n: &str| nodes.iter().position(|k| k.key() == n).unwrap() as u32;
        let weights = edges
            .iter()
            .map(|(a, b, w)| {
                let (x, y) = (idx(a), idx(b));
                ((x.min(y), x.max(y)), *w)
            })
            .collect();
        let count = nodes.len();
        CoParticipationGraph::from_parts(nodes, vec![1; count], weights)
    }

    #[test]
    fn propagation_examples() {
        let g = graph_from(
            &[("a", "b", 1), ("b", "c", 1), ("a", "c", 1), ("x", "y", 1), ("y", "z", 1), ("x", "z", 1)],
            &["lonely"],
        );
        let seeds = Labels::from([(key("a"), Leaning::BjpSupporter), (key("x"), Leaning::IncSupporter)]);
        let p = propagate_labels(&g, &seeds, DEFAULT_MAX_ROUNDS).unwrap();
        assert!(p.converged && p.rounds <= 2);
        for n in ["a", "b", "c"] {
            assert_eq!(p.labels[&key(n)], Leaning::BjpSupporter);
        }
        for n in ["x", "y", "z"] {
            assert_eq!(p.labels[&key(n)], Leaning::IncSupporter);
        }
        assert_eq!(p.labels[&key("lonely")], Leaning::Unlabeled);

        let g = graph_from(&[("v", "bjp", 3), ("v", "inc", 1)], &[]);
        let seeds = Labels::from([(key("bjp"), Leaning::BjpSupporter), (key("inc"), Leaning::IncSupporter)]);
        let p = propagate_labels(&g, &seeds, DEFAULT_MAX_ROUNDS).unwrap();
        assert_eq!(p.labels[&key("v")], Leaning::BjpSupporter);

        // Equal weights: tie goes to the earlier declaration.
        let g = graph_from(&[("v", "opp", 2), ("v", "inc", 2)], &[]);
        let seeds = Labels::from([(key("opp"), Leaning::BjpOpposition), (key("inc"), Leaning::IncSupporter)]);
        let p = propagate_labels(&g, &seeds, DEFAULT_MAX_ROUNDS).unwrap();
        assert_eq!(p.labels[&key("v")], Leaning::IncSupporter);

        assert!(propagate_labels(&g, &Labels::new(), 10).is_err());
    }

    #[test]
    fn agreement_examples() {
        let held: Labels = (0..10).map(|i| (key(&format!("h{i}")), Leaning::BjpSupporter)).collect();
        let mut prop = held.clone();
        prop.insert(key("h0"), Leaning::BjpOpposition);
        assert!((propagation_agreement(&prop, &held).unwrap() - 0.9).abs() < 1e-12);
        let none: Labels = held.keys().map(|k| (k.clone(), Leaning::Unlabeled)).collect();
        assert_eq!(propagation_agreement(&none, &held).unwrap(), 0.0);
        assert!(propagation_agreement(&prop, &Labels::new()).is_err());
    }

    #[test]
    fn participation_examples() {
        let names: Vec<String> = (0..10).map(|i| format!("u{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let cs = vec![campaign("c", &refs)];
        let leanings = [
            Leaning::BjpAffiliate,
            Leaning::BjpSupporter,
            Leaning::BjpSupporter,
            Leaning::BjpAffiliate,
            Leaning::BjpOpposition,
            Leaning::BjpOpposition,
            Leaning::BjpOpposition,
            Leaning::BjpOpposition,
            Leaning::IncSupporter,
            Leaning::AapAffiliate,
        ];
        let labels: Labels = refs.iter().zip(leanings).map(|(n, l)| (key(n), l)).collect();
        let table = leaning_stats(&cs, &labels);
        assert_eq!(table.accounts.percent(LeaningGroup::Bjp), Some(40.0));
        assert_eq!(table.accounts.percent(LeaningGroup::Opposition), Some(40.0));
        assert_eq!(table.accounts.percent(LeaningGroup::OtherParties), Some(20.0));
        assert_eq!(table.by_platform["twitter"].labeled, 10);

        let empty = leaning_stats(&cs, &Labels::new());
        assert!(empty.accounts.shares.is_empty());
        assert_eq!(empty.accounts.unlabeled, 10);
    }

    #[test]
    fn campaign_plurality() {
        let labels = Labels::from([
            (key("a"), Leaning::BjpSupporter),
            (key("b"), Leaning::BjpAffiliate),
            (key("c"), Leaning::BjpOpposition),
        ]);
        assert_eq!(campaign_leaning(&campaign("1", &["a", "b", "c"]), &labels), CampaignLeaning::Bjp);
        assert_eq!(campaign_leaning(&campaign("2", &["a", "c"]), &labels), CampaignLeaning::Mixed);
        assert_eq!(campaign_leaning(&campaign("3", &["z"]), &labels), CampaignLeaning::Unlabeled);
    }

    #[test]
    fn invariants_on_random_campaigns() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pool: Vec<String> = (0..30).map(|i| format!("s{i}")).collect();
        let cs: Vec<Campaign> = (0..60)
            .map(|c| {
                let mut members: Vec<&str> = pool
                    .iter()
                    .filter(|_| rng.random_bool(0.2))
                    .map(String::as_str)
                    .collect();
                members.dedup();
                campaign(&format!("c{c}"), &members)
            })
            .collect();
        let g = build_account_network(&cs);
        for a in &pool {
            for b in &pool {
                if a == b {
                    continue;
                }
                let brute = cs
                    .iter()
                    .filter(|c| c.sources.contains(&key(a)) && c.sources.contains(&key(b)))
                    .count() as u32;
                assert_eq!(g.weight(&key(a), &key(b)), brute);
            }
        }
        for k in 1..10 {
            let wide: BTreeSet<_> = repeat_offenders(&cs, k).into_iter().map(|x| x.0).collect();
            let narrow: BTreeSet<_> = repeat_offenders(&cs, k + 1).into_iter().map(|x| x.0).collect();
            assert!(narrow.is_subset(&wide));
        }
        let seeds = Labels::from([(key("s0"), Leaning::BjpSupporter), (key("s1"), Leaning::BjpOpposition)]);
        let p1 = propagate_labels(&g, &seeds, 100).unwrap();
        let p2 = propagate_labels(&g, &seeds, 100).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p1.labels[&key("s0")], Leaning::BjpSupporter);
        assert_eq!(p1.labels[&key("s1")], Leaning::BjpOpposition);
        let capped = propagate_labels(&g, &seeds, 1).unwrap();
        assert_eq!(capped.rounds, 1);
    }
}
