//! Daily campaign timelines and lead-lag between paired campaigns.

use std::collections::HashMap;
use std::io::Read;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::campaigns::Campaign;
use crate::corpus::PostCollection;
use crate::error::{Error, Result};

/// UTC+05:30.
pub const IST_OFFSET_SECONDS: i32 = 5 * 3600 + 30 * 60;
const DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelinePoint {
    pub date: String,
    pub count: usize,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub campaign_id: String,
    /// One point per local calendar day from first to last active day.
    pub points: Vec<TimelinePoint>,
}

fn local_day(timestamp: i64, tz_offset: i32) -> i64 {
    (timestamp + i64::from(tz_offset)).div_euclid(DAY)
}

fn day_label(day: i64) -> String {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date");
    (epoch + Duration::days(day)).format("%Y-%m-%d").to_string()
}

fn member_timestamps(campaign: &Campaign, posts: &PostCollection) -> Result<Vec<i64>> {
    if campaign.members.is_empty() {
        return Err(Error::Empty("campaign has no members"));
    }
    campaign
        .members
        .iter()
        .map(|id| {
            posts.get(id).map(|p| p.timestamp).ok_or_else(|| {
                Error::InvalidArgument(format!("campaign {} member {id:?} not in corpus", campaign.campaign_id))
            })
        })
        .collect()
}

fn day_counts(timestamps: &[i64], tz_offset: i32) -> (i64, Vec<usize>) {
    let days: Vec<i64> = timestamps.iter().map(|&t| local_day(t, tz_offset)).collect();
    let first = *days.iter().min().expect("non-empty");
    let last = *days.iter().max().expect("non-empty");
    let mut counts = vec![0usize; (last - first + 1) as usize];
    for d in days {
        counts[(d - first) as usize] += 1;
    }
    (first, counts)
}

pub fn campaign_timeline(campaign: &Campaign, posts: &PostCollection, tz_offset: i32) -> Result<Timeline> {
    let timestamps = member_timestamps(campaign, posts)?;
    let total = timestamps.len() as f64;
    let (first, counts) = day_counts(&timestamps, tz_offset);
    Ok(Timeline {
        campaign_id: campaign.campaign_id.clone(),
        points: counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| TimelinePoint {
                date: day_label(first + i as i64),
                count,
                proportion: count as f64 / total,
            })
            .collect(),
    })
}

/// Twice the median timestamp, so even-sized sets stay in integers.
fn doubled_median(mut timestamps: Vec<i64>) -> i64 {
    timestamps.sort_unstable();
    let n = timestamps.len();
    if n % 2 == 1 {
        2 * timestamps[n / 2]
    } else {
        timestamps[n / 2 - 1] + timestamps[n / 2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadLag {
    /// `median(b) - median(a)` in days; positive when `b` follows `a`.
    pub offset_days: f64,
    /// The same offset in half-second units, exact.
    pub offset_half_seconds: i64,
    pub peak_a: String,
    pub peak_b: String,
    /// Shared active days over the days spanned by either campaign.
    pub overlap: f64,
}

pub fn lead_lag(a: &Campaign, b: &Campaign, posts: &PostCollection, tz_offset: i32) -> Result<LeadLag> {
    let ta = member_timestamps(a, posts)?;
    let tb = member_timestamps(b, posts)?;
    let peak = |ts: &[i64]| {
        let (first, counts) = day_counts(ts, tz_offset);
        let top = *counts.iter().max().expect("non-empty");
        let idx = counts.iter().position(|&c| c == top).expect("present");
        (first, first + counts.len() as i64 - 1, day_label(first + idx as i64))
    };
    let (a_first, a_last, peak_a) = peak(&ta);
    let (b_first, b_last, peak_b) = peak(&tb);
    let shared = (a_last.min(b_last) - a_first.max(b_first) + 1).max(0);
    let spanned = a_last.max(b_last) - a_first.min(b_first) + 1;
    let offset_half_seconds = doubled_median(tb) - doubled_median(ta);
    Ok(LeadLag {
        offset_days: offset_half_seconds as f64 / (2 * DAY) as f64,
        offset_half_seconds,
        peak_a,
        peak_b,
        overlap: shared as f64 / spanned as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignPair {
    pub campaign_a: String,
    pub campaign_b: String,
    #[serde(default)]
    pub label: String,
}

/// Reads the pair file `campaign_a,campaign_b,label` (header required).
pub fn read_pairs<R: Read>(input: R) -> Result<Vec<CampaignPair>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(input);
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub label: String,
    pub campaign_a: String,
    pub campaign_b: String,
    pub timeline_a: Timeline,
    pub timeline_b: Timeline,
    pub lead_lag: LeadLag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub tz_offset_seconds: i32,
    pub offset_definition: String,
    pub pairs: Vec<PairEntry>,
}

pub fn pair_report(
    pairs: &[CampaignPair],
    campaigns: &[Campaign],
    posts: &PostCollection,
    tz_offset: i32,
) -> Result<PairReport> {
    let by_id: HashMap<&str, &Campaign> = campaigns.iter().map(|c| (c.campaign_id.as_str(), c)).collect();
    let find = |id: &str| by_id.get(id).copied().ok_or_else(|| Error::UnknownCampaign(id.to_string()));
    let entries = pairs
        .iter()
        .map(|pair| {
            let a = find(&pair.campaign_a)?;
            let b = find(&pair.campaign_b)?;
            Ok(PairEntry {
                label: pair.label.clone(),
                campaign_a: pair.campaign_a.clone(),
                campaign_b: pair.campaign_b.clone(),
                timeline_a: campaign_timeline(a, posts, tz_offset)?,
                timeline_b: campaign_timeline(b, posts, tz_offset)?,
                lead_lag: lead_lag(a, b, posts, tz_offset)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairReport {
        tz_offset_seconds: tz_offset,
        offset_definition: "median timestamp of campaign_b minus median timestamp of campaign_a, in days; \
                            one operationalization of temporal ordering"
            .into(),
        pairs: entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::campaigns::PlatformSpread;
    use crate::corpus::{Platform, Post, SourceKey};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    // 2021-01-10T00:00:00Z
    const BASE: i64 = 1_610_236_800;

    fn fixture(groups: &[(&str, Vec<i64>)]) -> (Vec<Campaign>, PostCollection) {
        let mut posts = Vec::new();
        let mut campaigns = Vec::new();
        for (id, stamps) in groups {
            let members: Vec<String> = (0..stamps.len()).map(|i| format!("{id}-{i}")).collect();
            for (m, &ts) in members.iter().zip(stamps) {
                posts.push(Post {
                    post_id: m.clone(),
                    platform: Platform::Twitter,
                    source_key: SourceKey::new(Platform::Twitter, m).unwrap(),
                    text_raw: "t".into(),
                    text_norm: "t".into(),
                    timestamp: ts,
                    language_hint: None,
                    event: None,
                });
            }
            campaigns.push(Campaign {
                campaign_id: id.to_string(),
                size: members.len(),
                sources: vec![],
                members,
                platforms: BTreeSet::from([Platform::Twitter]),
                platform_spread: PlatformSpread::TwitterOnly,
                unique_mutant_count: 1,
                unique_mutant_fraction: 1.0,
                representative_text: String::new(),
                facebook_sources: 0,
                events: vec![],
            });
        }
        (campaigns, PostCollection::new(posts).unwrap())
    }

    #[test]
    fn timeline_examples() {
        let (cs, posts) = fixture(&[
            ("a", vec![BASE + 100, BASE + 200, BASE + 300, BASE + DAY + 5]),
            ("b", vec![BASE, BASE + 10]),
            ("c", vec![BASE, BASE + 2 * DAY]),
        ]);
        let t = campaign_timeline(&cs[0], &posts, 0).unwrap();
        assert_eq!(t.points.iter().map(|p| p.proportion).collect::<Vec<_>>(), vec![0.75, 0.25]);
        assert_eq!(t.points[0].date, "2021-01-10");
        let t = campaign_timeline(&cs[1], &posts, 0).unwrap();
        assert_eq!(t.points.len(), 1);
        assert_eq!(t.points[0].proportion, 1.0);
        let t = campaign_timeline(&cs[2], &posts, 0).unwrap();
        assert_eq!(t.points.iter().map(|p| p.count).collect::<Vec<_>>(), vec![1, 0, 1]);
        assert_eq!(t.points[1].date, "2021-01-11");
    }

    #[test]
    fn ist_bucketing() {
        // 20:00 UTC is 01:30 the next day in IST.
        let (cs, posts) = fixture(&[("a", vec![BASE + 20 * 3600])]);
        assert_eq!(campaign_timeline(&cs[0], &posts, 0).unwrap().points[0].date, "2021-01-10");
        assert_eq!(
            campaign_timeline(&cs[0], &posts, IST_OFFSET_SECONDS).unwrap().points[0].date,
            "2021-01-11"
        );
    }

    #[test]
    fn lead_lag_examples() {
        let (cs, posts) = fixture(&[
            ("a", vec![BASE + 10, BASE + 20]),
            ("a2", vec![BASE + 10, BASE + 20]),
            ("b", vec![BASE + 3 * DAY + 10, BASE + 3 * DAY + 20]),
        ]);
        let same = lead_lag(&cs[0], &cs[1], &posts, 0).unwrap();
        assert_eq!(same.offset_days, 0.0);
        assert_eq!(same.overlap, 1.0);
        let later = lead_lag(&cs[0], &cs[2], &posts, 0).unwrap();
        assert_eq!(later.offset_days, 3.0);
        assert_eq!(later.overlap, 0.0);
        assert_eq!(later.peak_b, "2021-01-13");
    }

    #[test]
    fn pair_report_examples() {
        let (cs, posts) = fixture(&[("a", vec![BASE]), ("b", vec![BASE + DAY])]);
        let pairs = read_pairs("campaign_a,campaign_b,label\na,b,claim vs counter\n".as_bytes()).unwrap();
        let report = pair_report(&pairs, &cs, &posts, 0).unwrap();
        assert_eq!(report.pairs.len(), 1);
        assert_eq!(report.pairs[0].lead_lag.offset_days, 1.0);
        assert_eq!(report.pairs[0].label, "claim vs counter");
        let bad = vec![CampaignPair {
            campaign_a: "a".into(),
            campaign_b: "zzz".into(),
            label: String::new(),
        }];
        assert!(matches!(pair_report(&bad, &cs, &posts, 0), Err(Error::UnknownCampaign(id)) if id == "zzz"));
    }

    proptest! {
        #[test]
        fn timeline_and_lead_lag_invariants(
            a in prop::collection::vec(0i64..30 * DAY, 1..40),
            b in prop::collection::vec(0i64..30 * DAY, 1..40),
            shift in -20i64..20,
            tz in -12i32 * 3600..14 * 3600,
        ) {
            let shifted: Vec<i64> = b.iter().map(|t| BASE + t + shift * DAY).collect();
            let (cs, posts) = fixture(&[
                ("a", a.iter().map(|t| BASE + t).collect()),
                ("b", b.iter().map(|t| BASE + t).collect()),
                ("b_shift", shifted),
            ]);
            for c in &cs {
                let t = campaign_timeline(c, &posts, tz).unwrap();
                prop_assert_eq!(t.points.iter().map(|p| p.count).sum::<usize>(), c.size);
                prop_assert!((t.points.iter().map(|p| p.proportion).sum::<f64>() - 1.0).abs() <= 1e-9);
            }
            let ab = lead_lag(&cs[0], &cs[1], &posts, tz).unwrap();
            let ba = lead_lag(&cs[1], &cs[0], &posts, tz).unwrap();
            prop_assert_eq!(ab.offset_days, -ba.offset_days);
            prop_assert_eq!(ab.overlap, ba.overlap);
            let moved = lead_lag(&cs[0], &cs[2], &posts, tz).unwrap();
            prop_assert_eq!(moved.offset_half_seconds - ab.offset_half_seconds, shift * 2 * DAY);
        }
    }
}
