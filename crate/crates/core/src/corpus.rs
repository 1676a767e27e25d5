//! Post data model, line-delimited ingestion, text normalization and
//! deduplication keys.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, IoContext, Result};

const CORPUS_MAGIC: &[u8; 8] = b"MGCORPUS";
const CORPUS_VERSION: u32 = 1;
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// Platform a post was collected from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Platform {
    Twitter,
    Facebook,
    /// Additional platform tag enabled through [`IngestConfig::extra_platforms`].
    Other(String),
}

impl Platform {
    pub fn as_str(&self) -> &str {
        match self {
            Platform::Twitter => "twitter",
            Platform::Facebook => "facebook",
            Platform::Other(tag) => tag,
        }
    }

    /// Parses a platform tag, accepting `extra` tags beyond the built-in two.
    pub fn parse(raw: &str, extra: &[String]) -> Option<Platform> {
        let lowered = raw.trim().to_lowercase();
        match lowered.as_str() {
            "twitter" => Some(Platform::Twitter),
            "facebook" => Some(Platform::Facebook),
            other => extra
                .iter()
                .any(|tag| tag.to_lowercase() == other)
                .then(|| Platform::Other(other.to_string())),
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Platform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_lowercase().as_str() {
            "twitter" => Platform::Twitter,
            "facebook" => Platform::Facebook,
            "" => return Err(Error::InvalidArgument("empty platform tag".into())),
            other => Platform::Other(other.to_string()),
        })
    }
}

impl Serialize for Platform {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Platform {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Deduplication identity of a post's origin: a Twitter handle or a
/// Facebook group/page.
///
/// Twitter handles are canonicalized (leading `@` removed, lowercased) so
/// equality is case-insensitive; other platforms compare verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceKey {
    platform: Platform,
    key: String,
}

impl SourceKey {
    pub fn new(platform: Platform, raw: &str) -> Option<SourceKey> {
        let trimmed = raw.trim();
        let key = match platform {
            Platform::Twitter => trimmed.trim_start_matches('@').to_lowercase(),
            _ => trimmed.to_string(),
        };
        if key.is_empty() {
            return None;
        }
        Some(SourceKey { platform, key })
    }

    pub fn platform(&self) -> &Platform {
        &self.platform
    }

    pub fn key(&self) -> &str {
        &self.key
    }
}

/// `platform:key`, the form used in campaign records and CSV outputs.
impl fmt::Display for SourceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.platform, self.key)
    }
}

impl FromStr for SourceKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (platform, key) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("source {s:?} lacks a platform prefix")))?;
        SourceKey::new(platform.parse()?, key)
            .ok_or_else(|| Error::InvalidArgument(format!("source {s:?} has an empty key")))
    }
}

impl Serialize for SourceKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SourceKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Derives the dedup key for a post from its platform and raw source field.
pub fn source_key(post_id: &str, platform: &Platform, source: &str) -> Result<SourceKey> {
    SourceKey::new(platform.clone(), source).ok_or_else(|| Error::EmptySource {
        post_id: post_id.to_string(),
    })
}

/// NFC composition plus whitespace collapse. Content is otherwise untouched:
/// no case folding, no URL or mention stripping.
pub fn normalize_text(text_raw: &str) -> String {
    let composed: String = text_raw.nfc().collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One original (non-reshared) social media message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub post_id: String,
    pub platform: Platform,
    pub source_key: SourceKey,
    pub text_raw: String,
    pub text_norm: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_hint: Option<String>,
    /// Optional event/dataset tag used to split participation tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
}

/// Wire form of one line of the posts file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    pub platform: String,
    pub source: String,
    pub text: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
}

impl PostRecord {
    pub fn from_post(post: &Post) -> PostRecord {
        PostRecord {
            post_id: post.post_id.clone(),
            platform: post.platform.to_string(),
            source: post.source_key.key().to_string(),
            text: post.text_raw.clone(),
            timestamp: format_timestamp(post.timestamp),
            lang: post.language_hint.clone(),
            event: post.event.clone(),
        }
    }
}

pub fn parse_timestamp(raw: &str) -> Option<i64> {
    NaiveDateTime::parse_from_str(raw.trim(), TIMESTAMP_FORMAT)
        .ok()
        .map(|dt| dt.and_utc().timestamp())
}

pub fn format_timestamp(seconds: i64) -> String {
    DateTime::from_timestamp(seconds, 0)
        .map(|dt| dt.format(TIMESTAMP_FORMAT).to_string())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Platform tags accepted in addition to `twitter` and `facebook`.
    #[serde(default)]
    pub extra_platforms: Vec<String>,
    /// Inclusive event window in epoch seconds; posts outside it are skipped.
    #[serde(default)]
    pub window: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug)]
pub struct IngestReport {
    pub posts: PostCollection,
    pub skipped: Vec<SkippedLine>,
}

/// Immutable, id-indexed set of posts in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PostCollection {
    posts: Vec<Post>,
    index: HashMap<String, usize>,
}

impl PostCollection {
    /// Builds a collection, rejecting duplicate ids.
    pub fn new(posts: Vec<Post>) -> Result<PostCollection> {
        let mut index = HashMap::with_capacity(posts.len());
        for (row, post) in posts.iter().enumerate() {
            if index.insert(post.post_id.clone(), row).is_some() {
                return Err(Error::DuplicatePost {
                    post_id: post.post_id.clone(),
                    line: row + 1,
                });
            }
        }
        Ok(PostCollection { posts, index })
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn get(&self, post_id: &str) -> Option<&Post> {
        self.index.get(post_id).map(|&row| &self.posts[row])
    }

    pub fn row_of(&self, post_id: &str) -> Option<usize> {
        self.index.get(post_id).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Post> {
        self.posts.iter()
    }

    pub fn into_posts(self) -> Vec<Post> {
        self.posts
    }
}

impl<'a> IntoIterator for &'a PostCollection {
    type Item = &'a Post;
    type IntoIter = std::slice::Iter<'a, Post>;

    fn into_iter(self) -> Self::IntoIter {
        self.posts.iter()
    }
}

fn post_from_record(record: PostRecord, config: &IngestConfig) -> std::result::Result<Post, String> {
    let platform = Platform::parse(&record.platform, &config.extra_platforms)
        .ok_or_else(|| format!("unknown platform {:?}", record.platform))?;
    if record.post_id.is_empty() {
        return Err("empty post_id".into());
    }
    let source_key =
        source_key(&record.post_id, &platform, &record.source).map_err(|e| e.to_string())?;
    let timestamp = parse_timestamp(&record.timestamp)
        .ok_or_else(|| format!("unparseable timestamp {:?}", record.timestamp))?;
    if let Some((start, end)) = config.window {
        if timestamp < start || timestamp > end {
            return Err(format!("timestamp {} outside event window", record.timestamp));
        }
    }
    Ok(Post {
        text_norm: normalize_text(&record.text),
        post_id: record.post_id,
        platform,
        source_key,
        text_raw: record.text,
        timestamp,
        language_hint: record.lang,
        event: record.event,
    })
}

/// Reads line-delimited post records. Malformed lines are skipped and
/// reported; a repeated post_id aborts ingestion.
pub fn ingest_reader<R: BufRead>(reader: R, config: &IngestConfig) -> Result<IngestReport> {
    let mut posts = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut skipped = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: "<posts>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<PostRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|record| post_from_record(record, config));
        match parsed {
            Ok(post) => {
                if seen.insert(post.post_id.clone(), line_no).is_some() {
                    return Err(Error::DuplicatePost {
                        post_id: post.post_id,
                        line: line_no,
                    });
                }
                posts.push(post);
            }
            Err(reason) => {
                log::warn!("posts line {line_no}: skipped ({reason})");
                skipped.push(SkippedLine {
                    line: line_no,
                    reason,
                });
            }
        }
    }
    Ok(IngestReport {
        posts: PostCollection::new(posts)?,
        skipped,
    })
}

pub fn ingest_posts(path: impl AsRef<Path>, config: &IngestConfig) -> Result<IngestReport> {
    let path = path.as_ref();
    let file = File::open(path).at(path)?;
    ingest_reader(BufReader::new(file), config)
}

pub fn write_posts_jsonl<W: Write>(posts: &PostCollection, mut out: W) -> Result<()> {
    for post in posts {
        serde_json::to_writer(&mut out, &PostRecord::from_post(post))?;
        out.write_all(b"\n").at("<posts>")?;
    }
    Ok(())
}

pub fn save_posts_jsonl(posts: &PostCollection, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path).at(path)?);
    write_posts_jsonl(posts, &mut out)?;
    out.flush().at(path)
}

/// Writes the internal corpus form: magic, version, then the posts as JSON.
pub fn save_corpus(posts: &PostCollection, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path).at(path)?);
    out.write_all(CORPUS_MAGIC).at(path)?;
    out.write_all(&CORPUS_VERSION.to_le_bytes()).at(path)?;
    serde_json::to_writer(&mut out, posts.posts())?;
    out.flush().at(path)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<PostCollection> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path).at(path)?.read_to_end(&mut bytes).at(path)?;
    if bytes.len() < 12 || &bytes[..8] != CORPUS_MAGIC {
        return Err(Error::Format {
            format: "corpus",
            reason: "bad magic".into(),
        });
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != CORPUS_VERSION {
        return Err(Error::Format {
            format: "corpus",
            reason: format!("unsupported version {version}"),
        });
    }
    let posts: Vec<Post> = serde_json::from_slice(&bytes[12..])?;
    PostCollection::new(posts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(id: &str, platform: &str, source: &str, text: &str, ts: &str) -> String {
        format!(
            r#"{{"post_id":"{id}","platform":"{platform}","source":"{source}","text":"{text}","timestamp":"{ts}"}}"#
        )
    }

    fn ingest_str(input: &str) -> Result<IngestReport> {
        ingest_reader(input.as_bytes(), &IngestConfig::default())
    }

    #[test]
    fn three_valid_lines() {
        let input = [
            line("t1", "twitter", "@UserA", "hello", "2021-01-01T00:00:00Z"),
            line("t2", "twitter", "userb", "hello again", "2021-01-01T01:00:00Z"),
            line("f1", "facebook", "g123", "namaste", "2021-01-02T00:00:00Z"),
        ]
        .join("\n");
        let report = ingest_str(&input).unwrap();
        assert_eq!(report.posts.len(), 3);
        assert!(report.skipped.is_empty());
        assert_eq!(report.posts.get("f1").unwrap().source_key.key(), "g123");
    }

    #[test]
    fn missing_timestamp_is_skipped() {
        let input = [
            line("t1", "twitter", "a", "x", "2021-01-01T00:00:00Z"),
            r#"{"post_id":"t2","platform":"twitter","source":"b","text":"y"}"#.to_string(),
            line("t3", "twitter", "c", "z", "2021-01-01T00:00:00Z"),
        ]
        .join("\n");
        let report = ingest_str(&input).unwrap();
        assert_eq!(report.posts.len(), 2);
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].line, 2);
    }

    #[test]
    fn duplicate_id_is_fatal() {
        let input = [
            line("t1", "twitter", "a", "x", "2021-01-01T00:00:00Z"),
            line("t1", "twitter", "b", "y", "2021-01-01T00:00:00Z"),
        ]
        .join("\n");
        match ingest_str(&input) {
            Err(Error::DuplicatePost { post_id, line }) => {
                assert_eq!(post_id, "t1");
                assert_eq!(line, 2);
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_platform_and_window() {
        let input = [
            line("t1", "mastodon", "a", "x", "2021-01-01T00:00:00Z"),
            line("t2", "twitter", "a", "x", "2025-01-01T00:00:00Z"),
        ]
        .join("\n");
        let config = IngestConfig {
            extra_platforms: vec!["Mastodon".into()],
            window: Some((0, parse_timestamp("2022-01-01T00:00:00Z").unwrap())),
        };
        let report = ingest_reader(input.as_bytes(), &config).unwrap();
        assert_eq!(report.posts.len(), 1);
        assert_eq!(
            report.posts.posts()[0].platform,
            Platform::Other("mastodon".into())
        );
        assert_eq!(report.skipped[0].line, 2);
        let strict = ingest_str(&input).unwrap();
        assert_eq!(strict.posts.len(), 1);
    }

    #[test]
    fn empty_source_skipped_and_errors() {
        let input = line("t1", "twitter", "  ", "x", "2021-01-01T00:00:00Z");
        assert_eq!(ingest_str(&input).unwrap().skipped.len(), 1);
        assert!(matches!(
            source_key("t1", &Platform::Twitter, "@"),
            Err(Error::EmptySource { .. })
        ));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_text("abc"), "abc");
        assert_eq!(normalize_text("a \n\t b "), "a b");
        // Frozen from Python's unicodedata.normalize("NFC", ...):
        // U+0928 U+093C composes to U+0929.
        assert_eq!(normalize_text("\u{0928}\u{093C}"), "\u{0929}");
        // U+0958 is composition-excluded, so U+0915 U+093C stays decomposed.
        assert_eq!(normalize_text("\u{0915}\u{093C}"), "\u{0915}\u{093C}");
        assert_eq!(normalize_text("\u{0958}"), "\u{0915}\u{093C}");
    }

    #[test]
    fn source_key_canonicalization() {
        let a = source_key("1", &Platform::Twitter, "@UserA").unwrap();
        assert_eq!(a.platform(), &Platform::Twitter);
        assert_eq!(a.key(), "usera");
        let b = source_key("2", &Platform::Twitter, "usera").unwrap();
        assert_eq!(a, b);
        let f = source_key("3", &Platform::Facebook, "g123").unwrap();
        assert_eq!(f.key(), "g123");
        let f_upper = source_key("4", &Platform::Facebook, "G123").unwrap();
        assert_ne!(f, f_upper);
        assert_eq!(f.to_string().parse::<SourceKey>().unwrap(), f);
    }

    #[test]
    fn corpus_file_round_trip() {
        let input = [
            line("t1", "twitter", "a", "x  y", "2021-01-01T00:00:00Z"),
            line("f1", "facebook", "G", "z", "2021-01-03T10:00:00Z"),
        ]
        .join("\n");
        let posts = ingest_str(&input).unwrap().posts;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.bin");
        save_corpus(&posts, &path).unwrap();
        assert_eq!(load_corpus(&path).unwrap(), posts);
        std::fs::write(&path, b"garbage!garbage").unwrap();
        assert!(matches!(load_corpus(&path), Err(Error::Format { .. })));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(text in "\\PC{0,40}") {
            let once = normalize_text(&text);
            prop_assert_eq!(normalize_text(&once), once);
        }

        #[test]
        fn ingest_serialize_reingest(
            texts in prop::collection::vec("[a-zA-Z\u{0900}-\u{097F} \t]{0,20}", 1..8),
            facebook in prop::collection::vec(any::<bool>(), 8),
            offsets in prop::collection::vec(0i64..10_000_000, 8),
        ) {
            let posts: Vec<Post> = texts.iter().enumerate().map(|(i, text)| {
                let platform = if facebook[i] { Platform::Facebook } else { Platform::Twitter };
                Post {
                    post_id: format!("p{i}"),
                    source_key: SourceKey::new(platform.clone(), &format!("Src{i}")).unwrap(),
                    platform,
                    text_norm: normalize_text(text),
                    text_raw: text.clone(),
                    timestamp: 1_600_000_000 + offsets[i],
                    language_hint: None,
                    event: None,
                }
            }).collect();
            let collection = PostCollection::new(posts).unwrap();
            let mut buf = Vec::new();
            write_posts_jsonl(&collection, &mut buf).unwrap();
            let first = ingest_reader(buf.as_slice(), &IngestConfig::default()).unwrap().posts;
            let mut buf2 = Vec::new();
            write_posts_jsonl(&first, &mut buf2).unwrap();
            let second = ingest_reader(buf2.as_slice(), &IngestConfig::default()).unwrap().posts;
            prop_assert_eq!(&first, &second);
            prop_assert_eq!(first, collection);
        }
    }
}
