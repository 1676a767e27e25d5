//! Embedding matrices: the EMB1 file format, unit normalization, cosine
//! similarity and alignment with a post collection.
//!
//! EMB1 layout (little-endian): magic `EMB1`, `u32` dim, `u64` count, then
//! per record a `u16` id length, the UTF-8 id bytes and `dim` `f32` values.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Post, PostCollection};
use crate::error::{Error, IoContext, Result};

pub const EMB1_MAGIC: &[u8; 4] = b"EMB1";
pub const DEFAULT_DIM: usize = 1024;
const ALIGNED_MAGIC: &[u8; 8] = b"MGALIGN1";

/// Scores are accumulated in `f64`, strictly left to right, so a pair's
/// score is bitwise reproducible regardless of how the sweep is scheduled.
#[inline]
pub fn dot(u: &[f32], v: &[f32]) -> f64 {
    let mut acc = 0.0f64;
    for (a, b) in u.iter().zip(v) {
        acc += f64::from(*a) * f64::from(*b);
    }
    acc
}

pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let norms = dot(u, u).sqrt() * dot(v, v).sqrt();
    if norms == 0.0 {
        return Err(Error::InvalidArgument("cosine of a zero vector".into()));
    }
    Ok((dot(u, v) / norms).clamp(-1.0, 1.0))
}

/// Row-major dense matrix of id-tagged vectors in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
    index: HashMap<String, usize>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize, ids: Vec<String>, data: Vec<f32>) -> Result<EmbeddingMatrix> {
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: ids.len() * dim,
            });
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (row, id) in ids.iter().enumerate() {
            if data[row * dim..(row + 1) * dim].iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(id.clone()));
            }
            if index.insert(id.clone(), row).is_some() {
                return Err(Error::DuplicateEmbedding(id.clone()));
            }
        }
        Ok(EmbeddingMatrix {
            dim,
            ids,
            data,
            index,
        })
    }

    pub fn from_rows(dim: usize, rows: Vec<(String, Vec<f32>)>) -> Result<EmbeddingMatrix> {
        let mut ids = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (id, vector) in rows {
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: vector.len(),
                    right: dim,
                });
            }
            ids.push(id);
            data.extend(vector);
        }
        EmbeddingMatrix::new(dim, ids, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn row_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn vector(&self, id: &str) -> Option<&[f32]> {
        self.row_of(id).map(|row| self.row(row))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Scales every row to unit L2 norm.
    pub fn unit_normalize(mut self) -> Result<EmbeddingMatrix> {
        let dim = self.dim;
        for (row, chunk) in self.data.chunks_mut(dim).enumerate() {
            let norm = chunk.iter().map(|x| f64::from(*x) * f64::from(*x)).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroVector(self.ids[row].clone()));
            }
            for x in chunk.iter_mut() {
                *x = (f64::from(*x) / norm) as f32;
            }
        }
        Ok(self)
    }

    /// True when every row norm is within `tol` of 1.
    pub fn is_unit_normalized(&self, tol: f64) -> bool {
        self.data
            .chunks(self.dim)
            .all(|row| (dot(row, row).sqrt() - 1.0).abs() <= tol)
    }

    /// Keeps the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> EmbeddingMatrix {
        let ids: Vec<String> = rows.iter().map(|&r| self.ids[r].clone()).collect();
        let mut data = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        EmbeddingMatrix {
            dim: self.dim,
            ids,
            data,
            index,
        }
    }

    pub fn write_emb1<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |r: std::io::Result<()>| r.at("<emb1>");
        io(out.write_all(EMB1_MAGIC))?;
        io(out.write_all(&(self.dim as u32).to_le_bytes()))?;
        io(out.write_all(&(self.len() as u64).to_le_bytes()))?;
        for (row, id) in self.ids.iter().enumerate() {
            let len = u16::try_from(id.len()).map_err(|_| Error::Format {
                format: "EMB1",
                reason: format!("id {id:?} longer than 65535 bytes"),
            })?;
            io(out.write_all(&len.to_le_bytes()))?;
            io(out.write_all(id.as_bytes()))?;
            for x in self.row(row) {
                io(out.write_all(&x.to_le_bytes()))?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = BufWriter::new(File::create(path).at(path)?);
        self.write_emb1(&mut out)?;
        out.flush().at(path)
    }

    pub fn parse_emb1(bytes: &[u8]) -> Result<EmbeddingMatrix> {
        let mut cursor = Cursor { bytes, pos: 0 };
        if cursor.take(4, "magic")? != EMB1_MAGIC {
            return Err(Error::Format {
                format: "EMB1",
                reason: "bad magic".into(),
            });
        }
        let dim = u32::from_le_bytes(cursor.array("dim")?) as usize;
        let count = u64::from_le_bytes(cursor.array("count")?) as usize;
        if dim == 0 {
            return Err(Error::Format {
                format: "EMB1",
                reason: "dim is zero".into(),
            });
        }
        let mut ids = Vec::with_capacity(count.min(1 << 20));
        let mut data = Vec::with_capacity(count.min(1 << 20) * dim);
        for n in 0..count {
            let what = || format!("record {n} of {count}");
            let id_len = u16::from_le_bytes(cursor.array_named(what)?) as usize;
            let id = std::str::from_utf8(cursor.take_named(id_len, what)?)
                .map_err(|_| Error::Format {
                    format: "EMB1",
                    reason: format!("record {n}: id is not UTF-8"),
                })?
                .to_string();
            let raw = cursor.take_named(dim * 4, what)?;
            data.extend(
                raw.chunks_exact(4)
                    .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes"))),
            );
            ids.push(id);
        }
        if cursor.pos != bytes.len() {
            return Err(Error::Format {
                format: "EMB1",
                reason: format!("{} trailing bytes after {count} records", bytes.len() - cursor.pos),
            });
        }
        EmbeddingMatrix::new(dim, ids, data)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take_named(&mut self, n: usize, what: impl Fn() -> String) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated {
                format: "EMB1",
                reason: format!("ended while reading {}", what()),
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        self.take_named(n, || what.to_string())
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().expect("sized"))
    }

    fn array_named<const N: usize>(&mut self, what: impl Fn() -> String) -> Result<[u8; N]> {
        Ok(self.take_named(N, what)?.try_into().expect("sized"))
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path).at(path)?.read_to_end(&mut bytes).at(path)?;
    EmbeddingMatrix::parse_emb1(&bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignMode {
    #[default]
    Strict,
    Lenient,
}

impl std::str::FromStr for AlignMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "strict" => Ok(AlignMode::Strict),
            "lenient" => Ok(AlignMode::Lenient),
            other => Err(Error::InvalidArgument(format!("unknown align mode {other:?}"))),
        }
    }
}

/// Posts paired row-for-row with their vectors, in post file order.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedCorpus {
    posts: PostCollection,
    matrix: EmbeddingMatrix,
}

impl AlignedCorpus {
    pub fn posts(&self) -> &PostCollection {
        &self.posts
    }

    pub fn post(&self, row: usize) -> &Post {
        &self.posts.posts()[row]
    }

    pub fn matrix(&self) -> &EmbeddingMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn row_of(&self, post_id: &str) -> Option<usize> {
        self.posts.row_of(post_id)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = BufWriter::new(File::create(path).at(path)?);
        let posts = serde_json::to_vec(self.posts.posts())?;
        out.write_all(ALIGNED_MAGIC).at(path)?;
        out.write_all(&(posts.len() as u64).to_le_bytes()).at(path)?;
        out.write_all(&posts).at(path)?;
        self.matrix.write_emb1(&mut out)?;
        out.flush().at(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<AlignedCorpus> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path).at(path)?.read_to_end(&mut bytes).at(path)?;
        let bad = |reason: &str| Error::Format {
            format: "aligned corpus",
            reason: reason.to_string(),
        };
        if bytes.len() < 16 || &bytes[..8] != ALIGNED_MAGIC {
            return Err(bad("bad magic"));
        }
        let json_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        if bytes.len() < 16 + json_len {
            return Err(bad("truncated post block"));
        }
        let posts: Vec<Post> = serde_json::from_slice(&bytes[16..16 + json_len])?;
        let matrix = EmbeddingMatrix::parse_emb1(&bytes[16 + json_len..])?;
        let posts = PostCollection::new(posts)?;
        if posts.len() != matrix.len()
            || posts.iter().zip(matrix.ids()).any(|(p, id)| &p.post_id != id)
        {
            return Err(bad("posts and vectors are not row-aligned"));
        }
        Ok(AlignedCorpus { posts, matrix })
    }
}

#[derive(Debug)]
pub struct AlignReport {
    pub corpus: AlignedCorpus,
    /// Posts with no vector.
    pub posts_without_vector: Vec<String>,
    /// Vectors with no post.
    pub vectors_without_post: Vec<String>,
}

pub fn align(posts: &PostCollection, matrix: &EmbeddingMatrix, mode: AlignMode) -> Result<AlignReport> {
    let mut kept_posts = Vec::with_capacity(posts.len());
    let mut rows = Vec::with_capacity(posts.len());
    let mut posts_without_vector = Vec::new();
    for post in posts {
        match matrix.row_of(&post.post_id) {
            Some(row) => {
                kept_posts.push(post.clone());
                rows.push(row);
            }
            None => posts_without_vector.push(post.post_id.clone()),
        }
    }
    let vectors_without_post: Vec<String> = matrix
        .ids()
        .iter()
        .filter(|id| posts.get(id).is_none())
        .cloned()
        .collect();
    if mode == AlignMode::Strict {
        if let Some(first) = posts_without_vector.first().or(vectors_without_post.first()) {
            return Err(Error::MissingEmbeddings {
                count: posts_without_vector.len() + vectors_without_post.len(),
                first: first.clone(),
            });
        }
    }
    Ok(AlignReport {
        corpus: AlignedCorpus {
            posts: PostCollection::new(kept_posts)?,
            matrix: matrix.select(&rows),
        },
        posts_without_vector,
        vectors_without_post,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{normalize_text, Platform, SourceKey};
    use proptest::prelude::*;

    fn emb1_bytes(dim: u32, count: u64, rows: &[(&str, Vec<f32>)]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"EMB1");
        out.extend_from_slice(&dim.to_le_bytes());
        out.extend_from_slice(&count.to_le_bytes());
        for (id, v) in rows {
            out.extend_from_slice(&(id.len() as u16).to_le_bytes());
            out.extend_from_slice(id.as_bytes());
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    #[test]
    fn parse_valid_file() {
        let bytes = emb1_bytes(4, 2, &[("a", vec![1.0, 0.0, 0.0, 0.0]), ("b", vec![0.0, 2.0, 0.0, 0.0])]);
        let m = EmbeddingMatrix::parse_emb1(&bytes).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.dim(), 4);
        assert_eq!(m.vector("b").unwrap(), &[0.0, 2.0, 0.0, 0.0]);
        let mut again = Vec::new();
        m.write_emb1(&mut again).unwrap();
        assert_eq!(again, bytes);
    }

    #[test]
    fn truncated_file() {
        let bytes = emb1_bytes(4, 3, &[("a", vec![1.0; 4]), ("b", vec![1.0; 4])]);
        assert!(matches!(EmbeddingMatrix::parse_emb1(&bytes), Err(Error::Truncated { .. })));
        assert!(matches!(
            EmbeddingMatrix::parse_emb1(b"EMB0\x04\0\0\0"),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn nan_row_names_id() {
        let bytes = emb1_bytes(2, 2, &[("ok", vec![1.0, 0.0]), ("bad", vec![f32::NAN, 0.0])]);
        match EmbeddingMatrix::parse_emb1(&bytes) {
            Err(Error::NonFinite(id)) => assert_eq!(id, "bad"),
            other => panic!("{other:?}"),
        }
        let dup = emb1_bytes(2, 2, &[("x", vec![1.0, 0.0]), ("x", vec![0.0, 1.0])]);
        assert!(matches!(EmbeddingMatrix::parse_emb1(&dup), Err(Error::DuplicateEmbedding(_))));
    }

    #[test]
    fn normalize_examples() {
        let m = EmbeddingMatrix::from_rows(2, vec![("a".into(), vec![3.0, 4.0]), ("b".into(), vec![1.0, 0.0])])
            .unwrap()
            .unit_normalize()
            .unwrap();
        assert!((m.row(0)[0] - 0.6).abs() < 1e-7 && (m.row(0)[1] - 0.8).abs() < 1e-7);
        assert_eq!(m.row(1), &[1.0, 0.0]);
        let zero = EmbeddingMatrix::from_rows(2, vec![("z".into(), vec![0.0, 0.0])]).unwrap();
        assert!(matches!(zero.unit_normalize(), Err(Error::ZeroVector(id)) if id == "z"));
    }

    #[test]
    fn cosine_examples() {
        let v = [0.3f32, -1.2, 2.5];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let (s, c) = 25f64.to_radians().sin_cos();
        let score = cosine(&[1.0, 0.0], &[c as f32, s as f32]).unwrap();
        // cos 25° = 0.906307787... (high-precision scalar value)
        assert!((score - 0.906_307_787_036_649_9).abs() < 1e-7);
        assert!((score - 0.9063).abs() < 5e-5);
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    fn posts(ids: &[&str]) -> PostCollection {
        PostCollection::new(
            ids.iter()
                .map(|id| Post {
                    post_id: id.to_string(),
                    platform: Platform::Twitter,
                    source_key: SourceKey::new(Platform::Twitter, id).unwrap(),
                    text_raw: id.to_string(),
                    text_norm: normalize_text(id),
                    timestamp: 0,
                    language_hint: None,
                    event: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn align_modes() {
        let p = posts(&["a", "b", "c"]);
        let full = EmbeddingMatrix::from_rows(
            1,
            vec![("c".into(), vec![3.0]), ("a".into(), vec![1.0]), ("b".into(), vec![2.0])],
        )
        .unwrap();
        let report = align(&p, &full, AlignMode::Strict).unwrap();
        assert_eq!(report.corpus.len(), 3);
        assert_eq!(report.corpus.matrix().ids(), &["a", "b", "c"]);
        assert_eq!(report.corpus.matrix().row(2), &[3.0]);

        let partial = full.select(&[1, 0]);
        match align(&p, &partial, AlignMode::Strict) {
            Err(Error::MissingEmbeddings { count, first }) => {
                assert_eq!(count, 1);
                assert_eq!(first, "b");
            }
            other => panic!("{other:?}"),
        }
        let lenient = align(&p, &partial, AlignMode::Lenient).unwrap();
        assert_eq!(lenient.corpus.len(), 2);
        assert_eq!(lenient.posts_without_vector, vec!["b".to_string()]);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("aligned.bin");
        lenient.corpus.save(&path).unwrap();
        assert_eq!(AlignedCorpus::load(&path).unwrap(), lenient.corpus);
    }

    fn vector(dim: usize) -> impl Strategy<Value = Vec<f32>> {
        prop::collection::vec(-10.0f32..10.0, dim).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric(u in vector(16), v in vector(16)) {
            prop_assert_eq!(cosine(&u, &v).unwrap().to_bits(), cosine(&v, &u).unwrap().to_bits());
        }

        #[test]
        fn unit_rows_cosine_matches_dot(rows in prop::collection::vec(vector(8), 2..6)) {
            let m = EmbeddingMatrix::from_rows(
                8,
                rows.into_iter().enumerate().map(|(i, v)| (i.to_string(), v)).collect(),
            ).unwrap().unit_normalize().unwrap();
            prop_assert!(m.is_unit_normalized(1e-4));
            for i in 0..m.len() {
                for j in 0..m.len() {
                    let c = cosine(m.row(i), m.row(j)).unwrap();
                    prop_assert!((c - dot(m.row(i), m.row(j))).abs() <= 1e-6);
                }
            }
            let twice = m.clone().unit_normalize().unwrap();
            for (a, b) in m.as_slice().iter().zip(twice.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-6);
            }
        }
    }
}
