//! Hypertext corpus ingestion, vocabularies, and train/test views.
//!
//! The on-disk corpus format is line-delimited JSON, one document per line:
//!
//! ```text
//! {"id": "doc-a", "tokens": ["some", "words"], "links": [{"pos": 1, "target": "doc-b"}]}
//! ```
//!
//! A link is anchored to exactly one token (`pos` indexes into `tokens`);
//! self-links are legal. Tokens that fall below the vocabulary frequency
//! cutoff are dropped and link positions re-indexed; if a dropped token
//! carried a link, the token is replaced by the reserved [`LINK_PLACEHOLDER`]
//! word so the link keeps a word anchor.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Reserved token substituted for out-of-vocabulary link anchors.
pub const LINK_PLACEHOLDER: &str = "__link__";

/// Hex SHA-256 of a byte string; shared by vocabulary digests and run manifests.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Word ↔ dense-id bijection. Ids are contiguous in `0..word_count()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    placeholder: Option<usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from an ordered word list; ids follow list order.
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::invalid("vocabulary is empty"));
        }
        let mut index = HashMap::with_capacity(words.len());
        let mut placeholder = None;
        for (id, w) in words.iter().enumerate() {
            if index.insert(w.clone(), id).is_some() {
                return Err(Error::invalid(format!("duplicate word {w:?} in vocabulary")));
            }
            if w == LINK_PLACEHOLDER {
                placeholder = Some(id);
            }
        }
        Ok(Self { words, index, placeholder })
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn placeholder_id(&self) -> Option<usize> {
        self.placeholder
    }

    /// SHA-256 over the canonical `word<TAB>id` listing.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        for (id, w) in self.words.iter().enumerate() {
            buf.extend_from_slice(w.as_bytes());
            buf.push(b'\t');
            buf.extend_from_slice(id.to_string().as_bytes());
            buf.push(b'\n');
        }
        sha256_hex(&buf)
    }

    /// Writes `word<TAB>id` lines.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (id, word) in self.words.iter().enumerate() {
            writeln!(w, "{word}\t{id}")?;
        }
        Ok(())
    }

    /// Reads a `word<TAB>id` listing; ids must be dense and in order.
    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut words = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (word, id) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno + 1, "expected word<TAB>id"))?;
            let id: usize = id
                .parse()
                .map_err(|_| Error::parse(lineno + 1, format!("bad id {id:?}")))?;
            if id != words.len() {
                return Err(Error::parse(lineno + 1, format!("non-contiguous id {id}")));
            }
            words.push(word.to_string());
        }
        Self::from_words(words)
    }
}

/// One raw (string-typed) link in the input file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RawLink {
    pub pos: usize,
    pub target: String,
}

/// One document exactly as it appears in the corpus file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RawRecord {
    pub id: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<RawLink>,
    #[serde(skip)]
    pub line: usize,
}

/// Reads line-delimited records, attaching 1-based line numbers.
pub fn read_raw_records<R: BufRead>(r: R) -> Result<Vec<RawRecord>> {
    let mut records = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: RawRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(idx + 1, format!("bad record: {e}")))?;
        rec.line = idx + 1;
        records.push(rec);
    }
    Ok(records)
}

/// Vocabulary construction policy: frequency cutoff plus a stopword list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VocabPolicy {
    pub min_count: usize,
    pub stopwords: BTreeSet<String>,
}

impl Default for VocabPolicy {
    fn default() -> Self {
        Self { min_count: 1, stopwords: BTreeSet::new() }
    }
}

/// Retains words with frequency ≥ `min_count` that are not stopwords.
///
/// Ids are assigned by descending corpus frequency, ties broken
/// lexicographically. The reserved placeholder word is appended with the last
/// id when some link anchors a word that did not survive filtering (or when
/// the input already contains the literal placeholder token).
pub fn build_vocabulary(
    records: &[RawRecord],
    min_count: usize,
    stopwords: &BTreeSet<String>,
) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::invalid("min_count must be at least 1"));
    }
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    let mut saw_placeholder = false;
    for rec in records {
        for tok in &rec.tokens {
            if tok == LINK_PLACEHOLDER {
                saw_placeholder = true;
            } else {
                *freq.entry(tok.as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut retained: Vec<(&str, usize)> = freq
        .into_iter()
        .filter(|(w, n)| *n >= min_count && !stopwords.contains(*w))
        .collect();
    if retained.is_empty() {
        return Err(Error::invalid("vocabulary is empty after filtering"));
    }
    // Descending frequency, ties lexicographic.
    retained.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut words: Vec<String> = retained.iter().map(|(w, _)| w.to_string()).collect();
    let word_set: BTreeSet<&str> = retained.iter().map(|(w, _)| *w).collect();

    let dropped_anchor = records.iter().any(|rec| {
        rec.links.iter().any(|l| {
            rec.tokens
                .get(l.pos)
                .is_some_and(|t| t != LINK_PLACEHOLDER && !word_set.contains(t.as_str()))
        })
    });
    if saw_placeholder || dropped_anchor {
        words.push(LINK_PLACEHOLDER.to_string());
    }
    Vocabulary::from_words(words)
}

/// An indexed document: word ids plus a token-index → target-doc map.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub doc_id: String,
    pub tokens: Vec<usize>,
    pub link_at: BTreeMap<usize, usize>,
}

impl Document {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// An immutable indexed corpus; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    doc_index: HashMap<String, usize>,
    total_tokens: usize,
    total_links: usize,
}

impl Corpus {
    pub fn n_docs(&self) -> usize {
        self.documents.len()
    }

    pub fn word_count(&self) -> usize {
        self.vocabulary.word_count()
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    pub fn total_links(&self) -> usize {
        self.total_links
    }

    pub fn doc(&self, d: usize) -> &Document {
        &self.documents[d]
    }

    pub fn docs(&self) -> &[Document] {
        &self.documents
    }

    pub fn doc_id_to_index(&self, id: &str) -> Option<usize> {
        self.doc_index.get(id).copied()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    /// View with every document's links visible.
    pub fn full_view(&self) -> CorpusView<'_> {
        CorpusView { corpus: self, visible_sources: (0..self.n_docs()).collect() }
    }

    /// View restricted to links originating from `sources`.
    pub fn view(&self, sources: BTreeSet<usize>) -> CorpusView<'_> {
        CorpusView { corpus: self, visible_sources: sources }
    }

    /// Serializes back to the line-delimited record format.
    pub fn write_records<W: Write>(&self, mut w: W) -> Result<()> {
        for doc in &self.documents {
            let rec = RawRecord {
                id: doc.doc_id.clone(),
                tokens: doc.tokens.iter().map(|&t| self.vocabulary.word(t).to_string()).collect(),
                links: doc
                    .link_at
                    .iter()
                    .map(|(&pos, &tgt)| RawLink {
                        pos,
                        target: self.documents[tgt].doc_id.clone(),
                    })
                    .collect(),
                line: 0,
            };
            serde_json::to_writer(&mut w, &rec).map_err(|e| Error::invalid(e.to_string()))?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Assembles a corpus from already-indexed documents (used by the
    /// synthetic generator, which controls its own ids).
    pub fn from_parts(documents: Vec<Document>, vocabulary: Vocabulary) -> Result<Self> {
        let mut doc_index = HashMap::with_capacity(documents.len());
        let mut total_tokens = 0;
        let mut total_links = 0;
        for (d, doc) in documents.iter().enumerate() {
            if doc_index.insert(doc.doc_id.clone(), d).is_some() {
                return Err(Error::invalid(format!("duplicate document id {:?}", doc.doc_id)));
            }
            total_tokens += doc.tokens.len();
            total_links += doc.link_at.len();
            if let Some(&t) = doc.tokens.iter().find(|&&t| t >= vocabulary.word_count()) {
                return Err(Error::invalid(format!("word id {t} out of range")));
            }
            for (&pos, &tgt) in &doc.link_at {
                if pos >= doc.tokens.len() {
                    return Err(Error::invalid(format!(
                        "link position {pos} out of range in {:?}",
                        doc.doc_id
                    )));
                }
                if tgt >= documents.len() {
                    return Err(Error::invalid(format!("link target {tgt} out of range")));
                }
            }
        }
        if documents.is_empty() {
            return Err(Error::invalid("corpus has no documents"));
        }
        Ok(Self { documents, vocabulary, doc_index, total_tokens, total_links })
    }
}

/// Indexes raw records against a fixed vocabulary.
///
/// Out-of-vocabulary tokens are dropped (link positions re-indexed); dropped
/// tokens that anchor a link become the placeholder word.
pub fn index_corpus(records: Vec<RawRecord>, vocabulary: Vocabulary) -> Result<Corpus> {
    // Pass 1: id table, so link targets can be validated with line numbers.
    let mut doc_index: HashMap<String, usize> = HashMap::with_capacity(records.len());
    for (d, rec) in records.iter().enumerate() {
        if doc_index.insert(rec.id.clone(), d).is_some() {
            return Err(Error::parse(rec.line, format!("duplicate document id {:?}", rec.id)));
        }
    }

    let mut documents = Vec::with_capacity(records.len());
    let mut total_tokens = 0;
    let mut total_links = 0;
    for rec in &records {
        let mut link_for_pos: BTreeMap<usize, usize> = BTreeMap::new();
        for link in &rec.links {
            if link.pos >= rec.tokens.len() {
                return Err(Error::parse(rec.line, "link position out of range"));
            }
            let target = *doc_index.get(&link.target).ok_or_else(|| {
                Error::parse(rec.line, format!("link target {:?} not found in corpus", link.target))
            })?;
            if link_for_pos.insert(link.pos, target).is_some() {
                // One word carries at most one link; multi-token anchors are
                // out of scope and rejected.
                return Err(Error::parse(
                    rec.line,
                    format!("multiple links anchored at token {}", link.pos),
                ));
            }
        }

        let mut tokens = Vec::with_capacity(rec.tokens.len());
        let mut link_at = BTreeMap::new();
        for (pos, tok) in rec.tokens.iter().enumerate() {
            let target = link_for_pos.get(&pos).copied();
            match (vocabulary.id(tok), target) {
                (Some(id), Some(t)) => {
                    link_at.insert(tokens.len(), t);
                    tokens.push(id);
                }
                (Some(id), None) => tokens.push(id),
                (None, Some(t)) => {
                    // The anchor word did not survive filtering; the reserved
                    // placeholder word keeps the link anchored to a token.
                    let ph = vocabulary.placeholder_id().ok_or_else(|| {
                        Error::parse(
                            rec.line,
                            format!("link anchor {tok:?} is out of vocabulary and no placeholder is reserved"),
                        )
                    })?;
                    link_at.insert(tokens.len(), t);
                    tokens.push(ph);
                }
                (None, None) => {} // dropped
            }
        }
        total_tokens += tokens.len();
        total_links += link_at.len();
        documents.push(Document { doc_id: rec.id.clone(), tokens, link_at });
    }
    if documents.is_empty() {
        return Err(Error::invalid("corpus has no documents"));
    }
    Ok(Corpus { documents, vocabulary, doc_index, total_tokens, total_links })
}

/// Parses a corpus stream, building the vocabulary under `policy`.
pub fn parse_corpus<R: BufRead>(reader: R, policy: &VocabPolicy) -> Result<Corpus> {
    let records = read_raw_records(reader)?;
    let vocabulary = build_vocabulary(&records, policy.min_count, &policy.stopwords)?;
    index_corpus(records, vocabulary)
}

/// Parses a corpus stream against an existing vocabulary.
pub fn parse_corpus_with_vocab<R: BufRead>(reader: R, vocabulary: Vocabulary) -> Result<Corpus> {
    let records = read_raw_records(reader)?;
    index_corpus(records, vocabulary)
}

/// A corpus with a restricted set of visible link sources.
///
/// All document text is always visible; iterating links yields only links
/// whose source document is in the visible set.
#[derive(Debug, Clone)]
pub struct CorpusView<'a> {
    corpus: &'a Corpus,
    visible_sources: BTreeSet<usize>,
}

impl<'a> CorpusView<'a> {
    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn sources(&self) -> &BTreeSet<usize> {
        &self.visible_sources
    }

    pub fn is_source_visible(&self, d: usize) -> bool {
        self.visible_sources.contains(&d)
    }

    /// Target of the link at token `(d, i)`, if the link is visible.
    pub fn link_at(&self, d: usize, i: usize) -> Option<usize> {
        if self.visible_sources.contains(&d) {
            self.corpus.documents[d].link_at.get(&i).copied()
        } else {
            None
        }
    }

    /// All visible links as `(source, token_index, target)`.
    pub fn iter_links(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.visible_sources.iter().flat_map(move |&d| {
            self.corpus.documents[d].link_at.iter().map(move |(&i, &t)| (d, i, t))
        })
    }

    pub fn visible_link_count(&self) -> usize {
        self.visible_sources
            .iter()
            .map(|&d| self.corpus.documents[d].link_at.len())
            .sum()
    }

    /// Same text, no visible links at all.
    pub fn without_links(&self) -> CorpusView<'a> {
        CorpusView { corpus: self.corpus, visible_sources: BTreeSet::new() }
    }

    /// Count of visible links targeting each document (self-links included).
    pub fn in_degree(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.corpus.n_docs()];
        for (_, _, target) in self.iter_links() {
            counts[target] += 1;
        }
        counts
    }
}

/// Splits documents into train/test views: `ceil(test_fraction · D)` test
/// documents drawn uniformly without replacement via a seeded shuffle.
///
/// The train view exposes only links originating from train documents; the
/// test view exposes the held-out links. Both see all text.
pub fn split_train_test(
    corpus: &Corpus,
    test_fraction: f64,
    seed: u64,
) -> Result<(CorpusView<'_>, CorpusView<'_>)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let d = corpus.n_docs();
    if d < 2 {
        return Err(Error::invalid("cannot split a corpus with fewer than 2 documents"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n_test = (test_fraction * d as f64).ceil() as usize;
    if n_test == 0 || n_test >= d {
        return Err(Error::invalid(format!(
            "test fraction {test_fraction} leaves an empty train or test set (D = {d})"
        )));
    }
    let mut order: Vec<usize> = (0..d).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let test: BTreeSet<usize> = order[..n_test].iter().copied().collect();
    let train: BTreeSet<usize> = order[n_test..].iter().copied().collect();
    Ok((corpus.view(train), corpus.view(test)))
}

/// Writes `doc_id<TAB>{train|test}` lines in document order.
pub fn write_split<W: Write>(corpus: &Corpus, test: &BTreeSet<usize>, mut w: W) -> Result<()> {
    for (d, doc) in corpus.docs().iter().enumerate() {
        let label = if test.contains(&d) { "test" } else { "train" };
        writeln!(w, "{}\t{label}", doc.doc_id)?;
    }
    Ok(())
}

/// Reads a split file; every document must be labeled exactly once.
pub fn read_split<R: BufRead>(corpus: &Corpus, r: R) -> Result<(BTreeSet<usize>, BTreeSet<usize>)> {
    let mut train = BTreeSet::new();
    let mut test = BTreeSet::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(lineno + 1, "expected doc_id<TAB>{train|test}"))?;
        let d = corpus
            .doc_id_to_index(id)
            .ok_or_else(|| Error::parse(lineno + 1, format!("unknown document id {id:?}")))?;
        let inserted = match label {
            "train" => train.insert(d),
            "test" => test.insert(d),
            other => return Err(Error::parse(lineno + 1, format!("unknown label {other:?}"))),
        };
        if !inserted || (train.contains(&d) && test.contains(&d)) {
            return Err(Error::parse(lineno + 1, format!("document {id:?} labeled twice")));
        }
    }
    if train.len() + test.len() != corpus.n_docs() {
        return Err(Error::invalid("split file does not cover every document"));
    }
    Ok((train, test))
}
