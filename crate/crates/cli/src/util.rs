//! Shared command plumbing.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use lthm_core::corpus::{read_split, Corpus, Vocabulary};
use lthm_core::model::SavedModel;
use lthm_core::ranking::RankedPrediction;

/// Creates the output directory right before the first write, so failed
/// commands leave nothing behind.
pub fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

pub fn open_reader(path: &Path) -> Result<BufReader<fs::File>> {
    Ok(BufReader::new(
        fs::File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

pub fn create_writer(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    Ok(SavedModel::read(open_reader(path)?)?)
}

pub fn load_vocab(path: &Path) -> Result<Vocabulary> {
    Ok(Vocabulary::read_tsv(open_reader(path)?)?)
}

/// Configures the global worker pool; 0 keeps the default (all cores).
pub fn init_threads(threads: usize) -> Result<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

pub fn read_split_sets(corpus: &Corpus, path: &Path) -> Result<(BTreeSet<usize>, BTreeSet<usize>)> {
    Ok(read_split(corpus, open_reader(path)?)?)
}

/// One line of a rankings file.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct RankingRecord {
    pub doc: String,
    pub ranking: Vec<(String, f64)>,
}

pub fn write_ranking_line<W: Write>(
    mut w: W,
    corpus: &Corpus,
    doc: usize,
    prediction: &RankedPrediction,
) -> Result<()> {
    let record = RankingRecord {
        doc: corpus.doc(doc).doc_id.clone(),
        ranking: prediction
            .entries
            .iter()
            .map(|&(target, score)| (corpus.doc(target).doc_id.clone(), score))
            .collect(),
    };
    serde_json::to_writer(&mut w, &record)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_rankings(path: &Path) -> Result<Vec<RankingRecord>> {
    use std::io::BufRead;
    let mut out = Vec::new();
    for (idx, line) in open_reader(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RankingRecord = serde_json::from_str(&line)
            .with_context(|| format!("{}: bad record on line {}", path.display(), idx + 1))?;
        out.push(record);
    }
    Ok(out)
}
