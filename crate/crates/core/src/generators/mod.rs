//! Structured text generators: slot lexicons, Cardan grilles and the Naibbe
//! verbose cipher. Every generator emits words as EVA strings that are
//! re-tokenized with the configured inventory, so a written corpus reloads
//! to exactly the corpus that was measured.

pub mod config;
pub mod grille;
pub mod naibbe;
pub mod slot;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize_eva, Corpus, CorpusBuilder, GraphemeInventory, Tokenization};
use crate::error::{Error, Result};
use crate::seed::Rng;

pub use config::KvConfig;
pub use grille::{GrilleConfig, GrilleMode, Specialization};
pub use naibbe::{NaibbeConfig, NaibbeTables};
pub use slot::{Ablation, SlotConfig};

const DEFAULT_LENGTHS: &str = include_str!("../../data/sentence_lengths.txt");

/// Rank weights `(rank + 1)^-alpha` for ranks `0..n`.
pub fn zipf_weights(n: usize, alpha: f64) -> Vec<f64> {
    (0..n).map(|r| ((r + 1) as f64).powf(-alpha)).collect()
}

/// Weighted sampler that tolerates all-zero or degenerate weights.
#[derive(Debug, Clone)]
pub(crate) struct Sampler(WeightedIndex<f64>);

impl Sampler {
    pub(crate) fn new(weights: &[f64]) -> Result<Self> {
        WeightedIndex::new(weights)
            .map(Sampler)
            .map_err(|e| Error::InvalidParameter(format!("bad sampling weights: {e}")))
    }

    pub(crate) fn sample(&self, rng: &mut Rng) -> usize {
        self.0.sample(rng)
    }
}

/// Empirical distribution of sentence lengths in words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthModel {
    /// `(length, count)` pairs.
    pub counts: Vec<(usize, u64)>,
}

impl LengthModel {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KvConfig::parse(text)?;
        let keys: Vec<String> = kv.keys().map(str::to_string).collect();
        let mut counts = Vec::with_capacity(keys.len());
        for key in keys {
            let len: usize = key
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("sentence length {key:?} is not a number")))?;
            let count: u64 = kv.take(&key)?.unwrap_or(0);
            if len > 0 && count > 0 {
                counts.push((len, count));
            }
        }
        Self::new(counts)
    }

    pub fn new(mut counts: Vec<(usize, u64)>) -> Result<Self> {
        counts.retain(|&(l, k)| l > 0 && k > 0);
        if counts.is_empty() {
            return Err(Error::InvalidParameter("sentence length model is empty".into()));
        }
        counts.sort_unstable();
        Ok(LengthModel { counts })
    }

    /// Every sentence has the same length.
    pub fn fixed(len: usize) -> Result<Self> {
        Self::new(vec![(len, 1)])
    }

    pub fn from_corpus(c: &Corpus) -> Result<Self> {
        let mut counts: std::collections::BTreeMap<usize, u64> = Default::default();
        for l in c.sentence_lengths() {
            *counts.entry(l).or_default() += 1;
        }
        Self::new(counts.into_iter().collect())
    }

    pub fn mean(&self) -> f64 {
        let total: u64 = self.counts.iter().map(|c| c.1).sum();
        self.counts.iter().map(|&(l, k)| l as f64 * k as f64).sum::<f64>() / total as f64
    }

    pub(crate) fn sampler(&self) -> Result<Sampler> {
        Sampler::new(&self.counts.iter().map(|c| c.1 as f64).collect::<Vec<_>>())
    }
}

impl Default for LengthModel {
    fn default() -> Self {
        LengthModel::parse(DEFAULT_LENGTHS).expect("bundled sentence lengths are valid")
    }
}

/// Configuration and seed that produced a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub n_words: usize,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub corpus: Corpus,
    pub provenance: Provenance,
}

/// Cuts a word stream into sentences and tokenizes every word.
pub(crate) fn assemble(
    name: &str,
    words: &[String],
    lengths: &LengthModel,
    inventory: &GraphemeInventory,
    rng: &mut Rng,
) -> Result<Corpus> {
    let sampler = lengths.sampler()?;
    let mut builder = CorpusBuilder::new(name, Tokenization::EvaLongestMatch);
    let mut rest = words;
    while !rest.is_empty() {
        let len = lengths.counts[sampler.sample(rng)].0.min(rest.len());
        let (head, tail) = rest.split_at(len);
        let sentence = head
            .iter()
            .map(|w| tokenize_eva(w, inventory))
            .collect::<Result<Vec<_>>>()?;
        builder.push_sentence(&sentence);
        rest = tail;
    }
    builder.build()
}

pub(crate) fn check_words(n_words: usize) -> Result<()> {
    if n_words == 0 {
        return Err(Error::InvalidParameter("n_words must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn check_prob(key: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(config::invalid(key, format!("{p} is not a probability")));
    }
    Ok(())
}

/// Reads `sentence_lengths` (a path) from a config, falling back to the default.
pub(crate) fn take_lengths(kv: &mut KvConfig) -> Result<LengthModel> {
    match kv.take_str("sentence_lengths") {
        None => Ok(LengthModel::default()),
        Some(v) => match v.parse::<usize>() {
            Ok(n) => LengthModel::fixed(n),
            Err(_) => {
                let path = std::path::Path::new(&v);
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                LengthModel::parse(&text)
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn zipf_zero_is_uniform() {
        assert!(zipf_weights(5, 0.0).iter().all(|&w| w == 1.0));
        let w = zipf_weights(3, 1.0);
        assert_eq!(w, vec![1.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn default_lengths_load() {
        let m = LengthModel::default();
        assert_eq!(m.counts.first().unwrap().0, 1);
        assert!(m.mean() > 7.0 && m.mean() < 11.0);
    }

    #[test]
    fn assemble_keeps_every_word() {
        let words: Vec<String> = ["qokeedy", "daiin", "chol", "shedy", "otaiin"]
            .iter()
            .cycle()
            .take(103)
            .map(|s| s.to_string())
            .collect();
        let mut rng = seed::rng(1);
        let c = assemble(
            "t",
            &words,
            &LengthModel::fixed(10).unwrap(),
            &GraphemeInventory::eva_default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(c.word_count(), 103);
        assert_eq!(c.sentences.len(), 11);
        assert_eq!(c.sentences.last().unwrap().words.len(), 3);
    }
}
