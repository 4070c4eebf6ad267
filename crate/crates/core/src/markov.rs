//! Word-level Markov chains and the directional dissociation experiment.
//!
//! Generated corpora reuse the training corpus's alphabet, so every emitted
//! word is one that already passed the training corpus's tokenization.

use rand::Rng as _;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::boundary;
use crate::corpus::{Corpus, Sentence, Word};
use crate::error::{Error, Result};
use crate::ngram;
use crate::seed::{self, Rng};
use crate::stats;

const BOS: u32 = u32::MAX;
const EOS: u32 = u32::MAX - 1;
/// Redraws allowed when EOS arrives before the target length.
const EOS_RETRIES: usize = 100;

/// Observed successors of one context with cumulative counts for sampling.
#[derive(Debug, Clone, Default)]
struct Successors {
    words: Vec<u32>,
    counts: Vec<u64>,
    cumulative: Vec<u64>,
    non_eos: u64,
}

impl Successors {
    fn add(&mut self, w: u32) {
        match self.words.iter().position(|&x| x == w) {
            Some(i) => self.counts[i] += 1,
            None => {
                self.words.push(w);
                self.counts.push(1);
            }
        }
        if w != EOS {
            self.non_eos += 1;
        }
    }

    fn finish(&mut self) {
        let mut acc = 0;
        self.cumulative = self
            .counts
            .iter()
            .map(|&k| {
                acc += k;
                acc
            })
            .collect();
    }

    fn total(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    fn sample(&self, rng: &mut Rng) -> u32 {
        let r = rng.random_range(0..self.total());
        self.words[self.cumulative.partition_point(|&c| c <= r)]
    }

    fn count(&self, w: u32) -> u64 {
        self.words
            .iter()
            .position(|&x| x == w)
            .map_or(0, |i| self.counts[i])
    }
}

type Context = [u32; 2];

/// Word chain of order 1 or 2 with BOS/EOS sentence markers.
#[derive(Debug, Clone)]
pub struct WordMarkovChain {
    order: usize,
    vocab: Vec<Word>,
    index: FxHashMap<Word, u32>,
    transitions: FxHashMap<Context, Successors>,
    /// First-order table used as a fallback for unseen order-2 contexts.
    backoff: FxHashMap<Context, Successors>,
    unigram: Successors,
    length_dist: Vec<usize>,
    template: Corpus,
}

fn context(history: &[u32], k: usize) -> Context {
    let mut ctx = [BOS; 2];
    let take = k.min(history.len());
    ctx[2 - take..].copy_from_slice(&history[history.len() - take..]);
    if k == 1 {
        ctx[0] = BOS;
    }
    ctx
}

pub fn train_chain(c: &Corpus, k: usize) -> Result<WordMarkovChain> {
    if !(1..=2).contains(&k) {
        return Err(Error::UnsupportedOrder(k));
    }
    if c.word_count() == 0 {
        return Err(Error::EmptyCorpus(c.name.clone()));
    }
    let mut index: FxHashMap<Word, u32> = FxHashMap::default();
    let mut vocab = Vec::new();
    let mut transitions: FxHashMap<Context, Successors> = FxHashMap::default();
    let mut backoff: FxHashMap<Context, Successors> = FxHashMap::default();
    let mut unigram = Successors::default();
    let mut length_dist = Vec::new();
    for s in &c.sentences {
        if s.words.is_empty() {
            continue;
        }
        length_dist.push(s.words.len());
        let mut history: Vec<u32> = Vec::with_capacity(s.words.len());
        let ids: Vec<u32> = s
            .words
            .iter()
            .map(|w| {
                *index.entry(w.clone()).or_insert_with(|| {
                    vocab.push(w.clone());
                    (vocab.len() - 1) as u32
                })
            })
            .chain(std::iter::once(EOS))
            .collect();
        for id in ids {
            transitions.entry(context(&history, k)).or_default().add(id);
            if k == 2 {
                backoff.entry(context(&history, 1)).or_default().add(id);
            }
            if id != EOS {
                unigram.add(id);
            }
            history.push(id);
        }
    }
    for s in transitions.values_mut().chain(backoff.values_mut()) {
        s.finish();
    }
    unigram.finish();
    Ok(WordMarkovChain {
        order: k,
        vocab,
        index,
        transitions,
        backoff,
        unigram,
        length_dist,
        template: c.with_sentences(Vec::new()),
    })
}

impl WordMarkovChain {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn length_distribution(&self) -> &[usize] {
        &self.length_dist
    }

    fn id(&self, w: &Word) -> Option<u32> {
        self.index.get(w).copied()
    }

    fn ctx_of(&self, words: &[&Word]) -> Option<Context> {
        let ids: Option<Vec<u32>> = words.iter().map(|w| self.id(w)).collect();
        Some(context(&ids?, self.order))
    }

    /// Count of `next` after the given history; `None` history entries mean
    /// sentence start. `next = None` asks for the EOS count.
    pub fn transition_count(&self, history: &[&Word], next: Option<&Word>) -> u64 {
        let Some(ctx) = self.ctx_of(history) else {
            return 0;
        };
        let target = match next {
            Some(w) => match self.id(w) {
                Some(id) => id,
                None => return 0,
            },
            None => EOS,
        };
        self.transitions.get(&ctx).map_or(0, |s| s.count(target))
    }

    /// Context total, equal to the sum of its successor counts.
    pub fn context_total(&self, history: &[&Word]) -> u64 {
        self.ctx_of(history)
            .and_then(|ctx| self.transitions.get(&ctx))
            .map_or(0, Successors::total)
    }

    fn successors(&self, history: &[u32]) -> &Successors {
        if let Some(s) = self.transitions.get(&context(history, self.order)) {
            return s;
        }
        if self.order == 2 {
            if let Some(s) = self.backoff.get(&context(history, 1)) {
                return s;
            }
        }
        &self.unigram
    }

    fn sentence(&self, rng: &mut Rng) -> Vec<u32> {
        let target = self.length_dist[rng.random_range(0..self.length_dist.len())];
        let mut out: Vec<u32> = Vec::with_capacity(target);
        while out.len() < target {
            let succ = self.successors(&out);
            if succ.non_eos == 0 {
                break;
            }
            let mut next = EOS;
            for _ in 0..EOS_RETRIES {
                next = succ.sample(rng);
                if next != EOS {
                    break;
                }
            }
            if next == EOS {
                break;
            }
            out.push(next);
        }
        out
    }

    /// Samples `n_sentences` sentences. Each has a length drawn from the
    /// training lengths; EOS draws before that length are redrawn up to 100
    /// times before the sentence is allowed to end early.
    pub fn generate(&self, n_sentences: usize, seed: u64) -> Corpus {
        let mut rng = seed::rng(seed);
        let sentences = (0..n_sentences)
            .map(|_| Sentence {
                words: self
                    .sentence(&mut rng)
                    .into_iter()
                    .map(|id| self.vocab[id as usize].clone())
                    .collect(),
            })
            .filter(|s| !s.words.is_empty())
            .collect();
        let mut c = self.template.with_sentences(sentences);
        c.name = format!("{}-markov{}-{seed}", self.template.name, self.order);
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissociationRun {
    pub seed: u64,
    pub delta_char: f64,
    pub delta_cb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissociationReport {
    pub order: usize,
    pub runs: Vec<DissociationRun>,
    pub delta_char_mean: f64,
    pub delta_char_sd: f64,
    pub delta_cb_mean: f64,
    pub delta_cb_sd: f64,
    /// Runs with a positive character asymmetry and a negative boundary one.
    pub dissociation_count: usize,
}

/// Trains an order-`k` chain, generates `runs` corpora the size of `c`, and
/// measures the character (n = 2) and boundary (n = 1) asymmetries of each.
pub fn dissociation_experiment(c: &Corpus, k: usize, runs: usize, seed: u64) -> Result<DissociationReport> {
    if runs == 0 {
        return Err(Error::InvalidParameter("dissociation needs runs >= 1".into()));
    }
    let chain = train_chain(c, k)?;
    let n_sentences = c.sentences.len();
    let runs: Vec<DissociationRun> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed::derive(seed, i);
            let synth = chain.generate(n_sentences, s);
            Ok(DissociationRun {
                seed: s,
                delta_char: ngram::delta_point(&synth, 2, 1.0)?.delta,
                delta_cb: boundary::delta_cb(&synth, 1)?.delta_cb,
            })
        })
        .collect::<Result<_>>()?;
    let dc: Vec<f64> = runs.iter().map(|r| r.delta_char).collect();
    let db: Vec<f64> = runs.iter().map(|r| r.delta_cb).collect();
    Ok(DissociationReport {
        order: k,
        delta_char_mean: stats::mean(&dc),
        delta_char_sd: stats::sd(&dc),
        delta_cb_mean: stats::mean(&db),
        delta_cb_sd: stats::sd(&db),
        dissociation_count: runs.iter().filter(|r| r.delta_char > 0.0 && r.delta_cb < 0.0).count(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, LoadOptions, Scheme};

    fn corpus(text: &str) -> Corpus {
        parse_corpus("t", text, &LoadOptions::new(Scheme::Chars))
            .unwrap()
            .corpus
    }

    fn word(c: &Corpus, s: &str) -> Word {
        c.words().find(|w| c.word_string(w) == s).unwrap().clone()
    }

    #[test]
    fn first_order_counts() {
        let c = corpus("a b\na c");
        let chain = train_chain(&c, 1).unwrap();
        let (a, b, cc) = (word(&c, "a"), word(&c, "b"), word(&c, "c"));
        assert_eq!(chain.transition_count(&[&a], Some(&b)), 1);
        assert_eq!(chain.transition_count(&[&a], Some(&cc)), 1);
        assert_eq!(chain.transition_count(&[], Some(&a)), 2);
        assert_eq!(chain.transition_count(&[&b], None), 1);
        assert_eq!(chain.context_total(&[&a]), 2);
    }

    #[test]
    fn second_order_counts() {
        let c = corpus("a b c");
        let chain = train_chain(&c, 2).unwrap();
        let (a, b, cc) = (word(&c, "a"), word(&c, "b"), word(&c, "c"));
        assert_eq!(chain.transition_count(&[&a, &b], Some(&cc)), 1);
        assert_eq!(chain.transition_count(&[&a], Some(&b)), 1);
    }

    #[test]
    fn unsupported_order() {
        let c = corpus("a b");
        assert!(matches!(train_chain(&c, 3), Err(Error::UnsupportedOrder(3))));
        assert!(matches!(train_chain(&c, 0), Err(Error::UnsupportedOrder(0))));
    }

    #[test]
    fn deterministic_chain_reproduces_sentence() {
        let c = corpus("ab cd");
        for k in [1, 2] {
            let g = train_chain(&c, k).unwrap().generate(20, 5);
            assert_eq!(g.to_text(), "ab cd\n".repeat(20));
        }
    }

    #[test]
    fn vocabulary_is_closed_and_seeded() {
        let c = corpus("the cat sat\non the mat\na cat on a mat sat");
        let chain = train_chain(&c, 1).unwrap();
        let g = chain.generate(200, 11);
        let vocab: Vec<String> = c.words().map(|w| c.word_string(w)).collect();
        assert!(g.words().all(|w| vocab.contains(&g.word_string(w))));
        assert_eq!(g.to_text(), chain.generate(200, 11).to_text());
        assert_ne!(g.to_text(), chain.generate(200, 12).to_text());
    }

    #[test]
    fn lengths_never_exceed_training_maximum() {
        let c = corpus("a b a b a\nb a\na");
        let g = train_chain(&c, 1).unwrap().generate(300, 2);
        assert!(g.sentences.iter().all(|s| s.words.len() <= 5));
    }
}
