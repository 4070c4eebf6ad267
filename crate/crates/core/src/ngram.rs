//! Character-stream n-gram models and the left-to-right versus right-to-left
//! perplexity asymmetry.
//!
//! Each sentence becomes one stream: its words in reading order with a
//! separator symbol between them. n-gram windows never cross sentences. The
//! right-to-left stream is the same sentence stream reversed end to end.
//!
//! The asymmetry is `delta = X_ltr − X_rtl`, where `X` is the self
//! cross-entropy in bits per predicted token of an additively smoothed model
//! trained on the stream it is evaluated on. Positive values mean the text
//! is more predictable when read right to left.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Sym};
use crate::error::{Error, Result};
use crate::stats::{self, Bootstrap};

pub const MAX_ORDER: usize = 5;

/// Reading direction favoured by an asymmetry measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ltr,
    Rtl,
    Inconclusive,
}

impl Direction {
    /// Verdict for an asymmetry where positive favours right-to-left.
    ///
    /// With an interval, the point estimate and both endpoints must agree in
    /// sign; otherwise the result is inconclusive.
    pub fn from_asymmetry(delta: f64, ci: Option<(f64, f64)>) -> Direction {
        let sign = |x: f64| {
            if x > 0.0 {
                1
            } else if x < 0.0 {
                -1
            } else {
                0
            }
        };
        let s = sign(delta);
        let agrees = match ci {
            Some((lo, hi)) => sign(lo) == s && sign(hi) == s,
            None => true,
        };
        match (s, agrees) {
            (1, true) => Direction::Rtl,
            (-1, true) => Direction::Ltr,
            _ => Direction::Inconclusive,
        }
    }
}

fn pack(syms: &[Sym]) -> u128 {
    syms.iter()
        .fold(0u128, |acc, &s| (acc << 16) | u128::from(s & 0xFFFF))
}

fn check_order(n: usize) -> Result<()> {
    if !(2..=MAX_ORDER).contains(&n) {
        return Err(Error::UnsupportedOrder(n));
    }
    Ok(())
}

/// Additively smoothed order-`n` model over grapheme ids.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    smoothing: f64,
    vocab_size: usize,
    /// Occurrences of each (n−1)-gram as the context of an n-gram window.
    context_counts: FxHashMap<u128, u64>,
    full_counts: FxHashMap<u128, u64>,
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn with_smoothing(mut self, alpha: f64) -> Self {
        self.smoothing = alpha;
        self
    }

    pub fn count(&self, gram: &[Sym]) -> u64 {
        debug_assert_eq!(gram.len(), self.order);
        self.full_counts.get(&pack(gram)).copied().unwrap_or(0)
    }

    pub fn context_count(&self, context: &[Sym]) -> u64 {
        debug_assert_eq!(context.len(), self.order - 1);
        self.context_counts.get(&pack(context)).copied().unwrap_or(0)
    }

    /// Smoothed `P(next | context)`; an unseen context gives `1 / V`.
    pub fn prob(&self, context: &[Sym], next: Sym) -> f64 {
        let mut gram = context.to_vec();
        gram.push(next);
        let c = self.count(&gram) as f64;
        let ctx = self.context_count(context) as f64;
        (c + self.smoothing) / (ctx + self.smoothing * self.vocab_size as f64)
    }

    pub fn distinct_ngrams(&self) -> usize {
        self.full_counts.len()
    }
}

/// Trains an order-`n` model on one stream, with Laplace smoothing.
pub fn train_ngram(stream: &[Sym], n: usize) -> Result<NGramModel> {
    train_ngram_streams(std::slice::from_ref(&stream.to_vec()), n, 1.0)
}

/// Trains on several independent streams; windows never span two streams.
pub fn train_ngram_streams(streams: &[Vec<Sym>], n: usize, smoothing: f64) -> Result<NGramModel> {
    check_order(n)?;
    let mut full: FxHashMap<u128, u64> = FxHashMap::default();
    let mut ctx: FxHashMap<u128, u64> = FxHashMap::default();
    let mut vocab: FxHashMap<Sym, ()> = FxHashMap::default();
    let mut windows = 0usize;
    for s in streams {
        for &g in s {
            vocab.insert(g, ());
        }
        for w in s.windows(n) {
            *full.entry(pack(w)).or_default() += 1;
            *ctx.entry(pack(&w[..n - 1])).or_default() += 1;
            windows += 1;
        }
    }
    if windows == 0 {
        let len = streams.iter().map(Vec::len).max().unwrap_or(0);
        return Err(Error::StreamTooShort { len, order: n });
    }
    Ok(NGramModel {
        order: n,
        smoothing,
        vocab_size: vocab.len(),
        context_counts: ctx,
        full_counts: full,
    })
}

/// Average negative log2-probability per predicted token of `stream`.
pub fn cross_entropy(model: &NGramModel, stream: &[Sym]) -> Result<f64> {
    cross_entropy_streams(model, std::slice::from_ref(&stream.to_vec()))
}

pub fn cross_entropy_streams(model: &NGramModel, streams: &[Vec<Sym>]) -> Result<f64> {
    let n = model.order;
    let mut total = 0.0;
    let mut predicted = 0usize;
    for s in streams {
        for w in s.windows(n) {
            total -= model.prob(&w[..n - 1], w[n - 1]).log2();
            predicted += 1;
        }
    }
    if predicted == 0 {
        let len = streams.iter().map(Vec::len).max().unwrap_or(0);
        return Err(Error::StreamTooShort { len, order: n });
    }
    Ok(total / predicted as f64)
}

/// Symbol id used as the word separator in character streams.
pub fn separator(c: &Corpus) -> Sym {
    c.alphabet().len() as Sym
}

/// One left-to-right stream per sentence, words joined by the separator.
pub fn char_streams(c: &Corpus) -> Vec<Vec<Sym>> {
    let sep = separator(c);
    c.sentences
        .iter()
        .map(|s| {
            let mut out = Vec::new();
            for (i, w) in s.words.iter().enumerate() {
                if i > 0 {
                    out.push(sep);
                }
                out.extend_from_slice(&w.graphemes);
            }
            out
        })
        .collect()
}

fn reversed(streams: &[Vec<Sym>]) -> Vec<Vec<Sym>> {
    streams
        .iter()
        .map(|s| s.iter().rev().copied().collect())
        .collect()
}

/// Per-sentence n-gram counts indexed into shared tables, so that any
/// reweighting of sentences can be scored without re-hashing.
struct IndexedStreams {
    /// Context index of every distinct n-gram.
    ngram_ctx: Vec<u32>,
    n_ctx: usize,
    n_syms: usize,
    sent_ngrams: Vec<Vec<(u32, u32)>>,
    sent_syms: Vec<Vec<u32>>,
}

impl IndexedStreams {
    fn new(streams: &[Vec<Sym>], n: usize) -> Self {
        let mut ngram_index: FxHashMap<u128, u32> = FxHashMap::default();
        let mut ctx_index: FxHashMap<u128, u32> = FxHashMap::default();
        let mut sym_index: FxHashMap<Sym, u32> = FxHashMap::default();
        let mut ngram_ctx = Vec::new();
        let mut sent_ngrams = Vec::with_capacity(streams.len());
        let mut sent_syms = Vec::with_capacity(streams.len());
        for s in streams {
            let mut local: FxHashMap<u32, u32> = FxHashMap::default();
            for w in s.windows(n) {
                let next_ctx = ctx_index.len() as u32;
                let ci = *ctx_index.entry(pack(&w[..n - 1])).or_insert(next_ctx);
                let next = ngram_index.len() as u32;
                let gi = *ngram_index.entry(pack(w)).or_insert_with(|| {
                    ngram_ctx.push(ci);
                    next
                });
                *local.entry(gi).or_default() += 1;
            }
            let mut counts: Vec<(u32, u32)> = local.into_iter().collect();
            counts.sort_unstable();
            sent_ngrams.push(counts);

            let mut syms: Vec<u32> = s
                .iter()
                .map(|g| {
                    let next = sym_index.len() as u32;
                    *sym_index.entry(*g).or_insert(next)
                })
                .collect();
            syms.sort_unstable();
            syms.dedup();
            sent_syms.push(syms);
        }
        IndexedStreams {
            ngram_ctx,
            n_ctx: ctx_index.len(),
            n_syms: sym_index.len(),
            sent_ngrams,
            sent_syms,
        }
    }

    /// Self cross-entropy of the sentences weighted by `w` (multiplicities).
    fn self_entropy(&self, w: &[u32], alpha: f64) -> f64 {
        let mut grams = vec![0u64; self.ngram_ctx.len()];
        let mut present = vec![false; self.n_syms];
        for (i, &k) in w.iter().enumerate() {
            if k == 0 {
                continue;
            }
            for &(g, c) in &self.sent_ngrams[i] {
                grams[g as usize] += u64::from(c) * u64::from(k);
            }
            for &s in &self.sent_syms[i] {
                present[s as usize] = true;
            }
        }
        let mut ctx = vec![0u64; self.n_ctx];
        for (g, &c) in grams.iter().enumerate() {
            ctx[self.ngram_ctx[g] as usize] += c;
        }
        let v = present.iter().filter(|&&p| p).count() as f64;
        let mut total = 0.0;
        let mut tokens = 0u64;
        for (g, &c) in grams.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let cc = ctx[self.ngram_ctx[g] as usize] as f64;
            let p = (c as f64 + alpha) / (cc + alpha * v);
            total -= c as f64 * p.log2();
            tokens += c;
        }
        if tokens == 0 {
            return f64::NAN;
        }
        total / tokens as f64
    }
}

/// Both reading directions of a corpus, ready for repeated scoring.
pub struct DirectionalStreams {
    n: usize,
    ltr: IndexedStreams,
    rtl: IndexedStreams,
}

impl DirectionalStreams {
    pub fn new(c: &Corpus, n: usize) -> Result<Self> {
        check_order(n)?;
        let fwd = char_streams(c);
        let windows: usize = fwd.iter().map(|s| s.len().saturating_sub(n - 1)).sum();
        if windows == 0 {
            let len = fwd.iter().map(Vec::len).max().unwrap_or(0);
            return Err(Error::StreamTooShort { len, order: n });
        }
        let bwd = reversed(&fwd);
        Ok(DirectionalStreams {
            n,
            ltr: IndexedStreams::new(&fwd, n),
            rtl: IndexedStreams::new(&bwd, n),
        })
    }

    pub fn sentences(&self) -> usize {
        self.ltr.sent_ngrams.len()
    }

    pub fn point(&self, smoothing: f64) -> DeltaPoint {
        let w = vec![1u32; self.sentences()];
        self.weighted(&w, smoothing)
    }

    fn weighted(&self, w: &[u32], smoothing: f64) -> DeltaPoint {
        let x_ltr = self.ltr.self_entropy(w, smoothing);
        let x_rtl = self.rtl.self_entropy(w, smoothing);
        DeltaPoint {
            n: self.n,
            x_ltr,
            x_rtl,
            delta: x_ltr - x_rtl,
        }
    }

    pub fn bootstrap(&self, smoothing: f64, bs: &Bootstrap) -> (f64, f64) {
        stats::bootstrap_interval(self.sentences(), bs, |w| self.weighted(w, smoothing).delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub n: usize,
    pub x_ltr: f64,
    pub x_rtl: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaResult {
    pub n: usize,
    pub smoothing: f64,
    pub x_ltr: f64,
    pub x_rtl: f64,
    pub delta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub direction_verdict: Direction,
}

/// Point estimate of the asymmetry (no interval).
pub fn delta_point(c: &Corpus, n: usize, smoothing: f64) -> Result<DeltaPoint> {
    Ok(DirectionalStreams::new(c, n)?.point(smoothing))
}

/// Percentile interval over sentence-level resamples.
pub fn bootstrap_delta(c: &Corpus, n: usize, smoothing: f64, bs: &Bootstrap) -> Result<(f64, f64)> {
    if bs.replicates < 100 {
        return Err(Error::InvalidParameter(format!(
            "bootstrap needs at least 100 replicates, got {}",
            bs.replicates
        )));
    }
    Ok(DirectionalStreams::new(c, n)?.bootstrap(smoothing, bs))
}

/// Asymmetry with its bootstrap interval and directional verdict.
pub fn delta_char(c: &Corpus, n: usize, smoothing: f64, bs: &Bootstrap) -> Result<DeltaResult> {
    let streams = DirectionalStreams::new(c, n)?;
    let p = streams.point(smoothing);
    let (ci_low, ci_high) = if bs.replicates == 0 {
        (p.delta, p.delta)
    } else {
        if bs.replicates < 100 {
            return Err(Error::InvalidParameter(format!(
                "bootstrap needs at least 100 replicates, got {}",
                bs.replicates
            )));
        }
        streams.bootstrap(smoothing, bs)
    };
    let ci = (bs.replicates > 0).then_some((ci_low, ci_high));
    Ok(DeltaResult {
        n,
        smoothing,
        x_ltr: p.x_ltr,
        x_rtl: p.x_rtl,
        delta: p.delta,
        ci_low,
        ci_high,
        direction_verdict: Direction::from_asymmetry(p.delta, ci),
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

    #[test]
    fn counts_every_window() {
        let m = train_ngram(&[0, 1, 0, 1], 2).unwrap();
        assert_eq!(m.count(&[0, 1]), 2);
        assert_eq!(m.count(&[1, 0]), 1);
        assert_eq!(m.distinct_ngrams(), 2);
        assert_eq!(m.vocab_size(), 2);

        let m = train_ngram(&[0, 0, 0], 2).unwrap();
        assert_eq!(m.count(&[0, 0]), 2);
        assert_eq!(m.distinct_ngrams(), 1);
    }

    #[test]
    fn too_short_and_bad_order() {
        assert!(matches!(
            train_ngram(&[0], 2),
            Err(Error::StreamTooShort { .. })
        ));
        assert!(matches!(train_ngram(&[0, 1, 2], 6), Err(Error::UnsupportedOrder(6))));
        let m = train_ngram(&[0, 1, 2], 3).unwrap();
        assert!(cross_entropy(&m, &[0, 1]).is_err());
    }

    #[test]
    fn alternating_stream_entropy() {
        // Windows ab, ba, ab, ba: each context is seen twice and always
        // followed by the same symbol, so P = (2 + 1) / (2 + 2) everywhere.
        let s = [0, 1, 0, 1, 0];
        let m = train_ngram(&s, 2).unwrap();
        let h = cross_entropy(&m, &s).unwrap();
        assert!((h - -(0.75f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn deterministic_stream_tends_to_zero() {
        let s = [0, 0, 0, 0];
        let m = train_ngram(&s, 2).unwrap().with_smoothing(1e-12);
        assert!(cross_entropy(&m, &s).unwrap() < 1e-9);
    }

    #[test]
    fn unseen_context_is_uniform() {
        let m = train_ngram(&[0, 1, 2], 2).unwrap();
        assert!((m.prob(&[7], 0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn palindrome_has_zero_asymmetry() {
        let c = corpus("abc cba\nxyyx");
        for n in 2..=4 {
            assert_eq!(delta_point(&c, n, 1.0).unwrap().delta, 0.0);
        }
    }

    #[test]
    fn fast_path_matches_model_api() {
        let c = corpus("qokedy daiin ol\nchedy qokain shey\nor aiin");
        let fwd = char_streams(&c);
        let bwd = reversed(&fwd);
        for n in 2..=4 {
            let m = train_ngram_streams(&fwd, n, 1.0).unwrap();
            let x_ltr = cross_entropy_streams(&m, &fwd).unwrap();
            let m = train_ngram_streams(&bwd, n, 1.0).unwrap();
            let x_rtl = cross_entropy_streams(&m, &bwd).unwrap();
            let p = delta_point(&c, n, 1.0).unwrap();
            assert!((p.x_ltr - x_ltr).abs() < 1e-12);
            assert!((p.x_rtl - x_rtl).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_sentences_give_zero_width_interval() {
        let c = corpus(&"abc abd ce\n".repeat(30));
        let p = delta_point(&c, 2, 1.0).unwrap();
        let (lo, hi) = bootstrap_delta(&c, 2, 1.0, &Bootstrap::new(200, 4)).unwrap();
        assert!((lo - p.delta).abs() < 1e-12 && (hi - p.delta).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_requires_replicates() {
        let c = corpus("ab ba");
        assert!(bootstrap_delta(&c, 2, 1.0, &Bootstrap::new(10, 0)).is_err());
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(Direction::from_asymmetry(0.1, Some((0.05, 0.2))), Direction::Rtl);
        assert_eq!(Direction::from_asymmetry(-0.1, Some((-0.2, -0.05))), Direction::Ltr);
        assert_eq!(
            Direction::from_asymmetry(-0.24, Some((0.01, 0.03))),
            Direction::Inconclusive
        );
        assert_eq!(Direction::from_asymmetry(0.0, None), Direction::Inconclusive);
    }
}
