//! Cross-boundary transition statistics.
//!
//! For consecutive words `(w_i, w_{i+1})` of a sentence, the condition is the
//! last `n` graphemes of `w_i` and the target the first `n` graphemes of
//! `w_{i+1}`. Words shorter than `n` are padded on their word-internal side.
//! The backward direction uses the same corpus with word order reversed;
//! word-internal order is never touched.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{reverse_words, shuffle_words, Corpus, Sentence, Word};
use crate::error::{Error, Result};
use crate::ngram::Direction;
use crate::seed;
use crate::stats::{self, Bootstrap};

pub const MAX_GRAM: usize = 4;
const PAD: u64 = 0xFFFF;

/// A boundary n-gram packed 16 bits per grapheme, first grapheme highest.
pub type Gram = u64;

fn check_n(n: usize) -> Result<()> {
    if !(1..=MAX_GRAM).contains(&n) {
        return Err(Error::UnsupportedOrder(n));
    }
    Ok(())
}

/// Last `n` graphemes, left-padded when the word is shorter.
pub fn tail_gram(w: &Word, n: usize) -> Gram {
    let g = &w.graphemes;
    let take = n.min(g.len());
    let mut key = 0u64;
    for _ in take..n {
        key = (key << 16) | PAD;
    }
    for &s in &g[g.len() - take..] {
        key = (key << 16) | u64::from(s);
    }
    key
}

/// First `n` graphemes, right-padded when the word is shorter.
pub fn head_gram(w: &Word, n: usize) -> Gram {
    let g = &w.graphemes;
    let take = n.min(g.len());
    let mut key = 0u64;
    for &s in &g[..take] {
        key = (key << 16) | u64::from(s);
    }
    for _ in take..n {
        key = (key << 16) | PAD;
    }
    key
}

/// Renders a packed gram with `_` for padding.
pub fn gram_string(c: &Corpus, gram: Gram, n: usize) -> String {
    (0..n)
        .rev()
        .map(|i| {
            let s = (gram >> (16 * i)) & 0xFFFF;
            if s == PAD {
                "_".to_string()
            } else {
                c.symbol(s as u32).to_string()
            }
        })
        .collect()
}

fn sentence_pairs(s: &Sentence, n: usize) -> impl Iterator<Item = (Gram, Gram)> + '_ {
    s.words
        .windows(2)
        .map(move |p| (tail_gram(&p[0], n), head_gram(&p[1], n)))
}

/// Joint counts of (condition, target) boundary grams.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTransitionTable {
    pub n: usize,
    joint: FxHashMap<(Gram, Gram), u64>,
    total: u64,
}

impl BoundaryTransitionTable {
    pub fn new(n: usize) -> Self {
        BoundaryTransitionTable {
            n,
            joint: FxHashMap::default(),
            total: 0,
        }
    }

    pub fn add(&mut self, condition: Gram, target: Gram, count: u64) {
        if count == 0 {
            return;
        }
        *self.joint.entry((condition, target)).or_default() += count;
        self.total += count;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, condition: Gram, target: Gram) -> u64 {
        self.joint.get(&(condition, target)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((Gram, Gram), u64)> + '_ {
        self.joint.iter().map(|(&k, &v)| (k, v))
    }

    pub fn distinct_pairs(&self) -> usize {
        self.joint.len()
    }

    pub fn condition_marginal(&self) -> FxHashMap<Gram, u64> {
        let mut m = FxHashMap::default();
        for (&(c, _), &k) in &self.joint {
            *m.entry(c).or_default() += k;
        }
        m
    }

    pub fn target_marginal(&self) -> FxHashMap<Gram, u64> {
        let mut m = FxHashMap::default();
        for (&(_, t), &k) in &self.joint {
            *m.entry(t).or_default() += k;
        }
        m
    }

    /// Relabels both sides through `f` and merges the counts.
    pub fn coarsen(&self, f: impl Fn(Gram) -> Gram) -> BoundaryTransitionTable {
        let mut out = BoundaryTransitionTable::new(self.n);
        for (&(c, t), &k) in &self.joint {
            out.add(f(c), f(t), k);
        }
        out
    }
}

pub fn extract_transitions(c: &Corpus, n: usize) -> Result<BoundaryTransitionTable> {
    check_n(n)?;
    let mut t = BoundaryTransitionTable::new(n);
    for s in &c.sentences {
        for (cond, tgt) in sentence_pairs(s, n) {
            t.add(cond, tgt, 1);
        }
    }
    Ok(t)
}

fn marginal_entropy(m: &FxHashMap<Gram, u64>) -> f64 {
    stats::entropy_bits(m.values().map(|&k| k as f64))
}

pub fn target_entropy(t: &BoundaryTransitionTable) -> Result<f64> {
    if t.total == 0 {
        return Err(Error::EmptyTable);
    }
    Ok(marginal_entropy(&t.target_marginal()))
}

pub fn condition_entropy(t: &BoundaryTransitionTable) -> Result<f64> {
    if t.total == 0 {
        return Err(Error::EmptyTable);
    }
    Ok(marginal_entropy(&t.condition_marginal()))
}

/// `H(target | condition)` in bits with plug-in probabilities.
pub fn conditional_entropy(t: &BoundaryTransitionTable) -> Result<f64> {
    if t.total == 0 {
        return Err(Error::EmptyTable);
    }
    let cond = t.condition_marginal();
    let total = t.total as f64;
    let mut h = 0.0;
    for (&(c, _), &k) in &t.joint {
        let p_joint = k as f64 / total;
        let p_given = k as f64 / cond[&c] as f64;
        h -= p_joint * p_given.log2();
    }
    Ok(h.max(0.0))
}

/// `H(target) − H(target | condition)`.
pub fn mutual_information(t: &BoundaryTransitionTable) -> Result<f64> {
    Ok(target_entropy(t)? - conditional_entropy(t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Each replicate averages the per-sentence asymmetries, so every
    /// sentence counts equally regardless of length.
    #[default]
    SentenceMean,
    /// Each replicate pools the resampled sentences' counts.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossBoundaryResult {
    pub n: usize,
    pub transitions: u64,
    pub h_fwd: f64,
    pub h_bwd: f64,
    pub mi_fwd: f64,
    pub mi_bwd: f64,
    pub delta_cb: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub verdict: Direction,
}

/// Aggregate (token-weighted) asymmetry `H_fwd − H_bwd` without an interval.
pub fn delta_cb(c: &Corpus, n: usize) -> Result<CrossBoundaryResult> {
    let fwd = extract_transitions(c, n)?;
    let bwd = extract_transitions(&reverse_words(c), n)?;
    let h_fwd = conditional_entropy(&fwd)?;
    let h_bwd = conditional_entropy(&bwd)?;
    let delta = h_fwd - h_bwd;
    Ok(CrossBoundaryResult {
        n,
        transitions: fwd.total(),
        h_fwd,
        h_bwd,
        mi_fwd: target_entropy(&fwd)? - h_fwd,
        mi_bwd: target_entropy(&bwd)? - h_bwd,
        delta_cb: delta,
        ci_low: None,
        ci_high: None,
        verdict: Direction::from_asymmetry(delta, None),
    })
}

/// Indexed per-sentence transitions for fast resampling.
struct PairedTransitions {
    /// (condition index, target index) for each distinct pair, per direction.
    fwd_pairs: Vec<(u32, u32)>,
    bwd_pairs: Vec<(u32, u32)>,
    n_cond: usize,
    sent_fwd: Vec<Vec<u32>>,
    sent_bwd: Vec<Vec<u32>>,
}

impl PairedTransitions {
    fn new(c: &Corpus, n: usize) -> Self {
        let mut gram_index: FxHashMap<Gram, u32> = FxHashMap::default();
        let mut idx = |g: Gram| {
            let next = gram_index.len() as u32;
            *gram_index.entry(g).or_insert(next)
        };
        let mut fwd_index: FxHashMap<(u32, u32), u32> = FxHashMap::default();
        let mut bwd_index: FxHashMap<(u32, u32), u32> = FxHashMap::default();
        let mut fwd_pairs = Vec::new();
        let mut bwd_pairs = Vec::new();
        let mut sent_fwd = Vec::with_capacity(c.sentences.len());
        let mut sent_bwd = Vec::with_capacity(c.sentences.len());
        for s in &c.sentences {
            let mut f = Vec::new();
            let mut b = Vec::new();
            for p in s.words.windows(2) {
                let (a, z) = (&p[0], &p[1]);
                let key = (idx(tail_gram(a, n)), idx(head_gram(z, n)));
                let next = fwd_pairs.len() as u32;
                f.push(*fwd_index.entry(key).or_insert_with(|| {
                    fwd_pairs.push(key);
                    next
                }));
                // Reversed word order: the later word conditions the earlier one.
                let key = (idx(tail_gram(z, n)), idx(head_gram(a, n)));
                let next = bwd_pairs.len() as u32;
                b.push(*bwd_index.entry(key).or_insert_with(|| {
                    bwd_pairs.push(key);
                    next
                }));
            }
            sent_fwd.push(f);
            sent_bwd.push(b);
        }
        PairedTransitions {
            fwd_pairs,
            bwd_pairs,
            n_cond: gram_index.len(),
            sent_fwd,
            sent_bwd,
        }
    }

    fn with_transitions(&self) -> Vec<usize> {
        (0..self.sent_fwd.len())
            .filter(|&i| !self.sent_fwd[i].is_empty())
            .collect()
    }

    fn pooled_h(pairs: &[(u32, u32)], n_cond: usize, counts: &[u64]) -> f64 {
        let mut cond = vec![0u64; n_cond];
        let mut total = 0u64;
        for (i, &k) in counts.iter().enumerate() {
            cond[pairs[i].0 as usize] += k;
            total += k;
        }
        if total == 0 {
            return f64::NAN;
        }
        let total = total as f64;
        let mut h = 0.0;
        for (i, &k) in counts.iter().enumerate() {
            if k > 0 {
                let kf = k as f64;
                h -= kf / total * (kf / cond[pairs[i].0 as usize] as f64).log2();
            }
        }
        h
    }

    fn pooled_delta(&self, units: &[usize], w: &[u32]) -> f64 {
        let mut f = vec![0u64; self.fwd_pairs.len()];
        let mut b = vec![0u64; self.bwd_pairs.len()];
        for (j, &k) in w.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let s = units[j];
            for &p in &self.sent_fwd[s] {
                f[p as usize] += u64::from(k);
            }
            for &p in &self.sent_bwd[s] {
                b[p as usize] += u64::from(k);
            }
        }
        Self::pooled_h(&self.fwd_pairs, self.n_cond, &f)
            - Self::pooled_h(&self.bwd_pairs, self.n_cond, &b)
    }

    fn sentence_h(pairs: &[(u32, u32)], list: &[u32]) -> f64 {
        let mut joint: FxHashMap<u32, u64> = FxHashMap::default();
        let mut cond: FxHashMap<u32, u64> = FxHashMap::default();
        for &p in list {
            *joint.entry(p).or_default() += 1;
            *cond.entry(pairs[p as usize].0).or_default() += 1;
        }
        let total = list.len() as f64;
        let mut h = 0.0;
        for (&p, &k) in &joint {
            let kf = k as f64;
            h -= kf / total * (kf / cond[&pairs[p as usize].0] as f64).log2();
        }
        h
    }

    fn sentence_deltas(&self, units: &[usize]) -> Vec<f64> {
        units
            .iter()
            .map(|&s| {
                Self::sentence_h(&self.fwd_pairs, &self.sent_fwd[s])
                    - Self::sentence_h(&self.bwd_pairs, &self.sent_bwd[s])
            })
            .collect()
    }
}

/// Paired sentence-level bootstrap interval for the asymmetry.
///
/// Forward and backward statistics of a replicate always come from the same
/// resampled sentences. Returns `(ci_low, ci_high, verdict)`, where the
/// verdict is inconclusive when the aggregate sign disagrees with the interval.
pub fn paired_bootstrap_cb(
    c: &Corpus,
    n: usize,
    bs: &Bootstrap,
    weighting: Weighting,
) -> Result<(f64, f64, Direction)> {
    check_n(n)?;
    let aggregate = delta_cb(c, n)?.delta_cb;
    let (lo, hi) = bootstrap_interval_cb(c, n, bs, weighting)?;
    Ok((lo, hi, Direction::from_asymmetry(aggregate, Some((lo, hi)))))
}

fn bootstrap_interval_cb(
    c: &Corpus,
    n: usize,
    bs: &Bootstrap,
    weighting: Weighting,
) -> Result<(f64, f64)> {
    let paired = PairedTransitions::new(c, n);
    let units = paired.with_transitions();
    if units.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "paired bootstrap needs at least 2 sentences with word boundaries, found {}",
            units.len()
        )));
    }
    Ok(match weighting {
        Weighting::Pooled => {
            stats::bootstrap_interval(units.len(), bs, |w| paired.pooled_delta(&units, w))
        }
        Weighting::SentenceMean => {
            let deltas = paired.sentence_deltas(&units);
            stats::bootstrap_mean(&deltas, bs)
        }
    })
}

/// Aggregate asymmetry plus its paired bootstrap interval.
pub fn cross_boundary(
    c: &Corpus,
    n: usize,
    bs: &Bootstrap,
    weighting: Weighting,
) -> Result<CrossBoundaryResult> {
    let mut r = delta_cb(c, n)?;
    if bs.replicates > 0 {
        let (lo, hi) = bootstrap_interval_cb(c, n, bs, weighting)?;
        r.ci_low = Some(lo);
        r.ci_high = Some(hi);
        r.verdict = Direction::from_asymmetry(r.delta_cb, Some((lo, hi)));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShuffleControl {
    pub n: usize,
    pub reps: usize,
    pub mean_delta: f64,
    pub sd_delta: f64,
    pub mean_abs_delta: f64,
}

/// Asymmetry after within-sentence word shuffling, averaged over `reps` copies.
pub fn shuffle_control(c: &Corpus, n: usize, seed: u64, reps: usize) -> Result<ShuffleControl> {
    check_n(n)?;
    if reps == 0 {
        return Err(Error::InvalidParameter("shuffle control needs reps >= 1".into()));
    }
    let deltas: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| match delta_cb(&shuffle_words(c, seed::derive(seed, r)), n) {
            Ok(res) => Ok(res.delta_cb),
            Err(Error::EmptyTable) => Ok(0.0),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    if c.sentences.iter().all(|s| s.words.len() < 2) {
        log::warn!("{}: no word boundaries, shuffle control is 0 by definition", c.name);
    }
    Ok(ShuffleControl {
        n,
        reps,
        mean_delta: stats::mean(&deltas),
        sd_delta: stats::sd(&deltas),
        mean_abs_delta: stats::mean(&deltas.iter().map(|d| d.abs()).collect::<Vec<_>>()),
    })
}
