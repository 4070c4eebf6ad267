//! Parametric slot generator.
//!
//! A lexicon is built by concatenating one grapheme per positional slot.
//! Each word's frequency weight is the product of `(rank + 1)^-alpha` over
//! its slot graphemes, so the Zipf exponent concentrates within-slot
//! frequency. Word order comes from a sparse Markov chain in which every
//! word keeps `markov_top_k` successors, drawn by weight and boosted when
//! the boundary pair (final grapheme, next initial grapheme) is preferred.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use super::config::{invalid, KvConfig};
use super::{assemble, check_prob, check_words, take_lengths, GeneratedCorpus, LengthModel, Provenance, Sampler};
use crate::corpus::{tokenize_eva, GraphemeInventory};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

const DEFAULT_POOLS: &str = include_str!("../../data/slot_pools.txt");
/// Above this many slot combinations the lexicon is drawn by rejection.
const ENUMERATION_LIMIT: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    Baseline,
    /// Every slot draws from the union of all pools.
    SinglePool,
    /// Graphemes of each lexicon word are shuffled.
    RandomOrder,
    /// Terminal pools share half their graphemes.
    OverlappingPool,
    /// Baseline with Zipf exponent 2.0.
    NearMiss,
    /// A mixed stem followed by one to three suffix morphemes, i.i.d. order.
    AgglutinativeMimic,
    /// Consonant roots interleaved with a vowel template, i.i.d. order.
    TemplaticMimic,
    NoBridge,
    WideBridge,
    /// Successors drawn from the whole lexicon without pair preferences.
    NoMarkov,
    NoBoundaryPairs,
    DenseMarkov,
}

impl Ablation {
    pub const ALL: [Ablation; 12] = [
        Ablation::Baseline,
        Ablation::NearMiss,
        Ablation::SinglePool,
        Ablation::RandomOrder,
        Ablation::OverlappingPool,
        Ablation::AgglutinativeMimic,
        Ablation::TemplaticMimic,
        Ablation::NoBridge,
        Ablation::WideBridge,
        Ablation::NoMarkov,
        Ablation::NoBoundaryPairs,
        Ablation::DenseMarkov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::Baseline => "baseline",
            Ablation::SinglePool => "single-pool",
            Ablation::RandomOrder => "random-order",
            Ablation::OverlappingPool => "overlapping-pool",
            Ablation::NearMiss => "near-miss",
            Ablation::AgglutinativeMimic => "agglutinative-mimic",
            Ablation::TemplaticMimic => "templatic-mimic",
            Ablation::NoBridge => "no-bridge",
            Ablation::WideBridge => "wide-bridge",
            Ablation::NoMarkov => "no-markov",
            Ablation::NoBoundaryPairs => "no-boundary-pairs",
            Ablation::DenseMarkov => "dense-markov",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('_', "-");
        Ablation::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown ablation {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlotConfig {
    /// Pools for the prefix slots, word-initial first.
    pub prefix_pools: Vec<Vec<String>>,
    /// Pools for the suffix slots, word-final last.
    pub suffix_pools: Vec<Vec<String>>,
    pub bridge_pool: Vec<String>,
    pub n_prefix_slots: usize,
    pub n_suffix_slots: usize,
    /// Number of bridge graphemes shared by the initial and final slots.
    pub bridge_zone: usize,
    /// Rank at which bridge graphemes enter the terminal pools.
    pub bridge_rank: usize,
    pub zipf_alpha: f64,
    pub vocab_size: usize,
    pub markov_top_k: usize,
    pub boundary_pair_strength: f64,
    /// Upper bound on preferred (final, initial) boundary pairs.
    pub preferred_pairs: usize,
    pub pool_overlap: f64,
    /// Participation probability of non-terminal slots.
    pub inner_slot_prob: f64,
    pub ablation: Ablation,
    pub lengths: LengthModel,
    #[serde(skip)]
    pub inventory: GraphemeInventory,
}

impl Default for SlotConfig {
    fn default() -> Self {
        let mut cfg = SlotConfig {
            prefix_pools: Vec::new(),
            suffix_pools: Vec::new(),
            bridge_pool: Vec::new(),
            n_prefix_slots: 0,
            n_suffix_slots: 0,
            bridge_zone: 1,
            bridge_rank: 3,
            zipf_alpha: 1.2,
            vocab_size: 600,
            markov_top_k: 5,
            boundary_pair_strength: 2.75,
            preferred_pairs: 8,
            pool_overlap: 0.0,
            inner_slot_prob: 0.6,
            ablation: Ablation::Baseline,
            lengths: LengthModel::default(),
            inventory: GraphemeInventory::eva_default(),
        };
        let mut kv = KvConfig::parse(DEFAULT_POOLS).expect("bundled pools parse");
        cfg.apply_pools(&mut kv).expect("bundled pools are valid");
        cfg
    }
}

impl SlotConfig {
    /// Defaults overridden by the keys of `kv`.
    pub fn from_kv(mut kv: KvConfig) -> Result<Self> {
        let mut cfg = SlotConfig::default();
        cfg.apply_pools(&mut kv)?;
        if let Some(v) = kv.take("n_prefix_slots")? {
            cfg.n_prefix_slots = v;
        }
        if let Some(v) = kv.take("n_suffix_slots")? {
            cfg.n_suffix_slots = v;
        }
        if let Some(v) = kv.take("bridge_zone")? {
            cfg.bridge_zone = v;
        }
        if let Some(v) = kv.take("bridge_rank")? {
            cfg.bridge_rank = v;
        }
        if let Some(v) = kv.take("zipf_alpha")? {
            cfg.zipf_alpha = v;
        }
        if let Some(v) = kv.take("vocab_size")? {
            cfg.vocab_size = v;
        }
        if let Some(v) = kv.take("markov_top_k")? {
            cfg.markov_top_k = v;
        }
        if let Some(v) = kv.take("boundary_pair_strength")? {
            cfg.boundary_pair_strength = v;
        }
        if let Some(v) = kv.take("preferred_pairs")? {
            cfg.preferred_pairs = v;
        }
        if let Some(v) = kv.take("pool_overlap")? {
            cfg.pool_overlap = v;
        }
        if let Some(v) = kv.take("inner_slot_prob")? {
            cfg.inner_slot_prob = v;
        }
        if let Some(v) = kv.take("ablation")? {
            cfg.ablation = v;
        }
        if let Some(path) = kv.take_str("inventory") {
            cfg.inventory = GraphemeInventory::load(std::path::Path::new(&path))?;
        }
        cfg.lengths = take_lengths(&mut kv)?;
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_pools(&mut self, kv: &mut KvConfig) -> Result<()> {
        let prefix = kv.take_prefixed("prefix.");
        if !prefix.is_empty() {
            self.prefix_pools = prefix.into_iter().map(|(_, v)| split(&v)).collect();
            self.n_prefix_slots = self.prefix_pools.len();
        }
        let suffix = kv.take_prefixed("suffix.");
        if !suffix.is_empty() {
            self.suffix_pools = suffix.into_iter().map(|(_, v)| split(&v)).collect();
            self.n_suffix_slots = self.suffix_pools.len();
        }
        if let Some(b) = kv.take_list("bridge") {
            self.bridge_pool = b;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 {
            return Err(invalid("vocab_size", "must be at least 1"));
        }
        if self.markov_top_k == 0 {
            return Err(invalid("markov_top_k", "must be at least 1"));
        }
        if !(self.zipf_alpha >= 0.0 && self.zipf_alpha.is_finite()) {
            return Err(invalid("zipf_alpha", "must be a finite value >= 0"));
        }
        if !(self.boundary_pair_strength > 0.0 && self.boundary_pair_strength.is_finite()) {
            return Err(invalid("boundary_pair_strength", "must be positive"));
        }
        check_prob("pool_overlap", self.pool_overlap)?;
        check_prob("inner_slot_prob", self.inner_slot_prob)?;
        if self.n_prefix_slots == 0 || self.n_suffix_slots == 0 {
            return Err(invalid("slots", "need at least one prefix and one suffix slot"));
        }
        if self.prefix_pools.is_empty() || self.suffix_pools.is_empty() {
            return Err(invalid("slots", "prefix and suffix pools must be given"));
        }
        if self.prefix_pools.iter().chain(&self.suffix_pools).any(Vec::is_empty) {
            return Err(invalid("slots", "every slot pool needs at least one grapheme"));
        }
        if self.bridge_zone > self.bridge_pool.len() {
            return Err(invalid(
                "bridge_zone",
                format!("only {} bridge graphemes are defined", self.bridge_pool.len()),
            ));
        }
        Ok(())
    }

    /// The configuration with its ablation's parameter changes applied.
    pub fn effective(&self) -> SlotConfig {
        let mut c = self.clone();
        match self.ablation {
            Ablation::NearMiss => c.zipf_alpha = 2.0,
            Ablation::OverlappingPool if c.pool_overlap == 0.0 => c.pool_overlap = 0.5,
            Ablation::NoBridge => c.bridge_zone = 0,
            Ablation::WideBridge => c.bridge_zone = c.bridge_pool.len().min(2),
            Ablation::NoMarkov | Ablation::AgglutinativeMimic | Ablation::TemplaticMimic => {
                c.markov_top_k = c.vocab_size;
                c.boundary_pair_strength = 1.0;
            }
            Ablation::NoBoundaryPairs => c.boundary_pair_strength = 1.0,
            Ablation::DenseMarkov => c.markov_top_k = c.markov_top_k.max(50),
            _ => {}
        }
        c
    }

    /// Pools in slot order with bridge and overlap applied.
    pub fn slot_pools(&self) -> Vec<Vec<String>> {
        let pick = |pools: &[Vec<String>], i: usize, n: usize, terminal_first: bool| -> Vec<String> {
            // Extra slots reuse the inner pools; the terminal pool stays at its end.
            let len = pools.len();
            let idx = if terminal_first {
                if i == 0 || len == 1 {
                    0
                } else {
                    1 + (i - 1) % (len - 1).max(1)
                }
            } else if i == n - 1 || len == 1 {
                len - 1
            } else {
                i % (len - 1).max(1)
            };
            pools[idx.min(len - 1)].clone()
        };
        let np = self.n_prefix_slots;
        let ns = self.n_suffix_slots;
        let mut slots: Vec<Vec<String>> = (0..np)
            .map(|i| pick(&self.prefix_pools, i, np, true))
            .chain((0..ns).map(|i| pick(&self.suffix_pools, i, ns, false)))
            .collect();
        let last = slots.len() - 1;
        let init = slots[0].clone();
        let fin = slots[last].clone();
        let take = |pool: &[String], f: f64| -> Vec<String> {
            let m = (f * pool.len() as f64).round() as usize;
            pool[..m.min(pool.len())].to_vec()
        };
        let to_init = take(&fin, self.pool_overlap);
        let to_fin = take(&init, self.pool_overlap);
        slots[0].extend(to_init);
        slots[last].extend(to_fin);
        for b in self.bridge_pool.iter().take(self.bridge_zone).rev() {
            for s in [0, last] {
                let r = self.bridge_rank.min(slots[s].len());
                slots[s].insert(r, b.clone());
            }
        }
        for s in &mut slots {
            let mut seen = FxHashSet::default();
            s.retain(|g| seen.insert(g.clone()));
        }
        if self.ablation == Ablation::SinglePool {
            let mut union: Vec<String> = Vec::new();
            for s in &slots {
                for g in s {
                    if !union.contains(g) {
                        union.push(g.clone());
                    }
                }
            }
            for s in &mut slots {
                *s = union.clone();
            }
        }
        slots
    }
}

fn split(v: &str) -> Vec<String> {
    v.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LexiconEntry {
    pub text: String,
    pub weight: f64,
    pub initial: String,
    pub r#final: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lexicon {
    pub words: Vec<LexiconEntry>,
}

impl Lexicon {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// One slot option: a grapheme with its rank weight, or an empty slot.
type Choice = Option<(usize, f64)>;

struct SlotSpace {
    pools: Vec<Vec<String>>,
    weights: Vec<Vec<f64>>,
    optional: Vec<bool>,
}

impl SlotSpace {
    fn new(pools: Vec<Vec<String>>, alpha: f64, inner_prob: f64) -> Self {
        let n = pools.len();
        let weights = pools.iter().map(|p| super::zipf_weights(p.len(), alpha)).collect();
        let optional = (0..n).map(|i| i != 0 && i != n - 1 && inner_prob < 1.0).collect();
        SlotSpace {
            pools,
            weights,
            optional,
        }
    }

    fn size(&self) -> u128 {
        self.pools
            .iter()
            .zip(&self.optional)
            .fold(1u128, |acc, (p, &o)| acc.saturating_mul(p.len() as u128 + u128::from(o)))
    }

    fn options(&self, slot: usize) -> Vec<Choice> {
        let mut v: Vec<Choice> = (0..self.pools[slot].len())
            .map(|i| Some((i, self.weights[slot][i])))
            .collect();
        if self.optional[slot] {
            v.push(None);
        }
        v
    }

    fn draw(&self, rng: &mut Rng, inner_prob: f64) -> Vec<Choice> {
        (0..self.pools.len())
            .map(|s| {
                if self.optional[s] && !rng.random_bool(inner_prob) {
                    None
                } else {
                    let i = rng.random_range(0..self.pools[s].len());
                    Some((i, self.weights[s][i]))
                }
            })
            .collect()
    }

    fn spell(&self, choice: &[Choice]) -> (Vec<String>, f64) {
        let mut gs = Vec::new();
        let mut w = 1.0;
        for (s, c) in choice.iter().enumerate() {
            if let Some((i, wi)) = c {
                gs.push(self.pools[s][*i].clone());
                w *= wi;
            }
        }
        (gs, w)
    }
}

fn entry(graphemes: Vec<String>, weight: f64, inv: &GraphemeInventory) -> Result<LexiconEntry> {
    let text: String = graphemes.concat();
    let toks = tokenize_eva(&text, inv)?;
    Ok(LexiconEntry {
        initial: toks[0].as_str().to_string(),
        r#final: toks[toks.len() - 1].as_str().to_string(),
        text,
        weight,
    })
}

/// Builds `vocab_size` distinct words with their Zipf weights.
pub fn build_slot_lexicon(cfg: &SlotConfig, seed: u64) -> Result<Lexicon> {
    cfg.validate()?;
    let cfg = cfg.effective();
    let mut rng = seed::rng(seed);
    match cfg.ablation {
        Ablation::AgglutinativeMimic => return mimic_lexicon(&cfg, &mut rng, agglutinative_word),
        Ablation::TemplaticMimic => return mimic_lexicon(&cfg, &mut rng, templatic_word),
        _ => {}
    }
    let space = SlotSpace::new(cfg.slot_pools(), cfg.zipf_alpha, cfg.inner_slot_prob);
    let available = space.size();
    if (cfg.vocab_size as u128) > available {
        return Err(Error::PoolExhausted {
            requested: cfg.vocab_size,
            available,
        });
    }
    let mut words: Vec<(Vec<String>, f64)> = Vec::with_capacity(cfg.vocab_size);
    let mut seen: FxHashSet<String> = FxHashSet::default();
    if available <= ENUMERATION_LIMIT {
        let mut all: Vec<(Vec<String>, f64)> = Vec::new();
        let mut stack: Vec<Choice> = Vec::new();
        enumerate(&space, &mut stack, &mut |choice| {
            let (gs, w) = space.spell(choice);
            if seen.insert(gs.concat()) {
                all.push((gs, w));
            }
        });
        if all.len() < cfg.vocab_size {
            return Err(Error::PoolExhausted {
                requested: cfg.vocab_size,
                available: all.len() as u128,
            });
        }
        all.shuffle(&mut rng);
        all.truncate(cfg.vocab_size);
        words = all;
    } else {
        let mut misses = 0usize;
        while words.len() < cfg.vocab_size {
            let (gs, w) = space.spell(&space.draw(&mut rng, cfg.inner_slot_prob));
            if seen.insert(gs.concat()) {
                words.push((gs, w));
                misses = 0;
            } else {
                misses += 1;
                if misses > 10_000 {
                    return Err(Error::PoolExhausted {
                        requested: cfg.vocab_size,
                        available: words.len() as u128,
                    });
                }
            }
        }
    }
    if cfg.ablation == Ablation::RandomOrder {
        for (gs, _) in &mut words {
            gs.shuffle(&mut rng);
        }
    }
    let words = words
        .into_iter()
        .map(|(gs, w)| entry(gs, w, &cfg.inventory))
        .collect::<Result<Vec<_>>>()?;
    Ok(Lexicon { words })
}

fn enumerate(space: &SlotSpace, stack: &mut Vec<Choice>, f: &mut impl FnMut(&[Choice])) {
    let s = stack.len();
    if s == space.pools.len() {
        f(stack);
        return;
    }
    for c in space.options(s) {
        stack.push(c);
        enumerate(space, stack, f);
        stack.pop();
    }
}

fn zipf_pick<'a>(pool: &'a [String], alpha: f64, rng: &mut Rng) -> (&'a str, f64) {
    let w = super::zipf_weights(pool.len(), alpha);
    let total: f64 = w.iter().sum();
    let mut r = rng.random::<f64>() * total;
    for (i, wi) in w.iter().enumerate() {
        if r < *wi {
            return (&pool[i], *wi);
        }
        r -= wi;
    }
    (&pool[pool.len() - 1], w[w.len() - 1])
}

fn agglutinative_word(slots: &[Vec<String>], alpha: f64, rng: &mut Rng) -> (Vec<String>, f64) {
    let last = slots.len() - 1;
    let stems: Vec<String> = slots[0].iter().chain(&slots[last]).cloned().collect();
    let (stem, mut w) = zipf_pick(&stems, alpha, rng);
    let mut gs = vec![stem.to_string()];
    for _ in 0..rng.random_range(1..=3) {
        let inner = &slots[last.saturating_sub(1).max(1).min(last)];
        let (a, wa) = zipf_pick(inner, alpha, rng);
        let (b, wb) = zipf_pick(&slots[last], alpha, rng);
        gs.push(a.to_string());
        gs.push(b.to_string());
        w *= wa * wb;
    }
    (gs, w)
}

fn templatic_word(slots: &[Vec<String>], alpha: f64, rng: &mut Rng) -> (Vec<String>, f64) {
    let last = slots.len() - 1;
    let consonants: Vec<String> = slots
        .iter()
        .enumerate()
        .filter(|&(i, _)| i == 0 || (i < last && i % 2 == 0))
        .flat_map(|(_, p)| p.clone())
        .chain(slots[last].iter().cloned())
        .collect();
    let vowels = &slots[1.min(last)];
    let mut gs = Vec::new();
    let mut w = 1.0;
    for i in 0..5 {
        let pool = if i % 2 == 0 { &consonants } else { vowels };
        let (g, wg) = zipf_pick(pool, alpha, rng);
        gs.push(g.to_string());
        w *= wg;
    }
    (gs, w)
}

/// Builds one mimic word from the slot pools, returning it with its weight.
type MakeWord = fn(&[Vec<String>], f64, &mut Rng) -> (Vec<String>, f64);

fn mimic_lexicon(
    cfg: &SlotConfig,
    rng: &mut Rng,
    make: MakeWord,
) -> Result<Lexicon> {
    let slots = cfg.slot_pools();
    let mut seen = FxHashSet::default();
    let mut words = Vec::new();
    let mut misses = 0usize;
    while words.len() < cfg.vocab_size {
        let (gs, w) = make(&slots, cfg.zipf_alpha, rng);
        if seen.insert(gs.concat()) {
            words.push(entry(gs, w, &cfg.inventory)?);
            misses = 0;
        } else {
            misses += 1;
            if misses > 10_000 {
                return Err(Error::PoolExhausted {
                    requested: cfg.vocab_size,
                    available: words.len() as u128,
                });
            }
        }
    }
    Ok(Lexicon { words })
}

/// The sparse successor structure over a lexicon.
pub struct SlotChain {
    start: Sampler,
    successors: Vec<(Vec<u32>, Sampler)>,
}

/// Preferred (final, initial) grapheme pairs: a seeded random matching of
/// final to initial graphemes, cycling the shorter side so every grapheme
/// takes part, capped at `m` pairs.
pub fn preferred_pairs(lex: &Lexicon, m: usize, rng: &mut Rng) -> FxHashSet<(String, String)> {
    let mut finals: Vec<&str> = Vec::new();
    let mut initials: Vec<&str> = Vec::new();
    for w in &lex.words {
        if !finals.contains(&w.r#final.as_str()) {
            finals.push(&w.r#final);
        }
        if !initials.contains(&w.initial.as_str()) {
            initials.push(&w.initial);
        }
    }
    finals.shuffle(rng);
    initials.shuffle(rng);
    let n = finals.len().max(initials.len()).min(m);
    (0..n)
        .map(|j| {
            (
                finals[j % finals.len()].to_string(),
                initials[j % initials.len()].to_string(),
            )
        })
        .collect()
}

/// Approximate chance that each item lands in a weighted sample of `k`
/// without replacement: `1 - exp(-lambda * s)` with `lambda` set so the
/// probabilities sum to `k`.
pub fn inclusion_probabilities(scores: &[f64], k: usize) -> Vec<f64> {
    if k >= scores.len() {
        return vec![1.0; scores.len()];
    }
    let expected = |lambda: f64| scores.iter().map(|&s| -(-lambda * s).exp_m1()).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while expected(hi) < k as f64 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < k as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    scores.iter().map(|&s| -(-hi * s).exp_m1()).collect()
}

impl SlotChain {
    pub fn new(lex: &Lexicon, cfg: &SlotConfig, rng: &mut Rng) -> Result<Self> {
        let cfg = cfg.effective();
        let prefs = if cfg.boundary_pair_strength == 1.0 {
            FxHashSet::default()
        } else {
            preferred_pairs(lex, cfg.preferred_pairs, rng)
        };
        let v = lex.len();
        let k = cfg.markov_top_k.min(v);
        let weights: Vec<f64> = lex.words.iter().map(|w| w.weight).collect();
        let start = Sampler::new(&weights)?;
        // Scores depend on the source word only through its final grapheme,
        // so scores and inclusion probabilities are cached per final.
        let mut cache: FxHashMap<&str, (Vec<f64>, Vec<f64>)> = FxHashMap::default();
        let mut successors = Vec::with_capacity(v);
        for w in &lex.words {
            let (scores, inclusion) = cache.entry(w.r#final.as_str()).or_insert_with(|| {
                let scores: Vec<f64> = lex
                    .words
                    .iter()
                    .map(|s| {
                        let boost = if prefs.contains(&(w.r#final.clone(), s.initial.clone())) {
                            cfg.boundary_pair_strength
                        } else {
                            1.0
                        };
                        s.weight * boost
                    })
                    .collect();
                let inclusion = inclusion_probabilities(&scores, k);
                (scores, inclusion)
            });
            let chosen: Vec<u32> = if k == v {
                (0..v as u32).collect()
            } else {
                // Weighted sampling without replacement (Efraimidis-Spirakis keys).
                let mut keyed: Vec<(f64, u32)> = scores
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| (rng.random::<f64>().ln() / s, i as u32))
                    .collect();
                keyed.select_nth_unstable_by(k - 1, |a, b| b.0.total_cmp(&a.0));
                let mut top: Vec<u32> = keyed[..k].iter().map(|p| p.1).collect();
                top.sort_unstable();
                top
            };
            // Dividing by the chance of making the list keeps expected
            // transition mass proportional to score, so word frequencies
            // follow the lexicon weights instead of their square.
            let w: Vec<f64> = chosen
                .iter()
                .map(|&i| scores[i as usize] / inclusion[i as usize])
                .collect();
            successors.push((chosen, Sampler::new(&w)?));
        }
        Ok(SlotChain { start, successors })
    }

    /// Walks the chain for `n` words.
    pub fn walk(&self, n: usize, rng: &mut Rng) -> Vec<u32> {
        let mut out = Vec::with_capacity(n);
        let mut cur = self.start.sample(rng) as u32;
        for _ in 0..n {
            out.push(cur);
            let (ids, sampler) = &self.successors[cur as usize];
            cur = ids[sampler.sample(rng)];
        }
        out
    }
}

pub fn generate_slot_corpus(cfg: &SlotConfig, n_words: usize, seed: u64) -> Result<GeneratedCorpus> {
    check_words(n_words)?;
    let lex = build_slot_lexicon(cfg, seed::derive_named(seed, "lexicon"))?;
    let mut rng = seed::rng(seed::derive_named(seed, "chain"));
    let chain = SlotChain::new(&lex, cfg, &mut rng)?;
    let ids = chain.walk(n_words, &mut rng);
    let words: Vec<String> = ids.iter().map(|&i| lex.words[i as usize].text.clone()).collect();
    let mut srng = seed::rng(seed::derive_named(seed, "sentences"));
    let corpus = assemble(
        &format!("slot-{}", cfg.ablation),
        &words,
        &cfg.lengths,
        &cfg.inventory,
        &mut srng,
    )?;
    Ok(GeneratedCorpus {
        corpus,
        provenance: Provenance {
            generator: "slot".into(),
            seed,
            n_words,
            config: serde_json::to_value(cfg).unwrap_or_default(),
        },
    })
}
