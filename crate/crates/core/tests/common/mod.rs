//! Brute-force reference implementations shared by the integration tests.
//!
//! Everything here works on plain strings and ordered maps, never on the
//! library's packed tables, so agreement is evidence rather than tautology.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use scriptforge::{parse_corpus, Corpus, LoadOptions, Scheme};

/// Sentences of words of single-letter graphemes.
pub type Text = Vec<Vec<String>>;

pub fn build(text: &Text) -> Corpus {
    let body = text.iter().map(|s| s.join(" ")).collect::<Vec<_>>().join("\n");
    parse_corpus("oracle", &body, &LoadOptions::new(Scheme::Chars))
        .unwrap()
        .corpus
}

/// Up to `max_sentences` × `max_words` × `max_len` over `alphabet`.
pub fn random_text(rng: &mut impl Rng, max_sentences: usize, max_words: usize, max_len: usize, alphabet: &[char]) -> Text {
    (0..rng.random_range(1..=max_sentences))
        .map(|_| {
            (0..rng.random_range(1..=max_words))
                .map(|_| {
                    (0..rng.random_range(1..=max_len))
                        .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Every word over `alphabet` with 1..=`max_len` letters.
pub fn all_words(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|p| alphabet.iter().map(move |c| format!("{p}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

pub fn entropy<K>(counts: &BTreeMap<K, f64>) -> f64 {
    let total: f64 = counts.values().sum();
    counts
        .values()
        .filter(|&&k| k > 0.0)
        .map(|&k| {
            let p = k / total;
            -p * p.log2()
        })
        .sum()
}

fn bump<K: Ord>(m: &mut BTreeMap<K, f64>, k: K) {
    *m.entry(k).or_insert(0.0) += 1.0;
}

/// Per-token cross-entropy of each sentence's character stream (words
/// joined by a space) under an additively smoothed order-`n` model trained
/// on those same streams. `None` when no window of length `n` exists.
pub fn cross_entropy(text: &Text, n: usize, alpha: f64) -> Option<f64> {
    let streams: Vec<Vec<char>> = text.iter().map(|s| s.join(" ").chars().collect()).collect();
    let mut full: BTreeMap<Vec<char>, f64> = BTreeMap::new();
    let mut ctx: BTreeMap<Vec<char>, f64> = BTreeMap::new();
    let mut vocab: BTreeMap<char, f64> = BTreeMap::new();
    for s in &streams {
        for &c in s {
            bump(&mut vocab, c);
        }
        for w in s.windows(n) {
            bump(&mut full, w.to_vec());
            bump(&mut ctx, w[..n - 1].to_vec());
        }
    }
    if full.is_empty() {
        return None;
    }
    let v = vocab.len() as f64;
    let mut bits = 0.0;
    let mut tokens = 0.0;
    for s in &streams {
        for w in s.windows(n) {
            let num = full.get(w).copied().unwrap_or(0.0) + alpha;
            let den = ctx.get(&w[..n - 1]).copied().unwrap_or(0.0) + alpha * v;
            bits -= (num / den).log2();
            tokens += 1.0;
        }
    }
    Some(bits / tokens)
}

/// (last `n` letters of w_i, first `n` letters of w_{i+1}) for adjacent
/// words, short words padded with `#` on the word-internal side.
pub fn boundary_pairs(text: &Text, n: usize) -> Vec<(String, String)> {
    let tail = |w: &str| {
        let cs: Vec<char> = w.chars().collect();
        let take = n.min(cs.len());
        "#".repeat(n - take) + &cs[cs.len() - take..].iter().collect::<String>()
    };
    let head = |w: &str| {
        let cs: Vec<char> = w.chars().collect();
        let take = n.min(cs.len());
        cs[..take].iter().collect::<String>() + &"#".repeat(n - take)
    };
    text.iter()
        .flat_map(|s| s.windows(2).map(|p| (tail(&p[0]), head(&p[1]))).collect::<Vec<_>>())
        .collect()
}

pub struct JointStats {
    pub h_target: f64,
    pub h_condition: f64,
    pub h_joint: f64,
}

impl JointStats {
    pub fn of<A: Ord + Clone, B: Ord + Clone>(pairs: &[(A, B)]) -> Option<JointStats> {
        if pairs.is_empty() {
            return None;
        }
        let mut joint = BTreeMap::new();
        let mut cond = BTreeMap::new();
        let mut target = BTreeMap::new();
        for (a, b) in pairs {
            bump(&mut joint, (a.clone(), b.clone()));
            bump(&mut cond, a.clone());
            bump(&mut target, b.clone());
        }
        Some(JointStats {
            h_target: entropy(&target),
            h_condition: entropy(&cond),
            h_joint: entropy(&joint),
        })
    }

    /// H(T | C) by the chain rule.
    pub fn conditional(&self) -> f64 {
        self.h_joint - self.h_condition
    }

    pub fn mutual_information(&self) -> f64 {
        self.h_target + self.h_condition - self.h_joint
    }
}

/// 0 start, 1 end, 2 ambiguous, by the 2:1 rule on word-initial and
/// word-final counts.
pub fn classes(text: &Text) -> BTreeMap<char, u8> {
    let mut counts: BTreeMap<char, (f64, f64)> = BTreeMap::new();
    for w in text.iter().flatten() {
        counts.entry(w.chars().next().unwrap()).or_default().0 += 1.0;
        counts.entry(w.chars().last().unwrap()).or_default().1 += 1.0;
    }
    counts
        .into_iter()
        .map(|(g, (i, f))| {
            let class = if i >= 2.0 * f {
                0
            } else if f >= 2.0 * i {
                1
            } else {
                2
            };
            (g, class)
        })
        .collect()
}

/// Boundary MI over (class of final letter, class of initial letter).
pub fn class_mi(text: &Text) -> Option<f64> {
    let cls = classes(text);
    let pairs: Vec<(u8, u8)> = boundary_pairs(text, 1)
        .into_iter()
        .map(|(a, b)| (cls[&a.chars().next().unwrap()], cls[&b.chars().next().unwrap()]))
        .collect();
    JointStats::of(&pairs).map(|s| s.mutual_information())
}
