//! Positional preferences of graphemes at word boundaries.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{self, BoundaryTransitionTable};
use crate::corpus::{shuffle_words, Corpus, Sym};
use crate::error::{Error, Result};
use crate::seed;
use crate::stats;

pub const DEFAULT_THRESHOLD: f64 = 2.0;
pub const DEFAULT_EXTREME_RATIO: f64 = 100.0;
/// Minimum dominant-side count before a ratio is considered extreme.
pub const EXTREME_SUPPORT: u64 = 20;
pub const ZIPF_R2: f64 = 0.85;
pub const ZIPF_CV: f64 = 0.8;
/// Below this coefficient of variation a distribution counts as flat.
pub const PLATEAU_CV: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositionClass {
    Start,
    End,
    Ambiguous,
}

impl PositionClass {
    fn index(self) -> u64 {
        match self {
            PositionClass::Start => 0,
            PositionClass::End => 1,
            PositionClass::Ambiguous => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphemePosition {
    pub initial: u64,
    pub r#final: u64,
    pub class: PositionClass,
}

/// Per-grapheme boundary counts and labels, indexed by symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionalClassification {
    pub threshold: f64,
    entries: Vec<Option<GraphemePosition>>,
}

impl PositionalClassification {
    pub fn get(&self, s: Sym) -> Option<&GraphemePosition> {
        self.entries.get(s as usize).and_then(Option::as_ref)
    }

    pub fn class(&self, s: Sym) -> Option<PositionClass> {
        self.get(s).map(|g| g.class)
    }

    /// Classified graphemes in symbol order.
    pub fn iter(&self) -> impl Iterator<Item = (Sym, &GraphemePosition)> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.as_ref().map(|g| (i as Sym, g)))
    }

    pub fn count(&self, class: PositionClass) -> usize {
        self.iter().filter(|(_, g)| g.class == class).count()
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn label(initial: u64, fin: u64, threshold: f64) -> PositionClass {
    let (i, f) = (initial as f64, fin as f64);
    if i >= threshold * f && initial > 0 {
        PositionClass::Start
    } else if f >= threshold * i && fin > 0 {
        PositionClass::End
    } else {
        PositionClass::Ambiguous
    }
}

pub fn classify(c: &Corpus, threshold: f64) -> PositionalClassification {
    let mut counts = vec![(0u64, 0u64); c.alphabet().len()];
    for w in c.words() {
        counts[w.first() as usize].0 += 1;
        counts[w.last() as usize].1 += 1;
    }
    let entries = counts
        .into_iter()
        .map(|(initial, fin)| {
            (initial + fin > 0).then(|| GraphemePosition {
                initial,
                r#final: fin,
                class: label(initial, fin, threshold),
            })
        })
        .collect();
    PositionalClassification { threshold, entries }
}

/// Share of classified graphemes that are start- or end-preferring.
pub fn polarization_index(pc: &PositionalClassification) -> Result<f64> {
    let total = pc.len();
    if total == 0 {
        return Err(Error::NoGraphemes);
    }
    let polar = total - pc.count(PositionClass::Ambiguous);
    Ok(polar as f64 / total as f64)
}

/// Percentage of adjacent word pairs joining an end-class final grapheme to a
/// start-class initial grapheme.
pub fn end_to_start_rate(c: &Corpus, pc: &PositionalClassification) -> Result<f64> {
    let mut hits = 0u64;
    let mut total = 0u64;
    for s in &c.sentences {
        for p in s.words.windows(2) {
            total += 1;
            let end = pc.class(p[0].last()) == Some(PositionClass::End);
            let start = pc.class(p[1].first()) == Some(PositionClass::Start);
            if end && start {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::NoTransitions);
    }
    Ok(100.0 * hits as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Initial,
    Final,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremeRatio {
    pub grapheme: Sym,
    pub ratio: f64,
    pub side: Side,
}

/// Graphemes whose dominant-to-minor count ratio reaches `ratio_threshold`,
/// with a zero minor count treated as one.
pub fn extreme_ratios(pc: &PositionalClassification, ratio_threshold: f64) -> Vec<ExtremeRatio> {
    pc.iter()
        .filter_map(|(s, g)| {
            let hi = g.initial.max(g.r#final);
            let lo = g.initial.min(g.r#final).max(1);
            let ratio = hi as f64 / lo as f64;
            (hi >= EXTREME_SUPPORT && ratio >= ratio_threshold).then_some(ExtremeRatio {
                grapheme: s,
                ratio,
                side: if g.initial >= g.r#final {
                    Side::Initial
                } else {
                    Side::Final
                },
            })
        })
        .collect()
}

pub fn bilateral(extremes: &[ExtremeRatio]) -> bool {
    extremes.iter().any(|e| e.side == Side::Initial)
        && extremes.iter().any(|e| e.side == Side::Final)
}

/// Extreme-ratio graphemes exist on both the initial and the final side.
pub fn bilateral_extremity(pc: &PositionalClassification) -> bool {
    bilateral(&extreme_ratios(pc, DEFAULT_EXTREME_RATIO))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiDecomposition {
    pub mi_total: f64,
    pub mi_class: f64,
    pub mi_within: f64,
    pub class_pct: f64,
    pub shuffled_total: f64,
    pub shuffled_class: f64,
    pub shuffled_within: f64,
}

fn decompose_table(t: &BoundaryTransitionTable, pc: &PositionalClassification) -> Result<(f64, f64)> {
    if t.total() == 0 {
        return Err(Error::NoTransitions);
    }
    let total = boundary::mutual_information(t)?;
    // At n = 1 a gram is exactly one symbol.
    let coarse = t.coarsen(|g| {
        pc.class(g as Sym)
            .unwrap_or(PositionClass::Ambiguous)
            .index()
    });
    let class = boundary::mutual_information(&coarse)?;
    Ok((total, class))
}

/// Boundary MI at n = 1 split into the class-label share and the residual.
pub fn mi_decomposition(
    c: &Corpus,
    pc: &PositionalClassification,
    seed: u64,
    reps: usize,
) -> Result<MiDecomposition> {
    let (mi_total, mi_class) = decompose_table(&boundary::extract_transitions(c, 1)?, pc)?;
    let shuffled: Vec<(f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let s = shuffle_words(c, seed::derive(seed, r));
            decompose_table(&boundary::extract_transitions(&s, 1)?, pc)
        })
        .collect::<Result<_>>()?;
    let st = stats::mean(&shuffled.iter().map(|p| p.0).collect::<Vec<_>>());
    let sc = stats::mean(&shuffled.iter().map(|p| p.1).collect::<Vec<_>>());
    Ok(MiDecomposition {
        mi_total,
        mi_class,
        mi_within: mi_total - mi_class,
        class_pct: if mi_total > 0.0 { 100.0 * mi_class / mi_total } else { 0.0 },
        shuffled_total: st,
        shuffled_class: sc,
        shuffled_within: st - sc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Position {
    Initial,
    Final,
    #[default]
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Zipfian,
    Intermediate,
    Plateau,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Zipfian => "Zipfian",
            Shape::Intermediate => "Intermediate",
            Shape::Plateau => "Plateau",
        })
    }
}

pub fn shape_of(r_squared: f64, cv: f64) -> Shape {
    if r_squared > ZIPF_R2 && cv > ZIPF_CV {
        Shape::Zipfian
    } else if cv < PLATEAU_CV {
        Shape::Plateau
    } else {
        Shape::Intermediate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDistribution {
    pub position: Position,
    pub rank_freq: Vec<u64>,
    pub r_squared: f64,
    /// Negated log-log slope, so `freq ∝ rank^-exponent`.
    pub exponent: f64,
    pub cv: f64,
    pub shape: Shape,
}

/// Least-squares fit of `ln f` on `ln rank` over positive frequencies.
/// Returns `(r_squared, exponent)`.
pub fn power_law_fit(rank_freq: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = rank_freq
        .iter()
        .enumerate()
        .filter(|(_, &f)| f > 0.0)
        .map(|(i, &f)| (((i + 1) as f64).ln(), f.ln()))
        .collect();
    if pts.len() < 2 {
        return (0.0, 0.0);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    // A perfectly flat distribution has no variance to explain.
    let r2 = if syy <= 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    (r2, -slope)
}

/// Population coefficient of variation.
pub fn coefficient_of_variation(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = stats::mean(xs);
    if m == 0.0 {
        return 0.0;
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    var.sqrt() / m
}

/// Shape statistics for an arbitrary frequency list.
pub fn distribution_from_counts(position: Position, mut counts: Vec<u64>) -> BoundaryDistribution {
    counts.retain(|&k| k > 0);
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let f: Vec<f64> = counts.iter().map(|&k| k as f64).collect();
    let (r_squared, exponent) = power_law_fit(&f);
    let cv = coefficient_of_variation(&f);
    BoundaryDistribution {
        position,
        rank_freq: counts,
        r_squared,
        exponent,
        cv,
        shape: shape_of(r_squared, cv),
    }
}

pub fn boundary_distribution(c: &Corpus, position: Position) -> Result<BoundaryDistribution> {
    let mut counts = vec![0u64; c.alphabet().len()];
    let mut words = 0usize;
    for w in c.words() {
        words += 1;
        if position != Position::Final {
            counts[w.first() as usize] += 1;
        }
        if position != Position::Initial {
            counts[w.last() as usize] += 1;
        }
    }
    if words == 0 {
        return Err(Error::NoWords);
    }
    Ok(distribution_from_counts(position, counts))
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
    fn labels() {
        assert_eq!(label(3, 1, 2.0), PositionClass::Start);
        assert_eq!(label(1, 1, 2.0), PositionClass::Ambiguous);
        assert_eq!(label(0, 5, 2.0), PositionClass::End);
        assert_eq!(label(2, 1, 2.0), PositionClass::Start);
    }

    #[test]
    fn forced_end_to_start() {
        let c = corpus("ab ab ab\nab ab");
        let pc = classify(&c, 2.0);
        assert_eq!(end_to_start_rate(&c, &pc).unwrap(), 100.0);
        assert_eq!(polarization_index(&pc).unwrap(), 1.0);
    }

    #[test]
    fn all_ambiguous() {
        let c = corpus("a a a");
        let pc = classify(&c, 2.0);
        assert_eq!(polarization_index(&pc).unwrap(), 0.0);
        assert_eq!(end_to_start_rate(&c, &pc).unwrap(), 0.0);
    }

    #[test]
    fn extremes_need_support_and_ratio() {
        let text = format!("{}\n{}", "qa ".repeat(150), "xb ".repeat(50));
        let c = corpus(&text);
        let pc = classify(&c, 2.0);
        let ex = extreme_ratios(&pc, 100.0);
        let q = c.alphabet().get("q").unwrap();
        let a = c.alphabet().get("a").unwrap();
        assert!(ex.iter().any(|e| e.grapheme == q && e.side == Side::Initial && e.ratio == 150.0));
        assert!(ex.iter().any(|e| e.grapheme == a && e.side == Side::Final));
        // x and b have only 50 occurrences against a zero count: ratio 50.
        assert_eq!(ex.len(), 2);
        assert!(bilateral(&ex));
        assert!(!bilateral(&ex[..1]));
        assert!(!bilateral(&[]));
    }

    #[test]
    fn one_grapheme_per_class_has_no_within_mi() {
        let c = corpus(&"ab ab ab ab\n".repeat(5));
        let pc = classify(&c, 2.0);
        let d = mi_decomposition(&c, &pc, 1, 3).unwrap();
        assert!(d.mi_within.abs() < 1e-12);
        assert!((d.mi_class + d.mi_within - d.mi_total).abs() < 1e-12);
    }

    #[test]
    fn harmonic_frequencies_are_zipfian() {
        let f: Vec<f64> = (1..=20).map(|r| 1000.0 / r as f64).collect();
        let (r2, e) = power_law_fit(&f);
        assert!(r2 > 1.0 - 1e-9);
        assert!((e - 1.0).abs() < 1e-9);
        let cv = coefficient_of_variation(&f);
        assert!(cv > 0.8);
        assert_eq!(shape_of(r2, cv), Shape::Zipfian);
    }

    #[test]
    fn uniform_is_plateau() {
        let d = distribution_from_counts(Position::Combined, vec![7; 12]);
        assert_eq!(d.cv, 0.0);
        assert_eq!(d.shape, Shape::Plateau);
    }

    #[test]
    fn empty_corpus_has_no_words() {
        let c = corpus("ab").with_sentences(Vec::new());
        assert!(matches!(boundary_distribution(&c, Position::Combined), Err(Error::NoWords)));
    }
}
