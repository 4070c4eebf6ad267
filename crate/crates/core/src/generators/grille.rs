//! Cardan grille generator.
//!
//! A table of graphemes (or blanks) is read through a mask of hole columns;
//! the non-blank graphemes under the holes of one row form a word.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng as _;
use serde::Serialize;

use super::config::{invalid, KvConfig};
use super::{check_prob, check_words, take_lengths, GeneratedCorpus, LengthModel, Provenance, Sampler};
use crate::corpus::{Corpus, CorpusBuilder, Grapheme, GraphemeInventory, Tokenization};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

const DEFAULT_POOLS: &str = include_str!("../../data/grille_pools.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrilleMode {
    /// Independent row and offset for every word.
    Random,
    /// The mask moves one column per word, then on to the next row.
    Shift,
    /// The mask cycles through its distinct cyclic rotations.
    Rotate,
    /// Fixed mask, successive rows with occasional jumps.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Specialization {
    /// Left-half columns from the prefix pool, right half from the suffix pool.
    Split,
    /// One shared pool for every column.
    Uniform,
    /// Shared pool, blank probability rising linearly across columns.
    BlankGradient,
    /// Column distributions estimated from a source corpus.
    Learned,
}

macro_rules! named_enum {
    ($t:ty, $($v:path => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($v => $s),+ })
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.replace('_', "-").as_str() {
                    $($s => Ok($v),)+
                    other => Err(Error::InvalidParameter(format!("unknown value {other:?}"))),
                }
            }
        }
    };
}

named_enum!(GrilleMode,
    GrilleMode::Random => "random",
    GrilleMode::Shift => "shift",
    GrilleMode::Rotate => "rotate",
    GrilleMode::Sequential => "sequential");

named_enum!(Specialization,
    Specialization::Split => "split",
    Specialization::Uniform => "uniform",
    Specialization::BlankGradient => "blank-gradient",
    Specialization::Learned => "learned");

#[derive(Debug, Clone, Serialize)]
pub struct GrilleConfig {
    pub rows: usize,
    pub cols: usize,
    pub n_holes: usize,
    pub blank_prob: f64,
    pub blank_prob_low: f64,
    pub blank_prob_high: f64,
    pub column_skew_alpha: f64,
    pub mode: GrilleMode,
    pub specialization: Specialization,
    pub prefix_pool: Vec<String>,
    pub suffix_pool: Vec<String>,
    /// Graphemes heading both halves of a split table.
    pub bridge_pool: Vec<String>,
    pub jump_prob: f64,
    pub lengths: LengthModel,
    #[serde(skip)]
    pub inventory: GraphemeInventory,
    #[serde(skip)]
    pub source: Option<Arc<Corpus>>,
}

impl Default for GrilleConfig {
    fn default() -> Self {
        let mut cfg = GrilleConfig {
            rows: 200,
            cols: 10,
            n_holes: 6,
            blank_prob: 0.2,
            blank_prob_low: 0.1,
            blank_prob_high: 0.6,
            column_skew_alpha: 0.0,
            mode: GrilleMode::Random,
            specialization: Specialization::Split,
            prefix_pool: Vec::new(),
            suffix_pool: Vec::new(),
            bridge_pool: Vec::new(),
            jump_prob: 0.0,
            lengths: LengthModel::default(),
            inventory: GraphemeInventory::eva_default(),
            source: None,
        };
        let mut kv = KvConfig::parse(DEFAULT_POOLS).expect("bundled pools parse");
        cfg.apply_pools(&mut kv);
        cfg
    }
}

impl GrilleConfig {
    pub fn from_kv(mut kv: KvConfig) -> Result<Self> {
        let mut cfg = GrilleConfig::default();
        cfg.apply_pools(&mut kv);
        macro_rules! set {
            ($($k:ident),+) => { $(if let Some(v) = kv.take(stringify!($k))? { cfg.$k = v; })+ };
        }
        set!(
            rows,
            cols,
            n_holes,
            blank_prob,
            blank_prob_low,
            blank_prob_high,
            column_skew_alpha,
            mode,
            specialization,
            jump_prob
        );
        if let Some(path) = kv.take_str("inventory") {
            cfg.inventory = GraphemeInventory::load(std::path::Path::new(&path))?;
        }
        cfg.lengths = take_lengths(&mut kv)?;
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_pools(&mut self, kv: &mut KvConfig) {
        if let Some(p) = kv.take_list("prefix") {
            self.prefix_pool = p;
        }
        if let Some(p) = kv.take_list("suffix") {
            self.suffix_pool = p;
        }
        if let Some(p) = kv.take_list("bridge") {
            self.bridge_pool = p;
        }
    }

    pub fn with_source(mut self, source: Arc<Corpus>) -> Self {
        self.source = Some(source);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid("rows/cols", "table dimensions must be positive"));
        }
        if self.n_holes == 0 || self.n_holes > self.cols {
            return Err(invalid("n_holes", format!("must be in 1..={}", self.cols)));
        }
        check_prob("blank_prob", self.blank_prob)?;
        check_prob("blank_prob_low", self.blank_prob_low)?;
        check_prob("blank_prob_high", self.blank_prob_high)?;
        check_prob("jump_prob", self.jump_prob)?;
        if !(self.column_skew_alpha >= 0.0 && self.column_skew_alpha.is_finite()) {
            return Err(invalid("column_skew_alpha", "must be a finite value >= 0"));
        }
        if self.specialization != Specialization::Learned
            && (self.prefix_pool.is_empty() && self.bridge_pool.is_empty()
                || self.suffix_pool.is_empty() && self.bridge_pool.is_empty())
        {
            return Err(invalid("pools", "prefix and suffix pools must not be empty"));
        }
        Ok(())
    }

    fn union_pool(&self) -> Vec<String> {
        let mut u: Vec<String> = Vec::new();
        for g in self.bridge_pool.iter().chain(&self.prefix_pool).chain(&self.suffix_pool) {
            if !u.contains(g) {
                u.push(g.clone());
            }
        }
        u
    }

    fn column_blank(&self, col: usize) -> f64 {
        match self.specialization {
            Specialization::BlankGradient => {
                let t = if self.cols > 1 {
                    col as f64 / (self.cols - 1) as f64
                } else {
                    0.0
                };
                self.blank_prob_low + t * (self.blank_prob_high - self.blank_prob_low)
            }
            _ => self.blank_prob,
        }
    }
}

/// Cell contents: symbol index into `GrilleTable::symbols`, `None` if blank.
pub type Cell = Option<u32>;

#[derive(Debug, Clone, PartialEq)]
pub struct GrilleTable {
    pub rows: usize,
    pub cols: usize,
    pub symbols: Vec<String>,
    pub cells: Vec<Cell>,
}

impl GrilleTable {
    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.cols + col]
    }

    fn word(&self, row: usize, holes: &[usize]) -> Vec<u32> {
        holes.iter().filter_map(|&c| self.cell(row, c)).collect()
    }
}

/// Per-column outcome distributions: `None` is a blank.
fn learned_columns(src: &Corpus, cols: usize) -> Vec<Vec<(Option<String>, f64)>> {
    let mut counts: Vec<std::collections::BTreeMap<Option<String>, f64>> = vec![Default::default(); cols];
    for w in src.words() {
        for (j, col) in counts.iter_mut().enumerate() {
            let g = w.graphemes.get(j).map(|&s| src.symbol(s).to_string());
            *col.entry(g).or_default() += 1.0;
        }
    }
    counts.into_iter().map(|m| m.into_iter().collect()).collect()
}

pub fn build_grille_table(cfg: &GrilleConfig, seed: u64) -> Result<GrilleTable> {
    cfg.validate()?;
    let mut rng = seed::rng(seed);
    let mut symbols: Vec<String> = Vec::new();
    let index = |g: &str, symbols: &mut Vec<String>| -> u32 {
        match symbols.iter().position(|s| s == g) {
            Some(i) => i as u32,
            None => {
                symbols.push(g.to_string());
                (symbols.len() - 1) as u32
            }
        }
    };
    // (outcomes, sampler, blank probability applied on top)
    let mut columns: Vec<(Vec<Cell>, Sampler, f64)> = Vec::with_capacity(cfg.cols);
    if cfg.specialization == Specialization::Learned {
        let src = cfg.source.as_ref().ok_or(Error::MissingSource)?;
        for col in learned_columns(src, cfg.cols) {
            let outcomes: Vec<Cell> = col
                .iter()
                .map(|(g, _)| g.as_deref().map(|g| index(g, &mut symbols)))
                .collect();
            let w: Vec<f64> = col.iter().map(|p| p.1).collect();
            columns.push((outcomes, Sampler::new(&w)?, 0.0));
        }
    } else {
        let half = cfg.cols.div_ceil(2);
        let with_bridge = |pool: &[String]| -> Vec<String> {
            let mut v = cfg.bridge_pool.clone();
            v.extend(pool.iter().filter(|g| !cfg.bridge_pool.contains(g)).cloned());
            v
        };
        let prefix = with_bridge(&cfg.prefix_pool);
        let suffix = with_bridge(&cfg.suffix_pool);
        let union = cfg.union_pool();
        for col in 0..cfg.cols {
            let pool = match cfg.specialization {
                Specialization::Split if col < half => &prefix,
                Specialization::Split => &suffix,
                _ => &union,
            };
            let outcomes: Vec<Cell> = pool.iter().map(|g| Some(index(g, &mut symbols))).collect();
            let w = super::zipf_weights(pool.len(), cfg.column_skew_alpha);
            columns.push((outcomes, Sampler::new(&w)?, cfg.column_blank(col)));
        }
    }
    let rows = match (cfg.mode, &cfg.source) {
        (GrilleMode::Sequential, Some(src)) if cfg.specialization == Specialization::Learned => {
            src.word_count().max(1)
        }
        _ => cfg.rows,
    };
    let mut cells = Vec::with_capacity(rows * cfg.cols);
    for _ in 0..rows {
        for (outcomes, sampler, blank) in &columns {
            if *blank > 0.0 && rng.random_bool(*blank) {
                cells.push(None);
            } else {
                cells.push(outcomes[sampler.sample(&mut rng)]);
            }
        }
    }
    Ok(GrilleTable {
        rows,
        cols: cfg.cols,
        symbols,
        cells,
    })
}

/// Hole columns of the unshifted mask, sorted, starting at column 0.
pub fn base_mask(cfg: &GrilleConfig, rng: &mut Rng) -> Vec<usize> {
    let mut holes = rand::seq::index::sample(rng, cfg.cols, cfg.n_holes).into_vec();
    holes.sort_unstable();
    let min = holes[0];
    holes.iter().map(|h| h - min).collect()
}

/// Distinct cyclic rotations of a mask, each sorted.
pub fn rotations(mask: &[usize], cols: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for r in 0..cols {
        let mut m: Vec<usize> = mask.iter().map(|h| (h + r) % cols).collect();
        m.sort_unstable();
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

/// Produces successive (row, holes) reading positions.
struct Reader<'a> {
    cfg: &'a GrilleConfig,
    rows: usize,
    mask: Vec<usize>,
    rotations: Vec<Vec<usize>>,
    step: usize,
    row: usize,
}

impl<'a> Reader<'a> {
    fn new(cfg: &'a GrilleConfig, rows: usize, rng: &mut Rng) -> Self {
        let mask = base_mask(cfg, rng);
        let rotations = rotations(&mask, cfg.cols);
        Reader {
            cfg,
            rows,
            mask,
            rotations,
            step: 0,
            row: 0,
        }
    }

    fn offsets(&self) -> usize {
        self.cfg.cols - self.mask[self.mask.len() - 1]
    }

    fn shifted(&self, off: usize) -> Vec<usize> {
        self.mask.iter().map(|h| h + off).collect()
    }

    fn next(&mut self, rng: &mut Rng) -> (usize, Vec<usize>) {
        let pos = match self.cfg.mode {
            GrilleMode::Random => {
                let row = rng.random_range(0..self.rows);
                let off = rng.random_range(0..self.offsets());
                (row, self.shifted(off))
            }
            GrilleMode::Shift => {
                let n = self.offsets();
                let (row, off) = ((self.step / n) % self.rows, self.step % n);
                (row, self.shifted(off))
            }
            GrilleMode::Rotate => {
                let n = self.rotations.len();
                let row = (self.step / n) % self.rows;
                (row, self.rotations[self.step % n].clone())
            }
            GrilleMode::Sequential => {
                let row = self.row;
                self.row = if rng.random_bool(self.cfg.jump_prob) {
                    rng.random_range(0..self.rows)
                } else {
                    (self.row + 1) % self.rows
                };
                (row, self.mask.clone())
            }
        };
        self.step += 1;
        pos
    }
}

pub fn generate_grille_corpus(cfg: &GrilleConfig, n_words: usize, seed: u64) -> Result<GeneratedCorpus> {
    check_words(n_words)?;
    let table = build_grille_table(cfg, seed::derive_named(seed, "table"))?;
    if table.cells.iter().all(Option::is_none) {
        return Err(Error::InvalidParameter("grille table is entirely blank".into()));
    }
    let mut rng = seed::rng(seed::derive_named(seed, "reader"));
    let mut reader = Reader::new(cfg, table.rows, &mut rng);
    let mut words: Vec<Vec<u32>> = Vec::with_capacity(n_words);
    let mut empty_streak = 0usize;
    let limit = 1000 * table.rows * cfg.cols;
    while words.len() < n_words {
        let (row, holes) = reader.next(&mut rng);
        let w = table.word(row, &holes);
        if w.is_empty() {
            empty_streak += 1;
            if empty_streak > limit {
                return Err(Error::InvalidParameter(
                    "the grille mask never reaches a non-blank cell".into(),
                ));
            }
            continue;
        }
        empty_streak = 0;
        words.push(w);
    }
    let learned = cfg.specialization == Specialization::Learned;
    let tokenization = match &cfg.source {
        Some(src) if learned => src.tokenization,
        _ => Tokenization::EvaLongestMatch,
    };
    let name = format!("grille-{}-{}", cfg.specialization, cfg.mode);
    let mut srng = seed::rng(seed::derive_named(seed, "sentences"));
    let corpus = assemble_symbols(&name, &table.symbols, &words, cfg, tokenization, &mut srng)?;
    Ok(GeneratedCorpus {
        corpus,
        provenance: Provenance {
            generator: "grille".into(),
            seed,
            n_words,
            config: serde_json::to_value(cfg).unwrap_or_default(),
        },
    })
}

fn assemble_symbols(
    name: &str,
    symbols: &[String],
    words: &[Vec<u32>],
    cfg: &GrilleConfig,
    tokenization: Tokenization,
    rng: &mut Rng,
) -> Result<Corpus> {
    if tokenization == Tokenization::EvaLongestMatch {
        let texts: Vec<String> = words
            .iter()
            .map(|w| w.iter().map(|&s| symbols[s as usize].as_str()).collect())
            .collect();
        return super::assemble(name, &texts, &cfg.lengths, &cfg.inventory, rng);
    }
    let graphemes: Vec<Grapheme> = symbols.iter().map(Grapheme::new).collect::<Result<_>>()?;
    let sampler = cfg.lengths.sampler()?;
    let mut builder = CorpusBuilder::new(name, tokenization);
    let mut rest = words;
    while !rest.is_empty() {
        let len = cfg.lengths.counts[sampler.sample(rng)].0.min(rest.len());
        let (head, tail) = rest.split_at(len);
        let sentence: Vec<Vec<Grapheme>> = head
            .iter()
            .map(|w| w.iter().map(|&s| graphemes[s as usize].clone()).collect())
            .collect();
        builder.push_sentence(&sentence);
        rest = tail;
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, LoadOptions, Scheme};

    #[test]
    fn uniform_table_uses_whole_pool() {
        let cfg = GrilleConfig {
            specialization: Specialization::Uniform,
            blank_prob: 0.0,
            rows: 500,
            ..GrilleConfig::default()
        };
        let t = build_grille_table(&cfg, 1).unwrap();
        assert!(t.cells.iter().all(Option::is_some));
        let pool = cfg.union_pool();
        let mut counts = vec![0usize; t.symbols.len()];
        for c in t.cells.iter().flatten() {
            counts[*c as usize] += 1;
        }
        assert_eq!(t.symbols.len(), pool.len());
        // Each grapheme expects 5000 / 16 = 312.5 cells.
        let expected = t.cells.len() as f64 / pool.len() as f64;
        let sd = (expected * (1.0 - 1.0 / pool.len() as f64)).sqrt();
        assert!(counts.iter().all(|&k| (k as f64 - expected).abs() < 5.0 * sd));
    }

    #[test]
    fn extreme_skew_makes_columns_constant() {
        let cfg = GrilleConfig {
            column_skew_alpha: 60.0,
            blank_prob: 0.0,
            ..GrilleConfig::default()
        };
        let t = build_grille_table(&cfg, 3).unwrap();
        for col in 0..t.cols {
            let first = t.cell(0, col);
            assert!((0..t.rows).all(|r| t.cell(r, col) == first));
        }
    }

    #[test]
    fn learned_needs_source() {
        let cfg = GrilleConfig {
            specialization: Specialization::Learned,
            ..GrilleConfig::default()
        };
        assert!(matches!(build_grille_table(&cfg, 0), Err(Error::MissingSource)));
    }

    #[test]
    fn learned_first_column_matches_source() {
        let text = "the cat sat on a mat\nand then it ran off to the barn\n".repeat(200);
        let src = parse_corpus("s", &text, &LoadOptions::new(Scheme::Chars)).unwrap().corpus;
        let n_words = src.word_count() as f64;
        let t_share = src.words().filter(|w| src.symbol(w.first()) == "t").count() as f64 / n_words;
        let cfg = GrilleConfig {
            specialization: Specialization::Learned,
            rows: 20_000,
            ..GrilleConfig::default()
        }
        .with_source(Arc::new(src));
        let t = build_grille_table(&cfg, 5).unwrap();
        let t_sym = t.symbols.iter().position(|s| s == "t").unwrap() as u32;
        let hits = (0..t.rows).filter(|&r| t.cell(r, 0) == Some(t_sym)).count() as f64;
        let p = hits / t.rows as f64;
        let se = (t_share * (1.0 - t_share) / t.rows as f64).sqrt();
        assert!((p - t_share).abs() < 3.0 * se, "{p} vs {t_share}");
    }

    #[test]
    fn rotate_is_periodic_on_a_fixed_table() {
        let cfg = GrilleConfig {
            mode: GrilleMode::Rotate,
            rows: 3,
            blank_prob: 0.0,
            lengths: LengthModel::fixed(1000).unwrap(),
            ..GrilleConfig::default()
        };
        let g = generate_grille_corpus(&cfg, 600, 4).unwrap().corpus;
        let words: Vec<String> = g.words().map(|w| g.word_string(w)).collect();
        let mut rng = seed::rng(seed::derive_named(4, "reader"));
        let period = rotations(&base_mask(&cfg, &mut rng), cfg.cols).len() * cfg.rows;
        assert!(words.len() > 2 * period);
        assert!((period..words.len()).all(|i| words[i] == words[i - period]));
    }

    #[test]
    fn rotations_are_distinct() {
        assert_eq!(rotations(&[0, 2], 4), vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(rotations(&[0], 3).len(), 3);
    }

    #[test]
    fn seeded_and_sized() {
        let cfg = GrilleConfig::default();
        let a = generate_grille_corpus(&cfg, 3000, 1).unwrap().corpus;
        let b = generate_grille_corpus(&cfg, 3000, 1).unwrap().corpus;
        assert_eq!(a.word_count(), 3000);
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn config_parsing() {
        let kv = KvConfig::parse("mode = shift\nspecialization = blank_gradient\ncolumn_skew_alpha = 1.5").unwrap();
        let cfg = GrilleConfig::from_kv(kv).unwrap();
        assert_eq!(cfg.mode, GrilleMode::Shift);
        assert_eq!(cfg.specialization, Specialization::BlankGradient);
        let kv = KvConfig::parse("n_holes = 99").unwrap();
        assert!(GrilleConfig::from_kv(kv).is_err());
    }
}
