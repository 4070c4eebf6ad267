//! Naibbe-style verbose substitution cipher.
//!
//! Plaintext letters are respaced into unigram and bigram tokens. A unigram
//! token becomes one glyph string from its letter's unigram table; a bigram
//! token becomes a prefix-pool string for its first letter followed by a
//! suffix-pool string for its second. Each alternative is picked by an
//! independent weighted card draw.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng as _;
use serde::Serialize;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::config::{invalid, KvConfig};
use super::{assemble, check_prob, check_words, take_lengths, GeneratedCorpus, LengthModel, Provenance, Sampler};
use crate::corpus::{tokenize_eva, GraphemeInventory};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

/// Default number of redraws before a bigram is declared unencodable.
pub const MAX_REDRAWS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Token {
    Unigram(char),
    Bigram(char, char),
}

/// Glyph-string alternatives per plaintext letter, in card order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaibbeTables {
    pub unigram: BTreeMap<char, Vec<String>>,
    pub prefix: BTreeMap<char, Vec<String>>,
    pub suffix: BTreeMap<char, Vec<String>>,
}

const CORE_VOWELS: [&str; 3] = ["o", "a", "e"];
const CORE_CONSONANTS: [&str; 9] = ["k", "t", "l", "r", "d", "ch", "sh", "ckh", "cth"];
const PREFIX_STARTS: [&str; 8] = ["q", "ch", "sh", "t", "k", "p", "d", "f"];
const SUFFIX_ENDS: [&str; 6] = ["y", "iin", "r", "l", "m", "n"];
const UNIGRAM_STARTS: [&str; 4] = ["o", "y", "s", "d"];
const UNIGRAM_ENDS: [&str; 4] = ["y", "l", "o", "s"];

fn core(i: usize, rotate: usize) -> String {
    format!(
        "{}{}",
        CORE_VOWELS[(i + rotate) % CORE_VOWELS.len()],
        CORE_CONSONANTS[i / CORE_VOWELS.len()]
    )
}

impl NaibbeTables {
    /// Reconstructible default tables for the letters a-z.
    ///
    /// Each letter owns a distinct core; the card picks the boundary glyphs,
    /// which are therefore independent of the letter. Prefix strings open with
    /// start-preferring glyphs, suffix strings close with end-preferring
    /// glyphs, and unigram strings use glyphs found on both sides.
    pub fn default_tables() -> Self {
        let mut t = NaibbeTables {
            unigram: BTreeMap::new(),
            prefix: BTreeMap::new(),
            suffix: BTreeMap::new(),
        };
        for (i, letter) in ('a'..='z').enumerate() {
            let uni = (0..UNIGRAM_STARTS.len())
                .map(|c| {
                    let end = UNIGRAM_ENDS[(c + i) % UNIGRAM_ENDS.len()];
                    format!("{}{}{}", UNIGRAM_STARTS[c], core(i, 2), end)
                })
                .collect();
            let pre = PREFIX_STARTS.iter().map(|s| format!("{s}{}", core(i, 0))).collect();
            let suf = SUFFIX_ENDS.iter().map(|e| format!("{}{e}", core(i, 1))).collect();
            t.unigram.insert(letter, uni);
            t.prefix.insert(letter, pre);
            t.suffix.insert(letter, suf);
        }
        t
    }

    /// Reads `unigram.<letter>`, `prefix.<letter>` and `suffix.<letter>` lists.
    pub fn from_kv(kv: &mut KvConfig) -> Result<Option<Self>> {
        let read = |kv: &mut KvConfig, p: &str| -> Result<BTreeMap<char, Vec<String>>> {
            let mut m = BTreeMap::new();
            for (k, v) in kv.take_prefixed(p) {
                let mut chars = k.chars();
                let (Some(c), None) = (chars.next(), chars.next()) else {
                    return Err(invalid(p, format!("table key {k:?} is not a single letter")));
                };
                m.insert(c, v.split_whitespace().map(str::to_string).collect());
            }
            Ok(m)
        };
        let unigram = read(kv, "unigram.")?;
        let prefix = read(kv, "prefix.")?;
        let suffix = read(kv, "suffix.")?;
        if unigram.is_empty() && prefix.is_empty() && suffix.is_empty() {
            return Ok(None);
        }
        Ok(Some(NaibbeTables {
            unigram,
            prefix,
            suffix,
        }))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut kv = KvConfig::load(path)?;
        let t = Self::from_kv(&mut kv)?
            .ok_or_else(|| Error::InvalidParameter(format!("{}: no table entries", path.display())))?;
        kv.finish()?;
        Ok(t)
    }

    pub fn validate(&self, inv: &GraphemeInventory) -> Result<()> {
        let prefix: std::collections::BTreeSet<&String> = self.prefix.values().flatten().collect();
        if let Some(s) = self.suffix.values().flatten().find(|s| prefix.contains(s)) {
            return Err(invalid("tables", format!("{s:?} is in both the prefix and suffix pools")));
        }
        for s in self.unigram.values().chain(self.prefix.values()).chain(self.suffix.values()).flatten() {
            tokenize_eva(s, inv)?;
        }
        Ok(())
    }

    fn letters(&self) -> impl Iterator<Item = char> + '_ {
        self.unigram.keys().copied()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NaibbeConfig {
    pub tables: NaibbeTables,
    /// Weight of the card at each alternative index.
    pub card_weights: Vec<f64>,
    pub unambiguous_mode: bool,
    /// Probability that a position opens a bigram token.
    pub bigram_prob: f64,
    pub max_redraws: usize,
    pub lengths: LengthModel,
    #[serde(skip)]
    pub inventory: GraphemeInventory,
}

impl Default for NaibbeConfig {
    fn default() -> Self {
        NaibbeConfig {
            tables: NaibbeTables::default_tables(),
            card_weights: vec![1.0; 8],
            unambiguous_mode: true,
            bigram_prob: 0.53,
            max_redraws: MAX_REDRAWS,
            lengths: LengthModel::default(),
            inventory: GraphemeInventory::eva_default(),
        }
    }
}

impl NaibbeConfig {
    pub fn from_kv(mut kv: KvConfig) -> Result<Self> {
        let mut cfg = NaibbeConfig::default();
        if let Some(t) = NaibbeTables::from_kv(&mut kv)? {
            cfg.tables = t;
        }
        if let Some(path) = kv.take_str("tables") {
            cfg.tables = NaibbeTables::load(Path::new(&path))?;
        }
        if let Some(w) = kv.take_list("card_weights") {
            cfg.card_weights = w
                .iter()
                .map(|x| x.parse::<f64>().map_err(|e| invalid("card_weights", e)))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = kv.take("unambiguous_mode")? {
            cfg.unambiguous_mode = v;
        }
        if let Some(v) = kv.take("bigram_prob")? {
            cfg.bigram_prob = v;
        }
        if let Some(v) = kv.take("max_redraws")? {
            cfg.max_redraws = v;
        }
        if let Some(path) = kv.take_str("inventory") {
            cfg.inventory = GraphemeInventory::load(Path::new(&path))?;
        }
        cfg.lengths = take_lengths(&mut kv)?;
        kv.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("bigram_prob", self.bigram_prob)?;
        if self.card_weights.is_empty() || self.card_weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(invalid("card_weights", "weights must be positive"));
        }
        self.tables.validate(&self.inventory)
    }

    fn card_sampler(&self, n: usize) -> Result<Sampler> {
        let w: Vec<f64> = (0..n)
            .map(|i| self.card_weights.get(i).copied().unwrap_or(*self.card_weights.last().unwrap_or(&1.0)))
            .collect();
        Sampler::new(&w)
    }
}

/// Lower-case letters of `text` with diacritics removed; everything else dropped.
pub fn plaintext_letters(text: &str) -> Vec<char> {
    text.nfd()
        .filter(|&c| !is_combining_mark(c))
        .flat_map(char::to_lowercase)
        .filter(char::is_ascii_lowercase)
        .collect()
}

/// Greedy left-to-right respacing into unigram and bigram tokens.
pub fn respace_plaintext(letters: &[char], bigram_prob: f64, rng: &mut Rng) -> Result<Vec<Token>> {
    if letters.is_empty() {
        return Err(Error::EmptyPlaintext);
    }
    let mut out = Vec::with_capacity(letters.len());
    let mut i = 0;
    while i < letters.len() {
        if i + 1 < letters.len() && rng.random_bool(bigram_prob) {
            out.push(Token::Bigram(letters[i], letters[i + 1]));
            i += 2;
        } else {
            out.push(Token::Unigram(letters[i]));
            i += 1;
        }
    }
    Ok(out)
}

/// Precomputed samplers and ambiguity checks for encryption.
pub struct Encoder<'a> {
    cfg: &'a NaibbeConfig,
    samplers: BTreeMap<usize, Sampler>,
}

impl<'a> Encoder<'a> {
    pub fn new(cfg: &'a NaibbeConfig) -> Result<Self> {
        cfg.validate()?;
        let mut samplers = BTreeMap::new();
        for alts in cfg.tables.unigram.values().chain(cfg.tables.prefix.values()).chain(cfg.tables.suffix.values()) {
            let n = alts.len();
            if n > 0 && !samplers.contains_key(&n) {
                samplers.insert(n, cfg.card_sampler(n)?);
            }
        }
        Ok(Encoder { cfg, samplers })
    }

    fn draw<'t>(&self, table: &'t BTreeMap<char, Vec<String>>, c: char, rng: &mut Rng) -> Result<&'t str> {
        let alts = table
            .get(&c)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| Error::MissingTableEntry(c.to_string()))?;
        Ok(&alts[self.samplers[&alts.len()].sample(rng)])
    }

    /// True when the concatenation re-tokenizes across the junction or parses
    /// as some other prefix/suffix pair.
    pub fn ambiguous(&self, prefix: &str, suffix: &str) -> bool {
        let inv = &self.cfg.inventory;
        let whole = format!("{prefix}{suffix}");
        let (Ok(a), Ok(b), Ok(w)) = (
            tokenize_eva(prefix, inv),
            tokenize_eva(suffix, inv),
            tokenize_eva(&whole, inv),
        ) else {
            return true;
        };
        if w.len() != a.len() + b.len() || w[..a.len()] != a[..] {
            return true;
        }
        let t = &self.cfg.tables;
        let parses = (1..whole.len())
            .filter(|&k| whole.is_char_boundary(k))
            .filter(|&k| {
                let (p, s) = whole.split_at(k);
                t.prefix.values().flatten().any(|x| x == p) && t.suffix.values().flatten().any(|x| x == s)
            })
            .count();
        parses != 1
    }

    pub fn encode(&self, token: &Token, rng: &mut Rng) -> Result<String> {
        let t = &self.cfg.tables;
        match *token {
            Token::Unigram(c) => Ok(self.draw(&t.unigram, c, rng)?.to_string()),
            Token::Bigram(a, b) => {
                for _ in 0..self.cfg.max_redraws.max(1) {
                    let p = self.draw(&t.prefix, a, rng)?;
                    let s = self.draw(&t.suffix, b, rng)?;
                    if !self.cfg.unambiguous_mode || !self.ambiguous(p, s) {
                        return Ok(format!("{p}{s}"));
                    }
                }
                Err(Error::NoUnambiguousAlternative(format!("{a}{b}")))
            }
        }
    }
}

/// Encrypts `tokens` into words, one word per token.
pub fn encrypt_naibbe(tokens: &[Token], cfg: &NaibbeConfig, seed: u64) -> Result<Vec<String>> {
    let enc = Encoder::new(cfg)?;
    let mut rng = seed::rng(seed);
    tokens.iter().map(|t| enc.encode(t, &mut rng)).collect()
}

/// Encrypts a window of `plaintext` into a corpus of `n_words` cipher words.
/// The window starts at a seed-dependent letter and wraps around the text.
pub fn generate_naibbe_corpus(
    cfg: &NaibbeConfig,
    plaintext: &str,
    n_words: usize,
    seed: u64,
) -> Result<GeneratedCorpus> {
    check_words(n_words)?;
    let letters: Vec<char> = plaintext_letters(plaintext)
        .into_iter()
        .filter(|c| cfg.tables.unigram.contains_key(c))
        .collect();
    if letters.is_empty() {
        return Err(Error::EmptyPlaintext);
    }
    let mut rng = seed::rng(seed::derive_named(seed, "respace"));
    let start = rng.random_range(0..letters.len());
    // Tokens average 1 + bigram_prob letters; overshoot, then trim.
    let need = ((n_words as f64) * (1.0 + cfg.bigram_prob) * 1.1) as usize + 2;
    let window: Vec<char> = letters.iter().cycle().skip(start).take(need).copied().collect();
    let mut tokens = respace_plaintext(&window, cfg.bigram_prob, &mut rng)?;
    tokens.truncate(n_words);
    let words = encrypt_naibbe(&tokens, cfg, seed::derive_named(seed, "cards"))?;
    let mut srng = seed::rng(seed::derive_named(seed, "sentences"));
    let corpus = assemble("naibbe", &words, &cfg.lengths, &cfg.inventory, &mut srng)?;
    Ok(GeneratedCorpus {
        corpus,
        provenance: Provenance {
            generator: "naibbe".into(),
            seed,
            n_words,
            config: serde_json::to_value(cfg).unwrap_or_default(),
        },
    })
}

/// Letters covered by the unigram table.
pub fn alphabet(cfg: &NaibbeConfig) -> String {
    cfg.tables.letters().collect()
}
