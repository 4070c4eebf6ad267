//! Corpus data model, tokenizers and word-order transformations.
//!
//! A [`Corpus`] is a list of sentences, each a list of words, each a list of
//! graphemes. Graphemes are interned into a shared [`Alphabet`] so the
//! metric modules can work on small integer ids.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::seed;

/// Interned grapheme id, an index into the corpus [`Alphabet`].
pub type Sym = u32;

/// Ids above this are reserved for separator and padding symbols.
pub const MAX_ALPHABET: usize = 65_000;

const EVA_INVENTORY: &str = include_str!("../data/eva_inventory.txt");

/// One atomic symbol: an EVA grapheme or a single natural-language character.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Grapheme(String);

impl Grapheme {
    pub fn new(symbol: impl Into<String>) -> Result<Self> {
        let symbol = symbol.into();
        if symbol.is_empty() || symbol.chars().any(char::is_whitespace) {
            return Err(Error::InvalidGrapheme(symbol));
        }
        Ok(Grapheme(symbol))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Grapheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The set of multi-character graphemes used by greedy EVA tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphemeInventory {
    entries: BTreeSet<String>,
    max_len: usize,
}

impl GraphemeInventory {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for e in entries {
            let g = Grapheme::new(e)?;
            set.insert(g.0);
        }
        if set.is_empty() {
            return Err(Error::InvalidParameter("grapheme inventory is empty".into()));
        }
        let max_len = set.iter().map(|e| e.chars().count()).max().unwrap_or(1);
        Ok(GraphemeInventory {
            entries: set,
            max_len,
        })
    }

    /// Parses one grapheme per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = strip_comment(line).trim();
            if line.is_empty() {
                continue;
            }
            if line.chars().any(char::is_whitespace) {
                return Err(Error::Config {
                    line: i + 1,
                    message: format!("grapheme {line:?} contains whitespace"),
                });
            }
            entries.push(line.to_string());
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The bundled EVA inventory.
    pub fn eva_default() -> Self {
        Self::parse(EVA_INVENTORY).expect("bundled inventory is valid")
    }

    pub fn contains(&self, g: &str) -> bool {
        self.entries.contains(g)
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Greedy longest-match segmentation of `raw_word` against `inv`.
///
/// At every position the longest inventory entry that prefixes the remaining
/// text is consumed. Fails at the first position where nothing matches.
pub fn tokenize_eva(raw_word: &str, inv: &GraphemeInventory) -> Result<Vec<Grapheme>> {
    if raw_word.is_empty() {
        return Err(Error::TokenizationFailure {
            word: String::new(),
            position: 0,
        });
    }
    // Byte offset of every char boundary, plus the end.
    let bounds: Vec<usize> = raw_word
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(raw_word.len()))
        .collect();
    let n_chars = bounds.len() - 1;
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < n_chars {
        let longest = inv.max_len.min(n_chars - pos);
        let hit = (1..=longest)
            .rev()
            .find(|&len| inv.contains(&raw_word[bounds[pos]..bounds[pos + len]]));
        match hit {
            Some(len) => {
                out.push(Grapheme(raw_word[bounds[pos]..bounds[pos + len]].to_string()));
                pos += len;
            }
            None => {
                return Err(Error::TokenizationFailure {
                    word: raw_word.to_string(),
                    position: pos,
                })
            }
        }
    }
    Ok(out)
}

/// One grapheme per Unicode code point.
pub fn tokenize_chars(raw_word: &str) -> Vec<Grapheme> {
    raw_word
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| Grapheme(c.to_string()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StorageOrder {
    LogicalLtr,
    LogicalRtl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tokenization {
    EvaLongestMatch,
    Character,
}

/// Interned grapheme strings shared by a corpus and everything derived from it.
#[derive(Debug, Default, Clone)]
pub struct Alphabet {
    symbols: Vec<Grapheme>,
    index: FxHashMap<String, Sym>,
}

impl Alphabet {
    pub fn intern(&mut self, g: &Grapheme) -> Sym {
        if let Some(&id) = self.index.get(g.as_str()) {
            return id;
        }
        let id = self.symbols.len() as Sym;
        self.symbols.push(g.clone());
        self.index.insert(g.0.clone(), id);
        id
    }

    pub fn get(&self, symbol: &str) -> Option<Sym> {
        self.index.get(symbol).copied()
    }

    pub fn grapheme(&self, id: Sym) -> &Grapheme {
        &self.symbols[id as usize]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    pub graphemes: Vec<Sym>,
}

impl Word {
    pub fn first(&self) -> Sym {
        self.graphemes[0]
    }

    pub fn last(&self) -> Sym {
        self.graphemes[self.graphemes.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.graphemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphemes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub words: Vec<Word>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub sentences: Vec<Sentence>,
    pub storage_order: StorageOrder,
    pub tokenization: Tokenization,
    alphabet: Arc<Alphabet>,
}

impl PartialEq for Corpus {
    /// Two corpora are equal when they spell the same text.
    fn eq(&self, other: &Self) -> bool {
        self.storage_order == other.storage_order
            && self.sentences.len() == other.sentences.len()
            && self.sentences.iter().zip(&other.sentences).all(|(a, b)| {
                a.words.len() == b.words.len()
                    && a.words.iter().zip(&b.words).all(|(x, y)| {
                        x.len() == y.len()
                            && x.graphemes.iter().zip(&y.graphemes).all(|(&p, &q)| {
                                self.alphabet.grapheme(p) == other.alphabet.grapheme(q)
                            })
                    })
            })
    }
}

impl Corpus {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn shared_alphabet(&self) -> Arc<Alphabet> {
        Arc::clone(&self.alphabet)
    }

    pub fn word_count(&self) -> usize {
        self.sentences.iter().map(|s| s.words.len()).sum()
    }

    pub fn sentence_lengths(&self) -> Vec<usize> {
        self.sentences.iter().map(|s| s.words.len()).collect()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.sentences.iter().flat_map(|s| s.words.iter())
    }

    pub fn symbol(&self, id: Sym) -> &str {
        self.alphabet.grapheme(id).as_str()
    }

    pub fn word_string(&self, w: &Word) -> String {
        w.graphemes.iter().map(|&g| self.symbol(g)).collect()
    }

    /// The corpus in loader format: one sentence per line, words separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            let line: Vec<String> = s.words.iter().map(|w| self.word_string(w)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Same alphabet and metadata, different sentences.
    pub fn with_sentences(&self, sentences: Vec<Sentence>) -> Corpus {
        Corpus {
            name: self.name.clone(),
            sentences,
            storage_order: self.storage_order,
            tokenization: self.tokenization,
            alphabet: Arc::clone(&self.alphabet),
        }
    }

    fn map_sentences(&self, f: impl FnMut(&Sentence) -> Sentence) -> Corpus {
        self.with_sentences(self.sentences.iter().map(f).collect())
    }
}

/// Incremental corpus construction with interning.
#[derive(Debug)]
pub struct CorpusBuilder {
    name: String,
    tokenization: Tokenization,
    storage_order: StorageOrder,
    alphabet: Alphabet,
    sentences: Vec<Sentence>,
}

impl CorpusBuilder {
    pub fn new(name: impl Into<String>, tokenization: Tokenization) -> Self {
        CorpusBuilder {
            name: name.into(),
            tokenization,
            storage_order: StorageOrder::LogicalLtr,
            alphabet: Alphabet::default(),
            sentences: Vec::new(),
        }
    }

    pub fn storage_order(mut self, order: StorageOrder) -> Self {
        self.storage_order = order;
        self
    }

    pub fn intern(&mut self, g: &Grapheme) -> Sym {
        self.alphabet.intern(g)
    }

    /// Adds a sentence of already-tokenized words; empty words and empty
    /// sentences are skipped.
    pub fn push_sentence(&mut self, words: &[Vec<Grapheme>]) {
        let words: Vec<Word> = words
            .iter()
            .filter(|w| !w.is_empty())
            .map(|w| Word {
                graphemes: w.iter().map(|g| self.alphabet.intern(g)).collect(),
            })
            .collect();
        if !words.is_empty() {
            self.sentences.push(Sentence { words });
        }
    }

    pub fn push_sentence_syms(&mut self, words: Vec<Word>) {
        if !words.is_empty() {
            self.sentences.push(Sentence { words });
        }
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn build(self) -> Result<Corpus> {
        if self.sentences.is_empty() {
            return Err(Error::EmptyCorpus(self.name));
        }
        if self.alphabet.len() > MAX_ALPHABET {
            return Err(Error::InvalidParameter(format!(
                "alphabet of {} graphemes exceeds the supported {MAX_ALPHABET}",
                self.alphabet.len()
            )));
        }
        Ok(Corpus {
            name: self.name,
            sentences: self.sentences,
            storage_order: self.storage_order,
            tokenization: self.tokenization,
            alphabet: Arc::new(self.alphabet),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Eva,
    Chars,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eva" => Ok(Scheme::Eva),
            "chars" => Ok(Scheme::Chars),
            other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub scheme: Scheme,
    /// Used by the EVA scheme; the bundled inventory when `None`.
    pub inventory: Option<GraphemeInventory>,
    pub storage_order: StorageOrder,
    /// Character scheme only: keep digits and punctuation instead of dropping them.
    pub keep_non_letters: bool,
}

impl LoadOptions {
    pub fn new(scheme: Scheme) -> Self {
        LoadOptions {
            scheme,
            inventory: None,
            storage_order: StorageOrder::LogicalLtr,
            keep_non_letters: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    /// Words rejected by the tokenizer (or empty after character filtering).
    pub dropped_words: usize,
}

/// Loads a sentence-per-line UTF-8 text file.
pub fn load_corpus(path: &Path, opts: &LoadOptions) -> Result<LoadedCorpus> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    parse_corpus(&name, &text, opts)
}

/// Same as [`load_corpus`] for text already in memory.
pub fn parse_corpus(name: &str, text: &str, opts: &LoadOptions) -> Result<LoadedCorpus> {
    let tokenization = match opts.scheme {
        Scheme::Eva => Tokenization::EvaLongestMatch,
        Scheme::Chars => Tokenization::Character,
    };
    let default_inv;
    let inv = match (&opts.scheme, &opts.inventory) {
        (Scheme::Eva, Some(inv)) => Some(inv),
        (Scheme::Eva, None) => {
            default_inv = GraphemeInventory::eva_default();
            Some(&default_inv)
        }
        _ => None,
    };
    let mut builder = CorpusBuilder::new(name, tokenization).storage_order(opts.storage_order);
    let mut dropped = 0usize;
    for line in text.lines() {
        let mut words = Vec::new();
        for raw in line.split_whitespace() {
            let tokens = match inv {
                Some(inv) => match tokenize_eva(raw, inv) {
                    Ok(t) => t,
                    Err(_) => {
                        dropped += 1;
                        continue;
                    }
                },
                None => {
                    let cleaned = clean_chars(raw, opts.keep_non_letters);
                    tokenize_chars(&cleaned)
                }
            };
            if tokens.is_empty() {
                dropped += 1;
                continue;
            }
            words.push(tokens);
        }
        builder.push_sentence(&words);
    }
    if dropped > 0 {
        log::info!("{name}: dropped {dropped} untokenizable words");
    }
    Ok(LoadedCorpus {
        corpus: builder.build()?,
        dropped_words: dropped,
    })
}

/// NFC-normalizes and strips combining marks; drops non-letters unless asked.
fn clean_chars(raw: &str, keep_non_letters: bool) -> String {
    raw.nfc()
        .filter(|&c| !is_combining_mark(c))
        .filter(|&c| keep_non_letters || c.is_alphabetic())
        .collect()
}

/// Reverses word order within each sentence of a logically stored RTL corpus,
/// so the forward direction matches reading order.
pub fn visual_transform(c: &Corpus) -> Result<Corpus> {
    if c.storage_order == StorageOrder::LogicalLtr {
        return Err(Error::WrongStorageOrder);
    }
    let mut out = reverse_words(c);
    out.storage_order = StorageOrder::LogicalLtr;
    Ok(out)
}

/// Reverses word order within each sentence. Word-internal order is untouched.
pub fn reverse_words(c: &Corpus) -> Corpus {
    c.map_sentences(|s| Sentence {
        words: s.words.iter().rev().cloned().collect(),
    })
}

/// Uniform random permutation of the words of every sentence.
pub fn shuffle_words(c: &Corpus, seed: u64) -> Corpus {
    let mut rng = seed::rng(seed);
    c.map_sentences(|s| {
        let mut words = s.words.clone();
        words.shuffle(&mut rng);
        Sentence { words }
    })
}
