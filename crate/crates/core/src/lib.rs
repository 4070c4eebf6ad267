//! Directional and boundary statistics for segmented texts, plus the
//! structured generators those statistics are used to test.

pub mod boundary;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod generators;
pub mod markov;
pub mod ngram;
pub mod positional;
pub mod seed;
pub mod stats;

pub use corpus::{load_corpus, parse_corpus, Corpus, LoadOptions, Scheme};
pub use error::{Error, Result};
pub use stats::Bootstrap;
