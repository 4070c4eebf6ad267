//! C interface to the scriptforge metrics and generators.
//!
//! Corpora cross the boundary as opaque `SfCorpus` handles that the caller
//! releases with `sf_corpus_free`. Every fallible call returns an `SfStatus`;
//! on failure `sf_last_error` describes the most recent error on the calling
//! thread. Strings returned by the library are freed with `sf_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use scriptforge::boundary;
use scriptforge::evaluate::{self, GeneratorSpec, SignatureThresholds};
use scriptforge::generators::{GrilleConfig, KvConfig, NaibbeConfig, SlotConfig};
use scriptforge::ngram;
use scriptforge::positional::{self, Shape};
use scriptforge::{Corpus, LoadOptions, Scheme};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A parameter was out of range or a configuration was rejected.
    InvalidArgument = 3,
    /// The input data could not be read or analysed.
    DataError = 4,
    /// The library panicked; the handle arguments should not be reused.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfScheme {
    /// Greedy longest-match tokenization over the bundled EVA inventory.
    Eva = 0,
    /// One grapheme per letter.
    Chars = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfGenerator {
    Slot = 0,
    Grille = 1,
    Naibbe = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfShape {
    Zipfian = 0,
    Intermediate = 1,
    Plateau = 2,
}

/// Character-level directional asymmetry at one order.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SfDelta {
    pub n: usize,
    pub x_ltr: f64,
    pub x_rtl: f64,
    pub delta: f64,
}

/// Cross-boundary entropies and asymmetry at one gram size.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SfCrossBoundary {
    pub n: usize,
    pub transitions: u64,
    pub h_fwd: f64,
    pub h_bwd: f64,
    pub mi_fwd: f64,
    pub mi_bwd: f64,
    pub delta_cb: f64,
}

/// Four-signature report under the default thresholds.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SfSignatures {
    pub e_to_s: f64,
    pub bilateral: bool,
    pub mi: f64,
    pub r_squared: f64,
    pub cv: f64,
    pub shape: SfShape,
    pub passes: [bool; 4],
    pub joint: u32,
}

/// Opaque corpus handle.
pub struct SfCorpus {
    inner: Corpus,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(SfStatus, String);

impl From<scriptforge::Error> for Fail {
    fn from(e: scriptforge::Error) -> Self {
        // Configuration text comes from the caller here, not from a data file.
        let status = if matches!(e, scriptforge::Error::Config { .. }) || !e.is_data_error() {
            SfStatus::InvalidArgument
        } else {
            SfStatus::DataError
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error: the library panicked".into());
            SfStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SfStatus::NullArgument, format!("{what} must not be null"))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

/// # Safety
/// `c` is null or a live handle from this library.
unsafe fn corpus<'a>(c: *const SfCorpus) -> Result<&'a Corpus, Fail> {
    c.as_ref().map(|h| &h.inner).ok_or_else(|| null("corpus"))
}

fn scheme(s: SfScheme) -> Scheme {
    match s {
        SfScheme::Eva => Scheme::Eva,
        SfScheme::Chars => Scheme::Chars,
    }
}

fn store(out: *mut *mut SfCorpus, c: Corpus) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { *out = Box::into_raw(Box::new(SfCorpus { inner: c })) };
    Ok(())
}

fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { out.write(v) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a sentence-per-line corpus file.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_load(path: *const c_char, s: SfScheme, out: *mut *mut SfCorpus) -> SfStatus {
    guard(|| {
        let path = text(path, "path")?;
        let loaded = scriptforge::load_corpus(Path::new(path), &LoadOptions::new(scheme(s)))?;
        store(out, loaded.corpus)
    })
}

/// Parses corpus text held in memory.
///
/// # Safety
/// `text_ptr` is a NUL-terminated string; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_parse(text_ptr: *const c_char, s: SfScheme, out: *mut *mut SfCorpus) -> SfStatus {
    guard(|| {
        let body = text(text_ptr, "text")?;
        let loaded = scriptforge::parse_corpus("corpus", body, &LoadOptions::new(scheme(s)))?;
        store(out, loaded.corpus)
    })
}

/// Releases a corpus handle. Null is ignored.
///
/// # Safety
/// `c` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_free(c: *mut SfCorpus) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of words in the corpus; 0 for a null handle.
///
/// # Safety
/// `c` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_word_count(c: *const SfCorpus) -> usize {
    c.as_ref().map_or(0, |h| h.inner.word_count())
}

/// Number of sentences in the corpus; 0 for a null handle.
///
/// # Safety
/// `c` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_sentence_count(c: *const SfCorpus) -> usize {
    c.as_ref().map_or(0, |h| h.inner.sentences.len())
}

/// Corpus in loader format (one sentence per line). Free with `sf_string_free`.
/// Returns null on a null handle.
///
/// # Safety
/// `c` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_corpus_to_text(c: *const SfCorpus) -> *mut c_char {
    match c.as_ref() {
        Some(h) => CString::new(h.inner.to_text()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from `sf_corpus_to_text` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Character-level asymmetry `X_ltr − X_rtl` at order `n` (point estimate).
///
/// # Safety
/// `c` is a live handle; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sf_delta_char(c: *const SfCorpus, n: usize, smoothing: f64, out: *mut SfDelta) -> SfStatus {
    guard(|| {
        let p = ngram::delta_point(corpus(c)?, n, smoothing)?;
        write(
            out,
            SfDelta {
                n: p.n,
                x_ltr: p.x_ltr,
                x_rtl: p.x_rtl,
                delta: p.delta,
            },
        )
    })
}

/// Cross-boundary conditional entropies and asymmetry at gram size `n`.
///
/// # Safety
/// `c` is a live handle; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sf_cross_boundary(c: *const SfCorpus, n: usize, out: *mut SfCrossBoundary) -> SfStatus {
    guard(|| {
        let r = boundary::delta_cb(corpus(c)?, n)?;
        write(
            out,
            SfCrossBoundary {
                n: r.n,
                transitions: r.transitions,
                h_fwd: r.h_fwd,
                h_bwd: r.h_bwd,
                mi_fwd: r.mi_fwd,
                mi_bwd: r.mi_bwd,
                delta_cb: r.delta_cb,
            },
        )
    })
}

/// Percentage of word boundaries joining an end-class to a start-class grapheme.
///
/// # Safety
/// `c` is a live handle; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sf_end_to_start(c: *const SfCorpus, out: *mut f64) -> SfStatus {
    guard(|| {
        let c = corpus(c)?;
        let pc = positional::classify(c, positional::DEFAULT_THRESHOLD);
        write(out, positional::end_to_start_rate(c, &pc)?)
    })
}

/// Four-signature report under the default thresholds.
///
/// # Safety
/// `c` is a live handle; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sf_evaluate(c: *const SfCorpus, out: *mut SfSignatures) -> SfStatus {
    guard(|| {
        let r = evaluate::evaluate_corpus(corpus(c)?, &SignatureThresholds::default())?;
        write(
            out,
            SfSignatures {
                e_to_s: r.e_to_s,
                bilateral: r.bilateral,
                mi: r.mi,
                r_squared: r.r_squared,
                cv: r.cv,
                shape: match r.shape {
                    Shape::Zipfian => SfShape::Zipfian,
                    Shape::Intermediate => SfShape::Intermediate,
                    Shape::Plateau => SfShape::Plateau,
                },
                passes: r.passes,
                joint: r.joint as u32,
            },
        )
    })
}

/// Generates `n_words` words. `config` is optional `key = value` text
/// (null for defaults); `plaintext` is required for the Naibbe cipher and
/// ignored otherwise.
///
/// # Safety
/// String arguments are null or NUL-terminated; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sf_generate(
    kind: SfGenerator,
    config: *const c_char,
    plaintext: *const c_char,
    n_words: usize,
    seed: u64,
    out: *mut *mut SfCorpus,
) -> SfStatus {
    guard(|| {
        let kv = match optional_text(config, "config")? {
            Some(t) => KvConfig::parse(t)?,
            None => KvConfig::default(),
        };
        let spec = match kind {
            SfGenerator::Slot => GeneratorSpec::Slot(SlotConfig::from_kv(kv)?),
            SfGenerator::Grille => GeneratorSpec::Grille(GrilleConfig::from_kv(kv)?),
            SfGenerator::Naibbe => GeneratorSpec::Naibbe {
                cfg: NaibbeConfig::from_kv(kv)?,
                plaintext: std::sync::Arc::new(text(plaintext, "plaintext")?.to_string()),
            },
        };
        store(out, spec.generate(n_words, seed)?)
    })
}
