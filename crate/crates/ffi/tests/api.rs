use std::ffi::{CStr, CString};
use std::ptr;

use scriptforge_ffi::*;

const TEXT: &str = "qokeedy daiin chol\nshedy qokain okal dar\nchedy qotaiin\n";

fn parse(text: &str, scheme: SfScheme) -> *mut SfCorpus {
    let t = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { sf_corpus_parse(t.as_ptr(), scheme, &mut out) };
    assert_eq!(st, SfStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = sf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn parse_counts_and_round_trip() {
    let c = parse(TEXT, SfScheme::Eva);
    unsafe {
        assert_eq!(sf_corpus_word_count(c), 9);
        assert_eq!(sf_corpus_sentence_count(c), 3);
        let s = sf_corpus_to_text(c);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), TEXT);
        sf_string_free(s);
        sf_corpus_free(c);
    }
}

#[test]
fn null_handles_are_tolerated_where_documented() {
    unsafe {
        assert_eq!(sf_corpus_word_count(ptr::null()), 0);
        assert!(sf_corpus_to_text(ptr::null()).is_null());
        sf_corpus_free(ptr::null_mut());
        sf_string_free(ptr::null_mut());
    }
}

#[test]
fn null_arguments_report_status_and_message() {
    let mut d = SfDelta::default();
    let st = unsafe { sf_delta_char(ptr::null(), 2, 1.0, &mut d) };
    assert_eq!(st, SfStatus::NullArgument);
    assert!(last_error().contains("corpus"));

    let mut out = ptr::null_mut();
    let st = unsafe { sf_corpus_parse(ptr::null(), SfScheme::Chars, &mut out) };
    assert_eq!(st, SfStatus::NullArgument);
    assert!(out.is_null());
}

#[test]
fn invalid_utf8_is_rejected() {
    let bad = [0xffu8, 0xfe, 0];
    let mut out = ptr::null_mut();
    let st = unsafe { sf_corpus_parse(bad.as_ptr().cast(), SfScheme::Chars, &mut out) };
    assert_eq!(st, SfStatus::InvalidUtf8);
}

#[test]
fn empty_corpus_is_a_data_error() {
    let t = CString::new("\n\n").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { sf_corpus_parse(t.as_ptr(), SfScheme::Chars, &mut out) };
    assert_eq!(st, SfStatus::DataError);
    assert!(!last_error().is_empty());
}

#[test]
fn bad_order_is_invalid_argument() {
    let c = parse(TEXT, SfScheme::Chars);
    let mut d = SfDelta::default();
    let st = unsafe { sf_delta_char(c, 0, 1.0, &mut d) };
    assert_eq!(st, SfStatus::InvalidArgument);
    unsafe { sf_corpus_free(c) };
}

#[test]
fn metrics_agree_with_the_library() {
    let c = parse(TEXT, SfScheme::Eva);
    let opts = scriptforge::LoadOptions::new(scriptforge::Scheme::Eva);
    let rust = scriptforge::parse_corpus("corpus", TEXT, &opts).unwrap().corpus;

    let mut d = SfDelta::default();
    assert_eq!(unsafe { sf_delta_char(c, 2, 1.0, &mut d) }, SfStatus::Ok);
    let want = scriptforge::ngram::delta_point(&rust, 2, 1.0).unwrap();
    assert_eq!((d.n, d.x_ltr, d.x_rtl, d.delta), (want.n, want.x_ltr, want.x_rtl, want.delta));

    let mut cb = SfCrossBoundary::default();
    assert_eq!(unsafe { sf_cross_boundary(c, 1, &mut cb) }, SfStatus::Ok);
    let want = scriptforge::boundary::delta_cb(&rust, 1).unwrap();
    assert_eq!(cb.transitions, want.transitions);
    assert_eq!(cb.delta_cb, want.delta_cb);
    assert!((cb.h_fwd - cb.h_bwd - cb.delta_cb).abs() < 1e-12);

    let mut es = -1.0;
    assert_eq!(unsafe { sf_end_to_start(c, &mut es) }, SfStatus::Ok);
    assert!((0.0..=100.0).contains(&es));

    let mut s = std::mem::MaybeUninit::<SfSignatures>::uninit();
    assert_eq!(unsafe { sf_evaluate(c, s.as_mut_ptr()) }, SfStatus::Ok);
    let s = unsafe { s.assume_init() };
    assert_eq!(s.e_to_s, es);
    assert_eq!(s.joint as usize, s.passes.iter().filter(|&&p| p).count());
    unsafe { sf_corpus_free(c) };
}

#[test]
fn generation_is_seeded() {
    let gen = |seed| {
        let mut out = ptr::null_mut();
        let st = unsafe { sf_generate(SfGenerator::Slot, ptr::null(), ptr::null(), 500, seed, &mut out) };
        assert_eq!(st, SfStatus::Ok);
        unsafe {
            assert_eq!(sf_corpus_word_count(out), 500);
            let s = sf_corpus_to_text(out);
            let text = CStr::from_ptr(s).to_str().unwrap().to_string();
            sf_string_free(s);
            sf_corpus_free(out);
            text
        }
    };
    assert_eq!(gen(5), gen(5));
    assert_ne!(gen(5), gen(6));
}

#[test]
fn generator_config_errors_surface() {
    let cfg = CString::new("no_such_key = 1").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { sf_generate(SfGenerator::Grille, cfg.as_ptr(), ptr::null(), 100, 1, &mut out) };
    assert_eq!(st, SfStatus::InvalidArgument);
    assert!(out.is_null());

    let st = unsafe { sf_generate(SfGenerator::Naibbe, ptr::null(), ptr::null(), 100, 1, &mut out) };
    assert_eq!(st, SfStatus::NullArgument);
    assert!(last_error().contains("plaintext"));
}
