#ifndef SCRIPTFORGE_H
#define SCRIPTFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/*
 Result of every fallible call.
 */
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  SF_STATUS_NULL_ARGUMENT = 1,
  /*
   A string argument was not valid UTF-8.
   */
  SF_STATUS_INVALID_UTF8 = 2,
  /*
   A parameter was out of range or a configuration was rejected.
   */
  SF_STATUS_INVALID_ARGUMENT = 3,
  /*
   The input data could not be read or analysed.
   */
  SF_STATUS_DATA_ERROR = 4,
  /*
   The library panicked; the handle arguments should not be reused.
   */
  SF_STATUS_INTERNAL = 5,
} SfStatus;

typedef enum SfScheme {
  /*
   Greedy longest-match tokenization over the bundled EVA inventory.
   */
  SF_SCHEME_EVA = 0,
  /*
   One grapheme per letter.
   */
  SF_SCHEME_CHARS = 1,
} SfScheme;

typedef enum SfShape {
  SF_SHAPE_ZIPFIAN = 0,
  SF_SHAPE_INTERMEDIATE = 1,
  SF_SHAPE_PLATEAU = 2,
} SfShape;

typedef enum SfGenerator {
  SF_GENERATOR_SLOT = 0,
  SF_GENERATOR_GRILLE = 1,
  SF_GENERATOR_NAIBBE = 2,
} SfGenerator;

/*
 Opaque corpus handle.
 */
typedef struct SfCorpus SfCorpus;

/*
 Character-level directional asymmetry at one order.
 */
typedef struct SfDelta {
  uintptr_t n;
  double x_ltr;
  double x_rtl;
  double delta;
} SfDelta;

/*
 Cross-boundary entropies and asymmetry at one gram size.
 */
typedef struct SfCrossBoundary {
  uintptr_t n;
  uint64_t transitions;
  double h_fwd;
  double h_bwd;
  double mi_fwd;
  double mi_bwd;
  double delta_cb;
} SfCrossBoundary;

/*
 Four-signature report under the default thresholds.
 */
typedef struct SfSignatures {
  double e_to_s;
  bool bilateral;
  double mi;
  double r_squared;
  double cv;
  enum SfShape shape;
  bool passes[4];
  uint32_t joint;
} SfSignatures;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *sf_version(void);

/*
 Message for the last failed call on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *sf_last_error(void);

/*
 Loads a sentence-per-line corpus file.

 # Safety
 `path` is a NUL-terminated string; `out` points to writable storage.
 */
enum SfStatus sf_corpus_load(const char *path, enum SfScheme s, struct SfCorpus **out);

/*
 Parses corpus text held in memory.

 # Safety
 `text_ptr` is a NUL-terminated string; `out` points to writable storage.
 */
enum SfStatus sf_corpus_parse(const char *text_ptr, enum SfScheme s, struct SfCorpus **out);

/*
 Releases a corpus handle. Null is ignored.

 # Safety
 `c` is null or a handle not yet freed.
 */
void sf_corpus_free(struct SfCorpus *c);

/*
 Number of words in the corpus; 0 for a null handle.

 # Safety
 `c` is null or a live handle.
 */
uintptr_t sf_corpus_word_count(const struct SfCorpus *c);

/*
 Number of sentences in the corpus; 0 for a null handle.

 # Safety
 `c` is null or a live handle.
 */
uintptr_t sf_corpus_sentence_count(const struct SfCorpus *c);

/*
 Corpus in loader format (one sentence per line). Free with `sf_string_free`.
 Returns null on a null handle.

 # Safety
 `c` is null or a live handle.
 */
char *sf_corpus_to_text(const struct SfCorpus *c);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` is null or a string from `sf_corpus_to_text` not yet freed.
 */
void sf_string_free(char *s);

/*
 Character-level asymmetry `X_ltr − X_rtl` at order `n` (point estimate).

 # Safety
 `c` is a live handle; `out` points to writable storage.
 */
enum SfStatus sf_delta_char(const struct SfCorpus *c,
                            uintptr_t n,
                            double smoothing,
                            struct SfDelta *out);

/*
 Cross-boundary conditional entropies and asymmetry at gram size `n`.

 # Safety
 `c` is a live handle; `out` points to writable storage.
 */
enum SfStatus sf_cross_boundary(const struct SfCorpus *c, uintptr_t n, struct SfCrossBoundary *out);

/*
 Percentage of word boundaries joining an end-class to a start-class grapheme.

 # Safety
 `c` is a live handle; `out` points to writable storage.
 */
enum SfStatus sf_end_to_start(const struct SfCorpus *c, double *out);

/*
 Four-signature report under the default thresholds.

 # Safety
 `c` is a live handle; `out` points to writable storage.
 */
enum SfStatus sf_evaluate(const struct SfCorpus *c, struct SfSignatures *out);

/*
 Generates `n_words` words. `config` is optional `key = value` text
 (null for defaults); `plaintext` is required for the Naibbe cipher and
 ignored otherwise.

 # Safety
 String arguments are null or NUL-terminated; `out` points to writable storage.
 */
enum SfStatus sf_generate(enum SfGenerator kind,
                          const char *config,
                          const char *plaintext,
                          uintptr_t n_words,
                          uint64_t seed,
                          struct SfCorpus **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCRIPTFORGE_H */
