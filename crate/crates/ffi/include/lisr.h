#ifndef LISR_H
#define LISR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum LisrStatus {
  LISR_STATUS_OK = 0,
  LISR_STATUS_NULL_POINTER = 1,
  LISR_STATUS_INVALID_ARGUMENT = 2,
  LISR_STATUS_PARSE_ERROR = 3,
  LISR_STATUS_CONFIG_ERROR = 4,
  LISR_STATUS_IO_ERROR = 5,
  LISR_STATUS_RUN_ERROR = 6,
  LISR_STATUS_PANIC = 7,
} LisrStatus;

// An experiment that can be advanced one generation at a time.
typedef struct LisrExperiment LisrExperiment;

// A symbolic reward tree.
typedef struct LisrTree LisrTree;

// Summary of one generation.
typedef struct LisrGeneration {
  uint64_t generation;
  uint64_t frames;
  uint64_t champion_id;
  // 1 when the champion is an SR learner, 0 for an EA actor.
  uint8_t champion_is_sr;
  double champion_fitness;
  // NaN when the population has no EA actors.
  double mean_ea_fitness;
  double max_ea_fitness;
  // NaN when the population has no SR learners.
  double mean_sr_fitness;
  double max_sr_fitness;
} LisrGeneration;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. The pointer
// stays valid until the next failing call on the same thread.
const char *lisr_last_error(void);

// Library version as a static NUL-terminated string.
const char *lisr_version(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
//
// `s` must come from this library and not have been freed already.
void lisr_string_free(char *s);

// Parses a tree in prefix form, e.g. `(add (cos f3) c1)`.
//
// # Safety
//
// `text` must be NULL or a NUL-terminated string; `out` must be NULL or
// writable.
enum LisrStatus lisr_tree_parse(const char *text, uintptr_t feature_dim, struct LisrTree **out);

// Grows a random tree with the default operator and feature probabilities.
//
// # Safety
//
// `out` must be NULL or writable.
enum LisrStatus lisr_tree_random(uintptr_t feature_dim,
                                 uintptr_t max_depth,
                                 uint64_t seed,
                                 struct LisrTree **out);

// Subtree mutation of `tree` into a new tree.
//
// # Safety
//
// `tree` must be NULL or a live tree; `out` must be NULL or writable.
enum LisrStatus lisr_tree_mutate(const struct LisrTree *tree,
                                 uintptr_t max_depth,
                                 uint64_t seed,
                                 struct LisrTree **out);

// Subtree crossover: a random subtree of `donor` replaces one of
// `recipient`'s.
//
// # Safety
//
// `recipient` and `donor` must be NULL or live trees; `out` must be NULL or
// writable.
enum LisrStatus lisr_tree_crossover(const struct LisrTree *recipient,
                                    const struct LisrTree *donor,
                                    uintptr_t max_depth,
                                    uint64_t seed,
                                    struct LisrTree **out);

// Releases a tree. NULL is ignored.
//
// # Safety
//
// `tree` must come from this library and not have been freed already.
void lisr_tree_free(struct LisrTree *tree);

// Evaluates the tree on `len` features.
//
// # Safety
//
// `tree` must be NULL or live; `features` must point to `len` doubles;
// `out` must be NULL or writable.
enum LisrStatus lisr_tree_evaluate(const struct LisrTree *tree,
                                   const double *features,
                                   uintptr_t len,
                                   double *out);

// Operator layers on the deepest path, node count, operator count and
// feature dimension; any out-pointer may be NULL.
//
// # Safety
//
// `tree` must be NULL or live; non-NULL out-pointers must be writable.
enum LisrStatus lisr_tree_stats(const struct LisrTree *tree,
                                uintptr_t *depth,
                                uintptr_t *nodes,
                                uintptr_t *operators,
                                uintptr_t *feature_dim);

// Prefix form of the tree. Free the result with [`lisr_string_free`].
//
// # Safety
//
// `tree` must be NULL or live; `out` must be NULL or writable.
enum LisrStatus lisr_tree_serialize(const struct LisrTree *tree, char **out);

// Unrolled pseudocode with features named `s_0, s_1, ...`. Free the result
// with [`lisr_string_free`].
//
// # Safety
//
// `tree` must be NULL or live; `out` must be NULL or writable.
enum LisrStatus lisr_tree_unroll(const struct LisrTree *tree, char **out);

// Creates an experiment from a TOML config (NULL for all defaults). The
// output directory and budgets in the config are not used; advance it with
// [`lisr_experiment_step`].
//
// # Safety
//
// `config_toml` must be NULL or a NUL-terminated string; `out` must be NULL
// or writable.
enum LisrStatus lisr_experiment_new(const char *config_toml, struct LisrExperiment **out);

// Runs one generation. `out` may be NULL.
//
// # Safety
//
// `exp` must be NULL or live; `out` must be NULL or writable.
enum LisrStatus lisr_experiment_step(struct LisrExperiment *exp, struct LisrGeneration *out);

// Copy of the reward tree of the latest champion. Fails with
// `InvalidArgument` when no generation has run or the champion is an EA
// actor.
//
// # Safety
//
// `exp` must be NULL or live; `out` must be NULL or writable.
enum LisrStatus lisr_experiment_champion_tree(const struct LisrExperiment *exp,
                                              struct LisrTree **out);

// Writes a resumable checkpoint of the experiment into `dir`.
//
// # Safety
//
// `exp` must be NULL or live; `dir` must be NULL or a NUL-terminated string.
enum LisrStatus lisr_experiment_save(const struct LisrExperiment *exp, const char *dir);

// Releases an experiment. NULL is ignored.
//
// # Safety
//
// `exp` must come from this library and not have been freed already.
void lisr_experiment_free(struct LisrExperiment *exp);

// Runs a complete experiment from a TOML config and writes its artifacts
// to the configured output directory, like the `lisr` command.
// `generations_run` may be NULL.
//
// # Safety
//
// `config_toml` must be NULL or a NUL-terminated string; `generations_run`
// must be NULL or writable.
enum LisrStatus lisr_run(const char *config_toml, uint64_t *generations_run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LISR_H */
