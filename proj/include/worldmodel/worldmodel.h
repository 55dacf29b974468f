#ifndef WORLDMODEL_H
#define WORLDMODEL_H

/*
 * C interface of the world-model toolkit.
 *
 * Models live behind the opaque wm_model handle; trajectories, event streams,
 * policies and reports cross the boundary as text in the documented line
 * formats. Every call returns a wm_status. On failure the calling thread's
 * last error holds a short code ("parse", "white-peak", ...) and a detail
 * string, readable until the next failing call on that thread.
 *
 * Strings handed out through char** parameters are owned by the caller and
 * must be released with wm_string_free.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(WM_BUILDING_LIBRARY)
#    define WM_API __declspec(dllexport)
#  else
#    define WM_API __declspec(dllimport)
#  endif
#else
#  define WM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wm_status {
    WM_OK = 0,
    WM_FAILED = 1,           /* operation refused or input rejected; see wm_last_error_code */
    WM_INVALID_ARGUMENT = 2, /* null pointer or out-of-range enum */
    WM_INTERNAL = 3
} wm_status;

typedef struct wm_model wm_model;

typedef enum wm_invert_mode {
    WM_INVERT_EXACT = 0,       /* journey flow system, or fixed-policy inverse for decision kinds */
    WM_INVERT_MONTE_CARLO = 1, /* sampled journeys */
    WM_INVERT_PLUS_VERTEX = 2, /* interval inverse over vertex resolutions */
    WM_INVERT_PLUS_SAMPLED = 3 /* interval inverse over sampled resolutions */
} wm_invert_mode;

typedef enum wm_collision {
    WM_COLLISION_PRIORITY = 0,
    WM_COLLISION_BOTH = 1
} wm_collision;

WM_API const char* wm_version(void);
WM_API const char* wm_last_error_code(void);
WM_API const char* wm_last_error_detail(void);
WM_API void wm_string_free(char* text);

/* Models */
WM_API wm_status wm_model_parse(const char* text, wm_model** out);
WM_API void wm_model_free(wm_model* model);
WM_API wm_status wm_model_serialize(const wm_model* model, char** out);
WM_API wm_status wm_model_export_dot(const wm_model* model, char** out);
WM_API wm_status wm_model_state_count(const wm_model* model, size_t* out);

/* `ok` is set to 1 when there are no violations. The report lists
 * `violation: ...` and `warning: ...` lines. */
WM_API wm_status wm_model_validate(const wm_model* model, int* ok, char** report);

/* `white-peak: ...`, `black-hole: ...`, `redundant: ...`, `memory-bits: N`. */
WM_API wm_status wm_model_analyze(const wm_model* model, char** report);

/* `policy_text` may be NULL. `samples` is the journey count for Monte-Carlo
 * inversion and the resolution budget for the interval modes. */
WM_API wm_status wm_model_invert(const wm_model* model, wm_invert_mode mode, const char* policy_text,
                                 uint64_t samples, uint64_t seed, wm_model** out);

/* `event` is a label name or a comma-separated list of from>to arrows.
 * `fact` (may be NULL) receives the ids of the double-primed states. */
WM_API wm_status wm_model_double(const wm_model* model, int parity, const char* event, wm_model** out,
                                 char** fact);

/* One monitored event per name, with its arrows in arrow-list form. */
WM_API wm_status wm_model_quotient(const wm_model* model, const char* partition_text, const char* const* names,
                                   const char* const* arrows, size_t count, wm_model** out);

/* `partition` (may be NULL) receives the classes over the input states. */
WM_API wm_status wm_model_minimize(const wm_model* model, size_t depth, wm_model** out, char** partition);
WM_API wm_status wm_model_minimal(const wm_model* model, size_t depth, wm_model** out);

/* Developments of length `depth` in the FutureSet text format. */
WM_API wm_status wm_model_future(const wm_model* model, size_t depth, const char* policy_text, char** out);
WM_API wm_status wm_model_past(const wm_model* model, size_t depth, char** out);

/* At most one of policy_text and preference_text may be non-NULL. */
WM_API wm_status wm_simulate(const wm_model* model, size_t steps, uint64_t seed, const char* policy_text,
                             const char* preference_text, wm_collision collision, char** trajectory);

WM_API wm_status wm_estimate_fomm(const char* trajectory, wm_model** out);

/* `verdict` is 0 for markov, 1 for non-markov, 2 for inconclusive. */
WM_API wm_status wm_markov_check(const char* trajectory, size_t order, double significance, int* verdict,
                                 char** report);

WM_API wm_status wm_policy_from_preference(const wm_model* model, const char* preference_text, char** policy);

/* `load_base` is the directory table files are read relative to (NULL: cwd). */
WM_API wm_status wm_detect_direct(const char* trajectory, const char* charfn_text, const char* load_base,
                                  double threshold, char** stream);

/* `segments` (may be NULL) receives `segment <begin> <end>` lines. */
WM_API wm_status wm_detect_indirect(const char* trajectory, size_t window, double threshold, char** stream,
                                    char** segments);

/* Report lines: `belief <t> <state>:<p> ...`, `warning ...`, `memory <state>
 * <obs>`, and `state <id>` for the most likely final state. When
 * `derive_name` is non-NULL, `derived` receives the derived event stream. */
WM_API wm_status wm_track(const wm_model* model, const char* trajectory, const char* stream,
                          wm_collision collision, const char* derive_name, char** report, char** derived);

/* `valid <first> <last>` lines, then `permanent-so-far yes|no`. */
WM_API wm_status wm_phenomenon_validity(const wm_model* model, const char* trajectory, const char* stream,
                                        size_t min_events, char** report);

#ifdef __cplusplus
}
#endif

#endif
