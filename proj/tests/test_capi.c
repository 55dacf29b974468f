/* Exercises the shared library through its C header only. */

#include "worldmodel/worldmodel.h"

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                          \
    do {                                                                      \
        if (!(cond)) {                                                        \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                       \
        }                                                                     \
    } while (0)

static const char* coin =
    "model fomm\n"
    "obs B W\n"
    "state B initial trace B=1\n"
    "state W trace W=1\n"
    "arrow B true B ap=0.5\n"
    "arrow B true W ap=0.5\n"
    "arrow W true B ap=0.5\n"
    "arrow W true W ap=0.5\n";

static const char* fig3 =
    "model fomm\n"
    "obs 1 2 3 4\n"
    "state 1 trace 1=1\n"
    "state 2 initial trace 2=1\n"
    "state 3 trace 3=1\n"
    "state 4 trace 4=1\n"
    "arrow 1 true 2 ap=0.8\n"
    "arrow 2 true 2 ap=0.5\n"
    "arrow 2 true 3 ap=0.5\n"
    "arrow 3 true 4 ap=1\n"
    "arrow 4 true 3 ap=1\n";

static const char* peaky =
    "model fomm\n"
    "obs 0 1\n"
    "state 0 initial trace 0=1\n"
    "state 1 trace 1=1\n"
    "arrow 0 true 0 ap=1\n"
    "arrow 1 true 0 ap=1\n";

static const char* daynight =
    "model ed\n"
    "obs light dark\n"
    "event sunset sunrise\n"
    "state day initial trace light=1\n"
    "state night trace dark=1\n"
    "arrow day sunset night lp=[0,1] ap=1\n"
    "arrow night sunrise day lp=[0,1] ap=1\n";

static void test_round_trip(void)
{
    wm_model* m = NULL;
    char* text = NULL;
    char* again = NULL;
    wm_model* m2 = NULL;
    size_t n = 0;
    EXPECT(wm_model_parse(coin, &m) == WM_OK);
    EXPECT(wm_model_state_count(m, &n) == WM_OK && n == 2);
    EXPECT(wm_model_serialize(m, &text) == WM_OK);
    EXPECT(wm_model_parse(text, &m2) == WM_OK);
    EXPECT(wm_model_serialize(m2, &again) == WM_OK);
    EXPECT(strcmp(text, again) == 0);
    wm_string_free(text);
    wm_string_free(again);
    wm_model_free(m);
    wm_model_free(m2);
}

static void test_errors(void)
{
    wm_model* m = NULL;
    wm_model* inv = NULL;
    EXPECT(wm_model_parse("model fomm\nobs B\nstate B initial trace B=1\narrow B true Z ap=1\n", &m) == WM_FAILED);
    EXPECT(strcmp(wm_last_error_code(), "parse") == 0);
    EXPECT(strstr(wm_last_error_detail(), "undeclared state 'Z'") != NULL);
    EXPECT(wm_model_parse(NULL, &m) == WM_INVALID_ARGUMENT);

    EXPECT(wm_model_parse(peaky, &m) == WM_OK);
    EXPECT(wm_model_invert(m, WM_INVERT_EXACT, NULL, 0, 0, &inv) == WM_FAILED);
    EXPECT(strcmp(wm_last_error_code(), "white-peak") == 0);
    EXPECT(strcmp(wm_last_error_detail(), "1") == 0);
    EXPECT(wm_model_invert(m, (wm_invert_mode)42, NULL, 0, 0, &inv) == WM_INVALID_ARGUMENT);
    wm_model_free(m);
}

static void test_analyze(void)
{
    wm_model* m = NULL;
    char* report = NULL;
    int ok = 0;
    EXPECT(wm_model_parse(fig3, &m) == WM_OK);
    EXPECT(wm_model_analyze(m, &report) == WM_OK);
    EXPECT(strstr(report, "white-peak: 1\n") != NULL);
    EXPECT(strstr(report, "black-hole: 3 4\n") != NULL);
    EXPECT(strstr(report, "memory-bits: 0\n") != NULL);
    wm_string_free(report);
    EXPECT(wm_model_validate(m, &ok, &report) == WM_OK);
    EXPECT(ok == 1);
    wm_string_free(report);
    wm_model_free(m);
}

static void test_pipeline(void)
{
    wm_model* m = NULL;
    wm_model* est = NULL;
    char* traj = NULL;
    char* report = NULL;
    char* future = NULL;
    int verdict = -1;
    EXPECT(wm_model_parse(coin, &m) == WM_OK);
    EXPECT(wm_simulate(m, 2000, 7, NULL, NULL, WM_COLLISION_PRIORITY, &traj) == WM_OK);
    EXPECT(wm_estimate_fomm(traj, &est) == WM_OK);
    EXPECT(wm_markov_check(traj, 1, 0.01, &verdict, &report) == WM_OK);
    EXPECT(verdict == 0);
    EXPECT(wm_model_future(est, 2, NULL, &future) == WM_OK);
    EXPECT(strncmp(future, "direction future\ndepth 2\n", 25) == 0);
    wm_string_free(traj);
    wm_string_free(report);
    wm_string_free(future);
    wm_model_free(est);
    wm_model_free(m);
}

static void test_track(void)
{
    wm_model* m = NULL;
    char* report = NULL;
    char* derived = NULL;
    const char* traj = "light -\nlight -\ndark -\ndark -\nlight -\n";
    const char* events = "1 sunset [1,1] direct\n3 sunrise [1,1] direct\n";
    EXPECT(wm_model_parse(daynight, &m) == WM_OK);
    EXPECT(wm_track(m, traj, events, WM_COLLISION_PRIORITY, "daynight", &report, &derived) == WM_OK);
    EXPECT(strstr(report, "belief 2 night:1\n") != NULL);
    EXPECT(strstr(report, "state day\n") != NULL);
    EXPECT(strcmp(derived, "1 daynight.night [1,1] derived\n3 daynight.day [1,1] derived\n") == 0);
    wm_string_free(report);
    wm_string_free(derived);
    EXPECT(wm_track(m, "light -\ndark -\n", "", WM_COLLISION_PRIORITY, NULL, &report, NULL) == WM_FAILED);
    EXPECT(strcmp(wm_last_error_code(), "inconsistent") == 0);
    wm_model_free(m);
}

int main(void)
{
    test_round_trip();
    test_errors();
    test_analyze();
    test_pipeline();
    test_track();
    if (failures)
        fprintf(stderr, "%d failed\n", failures);
    else
        printf("capi: all passed (library %s)\n", wm_version());
    return failures ? 1 : 0;
}
