#pragma once

#include "worldmodel/model.hpp"
#include "worldmodel/oracle.hpp"
#include "worldmodel/trajectory.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wm {

enum class CharFnKind { action_match, obs_match, pattern, table };

/// Interval-valued detector of one event. Windows are counted in steps: the
/// past window covers the observations strictly before t, the future window
/// those from t on. A window running off the trajectory yields [0,1].
struct CharFn
{
    std::string name; ///< event label emitted on detection
    CharFnKind kind = CharFnKind::action_match;
    std::string symbol; ///< action or observation for the match kinds
    std::string past_pattern;
    std::string future_pattern;
    std::size_t past_window = 0;
    std::size_t future_window = 0;
    /// (past word, future word) -> probability; words are comma-joined symbols.
    std::map<std::pair<std::string, std::string>, ProbInterval> table;

    [[nodiscard]] ProbInterval evaluate(const Trajectory& trajectory, std::size_t t) const;
    [[nodiscard]] std::size_t window() const { return past_window + future_window; }
};

/// Reads `charfn` lines:
///
///   charfn <name> action=<a>
///   charfn <name> obs=<o>
///   charfn <name> pattern past=<regex> future=<regex> [past-window=k] [future-window=k]
///   charfn <name> table <file>
///
/// Regexes match comma-joined observation symbols; a window defaults to the
/// number of comma-separated pieces of its pattern. Table files hold
/// `<past> <future> <p|[lo,hi]>` lines, `-` for an empty word; `load` reads them.
std::vector<CharFn> parse_charfns(std::string_view text,
                                  const std::function<std::string(const std::string&)>& load = {});

enum class Provenance { direct, indirect, derived };

struct Occurrence
{
    std::size_t time = 0;
    std::string label;
    ProbInterval confidence = ProbInterval::one();
    Provenance provenance = Provenance::direct;

    friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

using EventStream = std::vector<Occurrence>;

/// `<time> <label> [lo,hi] <provenance>` per line.
std::string serialize_event_stream(const EventStream& stream);
EventStream parse_event_stream(std::string_view text);

inline constexpr double kDetectionThreshold = 0.5;

/// Evaluates every function at every step. Functions sharing a name are
/// variants of one detector: at each step the one with the longest window
/// that has data decides. An occurrence is emitted when the deciding lower
/// bound reaches `threshold`.
EventStream detect_direct(const Trajectory& trajectory, const std::vector<CharFn>& fns,
                          double threshold = kDetectionThreshold);

struct IndirectDetection
{
    EventStream events;
    std::vector<std::pair<std::size_t, std::size_t>> segments; ///< [begin, end)
};

/// Change points of the observation distribution: compares the empirical
/// distributions of the `window` steps before and after each boundary and
/// reports total variation above `threshold`, one occurrence per run of hits
/// closer than `window` steps (at its largest distance). Detection lags by
/// up to `window` steps, and a return to an earlier regime with the same
/// distribution is invisible. Needs at least 2*window steps.
IndirectDetection detect_indirect(const Trajectory& trajectory, std::size_t window, double threshold,
                                  const std::string& label = "change");

/// Last observation seen in each memory-flagged state, by state id.
using TraceMemory = std::map<std::string, std::string>;

struct TrackConfig
{
    CollisionRule collision = CollisionRule::priority;
};

struct TrackResult
{
    /// beliefs[t]: where the model is during step t, after seeing its observation.
    std::vector<Belief> beliefs;
    TraceMemory memory;
    std::vector<std::string> warnings;
};

/// Follows an ed model along a trajectory. The belief moves only when a
/// monitored event occurs (an occurrence at time t takes effect between
/// steps t and t+1, weighted by its confidence) and is filtered by each
/// observation: a state is consistent with it when its trace allows it
/// (hi > 0). Throws wm::Error("inconsistent", ...) naming the time index
/// where no state is left.
TrackResult track(const Model& model, const Trajectory& trajectory, const EventStream& events,
                  const TrackConfig& config = {});

/// Remembered observation of a state, if it was ever visited.
std::optional<std::string> recall(const Model& model, const TraceMemory& memory, StateIndex state);

struct Validity
{
    std::vector<std::pair<std::size_t, std::size_t>> intervals; ///< inclusive [first, last] steps
    bool permanent_so_far = false; ///< one interval covering everything seen
};

/// Maximal stretches of the trajectory the model can explain. Tracking
/// restarts from a uniform belief after each failure; a stretch counts only
/// if at least `min_events` event occurrences inside it were confirmed by a
/// later observation, so a model that never moves does not qualify.
Validity phenomenon_validity(const Model& model, const Trajectory& trajectory, const EventStream& events,
                             std::size_t min_events = 1, const TrackConfig& config = {});

/// `<name>.<state>` each time a state's mass rises above `threshold`,
/// stamped with the time of the step that caused it.
EventStream derived_events(const Model& model, const std::vector<Belief>& beliefs, const std::string& name,
                           double threshold = 0.5);

std::string_view to_string(Provenance p);

} // namespace wm
