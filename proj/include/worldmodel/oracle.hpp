#pragma once

#include "worldmodel/model.hpp"
#include "worldmodel/rational.hpp"
#include "worldmodel/trajectory.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wm {

// ---- developments -------------------------------------------------------

enum class Direction { future, past };

/// A development is the word label_1 obs_1 label_2 obs_2 ...: each step names
/// the arrow label taken and the observation seen in the state it leads to.
/// Past developments walk the inverse model, so obs_k is the observation k
/// steps back.
using Word = std::vector<std::string>;

struct FutureSet
{
    Direction direction = Direction::future;
    std::size_t depth = 0;
    std::map<Word, ProbInterval> entries;
    /// Exact probabilities when the model is small and fully pointwise.
    std::optional<std::map<Word, Rational>> exact;
};

inline constexpr std::size_t kDefaultEnumerationCap = 2'000'000;
inline constexpr std::size_t kExactStateLimit = 16;

/// Developments of length `depth` from `start` (default: the initial state)
/// with upper probability > 0. Point models (or any model with a policy
/// resolving lp) give point probabilities, and exact rationals when the model
/// has at most kExactStateLimit states. Interval models multiply per-step
/// lower and upper bounds along paths and sum over paths, the upper bound
/// capped at 1. Throws wm::Error("cap", ...) when the expansion grows past
/// `cap` (word, state) pairs.
FutureSet enumerate_future(const Model& model, std::size_t depth, const Policy* policy = nullptr,
                           std::optional<StateIndex> start = std::nullopt, std::size_t cap = kDefaultEnumerationCap);

/// enumerate_future on invert_chain(model), flagged as past.
FutureSet enumerate_past(const Model& model, std::size_t depth, std::optional<StateIndex> start = std::nullopt,
                         std::size_t cap = kDefaultEnumerationCap);

/// Largest difference between two sets' bounds, counting absent words as [0,0].
double future_distance(const FutureSet& a, const FutureSet& b);

/// Exact equality of the rational entries; false when either lacks them.
bool exactly_equal(const FutureSet& a, const FutureSet& b);

/// One line per development: `dev <tokens...> p=<value>`, sorted by word.
std::string serialize_future_set(const FutureSet& set);

// ---- simulation ---------------------------------------------------------

enum class CollisionRule { priority, both_arrows };

struct SimulationConfig
{
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    std::optional<Policy> policy;
    std::optional<Preference> preference;
    std::optional<StateIndex> start;
    CollisionRule collision = CollisionRule::priority;
};

/// Simulated trajectory, t0 at its end. Each step records the observation
/// sampled in the current state and the action taken (`-` for fomm/hmm).
/// In ed models every event of the current state fires independently with
/// its lp; the step's act is the applied events joined by '+', `-` for
/// none. Under the priority rule only the top-ranked fired event moves the
/// model, under both-arrows they are applied one after the other.
/// Throws wm::Error("unresolved", ...) on intervals the config does not
/// resolve and wm::Error("simulation", ...) when the walk has no arrow to take.
Trajectory simulate(const Model& model, const SimulationConfig& config);

/// Forward run over `journeys` journeys (restarting after black-hole
/// absorption), returning per current state the empirical frequencies of its
/// depth-k past developments, in the format of enumerate_past.
std::map<StateIndex, std::map<Word, double>> sample_past_developments(const Model& model, std::size_t depth,
                                                                      std::size_t journeys, std::uint64_t seed);

// ---- estimation and policies -------------------------------------------

/// Standard FOMM of a trajectory: one state per observed symbol,
/// p(i,j) = #(i then j) / #(i then anything). The initial state is the
/// observation at t0 (the last one when t0 is the end).
Model estimate_fomm(const Trajectory& trajectory);

/// Royal policy: in preference order each action takes its upper bound of
/// the remaining mass, clamped so the less preferred actions can still meet
/// their bounds. States whose values needed the clamp are listed in
/// `adjusted`. States without a preference use label order. Throws
/// wm::Error("infeasible", ...) when no policy satisfies the bounds.
Policy preference_to_policy(const Model& model, const Preference& preference);

/// Parses `state <id>: a1 > a2 > ...` lines.
Preference parse_preference(std::string_view text, const Model& model);

/// `policy <state> <action> <p>` lines, sorted.
std::string serialize_policy(const Model& model, const Policy& policy);
Policy parse_policy(std::string_view text, const Model& model);

// ---- Markov property ----------------------------------------------------

struct MarkovContext
{
    std::string symbol;   ///< the current observation
    std::size_t samples = 0;
    double chi2 = 0.0;
    std::size_t df = 0;
    double p_value = 1.0;
    bool flagged = false; ///< longer history predicts better
};

struct MarkovReport
{
    std::size_t order = 1;
    double significance = 0.01;
    std::vector<MarkovContext> tested;
    std::vector<std::string> skipped; ///< symbols without enough data
    [[nodiscard]] bool inconclusive() const { return tested.empty(); }
    [[nodiscard]] bool markov() const;
};

inline constexpr std::size_t kMinContextSamples = 50;

/// For each observation x with at least kMinContextSamples occurrences,
/// a chi-squared independence test between the `order` symbols before x and
/// the symbol after x.
MarkovReport check_markov(const Trajectory& trajectory, std::size_t order, double significance);

std::string format_markov_report(const MarkovReport& report);

} // namespace wm
