#pragma once

#include "worldmodel/prob.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wm {

enum class ModelKind { fomm, hmm, mdp, mdp_fixed, smdp, mdp_plus, ed };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_kind(std::string_view text);

/// fomm and hmm have a single label, the event "true", fired at every step.
bool is_single_label(ModelKind kind);
/// Kinds whose probabilities are fully determined (no free will, no unpredictable randomness).
bool is_perfect(ModelKind kind);

inline constexpr std::string_view kTrueLabel = "true";

using StateIndex = std::size_t;
using SymbolIndex = std::size_t;

struct State
{
    std::string id;
    bool memory = false;
    // Observation -> probability. Unlisted observations are [0,0]; an empty
    // map means the state has no trace at all and constrains nothing.
    std::map<SymbolIndex, ProbInterval> trace;
    std::vector<std::string> phenomena;
};

struct Arrow
{
    StateIndex from = 0;
    SymbolIndex label = 0;
    StateIndex to = 0;
    ProbInterval label_prob = ProbInterval::one(); ///< the label is chosen / occurs
    ProbInterval arrow_prob = ProbInterval::one(); ///< this arrow among same-label arrows

    /// Probability of the arrow actually being used.
    [[nodiscard]] ProbInterval effective() const { return interval_product(label_prob, arrow_prob); }
};

/// Labelled stochastic graph covering every model kind of the toolkit.
///
/// Labels are the single event "true" for fomm/hmm, actions for the MDP
/// family and monitored events for ed. Per arrow, `label_prob` houses the
/// Agent (or Event) function of its source state and label, and `arrow_prob`
/// houses the World function.
struct Model
{
    ModelKind kind = ModelKind::fomm;
    std::vector<std::string> observations;
    std::vector<std::string> labels;
    std::vector<State> states;
    std::vector<Arrow> arrows;
    StateIndex initial = 0;
    std::map<SymbolIndex, int> priorities; ///< ed only; lower rank fires first
    std::map<std::string, std::string> meta;

    [[nodiscard]] std::optional<StateIndex> find_state(std::string_view id) const;
    [[nodiscard]] std::optional<SymbolIndex> find_observation(std::string_view sym) const;
    [[nodiscard]] std::optional<SymbolIndex> find_label(std::string_view sym) const;

    /// Same as find_*, but throws wm::Error("unknown-symbol"/"unknown-state").
    [[nodiscard]] StateIndex state_index(std::string_view id) const;
    [[nodiscard]] SymbolIndex observation_index(std::string_view sym) const;
    [[nodiscard]] SymbolIndex label_index(std::string_view sym) const;

    SymbolIndex intern_observation(std::string_view sym);
    SymbolIndex intern_label(std::string_view sym);
    StateIndex add_state(std::string id, std::map<SymbolIndex, ProbInterval> trace = {}, bool memory = false);
    void add_arrow(StateIndex from, SymbolIndex label, StateIndex to, ProbInterval lp, ProbInterval ap);
    void add_arrow(std::string_view from, std::string_view label, std::string_view to, ProbInterval lp,
                   ProbInterval ap);

    /// Trace probability of `obs` in `state`. States with no trace give [0,1].
    [[nodiscard]] ProbInterval trace_prob(StateIndex state, SymbolIndex obs) const;

    /// The single observation of a deterministic trace, if it is one.
    [[nodiscard]] std::optional<SymbolIndex> deterministic_observation(StateIndex state) const;

    /// Agent/Event interval of (state, label): the label_prob shared by the
    /// label's outgoing arrows, [0,0] when there are none.
    [[nodiscard]] ProbInterval label_prob(StateIndex state, SymbolIndex label) const;

    [[nodiscard]] std::vector<std::size_t> outgoing(StateIndex state) const;
    [[nodiscard]] std::vector<std::size_t> outgoing(StateIndex state, SymbolIndex label) const;
    [[nodiscard]] std::vector<std::size_t> incoming(StateIndex state) const;

    /// Labels with at least one outgoing arrow from `state`.
    [[nodiscard]] std::vector<SymbolIndex> labels_at(StateIndex state) const;

    [[nodiscard]] bool all_points() const;

    [[nodiscard]] std::size_t size() const { return states.size(); }
};

/// Structural consistency: one initial state, no dangling indices, non-empty
/// observation and label alphabets, unique state ids. Throws
/// wm::Error("structure", ...).
void check_structure(const Model& model);

/// Sorted states and arrows (by id, then (from, label, to)); symbol tables
/// sorted too. Two models describing the same thing compare equal after this.
Model canonicalize(const Model& model);

/// Equality of canonical forms with probabilities compared at `tol`.
bool isomorphic(const Model& a, const Model& b, double tol = kTolerance);

/// Distribution over states, indexed by StateIndex. Mass is never negative and
/// sums to one; zero entries are states outside the support.
struct Belief
{
    std::vector<double> mass;
    bool approximate = false;

    static Belief point(std::size_t n, StateIndex s);
    static Belief uniform(std::size_t n);
    [[nodiscard]] std::vector<StateIndex> support() const;
    [[nodiscard]] StateIndex argmax() const;
};

/// Agent policy: (state, action) -> probability.
struct Policy
{
    std::map<std::pair<StateIndex, SymbolIndex>, double> prob;
    std::set<StateIndex> adjusted; ///< states where the lower-bound repair kicked in

    [[nodiscard]] double at(StateIndex s, SymbolIndex a) const;
};

/// Most wanted action first, per state.
using Preference = std::map<StateIndex, std::vector<SymbolIndex>>;

/// Label probabilities fixed by the model itself (mdp-fixed, single-label kinds).
/// Throws wm::Error("policy", ...) if some Agent interval is not a point.
Policy policy_from_agent(const Model& model);

/// Checks a policy against the model's Agent intervals: every entry inside its
/// interval and per-state sums equal to 1. Throws wm::Error("policy", ...).
void check_policy(const Model& model, const Policy& policy);

} // namespace wm
