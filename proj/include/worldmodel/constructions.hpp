#pragma once

#include "worldmodel/graph.hpp"
#include "worldmodel/model.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace wm {

/// A set of arrows of a host model, by arrow index.
using EventSet = std::set<std::size_t>;

/// A set of states of a host model.
using FactSet = StateSet;

struct NamedEvent
{
    std::string name;
    EventSet arrows;
};

/// Disjoint non-empty classes covering every state.
using Partition = std::vector<StateSet>;

/// Outbound arrows of the fact's states.
EventSet fact_to_event(const Model& model, const FactSet& fact);

/// All arrows carrying `label`.
EventSet event_by_label(const Model& model, std::string_view label);

/// Arrows named as `from>to` or `from>label>to`, comma-separated.
EventSet parse_arrow_list(const Model& model, std::string_view spec);

struct DoubledModel
{
    Model model;
    std::vector<StateIndex> single; ///< s -> s'
    std::vector<StateIndex> dual;   ///< s -> s''
    FactSet fact;                   ///< the double-primed copies
};

/// Each state s becomes s' and s''. Arrows of the event lead into the
/// double-primed copies, the others into the primed ones, so the fact S''
/// holds exactly one step after each event occurrence. The initial state is
/// s'_0; meta `initial-choice` records that s''_0 would do as well.
DoubledModel event_to_fact(const Model& model, const EventSet& event);

/// Parity doubling: event arrows flip between S' (even count) and S'' (odd
/// count), other arrows stay on their side. Initial state s'_0.
DoubledModel parity_model(const Model& model, const EventSet& event);

/// Throws wm::Error("partition", ...) unless the classes are disjoint,
/// non-empty and cover the states.
void check_partition(const Model& model, const Partition& partition);

/// ed model with one state per class, named by its members joined with '+'.
/// Each monitored event induces arrows between the classes its arrows
/// connect; lp is the hull over member states of the event's occurrence
/// probability, ap the hull of the share going to each target class, and
/// class traces are hulls of member traces. Throws wm::Error("coverage", ...)
/// listing the class-crossing arrows outside every monitored event.
Model quotient(const Model& model, const Partition& partition, const std::vector<NamedEvent>& monitored);

/// One class per line, state ids separated by whitespace.
Partition parse_partition(std::string_view text, const Model& model);
std::string serialize_partition(const Model& model, const Partition& partition);

inline constexpr std::size_t kDefaultBeliefCap = 10000;

/// Belief model: states are reachable (belief, last observation) pairs, at
/// most `depth` steps from the initial belief (point mass on the initial
/// state unless given). Per label and observation there is one successor;
/// beliefs within 1e-9 are merged. States are named b0, b1, ... in
/// breadth-first order; meta `truncated` is set when the depth cut
/// expansion short. Exceeding `cap` states throws wm::Error("cap", ...) with
/// the partial model serialized in the detail.
Model belief_determinize(const Model& model, std::size_t depth, std::optional<Belief> initial = std::nullopt,
                         std::size_t cap = kDefaultBeliefCap);

struct MinimizedModel
{
    Model model;
    Partition partition; ///< over the input's states
    bool stable = false; ///< refinement reached its fixpoint within depth
};

/// Partition refinement: start from classes of equal traces and split by
/// per-label successor distributions over classes, for at most `depth`
/// rounds. Each class is named after its first member.
MinimizedModel minimize_forward(const Model& model, std::size_t depth);

inline constexpr std::string_view kPastPrefix = "~";

struct MinimalModel
{
    Model joined;   ///< fresh initial state `init` joining both parts
    Model forward;  ///< `init` plus the forward part, predicts the future
    Model backward; ///< `init` plus the backward part in past orientation
};

/// Three-step construction: determinize and minimize forward; do the same
/// on the inverse; join both at a fresh initial state. The backward part
/// keeps the orientation of the inverse (its labels carry the `~` prefix),
/// so no arrow ever returns to the fresh state. State ids are prefixed
/// `f:` and `b:`.
MinimalModel minimal_model(const Model& model, std::size_t depth);

/// Splits a joined model back into its forward and backward views.
MinimalModel split_minimal(const Model& joined);

} // namespace wm
