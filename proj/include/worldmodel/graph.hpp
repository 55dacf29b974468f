#pragma once

#include "worldmodel/model.hpp"

#include <set>

namespace wm {

using StateSet = std::set<StateIndex>;

struct StructureReport
{
    StateSet white_peak;
    StateSet black_hole;
    StateSet redundant; ///< white_peak ∩ black_hole
};

/// Successors along arrows whose effective upper probability is positive.
/// Arrows that are only possibly used ([0, x], x > 0) count as edges.
std::vector<std::vector<StateIndex>> structural_successors(const Model& model);

/// States reachable from `from` (including `from`).
StateSet reachable_from(const Model& model, StateIndex from);

/// States from which `to` is reachable (including `to`).
StateSet reaching(const Model& model, StateIndex to);

/// Maximal black hole: every non-initial state with no path back to the
/// initial state. Every closed set excluding the initial state is a subset.
StateSet find_black_hole(const Model& model);

/// Maximal white peak: every non-initial state the initial state cannot reach.
StateSet find_white_peak(const Model& model);

StructureReport analyze_structure(const Model& model);

/// Drops the states that are both in the white peak and in the black hole,
/// together with their arrows.
Model remove_redundant(const Model& model);

/// Keeps only `keep`, reindexing arrows. The initial state must be kept.
Model restrict_states(const Model& model, const StateSet& keep);

std::string format_state_set(const Model& model, const StateSet& states);

} // namespace wm
