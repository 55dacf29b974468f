#pragma once

#include "worldmodel/model.hpp"

#include <string>
#include <vector>

namespace wm {

struct ValidationReport
{
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    [[nodiscard]] bool ok() const { return violations.empty(); }
    friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Kind-specific rules. Structural problems throw wm::Error("structure", ...)
/// instead of being reported. Outgoing-probability deficits inside the white
/// peak are warnings, not violations.
ValidationReport validate(const Model& model);

/// Dynamic memory size in bits: ceil(log2 m) with m the largest number of
/// states sharing one trace colour (the support of the trace).
unsigned memory_bits(const Model& model);

/// One Bayes-filter step: traverse `label` arrows, condition on `obs`,
/// renormalize. Interval probabilities are replaced by their midpoints and the
/// result is marked approximate. Throws wm::Error("inconsistent-observation")
/// when the observation has zero probability under the belief.
Belief step_belief(const Model& model, const Belief& belief, SymbolIndex label, SymbolIndex obs);
Belief step_belief(const Model& model, const Belief& belief, std::string_view label, std::string_view obs);

/// Conditions a belief on the current observation without moving.
Belief condition_belief(const Model& model, const Belief& belief, SymbolIndex obs);

} // namespace wm
