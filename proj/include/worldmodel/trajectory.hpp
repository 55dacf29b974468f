#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wm {

/// One step of recorded data: what was seen, then what was done. `act` is an
/// action symbol, `-` when actions are not modeled, or for event-driven
/// corpora the `+`-joined events that fired at this step.
struct Step
{
    std::string obs;
    std::string act = "-";

    friend bool operator==(const Step&, const Step&) = default;
};

/// Recorded observation/action word with a designated current moment `t0`:
/// steps before it are the past, steps at or after it are the future.
struct Trajectory
{
    std::vector<Step> steps;
    std::size_t t0 = 0;
    std::vector<std::string> declared_obs;
    std::vector<std::string> declared_acts;

    [[nodiscard]] std::size_t size() const { return steps.size(); }
    [[nodiscard]] std::vector<std::string> observation_sequence() const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Splits an act field into its labels; `-` gives none.
std::vector<std::string> step_labels(std::string_view act);

} // namespace wm
