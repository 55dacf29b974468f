#pragma once

#include "worldmodel/graph.hpp"
#include "worldmodel/model.hpp"

#include <cstdint>
#include <vector>

namespace wm {

/// Expected counts over one journey: a walk that starts in the initial state
/// and stops on returning to it or on entering the black hole.
struct JourneyStatistics
{
    std::vector<double> arrow_count; ///< per model arrow
    std::vector<double> visits;      ///< per state, non-terminal visits; 1 for the initial state
    std::vector<double> absorbed;    ///< per state, arrivals that ended inside the black hole
    double returns = 0.0;            ///< arrivals back at the initial state
    StateSet black_hole;

    /// Sum of arrow counts entering `state`.
    [[nodiscard]] double inflow(const Model& model, StateIndex state) const;
};

/// Point probability with which each arrow is used. Single-label kinds and ed
/// use lp*ap; for decision kinds the policy replaces lp. Throws
/// wm::Error("precondition", ...) when a probability is not a point.
std::vector<double> arrow_weights(const Model& model, const Policy* policy = nullptr);

/// Solves the absorbing-flow system v(s0)=1, v(s)=sum_k v(k) p(k,s) over the
/// non-terminal states, with c(arrow)=v(from)*p.
JourneyStatistics journey_statistics(const Model& model);
JourneyStatistics journey_statistics(const Model& model, const std::vector<double>& weights);

/// Sampled counterpart of journey_statistics: counts averaged over `journeys`
/// simulated walks. Deterministic given the seed.
JourneyStatistics sample_journeys(const Model& model, const std::vector<double>& weights, std::size_t journeys,
                                  std::uint64_t seed);

/// Reversed model of a fomm or hmm. The reversed arrow j->i gets
/// c(i,j) / inflow(j). Targets with no inflow (only possible inside the black
/// hole) get uniform inbound probabilities and are listed in meta
/// "uniform-inbound". Throws wm::Error("white-peak", ids) when the model has one.
Model invert_chain(const Model& model);

/// invert_chain with counts from simulated journeys. journeys == 0 throws
/// wm::Error("no-statistics", ...).
Model monte_carlo_invert(const Model& model, std::size_t journeys, std::uint64_t seed);

/// Inverse of an mdp/mdp-fixed model under a fixed policy, as an mdp-fixed
/// model: lp is the probability that the previous action was the label given
/// the current state, ap the share of the arrow among that action's
/// predecessors.
Model invert_mdp_fixed(const Model& model, const Policy& policy);
Model invert_mdp_fixed(const Model& model);

enum class PlusMode { vertex, monte_carlo };

/// Interval inverse of an mdp-plus (or smdp/mdp) model: invert_mdp_fixed over
/// a family of point resolutions of the Agent and World intervals and take
/// per-arrow [min, max]. Vertex mode enumerates every vertex resolution and
/// throws wm::Error("budget", ...) if there are more than `budget`; Monte-Carlo
/// mode samples `budget` resolutions. Resolutions that leave a white peak are
/// skipped. The result carries meta approximate=true: the bounds hold over the
/// explored family only.
Model invert_mdp_plus(const Model& model, PlusMode mode, std::size_t budget, std::uint64_t seed);

} // namespace wm
