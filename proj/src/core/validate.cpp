#include "worldmodel/validate.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/graph.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace wm {

namespace {

bool is_smdp_value(const ProbInterval& p)
{
    auto near = [](double x, double y) { return std::abs(x - y) <= kTolerance; };
    return (near(p.lo, 0) && near(p.hi, 0)) || (near(p.lo, 0) && near(p.hi, 1)) || (near(p.lo, 1) && near(p.hi, 1));
}

class Checker
{
public:
    explicit Checker(const Model& m) : m_(m), white_peak_(find_white_peak(m)) {}

    ValidationReport run()
    {
        check_label_consistency();
        check_traces();
        switch (m_.kind) {
        case ModelKind::fomm:
            check_single_label();
            check_fomm_bijection();
            check_points();
            check_perfect_sums();
            break;
        case ModelKind::hmm:
            check_single_label();
            check_deterministic_traces();
            check_points();
            check_perfect_sums();
            break;
        case ModelKind::mdp:
            for (const auto& a : m_.arrows)
                if (!(a.label_prob == ProbInterval::unknown()))
                    violation(describe(a) + ": mdp Agent interval must be [0,1], got " + format_interval(a.label_prob));
            check_world_points();
            check_perfect_sums();
            break;
        case ModelKind::mdp_fixed:
            check_points();
            check_perfect_sums();
            check_agent_sums(/*exact=*/true);
            break;
        case ModelKind::smdp:
            for (const auto& a : m_.arrows) {
                if (!is_smdp_value(a.label_prob))
                    violation(describe(a) + ": smdp lp must be 0, 1 or [0,1], got " + format_interval(a.label_prob));
                if (!is_smdp_value(a.arrow_prob))
                    violation(describe(a) + ": smdp ap must be 0, 1 or [0,1], got " + format_interval(a.arrow_prob));
            }
            check_interval_sums();
            check_agent_sums(/*exact=*/false);
            break;
        case ModelKind::mdp_plus:
            check_interval_sums();
            check_agent_sums(/*exact=*/false);
            break;
        case ModelKind::ed:
            if (m_.find_label(kTrueLabel) && m_.labels.size() == 1)
                warning("ed model monitors only the event 'true'");
            check_interval_sums();
            break;
        }
        if (m_.kind != ModelKind::ed && !m_.priorities.empty())
            violation("priorities are only meaningful for ed models");
        return std::move(report_);
    }

private:
    void violation(std::string s) { report_.violations.push_back(std::move(s)); }
    void warning(std::string s) { report_.warnings.push_back(std::move(s)); }

    std::string describe(const Arrow& a) const
    {
        return "arrow " + m_.states[a.from].id + " " + m_.labels[a.label] + " " + m_.states[a.to].id;
    }

    std::map<std::pair<StateIndex, SymbolIndex>, std::vector<const Arrow*>> groups() const
    {
        std::map<std::pair<StateIndex, SymbolIndex>, std::vector<const Arrow*>> g;
        for (const auto& a : m_.arrows)
            g[{a.from, a.label}].push_back(&a);
        return g;
    }

    void check_label_consistency()
    {
        for (const auto& [key, arrows] : groups()) {
            for (const Arrow* a : arrows) {
                if (!approx_equal(a->label_prob, arrows.front()->label_prob)) {
                    violation("state " + m_.states[key.first].id + ": arrows labelled " + m_.labels[key.second] +
                              " disagree on lp");
                    break;
                }
            }
        }
    }

    void check_traces()
    {
        const bool perfect = is_perfect(m_.kind);
        for (const auto& s : m_.states) {
            if (s.trace.empty()) {
                if (perfect)
                    violation("state " + s.id + " has no trace");
                continue;
            }
            double lo = 0, hi = 0;
            bool points = true;
            for (const auto& [obs, p] : s.trace) {
                lo += p.lo;
                hi += p.hi;
                points = points && p.is_point();
            }
            if (perfect && !points)
                violation("state " + s.id + ": " + std::string(to_string(m_.kind)) + " traces must be point probabilities");
            else if (perfect && std::abs(lo - 1.0) > kTolerance)
                violation("state " + s.id + ": trace sums to " + format_number(lo));
            else if (!perfect && (lo > 1.0 + kTolerance || hi < 1.0 - kTolerance))
                violation("state " + s.id + ": trace intervals exclude every distribution");
        }
    }

    void check_single_label()
    {
        if (m_.labels.size() != 1 || m_.labels.front() != kTrueLabel)
            violation(std::string(to_string(m_.kind)) + " models use the single label 'true'");
        for (const auto& a : m_.arrows)
            if (!a.label_prob.is_point() || std::abs(a.label_prob.lo - 1.0) > kTolerance)
                violation(describe(a) + ": lp of the event 'true' must be 1");
    }

    void check_deterministic_traces()
    {
        for (StateIndex s = 0; s < m_.states.size(); ++s)
            if (!m_.deterministic_observation(s))
                violation("state " + m_.states[s].id + " must show exactly one observation");
    }

    void check_fomm_bijection()
    {
        std::map<SymbolIndex, std::vector<std::string>> by_obs;
        for (StateIndex s = 0; s < m_.states.size(); ++s) {
            auto o = m_.deterministic_observation(s);
            if (!o) {
                violation("state " + m_.states[s].id + " must show exactly one observation");
                continue;
            }
            by_obs[*o].push_back(m_.states[s].id);
        }
        for (const auto& [o, ids] : by_obs)
            if (ids.size() > 1)
                violation("observation " + m_.observations[o] + " is shown by " + std::to_string(ids.size()) +
                          " states; fomm states must coincide with observations");
        for (SymbolIndex o = 0; o < m_.observations.size(); ++o)
            if (!by_obs.count(o))
                violation("observation " + m_.observations[o] + " has no state");
    }

    void check_points()
    {
        for (const auto& a : m_.arrows)
            if (!a.label_prob.is_point() || !a.arrow_prob.is_point())
                violation(describe(a) + ": point probabilities required");
    }

    void check_world_points()
    {
        for (const auto& a : m_.arrows)
            if (!a.arrow_prob.is_point())
                violation(describe(a) + ": World probability must be a point");
    }

    // Σ ap = 1 per (state, label); missing mass only tolerated in the white peak.
    void check_perfect_sums()
    {
        auto g = groups();
        for (StateIndex s = 0; s < m_.states.size(); ++s) {
            const bool peak = white_peak_.count(s) > 0;
            if (m_.labels_at(s).empty()) {
                std::string msg = "state " + m_.states[s].id + " has no outgoing arrows";
                if (peak)
                    warning(msg + " (inside the white peak)");
                else
                    violation(msg);
                continue;
            }
            for (SymbolIndex l : m_.labels_at(s)) {
                double sum = 0;
                for (const Arrow* a : g[{s, l}])
                    sum += a->arrow_prob.lo;
                std::string where = "state " + m_.states[s].id + " label " + m_.labels[l];
                if (sum > 1.0 + kTolerance)
                    violation(where + ": outgoing probabilities sum to " + format_number(sum));
                else if (sum < 1.0 - kTolerance) {
                    if (peak)
                        warning(where + ": outgoing probabilities sum to " + format_number(sum) +
                                " inside the white peak");
                    else
                        violation(where + ": outgoing probabilities sum to " + format_number(sum));
                }
            }
        }
    }

    void check_interval_sums()
    {
        for (const auto& [key, arrows] : groups()) {
            double lo = 0, hi = 0;
            for (const Arrow* a : arrows) {
                lo += a->arrow_prob.lo;
                hi += a->arrow_prob.hi;
            }
            if (lo > 1.0 + kTolerance || hi < 1.0 - kTolerance) {
                std::string where = "state " + m_.states[key.first].id + " label " + m_.labels[key.second];
                if (white_peak_.count(key.first) && lo <= 1.0 + kTolerance)
                    warning(where + ": World interval sums fall short inside the white peak");
                else
                    violation(where + ": World interval sums exclude any policy");
            }
        }
    }

    void check_agent_sums(bool exact)
    {
        for (StateIndex s = 0; s < m_.states.size(); ++s) {
            auto labels = m_.labels_at(s);
            if (labels.empty())
                continue;
            double lo = 0, hi = 0;
            for (SymbolIndex l : labels) {
                auto p = m_.label_prob(s, l);
                lo += p.lo;
                hi += p.hi;
            }
            std::string where = "state " + m_.states[s].id;
            if (exact && std::abs(lo - 1.0) > kTolerance)
                violation(where + ": action probabilities sum to " + format_number(lo));
            else if (!exact && (lo > 1.0 + kTolerance || hi < 1.0 - kTolerance))
                violation(where + ": Agent interval sums exclude any policy");
        }
    }

    const Model& m_;
    StateSet white_peak_;
    ValidationReport report_;
};

double midpoint_or_value(const ProbInterval& p, bool& approximate)
{
    if (!p.is_point())
        approximate = true;
    return p.midpoint();
}

} // namespace

ValidationReport validate(const Model& model)
{
    check_structure(model);
    return Checker(model).run();
}

unsigned memory_bits(const Model& model)
{
    std::map<std::vector<SymbolIndex>, std::size_t> colours;
    std::size_t largest = 0;
    for (const auto& s : model.states) {
        std::vector<SymbolIndex> support;
        if (s.trace.empty()) {
            support.push_back(static_cast<SymbolIndex>(-1)); // colourless
        } else {
            for (const auto& [obs, p] : s.trace)
                if (!p.is_zero())
                    support.push_back(obs);
        }
        largest = std::max(largest, ++colours[support]);
    }
    unsigned bits = 0;
    while ((std::size_t{1} << bits) < largest)
        ++bits;
    return bits;
}

Belief condition_belief(const Model& model, const Belief& belief, SymbolIndex obs)
{
    if (obs >= model.observations.size())
        throw Error("unknown-symbol", "observation index out of range");
    Belief out;
    out.approximate = belief.approximate;
    out.mass.assign(model.states.size(), 0.0);
    double total = 0;
    for (StateIndex s = 0; s < model.states.size(); ++s) {
        if (belief.mass[s] <= 0)
            continue;
        double t = midpoint_or_value(model.trace_prob(s, obs), out.approximate);
        out.mass[s] = belief.mass[s] * t;
        total += out.mass[s];
    }
    if (total <= 0)
        throw Error("inconsistent-observation", "observation " + model.observations[obs] + " is impossible here");
    for (auto& m : out.mass)
        m /= total;
    return out;
}

Belief step_belief(const Model& model, const Belief& belief, SymbolIndex label, SymbolIndex obs)
{
    if (label >= model.labels.size())
        throw Error("unknown-symbol", "label index out of range");
    if (obs >= model.observations.size())
        throw Error("unknown-symbol", "observation index out of range");
    if (belief.mass.size() != model.states.size())
        throw Error("structure", "belief size does not match the model");
    Belief out;
    out.approximate = belief.approximate;
    out.mass.assign(model.states.size(), 0.0);
    const bool weigh_label = model.kind == ModelKind::ed;
    for (StateIndex s = 0; s < model.states.size(); ++s) {
        if (belief.mass[s] <= 0)
            continue;
        auto group = model.outgoing(s, label);
        if (group.empty())
            continue;
        double lw = 1.0;
        if (weigh_label)
            lw = midpoint_or_value(model.arrows[group.front()].label_prob, out.approximate);
        double norm = 0;
        bool points = true;
        for (auto i : group) {
            norm += model.arrows[i].arrow_prob.midpoint();
            points = points && model.arrows[i].arrow_prob.is_point();
        }
        if (norm <= 0)
            continue;
        // Point rows keep their raw probabilities; interval rows use normalized midpoints.
        if (points)
            norm = 1.0;
        else
            out.approximate = true;
        for (auto i : group) {
            const auto& a = model.arrows[i];
            out.mass[a.to] += belief.mass[s] * lw * a.arrow_prob.midpoint() / norm;
        }
    }
    double total = 0;
    for (StateIndex s = 0; s < model.states.size(); ++s) {
        if (out.mass[s] <= 0)
            continue;
        out.mass[s] *= midpoint_or_value(model.trace_prob(s, obs), out.approximate);
        total += out.mass[s];
    }
    if (total <= 0)
        throw Error("inconsistent-observation",
                    "observation " + model.observations[obs] + " after " + model.labels[label] + " is impossible");
    for (auto& m : out.mass)
        m /= total;
    return out;
}

Belief step_belief(const Model& model, const Belief& belief, std::string_view label, std::string_view obs)
{
    return step_belief(model, belief, model.label_index(label), model.observation_index(obs));
}

} // namespace wm
