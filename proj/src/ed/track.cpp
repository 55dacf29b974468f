#include "worldmodel/ed.hpp"

#include "worldmodel/error.hpp"

#include <algorithm>
#include <limits>

namespace wm {

namespace {

struct Run
{
    TrackResult result;
    std::optional<std::size_t> failed_at;
    std::size_t last_good = 0;
    std::vector<std::size_t> moved_at; ///< times of event applications that changed the belief
};

class Tracker
{
public:
    Tracker(const Model& model, const Trajectory& trajectory, const EventStream& events, const TrackConfig& config)
        : m_(model), traj_(trajectory), cfg_(config)
    {
        if (m_.kind != ModelKind::ed)
            throw Error("precondition", "tracking needs an ed model, got " + std::string(to_string(m_.kind)));
        check_structure(m_);
        for (const auto& o : events) {
            if (o.time >= traj_.size())
                continue;
            if (auto l = m_.find_label(o.label))
                by_time_[o.time].push_back({*l, o.confidence.midpoint()});
            else
                unknown_.push_back("time " + std::to_string(o.time) + ": unknown event '" + o.label + "' ignored");
        }
        for (auto& [t, list] : by_time_)
            std::stable_sort(list.begin(), list.end(), [&](const Fired& a, const Fired& b) {
                return rank(a.label) < rank(b.label);
            });
    }

    Run run(std::size_t start, bool uniform) const
    {
        Run r;
        r.result.warnings = unknown_;
        const std::size_t n = m_.size();
        Belief b = uniform ? Belief::uniform(n) : Belief::point(n, m_.initial);
        if (traj_.size() <= start)
            return r;
        if (!condition(b, traj_.steps[start].obs)) {
            r.failed_at = start;
            return r;
        }
        remember(r.result.memory, b, start);
        r.result.beliefs.push_back(b);
        r.last_good = start;
        for (std::size_t t = start; t + 1 < traj_.size(); ++t) {
            const bool moved = apply_events(b, t, r.result.warnings);
            if (!condition(b, traj_.steps[t + 1].obs)) {
                r.failed_at = t + 1;
                return r;
            }
            if (moved)
                r.moved_at.push_back(t);
            remember(r.result.memory, b, t + 1);
            r.result.beliefs.push_back(b);
            r.last_good = t + 1;
        }
        return r;
    }

private:
    struct Fired
    {
        SymbolIndex label;
        double weight;
    };

    long rank(SymbolIndex e) const
    {
        auto it = m_.priorities.find(e);
        return it == m_.priorities.end() ? std::numeric_limits<long>::max() : it->second;
    }

    bool possible(const Belief& b, SymbolIndex e) const
    {
        for (StateIndex s = 0; s < m_.size(); ++s)
            if (b.mass[s] > 0.0 && !m_.outgoing(s, e).empty())
                return true;
        return false;
    }

    void apply(Belief& b, const Fired& f) const
    {
        std::vector<double> next(m_.size(), 0.0);
        for (StateIndex s = 0; s < m_.size(); ++s) {
            const double mass = b.mass[s];
            if (mass <= 0.0)
                continue;
            auto group = m_.outgoing(s, f.label);
            double norm = 0.0;
            for (auto i : group)
                norm += m_.arrows[i].arrow_prob.midpoint();
            if (group.empty() || norm <= 0.0) {
                next[s] += mass;
                continue;
            }
            next[s] += (1.0 - f.weight) * mass;
            for (auto i : group) {
                const Arrow& a = m_.arrows[i];
                next[a.to] += f.weight * mass * a.arrow_prob.midpoint() / norm;
                if (!a.arrow_prob.is_point())
                    b.approximate = true;
            }
        }
        b.mass = std::move(next);
    }

    bool apply_events(Belief& b, std::size_t t, std::vector<std::string>& warnings) const
    {
        auto it = by_time_.find(t);
        if (it == by_time_.end())
            return false;
        bool moved = false;
        for (const Fired& f : it->second) {
            if (!possible(b, f.label)) {
                warnings.push_back("time " + std::to_string(t) + ": event '" + m_.labels[f.label] +
                                   "' impossible in the current state");
                continue;
            }
            apply(b, f);
            moved = true;
            if (cfg_.collision == CollisionRule::priority)
                break;
        }
        return moved;
    }

    bool condition(Belief& b, const std::string& obs) const
    {
        auto o = m_.find_observation(obs);
        double total = 0.0;
        for (StateIndex s = 0; s < m_.size(); ++s) {
            const bool traced = !m_.states[s].trace.empty();
            const bool consistent = !traced || (o && m_.trace_prob(s, *o).hi > 0.0);
            if (!consistent)
                b.mass[s] = 0.0;
            total += b.mass[s];
        }
        if (total <= 0.0)
            return false;
        for (double& x : b.mass)
            x /= total;
        return true;
    }

    void remember(TraceMemory& memory, const Belief& b, std::size_t t) const
    {
        const StateIndex s = b.argmax();
        if (m_.states[s].memory)
            memory[m_.states[s].id] = traj_.steps[t].obs;
    }

    const Model& m_;
    const Trajectory& traj_;
    TrackConfig cfg_;
    std::map<std::size_t, std::vector<Fired>> by_time_;
    std::vector<std::string> unknown_;
};

} // namespace

TrackResult track(const Model& model, const Trajectory& trajectory, const EventStream& events,
                  const TrackConfig& config)
{
    Run r = Tracker(model, trajectory, events, config).run(0, false);
    if (r.failed_at)
        throw Error("inconsistent", "trajectory inconsistent with model at time " + std::to_string(*r.failed_at));
    return std::move(r.result);
}

std::optional<std::string> recall(const Model& model, const TraceMemory& memory, StateIndex state)
{
    auto it = memory.find(model.states.at(state).id);
    if (it == memory.end())
        return std::nullopt;
    return it->second;
}

Validity phenomenon_validity(const Model& model, const Trajectory& trajectory, const EventStream& events,
                             std::size_t min_events, const TrackConfig& config)
{
    const Tracker tracker(model, trajectory, events, config);
    Validity out;
    std::optional<std::size_t> reach;
    for (std::size_t a = 0; a < trajectory.size(); ++a) {
        Run r = tracker.run(a, true);
        if (r.failed_at == a)
            continue;
        const std::size_t end = r.last_good;
        if (reach && end <= *reach)
            continue;
        // Confirmed moves: applied at t and followed by a consistent step t+1 <= end.
        std::size_t confirmed = 0;
        for (std::size_t t : r.moved_at)
            confirmed += t + 1 <= end;
        if (confirmed < min_events)
            continue;
        out.intervals.emplace_back(a, end);
        reach = end;
        if (end + 1 == trajectory.size())
            break;
    }
    out.permanent_so_far = out.intervals.size() == 1 && out.intervals.front().first == 0 &&
                           out.intervals.front().second + 1 == trajectory.size();
    return out;
}

EventStream derived_events(const Model& model, const std::vector<Belief>& beliefs, const std::string& name,
                           double threshold)
{
    EventStream out;
    for (std::size_t t = 1; t < beliefs.size(); ++t)
        for (StateIndex s = 0; s < model.size(); ++s) {
            const double now = beliefs[t].mass.at(s), before = beliefs[t - 1].mass.at(s);
            if (now > threshold && before <= threshold)
                out.push_back({t - 1, name + "." + model.states[s].id, ProbInterval::point(now),
                               Provenance::derived});
        }
    return out;
}

} // namespace wm
