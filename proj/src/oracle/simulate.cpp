#include "worldmodel/oracle.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/graph.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace wm {

namespace {

double point_or_throw(const ProbInterval& p, const std::string& what)
{
    if (!p.is_point())
        throw Error("unresolved", what + " is the interval " + format_interval(p));
    return p.lo;
}

// Picks an index by weight; nullopt when the draw falls into the deficit.
std::optional<std::size_t> draw(const std::vector<double>& weights, std::mt19937_64& rng)
{
    double x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        x -= weights[i];
        if (x < 0.0)
            return i;
    }
    // Rounding slack: accept when the weights sum to one.
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!weights.empty() && total >= 1.0 - kTolerance)
        return weights.size() - 1;
    return std::nullopt;
}

class Simulator
{
public:
    Simulator(const Model& model, const SimulationConfig& config)
        : m_(model), cfg_(config), rng_(config.seed)
    {
        if (cfg_.policy)
            policy_ = *cfg_.policy;
        else if (cfg_.preference)
            policy_ = preference_to_policy(m_, *cfg_.preference);
        if (policy_ && m_.kind != ModelKind::ed)
            check_policy(m_, *policy_);
        for (StateIndex s = 0; s < m_.size(); ++s) {
            const auto& st = m_.states[s];
            if (st.trace.empty())
                throw Error("unresolved", "state " + st.id + " has no trace to sample");
            for (const auto& [o, p] : st.trace)
                point_or_throw(p, "trace of " + st.id + " for " + m_.observations[o]);
        }
        for (const auto& a : m_.arrows)
            point_or_throw(a.arrow_prob, "ap of " + m_.states[a.from].id + " " + m_.labels[a.label] + " " +
                                             m_.states[a.to].id);
        event_order_.resize(m_.labels.size());
        std::iota(event_order_.begin(), event_order_.end(), 0);
        std::stable_sort(event_order_.begin(), event_order_.end(), [&](SymbolIndex a, SymbolIndex b) {
            return rank(a) < rank(b);
        });
    }

    Trajectory run()
    {
        Trajectory t;
        t.declared_obs = m_.observations;
        if (!is_single_label(m_.kind))
            t.declared_acts = m_.labels;
        StateIndex s = cfg_.start.value_or(m_.initial);
        for (std::size_t k = 0; k < cfg_.steps; ++k) {
            Step step;
            step.obs = m_.observations[observe(s)];
            if (m_.kind == ModelKind::ed)
                s = fire_events(s, step.act);
            else
                s = act(s, step.act);
            t.steps.push_back(std::move(step));
        }
        t.t0 = t.steps.size();
        return t;
    }

private:
    long rank(SymbolIndex e) const
    {
        auto it = m_.priorities.find(e);
        return it == m_.priorities.end() ? std::numeric_limits<long>::max() : it->second;
    }

    double label_probability(StateIndex s, SymbolIndex l) const
    {
        if (policy_)
            return policy_->at(s, l);
        return point_or_throw(m_.label_prob(s, l),
                              "lp of " + m_.states[s].id + " " + m_.labels[l] + " (no policy given)");
    }

    SymbolIndex observe(StateIndex s)
    {
        std::vector<SymbolIndex> obs;
        std::vector<double> w;
        for (const auto& [o, p] : m_.states[s].trace) {
            obs.push_back(o);
            w.push_back(p.lo);
        }
        auto i = draw(w, rng_);
        if (!i)
            throw Error("simulation", "trace of " + m_.states[s].id + " does not sum to one");
        return obs[*i];
    }

    StateIndex move(StateIndex s, SymbolIndex l)
    {
        auto arrows = m_.outgoing(s, l);
        std::vector<double> w;
        for (auto a : arrows)
            w.push_back(m_.arrows[a].arrow_prob.lo);
        auto i = draw(w, rng_);
        if (!i)
            throw Error("simulation", "no " + m_.labels[l] + " arrow taken from state " + m_.states[s].id);
        return m_.arrows[arrows[*i]].to;
    }

    StateIndex act(StateIndex s, std::string& record)
    {
        auto labels = m_.labels_at(s);
        std::vector<double> w;
        for (auto l : labels)
            w.push_back(label_probability(s, l));
        auto i = draw(w, rng_);
        if (!i)
            throw Error("simulation", "no action taken in state " + m_.states[s].id);
        record = is_single_label(m_.kind) ? "-" : m_.labels[labels[*i]];
        return move(s, labels[*i]);
    }

    StateIndex fire_events(StateIndex s, std::string& record)
    {
        std::vector<SymbolIndex> fired;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (SymbolIndex e : event_order_) {
            if (m_.outgoing(s, e).empty())
                continue;
            if (u(rng_) < label_probability(s, e))
                fired.push_back(e);
        }
        if (cfg_.collision == CollisionRule::priority && fired.size() > 1)
            fired.resize(1);
        std::vector<std::string> applied;
        for (SymbolIndex e : fired) {
            if (m_.outgoing(s, e).empty())
                continue;
            s = move(s, e);
            applied.push_back(m_.labels[e]);
        }
        record.clear();
        for (const auto& a : applied)
            record += (record.empty() ? "" : "+") + a;
        if (record.empty())
            record = "-";
        return s;
    }

    const Model& m_;
    const SimulationConfig& cfg_;
    std::mt19937_64 rng_;
    std::optional<Policy> policy_;
    std::vector<SymbolIndex> event_order_;
};

} // namespace

Trajectory simulate(const Model& model, const SimulationConfig& config)
{
    check_structure(model);
    return Simulator(model, config).run();
}

std::map<StateIndex, std::map<Word, double>> sample_past_developments(const Model& model, std::size_t depth,
                                                                      std::size_t journeys, std::uint64_t seed)
{
    check_structure(model);
    if (journeys == 0)
        throw Error("no-statistics", "zero journeys requested");
    const StateSet black_hole = find_black_hole(model);
    std::mt19937_64 rng(seed);

    std::vector<std::vector<std::size_t>> out(model.size());
    std::vector<std::vector<double>> weights(model.size());
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        const Arrow& a = model.arrows[i];
        out[a.from].push_back(i);
        weights[a.from].push_back(point_or_throw(a.effective(), "arrow probability"));
    }
    auto observe = [&](StateIndex s) {
        std::vector<SymbolIndex> obs;
        std::vector<double> w;
        for (const auto& [o, p] : model.states[s].trace) {
            obs.push_back(o);
            w.push_back(point_or_throw(p, "trace"));
        }
        auto i = draw(w, rng);
        if (!i)
            throw Error("simulation", "trace of " + model.states[s].id + " does not sum to one");
        return obs[*i];
    };

    // history[k] = (state, label of the arrow that entered it, observation)
    struct Visit
    {
        StateIndex state;
        SymbolIndex label;
        SymbolIndex obs;
    };
    std::map<StateIndex, std::map<Word, double>> counts;
    std::vector<Visit> run;
    auto record = [&]() {
        if (run.size() <= depth)
            return;
        const std::size_t t = run.size() - 1;
        Word w;
        for (std::size_t k = 1; k <= depth; ++k) {
            w.push_back(model.labels[run[t - k + 1].label]);
            w.push_back(model.observations[run[t - k].obs]);
        }
        counts[run[t].state][w] += 1.0;
    };

    std::size_t done = 0;
    run.push_back({model.initial, 0, observe(model.initial)});
    while (done < journeys) {
        StateIndex s = run.back().state;
        auto i = draw(weights[s], rng);
        if (!i) {
            ++done;
            run.clear();
            run.push_back({model.initial, 0, observe(model.initial)});
            continue;
        }
        const Arrow& a = model.arrows[out[s][*i]];
        run.push_back({a.to, a.label, observe(a.to)});
        record();
        if (a.to == model.initial) {
            ++done;
        } else if (black_hole.count(a.to)) {
            ++done;
            run.clear();
            run.push_back({model.initial, 0, observe(model.initial)});
        }
        if (run.size() > 4 * depth + 64)
            run.erase(run.begin(), run.end() - static_cast<std::ptrdiff_t>(depth + 1));
    }

    for (auto& [s, words] : counts) {
        double total = 0.0;
        for (const auto& [w, c] : words)
            total += c;
        for (auto& [w, c] : words)
            c /= total;
    }
    return counts;
}

} // namespace wm
