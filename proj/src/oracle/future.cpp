#include "worldmodel/oracle.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wm {

namespace {

struct Move
{
    SymbolIndex label;
    StateIndex to;
    SymbolIndex obs;
    ProbInterval p;
    Rational exact;
};

struct Mass
{
    double lo = 0.0;
    double hi = 0.0;
    Rational exact = 0;
};

ProbInterval agent_interval(const Policy* policy, const Arrow& a)
{
    if (policy)
        return ProbInterval::point(std::clamp(policy->at(a.from, a.label), 0.0, 1.0));
    return a.label_prob;
}

bool pointwise(const Model& model, const Policy* policy)
{
    for (const auto& a : model.arrows)
        if (!agent_interval(policy, a).is_point() || !a.arrow_prob.is_point())
            return false;
    for (StateIndex s = 0; s < model.size(); ++s) {
        if (model.states[s].trace.empty())
            return false;
        for (const auto& [o, p] : model.states[s].trace)
            if (!p.is_point())
                return false;
    }
    return true;
}

std::vector<std::vector<Move>> step_table(const Model& model, const Policy* policy, bool exact)
{
    std::vector<std::vector<Move>> table(model.size());
    for (const auto& a : model.arrows) {
        ProbInterval weight = interval_product(agent_interval(policy, a), a.arrow_prob);
        if (weight.hi <= 0.0)
            continue;
        Rational wq = exact ? to_rational(agent_interval(policy, a).lo) * to_rational(a.arrow_prob.lo)
                            : Rational(0);
        for (SymbolIndex o = 0; o < model.observations.size(); ++o) {
            ProbInterval t = model.trace_prob(a.to, o);
            if (t.hi <= 0.0)
                continue;
            Rational q = exact ? wq * to_rational(t.lo) : Rational(0);
            table[a.from].push_back({a.label, a.to, o, interval_product(weight, t), q});
        }
    }
    return table;
}

} // namespace

FutureSet enumerate_future(const Model& model, std::size_t depth, const Policy* policy,
                           std::optional<StateIndex> start, std::size_t cap)
{
    check_structure(model);
    const StateIndex s0 = start.value_or(model.initial);
    if (s0 >= model.size())
        throw Error("unknown-state", "start state out of range");
    const bool exact = model.size() <= kExactStateLimit && pointwise(model, policy);
    const auto table = step_table(model, policy, exact);

    std::map<std::pair<Word, StateIndex>, Mass> frontier;
    frontier[{Word{}, s0}] = Mass{1.0, 1.0, Rational(1)};
    for (std::size_t k = 0; k < depth; ++k) {
        std::map<std::pair<Word, StateIndex>, Mass> next;
        for (const auto& [key, mass] : frontier) {
            for (const Move& step : table[key.second]) {
                Word w = key.first;
                w.push_back(model.labels[step.label]);
                w.push_back(model.observations[step.obs]);
                Mass& m = next[{std::move(w), step.to}];
                m.lo += mass.lo * step.p.lo;
                m.hi += mass.hi * step.p.hi;
                if (exact)
                    m.exact += mass.exact * step.exact;
                if (next.size() > cap)
                    throw Error("cap", "more than " + std::to_string(cap) + " partial developments at depth " +
                                           std::to_string(k + 1));
            }
        }
        frontier = std::move(next);
    }

    FutureSet out;
    out.depth = depth;
    std::map<Word, Mass> words;
    for (const auto& [key, mass] : frontier) {
        Mass& m = words[key.first];
        m.lo += mass.lo;
        m.hi += mass.hi;
        m.exact += mass.exact;
    }
    if (exact)
        out.exact.emplace();
    for (const auto& [word, mass] : words) {
        if (mass.hi <= 0.0)
            continue;
        double hi = std::min(mass.hi, 1.0);
        out.entries.emplace(word, ProbInterval(std::min(mass.lo, hi), hi));
        if (exact)
            out.exact->emplace(word, mass.exact);
    }
    return out;
}

FutureSet enumerate_past(const Model& model, std::size_t depth, std::optional<StateIndex> start, std::size_t cap)
{
    Model inverse = is_single_label(model.kind) ? invert_chain(model) : invert_mdp_fixed(model);
    FutureSet out = enumerate_future(inverse, depth, nullptr, start, cap);
    out.direction = Direction::past;
    return out;
}

double future_distance(const FutureSet& a, const FutureSet& b)
{
    double worst = 0.0;
    auto lookup = [](const FutureSet& s, const Word& w) {
        auto it = s.entries.find(w);
        return it == s.entries.end() ? ProbInterval::zero() : it->second;
    };
    auto visit = [&](const FutureSet& s) {
        for (const auto& [w, p] : s.entries) {
            ProbInterval x = lookup(a, w), y = lookup(b, w);
            worst = std::max({worst, std::abs(x.lo - y.lo), std::abs(x.hi - y.hi)});
        }
    };
    visit(a);
    visit(b);
    return worst;
}

bool exactly_equal(const FutureSet& a, const FutureSet& b)
{
    return a.exact && b.exact && *a.exact == *b.exact;
}

std::string serialize_future_set(const FutureSet& set)
{
    std::ostringstream out;
    out << "direction " << (set.direction == Direction::future ? "future" : "past") << "\n";
    out << "depth " << set.depth << "\n";
    for (const auto& [word, p] : set.entries) {
        out << "dev";
        for (const auto& tok : word)
            out << ' ' << tok;
        out << " p=" << format_interval(p) << "\n";
    }
    return out.str();
}

} // namespace wm
