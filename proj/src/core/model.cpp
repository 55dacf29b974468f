#include "worldmodel/model.hpp"

#include "worldmodel/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <tuple>

namespace wm {

namespace {

struct KindName
{
    ModelKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {ModelKind::fomm, "fomm"},           {ModelKind::hmm, "hmm"},   {ModelKind::mdp, "mdp"},
    {ModelKind::mdp_fixed, "mdp-fixed"}, {ModelKind::smdp, "smdp"}, {ModelKind::mdp_plus, "mdp-plus"},
    {ModelKind::ed, "ed"},
};

template <class Table>
std::optional<std::size_t> find_in(const Table& table, std::string_view key)
{
    auto it = std::find(table.begin(), table.end(), key);
    if (it == table.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - table.begin());
}

} // namespace

std::string_view to_string(ModelKind kind)
{
    for (const auto& k : kKindNames)
        if (k.kind == kind)
            return k.name;
    return "?";
}

std::optional<ModelKind> parse_kind(std::string_view text)
{
    for (const auto& k : kKindNames)
        if (k.name == text)
            return k.kind;
    return std::nullopt;
}

bool is_single_label(ModelKind kind)
{
    return kind == ModelKind::fomm || kind == ModelKind::hmm;
}

bool is_perfect(ModelKind kind)
{
    return kind == ModelKind::fomm || kind == ModelKind::hmm || kind == ModelKind::mdp ||
           kind == ModelKind::mdp_fixed;
}

std::optional<StateIndex> Model::find_state(std::string_view id) const
{
    for (StateIndex i = 0; i < states.size(); ++i)
        if (states[i].id == id)
            return i;
    return std::nullopt;
}

std::optional<SymbolIndex> Model::find_observation(std::string_view sym) const
{
    return find_in(observations, sym);
}

std::optional<SymbolIndex> Model::find_label(std::string_view sym) const
{
    return find_in(labels, sym);
}

StateIndex Model::state_index(std::string_view id) const
{
    if (auto s = find_state(id))
        return *s;
    throw Error("unknown-state", std::string(id));
}

SymbolIndex Model::observation_index(std::string_view sym) const
{
    if (auto s = find_observation(sym))
        return *s;
    throw Error("unknown-symbol", "observation '" + std::string(sym) + "'");
}

SymbolIndex Model::label_index(std::string_view sym) const
{
    if (auto s = find_label(sym))
        return *s;
    throw Error("unknown-symbol", "label '" + std::string(sym) + "'");
}

SymbolIndex Model::intern_observation(std::string_view sym)
{
    if (auto s = find_observation(sym))
        return *s;
    observations.emplace_back(sym);
    return observations.size() - 1;
}

SymbolIndex Model::intern_label(std::string_view sym)
{
    if (auto s = find_label(sym))
        return *s;
    labels.emplace_back(sym);
    return labels.size() - 1;
}

StateIndex Model::add_state(std::string id, std::map<SymbolIndex, ProbInterval> trace, bool memory)
{
    states.push_back(State{std::move(id), memory, std::move(trace), {}});
    return states.size() - 1;
}

void Model::add_arrow(StateIndex from, SymbolIndex label, StateIndex to, ProbInterval lp, ProbInterval ap)
{
    arrows.push_back(Arrow{from, label, to, lp, ap});
}

void Model::add_arrow(std::string_view from, std::string_view label, std::string_view to, ProbInterval lp,
                      ProbInterval ap)
{
    add_arrow(state_index(from), intern_label(label), state_index(to), lp, ap);
}

ProbInterval Model::trace_prob(StateIndex state, SymbolIndex obs) const
{
    const auto& trace = states[state].trace;
    if (trace.empty())
        return ProbInterval::unknown();
    auto it = trace.find(obs);
    return it == trace.end() ? ProbInterval::zero() : it->second;
}

std::optional<SymbolIndex> Model::deterministic_observation(StateIndex state) const
{
    std::optional<SymbolIndex> found;
    for (const auto& [obs, p] : states[state].trace) {
        if (p.is_zero())
            continue;
        if (found || !(p.is_point() && std::abs(p.lo - 1.0) <= kTolerance))
            return std::nullopt;
        found = obs;
    }
    return found;
}

ProbInterval Model::label_prob(StateIndex state, SymbolIndex label) const
{
    for (const auto& a : arrows)
        if (a.from == state && a.label == label)
            return a.label_prob;
    return ProbInterval::zero();
}

std::vector<std::size_t> Model::outgoing(StateIndex state) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < arrows.size(); ++i)
        if (arrows[i].from == state)
            out.push_back(i);
    return out;
}

std::vector<std::size_t> Model::outgoing(StateIndex state, SymbolIndex label) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < arrows.size(); ++i)
        if (arrows[i].from == state && arrows[i].label == label)
            out.push_back(i);
    return out;
}

std::vector<std::size_t> Model::incoming(StateIndex state) const
{
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < arrows.size(); ++i)
        if (arrows[i].to == state)
            in.push_back(i);
    return in;
}

std::vector<SymbolIndex> Model::labels_at(StateIndex state) const
{
    std::set<SymbolIndex> seen;
    for (const auto& a : arrows)
        if (a.from == state)
            seen.insert(a.label);
    return {seen.begin(), seen.end()};
}

bool Model::all_points() const
{
    for (const auto& a : arrows)
        if (!a.label_prob.is_point() || !a.arrow_prob.is_point())
            return false;
    for (const auto& s : states)
        for (const auto& [o, p] : s.trace)
            if (!p.is_point())
                return false;
    return true;
}

void check_structure(const Model& model)
{
    if (model.states.empty())
        throw Error("structure", "model has no states");
    if (model.observations.empty())
        throw Error("structure", "empty observation alphabet");
    if (model.labels.empty())
        throw Error("structure", "empty label alphabet");
    if (model.initial >= model.states.size())
        throw Error("structure", "initial state out of range");
    std::set<std::string_view> ids;
    for (const auto& s : model.states) {
        if (s.id.empty())
            throw Error("structure", "empty state id");
        if (!ids.insert(s.id).second)
            throw Error("structure", "duplicate state id " + s.id);
        for (const auto& [obs, p] : s.trace)
            if (obs >= model.observations.size())
                throw Error("structure", "state " + s.id + " traces an undeclared observation");
    }
    for (const auto& a : model.arrows) {
        if (a.from >= model.states.size() || a.to >= model.states.size())
            throw Error("structure", "dangling arrow endpoint");
        if (a.label >= model.labels.size())
            throw Error("structure", "arrow with undeclared label");
    }
    for (const auto& [label, rank] : model.priorities)
        if (label >= model.labels.size())
            throw Error("structure", "priority for undeclared label");
}

Model canonicalize(const Model& model)
{
    Model out;
    out.kind = model.kind;
    out.meta = model.meta;
    out.observations = model.observations;
    std::sort(out.observations.begin(), out.observations.end());
    out.labels = model.labels;
    std::sort(out.labels.begin(), out.labels.end());

    std::vector<StateIndex> order(model.states.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](StateIndex a, StateIndex b) { return model.states[a].id < model.states[b].id; });
    std::vector<StateIndex> new_index(model.states.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        new_index[order[i]] = i;

    auto obs_map = [&](SymbolIndex o) { return *out.find_observation(model.observations[o]); };
    auto label_map = [&](SymbolIndex l) { return *out.find_label(model.labels[l]); };

    for (StateIndex old : order) {
        State s = model.states[old];
        s.trace.clear();
        for (const auto& [obs, p] : model.states[old].trace)
            s.trace[obs_map(obs)] = p;
        out.states.push_back(std::move(s));
    }
    out.initial = new_index[model.initial];
    for (const auto& a : model.arrows)
        out.arrows.push_back(Arrow{new_index[a.from], label_map(a.label), new_index[a.to], a.label_prob,
                                   a.arrow_prob});
    std::sort(out.arrows.begin(), out.arrows.end(), [&](const Arrow& x, const Arrow& y) {
        const auto key = [&](const Arrow& a) {
            return std::tie(out.states[a.from].id, out.labels[a.label], out.states[a.to].id);
        };
        if (key(x) != key(y))
            return key(x) < key(y);
        return std::tie(x.label_prob.lo, x.label_prob.hi, x.arrow_prob.lo, x.arrow_prob.hi) <
               std::tie(y.label_prob.lo, y.label_prob.hi, y.arrow_prob.lo, y.arrow_prob.hi);
    });
    for (const auto& [label, rank] : model.priorities)
        out.priorities[label_map(label)] = rank;
    return out;
}

namespace {

bool same_trace(const Model& a, StateIndex sa, const Model& b, StateIndex sb, double tol)
{
    // Compare over the union of listed observations, by symbol name.
    const auto& ta = a.states[sa].trace;
    const auto& tb = b.states[sb].trace;
    if (ta.empty() != tb.empty())
        return false;
    for (const auto& [o, p] : ta) {
        auto ob = b.find_observation(a.observations[o]);
        ProbInterval q = ob ? b.trace_prob(sb, *ob) : ProbInterval::zero();
        if (!approx_equal(p, q, tol))
            return false;
    }
    for (const auto& [o, q] : tb) {
        auto oa = a.find_observation(b.observations[o]);
        ProbInterval p = oa ? a.trace_prob(sa, *oa) : ProbInterval::zero();
        if (!approx_equal(p, q, tol))
            return false;
    }
    return true;
}

} // namespace

bool isomorphic(const Model& a, const Model& b, double tol)
{
    if (a.kind != b.kind || a.states.size() != b.states.size() || a.arrows.size() != b.arrows.size())
        return false;
    {
        auto oa = a.observations, ob = b.observations, la = a.labels, lb = b.labels;
        std::sort(oa.begin(), oa.end());
        std::sort(ob.begin(), ob.end());
        std::sort(la.begin(), la.end());
        std::sort(lb.begin(), lb.end());
        if (oa != ob || la != lb)
            return false;
    }
    const std::size_t n = a.states.size();
    auto signature = [](const Model& m, StateIndex s) {
        return std::make_pair(m.outgoing(s).size(), m.incoming(s).size());
    };

    // Arrow multiset comparison between a's state sa and b's state sb under a
    // (partial) mapping, restricted to arrows whose targets are already mapped.
    std::vector<std::optional<StateIndex>> map_ab(n), map_ba(n);
    auto consistent = [&](StateIndex sa, StateIndex sb) {
        if (a.states[sa].memory != b.states[sb].memory || signature(a, sa) != signature(b, sb) ||
            !same_trace(a, sa, b, sb, tol))
            return false;
        // Every arrow between mapped states must have a partner.
        for (auto ia : a.outgoing(sa)) {
            const auto& x = a.arrows[ia];
            if (!map_ab[x.to])
                continue;
            bool matched = false;
            for (auto ib : b.outgoing(sb)) {
                const auto& y = b.arrows[ib];
                if (y.to == *map_ab[x.to] && b.labels[y.label] == a.labels[x.label] &&
                    approx_equal(x.label_prob, y.label_prob, tol) && approx_equal(x.arrow_prob, y.arrow_prob, tol)) {
                    matched = true;
                    break;
                }
            }
            if (!matched)
                return false;
        }
        for (auto ia : a.incoming(sa)) {
            const auto& x = a.arrows[ia];
            if (!map_ab[x.from])
                continue;
            bool matched = false;
            for (auto ib : b.incoming(sb)) {
                const auto& y = b.arrows[ib];
                if (y.from == *map_ab[x.from] && b.labels[y.label] == a.labels[x.label] &&
                    approx_equal(x.label_prob, y.label_prob, tol) && approx_equal(x.arrow_prob, y.arrow_prob, tol)) {
                    matched = true;
                    break;
                }
            }
            if (!matched)
                return false;
        }
        return true;
    };

    std::function<bool(std::size_t)> assign = [&](std::size_t next) -> bool {
        if (next == n)
            return true;
        StateIndex sa = next == 0 ? a.initial : 0;
        if (next != 0) {
            // first unmapped state of a, in index order
            while (map_ab[sa])
                ++sa;
        }
        for (StateIndex sb = 0; sb < n; ++sb) {
            if (map_ba[sb] || (next == 0 && sb != b.initial) || (next != 0 && sb == b.initial))
                continue;
            map_ab[sa] = sb;
            map_ba[sb] = sa;
            if (consistent(sa, sb) && assign(next + 1))
                return true;
            map_ab[sa].reset();
            map_ba[sb].reset();
        }
        return false;
    };
    return assign(0);
}

Belief Belief::point(std::size_t n, StateIndex s)
{
    Belief b;
    b.mass.assign(n, 0.0);
    b.mass.at(s) = 1.0;
    return b;
}

Belief Belief::uniform(std::size_t n)
{
    Belief b;
    b.mass.assign(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
    return b;
}

std::vector<StateIndex> Belief::support() const
{
    std::vector<StateIndex> out;
    for (StateIndex i = 0; i < mass.size(); ++i)
        if (mass[i] > 0.0)
            out.push_back(i);
    return out;
}

StateIndex Belief::argmax() const
{
    return static_cast<StateIndex>(std::max_element(mass.begin(), mass.end()) - mass.begin());
}

double Policy::at(StateIndex s, SymbolIndex a) const
{
    auto it = prob.find({s, a});
    return it == prob.end() ? 0.0 : it->second;
}

Policy policy_from_agent(const Model& model)
{
    Policy policy;
    for (StateIndex s = 0; s < model.states.size(); ++s) {
        for (SymbolIndex l : model.labels_at(s)) {
            ProbInterval lp = model.label_prob(s, l);
            if (!lp.is_point())
                throw Error("policy", "Agent interval of (" + model.states[s].id + ", " + model.labels[l] +
                                          ") is not a point; supply a policy");
            policy.prob[{s, l}] = lp.lo;
        }
    }
    return policy;
}

void check_policy(const Model& model, const Policy& policy)
{
    std::vector<double> sums(model.states.size(), 0.0);
    std::vector<bool> has(model.states.size(), false);
    for (const auto& [key, p] : policy.prob) {
        auto [s, a] = key;
        if (s >= model.states.size() || a >= model.labels.size())
            throw Error("policy", "policy refers to an unknown state or action");
        ProbInterval allowed = model.label_prob(s, a);
        if (!allowed.contains(p))
            throw Error("policy", "probability " + format_number(p) + " of (" + model.states[s].id + ", " +
                                      model.labels[a] + ") outside its Agent interval " +
                                      format_interval(allowed));
        sums[s] += p;
        has[s] = true;
    }
    for (StateIndex s = 0; s < model.states.size(); ++s) {
        if (model.labels_at(s).empty())
            continue;
        if (!has[s] || std::abs(sums[s] - 1.0) > 1e-7)
            throw Error("policy", "policy of state " + model.states[s].id + " sums to " + format_number(sums[s]));
    }
}

} // namespace wm
