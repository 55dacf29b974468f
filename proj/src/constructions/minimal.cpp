#include "worldmodel/constructions.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/format.hpp"
#include "worldmodel/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace wm {

namespace {

constexpr SymbolIndex kNoObservation = std::numeric_limits<SymbolIndex>::max();

void require_points(const Model& model, const char* what)
{
    if (model.kind == ModelKind::ed)
        throw Error("precondition", std::string(what) + " needs a model with exclusive labels, not ed");
    if (!model.all_points())
        throw Error("precondition", std::string(what) + " needs a point-probability model");
    for (StateIndex s = 0; s < model.size(); ++s)
        if (model.states[s].trace.empty())
            throw Error("precondition", std::string(what) + ": state " + model.states[s].id + " has no trace");
}

struct BeliefNode
{
    std::vector<double> mass;
    SymbolIndex obs = kNoObservation;
    std::size_t level = 0;
    bool expanded = false;
};

std::string describe(const Model& model, const std::vector<double>& mass)
{
    std::string out;
    for (StateIndex s = 0; s < mass.size(); ++s)
        if (mass[s] > 0.0)
            out += (out.empty() ? "" : " ") + model.states[s].id + ":" + format_number(mass[s]);
    return out;
}

bool same_belief(const BeliefNode& a, const std::vector<double>& mass, SymbolIndex obs)
{
    if (a.obs != obs)
        return false;
    for (std::size_t i = 0; i < mass.size(); ++i)
        if (std::abs(a.mass[i] - mass[i]) > kTolerance)
            return false;
    return true;
}

} // namespace

Model belief_determinize(const Model& model, std::size_t depth, std::optional<Belief> initial, std::size_t cap)
{
    check_structure(model);
    require_points(model, "belief determinization");
    const std::size_t n = model.size();
    std::vector<double> start = initial ? initial->mass : Belief::point(n, model.initial).mass;
    if (start.size() != n)
        throw Error("structure", "initial belief size does not match the model");

    Model out;
    out.kind = is_single_label(model.kind) ? ModelKind::hmm : model.kind;
    out.observations = model.observations;
    out.labels = model.labels;
    out.meta["determinized-from"] = model.meta.count("name") ? model.meta.at("name") : "model";

    std::vector<BeliefNode> nodes;
    auto find_or_add = [&](std::vector<double> mass, SymbolIndex obs, std::size_t level) {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (same_belief(nodes[i], mass, obs))
                return i;
        if (nodes.size() >= cap) {
            out.meta["truncated"] = "cap";
            throw Error("cap", "cap exceeded: more than " + std::to_string(cap) +
                                   " belief states; partial model:\n" + serialize_model(out));
        }
        std::map<SymbolIndex, ProbInterval> trace;
        if (obs != kNoObservation) {
            trace[obs] = ProbInterval::one();
        } else {
            for (SymbolIndex o = 0; o < model.observations.size(); ++o) {
                double p = 0.0;
                for (StateIndex s = 0; s < n; ++s)
                    p += mass[s] * model.trace_prob(s, o).lo;
                if (p > 0.0)
                    trace[o] = ProbInterval::point(p);
            }
        }
        const std::string id = "b" + std::to_string(nodes.size());
        out.add_state(id, trace);
        out.meta["belief-" + id] = describe(model, mass);
        nodes.push_back({std::move(mass), obs, level, false});
        return nodes.size() - 1;
    };

    // A deterministic initial trace makes the initial node a regular (belief, obs) pair.
    SymbolIndex first_obs = kNoObservation;
    for (SymbolIndex o = 0; o < model.observations.size(); ++o) {
        double p = 0.0;
        for (StateIndex s = 0; s < n; ++s)
            p += start[s] * model.trace_prob(s, o).lo;
        if (std::abs(p - 1.0) <= kTolerance)
            first_obs = o;
    }
    out.initial = find_or_add(start, first_obs, 0);

    std::deque<std::size_t> queue{out.initial};
    while (!queue.empty()) {
        const std::size_t b = queue.front();
        queue.pop_front();
        if (nodes[b].expanded || nodes[b].level >= depth)
            continue;
        nodes[b].expanded = true;
        const std::vector<double> mass = nodes[b].mass;
        const std::size_t level = nodes[b].level;
        for (SymbolIndex l = 0; l < model.labels.size(); ++l) {
            std::vector<double> moved(n, 0.0);
            double lp = 0.0;
            for (StateIndex s = 0; s < n; ++s) {
                if (mass[s] <= 0.0)
                    continue;
                auto group = model.outgoing(s, l);
                if (group.empty())
                    continue;
                const double label_p = model.arrows[group.front()].label_prob.lo;
                lp += mass[s] * label_p;
                for (auto i : group)
                    moved[model.arrows[i].to] += mass[s] * label_p * model.arrows[i].arrow_prob.lo;
            }
            if (lp <= 0.0)
                continue;
            for (double& x : moved)
                x /= lp;
            for (SymbolIndex o = 0; o < model.observations.size(); ++o) {
                std::vector<double> next(n, 0.0);
                double po = 0.0;
                for (StateIndex s = 0; s < n; ++s) {
                    next[s] = moved[s] * model.trace_prob(s, o).lo;
                    po += next[s];
                }
                if (po <= kTolerance * kTolerance)
                    continue;
                for (double& x : next)
                    x /= po;
                const std::size_t target = find_or_add(std::move(next), o, level + 1);
                out.add_arrow(b, l, target, ProbInterval::point(lp), ProbInterval::point(po));
                if (!nodes[target].expanded)
                    queue.push_back(target);
            }
        }
    }
    if (std::any_of(nodes.begin(), nodes.end(), [](const BeliefNode& b) { return !b.expanded; })) {
        // Unexpanded nodes are only a cut if they have somewhere to go.
        bool cut = false;
        for (std::size_t b = 0; b < nodes.size() && !cut; ++b)
            if (!nodes[b].expanded)
                for (StateIndex s = 0; s < n && !cut; ++s)
                    cut = nodes[b].mass[s] > 0.0 && !model.outgoing(s).empty();
        if (cut)
            out.meta["truncated"] = "depth " + std::to_string(depth);
    }
    return out;
}

MinimizedModel minimize_forward(const Model& model, std::size_t depth)
{
    check_structure(model);
    require_points(model, "minimization");
    const std::size_t n = model.size();
    auto quantize = [](double x) { return std::llround(x * 1e9); };

    std::vector<std::size_t> cls(n);
    auto assign = [&](const std::vector<std::string>& keys) {
        std::map<std::string, std::size_t> ids;
        std::vector<std::size_t> next(n);
        for (StateIndex s = 0; s < n; ++s)
            next[s] = ids.try_emplace(keys[s], ids.size()).first->second;
        return std::make_pair(next, ids.size());
    };
    std::vector<std::string> keys(n);
    for (StateIndex s = 0; s < n; ++s) {
        for (const auto& [o, p] : model.states[s].trace)
            keys[s] += model.observations[o] + "=" + std::to_string(quantize(p.lo)) + " ";
    }
    auto [initial_cls, count] = assign(keys);
    cls = initial_cls;

    auto signature = [&](StateIndex s) {
        std::string key = std::to_string(cls[s]) + "|";
        for (SymbolIndex l : model.labels_at(s)) {
            std::map<std::size_t, double> to;
            for (auto i : model.outgoing(s, l))
                to[cls[model.arrows[i].to]] += model.arrows[i].arrow_prob.lo;
            key += model.labels[l] + ":" + std::to_string(quantize(model.label_prob(s, l).lo));
            for (const auto& [c, p] : to)
                key += " " + std::to_string(c) + "=" + std::to_string(quantize(p));
            key += ";";
        }
        return key;
    };

    MinimizedModel result;
    for (std::size_t round = 0;; ++round) {
        for (StateIndex s = 0; s < n; ++s)
            keys[s] = signature(s);
        auto [next, next_count] = assign(keys);
        if (next_count == count) {
            result.stable = true;
            break;
        }
        if (round >= depth)
            break;
        cls = next;
        count = next_count;
    }

    // Classes ordered by their first member.
    std::vector<std::size_t> order(count, n);
    for (StateIndex s = n; s-- > 0;)
        order[cls[s]] = s;
    std::vector<std::size_t> rank(count);
    {
        std::vector<std::size_t> by_first(count);
        for (std::size_t c = 0; c < count; ++c)
            by_first[c] = c;
        std::sort(by_first.begin(), by_first.end(), [&](std::size_t a, std::size_t b) { return order[a] < order[b]; });
        for (std::size_t r = 0; r < count; ++r)
            rank[by_first[r]] = r;
    }
    result.partition.assign(count, {});
    for (StateIndex s = 0; s < n; ++s)
        result.partition[rank[cls[s]]].insert(s);

    Model& m = result.model;
    m.kind = model.kind == ModelKind::fomm && count < n ? ModelKind::hmm : model.kind;
    m.observations = model.observations;
    m.labels = model.labels;
    m.priorities = model.priorities;
    m.meta = model.meta;
    for (const auto& members : result.partition) {
        const State& rep = model.states[*members.begin()];
        m.add_state(rep.id, rep.trace, rep.memory);
        m.states.back().phenomena = rep.phenomena;
    }
    for (std::size_t r = 0; r < count; ++r) {
        const StateIndex rep = *result.partition[r].begin();
        for (SymbolIndex l : model.labels_at(rep)) {
            std::map<std::size_t, double> to;
            for (auto i : model.outgoing(rep, l))
                to[rank[cls[model.arrows[i].to]]] += model.arrows[i].arrow_prob.lo;
            for (const auto& [d, p] : to)
                m.add_arrow(r, l, d, model.label_prob(rep, l), ProbInterval::point(std::min(p, 1.0)));
        }
    }
    m.initial = rank[cls[model.initial]];
    if (!result.stable)
        m.meta["refinement"] = "unstable after " + std::to_string(depth) + " rounds";
    return result;
}

namespace {

constexpr std::string_view kInit = "init";
constexpr std::string_view kForwardPrefix = "f:";
constexpr std::string_view kBackwardPrefix = "b:";

Model forward_part(const Model& model, std::size_t depth)
{
    return minimize_forward(belief_determinize(model, depth), depth).model;
}

} // namespace

MinimalModel minimal_model(const Model& model, std::size_t depth)
{
    check_structure(model);
    const Model forward = forward_part(model, depth);
    const Model inverse = is_single_label(model.kind) ? invert_chain(model) : invert_mdp_fixed(model);
    const Model backward = forward_part(inverse, depth);

    Model j;
    j.kind = ModelKind::ed;
    j.observations = model.observations;
    j.meta["forward-kind"] = std::string(to_string(forward.kind));
    j.meta["backward-kind"] = std::string(to_string(backward.kind));
    if (model.meta.count("name"))
        j.meta["name"] = model.meta.at("name");
    const StateIndex init = j.add_state(std::string(kInit), forward.states[forward.initial].trace);

    auto splice = [&](const Model& part, std::string_view prefix, std::string_view label_prefix) {
        const StateIndex base = j.size();
        for (const auto& st : part.states)
            j.add_state(std::string(prefix) + st.id, st.trace, st.memory);
        for (const auto& a : part.arrows) {
            const SymbolIndex l = j.intern_label(std::string(label_prefix) + part.labels[a.label]);
            j.add_arrow(base + a.from, l, base + a.to, a.label_prob, a.arrow_prob);
            if (a.from == part.initial)
                j.add_arrow(init, l, base + a.to, a.label_prob, a.arrow_prob);
        }
    };
    splice(forward, kForwardPrefix, "");
    splice(backward, kBackwardPrefix, kPastPrefix);
    j.initial = init;

    MinimalModel out;
    out.joined = restrict_states(j, reachable_from(j, init));
    auto views = split_minimal(out.joined);
    out.forward = std::move(views.forward);
    out.backward = std::move(views.backward);
    return out;
}

MinimalModel split_minimal(const Model& joined)
{
    check_structure(joined);
    auto view = [&](std::string_view prefix, bool past) {
        Model v;
        auto kind_key = past ? "backward-kind" : "forward-kind";
        auto kind = joined.meta.count(kind_key) ? parse_kind(joined.meta.at(kind_key)) : std::nullopt;
        v.kind = kind.value_or(ModelKind::hmm);
        v.observations = joined.observations;
        std::vector<std::optional<StateIndex>> remap(joined.size());
        for (StateIndex s = 0; s < joined.size(); ++s) {
            const auto& id = joined.states[s].id;
            if (s == joined.initial || id.starts_with(prefix))
                remap[s] = v.add_state(id, joined.states[s].trace, joined.states[s].memory);
        }
        v.initial = *remap[joined.initial];
        for (const auto& a : joined.arrows) {
            std::string_view label = joined.labels[a.label];
            if (label.starts_with(kPastPrefix) != past || !remap[a.from] || !remap[a.to])
                continue;
            if (past)
                label.remove_prefix(kPastPrefix.size());
            v.add_arrow(*remap[a.from], v.intern_label(label), *remap[a.to], a.label_prob, a.arrow_prob);
        }
        if (v.labels.empty())
            v.intern_label(kTrueLabel);
        return v;
    };
    MinimalModel out;
    out.joined = joined;
    out.forward = view(kForwardPrefix, false);
    out.backward = view(kBackwardPrefix, true);
    return out;
}

} // namespace wm
