#include "worldmodel/graph.hpp"

#include "worldmodel/error.hpp"

#include <algorithm>
#include <vector>

namespace wm {

std::vector<std::vector<StateIndex>> structural_successors(const Model& model)
{
    std::vector<std::vector<StateIndex>> succ(model.states.size());
    for (const auto& a : model.arrows)
        if (a.effective().hi > 0.0)
            succ[a.from].push_back(a.to);
    return succ;
}

namespace {

StateSet sweep(const std::vector<std::vector<StateIndex>>& adj, StateIndex start)
{
    StateSet seen{start};
    std::vector<StateIndex> stack{start};
    while (!stack.empty()) {
        StateIndex s = stack.back();
        stack.pop_back();
        for (StateIndex t : adj[s])
            if (seen.insert(t).second)
                stack.push_back(t);
    }
    return seen;
}

std::vector<std::vector<StateIndex>> reversed(const std::vector<std::vector<StateIndex>>& adj)
{
    std::vector<std::vector<StateIndex>> rev(adj.size());
    for (StateIndex s = 0; s < adj.size(); ++s)
        for (StateIndex t : adj[s])
            rev[t].push_back(s);
    return rev;
}

} // namespace

StateSet reachable_from(const Model& model, StateIndex from)
{
    return sweep(structural_successors(model), from);
}

StateSet reaching(const Model& model, StateIndex to)
{
    return sweep(reversed(structural_successors(model)), to);
}

StateSet find_black_hole(const Model& model)
{
    const auto back = reaching(model, model.initial);
    StateSet out;
    for (StateIndex s = 0; s < model.states.size(); ++s)
        if (!back.count(s))
            out.insert(s);
    return out;
}

StateSet find_white_peak(const Model& model)
{
    const auto fwd = reachable_from(model, model.initial);
    StateSet out;
    for (StateIndex s = 0; s < model.states.size(); ++s)
        if (!fwd.count(s))
            out.insert(s);
    return out;
}

StructureReport analyze_structure(const Model& model)
{
    StructureReport r;
    r.white_peak = find_white_peak(model);
    r.black_hole = find_black_hole(model);
    std::set_intersection(r.white_peak.begin(), r.white_peak.end(), r.black_hole.begin(), r.black_hole.end(),
                          std::inserter(r.redundant, r.redundant.begin()));
    return r;
}

Model restrict_states(const Model& model, const StateSet& keep)
{
    if (!keep.count(model.initial))
        throw Error("structure", "cannot drop the initial state");
    Model out = model;
    out.states.clear();
    out.arrows.clear();
    std::vector<std::optional<StateIndex>> remap(model.states.size());
    for (StateIndex s = 0; s < model.states.size(); ++s) {
        if (!keep.count(s))
            continue;
        remap[s] = out.states.size();
        out.states.push_back(model.states[s]);
    }
    out.initial = *remap[model.initial];
    for (const auto& a : model.arrows) {
        if (!remap[a.from] || !remap[a.to])
            continue;
        Arrow b = a;
        b.from = *remap[a.from];
        b.to = *remap[a.to];
        out.arrows.push_back(b);
    }
    return out;
}

Model remove_redundant(const Model& model)
{
    const auto report = analyze_structure(model);
    StateSet keep;
    for (StateIndex s = 0; s < model.states.size(); ++s)
        if (!report.redundant.count(s))
            keep.insert(s);
    return restrict_states(model, keep);
}

std::string format_state_set(const Model& model, const StateSet& states)
{
    std::vector<std::string> ids;
    for (StateIndex s : states)
        ids.push_back(model.states[s].id);
    std::sort(ids.begin(), ids.end());
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty())
            out += ' ';
        out += id;
    }
    return out;
}

} // namespace wm
