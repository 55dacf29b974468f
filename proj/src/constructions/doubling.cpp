#include "worldmodel/constructions.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/format.hpp"

#include <algorithm>
#include <map>

namespace wm {

EventSet fact_to_event(const Model& model, const FactSet& fact)
{
    EventSet event;
    for (std::size_t i = 0; i < model.arrows.size(); ++i)
        if (fact.count(model.arrows[i].from))
            event.insert(i);
    return event;
}

EventSet event_by_label(const Model& model, std::string_view label)
{
    const SymbolIndex l = model.label_index(label);
    EventSet event;
    for (std::size_t i = 0; i < model.arrows.size(); ++i)
        if (model.arrows[i].label == l)
            event.insert(i);
    return event;
}

EventSet parse_arrow_list(const Model& model, std::string_view spec)
{
    EventSet event;
    std::string text(spec);
    std::replace(text.begin(), text.end(), ',', ' ');
    for (auto item : tokenize(text)) {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        while (true) {
            auto gt = item.find('>', start);
            parts.push_back(item.substr(start, gt == std::string_view::npos ? gt : gt - start));
            if (gt == std::string_view::npos)
                break;
            start = gt + 1;
        }
        if (parts.size() != 2 && parts.size() != 3)
            throw Error("parse", "arrow '" + std::string(item) + "' is not from>to or from>label>to");
        const StateIndex from = model.state_index(parts.front());
        const StateIndex to = model.state_index(parts.back());
        std::optional<SymbolIndex> label;
        if (parts.size() == 3)
            label = model.label_index(parts[1]);
        bool found = false;
        for (std::size_t i = 0; i < model.arrows.size(); ++i) {
            const Arrow& a = model.arrows[i];
            if (a.from == from && a.to == to && (!label || a.label == *label)) {
                event.insert(i);
                found = true;
            }
        }
        if (!found)
            throw Error("unknown-arrow", "no arrow " + std::string(item));
    }
    return event;
}

namespace {

void check_event(const Model& model, const EventSet& event)
{
    for (auto i : event)
        if (i >= model.arrows.size())
            throw Error("structure", "event arrow " + std::to_string(i) + " out of range");
}

// Copies of every state, s' first, with arrows routed by `route(in_event,
// from_dual) -> to_dual`.
template <typename Route>
DoubledModel double_states(const Model& model, const EventSet& event, Route route)
{
    check_structure(model);
    check_event(model, event);
    DoubledModel out;
    Model& m = out.model;
    m.kind = model.kind == ModelKind::fomm ? ModelKind::hmm : model.kind;
    m.observations = model.observations;
    m.labels = model.labels;
    m.priorities = model.priorities;
    m.meta = model.meta;
    for (const auto& st : model.states) {
        out.single.push_back(m.add_state(st.id + "'", st.trace, st.memory));
        m.states.back().phenomena = st.phenomena;
    }
    for (const auto& st : model.states) {
        out.dual.push_back(m.add_state(st.id + "''", st.trace, st.memory));
        m.states.back().phenomena = st.phenomena;
        out.fact.insert(out.dual.back());
    }
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        const Arrow& a = model.arrows[i];
        const bool in_event = event.count(i) > 0;
        for (bool from_dual : {false, true}) {
            Arrow b = a;
            b.from = from_dual ? out.dual[a.from] : out.single[a.from];
            b.to = route(in_event, from_dual) ? out.dual[a.to] : out.single[a.to];
            m.arrows.push_back(b);
        }
    }
    m.initial = out.single[model.initial];
    m.meta["initial-choice"] = model.states[model.initial].id + "' (" + model.states[model.initial].id +
                               "'' is equally valid)";
    return out;
}

} // namespace

DoubledModel event_to_fact(const Model& model, const EventSet& event)
{
    return double_states(model, event, [](bool in_event, bool) { return in_event; });
}

DoubledModel parity_model(const Model& model, const EventSet& event)
{
    return double_states(model, event, [](bool in_event, bool from_dual) { return in_event != from_dual; });
}

void check_partition(const Model& model, const Partition& partition)
{
    std::vector<int> seen(model.size(), 0);
    for (const auto& cls : partition) {
        if (cls.empty())
            throw Error("partition", "empty class");
        for (StateIndex s : cls) {
            if (s >= model.size())
                throw Error("partition", "state index out of range");
            if (seen[s]++)
                throw Error("partition", "state " + model.states[s].id + " is in two classes");
        }
    }
    StateSet missing;
    for (StateIndex s = 0; s < model.size(); ++s)
        if (!seen[s])
            missing.insert(s);
    if (!missing.empty())
        throw Error("partition", "states in no class: " + format_state_set(model, missing));
}

Model quotient(const Model& model, const Partition& partition, const std::vector<NamedEvent>& monitored)
{
    check_structure(model);
    check_partition(model, partition);
    std::vector<std::size_t> cls(model.size());
    for (std::size_t c = 0; c < partition.size(); ++c)
        for (StateIndex s : partition[c])
            cls[s] = c;

    std::vector<bool> covered(model.arrows.size(), false);
    for (const auto& e : monitored) {
        check_event(model, e.arrows);
        for (auto i : e.arrows)
            covered[i] = true;
    }
    std::vector<std::string> uncovered;
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        const Arrow& a = model.arrows[i];
        if (!covered[i] && cls[a.from] != cls[a.to] && !a.effective().is_zero())
            uncovered.push_back(model.states[a.from].id + "->" + model.states[a.to].id);
    }
    if (!uncovered.empty()) {
        std::sort(uncovered.begin(), uncovered.end());
        uncovered.erase(std::unique(uncovered.begin(), uncovered.end()), uncovered.end());
        std::string detail = "crossing arrows outside the monitored events:";
        for (const auto& u : uncovered)
            detail += " " + u;
        throw Error("coverage", detail);
    }

    Model q;
    q.kind = ModelKind::ed;
    q.observations = model.observations;
    q.meta = model.meta;
    for (const auto& members : partition) {
        std::vector<std::string> ids;
        for (StateIndex s : members)
            ids.push_back(model.states[s].id);
        std::sort(ids.begin(), ids.end());
        std::string name;
        for (const auto& id : ids)
            name += (name.empty() ? "" : "+") + id;

        std::map<SymbolIndex, ProbInterval> trace;
        bool first = true;
        bool traced = false;
        for (StateIndex s : members) {
            const auto& t = model.states[s].trace;
            if (t.empty())
                continue;
            traced = true;
            for (SymbolIndex o = 0; o < model.observations.size(); ++o) {
                ProbInterval p = t.count(o) ? t.at(o) : ProbInterval::zero();
                if (first)
                    trace[o] = p;
                else
                    trace[o] = hull(trace[o], p);
            }
            first = false;
        }
        if (traced)
            std::erase_if(trace, [](const auto& kv) { return kv.second.is_zero(); });
        q.add_state(name, trace);
    }
    q.initial = cls[model.initial];

    for (const auto& e : monitored) {
        const SymbolIndex label = q.intern_label(e.name);
        for (std::size_t c = 0; c < partition.size(); ++c) {
            // Per member: occurrence mass and mass per target class.
            struct Share
            {
                ProbInterval total = ProbInterval::zero();
                std::map<std::size_t, ProbInterval> to;
            };
            std::vector<Share> shares;
            for (StateIndex s : partition[c]) {
                Share sh;
                for (auto i : e.arrows) {
                    const Arrow& a = model.arrows[i];
                    if (a.from != s)
                        continue;
                    ProbInterval p = a.effective();
                    sh.total = {sh.total.lo + p.lo, sh.total.hi + p.hi};
                    ProbInterval& t = sh.to.try_emplace(cls[a.to], ProbInterval::zero()).first->second;
                    t = {t.lo + p.lo, t.hi + p.hi};
                }
                sh.total = {std::min(sh.total.lo, 1.0), std::min(sh.total.hi, 1.0)};
                shares.push_back(std::move(sh));
            }
            std::set<std::size_t> targets;
            for (const auto& sh : shares)
                for (const auto& [d, _] : sh.to)
                    targets.insert(d);
            if (targets.empty())
                continue;
            ProbInterval lp = shares.front().total;
            for (const auto& sh : shares)
                lp = hull(lp, sh.total);
            for (std::size_t d : targets) {
                std::optional<ProbInterval> ap;
                for (const auto& sh : shares) {
                    if (sh.total.is_zero())
                        continue;
                    ProbInterval in = sh.to.count(d) ? sh.to.at(d) : ProbInterval::zero();
                    ProbInterval rest = {sh.total.lo - in.lo, sh.total.hi - in.hi};
                    double lo_den = in.lo + rest.hi;
                    double hi_den = in.hi + rest.lo;
                    ProbInterval p(lo_den > 0 ? std::clamp(in.lo / lo_den, 0.0, 1.0) : 0.0,
                                   hi_den > 0 ? std::clamp(in.hi / hi_den, 0.0, 1.0) : 0.0);
                    ap = ap ? hull(*ap, p) : p;
                }
                if (!ap)
                    ap = ProbInterval::zero();
                q.add_arrow(c, label, d, lp, *ap);
            }
        }
    }
    if (q.labels.empty())
        q.intern_label(kTrueLabel);
    return q;
}

Partition parse_partition(std::string_view text, const Model& model)
{
    Partition partition;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        auto tok = tokenize(line);
        if (tok.empty())
            continue;
        StateSet cls;
        for (auto id : tok) {
            auto s = model.find_state(id);
            if (!s)
                throw Error("parse", "line " + std::to_string(line_no) + ": undeclared state '" + std::string(id) +
                                         "'");
            cls.insert(*s);
        }
        partition.push_back(std::move(cls));
    }
    check_partition(model, partition);
    return partition;
}

std::string serialize_partition(const Model& model, const Partition& partition)
{
    std::vector<std::string> lines;
    for (const auto& cls : partition)
        lines.push_back(format_state_set(model, cls));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines)
        out += l + "\n";
    return out;
}

} // namespace wm
