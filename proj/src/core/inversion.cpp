#include "worldmodel/inversion.hpp"

#include "worldmodel/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace wm {

double JourneyStatistics::inflow(const Model& model, StateIndex state) const
{
    double total = 0.0;
    for (std::size_t a : model.incoming(state))
        total += arrow_count[a];
    return total;
}

std::vector<double> arrow_weights(const Model& model, const Policy* policy)
{
    std::vector<double> w(model.arrows.size());
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        const Arrow& a = model.arrows[i];
        if (!a.arrow_prob.is_point())
            throw Error("precondition", "arrow " + model.states[a.from].id + " " + model.labels[a.label] + " " +
                                            model.states[a.to].id + " has interval ap " +
                                            format_interval(a.arrow_prob));
        double lp;
        if (policy) {
            lp = policy->at(a.from, a.label);
        } else if (a.label_prob.is_point()) {
            lp = a.label_prob.lo;
        } else {
            throw Error("precondition", "state " + model.states[a.from].id + " label " + model.labels[a.label] +
                                            " has interval lp " + format_interval(a.label_prob) +
                                            "; a policy is required");
        }
        w[i] = lp * a.arrow_prob.lo;
    }
    return w;
}

namespace {

using Adjacency = std::vector<std::vector<StateIndex>>;

Adjacency weighted_successors(const Model& model, const std::vector<double>& weights)
{
    Adjacency succ(model.size());
    for (std::size_t i = 0; i < model.arrows.size(); ++i)
        if (weights[i] > 0.0)
            succ[model.arrows[i].from].push_back(model.arrows[i].to);
    return succ;
}

std::vector<bool> sweep(const Adjacency& adj, StateIndex start)
{
    std::vector<bool> seen(adj.size(), false);
    std::vector<StateIndex> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        StateIndex s = stack.back();
        stack.pop_back();
        for (StateIndex t : adj[s])
            if (!seen[t]) {
                seen[t] = true;
                stack.push_back(t);
            }
    }
    return seen;
}

struct Reach
{
    std::vector<bool> forward;  // reachable from s0
    std::vector<bool> backward; // reaches s0
};

Reach reach(const Model& model, const std::vector<double>& weights)
{
    auto succ = weighted_successors(model, weights);
    Adjacency pred(model.size());
    for (StateIndex s = 0; s < succ.size(); ++s)
        for (StateIndex t : succ[s])
            pred[t].push_back(s);
    return {sweep(succ, model.initial), sweep(pred, model.initial)};
}

StateSet white_peak_of(const Model& model, const std::vector<double>& weights)
{
    auto r = reach(model, weights);
    StateSet peak;
    for (StateIndex s = 0; s < model.size(); ++s)
        if (!r.forward[s])
            peak.insert(s);
    return peak;
}

void require_no_white_peak(const Model& model, const std::vector<double>& weights)
{
    auto peak = white_peak_of(model, weights);
    if (!peak.empty())
        throw Error("white-peak", format_state_set(model, peak));
}

// Reversed probability per arrow: count / inflow(target). Targets without
// inflow get uniform inbound probabilities.
struct Reversal
{
    std::vector<double> prob;
    std::vector<bool> used;
    StateSet uniform_targets;
};

Reversal reverse_counts(const Model& model, const std::vector<double>& counts)
{
    Reversal r;
    r.prob.assign(model.arrows.size(), 0.0);
    r.used.assign(model.arrows.size(), false);
    for (StateIndex j = 0; j < model.size(); ++j) {
        auto in = model.incoming(j);
        if (in.empty())
            continue;
        double inflow = 0.0;
        for (std::size_t a : in)
            inflow += counts[a];
        if (inflow > 1e-300) {
            for (std::size_t a : in)
                if (counts[a] > 0.0) {
                    r.prob[a] = counts[a] / inflow;
                    r.used[a] = true;
                }
        } else {
            r.uniform_targets.insert(j);
            for (std::size_t a : in) {
                r.prob[a] = 1.0 / static_cast<double>(in.size());
                r.used[a] = true;
            }
        }
    }
    return r;
}

ProbInterval clamped_point(double p)
{
    return ProbInterval::point(std::clamp(p, 0.0, 1.0));
}

Model reversed_shell(const Model& model)
{
    Model out = model;
    out.arrows.clear();
    out.meta.erase("uniform-inbound");
    return out;
}

void note_uniform(Model& out, const Model& model, const StateSet& uniform)
{
    if (!uniform.empty())
        out.meta["uniform-inbound"] = format_state_set(model, uniform);
}

Model chain_from_reversal(const Model& model, const Reversal& r)
{
    Model out = reversed_shell(model);
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        if (!r.used[i])
            continue;
        const Arrow& a = model.arrows[i];
        out.add_arrow(a.to, a.label, a.from, ProbInterval::one(), clamped_point(r.prob[i]));
    }
    note_uniform(out, model, r.uniform_targets);
    return out;
}

// Splits reversed probabilities q into lp = P(previous label | target) and
// ap = q / lp. Arrows whose label group has lp == 0 get no ap.
struct Split
{
    std::vector<double> lp;
    std::vector<std::optional<double>> ap;
};

Split split_by_label(const Model& model, const Reversal& r)
{
    Split s;
    s.lp.assign(model.arrows.size(), 0.0);
    s.ap.assign(model.arrows.size(), std::nullopt);
    std::map<std::pair<StateIndex, SymbolIndex>, double> group;
    for (std::size_t i = 0; i < model.arrows.size(); ++i)
        if (r.used[i])
            group[{model.arrows[i].to, model.arrows[i].label}] += r.prob[i];
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        auto it = group.find({model.arrows[i].to, model.arrows[i].label});
        if (it == group.end())
            continue;
        s.lp[i] = it->second;
        if (it->second > 0.0)
            s.ap[i] = r.used[i] ? r.prob[i] / it->second : 0.0;
    }
    return s;
}

void require_chain_kind(const Model& model, const char* op)
{
    if (!is_single_label(model.kind))
        throw Error("precondition", std::string(op) + " expects a fomm or hmm model, got " +
                                        std::string(to_string(model.kind)));
}

// All vertices of { x in box : sum x = 1 }: every coordinate but one sits at
// an endpoint and the free one absorbs the remainder.
std::vector<std::vector<double>> simplex_box_vertices(const std::vector<ProbInterval>& box)
{
    const std::size_t n = box.size();
    if (std::all_of(box.begin(), box.end(), [](const ProbInterval& p) { return p.is_point(); })) {
        std::vector<double> x;
        for (const auto& p : box)
            x.push_back(p.lo);
        return {x};
    }
    std::vector<std::vector<double>> out;
    for (std::size_t free = 0; free < n; ++free) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << (n - 1)); ++mask) {
            std::vector<double> x(n);
            double sum = 0.0;
            std::size_t bit = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == free)
                    continue;
                x[k] = (mask >> bit++) & 1 ? box[k].hi : box[k].lo;
                sum += x[k];
            }
            x[free] = 1.0 - sum;
            if (!box[free].contains(x[free]))
                continue;
            x[free] = std::clamp(x[free], box[free].lo, box[free].hi);
            bool dup = std::any_of(out.begin(), out.end(), [&](const std::vector<double>& y) {
                for (std::size_t k = 0; k < n; ++k)
                    if (std::abs(y[k] - x[k]) > kTolerance)
                        return false;
                return true;
            });
            if (!dup)
                out.push_back(std::move(x));
        }
    }
    return out;
}

// A random point of { x in box : sum x = 1 }, assumed non-empty.
std::vector<double> sample_simplex_box(const std::vector<ProbInterval>& box, std::mt19937_64& rng)
{
    const std::size_t n = box.size();
    std::vector<double> x(n);
    double rest = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = box[k].lo;
        rest -= box[k].lo;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = order[i];
        double room = std::min(box[k].hi - x[k], std::max(rest, 0.0));
        double add = i + 1 == n ? room : std::uniform_real_distribution<double>(0.0, room)(rng);
        x[k] += add;
        rest -= add;
    }
    for (std::size_t k : order) {
        if (rest <= 0.0)
            break;
        double add = std::min(box[k].hi - x[k], rest);
        x[k] += add;
        rest -= add;
    }
    return x;
}

// One group of coordinates whose values must sum to one: the labels of a
// state (Agent) or the same-label arrows of a state (World).
struct Group
{
    std::vector<std::vector<std::size_t>> members; // arrow indices affected by each coordinate
    std::vector<ProbInterval> box;
    bool agent = false;
};

std::vector<Group> resolution_groups(const Model& model)
{
    std::vector<Group> groups;
    for (StateIndex s = 0; s < model.size(); ++s) {
        auto labels = model.labels_at(s);
        if (labels.empty())
            continue;
        Group agent;
        agent.agent = true;
        for (SymbolIndex l : labels) {
            agent.members.push_back(model.outgoing(s, l));
            agent.box.push_back(model.label_prob(s, l));
        }
        groups.push_back(std::move(agent));
        for (SymbolIndex l : labels) {
            Group world;
            for (std::size_t a : model.outgoing(s, l)) {
                world.members.push_back({a});
                world.box.push_back(model.arrows[a].arrow_prob);
            }
            groups.push_back(std::move(world));
        }
    }
    return groups;
}

struct Hulls
{
    std::vector<std::optional<ProbInterval>> lp, ap;
    std::size_t valid = 0;

    explicit Hulls(std::size_t n) : lp(n), ap(n) {}

    static void widen(std::optional<ProbInterval>& slot, double v)
    {
        v = std::clamp(v, 0.0, 1.0);
        slot = slot ? hull(*slot, ProbInterval::point(v)) : ProbInterval::point(v);
    }
};

void absorb_resolution(const Model& model, const std::vector<Group>& groups,
                       const std::vector<std::vector<double>>& values, Hulls& hulls)
{
    std::vector<double> lp(model.arrows.size(), 0.0), ap(model.arrows.size(), 0.0);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t k = 0; k < groups[g].members.size(); ++k)
            for (std::size_t a : groups[g].members[k])
                (groups[g].agent ? lp : ap)[a] = values[g][k];
    std::vector<double> weights(model.arrows.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        weights[i] = lp[i] * ap[i];
    if (!white_peak_of(model, weights).empty())
        return;
    auto stats = journey_statistics(model, weights);
    auto split = split_by_label(model, reverse_counts(model, stats.arrow_count));
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        Hulls::widen(hulls.lp[i], split.lp[i]);
        if (split.ap[i])
            Hulls::widen(hulls.ap[i], *split.ap[i]);
    }
    ++hulls.valid;
}

} // namespace

JourneyStatistics journey_statistics(const Model& model)
{
    return journey_statistics(model, arrow_weights(model));
}

JourneyStatistics journey_statistics(const Model& model, const std::vector<double>& weights)
{
    const std::size_t n = model.size();
    const StateIndex s0 = model.initial;
    auto r = reach(model, weights);

    JourneyStatistics st;
    st.arrow_count.assign(model.arrows.size(), 0.0);
    st.visits.assign(n, 0.0);
    st.absorbed.assign(n, 0.0);
    for (StateIndex s = 0; s < n; ++s)
        if (!r.backward[s])
            st.black_hole.insert(s);

    // Unknowns: states a journey can pass through without stopping.
    std::vector<std::optional<std::size_t>> slot(n);
    std::vector<StateIndex> inner;
    for (StateIndex s = 0; s < n; ++s)
        if (s != s0 && r.forward[s] && r.backward[s]) {
            slot[s] = inner.size();
            inner.push_back(s);
        }

    const auto m = static_cast<Eigen::Index>(inner.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        const Arrow& arrow = model.arrows[i];
        if (weights[i] <= 0.0 || !slot[arrow.to])
            continue;
        const auto row = static_cast<Eigen::Index>(*slot[arrow.to]);
        if (arrow.from == s0)
            b(row) += weights[i];
        else if (slot[arrow.from])
            a(row, static_cast<Eigen::Index>(*slot[arrow.from])) -= weights[i];
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    if (m > 0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (lu.rank() < m)
            throw Error("numeric", "singular flow system (rank " + std::to_string(lu.rank()) + " of " +
                                       std::to_string(m) + "); journeys do not terminate");
        v = lu.solve(b);
        double residual = (a * v - b).norm();
        if (!std::isfinite(residual) || residual > 1e-8 * (1.0 + b.norm()))
            throw Error("numeric", "flow system residual " + format_number(residual));
    }

    st.visits[s0] = 1.0;
    for (StateIndex s : inner)
        st.visits[s] = std::max(0.0, v(static_cast<Eigen::Index>(*slot[s])));
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        const Arrow& arrow = model.arrows[i];
        if (weights[i] <= 0.0 || (arrow.from != s0 && !slot[arrow.from]))
            continue;
        double c = st.visits[arrow.from] * weights[i];
        st.arrow_count[i] = c;
        if (arrow.to == s0)
            st.returns += c;
        else if (st.black_hole.count(arrow.to))
            st.absorbed[arrow.to] += c;
    }
    return st;
}

JourneyStatistics sample_journeys(const Model& model, const std::vector<double>& weights, std::size_t journeys,
                                  std::uint64_t seed)
{
    if (journeys == 0)
        throw Error("no-statistics", "zero journeys requested");
    const std::size_t n = model.size();
    const StateIndex s0 = model.initial;
    auto r = reach(model, weights);

    JourneyStatistics st;
    st.arrow_count.assign(model.arrows.size(), 0.0);
    st.visits.assign(n, 0.0);
    st.absorbed.assign(n, 0.0);
    for (StateIndex s = 0; s < n; ++s)
        if (!r.backward[s])
            st.black_hole.insert(s);

    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t i = 0; i < model.arrows.size(); ++i)
        if (weights[i] > 0.0)
            out[model.arrows[i].from].push_back(i);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::uint64_t step_limit = 200'000'000;
    std::uint64_t steps = 0;
    for (std::size_t j = 0; j < journeys; ++j) {
        StateIndex s = s0;
        st.visits[s0] += 1.0;
        for (;;) {
            if (++steps > step_limit)
                throw Error("numeric", "journeys do not terminate within the step limit");
            double x = u(rng);
            std::optional<std::size_t> chosen;
            for (std::size_t a : out[s]) {
                x -= weights[a];
                if (x < 0.0) {
                    chosen = a;
                    break;
                }
            }
            if (!chosen)
                break; // probability deficit: the walk leaves the model
            st.arrow_count[*chosen] += 1.0;
            s = model.arrows[*chosen].to;
            if (s == s0) {
                st.returns += 1.0;
                break;
            }
            if (st.black_hole.count(s)) {
                st.absorbed[s] += 1.0;
                break;
            }
            st.visits[s] += 1.0;
        }
    }
    const double scale = 1.0 / static_cast<double>(journeys);
    for (auto& c : st.arrow_count)
        c *= scale;
    for (auto& v : st.visits)
        v *= scale;
    for (auto& c : st.absorbed)
        c *= scale;
    st.returns *= scale;
    return st;
}

Model invert_chain(const Model& model)
{
    require_chain_kind(model, "invert_chain");
    auto weights = arrow_weights(model);
    require_no_white_peak(model, weights);
    auto stats = journey_statistics(model, weights);
    return chain_from_reversal(model, reverse_counts(model, stats.arrow_count));
}

Model monte_carlo_invert(const Model& model, std::size_t journeys, std::uint64_t seed)
{
    if (journeys == 0)
        throw Error("no-statistics", "zero journeys requested");
    require_chain_kind(model, "monte_carlo_invert");
    auto weights = arrow_weights(model);
    require_no_white_peak(model, weights);
    auto stats = sample_journeys(model, weights, journeys, seed);
    return chain_from_reversal(model, reverse_counts(model, stats.arrow_count));
}

Model invert_mdp_fixed(const Model& model, const Policy& policy)
{
    check_policy(model, policy);
    auto weights = arrow_weights(model, &policy);
    require_no_white_peak(model, weights);
    auto stats = journey_statistics(model, weights);
    auto rev = reverse_counts(model, stats.arrow_count);
    auto split = split_by_label(model, rev);

    Model out = reversed_shell(model);
    if (!is_single_label(model.kind))
        out.kind = ModelKind::mdp_fixed;
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        if (!rev.used[i] || !split.ap[i])
            continue;
        const Arrow& a = model.arrows[i];
        out.add_arrow(a.to, a.label, a.from, clamped_point(split.lp[i]), clamped_point(*split.ap[i]));
    }
    note_uniform(out, model, rev.uniform_targets);
    return out;
}

Model invert_mdp_fixed(const Model& model)
{
    return invert_mdp_fixed(model, policy_from_agent(model));
}

Model invert_mdp_plus(const Model& model, PlusMode mode, std::size_t budget, std::uint64_t seed)
{
    if (model.kind == ModelKind::ed)
        throw Error("precondition", "invert_mdp_plus does not apply to ed models");
    // Structural white peaks cannot be repaired by any resolution.
    auto structural = find_white_peak(model);
    if (!structural.empty())
        throw Error("white-peak", format_state_set(model, structural));

    auto groups = resolution_groups(model);
    Hulls hulls(model.arrows.size());
    std::size_t explored = 0;

    if (mode == PlusMode::vertex) {
        std::vector<std::vector<std::vector<double>>> vertices;
        double family = 1.0;
        for (const auto& g : groups) {
            vertices.push_back(simplex_box_vertices(g.box));
            if (vertices.back().empty())
                throw Error("precondition", "interval sums exclude any resolution");
            family *= static_cast<double>(vertices.back().size());
        }
        if (family > static_cast<double>(budget))
            throw Error("budget", format_number(family) + " vertex resolutions exceed the budget of " +
                                      std::to_string(budget));
        std::vector<std::size_t> digit(groups.size(), 0);
        std::vector<std::vector<double>> values(groups.size());
        for (;;) {
            for (std::size_t g = 0; g < groups.size(); ++g)
                values[g] = vertices[g][digit[g]];
            absorb_resolution(model, groups, values, hulls);
            ++explored;
            std::size_t g = 0;
            while (g < groups.size() && ++digit[g] == vertices[g].size())
                digit[g++] = 0;
            if (g == groups.size())
                break;
        }
    } else {
        if (budget == 0)
            throw Error("budget", "zero resolutions requested");
        std::mt19937_64 rng(seed);
        std::vector<std::vector<double>> values(groups.size());
        for (std::size_t k = 0; k < budget; ++k) {
            for (std::size_t g = 0; g < groups.size(); ++g)
                values[g] = sample_simplex_box(groups[g].box, rng);
            absorb_resolution(model, groups, values, hulls);
            ++explored;
        }
    }
    if (hulls.valid == 0)
        throw Error("budget", "no valid resolution among " + std::to_string(explored) + " explored");

    Model out = reversed_shell(model);
    out.kind = ModelKind::mdp_plus;
    for (std::size_t i = 0; i < model.arrows.size(); ++i) {
        if (!hulls.lp[i] || hulls.lp[i]->hi <= 0.0 || !hulls.ap[i] || hulls.ap[i]->hi <= 0.0)
            continue;
        const Arrow& a = model.arrows[i];
        out.add_arrow(a.to, a.label, a.from, *hulls.lp[i], *hulls.ap[i]);
    }
    out.meta["approximate"] = "true";
    out.meta["resolutions"] = std::to_string(hulls.valid);
    return out;
}

} // namespace wm
