#pragma once

// Shared test helpers: fixture loading and random model generators.

#include "worldmodel/format.hpp"
#include "worldmodel/model.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace wm::test {

inline Model load_model(const std::string& name)
{
    return parse_model(read_text_file(std::string(WM_TEST_DATA) + "/" + name));
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, double min_weight = 0.2)
{
    std::uniform_real_distribution<double> u(min_weight, 1.0);
    std::vector<double> w(n);
    double total = 0;
    for (auto& x : w)
        total += (x = u(rng));
    for (auto& x : w)
        x /= total;
    return w;
}

/// Distribution whose entries are multiples of 1/20, so that the decimals
/// written in a model file sum to exactly one.
inline std::vector<double> decimal_distribution(std::mt19937_64& rng, std::size_t n)
{
    std::vector<int> k(n, 1);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t r = n; r < 20; ++r)
        ++k[pick(rng)];
    std::vector<double> w;
    for (int x : k)
        w.push_back(x / 20.0);
    return w;
}

/// Strongly connected fomm chain: a Hamiltonian cycle backbone plus random
/// extra arrows, so there are no white peaks and no black holes.
inline Model random_chain(std::mt19937_64& rng, std::size_t n, std::size_t extra_out = 2)
{
    Model m;
    m.kind = ModelKind::fomm;
    m.intern_label(kTrueLabel);
    std::vector<StateIndex> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto o = m.intern_observation("o" + std::to_string(i));
        m.add_state("s" + std::to_string(i), {{o, ProbInterval::one()}});
        perm[i] = i;
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<StateIndex> targets{perm[(i + 1) % n]};
        for (std::size_t k = 0; k < extra_out; ++k) {
            StateIndex t = pick(rng);
            if (std::find(targets.begin(), targets.end(), t) == targets.end())
                targets.push_back(t);
        }
        auto p = random_distribution(rng, targets.size());
        for (std::size_t k = 0; k < targets.size(); ++k)
            m.add_arrow(perm[i], 0, targets[k], ProbInterval::one(), ProbInterval::point(p[k]));
    }
    m.initial = 0;
    return m;
}

/// Small random hmm (possibly with shared colours), point probabilities.
inline Model random_hmm(std::mt19937_64& rng, std::size_t n, std::size_t colours, std::size_t out_degree = 2,
                        bool decimal = false)
{
    Model m;
    m.kind = ModelKind::hmm;
    m.intern_label(kTrueLabel);
    for (std::size_t c = 0; c < colours; ++c)
        m.intern_observation("c" + std::to_string(c));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<std::size_t> colour(0, colours - 1);
    for (std::size_t i = 0; i < n; ++i)
        m.add_state("s" + std::to_string(i), {{i < colours ? i : colour(rng), ProbInterval::one()}});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<StateIndex> targets{(i + 1) % n};
        while (targets.size() < std::min(out_degree, n)) {
            StateIndex t = pick(rng);
            if (std::find(targets.begin(), targets.end(), t) == targets.end())
                targets.push_back(t);
        }
        auto p = decimal ? decimal_distribution(rng, targets.size()) : random_distribution(rng, targets.size());
        for (std::size_t k = 0; k < targets.size(); ++k)
            m.add_arrow(i, 0, targets[k], ProbInterval::one(), ProbInterval::point(p[k]));
    }
    return m;
}

/// Random valid model of a random kind, used by format round-trip properties.
inline Model random_model(std::mt19937_64& rng)
{
    static constexpr ModelKind kinds[] = {ModelKind::fomm, ModelKind::hmm,  ModelKind::mdp,     ModelKind::mdp_fixed,
                                          ModelKind::smdp, ModelKind::mdp_plus, ModelKind::ed};
    std::uniform_int_distribution<std::size_t> kind_pick(0, std::size(kinds) - 1);
    std::uniform_int_distribution<std::size_t> size_pick(1, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ModelKind kind = kinds[kind_pick(rng)];
    const std::size_t n = size_pick(rng);

    Model m;
    m.kind = kind;
    std::size_t n_obs = kind == ModelKind::fomm ? n : size_pick(rng);
    for (std::size_t o = 0; o < n_obs; ++o)
        m.intern_observation("v" + std::to_string(o));
    std::size_t n_labels = is_single_label(kind) ? 1 : size_pick(rng) % 3 + 1;
    if (is_single_label(kind))
        m.intern_label(kTrueLabel);
    else
        for (std::size_t l = 0; l < n_labels; ++l)
            m.intern_label((kind == ModelKind::ed ? "e" : "a") + std::to_string(l));

    std::uniform_int_distribution<std::size_t> obs_pick(0, n_obs - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::map<SymbolIndex, ProbInterval> trace;
        if (kind == ModelKind::fomm) {
            trace[i] = ProbInterval::one();
        } else if (kind == ModelKind::hmm) {
            trace[obs_pick(rng)] = ProbInterval::one();
        } else if (kind == ModelKind::ed || kind == ModelKind::mdp_plus || kind == ModelKind::smdp) {
            if (u(rng) < 0.2) {
                // no trace
            } else {
                for (SymbolIndex o = 0; o < n_obs; ++o)
                    trace[o] = ProbInterval(0.0, 1.0);
            }
        } else {
            auto p = random_distribution(rng, n_obs);
            for (SymbolIndex o = 0; o < n_obs; ++o)
                trace[o] = ProbInterval::point(p[o]);
        }
        StateIndex s = m.add_state("q" + std::to_string(i), trace, kind == ModelKind::ed && u(rng) < 0.3);
        if (kind == ModelKind::ed && u(rng) < 0.2)
            m.states[s].phenomena.push_back("rain");
    }
    std::uniform_int_distribution<std::size_t> state_pick(0, n - 1);
    m.initial = state_pick(rng);

    for (StateIndex s = 0; s < n; ++s) {
        std::vector<SymbolIndex> acts;
        for (SymbolIndex l = 0; l < m.labels.size(); ++l)
            if (l == 0 || u(rng) < 0.6)
                acts.push_back(l);
        auto agent = random_distribution(rng, acts.size());
        for (std::size_t k = 0; k < acts.size(); ++k) {
            ProbInterval lp = ProbInterval::one();
            switch (kind) {
            case ModelKind::mdp:
            case ModelKind::smdp:
                lp = ProbInterval::unknown();
                break;
            case ModelKind::mdp_fixed:
                lp = ProbInterval::point(agent[k]);
                break;
            case ModelKind::mdp_plus:
                lp = ProbInterval(agent[k] * 0.5, std::min(1.0, agent[k] * 1.5));
                break;
            case ModelKind::ed:
                lp = ProbInterval(0.0, u(rng));
                break;
            default:
                break;
            }
            std::vector<StateIndex> targets{state_pick(rng)};
            if (u(rng) < 0.5 && n > 1) {
                StateIndex t = state_pick(rng);
                if (t != targets[0])
                    targets.push_back(t);
            }
            auto world = random_distribution(rng, targets.size());
            for (std::size_t t = 0; t < targets.size(); ++t) {
                ProbInterval ap = ProbInterval::point(world[t]);
                if (kind == ModelKind::smdp)
                    ap = targets.size() == 1 ? ProbInterval::one() : ProbInterval::unknown();
                else if (kind == ModelKind::mdp_plus || kind == ModelKind::ed)
                    ap = ProbInterval(world[t] * 0.5, std::min(1.0, world[t] * 1.5));
                m.add_arrow(s, acts[k], targets[t], lp, ap);
            }
        }
    }
    if (kind == ModelKind::ed)
        for (SymbolIndex l = 0; l < m.labels.size(); ++l)
            if (u(rng) < 0.5)
                m.priorities[l] = static_cast<int>(l) + 1;
    if (u(rng) < 0.2)
        m.meta["note"] = "generated model";
    return m;
}

} // namespace wm::test
