#include "doctest.h"
#include "fixtures.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/graph.hpp"
#include "worldmodel/validate.hpp"

using namespace wm;

namespace {

StateSet ids(const Model& m, std::initializer_list<const char*> names)
{
    StateSet out;
    for (auto n : names)
        out.insert(m.state_index(n));
    return out;
}

// Brute-force oracles: union of every successor-closed (resp.
// predecessor-closed) subset that excludes the initial state.
StateSet brute_black_hole(const Model& m)
{
    auto succ = structural_successors(m);
    const std::size_t n = m.size();
    StateSet all;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (mask & (1u << m.initial))
            continue;
        bool closed = true;
        for (StateIndex s = 0; s < n && closed; ++s)
            if (mask & (1u << s))
                for (StateIndex t : succ[s])
                    closed = closed && (mask & (1u << t));
        if (closed)
            for (StateIndex s = 0; s < n; ++s)
                if (mask & (1u << s))
                    all.insert(s);
    }
    return all;
}

StateSet brute_white_peak(const Model& m)
{
    auto succ = structural_successors(m);
    const std::size_t n = m.size();
    StateSet all;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (mask & (1u << m.initial))
            continue;
        bool closed = true;
        for (StateIndex s = 0; s < n && closed; ++s)
            if (!(mask & (1u << s)))
                for (StateIndex t : succ[s])
                    closed = closed && !(mask & (1u << t));
        if (closed)
            for (StateIndex s = 0; s < n; ++s)
                if (mask & (1u << s))
                    all.insert(s);
    }
    return all;
}

Model random_sparse(std::mt19937_64& rng, std::size_t n)
{
    Model m;
    m.kind = ModelKind::hmm;
    m.intern_label(kTrueLabel);
    m.intern_observation("o");
    for (std::size_t i = 0; i < n; ++i)
        m.add_state("s" + std::to_string(i), {{0, ProbInterval::one()}});
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<int> degree(0, 2);
    for (StateIndex s = 0; s < n; ++s) {
        int d = degree(rng);
        for (int k = 0; k < d; ++k)
            m.add_arrow(s, 0, pick(rng), ProbInterval::one(), ProbInterval::point(1.0 / d));
    }
    m.initial = pick(rng);
    return m;
}

} // namespace

TEST_CASE("figure-3 structure")
{
    auto m = test::load_model("fig3.model");
    auto r = analyze_structure(m);
    CHECK(r.white_peak == ids(m, {"1"}));
    CHECK(r.black_hole == ids(m, {"3", "4"}));
    CHECK(r.redundant.empty());
    CHECK(format_state_set(m, r.black_hole) == "3 4");
}

TEST_CASE("strongly connected model has neither")
{
    auto r = analyze_structure(test::load_model("cycle3.model"));
    CHECK(r.white_peak.empty());
    CHECK(r.black_hole.empty());
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        auto c = analyze_structure(test::random_chain(rng, 3 + i % 6));
        CHECK(c.white_peak.empty());
        CHECK(c.black_hole.empty());
    }
}

TEST_CASE("absorbing state and disjoint components")
{
    auto m = parse_model(R"(model hmm
obs o
state a initial trace o=1
state b trace o=1
state z trace o=1
state x trace o=1
state y trace o=1
arrow a true b ap=0.5
arrow a true z ap=0.5
arrow b true a ap=1
arrow z true z ap=1
arrow x true y ap=1
arrow y true x ap=1
)");
    auto r = analyze_structure(m);
    CHECK(r.black_hole == ids(m, {"z", "x", "y"}));
    CHECK(r.white_peak == ids(m, {"x", "y"}));
    CHECK(r.redundant == ids(m, {"x", "y"}));

    auto cleaned = remove_redundant(m);
    CHECK(cleaned.size() == 3);
    CHECK(cleaned.arrows.size() == 4);
    CHECK(cleaned.states[cleaned.initial].id == "a");
    auto again = analyze_structure(cleaned);
    CHECK(again.redundant.empty());
    CHECK(format_state_set(cleaned, again.black_hole) == "z");
}

TEST_CASE("zero-probability arrows are not structural edges")
{
    auto m = parse_model(R"(model mdp-plus
obs o
act a
state s initial trace o=1
state t trace o=1
arrow s a s lp=1 ap=[0.5,1]
arrow s a t lp=1 ap=[0,0.5]
arrow t a s lp=[0,0] ap=1
arrow t a t lp=1 ap=1
)");
    auto r = analyze_structure(m);
    CHECK(r.black_hole == ids(m, {"t"}));
    CHECK(r.white_peak.empty());
}

TEST_CASE("remove_redundant keeps deficits inside white peaks as warnings")
{
    auto m = parse_model(R"(model fomm
obs 1 2 3 4 5
state 1 trace 1=1
state 2 initial trace 2=1
state 3 trace 3=1
state 4 trace 4=1
state 5 trace 5=1
arrow 1 true 2 ap=0.8
arrow 1 true 5 ap=0.2
arrow 5 true 5 ap=1
arrow 2 true 2 ap=0.5
arrow 2 true 3 ap=0.5
arrow 3 true 4 ap=1
arrow 4 true 3 ap=1
)");
    auto r = analyze_structure(m);
    CHECK(r.redundant == ids(m, {"5"}));
    auto cleaned = remove_redundant(m);
    CHECK(cleaned.size() == 4);
    // The cleaned model only lacks the observation-5 state, so compare rules
    // other than the fomm bijection.
    cleaned.observations.pop_back();
    auto report = validate(cleaned);
    CHECK(report.violations.empty());
    CHECK(report.warnings.size() == 1);
}

TEST_CASE("maximality against brute force on small random graphs")
{
    std::mt19937_64 rng(77);
    for (int i = 0; i < 300; ++i) {
        auto m = random_sparse(rng, 2 + i % 9);
        auto r = analyze_structure(m);
        CHECK(r.black_hole == brute_black_hole(m));
        CHECK(r.white_peak == brute_white_peak(m));
        CHECK_FALSE(r.black_hole.count(m.initial));
        CHECK_FALSE(r.white_peak.count(m.initial));

        auto succ = structural_successors(m);
        for (StateIndex s = 0; s < m.size(); ++s)
            for (StateIndex t : succ[s]) {
                if (r.black_hole.count(s))
                    CHECK(r.black_hole.count(t));
                if (r.white_peak.count(t))
                    CHECK(r.white_peak.count(s));
            }
    }
}

TEST_CASE("remove_redundant is idempotent")
{
    std::mt19937_64 rng(78);
    for (int i = 0; i < 200; ++i) {
        auto m = random_sparse(rng, 2 + i % 9);
        auto once = remove_redundant(m);
        auto twice = remove_redundant(once);
        CHECK(serialize_model(once) == serialize_model(twice));
    }
}

TEST_CASE("restrict_states refuses to drop the initial state")
{
    auto m = test::load_model("coin.model");
    CHECK_THROWS_AS(restrict_states(m, {m.state_index("W")}), Error);
}
