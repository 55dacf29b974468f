#include "worldmodel/worldmodel.h"

#include "worldmodel/constructions.hpp"
#include "worldmodel/ed.hpp"
#include "worldmodel/error.hpp"
#include "worldmodel/format.hpp"
#include "worldmodel/graph.hpp"
#include "worldmodel/inversion.hpp"
#include "worldmodel/oracle.hpp"
#include "worldmodel/validate.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>

struct wm_model
{
    wm::Model model;
};

namespace {

thread_local std::string g_code;
thread_local std::string g_detail;

wm_status fail(wm_status status, std::string code, std::string detail)
{
    g_code = std::move(code);
    g_detail = std::move(detail);
    return status;
}

char* copy_out(const std::string& text)
{
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

// Runs `fn`, translating exceptions into status codes and the thread's last error.
template <typename Fn>
wm_status guarded(Fn&& fn)
{
    try {
        fn();
        return WM_OK;
    } catch (const wm::Error& e) {
        return fail(WM_FAILED, e.code(), e.detail());
    } catch (const std::bad_alloc&) {
        return fail(WM_INTERNAL, "out-of-memory", "allocation failed");
    } catch (const std::exception& e) {
        return fail(WM_INTERNAL, "internal", e.what());
    }
}

bool missing(const void* p)
{
    return p == nullptr;
}

wm_status null_argument(const char* name)
{
    return fail(WM_INVALID_ARGUMENT, "argument", std::string(name) + " is null");
}

wm_model* wrap(wm::Model m)
{
    return new wm_model{std::move(m)};
}

wm::EventSet resolve_event(const wm::Model& model, std::string_view spec)
{
    if (spec.find('>') != std::string_view::npos)
        return wm::parse_arrow_list(model, spec);
    return wm::event_by_label(model, spec);
}

wm::CollisionRule to_rule(wm_collision c)
{
    return c == WM_COLLISION_BOTH ? wm::CollisionRule::both_arrows : wm::CollisionRule::priority;
}

} // namespace

extern "C" {

const char* wm_version(void)
{
    return "0.1.0";
}

const char* wm_last_error_code(void)
{
    return g_code.c_str();
}

const char* wm_last_error_detail(void)
{
    return g_detail.c_str();
}

void wm_string_free(char* text)
{
    std::free(text);
}

wm_status wm_model_parse(const char* text, wm_model** out)
{
    if (missing(text) || missing(out))
        return null_argument("text or out");
    return guarded([&] { *out = wrap(wm::parse_model(text)); });
}

void wm_model_free(wm_model* model)
{
    delete model;
}

wm_status wm_model_serialize(const wm_model* model, char** out)
{
    if (missing(model) || missing(out))
        return null_argument("model or out");
    return guarded([&] { *out = copy_out(wm::serialize_model(model->model)); });
}

wm_status wm_model_export_dot(const wm_model* model, char** out)
{
    if (missing(model) || missing(out))
        return null_argument("model or out");
    return guarded([&] { *out = copy_out(wm::export_dot(model->model)); });
}

wm_status wm_model_state_count(const wm_model* model, size_t* out)
{
    if (missing(model) || missing(out))
        return null_argument("model or out");
    *out = model->model.size();
    return WM_OK;
}

wm_status wm_model_validate(const wm_model* model, int* ok, char** report)
{
    if (missing(model) || missing(ok) || missing(report))
        return null_argument("model, ok or report");
    return guarded([&] {
        const auto r = wm::validate(model->model);
        std::string text;
        for (const auto& v : r.violations)
            text += "violation: " + v + "\n";
        for (const auto& w : r.warnings)
            text += "warning: " + w + "\n";
        *ok = r.ok() ? 1 : 0;
        *report = copy_out(text);
    });
}

wm_status wm_model_analyze(const wm_model* model, char** report)
{
    if (missing(model) || missing(report))
        return null_argument("model or report");
    return guarded([&] {
        const auto r = wm::analyze_structure(model->model);
        auto set = [&](const wm::StateSet& s) {
            return s.empty() ? std::string("none") : wm::format_state_set(model->model, s);
        };
        *report = copy_out("white-peak: " + set(r.white_peak) + "\nblack-hole: " + set(r.black_hole) +
                           "\nredundant: " + set(r.redundant) +
                           "\nmemory-bits: " + std::to_string(wm::memory_bits(model->model)) + "\n");
    });
}

wm_status wm_model_invert(const wm_model* model, wm_invert_mode mode, const char* policy_text, uint64_t samples,
                          uint64_t seed, wm_model** out)
{
    if (missing(model) || missing(out))
        return null_argument("model or out");
    const wm::Model& m = model->model;
    switch (mode) {
    case WM_INVERT_EXACT:
        return guarded([&] {
            if (wm::is_single_label(m.kind))
                *out = wrap(wm::invert_chain(m));
            else if (policy_text)
                *out = wrap(wm::invert_mdp_fixed(m, wm::parse_policy(policy_text, m)));
            else
                *out = wrap(wm::invert_mdp_fixed(m));
        });
    case WM_INVERT_MONTE_CARLO:
        return guarded([&] { *out = wrap(wm::monte_carlo_invert(m, samples, seed)); });
    case WM_INVERT_PLUS_VERTEX:
        return guarded([&] { *out = wrap(wm::invert_mdp_plus(m, wm::PlusMode::vertex, samples, seed)); });
    case WM_INVERT_PLUS_SAMPLED:
        return guarded([&] { *out = wrap(wm::invert_mdp_plus(m, wm::PlusMode::monte_carlo, samples, seed)); });
    }
    return fail(WM_INVALID_ARGUMENT, "argument", "unknown inversion mode");
}

wm_status wm_model_double(const wm_model* model, int parity, const char* event, wm_model** out, char** fact)
{
    if (missing(model) || missing(event) || missing(out))
        return null_argument("model, event or out");
    return guarded([&] {
        const auto e = resolve_event(model->model, event);
        auto d = parity ? wm::parity_model(model->model, e) : wm::event_to_fact(model->model, e);
        if (fact)
            *fact = copy_out(wm::format_state_set(d.model, d.fact));
        *out = wrap(std::move(d.model));
    });
}

wm_status wm_model_quotient(const wm_model* model, const char* partition_text, const char* const* names,
                            const char* const* arrows, size_t count, wm_model** out)
{
    if (missing(model) || missing(partition_text) || missing(out) || (count > 0 && (missing(names) || missing(arrows))))
        return null_argument("model, partition, events or out");
    return guarded([&] {
        const auto partition = wm::parse_partition(partition_text, model->model);
        std::vector<wm::NamedEvent> monitored;
        for (size_t i = 0; i < count; ++i)
            monitored.push_back({names[i], resolve_event(model->model, arrows[i])});
        *out = wrap(wm::quotient(model->model, partition, monitored));
    });
}

wm_status wm_model_minimize(const wm_model* model, size_t depth, wm_model** out, char** partition)
{
    if (missing(model) || missing(out))
        return null_argument("model or out");
    return guarded([&] {
        auto r = wm::minimize_forward(model->model, depth);
        if (partition)
            *partition = copy_out(wm::serialize_partition(model->model, r.partition));
        *out = wrap(std::move(r.model));
    });
}

wm_status wm_model_minimal(const wm_model* model, size_t depth, wm_model** out)
{
    if (missing(model) || missing(out))
        return null_argument("model or out");
    return guarded([&] { *out = wrap(wm::minimal_model(model->model, depth).joined); });
}

wm_status wm_model_future(const wm_model* model, size_t depth, const char* policy_text, char** out)
{
    if (missing(model) || missing(out))
        return null_argument("model or out");
    return guarded([&] {
        std::optional<wm::Policy> policy;
        if (policy_text)
            policy = wm::parse_policy(policy_text, model->model);
        *out = copy_out(wm::serialize_future_set(
            wm::enumerate_future(model->model, depth, policy ? &*policy : nullptr)));
    });
}

wm_status wm_model_past(const wm_model* model, size_t depth, char** out)
{
    if (missing(model) || missing(out))
        return null_argument("model or out");
    return guarded([&] { *out = copy_out(wm::serialize_future_set(wm::enumerate_past(model->model, depth))); });
}

wm_status wm_simulate(const wm_model* model, size_t steps, uint64_t seed, const char* policy_text,
                      const char* preference_text, wm_collision collision, char** trajectory)
{
    if (missing(model) || missing(trajectory))
        return null_argument("model or trajectory");
    if (policy_text && preference_text)
        return fail(WM_INVALID_ARGUMENT, "argument", "give a policy or a preference, not both");
    return guarded([&] {
        wm::SimulationConfig cfg;
        cfg.steps = steps;
        cfg.seed = seed;
        cfg.collision = to_rule(collision);
        if (policy_text)
            cfg.policy = wm::parse_policy(policy_text, model->model);
        if (preference_text)
            cfg.preference = wm::parse_preference(preference_text, model->model);
        *trajectory = copy_out(wm::serialize_trajectory(wm::simulate(model->model, cfg)));
    });
}

wm_status wm_estimate_fomm(const char* trajectory, wm_model** out)
{
    if (missing(trajectory) || missing(out))
        return null_argument("trajectory or out");
    return guarded([&] { *out = wrap(wm::estimate_fomm(wm::parse_trajectory(trajectory))); });
}

wm_status wm_markov_check(const char* trajectory, size_t order, double significance, int* verdict, char** report)
{
    if (missing(trajectory) || missing(verdict) || missing(report))
        return null_argument("trajectory, verdict or report");
    return guarded([&] {
        const auto r = wm::check_markov(wm::parse_trajectory(trajectory), order, significance);
        *verdict = r.inconclusive() ? 2 : r.markov() ? 0 : 1;
        *report = copy_out(wm::format_markov_report(r));
    });
}

wm_status wm_policy_from_preference(const wm_model* model, const char* preference_text, char** policy)
{
    if (missing(model) || missing(preference_text) || missing(policy))
        return null_argument("model, preference or policy");
    return guarded([&] {
        const auto pref = wm::parse_preference(preference_text, model->model);
        *policy = copy_out(wm::serialize_policy(model->model, wm::preference_to_policy(model->model, pref)));
    });
}

wm_status wm_detect_direct(const char* trajectory, const char* charfn_text, const char* load_base, double threshold,
                           char** stream)
{
    if (missing(trajectory) || missing(charfn_text) || missing(stream))
        return null_argument("trajectory, charfns or stream");
    return guarded([&] {
        const std::string base = load_base ? load_base : ".";
        auto load = [&](const std::string& name) {
            return wm::read_text_file(name.starts_with('/') ? name : base + "/" + name);
        };
        const auto fns = wm::parse_charfns(charfn_text, load);
        *stream = copy_out(wm::serialize_event_stream(wm::detect_direct(wm::parse_trajectory(trajectory), fns, threshold)));
    });
}

wm_status wm_detect_indirect(const char* trajectory, size_t window, double threshold, char** stream, char** segments)
{
    if (missing(trajectory) || missing(stream))
        return null_argument("trajectory or stream");
    return guarded([&] {
        const auto d = wm::detect_indirect(wm::parse_trajectory(trajectory), window, threshold);
        if (segments) {
            std::string text;
            for (const auto& [b, e] : d.segments)
                text += "segment " + std::to_string(b) + " " + std::to_string(e) + "\n";
            *segments = copy_out(text);
        }
        *stream = copy_out(wm::serialize_event_stream(d.events));
    });
}

wm_status wm_track(const wm_model* model, const char* trajectory, const char* stream, wm_collision collision,
                   const char* derive_name, char** report, char** derived)
{
    if (missing(model) || missing(trajectory) || missing(stream) || missing(report))
        return null_argument("model, trajectory, stream or report");
    if (derive_name && missing(derived))
        return null_argument("derived");
    return guarded([&] {
        const wm::Model& m = model->model;
        wm::TrackConfig cfg;
        cfg.collision = to_rule(collision);
        const auto r = wm::track(m, wm::parse_trajectory(trajectory), wm::parse_event_stream(stream), cfg);
        std::ostringstream out;
        for (std::size_t t = 0; t < r.beliefs.size(); ++t) {
            out << "belief " << t;
            for (wm::StateIndex s = 0; s < m.size(); ++s)
                if (r.beliefs[t].mass[s] > 0.0)
                    out << ' ' << m.states[s].id << ':' << wm::format_number(r.beliefs[t].mass[s]);
            out << '\n';
        }
        for (const auto& w : r.warnings)
            out << "warning " << w << '\n';
        for (const auto& [state, obs] : r.memory)
            out << "memory " << state << ' ' << obs << '\n';
        if (!r.beliefs.empty())
            out << "state " << m.states[r.beliefs.back().argmax()].id << '\n';
        if (derive_name)
            *derived = copy_out(wm::serialize_event_stream(wm::derived_events(m, r.beliefs, derive_name)));
        *report = copy_out(out.str());
    });
}

wm_status wm_phenomenon_validity(const wm_model* model, const char* trajectory, const char* stream,
                                 size_t min_events, char** report)
{
    if (missing(model) || missing(trajectory) || missing(stream) || missing(report))
        return null_argument("model, trajectory, stream or report");
    return guarded([&] {
        const auto v = wm::phenomenon_validity(model->model, wm::parse_trajectory(trajectory),
                                               wm::parse_event_stream(stream), min_events);
        std::string text;
        for (const auto& [a, b] : v.intervals)
            text += "valid " + std::to_string(a) + " " + std::to_string(b) + "\n";
        text += std::string("permanent-so-far ") + (v.permanent_so_far ? "yes" : "no") + "\n";
        *report = copy_out(text);
    });
}

} // extern "C"
