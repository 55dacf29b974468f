// wmodel: command-line front end over the worldmodel C library.

#include "worldmodel/worldmodel.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError
{
    std::string message;
};

struct LibraryError
{
    wm_status status;
};

std::string read_input(const std::string& path)
{
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError{"cannot read '" + path + "'"};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UsageError{"cannot write '" + path + "'"};
    out << text;
}

void check(wm_status status)
{
    if (status != WM_OK)
        throw LibraryError{status};
}

// Owns a string handed out by the library.
class Text
{
public:
    Text() = default;
    Text(const Text&) = delete;
    Text& operator=(const Text&) = delete;
    ~Text() { wm_string_free(p_); }

    char** out() { return &p_; }
    [[nodiscard]] std::string str() const { return p_ ? p_ : ""; }

private:
    char* p_ = nullptr;
};

using ModelPtr = std::unique_ptr<wm_model, decltype(&wm_model_free)>;

ModelPtr load_model(const std::string& path)
{
    const std::string text = read_input(path);
    wm_model* m = nullptr;
    check(wm_model_parse(text.c_str(), &m));
    return {m, &wm_model_free};
}

ModelPtr adopt(wm_model* m)
{
    return {m, &wm_model_free};
}

std::string serialize(const wm_model* m)
{
    Text t;
    check(wm_model_serialize(m, t.out()));
    return t.str();
}

const char* c_str_or_null(const std::optional<std::string>& s)
{
    return s ? s->c_str() : nullptr;
}

wm_collision parse_collision(const std::string& rule)
{
    return rule == "both" ? WM_COLLISION_BOTH : WM_COLLISION_PRIORITY;
}

std::string dirname_of(const std::string& path)
{
    auto slash = path.find_last_of('/');
    return slash == std::string::npos ? "." : path.substr(0, slash);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"World-model toolkit: validate, invert, transform, simulate and track world models"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string output = "-";
    app.add_option("-o,--output", output, "Output file (default: standard output)");

    std::string model_path, traj_path;
    std::size_t depth = 6;
    std::optional<std::uint64_t> seed;
    std::string result;
    std::function<void()> action;

    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "Random seed"); };

    // validate
    auto* validate = app.add_subcommand("validate", "Check a model against the rules of its kind");
    validate->add_option("model", model_path, "Model file")->required();
    validate->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            int ok = 0;
            Text report;
            check(wm_model_validate(m.get(), &ok, report.out()));
            if (!ok) {
                std::cout << report.str();
                std::size_t n = 0;
                for (auto pos = report.str().find("violation:"); pos != std::string::npos;
                     pos = report.str().find("violation:", pos + 1))
                    ++n;
                std::cerr << "error: validation: " << n << " violation(s)\n";
                throw LibraryError{WM_FAILED};
            }
            result = "ok\n" + report.str();
        };
    });

    // analyze
    auto* analyze = app.add_subcommand("analyze", "White peak, black hole and memory size");
    analyze->add_option("model", model_path, "Model file")->required();
    analyze->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            Text report;
            check(wm_model_analyze(m.get(), report.out()));
            result = report.str();
        };
    });

    // invert
    std::string invert_mode = "exact";
    std::uint64_t journeys = 100000, budget = 4096;
    std::optional<std::string> policy_path;
    auto* invert = app.add_subcommand("invert", "Model of the past");
    invert->add_option("model", model_path, "Model file")->required();
    invert->add_option("--mode", invert_mode, "exact, monte-carlo, vertex or sampled")
        ->check(CLI::IsMember({"exact", "monte-carlo", "vertex", "sampled"}));
    invert->add_option("--journeys", journeys, "Journeys for monte-carlo");
    invert->add_option("--budget", budget, "Resolutions for vertex/sampled");
    invert->add_option("--policy", policy_path, "Policy file for decision kinds");
    add_seed(invert);
    invert->callback([&] {
        action = [&] {
            wm_invert_mode mode = WM_INVERT_EXACT;
            std::uint64_t samples = 0;
            if (invert_mode == "monte-carlo") {
                mode = WM_INVERT_MONTE_CARLO;
                samples = journeys;
            } else if (invert_mode == "vertex") {
                mode = WM_INVERT_PLUS_VERTEX;
                samples = budget;
            } else if (invert_mode == "sampled") {
                mode = WM_INVERT_PLUS_SAMPLED;
                samples = budget;
            }
            if ((mode == WM_INVERT_MONTE_CARLO || mode == WM_INVERT_PLUS_SAMPLED) && !seed)
                throw UsageError{"--seed is required for --mode " + invert_mode};
            auto m = load_model(model_path);
            std::optional<std::string> policy;
            if (policy_path)
                policy = read_input(*policy_path);
            wm_model* out = nullptr;
            check(wm_model_invert(m.get(), mode, c_str_or_null(policy), samples, seed.value_or(0), &out));
            result = serialize(adopt(out).get());
        };
    });

    // double
    std::string double_mode = "fact", event;
    std::optional<std::string> fact_out;
    auto* dbl = app.add_subcommand("double", "Fact/event or parity doubling");
    dbl->add_option("model", model_path, "Model file")->required();
    dbl->add_option("--mode", double_mode, "fact or parity")->check(CLI::IsMember({"fact", "parity"}));
    dbl->add_option("--event", event, "Label name or from>to,... arrow list")->required();
    dbl->add_option("--fact-out", fact_out, "Write the fact's state ids here");
    dbl->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            wm_model* out = nullptr;
            Text fact;
            check(wm_model_double(m.get(), double_mode == "parity", event.c_str(), &out, fact.out()));
            auto owned = adopt(out);
            if (fact_out)
                write_file(*fact_out, fact.str() + "\n");
            result = serialize(owned.get());
        };
    });

    // quotient
    std::string classes_path;
    std::vector<std::string> monitors;
    auto* quotient = app.add_subcommand("quotient", "Event-driven model over a partition of the states");
    quotient->add_option("model", model_path, "Model file")->required();
    quotient->add_option("--classes", classes_path, "Partition file, one class per line")->required();
    quotient->add_option("--monitor", monitors, "name=<label or arrow list>, repeatable");
    quotient->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            const std::string classes = read_input(classes_path);
            std::vector<std::string> names, arrows;
            for (const auto& mon : monitors) {
                auto eq = mon.find('=');
                if (eq == std::string::npos || eq == 0)
                    throw UsageError{"--monitor expects name=<arrows>, got '" + mon + "'"};
                names.push_back(mon.substr(0, eq));
                arrows.push_back(mon.substr(eq + 1));
            }
            std::vector<const char*> n, a;
            for (std::size_t i = 0; i < names.size(); ++i) {
                n.push_back(names[i].c_str());
                a.push_back(arrows[i].c_str());
            }
            wm_model* out = nullptr;
            check(wm_model_quotient(m.get(), classes.c_str(), n.data(), a.data(), n.size(), &out));
            result = serialize(adopt(out).get());
        };
    });

    // minimize
    std::optional<std::string> partition_out;
    auto* minimize = app.add_subcommand("minimize", "Merge states with the same future");
    minimize->add_option("model", model_path, "Model file")->required();
    minimize->add_option("--depth", depth, "Refinement rounds");
    minimize->add_option("--partition-out", partition_out, "Write the partition here");
    minimize->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            wm_model* out = nullptr;
            Text partition;
            check(wm_model_minimize(m.get(), depth, &out, partition.out()));
            auto owned = adopt(out);
            if (partition_out)
                write_file(*partition_out, partition.str());
            result = serialize(owned.get());
        };
    });

    // minimal
    auto* minimal = app.add_subcommand("minimal", "Joined forward/backward minimal model");
    minimal->add_option("model", model_path, "Model file")->required();
    minimal->add_option("--depth", depth, "Determinization depth and refinement rounds");
    minimal->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            wm_model* out = nullptr;
            check(wm_model_minimal(m.get(), depth, &out));
            result = serialize(adopt(out).get());
        };
    });

    // simulate
    std::size_t steps = 1000;
    std::optional<std::string> preference_path;
    std::string collision = "priority";
    auto* simulate = app.add_subcommand("simulate", "Sample a trajectory");
    simulate->add_option("model", model_path, "Model file")->required();
    simulate->add_option("--steps", steps, "Number of steps");
    auto* sim_policy = simulate->add_option("--policy", policy_path, "Policy file");
    simulate->add_option("--preference", preference_path, "Preference file")->excludes(sim_policy);
    simulate->add_option("--collision", collision, "priority or both")->check(CLI::IsMember({"priority", "both"}));
    add_seed(simulate);
    simulate->callback([&] {
        action = [&] {
            if (!seed)
                throw UsageError{"--seed is required for simulate"};
            auto m = load_model(model_path);
            std::optional<std::string> policy, preference;
            if (policy_path)
                policy = read_input(*policy_path);
            if (preference_path)
                preference = read_input(*preference_path);
            Text traj;
            check(wm_simulate(m.get(), steps, *seed, c_str_or_null(policy), c_str_or_null(preference),
                              parse_collision(collision), traj.out()));
            result = traj.str();
        };
    });

    // future / past
    auto* future = app.add_subcommand("future", "Possible futures with their probabilities");
    future->add_option("model", model_path, "Model file")->required();
    future->add_option("--depth", depth, "Development length");
    future->add_option("--policy", policy_path, "Policy file");
    future->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            std::optional<std::string> policy;
            if (policy_path)
                policy = read_input(*policy_path);
            Text out;
            check(wm_model_future(m.get(), depth, c_str_or_null(policy), out.out()));
            result = out.str();
        };
    });
    auto* past = app.add_subcommand("past", "Possible pasts with their probabilities");
    past->add_option("model", model_path, "Model file")->required();
    past->add_option("--depth", depth, "Development length");
    past->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            Text out;
            check(wm_model_past(m.get(), depth, out.out()));
            result = out.str();
        };
    });

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Fully observable model from a trajectory");
    estimate->add_option("trajectory", traj_path, "Trajectory file")->required();
    estimate->callback([&] {
        action = [&] {
            const std::string traj = read_input(traj_path);
            wm_model* out = nullptr;
            check(wm_estimate_fomm(traj.c_str(), &out));
            result = serialize(adopt(out).get());
        };
    });

    // markov-check
    std::size_t order = 1;
    double significance = 0.01;
    auto* markov = app.add_subcommand("markov-check", "Chi-squared test of the Markov property");
    markov->add_option("trajectory", traj_path, "Trajectory file")->required();
    markov->add_option("--order", order, "Context length");
    markov->add_option("--significance", significance, "Test level");
    markov->callback([&] {
        action = [&] {
            const std::string traj = read_input(traj_path);
            int verdict = 0;
            Text report;
            check(wm_markov_check(traj.c_str(), order, significance, &verdict, report.out()));
            result = report.str();
        };
    });

    // policy-from-preference
    std::string pref_path;
    auto* royal = app.add_subcommand("policy-from-preference", "Royal policy of a preference order");
    royal->add_option("model", model_path, "Model file")->required();
    royal->add_option("--preference", pref_path, "Preference file")->required();
    royal->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            const std::string pref = read_input(pref_path);
            Text policy;
            check(wm_policy_from_preference(m.get(), pref.c_str(), policy.out()));
            result = policy.str();
        };
    });

    // detect
    std::optional<std::string> direct_path, segments_out;
    bool indirect = false;
    std::size_t window = 20;
    double threshold = 0.5;
    auto* detect = app.add_subcommand("detect", "Event occurrences in a trajectory");
    detect->add_option("trajectory", traj_path, "Trajectory file")->required();
    auto* direct_opt = detect->add_option("--direct", direct_path, "Characteristic function file");
    detect->add_flag("--indirect", indirect, "Change-point detection")->excludes(direct_opt);
    detect->add_option("--window", window, "Window length for --indirect");
    detect->add_option("--threshold", threshold, "Occurrence threshold");
    detect->add_option("--segments-out", segments_out, "Write --indirect segments here");
    detect->callback([&] {
        action = [&] {
            if (!indirect && !direct_path)
                throw UsageError{"detect needs --direct <file> or --indirect"};
            const std::string traj = read_input(traj_path);
            Text stream;
            if (indirect) {
                Text segments;
                check(wm_detect_indirect(traj.c_str(), window, threshold, stream.out(), segments.out()));
                if (segments_out)
                    write_file(*segments_out, segments.str());
            } else {
                const std::string fns = read_input(*direct_path);
                check(wm_detect_direct(traj.c_str(), fns.c_str(), dirname_of(*direct_path).c_str(), threshold,
                                       stream.out()));
            }
            result = stream.str();
        };
    });

    // track
    std::string events_path;
    std::optional<std::string> derive_name, derived_out;
    bool validity = false;
    std::size_t min_events = 1;
    auto* trk = app.add_subcommand("track", "Follow an event-driven model along a trajectory");
    trk->add_option("trajectory", traj_path, "Trajectory file")->required();
    trk->add_option("--model", model_path, "Event-driven model file")->required();
    trk->add_option("--events", events_path, "Event stream file")->required();
    trk->add_option("--collision", collision, "priority or both")->check(CLI::IsMember({"priority", "both"}));
    trk->add_option("--derive", derive_name, "Emit derived events under this model name");
    trk->add_option("--derived-out", derived_out, "Write derived events here (default: after the report)");
    trk->add_flag("--validity", validity, "Report the intervals on which the model holds");
    trk->add_option("--min-events", min_events, "Confirmed events an interval needs");
    trk->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            const std::string traj = read_input(traj_path);
            const std::string events = read_input(events_path);
            Text report;
            if (validity) {
                check(wm_phenomenon_validity(m.get(), traj.c_str(), events.c_str(), min_events, report.out()));
                result = report.str();
                return;
            }
            Text derived;
            check(wm_track(m.get(), traj.c_str(), events.c_str(), parse_collision(collision),
                           c_str_or_null(derive_name), report.out(), derive_name ? derived.out() : nullptr));
            result = report.str();
            if (derive_name) {
                if (derived_out)
                    write_file(*derived_out, derived.str());
                else
                    result += derived.str();
            }
        };
    });

    // export-dot
    auto* dot = app.add_subcommand("export-dot", "Graphviz rendering");
    dot->add_option("model", model_path, "Model file")->required();
    dot->callback([&] {
        action = [&] {
            auto m = load_model(model_path);
            Text out;
            check(wm_model_export_dot(m.get(), out.out()));
            result = out.str();
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        action();
        if (output == "-")
            std::cout << result;
        else
            write_file(output, result);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "error: usage: " << e.message << "\n";
        return kExitUsage;
    } catch (const LibraryError& e) {
        if (*wm_last_error_code() != '\0' && e.status != WM_OK)
            std::cerr << "error: " << wm_last_error_code() << ": " << wm_last_error_detail() << "\n";
        return e.status == WM_INVALID_ARGUMENT ? kExitUsage : kExitFailure;
    }
}
