#include "worldmodel/ed.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <regex>

namespace wm {

namespace {

std::string join_window(const Trajectory& traj, std::size_t begin, std::size_t end)
{
    std::string out;
    for (std::size_t i = begin; i < end; ++i)
        out += (i == begin ? "" : ",") + traj.steps[i].obs;
    return out;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what)
{
    throw Error("parse", "line " + std::to_string(line) + ": " + what);
}

std::size_t word_length(std::string_view word)
{
    if (word == "-")
        return 0;
    return static_cast<std::size_t>(std::count(word.begin(), word.end(), ',')) + 1;
}

std::size_t parse_count(std::size_t line, std::string_view text)
{
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        fail_line(line, "malformed count '" + std::string(text) + "'");
    return value;
}

void parse_table(CharFn& fn, std::string_view text)
{
    std::size_t line_no = 0;
    bool first = true;
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
        if (tok.size() != 3)
            fail_line(line_no, "`<past> <future> <p>` expected in table of " + fn.name);
        const std::size_t past = word_length(tok[0]), future = word_length(tok[1]);
        if (first) {
            fn.past_window = past;
            fn.future_window = future;
            first = false;
        } else if (past != fn.past_window || future != fn.future_window) {
            fail_line(line_no, "window lengths differ from the first row of table " + fn.name);
        }
        std::string p(tok[0] == "-" ? "" : tok[0]), f(tok[1] == "-" ? "" : tok[1]);
        fn.table[{p, f}] = parse_interval(tok[2]);
    }
}

} // namespace

ProbInterval CharFn::evaluate(const Trajectory& trajectory, std::size_t t) const
{
    const std::size_t n = trajectory.size();
    if (t >= n || t < past_window || t + future_window > n)
        return ProbInterval::unknown();
    switch (kind) {
    case CharFnKind::action_match: {
        auto labels = step_labels(trajectory.steps[t].act);
        bool hit = std::find(labels.begin(), labels.end(), symbol) != labels.end();
        return ProbInterval::point(hit ? 1.0 : 0.0);
    }
    case CharFnKind::obs_match:
        return ProbInterval::point(trajectory.steps[t].obs == symbol ? 1.0 : 0.0);
    case CharFnKind::pattern: {
        const std::regex past(past_pattern), future(future_pattern);
        bool hit = std::regex_match(join_window(trajectory, t - past_window, t), past) &&
                   std::regex_match(join_window(trajectory, t, t + future_window), future);
        return ProbInterval::point(hit ? 1.0 : 0.0);
    }
    case CharFnKind::table: {
        auto it = table.find({join_window(trajectory, t - past_window, t), join_window(trajectory, t, t + future_window)});
        return it == table.end() ? ProbInterval::unknown() : it->second;
    }
    }
    return ProbInterval::unknown();
}

std::vector<CharFn> parse_charfns(std::string_view text, const std::function<std::string(const std::string&)>& load)
{
    std::vector<CharFn> fns;
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
        if (tok[0] != "charfn" || tok.size() < 3)
            fail_line(line_no, "`charfn <name> <definition>` expected");
        CharFn fn;
        fn.name = tok[1];
        const std::string_view def = tok[2];
        if (def.starts_with("action=")) {
            fn.kind = CharFnKind::action_match;
            fn.symbol = def.substr(7);
        } else if (def.starts_with("obs=")) {
            fn.kind = CharFnKind::obs_match;
            fn.symbol = def.substr(4);
        } else if (def == "pattern") {
            fn.kind = CharFnKind::pattern;
            std::optional<std::size_t> pw, fw;
            for (std::size_t i = 3; i < tok.size(); ++i) {
                auto eq = tok[i].find('=');
                if (eq == std::string_view::npos)
                    fail_line(line_no, "unexpected '" + std::string(tok[i]) + "'");
                auto key = tok[i].substr(0, eq), value = tok[i].substr(eq + 1);
                if (key == "past")
                    fn.past_pattern = value;
                else if (key == "future")
                    fn.future_pattern = value;
                else if (key == "past-window")
                    pw = parse_count(line_no, value);
                else if (key == "future-window")
                    fw = parse_count(line_no, value);
                else
                    fail_line(line_no, "unknown key '" + std::string(key) + "'");
            }
            fn.past_window = pw.value_or(fn.past_pattern.empty() ? 0 : word_length(fn.past_pattern));
            fn.future_window = fw.value_or(fn.future_pattern.empty() ? 0 : word_length(fn.future_pattern));
            try {
                std::regex check_past(fn.past_pattern), check_future(fn.future_pattern);
            } catch (const std::regex_error& e) {
                fail_line(line_no, std::string("bad regex: ") + e.what());
            }
        } else if (def == "table") {
            fn.kind = CharFnKind::table;
            if (tok.size() != 4)
                fail_line(line_no, "`charfn <name> table <file>` expected");
            if (!load)
                fail_line(line_no, "table files cannot be loaded here");
            parse_table(fn, load(std::string(tok[3])));
        } else {
            fail_line(line_no, "unknown definition '" + std::string(def) + "'");
        }
        if (def != "pattern" && def != "table" && tok.size() != 3)
            fail_line(line_no, "unexpected '" + std::string(tok[3]) + "'");
        fns.push_back(std::move(fn));
    }
    return fns;
}

std::string_view to_string(Provenance p)
{
    switch (p) {
    case Provenance::direct:
        return "direct";
    case Provenance::indirect:
        return "indirect";
    case Provenance::derived:
        return "derived";
    }
    return "direct";
}

std::string serialize_event_stream(const EventStream& stream)
{
    std::string out;
    for (const auto& o : stream)
        out += std::to_string(o.time) + " " + o.label + " " + format_interval_bracketed(o.confidence) + " " +
               std::string(to_string(o.provenance)) + "\n";
    return out;
}

EventStream parse_event_stream(std::string_view text)
{
    EventStream stream;
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
        if (tok.size() != 4)
            fail_line(line_no, "`<time> <label> [lo,hi] <provenance>` expected");
        Occurrence o;
        o.time = parse_count(line_no, tok[0]);
        o.label = tok[1];
        try {
            o.confidence = parse_interval(tok[2]);
        } catch (const Error& e) {
            fail_line(line_no, e.detail());
        }
        if (o.confidence.is_zero())
            fail_line(line_no, "confidence [0,0] is not an occurrence");
        if (tok[3] == "direct")
            o.provenance = Provenance::direct;
        else if (tok[3] == "indirect")
            o.provenance = Provenance::indirect;
        else if (tok[3] == "derived")
            o.provenance = Provenance::derived;
        else
            fail_line(line_no, "unknown provenance '" + std::string(tok[3]) + "'");
        if (!stream.empty() && o.time < stream.back().time)
            fail_line(line_no, "time " + std::to_string(o.time) + " goes backwards");
        stream.push_back(std::move(o));
    }
    return stream;
}

EventStream detect_direct(const Trajectory& trajectory, const std::vector<CharFn>& fns, double threshold)
{
    std::vector<std::string> names;
    for (const auto& fn : fns)
        if (std::find(names.begin(), names.end(), fn.name) == names.end())
            names.push_back(fn.name);
    EventStream out;
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        for (const auto& name : names) {
            const CharFn* best = nullptr;
            ProbInterval value = ProbInterval::unknown();
            for (const auto& fn : fns) {
                if (fn.name != name)
                    continue;
                const bool has_data = t >= fn.past_window && t + fn.future_window <= trajectory.size();
                if (!has_data || (best && best->window() >= fn.window()))
                    continue;
                best = &fn;
                value = fn.evaluate(trajectory, t);
            }
            if (value.lo >= threshold)
                out.push_back({t, name, value, Provenance::direct});
        }
    }
    return out;
}

IndirectDetection detect_indirect(const Trajectory& trajectory, std::size_t window, double threshold,
                                  const std::string& label)
{
    const std::size_t n = trajectory.size();
    if (window == 0)
        throw Error("precondition", "window must be positive");
    if (n < 2 * window)
        throw Error("precondition", "trajectory too short: " + std::to_string(n) + " steps, window " +
                                        std::to_string(window) + " needs " + std::to_string(2 * window));
    std::map<std::string, std::size_t> ids;
    std::vector<std::size_t> sym(n);
    for (std::size_t i = 0; i < n; ++i)
        sym[i] = ids.try_emplace(trajectory.steps[i].obs, ids.size()).first->second;

    std::vector<double> left(ids.size(), 0.0), right(ids.size(), 0.0);
    for (std::size_t i = 0; i < window; ++i) {
        left[sym[i]] += 1.0;
        right[sym[i + window]] += 1.0;
    }
    std::vector<std::pair<std::size_t, double>> hits;
    for (std::size_t b = window;; ++b) {
        double tv = 0.0;
        for (std::size_t k = 0; k < ids.size(); ++k)
            tv += std::abs(left[k] - right[k]);
        tv /= 2.0 * static_cast<double>(window);
        if (tv > threshold)
            hits.emplace_back(b, tv);
        if (b + window >= n)
            break;
        // Slide both windows by one step.
        left[sym[b - window]] -= 1.0;
        left[sym[b]] += 1.0;
        right[sym[b]] -= 1.0;
        right[sym[b + window]] += 1.0;
    }

    IndirectDetection out;
    std::size_t i = 0;
    while (i < hits.size()) {
        std::size_t best = i, j = i;
        while (j + 1 < hits.size() && hits[j + 1].first - hits[j].first <= window) {
            ++j;
            if (hits[j].second > hits[best].second)
                best = j;
        }
        const double excess = threshold < 1.0 ? (hits[best].second - threshold) / (1.0 - threshold) : 1.0;
        out.events.push_back({hits[best].first, label, ProbInterval(std::clamp(excess, 0.0, 1.0), 1.0),
                              Provenance::indirect});
        i = j + 1;
    }
    std::size_t begin = 0;
    for (const auto& e : out.events) {
        out.segments.emplace_back(begin, e.time);
        begin = e.time;
    }
    out.segments.emplace_back(begin, n);
    return out;
}

} // namespace wm
