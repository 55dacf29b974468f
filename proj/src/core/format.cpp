#include "worldmodel/format.hpp"

#include "worldmodel/error.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>

namespace wm {

std::vector<std::string_view> tokenize(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
            ++j;
        if (j > i)
            out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string read_text_file(const std::string& path)
{
    if (path == "-")
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("io", "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> Trajectory::observation_sequence() const
{
    std::vector<std::string> out;
    out.reserve(steps.size());
    for (const auto& s : steps)
        out.push_back(s.obs);
    return out;
}

std::vector<std::string> step_labels(std::string_view act)
{
    std::vector<std::string> out;
    if (act == "-" || act.empty())
        return out;
    std::size_t start = 0;
    while (start <= act.size()) {
        auto plus = act.find('+', start);
        auto piece = act.substr(start, plus == std::string_view::npos ? std::string_view::npos : plus - start);
        if (!piece.empty())
            out.emplace_back(piece);
        if (plus == std::string_view::npos)
            break;
        start = plus + 1;
    }
    return out;
}

namespace {

class LineReader
{
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    // Next non-blank, non-comment line, tokenized. False at end.
    bool next(std::vector<std::string_view>& tokens)
    {
        while (pos_ <= text_.size() && pos_ != std::string_view::npos) {
            auto nl = text_.find('\n', pos_);
            auto line = text_.substr(pos_, nl == std::string_view::npos ? std::string_view::npos : nl - pos_);
            pos_ = nl == std::string_view::npos ? std::string_view::npos : nl + 1;
            ++line_no_;
            if (auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            tokens = tokenize(line);
            if (!tokens.empty()) {
                raw_ = line;
                return true;
            }
        }
        return false;
    }

    [[nodiscard]] std::size_t line() const { return line_no_; }
    [[nodiscard]] std::string_view raw() const { return raw_; }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw Error("parse", "line " + std::to_string(line_no_) + ": " + what);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
    std::string_view raw_;
};

struct PendingArrow
{
    std::string from, label, to;
    ProbInterval lp, ap;
    bool has_lp = false, has_ap = false;
    std::size_t line = 0;
};

ProbInterval default_label_prob(ModelKind kind)
{
    if (is_single_label(kind))
        return ProbInterval::one();
    return ProbInterval::unknown();
}

bool lp_may_be_omitted(ModelKind kind)
{
    return is_single_label(kind) || kind == ModelKind::mdp || kind == ModelKind::smdp;
}

std::string label_keyword(ModelKind kind)
{
    return kind == ModelKind::ed ? "event" : "act";
}

} // namespace

Model parse_model(std::string_view text)
{
    Model model;
    LineReader reader(text);
    std::vector<std::string_view> tok;
    bool have_kind = false;
    bool have_initial = false;
    std::vector<PendingArrow> pending;
    std::vector<std::pair<std::string, std::string>> pending_priorities; // label, rank
    std::vector<std::size_t> priority_lines;
    std::set<std::string> declared_labels;

    auto interval_or_fail = [&](std::string_view t) {
        try {
            return parse_interval(t);
        } catch (const Error& e) {
            reader.fail(e.detail());
        }
    };

    while (reader.next(tok)) {
        const auto head = tok[0];
        if (!have_kind) {
            if (head != "model" || tok.size() != 2)
                reader.fail("document must start with `model <kind>`");
            auto kind = parse_kind(tok[1]);
            if (!kind)
                reader.fail("unknown model kind '" + std::string(tok[1]) + "'");
            model.kind = *kind;
            have_kind = true;
            continue;
        }
        if (head == "model") {
            reader.fail("duplicate `model` line");
        } else if (head == "obs") {
            for (std::size_t i = 1; i < tok.size(); ++i) {
                if (model.find_observation(tok[i]))
                    reader.fail("duplicate observation '" + std::string(tok[i]) + "'");
                model.intern_observation(tok[i]);
            }
        } else if (head == "act" || head == "event") {
            for (std::size_t i = 1; i < tok.size(); ++i) {
                if (!declared_labels.insert(std::string(tok[i])).second)
                    reader.fail("duplicate label '" + std::string(tok[i]) + "'");
                model.intern_label(tok[i]);
            }
        } else if (head == "meta") {
            if (tok.size() < 3)
                reader.fail("`meta <key> <value>` expected");
            auto raw = reader.raw();
            std::string value(raw.substr(static_cast<std::size_t>(tok[2].data() - raw.data())));
            while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back())))
                value.pop_back();
            model.meta[std::string(tok[1])] = value;
        } else if (head == "state") {
            if (tok.size() < 2)
                reader.fail("state id expected");
            std::string id(tok[1]);
            if (model.find_state(id))
                reader.fail("duplicate state id '" + id + "'");
            State s;
            s.id = id;
            bool in_trace = false;
            for (std::size_t i = 2; i < tok.size(); ++i) {
                auto t = tok[i];
                if (in_trace) {
                    auto eq = t.find('=');
                    if (eq == std::string_view::npos || eq == 0)
                        reader.fail("trace entry '" + std::string(t) + "' must be <obs>=<p>");
                    auto obs = model.find_observation(t.substr(0, eq));
                    if (!obs)
                        reader.fail("undeclared observation '" + std::string(t.substr(0, eq)) + "' in trace of " + id);
                    if (s.trace.count(*obs))
                        reader.fail("observation listed twice in trace of " + id);
                    s.trace[*obs] = interval_or_fail(t.substr(eq + 1));
                } else if (t == "initial") {
                    if (have_initial)
                        reader.fail("second initial state '" + id + "'");
                    have_initial = true;
                    model.initial = model.states.size();
                } else if (t == "memory") {
                    s.memory = true;
                } else if (t.rfind("phenomenon=", 0) == 0) {
                    s.phenomena.emplace_back(t.substr(11));
                } else if (t == "trace") {
                    in_trace = true;
                } else {
                    reader.fail("unexpected token '" + std::string(t) + "' in state line");
                }
            }
            model.states.push_back(std::move(s));
        } else if (head == "arrow") {
            if (tok.size() < 4)
                reader.fail("`arrow <from> <label> <to> lp=.. ap=..` expected");
            PendingArrow a;
            a.from = tok[1];
            a.label = tok[2];
            a.to = tok[3];
            a.line = reader.line();
            for (std::size_t i = 4; i < tok.size(); ++i) {
                auto t = tok[i];
                if (t.rfind("lp=", 0) == 0) {
                    a.lp = interval_or_fail(t.substr(3));
                    a.has_lp = true;
                } else if (t.rfind("ap=", 0) == 0) {
                    a.ap = interval_or_fail(t.substr(3));
                    a.has_ap = true;
                } else {
                    reader.fail("unexpected token '" + std::string(t) + "' in arrow line");
                }
            }
            pending.push_back(std::move(a));
        } else if (head == "priority") {
            if (tok.size() != 3)
                reader.fail("`priority <event> <rank>` expected");
            pending_priorities.emplace_back(std::string(tok[1]), std::string(tok[2]));
            priority_lines.push_back(reader.line());
        } else {
            reader.fail("unknown directive '" + std::string(head) + "'");
        }
    }
    if (!have_kind)
        throw Error("parse", "line 1: empty document");
    if (!have_initial)
        throw Error("parse", "no initial state");
    if (is_single_label(model.kind))
        model.intern_label(kTrueLabel);

    auto line_fail = [](std::size_t line, const std::string& what) {
        throw Error("parse", "line " + std::to_string(line) + ": " + what);
    };
    for (const auto& a : pending) {
        auto from = model.find_state(a.from);
        if (!from)
            line_fail(a.line, "undeclared state '" + a.from + "'");
        auto to = model.find_state(a.to);
        if (!to)
            line_fail(a.line, "undeclared state '" + a.to + "'");
        auto label = model.find_label(a.label);
        if (!label)
            line_fail(a.line, "undeclared label '" + a.label + "'");
        ProbInterval lp = a.lp;
        if (!a.has_lp) {
            if (!lp_may_be_omitted(model.kind))
                line_fail(a.line, "lp= is required for " + std::string(to_string(model.kind)) + " models");
            lp = default_label_prob(model.kind);
        }
        ProbInterval ap = a.ap;
        if (!a.has_ap) {
            if (model.kind != ModelKind::smdp)
                line_fail(a.line, "ap= is required");
            ap = ProbInterval::unknown();
        }
        model.add_arrow(*from, *label, *to, lp, ap);
    }
    for (std::size_t i = 0; i < pending_priorities.size(); ++i) {
        const auto& [label, rank] = pending_priorities[i];
        auto l = model.find_label(label);
        if (!l)
            line_fail(priority_lines[i], "priority for undeclared event '" + label + "'");
        try {
            model.priorities[*l] = std::stoi(rank);
        } catch (const std::exception&) {
            line_fail(priority_lines[i], "malformed rank '" + rank + "'");
        }
    }
    try {
        check_structure(model);
    } catch (const Error& e) {
        throw Error("parse", e.detail());
    }
    return model;
}

std::string serialize_model(const Model& input)
{
    const Model m = canonicalize(input);
    std::ostringstream out;
    out << "model " << to_string(m.kind) << '\n';
    out << "obs";
    for (const auto& o : m.observations)
        out << ' ' << o;
    out << '\n';
    std::vector<std::string> declared;
    for (const auto& l : m.labels)
        if (!(is_single_label(m.kind) && l == kTrueLabel))
            declared.push_back(l);
    if (!declared.empty()) {
        out << label_keyword(m.kind);
        for (const auto& l : declared)
            out << ' ' << l;
        out << '\n';
    }
    for (const auto& [k, v] : m.meta)
        out << "meta " << k << ' ' << v << '\n';
    for (StateIndex i = 0; i < m.states.size(); ++i) {
        const auto& s = m.states[i];
        out << "state " << s.id;
        if (i == m.initial)
            out << " initial";
        if (s.memory)
            out << " memory";
        for (const auto& p : s.phenomena)
            out << " phenomenon=" << p;
        if (!s.trace.empty()) {
            out << " trace";
            for (const auto& [obs, p] : s.trace)
                out << ' ' << m.observations[obs] << '=' << format_interval(p);
        }
        out << '\n';
    }
    for (const auto& a : m.arrows) {
        out << "arrow " << m.states[a.from].id << ' ' << m.labels[a.label] << ' ' << m.states[a.to].id
            << " lp=" << format_interval(a.label_prob) << " ap=" << format_interval(a.arrow_prob) << '\n';
    }
    for (const auto& [label, rank] : m.priorities)
        out << "priority " << m.labels[label] << ' ' << rank << '\n';
    return out.str();
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string dot_quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string export_dot(const Model& input)
{
    const Model m = canonicalize(input);
    std::ostringstream out;
    out << "digraph " << dot_quote(m.meta.count("name") ? m.meta.at("name") : std::string(to_string(m.kind)))
        << " {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=circle];\n";
    for (StateIndex i = 0; i < m.states.size(); ++i) {
        const auto& s = m.states[i];
        std::string label = s.id;
        if (!s.trace.empty()) {
            label += "\\n";
            bool first = true;
            for (const auto& [obs, p] : s.trace) {
                if (!first)
                    label += " ";
                first = false;
                label += m.observations[obs] + "=" + format_interval(p);
            }
        }
        out << "  " << dot_quote(s.id) << " [label=\"";
        for (char c : label) {
            if (c == '"')
                out << '\\';
            out << c;
        }
        out << '"';
        if (i == m.initial)
            out << ", shape=doublecircle";
        out << "];\n";
    }
    for (const auto& a : m.arrows) {
        const char* colour = kPalette[a.label % std::size(kPalette)];
        out << "  " << dot_quote(m.states[a.from].id) << " -> " << dot_quote(m.states[a.to].id) << " [label="
            << dot_quote(m.labels[a.label] + " " + format_interval(a.label_prob) + " " + format_interval(a.arrow_prob))
            << ", color=" << dot_quote(colour) << ", fontcolor=" << dot_quote(colour) << "];\n";
    }
    out << "}\n";
    return out.str();
}

Trajectory parse_trajectory(std::string_view text, const Model* model)
{
    Trajectory traj;
    LineReader reader(text);
    std::vector<std::string_view> tok;
    bool have_t0 = false;
    std::size_t t0 = 0;
    std::size_t t0_line = 0;
    while (reader.next(tok)) {
        if (tok[0] == "t0") {
            if (tok.size() != 2)
                reader.fail("`t0 <index>` expected");
            try {
                std::size_t used = 0;
                auto v = std::stoll(std::string(tok[1]), &used);
                if (used != tok[1].size() || v < 0)
                    throw std::invalid_argument("t0");
                t0 = static_cast<std::size_t>(v);
            } catch (const std::exception&) {
                reader.fail("malformed t0 '" + std::string(tok[1]) + "'");
            }
            have_t0 = true;
            t0_line = reader.line();
        } else if (tok[0] == "obs") {
            for (std::size_t i = 1; i < tok.size(); ++i)
                traj.declared_obs.emplace_back(tok[i]);
        } else if (tok[0] == "act") {
            for (std::size_t i = 1; i < tok.size(); ++i)
                traj.declared_acts.emplace_back(tok[i]);
        } else {
            if (tok.size() != 2)
                reader.fail("step line must be `<obs> <act>`");
            Step step{std::string(tok[0]), std::string(tok[1])};
            auto known_obs = [&](const std::string& o) {
                bool constrained = !traj.declared_obs.empty() || model;
                if (!constrained)
                    return true;
                if (std::find(traj.declared_obs.begin(), traj.declared_obs.end(), o) != traj.declared_obs.end())
                    return true;
                return model && model->find_observation(o).has_value();
            };
            auto known_act = [&](const std::string& a) {
                bool constrained = !traj.declared_acts.empty() || (model && !is_single_label(model->kind));
                if (!constrained)
                    return true;
                if (std::find(traj.declared_acts.begin(), traj.declared_acts.end(), a) != traj.declared_acts.end())
                    return true;
                return model && model->find_label(a).has_value();
            };
            if (!known_obs(step.obs))
                reader.fail("unknown observation '" + step.obs + "'");
            for (const auto& l : step_labels(step.act))
                if (!known_act(l))
                    reader.fail("unknown action '" + l + "'");
            traj.steps.push_back(std::move(step));
        }
    }
    if (have_t0) {
        if (t0 > traj.steps.size())
            throw Error("parse", "line " + std::to_string(t0_line) + ": t0 " + std::to_string(t0) +
                                     " beyond the " + std::to_string(traj.steps.size()) + " steps");
        traj.t0 = t0;
    } else {
        traj.t0 = traj.steps.size();
    }
    return traj;
}

std::string serialize_trajectory(const Trajectory& traj)
{
    std::ostringstream out;
    if (!traj.declared_obs.empty()) {
        out << "obs";
        for (const auto& o : traj.declared_obs)
            out << ' ' << o;
        out << '\n';
    }
    if (!traj.declared_acts.empty()) {
        out << "act";
        for (const auto& a : traj.declared_acts)
            out << ' ' << a;
        out << '\n';
    }
    out << "t0 " << traj.t0 << '\n';
    for (const auto& s : traj.steps)
        out << s.obs << ' ' << s.act << '\n';
    return out.str();
}

} // namespace wm
