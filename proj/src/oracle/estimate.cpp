#include "worldmodel/oracle.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/format.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace wm {

namespace {

// Calls `fn(line_number, tokens)` for every non-empty line, comments removed.
void for_each_line(std::string_view text,
                   const std::function<void(std::size_t, const std::vector<std::string_view>&)>& fn)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        auto tok = tokenize(line);
        if (!tok.empty())
            fn(line_no, tok);
    }
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what)
{
    throw Error("parse", "line " + std::to_string(line) + ": " + what);
}

} // namespace

Model estimate_fomm(const Trajectory& trajectory)
{
    if (trajectory.size() < 2)
        throw Error("precondition", "trajectory too short: " + std::to_string(trajectory.size()) +
                                        " steps, at least 2 needed");
    const auto seq = trajectory.observation_sequence();
    std::set<std::string> symbols(seq.begin(), seq.end());
    std::map<std::pair<std::string, std::string>, double> pairs;
    std::map<std::string, double> from;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        pairs[{seq[i], seq[i + 1]}] += 1.0;
        from[seq[i]] += 1.0;
    }

    Model m;
    m.kind = ModelKind::fomm;
    m.intern_label(kTrueLabel);
    for (const auto& s : symbols) {
        auto o = m.intern_observation(s);
        m.add_state(s, {{o, ProbInterval::one()}});
    }
    for (const auto& [key, n] : pairs)
        m.add_arrow(m.state_index(key.first), 0, m.state_index(key.second), ProbInterval::one(),
                    ProbInterval::point(n / from[key.first]));
    std::size_t now = std::min(trajectory.t0, trajectory.size() - 1);
    m.initial = m.state_index(seq[now]);
    m.meta["estimated-from"] = std::to_string(trajectory.size()) + " steps";
    return m;
}

Policy preference_to_policy(const Model& model, const Preference& preference)
{
    Policy policy;
    for (StateIndex s = 0; s < model.size(); ++s) {
        auto available = model.labels_at(s);
        if (available.empty())
            continue;
        std::vector<SymbolIndex> order = available;
        if (auto it = preference.find(s); it != preference.end()) {
            std::vector<SymbolIndex> a = available, b = it->second;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            if (a != b)
                throw Error("preference", "preference of state " + model.states[s].id +
                                              " is not a permutation of its actions");
            order = it->second;
        }
        // Exact arithmetic keeps decimal bounds exact: 1 - 0.9 is 0.1.
        const std::size_t n = order.size();
        std::vector<Rational> lo(n), hi(n);
        Rational sum_lo = 0, sum_hi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            auto p = model.label_prob(s, order[i]);
            lo[i] = to_rational(p.lo);
            hi[i] = to_rational(p.hi);
            sum_lo += lo[i];
            sum_hi += hi[i];
        }
        if (sum_lo > 1 || sum_hi < 1)
            throw Error("infeasible", "Agent intervals of state " + model.states[s].id + " admit no policy");
        Rational rest = 1;
        Rational later_lo = sum_lo, later_hi = sum_hi;
        for (std::size_t i = 0; i < n; ++i) {
            later_lo -= lo[i];
            later_hi -= hi[i];
            Rational wanted = i + 1 == n ? rest : rest * hi[i];
            Rational low = std::max(lo[i], Rational(rest - later_hi));
            Rational high = std::min(hi[i], Rational(rest - later_lo));
            Rational p = std::clamp(wanted, low, high);
            if (p != wanted && boost::multiprecision::abs(p - wanted) > Rational(1, 1000000000))
                policy.adjusted.insert(s);
            policy.prob[{s, order[i]}] = to_double(p);
            rest -= p;
        }
    }
    return policy;
}

Preference parse_preference(std::string_view text, const Model& model)
{
    Preference pref;
    for_each_line(text, [&](std::size_t line, const std::vector<std::string_view>& tok) {
        if (tok[0] != "state" || tok.size() < 2)
            fail_line(line, "`state <id>: a1 > a2 ...` expected");
        std::string joined;
        for (std::size_t i = 1; i < tok.size(); ++i)
            joined += std::string(tok[i]) + " ";
        auto colon = joined.find(':');
        if (colon == std::string::npos)
            fail_line(line, "missing ':' after the state id");
        std::string id = joined.substr(0, colon);
        id.erase(id.find_last_not_of(' ') + 1);
        auto s = model.find_state(id);
        if (!s)
            fail_line(line, "undeclared state '" + id + "'");
        std::vector<SymbolIndex> order;
        std::string rest = joined.substr(colon + 1);
        for (char& c : rest)
            if (c == '>')
                c = ' ';
        for (auto a : tokenize(rest)) {
            auto l = model.find_label(a);
            if (!l)
                fail_line(line, "unknown action '" + std::string(a) + "'");
            order.push_back(*l);
        }
        if (order.empty())
            fail_line(line, "empty preference list");
        pref[*s] = std::move(order);
    });
    return pref;
}

std::string serialize_policy(const Model& model, const Policy& policy)
{
    std::vector<std::string> lines;
    for (const auto& [key, p] : policy.prob) {
        std::string line = "policy " + model.states[key.first].id + " " + model.labels[key.second] + " " +
                           format_number(p);
        if (policy.adjusted.count(key.first))
            line += " adjusted";
        lines.push_back(std::move(line));
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines)
        out += l + "\n";
    return out;
}

Policy parse_policy(std::string_view text, const Model& model)
{
    Policy policy;
    for_each_line(text, [&](std::size_t line, const std::vector<std::string_view>& tok) {
        if (tok[0] != "policy" || tok.size() < 4 || tok.size() > 5)
            fail_line(line, "`policy <state> <action> <p>` expected");
        auto s = model.find_state(tok[1]);
        if (!s)
            fail_line(line, "undeclared state '" + std::string(tok[1]) + "'");
        auto l = model.find_label(tok[2]);
        if (!l)
            fail_line(line, "unknown action '" + std::string(tok[2]) + "'");
        policy.prob[{*s, *l}] = parse_number(tok[3]);
        if (tok.size() == 5) {
            if (tok[4] != "adjusted")
                fail_line(line, "unexpected '" + std::string(tok[4]) + "'");
            policy.adjusted.insert(*s);
        }
    });
    return policy;
}

bool MarkovReport::markov() const
{
    return std::none_of(tested.begin(), tested.end(), [](const MarkovContext& c) { return c.flagged; });
}

MarkovReport check_markov(const Trajectory& trajectory, std::size_t order, double significance)
{
    if (order == 0)
        throw Error("precondition", "order must be at least 1");
    MarkovReport report;
    report.order = order;
    report.significance = significance;
    const auto seq = trajectory.observation_sequence();

    // symbol -> context -> next -> count
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> tables;
    std::map<std::string, std::size_t> occurrences;
    for (std::size_t i = order; i + 1 < seq.size(); ++i) {
        std::string context;
        for (std::size_t k = i - order; k < i; ++k)
            context += (context.empty() ? "" : " ") + seq[k];
        tables[seq[i]][context][seq[i + 1]] += 1.0;
        ++occurrences[seq[i]];
    }
    std::set<std::string> symbols(seq.begin(), seq.end());
    for (const auto& x : symbols) {
        std::size_t n = occurrences[x];
        if (n < kMinContextSamples) {
            report.skipped.push_back(x + ": " + std::to_string(n) + " occurrences, " +
                                     std::to_string(kMinContextSamples) + " needed");
            continue;
        }
        std::map<std::string, std::map<std::string, double>> rows;
        for (const auto& [ctx, nexts] : tables[x]) {
            double total = 0.0;
            for (const auto& [_, c] : nexts)
                total += c;
            if (total >= 5.0)
                rows[ctx] = nexts;
        }
        std::map<std::string, double> col_total;
        std::map<std::string, double> row_total;
        double grand = 0.0;
        for (const auto& [ctx, nexts] : rows)
            for (const auto& [next, c] : nexts) {
                col_total[next] += c;
                row_total[ctx] += c;
                grand += c;
            }
        if (rows.size() < 2 || col_total.size() < 2) {
            report.skipped.push_back(x + ": single context or single successor");
            continue;
        }
        MarkovContext ctx;
        ctx.symbol = x;
        ctx.samples = static_cast<std::size_t>(grand);
        ctx.df = (rows.size() - 1) * (col_total.size() - 1);
        for (const auto& [r, rt] : row_total)
            for (const auto& [c, ct] : col_total) {
                double expected = rt * ct / grand;
                auto it = rows[r].find(c);
                double observed = it == rows[r].end() ? 0.0 : it->second;
                ctx.chi2 += (observed - expected) * (observed - expected) / expected;
            }
        boost::math::chi_squared dist(static_cast<double>(ctx.df));
        ctx.p_value = boost::math::cdf(boost::math::complement(dist, ctx.chi2));
        ctx.flagged = ctx.p_value < significance;
        report.tested.push_back(ctx);
    }
    return report;
}

std::string format_markov_report(const MarkovReport& report)
{
    std::ostringstream out;
    out << "order " << report.order << "\n";
    out << "significance " << format_number(report.significance) << "\n";
    for (const auto& c : report.tested)
        out << "context " << c.symbol << " samples=" << c.samples << " chi2=" << format_number(c.chi2)
            << " df=" << c.df << " p=" << format_number(c.p_value) << (c.flagged ? " non-markov" : " markov")
            << "\n";
    for (const auto& s : report.skipped)
        out << "skipped " << s << "\n";
    out << "verdict " << (report.inconclusive() ? "inconclusive" : report.markov() ? "markov" : "non-markov")
        << "\n";
    return out.str();
}

} // namespace wm
