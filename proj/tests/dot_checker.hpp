#pragma once

// Minimal recursive-descent checker for the subset of the DOT grammar that
// export_dot emits: digraph ID { stmt* } with node, edge, attr and ID=ID
// statements, attribute lists, quoted strings with escapes.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wm::test {

namespace dot_detail {

struct Token
{
    enum Kind { id, punct } kind;
    std::string text;
};

inline std::optional<std::vector<Token>> lex(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '"') {
            std::string text;
            ++i;
            bool closed = false;
            while (i < s.size()) {
                if (s[i] == '\\' && i + 1 < s.size()) {
                    text += s.substr(i, 2);
                    i += 2;
                } else if (s[i] == '"') {
                    closed = true;
                    ++i;
                    break;
                } else {
                    text += s[i++];
                }
            }
            if (!closed)
                return std::nullopt;
            out.push_back({Token::id, text});
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '.'))
                ++j;
            out.push_back({Token::id, std::string(s.substr(i, j - i))});
            i = j;
        } else if (s.substr(i, 2) == "->") {
            out.push_back({Token::punct, "->"});
            i += 2;
        } else if (std::string_view("{}[];,=").find(c) != std::string_view::npos) {
            out.push_back({Token::punct, std::string(1, c)});
            ++i;
        } else {
            return std::nullopt;
        }
    }
    return out;
}

class Parser
{
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    bool graph()
    {
        if (!keyword("digraph"))
            return false;
        if (peek_id())
            ++pos_;
        if (!punct("{"))
            return false;
        while (!at_punct("}")) {
            if (!statement())
                return false;
            punct(";");
        }
        ++pos_;
        return pos_ == toks_.size();
    }

private:
    bool statement()
    {
        if (keyword("graph") || keyword("node") || keyword("edge"))
            return attr_list();
        if (!peek_id())
            return false;
        ++pos_;
        if (punct("=")) {
            if (!peek_id())
                return false;
            ++pos_;
            return true;
        }
        if (punct("->")) {
            if (!peek_id())
                return false;
            ++pos_;
        }
        if (at_punct("["))
            return attr_list();
        return true;
    }

    bool attr_list()
    {
        if (!punct("["))
            return false;
        while (!at_punct("]")) {
            if (!peek_id())
                return false;
            ++pos_;
            if (!punct("=") || !peek_id())
                return false;
            ++pos_;
            if (!punct(","))
                punct(";");
        }
        ++pos_;
        return true;
    }

    bool peek_id() const { return pos_ < toks_.size() && toks_[pos_].kind == Token::id; }
    bool at_punct(std::string_view p) const
    {
        return pos_ < toks_.size() && toks_[pos_].kind == Token::punct && toks_[pos_].text == p;
    }
    bool punct(std::string_view p)
    {
        if (!at_punct(p))
            return false;
        ++pos_;
        return true;
    }
    bool keyword(std::string_view k)
    {
        if (pos_ < toks_.size() && toks_[pos_].kind == Token::id && toks_[pos_].text == k) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace dot_detail

inline bool dot_is_valid(std::string_view text)
{
    auto toks = dot_detail::lex(text);
    if (!toks)
        return false;
    return dot_detail::Parser(std::move(*toks)).graph();
}

inline std::size_t count_occurrences(std::string_view hay, std::string_view needle)
{
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

} // namespace wm::test
