#pragma once

#include <bitset>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace treebuf {

// Total predicate over characters: a literal, a (possibly negated) character
// class, or a wildcard.
class symbol_matcher {
public:
    static symbol_matcher literal(char c) {
        symbol_matcher m;
        m.set_.set(static_cast<unsigned char>(c));
        m.text_ = escape_char(c);
        return m;
    }
    static symbol_matcher wildcard() {
        symbol_matcher m;
        m.set_.set();
        m.text_ = ".";
        return m;
    }
    static symbol_matcher char_class(const std::bitset<256>& set, std::string text) {
        symbol_matcher m;
        m.set_ = set;
        m.text_ = std::move(text);
        return m;
    }

    bool matches(char c) const noexcept { return set_.test(static_cast<unsigned char>(c)); }
    const std::string& text() const noexcept { return text_; }
    friend bool operator==(const symbol_matcher& a, const symbol_matcher& b) {
        return a.set_ == b.set_ && a.text_ == b.text_;
    }

private:
    static std::string escape_char(char c) { return c == ' ' ? "_" : std::string(1, c); }

    std::bitset<256> set_;
    std::string text_;
};

// Shared by the automaton file format and the regex compiler: parses the
// body of a class like `abc`, `^abc`, `a-z0-9`. `_` denotes space in the
// file format; the regex parser passes underscore_is_space = false.
inline std::bitset<256> parse_class_body(std::string_view body, bool underscore_is_space,
                                         std::size_t err_pos) {
    bool negate = false;
    std::size_t i = 0;
    if (!body.empty() && body[0] == '^') {
        negate = true;
        i = 1;
    }
    if (i >= body.size()) throw parse_error("empty character class", err_pos);
    std::bitset<256> set;
    auto decode = [&](char c) -> unsigned char {
        if (underscore_is_space && c == '_') return ' ';
        return static_cast<unsigned char>(c);
    };
    while (i < body.size()) {
        unsigned char lo = decode(body[i]);
        if (i + 2 < body.size() && body[i + 1] == '-') {
            unsigned char hi = decode(body[i + 2]);
            if (hi < lo) throw parse_error("reversed range in character class", err_pos);
            for (unsigned c = lo; c <= hi; ++c) set.set(c);
            i += 3;
        } else {
            set.set(lo);
            ++i;
        }
    }
    if (negate) set.flip();
    return set;
}

// A finite automaton over characters with relevant/irrelevant transitions.
// States are dense indices; names are kept for labels and serialization.
class finite_nfa {
public:
    using state_type = int;
    using event_type = char;

    struct row {
        int src;
        symbol_matcher sym;
        int dst;
        bool relevant;
    };

    finite_nfa(std::vector<std::string> names, int initial, std::vector<bool> accepting,
               std::vector<row> rows)
        : names_(std::move(names)),
          initial_(initial),
          accepting_(std::move(accepting)),
          rows_(std::move(rows)),
          by_src_(names_.size()) {
        for (std::size_t i = 0; i < rows_.size(); ++i)
            by_src_[static_cast<std::size_t>(rows_[i].src)].push_back(static_cast<std::uint32_t>(i));
    }

    state_type initial_state() const noexcept { return initial_; }
    bool is_accepting(state_type q) const { return accepting_[static_cast<std::size_t>(q)]; }

    template <typename F>
    void for_each_transition(state_type q, char c, F&& f) const {
        for (std::uint32_t i : by_src_[static_cast<std::size_t>(q)]) {
            const row& r = rows_[i];
            if (r.sym.matches(c)) f(r.dst, r.relevant);
        }
    }

    std::string state_label(state_type q) const { return names_[static_cast<std::size_t>(q)]; }

    std::size_t state_count() const noexcept { return names_.size(); }
    const std::vector<std::string>& state_names() const noexcept { return names_; }
    const std::vector<row>& rows() const noexcept { return rows_; }
    const std::vector<bool>& accepting() const noexcept { return accepting_; }

private:
    std::vector<std::string> names_;
    int initial_;
    std::vector<bool> accepting_;
    std::vector<row> rows_;
    std::vector<std::vector<std::uint32_t>> by_src_;
};

// Line-oriented automaton file format (UTF-8, `#` comments):
//
//   states: s1 s2 ...
//   initial: s
//   accepting: s ...          # may list nothing
//   trans: <src> <sym> <dst> <R|I>
//
// <sym> is a single character, `.` (any), or a class `[...]` / `[^...]`;
// space is written `_`.
inline finite_nfa parse_nfa(std::string_view text) {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> index;
    int initial = -1;
    bool have_initial = false, have_states = false;
    std::vector<int> accepting_ids;
    std::vector<finite_nfa::row> rows;

    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::vector<std::string> tok;
        std::istringstream is{std::string(line)};
        for (std::string t; is >> t;) tok.push_back(std::move(t));
        if (tok.empty()) continue;

        auto lookup = [&](const std::string& name) -> int {
            auto it = index.find(name);
            if (it == index.end()) throw parse_error("undeclared state '" + name + "'", lineno);
            return it->second;
        };

        if (tok[0] == "states:") {
            if (have_states) throw parse_error("duplicate states: line", lineno);
            have_states = true;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                if (index.count(tok[i])) throw parse_error("duplicate state '" + tok[i] + "'", lineno);
                index.emplace(tok[i], static_cast<int>(names.size()));
                names.push_back(tok[i]);
            }
            if (names.empty()) throw parse_error("states: lists no states", lineno);
        } else if (tok[0] == "initial:") {
            if (tok.size() != 2) throw parse_error("initial: expects one state", lineno);
            initial = lookup(tok[1]);
            have_initial = true;
        } else if (tok[0] == "accepting:") {
            for (std::size_t i = 1; i < tok.size(); ++i) accepting_ids.push_back(lookup(tok[i]));
        } else if (tok[0] == "trans:") {
            if (tok.size() != 5) throw parse_error("trans: expects <src> <sym> <dst> <R|I>", lineno);
            int src = lookup(tok[1]);
            int dst = lookup(tok[3]);
            bool relevant;
            if (tok[4] == "R")
                relevant = true;
            else if (tok[4] == "I")
                relevant = false;
            else
                throw parse_error("relevance flag must be R or I", lineno);

            const std::string& sym = tok[2];
            symbol_matcher m = symbol_matcher::wildcard();
            if (sym == ".") {
                // wildcard
            } else if (sym.size() >= 2 && sym.front() == '[' && sym.back() == ']') {
                std::string_view body(sym);
                body.remove_prefix(1);
                body.remove_suffix(1);
                m = symbol_matcher::char_class(parse_class_body(body, true, lineno),
                                               "[" + std::string(body) + "]");
            } else if (sym.size() == 1) {
                m = symbol_matcher::literal(sym[0] == '_' ? ' ' : sym[0]);
            } else {
                throw parse_error("bad symbol '" + sym + "'", lineno);
            }
            rows.push_back({src, m, dst, relevant});
        } else {
            throw parse_error("unknown directive '" + tok[0] + "'", lineno);
        }
    }

    if (!have_states) throw parse_error("missing states: line", lineno);
    if (!have_initial) throw parse_error("missing initial: line", lineno);
    std::vector<bool> accepting(names.size(), false);
    for (int a : accepting_ids) accepting[static_cast<std::size_t>(a)] = true;
    return finite_nfa(std::move(names), initial, std::move(accepting), std::move(rows));
}

inline std::string serialize_nfa(const finite_nfa& a) {
    std::string out = "states:";
    for (const std::string& n : a.state_names()) out += " " + n;
    out += "\ninitial: " + a.state_label(a.initial_state()) + "\naccepting:";
    for (std::size_t i = 0; i < a.state_count(); ++i)
        if (a.accepting()[i]) out += " " + a.state_label(static_cast<int>(i));
    out += '\n';
    for (const finite_nfa::row& r : a.rows()) {
        out += "trans: " + a.state_label(r.src) + " " + r.sym.text() + " " + a.state_label(r.dst) +
               (r.relevant ? " R" : " I") + "\n";
    }
    return out;
}

// Three-state automaton over {a,b,c}: relevant a-loop and a->2 guess on
// state 1, relevant b-edges 2->1 and 2->3, irrelevant completion loops,
// accepting state 3.
inline finite_nfa builtin_fig1b() {
    return parse_nfa(
        "states: 1 2 3\n"
        "initial: 1\n"
        "accepting: 3\n"
        "trans: 1 a 1 R\n"
        "trans: 1 a 2 R\n"
        "trans: 1 [bc] 1 I\n"
        "trans: 2 b 1 R\n"
        "trans: 2 b 3 R\n"
        "trans: 2 [ac] 2 I\n"
        "trans: 3 [abc] 3 I\n");
}

// Finds substrings containing ten non-space characters the first and last of
// which are 'a'; spaces may be interleaved (relevant space self-loops record
// them).
inline finite_nfa builtin_fig5() {
    std::string text =
        "states: 0 1 2 3 4 5 6 7 8 9 acc\n"
        "initial: 0\n"
        "accepting: acc\n"
        "trans: 0 . 0 I\n"
        "trans: 0 a 1 R\n";
    for (int i = 1; i <= 9; ++i) {
        text += "trans: " + std::to_string(i) + " _ " + std::to_string(i) + " R\n";
        if (i <= 8)
            text += "trans: " + std::to_string(i) + " [^_] " + std::to_string(i + 1) + " I\n";
    }
    text += "trans: 9 a acc R\n";
    return parse_nfa(text);
}

// `hasnext` is provided separately (it is an automaton over value-carrying
// events, not characters).
inline finite_nfa builtin_nfa(std::string_view name) {
    if (name == "fig1b") return builtin_fig1b();
    if (name == "fig5") return builtin_fig5();
    throw invalid_parameter("unknown builtin automaton '" + std::string(name) +
                            "' (expected fig1b|fig5)");
}

}  // namespace treebuf
