#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "finite_nfa.hpp"

namespace treebuf {

// Supported subset: literals, `.`, classes `[...]` / `[^...]`, capturing
// groups `(...)`, alternation `|`, quantifiers `*` `+` `?` `{m}` `{m,}`
// `{m,n}`, and `\` escaping of punctuation. Patterns are searched
// unanchored.
struct regex_node {
    enum class kind { leaf, concat, alt, repeat, group };

    kind k = kind::concat;
    symbol_matcher m = symbol_matcher::wildcard();  // leaf only
    std::vector<regex_node> kids;                   // concat/alt; repeat/group hold one child
    std::uint32_t min = 1, max = 1;                 // repeat; max == unbounded for open ends

    static constexpr std::uint32_t unbounded = 0xffffffffu;
};

namespace detail {

class regex_parser {
public:
    explicit regex_parser(std::string_view s) : s_(s) {}

    regex_node parse() {
        regex_node r = parse_alt(0);
        if (pos_ != s_.size()) throw parse_error("unexpected ')'", pos_);
        return r;
    }

private:
    regex_node parse_alt(unsigned depth) {
        regex_node alt;
        alt.k = regex_node::kind::alt;
        alt.kids.push_back(parse_concat(depth));
        while (peek() == '|') {
            ++pos_;
            alt.kids.push_back(parse_concat(depth));
        }
        if (alt.kids.size() == 1) return std::move(alt.kids[0]);
        return alt;
    }

    regex_node parse_concat(unsigned depth) {
        regex_node cat;
        cat.k = regex_node::kind::concat;
        while (pos_ < s_.size() && peek() != '|' && peek() != ')') cat.kids.push_back(parse_item(depth));
        return cat;
    }

    regex_node parse_item(unsigned depth) {
        regex_node atom = parse_atom(depth);
        for (;;) {
            char c = peek();
            if (c == '*' || c == '+' || c == '?') {
                ++pos_;
                regex_node rep;
                rep.k = regex_node::kind::repeat;
                rep.min = c == '+' ? 1 : 0;
                rep.max = c == '?' ? 1 : regex_node::unbounded;
                rep.kids.push_back(std::move(atom));
                atom = std::move(rep);
            } else if (c == '{') {
                atom = parse_bounds(std::move(atom));
            } else {
                return atom;
            }
        }
    }

    regex_node parse_bounds(regex_node atom) {
        std::size_t open = pos_;
        ++pos_;  // '{'
        std::uint32_t m = parse_number(open);
        std::uint32_t n = m;
        if (peek() == ',') {
            ++pos_;
            n = peek() == '}' ? regex_node::unbounded : parse_number(open);
        }
        if (peek() != '}') throw parse_error("unterminated {m,n}", open);
        ++pos_;
        if (n != regex_node::unbounded && n < m) throw parse_error("bad repetition bounds", open);
        if (n != regex_node::unbounded && n > 256) throw parse_error("repetition too large", open);
        if (n == regex_node::unbounded && m > 256) throw parse_error("repetition too large", open);
        regex_node rep;
        rep.k = regex_node::kind::repeat;
        rep.min = m;
        rep.max = n;
        rep.kids.push_back(std::move(atom));
        return rep;
    }

    std::uint32_t parse_number(std::size_t err_pos) {
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
            throw parse_error("expected number in {m,n}", err_pos);
        std::uint32_t v = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + static_cast<std::uint32_t>(s_[pos_] - '0');
            if (v > 100000) throw parse_error("repetition too large", err_pos);
            ++pos_;
        }
        return v;
    }

    regex_node parse_atom(unsigned depth) {
        if (pos_ >= s_.size()) throw parse_error("expected atom", pos_);
        std::size_t at = pos_;
        char c = s_[pos_++];
        regex_node leaf;
        leaf.k = regex_node::kind::leaf;
        switch (c) {
            case '(': {
                if (depth + 1 > 32) throw parse_error("group nesting too deep", at);
                regex_node inner = parse_alt(depth + 1);
                if (peek() != ')') throw parse_error("unterminated group", at);
                ++pos_;
                regex_node g;
                g.k = regex_node::kind::group;
                g.kids.push_back(std::move(inner));
                return g;
            }
            case '.':
                leaf.m = symbol_matcher::wildcard();
                return leaf;
            case '[': {
                std::size_t close = s_.find(']', pos_ + (peek() == '^' ? 2 : 1));
                if (close == std::string_view::npos) throw parse_error("unterminated class", at);
                std::string_view body = s_.substr(pos_, close - pos_);
                leaf.m = symbol_matcher::char_class(parse_class_body(body, false, at),
                                                    "[" + std::string(body) + "]");
                pos_ = close + 1;
                return leaf;
            }
            case '\\': {
                if (pos_ >= s_.size()) throw parse_error("dangling escape", at);
                char e = s_[pos_++];
                if (std::isalnum(static_cast<unsigned char>(e)))
                    throw parse_error("unsupported escape", at);
                leaf.m = symbol_matcher::literal(e);
                return leaf;
            }
            case '*':
            case '+':
            case '?':
            case '{':
                throw parse_error("quantifier with nothing to repeat", at);
            case ')':
            case '|':
                throw parse_error("unexpected metacharacter", at);
            default:
                leaf.m = symbol_matcher::literal(c);
                return leaf;
        }
    }

    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    std::string_view s_;
    std::size_t pos_ = 0;
};

// Thompson-style NFA with epsilon edges. Epsilon edges may open or close a
// capture-group instance; the first character consumed while an instance is
// open marks its transition relevant.
struct eps_nfa {
    struct edge {
        int to = -1;
        bool consuming = false;
        symbol_matcher m = symbol_matcher::wildcard();
        int open = -1;   // group instance opened by this epsilon edge
        int close = -1;  // group instance closed by this epsilon edge
    };

    std::vector<std::vector<edge>> out;
    int next_group = 0;

    int add_state() {
        out.emplace_back();
        return static_cast<int>(out.size()) - 1;
    }
    void eps(int a, int b, int open = -1, int close = -1) {
        out[static_cast<std::size_t>(a)].push_back({b, false, symbol_matcher::wildcard(), open, close});
    }
    void consume(int a, int b, const symbol_matcher& m) {
        out[static_cast<std::size_t>(a)].push_back({b, true, m, -1, -1});
    }
};

struct frag {
    int start, end;
};

inline frag build_eps(eps_nfa& g, const regex_node& n) {
    switch (n.k) {
        case regex_node::kind::leaf: {
            int s = g.add_state(), t = g.add_state();
            g.consume(s, t, n.m);
            return {s, t};
        }
        case regex_node::kind::concat: {
            int s = g.add_state();
            int cur = s;
            for (const regex_node& k : n.kids) {
                frag f = build_eps(g, k);
                g.eps(cur, f.start);
                cur = f.end;
            }
            return {s, cur};
        }
        case regex_node::kind::alt: {
            int s = g.add_state(), t = g.add_state();
            for (const regex_node& k : n.kids) {
                frag f = build_eps(g, k);
                g.eps(s, f.start);
                g.eps(f.end, t);
            }
            return {s, t};
        }
        case regex_node::kind::group: {
            int gid = g.next_group++;
            int s = g.add_state(), t = g.add_state();
            frag f = build_eps(g, n.kids[0]);
            g.eps(s, f.start, gid, -1);
            g.eps(f.end, t, -1, gid);
            return {s, t};
        }
        case regex_node::kind::repeat: {
            int s = g.add_state();
            int cur = s;
            for (std::uint32_t i = 0; i < n.min; ++i) {
                frag f = build_eps(g, n.kids[0]);
                g.eps(cur, f.start);
                cur = f.end;
            }
            if (n.max == regex_node::unbounded) {
                // trailing loop copy; min == 0 makes it a plain star
                frag f = build_eps(g, n.kids[0]);
                int t = g.add_state();
                g.eps(cur, f.start);
                g.eps(cur, t);
                g.eps(f.end, f.start);
                g.eps(f.end, t);
                return {s, t};
            }
            for (std::uint32_t i = n.min; i < n.max; ++i) {
                frag f = build_eps(g, n.kids[0]);
                int t = g.add_state();
                g.eps(cur, f.start);
                g.eps(cur, t);  // skip this optional copy
                g.eps(f.end, t);
                cur = t;
            }
            return {s, cur};
        }
    }
    throw error("unreachable");
}

}  // namespace detail

inline regex_node parse_regex(std::string_view pattern) {
    return detail::regex_parser(pattern).parse();
}

// Compiles the pattern to an automaton whose transitions all consume one
// character. Relevance of an epsilon group-open edge is pushed onto the
// first consuming edge of the instance; a group instance that consumes
// nothing leaves no mark. An irrelevant wildcard self-loop on the initial
// state provides unanchored searching.
inline finite_nfa compile_regex(std::string_view pattern) {
    using detail::eps_nfa;
    regex_node ast = parse_regex(pattern);
    eps_nfa g;
    detail::frag f = detail::build_eps(g, ast);

    struct pending_row {
        int src;
        symbol_matcher m;
        int dst;
        bool relevant;
    };
    std::vector<pending_row> rows;
    std::vector<int> anchors;                  // discovery order
    std::map<int, int> anchor_index;           // eps state -> dense id
    std::vector<bool> accepts;                 // per anchor

    auto intern = [&](int state) -> int {
        auto it = anchor_index.find(state);
        if (it != anchor_index.end()) return it->second;
        int id = static_cast<int>(anchors.size());
        anchor_index.emplace(state, id);
        anchors.push_back(state);
        accepts.push_back(false);
        return id;
    };

    int start = intern(f.start);
    auto seen_row = [&rows](const pending_row& r) {
        for (const pending_row& q : rows)
            if (q.src == r.src && q.dst == r.dst && q.relevant == r.relevant && q.m == r.m)
                return true;
        return false;
    };

    for (std::size_t a = 0; a < anchors.size(); ++a) {
        // DFS over epsilon edges tracking the set of open group instances
        std::set<std::pair<int, std::vector<int>>> visited;
        std::vector<std::pair<int, std::vector<int>>> stack;
        stack.push_back({anchors[a], {}});
        while (!stack.empty()) {
            auto [u, opens] = stack.back();
            stack.pop_back();
            if (!visited.insert({u, opens}).second) continue;
            if (u == f.end) accepts[a] = true;
            for (const eps_nfa::edge& e : g.out[static_cast<std::size_t>(u)]) {
                if (e.consuming) {
                    int dst = intern(e.to);
                    pending_row r{static_cast<int>(a), e.m, dst, !opens.empty()};
                    if (!seen_row(r)) rows.push_back(std::move(r));
                } else {
                    std::vector<int> next = opens;
                    if (e.open >= 0) {
                        auto it = std::lower_bound(next.begin(), next.end(), e.open);
                        if (it == next.end() || *it != e.open) next.insert(it, e.open);
                    }
                    if (e.close >= 0) {
                        auto it = std::lower_bound(next.begin(), next.end(), e.close);
                        if (it != next.end() && *it == e.close) next.erase(it);
                    }
                    stack.push_back({e.to, std::move(next)});
                }
            }
        }
    }

    std::vector<std::string> names;
    names.reserve(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) names.push_back(std::to_string(i));

    std::vector<finite_nfa::row> out_rows;
    out_rows.push_back({start, symbol_matcher::wildcard(), start, false});  // search loop
    for (const pending_row& r : rows) out_rows.push_back({r.src, r.m, r.dst, r.relevant});

    std::vector<bool> accepting(anchors.size(), false);
    for (std::size_t i = 0; i < anchors.size(); ++i) accepting[i] = accepts[i];
    return finite_nfa(std::move(names), start, std::move(accepting), std::move(out_rows));
}

}  // namespace treebuf
