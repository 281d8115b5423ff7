#pragma once

#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "buffer.hpp"
#include "errors.hpp"

namespace treebuf {

// One buffer operation over symbolic node names.
struct op {
    enum class kind { init, add, deact, expand, hist };

    kind k = kind::init;
    std::string a;                       // init/deact/hist: node; add/expand: parent
    std::string b;                       // add: child
    std::vector<std::string> children;   // expand

    static op init(std::string x) { return {kind::init, std::move(x), {}, {}}; }
    static op add(std::string x, std::string y) { return {kind::add, std::move(x), std::move(y), {}}; }
    static op deact(std::string x) { return {kind::deact, std::move(x), {}, {}}; }
    static op expand(std::string x, std::vector<std::string> ys) {
        return {kind::expand, std::move(x), {}, std::move(ys)};
    }
    static op hist(std::string x) { return {kind::hist, std::move(x), {}, {}}; }

    bool modifying() const noexcept { return k == kind::add || k == kind::deact || k == kind::expand; }
};

struct op_log {
    std::vector<op> ops;

    std::size_t size() const noexcept { return ops.size(); }
    // Number of modifying operations after desugaring expand into
    // add_child* + deactivate.
    std::size_t modifying_count() const noexcept {
        std::size_t n = 0;
        for (const op& o : ops) {
            if (o.k == op::kind::add || o.k == op::kind::deact) ++n;
            if (o.k == op::kind::expand) n += o.children.size() + 1;
        }
        return n;
    }
};

// Text format, one op per line, `#` starts a comment:
//   init <name>
//   add <parent> <child>
//   deact <name>
//   expand <parent> <child>...
//   hist <name>
// Names are arbitrary non-whitespace tokens.
inline op_log parse_op_log(std::string_view text) {
    op_log log;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::vector<std::string> tok;
        std::istringstream is{std::string(line)};
        for (std::string t; is >> t;) tok.push_back(std::move(t));
        if (tok.empty()) continue;

        const std::string& verb = tok[0];
        auto want = [&](std::size_t n) {
            if (tok.size() != n + 1)
                throw parse_error("'" + verb + "' expects " + std::to_string(n) + " argument(s)", lineno);
        };
        if (verb == "init") {
            want(1);
            log.ops.push_back(op::init(tok[1]));
        } else if (verb == "add") {
            want(2);
            log.ops.push_back(op::add(tok[1], tok[2]));
        } else if (verb == "deact") {
            want(1);
            log.ops.push_back(op::deact(tok[1]));
        } else if (verb == "expand") {
            if (tok.size() < 2) throw parse_error("'expand' expects a parent name", lineno);
            log.ops.push_back(op::expand(tok[1], {tok.begin() + 2, tok.end()}));
        } else if (verb == "hist") {
            want(1);
            log.ops.push_back(op::hist(tok[1]));
        } else {
            throw parse_error("unknown operation '" + verb + "'", lineno);
        }
    }
    return log;
}

inline std::string to_text(const op_log& log) {
    std::string out;
    for (const op& o : log.ops) {
        switch (o.k) {
            case op::kind::init: out += "init " + o.a; break;
            case op::kind::add: out += "add " + o.a + " " + o.b; break;
            case op::kind::deact: out += "deact " + o.a; break;
            case op::kind::expand:
                out += "expand " + o.a;
                for (const std::string& c : o.children) out += " " + c;
                break;
            case op::kind::hist: out += "hist " + o.a; break;
        }
        out += '\n';
    }
    return out;
}

struct log_fault {
    std::size_t index;
    std::string message;
};

// Linear-scan validity predicate with a simulated active set: the first op
// must be the only init, names must be fresh when created, and every
// targeted node must be active.
inline std::optional<log_fault> validate(const op_log& log) {
    std::unordered_set<std::string> known;
    std::unordered_set<std::string> active;
    bool initialized = false;
    for (std::size_t i = 0; i < log.ops.size(); ++i) {
        const op& o = log.ops[i];
        auto fresh = [&](const std::string& name) -> std::optional<log_fault> {
            if (known.count(name)) return log_fault{i, "node name '" + name + "' reused"};
            return std::nullopt;
        };
        auto need_active = [&](const std::string& name) -> std::optional<log_fault> {
            if (!known.count(name)) return log_fault{i, "unknown node '" + name + "'"};
            if (!active.count(name)) return log_fault{i, "node '" + name + "' is not active"};
            return std::nullopt;
        };
        if (o.k == op::kind::init) {
            if (initialized) return log_fault{i, "second init"};
            if (auto f = fresh(o.a)) return f;
            initialized = true;
            known.insert(o.a);
            active.insert(o.a);
            continue;
        }
        if (!initialized) return log_fault{i, "operation before init"};
        switch (o.k) {
            case op::kind::add:
                if (auto f = need_active(o.a)) return f;
                if (auto f = fresh(o.b)) return f;
                known.insert(o.b);
                active.insert(o.b);
                break;
            case op::kind::deact:
                if (auto f = need_active(o.a)) return f;
                active.erase(o.a);
                break;
            case op::kind::expand: {
                if (auto f = need_active(o.a)) return f;
                for (const std::string& c : o.children) {
                    if (auto f = fresh(c)) return f;
                    known.insert(c);
                    active.insert(c);
                }
                active.erase(o.a);
                break;
            }
            case op::kind::hist:
                if (auto f = need_active(o.a)) return f;
                break;
            case op::kind::init: break;  // handled above
        }
    }
    return std::nullopt;
}

// Applies a log to a buffer whose payloads are the symbolic node names and
// collects the result of every hist op. Throws replay_error naming the
// first invalid op.
inline std::vector<std::vector<std::string>> replay(tree_buffer<std::string>& buf, const op_log& log) {
    std::unordered_map<std::string, node_id> ids;
    std::vector<std::vector<std::string>> results;
    for (std::size_t i = 0; i < log.ops.size(); ++i) {
        const op& o = log.ops[i];
        auto resolve = [&](const std::string& name) -> node_id {
            auto it = ids.find(name);
            if (it == ids.end()) throw replay_error("unknown node '" + name + "'", i);
            return it->second;
        };
        auto fresh = [&](const std::string& name) {
            if (ids.count(name)) throw replay_error("node name '" + name + "' reused", i);
        };
        try {
            switch (o.k) {
                case op::kind::init:
                    fresh(o.a);
                    ids.emplace(o.a, buf.initialize(o.a));
                    break;
                case op::kind::add:
                    fresh(o.b);
                    ids.emplace(o.b, buf.add_child(resolve(o.a), o.b));
                    break;
                case op::kind::deact:
                    buf.deactivate(resolve(o.a));
                    break;
                case op::kind::expand: {
                    for (const std::string& c : o.children) fresh(c);
                    std::vector<std::string> ps(o.children.begin(), o.children.end());
                    std::vector<node_id> out = buf.expand(resolve(o.a), std::move(ps));
                    for (std::size_t j = 0; j < o.children.size(); ++j) ids.emplace(o.children[j], out[j]);
                    break;
                }
                case op::kind::hist: {
                    auto entries = buf.history(resolve(o.a));
                    std::vector<std::string> names;
                    names.reserve(entries.size());
                    for (auto& [id, name] : entries) names.push_back(std::move(name));
                    results.push_back(std::move(names));
                    break;
                }
            }
        } catch (const invalid_sequence& e) {
            throw replay_error(e.what(), i);
        } catch (const invalid_parameter& e) {
            throw replay_error(e.what(), i);
        }
    }
    return results;
}

}  // namespace treebuf
