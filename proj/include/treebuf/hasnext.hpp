#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace treebuf {

// One instrumentation event: an operation name plus the identity of the
// object it was applied to.
struct rv_event {
    enum class name : std::uint8_t { iter, has_next, next, other };

    name n = name::other;
    std::int64_t value = 0;

    friend bool operator==(const rv_event&, const rv_event&) = default;
};

inline const char* to_string(rv_event::name n) noexcept {
    switch (n) {
        case rv_event::name::iter: return "iter";
        case rv_event::name::has_next: return "hasNext";
        case rv_event::name::next: return "next";
        case rv_event::name::other: return "other";
    }
    return "?";
}

inline rv_event::name rv_name_from_string(std::string_view s, std::size_t err_line) {
    if (s == "iter") return rv_event::name::iter;
    if (s == "hasNext") return rv_event::name::has_next;
    if (s == "next") return rv_event::name::next;
    if (s == "other") return rv_event::name::other;
    throw parse_error("unknown event name '" + std::string(s) + "'", err_line);
}

// State of the iterator-protocol configuration graph. The graph is infinite
// (one invalid/valid pair per program value); states are built on the fly.
struct hasnext_state {
    enum class kind : std::uint8_t { start, invalid, valid, error };

    kind k = kind::start;
    std::int64_t value = 0;  // meaningful for invalid/valid

    friend bool operator==(const hasnext_state&, const hasnext_state&) = default;
};

struct hasnext_state_hash {
    std::size_t operator()(const hasnext_state& s) const noexcept {
        return std::hash<std::int64_t>{}(s.value * 4 + static_cast<std::int64_t>(s.k));
    }
};

}  // namespace treebuf

template <>
struct std::hash<treebuf::hasnext_state> : treebuf::hasnext_state_hash {};

namespace treebuf {

// It is an error to apply `next` to an iterator that was not validated by a
// `hasNext` since creation or since the previous `next`. Relevant
// transitions: tracking an iterator on `iter`, validation, consumption, and
// the step into the error state; everything else self-loops irrelevantly.
class hasnext_automaton {
public:
    using state_type = hasnext_state;
    using event_type = rv_event;

    state_type initial_state() const noexcept { return {hasnext_state::kind::start, 0}; }
    bool is_accepting(const state_type& q) const noexcept {
        return q.k == hasnext_state::kind::error;
    }

    template <typename F>
    void for_each_transition(const state_type& q, const rv_event& e, F&& f) const {
        using K = hasnext_state::kind;
        switch (q.k) {
            case K::start:
                f(state_type{K::start, 0}, false);
                if (e.n == rv_event::name::iter) f(state_type{K::invalid, e.value}, true);
                break;
            case K::invalid:
                if (e.value == q.value && e.n == rv_event::name::next)
                    f(state_type{K::error, 0}, true);
                else if (e.value == q.value && e.n == rv_event::name::has_next)
                    f(state_type{K::valid, q.value}, true);
                else
                    f(q, false);
                break;
            case K::valid:
                if (e.value == q.value && e.n == rv_event::name::next)
                    f(state_type{K::invalid, q.value}, true);
                else
                    f(q, false);
                break;
            case K::error:
                f(q, false);
                break;
        }
    }

    std::string state_label(const state_type& q) const {
        using K = hasnext_state::kind;
        switch (q.k) {
            case K::start: return "start";
            case K::invalid: return "invalid(" + std::to_string(q.value) + ")";
            case K::valid: return "valid(" + std::to_string(q.value) + ")";
            case K::error: return "error";
        }
        return "?";
    }
};

inline hasnext_automaton hasnext_nfa() { return {}; }

// ---- JSON Lines trace format ---------------------------------------------
// One object per event: {"event":"next","value":1,"loc":"Main.java:17"}

struct rv_trace_entry {
    rv_event event;
    std::string loc;

    friend bool operator==(const rv_trace_entry&, const rv_trace_entry&) = default;
};

inline std::vector<rv_trace_entry> parse_rv_trace(std::istream& in) {
    std::vector<rv_trace_entry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("bad trace line: ") + e.what(), lineno);
        }
        if (!j.is_object() || !j.contains("event") || !j.contains("value"))
            throw parse_error("trace line needs event and value fields", lineno);
        rv_trace_entry t;
        t.event.n = rv_name_from_string(j["event"].get<std::string>(), lineno);
        t.event.value = j["value"].get<std::int64_t>();
        t.loc = j.value("loc", "");
        out.push_back(std::move(t));
    }
    return out;
}

inline std::string rv_trace_line(const rv_trace_entry& t) {
    nlohmann::json j;
    j["event"] = to_string(t.event.n);
    j["value"] = t.event.value;
    j["loc"] = t.loc;
    return j.dump();
}

}  // namespace treebuf
