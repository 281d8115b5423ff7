#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "errors.hpp"
#include "regex.hpp"

namespace treebuf::oracle {

template <typename State>
struct run_step {
    State src;
    State dst;
    bool relevant;

    friend bool operator==(const run_step&, const run_step&) = default;
};

// All complete computations of the automaton labeled by `word`, by
// depth-first search. Throws once more than `bound` configurations have
// been visited.
template <typename Aut>
std::vector<std::vector<run_step<typename Aut::state_type>>> enumerate_runs(
    const Aut& aut, const std::vector<typename Aut::event_type>& word,
    std::size_t bound = 1000000) {
    using state = typename Aut::state_type;
    std::vector<std::vector<run_step<state>>> runs;
    std::vector<run_step<state>> cur;
    std::size_t visited = 0;

    std::function<void(const state&, std::size_t)> dfs = [&](const state& q, std::size_t pos) {
        if (++visited > bound) throw error("run enumeration exceeded its configuration bound");
        if (pos == word.size()) {
            runs.push_back(cur);
            return;
        }
        aut.for_each_transition(q, word[pos], [&](const state& q2, bool relevant) {
            cur.push_back({q, q2, relevant});
            dfs(q2, pos + 1);
            cur.pop_back();
        });
    };
    dfs(aut.initial_state(), 0);
    return runs;
}

// Positions i such that some accepting state is reachable on the
// length-(i+1) prefix of `word` — exactly where a monitor must report.
template <typename Aut>
std::vector<std::size_t> accepting_positions(const Aut& aut,
                                             const std::vector<typename Aut::event_type>& word) {
    using state = typename Aut::state_type;
    std::unordered_set<state> cur{aut.initial_state()};
    std::unordered_set<state> next;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < word.size(); ++i) {
        next.clear();
        for (const state& q : cur)
            aut.for_each_transition(q, word[i], [&](const state& q2, bool) { next.insert(q2); });
        cur.swap(next);
        for (const state& q : cur)
            if (aut.is_accepting(q)) {
                out.push_back(i);
                break;
            }
    }
    return out;
}

template <typename State>
struct trace_step {
    State src;
    State dst;
    std::size_t pos;
};

// Whether some accepting computation over `word` has exactly `trace` as the
// suffix of its relevant transitions, truncated to the last h. Dynamic
// program over (position, state, matched-prefix-length); relevant
// transitions before the window are admitted only when the window is full
// (|trace| == h).
template <typename Aut>
bool is_valid_error_trace(const Aut& aut, const std::vector<typename Aut::event_type>& word,
                          const std::vector<trace_step<typename Aut::state_type>>& trace,
                          std::uint32_t h) {
    using state = typename Aut::state_type;
    const std::size_t k = trace.size();
    if (k > h || k > 63) return false;

    std::unordered_map<state, std::uint64_t> cur, next;
    cur[aut.initial_state()] = 1;  // bit j set: first j trace entries matched
    for (std::size_t p = 0; p < word.size(); ++p) {
        next.clear();
        for (const auto& [q, mask] : cur) {
            aut.for_each_transition(q, word[p], [&](const state& q2, bool relevant) {
                if (!relevant) {
                    next[q2] |= mask;
                    return;
                }
                std::uint64_t m2 = 0;
                for (std::size_t j = 0; j <= k; ++j) {
                    if (!(mask >> j & 1)) continue;
                    if (j < k && trace[j].src == q && trace[j].dst == q2 && trace[j].pos == p)
                        m2 |= std::uint64_t{1} << (j + 1);
                    if (j == 0 && k == h) m2 |= 1;  // still before the window
                }
                if (m2) next[q2] |= m2;
            });
        }
        cur.swap(next);
        if (cur.empty()) return false;
    }
    for (const auto& [q, mask] : cur)
        if ((mask >> k & 1) && aut.is_accepting(q)) return true;
    return false;
}

// ---- exhaustive capture-group search --------------------------------------

// For each text position where some (unanchored) match of `pattern` ends,
// every possible list of group-instance start positions, truncated to the
// last h. A group instance that consumes no characters records no start;
// instances starting at the same position collapse into one entry.
struct capture_result {
    std::map<std::size_t, std::set<std::vector<std::size_t>>> by_end;
};

namespace detail {

class backtrack_matcher {
public:
    backtrack_matcher(const regex_node& ast, std::string_view text, std::size_t step_bound)
        : ast_(ast), text_(text), bound_(step_bound) {}

    // Calls `found(end, starts)` for every match of the pattern beginning
    // at `from`; `starts` is unsorted and may contain duplicates.
    void matches_from(std::size_t from,
                      const std::function<void(std::size_t, const std::vector<std::size_t>&)>& found) {
        found_ = &found;
        match(ast_, from, [&](std::size_t end) { (*found_)(end, starts_); });
    }

private:
    using cont = std::function<void(std::size_t)>;

    void match(const regex_node& n, std::size_t pos, const cont& k) {
        if (++steps_ > bound_) throw error("backtracking matcher exceeded its step bound");
        switch (n.k) {
            case regex_node::kind::leaf:
                if (pos < text_.size() && n.m.matches(text_[pos])) k(pos + 1);
                return;
            case regex_node::kind::concat:
                match_seq(n.kids, 0, pos, k);
                return;
            case regex_node::kind::alt:
                for (const regex_node& kid : n.kids) match(kid, pos, k);
                return;
            case regex_node::kind::group:
                match(n.kids[0], pos, [&](std::size_t end) {
                    if (end > pos) {
                        starts_.push_back(pos);
                        k(end);
                        starts_.pop_back();
                    } else {
                        k(end);
                    }
                });
                return;
            case regex_node::kind::repeat:
                match_rep(n, 0, pos, k);
                return;
        }
    }

    void match_seq(const std::vector<regex_node>& kids, std::size_t i, std::size_t pos,
                   const cont& k) {
        if (i == kids.size()) {
            k(pos);
            return;
        }
        match(kids[i], pos, [&](std::size_t end) { match_seq(kids, i + 1, end, k); });
    }

    void match_rep(const regex_node& n, std::uint32_t done, std::size_t pos, const cont& k) {
        if (done >= n.min) k(pos);
        if (done == n.max) return;
        match(n.kids[0], pos, [&](std::size_t end) {
            if (end > pos)
                match_rep(n, done + 1, end, k);
            else if (done < n.min)
                k(end);  // an empty iteration can pad out the minimum
        });
    }

    const regex_node& ast_;
    std::string_view text_;
    std::size_t bound_;
    std::size_t steps_ = 0;
    std::vector<std::size_t> starts_;
    const std::function<void(std::size_t, const std::vector<std::size_t>&)>* found_ = nullptr;
};

}  // namespace detail

inline capture_result brute_capture_starts(std::string_view pattern, std::string_view text,
                                           std::uint32_t h, std::size_t step_bound = 1000000) {
    regex_node ast = parse_regex(pattern);
    capture_result res;
    detail::backtrack_matcher m(ast, text, step_bound);
    for (std::size_t s = 0; s <= text.size(); ++s) {
        m.matches_from(s, [&](std::size_t end, const std::vector<std::size_t>& raw) {
            if (end == 0) return;  // nothing consumed yet, no report position
            std::vector<std::size_t> starts = raw;
            std::sort(starts.begin(), starts.end());
            starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
            if (starts.size() > h) starts.erase(starts.begin(), starts.end() - h);
            res.by_end[end - 1].insert(std::move(starts));
        });
    }
    return res;
}

}  // namespace treebuf::oracle
