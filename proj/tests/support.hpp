#pragma once

#include <random>
#include <unordered_map>
#include <unordered_set>

#include <treebuf/buffer.hpp>
#include <treebuf/finite_nfa.hpp>
#include <treebuf/oplog.hpp>
#include <treebuf/oracle.hpp>
#include <treebuf/oracle_runs.hpp>

namespace tsup {

using namespace treebuf;

// Desugars expand into add_child* + deactivate so callbacks see every
// primitive modifying operation.
inline std::vector<op> primitive_ops(const op_log& log, bool keep_hist = false) {
    std::vector<op> prim;
    for (const op& o : log.ops) {
        if (o.k == op::kind::expand) {
            for (const std::string& c : o.children) prim.push_back(op::add(o.a, c));
            prim.push_back(op::deact(o.a));
        } else if (o.k != op::kind::hist || keep_hist) {
            prim.push_back(o);
        }
    }
    return prim;
}

// Drives a log through a buffer and the reference replay in lock step,
// calling fn(buffer, shadow, name_map) after every primitive modifying op.
template <typename F>
void scan_log(const op_log& log, algo a, std::uint32_t h, F&& fn) {
    tree_buffer<std::string> buf(h, a);
    oracle::full_tree shadow;
    std::unordered_map<std::string, node_id> ids;
    std::size_t idx = 0;
    for (const op& o : primitive_ops(log)) {
        oracle::apply_op(shadow, o, idx);
        switch (o.k) {
            case op::kind::init: ids[o.a] = buf.initialize(o.a); break;
            case op::kind::add: ids[o.b] = buf.add_child(ids.at(o.a), o.b); break;
            case op::kind::deact: buf.deactivate(ids.at(o.a)); break;
            default: break;
        }
        fn(buf, shadow, ids);
        ++idx;
    }
}

inline std::unordered_set<std::string> live_names(const tree_buffer<std::string>& buf) {
    std::unordered_set<std::string> out;
    for (node_id id : buf.live_nodes()) out.insert(buf.payload(id));
    return out;
}

// Small random automaton over a prefix of {a,b,c}: at most two targets per
// (state, symbol), random relevance, random (possibly empty) accepting set.
inline finite_nfa random_nfa(std::mt19937_64& rng, int states = 5, int alphabet = 3) {
    int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(states));
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back(std::to_string(i));
    std::vector<finite_nfa::row> rows;
    for (int q = 0; q < n; ++q)
        for (int c = 0; c < alphabet; ++c) {
            int fan = static_cast<int>(rng() % 3);  // 0, 1 or 2 targets
            for (int t = 0; t < fan; ++t) {
                int dst = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
                bool rel = rng() % 2 == 0;
                rows.push_back({q, symbol_matcher::literal(static_cast<char>('a' + c)), dst, rel});
            }
        }
    std::vector<bool> accepting(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) accepting[static_cast<std::size_t>(i)] = rng() % 10 < 3;
    return finite_nfa(std::move(names), 0, std::move(accepting), std::move(rows));
}

inline std::vector<char> random_word(std::mt19937_64& rng, std::size_t max_len, int alphabet = 3) {
    std::size_t len = rng() % (max_len + 1);
    std::vector<char> w;
    for (std::size_t i = 0; i < len; ++i)
        w.push_back(static_cast<char>('a' + rng() % static_cast<std::uint64_t>(alphabet)));
    return w;
}

// The last <= h relevant transitions of a run, with their positions.
template <typename State>
std::vector<oracle::trace_step<State>> relevant_suffix(
    const std::vector<oracle::run_step<State>>& run, std::uint32_t h) {
    std::vector<oracle::trace_step<State>> all;
    for (std::size_t i = 0; i < run.size(); ++i)
        if (run[i].relevant) all.push_back({run[i].src, run[i].dst, i});
    if (all.size() > h) all.erase(all.begin(), all.end() - h);
    return all;
}

}  // namespace tsup
