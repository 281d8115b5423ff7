#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "oplog.hpp"

namespace treebuf::oracle {

constexpr std::uint32_t inf_height = std::numeric_limits<std::uint32_t>::max();

// The tree a run builds when nothing is ever reclaimed, with full parent
// links, activity flags and depths. Reference point for every space bound.
struct full_tree {
    struct node {
        std::string name;
        std::uint32_t parent = node_id::npos;  // index, npos at the root
        std::uint32_t depth = 0;
        bool active = false;
        std::vector<std::uint32_t> kids;
    };

    std::vector<node> nodes;  // creation order
    std::unordered_map<std::string, std::uint32_t> index;
    bool initialized = false;

    std::uint32_t find(const std::string& name) const {
        auto it = index.find(name);
        return it == index.end() ? node_id::npos : it->second;
    }

    std::size_t active_count() const {
        std::size_t n = 0;
        for (const node& x : nodes) n += x.active;
        return n;
    }
};

// Applies one op with naive semantics. Throws replay_error on the first
// invalid op, tagged with `index`.
inline void apply_op(full_tree& t, const op& o, std::size_t index) {
    auto need_active = [&](const std::string& name) -> std::uint32_t {
        std::uint32_t i = t.find(name);
        if (i == node_id::npos) throw replay_error("unknown node '" + name + "'", index);
        if (!t.nodes[i].active) throw replay_error("node '" + name + "' is not active", index);
        return i;
    };
    auto add_node = [&](const std::string& name, std::uint32_t parent) {
        if (t.find(name) != node_id::npos) throw replay_error("node name '" + name + "' reused", index);
        std::uint32_t i = static_cast<std::uint32_t>(t.nodes.size());
        full_tree::node n;
        n.name = name;
        n.parent = parent;
        n.depth = parent == node_id::npos ? 0 : t.nodes[parent].depth + 1;
        n.active = true;
        t.nodes.push_back(std::move(n));
        t.index.emplace(name, i);
        if (parent != node_id::npos) t.nodes[parent].kids.push_back(i);
    };

    switch (o.k) {
        case op::kind::init:
            if (t.initialized) throw replay_error("second init", index);
            t.initialized = true;
            add_node(o.a, node_id::npos);
            return;
        default: break;
    }
    if (!t.initialized) throw replay_error("operation before init", index);
    switch (o.k) {
        case op::kind::add:
            add_node(o.b, need_active(o.a));
            break;
        case op::kind::deact:
            t.nodes[need_active(o.a)].active = false;
            break;
        case op::kind::expand: {
            std::uint32_t x = need_active(o.a);
            for (const std::string& c : o.children) add_node(c, x);
            t.nodes[x].active = false;
            break;
        }
        case op::kind::hist:
            need_active(o.a);
            break;
        case op::kind::init: break;
    }
}

inline full_tree full_replay(const op_log& log) {
    full_tree t;
    for (std::size_t i = 0; i < log.ops.size(); ++i) apply_op(t, log.ops[i], i);
    return t;
}

// Height of every node: the shortest distance to an active node within its
// own subtree (active nodes have height 0, inf_height if none exists).
// Multi-source BFS upward through parent links.
inline std::vector<std::uint32_t> heights(const full_tree& t) {
    std::vector<std::uint32_t> h(t.nodes.size(), inf_height);
    std::deque<std::uint32_t> q;
    for (std::uint32_t i = 0; i < t.nodes.size(); ++i)
        if (t.nodes[i].active) {
            h[i] = 0;
            q.push_back(i);
        }
    while (!q.empty()) {
        std::uint32_t x = q.front();
        q.pop_front();
        std::uint32_t p = t.nodes[x].parent;
        if (p != node_id::npos && h[p] == inf_height) {
            h[p] = h[x] + 1;
            q.push_back(p);
        }
    }
    return h;
}

// H_{<n}: nodes with height below n — exactly the ones a future history
// call could return.
inline std::vector<std::uint32_t> needed_set(const full_tree& t, std::uint32_t n) {
    std::vector<std::uint32_t> out;
    std::vector<std::uint32_t> h = heights(t);
    for (std::uint32_t i = 0; i < h.size(); ++i)
        if (h[i] < n) out.push_back(i);
    return out;
}

inline std::size_t needed_count(const std::vector<std::uint32_t>& hs, std::uint32_t n) {
    std::size_t c = 0;
    for (std::uint32_t h : hs) c += (h < n);
    return c;
}

inline std::unordered_set<std::string> needed_names(const full_tree& t, std::uint32_t n) {
    std::unordered_set<std::string> out;
    for (std::uint32_t i : needed_set(t, n)) out.insert(t.nodes[i].name);
    return out;
}

// Recent/doomed partition at history depth h.
//
// level(x) = floor(depth(x)/h). A node is recent when some active node y in
// its subtree has level(y) <= level(x)+1. A node is doomed when it is
// inactive and each child is fringe (a representative with active count 0)
// or doomed.
struct recent_doomed {
    std::vector<bool> recent;
    std::vector<bool> doomed;
    std::vector<bool> fringe;
};

inline recent_doomed recent_and_doomed(const full_tree& t, std::uint32_t h) {
    const std::size_t n = t.nodes.size();
    std::vector<std::uint32_t> level(n), rep(n), cnt(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        level[i] = t.nodes[i].depth / h;
        std::uint32_t p = t.nodes[i].parent;
        rep[i] = (t.nodes[i].depth % h == 0) ? i : rep[p];
    }
    for (std::uint32_t i = 0; i < n; ++i)
        if (t.nodes[i].active) ++cnt[rep[i]];

    recent_doomed rd;
    rd.recent.assign(n, false);
    rd.doomed.assign(n, false);
    rd.fringe.assign(n, false);
    for (std::uint32_t i = 0; i < n; ++i)
        rd.fringe[i] = (t.nodes[i].depth % h == 0) && cnt[i] == 0;

    // children have larger indices than parents, so one reverse sweep
    // settles both bottom-up definitions
    std::vector<std::uint32_t> min_active_level(n, inf_height);
    for (std::uint32_t i = static_cast<std::uint32_t>(n); i-- > 0;) {
        if (t.nodes[i].active) min_active_level[i] = std::min(min_active_level[i], level[i]);
        bool all_cut = true;
        for (std::uint32_t c : t.nodes[i].kids) {
            min_active_level[i] = std::min(min_active_level[i], min_active_level[c]);
            all_cut = all_cut && (rd.fringe[c] || rd.doomed[c]);
        }
        rd.recent[i] = min_active_level[i] != inf_height && min_active_level[i] <= level[i] + 1;
        rd.doomed[i] = !t.nodes[i].active && all_cut;
    }
    return rd;
}

// ---- random op-log generation ------------------------------------------

struct log_gen_params {
    std::size_t length = 100;       // number of ops to emit (including init)
    double branch_bias = 0.5;       // probability of growing under the newest active node
    double deactivate_prob = 0.2;   // mixed mode only
    double hist_prob = 0.15;
    bool extensive = false;         // deact(x) only right after add(x, .)
    std::uint64_t seed = 1;
};

// Valid by construction; the extensive flag switches to sequences where
// every deactivate(x) immediately follows an add_child(x, y).
inline op_log generate_log(const log_gen_params& p) {
    std::mt19937_64 rng(p.seed);
    auto below = [&](std::uint64_t n) { return n == 0 ? 0 : rng() % n; };
    auto chance = [&](double q) { return (rng() >> 11) * 0x1.0p-53 < q; };

    op_log log;
    std::vector<std::string> active;
    std::size_t next = 0;
    auto fresh = [&] { return "n" + std::to_string(next++); };

    std::string root = fresh();
    log.ops.push_back(op::init(root));
    active.push_back(root);

    while (log.ops.size() < p.length && !active.empty()) {
        std::size_t pick = chance(p.branch_bias) ? active.size() - 1 : below(active.size());
        if (chance(p.hist_prob)) {
            log.ops.push_back(op::hist(active[below(active.size())]));
            continue;
        }
        if (p.extensive) {
            // grow-and-retire steps keep the sequence extensive
            if (chance(0.4)) {
                std::size_t n = 1 + below(3);
                std::vector<std::string> kids;
                for (std::size_t i = 0; i < n; ++i) kids.push_back(fresh());
                std::string parent = active[pick];
                active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
                for (const std::string& k : kids) active.push_back(k);
                log.ops.push_back(op::expand(std::move(parent), std::move(kids)));
            } else {
                std::string kid = fresh();
                log.ops.push_back(op::add(active[pick], kid));
                if (chance(p.deactivate_prob) && log.ops.size() < p.length) {
                    log.ops.push_back(op::deact(active[pick]));
                    active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
                }
                active.push_back(kid);
            }
            continue;
        }
        if (chance(p.deactivate_prob) && active.size() > 1) {
            std::size_t d = below(active.size());
            log.ops.push_back(op::deact(active[d]));
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(d));
            continue;
        }
        std::string kid = fresh();
        log.ops.push_back(op::add(active[pick], kid));
        active.push_back(kid);
    }
    return log;
}

}  // namespace treebuf::oracle
