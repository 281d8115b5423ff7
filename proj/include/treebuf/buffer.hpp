#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "metrics.hpp"

namespace treebuf {

enum class algo { naive, gc, amortized, realtime };

inline const char* to_string(algo a) noexcept {
    switch (a) {
        case algo::naive: return "naive";
        case algo::gc: return "gc";
        case algo::amortized: return "amortized";
        case algo::realtime: return "realtime";
    }
    return "?";
}

inline algo algo_from_string(std::string_view s) {
    if (s == "naive") return algo::naive;
    if (s == "gc") return algo::gc;
    if (s == "amortized") return algo::amortized;
    if (s == "realtime") return algo::realtime;
    throw invalid_parameter("unknown algorithm '" + std::string(s) +
                            "' (expected naive|gc|amortized|realtime)");
}

constexpr std::array<algo, 4> all_algos{algo::naive, algo::gc, algo::amortized, algo::realtime};

// Opaque node handle: a slot index plus a generation stamp, so handles to
// reclaimed nodes are detectable instead of silently aliasing new nodes.
struct node_id {
    static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

    std::uint32_t slot = npos;
    std::uint32_t gen = 0;

    bool valid() const noexcept { return slot != npos; }
    friend bool operator==(node_id, node_id) = default;
};

struct node_id_hash {
    std::size_t operator()(node_id id) const noexcept {
        return (std::size_t(id.slot) << 32) ^ id.gen;
    }
};

// Events fired after each successful primitive operation, for instrumentation
// (e.g. mirroring a run into the reference replayer). `expand` fires one
// add_child event per new node followed by a deactivate event.
struct buffer_event {
    enum class kind { initialize, add_child, deactivate, history };
    kind k;
    node_id node;    // the new node (initialize/add_child) or the target
    node_id parent;  // add_child only
};

// A tree that stores a payload per node and answers history(x) queries:
// the chain from x up through its nearest ancestors, at most `h` nodes.
// Nodes are active or inactive; add_child/deactivate/history require an
// active argument and deactivation is permanent. Four interchangeable
// algorithms manage reclamation of nodes no future history call can reach.
//
// Instances are strictly single-threaded; distinct instances are
// independent.
template <typename P>
class tree_buffer {
public:
    tree_buffer(std::uint32_t h, algo a) : h_(h), algo_(a) {
        if (h == 0) throw invalid_parameter("history depth h must be >= 1");
    }

    std::uint32_t h() const noexcept { return h_; }
    algo algorithm() const noexcept { return algo_; }
    const metrics& stats() const noexcept { return m_; }

    node_id initialize(P payload) {
        if (initialized_) throw invalid_sequence("buffer already initialized");
        op_scope op(*this);
        node_id root = alloc(std::move(payload));
        record& r = rec(root);
        r.parent = node_id{};
        touch(1);  // parent := nil
        r.children = 0;
        touch(1);  // children := 0
        activate(root);
        if (algo_ == algo::realtime) {
            r.depth = 0;
            r.rep = root;
            r.cnt = 1;
            touch(3);
        }
        initialized_ = true;
        fire({buffer_event::kind::initialize, root, node_id{}});
        return op.commit(root);
    }

    node_id add_child(node_id x, P payload) {
        check_active(x, "add_child");
        op_scope op(*this);
        node_id y = add_child_impl(x, std::move(payload));
        return op.commit(y);
    }

    void deactivate(node_id x) {
        check_active(x, "deactivate");
        op_scope op(*this);
        deactivate_impl(x);
        op.commit();
    }

    // Composite: add_child for each payload, then deactivate(x).
    // Counted as a single operation in the metrics.
    std::vector<node_id> expand(node_id x, std::vector<P> payloads) {
        check_active(x, "expand");
        op_scope op(*this);
        std::vector<node_id> out;
        out.reserve(payloads.size());
        for (P& p : payloads) out.push_back(add_child_impl(x, std::move(p)));
        deactivate_impl(x);
        return op.commit(std::move(out));
    }

    // x and its nearest proper ancestors, at most h nodes, oldest first.
    std::vector<std::pair<node_id, P>> history(node_id x) {
        check_active(x, "history");
        op_scope op(*this);
        touch(1);  // activity assertion
        std::vector<std::pair<node_id, P>> out;
        node_id cur = x;
        for (std::uint32_t i = 0; i < h_ && cur.valid(); ++i) {
            const record& r = rec(cur);
            out.emplace_back(cur, r.payload);
            touch(1);  // payload read
            cur = r.parent;
            touch(1);  // parent read
        }
        std::reverse(out.begin(), out.end());
        fire({buffer_event::kind::history, x, node_id{}});
        return op.commit(std::move(out));
    }

    // ---- queries (uninstrumented, usable at any time) -------------------

    bool contains(node_id id) const noexcept {
        return id.valid() && id.slot < slots_.size() && slots_[id.slot].has_value() &&
               gens_[id.slot] == id.gen;
    }
    bool is_active(node_id id) const noexcept { return contains(id) && slots_[id.slot]->active; }
    const P& payload(node_id id) const { return crec(id).payload; }
    std::uint32_t children_of(node_id id) const { return crec(id).children; }
    std::uint32_t depth_of(node_id id) const { return crec(id).depth; }
    node_id rep_of(node_id id) const { return crec(id).rep; }
    std::uint32_t cnt_of(node_id id) const { return crec(id).cnt; }
    std::uint64_t mem() const noexcept { return mem_; }
    std::uint64_t mem_old() const noexcept { return mem_old_; }

    std::vector<node_id> live_nodes() const {
        std::vector<node_id> out;
        for (std::uint32_t s = 0; s < slots_.size(); ++s)
            if (slots_[s].has_value()) out.push_back(node_id{s, gens_[s]});
        return out;
    }

    std::vector<node_id> active_nodes() const {
        std::vector<node_id> out;
        for (std::uint32_t s = active_head_; s != node_id::npos; s = slots_[s]->next_active)
            out.push_back(node_id{s, gens_[s]});
        return out;
    }

    std::vector<node_id> deletion_queue() const { return {queue_.begin(), queue_.end()}; }

    void set_event_hook(std::function<void(const buffer_event&)> hook) {
        hook_ = std::move(hook);
    }

    // ---- algorithm internals, exposed for direct exercise ---------------

    // Breadth-first collection: keeps exactly the nodes some future history
    // call can return. Runs after every deactivate under `gc` and on the
    // doubling trigger under `amortized`.
    void gc_collect() {
        op_scope op(*this);
        gc_collect_impl();
        op.commit();
    }

    // Reference-counted release of a dead (inactive, childless) node,
    // cascading to its parent.
    void release_if_dead(node_id x) {
        if (!contains(x)) throw invalid_sequence("release_if_dead: stale node handle");
        op_scope op(*this);
        release_if_dead_impl(x.slot);
        op.commit();
    }

    // Re-checks the amortized doubling condition; returns whether a
    // collection ran.
    bool amortized_trigger() {
        op_scope op(*this);
        bool ran = amortized_trigger_impl();
        return op.commit(ran);
    }

    // Real-time primitives: detach a node from its parent / delete one
    // queued node.
    void cut_parent(node_id y) {
        if (!contains(y)) throw invalid_sequence("cut_parent: stale node handle");
        op_scope op(*this);
        cut_parent_impl(y.slot);
        op.commit();
    }

    void process_queue_once() {
        op_scope op(*this);
        process_queue_impl();
        op.commit();
    }

private:
    static constexpr std::uint32_t npos = node_id::npos;

    struct record {
        node_id parent{};
        std::uint32_t children = 0;
        bool active = false;
        std::uint32_t depth = 0;   // realtime
        node_id rep{};             // realtime
        std::uint32_t cnt = 0;     // realtime, meaningful on representatives
        std::uint32_t prev_active = npos;
        std::uint32_t next_active = npos;
        P payload;

        explicit record(P&& p) : payload(std::move(p)) {}
    };

    // RAII scope around each top-level operation: harvests the per-op
    // reference count into the metrics on success, discards it on error.
    class op_scope {
    public:
        explicit op_scope(tree_buffer& b) : b_(b), top_(b.op_depth_ == 0) {
            ++b_.op_depth_;
            if (top_) b_.op_refs_ = 0;
        }
        ~op_scope() {
            --b_.op_depth_;
            if (top_ && !committed_) b_.op_refs_ = 0;
        }
        op_scope(const op_scope&) = delete;
        op_scope& operator=(const op_scope&) = delete;

        void commit() {
            if (top_) {
                b_.m_.record_op(b_.op_refs_);
                b_.op_refs_ = 0;
            }
            committed_ = true;
        }
        template <typename T>
        T commit(T v) {
            commit();
            return v;
        }

    private:
        tree_buffer& b_;
        bool top_;
        bool committed_ = false;
    };
    friend class op_scope;

    void touch(std::uint64_t n) noexcept { op_refs_ += n; }

    record& rec(node_id id) {
        if (!contains(id)) throw invalid_sequence("stale or unknown node handle");
        return *slots_[id.slot];
    }
    const record& crec(node_id id) const {
        if (!contains(id)) throw invalid_sequence("stale or unknown node handle");
        return *slots_[id.slot];
    }

    void check_active(node_id x, const char* what) const {
        if (!contains(x))
            throw invalid_sequence(std::string(what) + ": stale or unknown node handle");
        if (!slots_[x.slot]->active)
            throw invalid_sequence(std::string(what) + ": node is not active");
    }

    node_id alloc(P&& payload) {
        std::uint32_t s;
        if (!free_.empty()) {
            s = free_.back();
            free_.pop_back();
            slots_[s].emplace(std::move(payload));
        } else {
            s = static_cast<std::uint32_t>(slots_.size());
            slots_.emplace_back(std::in_place, std::move(payload));
            gens_.push_back(0);
            seen_stamp_.push_back(0);
        }
        ++mem_;
        ++m_.cur_nodes;
        if (m_.cur_nodes > m_.peak_nodes) m_.peak_nodes = m_.cur_nodes;
        return node_id{s, gens_[s]};
    }

    void dealloc(std::uint32_t s) {
        if (slots_[s]->active) unlink_active(s);
        slots_[s].reset();
        ++gens_[s];
        free_.push_back(s);
        --mem_;
        --m_.cur_nodes;
    }

    void activate(node_id id) {
        record& r = *slots_[id.slot];
        r.active = true;
        r.prev_active = active_tail_;
        r.next_active = npos;
        if (active_tail_ != npos)
            slots_[active_tail_]->next_active = id.slot;
        else
            active_head_ = id.slot;
        active_tail_ = id.slot;
        touch(1);  // active-set insert
    }

    void unlink_active(std::uint32_t s) {
        record& r = *slots_[s];
        if (!r.active) return;
        if (r.prev_active != npos)
            slots_[r.prev_active]->next_active = r.next_active;
        else
            active_head_ = r.next_active;
        if (r.next_active != npos)
            slots_[r.next_active]->prev_active = r.prev_active;
        else
            active_tail_ = r.prev_active;
        r.active = false;
        r.prev_active = r.next_active = npos;
    }

    // ---- per-algorithm operation bodies ---------------------------------

    node_id add_child_impl(node_id x, P&& payload) {
        // Revalidate: inside expand the parent stays active between adds,
        // but a direct call must fail fast on its own.
        check_active(x, "add_child");
        touch(1);  // activity assertion
        node_id y = alloc(std::move(payload));
        record& ry = rec(y);
        record& rx = rec(x);
        ry.parent = x;
        touch(1);
        rx.children += 1;
        touch(2);
        activate(y);
        switch (algo_) {
            case algo::naive:
            case algo::gc:
                break;
            case algo::amortized:
                amortized_trigger_impl();
                break;
            case algo::realtime: {
                ry.depth = rx.depth + 1;
                touch(2);  // depth(x) read, depth(y) write
                touch(1);  // depth(y) read for the mod-h test
                if (ry.depth % h_ == 0) {
                    ry.rep = y;
                    touch(1);
                } else {
                    ry.rep = rx.rep;
                    touch(2);  // rep(x) read, rep(y) write
                }
                touch(1);  // rep(y) read
                rec(ry.rep).cnt += 1;
                touch(2);
                process_queue_impl();
                break;
            }
        }
        fire({buffer_event::kind::add_child, y, x});
        return y;
    }

    void deactivate_impl(node_id x) {
        check_active(x, "deactivate");
        touch(1);  // activity assertion
        std::uint32_t s = x.slot;
        unlink_active(s);
        touch(1);  // active-set remove
        switch (algo_) {
            case algo::naive:
                break;
            case algo::gc:
                release_if_dead_impl(s);
                gc_collect_impl();
                break;
            case algo::amortized:
                release_if_dead_impl(s);
                break;
            case algo::realtime: {
                record& r = *slots_[s];
                node_id rp = r.rep;
                touch(1);  // rep(x) read
                rec(rp).cnt -= 1;
                touch(2);
                touch(1);  // children(x) read
                if (r.children == 0) {
                    queue_.push_back(x);
                    touch(1);  // enqueue
                }
                touch(2);  // rep(x) read, cnt read for the zero test
                if (rec(rp).cnt == 0) cut_parent_impl(rp.slot);
                process_queue_impl();
                break;
            }
        }
        fire({buffer_event::kind::deactivate, x, node_id{}});
    }

    // ---- gc / amortized internals ----------------------------------------

    bool amortized_trigger_impl() {
        if (mem_ == 2 * mem_old_) {
            gc_collect_impl();
            mem_old_ = mem_;
            return true;
        }
        return false;
    }

    void gc_collect_impl() {
        ++gc_epoch_;
        level_a_.clear();
        for (std::uint32_t s = active_head_; s != npos; s = slots_[s]->next_active) {
            seen_stamp_[s] = gc_epoch_;
            touch(1);  // Seen insert
            level_a_.push_back(s);
            touch(1);  // Level append
        }
        std::vector<std::uint32_t>* level = &level_a_;
        std::vector<std::uint32_t>* next = &level_b_;
        for (std::uint32_t i = 1; i < h_ && !level->empty(); ++i) {
            next->clear();
            for (std::uint32_t y : *level) {
                touch(1);  // Level element visit
                node_id p = slots_[y]->parent;
                touch(1);  // parent read
                if (p.valid()) {
                    touch(1);  // Seen membership test
                    if (seen_stamp_[p.slot] != gc_epoch_) {
                        seen_stamp_[p.slot] = gc_epoch_;
                        touch(1);  // Seen insert
                        next->push_back(p.slot);
                        touch(1);  // NextLevel append
                    }
                }
            }
            std::swap(level, next);
        }
        for (std::uint32_t y : *level) {
            touch(1);  // Level element visit
            delete_parent(y);
        }
    }

    // Detach y from its parent; release the parent if that left it dead.
    void delete_parent(std::uint32_t y) {
        node_id p = slots_[y]->parent;
        touch(1);  // parent read
        slots_[y]->parent = node_id{};
        touch(1);  // parent write
        if (p.valid()) {
            slots_[p.slot]->children -= 1;
            touch(2);
            release_if_dead_impl(p.slot);
        }
    }

    void release_if_dead_impl(std::uint32_t s) {
        for (;;) {
            record& r = *slots_[s];
            touch(2);  // activity test, children read
            if (r.active || r.children != 0) return;
            node_id p = r.parent;
            touch(1);  // parent read
            r.parent = node_id{};
            touch(1);  // parent write
            dealloc(s);
            if (!p.valid()) return;
            slots_[p.slot]->children -= 1;
            touch(2);
            s = p.slot;
        }
    }

    // ---- realtime internals ----------------------------------------------

    void cut_parent_impl(std::uint32_t y) {
        record& r = *slots_[y];
        node_id p = r.parent;
        touch(1);  // parent read
        if (p.valid()) {
            record& rp = *slots_[p.slot];
            rp.children -= 1;
            touch(2);
            touch(1);  // activity test
            if (rp.children == 0 && !rp.active) {
                queue_.push_back(p);
                touch(1);  // enqueue
            }
        }
        r.parent = node_id{};
        touch(1);  // parent write
    }

    void process_queue_impl() {
        if (queue_.empty()) return;
        node_id x = queue_.front();
        queue_.pop_front();
        touch(1);  // dequeue
        cut_parent_impl(x.slot);
        dealloc(x.slot);
    }

    void fire(const buffer_event& e) {
        if (hook_) hook_(e);
    }

    std::uint32_t h_;
    algo algo_;
    bool initialized_ = false;

    std::vector<std::optional<record>> slots_;
    std::vector<std::uint32_t> gens_;
    std::vector<std::uint32_t> free_;
    std::uint32_t active_head_ = npos;
    std::uint32_t active_tail_ = npos;

    std::uint64_t mem_ = 0;
    std::uint64_t mem_old_ = 1;
    std::deque<node_id> queue_;

    std::uint32_t gc_epoch_ = 0;
    std::vector<std::uint32_t> seen_stamp_;
    std::vector<std::uint32_t> level_a_, level_b_;

    metrics m_;
    std::uint32_t op_depth_ = 0;
    std::uint64_t op_refs_ = 0;
    std::function<void(const buffer_event&)> hook_;
};

}  // namespace treebuf
