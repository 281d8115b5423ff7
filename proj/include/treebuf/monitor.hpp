#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "buffer.hpp"

namespace treebuf {

// An automaton usable with `monitor` provides:
//
//   using state_type = ...;   // equality-comparable, std::hash-able
//   using event_type = ...;
//   state_type initial_state() const;
//   bool is_accepting(const state_type&) const;
//   template <typename F> void for_each_transition(const state_type&, const event_type&, F&&) const;
//       // calls F(const state_type& target, bool relevant) in a fixed order
//   std::string state_label(const state_type&) const;
//
// The state set may be unbounded; transitions are generated on demand.

template <typename State, typename Loc>
struct error_report {
    struct entry {
        State src;
        State dst;
        Loc loc;
        friend bool operator==(const entry&, const entry&) = default;
    };

    std::size_t position = 0;  // index of the event that triggered the report
    State state{};             // accepting state reached
    std::vector<entry> trace;  // last <= h relevant transitions, oldest first
};

// `pos=<i> state=<q> trace=<src->dst@loc;...>`
template <typename Aut, typename Loc>
std::string format_report(const Aut& aut,
                          const error_report<typename Aut::state_type, Loc>& r) {
    std::ostringstream os;
    os << "pos=" << r.position << " state=" << aut.state_label(r.state) << " trace=";
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        if (i) os << ';';
        os << aut.state_label(r.trace[i].src) << "->" << aut.state_label(r.trace[i].dst) << '@'
           << r.trace[i].loc;
    }
    return os.str();
}

// Simulates a nondeterministic automaton over an event stream, recording the
// relevant transition taken into a tree buffer node per frontier pair, and
// reports an error trace whenever an accepting state is reached.
template <typename Aut, typename Loc = std::size_t>
class monitor {
public:
    using state_type = typename Aut::state_type;
    using event_type = typename Aut::event_type;
    using report_type = error_report<state_type, Loc>;

    // What each buffer node stores: the relevant transition that created it.
    struct payload {
        state_type src;
        state_type dst;
        Loc loc;
        bool sentinel;  // the root's pseudo-transition into the initial state
    };

    monitor(Aut aut, std::uint32_t h, algo a)
        : aut_(std::move(aut)), buf_(h, a) {
        node_id root = buf_.initialize(payload{aut_.initial_state(), aut_.initial_state(), Loc{}, true});
        now_.emplace_back(aut_.initial_state(), root);
    }

    // Consumes one event; returns the reports it triggered, in frontier order.
    std::vector<report_type> step(const event_type& ev, const Loc& loc) {
        std::vector<report_type> reports;
        nxt_.clear();
        in_nxt_state_.clear();
        in_nxt_node_.clear();

        for (const auto& [q, parent] : now_) {
            aut_.for_each_transition(q, ev, [&](const state_type& q2, bool relevant) {
                if (in_nxt_state_.count(q2)) return;
                node_id child = relevant
                                    ? buf_.add_child(parent, payload{q, q2, loc, false})
                                    : parent;
                nxt_.emplace_back(q2, child);
                in_nxt_state_.insert(q2);
                in_nxt_node_.insert(child);
                if (aut_.is_accepting(q2)) reports.push_back(make_report(q2, child));
            });
        }

        // retire frontier nodes that no surviving pair kept; a node shared
        // by several pairs is deactivated once
        deactivated_.clear();
        for (const auto& [q, node] : now_) {
            if (in_nxt_node_.count(node) || deactivated_.count(node)) continue;
            buf_.deactivate(node);
            deactivated_.insert(node);
        }

        now_.swap(nxt_);
        ++pos_;
        return reports;
    }

    template <typename Events>
    std::vector<report_type> run_stream(const Events& events) {
        std::vector<report_type> all;
        for (const auto& [ev, loc] : events) {
            auto r = step(ev, loc);
            all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
        }
        return all;
    }

    const Aut& automaton() const noexcept { return aut_; }
    tree_buffer<payload>& buffer() noexcept { return buf_; }
    const tree_buffer<payload>& buffer() const noexcept { return buf_; }
    std::size_t position() const noexcept { return pos_; }

    std::vector<state_type> frontier_states() const {
        std::vector<state_type> out;
        for (const auto& [q, n] : now_) out.push_back(q);
        return out;
    }

private:
    report_type make_report(const state_type& q, node_id node) {
        report_type r;
        r.position = pos_;
        r.state = q;
        for (auto& [id, pl] : buf_.history(node)) {
            if (pl.sentinel) continue;
            r.trace.push_back({std::move(pl.src), std::move(pl.dst), std::move(pl.loc)});
        }
        return r;
    }

    Aut aut_;
    tree_buffer<payload> buf_;
    std::vector<std::pair<state_type, node_id>> now_;
    std::vector<std::pair<state_type, node_id>> nxt_;
    std::unordered_set<state_type> in_nxt_state_;
    std::unordered_set<node_id, node_id_hash> in_nxt_node_;
    std::unordered_set<node_id, node_id_hash> deactivated_;
    std::size_t pos_ = 0;
};

// Runs a character automaton over text; locations are byte offsets.
template <typename Aut>
std::vector<error_report<typename Aut::state_type, std::size_t>> run_text(
    monitor<Aut, std::size_t>& m, std::string_view text) {
    std::vector<error_report<typename Aut::state_type, std::size_t>> all;
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto r = m.step(text[i], i);
        all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    return all;
}

}  // namespace treebuf
