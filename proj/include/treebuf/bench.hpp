#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "buffer.hpp"
#include "finite_nfa.hpp"
#include "hasnext.hpp"
#include "monitor.hpp"
#include "oplog.hpp"
#include "oracle.hpp"

namespace treebuf {

// ---- dataset generators ----------------------------------------------------

// Linear-buffer workload: init 0; expand 0 {1}; ...; expand n-1 {n}.
inline op_log gen_chain(std::uint64_t n) {
    op_log log;
    log.ops.reserve(n + 1);
    log.ops.push_back(op::init("0"));
    for (std::uint64_t i = 0; i < n; ++i)
        log.ops.push_back(op::expand(std::to_string(i), {std::to_string(i + 1)}));
    return log;
}

// Worst case for per-deactivate collection: k rounds of
// add(0, 2i-1); add(0, 2i); deact(2i) under a permanently active root.
inline op_log gen_adversarial(std::uint64_t k) {
    op_log log;
    log.ops.reserve(3 * k + 1);
    log.ops.push_back(op::init("0"));
    for (std::uint64_t i = 1; i <= k; ++i) {
        log.ops.push_back(op::add("0", std::to_string(2 * i - 1)));
        log.ops.push_back(op::add("0", std::to_string(2 * i)));
        log.ops.push_back(op::deact(std::to_string(2 * i)));
    }
    return log;
}

// Pseudo-random lowercase text with word structure, `bytes` characters.
inline std::string gen_text(std::size_t bytes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::string out;
    out.reserve(bytes);
    while (out.size() < bytes) {
        std::size_t len = 1 + rng() % 12;
        for (std::size_t i = 0; i < len && out.size() < bytes; ++i)
            out.push_back(static_cast<char>('a' + rng() % 26));
        if (out.size() < bytes) out.push_back(' ');
    }
    return out;
}

struct rv_trace {
    std::vector<rv_trace_entry> events;
    std::vector<std::size_t> bug_positions;  // indices of next-events lacking validation
};

// Interleaved iter/hasNext/next/other stream over `iterators` distinct
// values, `events_per_iter` next-events each (plus validation and noise
// events around them). A `bug_rate` fraction of next events is emitted
// without a preceding successful hasNext.
inline rv_trace gen_iter_trace(std::uint32_t iterators, std::uint32_t events_per_iter,
                               double bug_rate, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto chance = [&](double q) { return (rng() >> 11) * 0x1.0p-53 < q; };

    rv_trace out;
    std::vector<bool> validated(iterators + 1, false);
    std::vector<std::uint32_t> budget(iterators + 1, events_per_iter);

    auto emit = [&](rv_event::name n, std::int64_t k, bool bug = false) {
        if (bug) out.bug_positions.push_back(out.events.size());
        out.events.push_back({{n, k}, "synthetic:" + std::to_string(out.events.size())});
    };

    std::vector<std::int64_t> alive;
    for (std::uint32_t k = 1; k <= iterators; ++k) {
        emit(rv_event::name::iter, k);
        alive.push_back(k);
    }
    while (!alive.empty()) {
        std::size_t pick = rng() % alive.size();
        std::int64_t k = alive[pick];
        std::size_t ki = static_cast<std::size_t>(k);
        if (budget[ki] == 0) {
            alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pick));
            continue;
        }
        double roll = (rng() >> 11) * 0x1.0p-53;
        if (roll < 0.2) {
            emit(rv_event::name::other, k);
            continue;
        }
        if (roll < 0.4) {
            emit(rv_event::name::has_next, k);
            validated[ki] = true;
            continue;
        }
        --budget[ki];
        if (chance(bug_rate)) {
            if (validated[ki]) {
                emit(rv_event::name::next, k);  // consumes the validation
                validated[ki] = false;
            }
            emit(rv_event::name::next, k, true);
        } else {
            if (!validated[ki]) emit(rv_event::name::has_next, k);
            emit(rv_event::name::next, k);
            validated[ki] = false;
        }
    }
    return out;
}

// ---- measurement ------------------------------------------------------------

struct metrics_row {
    std::string dataset;
    algo algorithm = algo::naive;
    std::uint32_t h = 1;
    std::uint64_t ops = 0;
    std::uint64_t total_refs = 0;
    double avg_refs_per_op = 0;
    std::uint64_t max_refs_per_op = 0;
    std::uint64_t peak_nodes = 0;
    std::uint64_t final_nodes = 0;
    std::optional<std::uint64_t> optimal_peak_nodes;
};

struct bench_request {
    std::string dataset;  // chain | adversarial | regex | rv
    algo algorithm = algo::realtime;
    std::uint32_t h = 100;
    std::uint64_t n = 100000;  // chain ops / adversarial rounds / text bytes / rv events
    std::uint64_t seed = 1;
    bool with_oracle = false;
    std::uint32_t iterators = 20;
    double bug_rate = 0.01;
};

struct bench_outcome {
    metrics_row row;
    metrics m;
};

constexpr std::uint64_t oracle_op_limit = 10000;

// Running max of |H_{<h}| over the reference replay, sampled after every
// modifying operation (expand desugared). Quadratic; callers gate on size.
inline std::uint64_t optimal_peak(const op_log& log, std::uint32_t h) {
    oracle::full_tree t;
    std::uint64_t peak = 0;
    std::size_t idx = 0;
    auto sample = [&] {
        std::uint64_t c = oracle::needed_count(oracle::heights(t), h);
        if (c > peak) peak = c;
    };
    for (const op& o : log.ops) {
        if (o.k == op::kind::expand) {
            for (const std::string& c : o.children) {
                oracle::apply_op(t, op::add(o.a, c), idx);
                sample();
            }
            oracle::apply_op(t, op::deact(o.a), idx);
            sample();
        } else {
            oracle::apply_op(t, o, idx);
            if (o.modifying() || o.k == op::kind::init) sample();
        }
        ++idx;
    }
    return peak;
}

// Mirrors every primitive buffer operation into an op log, for offline
// oracle scans of monitor-driven runs. Attaching to a buffer that already
// holds its root records the initialize retroactively.
template <typename P>
class op_recorder {
public:
    explicit op_recorder(tree_buffer<P>& buf) {
        std::vector<node_id> live = buf.live_nodes();
        if (live.size() > 1)
            throw invalid_parameter("op_recorder must attach before the first add_child");
        if (live.size() == 1) log_.ops.push_back(op::init(nm(live[0])));
        buf.set_event_hook([this](const buffer_event& e) {
            switch (e.k) {
                case buffer_event::kind::initialize: log_.ops.push_back(op::init(nm(e.node))); break;
                case buffer_event::kind::add_child:
                    log_.ops.push_back(op::add(nm(e.parent), nm(e.node)));
                    break;
                case buffer_event::kind::deactivate: log_.ops.push_back(op::deact(nm(e.node))); break;
                case buffer_event::kind::history: log_.ops.push_back(op::hist(nm(e.node))); break;
            }
        });
    }

    const op_log& log() const noexcept { return log_; }

private:
    static std::string nm(node_id id) {
        return "s" + std::to_string(id.slot) + "g" + std::to_string(id.gen);
    }
    op_log log_;
};

inline bench_outcome run_bench(const bench_request& req) {
    bench_outcome out;
    out.row.dataset = req.dataset;
    out.row.algorithm = req.algorithm;
    out.row.h = req.h;

    std::optional<op_log> oracle_log;
    metrics m;

    if (req.dataset == "chain" || req.dataset == "adversarial") {
        op_log log = req.dataset == "chain" ? gen_chain(req.n) : gen_adversarial(req.n);
        tree_buffer<std::string> buf(req.h, req.algorithm);
        replay(buf, log);
        m = buf.stats();
        if (req.with_oracle) oracle_log = std::move(log);
    } else if (req.dataset == "regex") {
        std::string text = gen_text(req.n, req.seed);
        monitor<finite_nfa> mon(builtin_fig5(), req.h, req.algorithm);
        std::optional<op_recorder<monitor<finite_nfa>::payload>> rec;
        if (req.with_oracle) rec.emplace(mon.buffer());
        run_text(mon, text);
        m = mon.buffer().stats();
        if (rec) oracle_log = rec->log();
    } else if (req.dataset == "rv") {
        std::uint32_t per = static_cast<std::uint32_t>(
            std::max<std::uint64_t>(1, req.n / std::max<std::uint32_t>(1, req.iterators)));
        rv_trace trace = gen_iter_trace(req.iterators, per, req.bug_rate, req.seed);
        monitor<hasnext_automaton, std::string> mon(hasnext_nfa(), req.h, req.algorithm);
        std::optional<op_recorder<monitor<hasnext_automaton, std::string>::payload>> rec;
        if (req.with_oracle) rec.emplace(mon.buffer());
        for (const rv_trace_entry& e : trace.events) mon.step(e.event, e.loc);
        m = mon.buffer().stats();
        if (rec) oracle_log = rec->log();
    } else {
        throw invalid_parameter("unknown dataset '" + req.dataset +
                                "' (expected chain|adversarial|regex|rv)");
    }

    out.m = m;
    out.row.ops = m.op_count;
    out.row.total_refs = m.total_refs;
    out.row.avg_refs_per_op = m.op_count ? double(m.total_refs) / double(m.op_count) : 0.0;
    out.row.max_refs_per_op = m.max_op_refs;
    out.row.peak_nodes = m.peak_nodes;
    out.row.final_nodes = m.cur_nodes;
    if (oracle_log && m.op_count <= oracle_op_limit)
        out.row.optimal_peak_nodes = optimal_peak(*oracle_log, req.h);
    return out;
}

// ---- CSV output --------------------------------------------------------------

inline std::string metrics_csv_header() {
    return "dataset,algorithm,h,ops,total_refs,avg_refs_per_op,max_refs_per_op,peak_nodes,"
           "final_nodes,optimal_peak_nodes";
}

inline std::string to_csv(const metrics_row& r) {
    char avg[32];
    std::snprintf(avg, sizeof avg, "%.6f", r.avg_refs_per_op);
    std::string out = r.dataset;
    out += ',';
    out += to_string(r.algorithm);
    out += ',' + std::to_string(r.h) + ',' + std::to_string(r.ops) + ',' +
           std::to_string(r.total_refs) + ',' + avg + ',' + std::to_string(r.max_refs_per_op) +
           ',' + std::to_string(r.peak_nodes) + ',' + std::to_string(r.final_nodes) + ',';
    if (r.optimal_peak_nodes) out += std::to_string(*r.optimal_peak_nodes);
    return out;
}

inline std::string histogram_csv_header() { return "dataset,algorithm,h,bucket_lo,bucket_hi,count"; }

inline std::vector<std::string> histogram_csv_rows(const metrics_row& r, const metrics& m) {
    std::vector<std::string> rows;
    for (unsigned i = 0; i < m.histogram.size(); ++i) {
        if (m.histogram[i] == 0) continue;
        rows.push_back(r.dataset + ',' + to_string(r.algorithm) + ',' + std::to_string(r.h) + ',' +
                       std::to_string(metrics::bucket_lo(i)) + ',' +
                       std::to_string(metrics::bucket_hi(i)) + ',' +
                       std::to_string(m.histogram[i]));
    }
    return rows;
}

// Appends one line, writing the header first if the file is new or empty.
inline void append_csv_line(const std::string& path, const std::string& header,
                            const std::string& line) {
    bool need_header = true;
    if (std::ifstream probe(path); probe.good() && probe.peek() != std::ifstream::traits_type::eof())
        need_header = false;
    std::ofstream out(path, std::ios::app);
    if (!out) throw error("cannot open '" + path + "' for writing");
    if (need_header) out << header << '\n';
    out << line << '\n';
}

}  // namespace treebuf
