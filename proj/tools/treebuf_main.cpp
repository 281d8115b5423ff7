#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <treebuf/treebuf.hpp>

namespace {

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream os;
        os << std::cin.rdbuf();
        return os.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw treebuf::error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

treebuf::finite_nfa load_automaton(const std::string& spec) {
    if (spec == "fig1b" || spec == "fig5") {
        std::ifstream probe(spec);
        if (!probe.good()) return treebuf::builtin_nfa(spec);
    }
    return treebuf::parse_nfa(slurp(spec));
}

struct cli_options {
    std::string dataset;
    std::string algo_name = "realtime";
    std::uint32_t h = 100;
    std::uint64_t n = 100000;
    std::uint64_t seed = 1;
    std::string pattern, text, trace, automaton, input = "-", log = "-";
    std::string csv, hist;
    bool with_oracle = false;
    std::uint32_t iterators = 20;
    double bug_rate = 0.01;
};

int cmd_bench(const cli_options& o) {
    treebuf::bench_request req;
    req.dataset = o.dataset;
    req.algorithm = treebuf::algo_from_string(o.algo_name);
    req.h = o.h;
    req.n = o.n;
    req.seed = o.seed;
    req.with_oracle = o.with_oracle;
    req.iterators = o.iterators;
    req.bug_rate = o.bug_rate;

    treebuf::bench_outcome out = treebuf::run_bench(req);
    if (!o.csv.empty())
        treebuf::append_csv_line(o.csv, treebuf::metrics_csv_header(), treebuf::to_csv(out.row));
    else
        std::cout << treebuf::metrics_csv_header() << '\n' << treebuf::to_csv(out.row) << '\n';
    if (!o.hist.empty())
        for (const std::string& line : treebuf::histogram_csv_rows(out.row, out.m))
            treebuf::append_csv_line(o.hist, treebuf::histogram_csv_header(), line);
    return 0;
}

int cmd_search(const cli_options& o) {
    std::string text = slurp(o.text);
    treebuf::finite_nfa nfa = treebuf::compile_regex(o.pattern);
    treebuf::monitor<treebuf::finite_nfa> mon(std::move(nfa), o.h,
                                              treebuf::algo_from_string(o.algo_name));
    for (std::size_t i = 0; i < text.size(); ++i)
        for (const auto& rep : mon.step(text[i], i))
            std::cout << treebuf::format_report(mon.automaton(), rep) << '\n';
    return 0;
}

int cmd_monitor(const cli_options& o) {
    treebuf::finite_nfa nfa = load_automaton(o.automaton);
    std::string text = slurp(o.input);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    treebuf::monitor<treebuf::finite_nfa> mon(std::move(nfa), o.h,
                                              treebuf::algo_from_string(o.algo_name));
    for (std::size_t i = 0; i < text.size(); ++i)
        for (const auto& rep : mon.step(text[i], i))
            std::cout << treebuf::format_report(mon.automaton(), rep) << '\n';
    return 0;
}

int cmd_rv(const cli_options& o) {
    std::istringstream buf(slurp(o.trace));
    std::vector<treebuf::rv_trace_entry> events = treebuf::parse_rv_trace(buf);
    treebuf::monitor<treebuf::hasnext_automaton, std::string> mon(
        treebuf::hasnext_nfa(), o.h, treebuf::algo_from_string(o.algo_name));
    for (const treebuf::rv_trace_entry& e : events)
        for (const auto& rep : mon.step(e.event, e.loc))
            std::cout << treebuf::format_report(mon.automaton(), rep) << '\n';
    return 0;
}

int cmd_replay(const cli_options& o) {
    treebuf::op_log log = treebuf::parse_op_log(slurp(o.log));
    treebuf::tree_buffer<std::string> buf(o.h, treebuf::algo_from_string(o.algo_name));
    for (const auto& names : treebuf::replay(buf, log)) {
        for (std::size_t i = 0; i < names.size(); ++i) std::cout << (i ? " " : "") << names[i];
        std::cout << '\n';
    }
    return 0;
}

int cmd_oracle_check(const cli_options& o) {
    namespace orc = treebuf::oracle;
    treebuf::op_log log = treebuf::parse_op_log(slurp(o.log));
    if (auto fault = treebuf::validate(log)) {
        std::cerr << "invalid log at op " << fault->index << ": " << fault->message << '\n';
        return 2;
    }

    bool all_ok = true;
    auto verdict = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
        all_ok = all_ok && ok;
    };

    treebuf::tree_buffer<std::string> naive_buf(o.h, treebuf::algo::naive);
    auto baseline = treebuf::replay(naive_buf, log);
    for (treebuf::algo a : {treebuf::algo::gc, treebuf::algo::amortized, treebuf::algo::realtime}) {
        treebuf::tree_buffer<std::string> buf(o.h, a);
        verdict(std::string("history equivalence: ") + treebuf::to_string(a),
                treebuf::replay(buf, log) == baseline);
    }

    // per-op space accounting against the reference replay
    bool gc_exact = true, amo_bound = true, rt_bound = true;
    std::uint64_t run_max = 0;
    orc::full_tree shadow;
    treebuf::tree_buffer<std::string> gc_buf(o.h, treebuf::algo::gc);
    treebuf::tree_buffer<std::string> amo_buf(o.h, treebuf::algo::amortized);
    treebuf::tree_buffer<std::string> rt_buf(o.h, treebuf::algo::realtime);
    std::unordered_map<std::string, treebuf::node_id> gc_ids, amo_ids, rt_ids;

    std::size_t idx = 0;
    auto step_all = [&](const treebuf::op& prim) {
        orc::apply_op(shadow, prim, idx);
        auto drive = [&](treebuf::tree_buffer<std::string>& b,
                         std::unordered_map<std::string, treebuf::node_id>& ids) {
            switch (prim.k) {
                case treebuf::op::kind::init: ids[prim.a] = b.initialize(prim.a); break;
                case treebuf::op::kind::add: ids[prim.b] = b.add_child(ids.at(prim.a), prim.b); break;
                case treebuf::op::kind::deact: b.deactivate(ids.at(prim.a)); break;
                default: break;
            }
        };
        drive(gc_buf, gc_ids);
        drive(amo_buf, amo_ids);
        drive(rt_buf, rt_ids);

        std::uint64_t needed = orc::needed_count(orc::heights(shadow), o.h);
        if (needed > run_max) run_max = needed;
        std::unordered_set<std::string> want = orc::needed_names(shadow, o.h);
        std::unordered_set<std::string> have;
        for (treebuf::node_id id : gc_buf.live_nodes()) have.insert(gc_buf.payload(id));
        gc_exact = gc_exact && want == have;
        amo_bound = amo_bound && amo_buf.stats().cur_nodes <= 2 * run_max;
        rt_bound = rt_bound && rt_buf.stats().cur_nodes <= 2 * run_max;
    };
    for (const treebuf::op& o2 : log.ops) {
        if (o2.k == treebuf::op::kind::hist) {
            ++idx;
            continue;
        }
        if (o2.k == treebuf::op::kind::expand) {
            for (const std::string& c : o2.children) step_all(treebuf::op::add(o2.a, c));
            step_all(treebuf::op::deact(o2.a));
        } else {
            step_all(o2);
        }
        ++idx;
    }
    verdict("gc store equals reachable-history set after every modifying op", gc_exact);
    verdict("amortized node count within twice the running optimum", amo_bound);
    verdict("realtime node count within twice the running optimum", rt_bound);

    return all_ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree buffer toolkit: benchmarks, monitors, replay"};
    app.set_help_flag("--help", "print help");  // frees -h/--h for the history depth
    app.require_subcommand(1);
    cli_options o;

    auto sub = [&](const char* name, const char* desc) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->set_help_flag("--help", "print help");
        return s;
    };

    CLI::App* bench = sub("bench", "run one benchmark cell, append a CSV row");
    bench->add_option("dataset", o.dataset, "chain|adversarial|regex|rv")->required();
    bench->add_option("--n", o.n, "size: ops, rounds, bytes, or events");
    bench->add_option("--h", o.h, "history depth");
    bench->add_option("--algo", o.algo_name, "naive|gc|amortized|realtime");
    bench->add_option("--seed", o.seed, "generator seed");
    bench->add_option("--csv", o.csv, "append the metrics row to this file");
    bench->add_option("--hist", o.hist, "append per-op histogram rows to this file");
    bench->add_flag("--with-oracle", o.with_oracle, "fill optimal_peak_nodes (small runs only)");
    bench->add_option("--iterators", o.iterators, "rv: distinct iterator values");
    bench->add_option("--bug-rate", o.bug_rate, "rv: fraction of unvalidated next events");

    CLI::App* search = sub("search", "regex search with capture history");
    search->add_option("--pattern", o.pattern, "regex")->required();
    search->add_option("--text", o.text, "text file, - for stdin")->required();
    search->add_option("--h", o.h, "history depth");
    search->add_option("--algo", o.algo_name, "buffer algorithm");

    CLI::App* mon = sub("monitor", "run an automaton over text");
    mon->add_option("--automaton", o.automaton, "automaton file or builtin fig1b|fig5")->required();
    mon->add_option("--input", o.input, "text file, - for stdin");
    mon->add_option("--h", o.h, "history depth");
    mon->add_option("--algo", o.algo_name, "buffer algorithm");

    CLI::App* rv = sub("rv", "monitor the iterator protocol over a JSONL trace");
    rv->add_option("--trace", o.trace, "trace file, - for stdin")->required();
    rv->add_option("--h", o.h, "history depth");
    rv->add_option("--algo", o.algo_name, "buffer algorithm");

    CLI::App* rep = sub("replay", "replay an op log, print each hist result");
    rep->add_option("--log", o.log, "op log file, - for stdin");
    rep->add_option("--h", o.h, "history depth");
    rep->add_option("--algo", o.algo_name, "buffer algorithm");

    CLI::App* chk = sub("oracle-check", "replay a log on all algorithms and verify");
    chk->add_option("--log", o.log, "op log file, - for stdin");
    chk->add_option("--h", o.h, "history depth");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(bench)) return cmd_bench(o);
        if (app.got_subcommand(search)) return cmd_search(o);
        if (app.got_subcommand(mon)) return cmd_monitor(o);
        if (app.got_subcommand(rv)) return cmd_rv(o);
        if (app.got_subcommand(rep)) return cmd_replay(o);
        if (app.got_subcommand(chk)) return cmd_oracle_check(o);
    } catch (const treebuf::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
