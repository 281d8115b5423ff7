#include <catch2/catch_amalgamated.hpp>

#include <treebuf/finite_nfa.hpp>
#include <treebuf/hasnext.hpp>
#include <treebuf/monitor.hpp>
#include <treebuf/oracle_runs.hpp>
#include <treebuf/regex.hpp>

#include "support.hpp"

using namespace treebuf;
namespace orc = treebuf::oracle;

namespace {

using char_monitor = monitor<finite_nfa, std::size_t>;

std::vector<std::size_t> trace_locs(const char_monitor::report_type& r) {
    std::vector<std::size_t> out;
    for (const auto& e : r.trace) out.push_back(e.loc);
    return out;
}

// Explicitly tabulated truncation of the iterator-protocol graph to values
// 1..K. States: 0 start, 1 error, then invalid(k)/valid(k) pairs.
class tabulated_hasnext {
public:
    using state_type = int;
    using event_type = rv_event;

    explicit tabulated_hasnext(int k_max) : k_(k_max), table_(state_count()) {
        for (int s = 0; s < state_count(); ++s) table_[s].resize(symbol_count());
        for (int sym = 0; sym < symbol_count(); ++sym) {
            table_[0][sym].push_back({0, false});
            table_[1][sym].push_back({1, false});
        }
        for (int k = 1; k <= k_; ++k) {
            table_[0][sym_of(rv_event::name::iter, k)].push_back({invalid(k), true});
            for (int sym = 0; sym < symbol_count(); ++sym) {
                if (sym == sym_of(rv_event::name::next, k)) {
                    table_[invalid(k)][sym].push_back({1, true});
                    table_[valid(k)][sym].push_back({invalid(k), true});
                    continue;
                }
                if (sym == sym_of(rv_event::name::has_next, k)) {
                    table_[invalid(k)][sym].push_back({valid(k), true});
                } else {
                    table_[invalid(k)][sym].push_back({invalid(k), false});
                }
                table_[valid(k)][sym].push_back({valid(k), false});
            }
        }
    }

    state_type initial_state() const { return 0; }
    bool is_accepting(state_type q) const { return q == 1; }

    template <typename F>
    void for_each_transition(state_type q, const rv_event& e, F&& f) const {
        for (const auto& [dst, rel] : table_[static_cast<std::size_t>(q)]
                                            [static_cast<std::size_t>(sym_of(e.n, e.value))])
            f(dst, rel);
    }

    std::string state_label(state_type q) const { return std::to_string(q); }

private:
    int state_count() const { return 2 + 2 * k_; }
    int symbol_count() const { return 4 * k_; }
    int invalid(int k) const { return 2 * k; }
    int valid(int k) const { return 2 * k + 1; }
    int sym_of(rv_event::name n, std::int64_t k) const {
        return static_cast<int>(n) * k_ + static_cast<int>(k) - 1;
    }

    int k_;
    std::vector<std::vector<std::vector<std::pair<int, bool>>>> table_;
};

}  // namespace

TEST_CASE("automaton files parse, run, and round-trip") {
    std::string fig1b_text =
        "# the three-state guessing automaton\n"
        "states: 1 2 3\n"
        "initial: 1\n"
        "accepting: 3\n"
        "trans: 1 a 1 R\n"
        "trans: 1 a 2 R\n"
        "trans: 1 [bc] 1 I\n"
        "trans: 2 b 1 R\n"
        "trans: 2 b 3 R\n"
        "trans: 2 [ac] 2 I\n"
        "trans: 3 [abc] 3 I\n";
    finite_nfa nfa = parse_nfa(fig1b_text);
    CHECK(nfa.state_count() == 3);

    char_monitor m(nfa, 3, algo::realtime);
    auto reports = run_text(m, "cab");
    REQUIRE(reports.size() == 1);
    CHECK(format_report(m.automaton(), reports[0]) == "pos=2 state=3 trace=1->2@1;2->3@2");

    finite_nfa again = parse_nfa(serialize_nfa(nfa));
    CHECK(serialize_nfa(again) == serialize_nfa(nfa));
}

TEST_CASE("parse errors name the offending line") {
    try {
        parse_nfa("states: a b\ninitial: a\ntrans: a x c R\n");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.position() == 3);
    }
    CHECK_THROWS_AS(parse_nfa("initial: a\n"), parse_error);
    CHECK_THROWS_AS(parse_nfa("states: a\ninitial: a\ntrans: a b\n"), parse_error);
    CHECK_THROWS_AS(parse_nfa("states: a\ninitial: a\ntrans: a b a X\n"), parse_error);
}

TEST_CASE("an empty accepting set is allowed and never reports") {
    finite_nfa nfa = parse_nfa(
        "states: a\ninitial: a\naccepting:\n"
        "trans: a . a R\n");
    char_monitor m(std::move(nfa), 2, algo::naive);
    CHECK(run_text(m, "abcabc").empty());
}

TEST_CASE("space is written as underscore in symbols and classes") {
    finite_nfa nfa = parse_nfa(
        "states: a b\ninitial: a\naccepting: b\n"
        "trans: a _ b R\n"
        "trans: b [^_] b I\n");
    char_monitor m(std::move(nfa), 2, algo::naive);
    auto reports = run_text(m, " x");
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].position == 0);
}

TEST_CASE("compile_regex: group starts become relevant transitions") {
    SECTION("a(b)*c over abbc records both iteration starts") {
        char_monitor m(compile_regex("a(b)*c"), 5, algo::realtime);
        auto reports = run_text(m, "abbc");
        REQUIRE(reports.size() == 1);
        CHECK(reports[0].position == 3);
        CHECK(trace_locs(reports[0]) == std::vector<std::size_t>{1, 2});
    }
    SECTION("no groups means empty traces at matches") {
        char_monitor m(compile_regex("ab*c"), 5, algo::gc);
        auto reports = run_text(m, "xabbc");
        REQUIRE(reports.size() == 1);
        CHECK(reports[0].position == 4);
        CHECK(reports[0].trace.empty());
    }
    SECTION("the reduplicated-name expression agrees with the oracle") {
        std::string text = "Ford Madox Ford and Ford Madox Hueffer Ford";
        auto res = orc::brute_capture_starts("Ford( [A-Z][a-z]*){1,3} Ford", text, 4);
        char_monitor m(compile_regex("Ford( [A-Z][a-z]*){1,3} Ford"), 4, algo::realtime);
        auto reports = run_text(m, text);
        REQUIRE(!reports.empty());
        std::set<std::size_t> want_pos;
        for (const auto& [pos, lists] : res.by_end) want_pos.insert(pos);
        std::set<std::size_t> got_pos;
        for (const auto& r : reports) {
            got_pos.insert(r.position);
            REQUIRE(res.by_end.at(r.position).count(trace_locs(r)) == 1);
        }
        CHECK(got_pos == want_pos);
    }
}

TEST_CASE("regex syntax errors and limits") {
    CHECK_THROWS_AS(compile_regex("a("), parse_error);
    CHECK_THROWS_AS(compile_regex("a)"), parse_error);
    CHECK_THROWS_AS(compile_regex("*a"), parse_error);
    CHECK_THROWS_AS(compile_regex("a{3,1}"), parse_error);
    CHECK_THROWS_AS(compile_regex("[abc"), parse_error);
    CHECK_THROWS_AS(compile_regex("a\\"), parse_error);

    std::string deep;
    for (int i = 0; i < 40; ++i) deep += "(";
    deep += "a";
    for (int i = 0; i < 40; ++i) deep += ")";
    CHECK_THROWS_AS(compile_regex(deep), parse_error);

    std::string ok = "(((((a)))))";  // depth 5 is fine
    CHECK_NOTHROW(compile_regex(ok));
}

TEST_CASE("compiled search agrees with the exhaustive matcher on random inputs") {
    std::mt19937_64 rng(4242);
    auto atom = [&](auto&& self, int depth) -> std::string {
        switch (rng() % (depth > 0 ? 6 : 3)) {
            case 0: return std::string(1, static_cast<char>('a' + rng() % 3));
            case 1: return ".";
            case 2: return rng() % 2 ? "[ab]" : "[^a]";
            case 3: case 4: {
                std::string inner = self(self, depth - 1);
                if (rng() % 2) inner += self(self, depth - 1);
                if (rng() % 3 == 0) {
                    inner += '|';
                    inner += self(self, depth - 1);
                }
                return "(" + inner + ")";
            }
            default: {
                std::string body = self(self, depth - 1);
                const char* q[] = {"*", "+", "?", "{1,2}", "{0,2}", "{2}"};
                return body + q[rng() % 6];
            }
        }
    };

    int compared = 0;
    for (int iter = 0; iter < 120; ++iter) {
        std::string pat = atom(atom, 3);
        std::string text;
        std::size_t len = rng() % 30;
        for (std::size_t i = 0; i < len; ++i) text += "abc "[rng() % 4];
        for (std::uint32_t h : {1u, 2u, 8u}) {
            orc::capture_result want;
            try {
                want = orc::brute_capture_starts(pat, text, h, 400000);
            } catch (const error&) {
                continue;  // matcher bound tripped; skip this sample
            }
            char_monitor m(compile_regex(pat), h, all_algos[iter % 4]);
            std::set<std::size_t> got_pos;
            for (std::size_t i = 0; i < text.size(); ++i) {
                for (const auto& r : m.step(text[i], i)) {
                    got_pos.insert(r.position);
                    REQUIRE(want.by_end.count(r.position) == 1);
                    REQUIRE(want.by_end.at(r.position).count(trace_locs(r)) == 1);
                    ++compared;
                }
            }
            std::set<std::size_t> want_pos;
            for (const auto& [pos, lists] : want.by_end) want_pos.insert(pos);
            REQUIRE(got_pos == want_pos);
        }
    }
    CHECK(compared > 200);
}

TEST_CASE("iterator protocol: the three documented traces") {
    using rv_monitor = monitor<hasnext_automaton, std::size_t>;

    SECTION("next without hasNext reaches the error state") {
        rv_monitor m(hasnext_nfa(), 3, algo::realtime);
        m.step({rv_event::name::iter, 1}, 0);
        auto reports = m.step({rv_event::name::next, 1}, 1);
        REQUIRE(reports.size() == 1);
        CHECK(reports[0].position == 1);
        REQUIRE(reports[0].trace.size() == 2);
        CHECK(m.automaton().state_label(reports[0].trace[0].dst) == "invalid(1)");
        CHECK(m.automaton().state_label(reports[0].trace[1].dst) == "error");
    }
    SECTION("validated next is fine") {
        rv_monitor m(hasnext_nfa(), 3, algo::realtime);
        CHECK(m.step({rv_event::name::iter, 1}, 0).empty());
        CHECK(m.step({rv_event::name::has_next, 1}, 1).empty());
        CHECK(m.step({rv_event::name::next, 1}, 2).empty());
    }
    SECTION("hasNext on a different value does not validate") {
        rv_monitor m(hasnext_nfa(), 3, algo::realtime);
        m.step({rv_event::name::iter, 1}, 0);
        m.step({rv_event::name::has_next, 2}, 1);
        auto reports = m.step({rv_event::name::next, 1}, 2);
        REQUIRE(reports.size() == 1);
    }
}

TEST_CASE("on-the-fly graph matches the tabulated truncation") {
    std::mt19937_64 rng(123);
    hasnext_automaton lazy;
    for (int K = 1; K <= 3; ++K) {
        tabulated_hasnext tab(K);
        for (int iter = 0; iter < 400; ++iter) {
            std::size_t len = rng() % 9;
            std::vector<rv_event> word;
            for (std::size_t i = 0; i < len; ++i)
                word.push_back({static_cast<rv_event::name>(rng() % 4),
                                static_cast<std::int64_t>(1 + rng() % static_cast<std::uint64_t>(K))});
            REQUIRE(orc::accepting_positions(lazy, word) == orc::accepting_positions(tab, word));

            // run counts agree as well (the graphs are isomorphic, not just
            // language-equivalent)
            auto r1 = orc::enumerate_runs(lazy, word, 500000);
            auto r2 = orc::enumerate_runs(tab, word, 500000);
            REQUIRE(r1.size() == r2.size());
        }
    }
}

TEST_CASE("builtins behave as documented") {
    SECTION("fig1b reports first at position 2 on cabbcab") {
        char_monitor m(builtin_nfa("fig1b"), 3, algo::realtime);
        auto reports = run_text(m, "cabbcab");
        REQUIRE(!reports.empty());
        CHECK(reports.front().position == 2);
    }
    SECTION("fig5 needs ten non-space characters") {
        char_monitor m(builtin_nfa("fig5"), 3, algo::realtime);
        CHECK(run_text(m, "ab").empty());

        char_monitor m2(builtin_nfa("fig5"), 3, algo::realtime);
        auto reports = run_text(m2, "axxxxxxxxa");
        REQUIRE(!reports.empty());
        CHECK(reports.front().position == 9);

        // spaces interleave freely: still a + eight + a non-space characters
        char_monitor m3(builtin_nfa("fig5"), 3, algo::realtime);
        auto reports3 = run_text(m3, "a xx xx xx xx a");
        REQUIRE(!reports3.empty());
    }
    SECTION("unknown builtin name") {
        CHECK_THROWS_AS(builtin_nfa("zig"), invalid_parameter);
    }
}

TEST_CASE("rv trace files round-trip") {
    rv_trace_entry e1{{rv_event::name::next, 1}, "Main.java:17"};
    rv_trace_entry e2{{rv_event::name::iter, 42}, ""};
    std::string text = rv_trace_line(e1) + "\n" + rv_trace_line(e2) + "\n";
    std::istringstream in(text);
    auto parsed = parse_rv_trace(in);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0] == e1);
    CHECK(parsed[1] == e2);

    std::istringstream bad("{\"event\":\"zap\",\"value\":1}");
    CHECK_THROWS_AS(parse_rv_trace(bad), parse_error);
    std::istringstream bad2("not json at all");
    CHECK_THROWS_AS(parse_rv_trace(bad2), parse_error);
}
