#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <map>

#include <treebuf/oracle.hpp>
#include <treebuf/oracle_runs.hpp>

#include "support.hpp"

using namespace treebuf;
namespace orc = treebuf::oracle;

namespace {

// The worked add/deactivate example used across several checks.
op_log worked_log() {
    return parse_op_log(
        "init ini\n"
        "add ini a1\n"
        "add ini a2\n"
        "deact ini\n"
        "add a2 b3\n"
        "hist b3\n"
        "deact a2\n");
}

// Definition-direct height: downward search for the closest active node
// within the subtree. Quadratic on purpose.
std::vector<std::uint32_t> heights_by_definition(const orc::full_tree& t) {
    std::vector<std::uint32_t> out(t.nodes.size(), orc::inf_height);
    for (std::uint32_t x = 0; x < t.nodes.size(); ++x) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{x, 0}};
        while (!stack.empty()) {
            auto [v, d] = stack.back();
            stack.pop_back();
            if (t.nodes[v].active && d < out[x]) out[x] = d;
            for (std::uint32_t c : t.nodes[v].kids) stack.push_back({c, d + 1});
        }
    }
    return out;
}

}  // namespace

TEST_CASE("full_replay builds the complete tree") {
    orc::full_tree t = orc::full_replay(parse_op_log("init 0\nexpand 0 1\nexpand 1 2\n"));
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.active_count() == 1);
    CHECK(t.nodes[t.find("2")].active);
    CHECK(t.nodes[t.find("2")].depth == 2);

    orc::full_tree w = orc::full_replay(worked_log());
    CHECK(w.nodes.size() == 4);
    CHECK(w.active_count() == 2);  // a1 and b3
    CHECK(w.nodes[w.find("b3")].parent == w.find("a2"));

    CHECK_THROWS_AS(orc::full_replay(parse_op_log("add 0 1\n")), replay_error);
}

TEST_CASE("full_replay of ten thousand ops stays fast") {
    orc::log_gen_params p;
    p.length = 10000;
    p.seed = 5;
    op_log log = orc::generate_log(p);
    auto t0 = std::chrono::steady_clock::now();
    orc::full_tree t = orc::full_replay(log);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    CHECK(t.nodes.size() > 100);
    CHECK(ms < 1000);
}

TEST_CASE("heights: chains and unreachable cones") {
    // chain of length 5 with only the tip active
    orc::full_tree chain = orc::full_replay(parse_op_log(
        "init 0\nexpand 0 1\nexpand 1 2\nexpand 2 3\nexpand 3 4\n"));
    auto hs = orc::heights(chain);
    for (std::uint32_t i = 0; i <= 4; ++i) CHECK(hs[chain.find(std::to_string(i))] == 4 - i);

    // a node with no active descendant has infinite height
    orc::full_tree dead = orc::full_replay(parse_op_log("init 0\nadd 0 1\ndeact 1\n"));
    auto hs2 = orc::heights(dead);
    CHECK(hs2[dead.find("1")] == orc::inf_height);
    CHECK(hs2[dead.find("0")] == 0);
}

TEST_CASE("heights agree with the definition-direct quadratic version") {
    orc::log_gen_params p;
    p.length = 150;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        p.seed = seed;
        orc::full_tree t = orc::full_replay(orc::generate_log(p));
        REQUIRE(orc::heights(t) == heights_by_definition(t));
    }
}

TEST_CASE("level sizes never grow with height") {
    orc::log_gen_params p;
    p.length = 200;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        p.seed = seed * 11;
        orc::full_tree t = orc::full_replay(orc::generate_log(p));
        auto hs = orc::heights(t);
        std::map<std::uint32_t, std::size_t> level_size;
        std::uint32_t max_h = 0;
        for (std::uint32_t h : hs)
            if (h != orc::inf_height) {
                ++level_size[h];
                max_h = std::max(max_h, h);
            }
        for (std::uint32_t i = 0; i < max_h; ++i)
            REQUIRE(level_size[i] >= level_size[i + 1]);
    }
}

TEST_CASE("needed_set: base cases and the doubling bound") {
    orc::full_tree w = orc::full_replay(worked_log());

    // n = 1 is exactly the active set
    auto n1 = orc::needed_names(w, 1);
    CHECK(n1 == std::unordered_set<std::string>{"a1", "b3"});

    // the worked tree at h = 2 keeps the actives plus both parents
    auto n2 = orc::needed_names(w, 2);
    CHECK(n2 == std::unordered_set<std::string>{"a1", "b3", "a2", "ini"});

    orc::log_gen_params p;
    p.length = 200;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        p.seed = seed * 3 + 1;
        orc::full_tree t = orc::full_replay(orc::generate_log(p));
        auto hs = orc::heights(t);
        for (std::uint32_t h : {1u, 2u, 3u, 5u})
            REQUIRE(orc::needed_count(hs, 2 * h) <= 2 * orc::needed_count(hs, h));
    }
}

TEST_CASE("recent/doomed: trivial cases and the partition laws") {
    orc::full_tree all_active = orc::full_replay(parse_op_log("init 0\nadd 0 1\nadd 1 2\n"));
    auto rd = orc::recent_and_doomed(all_active, 2);
    for (std::uint32_t i = 0; i < 3; ++i) {
        CHECK(rd.recent[i]);
        CHECK(!rd.doomed[i]);
    }

    orc::log_gen_params p;
    p.length = 180;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        p.seed = seed * 17;
        orc::full_tree t = orc::full_replay(orc::generate_log(p));
        for (std::uint32_t h : {1u, 2u, 3u}) {
            auto r = orc::recent_and_doomed(t, h);
            auto hs = orc::heights(t);
            for (std::uint32_t i = 0; i < t.nodes.size(); ++i) {
                REQUIRE(r.recent[i] != r.doomed[i]);  // exact partition
                if (r.recent[i]) {
                    bool low = hs[i] != orc::inf_height && hs[i] < 2 * h;
                    REQUIRE(low);  // recent nodes answer some near-future history
                }
            }
        }
    }
}

TEST_CASE("extensive sequences never shrink the needed set by more than one") {
    orc::log_gen_params p;
    p.extensive = true;
    p.length = 150;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        p.seed = seed;
        op_log log = orc::generate_log(p);
        for (std::uint32_t n : {1u, 2u, 4u}) {
            orc::full_tree t;
            std::vector<std::size_t> sizes;
            std::size_t idx = 0;
            for (const op& o : tsup::primitive_ops(log)) {
                orc::apply_op(t, o, idx++);
                sizes.push_back(orc::needed_count(orc::heights(t), n));
            }
            std::size_t run_max = 0;
            for (std::size_t s : sizes) {
                REQUIRE(run_max <= s + 1);
                run_max = std::max(run_max, s);
            }
        }
    }
}

TEST_CASE("enumerate_runs: the worked automaton") {
    finite_nfa nfa = builtin_fig1b();

    SECTION("empty word gives the single empty run") {
        auto runs = orc::enumerate_runs(nfa, {});
        REQUIRE(runs.size() == 1);
        CHECK(runs[0].empty());
    }

    SECTION("cab admits the loop-then-advance run") {
        auto runs = orc::enumerate_runs(nfa, {'c', 'a', 'b'});
        orc::run_step<int> c{0, 0, false}, a{0, 1, true}, b{1, 2, true};
        bool found = false;
        for (const auto& r : runs)
            found = found || (r == std::vector<orc::run_step<int>>{c, a, b});
        CHECK(found);
    }

    SECTION("cabbcab has an accepting run with the documented relevant suffix") {
        std::vector<char> w{'c', 'a', 'b', 'b', 'c', 'a', 'b'};
        auto runs = orc::enumerate_runs(nfa, w);
        bool found = false;
        for (const auto& r : runs) {
            if (!nfa.is_accepting(r.back().dst)) continue;
            auto suffix = tsup::relevant_suffix(r, 3);
            if (suffix.size() == 3 && suffix[0].src == 0 && suffix[0].dst == 0 &&
                suffix[0].pos == 1 && suffix[1].src == 0 && suffix[1].dst == 1 &&
                suffix[1].pos == 5 && suffix[2].src == 1 && suffix[2].dst == 2 &&
                suffix[2].pos == 6)
                found = true;
        }
        CHECK(found);
    }

    SECTION("the configuration bound trips on purpose") {
        // all-to-all relevant automaton explodes quickly
        std::vector<finite_nfa::row> rows;
        for (int q = 0; q < 4; ++q)
            for (int d = 0; d < 4; ++d)
                rows.push_back({q, symbol_matcher::literal('a'), d, true});
        finite_nfa dense({"0", "1", "2", "3"}, 0, {false, false, false, false}, std::move(rows));
        std::vector<char> w(12, 'a');
        CHECK_THROWS_AS(orc::enumerate_runs(dense, w, 1000), error);
    }
}

TEST_CASE("is_valid_error_trace on the worked automaton") {
    finite_nfa nfa = builtin_fig1b();
    std::vector<char> cab{'c', 'a', 'b'};

    std::vector<orc::trace_step<int>> good{{0, 1, 1}, {1, 2, 2}};
    CHECK(orc::is_valid_error_trace(nfa, cab, good, 2));

    std::vector<orc::trace_step<int>> bad{{0, 0, 1}, {1, 2, 2}};
    CHECK(!orc::is_valid_error_trace(nfa, cab, bad, 2));

    // a single relevant transition of a length-1 accepting run
    finite_nfa one({"0", "1"}, 0, {false, true}, {{0, symbol_matcher::literal('a'), 1, true}});
    std::vector<orc::trace_step<int>> t{{0, 1, 0}};
    CHECK(orc::is_valid_error_trace(one, {'a'}, t, 1));
    CHECK(!orc::is_valid_error_trace(one, {'a'}, {}, 1));  // the only run has a relevant step
}

TEST_CASE("is_valid_error_trace matches exhaustive enumeration") {
    std::mt19937_64 rng(2024);
    long checked = 0;
    for (int iter = 0; iter < 400; ++iter) {
        finite_nfa nfa = tsup::random_nfa(rng);
        std::vector<char> word = tsup::random_word(rng, 8);
        std::vector<std::vector<orc::run_step<int>>> runs;
        try {
            runs = orc::enumerate_runs(nfa, word, 200000);
        } catch (const error&) {
            continue;
        }
        for (std::uint32_t h : {1u, 2u, 3u}) {
            // valid traces: relevant suffixes of accepting runs
            std::set<std::vector<std::tuple<int, int, std::size_t>>> valid;
            for (const auto& r : runs) {
                int last = r.empty() ? nfa.initial_state() : r.back().dst;
                if (!nfa.is_accepting(last)) continue;
                std::vector<std::tuple<int, int, std::size_t>> key;
                for (const auto& s : tsup::relevant_suffix(r, h))
                    key.emplace_back(s.src, s.dst, s.pos);
                valid.insert(key);
            }
            // candidates: suffixes from all runs, accepting or not
            std::set<std::vector<std::tuple<int, int, std::size_t>>> candidates = valid;
            for (const auto& r : runs) {
                std::vector<std::tuple<int, int, std::size_t>> key;
                for (const auto& s : tsup::relevant_suffix(r, h))
                    key.emplace_back(s.src, s.dst, s.pos);
                candidates.insert(key);
            }
            candidates.insert({});
            for (const auto& cand : candidates) {
                std::vector<orc::trace_step<int>> trace;
                for (const auto& [s, d, p] : cand) trace.push_back({s, d, p});
                bool expect = valid.count(cand) > 0;
                REQUIRE(orc::is_valid_error_trace(nfa, word, trace, h) == expect);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("brute_capture_starts on the documented patterns") {
    SECTION("a(b)*c over abbc") {
        auto res = orc::brute_capture_starts("a(b)*c", "abbc", 2);
        REQUIRE(res.by_end.count(3) == 1);
        CHECK(res.by_end.at(3).count({1, 2}) == 1);
    }
    SECTION("no match, no entries") {
        auto res = orc::brute_capture_starts("xyz", "abbc", 2);
        CHECK(res.by_end.empty());
    }
    SECTION("reduplicated-name search") {
        auto res = orc::brute_capture_starts("Ford( [A-Z][a-z]*){1,2} Ford", "Ford Madox Ford", 5);
        REQUIRE(res.by_end.count(14) == 1);
        CHECK(res.by_end.at(14).count({4}) == 1);
    }
}
