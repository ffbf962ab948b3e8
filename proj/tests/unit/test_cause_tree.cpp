#include <doctest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "safecase/cause_tree.hpp"
#include "safecase/errors.hpp"

using namespace safecase;

namespace {

CtaNode leaf(const std::string& id, const std::string& cls, double share) {
    return {id, "leaf " + id, Gate::Leaf, {}, cls, share};
}
CtaNode gate(const std::string& id, Gate g, std::vector<std::string> children) {
    return {id, "gate " + id, g, std::move(children), std::nullopt, std::nullopt};
}
CauseTree make(std::string root, std::vector<CtaNode> nodes) {
    CauseTree t;
    t.root = std::move(root);
    for (auto& n : nodes)
        t.nodes[n.id] = n;
    return t;
}

std::size_t count_kind(const std::vector<StructuralFinding>& f, FindingKind k) {
    return static_cast<std::size_t>(
        std::count_if(f.begin(), f.end(), [k](const StructuralFinding& x) { return x.kind == k; }));
}

}  // namespace

TEST_CASE("validate") {
    SUBCASE("single leaf root is valid") { CHECK(validate(make("A", {leaf("A", "X", 1.0)})).empty()); }
    SUBCASE("dangling child") {
        const auto f = validate(make("R", {gate("R", Gate::Or, {"A", "B"}), leaf("A", "X", 1.0)}));
        REQUIRE(f.size() == 1);
        CHECK(f[0].kind == FindingKind::DanglingChild);
        CHECK(f[0].node_id == "R");
    }
    SUBCASE("multiple parents") {
        const auto f = validate(make("R", {gate("R", Gate::Or, {"G1", "G2"}), gate("G1", Gate::And, {"A"}),
                                           gate("G2", Gate::And, {"A"}), leaf("A", "X", 1.0)}));
        REQUIRE(f.size() == 1);
        CHECK(f[0].kind == FindingKind::MultipleParents);
        CHECK(f[0].node_id == "A");
    }
    SUBCASE("cycle, unreachable and local shape violations") {
        auto t = make("R", {gate("R", Gate::Or, {"G"}), gate("G", Gate::And, {"R"}), leaf("U", "X", 0.5),
                            gate("E", Gate::Or, {})});
        const auto f = validate(t);
        CHECK(count_kind(f, FindingKind::Cycle) >= 1);
        CHECK(count_kind(f, FindingKind::Unreachable) >= 1);
        CHECK(count_kind(f, FindingKind::GateWithoutChildren) == 1);
    }
    SUBCASE("leaf annotations") {
        auto bad = leaf("A", "X", 1.5);
        bad.scenario_class.reset();
        auto g = gate("R", Gate::Or, {"A"});
        g.scenario_class = "Y";
        const auto f = validate(make("R", {g, bad}));
        CHECK(count_kind(f, FindingKind::MissingScenarioClass) == 1);
        CHECK(count_kind(f, FindingKind::ShareOutOfRange) == 1);
        CHECK(count_kind(f, FindingKind::ClassOnGate) == 1);
    }
    SUBCASE("missing root") {
        CHECK(count_kind(validate(make("Z", {leaf("A", "X", 1.0)})), FindingKind::MissingRoot) == 1);
    }
}

TEST_CASE("minimal_cut_sets reference shapes") {
    const auto t = make("R", {gate("R", Gate::Or, {"A", "G"}), leaf("A", "X", 0.5), gate("G", Gate::And, {"B", "C"}),
                              leaf("B", "X", 0.25), leaf("C", "Y", 0.25)});
    CHECK(minimal_cut_sets(t) == CutSets{{"A"}, {"B", "C"}});
    CHECK(minimal_cut_sets(make("A", {leaf("A", "X", 1.0)})) == CutSets{{"A"}});
    CHECK_THROWS_AS(minimal_cut_sets(make("R", {gate("R", Gate::Or, {"Q"})})), StructuralError);
}

TEST_CASE("minimal_cut_sets expands AND over OR as a cross product") {
    // R = AND{ OR{A, B}, OR{A2, C} }
    const auto t = make(
        "R", {gate("R", Gate::And, {"G1", "G2"}), gate("G1", Gate::Or, {"A", "B"}), gate("G2", Gate::Or, {"A2", "C"}),
              leaf("A", "X", 0.25), leaf("B", "X", 0.25), leaf("A2", "X", 0.25), leaf("C", "X", 0.25)});
    CHECK(minimal_cut_sets(t) == CutSets{{"A", "A2"}, {"A", "C"}, {"B", "A2"}, {"B", "C"}});
}

TEST_CASE("gate duality: all-AND gives one full set, all-OR gives singletons") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto t = oracle::random_tree(rng, 2 + trial % 9);
        for (auto g : {Gate::And, Gate::Or}) {
            for (auto& [id, n] : t.nodes)
                if (n.gate != Gate::Leaf) n.gate = g;
            const auto leaves = t.leaves();
            const auto cs = minimal_cut_sets(t);
            if (g == Gate::And) {
                REQUIRE(cs.size() == 1);
                CHECK(cs.begin()->size() == leaves.size());
            } else {
                CHECK(cs.size() == leaves.size());
                for (const auto& s : cs)
                    CHECK(s.size() == 1);
            }
        }
    }
}

TEST_CASE("minimal_cut_sets matches the truth-table oracle on random trees") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 150; ++trial) {
        const int n = 1 + trial % 12;
        const auto t = oracle::random_tree(rng, n);
        REQUIRE(validate(t).empty());
        const auto got = minimal_cut_sets(t);
        CHECK(got == oracle::cut_sets_by_truth_table(t));
        for (const auto& a : got)
            for (const auto& b : got)
                if (a != b) CHECK_FALSE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
}

TEST_CASE("allocate_targets") {
    SUBCASE("proportional split") {
        const auto t = make("R", {gate("R", Gate::Or, {"A", "B"}), leaf("A", "X", 0.75), leaf("B", "Y", 0.25)});
        const auto v = allocate_targets(t, 1e-6, 0.95);
        REQUIRE(v.size() == 2);
        CHECK(v[0].scenario_class == "X");
        CHECK(v[0].max_event_rate == doctest::Approx(7.5e-7).epsilon(1e-12));
        CHECK(v[1].max_event_rate == doctest::Approx(2.5e-7).epsilon(1e-12));
        CHECK(v[0].confidence_level == 0.95);
    }
    SUBCASE("single leaf gets the whole criterion") {
        const auto v = allocate_targets(make("A", {leaf("A", "X", 1.0)}), 1e-6, 0.9);
        REQUIRE(v.size() == 1);
        CHECK(v[0].max_event_rate == 1e-6);
    }
    SUBCASE("classes aggregate") {
        const auto t = make(
            "R", {gate("R", Gate::Or, {"A", "B", "C"}), leaf("A", "X", 0.5), leaf("B", "X", 0.3), leaf("C", "Y", 0.2)});
        const auto v = allocate_targets(t, 1e-6, 0.95);
        REQUIRE(v.size() == 2);
        CHECK(v[0].max_event_rate == doctest::Approx(8e-7).epsilon(1e-12));
        CHECK(v[1].max_event_rate == doctest::Approx(2e-7).epsilon(1e-12));
    }
    SUBCASE("shares off by more than 1e-9 report the sum") {
        const auto t = make("R", {gate("R", Gate::Or, {"A", "B"}), leaf("A", "X", 0.7), leaf("B", "Y", 0.2)});
        CHECK_THROWS_WITH_AS(allocate_targets(t, 1e-6, 0.95), doctest::Contains("0.9"), AllocationError);
    }
    SUBCASE("missing share and bad confidence") {
        auto a = leaf("A", "X", 1.0);
        a.exposure_share.reset();
        CHECK_THROWS_AS(allocate_targets(make("A", {a}), 1e-6, 0.95), AllocationError);
        CHECK_THROWS_AS(allocate_targets(make("A", {leaf("A", "X", 1.0)}), 1e-6, 1.0), AllocationError);
    }
    SUBCASE("conservation on random trees") {
        std::mt19937_64 rng(99);
        for (int i = 0; i < 50; ++i) {
            const auto t = oracle::random_tree(rng, 1 + i % 12);
            const auto v = allocate_targets(t, 1e-6, 0.95);
            double sum = 0.0;
            for (const auto& x : v)
                sum += x.max_event_rate;
            CHECK(std::abs(sum - 1e-6) <= 1e-9 * 1e-6);
        }
    }
}

TEST_CASE("coverage_report") {
    const auto t = make("R", {gate("R", Gate::Or, {"A", "B"}), leaf("A", "X", 0.5), leaf("B", "Y", 0.5)});
    CHECK(coverage_report(t, {"X", "Y"}).empty());
    const auto missing = coverage_report(t, {"X"});
    CHECK(missing.uncovered == std::vector<std::string>{"Y"});
    CHECK(missing.unused.empty());
    const auto extra = coverage_report(t, {"X", "Y", "Z"});
    CHECK(extra.uncovered.empty());
    CHECK(extra.unused == std::vector<std::string>{"Z"});
}

TEST_CASE("tree files round-trip losslessly") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 30; ++i) {
        auto t = oracle::random_tree(rng, 1 + i % 12);
        t.nodes.begin()->second.label = "quoted \"label\" with spaces";
        const auto text = serialize_cause_tree(t);
        const auto back = parse_cause_tree(text, "rt");
        CHECK(serialize_cause_tree(back) == text);
        CHECK(back.root == t.root);
        REQUIRE(back.nodes.size() == t.nodes.size());
        for (const auto& [id, n] : t.nodes) {
            const auto& m = back.nodes.at(id);
            CHECK(m.label == n.label);
            CHECK(m.gate == n.gate);
            CHECK(m.children == n.children);
            CHECK(m.scenario_class == n.scenario_class);
            CHECK(m.exposure_share == n.exposure_share);
        }
    }
}

TEST_CASE("tree parser errors carry line numbers") {
    auto line_of = [](const char* text) -> std::size_t {
        try {
            parse_cause_tree(text, "t");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("R OR \"r\"\n  A LEAF \"a\" class=X share=1\n  A LEAF \"b\" class=X share=0\n") == 3);
    CHECK(line_of("R OR \"r\"\nS OR \"s\"\n") == 2);
    CHECK(line_of("R XOR \"r\"\n") == 1);
    CHECK(line_of("R OR \"r\"\n  A LEAF \"a\" colour=red\n") == 2);
}

TEST_CASE("bundled case-study tree") {
    const auto t = load_cause_tree(SAFECASE_DATA_DIR "/cause_tree.txt");
    CHECK(validate(t).empty());
    const auto cs = minimal_cut_sets(t);
    CHECK(cs.count({"TRAJ"}) == 1);
    CHECK(cs.count({"ACCEPT", "LATENT"}) == 1);
    CHECK(cs.size() == 7);
    const auto targets = allocate_targets(t, 1e-6, 0.95);
    CHECK(targets.size() == 7);
}
