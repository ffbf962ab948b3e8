#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <random>

#include "safecase/batch.hpp"
#include "safecase/errors.hpp"
#include "safecase/scenario_sim.hpp"

using namespace safecase;

namespace {

ScenarioSpec plain_spec(std::int64_t duration_ms = 10000) {
    ScenarioSpec s;
    s.id = "plain";
    s.scenario_class = "SC-TEST";
    s.seed = 11;
    s.duration_ms = duration_ms;
    s.segments = {RouteSegment{Region::Suburban, Surface::Wet, 2.0, 72.0, true}};
    return s;
}

// Hand-built run/trace pair: `wrong[i]` marks tick i misclassified (in ODD, fused below the floor).
struct Fixture {
    Trace trace;
    RunRecord run;
};

Fixture fixture(std::int64_t tick_ms, const std::vector<bool>& wrong, const std::vector<Region>& regions = {},
                const std::vector<Surface>& surfaces = {}) {
    Fixture fx;
    fx.trace.scenario_id = fx.run.scenario_id = "fx";
    fx.trace.scenario_class = fx.run.scenario_class = "SC-TEST";
    fx.trace.tick_ms = tick_ms;
    fx.run.config_digest = fx.run.config.digest();
    for (std::size_t i = 0; i < wrong.size(); ++i) {
        SensorFrame f;
        f.t_ms = static_cast<std::int64_t>(i) * tick_ms;
        f.region = regions.empty() ? Region::Urban : regions[i];
        f.surface = surfaces.empty() ? Surface::Dry : surfaces[i];
        f.distance_delta_km = 0.001;
        fx.trace.frames.push_back(f);
        MonitorOutput o;
        o.t_ms = f.t_ms;
        o.fused_confidence = wrong[i] ? 0.5 : 0.9;
        fx.run.outputs.push_back(o);
    }
    return fx;
}

MetricsReport with_accuracy(std::int64_t correct, std::int64_t ticks, std::string digest = "d") {
    MetricsReport r;
    r.ticks = ticks;
    r.correct = correct;
    r.config_digest = std::move(digest);
    return r;
}

// P(X <= k) for X ~ Binomial(n, p), summed term by term in log space.
double binomial_cdf(int k, int n, double p) {
    double sum = 0.0;
    for (int i = 0; i <= k; ++i) {
        const double log_term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                                i * std::log(p) + (n - i) * std::log1p(-p);
        sum += std::exp(log_term);
    }
    return sum;
}

}  // namespace

TEST_CASE("spec validation") {
    auto s = plain_spec();
    CHECK_NOTHROW(s.validate());
    SUBCASE("overlapping injections on one channel") {
        s.injections = {{InjectionKind::GpsDriftRamp, 1000, 3000, 2.0, {}},
                        {InjectionKind::GpsDriftRamp, 2000, 1000, 1.0, {}}};
        CHECK_THROWS_AS(s.validate(), SpecError);
    }
    SUBCASE("different channels may overlap") {
        s.injections = {{InjectionKind::GpsDriftRamp, 1000, 3000, 2.0, {}},
                        {InjectionKind::CameraNoise, 2000, 1000, 1.0, {}}};
        CHECK_NOTHROW(s.validate());
    }
    SUBCASE("injection past the end") {
        s.injections = {{InjectionKind::CameraNoise, 9000, 2000, 1.0, {}}};
        CHECK_THROWS_AS(s.validate(), SpecError);
    }
    SUBCASE("data gap without modality") {
        s.injections = {{InjectionKind::DataGap, 1000, 100, 0.0, {}}};
        CHECK_THROWS_AS(s.validate(), SpecError);
    }
    SUBCASE("non-positive segment") {
        s.segments[0].length_km = 0.0;
        CHECK_THROWS_AS(s.validate(), SpecError);
    }
    SUBCASE("no segments") {
        s.segments.clear();
        CHECK_THROWS_AS(s.validate(), SpecError);
    }
}

TEST_CASE("spec text round-trip and digest") {
    auto s = plain_spec();
    s.injections = {{InjectionKind::DataGap, 1000, 100, 0.0, Modality::Radar},
                    {InjectionKind::Weather, 2000, 500, 0.7, {}}};
    s.llp.noise = 0.03;
    const auto back = parse_scenario_spec(s.canonical());
    CHECK(back == s);
    CHECK(back.digest() == s.digest());
    auto other = s;
    other.seed = 12;
    CHECK(other.digest() != s.digest());
    CHECK_THROWS_AS(parse_scenario_spec("[scenario]\nid = x\nclass = y\nbogus = 1\n[segment]\n"), ParseError);
}

TEST_CASE("generation without injections reproduces the base confidence") {
    const auto s = plain_spec();
    const auto t = generate(s);
    REQUIRE(t.frames.size() == 1000);
    const double base = s.llp.base[1][1];
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
        const auto& f = t.frames[i];
        CHECK(f.t_ms == static_cast<std::int64_t>(i) * 10);
        for (const auto& r : f.readings) {
            CHECK(r.valid);
            CHECK(r.confidence == doctest::Approx(base).epsilon(1e-12));
        }
        CHECK(f.true_in_odd);
        CHECK(f.gps_err_m == 0.0);
        CHECK(f.distance_delta_km == doctest::Approx(72.0 * 10 / 3.6e6));
    }
}

TEST_CASE("GPS drift ramp grows linearly") {
    auto s = plain_spec(20000);
    s.injections = {{InjectionKind::GpsDriftRamp, 5000, 10000, 5.0, {}}};
    const auto t = generate(s);
    CHECK(t.frames[499].gps_err_m == 0.0);
    CHECK(t.frames[500].gps_err_m == doctest::Approx(0.0));
    CHECK(t.frames[1000].gps_err_m == doctest::Approx(2.5));
    CHECK(t.frames[1500].gps_err_m == doctest::Approx(5.0));
    for (std::size_t i = 501; i <= 1500; ++i)
        CHECK(t.frames[i].gps_err_m > t.frames[i - 1].gps_err_m);
    CHECK(t.frames[1000].est_pos.y == doctest::Approx(2.5));
}

TEST_CASE("generation is deterministic and seed-sensitive") {
    auto s = plain_spec();
    s.llp.noise = 0.02;
    s.llp.pos_noise_m = 0.3;
    const auto a = generate(s);
    CHECK(generate(s) == a);
    CHECK(serialize_trace(generate(s)) == serialize_trace(a));
    s.seed = 12;
    CHECK_FALSE(generate(s) == a);
}

TEST_CASE("injections only affect their active interval") {
    auto base = plain_spec(20000);
    base.llp.noise = 0.02;
    const auto clean = generate(base);
    for (auto kind : {InjectionKind::GpsDriftRamp, InjectionKind::CameraNoise, InjectionKind::DataGap,
                      InjectionKind::Weather, InjectionKind::MapStale, InjectionKind::BoundarySkim}) {
        CAPTURE(to_string(kind));
        auto s = base;
        Injection inj{kind, 4000, 3000, 0.8, {}};
        if (kind == InjectionKind::DataGap) inj.modality = Modality::Camera;
        s.injections = {inj};
        const auto t = generate(s);
        bool changed = false;
        for (std::size_t i = 0; i < t.frames.size(); ++i) {
            if (inj.active_at(t.frames[i].t_ms)) {
                changed = changed || !(t.frames[i] == clean.frames[i]);
            } else {
                CHECK(t.frames[i] == clean.frames[i]);
            }
        }
        CHECK(changed);
    }
}

TEST_CASE("specific injection effects") {
    auto s = plain_spec(5000);
    SUBCASE("data gap") {
        s.injections = {{InjectionKind::DataGap, 1000, 100, 0.0, Modality::Radar}};
        const auto t = generate(s);
        CHECK_FALSE(t.frames[105].reading(Modality::Radar).valid);
        CHECK(t.frames[105].reading(Modality::Gps).valid);
        CHECK(t.frames[111].reading(Modality::Radar).valid);
    }
    SUBCASE("boundary skim leaves the ODD") {
        s.injections = {{InjectionKind::BoundarySkim, 1000, 500, 1.0, {}}};
        const auto t = generate(s);
        CHECK_FALSE(t.frames[120].true_in_odd);
        CHECK(t.frames[120].reading(Modality::Camera).confidence < 0.8);
        CHECK(t.frames[99].true_in_odd);
    }
    SUBCASE("weather forces a wet surface") {
        s.segments[0].surface = Surface::Dry;
        s.injections = {{InjectionKind::Weather, 1000, 500, 1.0, {}}};
        const auto t = generate(s);
        CHECK(t.frames[120].surface == Surface::Wet);
        CHECK(t.frames[99].surface == Surface::Dry);
    }
    SUBCASE("stale map adds hours") {
        s.injections = {{InjectionKind::MapStale, 1000, 500, 30.0, {}}};
        const auto t = generate(s);
        CHECK(t.frames[120].map_age_h == doctest::Approx(t.frames[99].map_age_h + 30.0));
    }
}

TEST_CASE("trace and run record round-trip") {
    auto s = plain_spec();
    s.llp.noise = 0.05;
    s.injections = {{InjectionKind::BoundarySkim, 3000, 200, 0.5, {}}};
    const auto t = generate(s);
    const auto text = serialize_trace(t);
    CHECK(text.rfind("# safecase trace", 0) == 0);
    CHECK(text.find("# seed = 11") != std::string::npos);
    const auto t2 = parse_trace(text);
    CHECK(serialize_trace(t2) == text);

    const auto run = replay(t2, MonitorConfig{});
    const auto rtext = serialize_run_record(run);
    const auto run2 = parse_run_record(rtext);
    CHECK(serialize_run_record(run2) == rtext);
    CHECK(run2.config == run.config);
    CHECK(run2.config_digest == run.config.digest());
    CHECK(run2.events == run.events);

    auto tampered = rtext;
    tampered.replace(tampered.find("config_digest = ") + 16, 4, "0000");
    CHECK_THROWS(parse_run_record(tampered));
}

TEST_CASE("replay") {
    auto s = plain_spec();
    s.injections = {{InjectionKind::BoundarySkim, 3000, 200, 1.0, {}}};
    const auto t = generate(s);
    const auto run = replay(t, MonitorConfig{});
    REQUIRE(run.outputs.size() == t.frames.size());
    CHECK(run.events.front() == ModeEvent{0, Mode::FullAutonomy});
    CHECK(run.terminal_mode() == Mode::SafeStateRequested);
    CHECK(run.events.back() == ModeEvent{3000, Mode::SafeStateRequested});
    CHECK(mode_events(run.outputs) == run.events);

    MonitorConfig coarse;
    coarse.tick_ms = 20;
    CHECK_THROWS_AS(replay(t, coarse), TraceIntegrityError);
    auto broken = t;
    broken.frames.erase(broken.frames.begin() + 5);
    CHECK_THROWS_AS(replay(broken, MonitorConfig{}), TraceIntegrityError);
}

TEST_CASE("reliability verdict") {
    SUBCASE("10 h with one false classification passes") {
        std::vector<bool> wrong(36000, false);
        wrong[100] = true;
        const auto fx = fixture(1000, wrong);
        const auto r = metrics(fx.run, fx.trace);
        CHECK(r.hours() == doctest::Approx(10.0));
        CHECK(r.false_classifications == 1);
        CHECK(r.false_per_10h() == doctest::Approx(1.0));
        CHECK(r.verdicts.at("REQ-3") == VerdictStatus::Pass);
    }
    SUBCASE("10 h with two false classifications fails") {
        std::vector<bool> wrong(36000, false);
        wrong[100] = wrong[200] = true;
        const auto fx = fixture(1000, wrong);
        CHECK(metrics(fx.run, fx.trace).verdicts.at("REQ-3") == VerdictStatus::Fail);
    }
    SUBCASE("a contiguous wrong run is one classification") {
        std::vector<bool> wrong(36000, false);
        for (std::size_t i = 100; i < 150; ++i)
            wrong[i] = true;
        const auto fx = fixture(1000, wrong);
        const auto r = metrics(fx.run, fx.trace);
        CHECK(r.false_classifications == 1);
        CHECK(r.verdicts.at("REQ-3") == VerdictStatus::Pass);
    }
    SUBCASE("short clean run is inconclusive") {
        const auto fx = fixture(10, std::vector<bool>(1000, false));
        const auto r = metrics(fx.run, fx.trace);
        CHECK(r.accuracy() == 1.0);
        CHECK(r.false_classifications == 0);
        CHECK(r.verdicts.at("REQ-3") == VerdictStatus::InsufficientEvidence);
    }
    SUBCASE("accuracy below 99 percent fails") {
        std::vector<bool> wrong(1000, false);
        for (std::size_t i = 0; i < 11; ++i)
            wrong[i * 50] = true;
        const auto fx = fixture(10, wrong);
        CHECK(metrics(fx.run, fx.trace).verdicts.at("REQ-3") == VerdictStatus::Fail);
    }
}

TEST_CASE("fairness verdict") {
    std::vector<bool> wrong;
    std::vector<Region> regions;
    const std::array<int, 3> wrong_per_region{5, 9, 10};
    for (std::size_t r = 0; r < 3; ++r)
        for (int i = 0; i < 1000; ++i) {
            wrong.push_back(i < wrong_per_region[r]);
            regions.push_back(static_cast<Region>(r));
        }
    SUBCASE("spread of half a point passes") {
        const auto fx = fixture(10, wrong, regions);
        const auto r = metrics(fx.run, fx.trace);
        CHECK(r.regions[0].accuracy() == doctest::Approx(0.995));
        CHECK(r.regions[1].accuracy() == doctest::Approx(0.991));
        CHECK(r.regions[2].accuracy() == doctest::Approx(0.990));
        CHECK(r.max_group_deviation() == doctest::Approx(0.005).epsilon(1e-9));
        CHECK(r.verdicts.at("REQ-4") == VerdictStatus::Pass);
    }
    SUBCASE("spread above two points fails") {
        for (int i = 0; i < 30; ++i)
            wrong[2000 + static_cast<std::size_t>(i)] = true;
        const auto fx = fixture(10, wrong, regions);
        const auto r = metrics(fx.run, fx.trace);
        CHECK(r.max_group_deviation() == doctest::Approx(0.025).epsilon(1e-9));
        CHECK(r.verdicts.at("REQ-4") == VerdictStatus::Fail);
    }
    SUBCASE("a single group is inconclusive") {
        const auto fx = fixture(10, std::vector<bool>(500, false));
        CHECK(metrics(fx.run, fx.trace).verdicts.at("REQ-4") == VerdictStatus::InsufficientEvidence);
    }
    SUBCASE("surfaces count as a dimension") {
        std::vector<Surface> surfaces(wrong.size(), Surface::Dry);
        std::vector<bool> w(wrong.size(), false);
        for (std::size_t i = 0; i < wrong.size(); i += 2)
            surfaces[i] = Surface::Wet;
        for (std::size_t i = 0; i < 200; i += 2)
            w[i] = true;
        const auto fx = fixture(10, w, std::vector<Region>(w.size(), Region::Rural), surfaces);
        const auto r = metrics(fx.run, fx.trace);
        CHECK(r.max_group_deviation() == doctest::Approx(100.0 / 1500).epsilon(1e-9));
        CHECK(r.verdicts.at("REQ-4") == VerdictStatus::Fail);
    }
}

TEST_CASE("accuracy decomposes over groups") {
    std::mt19937_64 rng(5);
    std::bernoulli_distribution miss(0.02);
    std::uniform_int_distribution<int> reg(0, 2), surf(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<bool> wrong;
        std::vector<Region> regions;
        std::vector<Surface> surfaces;
        for (int i = 0; i < 2000; ++i) {
            wrong.push_back(miss(rng));
            regions.push_back(static_cast<Region>(reg(rng)));
            surfaces.push_back(static_cast<Surface>(surf(rng)));
        }
        const auto fx = fixture(10, wrong, regions, surfaces);
        const auto r = metrics(fx.run, fx.trace);
        std::int64_t rt = 0, rc = 0, st = 0, sc = 0;
        for (const auto& g : r.regions)
            rt += g.ticks, rc += g.correct;
        for (const auto& g : r.surfaces)
            st += g.ticks, sc += g.correct;
        CHECK(rt == r.ticks);
        CHECK(st == r.ticks);
        CHECK(rc == r.correct);
        CHECK(sc == r.correct);
        CHECK(r.correct == static_cast<std::int64_t>(std::count(wrong.begin(), wrong.end(), false)));
        const auto back = parse_metrics(serialize_metrics(r));
        CHECK(back == r);
    }
}

TEST_CASE("metrics input errors") {
    auto fx = fixture(10, std::vector<bool>(100, false));
    auto empty = fx;
    empty.run.outputs.clear();
    CHECK_THROWS_AS(metrics(empty.run, empty.trace), MetricsError);
    auto other = fx;
    other.run.scenario_id = "someone-else";
    CHECK_THROWS_AS(metrics(other.run, other.trace), MetricsError);
    auto shorter = fx;
    shorter.run.outputs.pop_back();
    CHECK_THROWS_AS(metrics(shorter.run, shorter.trace), MetricsError);
}

TEST_CASE("unsafe events count out-of-ODD autonomy runs") {
    auto fx = fixture(10, std::vector<bool>(100, false));
    for (std::size_t i = 10; i < 15; ++i)
        fx.trace.frames[i].true_in_odd = false;
    for (std::size_t i = 40; i < 45; ++i)
        fx.trace.frames[i].true_in_odd = false;
    for (std::size_t i = 40; i < 45; ++i)
        fx.run.outputs[i].mode = Mode::SafeStateRequested;
    const auto r = metrics(fx.run, fx.trace);
    CHECK(r.unsafe_events == 1);
    CHECK(r.km == doctest::Approx(0.1));
}

TEST_CASE("robustness comparison") {
    CHECK(compare_pair(with_accuracy(995, 1000), with_accuracy(991, 1000)).verdict == VerdictStatus::Pass);
    const auto d = compare_pair(with_accuracy(995, 1000), with_accuracy(980, 1000));
    CHECK(d.degradation == doctest::Approx(0.015));
    CHECK(d.verdict == VerdictStatus::Fail);
    const auto same = compare_pair(with_accuracy(990, 1000), with_accuracy(990, 1000));
    CHECK(same.degradation == 0.0);
    CHECK(same.verdict == VerdictStatus::Pass);
    CHECK(compare_pair(with_accuracy(990, 1000), with_accuracy(995, 1000)).verdict == VerdictStatus::Pass);
    CHECK_THROWS_AS(compare_pair(with_accuracy(1, 1, "a"), with_accuracy(1, 1, "b")), ComparisonError);
}

TEST_CASE("rate upper bound") {
    SUBCASE("zero events follows the rule of three") {
        for (double n : {1e3, 1e4, 1e5, 1e6})
            CHECK(rate_upper_bound(0, n, 0.95) == doctest::Approx(3.0 / n).epsilon(0.01));
    }
    SUBCASE("matches the binomial tail") {
        for (int n : {50, 400, 3000})
            for (int k : {1, 3, 10}) {
                const double p = rate_upper_bound(k, n, 0.95);
                CHECK(binomial_cdf(k, n, p) == doctest::Approx(0.05).epsilon(1e-6));
                const auto ref = boost::math::binomial_distribution<double>::find_upper_bound_on_p(n, k, 0.05);
                CHECK(p == doctest::Approx(ref).epsilon(1e-9));
            }
    }
    SUBCASE("monotone in events, km and confidence") {
        double prev = 0.0;
        for (int k = 0; k < 20; ++k) {
            const double b = rate_upper_bound(k, 1000, 0.95);
            CHECK(b > prev);
            CHECK(b >= k / 1000.0);
            prev = b;
        }
        CHECK(rate_upper_bound(2, 2000, 0.95) < rate_upper_bound(2, 1000, 0.95));
        CHECK(rate_upper_bound(2, 1000, 0.99) > rate_upper_bound(2, 1000, 0.95));
    }
    SUBCASE("events at or above trials") {
        CHECK(rate_upper_bound(10, 10, 0.95) == 1.0);
        CHECK(rate_upper_bound(20, 10, 0.95) == 2.0);
    }
    SUBCASE("invalid input") {
        CHECK_THROWS_AS(rate_upper_bound(0, 0, 0.95), MetricsError);
        CHECK_THROWS_AS(rate_upper_bound(0, 10, 1.0), MetricsError);
        CHECK_THROWS_AS(rate_upper_bound(-1, 10, 0.95), MetricsError);
    }
    SUBCASE("clean km required") {
        const double km = km_required(1e-6, 0.95);
        CHECK(km == doctest::Approx(3.0e6).epsilon(0.01));
        CHECK(rate_upper_bound(0, km, 0.95) == doctest::Approx(1e-6).epsilon(1e-9));
    }
}

TEST_CASE("residual-risk verdicts") {
    const std::vector<ValidationTarget> targets{{"SC-A", 1e-3, 0.95}, {"SC-B", 1e-3, 0.95}};
    auto report = [](std::string cls, std::int64_t events, double km) {
        MetricsReport r;
        r.scenario_id = cls + "-run";
        r.scenario_class = std::move(cls);
        r.unsafe_events = events;
        r.km = km;
        return r;
    };
    SUBCASE("enough clean km passes") {
        const auto v = evaluate_targets({report("SC-A", 0, 4000), report("SC-B", 0, 3100)}, targets);
        REQUIRE(v.classes.size() == 2);
        CHECK(v.classes[0].verdict == VerdictStatus::Pass);
        CHECK(v.classes[1].verdict == VerdictStatus::Pass);
        CHECK(v.aggregate == VerdictStatus::Pass);
    }
    SUBCASE("too few km is inconclusive") {
        const auto v = evaluate_targets({report("SC-A", 0, 4000), report("SC-B", 0, 1000)}, targets);
        CHECK(v.classes[1].verdict == VerdictStatus::InsufficientEvidence);
        CHECK(v.aggregate == VerdictStatus::InsufficientEvidence);
    }
    SUBCASE("point estimate above target fails the aggregate") {
        const auto v = evaluate_targets({report("SC-A", 0, 4000), report("SC-B", 3, 1000)}, targets);
        CHECK(v.classes[1].verdict == VerdictStatus::Fail);
        CHECK(v.aggregate == VerdictStatus::Fail);
    }
    SUBCASE("km pool across reports of one class") {
        const auto v =
            evaluate_targets({report("SC-A", 0, 2000), report("SC-A", 0, 2000), report("SC-B", 0, 3100)}, targets);
        CHECK(v.classes[0].km == 4000);
        CHECK(v.classes[0].verdict == VerdictStatus::Pass);
    }
    SUBCASE("untested class is inconclusive") {
        const auto v = evaluate_targets({report("SC-A", 0, 4000)}, targets);
        CHECK(v.classes[1].verdict == VerdictStatus::InsufficientEvidence);
        CHECK(std::isinf(v.classes[1].upper_bound));
    }
    SUBCASE("class without a target") {
        CHECK_THROWS_AS(evaluate_targets({report("SC-Z", 0, 10)}, targets), AllocationError);
    }
}

TEST_CASE("bundled scenarios behave as labelled") {
    const std::string dir = SAFECASE_DATA_DIR "/scenarios/";
    MonitorConfig cfg;
    auto run_of = [&](const std::string& name, std::uint64_t seed = 7) {
        auto spec = load_scenario_spec(dir + name + ".txt");
        spec.seed = seed;
        return replay(generate(spec), cfg);
    };
    auto fired = [](const RunRecord& run, Rule rule) {
        return std::any_of(run.outputs.begin(), run.outputs.end(), [&](const auto& o) { return o.rules.has(rule); });
    };
    CHECK(run_of("nominal").terminal_mode() == Mode::FullAutonomy);
    CHECK(run_of("boundary_skim").terminal_mode() == Mode::SafeStateRequested);
    CHECK(fired(run_of("gps_jump"), Rule::DriftWindow));
    CHECK_FALSE(fired(run_of("gps_drift"), Rule::DriftWindow));
    CHECK(run_of("camera_calibration").terminal_mode() == Mode::RecalMode);
    CHECK(fired(run_of("radar_gap"), Rule::FusionReweight));
    CHECK(fired(run_of("heavy_fog"), Rule::DegradedClock));
    CHECK(run_of("stale_map").terminal_mode() == Mode::AutonomyInhibited);
}

TEST_CASE("parallel batch equals the serial reference") {
    std::vector<ScenarioSpec> specs;
    for (int i = 0; i < 12; ++i) {
        auto s = plain_spec(20000);
        s.id = "b" + std::to_string(i);
        s.seed = static_cast<std::uint64_t>(100 + i);
        s.llp.noise = 0.05;
        s.injections = {{InjectionKind::BoundarySkim, 1000 * i, 300, 0.09 * i, {}}};
        specs.push_back(s);
    }
    const auto a = run_batch_serial(specs, MonitorConfig{});
    const auto b = run_batch(specs, MonitorConfig{});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].scenario_id == b[i].scenario_id);
        CHECK(a[i].run == b[i].run);
        CHECK(a[i].report == b[i].report);
    }
    specs[3].segments.clear();
    CHECK_THROWS_AS(run_batch(specs, MonitorConfig{}), SpecError);
}
