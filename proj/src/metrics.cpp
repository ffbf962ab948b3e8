#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdio>
#include <limits>

#include "safecase/errors.hpp"
#include "safecase/keyed_text.hpp"
#include "safecase/scenario_sim.hpp"

namespace safecase {

namespace {

constexpr std::array<std::string_view, 3> kVerdictNames{"PASS", "INSUFFICIENT_EVIDENCE", "FAIL"};

// Absorbs binary rounding when a difference of two accuracies lands on an
// inclusive threshold (0.995 - 0.975 is 0.020000000000000018).
constexpr double kThresholdSlack = 1e-12;

double group_range(const auto& groups) {
    double lo = 1.0, hi = 0.0;
    std::size_t seen = 0;
    for (const auto& g : groups) {
        if (g.ticks == 0) continue;
        ++seen;
        lo = std::min(lo, g.accuracy());
        hi = std::max(hi, g.accuracy());
    }
    return seen >= 2 ? hi - lo : 0.0;
}

std::size_t observed(const auto& groups) {
    return static_cast<std::size_t>(
        std::count_if(groups.begin(), groups.end(), [](const auto& g) { return g.ticks > 0; }));
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace

std::string_view to_string(VerdictStatus v) { return kVerdictNames[static_cast<std::size_t>(v)]; }

std::optional<VerdictStatus> parse_verdict_status(std::string_view token) {
    for (std::size_t i = 0; i < kVerdictNames.size(); ++i)
        if (kVerdictNames[i] == token) return static_cast<VerdictStatus>(i);
    return std::nullopt;
}

VerdictStatus worst(VerdictStatus a, VerdictStatus b) noexcept {
    return static_cast<std::uint8_t>(a) >= static_cast<std::uint8_t>(b) ? a : b;
}

double MetricsReport::false_per_10h() const noexcept {
    return hours() > 0.0 ? static_cast<double>(false_classifications) * 10.0 / hours() : 0.0;
}

double MetricsReport::max_group_deviation() const noexcept {
    return std::max(group_range(regions), group_range(surfaces));
}

std::optional<double> MetricsReport::event_rate_bound() const {
    if (!(km > 0.0)) return std::nullopt;
    return rate_upper_bound(static_cast<double>(unsafe_events), km, bound_confidence);
}

MetricsReport metrics(const RunRecord& run, const Trace& trace, const MetricThresholds& thr) {
    if (run.outputs.empty() || trace.frames.empty()) throw MetricsError("zero-duration run '" + run.scenario_id + "'");
    if (run.scenario_id != trace.scenario_id || run.seed != trace.seed)
        throw MetricsError("run '" + run.scenario_id + "' does not belong to trace '" + trace.scenario_id + "'");
    if (run.outputs.size() != trace.frames.size())
        throw MetricsError("run has " + std::to_string(run.outputs.size()) + " ticks, trace has " +
                           std::to_string(trace.frames.size()));

    MetricsReport r;
    r.scenario_id = run.scenario_id;
    r.scenario_class = run.scenario_class;
    r.seed = run.seed;
    r.config_digest = run.config_digest;
    r.bound_confidence = thr.bound_confidence;
    r.ticks = static_cast<std::int64_t>(run.outputs.size());
    r.duration_ms = r.ticks * trace.tick_ms;

    const double floor = run.config.confidence_floor;
    bool prev_wrong = false;
    bool prev_unsafe = false;
    for (std::size_t i = 0; i < run.outputs.size(); ++i) {
        const auto& o = run.outputs[i];
        const auto& f = trace.frames[i];
        if (o.t_ms != f.t_ms)
            throw MetricsError("tick " + std::to_string(i) + ": run t = " + std::to_string(o.t_ms) +
                               " ms, trace t = " + std::to_string(f.t_ms) + " ms");
        const bool correct = (o.fused_confidence >= floor) == f.true_in_odd;
        auto& rg = r.regions[static_cast<std::size_t>(f.region)];
        auto& sf = r.surfaces[static_cast<std::size_t>(f.surface)];
        ++rg.ticks;
        ++sf.ticks;
        if (correct) {
            ++r.correct;
            ++rg.correct;
            ++sf.correct;
        } else if (!prev_wrong) {
            ++r.false_classifications;
        }
        prev_wrong = !correct;

        const bool unsafe = o.mode == Mode::FullAutonomy && !f.true_in_odd;
        if (unsafe && !prev_unsafe) ++r.unsafe_events;
        prev_unsafe = unsafe;
        r.km += f.distance_delta_km;
    }

    // Accuracy and false-classification budget.
    VerdictStatus req3;
    if (r.accuracy() < thr.min_accuracy)
        req3 = VerdictStatus::Fail;
    else if (r.hours() >= 10.0)
        req3 = r.false_per_10h() <= thr.max_false_per_10h + kThresholdSlack ? VerdictStatus::Pass : VerdictStatus::Fail;
    else
        // Less than one 10 h window: only an exceeded budget is conclusive.
        req3 = static_cast<double>(r.false_classifications) > thr.max_false_per_10h
                   ? VerdictStatus::Fail
                   : VerdictStatus::InsufficientEvidence;
    r.verdicts["REQ-3"] = req3;

    // Accuracy spread across regions and across surfaces.
    VerdictStatus req4;
    if (observed(r.regions) < 2 && observed(r.surfaces) < 2)
        req4 = VerdictStatus::InsufficientEvidence;
    else
        req4 = r.max_group_deviation() <= thr.max_group_deviation + kThresholdSlack ? VerdictStatus::Pass
                                                                                    : VerdictStatus::Fail;
    r.verdicts["REQ-4"] = req4;
    return r;
}

DegradationReport compare_pair(const MetricsReport& baseline, const MetricsReport& perturbed,
                               const MetricThresholds& thr) {
    if (baseline.config_digest != perturbed.config_digest)
        throw ComparisonError("config digests differ: " + baseline.config_digest + " vs " + perturbed.config_digest);
    DegradationReport d;
    d.baseline_accuracy = baseline.accuracy();
    d.perturbed_accuracy = perturbed.accuracy();
    d.degradation = d.baseline_accuracy - d.perturbed_accuracy;
    d.verdict = d.degradation < thr.max_degradation ? VerdictStatus::Pass : VerdictStatus::Fail;
    return d;
}

double rate_upper_bound(double events, double km, double confidence, double trials_per_km) {
    if (!(km > 0.0) || !std::isfinite(km)) throw MetricsError("rate bound needs km > 0");
    if (!(confidence > 0.0 && confidence < 1.0)) throw MetricsError("confidence must lie in (0, 1)");
    if (!(events >= 0.0)) throw MetricsError("event count must be non-negative");
    if (!(trials_per_km > 0.0)) throw MetricsError("trials_per_km must be positive");
    const double n = km * trials_per_km;
    double p;
    if (events >= n) return std::max(trials_per_km, events / km);
    if (events == 0.0)
        p = -std::expm1(std::log1p(-confidence) / n);
    else
        p = boost::math::ibeta_inv(events + 1.0, n - events, confidence);
    return p * trials_per_km;
}

double km_required(double target_rate, double confidence, double trials_per_km) {
    if (!(target_rate > 0.0)) throw MetricsError("target rate must be positive");
    if (!(confidence > 0.0 && confidence < 1.0)) throw MetricsError("confidence must lie in (0, 1)");
    if (!(trials_per_km > 0.0)) throw MetricsError("trials_per_km must be positive");
    const double p = target_rate / trials_per_km;
    if (p >= 1.0) return 1.0 / trials_per_km;
    return std::log1p(-confidence) / std::log1p(-p) / trials_per_km;
}

ResidualRiskVerdict evaluate_targets(const std::vector<MetricsReport>& reports,
                                     const std::vector<ValidationTarget>& targets) {
    std::map<std::string, ClassVerdict> by_class;
    for (const auto& t : targets) {
        ClassVerdict& cv = by_class[t.scenario_class];
        cv.scenario_class = t.scenario_class;
        cv.target = t.max_event_rate;
        cv.confidence = t.confidence_level;
    }
    for (const auto& r : reports) {
        auto it = by_class.find(r.scenario_class);
        if (it == by_class.end())
            throw AllocationError("report '" + r.scenario_id + "' has class '" + r.scenario_class +
                                  "' with no validation target");
        it->second.events += r.unsafe_events;
        it->second.km += r.km;
    }
    ResidualRiskVerdict out;
    out.aggregate = by_class.empty() ? VerdictStatus::InsufficientEvidence : VerdictStatus::Pass;
    for (auto& [cls, cv] : by_class) {
        if (cv.km > 0.0) {
            cv.point_estimate = static_cast<double>(cv.events) / cv.km;
            cv.upper_bound = rate_upper_bound(static_cast<double>(cv.events), cv.km, cv.confidence);
            if (cv.point_estimate > cv.target)
                cv.verdict = VerdictStatus::Fail;
            else if (cv.upper_bound <= cv.target)
                cv.verdict = VerdictStatus::Pass;
            else
                cv.verdict = VerdictStatus::InsufficientEvidence;
        } else {
            cv.upper_bound = std::numeric_limits<double>::infinity();
            cv.verdict = VerdictStatus::InsufficientEvidence;
        }
        out.aggregate = worst(out.aggregate, cv.verdict);
        out.classes.push_back(cv);
    }
    return out;
}

// Report files --------------------------------------------------------------

std::string serialize_metrics(const MetricsReport& r) {
    KeyedWriter w;
    w.comment("safecase metrics");
    w.section("metrics");
    w.field("scenario", r.scenario_id);
    w.field("class", r.scenario_class);
    w.field("seed", std::to_string(r.seed));
    w.field("config_digest", r.config_digest);
    w.field("ticks", r.ticks);
    w.field("duration_ms", r.duration_ms);
    w.field("correct", r.correct);
    w.field("false_classifications", r.false_classifications);
    w.field("unsafe_events", r.unsafe_events);
    w.field("km", r.km);
    w.field("bound_confidence", r.bound_confidence);
    // Derived values below are informative; parsing recomputes them.
    w.field("accuracy", r.accuracy());
    w.field("false_per_10h", r.false_per_10h());
    w.field("max_group_deviation", r.max_group_deviation());
    if (auto b = r.event_rate_bound()) w.field("event_rate_bound_per_km", *b);
    for (std::size_t i = 0; i < kRegionCount; ++i) {
        w.section("group");
        w.field("dimension", "region");
        w.field("name", to_string(static_cast<Region>(i)));
        w.field("ticks", r.regions[i].ticks);
        w.field("correct", r.regions[i].correct);
    }
    for (std::size_t i = 0; i < kSurfaceCount; ++i) {
        w.section("group");
        w.field("dimension", "surface");
        w.field("name", to_string(static_cast<Surface>(i)));
        w.field("ticks", r.surfaces[i].ticks);
        w.field("correct", r.surfaces[i].correct);
    }
    for (const auto& [req, v] : r.verdicts) {
        w.section("verdict");
        w.field("requirement", req);
        w.field("status", to_string(v));
    }
    return w.str();
}

MetricsReport parse_metrics(std::string_view text, const std::string& source) {
    MetricsReport r;
    bool saw = false;
    for (const auto& rec : parse_keyed(text, source).records) {
        auto integer = [&](std::string_view key) {
            const auto& f = rec.require(key, source);
            return parse_int(f.value, source, f.line);
        };
        if (rec.section == "metrics") {
            saw = true;
            r.scenario_id = rec.require("scenario", source).value;
            r.scenario_class = rec.require("class", source).value;
            const auto& seed = rec.require("seed", source);
            try {
                r.seed = std::stoull(seed.value);
            } catch (const std::exception&) {
                throw ParseError(source, seed.line, "invalid seed '" + seed.value + "'");
            }
            r.config_digest = rec.require("config_digest", source).value;
            r.ticks = integer("ticks");
            r.duration_ms = integer("duration_ms");
            r.correct = integer("correct");
            r.false_classifications = integer("false_classifications");
            r.unsafe_events = integer("unsafe_events");
            const auto& km = rec.require("km", source);
            r.km = parse_double(km.value, source, km.line);
            const auto& bc = rec.require("bound_confidence", source);
            r.bound_confidence = parse_double(bc.value, source, bc.line);
        } else if (rec.section == "group") {
            const auto& dim = rec.require("dimension", source);
            const auto& name = rec.require("name", source);
            GroupAccuracy g{integer("ticks"), integer("correct")};
            if (dim.value == "region") {
                auto reg = parse_region(name.value);
                if (!reg) throw ParseError(source, name.line, "unknown region '" + name.value + "'");
                r.regions[static_cast<std::size_t>(*reg)] = g;
            } else if (dim.value == "surface") {
                auto s = parse_surface(name.value);
                if (!s) throw ParseError(source, name.line, "unknown surface '" + name.value + "'");
                r.surfaces[static_cast<std::size_t>(*s)] = g;
            } else {
                throw ParseError(source, dim.line, "unknown dimension '" + dim.value + "'");
            }
        } else if (rec.section == "verdict") {
            const auto& st = rec.require("status", source);
            auto v = parse_verdict_status(st.value);
            if (!v) throw ParseError(source, st.line, "unknown verdict '" + st.value + "'");
            r.verdicts[rec.require("requirement", source).value] = *v;
        } else {
            throw ParseError(source, rec.line, "unexpected section [" + rec.section + "] in metrics report");
        }
    }
    if (!saw) throw ParseError(source, 0, "missing [metrics] section");
    return r;
}

MetricsReport load_metrics(const std::string& path) { return parse_metrics(read_file(path), path); }

std::string summarize_metrics(const MetricsReport& r) {
    std::string out;
    out += "scenario " + r.scenario_id + " (" + r.scenario_class + "), seed " + std::to_string(r.seed) + ", config " +
           r.config_digest + "\n";
    out += "  ticks " + std::to_string(r.ticks) + ", " + fixed(r.hours(), 3) + " h, " + fixed(r.km, 3) + " km\n";
    out += "  accuracy            " + fixed(r.accuracy() * 100.0, 3) + " %\n";
    for (std::size_t i = 0; i < kRegionCount; ++i)
        if (r.regions[i].ticks > 0)
            out += "    region " + std::string(to_string(static_cast<Region>(i))) +
                   std::string(10 - to_string(static_cast<Region>(i)).size(), ' ') +
                   fixed(r.regions[i].accuracy() * 100.0, 3) + " %\n";
    for (std::size_t i = 0; i < kSurfaceCount; ++i)
        if (r.surfaces[i].ticks > 0)
            out += "    surface " + std::string(to_string(static_cast<Surface>(i))) +
                   std::string(9 - to_string(static_cast<Surface>(i)).size(), ' ') +
                   fixed(r.surfaces[i].accuracy() * 100.0, 3) + " %\n";
    out += "  group deviation     " + fixed(r.max_group_deviation() * 100.0, 3) + " pp\n";
    out += "  false episodes      " + std::to_string(r.false_classifications) + " (" + fixed(r.false_per_10h(), 3) +
           " per 10 h)\n";
    out += "  unsafe exposures    " + std::to_string(r.unsafe_events);
    if (auto b = r.event_rate_bound())
        out += " (rate bound " + sci(*b) + " /km at " + fixed(r.bound_confidence * 100.0, 0) + " %)";
    out += "\n";
    for (const auto& [req, v] : r.verdicts)
        out += "  " + req + "  " + std::string(to_string(v)) + "\n";
    return out;
}

std::string summarize_residual_risk(const ResidualRiskVerdict& verdict) {
    std::string out = "class                      events         km     point     bound    target  verdict\n";
    for (const auto& c : verdict.classes) {
        std::string name = c.scenario_class;
        if (name.size() < 26) name += std::string(26 - name.size(), ' ');
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s %6lld %10.3f %9s %9s %9s  %s\n", name.c_str(),
                      static_cast<long long>(c.events), c.km, sci(c.point_estimate).c_str(), sci(c.upper_bound).c_str(),
                      sci(c.target).c_str(), std::string(to_string(c.verdict)).c_str());
        out += buf;
    }
    out += "aggregate " + std::string(to_string(verdict.aggregate)) + "\n";
    return out;
}

}  // namespace safecase
