#include "safecase/batch.hpp"

#include <algorithm>
#include <exception>
#include <optional>

namespace safecase {

namespace {

ScenarioOutcome run_one(const ScenarioSpec& spec, const MonitorConfig& cfg, const MetricThresholds& thr) {
    const Trace trace = generate(spec);
    ScenarioOutcome o;
    o.scenario_id = spec.id;
    o.run = replay(trace, cfg);
    o.report = metrics(o.run, trace, thr);
    return o;
}

void sort_by_id(std::vector<ScenarioOutcome>& out) {
    std::stable_sort(out.begin(), out.end(),
                     [](const ScenarioOutcome& a, const ScenarioOutcome& b) { return a.scenario_id < b.scenario_id; });
}

}  // namespace

std::vector<ScenarioOutcome> run_batch_serial(const std::vector<ScenarioSpec>& specs, const MonitorConfig& cfg,
                                              const MetricThresholds& thr) {
    std::vector<ScenarioOutcome> out;
    out.reserve(specs.size());
    for (const auto& spec : specs)
        out.push_back(run_one(spec, cfg, thr));
    sort_by_id(out);
    return out;
}

std::vector<ScenarioOutcome> run_batch(const std::vector<ScenarioSpec>& specs, const MonitorConfig& cfg,
                                       const MetricThresholds& thr) {
    cfg.validate();
    const auto n = static_cast<std::ptrdiff_t>(specs.size());
    std::vector<ScenarioOutcome> out(specs.size());
    // Exceptions must not cross the parallel region; keep one per slot.
    std::vector<std::exception_ptr> errors(specs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = run_one(specs[static_cast<std::size_t>(i)], cfg, thr);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    sort_by_id(out);
    return out;
}

}  // namespace safecase
