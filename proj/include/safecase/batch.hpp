#pragma once

// Independent scenario runs fanned out across threads. The serial variant is
// the reference the parallel kernel must reproduce exactly.

#include <vector>

#include "safecase/scenario_sim.hpp"

namespace safecase {

struct ScenarioOutcome {
    std::string scenario_id;
    RunRecord run;
    MetricsReport report;
};

/// generate -> replay -> metrics for every scenario; sorted by scenario id.
/// Errors from any run propagate (the first by scenario order).
std::vector<ScenarioOutcome> run_batch_serial(const std::vector<ScenarioSpec>& specs, const MonitorConfig& cfg,
                                              const MetricThresholds& thresholds = {});

/// OpenMP over specs; identical result to run_batch_serial.
std::vector<ScenarioOutcome> run_batch(const std::vector<ScenarioSpec>& specs, const MonitorConfig& cfg,
                                       const MetricThresholds& thresholds = {});

}  // namespace safecase
