#pragma once

// Seeded synthetic scenarios with fault injection, replay through the ODD
// monitor, validation metrics and residual-risk verdicts.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safecase/cause_tree.hpp"
#include "safecase/odd_monitor.hpp"

namespace safecase {

// ---------------------------------------------------------------------------
// Scenario description

enum class InjectionKind : std::uint8_t { GpsDriftRamp, CameraNoise, DataGap, Weather, MapStale, BoundarySkim };
inline constexpr std::size_t kInjectionKindCount = 6;

std::string_view to_string(InjectionKind k);
std::optional<InjectionKind> parse_injection_kind(std::string_view token);

/// Magnitude units: GPS_DRIFT_RAMP metres at ramp end; CAMERA_NOISE extra
/// reprojection pixels; DATA_GAP unused (the modality drops out); WEATHER
/// intensity in [0,1]; MAP_STALE hours added to map age; BOUNDARY_SKIM how
/// detectable the out-of-ODD road is, in [0,1] (0 fools the detector).
struct Injection {
    InjectionKind kind = InjectionKind::GpsDriftRamp;
    std::int64_t start_ms = 0;
    std::int64_t duration_ms = 0;
    double magnitude = 0.0;
    std::optional<Modality> modality;  // DATA_GAP only

    bool active_at(std::int64_t t_ms) const noexcept { return t_ms >= start_ms && t_ms <= start_ms + duration_ms; }
    bool operator==(const Injection&) const = default;
};

struct RouteSegment {
    Region region = Region::Urban;
    Surface surface = Surface::Dry;
    double length_km = 1.0;
    double speed_kmh = 50.0;
    bool in_odd = true;

    bool operator==(const RouteSegment&) const = default;
};

/// Linear-response virtual perception model:
/// confidence = clamp(base(region, surface) - sum(coef * magnitude) + noise, 0, 1).
struct LlpModel {
    std::array<std::array<double, kSurfaceCount>, kRegionCount> base{{{0.93, 0.90}, {0.94, 0.91}, {0.92, 0.89}}};
    double out_of_odd_base = 0.30;
    /// Confidence drop per unit magnitude, indexed [injection kind][modality].
    std::array<std::array<double, kModalityCount>, kInjectionKindCount> coef{{
        {0.02, 0.0, 0.0},    // GPS_DRIFT_RAMP, per metre
        {0.0, 0.05, 0.0},    // CAMERA_NOISE, per pixel
        {0.0, 0.0, 0.0},     // DATA_GAP
        {0.02, 0.20, 0.05},  // WEATHER, per unit intensity
        {0.0, 0.0, 0.0},     // MAP_STALE
        {0.6, 0.6, 0.6},     // BOUNDARY_SKIM, per unit detectability
    }};
    double noise = 0.0;           // uniform confidence noise half-width
    double pos_noise_m = 0.0;     // uniform lateral position noise half-width
    double base_reproj_px = 0.5;  // nominal camera reprojection error

    bool operator==(const LlpModel&) const = default;
};

struct ScenarioSpec {
    std::string id;
    std::string scenario_class;
    std::uint64_t seed = 0;
    std::int64_t duration_ms = 60000;
    std::int64_t tick_ms = 10;
    double initial_map_age_h = 1.0;
    std::vector<RouteSegment> segments{RouteSegment{}};
    std::vector<Injection> injections;
    LlpModel llp;

    /// Throws SpecError (out-of-range injections, overlapping injections on
    /// one channel, non-positive segment lengths, ...).
    void validate() const;
    std::string canonical() const;
    std::string digest() const;

    bool operator==(const ScenarioSpec&) const = default;
};

ScenarioSpec parse_scenario_spec(std::string_view text, const std::string& source = {});
ScenarioSpec load_scenario_spec(const std::string& path);

// ---------------------------------------------------------------------------
// Traces

struct Trace {
    std::string scenario_id;
    std::string scenario_class;
    std::uint64_t seed = 0;
    std::string spec_digest;
    std::int64_t tick_ms = 10;
    std::vector<SensorFrame> frames;

    bool operator==(const Trace&) const = default;
};

/// Deterministic function of the scenario, seed included.
Trace generate(const ScenarioSpec& spec);

/// Delimited per-tick records with a commented header naming seed, digest and units.
std::string serialize_trace(const Trace& trace);
Trace parse_trace(std::string_view text, const std::string& source = {});
Trace load_trace(const std::string& path);

// ---------------------------------------------------------------------------
// Replay

struct ModeEvent {
    std::int64_t t_ms = 0;
    Mode mode = Mode::FullAutonomy;

    bool operator==(const ModeEvent&) const = default;
};

struct RunRecord {
    std::string scenario_id;
    std::string scenario_class;
    std::uint64_t seed = 0;
    std::string config_digest;
    MonitorConfig config;
    std::vector<MonitorOutput> outputs;
    std::vector<ModeEvent> events;  // first tick plus every mode change

    Mode terminal_mode() const { return outputs.empty() ? Mode::FullAutonomy : outputs.back().mode; }
    bool operator==(const RunRecord&) const = default;
};

/// Drives a fresh monitor over the trace. Propagates TraceIntegrityError.
RunRecord replay(const Trace& trace, const MonitorConfig& cfg);

std::vector<ModeEvent> mode_events(const std::vector<MonitorOutput>& outputs);

std::string serialize_run_record(const RunRecord& run);
RunRecord parse_run_record(std::string_view text, const std::string& source = {});
RunRecord load_run_record(const std::string& path);

// ---------------------------------------------------------------------------
// Metrics and verdicts

enum class VerdictStatus : std::uint8_t { Pass, InsufficientEvidence, Fail };

std::string_view to_string(VerdictStatus v);
std::optional<VerdictStatus> parse_verdict_status(std::string_view token);
/// FAIL > INSUFFICIENT_EVIDENCE > PASS.
VerdictStatus worst(VerdictStatus a, VerdictStatus b) noexcept;

struct GroupAccuracy {
    std::int64_t ticks = 0;
    std::int64_t correct = 0;

    double accuracy() const noexcept { return ticks > 0 ? static_cast<double>(correct) / ticks : 0.0; }
    bool operator==(const GroupAccuracy&) const = default;
};

/// Thresholds behind the per-requirement verdicts.
struct MetricThresholds {
    double min_accuracy = 0.99;
    double max_false_per_10h = 1.0;
    double max_group_deviation = 0.02;
    double max_degradation = 0.01;
    double bound_confidence = 0.95;
};

struct MetricsReport {
    std::string scenario_id;
    std::string scenario_class;
    std::uint64_t seed = 0;
    std::string config_digest;
    std::int64_t ticks = 0;
    std::int64_t duration_ms = 0;
    std::int64_t correct = 0;
    std::array<GroupAccuracy, kRegionCount> regions{};
    std::array<GroupAccuracy, kSurfaceCount> surfaces{};
    std::int64_t false_classifications = 0;  // maximal runs of misclassified ticks
    std::int64_t unsafe_events = 0;          // maximal out-of-ODD runs spent in FULL_AUTONOMY
    double km = 0.0;
    double bound_confidence = 0.95;
    std::map<std::string, VerdictStatus> verdicts;  // requirement id -> verdict

    double accuracy() const noexcept { return ticks > 0 ? static_cast<double>(correct) / ticks : 0.0; }
    double hours() const noexcept { return static_cast<double>(duration_ms) / 3.6e6; }
    double false_per_10h() const noexcept;
    /// Larger of the max pairwise accuracy differences among observed regions
    /// and among observed surfaces.
    double max_group_deviation() const noexcept;
    std::optional<double> event_rate_bound() const;

    bool operator==(const MetricsReport&) const = default;
};

/// Throws MetricsError for an empty run or a run/trace mismatch.
MetricsReport metrics(const RunRecord& run, const Trace& trace, const MetricThresholds& thresholds = {});

struct DegradationReport {
    double baseline_accuracy = 0.0;
    double perturbed_accuracy = 0.0;
    double degradation = 0.0;  // fraction; 0.01 = one percentage point
    VerdictStatus verdict = VerdictStatus::Pass;
};

/// Throws ComparisonError when the reports were produced under different configs.
DegradationReport compare_pair(const MetricsReport& baseline, const MetricsReport& perturbed,
                               const MetricThresholds& thresholds = {});

/// One-sided exact binomial (Clopper-Pearson) upper bound on the per-km event
/// rate, each km (or 1/trials_per_km of a km) being one Bernoulli trial.
double rate_upper_bound(double events, double km, double confidence, double trials_per_km = 1.0);

/// Clean km needed for the zero-event bound to reach `target_rate`.
double km_required(double target_rate, double confidence, double trials_per_km = 1.0);

struct ClassVerdict {
    std::string scenario_class;
    std::int64_t events = 0;
    double km = 0.0;
    double point_estimate = 0.0;
    double upper_bound = 0.0;
    double target = 0.0;
    double confidence = 0.0;
    VerdictStatus verdict = VerdictStatus::InsufficientEvidence;
};

struct ResidualRiskVerdict {
    std::vector<ClassVerdict> classes;  // sorted by class
    VerdictStatus aggregate = VerdictStatus::Pass;
};

/// Throws AllocationError if a report's class has no target.
ResidualRiskVerdict evaluate_targets(const std::vector<MetricsReport>& reports,
                                     const std::vector<ValidationTarget>& targets);

std::string serialize_metrics(const MetricsReport& report);
MetricsReport parse_metrics(std::string_view text, const std::string& source = {});
MetricsReport load_metrics(const std::string& path);
std::string summarize_metrics(const MetricsReport& report);
std::string summarize_residual_risk(const ResidualRiskVerdict& verdict);

}  // namespace safecase
