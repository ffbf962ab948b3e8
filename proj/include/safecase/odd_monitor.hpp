#pragma once

// Deterministic discrete-time ODD safety monitor.
//
// Each tick the monitor fuses per-modality inside-ODD confidences, then
// evaluates its rules in fixed order:
//   1. CONFIDENCE_GATE   fused confidence below the confidence floor
//   2. DRIFT_WINDOW      growth of |est - true| within the sliding drift window
//   3. DEGRADED_CLOCK    fused confidence below the degraded floor for too long
//   4. CALIBRATION_CHECK periodic reprojection / GPS drift self-check
//   5. MAP_STALENESS     HD map older than the staleness limit
// Rules latch mode conditions; the reported mode is the highest-precedence
// active condition:
//   SAFE_STATE_REQUESTED > DRIFT_HOLD > DEGRADED_SAFE_MODE > RECAL_MODE
//   > AUTONOMY_INHIBITED > FULL_AUTONOMY.
// SAFE_STATE_REQUESTED is terminal. Before engagement a stale map inhibits
// autonomy outright; after engagement it escalates to SAFE_STATE_REQUESTED.

#include <array>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace safecase {

enum class Modality : std::uint8_t { Gps, Camera, Radar };
inline constexpr std::size_t kModalityCount = 3;
enum class Region : std::uint8_t { Urban, Suburban, Rural };
inline constexpr std::size_t kRegionCount = 3;
enum class Surface : std::uint8_t { Dry, Wet };
inline constexpr std::size_t kSurfaceCount = 2;

std::string_view to_string(Modality m);
std::string_view to_string(Region r);
std::string_view to_string(Surface s);
std::optional<Modality> parse_modality(std::string_view token);
std::optional<Region> parse_region(std::string_view token);
std::optional<Surface> parse_surface(std::string_view token);

struct ModalityReading {
    bool valid = true;
    double confidence = 0.0;  // [0,1]

    bool operator==(const ModalityReading&) const = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Vec2&) const = default;
};

struct SensorFrame {
    std::int64_t t_ms = 0;
    std::array<ModalityReading, kModalityCount> readings{};
    double gps_err_m = 0.0;
    double cam_reproj_err_px = 0.0;
    Vec2 est_pos;
    Vec2 true_pos;
    double map_age_h = 0.0;
    double speed_kmh = 0.0;
    double distance_delta_km = 0.0;
    Region region = Region::Urban;
    Surface surface = Surface::Dry;
    bool true_in_odd = true;

    const ModalityReading& reading(Modality m) const { return readings[static_cast<std::size_t>(m)]; }
    ModalityReading& reading(Modality m) { return readings[static_cast<std::size_t>(m)]; }
    /// Position deviation |est - true| in metres.
    double deviation_m() const;

    bool operator==(const SensorFrame&) const = default;
};

struct MonitorConfig {
    std::int64_t tick_ms = 10;
    std::array<double, kModalityCount> weights{0.40, 0.35, 0.25};
    double confidence_floor = 0.80;
    std::int64_t safe_state_latency_ms = 100;
    std::int64_t gap_ms = 200;
    double degraded_floor = 0.75;
    std::int64_t degraded_window_ms = 100;
    std::int64_t calib_period_ms = 600000;
    double reproj_limit_px = 2.0;
    double gps_drift_limit_m = 10.0;
    std::int64_t drift_window_ms = 30000;
    double drift_limit_m = 3.0;
    double drift_speed_cap_kmh = 10.0;
    double map_staleness_limit_h = 24.0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// Sets one field from its textual key (e.g. "weight.gps", "gap_ms").
    /// Throws ConfigError for unknown keys or unparsable values; does not validate.
    void set(std::string_view key, std::string_view value);
    /// Canonical key=value rendering; the digest is taken over this text.
    std::string canonical() const;
    std::string digest() const;

    bool operator==(const MonitorConfig&) const = default;
};

/// Parses a [monitor] keyed section (all keys optional) and validates the result.
MonitorConfig parse_monitor_config(std::string_view text, const std::string& source = {});
MonitorConfig load_monitor_config(const std::string& path);

enum class Mode : std::uint8_t {
    FullAutonomy,
    AutonomyInhibited,
    RecalMode,
    DegradedSafeMode,
    DriftHold,
    SafeStateRequested,
};

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view token);
/// Precedence rank; larger wins.
constexpr int precedence(Mode m) noexcept { return static_cast<int>(m); }

enum class Action : std::uint8_t {
    DriverAlert = 1U << 0,
    ControlledDecel = 1U << 1,
    SpeedCap10Kmh = 1U << 2,
    Recalibrate = 1U << 3,
    SwitchRedundant = 1U << 4,
    InhibitEngagement = 1U << 5,
};

enum class Rule : std::uint8_t {
    ConfidenceGate = 1U << 0,
    DriftWindow = 1U << 1,
    DegradedClock = 1U << 2,
    CalibrationCheck = 1U << 3,
    MapStaleness = 1U << 4,
    FusionReweight = 1U << 5,
};

/// Small flag set over an 8-bit enum.
template <typename Flag>
class FlagSet {
public:
    constexpr FlagSet() = default;
    constexpr FlagSet(std::initializer_list<Flag> flags) {
        for (auto f : flags)
            insert(f);
    }
    constexpr void insert(Flag f) noexcept { bits_ |= static_cast<std::uint8_t>(f); }
    constexpr bool has(Flag f) const noexcept { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr std::uint8_t bits() const noexcept { return bits_; }
    constexpr FlagSet& operator|=(FlagSet o) noexcept {
        bits_ |= o.bits_;
        return *this;
    }
    bool operator==(const FlagSet&) const = default;

private:
    std::uint8_t bits_ = 0;
};

using ActionSet = FlagSet<Action>;
using RuleSet = FlagSet<Rule>;

/// "DRIVER_ALERT|CONTROLLED_DECEL"; "-" when empty.
std::string to_string(ActionSet actions);
std::string to_string(RuleSet rules);
/// Inverse of to_string; nullopt on unknown names.
std::optional<ActionSet> parse_actions(std::string_view text);
std::optional<RuleSet> parse_rules(std::string_view text);

/// Sliding max/min of a scalar over the last `capacity` samples (monotonic deques).
class SlidingRange {
public:
    explicit SlidingRange(std::size_t capacity = 1) : capacity_(capacity) {}

    void push(double value);
    /// max - min over the current window; 0 when empty.
    double range() const noexcept;
    std::size_t size() const noexcept { return count_ < capacity_ ? count_ : capacity_; }

    bool operator==(const SlidingRange&) const = default;

private:
    std::size_t capacity_;
    std::size_t count_ = 0;
    std::deque<std::pair<std::size_t, double>> max_;
    std::deque<std::pair<std::size_t, double>> min_;
};

struct MonitorState {
    Mode mode = Mode::FullAutonomy;
    bool started = false;
    bool engaged = false;
    std::int64_t last_t_ms = 0;
    std::array<double, kModalityCount> weights{};
    std::array<std::int64_t, kModalityCount> gap_ms{};
    std::int64_t below_degraded_ms = 0;
    std::optional<std::int64_t> below_floor_since_ms;
    SlidingRange drift;
    std::int64_t next_calib_ms = 0;

    // Latched conditions.
    bool safe_state = false;
    bool degraded = false;
    bool drift_hold = false;
    std::int64_t drift_quiet_ms = 0;
    bool recal = false;
    ActionSet recal_actions;

    bool operator==(const MonitorState&) const = default;
};

struct MonitorOutput {
    std::int64_t t_ms = 0;
    Mode mode = Mode::FullAutonomy;
    double fused_confidence = 0.0;
    ActionSet actions;
    RuleSet rules;  // rules that fired on this tick

    bool operator==(const MonitorOutput&) const = default;
};

struct FusionResult {
    double fused_confidence = 0.0;
    std::array<double, kModalityCount> weights{};
};

/// Weighted-average fusion. Modalities invalid this tick or whose gap clock
/// exceeds gap_ms get weight 0; the remaining configured weights are
/// renormalised to sum to 1. No active modality gives confidence 0.
FusionResult fuse(const SensorFrame& frame, const MonitorState& state, const MonitorConfig& cfg);

/// Fresh state for `cfg`. Throws ConfigError if cfg is invalid.
MonitorState reset(const MonitorConfig& cfg);

/// Advances one tick. Throws TraceIntegrityError if frame.t_ms does not
/// follow the previous tick by exactly cfg.tick_ms.
std::pair<MonitorState, MonitorOutput> step(const SensorFrame& frame, MonitorState state, const MonitorConfig& cfg);

/// Actions implied by a mode (RECAL_MODE actions depend on the failed check).
ActionSet actions_for(Mode mode, ActionSet recal_actions = {});

/// Owns one monitor's mutable state. Not thread-safe; one caller per instance.
class OddMonitor {
public:
    explicit OddMonitor(MonitorConfig cfg);

    MonitorOutput step(const SensorFrame& frame);
    const MonitorState& state() const noexcept { return state_; }
    const MonitorConfig& config() const noexcept { return cfg_; }

private:
    MonitorConfig cfg_;
    MonitorState state_;
};

}  // namespace safecase
