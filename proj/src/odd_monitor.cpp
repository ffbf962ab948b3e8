#include "safecase/odd_monitor.hpp"

#include <cmath>
#include <string>

#include "safecase/digest.hpp"
#include "safecase/errors.hpp"
#include "safecase/keyed_text.hpp"

namespace safecase {

namespace {

constexpr std::array<std::string_view, kModalityCount> kModalityNames{"GPS", "CAMERA", "RADAR"};
constexpr std::array<std::string_view, kRegionCount> kRegionNames{"URBAN", "SUBURBAN", "RURAL"};
constexpr std::array<std::string_view, kSurfaceCount> kSurfaceNames{"DRY", "WET"};
constexpr std::array<std::string_view, 6> kModeNames{
    "FULL_AUTONOMY", "AUTONOMY_INHIBITED", "RECAL_MODE", "DEGRADED_SAFE_MODE", "DRIFT_HOLD", "SAFE_STATE_REQUESTED"};
constexpr std::array<std::string_view, 6> kActionNames{"DRIVER_ALERT", "CONTROLLED_DECEL", "SPEED_CAP_10KMH",
                                                       "RECALIBRATE",  "SWITCH_REDUNDANT", "INHIBIT_ENGAGEMENT"};
constexpr std::array<std::string_view, 6> kRuleNames{"CONFIDENCE_GATE",   "DRIFT_WINDOW",  "DEGRADED_CLOCK",
                                                     "CALIBRATION_CHECK", "MAP_STALENESS", "FUSION_REWEIGHT"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view token) {
    token = trim(token);
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == token) return static_cast<Enum>(i);
    return std::nullopt;
}

template <typename Flag, std::size_t N>
std::string flags_to_string(FlagSet<Flag> set, const std::array<std::string_view, N>& names) {
    std::string out;
    for (std::size_t i = 0; i < N; ++i) {
        if (set.bits() & (1U << i)) {
            if (!out.empty()) out += '|';
            out += names[i];
        }
    }
    return out.empty() ? "-" : out;
}

template <typename Flag, std::size_t N>
std::optional<FlagSet<Flag>> flags_from_string(std::string_view text, const std::array<std::string_view, N>& names) {
    FlagSet<Flag> out;
    text = trim(text);
    if (text == "-" || text.empty()) return out;
    for (const auto& part : split(text, '|')) {
        bool found = false;
        for (std::size_t i = 0; i < N; ++i) {
            if (names[i] == part) {
                out.insert(static_cast<Flag>(1U << i));
                found = true;
            }
        }
        if (!found) return std::nullopt;
    }
    return out;
}

std::string_view to_lower_name(Modality m) {
    static constexpr std::array<std::string_view, kModalityCount> k{"gps", "camera", "radar"};
    return k[static_cast<std::size_t>(m)];
}

bool positive_multiple(std::int64_t value, std::int64_t tick) { return value > 0 && value % tick == 0; }

}  // namespace

std::string_view to_string(Modality m) { return kModalityNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(Region r) { return kRegionNames[static_cast<std::size_t>(r)]; }
std::string_view to_string(Surface s) { return kSurfaceNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(Mode m) { return kModeNames[static_cast<std::size_t>(m)]; }
std::optional<Modality> parse_modality(std::string_view t) { return lookup<Modality>(kModalityNames, t); }
std::optional<Region> parse_region(std::string_view t) { return lookup<Region>(kRegionNames, t); }
std::optional<Surface> parse_surface(std::string_view t) { return lookup<Surface>(kSurfaceNames, t); }
std::optional<Mode> parse_mode(std::string_view t) { return lookup<Mode>(kModeNames, t); }

std::string to_string(ActionSet actions) { return flags_to_string(actions, kActionNames); }
std::string to_string(RuleSet rules) { return flags_to_string(rules, kRuleNames); }
std::optional<ActionSet> parse_actions(std::string_view text) { return flags_from_string<Action>(text, kActionNames); }
std::optional<RuleSet> parse_rules(std::string_view text) { return flags_from_string<Rule>(text, kRuleNames); }

double SensorFrame::deviation_m() const { return std::hypot(est_pos.x - true_pos.x, est_pos.y - true_pos.y); }

// MonitorConfig -----------------------------------------------------------------

void MonitorConfig::validate() const {
    if (tick_ms <= 0) throw ConfigError("tick_ms must be positive");
    const std::pair<std::string_view, std::int64_t> periods[] = {
        {"safe_state_latency_ms", safe_state_latency_ms},
        {"gap_ms", gap_ms},
        {"degraded_window_ms", degraded_window_ms},
        {"calib_period_ms", calib_period_ms},
        {"drift_window_ms", drift_window_ms},
    };
    for (const auto& [name, value] : periods)
        if (!positive_multiple(value, tick_ms))
            throw ConfigError(std::string(name) + " = " + std::to_string(value) +
                              " must be a positive multiple of tick_ms = " + std::to_string(tick_ms));
    double sum = 0.0;
    for (std::size_t i = 0; i < kModalityCount; ++i) {
        if (!(weights[i] > 0.0 && weights[i] <= 1.0))
            throw ConfigError("weight." + std::string(to_lower_name(static_cast<Modality>(i))) + " must lie in (0,1]");
        sum += weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("weights sum to " + format_short(sum) + ", expected 1");
    if (!(confidence_floor > 0.0 && confidence_floor < 1.0)) throw ConfigError("confidence_floor must lie in (0,1)");
    if (!(degraded_floor > 0.0 && degraded_floor < 1.0)) throw ConfigError("degraded_floor must lie in (0,1)");
    const std::pair<std::string_view, double> positives[] = {
        {"reproj_limit_px", reproj_limit_px},
        {"gps_drift_limit_m", gps_drift_limit_m},
        {"drift_limit_m", drift_limit_m},
        {"drift_speed_cap_kmh", drift_speed_cap_kmh},
        {"map_staleness_limit_h", map_staleness_limit_h},
    };
    for (const auto& [name, value] : positives)
        if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(std::string(name) + " must be positive");
}

void MonitorConfig::set(std::string_view key, std::string_view value) {
    auto as_int = [&](std::int64_t& field) {
        try {
            field = parse_int(value, "", 0);
        } catch (const ParseError&) {
            throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(value) + "'");
        }
    };
    auto as_double = [&](double& field) {
        try {
            field = parse_double(value, "", 0);
        } catch (const ParseError&) {
            throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(value) + "'");
        }
    };
    key = trim(key);
    if (key == "tick_ms") return as_int(tick_ms);
    if (key == "weight.gps") return as_double(weights[0]);
    if (key == "weight.camera") return as_double(weights[1]);
    if (key == "weight.radar") return as_double(weights[2]);
    if (key == "confidence_floor") return as_double(confidence_floor);
    if (key == "safe_state_latency_ms") return as_int(safe_state_latency_ms);
    if (key == "gap_ms") return as_int(gap_ms);
    if (key == "degraded_floor") return as_double(degraded_floor);
    if (key == "degraded_window_ms") return as_int(degraded_window_ms);
    if (key == "calib_period_ms") return as_int(calib_period_ms);
    if (key == "reproj_limit_px") return as_double(reproj_limit_px);
    if (key == "gps_drift_limit_m") return as_double(gps_drift_limit_m);
    if (key == "drift_window_ms") return as_int(drift_window_ms);
    if (key == "drift_limit_m") return as_double(drift_limit_m);
    if (key == "drift_speed_cap_kmh") return as_double(drift_speed_cap_kmh);
    if (key == "map_staleness_limit_h") return as_double(map_staleness_limit_h);
    throw ConfigError("unknown monitor config key '" + std::string(key) + "'");
}

std::string MonitorConfig::canonical() const {
    KeyedWriter w;
    w.section("monitor");
    w.field("tick_ms", tick_ms);
    w.field("weight.gps", weights[0]);
    w.field("weight.camera", weights[1]);
    w.field("weight.radar", weights[2]);
    w.field("confidence_floor", confidence_floor);
    w.field("safe_state_latency_ms", safe_state_latency_ms);
    w.field("gap_ms", gap_ms);
    w.field("degraded_floor", degraded_floor);
    w.field("degraded_window_ms", degraded_window_ms);
    w.field("calib_period_ms", calib_period_ms);
    w.field("reproj_limit_px", reproj_limit_px);
    w.field("gps_drift_limit_m", gps_drift_limit_m);
    w.field("drift_window_ms", drift_window_ms);
    w.field("drift_limit_m", drift_limit_m);
    w.field("drift_speed_cap_kmh", drift_speed_cap_kmh);
    w.field("map_staleness_limit_h", map_staleness_limit_h);
    return w.str();
}

std::string MonitorConfig::digest() const { return digest_hex(canonical()); }

MonitorConfig parse_monitor_config(std::string_view text, const std::string& source) {
    MonitorConfig cfg;
    for (const auto& rec : parse_keyed(text, source).records) {
        if (rec.section != "monitor")
            throw ParseError(source, rec.line, "unexpected section [" + rec.section + "] in monitor config");
        for (const auto& f : rec.fields) {
            try {
                cfg.set(f.key, f.value);
            } catch (const ConfigError& e) {
                throw ParseError(source, f.line, e.what());
            }
        }
    }
    cfg.validate();
    return cfg;
}

MonitorConfig load_monitor_config(const std::string& path) { return parse_monitor_config(read_file(path), path); }

// SlidingRange ------------------------------------------------------------------

void SlidingRange::push(double value) {
    const std::size_t idx = count_++;
    while (!max_.empty() && max_.back().second <= value)
        max_.pop_back();
    max_.emplace_back(idx, value);
    while (!min_.empty() && min_.back().second >= value)
        min_.pop_back();
    min_.emplace_back(idx, value);
    if (idx >= capacity_) {
        const std::size_t oldest = idx + 1 - capacity_;
        while (max_.front().first < oldest)
            max_.pop_front();
        while (min_.front().first < oldest)
            min_.pop_front();
    }
}

double SlidingRange::range() const noexcept { return max_.empty() ? 0.0 : max_.front().second - min_.front().second; }

// Monitor -------------------------------------------------------------------------

FusionResult fuse(const SensorFrame& frame, const MonitorState& state, const MonitorConfig& cfg) {
    FusionResult r;
    double total = 0.0;
    for (std::size_t i = 0; i < kModalityCount; ++i) {
        const bool active = frame.readings[i].valid && state.gap_ms[i] <= cfg.gap_ms;
        if (active) {
            r.weights[i] = cfg.weights[i];
            total += cfg.weights[i];
        }
    }
    if (total <= 0.0) {
        r.weights = {};
        return r;
    }
    for (std::size_t i = 0; i < kModalityCount; ++i) {
        r.weights[i] /= total;
        r.fused_confidence += r.weights[i] * frame.readings[i].confidence;
    }
    return r;
}

MonitorState reset(const MonitorConfig& cfg) {
    cfg.validate();
    MonitorState s;
    s.weights = cfg.weights;
    s.drift = SlidingRange(static_cast<std::size_t>(cfg.drift_window_ms / cfg.tick_ms));
    return s;
}

ActionSet actions_for(Mode mode, ActionSet recal_actions) {
    switch (mode) {
        case Mode::FullAutonomy:
            return {};
        case Mode::AutonomyInhibited:
            return {Action::InhibitEngagement};
        case Mode::RecalMode:
            return recal_actions;
        case Mode::DegradedSafeMode:
            return {Action::DriverAlert, Action::ControlledDecel};
        case Mode::DriftHold:
            return {Action::DriverAlert, Action::SpeedCap10Kmh};
        case Mode::SafeStateRequested:
            return {Action::DriverAlert, Action::ControlledDecel};
    }
    return {};
}

std::pair<MonitorState, MonitorOutput> step(const SensorFrame& frame, MonitorState s, const MonitorConfig& cfg) {
    if (!s.started) {
        s.started = true;
        s.next_calib_ms = frame.t_ms + cfg.calib_period_ms;
    } else if (frame.t_ms != s.last_t_ms + cfg.tick_ms) {
        throw TraceIntegrityError(
            "non-contiguous timestamp: expected t = " + std::to_string(s.last_t_ms + cfg.tick_ms) + " ms, got " +
            std::to_string(frame.t_ms) + " ms");
    }
    s.last_t_ms = frame.t_ms;

    for (std::size_t i = 0; i < kModalityCount; ++i)
        s.gap_ms[i] = frame.readings[i].valid ? 0 : s.gap_ms[i] + cfg.tick_ms;

    MonitorOutput out;
    out.t_ms = frame.t_ms;
    const auto fusion = fuse(frame, s, cfg);
    s.weights = fusion.weights;
    out.fused_confidence = fusion.fused_confidence;
    for (std::size_t i = 0; i < kModalityCount; ++i)
        if (fusion.weights[i] == 0.0) out.rules.insert(Rule::FusionReweight);

    // 1. Confidence floor.
    const bool below_floor = fusion.fused_confidence < cfg.confidence_floor;
    if (below_floor) {
        if (!s.below_floor_since_ms) s.below_floor_since_ms = frame.t_ms;
        out.rules.insert(Rule::ConfidenceGate);
    } else {
        s.below_floor_since_ms.reset();
    }

    // 2. Drift growth within the window.
    s.drift.push(frame.deviation_m());
    const bool drift_fired = s.drift.range() > cfg.drift_limit_m;
    if (drift_fired) out.rules.insert(Rule::DriftWindow);

    // 3. Degraded clock: strictly longer than the window.
    s.below_degraded_ms = fusion.fused_confidence < cfg.degraded_floor ? s.below_degraded_ms + cfg.tick_ms : 0;
    const bool degraded_fired = s.below_degraded_ms > cfg.degraded_window_ms;
    if (degraded_fired) out.rules.insert(Rule::DegradedClock);

    // 4. Calibration self-check at each period boundary.
    ActionSet calib_actions;
    bool calib_checked = false;
    if (frame.t_ms >= s.next_calib_ms) {
        calib_checked = true;
        s.next_calib_ms += cfg.calib_period_ms;
        if (frame.cam_reproj_err_px > cfg.reproj_limit_px) calib_actions.insert(Action::Recalibrate);
        if (frame.gps_err_m > cfg.gps_drift_limit_m) calib_actions.insert(Action::SwitchRedundant);
        if (!calib_actions.empty()) out.rules.insert(Rule::CalibrationCheck);
    }

    // 5. Map staleness.
    const bool stale = frame.map_age_h > cfg.map_staleness_limit_h;
    if (stale) out.rules.insert(Rule::MapStaleness);

    if (!s.engaged) {
        if (stale) {
            s.mode = Mode::AutonomyInhibited;
            out.mode = s.mode;
            out.actions = actions_for(s.mode);
            return {std::move(s), out};
        }
        s.engaged = true;
    }

    if (below_floor || stale) s.safe_state = true;
    if (drift_fired) {
        s.drift_hold = true;
        s.drift_quiet_ms = 0;
    } else if (s.drift_hold) {
        s.drift_quiet_ms += cfg.tick_ms;
        if (s.drift_quiet_ms >= cfg.drift_window_ms) s.drift_hold = false;
    }
    if (degraded_fired) s.degraded = true;
    if (calib_checked) {
        s.recal = !calib_actions.empty();
        s.recal_actions = calib_actions;
    }

    if (s.safe_state)
        s.mode = Mode::SafeStateRequested;
    else if (s.drift_hold)
        s.mode = Mode::DriftHold;
    else if (s.degraded)
        s.mode = Mode::DegradedSafeMode;
    else if (s.recal)
        s.mode = Mode::RecalMode;
    else
        s.mode = Mode::FullAutonomy;

    out.mode = s.mode;
    out.actions = actions_for(s.mode, s.recal_actions);
    return {std::move(s), out};
}

OddMonitor::OddMonitor(MonitorConfig cfg) : cfg_(std::move(cfg)), state_(reset(cfg_)) {}

MonitorOutput OddMonitor::step(const SensorFrame& frame) {
    auto [next, out] = safecase::step(frame, std::move(state_), cfg_);
    state_ = std::move(next);
    return out;
}

}  // namespace safecase
