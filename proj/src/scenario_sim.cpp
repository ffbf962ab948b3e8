#include "safecase/scenario_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "safecase/digest.hpp"
#include "safecase/errors.hpp"
#include "safecase/keyed_text.hpp"

namespace safecase {

namespace {

constexpr std::array<std::string_view, kInjectionKindCount> kInjectionNames{
    "GPS_DRIFT_RAMP", "CAMERA_NOISE", "DATA_GAP", "WEATHER", "MAP_STALE", "BOUNDARY_SKIM"};

constexpr std::size_t idx(InjectionKind k) { return static_cast<std::size_t>(k); }

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based noise in [-1, 1): a pure function of (seed, tick, channel), so
// frames can be generated in any order.
double unit_noise(std::uint64_t seed, std::uint64_t tick, std::uint64_t channel) noexcept {
    const std::uint64_t h = splitmix64(seed ^ splitmix64(tick * 8 + channel));
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

// Injections sharing a channel must not overlap in time.
std::string channel_of(const Injection& inj) {
    if (inj.kind == InjectionKind::DataGap && inj.modality) return "DATA_GAP:" + std::string(to_string(*inj.modality));
    return std::string(to_string(inj.kind));
}

std::string header_value(const std::map<std::string, std::string>& meta, const std::string& key,
                         const std::string& source) {
    auto it = meta.find(key);
    if (it == meta.end()) throw ParseError(source, 0, "missing header field '" + key + "'");
    return it->second;
}

std::uint64_t parse_seed(std::string_view text, const std::string& source, std::size_t line) {
    const auto t = trim(text);
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || end != t.data() + t.size() || t.empty())
        throw ParseError(source, line, "invalid seed '" + std::string(t) + "'");
    return v;
}

}  // namespace

std::string_view to_string(InjectionKind k) { return kInjectionNames[idx(k)]; }

std::optional<InjectionKind> parse_injection_kind(std::string_view token) {
    for (std::size_t i = 0; i < kInjectionNames.size(); ++i)
        if (kInjectionNames[i] == token) return static_cast<InjectionKind>(i);
    return std::nullopt;
}

void ScenarioSpec::validate() const {
    if (id.empty()) throw SpecError("scenario id is empty");
    if (tick_ms <= 0) throw SpecError("tick_ms must be positive");
    if (duration_ms <= 0) throw SpecError("duration_ms must be positive");
    if (duration_ms % tick_ms != 0) throw SpecError("duration_ms must be a multiple of tick_ms");
    if (!(initial_map_age_h >= 0.0)) throw SpecError("map_age_h must be non-negative");
    if (segments.empty()) throw SpecError("route has no segments");
    for (const auto& seg : segments) {
        if (!(seg.length_km > 0.0) || !std::isfinite(seg.length_km)) throw SpecError("segment length must be positive");
        if (!(seg.speed_kmh >= 0.0) || !std::isfinite(seg.speed_kmh))
            throw SpecError("segment speed must be non-negative");
    }
    for (const auto& inj : injections) {
        const std::string name(to_string(inj.kind));
        if (inj.start_ms < 0 || inj.duration_ms < 0 || inj.start_ms + inj.duration_ms > duration_ms)
            throw SpecError(name + " injection at " + std::to_string(inj.start_ms) + " ms lies outside [0, " +
                            std::to_string(duration_ms) + "] ms");
        if (!(inj.magnitude >= 0.0) || !std::isfinite(inj.magnitude))
            throw SpecError(name + " magnitude must be finite and non-negative");
        if ((inj.kind == InjectionKind::Weather || inj.kind == InjectionKind::BoundarySkim) && inj.magnitude > 1.0)
            throw SpecError(name + " magnitude must lie in [0, 1]");
        if ((inj.kind == InjectionKind::DataGap) != inj.modality.has_value())
            throw SpecError(inj.kind == InjectionKind::DataGap ? "DATA_GAP injection needs a modality"
                                                               : name + " injection takes no modality");
    }
    for (std::size_t i = 0; i < injections.size(); ++i)
        for (std::size_t j = i + 1; j < injections.size(); ++j) {
            const auto& a = injections[i];
            const auto& b = injections[j];
            if (channel_of(a) != channel_of(b)) continue;
            if (a.start_ms <= b.start_ms + b.duration_ms && b.start_ms <= a.start_ms + a.duration_ms)
                throw SpecError("overlapping " + channel_of(a) + " injections at " + std::to_string(a.start_ms) +
                                " ms and " + std::to_string(b.start_ms) + " ms");
        }
    for (const auto& row : llp.base)
        for (double v : row)
            if (!(v >= 0.0 && v <= 1.0)) throw SpecError("llp base confidence must lie in [0, 1]");
    if (!(llp.out_of_odd_base >= 0.0 && llp.out_of_odd_base <= 1.0))
        throw SpecError("llp out_of_odd_base must lie in [0, 1]");
    if (!(llp.noise >= 0.0) || !(llp.pos_noise_m >= 0.0) || !(llp.base_reproj_px >= 0.0))
        throw SpecError("llp noise and reprojection terms must be non-negative");
}

std::string ScenarioSpec::canonical() const {
    KeyedWriter w;
    w.section("scenario");
    w.field("id", id);
    w.field("class", scenario_class);
    w.field("seed", std::to_string(seed));
    w.field("duration_ms", duration_ms);
    w.field("tick_ms", tick_ms);
    w.field("map_age_h", initial_map_age_h);
    for (const auto& seg : segments) {
        w.section("segment");
        w.field("region", to_string(seg.region));
        w.field("surface", to_string(seg.surface));
        w.field("length_km", seg.length_km);
        w.field("speed_kmh", seg.speed_kmh);
        w.field("in_odd", seg.in_odd ? "true" : "false");
    }
    for (const auto& inj : injections) {
        w.section("injection");
        w.field("kind", to_string(inj.kind));
        w.field("start_ms", inj.start_ms);
        w.field("duration_ms", inj.duration_ms);
        w.field("magnitude", inj.magnitude);
        if (inj.modality) w.field("modality", to_string(*inj.modality));
    }
    w.section("llp");
    for (std::size_t r = 0; r < kRegionCount; ++r)
        for (std::size_t s = 0; s < kSurfaceCount; ++s)
            w.field("base." + std::string(to_string(static_cast<Region>(r))) + "." +
                        std::string(to_string(static_cast<Surface>(s))),
                    llp.base[r][s]);
    w.field("out_of_odd_base", llp.out_of_odd_base);
    for (std::size_t k = 0; k < kInjectionKindCount; ++k)
        for (std::size_t m = 0; m < kModalityCount; ++m)
            w.field("coef." + std::string(kInjectionNames[k]) + "." + std::string(to_string(static_cast<Modality>(m))),
                    llp.coef[k][m]);
    w.field("noise", llp.noise);
    w.field("pos_noise_m", llp.pos_noise_m);
    w.field("base_reproj_px", llp.base_reproj_px);
    return w.str();
}

std::string ScenarioSpec::digest() const { return digest_hex(canonical()); }

ScenarioSpec parse_scenario_spec(std::string_view text, const std::string& source) {
    ScenarioSpec spec;
    spec.segments.clear();
    bool saw_scenario = false;
    for (const auto& rec : parse_keyed(text, source).records) {
        auto num = [&](const KeyedField& f) { return parse_double(f.value, source, f.line); };
        auto integer = [&](const KeyedField& f) { return parse_int(f.value, source, f.line); };
        auto unknown = [&](const KeyedField& f) {
            throw ParseError(source, f.line, "unknown field '" + f.key + "' in [" + rec.section + "]");
        };
        if (rec.section == "scenario") {
            if (saw_scenario) throw ParseError(source, rec.line, "second [scenario] section");
            saw_scenario = true;
            for (const auto& f : rec.fields) {
                if (f.key == "id")
                    spec.id = f.value;
                else if (f.key == "class")
                    spec.scenario_class = f.value;
                else if (f.key == "seed")
                    spec.seed = parse_seed(f.value, source, f.line);
                else if (f.key == "duration_ms")
                    spec.duration_ms = integer(f);
                else if (f.key == "tick_ms")
                    spec.tick_ms = integer(f);
                else if (f.key == "map_age_h")
                    spec.initial_map_age_h = num(f);
                else
                    unknown(f);
            }
        } else if (rec.section == "segment") {
            RouteSegment seg;
            for (const auto& f : rec.fields) {
                if (f.key == "region") {
                    auto r = parse_region(f.value);
                    if (!r) throw ParseError(source, f.line, "unknown region '" + f.value + "'");
                    seg.region = *r;
                } else if (f.key == "surface") {
                    auto s = parse_surface(f.value);
                    if (!s) throw ParseError(source, f.line, "unknown surface '" + f.value + "'");
                    seg.surface = *s;
                } else if (f.key == "length_km")
                    seg.length_km = num(f);
                else if (f.key == "speed_kmh")
                    seg.speed_kmh = num(f);
                else if (f.key == "in_odd")
                    seg.in_odd = parse_bool(f.value, source, f.line);
                else
                    unknown(f);
            }
            spec.segments.push_back(seg);
        } else if (rec.section == "injection") {
            Injection inj;
            const auto& kind = rec.require("kind", source);
            auto k = parse_injection_kind(kind.value);
            if (!k) throw ParseError(source, kind.line, "unknown injection kind '" + kind.value + "'");
            inj.kind = *k;
            for (const auto& f : rec.fields) {
                if (f.key == "kind") continue;
                if (f.key == "start_ms")
                    inj.start_ms = integer(f);
                else if (f.key == "duration_ms")
                    inj.duration_ms = integer(f);
                else if (f.key == "magnitude")
                    inj.magnitude = num(f);
                else if (f.key == "modality") {
                    auto m = parse_modality(f.value);
                    if (!m) throw ParseError(source, f.line, "unknown modality '" + f.value + "'");
                    inj.modality = *m;
                } else
                    unknown(f);
            }
            spec.injections.push_back(inj);
        } else if (rec.section == "llp") {
            for (const auto& f : rec.fields) {
                const auto parts = split(f.key, '.');
                if (parts.size() == 3 && parts[0] == "base") {
                    auto r = parse_region(parts[1]);
                    auto s = parse_surface(parts[2]);
                    if (!r || !s) unknown(f);
                    spec.llp.base[static_cast<std::size_t>(*r)][static_cast<std::size_t>(*s)] = num(f);
                } else if (parts.size() == 3 && parts[0] == "coef") {
                    auto k2 = parse_injection_kind(parts[1]);
                    auto m = parse_modality(parts[2]);
                    if (!k2 || !m) unknown(f);
                    spec.llp.coef[idx(*k2)][static_cast<std::size_t>(*m)] = num(f);
                } else if (f.key == "out_of_odd_base")
                    spec.llp.out_of_odd_base = num(f);
                else if (f.key == "noise")
                    spec.llp.noise = num(f);
                else if (f.key == "pos_noise_m")
                    spec.llp.pos_noise_m = num(f);
                else if (f.key == "base_reproj_px")
                    spec.llp.base_reproj_px = num(f);
                else
                    unknown(f);
            }
        } else {
            throw ParseError(source, rec.line, "unexpected section [" + rec.section + "] in scenario spec");
        }
    }
    if (!saw_scenario) throw ParseError(source, 0, "missing [scenario] section");
    try {
        spec.validate();
    } catch (const SpecError& e) {
        throw SpecError((source.empty() ? std::string("<input>") : source) + ": " + e.what());
    }
    return spec;
}

ScenarioSpec load_scenario_spec(const std::string& path) { return parse_scenario_spec(read_file(path), path); }

Trace generate(const ScenarioSpec& spec) {
    spec.validate();
    Trace trace;
    trace.scenario_id = spec.id;
    trace.scenario_class = spec.scenario_class;
    trace.seed = spec.seed;
    trace.spec_digest = spec.digest();
    trace.tick_ms = spec.tick_ms;

    double route_km = 0.0;
    for (const auto& seg : spec.segments)
        route_km += seg.length_km;

    const auto n = static_cast<std::size_t>(spec.duration_ms / spec.tick_ms);
    trace.frames.reserve(n);
    const auto& llp = spec.llp;
    double odometer_km = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        SensorFrame f;
        f.t_ms = static_cast<std::int64_t>(k) * spec.tick_ms;

        // Route position wraps so any duration is covered.
        double along = std::fmod(odometer_km, route_km);
        const RouteSegment* seg = &spec.segments.back();
        for (const auto& s : spec.segments) {
            if (along < s.length_km) {
                seg = &s;
                break;
            }
            along -= s.length_km;
        }
        f.region = seg->region;
        f.surface = seg->surface;
        f.speed_kmh = seg->speed_kmh;
        f.distance_delta_km = seg->speed_kmh * static_cast<double>(spec.tick_ms) / 3.6e6;
        f.true_in_odd = seg->in_odd;
        f.true_pos = {odometer_km * 1000.0, 0.0};
        f.map_age_h = spec.initial_map_age_h + static_cast<double>(f.t_ms) / 3.6e6;
        f.cam_reproj_err_px = llp.base_reproj_px;

        std::array<double, kInjectionKindCount> mag{};
        std::array<bool, kModalityCount> gapped{};
        for (const auto& inj : spec.injections) {
            if (!inj.active_at(f.t_ms)) continue;
            double m = inj.magnitude;
            if (inj.kind == InjectionKind::GpsDriftRamp && inj.duration_ms > 0)
                m *= static_cast<double>(f.t_ms - inj.start_ms) / static_cast<double>(inj.duration_ms);
            if (inj.kind == InjectionKind::DataGap) gapped[static_cast<std::size_t>(*inj.modality)] = true;
            mag[idx(inj.kind)] = m;
        }

        const bool skim = std::any_of(spec.injections.begin(), spec.injections.end(), [&](const Injection& inj) {
            return inj.kind == InjectionKind::BoundarySkim && inj.active_at(f.t_ms);
        });
        const bool weather = std::any_of(spec.injections.begin(), spec.injections.end(), [&](const Injection& inj) {
            return inj.kind == InjectionKind::Weather && inj.active_at(f.t_ms);
        });
        if (skim) f.true_in_odd = false;
        if (weather) f.surface = Surface::Wet;

        f.gps_err_m = mag[idx(InjectionKind::GpsDriftRamp)];
        f.cam_reproj_err_px += mag[idx(InjectionKind::CameraNoise)];
        f.map_age_h += mag[idx(InjectionKind::MapStale)];
        const double lateral = llp.pos_noise_m > 0.0 ? llp.pos_noise_m * unit_noise(spec.seed, k, 3) : 0.0;
        f.est_pos = {f.true_pos.x, f.true_pos.y + f.gps_err_m + lateral};

        const double base = seg->in_odd
                                ? llp.base[static_cast<std::size_t>(f.region)][static_cast<std::size_t>(f.surface)]
                                : llp.out_of_odd_base;
        for (std::size_t m = 0; m < kModalityCount; ++m) {
            auto& rd = f.readings[m];
            if (gapped[m]) {
                rd = {false, 0.0};
                continue;
            }
            double c = base;
            for (std::size_t kind = 0; kind < kInjectionKindCount; ++kind)
                c -= llp.coef[kind][m] * mag[kind];
            if (llp.noise > 0.0) c += llp.noise * unit_noise(spec.seed, k, m);
            rd = {true, std::clamp(c, 0.0, 1.0)};
        }
        trace.frames.push_back(f);
        odometer_km += f.distance_delta_km;
    }
    return trace;
}

// Trace files ---------------------------------------------------------------

namespace {

constexpr std::string_view kTraceColumns =
    "t_ms,gps_valid,gps_conf,camera_valid,camera_conf,radar_valid,radar_conf,gps_err_m,cam_reproj_err_px,"
    "est_x_m,est_y_m,true_x_m,true_y_m,map_age_h,speed_kmh,distance_delta_km,region,surface,true_in_odd";
constexpr std::string_view kTraceUnits = "ms,bool,1,bool,1,bool,1,m,px,m,m,m,m,h,km/h,km,-,-,bool";
constexpr std::size_t kTraceFieldCount = 19;

// "# key = value" header lines; returns metadata and the first data line index.
std::map<std::string, std::string> read_header(const std::vector<std::string>& lines, std::size_t& pos,
                                               std::string_view columns, const std::string& source) {
    std::map<std::string, std::string> meta;
    pos = 0;
    for (; pos < lines.size(); ++pos) {
        std::string_view line = lines[pos];
        if (trim(line).empty()) continue;
        if (line.front() != '#') break;
        line.remove_prefix(1);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) continue;
        meta[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    if (pos >= lines.size() || trim(lines[pos]) != columns)
        throw ParseError(source, pos + 1, "expected column header '" + std::string(columns) + "'");
    ++pos;
    return meta;
}

std::vector<std::string> text_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

std::string bool01(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string serialize_trace(const Trace& trace) {
    std::string out;
    out += "# safecase trace\n";
    out += "# scenario = " + trace.scenario_id + "\n";
    out += "# class = " + trace.scenario_class + "\n";
    out += "# seed = " + std::to_string(trace.seed) + "\n";
    out += "# spec_digest = " + trace.spec_digest + "\n";
    out += "# tick_ms = " + std::to_string(trace.tick_ms) + "\n";
    out += "# units = " + std::string(kTraceUnits) + "\n";
    out += std::string(kTraceColumns) + "\n";
    for (const auto& f : trace.frames) {
        out += std::to_string(f.t_ms);
        for (const auto& r : f.readings)
            out += "," + bool01(r.valid) + "," + format_double(r.confidence);
        for (double v : {f.gps_err_m, f.cam_reproj_err_px, f.est_pos.x, f.est_pos.y, f.true_pos.x, f.true_pos.y,
                         f.map_age_h, f.speed_kmh, f.distance_delta_km})
            out += "," + format_double(v);
        out += "," + std::string(to_string(f.region)) + "," + std::string(to_string(f.surface)) + "," +
               bool01(f.true_in_odd) + "\n";
    }
    return out;
}

Trace parse_trace(std::string_view text, const std::string& source) {
    const auto lines = text_lines(text);
    std::size_t pos = 0;
    const auto meta = read_header(lines, pos, kTraceColumns, source);
    Trace trace;
    trace.scenario_id = header_value(meta, "scenario", source);
    trace.scenario_class = header_value(meta, "class", source);
    trace.seed = parse_seed(header_value(meta, "seed", source), source, 0);
    trace.spec_digest = header_value(meta, "spec_digest", source);
    trace.tick_ms = parse_int(header_value(meta, "tick_ms", source), source, 0);
    for (; pos < lines.size(); ++pos) {
        if (trim(lines[pos]).empty()) continue;
        const std::size_t ln = pos + 1;
        const auto cells = split(lines[pos], ',');
        if (cells.size() != kTraceFieldCount)
            throw ParseError(
                source, ln,
                "expected " + std::to_string(kTraceFieldCount) + " fields, got " + std::to_string(cells.size()));
        SensorFrame f;
        std::size_t c = 0;
        f.t_ms = parse_int(cells[c++], source, ln);
        for (auto& r : f.readings) {
            r.valid = parse_bool(cells[c++], source, ln);
            r.confidence = parse_double(cells[c++], source, ln);
            if (!(r.confidence >= 0.0 && r.confidence <= 1.0))
                throw ParseError(source, ln, "confidence outside [0, 1]");
        }
        for (double* v : {&f.gps_err_m, &f.cam_reproj_err_px, &f.est_pos.x, &f.est_pos.y, &f.true_pos.x, &f.true_pos.y,
                          &f.map_age_h, &f.speed_kmh, &f.distance_delta_km})
            *v = parse_double(cells[c++], source, ln);
        auto region = parse_region(trim(cells[c++]));
        if (!region) throw ParseError(source, ln, "unknown region '" + cells[c - 1] + "'");
        auto surface = parse_surface(trim(cells[c++]));
        if (!surface) throw ParseError(source, ln, "unknown surface '" + cells[c - 1] + "'");
        f.region = *region;
        f.surface = *surface;
        f.true_in_odd = parse_bool(cells[c++], source, ln);
        trace.frames.push_back(f);
    }
    return trace;
}

Trace load_trace(const std::string& path) { return parse_trace(read_file(path), path); }

// Replay and run records ----------------------------------------------------

std::vector<ModeEvent> mode_events(const std::vector<MonitorOutput>& outputs) {
    std::vector<ModeEvent> events;
    for (const auto& o : outputs)
        if (events.empty() || events.back().mode != o.mode) events.push_back({o.t_ms, o.mode});
    return events;
}

RunRecord replay(const Trace& trace, const MonitorConfig& cfg) {
    cfg.validate();
    if (trace.tick_ms != cfg.tick_ms)
        throw TraceIntegrityError("trace tick " + std::to_string(trace.tick_ms) + " ms differs from monitor tick " +
                                  std::to_string(cfg.tick_ms) + " ms");
    RunRecord run;
    run.scenario_id = trace.scenario_id;
    run.scenario_class = trace.scenario_class;
    run.seed = trace.seed;
    run.config = cfg;
    run.config_digest = cfg.digest();
    run.outputs.reserve(trace.frames.size());
    OddMonitor monitor(cfg);
    for (const auto& f : trace.frames)
        run.outputs.push_back(monitor.step(f));
    run.events = mode_events(run.outputs);
    return run;
}

namespace {
constexpr std::string_view kRunColumns = "t_ms,mode,fused_confidence,actions,rules";
}

std::string serialize_run_record(const RunRecord& run) {
    std::string out;
    out += "# safecase run\n";
    out += "# scenario = " + run.scenario_id + "\n";
    out += "# class = " + run.scenario_class + "\n";
    out += "# seed = " + std::to_string(run.seed) + "\n";
    out += "# config_digest = " + run.config_digest + "\n";
    for (const auto& rec : parse_keyed(run.config.canonical()).records)
        for (const auto& f : rec.fields)
            out += "# config." + f.key + " = " + f.value + "\n";
    out += "# units = ms,-,1,-,-\n";
    out += std::string(kRunColumns) + "\n";
    for (const auto& o : run.outputs)
        out += std::to_string(o.t_ms) + "," + std::string(to_string(o.mode)) + "," + format_double(o.fused_confidence) +
               "," + to_string(o.actions) + "," + to_string(o.rules) + "\n";
    return out;
}

RunRecord parse_run_record(std::string_view text, const std::string& source) {
    const auto lines = text_lines(text);
    std::size_t pos = 0;
    const auto meta = read_header(lines, pos, kRunColumns, source);
    RunRecord run;
    run.scenario_id = header_value(meta, "scenario", source);
    run.scenario_class = header_value(meta, "class", source);
    run.seed = parse_seed(header_value(meta, "seed", source), source, 0);
    run.config_digest = header_value(meta, "config_digest", source);
    try {
        for (const auto& [key, value] : meta)
            if (key.rfind("config.", 0) == 0) run.config.set(key.substr(7), value);
        run.config.validate();
    } catch (const ConfigError& e) {
        throw ParseError(source, 0, e.what());
    }
    if (run.config.digest() != run.config_digest)
        throw ParseError(source, 0, "embedded config does not match config_digest " + run.config_digest);
    for (; pos < lines.size(); ++pos) {
        if (trim(lines[pos]).empty()) continue;
        const std::size_t ln = pos + 1;
        const auto cells = split(lines[pos], ',');
        if (cells.size() != 5) throw ParseError(source, ln, "expected 5 fields, got " + std::to_string(cells.size()));
        MonitorOutput o;
        o.t_ms = parse_int(cells[0], source, ln);
        auto mode = parse_mode(trim(cells[1]));
        if (!mode) throw ParseError(source, ln, "unknown mode '" + cells[1] + "'");
        o.mode = *mode;
        o.fused_confidence = parse_double(cells[2], source, ln);
        auto actions = parse_actions(trim(cells[3]));
        if (!actions) throw ParseError(source, ln, "unknown action in '" + cells[3] + "'");
        auto rules = parse_rules(trim(cells[4]));
        if (!rules) throw ParseError(source, ln, "unknown rule in '" + cells[4] + "'");
        o.actions = *actions;
        o.rules = *rules;
        run.outputs.push_back(o);
    }
    run.events = mode_events(run.outputs);
    return run;
}

RunRecord load_run_record(const std::string& path) { return parse_run_record(read_file(path), path); }

}  // namespace safecase
