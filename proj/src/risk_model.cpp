#include "safecase/risk_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "safecase/errors.hpp"
#include "safecase/keyed_text.hpp"

namespace safecase {

namespace {

using A = AsilLevel;

// Indexed [S1..S3][E1..E4][C1..C3].
constexpr std::array<std::array<std::array<AsilLevel, 3>, 4>, 3> kAsilTable{{
    {{{A::QM, A::QM, A::QM}, {A::QM, A::QM, A::QM}, {A::QM, A::QM, A::A}, {A::QM, A::A, A::B}}},
    {{{A::QM, A::QM, A::QM}, {A::QM, A::QM, A::A}, {A::QM, A::A, A::B}, {A::A, A::B, A::C}}},
    {{{A::QM, A::QM, A::A}, {A::QM, A::A, A::B}, {A::A, A::B, A::C}, {A::B, A::C, A::D}}},
}};

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out)
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_prefixed(std::string_view token, char prefix, int first) {
    token = trim(token);
    if (token.size() != 2 || std::toupper(static_cast<unsigned char>(token[0])) != prefix) return std::nullopt;
    const int digit = token[1] - '0';
    if (digit < first || digit >= first + static_cast<int>(N)) return std::nullopt;
    return static_cast<Enum>(digit - first);
}

}  // namespace

std::string_view to_string(Severity s) {
    static constexpr std::array<std::string_view, 4> k{"S0", "S1", "S2", "S3"};
    return k[static_cast<std::size_t>(s)];
}
std::string_view to_string(Exposure e) {
    static constexpr std::array<std::string_view, 4> k{"E1", "E2", "E3", "E4"};
    return k[static_cast<std::size_t>(e)];
}
std::string_view to_string(Controllability c) {
    static constexpr std::array<std::string_view, 4> k{"C0", "C1", "C2", "C3"};
    return k[static_cast<std::size_t>(c)];
}
std::string_view to_string(AsilLevel a) {
    static constexpr std::array<std::string_view, 5> k{"QM", "A", "B", "C", "D"};
    return k[static_cast<std::size_t>(a)];
}
std::string_view to_string(GateMode m) { return m == GateMode::Disjunctive ? "DISJUNCTIVE" : "CONJUNCTIVE"; }
std::string_view to_string(AnalysisKind k) { return k == AnalysisKind::Hara ? "HARA" : "SIRA"; }

std::optional<Severity> parse_severity(std::string_view token) { return parse_prefixed<Severity, 4>(token, 'S', 0); }
std::optional<Exposure> parse_exposure(std::string_view token) { return parse_prefixed<Exposure, 4>(token, 'E', 1); }
std::optional<Controllability> parse_controllability(std::string_view token) {
    return parse_prefixed<Controllability, 4>(token, 'C', 0);
}

std::optional<AsilLevel> parse_asil(std::string_view token) {
    auto t = lower(trim(token));
    if (t == "qm") return A::QM;
    if (t == "a" || t == "asil-a" || t == "asil a") return A::A;
    if (t == "b" || t == "asil-b" || t == "asil b") return A::B;
    if (t == "c" || t == "asil-c" || t == "asil c") return A::C;
    if (t == "d" || t == "asil-d" || t == "asil d") return A::D;
    return std::nullopt;
}

std::optional<GateMode> parse_gate_mode(std::string_view token) {
    auto t = lower(trim(token));
    if (t == "or" || t == "disjunctive") return GateMode::Disjunctive;
    if (t == "and" || t == "conjunctive") return GateMode::Conjunctive;
    return std::nullopt;
}

AsilLevel determine_asil(Severity s, Exposure e, Controllability c) noexcept {
    if (s == Severity::S0 || c == Controllability::C0) return A::QM;
    return kAsilTable[static_cast<std::size_t>(s) - 1][static_cast<std::size_t>(e)][static_cast<std::size_t>(c) - 1];
}

bool rra_required(Severity s, Controllability c, GateMode mode) noexcept {
    const bool s_pos = s > Severity::S0;
    const bool c_pos = c > Controllability::C0;
    return mode == GateMode::Disjunctive ? (s_pos || c_pos) : (s_pos && c_pos);
}

std::string RuleCell::label() const {
    std::string out = std::string(to_string(severity)) + "/" + std::string(to_string(exposure)) + "/" +
                      std::string(to_string(controllability));
    if (short_circuit) out += " (S0/C0 -> QM)";
    return out;
}

AsilLevel record_asil(const HazardRecord& record) {
    if (!record.exposure) throw RegistryError("hazard '" + record.id + "': exposure missing, cannot determine ASIL");
    return determine_asil(record.severity, *record.exposure, record.controllability);
}

std::vector<Verdict> evaluate_registry(const std::vector<HazardRecord>& records, GateMode mode) {
    std::unordered_set<std::string> seen;
    for (const auto& r : records)
        if (!seen.insert(r.id).second) throw RegistryError("duplicate hazard id '" + r.id + "'");

    std::vector<Verdict> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        Verdict v;
        v.id = r.id;
        v.kind = r.kind;
        v.gate_mode = mode;
        if (r.kind == AnalysisKind::Hara) {
            v.asil = record_asil(r);
            v.asil_cell = RuleCell{r.severity, *r.exposure, r.controllability,
                                   r.severity == Severity::S0 || r.controllability == Controllability::C0};
            v.safe_state_required = *v.asil != A::QM;
        }
        v.rra = rra_required(r.severity, r.controllability, mode);
        v.gate_rule = std::string(to_string(r.severity)) + ">S0 " + (mode == GateMode::Disjunctive ? "or" : "and") +
                      " " + std::string(to_string(r.controllability)) + ">C0";
        out.push_back(std::move(v));
    }
    return out;
}

HazardRecord parse_hazard_record(const KeyedRecord& rec, const std::string& source) {
    HazardRecord h;
    h.id = rec.require("id", source).value;
    const auto& kind = rec.require("kind", source);
    if (kind.value == "HARA")
        h.kind = AnalysisKind::Hara;
    else if (kind.value == "SIRA")
        h.kind = AnalysisKind::Sira;
    else
        throw ParseError(source, kind.line, "unknown analysis kind '" + kind.value + "' (expected HARA or SIRA)");

    const auto& s = rec.require("S", source);
    auto sev = parse_severity(s.value);
    if (!sev) throw ParseError(source, s.line, "unknown severity '" + s.value + "' (expected S0..S3)");
    h.severity = *sev;

    const auto& c = rec.require("C", source);
    auto ctl = parse_controllability(c.value);
    if (!ctl) throw ParseError(source, c.line, "unknown controllability '" + c.value + "' (expected C0..C3)");
    h.controllability = *ctl;

    if (const auto* e = rec.find("E")) {
        auto exp = parse_exposure(e->value);
        if (!exp) throw ParseError(source, e->line, "unknown exposure '" + e->value + "' (expected E1..E4)");
        h.exposure = *exp;
    } else if (h.kind == AnalysisKind::Hara) {
        throw ParseError(source, rec.line, "HARA record '" + h.id + "' requires an exposure (E)");
    }

    auto opt = [&](std::string_view key) {
        const auto* f = rec.find(key);
        return f ? f->value : std::string{};
    };
    h.action = opt("action");
    h.hazard = opt("hazard");
    h.situation = opt("situation");
    h.hazardous_event = opt("event");
    h.safety_goal = opt("goal");
    h.safe_state = opt("safe_state");

    static constexpr std::array<std::string_view, 11> kKnown{"id", "kind", "action", "hazard", "situation", "event",
                                                             "S",  "E",    "C",      "goal",   "safe_state"};
    for (const auto& f : rec.fields)
        if (std::find(kKnown.begin(), kKnown.end(), f.key) == kKnown.end())
            throw ParseError(source, f.line, "unknown hazard field '" + f.key + "'");
    return h;
}

std::vector<HazardRecord> parse_hazard_registry(std::string_view text, const std::string& source) {
    auto doc = parse_keyed(text, source);
    std::vector<HazardRecord> out;
    for (const auto& rec : doc.records) {
        if (rec.section != "hazard")
            throw ParseError(source, rec.line, "unexpected section [" + rec.section + "] in hazard registry");
        out.push_back(parse_hazard_record(rec, source));
    }
    return out;
}

std::vector<HazardRecord> load_hazard_registry(const std::string& path) {
    return parse_hazard_registry(read_file(path), path);
}

std::string serialize_hazard_registry(const std::vector<HazardRecord>& records) {
    KeyedWriter w;
    for (const auto& h : records) {
        w.section("hazard");
        w.field("id", h.id);
        w.field("kind", to_string(h.kind));
        if (!h.action.empty()) w.field("action", h.action);
        if (!h.hazard.empty()) w.field("hazard", h.hazard);
        if (!h.situation.empty()) w.field("situation", h.situation);
        if (!h.hazardous_event.empty()) w.field("event", h.hazardous_event);
        w.field("S", to_string(h.severity));
        if (h.exposure) w.field("E", to_string(*h.exposure));
        w.field("C", to_string(h.controllability));
        if (!h.safety_goal.empty()) w.field("goal", h.safety_goal);
        if (!h.safe_state.empty()) w.field("safe_state", h.safe_state);
    }
    return w.str();
}

}  // namespace safecase
