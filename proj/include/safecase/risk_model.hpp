#pragma once

// ASIL determination and the SOTIF residual-risk gate, plus batch evaluation
// of HARA / SIRA hazard registries.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace safecase {

enum class Severity : std::uint8_t { S0, S1, S2, S3 };
enum class Exposure : std::uint8_t { E1, E2, E3, E4 };
enum class Controllability : std::uint8_t { C0, C1, C2, C3 };
enum class AsilLevel : std::uint8_t { QM, A, B, C, D };

/// How the residual-risk gate combines severity and controllability.
/// DISJUNCTIVE fires when either is above zero, CONJUNCTIVE only when both are.
enum class GateMode : std::uint8_t { Disjunctive, Conjunctive };

enum class AnalysisKind : std::uint8_t { Hara, Sira };

std::string_view to_string(Severity s);
std::string_view to_string(Exposure e);
std::string_view to_string(Controllability c);
std::string_view to_string(AsilLevel a);
std::string_view to_string(GateMode m);
std::string_view to_string(AnalysisKind k);

std::optional<Severity> parse_severity(std::string_view token);
std::optional<Exposure> parse_exposure(std::string_view token);
std::optional<Controllability> parse_controllability(std::string_view token);
std::optional<AsilLevel> parse_asil(std::string_view token);
/// Accepts "or"/"disjunctive" and "and"/"conjunctive", case-insensitive.
std::optional<GateMode> parse_gate_mode(std::string_view token);

/// Risk-graph lookup. Any S0 or C0 input yields QM.
AsilLevel determine_asil(Severity s, Exposure e, Controllability c) noexcept;

/// True when the hazard constitutes a residual risk requiring an RRA.
bool rra_required(Severity s, Controllability c, GateMode mode) noexcept;

struct HazardRecord {
    std::string id;
    AnalysisKind kind = AnalysisKind::Hara;
    std::string action;
    std::string hazard;
    std::string situation;
    std::string hazardous_event;
    Severity severity = Severity::S0;
    std::optional<Exposure> exposure;  // SIRA records may omit it
    Controllability controllability = Controllability::C0;
    std::string safety_goal;
    std::string safe_state;
};

/// Identifies the table cell (or S0/C0 short-circuit) that produced an ASIL.
struct RuleCell {
    Severity severity;
    Exposure exposure;
    Controllability controllability;
    bool short_circuit = false;  // S0 or C0 forced QM without a table lookup

    std::string label() const;
};

struct Verdict {
    std::string id;
    AnalysisKind kind = AnalysisKind::Hara;
    std::optional<AsilLevel> asil;  // HARA only
    std::optional<RuleCell> asil_cell;
    bool safe_state_required = false;  // HARA only; a QM goal has no safe state
    bool rra = false;                  // residual-risk gate, evaluated for every record
    GateMode gate_mode = GateMode::Disjunctive;
    std::string gate_rule;  // e.g. "S2>S0 and C2>C0"
};

/// One Verdict per record, input order preserved.
/// Throws RegistryError on duplicate ids or on a HARA record without exposure.
std::vector<Verdict> evaluate_registry(const std::vector<HazardRecord>& records, GateMode mode);

/// ASIL of a single record; RegistryError("exposure missing") if it has none.
AsilLevel record_asil(const HazardRecord& record);

// Registry file I/O: one [hazard] record per entry with keys
// id, kind, action, hazard, situation, event, S, E, C (+ optional goal, safe_state).
struct KeyedRecord;
HazardRecord parse_hazard_record(const KeyedRecord& record, const std::string& source);
std::vector<HazardRecord> parse_hazard_registry(std::string_view text, const std::string& source = {});
std::vector<HazardRecord> load_hazard_registry(const std::string& path);
std::string serialize_hazard_registry(const std::vector<HazardRecord>& records);

}  // namespace safecase
