#pragma once

// Derived AI-safety requirements and the traceability graph used for closure
// checking (hazard -> requirement -> {monitor check, validation target} -> evidence).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "safecase/cause_tree.hpp"
#include "safecase/risk_model.hpp"

namespace safecase {

struct KeyedRecord;

enum class RequirementSource : std::uint8_t {
    BaselineSotif,
    SafetyProperty,
    SafetyAnalysis,
    FunctionalInsufficiency,
    OnboardMeasure,
    OffboardMeasure,
};

enum class SafetyProperty : std::uint8_t { Robustness, Reliability, BiasFairness };

enum class Relation : std::uint8_t { Less, LessEqual, Greater, GreaterEqual, Equal, PlusMinus };

std::string_view to_string(RequirementSource s);
std::string_view to_string(SafetyProperty p);
/// File token: "<", "<=", ">", ">=", "=", "+-".
std::string_view to_string(Relation r);
/// Display symbol: "<", "≤", ">", "≥", "=", "±".
std::string_view symbol(Relation r);
std::optional<RequirementSource> parse_requirement_source(std::string_view token);
std::optional<SafetyProperty> parse_safety_property(std::string_view token);
std::optional<Relation> parse_relation(std::string_view token);

struct Quantity {
    double value = 0.0;
    std::string unit;  // "1" for dimensionless

    bool operator==(const Quantity&) const = default;
};

struct Parameter {
    Relation relation = Relation::Equal;
    Quantity quantity;

    bool operator==(const Parameter&) const = default;
};

struct SafetyRequirement {
    std::string id;
    std::string text;
    RequirementSource source = RequirementSource::BaselineSotif;
    std::optional<SafetyProperty> property;
    std::map<std::string, Parameter> parameters;

    bool operator==(const SafetyRequirement&) const = default;
};

/// Requirements deduplicated by id and kept in natural id order.
class RequirementRegistry {
public:
    RequirementRegistry() = default;
    /// Throws ConsolidationError on conflicting duplicates, RegistryError on invalid records.
    explicit RequirementRegistry(std::vector<SafetyRequirement> records);

    const std::vector<SafetyRequirement>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const SafetyRequirement* find(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id) != nullptr; }
    void remove(std::string_view id);

    bool operator==(const RequirementRegistry&) const = default;

private:
    std::vector<SafetyRequirement> records_;
};

/// Throws RegistryError if a record breaks its own invariants
/// (SAFETY_PROPERTY without a property tag, parameter without a unit, empty id).
void check_requirement(const SafetyRequirement& r);

/// Baseline plus derived records, deduplicated by id, ordered by id.
RequirementRegistry consolidate(const SafetyRequirement& baseline, const std::vector<SafetyRequirement>& derived);

/// Instantiates the fixed normative template for `property`.
/// Throws DerivationError listing missing (or unexpected) parameter names.
SafetyRequirement derive_from_property(const SafetyRequirement& baseline, SafetyProperty property,
                                       const std::map<std::string, Quantity>& template_params, std::string id);

/// Names the template for `property` requires.
std::vector<std::string> template_parameters(SafetyProperty property);

// Trace graph ---------------------------------------------------------------

struct MonitorCheck {
    std::string id;
    std::string hazard;  // hazard the check guards against; may be empty
    std::string description;

    bool operator==(const MonitorCheck&) const = default;
};

/// A simulator run backing a check, with the digest of its run-record file.
struct EvidenceRecord {
    std::string id;
    std::string run;
    std::string digest;

    bool operator==(const EvidenceRecord&) const = default;
};

enum class LinkKind : std::uint8_t { HazardToReq, ReqToCheck, ReqToTarget, CheckToEvidence };

std::string_view to_string(LinkKind k);
std::optional<LinkKind> parse_link_kind(std::string_view token);

struct TraceLink {
    std::string from;
    std::string to;
    LinkKind kind = LinkKind::HazardToReq;

    auto operator<=>(const TraceLink&) const = default;
};

struct TraceGraph {
    std::vector<HazardRecord> hazards;
    RequirementRegistry requirements;
    std::vector<MonitorCheck> checks;
    std::vector<ValidationTarget> targets;  // keyed by scenario_class
    std::vector<EvidenceRecord> evidence;
    std::vector<TraceLink> links;
};

enum class Obligation : std::uint8_t {
    HazardWithoutRequirement,
    RequirementWithoutCheck,
    RequirementWithoutTarget,
    CheckWithoutEvidence,
    CheckNotCovered,
    EvidenceDigestMismatch,
};

std::string_view to_string(Obligation o);

struct ClosureFinding {
    Obligation obligation;
    std::string subject;  // the orphan
    std::string message;

    bool operator==(const ClosureFinding&) const = default;
};

/// Throws GraphIntegrityError on duplicate ids, self-links or dangling endpoints.
void check_integrity(const TraceGraph& graph);

/// Empty iff every closure obligation holds. Obligations:
///  - each hazard whose residual-risk gate fires links to a requirement;
///  - each requirement links to a monitor check and a validation target;
///  - each check links to evidence;
///  - each check guarding an RRA hazard is covered by a requirement of that hazard.
std::vector<ClosureFinding> trace_check(const TraceGraph& graph, GateMode gate_mode);

/// Drops a requirement and every link touching it.
TraceGraph remove_requirement(TraceGraph graph, std::string_view id);

/// Re-verifies evidence digests against run-record files `<dir>/<run>.csv`.
/// Missing or mismatching files are reported as EvidenceDigestMismatch.
std::vector<ClosureFinding> verify_evidence(const TraceGraph& graph, const std::string& run_dir);

// File formats --------------------------------------------------------------

SafetyRequirement parse_requirement_record(const KeyedRecord& record, const std::string& source);
std::vector<SafetyRequirement> parse_requirements(std::string_view text, const std::string& source = {});
std::vector<SafetyRequirement> load_requirements(const std::string& path);
std::string serialize_requirements(const RequirementRegistry& registry);
/// "name rel value unit", e.g. "latency <= 100 ms".
std::string format_parameter(const std::string& name, const Parameter& p);
/// Human form, e.g. "≤ 100 ms".
std::string display_parameter(const Parameter& p);

/// Merges [hazard], [requirement], [check], [target], [evidence] and [link]
/// sections from any number of keyed documents.
TraceGraph parse_trace_graph(const std::vector<std::pair<std::string, std::string>>& sources_and_texts);
TraceGraph load_trace_graph(const std::vector<std::string>& paths);
/// Stable, sorted rendering of the whole graph.
std::string serialize_trace_graph(const TraceGraph& graph);

std::string serialize_findings(const std::vector<ClosureFinding>& findings);
std::string summarize_findings(const std::vector<ClosureFinding>& findings);

}  // namespace safecase
