#pragma once

// Cause Tree Analysis: AND/OR decomposition of a hazard into leaf triggering
// conditions, minimal cut sets, and apportionment of a global acceptance
// criterion into per-scenario-class validation targets.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace safecase {

enum class Gate : std::uint8_t { And, Or, Leaf };

std::string_view to_string(Gate g);
std::optional<Gate> parse_gate(std::string_view token);

struct CtaNode {
    std::string id;
    std::string label;
    Gate gate = Gate::Leaf;
    std::vector<std::string> children;
    std::optional<std::string> scenario_class;  // leaves only
    std::optional<double> exposure_share;       // leaves only, in [0,1]
};

struct CauseTree {
    std::string root;
    std::map<std::string, CtaNode> nodes;

    const CtaNode& node(const std::string& id) const;
    /// Leaf ids reachable from the root, in depth-first order.
    std::vector<std::string> leaves() const;
};

enum class FindingKind : std::uint8_t {
    MissingRoot,
    DanglingChild,
    MultipleParents,
    DuplicateChild,
    Cycle,
    Unreachable,
    LeafWithChildren,
    GateWithoutChildren,
    MissingScenarioClass,
    ClassOnGate,
    ShareOnGate,
    ShareOutOfRange,
};

std::string_view to_string(FindingKind k);

struct StructuralFinding {
    std::string node_id;
    FindingKind kind;
    std::string message;

    bool operator==(const StructuralFinding&) const = default;
};

/// Empty iff every structural invariant holds.
std::vector<StructuralFinding> validate(const CauseTree& tree);

using CutSet = std::set<std::string>;
using CutSets = std::set<CutSet>;

/// Minimal cut sets by top-down gate expansion with subset minimisation.
/// Throws StructuralError listing findings if the tree is invalid.
CutSets minimal_cut_sets(const CauseTree& tree);

struct ValidationTarget {
    std::string scenario_class;
    double max_event_rate = 0.0;  // events per km
    double confidence_level = 0.95;

    bool operator==(const ValidationTarget&) const = default;
};

/// One target per distinct scenario class, sorted by class; each class receives
/// `criterion` times the summed exposure share of its leaves.
std::vector<ValidationTarget> allocate_targets(const CauseTree& tree, double criterion, double confidence);

struct CoverageReport {
    std::vector<std::string> uncovered;  // leaf classes without a library scenario
    std::vector<std::string> unused;     // library classes no leaf refers to

    bool empty() const noexcept { return uncovered.empty() && unused.empty(); }
};

CoverageReport coverage_report(const CauseTree& tree, const std::set<std::string>& scenario_classes);

// Tree file: one node per line, children indented under their parent.
//   <indent>ID GATE "label" [class=CLASS] [share=FRACTION]
CauseTree parse_cause_tree(std::string_view text, const std::string& source = {});
CauseTree load_cause_tree(const std::string& path);
std::string serialize_cause_tree(const CauseTree& tree);

// Target file: [target] records with scenario_class, max_event_rate, confidence_level.
std::string serialize_targets(const std::vector<ValidationTarget>& targets);
std::vector<ValidationTarget> parse_targets(std::string_view text, const std::string& source = {});
std::vector<ValidationTarget> load_targets(const std::string& path);

}  // namespace safecase
