#include "safecase/requirements.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "safecase/digest.hpp"
#include "safecase/errors.hpp"
#include "safecase/keyed_text.hpp"

namespace safecase {

namespace {

constexpr std::array<std::string_view, 6> kSourceNames{"BASELINE_SOTIF",  "SAFETY_PROPERTY",
                                                       "SAFETY_ANALYSIS", "FUNCTIONAL_INSUFFICIENCY",
                                                       "ONBOARD_MEASURE", "OFFBOARD_MEASURE"};
constexpr std::array<std::string_view, 3> kPropertyNames{"ROBUSTNESS", "RELIABILITY", "BIAS_FAIRNESS"};
constexpr std::array<std::string_view, 6> kRelationTokens{"<", "<=", ">", ">=", "=", "+-"};
constexpr std::array<std::string_view, 6> kRelationSymbols{"<", "≤", ">", "≥", "=", "±"};
constexpr std::array<std::string_view, 4> kLinkNames{"HAZARD_TO_REQ", "REQ_TO_CHECK", "REQ_TO_TARGET",
                                                     "CHECK_TO_EVIDENCE"};

template <std::size_t N>
std::optional<std::size_t> index_of(const std::array<std::string_view, N>& names, std::string_view token) {
    token = trim(token);
    for (std::size_t i = 0; i < N; ++i)
        if (names[i] == token) return i;
    return std::nullopt;
}

std::string format_quantity(const Quantity& q) {
    if (q.unit == "%") return format_double(q.value) + "%";
    if (q.unit == "1" || q.unit == "count" || q.unit == "per_10h") return format_double(q.value);
    return format_double(q.value) + " " + q.unit;
}

struct TemplateParam {
    std::string_view name;
    Relation relation;
    std::string_view unit;
};

struct PropertyTemplate {
    std::vector<TemplateParam> params;
    // Pieces interleaved with parameter renderings: text[0] p0 text[1] p1 ... text[n].
    std::vector<std::string_view> text;
};

const PropertyTemplate& template_for(SafetyProperty p) {
    static const PropertyTemplate kRobustness{
        {{"degradation", Relation::Less, "%"}, {"gps_err", Relation::PlusMinus, "m"}},
        {"The ODD detector shall sustain < ", " accuracy degradation under GPS drift of ±",
         ", moderate camera noise, and light-moderate weather conditions."}};
    static const PropertyTemplate kReliability{
        {{"accuracy", Relation::GreaterEqual, "%"}, {"max_false_per_10h", Relation::LessEqual, "per_10h"}},
        {"The ODD detector shall achieve ≥ ",
         " classification accuracy (in-ODD vs. out-of-ODD) under nominal "
         "conditions, with no more than ",
         " false classification(s) per ten hours of continuous operation."}};
    static const PropertyTemplate kFairness{
        {{"max_deviation", Relation::LessEqual, "%"}},
        {"The ODD detector shall exhibit ≤ ",
         " accuracy deviation across all ODD sub-regions and environmental contexts."}};
    switch (p) {
        case SafetyProperty::Robustness:
            return kRobustness;
        case SafetyProperty::Reliability:
            return kReliability;
        case SafetyProperty::BiasFairness:
            return kFairness;
    }
    return kRobustness;
}

bool requirement_less(const SafetyRequirement& a, const SafetyRequirement& b) { return natural_less(a.id, b.id); }

}  // namespace

std::string_view to_string(RequirementSource s) { return kSourceNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(SafetyProperty p) { return kPropertyNames[static_cast<std::size_t>(p)]; }
std::string_view to_string(Relation r) { return kRelationTokens[static_cast<std::size_t>(r)]; }
std::string_view symbol(Relation r) { return kRelationSymbols[static_cast<std::size_t>(r)]; }
std::string_view to_string(LinkKind k) { return kLinkNames[static_cast<std::size_t>(k)]; }

std::optional<RequirementSource> parse_requirement_source(std::string_view token) {
    if (auto i = index_of(kSourceNames, token)) return static_cast<RequirementSource>(*i);
    return std::nullopt;
}
std::optional<SafetyProperty> parse_safety_property(std::string_view token) {
    if (auto i = index_of(kPropertyNames, token)) return static_cast<SafetyProperty>(*i);
    return std::nullopt;
}
std::optional<Relation> parse_relation(std::string_view token) {
    if (auto i = index_of(kRelationTokens, token)) return static_cast<Relation>(*i);
    if (auto i = index_of(kRelationSymbols, token)) return static_cast<Relation>(*i);
    return std::nullopt;
}
std::optional<LinkKind> parse_link_kind(std::string_view token) {
    if (auto i = index_of(kLinkNames, token)) return static_cast<LinkKind>(*i);
    return std::nullopt;
}

std::string_view to_string(Obligation o) {
    switch (o) {
        case Obligation::HazardWithoutRequirement:
            return "HAZARD_WITHOUT_REQUIREMENT";
        case Obligation::RequirementWithoutCheck:
            return "REQUIREMENT_WITHOUT_CHECK";
        case Obligation::RequirementWithoutTarget:
            return "REQUIREMENT_WITHOUT_TARGET";
        case Obligation::CheckWithoutEvidence:
            return "CHECK_WITHOUT_EVIDENCE";
        case Obligation::CheckNotCovered:
            return "CHECK_NOT_COVERED";
        case Obligation::EvidenceDigestMismatch:
            return "EVIDENCE_DIGEST_MISMATCH";
    }
    return "?";
}

void check_requirement(const SafetyRequirement& r) {
    if (r.id.empty()) throw RegistryError("requirement with empty id");
    if (r.source == RequirementSource::SafetyProperty && !r.property)
        throw RegistryError("requirement '" + r.id + "': SAFETY_PROPERTY source requires a property tag");
    for (const auto& [name, p] : r.parameters)
        if (p.quantity.unit.empty())
            throw RegistryError("requirement '" + r.id + "': parameter '" + name + "' has no unit");
}

// RequirementRegistry ---------------------------------------------------------

RequirementRegistry::RequirementRegistry(std::vector<SafetyRequirement> records) {
    std::stable_sort(records.begin(), records.end(), requirement_less);
    for (auto& r : records) {
        check_requirement(r);
        if (!records_.empty() && records_.back().id == r.id) {
            if (records_.back() != r)
                throw ConsolidationError("requirement '" + r.id + "' appears twice with conflicting content");
            continue;
        }
        records_.push_back(std::move(r));
    }
}

const SafetyRequirement* RequirementRegistry::find(std::string_view id) const {
    auto it =
        std::lower_bound(records_.begin(), records_.end(), id,
                         [](const SafetyRequirement& r, std::string_view key) { return natural_less(r.id, key); });
    return it != records_.end() && it->id == id ? &*it : nullptr;
}

void RequirementRegistry::remove(std::string_view id) {
    std::erase_if(records_, [&](const SafetyRequirement& r) { return r.id == id; });
}

RequirementRegistry consolidate(const SafetyRequirement& baseline, const std::vector<SafetyRequirement>& derived) {
    if (baseline.source != RequirementSource::BaselineSotif)
        throw ConsolidationError("baseline '" + baseline.id + "' must have source BASELINE_SOTIF");
    std::vector<SafetyRequirement> all;
    all.reserve(derived.size() + 1);
    all.push_back(baseline);
    all.insert(all.end(), derived.begin(), derived.end());
    return RequirementRegistry(std::move(all));
}

std::vector<std::string> template_parameters(SafetyProperty property) {
    std::vector<std::string> out;
    for (const auto& p : template_for(property).params)
        out.emplace_back(p.name);
    return out;
}

SafetyRequirement derive_from_property(const SafetyRequirement& baseline, SafetyProperty property,
                                       const std::map<std::string, Quantity>& template_params, std::string id) {
    if (baseline.source != RequirementSource::BaselineSotif)
        throw DerivationError("derivation base '" + baseline.id + "' is not a BASELINE_SOTIF requirement");
    const auto& tpl = template_for(property);

    std::vector<std::string> missing;
    for (const auto& p : tpl.params)
        if (!template_params.count(std::string(p.name))) missing.emplace_back(p.name);
    if (!missing.empty()) {
        std::string msg = std::string(to_string(property)) + " template is missing parameter(s):";
        for (const auto& m : missing)
            msg += " " + m;
        throw DerivationError(msg);
    }
    for (const auto& [name, q] : template_params) {
        auto known = std::any_of(tpl.params.begin(), tpl.params.end(), [&](const auto& p) { return p.name == name; });
        if (!known)
            throw DerivationError(std::string(to_string(property)) + " template has no parameter '" + name + "'");
    }

    SafetyRequirement r;
    r.id = std::move(id);
    r.source = RequirementSource::SafetyProperty;
    r.property = property;
    r.text = std::string(tpl.text[0]);
    for (std::size_t i = 0; i < tpl.params.size(); ++i) {
        const auto& spec = tpl.params[i];
        Quantity q = template_params.at(std::string(spec.name));
        if (q.unit != spec.unit) {
            if (spec.unit == "%" && q.unit == "1") {
                q = {q.value * 100.0, "%"};
            } else if (spec.unit == "per_10h" && q.unit == "1") {
                q.unit = "per_10h";
            } else {
                throw DerivationError("parameter '" + std::string(spec.name) + "' expects unit '" +
                                      std::string(spec.unit) + "', got '" + q.unit + "'");
            }
        }
        r.text += format_quantity(q);
        r.text += tpl.text[i + 1];
        r.parameters.emplace(std::string(spec.name), Parameter{spec.relation, std::move(q)});
    }
    check_requirement(r);
    return r;
}

// Trace graph -----------------------------------------------------------------

namespace {

template <typename T, typename Key>
std::unordered_map<std::string, const T*> index_unique(const std::vector<T>& items, Key key, std::string_view what) {
    std::unordered_map<std::string, const T*> out;
    for (const auto& item : items)
        if (!out.emplace(key(item), &item).second)
            throw GraphIntegrityError("duplicate " + std::string(what) + " id '" + key(item) + "'");
    return out;
}

}  // namespace

void check_integrity(const TraceGraph& g) {
    auto hazards = index_unique(g.hazards, [](const HazardRecord& h) { return h.id; }, "hazard");
    auto checks = index_unique(g.checks, [](const MonitorCheck& c) { return c.id; }, "check");
    auto targets = index_unique(g.targets, [](const ValidationTarget& t) { return t.scenario_class; }, "target");
    auto evidence = index_unique(g.evidence, [](const EvidenceRecord& e) { return e.id; }, "evidence");

    for (const auto& c : g.checks)
        if (!c.hazard.empty() && !hazards.count(c.hazard))
            throw GraphIntegrityError("check '" + c.id + "' guards unknown hazard '" + c.hazard + "'");

    auto require = [](bool ok, const TraceLink& l, std::string_view end, const std::string& id) {
        if (!ok)
            throw GraphIntegrityError("dangling " + std::string(to_string(l.kind)) + " link " + l.from + " -> " + l.to +
                                      ": unknown " + std::string(end) + " '" + id + "'");
    };
    for (const auto& l : g.links) {
        if (l.from == l.to) throw GraphIntegrityError("self-link on '" + l.from + "'");
        switch (l.kind) {
            case LinkKind::HazardToReq:
                require(hazards.count(l.from) > 0, l, "hazard", l.from);
                require(g.requirements.contains(l.to), l, "requirement", l.to);
                break;
            case LinkKind::ReqToCheck:
                require(g.requirements.contains(l.from), l, "requirement", l.from);
                require(checks.count(l.to) > 0, l, "check", l.to);
                break;
            case LinkKind::ReqToTarget:
                require(g.requirements.contains(l.from), l, "requirement", l.from);
                require(targets.count(l.to) > 0, l, "target", l.to);
                break;
            case LinkKind::CheckToEvidence:
                require(checks.count(l.from) > 0, l, "check", l.from);
                require(evidence.count(l.to) > 0, l, "evidence", l.to);
                break;
        }
    }
}

std::vector<ClosureFinding> trace_check(const TraceGraph& g, GateMode gate_mode) {
    check_integrity(g);

    std::unordered_map<std::string, std::set<std::string>> out_links[4];
    for (const auto& l : g.links)
        out_links[static_cast<std::size_t>(l.kind)][l.from].insert(l.to);
    auto has_out = [&](LinkKind k, const std::string& from) {
        const auto& m = out_links[static_cast<std::size_t>(k)];
        auto it = m.find(from);
        return it != m.end() && !it->second.empty();
    };

    std::vector<ClosureFinding> out;
    std::unordered_map<std::string, bool> rra;
    for (const auto& h : g.hazards) {
        rra[h.id] = rra_required(h.severity, h.controllability, gate_mode);
        if (rra[h.id] && !has_out(LinkKind::HazardToReq, h.id))
            out.push_back({Obligation::HazardWithoutRequirement, h.id,
                           "hazard " + h.id + " requires residual-risk treatment but traces to no requirement"});
    }
    for (const auto& r : g.requirements.records()) {
        if (!has_out(LinkKind::ReqToCheck, r.id))
            out.push_back({Obligation::RequirementWithoutCheck, r.id,
                           "requirement " + r.id + " is not implemented by any monitor check"});
        if (!has_out(LinkKind::ReqToTarget, r.id))
            out.push_back({Obligation::RequirementWithoutTarget, r.id,
                           "requirement " + r.id + " is not allocated to any validation target"});
    }
    for (const auto& c : g.checks) {
        if (!has_out(LinkKind::CheckToEvidence, c.id))
            out.push_back({Obligation::CheckWithoutEvidence, c.id, "check " + c.id + " has no evidence record"});
        if (c.hazard.empty() || !rra[c.hazard]) continue;
        bool covered = false;
        const auto& hazard_reqs = out_links[static_cast<std::size_t>(LinkKind::HazardToReq)];
        if (auto it = hazard_reqs.find(c.hazard); it != hazard_reqs.end()) {
            const auto& req_checks = out_links[static_cast<std::size_t>(LinkKind::ReqToCheck)];
            for (const auto& req : it->second) {
                auto rc = req_checks.find(req);
                if (rc != req_checks.end() && rc->second.count(c.id)) {
                    covered = true;
                    break;
                }
            }
        }
        if (!covered)
            out.push_back({Obligation::CheckNotCovered, c.id,
                           "hazard " + c.hazard + " has no requirement covering check " + c.id});
    }
    return out;
}

TraceGraph remove_requirement(TraceGraph graph, std::string_view id) {
    graph.requirements.remove(id);
    std::erase_if(graph.links, [&](const TraceLink& l) {
        switch (l.kind) {
            case LinkKind::HazardToReq:
                return l.to == id;
            case LinkKind::ReqToCheck:
            case LinkKind::ReqToTarget:
                return l.from == id;
            case LinkKind::CheckToEvidence:
                return false;
        }
        return false;
    });
    return graph;
}

std::vector<ClosureFinding> verify_evidence(const TraceGraph& graph, const std::string& run_dir) {
    std::vector<ClosureFinding> out;
    for (const auto& e : graph.evidence) {
        auto path = (std::filesystem::path(run_dir) / (e.run + ".csv")).string();
        if (!std::filesystem::exists(path)) {
            out.push_back(
                {Obligation::EvidenceDigestMismatch, e.id, "evidence " + e.id + ": run record " + path + " not found"});
            continue;
        }
        auto actual = digest_hex(read_file(path));
        if (actual != e.digest)
            out.push_back(
                {Obligation::EvidenceDigestMismatch, e.id,
                 "evidence " + e.id + ": digest " + actual + " of " + path + " differs from recorded " + e.digest});
    }
    return out;
}

// File formats ----------------------------------------------------------------

std::string format_parameter(const std::string& name, const Parameter& p) {
    return name + " " + std::string(to_string(p.relation)) + " " + format_double(p.quantity.value) + " " +
           p.quantity.unit;
}

std::string display_parameter(const Parameter& p) {
    return std::string(symbol(p.relation)) + " " + format_quantity(p.quantity);
}

SafetyRequirement parse_requirement_record(const KeyedRecord& rec, const std::string& source) {
    SafetyRequirement r;
    r.id = rec.require("id", source).value;
    r.text = rec.require("text", source).value;
    const auto& src = rec.require("source", source);
    auto s = parse_requirement_source(src.value);
    if (!s) throw ParseError(source, src.line, "unknown requirement source '" + src.value + "'");
    r.source = *s;
    if (const auto* prop = rec.find("property")) {
        auto p = parse_safety_property(prop->value);
        if (!p) throw ParseError(source, prop->line, "unknown safety property '" + prop->value + "'");
        r.property = *p;
    }
    for (const auto* f : rec.find_all("param")) {
        std::vector<std::string> parts;
        for (auto& w : split(f->value, ' '))
            if (!w.empty()) parts.push_back(std::move(w));
        if (parts.size() != 4)
            throw ParseError(source, f->line, "parameter must read 'name relation value unit', got '" + f->value + "'");
        auto rel = parse_relation(parts[1]);
        if (!rel) throw ParseError(source, f->line, "unknown relation '" + parts[1] + "'");
        Parameter p{*rel, {parse_double(parts[2], source, f->line), parts[3]}};
        if (!r.parameters.emplace(parts[0], std::move(p)).second)
            throw ParseError(source, f->line, "duplicate parameter '" + parts[0] + "'");
    }
    for (const auto& f : rec.fields)
        if (f.key != "id" && f.key != "text" && f.key != "source" && f.key != "property" && f.key != "param")
            throw ParseError(source, f.line, "unknown requirement field '" + f.key + "'");
    try {
        check_requirement(r);
    } catch (const RegistryError& e) {
        throw ParseError(source, rec.line, e.what());
    }
    return r;
}

std::vector<SafetyRequirement> parse_requirements(std::string_view text, const std::string& source) {
    std::vector<SafetyRequirement> out;
    for (const auto& rec : parse_keyed(text, source).records) {
        if (rec.section != "requirement")
            throw ParseError(source, rec.line, "unexpected section [" + rec.section + "] in requirement registry");
        out.push_back(parse_requirement_record(rec, source));
    }
    return out;
}

std::vector<SafetyRequirement> load_requirements(const std::string& path) {
    return parse_requirements(read_file(path), path);
}

namespace {

void write_requirement(KeyedWriter& w, const SafetyRequirement& r) {
    w.section("requirement");
    w.field("id", r.id);
    w.field("source", to_string(r.source));
    if (r.property) w.field("property", to_string(*r.property));
    w.field("text", r.text);
    for (const auto& [name, p] : r.parameters)
        w.field("param", format_parameter(name, p));
}

}  // namespace

std::string serialize_requirements(const RequirementRegistry& registry) {
    KeyedWriter w;
    for (const auto& r : registry.records())
        write_requirement(w, r);
    return w.str();
}

TraceGraph parse_trace_graph(const std::vector<std::pair<std::string, std::string>>& sources_and_texts) {
    TraceGraph g;
    std::vector<SafetyRequirement> reqs;
    for (const auto& [source, text] : sources_and_texts) {
        for (const auto& rec : parse_keyed(text, source).records) {
            if (rec.section == "hazard") {
                g.hazards.push_back(parse_hazard_record(rec, source));
            } else if (rec.section == "requirement") {
                reqs.push_back(parse_requirement_record(rec, source));
            } else if (rec.section == "check") {
                MonitorCheck c;
                c.id = rec.require("id", source).value;
                if (const auto* h = rec.find("hazard")) c.hazard = h->value;
                if (const auto* d = rec.find("description")) c.description = d->value;
                g.checks.push_back(std::move(c));
            } else if (rec.section == "target") {
                ValidationTarget t;
                t.scenario_class = rec.require("scenario_class", source).value;
                const auto& rate = rec.require("max_event_rate", source);
                t.max_event_rate = parse_double(rate.value, source, rate.line);
                if (const auto* c = rec.find("confidence_level"))
                    t.confidence_level = parse_double(c->value, source, c->line);
                g.targets.push_back(std::move(t));
            } else if (rec.section == "evidence") {
                g.evidence.push_back({rec.require("id", source).value, rec.require("run", source).value,
                                      rec.require("digest", source).value});
            } else if (rec.section == "link") {
                const auto& kind = rec.require("kind", source);
                auto k = parse_link_kind(kind.value);
                if (!k) throw ParseError(source, kind.line, "unknown link kind '" + kind.value + "'");
                g.links.push_back({rec.require("from", source).value, rec.require("to", source).value, *k});
            } else {
                throw ParseError(source, rec.line, "unexpected section [" + rec.section + "] in trace graph");
            }
        }
    }
    try {
        g.requirements = RequirementRegistry(std::move(reqs));
    } catch (const ConsolidationError& e) {
        throw GraphIntegrityError(e.what());
    }
    return g;
}

TraceGraph load_trace_graph(const std::vector<std::string>& paths) {
    std::vector<std::pair<std::string, std::string>> docs;
    for (const auto& p : paths)
        docs.emplace_back(p, read_file(p));
    return parse_trace_graph(docs);
}

std::string serialize_trace_graph(const TraceGraph& graph) {
    auto by_id = [](const auto& a, const auto& b) { return natural_less(a.id, b.id); };
    auto hazards = graph.hazards;
    std::sort(hazards.begin(), hazards.end(), by_id);
    auto checks = graph.checks;
    std::sort(checks.begin(), checks.end(), by_id);
    auto evidence = graph.evidence;
    std::sort(evidence.begin(), evidence.end(), by_id);
    auto targets = graph.targets;
    std::sort(targets.begin(), targets.end(),
              [](const auto& a, const auto& b) { return natural_less(a.scenario_class, b.scenario_class); });
    auto links = graph.links;
    std::sort(links.begin(), links.end());

    std::string out = serialize_hazard_registry(hazards);
    KeyedWriter w;
    for (const auto& r : graph.requirements.records())
        write_requirement(w, r);
    for (const auto& c : checks) {
        w.section("check");
        w.field("id", c.id);
        if (!c.hazard.empty()) w.field("hazard", c.hazard);
        if (!c.description.empty()) w.field("description", c.description);
    }
    if (!out.empty() && !w.str().empty()) out += '\n';
    out += w.str();
    if (!targets.empty()) out += '\n' + serialize_targets(targets);
    KeyedWriter tail;
    for (const auto& e : evidence) {
        tail.section("evidence");
        tail.field("id", e.id);
        tail.field("run", e.run);
        tail.field("digest", e.digest);
    }
    for (const auto& l : links) {
        tail.section("link");
        tail.field("kind", to_string(l.kind));
        tail.field("from", l.from);
        tail.field("to", l.to);
    }
    if (!tail.str().empty()) out += '\n' + tail.str();
    return out;
}

std::string serialize_findings(const std::vector<ClosureFinding>& findings) {
    KeyedWriter w;
    for (const auto& f : findings) {
        w.section("finding");
        w.field("obligation", to_string(f.obligation));
        w.field("subject", f.subject);
        w.field("message", f.message);
    }
    return w.str();
}

std::string summarize_findings(const std::vector<ClosureFinding>& findings) {
    if (findings.empty()) return "closure: OK (0 findings)\n";
    std::string out = "closure: " + std::to_string(findings.size()) + " finding(s)\n";
    for (const auto& f : findings)
        out += "  - " + f.message + "\n";
    return out;
}

}  // namespace safecase
