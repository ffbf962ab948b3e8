#include "safecase/cause_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "safecase/errors.hpp"
#include "safecase/keyed_text.hpp"

namespace safecase {

std::string_view to_string(Gate g) {
    switch (g) {
        case Gate::And:
            return "AND";
        case Gate::Or:
            return "OR";
        case Gate::Leaf:
            return "LEAF";
    }
    return "?";
}

std::optional<Gate> parse_gate(std::string_view token) {
    if (token == "AND") return Gate::And;
    if (token == "OR") return Gate::Or;
    if (token == "LEAF") return Gate::Leaf;
    return std::nullopt;
}

std::string_view to_string(FindingKind k) {
    switch (k) {
        case FindingKind::MissingRoot:
            return "missing root";
        case FindingKind::DanglingChild:
            return "dangling child";
        case FindingKind::MultipleParents:
            return "multiple parents";
        case FindingKind::DuplicateChild:
            return "duplicate child";
        case FindingKind::Cycle:
            return "cycle";
        case FindingKind::Unreachable:
            return "unreachable node";
        case FindingKind::LeafWithChildren:
            return "leaf with children";
        case FindingKind::GateWithoutChildren:
            return "gate without children";
        case FindingKind::MissingScenarioClass:
            return "missing scenario class";
        case FindingKind::ClassOnGate:
            return "scenario class on gate";
        case FindingKind::ShareOnGate:
            return "exposure share on gate";
        case FindingKind::ShareOutOfRange:
            return "exposure share out of range";
    }
    return "?";
}

const CtaNode& CauseTree::node(const std::string& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw StructuralError("unknown cause-tree node '" + id + "'");
    return it->second;
}

std::vector<std::string> CauseTree::leaves() const {
    std::vector<std::string> out;
    std::set<std::string> visited;
    std::function<void(const std::string&)> walk = [&](const std::string& id) {
        auto it = nodes.find(id);
        if (it == nodes.end() || !visited.insert(id).second) return;
        if (it->second.gate == Gate::Leaf) out.push_back(id);
        for (const auto& c : it->second.children)
            walk(c);
    };
    walk(root);
    return out;
}

std::vector<StructuralFinding> validate(const CauseTree& tree) {
    std::vector<StructuralFinding> out;
    auto add = [&](const std::string& id, FindingKind k, std::string msg) {
        out.push_back({id, k, "node '" + id + "': " + std::move(msg)});
    };

    // Per-node local invariants.
    std::map<std::string, int> parent_count;
    for (const auto& [id, n] : tree.nodes) {
        std::set<std::string> seen_children;
        for (const auto& c : n.children) {
            if (!seen_children.insert(c).second) {
                add(id, FindingKind::DuplicateChild, "lists child '" + c + "' more than once");
                continue;
            }
            if (!tree.nodes.count(c))
                add(id, FindingKind::DanglingChild, "references missing child '" + c + "'");
            else
                ++parent_count[c];
        }
        if (n.gate == Gate::Leaf) {
            if (!n.children.empty()) add(id, FindingKind::LeafWithChildren, "LEAF node has children");
            if (!n.scenario_class) add(id, FindingKind::MissingScenarioClass, "LEAF node has no scenario class");
            if (n.exposure_share && !(*n.exposure_share >= 0.0 && *n.exposure_share <= 1.0))
                add(id, FindingKind::ShareOutOfRange, "exposure share outside [0,1]");
        } else {
            if (n.children.empty()) add(id, FindingKind::GateWithoutChildren, "gate has no children");
            if (n.scenario_class) add(id, FindingKind::ClassOnGate, "gate carries a scenario class");
            if (n.exposure_share) add(id, FindingKind::ShareOnGate, "gate carries an exposure share");
        }
    }
    for (const auto& [id, count] : parent_count)
        if (count > 1) add(id, FindingKind::MultipleParents, "has " + std::to_string(count) + " parents");

    if (!tree.nodes.count(tree.root)) {
        out.push_back({tree.root, FindingKind::MissingRoot, "root '" + tree.root + "' is not a node of the tree"});
        return out;
    }
    if (parent_count.count(tree.root)) add(tree.root, FindingKind::Cycle, "root is referenced as a child");

    // Reachability and cycles, iterative DFS with colouring.
    enum Colour : std::uint8_t { White, Grey, Black };
    std::unordered_map<std::string, Colour> colour;
    std::vector<std::pair<const CtaNode*, std::size_t>> stack{{&tree.nodes.at(tree.root), 0}};
    colour[tree.root] = Grey;
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next == n->children.size()) {
            colour[n->id] = Black;
            stack.pop_back();
            continue;
        }
        const auto& child = n->children[next++];
        auto it = tree.nodes.find(child);
        if (it == tree.nodes.end()) continue;
        auto& c = colour[child];
        if (c == Grey) {
            if (child != tree.root) add(child, FindingKind::Cycle, "lies on a cycle");
        } else if (c == White) {
            c = Grey;
            stack.emplace_back(&it->second, 0);
        }
    }
    for (const auto& [id, n] : tree.nodes)
        if (colour[id] == White) add(id, FindingKind::Unreachable, "is not reachable from root '" + tree.root + "'");
    return out;
}

namespace {

[[noreturn]] void throw_findings(const std::vector<StructuralFinding>& findings) {
    std::string msg = "invalid cause tree:";
    for (const auto& f : findings)
        msg += "\n  " + f.message;
    throw StructuralError(msg);
}

void require_valid(const CauseTree& tree) {
    auto findings = validate(tree);
    if (!findings.empty()) throw_findings(findings);
}

// Cut sets as sorted vectors of leaf indices.
using IndexSet = std::vector<std::uint32_t>;

void minimise(std::vector<IndexSet>& sets) {
    std::sort(sets.begin(), sets.end(),
              [](const IndexSet& a, const IndexSet& b) { return a.size() != b.size() ? a.size() < b.size() : a < b; });
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    std::vector<IndexSet> kept;
    for (auto& s : sets) {
        bool dominated = false;
        for (const auto& k : kept) {
            if (k.size() < s.size() && std::includes(s.begin(), s.end(), k.begin(), k.end())) {
                dominated = true;
                break;
            }
        }
        if (!dominated) kept.push_back(std::move(s));
    }
    sets = std::move(kept);
}

}  // namespace

CutSets minimal_cut_sets(const CauseTree& tree) {
    require_valid(tree);
    std::unordered_map<std::string, std::uint32_t> index;
    std::vector<std::string> names;
    for (const auto& leaf : tree.leaves()) {
        index.emplace(leaf, static_cast<std::uint32_t>(names.size()));
        names.push_back(leaf);
    }

    std::function<std::vector<IndexSet>(const CtaNode&)> expand = [&](const CtaNode& n) -> std::vector<IndexSet> {
        if (n.gate == Gate::Leaf) return {{index.at(n.id)}};
        std::vector<IndexSet> acc;
        bool first = true;
        for (const auto& cid : n.children) {
            auto child = expand(tree.nodes.at(cid));
            if (n.gate == Gate::Or) {
                acc.insert(acc.end(), std::make_move_iterator(child.begin()), std::make_move_iterator(child.end()));
            } else if (first) {
                acc = std::move(child);
            } else {
                std::vector<IndexSet> product;
                product.reserve(acc.size() * child.size());
                for (const auto& a : acc) {
                    for (const auto& b : child) {
                        IndexSet merged;
                        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
                        product.push_back(std::move(merged));
                    }
                }
                acc = std::move(product);
            }
            first = false;
            minimise(acc);
        }
        return acc;
    };

    CutSets out;
    for (const auto& s : expand(tree.nodes.at(tree.root))) {
        CutSet named;
        for (auto i : s)
            named.insert(names[i]);
        out.insert(std::move(named));
    }
    return out;
}

std::vector<ValidationTarget> allocate_targets(const CauseTree& tree, double criterion, double confidence) {
    require_valid(tree);
    if (!(criterion >= 0.0) || !std::isfinite(criterion))
        throw AllocationError("acceptance criterion must be a nonnegative rate, got " + format_double(criterion));
    if (!(confidence > 0.0 && confidence < 1.0))
        throw AllocationError("confidence level must lie in (0,1), got " + format_double(confidence));

    std::map<std::string, double> by_class;
    double total = 0.0;
    for (const auto& id : tree.leaves()) {
        const auto& leaf = tree.nodes.at(id);
        if (!leaf.exposure_share) throw AllocationError("leaf '" + id + "' has no exposure share");
        by_class[*leaf.scenario_class] += *leaf.exposure_share;
        total += *leaf.exposure_share;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw AllocationError("leaf exposure shares sum to " + format_short(total) + ", expected 1");

    std::vector<ValidationTarget> out;
    out.reserve(by_class.size());
    for (const auto& [cls, share] : by_class)
        out.push_back({cls, criterion * share, confidence});
    return out;
}

CoverageReport coverage_report(const CauseTree& tree, const std::set<std::string>& scenario_classes) {
    require_valid(tree);
    std::set<std::string> leaf_classes;
    for (const auto& id : tree.leaves())
        leaf_classes.insert(*tree.nodes.at(id).scenario_class);
    CoverageReport r;
    std::set_difference(leaf_classes.begin(), leaf_classes.end(), scenario_classes.begin(), scenario_classes.end(),
                        std::back_inserter(r.uncovered));
    std::set_difference(scenario_classes.begin(), scenario_classes.end(), leaf_classes.begin(), leaf_classes.end(),
                        std::back_inserter(r.unused));
    return r;
}

// ---------------------------------------------------------------------------
// Tree file

namespace {

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

struct LineCursor {
    std::string_view rest;
    const std::string& source;
    std::size_t line;

    void skip_ws() {
        while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t'))
            rest.remove_prefix(1);
    }

    std::string word() {
        skip_ws();
        std::size_t n = 0;
        while (n < rest.size() && rest[n] != ' ' && rest[n] != '\t')
            ++n;
        std::string w(rest.substr(0, n));
        rest.remove_prefix(n);
        return w;
    }

    std::string quoted() {
        skip_ws();
        if (rest.empty() || rest.front() != '"') throw ParseError(source, line, "expected a quoted label");
        rest.remove_prefix(1);
        std::string out;
        while (true) {
            if (rest.empty()) throw ParseError(source, line, "unterminated label");
            char c = rest.front();
            rest.remove_prefix(1);
            if (c == '"') break;
            if (c == '\\') {
                if (rest.empty()) throw ParseError(source, line, "dangling escape in label");
                c = rest.front();
                rest.remove_prefix(1);
            }
            out += c;
        }
        return out;
    }
};

}  // namespace

CauseTree parse_cause_tree(std::string_view text, const std::string& source) {
    CauseTree tree;
    // (indent width, node id) of the open ancestors.
    std::vector<std::pair<std::size_t, std::string>> ancestors;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::size_t indent = 0;
        while (indent < line.size() && (line[indent] == ' ' || line[indent] == '\t'))
            ++indent;

        LineCursor cur{line.substr(indent), source, line_no};
        CtaNode n;
        n.id = cur.word();
        auto gate_tok = cur.word();
        auto gate = parse_gate(gate_tok);
        if (!gate) throw ParseError(source, line_no, "unknown gate '" + gate_tok + "' (expected AND, OR or LEAF)");
        n.gate = *gate;
        n.label = cur.quoted();
        while (true) {
            auto attr = cur.word();
            if (attr.empty()) break;
            auto eq = attr.find('=');
            if (eq == std::string::npos) throw ParseError(source, line_no, "expected key=value, got '" + attr + "'");
            auto key = attr.substr(0, eq);
            auto value = attr.substr(eq + 1);
            if (key == "class") {
                n.scenario_class = value;
            } else if (key == "share") {
                n.exposure_share = parse_double(value, source, line_no);
            } else {
                throw ParseError(source, line_no, "unknown node attribute '" + key + "'");
            }
        }
        if (tree.nodes.count(n.id)) throw ParseError(source, line_no, "duplicate node id '" + n.id + "'");

        while (!ancestors.empty() && ancestors.back().first >= indent)
            ancestors.pop_back();
        if (ancestors.empty()) {
            if (!tree.root.empty())
                throw ParseError(source, line_no, "second top-level node '" + n.id + "'; a tree has exactly one root");
            if (indent != 0) throw ParseError(source, line_no, "root node must not be indented");
            tree.root = n.id;
        } else {
            tree.nodes.at(ancestors.back().second).children.push_back(n.id);
        }
        ancestors.emplace_back(indent, n.id);
        tree.nodes.emplace(n.id, std::move(n));
    }
    if (tree.root.empty()) throw ParseError(source, 0, "empty cause tree");
    return tree;
}

CauseTree load_cause_tree(const std::string& path) { return parse_cause_tree(read_file(path), path); }

std::string serialize_cause_tree(const CauseTree& tree) {
    require_valid(tree);
    std::string out;
    std::function<void(const std::string&, std::size_t)> emit = [&](const std::string& id, std::size_t depth) {
        const auto& n = tree.nodes.at(id);
        out.append(depth * 2, ' ');
        out += n.id;
        out += ' ';
        out += to_string(n.gate);
        out += ' ';
        out += quote(n.label);
        if (n.scenario_class) out += " class=" + *n.scenario_class;
        if (n.exposure_share) out += " share=" + format_double(*n.exposure_share);
        out += '\n';
        for (const auto& c : n.children)
            emit(c, depth + 1);
    };
    emit(tree.root, 0);
    return out;
}

std::string serialize_targets(const std::vector<ValidationTarget>& targets) {
    KeyedWriter w;
    for (const auto& t : targets) {
        w.section("target");
        w.field("scenario_class", t.scenario_class);
        w.field("max_event_rate", t.max_event_rate);
        w.field("confidence_level", t.confidence_level);
    }
    return w.str();
}

std::vector<ValidationTarget> parse_targets(std::string_view text, const std::string& source) {
    auto doc = parse_keyed(text, source);
    std::vector<ValidationTarget> out;
    for (const auto& rec : doc.records) {
        if (rec.section != "target") continue;
        ValidationTarget t;
        t.scenario_class = rec.require("scenario_class", source).value;
        const auto& rate = rec.require("max_event_rate", source);
        t.max_event_rate = parse_double(rate.value, source, rate.line);
        if (t.max_event_rate < 0.0) throw ParseError(source, rate.line, "max_event_rate must be nonnegative");
        if (const auto* c = rec.find("confidence_level")) {
            t.confidence_level = parse_double(c->value, source, c->line);
            if (!(t.confidence_level > 0.0 && t.confidence_level < 1.0))
                throw ParseError(source, c->line, "confidence_level must lie in (0,1)");
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<ValidationTarget> load_targets(const std::string& path) { return parse_targets(read_file(path), path); }

}  // namespace safecase
