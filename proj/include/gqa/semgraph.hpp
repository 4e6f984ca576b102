#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "gqa/ids.hpp"

namespace gqa {

// Semantic graphs are conjunctive first-order parses of a question: edges are
// KB relations linking the answer variable (q-node), grounded entities,
// existentially quantified intermediate variables and sort constraints.

struct QVar {
    auto operator<=>(const QVar&) const = default;
};

struct Grounded {
    EntityId entity;
    auto operator<=>(const Grounded&) const = default;
};

// Existentially quantified variable node; indices dense from 0 per graph.
struct Intermediate {
    int index = 0;
    auto operator<=>(const Intermediate&) const = default;
};

enum class SortKind { ArgMax, ArgMin };

// argmax/argmin constraint node over the dates of a temporal relation.
struct SortNode {
    SortKind kind = SortKind::ArgMax;
    auto operator<=>(const SortNode&) const = default;
};

using NodeRef = std::variant<QVar, Grounded, Intermediate, SortNode>;

inline bool is_qvar(const NodeRef& n) { return std::holds_alternative<QVar>(n); }
inline bool is_grounded(const NodeRef& n) { return std::holds_alternative<Grounded>(n); }
inline bool is_intermediate(const NodeRef& n) { return std::holds_alternative<Intermediate>(n); }
inline bool is_sort(const NodeRef& n) { return std::holds_alternative<SortNode>(n); }

// Qualifier relation-value pair turning a binary edge into a ternary one:
// r2(r1(e1, e2), e3). Construction only attaches grounded entities as values.
struct EdgeQualifier {
    RelationId relation;
    NodeRef value;

    auto operator<=>(const EdgeQualifier&) const = default;
};

struct GraphEdge {
    RelationId relation;
    NodeRef source;
    NodeRef target;
    std::optional<EdgeQualifier> qualifier;

    auto operator<=>(const GraphEdge&) const = default;
};

// Edge list, creation order preserved; the final element is the "last added
// edge" that add_constraint_action may still qualify.
struct SemanticGraph {
    std::vector<GraphEdge> edges;

    bool empty() const { return edges.empty(); }
    size_t size() const { return edges.size(); }

    bool has_sort_edge() const;
    int intermediate_count() const;

    // Grounded entities appearing anywhere in the graph (endpoints and
    // qualifier values), in id order.
    std::set<EntityId> grounded_entities() const;

    auto operator<=>(const SemanticGraph&) const = default;
};

// Structural well-formedness: exactly the SemanticGraph invariants that do
// not need a KB (no self loops, dense intermediates, connectivity from the
// q-node, at most one sort edge, sort edges of the form r(q, argmax/argmin),
// at most one qualifier per edge with a grounded value).
// Returns an explanation for the first violated rule, or nullopt.
std::optional<std::string> well_formedness_violation(const SemanticGraph& g);
inline bool is_well_formed(const SemanticGraph& g) { return !well_formedness_violation(g); }

// Deterministic string key: equal graphs (same edge multiset up to renaming
// of intermediate indices, same last edge) map to equal strings, distinct
// graphs to distinct strings. The last edge keeps its position because it
// carries the qualifier-attachment semantics.
std::string canonical_form(const SemanticGraph& g);

// Compact single-node rendering used by canonical_form and debug dumps:
// "q", "e:<id>", "v:<k>", "argmax", "argmin".
std::string node_to_string(const NodeRef& n);

}  // namespace gqa
