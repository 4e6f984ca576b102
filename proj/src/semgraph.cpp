#include "gqa/semgraph.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace gqa {

bool SemanticGraph::has_sort_edge() const {
    for (const auto& e : edges)
        if (is_sort(e.source) || is_sort(e.target)) return true;
    return false;
}

int SemanticGraph::intermediate_count() const {
    int max_index = -1;
    auto visit = [&](const NodeRef& n) {
        if (auto* iv = std::get_if<Intermediate>(&n)) max_index = std::max(max_index, iv->index);
    };
    for (const auto& e : edges) {
        visit(e.source);
        visit(e.target);
        if (e.qualifier) visit(e.qualifier->value);
    }
    return max_index + 1;
}

std::set<EntityId> SemanticGraph::grounded_entities() const {
    std::set<EntityId> out;
    auto visit = [&](const NodeRef& n) {
        if (auto* g = std::get_if<Grounded>(&n)) out.insert(g->entity);
    };
    for (const auto& e : edges) {
        visit(e.source);
        visit(e.target);
        if (e.qualifier) visit(e.qualifier->value);
    }
    return out;
}

std::string node_to_string(const NodeRef& n) {
    if (is_qvar(n)) return "q";
    if (auto* g = std::get_if<Grounded>(&n)) return "e:" + g->entity.value;
    if (auto* iv = std::get_if<Intermediate>(&n)) return "v:" + std::to_string(iv->index);
    return std::get<SortNode>(n).kind == SortKind::ArgMax ? "argmax" : "argmin";
}

std::optional<std::string> well_formedness_violation(const SemanticGraph& g) {
    if (g.edges.empty()) return std::nullopt;

    int sort_edges = 0;
    std::set<int> seen_intermediates;
    for (const auto& e : g.edges) {
        if (e.source == e.target) return "self-loop edge on " + node_to_string(e.source);
        if (is_sort(e.source)) return "sort node in source position";
        if (is_sort(e.target)) {
            if (!is_qvar(e.source)) return "sort edge not attached to the q-node";
            if (e.qualifier) return "qualifier on a sort edge";
            ++sort_edges;
        }
        if (e.qualifier && !is_grounded(e.qualifier->value))
            return "qualifier value is not a grounded entity";
        for (const NodeRef* n : {&e.source, &e.target})
            if (auto* iv = std::get_if<Intermediate>(n)) seen_intermediates.insert(iv->index);
    }
    if (sort_edges > 1) return "more than one sort edge";

    // Intermediate indices dense from 0.
    int expect = 0;
    for (int idx : seen_intermediates)
        if (idx != expect++) return "intermediate indices not dense from 0";

    // Exactly one q-node and everything reachable from it. Nodes are keyed by
    // their rendered form; qualifier values hang off their edge and are
    // reachable whenever the edge is.
    std::map<std::string, std::vector<std::string>> adj;
    bool has_q = false;
    for (const auto& e : g.edges) {
        std::string a = node_to_string(e.source), b = node_to_string(e.target);
        adj[a].push_back(b);
        adj[b].push_back(a);
        has_q = has_q || a == "q" || b == "q";
    }
    if (!has_q) return "graph has no q-node";
    std::set<std::string> visited{"q"};
    std::vector<std::string> queue{"q"};
    while (!queue.empty()) {
        std::string n = std::move(queue.back());
        queue.pop_back();
        for (const auto& m : adj[n])
            if (visited.insert(m).second) queue.push_back(m);
    }
    if (visited.size() != adj.size()) return "graph not connected to the q-node";
    return std::nullopt;
}

namespace {

// Node rendering with intermediate indices replaced through `remap`;
// unmapped intermediates get fresh indices in encounter order.
std::string node_canonical(const NodeRef& n, std::map<int, int>& remap) {
    if (auto* iv = std::get_if<Intermediate>(&n)) {
        auto [it, inserted] = remap.emplace(iv->index, static_cast<int>(remap.size()));
        return "v:" + std::to_string(it->second);
    }
    return node_to_string(n);
}

std::string edge_canonical(const GraphEdge& e, std::map<int, int>& remap) {
    std::string s = "r=" + e.relation.value + "|s=" + node_canonical(e.source, remap) +
                    "|t=" + node_canonical(e.target, remap);
    if (e.qualifier)
        s += "|q=" + e.qualifier->relation.value + ":" + node_canonical(e.qualifier->value, remap);
    return s;
}

std::string serialize_order(const SemanticGraph& g, const std::vector<size_t>& order) {
    std::map<int, int> remap;
    std::string out;
    for (size_t i = 0; i < order.size(); ++i) {
        if (i) out.push_back(';');
        out += edge_canonical(g.edges[order[i]], remap);
    }
    return out;
}

}  // namespace

std::string canonical_form(const SemanticGraph& g) {
    const size_t n = g.edges.size();
    if (n == 0) return "";
    if (n == 1) return serialize_order(g, {0});

    // The last edge keeps its position; the remaining edges are reordered to
    // the permutation with the lexicographically smallest serialization, which
    // also fixes the intermediate renumbering. Edge counts are ≤ max_edges, so
    // trying all (n-1)! orders is cheap.
    std::vector<size_t> head(n - 1);
    std::iota(head.begin(), head.end(), 0);
    std::string best;
    do {
        std::vector<size_t> order(head);
        order.push_back(n - 1);
        std::string s = serialize_order(g, order);
        if (best.empty() || s < best) best = std::move(s);
    } while (std::next_permutation(head.begin(), head.end()));
    return best;
}

}  // namespace gqa
