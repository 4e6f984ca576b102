#include "gqa/encoders.hpp"

#include <map>
#include <set>

namespace gqa {

ModelKind parse_model_kind(const std::string& name) {
    if (name == "single") return ModelKind::Single;
    if (name == "pooled") return ModelKind::Pooled;
    if (name == "gnn") return ModelKind::Gnn;
    if (name == "ggnn") return ModelKind::Ggnn;
    throw Error("unknown model '" + name + "' (expected single|pooled|gnn|ggnn)");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Single: return "single";
        case ModelKind::Pooled: return "pooled";
        case ModelKind::Gnn: return "gnn";
        case ModelKind::Ggnn: return "ggnn";
    }
    return "?";
}

std::vector<std::string> node_text_tokens(const NodeRef& node, const KnowledgeBase& kb) {
    if (is_qvar(node)) return {EmbeddingTable::kQNode};
    if (is_intermediate(node)) return {EmbeddingTable::kEntity};
    if (is_sort(node)) {
        return {std::get<SortNode>(node).kind == SortKind::ArgMax ? EmbeddingTable::kArgMax
                                                                  : EmbeddingTable::kArgMin};
    }
    return tokenize(kb.entity_label(std::get<Grounded>(node).entity));
}

std::vector<std::string> edge_text_tokens(const GraphEdge& edge, const KnowledgeBase& kb) {
    std::vector<std::string> out;
    auto append_node = [&](const NodeRef& n) {
        if (is_qvar(n)) return;
        std::vector<std::string> toks = node_text_tokens(n, kb);
        out.insert(out.end(), toks.begin(), toks.end());
    };
    auto append_relation = [&](const RelationId& r) {
        std::vector<std::string> toks = tokenize(kb.relation_label(r));
        out.insert(out.end(), toks.begin(), toks.end());
    };
    append_node(edge.source);
    append_relation(edge.relation);
    append_node(edge.target);
    if (edge.qualifier) {
        append_relation(edge.qualifier->relation);
        append_node(edge.qualifier->value);
    }
    return out;
}

Tensor<double> GraphStructure::half(const Tensor<double>& m, size_t which) {
    const size_t rows = m.rows();
    const size_t cols = m.cols() / 2;
    Tensor<double> out(std::vector<size_t>{rows, cols});
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) out.at(i, j) = m.at(i, which * cols + j);
    return out;
}

GraphStructure build_graph_matrices(const SemanticGraph& g, const KnowledgeBase& kb) {
    if (g.empty()) throw Error("cannot build matrices for an empty graph");
    if (auto why = well_formedness_violation(g))
        throw Error("cannot build matrices: " + *why);

    GraphStructure gs;
    gs.nodes.push_back(QVar{});
    for (const EntityId& e : g.grounded_entities()) gs.nodes.push_back(Grounded{e});
    for (int i = 0; i < g.intermediate_count(); ++i) gs.nodes.push_back(Intermediate{i});
    for (const GraphEdge& e : g.edges)
        if (is_sort(e.target)) gs.nodes.push_back(e.target);

    std::set<RelationId> rels;
    for (const GraphEdge& e : g.edges) {
        rels.insert(e.relation);
        if (e.qualifier) rels.insert(e.qualifier->relation);
    }
    gs.relations.assign(rels.begin(), rels.end());

    std::map<std::string, size_t> node_index;
    for (size_t i = 0; i < gs.nodes.size(); ++i) node_index[node_to_string(gs.nodes[i])] = i;
    std::map<RelationId, size_t> rel_index;
    for (size_t i = 0; i < gs.relations.size(); ++i) rel_index[gs.relations[i]] = i;

    const size_t v = gs.nodes.size();
    const size_t r = gs.relations.size();
    gs.adjacency = Tensor<double>(std::vector<size_t>{v, 2 * v});
    gs.relation_incidence = Tensor<double>(std::vector<size_t>{v, 2 * r});

    auto count_edge = [&](const NodeRef& src, const NodeRef& tgt, const RelationId& rel) {
        const size_t s = node_index.at(node_to_string(src));
        const size_t t = node_index.at(node_to_string(tgt));
        const size_t k = rel_index.at(rel);
        gs.adjacency.at(t, s) += 1.0;
        gs.adjacency.at(s, v + t) += 1.0;
        gs.relation_incidence.at(t, k) += 1.0;
        gs.relation_incidence.at(s, r + k) += 1.0;
    };
    for (const GraphEdge& e : g.edges) {
        count_edge(e.source, e.target, e.relation);
        if (e.qualifier) count_edge(e.qualifier->value, QVar{}, e.qualifier->relation);
    }

    gs.node_tokens.reserve(v);
    for (const NodeRef& n : gs.nodes) gs.node_tokens.push_back(node_text_tokens(n, kb));
    gs.relation_tokens.reserve(r);
    for (const RelationId& rel : gs.relations)
        gs.relation_tokens.push_back(tokenize(kb.relation_label(rel)));
    return gs;
}

}  // namespace gqa
