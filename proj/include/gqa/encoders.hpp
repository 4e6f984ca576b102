#pragma once

#include <string>
#include <vector>

#include "gqa/embeddings.hpp"
#include "gqa/error.hpp"
#include "gqa/kb.hpp"
#include "gqa/params.hpp"
#include "gqa/rng.hpp"
#include "gqa/semgraph.hpp"
#include "gqa/tape.hpp"
#include "gqa/tensor.hpp"
#include "gqa/text.hpp"

namespace gqa {

enum class ModelKind { Single, Pooled, Gnn, Ggnn };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

enum class Pooling { Max, Avg };

struct ModelConfig {
    size_t hidden_size = 256;
    size_t cnn_layers = 2;
    size_t cnn_filters = 256;
    size_t kernel = 3;
    Pooling pooling = Pooling::Max;
    size_t steps = 5;  // propagation rounds T for the recurrent graph encoders
    double dropout = 0.2;
};

// Tokens feeding a node's initial state: grounded entities contribute their
// label tokens, variable/sort nodes contribute a reserved symbol.
std::vector<std::string> node_text_tokens(const NodeRef& node, const KnowledgeBase& kb);

// Token sequence describing one edge for the text-only graph encoders:
// source tokens (q omitted), relation label, target tokens (q omitted), then
// qualifier relation and value tokens if present.
std::vector<std::string> edge_text_tokens(const GraphEdge& edge, const KnowledgeBase& kb);

// Node/relation inventory of a graph plus its count-valued structure
// matrices. Node order: q first, then grounded entities by id, intermediates
// by index, sort node last. Relations are the distinct edge and qualifier
// relation types in id order.
//
// adjacency is {V, 2V}: column u < V counts edges arriving at row v from u,
// column V+u counts edges leaving v toward u. relation_incidence is {V, 2R}
// with the same incoming/outgoing split over relation types. A qualifier is
// materialized as one extra edge from its value entity to the q-node, typed
// by the qualifier relation, so constraints always sit adjacent to q.
struct GraphStructure {
    std::vector<NodeRef> nodes;
    std::vector<RelationId> relations;
    std::vector<std::vector<std::string>> node_tokens;
    std::vector<std::vector<std::string>> relation_tokens;
    Tensor<double> adjacency;
    Tensor<double> relation_incidence;

    size_t node_count() const { return nodes.size(); }
    size_t relation_count() const { return relations.size(); }

    Tensor<double> adjacency_in() const { return half(adjacency, 0); }
    Tensor<double> adjacency_out() const { return half(adjacency, 1); }
    Tensor<double> incidence_in() const { return half(relation_incidence, 0); }
    Tensor<double> incidence_out() const { return half(relation_incidence, 1); }

private:
    static Tensor<double> half(const Tensor<double>& m, size_t which);
};

GraphStructure build_graph_matrices(const SemanticGraph& g, const KnowledgeBase& kb);

// Question/graph encoder pair with a shared embedding table. The question
// side is always a convolutional sequence encoder; the graph side depends on
// ModelKind: Single encodes only the first edge's text, Pooled pools per-edge
// text encodings, Gnn/Ggnn run message passing over the structure matrices
// (Ggnn with update gates). score() is the cosine between the two encodings.
template <typename T>
class Scorer {
public:
    using Value = typename Tape<T>::Value;

    Scorer(ModelKind kind, ModelConfig cfg, const EmbeddingTable* emb)
        : kind_(kind), cfg_(cfg), emb_(emb) {
        if (!emb_) throw Error("scorer needs an embedding table");
        if (cfg_.hidden_size == 0 || cfg_.cnn_filters == 0 || cfg_.cnn_layers == 0)
            throw Error("model dimensions must be positive");
        if (cfg_.kernel == 0 || cfg_.kernel % 2 == 0)
            throw Error("convolution kernel must be odd");
    }

    ModelKind kind() const { return kind_; }
    const ModelConfig& config() const { return cfg_; }
    const EmbeddingTable& embeddings() const { return *emb_; }
    ParamStore<T>& params() { return store_; }
    const ParamStore<T>& params() const { return store_; }

    void init_params(Rng& rng) {
        if (store_.size() > 0) throw Error("scorer parameters already initialized");
        init_dcnn("qdcnn", rng);
        switch (kind_) {
            case ModelKind::Single:
            case ModelKind::Pooled:
                init_dcnn("gdcnn", rng);
                break;
            case ModelKind::Gnn:
                init_label(rng);
                init_recurrent("gnn", false, rng);
                break;
            case ModelKind::Ggnn:
                init_label(rng);
                init_recurrent("ggnn", true, rng);
                break;
        }
    }

    Value encode_question(Tape<T>& tape, const std::vector<std::string>& tokens, bool train,
                          Rng* rng) {
        return dcnn(tape, "qdcnn", tokens, train, rng);
    }

    Value encode_graph(Tape<T>& tape, const SemanticGraph& g, const KnowledgeBase& kb,
                       bool train, Rng* rng) {
        if (g.empty()) throw Error("cannot encode an empty graph");
        switch (kind_) {
            case ModelKind::Single:
                return dcnn(tape, "gdcnn", edge_text_tokens(g.edges.front(), kb), train, rng);
            case ModelKind::Pooled: {
                std::vector<Value> rows;
                rows.reserve(g.size());
                for (const GraphEdge& e : g.edges)
                    rows.push_back(dcnn(tape, "gdcnn", edge_text_tokens(e, kb), train, rng));
                Value stacked = tape.stack_rows(rows);
                return cfg_.pooling == Pooling::Max ? tape.max_axis0(stacked)
                                                    : tape.avg_axis0(stacked);
            }
            case ModelKind::Gnn:
                return propagate(tape, g, kb, false, train, rng);
            case ModelKind::Ggnn:
                return propagate(tape, g, kb, true, train, rng);
        }
        throw Error("unknown model kind");
    }

    Value encode_label(Tape<T>& tape, const std::vector<std::string>& tokens, bool train,
                       Rng* rng) {
        Tensor<double> sum(std::vector<size_t>{emb_->dim()});
        for (const std::string& tok : tokens) {
            const std::vector<double>& r = emb_->row(tok);
            for (size_t d = 0; d < r.size(); ++d) sum[d] += r[d];
        }
        Value v = apply_dropout(tape, tape.input(sum.template cast<T>()), train, rng);
        Value affine = tape.add(tape.vecmat(v, tape.param(store_.get("label.w"))),
                                tape.param(store_.get("label.b")));
        return tape.tanh_(affine);
    }

    Value score(Tape<T>& tape, const std::vector<std::string>& question_tokens,
                const SemanticGraph& g, const KnowledgeBase& kb, bool train, Rng* rng) {
        Value vq = encode_question(tape, question_tokens, train, rng);
        Value vg = encode_graph(tape, g, kb, train, rng);
        return tape.cosine(vq, vg);
    }

    double score_value(const std::vector<std::string>& question_tokens, const SemanticGraph& g,
                       const KnowledgeBase& kb) {
        Tape<T> tape;
        Value s = score(tape, question_tokens, g, kb, false, nullptr);
        return static_cast<double>(tape.value(s)[0]);
    }

private:
    ModelKind kind_;
    ModelConfig cfg_;
    const EmbeddingTable* emb_;
    ParamStore<T> store_;

    void init_dcnn(const std::string& prefix, Rng& rng) {
        size_t in = emb_->dim();
        for (size_t l = 1; l <= cfg_.cnn_layers; ++l) {
            const std::string base = prefix + ".conv" + std::to_string(l);
            store_.create(base + ".w", {cfg_.kernel * in, cfg_.cnn_filters}, Init::Xavier, rng);
            store_.create(base + ".b", {cfg_.cnn_filters}, Init::Zeros, rng);
            in = cfg_.cnn_filters;
        }
        store_.create(prefix + ".fc.w", {cfg_.cnn_filters, cfg_.hidden_size}, Init::Xavier, rng);
        store_.create(prefix + ".fc.b", {cfg_.hidden_size}, Init::Zeros, rng);
    }

    void init_label(Rng& rng) {
        store_.create("label.w", {emb_->dim(), cfg_.hidden_size}, Init::Xavier, rng);
        store_.create("label.b", {cfg_.hidden_size}, Init::Zeros, rng);
    }

    void init_recurrent(const std::string& p, bool gated, Rng& rng) {
        const size_t h = cfg_.hidden_size;
        store_.create(p + ".fwd", {h, h}, Init::Xavier, rng);
        store_.create(p + ".back", {h, h}, Init::Xavier, rng);
        if (gated) {
            store_.create(p + ".wz", {h, h}, Init::Xavier, rng);
            store_.create(p + ".uz", {h, h}, Init::Xavier, rng);
            store_.create(p + ".bz", {h}, Init::Zeros, rng);
            store_.create(p + ".wr", {h, h}, Init::Xavier, rng);
            store_.create(p + ".ur", {h, h}, Init::Xavier, rng);
            store_.create(p + ".br", {h}, Init::Zeros, rng);
        }
        store_.create(p + ".w", {h, h}, Init::Xavier, rng);
        store_.create(p + ".u", {h, h}, Init::Xavier, rng);
        store_.create(p + ".b", {h}, Init::Zeros, rng);
        store_.create(p + ".out_w", {h, h}, Init::Xavier, rng);
        store_.create(p + ".out_b", {h}, Init::Zeros, rng);
    }

    Value apply_dropout(Tape<T>& tape, Value v, bool train, Rng* rng) {
        if (!train || cfg_.dropout == 0.0) return v;
        if (!rng) throw Error("training-mode encoding needs an rng for dropout");
        return tape.dropout(v, cfg_.dropout, true, *rng);
    }

    Value dcnn(Tape<T>& tape, const std::string& prefix, const std::vector<std::string>& tokens,
               bool train, Rng* rng) {
        std::vector<std::string> seq;
        seq.reserve(tokens.size() + 2);
        seq.push_back(EmbeddingTable::kStart);
        seq.insert(seq.end(), tokens.begin(), tokens.end());
        seq.push_back(EmbeddingTable::kEnd);
        Tensor<double> x(std::vector<size_t>{seq.size(), emb_->dim()});
        for (size_t i = 0; i < seq.size(); ++i) {
            const std::vector<double>& r = emb_->row(seq[i]);
            for (size_t d = 0; d < r.size(); ++d) x.at(i, d) = r[d];
        }
        Value h = apply_dropout(tape, tape.input(x.template cast<T>()), train, rng);
        for (size_t l = 1; l <= cfg_.cnn_layers; ++l) {
            const std::string base = prefix + ".conv" + std::to_string(l);
            h = tape.relu_(tape.conv1d_same(h, tape.param(store_.get(base + ".w")),
                                            tape.param(store_.get(base + ".b")), cfg_.kernel));
        }
        Value pooled =
            cfg_.pooling == Pooling::Max ? tape.max_axis0(h) : tape.avg_axis0(h);
        pooled = apply_dropout(tape, pooled, train, rng);
        Value out = tape.add(tape.vecmat(pooled, tape.param(store_.get(prefix + ".fc.w"))),
                             tape.param(store_.get(prefix + ".fc.b")));
        return tape.relu_(out);
    }

    Value propagate(Tape<T>& tape, const SemanticGraph& g, const KnowledgeBase& kb, bool gated,
                    bool train, Rng* rng) {
        const GraphStructure gs = build_graph_matrices(g, kb);
        std::vector<Value> node_states;
        node_states.reserve(gs.node_count());
        for (const auto& toks : gs.node_tokens)
            node_states.push_back(encode_label(tape, toks, train, rng));
        Value H = tape.stack_rows(node_states);
        std::vector<Value> rel_states;
        rel_states.reserve(gs.relation_count());
        for (const auto& toks : gs.relation_tokens)
            rel_states.push_back(encode_label(tape, toks, train, rng));
        Value rl = tape.stack_rows(rel_states);

        const std::string p = gated ? "ggnn" : "gnn";
        Value a_in = tape.input(gs.adjacency_in().template cast<T>());
        Value a_out = tape.input(gs.adjacency_out().template cast<T>());
        Value r_in = tape.input(gs.incidence_in().template cast<T>());
        Value r_out = tape.input(gs.incidence_out().template cast<T>());
        // Directional relation vectors: h' = W_fwd h_l feeds nodes that see
        // the relation outgoing, h'' = W_back h_l feeds incoming.
        Value rel_fwd = tape.matmul(rl, tape.param(store_.get(p + ".fwd")));
        Value rel_back = tape.matmul(rl, tape.param(store_.get(p + ".back")));

        Value w = tape.param(store_.get(p + ".w"));
        Value u = tape.param(store_.get(p + ".u"));
        Value b = tape.param(store_.get(p + ".b"));
        for (size_t t = 0; t < cfg_.steps; ++t) {
            Value a = tape.add(tape.add(tape.matmul(a_in, H), tape.matmul(a_out, H)),
                               tape.add(tape.matmul(r_in, rel_back), tape.matmul(r_out, rel_fwd)));
            if (gated) {
                Value z = tape.sigmoid_(tape.add_rowwise(
                    tape.add(tape.matmul(a, tape.param(store_.get(p + ".wz"))),
                             tape.matmul(H, tape.param(store_.get(p + ".uz")))),
                    tape.param(store_.get(p + ".bz"))));
                Value r = tape.sigmoid_(tape.add_rowwise(
                    tape.add(tape.matmul(a, tape.param(store_.get(p + ".wr"))),
                             tape.matmul(H, tape.param(store_.get(p + ".ur")))),
                    tape.param(store_.get(p + ".br"))));
                Value cand = tape.tanh_(tape.add_rowwise(
                    tape.add(tape.matmul(a, w), tape.matmul(tape.mul(r, H), u)), b));
                H = tape.add(H, tape.mul(z, tape.sub(cand, H)));
            } else {
                H = tape.tanh_(
                    tape.add_rowwise(tape.add(tape.matmul(a, w), tape.matmul(H, u)), b));
            }
        }
        Value hq = apply_dropout(tape, tape.row(H, 0), train, rng);
        Value out = tape.add(tape.vecmat(hq, tape.param(store_.get(p + ".out_w"))),
                             tape.param(store_.get(p + ".out_b")));
        return tape.relu_(out);
    }
};

}  // namespace gqa
