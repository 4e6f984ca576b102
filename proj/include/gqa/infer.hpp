#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqa/construct.hpp"
#include "gqa/encoders.hpp"
#include "gqa/kb.hpp"
#include "gqa/metrics.hpp"
#include "gqa/semgraph.hpp"

namespace gqa {

struct ScoredGraph {
    SemanticGraph graph;
    double score = 0.0;
    std::set<EntityId> answers;  // what the graph executes to
};

struct Prediction {
    std::string id;
    SemanticGraph best;  // empty when no graph could be constructed
    std::set<EntityId> answers;
    // Up to 10 highest-reward graphs seen during search, score descending,
    // ties by canonical form ascending.
    std::vector<ScoredGraph> topk;
};

// Iterative beam search over construction states: at each round the `beam`
// highest-reward graphs found so far are expanded; new graphs are scored and
// merged; search stops when the beam is fully expanded. Partial graphs are
// scored exactly like complete ones. Questions with no linked entities (or no
// constructible graph) return an empty prediction.
template <typename T>
Prediction beam_search_parse(const LinkedQuestion& q, const KnowledgeBase& kb, Scorer<T>& scorer,
                             size_t beam = 10, const ConstructOptions& opts = {}) {
    Prediction pred;
    pred.id = q.id;
    if (q.entities.empty() || beam == 0) return pred;

    struct Entry {
        double score;
        std::string key;
        ConstructionState state;
        bool expanded = false;
    };
    std::vector<Entry> pool;
    std::set<std::string> seen;
    auto admit = [&](ConstructionState s) {
        std::string key = canonical_form(s.graph);
        if (!seen.insert(key).second) return;
        const double score = scorer.score_value(q.tokens, s.graph, kb);
        pool.push_back(Entry{score, std::move(key), std::move(s), false});
    };
    auto better = [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.key < b.key;
    };

    for (ConstructionState& s : expand(initial_state(q), kb, opts)) admit(std::move(s));
    while (true) {
        std::sort(pool.begin(), pool.end(), better);
        std::vector<ConstructionState> fresh;
        const size_t width = std::min(beam, pool.size());
        for (size_t i = 0; i < width; ++i) {
            if (pool[i].expanded) continue;
            pool[i].expanded = true;
            for (ConstructionState& s : expand(pool[i].state, kb, opts))
                fresh.push_back(std::move(s));
        }
        if (fresh.empty()) break;
        const size_t before = pool.size();
        for (ConstructionState& s : fresh) admit(std::move(s));
        if (pool.size() == before) break;
    }
    if (pool.empty()) return pred;

    std::sort(pool.begin(), pool.end(), better);
    pred.best = pool.front().state.graph;
    pred.answers = evaluate_graph(kb, pred.best);
    const size_t k = std::min<size_t>(10, pool.size());
    pred.topk.reserve(k);
    for (size_t i = 0; i < k; ++i)
        pred.topk.push_back(ScoredGraph{pool[i].state.graph, pool[i].score,
                                        evaluate_graph(kb, pool[i].state.graph)});
    return pred;
}

struct BucketStats {
    size_t count = 0;
    double p = 0.0;
    double r = 0.0;
    double f = 0.0;
};

struct QuestionResult {
    std::string id;
    PRF prf;
    bool hit_at_10 = false;
    std::string bucket;
};

struct EvalReport {
    size_t question_count = 0;
    double macro_p = 0.0;
    double macro_r = 0.0;
    double macro_f = 0.0;
    double hit_at_10 = 0.0;
    double rate_f_gt_05 = 0.0;
    double rate_f_gt_0 = 0.0;
    std::map<std::string, BucketStats> buckets;  // keys "1","2","3","4+"
    std::vector<QuestionResult> per_question;
};

// Complexity bucket from the dataset's relation-count annotation; questions
// without the annotation land in "1".
std::string complexity_bucket(const LinkedQuestion& q);

// Answer sets only — enough to score a prediction without re-running graphs,
// e.g. when reading a prediction dump back from disk.
struct AnswerRecord {
    std::set<EntityId> answers;
    std::vector<std::set<EntityId>> topk_answers;
};

// Macro metrics over one record per question. hit@10 asks whether any top-10
// answer set is an exact match (F=1) against gold.
EvalReport evaluate_answers(const std::vector<LinkedQuestion>& dataset,
                            const std::map<std::string, AnswerRecord>& records);

// Same, executing each prediction's top-k graphs against the KB.
EvalReport evaluate(const std::vector<LinkedQuestion>& dataset,
                    const std::map<std::string, Prediction>& predictions,
                    const KnowledgeBase& kb);

nlohmann::ordered_json report_to_json(const EvalReport& report);
// CSV of the per-complexity breakdown: bucket,count,P,R,F
std::string report_breakdown_csv(const EvalReport& report);
std::string prediction_to_json_line(const Prediction& pred);

}  // namespace gqa
