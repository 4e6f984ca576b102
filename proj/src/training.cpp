#include "gqa/training.hpp"

#include <algorithm>

namespace gqa {

WeakSupervision generate_weak_supervision(const std::vector<LinkedQuestion>& dataset,
                                          const KnowledgeBase& kb, const ConstructOptions& opts,
                                          double positive_f_threshold, size_t max_states) {
    WeakSupervision out;
    for (const LinkedQuestion& q : dataset) {
        ++out.stats.total_questions;
        if (!q.gold_answers || q.gold_answers->empty())
            throw Error("question '" + q.id + "' has no gold answers");
        bool truncated = false;
        const std::vector<ConstructionState> states =
            enumerate_states(q, kb, opts, max_states, &truncated);
        if (truncated) ++out.stats.truncated_questions;
        TrainingInstance inst;
        inst.question = q;
        for (const ConstructionState& s : states) {
            const std::set<EntityId> answers = evaluate_graph(kb, s.graph);
            const PRF prf = question_prf(answers, *q.gold_answers);
            if (prf.f + 1e-12 >= positive_f_threshold)
                inst.positives.push_back(s.graph);
            else
                inst.negatives.push_back(s.graph);
        }
        if (inst.positives.empty()) {
            ++out.stats.dropped_questions;
            continue;
        }
        ++out.stats.kept_questions;
        out.stats.positive_graphs += inst.positives.size();
        out.stats.negative_graphs += inst.negatives.size();
        out.instances.push_back(std::move(inst));
    }
    return out;
}

void split_dev(std::vector<TrainingInstance> all, double dev_fraction, uint64_t seed,
               std::vector<TrainingInstance>& train_out, std::vector<TrainingInstance>& dev_out) {
    train_out.clear();
    dev_out.clear();
    Rng rng(seed_mix(seed, 0xde55u, 0));
    std::vector<size_t> order(all.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const size_t dev_n = static_cast<size_t>(
        std::ceil(dev_fraction * static_cast<double>(all.size()) - 1e-12));
    for (size_t i = 0; i < order.size(); ++i) {
        if (i < dev_n)
            dev_out.push_back(std::move(all[order[i]]));
        else
            train_out.push_back(std::move(all[order[i]]));
    }
}

double margin_loss(double gamma_pos, const std::vector<double>& gamma_negs, double m) {
    double total = 0.0;
    for (double gn : gamma_negs) total += std::max(0.0, m - gamma_pos + gn);
    return total;
}

}  // namespace gqa
