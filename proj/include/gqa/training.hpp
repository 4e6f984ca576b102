#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gqa/checkpoint.hpp"
#include "gqa/config.hpp"
#include "gqa/construct.hpp"
#include "gqa/encoders.hpp"
#include "gqa/kb.hpp"
#include "gqa/metrics.hpp"
#include "gqa/semgraph.hpp"

namespace gqa {

struct TrainingInstance {
    LinkedQuestion question;
    std::vector<SemanticGraph> positives;
    std::vector<SemanticGraph> negatives;
};

struct WeakSupervisionStats {
    size_t total_questions = 0;
    size_t kept_questions = 0;
    size_t dropped_questions = 0;   // no generated graph reached the threshold
    size_t truncated_questions = 0; // state enumeration hit the cap
    size_t positive_graphs = 0;
    size_t negative_graphs = 0;
};

struct WeakSupervision {
    std::vector<TrainingInstance> instances;
    WeakSupervisionStats stats;
};

// Runs staged construction exhaustively per question, executes every graph
// against the KB, and labels it positive when its answer F-score against the
// gold set reaches `positive_f_threshold` (1.0 = exact match). Questions
// without any positive graph are dropped and counted.
WeakSupervision generate_weak_supervision(const std::vector<LinkedQuestion>& dataset,
                                          const KnowledgeBase& kb, const ConstructOptions& opts,
                                          double positive_f_threshold = 1.0,
                                          size_t max_states = 200000);

// Seeded shuffle, then the first ceil(fraction*n) instances become dev.
void split_dev(std::vector<TrainingInstance> all, double dev_fraction, uint64_t seed,
               std::vector<TrainingInstance>& train_out, std::vector<TrainingInstance>& dev_out);

// Hinge ranking loss over precomputed rewards:
// sum over negatives of max(0, m - gamma_pos + gamma_neg).
double margin_loss(double gamma_pos, const std::vector<double>& gamma_negs, double m);

struct TrainConfig {
    double margin = 0.5;
    size_t batch_size = 64;
    AdamConfig adam;
    size_t max_negatives = 100;
    size_t patience = 5;
    size_t max_epochs = 50;
    uint64_t seed = 1;
    size_t threads = 1;
};

inline TrainConfig make_train_config(const RunConfig& rc) {
    TrainConfig tc;
    tc.margin = rc.margin;
    tc.batch_size = rc.batch_size;
    tc.adam = adam_config(rc);
    tc.max_negatives = rc.max_negatives;
    tc.patience = rc.patience;
    tc.max_epochs = rc.max_epochs;
    tc.seed = rc.seed;
    tc.threads = rc.threads;
    return tc;
}

struct EpochLog {
    size_t epoch = 0;
    double train_loss = 0.0;
    double dev_p = 0.0;
    double dev_r = 0.0;
    double dev_f = 0.0;
    double seconds = 0.0;
};

inline std::string epoch_log_line(const EpochLog& e) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["dev_P"] = e.dev_p;
    j["dev_R"] = e.dev_r;
    j["dev_F"] = e.dev_f;
    j["seconds"] = e.seconds;
    return j.dump();
}

struct TrainResult {
    Checkpoint best;
    double best_dev_f = -1.0;
    size_t best_epoch = 0;
    std::vector<EpochLog> log;
};

// Highest-scoring candidate graph of an instance under the current
// parameters, eval mode; ties broken by canonical form.
template <typename T>
const SemanticGraph* best_candidate(Scorer<T>& scorer, const TrainingInstance& inst,
                                    const KnowledgeBase& kb) {
    const SemanticGraph* best = nullptr;
    double best_score = 0.0;
    std::string best_key;
    auto consider = [&](const SemanticGraph& g) {
        const double s = scorer.score_value(inst.question.tokens, g, kb);
        const std::string key = canonical_form(g);
        if (!best || s > best_score || (s == best_score && key < best_key)) {
            best = &g;
            best_score = s;
            best_key = key;
        }
    };
    for (const SemanticGraph& g : inst.positives) consider(g);
    for (const SemanticGraph& g : inst.negatives) consider(g);
    return best;
}

// Macro P/R/F of picking each instance's best-scored candidate graph and
// executing it. Drives early stopping.
template <typename T>
PRF dev_macro_prf(Scorer<T>& scorer, const std::vector<TrainingInstance>& dev,
                  const KnowledgeBase& kb) {
    PRF sum;
    if (dev.empty()) return sum;
    for (const TrainingInstance& inst : dev) {
        const SemanticGraph* g = best_candidate(scorer, inst, kb);
        std::set<EntityId> answers;
        if (g) answers = evaluate_graph(kb, *g);
        const PRF prf = question_prf(answers, *inst.question.gold_answers);
        sum.p += prf.p;
        sum.r += prf.r;
        sum.f += prf.f;
    }
    const double n = static_cast<double>(dev.size());
    return PRF{sum.p / n, sum.r / n, sum.f / n};
}

// Max-margin training: per epoch, shuffle; per question, all positives and up
// to max_negatives uniformly sampled negatives; one Adam step per batch of
// questions. Early stopping on dev macro-F with `patience`. Gradient work for
// the questions of a batch may run on `threads` workers; accumulation into
// parameters and the Adam step stay serial and ordered, so results do not
// depend on the thread count.
template <typename T>
TrainResult train(Scorer<T>& scorer, const std::vector<TrainingInstance>& train_set,
                  const std::vector<TrainingInstance>& dev_set, const KnowledgeBase& kb,
                  const TrainConfig& tc, const std::map<std::string, std::string>& ckpt_config,
                  std::ostream* log_out = nullptr) {
    if (train_set.empty()) throw Error("training set is empty");
    Adam<T> adam(scorer.params(), tc.adam);
    TrainResult result;
    result.best = make_checkpoint(scorer.params(), ckpt_config);
    size_t stale = 0;

    struct Work {
        const TrainingInstance* inst = nullptr;
        uint64_t seed = 0;
        std::unique_ptr<Tape<T>> tape;
        typename Tape<T>::Value loss{};
        bool has_loss = false;
        double loss_value = 0.0;
        std::exception_ptr error;
    };

    auto run_question = [&](Work& w) {
        try {
            const TrainingInstance& inst = *w.inst;
            if (inst.positives.empty() || inst.negatives.empty()) return;
            Rng rng(w.seed);
            const size_t want = std::min(tc.max_negatives, inst.negatives.size());
            const std::vector<size_t> neg_sel =
                rng.sample_without_replacement(inst.negatives.size(), want);
            w.tape = std::make_unique<Tape<T>>();
            Tape<T>& tape = *w.tape;
            auto vq = scorer.encode_question(tape, inst.question.tokens, true, &rng);
            std::vector<typename Tape<T>::Value> pos_scores;
            pos_scores.reserve(inst.positives.size());
            for (const SemanticGraph& g : inst.positives)
                pos_scores.push_back(
                    tape.cosine(vq, scorer.encode_graph(tape, g, kb, true, &rng)));
            std::vector<typename Tape<T>::Value> neg_scores;
            neg_scores.reserve(neg_sel.size());
            for (size_t i : neg_sel)
                neg_scores.push_back(
                    tape.cosine(vq, scorer.encode_graph(tape, inst.negatives[i], kb, true, &rng)));
            auto m = tape.input(Tensor<T>({1}, {static_cast<T>(tc.margin)}));
            bool any = false;
            typename Tape<T>::Value total{};
            for (auto gp : pos_scores) {
                for (auto gn : neg_scores) {
                    auto term = tape.relu_(tape.add(m, tape.sub(gn, gp)));
                    total = any ? tape.add(total, term) : term;
                    any = true;
                }
            }
            if (!any) return;
            w.loss_value = static_cast<double>(tape.value(total)[0]);
            if (!std::isfinite(w.loss_value))
                throw Error("training diverged: non-finite loss on question '" +
                            inst.question.id + "'");
            tape.backward(total);
            w.loss = total;
            w.has_loss = true;
        } catch (...) {
            w.error = std::current_exception();
        }
    };

    for (size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<size_t> order(train_set.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng erng(seed_mix(tc.seed, epoch, 0));
        erng.shuffle(order);

        double epoch_loss = 0.0;
        for (size_t start = 0; start < order.size(); start += tc.batch_size) {
            const size_t end = std::min(order.size(), start + tc.batch_size);
            std::vector<Work> works(end - start);
            for (size_t i = start; i < end; ++i) {
                works[i - start].inst = &train_set[order[i]];
                works[i - start].seed = seed_mix(tc.seed, epoch, order[i] + 1);
            }
            if (tc.threads <= 1 || works.size() == 1) {
                for (Work& w : works) run_question(w);
            } else {
                std::atomic<size_t> next{0};
                auto worker = [&] {
                    for (size_t i = next.fetch_add(1); i < works.size(); i = next.fetch_add(1))
                        run_question(works[i]);
                };
                std::vector<std::thread> pool;
                const size_t nthreads = std::min(tc.threads, works.size());
                pool.reserve(nthreads);
                for (size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
                for (std::thread& th : pool) th.join();
            }
            scorer.params().zero_grads();
            for (Work& w : works) {
                if (w.error) std::rethrow_exception(w.error);
                if (!w.has_loss) continue;
                epoch_loss += w.loss_value;
                w.tape->accumulate_into_params();
            }
            adam.step();
        }

        const PRF dev = dev_macro_prf(scorer, dev_set, kb);
        EpochLog log;
        log.epoch = epoch;
        log.train_loss = epoch_loss / static_cast<double>(train_set.size());
        log.dev_p = dev.p;
        log.dev_r = dev.r;
        log.dev_f = dev.f;
        log.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(log);
        if (log_out) (*log_out) << epoch_log_line(log) << '\n' << std::flush;

        if (dev.f > result.best_dev_f + 1e-12) {
            result.best_dev_f = dev.f;
            result.best_epoch = epoch;
            result.best = make_checkpoint(scorer.params(), ckpt_config);
            stale = 0;
        } else if (++stale >= tc.patience) {
            break;
        }
    }
    return result;
}

}  // namespace gqa
