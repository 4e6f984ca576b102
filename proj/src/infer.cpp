#include "gqa/infer.hpp"

#include "gqa/error.hpp"

namespace gqa {

std::string complexity_bucket(const LinkedQuestion& q) {
    const int n = q.relation_count.value_or(1);
    if (n <= 1) return "1";
    if (n == 2) return "2";
    if (n == 3) return "3";
    return "4+";
}

EvalReport evaluate_answers(const std::vector<LinkedQuestion>& dataset,
                            const std::map<std::string, AnswerRecord>& records) {
    EvalReport report;
    report.question_count = dataset.size();
    if (dataset.empty()) return report;
    for (const LinkedQuestion& q : dataset) {
        auto it = records.find(q.id);
        if (it == records.end())
            throw Error("missing prediction for question '" + q.id + "'");
        if (!q.gold_answers || q.gold_answers->empty())
            throw Error("question '" + q.id + "' has no gold answers");
        const AnswerRecord& rec = it->second;
        QuestionResult qr;
        qr.id = q.id;
        qr.prf = question_prf(rec.answers, *q.gold_answers);
        qr.bucket = complexity_bucket(q);
        for (const std::set<EntityId>& answers : rec.topk_answers) {
            if (question_prf(answers, *q.gold_answers).f >= 1.0 - 1e-12) {
                qr.hit_at_10 = true;
                break;
            }
        }
        report.per_question.push_back(qr);

        report.macro_p += qr.prf.p;
        report.macro_r += qr.prf.r;
        report.macro_f += qr.prf.f;
        if (qr.hit_at_10) report.hit_at_10 += 1.0;
        if (qr.prf.f > 0.5) report.rate_f_gt_05 += 1.0;
        if (qr.prf.f > 0.0) report.rate_f_gt_0 += 1.0;
        BucketStats& b = report.buckets[qr.bucket];
        ++b.count;
        b.p += qr.prf.p;
        b.r += qr.prf.r;
        b.f += qr.prf.f;
    }
    const double n = static_cast<double>(dataset.size());
    report.macro_p /= n;
    report.macro_r /= n;
    report.macro_f /= n;
    report.hit_at_10 /= n;
    report.rate_f_gt_05 /= n;
    report.rate_f_gt_0 /= n;
    for (auto& [key, b] : report.buckets) {
        b.p /= static_cast<double>(b.count);
        b.r /= static_cast<double>(b.count);
        b.f /= static_cast<double>(b.count);
    }
    return report;
}

EvalReport evaluate(const std::vector<LinkedQuestion>& dataset,
                    const std::map<std::string, Prediction>& predictions,
                    const KnowledgeBase& kb) {
    std::map<std::string, AnswerRecord> records;
    for (const auto& [id, pred] : predictions) {
        AnswerRecord rec;
        rec.answers = pred.answers;
        for (const ScoredGraph& sg : pred.topk) {
            if (sg.graph.empty()) continue;
            rec.topk_answers.push_back(evaluate_graph(kb, sg.graph));
        }
        records.emplace(id, std::move(rec));
    }
    return evaluate_answers(dataset, records);
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["questions"] = report.question_count;
    j["macro_P"] = report.macro_p;
    j["macro_R"] = report.macro_r;
    j["macro_F"] = report.macro_f;
    j["hit_at_10"] = report.hit_at_10;
    j["rate_F_gt_0.5"] = report.rate_f_gt_05;
    j["rate_F_gt_0"] = report.rate_f_gt_0;
    j["buckets"] = nlohmann::ordered_json::object();
    for (const auto& [key, b] : report.buckets) {
        nlohmann::ordered_json bj;
        bj["count"] = b.count;
        bj["P"] = b.p;
        bj["R"] = b.r;
        bj["F"] = b.f;
        j["buckets"][key] = std::move(bj);
    }
    j["per_question"] = nlohmann::ordered_json::array();
    for (const QuestionResult& qr : report.per_question) {
        nlohmann::ordered_json qj;
        qj["id"] = qr.id;
        qj["P"] = qr.prf.p;
        qj["R"] = qr.prf.r;
        qj["F"] = qr.prf.f;
        qj["hit_at_10"] = qr.hit_at_10;
        qj["bucket"] = qr.bucket;
        j["per_question"].push_back(std::move(qj));
    }
    return j;
}

std::string report_breakdown_csv(const EvalReport& report) {
    std::string out = "bucket,count,P,R,F\n";
    for (const auto& [key, b] : report.buckets) {
        nlohmann::ordered_json row = {key, b.count, b.p, b.r, b.f};
        out += row[0].get<std::string>() + "," + row[1].dump() + "," + row[2].dump() + "," +
               row[3].dump() + "," + row[4].dump() + "\n";
    }
    return out;
}

std::string prediction_to_json_line(const Prediction& pred) {
    nlohmann::ordered_json j;
    j["id"] = pred.id;
    j["answers"] = nlohmann::ordered_json::array();
    for (const EntityId& e : pred.answers) j["answers"].push_back(e.value);
    j["graph"] = pred.best.empty() ? "" : canonical_form(pred.best);
    j["score"] = pred.topk.empty() ? 0.0 : pred.topk.front().score;
    j["topk"] = nlohmann::ordered_json::array();
    for (const ScoredGraph& sg : pred.topk) {
        nlohmann::ordered_json sj;
        sj["graph"] = canonical_form(sg.graph);
        sj["score"] = sg.score;
        sj["answers"] = nlohmann::ordered_json::array();
        for (const EntityId& e : sg.answers) sj["answers"].push_back(e.value);
        j["topk"].push_back(std::move(sj));
    }
    return j.dump();
}

}  // namespace gqa
