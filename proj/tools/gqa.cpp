#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gqa/checkpoint.hpp"
#include "gqa/config.hpp"
#include "gqa/embeddings.hpp"
#include "gqa/gradcheck.hpp"
#include "gqa/infer.hpp"
#include "gqa/manifest.hpp"
#include "gqa/training.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace gqa;

namespace {

struct Cli {
    std::string config_path;
    std::string kb_path;
    std::string embeddings_path;
    std::string data_path;
    std::string out_dir;
    std::string checkpoint_path;
    std::string predictions_path;
    std::string question;
    std::string entities_csv;

    std::string model;
    size_t beam = 10;
    uint64_t seed = 1;
    size_t threads = 1;
    bool f32 = false;
    bool f64 = false;
};

// Precedence: defaults, then checkpoint metadata (when a checkpoint is
// loaded), then the config file, then explicit flags.
RunConfig effective_config(const Cli& cli, const CLI::App* cmd, const Checkpoint* ckpt) {
    RunConfig cfg;
    if (ckpt)
        for (const auto& [k, v] : ckpt->config) apply_config_entry(cfg, k, v);
    if (!cli.config_path.empty()) load_config_file(cfg, cli.config_path);
    if (cmd->count("--model")) cfg.model = cli.model;
    if (cmd->count("--beam")) cfg.beam = cli.beam;
    if (cmd->count("--seed")) cfg.seed = cli.seed;
    if (cmd->count("--threads")) cfg.threads = cli.threads;
    if (cli.f32 && cli.f64) throw Error("choose one of --f32/--f64");
    if (cli.f32) cfg.f64 = false;
    if (cli.f64) cfg.f64 = true;
    parse_model_kind(cfg.model);  // validate early
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw Error("--out is required for this command");
    fs::create_directories(dir);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

std::vector<EntityId> parse_entity_csv(const std::string& csv) {
    std::vector<EntityId> out;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) {
        const size_t a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        const size_t b = item.find_last_not_of(" \t");
        out.push_back(EntityId{item.substr(a, b - a + 1)});
    }
    return out;
}

ordered_json prediction_json(const Prediction& pred, const KnowledgeBase& kb) {
    ordered_json j = ordered_json::parse(prediction_to_json_line(pred));
    ordered_json labels = ordered_json::array();
    for (const EntityId& e : pred.answers)
        labels.push_back(kb.has_entity(e) ? kb.entity_label(e) : e.value);
    j["answer_labels"] = std::move(labels);
    return j;
}

int cmd_ingest_kb(const Cli& cli, const CLI::App* cmd) {
    const RunConfig cfg = effective_config(cli, cmd, nullptr);
    const KnowledgeBase kb = load_kb(cli.kb_path);
    ordered_json stats;
    stats["entities"] = kb.entity_count();
    stats["relations"] = kb.relation_count();
    stats["date_relations"] = kb.date_relations().size();
    stats["qualifier_relations"] = kb.qualifier_relations().size();
    stats["statements"] = kb.statement_count();
    if (!cli.out_dir.empty()) {
        ensure_out_dir(cli.out_dir);
        write_text(cli.out_dir + "/kb_stats.json", stats.dump(1) + "\n");
        write_manifest(cli.out_dir + "/manifest.json", "ingest-kb", cfg, {cli.kb_path});
    } else {
        stats["manifest"] = manifest_json("ingest-kb", cfg, {cli.kb_path});
    }
    std::cout << stats.dump(1) << "\n";
    return 0;
}

ordered_json supervision_stats_json(const WeakSupervisionStats& s) {
    ordered_json j;
    j["questions"] = s.total_questions;
    j["kept"] = s.kept_questions;
    j["dropped_no_positive"] = s.dropped_questions;
    j["truncated"] = s.truncated_questions;
    j["positive_graphs"] = s.positive_graphs;
    j["negative_graphs"] = s.negative_graphs;
    return j;
}

int cmd_gen_train(const Cli& cli, const CLI::App* cmd) {
    const RunConfig cfg = effective_config(cli, cmd, nullptr);
    const KnowledgeBase kb = load_kb(cli.kb_path);
    const std::vector<LinkedQuestion> data = load_dataset(cli.data_path);
    const WeakSupervision ws = generate_weak_supervision(
        data, kb, construct_options(cfg), cfg.positive_f_threshold, cfg.max_states);

    ordered_json stats = supervision_stats_json(ws.stats);
    if (!cli.out_dir.empty()) {
        ensure_out_dir(cli.out_dir);
        std::ofstream inst(cli.out_dir + "/instances.jsonl", std::ios::binary);
        if (!inst) throw Error("cannot write instances.jsonl");
        for (const TrainingInstance& ti : ws.instances) {
            ordered_json j;
            j["id"] = ti.question.id;
            j["positives"] = ordered_json::array();
            for (const SemanticGraph& g : ti.positives) j["positives"].push_back(canonical_form(g));
            j["negatives"] = ordered_json::array();
            for (const SemanticGraph& g : ti.negatives) j["negatives"].push_back(canonical_form(g));
            inst << j.dump() << "\n";
        }
        write_text(cli.out_dir + "/stats.json", stats.dump(1) + "\n");
        write_manifest(cli.out_dir + "/manifest.json", "gen-train", cfg,
                       {cli.kb_path, cli.data_path});
    } else {
        stats["manifest"] = manifest_json("gen-train", cfg, {cli.kb_path, cli.data_path});
    }
    std::cout << stats.dump(1) << "\n";
    return 0;
}

template <typename T>
ordered_json run_train(const RunConfig& cfg, const KnowledgeBase& kb, const EmbeddingTable& emb,
                       const std::vector<LinkedQuestion>& data, const std::string& out_dir) {
    const WeakSupervision ws = generate_weak_supervision(
        data, kb, construct_options(cfg), cfg.positive_f_threshold, cfg.max_states);
    if (ws.instances.empty()) throw Error("no trainable questions after weak supervision");
    std::vector<TrainingInstance> train_set, dev_set;
    split_dev(ws.instances, cfg.dev_fraction, cfg.seed, train_set, dev_set);
    if (train_set.empty()) std::swap(train_set, dev_set);

    Scorer<T> scorer(parse_model_kind(cfg.model), model_config(cfg), &emb);
    Rng rng(cfg.seed);
    scorer.init_params(rng);

    std::ofstream log(out_dir + "/train_log.jsonl", std::ios::binary);
    if (!log) throw Error("cannot write train_log.jsonl");
    const TrainResult res =
        train(scorer, train_set, dev_set, kb, make_train_config(cfg), config_to_map(cfg), &log);
    save_checkpoint(res.best, out_dir + "/checkpoint.json");

    ordered_json summary;
    summary["supervision"] = supervision_stats_json(ws.stats);
    summary["train_questions"] = train_set.size();
    summary["dev_questions"] = dev_set.size();
    summary["epochs"] = res.log.size();
    summary["best_epoch"] = res.best_epoch;
    summary["best_dev_F"] = res.best_dev_f;
    summary["checkpoint"] = out_dir + "/checkpoint.json";
    return summary;
}

int cmd_train(const Cli& cli, const CLI::App* cmd) {
    const RunConfig cfg = effective_config(cli, cmd, nullptr);
    ensure_out_dir(cli.out_dir);
    const KnowledgeBase kb = load_kb(cli.kb_path);
    const EmbeddingTable emb = EmbeddingTable::load(cli.embeddings_path);
    const std::vector<LinkedQuestion> data = load_dataset(cli.data_path);
    ordered_json summary = cfg.f64 ? run_train<double>(cfg, kb, emb, data, cli.out_dir)
                                   : run_train<float>(cfg, kb, emb, data, cli.out_dir);
    write_manifest(cli.out_dir + "/manifest.json", "train", cfg,
                   {cli.kb_path, cli.embeddings_path, cli.data_path});
    std::cout << summary.dump(1) << "\n";
    return 0;
}

template <typename T>
Scorer<T> restore_scorer(const RunConfig& cfg, const EmbeddingTable& emb, const Checkpoint& ckpt) {
    Scorer<T> scorer(parse_model_kind(cfg.model), model_config(cfg), &emb);
    Rng rng(cfg.seed);
    scorer.init_params(rng);
    apply_checkpoint(ckpt, scorer.params());
    return scorer;
}

template <typename T>
Prediction answer_question(const RunConfig& cfg, const KnowledgeBase& kb,
                           const EmbeddingTable& emb, const Checkpoint& ckpt,
                           const LinkedQuestion& q) {
    Scorer<T> scorer = restore_scorer<T>(cfg, emb, ckpt);
    return beam_search_parse(q, kb, scorer, cfg.beam, construct_options(cfg));
}

int cmd_answer(const Cli& cli, const CLI::App* cmd) {
    const Checkpoint ckpt = load_checkpoint(cli.checkpoint_path);
    const RunConfig cfg = effective_config(cli, cmd, &ckpt);
    const KnowledgeBase kb = load_kb(cli.kb_path);
    const EmbeddingTable emb = EmbeddingTable::load(cli.embeddings_path);

    LinkedQuestion q;
    q.id = "cli";
    q.utterance = cli.question;
    q.tokens = tokenize(cli.question);
    q.entities = parse_entity_csv(cli.entities_csv);

    const Prediction pred = cfg.f64 ? answer_question<double>(cfg, kb, emb, ckpt, q)
                                    : answer_question<float>(cfg, kb, emb, ckpt, q);
    ordered_json out = prediction_json(pred, kb);
    const std::vector<std::string> inputs = {cli.kb_path, cli.embeddings_path,
                                             cli.checkpoint_path};
    if (!cli.out_dir.empty()) {
        ensure_out_dir(cli.out_dir);
        write_text(cli.out_dir + "/prediction.jsonl", prediction_to_json_line(pred) + "\n");
        write_manifest(cli.out_dir + "/manifest.json", "answer", cfg, inputs);
    } else {
        out["manifest"] = manifest_json("answer", cfg, inputs);
    }
    std::cout << out.dump(1) << "\n";
    return 0;
}

template <typename T>
EvalReport run_eval(const RunConfig& cfg, const KnowledgeBase& kb, const EmbeddingTable& emb,
                    const Checkpoint& ckpt, const std::vector<LinkedQuestion>& data,
                    std::vector<std::string>& prediction_lines) {
    Scorer<T> scorer = restore_scorer<T>(cfg, emb, ckpt);
    std::map<std::string, Prediction> preds;
    for (const LinkedQuestion& q : data) {
        Prediction p = beam_search_parse(q, kb, scorer, cfg.beam, construct_options(cfg));
        prediction_lines.push_back(prediction_to_json_line(p));
        preds.emplace(q.id, std::move(p));
    }
    return evaluate(data, preds, kb);
}

// Rebuilds answer records from a prediction dump produced by `eval`/`answer`.
std::map<std::string, AnswerRecord> load_prediction_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open predictions '" + path + "'");
    std::map<std::string, AnswerRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ": " + e.what(), line_no);
        }
        AnswerRecord rec;
        for (const auto& a : j.at("answers")) rec.answers.insert(EntityId{a.get<std::string>()});
        for (const auto& t : j.at("topk")) {
            std::set<EntityId> answers;
            for (const auto& a : t.at("answers")) answers.insert(EntityId{a.get<std::string>()});
            rec.topk_answers.push_back(std::move(answers));
        }
        records[j.at("id").get<std::string>()] = std::move(rec);
    }
    return records;
}

int cmd_eval(const Cli& cli, const CLI::App* cmd) {
    const std::vector<LinkedQuestion> data = load_dataset(cli.data_path);
    EvalReport report;
    RunConfig cfg;
    std::vector<std::string> inputs = {cli.data_path};
    std::vector<std::string> prediction_lines;

    if (!cli.predictions_path.empty()) {
        if (!cli.checkpoint_path.empty())
            throw Error("pass either --checkpoint or --predictions, not both");
        cfg = effective_config(cli, cmd, nullptr);
        report = evaluate_answers(data, load_prediction_records(cli.predictions_path));
        inputs.push_back(cli.predictions_path);
    } else {
        if (cli.checkpoint_path.empty())
            throw Error("eval needs --checkpoint (or a --predictions dump)");
        const Checkpoint ckpt = load_checkpoint(cli.checkpoint_path);
        cfg = effective_config(cli, cmd, &ckpt);
        const KnowledgeBase kb = load_kb(cli.kb_path);
        const EmbeddingTable emb = EmbeddingTable::load(cli.embeddings_path);
        report = cfg.f64 ? run_eval<double>(cfg, kb, emb, ckpt, data, prediction_lines)
                         : run_eval<float>(cfg, kb, emb, ckpt, data, prediction_lines);
        inputs.insert(inputs.end(), {cli.kb_path, cli.embeddings_path, cli.checkpoint_path});
    }

    ordered_json rj = report_to_json(report);
    if (!cli.out_dir.empty()) {
        ensure_out_dir(cli.out_dir);
        write_text(cli.out_dir + "/report.json", rj.dump(1) + "\n");
        write_text(cli.out_dir + "/breakdown.csv", report_breakdown_csv(report));
        if (!prediction_lines.empty()) {
            std::string dump;
            for (const std::string& l : prediction_lines) dump += l + "\n";
            write_text(cli.out_dir + "/predictions.jsonl", dump);
        }
        write_manifest(cli.out_dir + "/manifest.json", "eval", cfg, inputs);
    } else {
        rj["manifest"] = manifest_json("eval", cfg, inputs);
    }
    std::cout << rj.dump(1) << "\n";
    return 0;
}

// Self-contained KB exercising every structural feature: a date-valued
// relation for argmin/argmax sorting and a statement qualifier.
const char* kGradcheckKb = R"(
{"type":"entity","id":"e1","label":"river song"}
{"type":"entity","id":"e2","label":"blue album"}
{"type":"entity","id":"e3","label":"red album"}
{"type":"entity","id":"e4","label":"lead role"}
{"type":"relation","id":"performer","label":"performer"}
{"type":"relation","id":"instance_of","label":"instance of"}
{"type":"relation","id":"pub_date","label":"publication date","date_valued":true}
{"type":"relation","id":"role","label":"role"}
{"type":"statement","rel":"performer","subj":"e2","obj":"e1","qualifiers":[{"rel":"role","val":"e4"}]}
{"type":"statement","rel":"performer","subj":"e3","obj":"e1"}
{"type":"statement","rel":"instance_of","subj":"e2","obj":"e3"}
{"type":"statement","rel":"pub_date","subj":"e2","obj":{"date":"2001-05-01"}}
{"type":"statement","rel":"pub_date","subj":"e3","obj":{"date":"2004-07-09"}}
)";

int cmd_gradcheck(const Cli& cli, const CLI::App* cmd) {
    const RunConfig cfg = effective_config(cli, cmd, nullptr);
    std::istringstream kb_in(kGradcheckKb);
    const KnowledgeBase kb = load_kb(kb_in, "gradcheck");

    std::vector<std::string> vocab;
    for (const auto& e : kb.entities())
        for (const std::string& t : tokenize(e.label)) vocab.push_back(t);
    for (const auto& r : kb.relations())
        for (const std::string& t : tokenize(r.label)) vocab.push_back(t);
    const std::vector<std::string> question1 = {"what", "was", "the", "first",
                                                "river", "song", "album"};
    const std::vector<std::string> question2 = {"who", "performed", "the", "blue", "album"};
    for (const auto& q : {question1, question2})
        for (const std::string& t : q) vocab.push_back(t);
    const EmbeddingTable emb = EmbeddingTable::random(vocab, 16, cfg.seed);

    ModelConfig mc = model_config(cfg);
    mc.hidden_size = 12;
    mc.cnn_filters = 6;
    mc.steps = 2;
    mc.dropout = 0.0;
    Scorer<double> scorer(parse_model_kind(cfg.model), mc, &emb);
    Rng rng(cfg.seed);
    scorer.init_params(rng);

    SemanticGraph g1;
    g1.edges.push_back({RelationId{"performer"}, QVar{}, Grounded{EntityId{"e1"}}, {}});
    SemanticGraph g2;
    g2.edges.push_back({RelationId{"performer"}, QVar{}, Grounded{EntityId{"e1"}},
                        EdgeQualifier{RelationId{"role"}, Grounded{EntityId{"e4"}}}});
    g2.edges.push_back({RelationId{"instance_of"}, QVar{}, Grounded{EntityId{"e3"}}, {}});
    SemanticGraph g3 = g2;
    g3.edges.push_back({RelationId{"pub_date"}, QVar{}, SortNode{SortKind::ArgMin}, {}});

    // sum of rewards over structurally distinct pairs, so a dead ReLU on one
    // path cannot flatten the whole objective
    auto loss = [&](Tape<double>& tape) {
        auto total = scorer.score(tape, question1, g1, kb, false, nullptr);
        total = tape.add(total, scorer.score(tape, question2, g2, kb, false, nullptr));
        return tape.add(total, scorer.score(tape, question1, g3, kb, false, nullptr));
    };
    Rng coord_rng(seed_mix(cfg.seed, 0x9c, 0));
    const GradCheckResult res = grad_check(scorer.params(), loss, 24, coord_rng);

    ordered_json out;
    out["model"] = cfg.model;
    out["coords_checked"] = res.coords_checked;
    out["max_rel_err"] = res.max_rel_err;
    out["worst_coord"] = res.worst_coord;
    out["tolerance"] = 1e-4;
    out["pass"] = res.pass(1e-4);
    if (!cli.out_dir.empty()) {
        ensure_out_dir(cli.out_dir);
        write_text(cli.out_dir + "/gradcheck.json", out.dump(1) + "\n");
        write_manifest(cli.out_dir + "/manifest.json", "gradcheck", cfg, {});
    } else {
        out["manifest"] = manifest_json("gradcheck", cfg, {});
    }
    std::cout << out.dump(1) << "\n";
    return res.pass(1e-4) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-base question answering over semantic graphs"};
    app.require_subcommand(1);
    Cli cli;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", cli.config_path, "key=value config file");
        cmd->add_option("--model", cli.model, "single|pooled|gnn|ggnn");
        cmd->add_option("--beam", cli.beam, "beam width");
        cmd->add_option("--seed", cli.seed, "master random seed");
        cmd->add_option("--threads", cli.threads, "worker thread cap");
        cmd->add_flag("--f32", cli.f32, "32-bit parameters");
        cmd->add_flag("--f64", cli.f64, "64-bit parameters");
        cmd->add_option("--out", cli.out_dir, "output directory");
        return cmd;
    };

    CLI::App* ingest = add_common(app.add_subcommand("ingest-kb", "Load and validate a KB file"));
    ingest->add_option("--kb", cli.kb_path, "KB JSONL file")->required();

    CLI::App* gen = add_common(
        app.add_subcommand("gen-train", "Generate weak-supervision training instances"));
    gen->add_option("--kb", cli.kb_path, "KB JSONL file")->required();
    gen->add_option("--data", cli.data_path, "question dataset JSONL")->required();

    CLI::App* tr = add_common(app.add_subcommand("train", "Train a scoring model"));
    tr->add_option("--kb", cli.kb_path, "KB JSONL file")->required();
    tr->add_option("--embeddings", cli.embeddings_path, "word embedding text file")->required();
    tr->add_option("--data", cli.data_path, "question dataset JSONL")->required();
    tr->get_option("--out")->required();

    CLI::App* ans = add_common(app.add_subcommand("answer", "Answer a single question"));
    ans->add_option("--kb", cli.kb_path, "KB JSONL file")->required();
    ans->add_option("--embeddings", cli.embeddings_path, "word embedding text file")->required();
    ans->add_option("--checkpoint", cli.checkpoint_path, "model checkpoint")->required();
    ans->add_option("--question", cli.question, "question text")->required();
    ans->add_option("--entities", cli.entities_csv, "comma-separated linked entity ids");

    CLI::App* ev = add_common(app.add_subcommand("eval", "Evaluate on a dataset"));
    ev->add_option("--kb", cli.kb_path, "KB JSONL file");
    ev->add_option("--embeddings", cli.embeddings_path, "word embedding text file");
    ev->add_option("--checkpoint", cli.checkpoint_path, "model checkpoint");
    ev->add_option("--predictions", cli.predictions_path, "existing prediction dump to score");
    ev->add_option("--data", cli.data_path, "question dataset JSONL")->required();

    CLI::App* gc = add_common(app.add_subcommand("gradcheck", "Finite-difference gradient check"));
    (void)gc;

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(ingest)) return cmd_ingest_kb(cli, ingest);
        if (app.got_subcommand(gen)) return cmd_gen_train(cli, gen);
        if (app.got_subcommand(tr)) return cmd_train(cli, tr);
        if (app.got_subcommand(ans)) return cmd_answer(cli, ans);
        if (app.got_subcommand(ev)) return cmd_eval(cli, ev);
        if (app.got_subcommand(gc)) return cmd_gradcheck(cli, gc);
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 1;
}
