#include "gqa/config.hpp"

#include <fstream>
#include <sstream>

#include "gqa/error.hpp"
#include "gqa/rng.hpp"

namespace gqa {

std::string format_double(double x) {
    std::ostringstream ss;
    ss.precision(17);
    ss << x;
    return ss.str();
}

namespace {

size_t parse_size(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size() || v < 0) throw std::invalid_argument("range");
        return static_cast<size_t>(v);
    } catch (const std::exception&) {
        throw Error("config key '" + key + "' needs a non-negative integer, got '" + value + "'");
    }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("range");
        return v;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "' needs an unsigned integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("range");
        return v;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "' needs a number, got '" + value + "'");
    }
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "model") {
        parse_model_kind(value);  // validates
        cfg.model = value;
    } else if (key == "hidden_size") {
        cfg.hidden_size = parse_size(key, value);
    } else if (key == "cnn_layers") {
        cfg.cnn_layers = parse_size(key, value);
    } else if (key == "cnn_filters") {
        cfg.cnn_filters = parse_size(key, value);
    } else if (key == "kernel") {
        cfg.kernel = parse_size(key, value);
    } else if (key == "pooling") {
        if (value != "max" && value != "avg")
            throw Error("config key 'pooling' must be max or avg, got '" + value + "'");
        cfg.pooling = value;
    } else if (key == "T") {
        cfg.steps = parse_size(key, value);
    } else if (key == "dropout") {
        cfg.dropout = parse_double(key, value);
        if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
            throw Error("config key 'dropout' must lie in [0,1)");
    } else if (key == "margin") {
        cfg.margin = parse_double(key, value);
        if (cfg.margin <= 0.0) throw Error("config key 'margin' must be positive");
    } else if (key == "batch_size") {
        cfg.batch_size = parse_size(key, value);
        if (cfg.batch_size == 0) throw Error("config key 'batch_size' must be at least 1");
    } else if (key == "lr") {
        cfg.lr = parse_double(key, value);
    } else if (key == "beta1") {
        cfg.beta1 = parse_double(key, value);
    } else if (key == "beta2") {
        cfg.beta2 = parse_double(key, value);
    } else if (key == "eps") {
        cfg.eps = parse_double(key, value);
    } else if (key == "max_negatives") {
        cfg.max_negatives = parse_size(key, value);
    } else if (key == "patience") {
        cfg.patience = parse_size(key, value);
    } else if (key == "max_epochs") {
        cfg.max_epochs = parse_size(key, value);
    } else if (key == "dev_fraction") {
        cfg.dev_fraction = parse_double(key, value);
        if (cfg.dev_fraction < 0.0 || cfg.dev_fraction >= 1.0)
            throw Error("config key 'dev_fraction' must lie in [0,1)");
    } else if (key == "positive_f_threshold") {
        cfg.positive_f_threshold = parse_double(key, value);
        if (cfg.positive_f_threshold <= 0.0 || cfg.positive_f_threshold > 1.0)
            throw Error("config key 'positive_f_threshold' must lie in (0,1]");
    } else if (key == "max_edges") {
        cfg.max_edges = parse_size(key, value);
        if (cfg.max_edges == 0) throw Error("config key 'max_edges' must be at least 1");
    } else if (key == "two_step_cap") {
        cfg.two_step_cap = parse_size(key, value);
    } else if (key == "max_states") {
        cfg.max_states = parse_size(key, value);
    } else if (key == "beam") {
        cfg.beam = parse_size(key, value);
        if (cfg.beam == 0) throw Error("config key 'beam' must be at least 1");
    } else if (key == "seed") {
        cfg.seed = parse_u64(key, value);
    } else if (key == "threads") {
        cfg.threads = parse_size(key, value);
        if (cfg.threads == 0) throw Error("config key 'threads' must be at least 1");
    } else if (key == "precision") {
        if (value == "f32")
            cfg.f64 = false;
        else if (value == "f64")
            cfg.f64 = true;
        else
            throw Error("config key 'precision' must be f32 or f64, got '" + value + "'");
    } else {
        throw Error("unknown config key '" + key + "'");
    }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string entry = trim(line);
        if (entry.empty()) continue;
        const size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line is not key=value: '" + entry + "'", lineno);
        const std::string key = trim(entry.substr(0, eq));
        const std::string value = trim(entry.substr(eq + 1));
        if (key.empty()) throw ParseError("empty config key", lineno);
        try {
            apply_config_entry(cfg, key, value);
        } catch (const Error& e) {
            throw ParseError(e.what(), lineno);
        }
    }
}

std::map<std::string, std::string> config_to_map(const RunConfig& cfg) {
    std::map<std::string, std::string> m;
    m["model"] = cfg.model;
    m["hidden_size"] = std::to_string(cfg.hidden_size);
    m["cnn_layers"] = std::to_string(cfg.cnn_layers);
    m["cnn_filters"] = std::to_string(cfg.cnn_filters);
    m["kernel"] = std::to_string(cfg.kernel);
    m["pooling"] = cfg.pooling;
    m["T"] = std::to_string(cfg.steps);
    m["dropout"] = format_double(cfg.dropout);
    m["margin"] = format_double(cfg.margin);
    m["batch_size"] = std::to_string(cfg.batch_size);
    m["lr"] = format_double(cfg.lr);
    m["beta1"] = format_double(cfg.beta1);
    m["beta2"] = format_double(cfg.beta2);
    m["eps"] = format_double(cfg.eps);
    m["max_negatives"] = std::to_string(cfg.max_negatives);
    m["patience"] = std::to_string(cfg.patience);
    m["max_epochs"] = std::to_string(cfg.max_epochs);
    m["dev_fraction"] = format_double(cfg.dev_fraction);
    m["positive_f_threshold"] = format_double(cfg.positive_f_threshold);
    m["max_edges"] = std::to_string(cfg.max_edges);
    m["two_step_cap"] = std::to_string(cfg.two_step_cap);
    m["max_states"] = std::to_string(cfg.max_states);
    m["beam"] = std::to_string(cfg.beam);
    m["seed"] = std::to_string(cfg.seed);
    m["threads"] = std::to_string(cfg.threads);
    m["precision"] = cfg.f64 ? "f64" : "f32";
    return m;
}

std::string config_hash(const RunConfig& cfg) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [k, v] : config_to_map(cfg)) {
        h = fnv1a64(k, h);
        h = fnv1a64("=", h);
        h = fnv1a64(v, h);
        h = fnv1a64("\n", h);
    }
    std::ostringstream ss;
    ss << std::hex;
    ss.width(16);
    ss.fill('0');
    ss << h;
    return ss.str();
}

ModelConfig model_config(const RunConfig& cfg) {
    ModelConfig mc;
    mc.hidden_size = cfg.hidden_size;
    mc.cnn_layers = cfg.cnn_layers;
    mc.cnn_filters = cfg.cnn_filters;
    mc.kernel = cfg.kernel;
    mc.pooling = cfg.pooling == "avg" ? Pooling::Avg : Pooling::Max;
    mc.steps = cfg.steps;
    mc.dropout = cfg.dropout;
    return mc;
}

ConstructOptions construct_options(const RunConfig& cfg) {
    ConstructOptions opts;
    opts.max_edges = cfg.max_edges;
    opts.two_step_cap = cfg.two_step_cap;
    return opts;
}

AdamConfig adam_config(const RunConfig& cfg) {
    AdamConfig ac;
    ac.lr = cfg.lr;
    ac.beta1 = cfg.beta1;
    ac.beta2 = cfg.beta2;
    ac.eps = cfg.eps;
    return ac;
}

}  // namespace gqa
