#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "gqa/construct.hpp"
#include "gqa/encoders.hpp"
#include "gqa/params.hpp"

namespace gqa {

// Every tunable of a run, with the published defaults. Values come from an
// optional key=value config file, then command-line flags override.
struct RunConfig {
    std::string model = "ggnn";

    // encoder hyper-parameters
    size_t hidden_size = 256;
    size_t cnn_layers = 2;
    size_t cnn_filters = 256;
    size_t kernel = 3;
    std::string pooling = "max";
    size_t steps = 5;  // key "T"
    double dropout = 0.2;

    // training
    double margin = 0.5;
    size_t batch_size = 64;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    size_t max_negatives = 100;
    size_t patience = 5;
    size_t max_epochs = 50;
    double dev_fraction = 0.24;
    // A generated graph counts as positive when its answer F-score reaches
    // this threshold (1.0 = exact match).
    double positive_f_threshold = 1.0;

    // construction bounds
    size_t max_edges = 4;
    size_t two_step_cap = 100;
    size_t max_states = 200000;

    // inference / run control
    size_t beam = 10;
    uint64_t seed = 1;
    size_t threads = 1;
    bool f64 = false;
};

// Applies one key=value setting; throws Error on unknown keys or bad values.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// key=value file, one entry per line, '#' comments and blank lines ignored.
void load_config_file(RunConfig& cfg, const std::string& path);

// Canonical flat rendering: every key in fixed order. Feeds config hashing,
// manifests and checkpoint metadata.
std::map<std::string, std::string> config_to_map(const RunConfig& cfg);

// FNV-1a over the canonical rendering, as zero-padded hex.
std::string config_hash(const RunConfig& cfg);

ModelConfig model_config(const RunConfig& cfg);
ConstructOptions construct_options(const RunConfig& cfg);
AdamConfig adam_config(const RunConfig& cfg);

std::string format_double(double x);

}  // namespace gqa
