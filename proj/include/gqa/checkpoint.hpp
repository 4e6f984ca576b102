#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gqa/error.hpp"
#include "gqa/params.hpp"

namespace gqa {

inline constexpr int kCheckpointVersion = 1;

// Model checkpoint: {version, config, params:[{name, shape, values}]}.
// Serialization uses insertion-ordered JSON and shortest-round-trip doubles,
// so identical parameters produce byte-identical files.
struct Checkpoint {
    int version = kCheckpointVersion;
    std::map<std::string, std::string> config;
    struct Entry {
        std::string name;
        std::vector<size_t> shape;
        std::vector<double> values;
    };
    std::vector<Entry> params;
};

template <typename T>
Checkpoint make_checkpoint(const ParamStore<T>& store,
                           const std::map<std::string, std::string>& config) {
    Checkpoint ckpt;
    ckpt.config = config;
    for (size_t i = 0; i < store.size(); ++i) {
        const Parameter<T>& p = store.at(i);
        Checkpoint::Entry e;
        e.name = p.name;
        e.shape = p.value.shape;
        e.values.reserve(p.value.size());
        for (const T& x : p.value.data) e.values.push_back(static_cast<double>(x));
        ckpt.params.push_back(std::move(e));
    }
    return ckpt;
}

// Copies checkpoint values into an already-created store; names, order and
// shapes must match exactly.
template <typename T>
void apply_checkpoint(const Checkpoint& ckpt, ParamStore<T>& store) {
    if (ckpt.params.size() != store.size())
        throw Error("checkpoint has " + std::to_string(ckpt.params.size()) +
                    " parameters, model expects " + std::to_string(store.size()));
    for (size_t i = 0; i < store.size(); ++i) {
        Parameter<T>& p = store.at(i);
        const Checkpoint::Entry& e = ckpt.params[i];
        if (e.name != p.name)
            throw Error("checkpoint parameter '" + e.name + "' where model expects '" + p.name +
                        "'");
        if (e.shape != p.value.shape)
            throw ShapeError("checkpoint parameter '" + e.name + "' has shape " +
                             shape_string(e.shape) + ", model expects " +
                             shape_string(p.value.shape));
        for (size_t j = 0; j < e.values.size(); ++j) p.value.data[j] = static_cast<T>(e.values[j]);
    }
}

inline nlohmann::ordered_json checkpoint_to_json(const Checkpoint& ckpt) {
    nlohmann::ordered_json j;
    j["version"] = ckpt.version;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : ckpt.config) j["config"][k] = v;
    j["params"] = nlohmann::ordered_json::array();
    for (const auto& e : ckpt.params) {
        nlohmann::ordered_json pj;
        pj["name"] = e.name;
        pj["shape"] = e.shape;
        pj["values"] = e.values;
        j["params"].push_back(std::move(pj));
    }
    return j;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint '" + path + "'");
    out << checkpoint_to_json(ckpt).dump(1) << '\n';
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("bad checkpoint JSON: ") + ex.what(), 0);
    }
    Checkpoint ckpt;
    try {
        ckpt.version = j.at("version").get<int>();
        if (ckpt.version != kCheckpointVersion)
            throw Error("unsupported checkpoint version " + std::to_string(ckpt.version));
        for (const auto& [k, v] : j.at("config").items())
            ckpt.config[k] = v.get<std::string>();
        for (const auto& pj : j.at("params")) {
            Checkpoint::Entry e;
            e.name = pj.at("name").get<std::string>();
            e.shape = pj.at("shape").get<std::vector<size_t>>();
            e.values = pj.at("values").get<std::vector<double>>();
            if (e.values.size() != [&] {
                    size_t n = 1;
                    for (size_t d : e.shape) n *= d;
                    return n;
                }())
                throw Error("checkpoint parameter '" + e.name + "' value count does not match shape");
            ckpt.params.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("bad checkpoint structure: ") + ex.what(), 0);
    }
    return ckpt;
}

}  // namespace gqa
