#include "gqa/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gqa/error.hpp"
#include "gqa/rng.hpp"

namespace gqa {

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for digest");
    uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(std::string_view(buf, static_cast<size_t>(in.gcount())), h);
    std::ostringstream ss;
    ss << std::hex;
    ss.width(16);
    ss.fill('0');
    ss << h;
    return ss.str();
}

nlohmann::ordered_json manifest_json(const std::string& command, const RunConfig& cfg,
                                     const std::vector<std::string>& input_paths) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config_to_map(cfg)) j["config"][k] = v;
    j["inputs"] = nlohmann::ordered_json::object();
    for (const std::string& p : input_paths) j["inputs"][p] = file_digest(p);
    return j;
}

void write_manifest(const std::string& path, const std::string& command, const RunConfig& cfg,
                    const std::vector<std::string>& input_paths) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest '" + path + "'");
    out << manifest_json(command, cfg, input_paths).dump(1) << '\n';
}

}  // namespace gqa
