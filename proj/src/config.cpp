#include "seqlab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace seqlab {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + " line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

RunConfig::RunConfig() {
    const char* env = std::getenv("SEQLAB_DATA_ROOT");
    if (env) {
        data_root = env;
        source["data_root"] = "env";
    }
    for (const char* k : {"learning_rate", "epochs", "halve_after", "halve_every", "batch_size",
                          "dropout", "hidden", "layers", "cell", "mode", "seed", "grad_clip",
                          "init_scale", "decimation", "standardize"})
        source.emplace(k, "default");
    source.emplace("data_root", "default");
}

void RunConfig::set(const std::string& key, const std::string& value, const std::string& origin) {
    try {
        if (key == "learning_rate")
            train.learning_rate = std::stod(value);
        else if (key == "epochs")
            train.epochs = std::stoi(value);
        else if (key == "halve_after")
            train.halve_after = std::stoi(value);
        else if (key == "halve_every")
            train.halve_every = std::stoi(value);
        else if (key == "batch_size")
            train.batch_size = std::stoi(value);
        else if (key == "dropout")
            train.dropout_p = std::stod(value);
        else if (key == "hidden")
            train.hidden = std::stoi(value);
        else if (key == "layers")
            train.layers = std::stoi(value);
        else if (key == "cell")
            train.cell = cell_kind_from_string(value);
        else if (key == "mode")
            train.mode = direction_from_string(value);
        else if (key == "seed")
            train.seed = std::stoull(value);
        else if (key == "grad_clip")
            train.grad_clip = std::stod(value);
        else if (key == "init_scale")
            train.init_scale = std::stod(value);
        else if (key == "decimation")
            decimation = std::stoi(value);
        else if (key == "standardize")
            standardize = value == "true" || value == "1" || value == "yes";
        else if (key == "data_root")
            data_root = value;
        else
            throw ConfigError("unknown config key: " + key);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("bad value for " + key + ": '" + value + "'");
    }
    source[key] = origin;
}

void RunConfig::apply_file(const std::string& path) {
    for (auto& [k, v] : parse_config_file(path)) set(k, v, "file");
}

std::string RunConfig::provenance_log() const {
    std::ostringstream os;
    os.precision(17);
    auto line = [&](const std::string& k, const std::string& v) {
        auto it = source.find(k);
        os << "config " << k << "=" << v << " source=" << (it != source.end() ? it->second : "default")
           << "\n";
    };
    std::ostringstream tmp;
    auto num = [&](auto v) {
        std::ostringstream t;
        t.precision(17);
        t << v;
        return t.str();
    };
    line("cell", to_string(train.cell));
    line("mode", to_string(train.mode));
    line("hidden", num(train.hidden));
    line("layers", num(train.layers));
    line("epochs", num(train.epochs));
    line("halve_after", num(train.halve_after));
    line("halve_every", num(train.halve_every));
    line("batch_size", num(train.batch_size));
    line("learning_rate", num(train.learning_rate));
    line("dropout", num(train.dropout_p));
    line("seed", num(train.seed));
    line("grad_clip", train.grad_clip ? num(*train.grad_clip) : "none");
    line("init_scale", num(train.init_scale));
    line("decimation", num(decimation));
    line("standardize", standardize ? "true" : "false");
    line("data_root", data_root.empty() ? "(unset)" : data_root);
    return os.str();
}

}  // namespace seqlab
