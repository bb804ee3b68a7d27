#pragma once

#include <map>
#include <string>
#include <vector>

#include "seqlab/training.hpp"

namespace seqlab {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Effective run configuration with per-key provenance. Precedence:
// defaults, then config file, then command-line flags.
struct RunConfig {
    TrainingConfig train;
    std::string data_root;  // seeded from SEQLAB_DATA_ROOT when set
    int decimation = 1;
    bool standardize = true;

    std::map<std::string, std::string> source;  // key -> default|file|flag

    RunConfig();
    void apply_file(const std::string& path);
    void set(const std::string& key, const std::string& value, const std::string& origin);
    // one "config key=value source=..." line per effective hyperparameter
    std::string provenance_log() const;
};

// key = value lines, '#' comments.
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace seqlab
