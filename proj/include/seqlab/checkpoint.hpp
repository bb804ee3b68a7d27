#pragma once

#include <string>
#include <vector>

#include "seqlab/model.hpp"

namespace seqlab {

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

// On-disk model container. Binary layout: magic "SEQLABV1", version byte,
// length-prefixed key=value header, then named parameter tensors as
// little-endian 64-bit reals with explicit shapes. Writes go to a temp file
// followed by an atomic rename, so a partial checkpoint never lands at the
// target path.
struct Checkpoint {
    Model model;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
    Vec norm_mean, norm_std;  // empty when standardization was off
    int decimation = 1;
    uint64_t seed = 0;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace seqlab
