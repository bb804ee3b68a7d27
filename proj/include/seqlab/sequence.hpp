#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqlab/numeric.hpp"

namespace seqlab {

// One trial: per-frame kinematic inputs with per-frame labels. mask[t] is
// true where a ground-truth label exists; unlabeled frames carry label -1.
struct Sequence {
    std::string trial_id;
    std::string user_id;
    std::vector<Vec> inputs;
    std::vector<int> labels;
    std::vector<uint8_t> mask;

    int length() const { return static_cast<int>(inputs.size()); }
};

}  // namespace seqlab
