#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace seqlab {

// Writes an SVG with two horizontal ribbons: ground truth above prediction,
// one color per class plus a legend; masked frames render gray.
void render_ribbons(const std::vector<int>& truth, const std::vector<int>& pred,
                    const std::vector<uint8_t>& mask,
                    const std::vector<std::string>& class_names, const std::string& out_path);

}  // namespace seqlab
