#include "seqlab/render.hpp"

#include <fstream>

#include "seqlab/numeric.hpp"

namespace seqlab {

namespace {

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#edc948",
                          "#76b7b2", "#ff9da7", "#9c755f", "#bab0ac", "#1170aa", "#a3cce9"};
constexpr int kPaletteSize = 12;
const char* kMaskColor = "#d0d0d0";

// emit one ribbon as per-run rectangles
void ribbon(std::ofstream& os, const std::vector<int>& labels, const std::vector<uint8_t>& mask,
            double x0, double y0, double width, double height) {
    const int T = static_cast<int>(labels.size());
    const double px = width / T;
    int start = 0;
    auto key = [&](int t) { return mask[t] ? labels[t] : -1; };
    for (int t = 1; t <= T; ++t) {
        if (t == T || key(t) != key(start)) {
            const char* color = key(start) < 0 ? kMaskColor : kPalette[key(start) % kPaletteSize];
            os << "  <rect x=\"" << x0 + start * px << "\" y=\"" << y0 << "\" width=\""
               << (t - start) * px << "\" height=\"" << height << "\" fill=\"" << color
               << "\"/>\n";
            start = t;
        }
    }
}

}  // namespace

void render_ribbons(const std::vector<int>& truth, const std::vector<int>& pred,
                    const std::vector<uint8_t>& mask,
                    const std::vector<std::string>& class_names, const std::string& out_path) {
    if (truth.size() != pred.size() || mask.size() != truth.size())
        throw ContractError("render_ribbons: prediction and truth tracks differ in length (" +
                            std::to_string(pred.size()) + " vs " + std::to_string(truth.size()) +
                            ")");
    if (truth.empty()) throw ContractError("render_ribbons: empty tracks");

    const double W = 800, band = 40, gap = 14, label_w = 70;
    const int n_classes = static_cast<int>(class_names.size());
    const double legend_h = 24.0 * ((n_classes + 3) / 4 + 1);
    const double H = 2 * band + 3 * gap + legend_h;

    std::ofstream os(out_path);
    if (!os) throw ContractError("render_ribbons: cannot write " + out_path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + label_w + 20
       << "\" height=\"" << H << "\" viewBox=\"0 0 " << W + label_w + 20 << " " << H << "\">\n";
    os << "  <text x=\"4\" y=\"" << gap + band / 2 + 4 << "\" font-size=\"13\">truth</text>\n";
    ribbon(os, truth, mask, label_w, gap, W, band);
    os << "  <text x=\"4\" y=\"" << gap * 2 + band + band / 2 + 4
       << "\" font-size=\"13\">pred</text>\n";
    ribbon(os, pred, mask, label_w, gap * 2 + band, W, band);

    const double ly0 = 2 * band + 3 * gap;
    for (int k = 0; k < n_classes; ++k) {
        const double lx = label_w + (k % 4) * 180.0;
        const double ly = ly0 + (k / 4) * 24.0;
        os << "  <rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"16\" height=\"16\" fill=\""
           << kPalette[k % kPaletteSize] << "\"/>\n"
           << "  <text x=\"" << lx + 22 << "\" y=\"" << ly + 13 << "\" font-size=\"12\">"
           << class_names[k] << "</text>\n";
    }
    const double mx = label_w + (n_classes % 4) * 180.0;
    const double my = ly0 + (n_classes / 4) * 24.0;
    os << "  <rect x=\"" << mx << "\" y=\"" << my << "\" width=\"16\" height=\"16\" fill=\""
       << kMaskColor << "\"/>\n"
       << "  <text x=\"" << mx + 22 << "\" y=\"" << my + 13
       << "\" font-size=\"12\">unlabeled</text>\n";
    os << "</svg>\n";
}

}  // namespace seqlab
