#include "seqlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seqlab {

double frame_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                      const std::vector<uint8_t>& mask) {
    if (pred.size() != truth.size() || mask.size() != truth.size())
        throw ContractError("frame_accuracy: length mismatch");
    long total = 0, hit = 0;
    for (size_t t = 0; t < truth.size(); ++t) {
        if (!mask[t]) continue;
        ++total;
        if (pred[t] == truth[t]) ++hit;
    }
    if (total == 0) throw ContractError("frame_accuracy: no unmasked frames");
    return 100.0 * static_cast<double>(hit) / static_cast<double>(total);
}

SegmentSeq to_segments(const std::vector<int>& labels, const std::vector<uint8_t>& mask) {
    if (labels.size() != mask.size()) throw ContractError("to_segments: length mismatch");
    SegmentSeq segs;
    bool open = false;
    for (size_t t = 0; t < labels.size(); ++t) {
        if (!mask[t]) {
            open = false;  // gap closes the current segment
            continue;
        }
        if (open && segs.back().label == labels[t] &&
            segs.back().end_frame == static_cast<int>(t)) {
            segs.back().end_frame = static_cast<int>(t) + 1;
        } else {
            segs.push_back({labels[t], static_cast<int>(t), static_cast<int>(t) + 1});
            open = true;
        }
    }
    return segs;
}

std::vector<int> segment_labels(const SegmentSeq& segs) {
    std::vector<int> out;
    out.reserve(segs.size());
    for (auto& s : segs) out.push_back(s.label);
    return out;
}

int edit_distance(const std::vector<int>& a, const std::vector<int>& b) {
    const size_t n = b.size();
    std::vector<int> row(n + 1);
    for (size_t j = 0; j <= n; ++j) row[j] = static_cast<int>(j);
    for (size_t i = 1; i <= a.size(); ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (size_t j = 1; j <= n; ++j) {
            const int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
    }
    return row[n];
}

double normalized_edit_distance(const SegmentSeq& pred, const SegmentSeq& truth, int normalizer) {
    if (normalizer < 1)
        throw ContractError("normalized_edit_distance: normalizer must be >= 1, got " +
                            std::to_string(normalizer));
    return 100.0 * edit_distance(segment_labels(pred), segment_labels(truth)) / normalizer;
}

int dataset_normalizer(const std::vector<SegmentSeq>& truth_segments) {
    if (truth_segments.empty()) throw ContractError("dataset_normalizer: empty dataset");
    int mx = 0;
    for (auto& s : truth_segments) mx = std::max(mx, static_cast<int>(s.size()));
    return mx;
}

PermTestResult permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                                bool two_sided, uint64_t mc_seed, long mc_samples,
                                bool force_monte_carlo) {
    if (a.size() != b.size()) throw ContractError("permutation_test: length mismatch");
    const int n = static_cast<int>(a.size());
    if (n == 0) throw ContractError("permutation_test: empty samples");

    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = a[i] - b[i];
    double obs = 0.0;
    for (double x : d) obs += x;
    obs /= n;
    const double thresh = (two_sided ? std::fabs(obs) : obs) - 1e-12;

    auto stat = [&](double sum) {
        const double mean = sum / n;
        return two_sided ? std::fabs(mean) : mean;
    };

    if (n <= 20 && !force_monte_carlo) {
        const uint64_t total = 1ull << n;
        uint64_t count = 0;
        for (uint64_t bits = 0; bits < total; ++bits) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += (bits >> i) & 1 ? -d[i] : d[i];
            if (stat(sum) >= thresh) ++count;
        }
        return {static_cast<double>(count) / static_cast<double>(total), true};
    }

    Rng rng(mc_seed);
    long count = 0;
    for (long s = 0; s < mc_samples; ++s) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += (rng.next_u64() & 1) ? -d[i] : d[i];
        if (stat(sum) >= thresh) ++count;
    }
    return {static_cast<double>(count) / static_cast<double>(mc_samples), false};
}

void EvalReport::finalize() {
    std::vector<double> accs, edits;
    for (auto& r : runs)
        if (!r.failed) {
            accs.push_back(r.accuracy_pct);
            edits.push_back(r.edit_pct);
        }
    auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = sd = 0.0;
        if (v.empty()) return;
        for (double x : v) mean += x;
        mean /= v.size();
        for (double x : v) sd += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(sd / (v.size() - 1)) : 0.0;
    };
    mean_std(accs, mean_accuracy, std_accuracy);
    mean_std(edits, mean_edit, std_edit);
}

std::string EvalReport::to_text() const {
    std::ostringstream os;
    os.precision(4);
    os << std::fixed;
    for (auto& r : runs) {
        os << "run = " << r.run << "\nheld_out_user = " << r.held_out_user;
        if (r.failed)
            os << "\nstatus = FAILED\n";
        else
            os << "\naccuracy_pct = " << r.accuracy_pct << "\nedit_pct = " << r.edit_pct << "\n";
        os << "\n";
    }
    os << "normalizer = " << normalizer << "\n";
    os << "mean_accuracy = " << mean_accuracy << "\nstd_accuracy = " << std_accuracy << "\n";
    os << "mean_edit = " << mean_edit << "\nstd_edit = " << std_edit << "\n";
    return os.str();
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "run,held_out_user,accuracy_pct,edit_pct\n";
    for (auto& r : runs) {
        os << r.run << "," << r.held_out_user << ",";
        if (r.failed)
            os << "nan,nan\n";
        else
            os << r.accuracy_pct << "," << r.edit_pct << "\n";
    }
    return os.str();
}

EvalReport EvalReport::from_csv(const std::string& content) {
    EvalReport rep;
    std::istringstream is(content);
    std::string line;
    if (!std::getline(is, line) || line.rfind("run,held_out_user,accuracy_pct,edit_pct", 0) != 0)
        throw ContractError("EvalReport::from_csv: bad or missing header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        RunScore r;
        std::getline(ls, field, ',');
        r.run = std::stoi(field);
        std::getline(ls, r.held_out_user, ',');
        std::getline(ls, field, ',');
        r.accuracy_pct = std::stod(field);
        std::getline(ls, field, ',');
        r.edit_pct = std::stod(field);
        r.failed = std::isnan(r.accuracy_pct);
        rep.runs.push_back(r);
    }
    rep.finalize();
    return rep;
}

}  // namespace seqlab
