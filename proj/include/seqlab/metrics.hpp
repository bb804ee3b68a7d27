#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqlab/numeric.hpp"

namespace seqlab {

// Half-open [start_frame, end_frame) run of one label.
struct Segment {
    int label;
    int start_frame;
    int end_frame;
};

using SegmentSeq = std::vector<Segment>;

// 100 * matching unmasked frames / unmasked frames.
double frame_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                      const std::vector<uint8_t>& mask);

// Run-length encoding over unmasked frames. A masked gap closes the current
// segment; a run continuing across the gap with the same label starts a new
// segment.
SegmentSeq to_segments(const std::vector<int>& labels, const std::vector<uint8_t>& mask);

std::vector<int> segment_labels(const SegmentSeq& segs);

// Levenshtein distance (insertions + deletions + substitutions).
int edit_distance(const std::vector<int>& a, const std::vector<int>& b);

// 100 * edit_distance(pred labels, truth labels) / normalizer.
double normalized_edit_distance(const SegmentSeq& pred, const SegmentSeq& truth, int normalizer);

// Max ground-truth segment count over all sequences of the dataset.
int dataset_normalizer(const std::vector<SegmentSeq>& truth_segments);

// Paired-sample permutation test on the mean of the paired differences.
// Exact sign-flip enumeration when 2^n <= 2^20, otherwise >= 1e5 seeded
// Monte-Carlo resamples.
struct PermTestResult {
    double p_value;
    bool exact;
};
PermTestResult permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                                bool two_sided = true, uint64_t mc_seed = 1,
                                long mc_samples = 200000, bool force_monte_carlo = false);

// Per-run scores plus their aggregate; shaped like one results-table row.
struct RunScore {
    int run = 0;
    std::string held_out_user;
    double accuracy_pct = 0.0;
    double edit_pct = 0.0;
    bool failed = false;
};

struct EvalReport {
    std::vector<RunScore> runs;
    double mean_accuracy = 0.0, std_accuracy = 0.0;
    double mean_edit = 0.0, std_edit = 0.0;
    int normalizer = 0;
    void finalize();  // recompute means/stds from runs (failed runs excluded)
    std::string to_text() const;
    std::string to_csv() const;  // header: run,held_out_user,accuracy_pct,edit_pct
    static EvalReport from_csv(const std::string& content);
};

}  // namespace seqlab
