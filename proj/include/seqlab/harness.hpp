#pragma once

#include <iosfwd>
#include <string>

#include "seqlab/data.hpp"
#include "seqlab/metrics.hpp"
#include "seqlab/training.hpp"

namespace seqlab {

struct XvalOptions {
    bool standardize = true;
    std::string tracks_dir;  // when set, per-trial pred/true label tracks land here
    std::ostream* progress = nullptr;
};

// Full leave-one-user-out protocol: per run, z-score on the run's training
// users, train, evaluate the held-out user. Per-run accuracy pools the run's
// test frames; per-run edit distance averages the normalized per-sequence
// distances. A failed run is marked and the remaining runs continue.
EvalReport run_xval(const Dataset& ds, const TrainingConfig& cfg, const XvalOptions& opt = {});

// Pooled frame accuracy and mean normalized edit distance of a trained model
// over the given sequences (already preprocessed).
void evaluate_sequences(const Model& model, const std::vector<Sequence>& seqs, int normalizer,
                        double* accuracy_pct, double* edit_pct,
                        std::vector<std::vector<int>>* pred_tracks = nullptr);

}  // namespace seqlab
