#pragma once

#include <string>
#include <vector>

#include "seqlab/metrics.hpp"
#include "seqlab/numeric.hpp"
#include "seqlab/sequence.hpp"

namespace seqlab {

// Load failures (missing files, ragged rows, bad spans) throw this.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Dataset {
    std::vector<Sequence> sequences;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
    Vec norm_mean, norm_std;  // filled by standardize()

    int n_x() const { return static_cast<int>(feature_names.size()); }
    int n_y() const { return static_cast<int>(class_names.size()); }
    std::vector<std::string> users() const;  // sorted unique user ids
};

struct SplitRun {
    std::string held_out_user;
    std::vector<int> train_idx, test_idx;
    int normalizer = 0;
};

struct SplitPlan {
    std::vector<SplitRun> runs;
};

struct LoadConfig {
    // 0-based kinematics column indices to keep; empty selects
    // jigsaws_default_columns() when the file is wide enough, else all columns.
    std::vector<int> columns;
    int decimation = 1;
};

// Positions, linear velocities, and gripper angle of both slave manipulators
// in the standard 76-column kinematics layout (14 columns).
std::vector<int> jigsaws_default_columns();

// Reads <root>/kinematics/*.txt with matching <root>/transcriptions/*.txt.
// Transcription lines are "start_frame end_frame label_name" with 1-based
// inclusive indices; frames outside every span are masked. The user of a
// trial comes from <root>/meta/users.txt ("trial user" lines) when present,
// otherwise from the trial-name convention Task_U123 -> user U.
Dataset load_jigsaws(const std::string& root, const LoadConfig& cfg = {});

// Writes a dataset in the same on-disk layout (plus meta/users.txt), so
// synthetic data flows through the exact JIGSAWS path.
void save_dataset(const Dataset& ds, const std::string& out_dir);

Vec one_hot(int label, int n_y);

// Per-feature z-scoring with mean/std taken only from the listed training
// sequences; applied to every sequence. Std is floored at 1e-8.
Dataset standardize(const Dataset& ds, const std::vector<int>& train_idx);

// One run per user, each holding that user out; every run carries the
// dataset-wide ground-truth segment normalizer.
SplitPlan louo_splits(const Dataset& ds);

// Scalar +-1 signal with noise; the label at frame t is the sign class of
// the input at frame t-lag. Frames before `lag` are masked.
Dataset synth_longrange(Rng& rng, int n_sequences, int T, int lag);

// Piecewise-constant hidden regimes (geometric lengths, mean 20 frames);
// 6-dim inputs from regime-specific linear maps of a shared smooth latent,
// plus a per-user affine distortion. Labels are the regimes.
Dataset synth_regimes(Rng& rng, int n_per_user, int n_users, int T, int n_classes);

}  // namespace seqlab
