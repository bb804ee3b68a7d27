#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqlab/model.hpp"
#include "seqlab/sequence.hpp"

namespace seqlab {

// Raised when training must stop (non-finite loss or gradients).
struct TrainAbort : std::runtime_error {
    explicit TrainAbort(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingConfig {
    double learning_rate = 1.0;
    int epochs = 80;
    int halve_after = 40;  // epochs at the base rate (zero-based: epochs 0..halve_after-1)
    int halve_every = 5;
    int batch_size = 5;
    double dropout_p = 0.5;
    int hidden = 1024;
    int layers = 1;
    CellKind cell = CellKind::Lstm;
    Direction mode = Direction::Forward;
    uint64_t seed = 1;
    std::optional<double> grad_clip;  // global-norm ceiling, off by default
    double init_scale = 0.08;
};

// ---- loss ----
// Cross entropy of one frame: -log of the probability on the true class.
// The log argument is clamped at 1e-300 so the result stays finite.
double step_loss(const Vec& y_true_onehot, const Vec& y_hat);
double step_loss_idx(int true_label, const Vec& y_hat);

// Sum of step losses over unmasked frames. All-masked sequences return 0
// and set *all_masked_warning if provided.
double sequence_loss(const std::vector<int>& labels, const Prediction& pred,
                     const std::vector<uint8_t>& mask, bool* all_masked_warning = nullptr);

// ---- gradients ----
// Exact reverse-mode gradient of the recorded sequence loss with respect to
// every parameter. The tape must come from forward_sequence() on `model`.
Model backward(const Model& model, const Tape& tape, const std::vector<int>& labels,
               const std::vector<uint8_t>& mask);

// Central-difference oracle: (L(p+eps) - L(p-eps)) / (2 eps) per scalar,
// evaluated with dropout disabled.
Model finite_diff_grad(const Model& model, const std::vector<Vec>& xs,
                       const std::vector<int>& labels, const std::vector<uint8_t>& mask,
                       double eps);

// In-place p -= eta * g, after the optional global-norm clip.
// Throws TrainAbort naming the tensor on any non-finite gradient.
void sgd_update(Model& params, const Model& grads, double eta, std::optional<double> grad_clip);

double lr_schedule(int epoch, const TrainingConfig& cfg);

// ---- training loop ----
struct EpochRecord {
    int epoch;
    double lr;
    double loss;  // mean per-sequence loss over the epoch
};

struct TrainResult {
    Model model;
    std::vector<EpochRecord> history;
    bool aborted = false;
    std::string abort_reason;
};

// SGD over shuffled mini-batches; the batch gradient is the mean of the
// per-sequence gradients. Deterministic given cfg.seed: per-sequence work may
// run in parallel but is reduced in a fixed order. On divergence the
// parameters from the last completed epoch are returned with aborted set.
// Progress lines "epoch=<n> lr=<v> loss=<v>" go to `progress` when non-null.
TrainResult train(const std::vector<Sequence>& data, const TrainingConfig& cfg,
                  std::ostream* progress = nullptr);

// ---- gradient-check suite ----
struct GradCheckResult {
    std::string config;
    double max_rel_err = 0.0;
    std::string worst_param;
    bool pass = false;
};

// Analytic vs central-difference gradients over cells x direction modes x
// hidden{3,5} x T{1,7} x `seeds` seeds (n_x=3, n_y=4); gate is 1e-4 relative
// error. `corrupt` perturbs one analytic gradient as a negative control.
std::vector<GradCheckResult> run_gradcheck(int seeds = 5, bool corrupt = false);

double max_rel_error(const Model& analytic, const Model& numeric, std::string* worst_param);

}  // namespace seqlab
