#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqlab/numeric.hpp"

namespace seqlab {

enum class CellKind { Vanilla, Lstm };
enum class Direction { Forward, Bidirectional };

std::string to_string(CellKind k);
std::string to_string(Direction d);
CellKind cell_kind_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);

// h_t = tanh(W_x x_t + W_h h_{t-1} + b)
struct VanillaCell {
    Mat W_x, W_h;
    Vec b;
};

// Peephole LSTM. g is the candidate activation; peephole weights are kept as
// vectors, one scalar per hidden unit, so the diagonal constraint cannot be
// violated. The output gate peeks at the freshly updated cell c_t.
struct LstmCell {
    Mat W_gx, W_gm;
    Mat W_ix, W_im;
    Mat W_fx, W_fm;
    Mat W_ox, W_om;
    Vec w_ic, w_fc, w_oc;
    Vec b_g, b_i, b_f, b_o;
};

struct LstmState {
    Vec c, m;
};

struct Prediction {
    std::vector<Vec> probs;   // T rows, each a distribution over n_y classes
    std::vector<int> labels;  // argmax per row, lowest index on ties
};

// Full parameter set: one cell per (direction, layer), plus the output layer.
// Cells are stored direction-major: [fwd layer 0, fwd layer 1, ..., bwd layer 0, ...].
struct Model {
    CellKind kind = CellKind::Lstm;
    Direction dir = Direction::Forward;
    int n_x = 0, n_y = 0, hidden = 0, layers = 1;
    std::vector<VanillaCell> vcells;
    std::vector<LstmCell> lcells;
    Mat W_ym;
    Vec b_y;

    int num_dirs() const { return dir == Direction::Bidirectional ? 2 : 1; }
    int cell_index(int d, int layer) const { return d * layers + layer; }
};

// Named view into one parameter tensor; rank 1 tensors have cols == 0.
struct TensorRef {
    std::string name;
    int rows = 0;
    int cols = 0;  // 0 for vectors
    double* data = nullptr;
    size_t size = 0;
};

Model make_model(CellKind kind, Direction dir, int n_x, int n_y, int hidden, int layers,
                 Rng& rng, double init_scale = 0.08);
Model zeros_like(const Model& m);
long count_params(const Model& m);
std::vector<TensorRef> param_tensors(Model& m);
std::vector<TensorRef> param_tensors(const Model& m);  // const-cast view for read-only walks

// ---- single steps ----
Vec vanilla_step(const VanillaCell& p, const Vec& h_prev, const Vec& x);
LstmState lstm_step(const LstmCell& p, const LstmState& s_prev, const Vec& x);
Vec output_step(const Mat& W_ym, const Vec& b_y, const Vec& m);

// Inverted dropout: entries are 0 with probability p_drop, else 1/(1-p_drop).
Vec dropout_mask(Rng& rng, int len, double p_drop);

// ---- full sequence forward ----

struct VanillaStepCache {
    Vec h;
};
struct LstmStepCache {
    Vec g, i, f, o, c, m;
};

// Everything one (direction, layer) pass touched, in processing order
// (reversed relative to the sequence for the backward direction).
struct LayerTrace {
    std::vector<Vec> inputs;  // post-dropout input each step consumed
    std::vector<VanillaStepCache> vsteps;
    std::vector<LstmStepCache> lsteps;
    Vec drop_mask;  // dropout mask applied to this layer's output
};

struct Tape {
    int T = 0;
    std::vector<LayerTrace> traces;  // indexed like Model cells
    std::vector<Vec> mtilde;         // per-frame post-dropout output-layer input
    Prediction pred;
};

// Runs the full forward pass. In train mode one dropout mask is sampled per
// (direction, layer) per sequence and applied to that layer's output before it
// feeds the next layer or the output projection. With train_mode off the rng
// is not consumed. Pass a tape to record intermediates for backward().
Prediction forward_sequence(const Model& model, const std::vector<Vec>& xs, bool train_mode,
                            double dropout_p, Rng& rng, Tape* tape = nullptr);

int argmax_lowest(const Vec& v);

}  // namespace seqlab
