#include "seqlab/model.hpp"

#include <cmath>

namespace seqlab {

std::string to_string(CellKind k) { return k == CellKind::Vanilla ? "vanilla" : "lstm"; }
std::string to_string(Direction d) { return d == Direction::Forward ? "forward" : "bidirectional"; }

CellKind cell_kind_from_string(const std::string& s) {
    if (s == "vanilla") return CellKind::Vanilla;
    if (s == "lstm") return CellKind::Lstm;
    throw ContractError("unknown cell kind: " + s);
}

Direction direction_from_string(const std::string& s) {
    if (s == "forward") return Direction::Forward;
    if (s == "bidirectional") return Direction::Bidirectional;
    throw ContractError("unknown direction mode: " + s);
}

Model make_model(CellKind kind, Direction dir, int n_x, int n_y, int hidden, int layers,
                 Rng& rng, double init_scale) {
    if (hidden <= 0) throw ContractError("hidden must be >= 1, got " + std::to_string(hidden));
    if (n_x <= 0 || n_y <= 0)
        throw ContractError("n_x and n_y must be >= 1, got n_x=" + std::to_string(n_x) +
                            " n_y=" + std::to_string(n_y));
    if (layers < 1 || layers > 2)
        throw ContractError("layers must be 1 or 2, got " + std::to_string(layers));

    Model m;
    m.kind = kind;
    m.dir = dir;
    m.n_x = n_x;
    m.n_y = n_y;
    m.hidden = hidden;
    m.layers = layers;

    const int ncells = m.num_dirs() * layers;
    for (int idx = 0; idx < ncells; ++idx) {
        const int layer = idx % layers;
        const int in = layer == 0 ? n_x : hidden;
        if (kind == CellKind::Vanilla) {
            VanillaCell c;
            c.W_x = init_uniform(rng, hidden, in, init_scale);
            c.W_h = init_uniform(rng, hidden, hidden, init_scale);
            c.b = init_uniform_vec(rng, hidden, init_scale);
            m.vcells.push_back(std::move(c));
        } else {
            LstmCell c;
            c.W_gx = init_uniform(rng, hidden, in, init_scale);
            c.W_gm = init_uniform(rng, hidden, hidden, init_scale);
            c.W_ix = init_uniform(rng, hidden, in, init_scale);
            c.W_im = init_uniform(rng, hidden, hidden, init_scale);
            c.W_fx = init_uniform(rng, hidden, in, init_scale);
            c.W_fm = init_uniform(rng, hidden, hidden, init_scale);
            c.W_ox = init_uniform(rng, hidden, in, init_scale);
            c.W_om = init_uniform(rng, hidden, hidden, init_scale);
            c.w_ic = init_uniform_vec(rng, hidden, init_scale);
            c.w_fc = init_uniform_vec(rng, hidden, init_scale);
            c.w_oc = init_uniform_vec(rng, hidden, init_scale);
            c.b_g = init_uniform_vec(rng, hidden, init_scale);
            c.b_i = init_uniform_vec(rng, hidden, init_scale);
            c.b_f = init_uniform_vec(rng, hidden, init_scale);
            c.b_o = init_uniform_vec(rng, hidden, init_scale);
            m.lcells.push_back(std::move(c));
        }
    }
    const int d_m = m.num_dirs() * hidden;
    m.W_ym = init_uniform(rng, n_y, d_m, init_scale);
    m.b_y = init_uniform_vec(rng, n_y, init_scale);
    return m;
}

Model zeros_like(const Model& src) {
    Model m = src;
    for (auto t : param_tensors(m))
        for (size_t i = 0; i < t.size; ++i) t.data[i] = 0.0;
    return m;
}

std::vector<TensorRef> param_tensors(Model& m) {
    std::vector<TensorRef> out;
    auto add_mat = [&](const std::string& name, Mat& mat) {
        out.push_back({name, mat.rows, mat.cols, mat.a.data(), mat.a.size()});
    };
    auto add_vec = [&](const std::string& name, Vec& v) {
        out.push_back({name, static_cast<int>(v.size()), 0, v.data(), v.size()});
    };
    for (int d = 0; d < m.num_dirs(); ++d) {
        const std::string dtag = (d == 0) ? "fwd" : "bwd";
        for (int l = 0; l < m.layers; ++l) {
            const std::string p = dtag + ".l" + std::to_string(l) + ".";
            const int idx = m.cell_index(d, l);
            if (m.kind == CellKind::Vanilla) {
                VanillaCell& c = m.vcells[idx];
                add_mat(p + "W_x", c.W_x);
                add_mat(p + "W_h", c.W_h);
                add_vec(p + "b", c.b);
            } else {
                LstmCell& c = m.lcells[idx];
                add_mat(p + "W_gx", c.W_gx);
                add_mat(p + "W_gm", c.W_gm);
                add_mat(p + "W_ix", c.W_ix);
                add_mat(p + "W_im", c.W_im);
                add_mat(p + "W_fx", c.W_fx);
                add_mat(p + "W_fm", c.W_fm);
                add_mat(p + "W_ox", c.W_ox);
                add_mat(p + "W_om", c.W_om);
                add_vec(p + "w_ic", c.w_ic);
                add_vec(p + "w_fc", c.w_fc);
                add_vec(p + "w_oc", c.w_oc);
                add_vec(p + "b_g", c.b_g);
                add_vec(p + "b_i", c.b_i);
                add_vec(p + "b_f", c.b_f);
                add_vec(p + "b_o", c.b_o);
            }
        }
    }
    add_mat("W_ym", m.W_ym);
    add_vec("b_y", m.b_y);
    return out;
}

std::vector<TensorRef> param_tensors(const Model& m) {
    return param_tensors(const_cast<Model&>(m));
}

long count_params(const Model& m) {
    long n = 0;
    for (auto& t : param_tensors(m)) n += static_cast<long>(t.size);
    return n;
}

Vec vanilla_step(const VanillaCell& p, const Vec& h_prev, const Vec& x) {
    Vec a = matvec(p.W_x, x);
    Vec bh = matvec(p.W_h, h_prev);
    for (size_t i = 0; i < a.size(); ++i) a[i] = std::tanh(a[i] + bh[i] + p.b[i]);
    return a;
}

LstmState lstm_step(const LstmCell& p, const LstmState& s_prev, const Vec& x) {
    const size_t H = p.b_g.size();
    if (s_prev.c.size() != H || s_prev.m.size() != H)
        throw ContractError("lstm_step: state size " + std::to_string(s_prev.c.size()) +
                            " does not match hidden size " + std::to_string(H));
    Vec g = matvec(p.W_gx, x), gm = matvec(p.W_gm, s_prev.m);
    Vec i = matvec(p.W_ix, x), im = matvec(p.W_im, s_prev.m);
    Vec f = matvec(p.W_fx, x), fm = matvec(p.W_fm, s_prev.m);
    Vec o = matvec(p.W_ox, x), om = matvec(p.W_om, s_prev.m);
    LstmState s;
    s.c.resize(H);
    s.m.resize(H);
    for (size_t k = 0; k < H; ++k) {
        const double gk = std::tanh(g[k] + gm[k] + p.b_g[k]);
        const double ik = 1.0 / (1.0 + std::exp(-(i[k] + im[k] + p.w_ic[k] * s_prev.c[k] + p.b_i[k])));
        const double fk = 1.0 / (1.0 + std::exp(-(f[k] + fm[k] + p.w_fc[k] * s_prev.c[k] + p.b_f[k])));
        const double ck = ik * gk + fk * s_prev.c[k];
        // output gate peeks at the new cell value
        const double ok = 1.0 / (1.0 + std::exp(-(o[k] + om[k] + p.w_oc[k] * ck + p.b_o[k])));
        s.c[k] = ck;
        s.m[k] = ok * std::tanh(ck);
    }
    return s;
}

Vec output_step(const Mat& W_ym, const Vec& b_y, const Vec& m) {
    Vec logits = matvec(W_ym, m);
    for (size_t i = 0; i < logits.size(); ++i) logits[i] += b_y[i];
    return softmax(logits);
}

Vec dropout_mask(Rng& rng, int len, double p_drop) {
    if (p_drop < 0.0 || p_drop >= 1.0)
        throw ContractError("dropout_mask: p_drop must be in [0,1), got " + std::to_string(p_drop));
    Vec mask(len, 1.0);
    if (p_drop == 0.0) return mask;
    const double keep_scale = 1.0 / (1.0 - p_drop);
    for (int i = 0; i < len; ++i) mask[i] = rng.next_double() < p_drop ? 0.0 : keep_scale;
    return mask;
}

int argmax_lowest(const Vec& v) {
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = static_cast<int>(i);
    return best;
}

namespace {

// One (direction, layer) pass over the sequence in processing order.
// Writes the post-dropout outputs into `out` and fills `trace` if given.
void run_layer(const Model& model, int cell_idx, const std::vector<Vec>& layer_in,
               const Vec& drop_mask, std::vector<Vec>& out, LayerTrace* trace) {
    const int T = static_cast<int>(layer_in.size());
    const int H = model.hidden;
    out.assign(T, Vec());
    if (trace) {
        trace->inputs = layer_in;
        trace->drop_mask = drop_mask;
    }
    if (model.kind == CellKind::Vanilla) {
        const VanillaCell& cell = model.vcells[cell_idx];
        Vec h(H, 0.0);
        for (int t = 0; t < T; ++t) {
            h = vanilla_step(cell, h, layer_in[t]);
            if (trace) trace->vsteps.push_back({h});
            out[t] = hadamard(h, drop_mask);
        }
    } else {
        const LstmCell& cell = model.lcells[cell_idx];
        LstmState s;
        s.c.assign(H, 0.0);
        s.m.assign(H, 0.0);
        for (int t = 0; t < T; ++t) {
            const Vec& x = layer_in[t];
            // expanded step so gate activations land on the tape
            Vec ga = matvec(cell.W_gx, x), gm = matvec(cell.W_gm, s.m);
            Vec ia = matvec(cell.W_ix, x), im = matvec(cell.W_im, s.m);
            Vec fa = matvec(cell.W_fx, x), fm = matvec(cell.W_fm, s.m);
            Vec oa = matvec(cell.W_ox, x), om = matvec(cell.W_om, s.m);
            LstmStepCache sc;
            sc.g.resize(H);
            sc.i.resize(H);
            sc.f.resize(H);
            sc.o.resize(H);
            sc.c.resize(H);
            sc.m.resize(H);
            for (int k = 0; k < H; ++k) {
                const double gk = std::tanh(ga[k] + gm[k] + cell.b_g[k]);
                const double ik =
                    1.0 / (1.0 + std::exp(-(ia[k] + im[k] + cell.w_ic[k] * s.c[k] + cell.b_i[k])));
                const double fk =
                    1.0 / (1.0 + std::exp(-(fa[k] + fm[k] + cell.w_fc[k] * s.c[k] + cell.b_f[k])));
                const double ck = ik * gk + fk * s.c[k];
                const double ok =
                    1.0 / (1.0 + std::exp(-(oa[k] + om[k] + cell.w_oc[k] * ck + cell.b_o[k])));
                sc.g[k] = gk;
                sc.i[k] = ik;
                sc.f[k] = fk;
                sc.o[k] = ok;
                sc.c[k] = ck;
                sc.m[k] = ok * std::tanh(ck);
            }
            s.c = sc.c;
            s.m = sc.m;
            out[t] = hadamard(sc.m, drop_mask);
            if (trace) trace->lsteps.push_back(std::move(sc));
        }
    }
}

}  // namespace

Prediction forward_sequence(const Model& model, const std::vector<Vec>& xs, bool train_mode,
                            double dropout_p, Rng& rng, Tape* tape) {
    const int T = static_cast<int>(xs.size());
    if (T == 0) throw ContractError("forward_sequence: empty sequence");
    for (auto& x : xs)
        if (static_cast<int>(x.size()) != model.n_x)
            throw ContractError("forward_sequence: input width " + std::to_string(x.size()) +
                                " does not match n_x=" + std::to_string(model.n_x));

    const int dirs = model.num_dirs();
    const int H = model.hidden;

    // Masks are drawn up front in a fixed order so the rng stream does not
    // depend on layer evaluation details.
    std::vector<Vec> masks(dirs * model.layers, Vec(H, 1.0));
    if (train_mode && dropout_p > 0.0)
        for (auto& mask : masks) mask = dropout_mask(rng, H, dropout_p);

    if (tape) {
        *tape = Tape{};
        tape->T = T;
        tape->traces.resize(dirs * model.layers);
    }

    // per direction, post-dropout top-layer outputs in sequence order
    std::vector<std::vector<Vec>> m_top(dirs);
    for (int d = 0; d < dirs; ++d) {
        std::vector<Vec> layer_in(T);
        for (int t = 0; t < T; ++t) layer_in[t] = (d == 0) ? xs[t] : xs[T - 1 - t];
        for (int l = 0; l < model.layers; ++l) {
            const int idx = model.cell_index(d, l);
            std::vector<Vec> out;
            run_layer(model, idx, layer_in, masks[idx], out, tape ? &tape->traces[idx] : nullptr);
            layer_in = std::move(out);
        }
        m_top[d].assign(T, Vec());
        for (int t = 0; t < T; ++t) m_top[d][t] = std::move(layer_in[(d == 0) ? t : T - 1 - t]);
    }

    Prediction pred;
    pred.probs.resize(T);
    pred.labels.resize(T);
    if (tape) tape->mtilde.resize(T);
    for (int t = 0; t < T; ++t) {
        Vec mt = m_top[0][t];
        if (dirs == 2) mt.insert(mt.end(), m_top[1][t].begin(), m_top[1][t].end());
        pred.probs[t] = output_step(model.W_ym, model.b_y, mt);
        pred.labels[t] = argmax_lowest(pred.probs[t]);
        if (tape) tape->mtilde[t] = std::move(mt);
    }
    if (tape) tape->pred = pred;
    return pred;
}

}  // namespace seqlab
