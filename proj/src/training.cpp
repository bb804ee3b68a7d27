#include "seqlab/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace seqlab {

double step_loss(const Vec& y_true_onehot, const Vec& y_hat) {
    if (y_true_onehot.size() != y_hat.size())
        throw ContractError("step_loss: label length " + std::to_string(y_true_onehot.size()) +
                            " vs prediction length " + std::to_string(y_hat.size()));
    int idx = -1;
    for (size_t k = 0; k < y_true_onehot.size(); ++k)
        if (y_true_onehot[k] == 1.0) {
            idx = static_cast<int>(k);
            break;
        }
    if (idx < 0) throw ContractError("step_loss: label vector is not one-hot");
    return step_loss_idx(idx, y_hat);
}

double step_loss_idx(int true_label, const Vec& y_hat) {
    if (true_label < 0 || true_label >= static_cast<int>(y_hat.size()))
        throw ContractError("step_loss: label " + std::to_string(true_label) +
                            " out of range for " + std::to_string(y_hat.size()) + " classes");
    return -std::log(std::max(y_hat[true_label], 1e-300));
}

double sequence_loss(const std::vector<int>& labels, const Prediction& pred,
                     const std::vector<uint8_t>& mask, bool* all_masked_warning) {
    if (labels.size() != pred.probs.size() || mask.size() != pred.probs.size())
        throw ContractError("sequence_loss: length mismatch");
    double loss = 0.0;
    bool any = false;
    for (size_t t = 0; t < labels.size(); ++t) {
        if (!mask[t]) continue;
        any = true;
        loss += step_loss_idx(labels[t], pred.probs[t]);
    }
    if (all_masked_warning) *all_masked_warning = !any;
    return loss;
}

namespace {

// BPTT through one (direction, layer) trace. dm_ext[tp] is the gradient on
// the post-dropout layer output, in processing order. Fills dx (gradient on
// the layer's inputs) when want_dx.
void backprop_layer(const Model& model, int cell_idx, const LayerTrace& trace,
                    const std::vector<Vec>& dm_ext, Model& grads, bool want_dx,
                    std::vector<Vec>* dx) {
    const int T = static_cast<int>(trace.inputs.size());
    const int H = model.hidden;
    const Vec& mask = trace.drop_mask;
    if (want_dx) dx->assign(T, Vec());

    if (model.kind == CellKind::Vanilla) {
        const VanillaCell& cell = model.vcells[cell_idx];
        VanillaCell& g = grads.vcells[cell_idx];
        Vec dh_carry(H, 0.0), da(H), tmp;
        const Vec zero(H, 0.0);
        for (int tp = T - 1; tp >= 0; --tp) {
            const Vec& h = trace.vsteps[tp].h;
            const Vec& h_prev = tp > 0 ? trace.vsteps[tp - 1].h : zero;
            for (int k = 0; k < H; ++k) {
                const double dh = dm_ext[tp][k] * mask[k] + dh_carry[k];
                da[k] = dh * (1.0 - h[k] * h[k]);
            }
            add_outer(g.W_x, da, trace.inputs[tp]);
            add_outer(g.W_h, da, h_prev);
            axpy(1.0, da, g.b);
            matvec_transpose_into(cell.W_h, da, dh_carry);
            if (want_dx) matvec_transpose_into(cell.W_x, da, (*dx)[tp]);
        }
        return;
    }

    const LstmCell& cell = model.lcells[cell_idx];
    LstmCell& g = grads.lcells[cell_idx];
    Vec dm_carry(H, 0.0), dc_carry(H, 0.0);
    Vec da_g(H), da_i(H), da_f(H), da_o(H), tmp(H);
    const Vec zero(H, 0.0);
    for (int tp = T - 1; tp >= 0; --tp) {
        const LstmStepCache& s = trace.lsteps[tp];
        const Vec& c_prev = tp > 0 ? trace.lsteps[tp - 1].c : zero;
        const Vec& m_prev = tp > 0 ? trace.lsteps[tp - 1].m : zero;
        for (int k = 0; k < H; ++k) {
            const double dm = dm_ext[tp][k] * mask[k] + dm_carry[k];
            const double tc = std::tanh(s.c[k]);
            const double dao = dm * tc * s.o[k] * (1.0 - s.o[k]);
            // cell gradient: direct path through m, peephole path through o,
            // and everything carried back from t+1
            const double dc = dm * s.o[k] * (1.0 - tc * tc) + dao * cell.w_oc[k] + dc_carry[k];
            const double dai = dc * s.g[k] * s.i[k] * (1.0 - s.i[k]);
            const double daf = dc * c_prev[k] * s.f[k] * (1.0 - s.f[k]);
            const double dag = dc * s.i[k] * (1.0 - s.g[k] * s.g[k]);
            da_g[k] = dag;
            da_i[k] = dai;
            da_f[k] = daf;
            da_o[k] = dao;
            dc_carry[k] = dc * s.f[k] + dai * cell.w_ic[k] + daf * cell.w_fc[k];
            g.w_ic[k] += dai * c_prev[k];
            g.w_fc[k] += daf * c_prev[k];
            g.w_oc[k] += dao * s.c[k];
            g.b_g[k] += dag;
            g.b_i[k] += dai;
            g.b_f[k] += daf;
            g.b_o[k] += dao;
        }
        const Vec& x = trace.inputs[tp];
        add_outer(g.W_gx, da_g, x);
        add_outer(g.W_ix, da_i, x);
        add_outer(g.W_fx, da_f, x);
        add_outer(g.W_ox, da_o, x);
        add_outer(g.W_gm, da_g, m_prev);
        add_outer(g.W_im, da_i, m_prev);
        add_outer(g.W_fm, da_f, m_prev);
        add_outer(g.W_om, da_o, m_prev);
        matvec_transpose_into(cell.W_gm, da_g, dm_carry);
        matvec_transpose_into(cell.W_im, da_i, tmp);
        axpy(1.0, tmp, dm_carry);
        matvec_transpose_into(cell.W_fm, da_f, tmp);
        axpy(1.0, tmp, dm_carry);
        matvec_transpose_into(cell.W_om, da_o, tmp);
        axpy(1.0, tmp, dm_carry);
        if (want_dx) {
            Vec& dxi = (*dx)[tp];
            matvec_transpose_into(cell.W_gx, da_g, dxi);
            matvec_transpose_into(cell.W_ix, da_i, tmp);
            axpy(1.0, tmp, dxi);
            matvec_transpose_into(cell.W_fx, da_f, tmp);
            axpy(1.0, tmp, dxi);
            matvec_transpose_into(cell.W_ox, da_o, tmp);
            axpy(1.0, tmp, dxi);
        }
    }
}

}  // namespace

Model backward(const Model& model, const Tape& tape, const std::vector<int>& labels,
               const std::vector<uint8_t>& mask) {
    const int T = tape.T;
    if (T == 0 || tape.mtilde.empty())
        throw ContractError("backward: tape does not record a completed forward pass");
    if (static_cast<int>(labels.size()) != T || static_cast<int>(mask.size()) != T)
        throw ContractError("backward: label/mask length mismatch");

    Model grads = zeros_like(model);
    const int dirs = model.num_dirs();
    const int H = model.hidden;

    // softmax + cross entropy: dlogits = y_hat - y on unmasked frames
    std::vector<Vec> dmt(T, Vec(static_cast<size_t>(dirs) * H, 0.0));
    Vec dlogit;
    for (int t = 0; t < T; ++t) {
        if (!mask[t]) continue;
        dlogit = tape.pred.probs[t];
        dlogit[labels[t]] -= 1.0;
        add_outer(grads.W_ym, dlogit, tape.mtilde[t]);
        axpy(1.0, dlogit, grads.b_y);
        matvec_transpose_into(model.W_ym, dlogit, dmt[t]);
    }

    for (int d = 0; d < dirs; ++d) {
        // slice this direction's half of dm-tilde, mapped to processing order
        std::vector<Vec> dm_ext(T, Vec(H, 0.0));
        for (int t = 0; t < T; ++t) {
            const int tp = (d == 0) ? t : T - 1 - t;
            for (int k = 0; k < H; ++k) dm_ext[tp][k] = dmt[t][static_cast<size_t>(d) * H + k];
        }
        for (int l = model.layers - 1; l >= 0; --l) {
            const int idx = model.cell_index(d, l);
            std::vector<Vec> dx;
            backprop_layer(model, idx, tape.traces[idx], dm_ext, grads, l > 0, &dx);
            if (l > 0) dm_ext = std::move(dx);
        }
    }
    return grads;
}

Model finite_diff_grad(const Model& model, const std::vector<Vec>& xs,
                       const std::vector<int>& labels, const std::vector<uint8_t>& mask,
                       double eps) {
    if (eps <= 0.0) throw ContractError("finite_diff_grad: eps must be positive");
    Model work = model;
    Model grads = zeros_like(model);
    auto loss_at = [&]() {
        Rng rng(0);  // unused: dropout disabled
        Prediction p = forward_sequence(work, xs, false, 0.0, rng);
        return sequence_loss(labels, p, mask);
    };
    auto wt = param_tensors(work);
    auto gt = param_tensors(grads);
    for (size_t ti = 0; ti < wt.size(); ++ti) {
        for (size_t i = 0; i < wt[ti].size; ++i) {
            const double orig = wt[ti].data[i];
            wt[ti].data[i] = orig + eps;
            const double lp = loss_at();
            wt[ti].data[i] = orig - eps;
            const double lm = loss_at();
            wt[ti].data[i] = orig;
            gt[ti].data[i] = (lp - lm) / (2.0 * eps);
        }
    }
    return grads;
}

void sgd_update(Model& params, const Model& grads, double eta, std::optional<double> grad_clip) {
    auto pt = param_tensors(params);
    auto gt = param_tensors(const_cast<Model&>(grads));
    if (pt.size() != gt.size()) throw ContractError("sgd_update: parameter/gradient shape mismatch");

    for (size_t ti = 0; ti < gt.size(); ++ti)
        for (size_t i = 0; i < gt[ti].size; ++i)
            if (!std::isfinite(gt[ti].data[i]))
                throw TrainAbort("non-finite gradient in parameter " + gt[ti].name);

    double scale = 1.0;
    if (grad_clip) {
        double sq = 0.0;
        for (auto& t : gt)
            for (size_t i = 0; i < t.size; ++i) sq += t.data[i] * t.data[i];
        const double norm = std::sqrt(sq);
        if (norm > *grad_clip && norm > 0.0) scale = *grad_clip / norm;
    }
    for (size_t ti = 0; ti < pt.size(); ++ti) {
        if (pt[ti].size != gt[ti].size)
            throw ContractError("sgd_update: size mismatch for " + pt[ti].name);
        for (size_t i = 0; i < pt[ti].size; ++i)
            pt[ti].data[i] -= eta * scale * gt[ti].data[i];
    }
}

double lr_schedule(int epoch, const TrainingConfig& cfg) {
    if (epoch < cfg.halve_after) return cfg.learning_rate;
    const int halvings = (epoch - cfg.halve_after) / cfg.halve_every + 1;
    return cfg.learning_rate * std::pow(2.0, -halvings);
}

TrainResult train(const std::vector<Sequence>& data, const TrainingConfig& cfg,
                  std::ostream* progress) {
    if (data.empty()) throw ContractError("train: empty training split");
    if (cfg.learning_rate <= 0.0 || cfg.batch_size < 1 || cfg.dropout_p < 0.0 ||
        cfg.dropout_p >= 1.0)
        throw ContractError("train: invalid config (learning_rate>0, batch_size>=1, dropout in [0,1))");
    const int n_x = static_cast<int>(data[0].inputs.at(0).size());
    int n_y = 0;
    for (auto& s : data)
        for (size_t t = 0; t < s.labels.size(); ++t)
            if (s.mask[t]) n_y = std::max(n_y, s.labels[t] + 1);
    if (n_y < 1) throw ContractError("train: no labeled frames in training split");

    Rng master(cfg.seed);
    TrainResult res;
    res.model = make_model(cfg.cell, cfg.mode, n_x, n_y, cfg.hidden, cfg.layers, master,
                           cfg.init_scale);

    const int n = static_cast<int>(data.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg);
        Model snapshot = res.model;
        master.shuffle(order);
        double epoch_loss = 0.0;
        bool bad = false;
        std::string bad_reason;

        for (int start = 0; start < n && !bad; start += cfg.batch_size) {
            const int bsz = std::min(cfg.batch_size, n - start);
            // dropout seeds drawn in batch order so parallel dispatch cannot
            // perturb the stream
            std::vector<uint64_t> seeds(bsz);
            for (int b = 0; b < bsz; ++b) seeds[b] = master.next_u64();

            std::vector<Model> gslots(bsz);
            std::vector<double> losses(bsz, 0.0);
            std::vector<std::string> errs(bsz);
#pragma omp parallel for schedule(dynamic, 1)
            for (int b = 0; b < bsz; ++b) {
                try {
                    const Sequence& seq = data[order[start + b]];
                    Rng drng(seeds[b]);
                    Tape tape;
                    forward_sequence(res.model, seq.inputs, true, cfg.dropout_p, drng, &tape);
                    losses[b] = sequence_loss(seq.labels, tape.pred, seq.mask);
                    gslots[b] = backward(res.model, tape, seq.labels, seq.mask);
                } catch (const std::exception& e) {
                    errs[b] = e.what();
                }
            }
            for (int b = 0; b < bsz; ++b)
                if (!errs[b].empty()) {
                    bad = true;
                    bad_reason = errs[b];
                }
            if (bad) break;

            double batch_loss = 0.0;
            Model batch_grad = zeros_like(res.model);
            auto bt = param_tensors(batch_grad);
            for (int b = 0; b < bsz; ++b) {
                batch_loss += losses[b];
                epoch_loss += losses[b];
                auto st = param_tensors(gslots[b]);
                for (size_t ti = 0; ti < bt.size(); ++ti)
                    for (size_t i = 0; i < bt[ti].size; ++i) bt[ti].data[i] += st[ti].data[i];
            }
            for (auto& t : bt)
                for (size_t i = 0; i < t.size; ++i) t.data[i] /= bsz;
            batch_loss /= bsz;
            if (!std::isfinite(batch_loss)) {
                bad = true;
                bad_reason = "non-finite batch loss";
                break;
            }
            try {
                sgd_update(res.model, batch_grad, lr, cfg.grad_clip);
            } catch (const TrainAbort& e) {
                bad = true;
                bad_reason = e.what();
            }
        }

        if (bad) {
            res.model = std::move(snapshot);  // last good checkpoint
            res.aborted = true;
            res.abort_reason = "epoch " + std::to_string(epoch) + ": " + bad_reason;
            break;
        }
        epoch_loss /= n;
        res.history.push_back({epoch, lr, epoch_loss});
        if (progress) {
            progress->precision(17);
            (*progress) << "epoch=" << epoch << " lr=" << lr << " loss=" << epoch_loss << "\n";
            progress->flush();
        }
    }
    return res;
}

double max_rel_error(const Model& analytic, const Model& numeric, std::string* worst_param) {
    auto at = param_tensors(analytic);
    auto nt = param_tensors(numeric);
    double worst = 0.0;
    std::string wp;
    for (size_t ti = 0; ti < at.size(); ++ti) {
        for (size_t i = 0; i < at[ti].size; ++i) {
            const double a = at[ti].data[i], n = nt[ti].data[i];
            const double rel = std::fabs(a - n) / std::max(1e-8, std::fabs(a) + std::fabs(n));
            if (rel > worst) {
                worst = rel;
                wp = at[ti].name + "[" + std::to_string(i) + "]";
            }
        }
    }
    if (worst_param) *worst_param = wp;
    return worst;
}

std::vector<GradCheckResult> run_gradcheck(int seeds, bool corrupt) {
    const int n_x = 3, n_y = 4;
    std::vector<GradCheckResult> out;
    for (CellKind kind : {CellKind::Vanilla, CellKind::Lstm}) {
        for (Direction dir : {Direction::Forward, Direction::Bidirectional}) {
            for (int hidden : {3, 5}) {
                for (int T : {1, 7}) {
                    GradCheckResult r;
                    r.config = to_string(kind) + "/" + to_string(dir) +
                               "/hidden=" + std::to_string(hidden) + "/T=" + std::to_string(T);
                    for (int s = 0; s < seeds; ++s) {
                        Rng rng(1000 + 17 * s);
                        Model model = make_model(kind, dir, n_x, n_y, hidden, 1, rng, 0.5);
                        std::vector<Vec> xs(T, Vec(n_x));
                        std::vector<int> labels(T);
                        std::vector<uint8_t> mask(T, 1);
                        for (auto& x : xs)
                            for (auto& v : x) v = rng.next_uniform(1.0);
                        for (auto& y : labels) y = static_cast<int>(rng.next_u64() % n_y);
                        if (T > 1) mask[T / 2] = 0;  // exercise masked frames

                        Tape tape;
                        forward_sequence(model, xs, false, 0.0, rng, &tape);
                        Model an = backward(model, tape, labels, mask);
                        if (corrupt && s == 0) an.b_y[0] += 0.5;
                        Model num = finite_diff_grad(model, xs, labels, mask, 1e-5);
                        std::string wp;
                        const double err = max_rel_error(an, num, &wp);
                        if (err > r.max_rel_err) {
                            r.max_rel_err = err;
                            r.worst_param = wp;
                        }
                    }
                    r.pass = r.max_rel_err < 1e-4;
                    out.push_back(std::move(r));
                }
            }
        }
    }
    return out;
}

}  // namespace seqlab
