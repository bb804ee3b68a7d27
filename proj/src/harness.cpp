#include "seqlab/harness.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

namespace fs = std::filesystem;

namespace seqlab {

void evaluate_sequences(const Model& model, const std::vector<Sequence>& seqs, int normalizer,
                        double* accuracy_pct, double* edit_pct,
                        std::vector<std::vector<int>>* pred_tracks) {
    long hit = 0, total = 0;
    double edit_sum = 0.0;
    if (pred_tracks) pred_tracks->clear();
    Rng rng(0);  // unused in eval mode
    for (auto& seq : seqs) {
        Prediction pred = forward_sequence(model, seq.inputs, false, 0.0, rng);
        for (int t = 0; t < seq.length(); ++t) {
            if (!seq.mask[t]) continue;
            ++total;
            if (pred.labels[t] == seq.labels[t]) ++hit;
        }
        edit_sum += normalized_edit_distance(to_segments(pred.labels, seq.mask),
                                             to_segments(seq.labels, seq.mask), normalizer);
        if (pred_tracks) pred_tracks->push_back(pred.labels);
    }
    if (accuracy_pct) *accuracy_pct = total ? 100.0 * hit / total : 0.0;
    if (edit_pct) *edit_pct = seqs.empty() ? 0.0 : edit_sum / static_cast<double>(seqs.size());
}

EvalReport run_xval(const Dataset& ds, const TrainingConfig& cfg, const XvalOptions& opt) {
    SplitPlan plan = louo_splits(ds);
    EvalReport report;
    report.normalizer = plan.runs.empty() ? 0 : plan.runs[0].normalizer;
    if (!opt.tracks_dir.empty()) fs::create_directories(opt.tracks_dir);

    int run_no = 0;
    for (auto& run : plan.runs) {
        RunScore score;
        score.run = run_no++;
        score.held_out_user = run.held_out_user;
        try {
            Dataset prepared = opt.standardize ? standardize(ds, run.train_idx) : ds;
            std::vector<Sequence> train_seqs, test_seqs;
            for (int i : run.train_idx) train_seqs.push_back(prepared.sequences[i]);
            for (int i : run.test_idx) test_seqs.push_back(prepared.sequences[i]);

            if (opt.progress)
                (*opt.progress) << "# run " << score.run << " held_out=" << run.held_out_user
                                << " normalizer=" << run.normalizer << "\n";
            TrainResult tr = train(train_seqs, cfg, opt.progress);
            if (tr.aborted) throw TrainAbort(tr.abort_reason);

            std::vector<std::vector<int>> tracks;
            evaluate_sequences(tr.model, test_seqs, run.normalizer, &score.accuracy_pct,
                               &score.edit_pct, opt.tracks_dir.empty() ? nullptr : &tracks);
            if (!opt.tracks_dir.empty()) {
                for (size_t i = 0; i < test_seqs.size(); ++i) {
                    std::ofstream pf(fs::path(opt.tracks_dir) /
                                     (test_seqs[i].trial_id + "_pred.txt"));
                    std::ofstream tf(fs::path(opt.tracks_dir) /
                                     (test_seqs[i].trial_id + "_true.txt"));
                    for (int t = 0; t < test_seqs[i].length(); ++t) {
                        pf << (test_seqs[i].mask[t] ? tracks[i][t] : -1) << "\n";
                        tf << (test_seqs[i].mask[t] ? test_seqs[i].labels[t] : -1) << "\n";
                    }
                }
            }
        } catch (const std::exception& e) {
            score.failed = true;
            if (opt.progress)
                (*opt.progress) << "# run " << score.run << " FAILED: " << e.what() << "\n";
        }
        report.runs.push_back(score);
    }
    report.finalize();
    return report;
}

}  // namespace seqlab
