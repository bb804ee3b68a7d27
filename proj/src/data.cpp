#include "seqlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace seqlab {

std::vector<std::string> Dataset::users() const {
    std::set<std::string> u;
    for (auto& s : sequences) u.insert(s.user_id);
    return {u.begin(), u.end()};
}

std::vector<int> jigsaws_default_columns() {
    // 76-column layout: 19 columns per manipulator (pos 3, rot 9, lin vel 3,
    // ang vel 3, gripper 1), slave-left block at 38, slave-right at 57.
    std::vector<int> cols;
    for (int base : {38, 57}) {
        for (int i = 0; i < 3; ++i) cols.push_back(base + i);        // position
        for (int i = 12; i < 15; ++i) cols.push_back(base + i);      // linear velocity
        cols.push_back(base + 18);                                   // gripper angle
    }
    return cols;
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string infer_user(const std::string& trial) {
    size_t pos = trial.find_last_of('_');
    std::string tail = pos == std::string::npos ? trial : trial.substr(pos + 1);
    if (tail.empty()) throw DataError("cannot infer user from trial name: " + trial);
    return tail.substr(0, 1);
}

}  // namespace

Dataset load_jigsaws(const std::string& root, const LoadConfig& cfg) {
    if (cfg.decimation < 1) throw DataError("decimation factor must be >= 1");
    const fs::path kin_dir = fs::path(root) / "kinematics";
    const fs::path trans_dir = fs::path(root) / "transcriptions";
    if (!fs::is_directory(kin_dir)) throw DataError("missing kinematics directory: " + kin_dir.string());
    if (!fs::is_directory(trans_dir))
        throw DataError("missing transcriptions directory: " + trans_dir.string());

    std::vector<std::string> trials;
    for (auto& e : fs::directory_iterator(kin_dir))
        if (e.path().extension() == ".txt") trials.push_back(e.path().stem().string());
    std::sort(trials.begin(), trials.end());
    if (trials.empty()) throw DataError("no kinematics files under " + kin_dir.string());

    std::map<std::string, std::string> user_map;
    const fs::path users_file = fs::path(root) / "meta" / "users.txt";
    if (fs::exists(users_file)) {
        std::ifstream in(users_file);
        std::string trial, user;
        while (in >> trial >> user) user_map[trial] = user;
    }

    Dataset ds;
    std::set<std::string> label_names;
    struct RawTrial {
        std::string name;
        std::vector<Vec> rows;
        std::vector<std::tuple<int, int, std::string>> spans;
    };
    std::vector<RawTrial> raws;

    for (auto& trial : trials) {
        RawTrial raw;
        raw.name = trial;
        const fs::path kf = kin_dir / (trial + ".txt");
        std::ifstream kin(kf);
        if (!kin) throw DataError("cannot open kinematics file: " + kf.string());
        std::string line;
        int lineno = 0;
        size_t width = 0;
        while (std::getline(kin, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            std::istringstream ls(line);
            Vec row;
            double v;
            while (ls >> v) row.push_back(v);
            if (!ls.eof())
                throw DataError("bad number in " + kf.string() + " line " + std::to_string(lineno));
            if (width == 0) width = row.size();
            if (row.size() != width)
                throw DataError("ragged row in " + kf.string() + " line " + std::to_string(lineno) +
                                ": expected " + std::to_string(width) + " columns, got " +
                                std::to_string(row.size()));
            raw.rows.push_back(std::move(row));
        }
        if (raw.rows.empty()) throw DataError("empty kinematics file: " + kf.string());

        const fs::path tf = trans_dir / (trial + ".txt");
        std::ifstream trans(tf);
        if (!trans) throw DataError("missing transcription file: " + tf.string());
        lineno = 0;
        while (std::getline(trans, line)) {
            ++lineno;
            line = trim(line);
            if (line.empty()) continue;
            std::istringstream ls(line);
            int start, end;
            std::string label;
            if (!(ls >> start >> end >> label))
                throw DataError("bad transcription line in " + tf.string() + " line " +
                                std::to_string(lineno));
            if (start < 1 || end < start || end > static_cast<int>(raw.rows.size()))
                throw DataError("span [" + std::to_string(start) + "," + std::to_string(end) +
                                "] out of range in " + tf.string() + " line " +
                                std::to_string(lineno) + " (trial has " +
                                std::to_string(raw.rows.size()) + " frames)");
            label_names.insert(label);
            raw.spans.emplace_back(start, end, label);
        }
        raws.push_back(std::move(raw));
    }

    ds.class_names.assign(label_names.begin(), label_names.end());  // lexicographic
    std::map<std::string, int> label_idx;
    for (size_t i = 0; i < ds.class_names.size(); ++i) label_idx[ds.class_names[i]] = static_cast<int>(i);

    std::vector<int> columns = cfg.columns;
    const size_t file_width = raws[0].rows[0].size();
    if (columns.empty()) {
        if (file_width >= 76)
            columns = jigsaws_default_columns();
        else
            for (size_t j = 0; j < file_width; ++j) columns.push_back(static_cast<int>(j));
    }
    for (int c : columns)
        if (c < 0 || c >= static_cast<int>(file_width))
            throw DataError("column " + std::to_string(c) + " out of range for files with " +
                            std::to_string(file_width) + " columns");
    for (int c : columns) ds.feature_names.push_back("col" + std::to_string(c));

    for (auto& raw : raws) {
        const int T_full = static_cast<int>(raw.rows.size());
        std::vector<int> labels(T_full, -1);
        std::vector<uint8_t> mask(T_full, 0);
        for (auto& [start, end, label] : raw.spans)
            for (int t = start - 1; t < end; ++t) {  // 1-based inclusive
                labels[t] = label_idx[label];
                mask[t] = 1;
            }
        Sequence seq;
        seq.trial_id = raw.name;
        auto it = user_map.find(raw.name);
        seq.user_id = it != user_map.end() ? it->second : infer_user(raw.name);
        for (int t = 0; t < T_full; t += cfg.decimation) {
            Vec x(columns.size());
            for (size_t j = 0; j < columns.size(); ++j) x[j] = raw.rows[t][columns[j]];
            seq.inputs.push_back(std::move(x));
            seq.labels.push_back(labels[t]);
            seq.mask.push_back(mask[t]);
        }
        ds.sequences.push_back(std::move(seq));
    }

    // fail fast on users with no labeled frames at all
    std::map<std::string, long> labeled_per_user;
    for (auto& s : ds.sequences) {
        long& n = labeled_per_user[s.user_id];
        for (uint8_t m : s.mask) n += m;
    }
    for (auto& [user, n] : labeled_per_user)
        if (n == 0) throw DataError("user " + user + " has no labeled frames in any trial");
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& out_dir) {
    const fs::path root(out_dir);
    fs::create_directories(root / "kinematics");
    fs::create_directories(root / "transcriptions");
    fs::create_directories(root / "meta");

    std::ofstream users(root / "meta" / "users.txt");
    for (auto& seq : ds.sequences) {
        users << seq.trial_id << " " << seq.user_id << "\n";
        std::ofstream kin(root / "kinematics" / (seq.trial_id + ".txt"));
        char buf[32];
        for (auto& row : seq.inputs) {
            for (size_t j = 0; j < row.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", row[j]);
                kin << (j ? " " : "") << buf;
            }
            kin << "\n";
        }
        std::ofstream trans(root / "transcriptions" / (seq.trial_id + ".txt"));
        for (auto& seg : to_segments(seq.labels, seq.mask))
            trans << seg.start_frame + 1 << " " << seg.end_frame << " "
                  << ds.class_names.at(seg.label) << "\n";
    }
}

Vec one_hot(int label, int n_y) {
    if (label < 0 || label >= n_y)
        throw ContractError("one_hot: label " + std::to_string(label) + " out of range for " +
                            std::to_string(n_y) + " classes");
    Vec v(n_y, 0.0);
    v[label] = 1.0;
    return v;
}

Dataset standardize(const Dataset& ds, const std::vector<int>& train_idx) {
    if (train_idx.empty()) throw ContractError("standardize: empty stats source");
    const int D = ds.n_x();
    Vec mean(D, 0.0), var(D, 0.0);
    long n = 0;
    for (int i : train_idx)
        for (auto& row : ds.sequences.at(i).inputs) {
            for (int j = 0; j < D; ++j) mean[j] += row[j];
            ++n;
        }
    for (int j = 0; j < D; ++j) mean[j] /= n;
    for (int i : train_idx)
        for (auto& row : ds.sequences.at(i).inputs)
            for (int j = 0; j < D; ++j) var[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
    Vec sd(D);
    for (int j = 0; j < D; ++j) sd[j] = std::max(std::sqrt(var[j] / n), 1e-8);

    Dataset out = ds;
    out.norm_mean = mean;
    out.norm_std = sd;
    for (auto& seq : out.sequences)
        for (auto& row : seq.inputs)
            for (int j = 0; j < D; ++j) row[j] = (row[j] - mean[j]) / sd[j];
    return out;
}

SplitPlan louo_splits(const Dataset& ds) {
    auto users = ds.users();
    if (users.size() < 2) throw ContractError("louo_splits: need at least 2 users");
    std::vector<SegmentSeq> truth;
    for (auto& s : ds.sequences) truth.push_back(to_segments(s.labels, s.mask));
    const int norm = dataset_normalizer(truth);

    SplitPlan plan;
    for (auto& user : users) {
        SplitRun run;
        run.held_out_user = user;
        run.normalizer = norm;
        for (size_t i = 0; i < ds.sequences.size(); ++i)
            (ds.sequences[i].user_id == user ? run.test_idx : run.train_idx)
                .push_back(static_cast<int>(i));
        plan.runs.push_back(std::move(run));
    }
    return plan;
}

Dataset synth_longrange(Rng& rng, int n_sequences, int T, int lag) {
    if (lag < 0 || lag >= T) throw ContractError("synth_longrange: need 0 <= lag < T");
    Dataset ds;
    ds.class_names = {"neg", "pos"};
    ds.feature_names = {"col0"};
    for (int s = 0; s < n_sequences; ++s) {
        Sequence seq;
        char name[64];
        std::snprintf(name, sizeof name, "longrange_u0_t%04d", s);
        seq.trial_id = name;
        seq.user_id = "u0";
        // persistent sign with rare flips: recent inputs hint at the delayed
        // label (which gets gradient flowing), but matching the exact
        // lag-delayed sign still requires memory spanning the full lag
        std::vector<int> signs(T);
        for (int t = 0; t < T; ++t) {
            if (t == 0)
                signs[t] = rng.next_double() < 0.5 ? -1 : 1;
            else
                signs[t] = rng.next_double() < 0.02 ? -signs[t - 1] : signs[t - 1];
            seq.inputs.push_back({signs[t] + 0.1 * rng.next_uniform(1.0)});
        }
        for (int t = 0; t < T; ++t) {
            if (t < lag) {
                seq.labels.push_back(-1);
                seq.mask.push_back(0);
            } else {
                seq.labels.push_back(signs[t - lag] > 0 ? 1 : 0);
                seq.mask.push_back(1);
            }
        }
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

Dataset synth_regimes(Rng& rng, int n_per_user, int n_users, int T, int n_classes) {
    if (n_classes < 2) throw ContractError("synth_regimes: need n_classes >= 2");
    if (n_users < 1 || n_per_user < 1 || T < 1)
        throw ContractError("synth_regimes: need n_users, n_per_user, T >= 1");
    constexpr int kDimX = 6, kDimZ = 3;
    constexpr double kContinueProb = 1.0 - 1.0 / 20.0;  // mean segment length 20

    Dataset ds;
    for (int k = 0; k < n_classes; ++k) {
        char name[16];
        std::snprintf(name, sizeof name, "c%02d", k);
        ds.class_names.push_back(name);
    }
    for (int j = 0; j < kDimX; ++j) ds.feature_names.push_back("col" + std::to_string(j));

    // regime-specific emissions: offset + linear map of the shared latent
    std::vector<Mat> emit;
    std::vector<Vec> offset;
    for (int k = 0; k < n_classes; ++k) {
        emit.push_back(init_uniform(rng, kDimX, kDimZ, 1.0));
        offset.push_back(init_uniform_vec(rng, kDimX, 2.0));
    }
    // per-user affine distortion near the identity
    std::vector<Mat> user_lin;
    std::vector<Vec> user_off;
    for (int u = 0; u < n_users; ++u) {
        Mat U = init_uniform(rng, kDimX, kDimX, 0.1);
        for (int j = 0; j < kDimX; ++j) U(j, j) += 1.0;
        user_lin.push_back(std::move(U));
        user_off.push_back(init_uniform_vec(rng, kDimX, 0.2));
    }

    for (int u = 0; u < n_users; ++u) {
        for (int s = 0; s < n_per_user; ++s) {
            Sequence seq;
            char name[64];
            std::snprintf(name, sizeof name, "regimes_u%02d_t%04d", u, s);
            seq.trial_id = name;
            seq.user_id = "u" + std::string(u < 10 ? "0" : "") + std::to_string(u);
            Vec z(kDimZ, 0.0);
            int regime = static_cast<int>(rng.next_u64() % n_classes);
            for (int t = 0; t < T; ++t) {
                if (t > 0 && rng.next_double() > kContinueProb) {
                    int step = 1 + static_cast<int>(rng.next_u64() % (n_classes - 1));
                    regime = (regime + step) % n_classes;
                }
                for (int j = 0; j < kDimZ; ++j) z[j] = 0.95 * z[j] + 0.3 * rng.next_uniform(1.0);
                Vec x = matvec(emit[regime], z);
                for (int j = 0; j < kDimX; ++j)
                    x[j] += offset[regime][j] + 0.5 * rng.next_uniform(1.0);
                Vec xd = matvec(user_lin[u], x);
                for (int j = 0; j < kDimX; ++j) xd[j] += user_off[u][j];
                seq.inputs.push_back(std::move(xd));
                seq.labels.push_back(regime);
                seq.mask.push_back(1);
            }
            ds.sequences.push_back(std::move(seq));
        }
    }
    return ds;
}

}  // namespace seqlab
