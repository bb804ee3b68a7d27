#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "seqlab/checkpoint.hpp"
#include "seqlab/config.hpp"
#include "seqlab/data.hpp"
#include "seqlab/harness.hpp"
#include "seqlab/metrics.hpp"
#include "seqlab/render.hpp"
#include "seqlab/training.hpp"

namespace fs = std::filesystem;
using namespace seqlab;

namespace {

// exit codes: 0 ok, 2 config, 3 data, 4 gradcheck gate, 5 runtime abort
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitGate = 4;
constexpr int kExitAbort = 5;

struct CommonOpts {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> values;
    std::vector<std::pair<std::string, CLI::Option*>> opts;
    bool no_standardize = false;
    CLI::Option* no_std_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (key = value lines)");
        values.reserve(20);
        auto add = [&](const std::string& flag, const std::string& key, const std::string& help) {
            values.emplace_back(key, "");
            auto* opt = cmd->add_option(flag, values.back().second, help);
            opts.emplace_back(key, opt);
        };
        add("--seed", "seed", "rng seed");
        add("--mode", "mode", "forward or bidirectional");
        add("--cell", "cell", "vanilla or lstm");
        add("--hidden", "hidden", "hidden units per layer");
        add("--layers", "layers", "recurrent layers (1 or 2)");
        add("--epochs", "epochs", "training epochs");
        add("--batch-size", "batch_size", "sequences per mini-batch");
        add("--dropout", "dropout", "dropout probability");
        add("--learning-rate", "learning_rate", "base learning rate");
        add("--halve-after", "halve_after", "epochs before the first halving");
        add("--halve-every", "halve_every", "epochs between halvings");
        add("--grad-clip", "grad_clip", "global gradient-norm ceiling");
        add("--init-scale", "init_scale", "uniform init half-width");
        add("--decimation", "decimation", "keep every k-th frame");
        add("--data", "data_root", "dataset root directory");
        no_std_opt = cmd->add_flag("--no-standardize", no_standardize,
                                   "disable z-scoring of input features");
    }

    void apply(RunConfig& cfg) {
        if (!config_path.empty()) cfg.apply_file(config_path);
        for (size_t i = 0; i < opts.size(); ++i)
            if (opts[i].second->count() > 0) cfg.set(opts[i].first, values[i].second, "flag");
        if (no_std_opt->count() > 0) cfg.set("standardize", "false", "flag");
    }
};

Dataset load_data(const RunConfig& cfg) {
    if (cfg.data_root.empty())
        throw ConfigError("no dataset root: pass --data or set SEQLAB_DATA_ROOT");
    LoadConfig lc;
    lc.decimation = cfg.decimation;
    return load_jigsaws(cfg.data_root, lc);
}

std::vector<int> read_track(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open track file: " + path);
    std::vector<int> track;
    int v;
    while (in >> v) track.push_back(v);
    return track;
}

int cmd_synth(const std::string& kind, uint64_t seed, int n_sequences, int n_users, int T, int lag,
              int n_classes, const std::string& out_dir) {
    Rng rng(seed);
    Dataset ds;
    std::ostringstream manifest;
    manifest << "kind = " << kind << "\nseed = " << seed << "\nT = " << T << "\n";
    if (kind == "longrange") {
        ds = synth_longrange(rng, n_sequences, T, lag);
        manifest << "n_sequences = " << n_sequences << "\nlag = " << lag << "\n";
    } else {
        ds = synth_regimes(rng, n_sequences, n_users, T, n_classes);
        manifest << "n_per_user = " << n_sequences << "\nn_users = " << n_users
                 << "\nn_classes = " << n_classes << "\n";
    }
    save_dataset(ds, out_dir);
    std::ofstream mf(fs::path(out_dir) / "manifest.txt");
    if (!mf) throw DataError("cannot write manifest under " + out_dir);
    mf << manifest.str();
    std::cout << "wrote " << ds.sequences.size() << " sequences to " << out_dir << "\n";
    return 0;
}

int cmd_train(RunConfig& cfg, const std::string& out_ckpt, const std::string& loss_log) {
    std::cout << cfg.provenance_log();
    Dataset ds = load_data(cfg);
    std::vector<int> all_idx(ds.sequences.size());
    std::iota(all_idx.begin(), all_idx.end(), 0);
    Dataset prepared = cfg.standardize ? standardize(ds, all_idx) : ds;

    std::ofstream log_file;
    std::ostream* progress = &std::cout;
    if (!loss_log.empty()) {
        log_file.open(loss_log, std::ios::trunc);
        if (!log_file) throw DataError("cannot write loss log: " + loss_log);
        progress = &log_file;
    }
    TrainResult tr = train(prepared.sequences, cfg.train, progress);

    Checkpoint ck;
    ck.model = std::move(tr.model);
    ck.class_names = prepared.class_names;
    ck.feature_names = prepared.feature_names;
    ck.norm_mean = prepared.norm_mean;
    ck.norm_std = prepared.norm_std;
    ck.decimation = cfg.decimation;
    ck.seed = cfg.train.seed;
    save_checkpoint(ck, out_ckpt);
    std::cout << "checkpoint written to " << out_ckpt << "\n";
    if (tr.aborted) {
        std::cerr << "training aborted: " << tr.abort_reason
                  << " (checkpoint holds the last good parameters)\n";
        return kExitAbort;
    }
    return 0;
}

int cmd_xval(RunConfig& cfg, const std::string& out_csv, const std::string& out_text,
             const std::string& tracks_dir) {
    std::cout << cfg.provenance_log();
    Dataset ds = load_data(cfg);
    XvalOptions opt;
    opt.standardize = cfg.standardize;
    opt.tracks_dir = tracks_dir;
    opt.progress = &std::cout;
    EvalReport report = run_xval(ds, cfg.train, opt);

    std::cout << report.to_text();
    if (!out_csv.empty()) {
        std::ofstream os(out_csv, std::ios::trunc);
        os << report.to_csv();
    }
    if (!out_text.empty()) {
        std::ofstream os(out_text, std::ios::trunc);
        os << report.to_text();
    }
    for (auto& r : report.runs)
        if (r.failed) return kExitAbort;
    return 0;
}

int cmd_gradcheck(int seeds, bool corrupt) {
    auto results = run_gradcheck(seeds, corrupt);
    bool all_pass = true;
    for (auto& r : results) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.config << " max_rel_err=" << r.max_rel_err
                  << " worst=" << r.worst_param << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "gradcheck: all configurations below 1e-4\n"
                           : "gradcheck: gate FAILED\n");
    return all_pass ? 0 : kExitGate;
}

int cmd_render(const std::string& truth_path, const std::string& pred_path,
               const std::string& class_names_csv, const std::string& out_svg) {
    std::vector<int> truth = read_track(truth_path);
    std::vector<int> pred = read_track(pred_path);
    if (truth.size() != pred.size())
        throw ContractError("render: truth has " + std::to_string(truth.size()) +
                            " frames, prediction has " + std::to_string(pred.size()));
    std::vector<uint8_t> mask(truth.size(), 1);
    int n_classes = 0;
    for (size_t t = 0; t < truth.size(); ++t) {
        if (truth[t] < 0 || pred[t] < 0) {
            mask[t] = 0;
            continue;
        }
        n_classes = std::max({n_classes, truth[t] + 1, pred[t] + 1});
    }
    std::vector<std::string> class_names;
    if (!class_names_csv.empty()) {
        std::istringstream is(class_names_csv);
        std::string item;
        while (std::getline(is, item, ',')) class_names.push_back(item);
    } else {
        for (int k = 0; k < n_classes; ++k) class_names.push_back("class " + std::to_string(k));
    }
    render_ribbons(truth, pred, mask, class_names, out_svg);
    std::cout << "wrote " << out_svg << "\n";
    return 0;
}

int cmd_permtest(const std::string& path_a, const std::string& path_b,
                 const std::string& statistic, uint64_t seed) {
    auto read = [](const std::string& p) {
        std::ifstream in(p);
        if (!in) throw DataError("cannot open report: " + p);
        std::stringstream ss;
        ss << in.rdbuf();
        return EvalReport::from_csv(ss.str());
    };
    EvalReport a = read(path_a), b = read(path_b);
    if (a.runs.size() != b.runs.size())
        throw DataError("reports cover different run counts (" + std::to_string(a.runs.size()) +
                        " vs " + std::to_string(b.runs.size()) + ")");
    for (size_t i = 0; i < a.runs.size(); ++i)
        if (a.runs[i].held_out_user != b.runs[i].held_out_user)
            throw DataError("run " + std::to_string(i) + " pairs different users: " +
                            a.runs[i].held_out_user + " vs " + b.runs[i].held_out_user);

    auto run_stat = [&](const char* name, auto getter) {
        std::vector<double> va, vb;
        for (size_t i = 0; i < a.runs.size(); ++i) {
            va.push_back(getter(a.runs[i]));
            vb.push_back(getter(b.runs[i]));
        }
        PermTestResult r = permutation_test(va, vb, true, seed);
        std::cout << "statistic=" << name << " p_value=" << r.p_value
                  << " mode=" << (r.exact ? "exact" : "montecarlo") << "\n";
    };
    if (statistic == "accuracy" || statistic == "both")
        run_stat("accuracy", [](const RunScore& r) { return r.accuracy_pct; });
    if (statistic == "edit" || statistic == "both")
        run_stat("edit", [](const RunScore& r) { return r.edit_pct; });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recurrent sequence labeling toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_kind, synth_out;
    uint64_t synth_seed = 1;
    int synth_n = 10, synth_users = 5, synth_T = 100, synth_lag = 20, synth_classes = 4;
    synth->add_option("--kind", synth_kind, "longrange or regimes")
        ->required()
        ->check(CLI::IsMember({"longrange", "regimes"}));
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", synth_seed, "rng seed");
    synth->add_option("--n-sequences", synth_n, "sequences (longrange: total, regimes: per user)");
    synth->add_option("--n-users", synth_users, "users (regimes)");
    synth->add_option("--T", synth_T, "frames per sequence");
    synth->add_option("--lag", synth_lag, "label lag (longrange)");
    synth->add_option("--n-classes", synth_classes, "classes (regimes)");

    // train
    auto* train_cmd = app.add_subcommand("train", "train on all sequences of a dataset");
    CommonOpts train_opts;
    train_opts.attach(train_cmd);
    std::string train_out = "model.ckpt", train_log;
    train_cmd->add_option("--out", train_out, "checkpoint path");
    train_cmd->add_option("--loss-log", train_log, "per-epoch loss log path");

    // xval
    auto* xval = app.add_subcommand("xval", "leave-one-user-out cross validation");
    CommonOpts xval_opts;
    xval_opts.attach(xval);
    std::string xval_csv = "report.csv", xval_text, xval_tracks;
    xval->add_option("--out", xval_csv, "CSV report path");
    xval->add_option("--report-text", xval_text, "key-value text report path");
    xval->add_option("--tracks-dir", xval_tracks, "dump per-trial label tracks here");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "analytic vs finite-difference gradients");
    int gc_seeds = 5;
    gradcheck->add_option("--seeds", gc_seeds, "seeds per configuration");

    // render
    auto* render = app.add_subcommand("render", "ribbon plot of truth vs prediction");
    std::string r_truth, r_pred, r_classes, r_out = "ribbons.svg";
    render->add_option("--truth", r_truth, "truth track file (one label per line, -1 masked)")
        ->required();
    render->add_option("--pred", r_pred, "prediction track file")->required();
    render->add_option("--class-names", r_classes, "comma-separated class names");
    render->add_option("--out", r_out, "output SVG path");

    // permtest
    auto* permtest = app.add_subcommand("permtest", "paired-sample permutation test on two reports");
    std::string p_a, p_b, p_stat = "both";
    uint64_t p_seed = 1;
    permtest->add_option("--a", p_a, "first CSV report")->required();
    permtest->add_option("--b", p_b, "second CSV report")->required();
    permtest->add_option("--statistic", p_stat, "accuracy, edit, or both")
        ->check(CLI::IsMember({"accuracy", "edit", "both"}));
    permtest->add_option("--seed", p_seed, "Monte-Carlo seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (*synth) {
            if (synth_kind == "longrange" && synth_lag >= synth_T)
                throw ConfigError("longrange needs lag < T");
            return cmd_synth(synth_kind, synth_seed, synth_n, synth_users, synth_T, synth_lag,
                             synth_classes, synth_out);
        }
        if (*train_cmd) {
            RunConfig cfg;
            train_opts.apply(cfg);
            if (cfg.train.hidden <= 0) throw ConfigError("hidden must be >= 1");
            return cmd_train(cfg, train_out, train_log);
        }
        if (*xval) {
            RunConfig cfg;
            xval_opts.apply(cfg);
            if (cfg.train.hidden <= 0) throw ConfigError("hidden must be >= 1");
            return cmd_xval(cfg, xval_csv, xval_text, xval_tracks);
        }
        if (*gradcheck) {
            const bool corrupt = std::getenv("SEQLAB_GRADCHECK_CORRUPT") != nullptr;
            return cmd_gradcheck(gc_seeds, corrupt);
        }
        if (*render) return cmd_render(r_truth, r_pred, r_classes, r_out);
        if (*permtest) return cmd_permtest(p_a, p_b, p_stat, p_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const TrainAbort& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return kExitAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAbort;
    }
    return 0;
}
