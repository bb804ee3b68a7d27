#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "seqlab/data.hpp"

namespace fs = std::filesystem;
using namespace seqlab;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("seqlab_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream os(p);
    os << content;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("one_hot") {
    CHECK(one_hot(1, 3) == Vec{0, 1, 0});
    CHECK(one_hot(0, 2) == Vec{1, 0});
    CHECK(one_hot(0, 1) == Vec{1});
    CHECK_THROWS_AS(one_hot(3, 3), ContractError);
    CHECK_THROWS_AS(one_hot(-1, 3), ContractError);
    for (int k = 0; k < 5; ++k) {
        Vec v = one_hot(k, 5);
        int arg = 0;
        for (int i = 1; i < 5; ++i)
            if (v[i] > v[arg]) arg = i;
        CHECK(arg == k);
    }
}

TEST_CASE("load_jigsaws parses a toy corpus") {
    TempDir dir("toy");
    write_file(dir.path / "kinematics" / "Task_A001.txt",
               "1 2\n3 4\n5 6\n7 8\n9 10\n11 12\n13 14\n15 16\n17 18\n19 20\n");
    write_file(dir.path / "transcriptions" / "Task_A001.txt", "2 7 grab\n8 9 pull\n");
    write_file(dir.path / "kinematics" / "Task_B001.txt", "1 1\n2 2\n3 3\n");
    write_file(dir.path / "transcriptions" / "Task_B001.txt", "1 3 pull\n");

    Dataset ds = load_jigsaws(dir.path.string());
    REQUIRE(ds.sequences.size() == 2);
    CHECK(ds.class_names == std::vector<std::string>{"grab", "pull"});  // lexicographic
    CHECK(ds.n_x() == 2);
    CHECK(ds.sequences[0].user_id == "A");
    CHECK(ds.sequences[1].user_id == "B");

    const Sequence& s = ds.sequences[0];
    REQUIRE(s.length() == 10);
    CHECK(s.mask[0] == 0);   // frame 1 uncovered
    CHECK(s.mask[1] == 1);   // span is 1-based inclusive
    CHECK(s.labels[1] == 0);
    CHECK(s.labels[7] == 1);
    CHECK(s.mask[9] == 0);
    CHECK(s.inputs[2] == Vec{5, 6});

    // determinism
    Dataset again = load_jigsaws(dir.path.string());
    CHECK(again.sequences[0].inputs == ds.sequences[0].inputs);
    CHECK(again.sequences[0].labels == ds.sequences[0].labels);

    SUBCASE("decimation keeps every k-th frame") {
        LoadConfig cfg;
        cfg.decimation = 6;
        Dataset dec = load_jigsaws(dir.path.string(), cfg);
        REQUIRE(dec.sequences[0].length() == 2);  // ceil(10/6)
        CHECK(dec.sequences[0].inputs[0] == Vec{1, 2});
        CHECK(dec.sequences[0].inputs[1] == Vec{13, 14});
        CHECK(dec.sequences[0].labels[1] == 0);  // frame 7 of the grab span

        cfg.decimation = 1;
        Dataset ident = load_jigsaws(dir.path.string(), cfg);
        CHECK(ident.sequences[0].inputs == ds.sequences[0].inputs);
        CHECK(ident.sequences[0].labels == ds.sequences[0].labels);
        CHECK(ident.sequences[0].mask == ds.sequences[0].mask);
    }

    SUBCASE("meta/users.txt overrides the name convention") {
        write_file(dir.path / "meta" / "users.txt", "Task_A001 alice\nTask_B001 bob\n");
        Dataset named = load_jigsaws(dir.path.string());
        CHECK(named.sequences[0].user_id == "alice");
    }
}

TEST_CASE("load_jigsaws error paths") {
    TempDir dir("errs");
    write_file(dir.path / "kinematics" / "Task_A001.txt", "1 2\n3 4\n");

    SUBCASE("missing transcriptions directory") {
        CHECK_THROWS_WITH_AS(load_jigsaws(dir.path.string()),
                             doctest::Contains("transcriptions"), DataError);
    }
    SUBCASE("missing transcription for one trial") {
        fs::create_directories(dir.path / "transcriptions");
        CHECK_THROWS_WITH_AS(load_jigsaws(dir.path.string()), doctest::Contains("Task_A001"),
                             DataError);
    }
    SUBCASE("ragged row") {
        write_file(dir.path / "kinematics" / "Task_A001.txt", "1 2\n3 4 5\n");
        write_file(dir.path / "transcriptions" / "Task_A001.txt", "1 2 x\n");
        CHECK_THROWS_WITH_AS(load_jigsaws(dir.path.string()), doctest::Contains("line 2"),
                             DataError);
    }
    SUBCASE("span exceeding frame count") {
        write_file(dir.path / "transcriptions" / "Task_A001.txt", "1 5 x\n");
        CHECK_THROWS_WITH_AS(load_jigsaws(dir.path.string()), doctest::Contains("out of range"),
                             DataError);
    }
    SUBCASE("user with no labeled frames") {
        write_file(dir.path / "transcriptions" / "Task_A001.txt", "1 2 x\n");
        write_file(dir.path / "kinematics" / "Task_B001.txt", "1 2\n");
        write_file(dir.path / "transcriptions" / "Task_B001.txt", "");
        CHECK_THROWS_WITH_AS(load_jigsaws(dir.path.string()), doctest::Contains("user B"),
                             DataError);
    }
}

TEST_CASE("jigsaws default column map") {
    auto cols = jigsaws_default_columns();
    CHECK(cols == std::vector<int>{38, 39, 40, 50, 51, 52, 56, 57, 58, 59, 69, 70, 71, 75});
}

TEST_CASE("save_dataset round trips through load_jigsaws") {
    Rng rng(11);
    Dataset ds = synth_regimes(rng, 3, 2, 40, 3);
    TempDir dir("roundtrip");
    save_dataset(ds, dir.path.string());
    Dataset back = load_jigsaws(dir.path.string());

    REQUIRE(back.sequences.size() == ds.sequences.size());
    CHECK(back.class_names == ds.class_names);
    for (size_t i = 0; i < ds.sequences.size(); ++i) {
        CHECK(back.sequences[i].user_id == ds.sequences[i].user_id);
        CHECK(back.sequences[i].labels == ds.sequences[i].labels);
        CHECK(back.sequences[i].mask == ds.sequences[i].mask);
        CHECK(back.sequences[i].inputs == ds.sequences[i].inputs);  // %.17g is exact
    }

    // regeneration from the same seed is byte-identical
    TempDir dir2("roundtrip2");
    Rng rng2(11);
    save_dataset(synth_regimes(rng2, 3, 2, 40, 3), dir2.path.string());
    for (auto& e : fs::recursive_directory_iterator(dir.path))
        if (e.is_regular_file()) {
            fs::path rel = fs::relative(e.path(), dir.path);
            CHECK(slurp(e.path()) == slurp(dir2.path / rel));
        }
}

TEST_CASE("standardize") {
    Rng rng(5);
    Dataset ds = synth_regimes(rng, 2, 2, 30, 2);
    std::vector<int> train_idx{0, 1};

    Dataset st = standardize(ds, train_idx);
    REQUIRE(static_cast<int>(st.norm_mean.size()) == ds.n_x());

    SUBCASE("training features become zero mean unit variance") {
        Vec mean(ds.n_x(), 0.0);
        long n = 0;
        for (int i : train_idx)
            for (auto& row : st.sequences[i].inputs) {
                for (int j = 0; j < ds.n_x(); ++j) mean[j] += row[j];
                ++n;
            }
        for (int j = 0; j < ds.n_x(); ++j) CHECK(std::fabs(mean[j] / n) < 1e-10);
        // re-standardizing matched stats is the identity
        Dataset st2 = standardize(st, train_idx);
        for (int j = 0; j < ds.n_x(); ++j) {
            CHECK(st2.sequences[0].inputs[0][j] ==
                  doctest::Approx(st.sequences[0].inputs[0][j]).epsilon(1e-10));
        }
    }

    SUBCASE("constant feature maps to zeros via the std floor") {
        Dataset flat = ds;
        for (auto& seq : flat.sequences)
            for (auto& row : seq.inputs) row[0] = 3.14;
        Dataset stf = standardize(flat, train_idx);
        // mean accumulation leaves a tiny residual that the 1e-8 floor amplifies
        for (auto& row : stf.sequences[0].inputs) CHECK(std::fabs(row[0]) < 1e-4);
    }

    SUBCASE("stats ignore non-training sequences") {
        Dataset perturbed = ds;
        for (auto& row : perturbed.sequences[2].inputs)
            for (auto& v : row) v += 100.0;
        Dataset st_p = standardize(perturbed, train_idx);
        CHECK(st_p.norm_mean == st.norm_mean);
        CHECK(st_p.norm_std == st.norm_std);
        // applying train stats leaves test features off-center
        double mean0 = 0.0;
        for (auto& row : st_p.sequences[2].inputs) mean0 += row[0];
        mean0 /= st_p.sequences[2].inputs.size();
        CHECK(std::fabs(mean0) > 1e-6);
    }

    CHECK_THROWS_AS(standardize(ds, {}), ContractError);
}

TEST_CASE("louo_splits") {
    Rng rng(9);
    Dataset ds = synth_regimes(rng, 4, 3, 25, 2);
    SplitPlan plan = louo_splits(ds);
    REQUIRE(plan.runs.size() == 3);

    std::set<int> seen;
    for (auto& run : plan.runs) {
        for (int i : run.test_idx) {
            CHECK(ds.sequences[i].user_id == run.held_out_user);
            CHECK(!seen.count(i));
            seen.insert(i);
        }
        for (int i : run.train_idx) CHECK(ds.sequences[i].user_id != run.held_out_user);
        CHECK(run.normalizer >= 1);
    }
    CHECK(seen.size() == ds.sequences.size());  // test sets partition the data

    Dataset two = synth_regimes(rng, 2, 2, 25, 2);
    CHECK(louo_splits(two).runs.size() == 2);

    Dataset one = synth_regimes(rng, 2, 1, 25, 2);
    CHECK_THROWS_AS(louo_splits(one), ContractError);
}

TEST_CASE("synth_longrange") {
    Rng rng(20);
    Dataset ds = synth_longrange(rng, 4, 50, 20);
    REQUIRE(ds.sequences.size() == 4);
    CHECK(ds.n_y() == 2);
    for (auto& seq : ds.sequences) {
        REQUIRE(seq.length() == 50);
        for (int t = 0; t < 20; ++t) CHECK(seq.mask[t] == 0);
        for (int t = 20; t < 50; ++t) {
            CHECK(seq.mask[t] == 1);
            // label is the sign class of the input lag frames back
            CHECK(seq.labels[t] == (seq.inputs[t - 20][0] > 0 ? 1 : 0));
        }
    }
    Rng r1(3), r2(3);
    Dataset a = synth_longrange(r1, 2, 30, 5), b = synth_longrange(r2, 2, 30, 5);
    CHECK(a.sequences[1].inputs == b.sequences[1].inputs);

    SUBCASE("lag 0 is the instantaneous task") {
        Rng r(1);
        Dataset inst = synth_longrange(r, 1, 10, 0);
        for (uint8_t m : inst.sequences[0].mask) CHECK(m == 1);
    }
    Rng r(1);
    CHECK_THROWS_AS(synth_longrange(r, 1, 10, 10), ContractError);
}

TEST_CASE("synth_regimes segment statistics") {
    Rng rng(31);
    Dataset ds = synth_regimes(rng, 50, 2, 400, 4);
    long segments = 0, frames = 0;
    for (auto& seq : ds.sequences) {
        segments += static_cast<long>(to_segments(seq.labels, seq.mask).size());
        frames += seq.length();
    }
    const double mean_len = static_cast<double>(frames) / segments;
    CHECK(mean_len > 18.0);  // geometric with mean 20, +-10%
    CHECK(mean_len < 22.0);

    Rng r1(8), r2(8);
    Dataset a = synth_regimes(r1, 2, 2, 50, 3), b = synth_regimes(r2, 2, 2, 50, 3);
    CHECK(a.sequences[3].inputs == b.sequences[3].inputs);
    CHECK(a.sequences[3].labels == b.sequences[3].labels);

    CHECK_THROWS_AS(synth_regimes(rng, 1, 1, 10, 1), ContractError);
}
