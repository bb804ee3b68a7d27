#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "seqlab/metrics.hpp"

using namespace seqlab;

namespace {

// independent memoized-recursion Levenshtein oracle
int lev_oracle(const std::vector<int>& a, const std::vector<int>& b, size_t i, size_t j,
               std::vector<int>& memo, size_t stride) {
    int& slot = memo[i * stride + j];
    if (slot >= 0) return slot;
    int r;
    if (i == a.size())
        r = static_cast<int>(b.size() - j);
    else if (j == b.size())
        r = static_cast<int>(a.size() - i);
    else {
        r = lev_oracle(a, b, i + 1, j + 1, memo, stride) + (a[i] == b[j] ? 0 : 1);
        r = std::min(r, lev_oracle(a, b, i + 1, j, memo, stride) + 1);
        r = std::min(r, lev_oracle(a, b, i, j + 1, memo, stride) + 1);
    }
    return slot = r;
}

int lev_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    const size_t stride = b.size() + 1;
    std::vector<int> memo((a.size() + 1) * stride, -1);
    return lev_oracle(a, b, 0, 0, memo, stride);
}

std::vector<std::vector<int>> all_lists(int max_len, int alphabet) {
    std::vector<std::vector<int>> out = {{}};
    std::vector<std::vector<int>> frontier = {{}};
    for (int l = 0; l < max_len; ++l) {
        std::vector<std::vector<int>> next;
        for (auto& base : frontier)
            for (int c = 0; c < alphabet; ++c) {
                auto v = base;
                v.push_back(c);
                out.push_back(v);
                next.push_back(std::move(v));
            }
        frontier = std::move(next);
    }
    return out;
}

}  // namespace

TEST_CASE("frame_accuracy") {
    CHECK(frame_accuracy({1, 2, 3}, {1, 2, 3}, {1, 1, 1}) == 100.0);
    CHECK(frame_accuracy({1, 1, 2}, {1, 2, 2}, {1, 1, 1}) ==
          doctest::Approx(100.0 * 2 / 3).epsilon(1e-12));
    CHECK(frame_accuracy({1, 1, 2}, {1, 2, 2}, {1, 0, 1}) == 100.0);
    CHECK_THROWS_AS(frame_accuracy({1}, {1}, {0}), ContractError);

    // invariant under consistent relabeling
    std::vector<int> pred{0, 1, 2, 1, 0}, truth{0, 2, 2, 1, 1};
    std::vector<uint8_t> mask{1, 1, 1, 1, 1};
    const double base = frame_accuracy(pred, truth, mask);
    int perm[3] = {2, 0, 1};
    for (auto& v : pred) v = perm[v];
    for (auto& v : truth) v = perm[v];
    CHECK(frame_accuracy(pred, truth, mask) == base);
}

TEST_CASE("to_segments") {
    auto segs = to_segments({0, 0, 1, 1, 1, 0}, {1, 1, 1, 1, 1, 1});
    REQUIRE(segs.size() == 3);
    CHECK(segment_labels(segs) == std::vector<int>{0, 1, 0});
    CHECK(segs[1].start_frame == 2);
    CHECK(segs[1].end_frame == 5);

    CHECK(to_segments({2, 2, 2}, {1, 1, 1}).size() == 1);

    // masked gap splits a continuing run
    auto gap = to_segments({0, 0, 0, 0, 0}, {1, 1, 0, 1, 1});
    REQUIRE(gap.size() == 2);
    CHECK(segment_labels(gap) == std::vector<int>{0, 0});

    // expansion reproduces the unmasked labels exactly
    std::vector<int> labels{3, 3, 1, 1, 2, 2, 2, 1};
    std::vector<uint8_t> mask{1, 0, 1, 1, 1, 0, 1, 1};
    std::vector<int> rebuilt(labels.size(), -1);
    for (auto& s : to_segments(labels, mask))
        for (int t = s.start_frame; t < s.end_frame; ++t) rebuilt[t] = s.label;
    for (size_t t = 0; t < labels.size(); ++t)
        if (mask[t]) CHECK(rebuilt[t] == labels[t]);
}

TEST_CASE("edit_distance") {
    CHECK(edit_distance({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(edit_distance({0, 1}, {1, 0}) == 2);
    CHECK(edit_distance({4, 5, 6}, {}) == 3);
    CHECK(edit_distance({}, {4, 5}) == 2);

    auto lists = all_lists(4, 3);
    for (auto& a : lists)
        for (auto& b : lists) {
            const int d = edit_distance(a, b);
            CHECK(d == lev_oracle(a, b));
            CHECK(d == edit_distance(b, a));
            CHECK(d >= std::abs(static_cast<int>(a.size()) - static_cast<int>(b.size())));
            CHECK(d <= static_cast<int>(std::max(a.size(), b.size())));
        }
}

TEST_CASE("normalized_edit_distance and dataset_normalizer") {
    SegmentSeq p{{0, 0, 5}, {1, 5, 9}};
    SegmentSeq t{{0, 0, 5}, {1, 5, 9}};
    CHECK(normalized_edit_distance(p, t, 10) == 0.0);

    SegmentSeq q{{1, 0, 5}, {0, 5, 9}};
    CHECK(normalized_edit_distance(p, q, 10) == 20.0);
    CHECK_THROWS_AS(normalized_edit_distance(p, q, 0), ContractError);

    CHECK(dataset_normalizer({SegmentSeq(5)}) == 5);
    CHECK(dataset_normalizer({SegmentSeq(4), SegmentSeq(7), SegmentSeq(5)}) == 7);
    CHECK(dataset_normalizer({SegmentSeq(1), SegmentSeq(1)}) == 1);
    CHECK_THROWS_AS(dataset_normalizer({}), ContractError);
}

TEST_CASE("permutation_test") {
    std::vector<double> same{3.0, 1.0, 4.0};
    CHECK(permutation_test(same, same).p_value == 1.0);

    std::vector<double> a{2, 2, 2}, b{1, 1, 1};
    auto r = permutation_test(a, b);
    CHECK(r.exact);
    CHECK(r.p_value == 0.25);

    auto r1 = permutation_test({5.0}, {4.0});
    CHECK(r1.p_value == 1.0);

    CHECK_THROWS_AS(permutation_test({}, {}), ContractError);

    // Monte-Carlo path converges to the exact answer on the enumerable case
    auto mc = permutation_test(a, b, true, 99, 200000, true);
    CHECK(!mc.exact);
    CHECK(std::fabs(mc.p_value - 0.25) < 0.01);
}

TEST_CASE("EvalReport csv round trip") {
    EvalReport rep;
    rep.runs = {{0, "u00", 91.25, 8.5, false}, {1, "u01", 88.0, 12.0, false}};
    rep.normalizer = 17;
    rep.finalize();
    CHECK(rep.mean_accuracy == doctest::Approx((91.25 + 88.0) / 2));

    EvalReport back = EvalReport::from_csv(rep.to_csv());
    REQUIRE(back.runs.size() == 2);
    CHECK(back.runs[0].held_out_user == "u00");
    CHECK(back.runs[1].accuracy_pct == 88.0);
    CHECK(back.mean_edit == doctest::Approx(10.25));

    CHECK_THROWS_AS(EvalReport::from_csv("not,a,report\n"), ContractError);
}
