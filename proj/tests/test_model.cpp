#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "seqlab/model.hpp"

using namespace seqlab;

namespace {

Model zero_model(CellKind kind, Direction dir, int n_x, int n_y, int hidden, int layers = 1) {
    Rng rng(1);
    return zeros_like(make_model(kind, dir, n_x, n_y, hidden, layers, rng));
}

std::vector<Vec> random_inputs(Rng& rng, int T, int n_x) {
    std::vector<Vec> xs(T, Vec(n_x));
    for (auto& x : xs)
        for (auto& e : x) e = rng.next_uniform(1.0);
    return xs;
}

}  // namespace

TEST_CASE("vanilla_step") {
    VanillaCell zero{Mat(2, 3), Mat(2, 2), Vec(2, 0.0)};
    CHECK(vanilla_step(zero, Vec{0.9, -0.4}, Vec{1, 2, 3}) == Vec{0, 0});

    VanillaCell p1{Mat(1, 1), Mat(1, 1), Vec(1, 0.0)};
    p1.W_x(0, 0) = 1.0;
    CHECK(vanilla_step(p1, Vec{0.9}, Vec{0.5})[0] ==
          doctest::Approx(0.46211715726000974).epsilon(1e-15));

    VanillaCell p2{Mat(1, 1), Mat::identity(1), Vec(1, 0.0)};
    CHECK(vanilla_step(p2, Vec{0.3}, Vec{0.0})[0] ==
          doctest::Approx(0.2913126124515909).epsilon(1e-15));
}

TEST_CASE("lstm_step") {
    auto zero_cell = [](int n_x, int H) {
        LstmCell c;
        c.W_gx = c.W_ix = c.W_fx = c.W_ox = Mat(H, n_x);
        c.W_gm = c.W_im = c.W_fm = c.W_om = Mat(H, H);
        c.w_ic = c.w_fc = c.w_oc = Vec(H, 0.0);
        c.b_g = c.b_i = c.b_f = c.b_o = Vec(H, 0.0);
        return c;
    };

    SUBCASE("all-zero params give zero state") {
        LstmCell c = zero_cell(2, 3);
        LstmState s{Vec(3, 0.0), Vec(3, 0.0)};
        LstmState out = lstm_step(c, s, Vec{0.7, -0.2});
        CHECK(out.c == Vec{0, 0, 0});
        CHECK(out.m == Vec{0, 0, 0});
    }

    SUBCASE("saturated forget gate preserves memory") {
        LstmCell c = zero_cell(1, 1);
        c.b_f[0] = 50.0;
        c.b_i[0] = -50.0;
        LstmState s{Vec{0.7}, Vec{0.0}};
        LstmState out = lstm_step(c, s, Vec{0.3});
        CHECK(out.c[0] == doctest::Approx(0.7).epsilon(1e-12));
    }

    SUBCASE("forced gates expose the candidate") {
        LstmCell c = zero_cell(1, 1);
        c.b_g[0] = std::atanh(0.8);
        c.b_i[0] = 50.0;
        c.b_f[0] = -50.0;
        c.b_o[0] = 50.0;
        LstmState s{Vec{0.0}, Vec{0.0}};
        LstmState out = lstm_step(c, s, Vec{0.0});
        CHECK(out.c[0] == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(out.m[0] == doctest::Approx(0.6640367702678489).epsilon(1e-12));
    }

    SUBCASE("gate range and purity") {
        Rng rng(4);
        Model m = make_model(CellKind::Lstm, Direction::Forward, 3, 2, 4, 1, rng, 2.0);
        const LstmCell& c = m.lcells[0];
        LstmState s{init_uniform_vec(rng, 4, 3.0), init_uniform_vec(rng, 4, 0.9)};
        Vec x = init_uniform_vec(rng, 3, 2.0);
        LstmState a = lstm_step(c, s, x), b = lstm_step(c, s, x);
        CHECK(a.c == b.c);  // step is pure
        CHECK(a.m == b.m);
        for (double v : a.m) CHECK(std::fabs(v) < 1.0);
    }

    SUBCASE("shape mismatch") {
        LstmCell c = zero_cell(2, 3);
        LstmState bad{Vec(2, 0.0), Vec(2, 0.0)};
        CHECK_THROWS_AS(lstm_step(c, bad, Vec{1, 2}), ContractError);
    }
}

TEST_CASE("output_step") {
    Mat W(3, 2);
    Vec b(3, 0.0);
    Vec p = output_step(W, b, Vec{0.5, -0.5});
    for (double e : p) CHECK(e == doctest::Approx(1.0 / 3).epsilon(1e-12));

    Vec b2{std::log(1.0), std::log(2.0), std::log(3.0)};
    Vec q = output_step(W, b2, Vec{0, 0});
    CHECK(q[0] == doctest::Approx(1.0 / 6).epsilon(1e-12));
    CHECK(q[2] == doctest::Approx(3.0 / 6).epsilon(1e-12));

    Rng rng(2);
    Mat Wr = init_uniform(rng, 4, 5, 2.0);
    Vec br = init_uniform_vec(rng, 4, 2.0);
    Vec pr = output_step(Wr, br, init_uniform_vec(rng, 5, 2.0));
    double s = 0;
    for (double e : pr) s += e;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dropout_mask") {
    Rng rng(6);
    CHECK(dropout_mask(rng, 5, 0.0) == Vec{1, 1, 1, 1, 1});

    Rng a(42), b(42);
    CHECK(dropout_mask(a, 64, 0.5) == dropout_mask(b, 64, 0.5));

    Rng big(7);
    double mean = 0;
    const int N = 100000;
    Vec mask = dropout_mask(big, N, 0.5);
    for (double v : mask) {
        CHECK((v == 0.0 || v == 2.0));
        mean += v;
    }
    CHECK(std::fabs(mean / N - 1.0) < 0.02);

    CHECK_THROWS_AS(dropout_mask(rng, 5, 1.0), ContractError);
}

TEST_CASE("forward_sequence basics") {
    Rng rng(1);
    SUBCASE("zero params give uniform rows") {
        for (Direction dir : {Direction::Forward, Direction::Bidirectional}) {
            Model m = zero_model(CellKind::Lstm, dir, 2, 4, 3);
            Prediction p = forward_sequence(m, random_inputs(rng, 5, 2), false, 0.0, rng);
            for (auto& row : p.probs)
                for (double e : row) CHECK(e == doctest::Approx(0.25).epsilon(1e-12));
            // exact ties break to the lowest class index
            for (int lab : p.labels) CHECK(lab == 0);
        }
    }

    SUBCASE("empty sequence rejected") {
        Model m = zero_model(CellKind::Vanilla, Direction::Forward, 2, 2, 3);
        CHECK_THROWS_AS(forward_sequence(m, {}, false, 0.0, rng), ContractError);
    }

    SUBCASE("forward mode is causal (bitwise)") {
        for (CellKind kind : {CellKind::Vanilla, CellKind::Lstm}) {
            Rng r(99);
            Model m = make_model(kind, Direction::Forward, 3, 4, 5, 1, r, 0.5);
            std::vector<Vec> xs = random_inputs(r, 8, 3);
            Prediction base = forward_sequence(m, xs, false, 0.0, r);
            xs.back()[0] += 10.0;
            Prediction pert = forward_sequence(m, xs, false, 0.0, r);
            for (int t = 0; t < 7; ++t) CHECK(base.probs[t] == pert.probs[t]);
        }
    }

    SUBCASE("bidirectional mode is anti-causal") {
        Rng r(13);
        Model m = make_model(CellKind::Lstm, Direction::Bidirectional, 3, 4, 5, 1, r, 0.5);
        std::vector<Vec> xs = random_inputs(r, 8, 3);
        Prediction base = forward_sequence(m, xs, false, 0.0, r);
        xs.back()[0] += 10.0;
        Prediction pert = forward_sequence(m, xs, false, 0.0, r);
        CHECK(base.probs[0] != pert.probs[0]);
    }

    SUBCASE("memory cell recursion holds on the tape") {
        Rng r(21);
        Model m = make_model(CellKind::Lstm, Direction::Forward, 3, 2, 4, 1, r, 0.8);
        Tape tape;
        forward_sequence(m, random_inputs(r, 6, 3), false, 0.0, r, &tape);
        const auto& steps = tape.traces[0].lsteps;
        for (size_t t = 0; t < steps.size(); ++t) {
            const Vec& c_prev = t > 0 ? steps[t - 1].c : Vec(4, 0.0);
            for (int k = 0; k < 4; ++k)
                CHECK(steps[t].c[k] == steps[t].i[k] * steps[t].g[k] + steps[t].f[k] * c_prev[k]);
        }
    }

    SUBCASE("eval mode does not consume the rng") {
        Model m = zero_model(CellKind::Lstm, Direction::Forward, 2, 2, 3);
        Rng r(5);
        uint64_t before = r.state();
        forward_sequence(m, random_inputs(rng, 4, 2), false, 0.5, r);
        CHECK(r.state() == before);
    }

    SUBCASE("train mode with same rng seed is reproducible") {
        Rng r(33);
        Model m = make_model(CellKind::Lstm, Direction::Bidirectional, 2, 3, 4, 2, r, 0.5);
        std::vector<Vec> xs = random_inputs(r, 6, 2);
        Rng d1(777), d2(777);
        Prediction a = forward_sequence(m, xs, true, 0.5, d1);
        Prediction b = forward_sequence(m, xs, true, 0.5, d2);
        for (int t = 0; t < 6; ++t) CHECK(a.probs[t] == b.probs[t]);
    }
}

TEST_CASE("count_params") {
    Rng rng(1);
    Model m = make_model(CellKind::Lstm, Direction::Forward, 1, 2, 1, 1, rng);
    CHECK(count_params(m) == 19);  // 4*1*(1+1) + 3 + 4 = 15, output 2*1 + 2 = 4

    Model b = make_model(CellKind::Lstm, Direction::Bidirectional, 1, 2, 1, 1, rng);
    CHECK(count_params(b) == 2 * 15 + 2 * 2 + 2);
    CHECK(b.W_ym.cols == 2);  // d_m doubles

    CHECK_THROWS_AS(make_model(CellKind::Lstm, Direction::Forward, 1, 2, 0, 1, rng),
                    ContractError);
}

TEST_CASE("argmax tie-break picks lowest index") {
    CHECK(argmax_lowest({0.25, 0.25, 0.25, 0.25}) == 0);
    CHECK(argmax_lowest({0.1, 0.45, 0.45}) == 1);
}
