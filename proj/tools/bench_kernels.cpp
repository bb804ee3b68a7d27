// Compares the serial reference kernels against the OpenMP front doors and
// times a full LSTM forward/backward pass at a few desk-scale shapes.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "seqlab/model.hpp"
#include "seqlab/training.hpp"

using namespace seqlab;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void bench_matvec(int n, int reps) {
    Rng rng(7);
    Mat m = init_uniform(rng, n, n, 1.0);
    Vec v = init_uniform_vec(rng, n, 1.0);
    Vec out;
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) matvec_serial(m, v, out);
    const double serial = ms_since(t0);
    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) matvec_into(m, v, out);
    const double parallel = ms_since(t0);
    std::printf("matvec %5dx%-5d reps=%d  serial %8.2f ms  omp %8.2f ms  speedup %.2fx\n", n, n,
                reps, serial, parallel, serial / parallel);
}

void bench_bptt(int hidden, int T, int reps) {
    const int n_x = 14, n_y = 10;
    Rng rng(11);
    Model model = make_model(CellKind::Lstm, Direction::Bidirectional, n_x, n_y, hidden, 1, rng);
    std::vector<Vec> xs(T, Vec(n_x));
    std::vector<int> labels(T);
    std::vector<uint8_t> mask(T, 1);
    for (auto& x : xs)
        for (auto& e : x) e = rng.next_uniform(1.0);
    for (auto& y : labels) y = static_cast<int>(rng.next_u64() % n_y);

    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) {
        Tape tape;
        forward_sequence(model, xs, false, 0.0, rng, &tape);
        backward(model, tape, labels, mask);
    }
    std::printf("bidir lstm hidden=%-5d T=%-4d reps=%d  fwd+bwd %8.2f ms/seq\n", hidden, T, reps,
                ms_since(t0) / reps);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp\n");
#endif
    bench_matvec(256, 2000);
    bench_matvec(1024, 300);
    bench_matvec(2048, 80);
    bench_bptt(64, 300, 20);
    bench_bptt(256, 300, 5);
    bench_bptt(1024, 300, 1);
    return 0;
}
