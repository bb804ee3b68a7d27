#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqlab {

// Contract violations (shape mismatches, bad arguments) throw this.
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

using Vec = std::vector<double>;

// Dense row-major matrix of doubles.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

// xorshift64* generator (Vigna 2016). State advances as
//   s ^= s >> 12; s ^= s << 25; s ^= s >> 27; output = s * 2685821657736338717.
// Fully determined by the 64-bit seed; identical streams on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next_u64() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 2685821657736338717ull;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [-scale, +scale].
    double next_uniform(double scale) { return (2.0 * next_double() - 1.0) * scale; }

    // Fisher-Yates shuffle of indices.
    void shuffle(std::vector<int>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = next_u64() % i;
            std::swap(v[i - 1], v[j]);
        }
    }

    uint64_t state() const { return state_; }

private:
    uint64_t state_;
};

// ---- kernels ----
// Each kernel has a serial reference (_serial suffix) and an OpenMP front door
// that partitions work by output element; per-element arithmetic order is
// identical, so parallel results are bit-identical to serial ones.

void matvec_serial(const Mat& m, const Vec& v, Vec& out);
void matvec_transpose_serial(const Mat& m, const Vec& v, Vec& out);
void add_outer_serial(Mat& m, const Vec& a, const Vec& b);

void matvec_into(const Mat& m, const Vec& v, Vec& out);
// out = M^T v (used by backprop through every W x term).
void matvec_transpose_into(const Mat& m, const Vec& v, Vec& out);
// m += a b^T (gradient accumulation for weight matrices).
void add_outer(Mat& m, const Vec& a, const Vec& b);

Vec matvec(const Mat& m, const Vec& v);

// ---- elementwise ops ----
Vec sigmoid(const Vec& v);
Vec tanh_vec(const Vec& v);
Vec softmax(const Vec& v);
Vec hadamard(const Vec& a, const Vec& b);

void axpy(double alpha, const Vec& x, Vec& y);  // y += alpha * x
double dot(const Vec& a, const Vec& b);

// ---- random init ----
Mat init_uniform(Rng& rng, int rows, int cols, double scale);
Vec init_uniform_vec(Rng& rng, int len, double scale);

}  // namespace seqlab
