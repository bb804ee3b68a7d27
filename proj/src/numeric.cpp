#include "seqlab/numeric.hpp"

#include <cmath>

namespace seqlab {

namespace {

void check_matvec_shapes(const Mat& m, const Vec& v) {
    if (m.cols != static_cast<int>(v.size()))
        throw ContractError("matvec: matrix is " + std::to_string(m.rows) + "x" +
                            std::to_string(m.cols) + " but vector has length " +
                            std::to_string(v.size()));
}

// Below this element count the parallel-for overhead dominates.
constexpr long kOmpThreshold = 16 * 1024;

}  // namespace

void matvec_serial(const Mat& m, const Vec& v, Vec& out) {
    check_matvec_shapes(m, v);
    out.assign(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double* row = m.a.data() + static_cast<size_t>(i) * m.cols;
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += row[j] * v[j];
        out[i] = s;
    }
}

void matvec_into(const Mat& m, const Vec& v, Vec& out) {
    check_matvec_shapes(m, v);
    out.assign(m.rows, 0.0);
    const long work = static_cast<long>(m.rows) * m.cols;
    if (work < kOmpThreshold) {
        for (int i = 0; i < m.rows; ++i) {
            const double* row = m.a.data() + static_cast<size_t>(i) * m.cols;
            double s = 0.0;
            for (int j = 0; j < m.cols; ++j) s += row[j] * v[j];
            out[i] = s;
        }
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m.rows; ++i) {
        const double* row = m.a.data() + static_cast<size_t>(i) * m.cols;
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += row[j] * v[j];
        out[i] = s;
    }
}

void matvec_transpose_serial(const Mat& m, const Vec& v, Vec& out) {
    if (m.rows != static_cast<int>(v.size()))
        throw ContractError("matvec_transpose: matrix is " + std::to_string(m.rows) + "x" +
                            std::to_string(m.cols) + " but vector has length " +
                            std::to_string(v.size()));
    out.assign(m.cols, 0.0);
    for (int j = 0; j < m.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < m.rows; ++i) s += m.a[static_cast<size_t>(i) * m.cols + j] * v[i];
        out[j] = s;
    }
}

void matvec_transpose_into(const Mat& m, const Vec& v, Vec& out) {
    if (m.rows != static_cast<int>(v.size()))
        throw ContractError("matvec_transpose: matrix is " + std::to_string(m.rows) + "x" +
                            std::to_string(m.cols) + " but vector has length " +
                            std::to_string(v.size()));
    out.assign(m.cols, 0.0);
    const long work = static_cast<long>(m.rows) * m.cols;
    if (work < kOmpThreshold) {
        for (int j = 0; j < m.cols; ++j) {
            double s = 0.0;
            for (int i = 0; i < m.rows; ++i) s += m.a[static_cast<size_t>(i) * m.cols + j] * v[i];
            out[j] = s;
        }
        return;
    }
#pragma omp parallel for schedule(static)
    for (int j = 0; j < m.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < m.rows; ++i) s += m.a[static_cast<size_t>(i) * m.cols + j] * v[i];
        out[j] = s;
    }
}

void add_outer_serial(Mat& m, const Vec& a, const Vec& b) {
    if (m.rows != static_cast<int>(a.size()) || m.cols != static_cast<int>(b.size()))
        throw ContractError("add_outer: matrix is " + std::to_string(m.rows) + "x" +
                            std::to_string(m.cols) + " but vectors have lengths " +
                            std::to_string(a.size()) + ", " + std::to_string(b.size()));
    for (int i = 0; i < m.rows; ++i) {
        double* row = m.a.data() + static_cast<size_t>(i) * m.cols;
        const double ai = a[i];
        for (int j = 0; j < m.cols; ++j) row[j] += ai * b[j];
    }
}

void add_outer(Mat& m, const Vec& a, const Vec& b) {
    if (m.rows != static_cast<int>(a.size()) || m.cols != static_cast<int>(b.size()))
        throw ContractError("add_outer: matrix is " + std::to_string(m.rows) + "x" +
                            std::to_string(m.cols) + " but vectors have lengths " +
                            std::to_string(a.size()) + ", " + std::to_string(b.size()));
    const long work = static_cast<long>(m.rows) * m.cols;
    if (work < kOmpThreshold) {
        add_outer_serial(m, a, b);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m.rows; ++i) {
        double* row = m.a.data() + static_cast<size_t>(i) * m.cols;
        const double ai = a[i];
        for (int j = 0; j < m.cols; ++j) row[j] += ai * b[j];
    }
}

Vec matvec(const Mat& m, const Vec& v) {
    Vec out;
    matvec_into(m, v, out);
    return out;
}

Vec sigmoid(const Vec& v) {
    Vec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-v[i]));
    return out;
}

Vec tanh_vec(const Vec& v) {
    Vec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
    return out;
}

Vec softmax(const Vec& v) {
    Vec out(v.size());
    double mx = v.empty() ? 0.0 : v[0];
    for (double x : v) mx = std::max(mx, x);
    double sum = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

Vec hadamard(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw ContractError("hadamard: lengths differ, " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
    Vec out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

void axpy(double alpha, const Vec& x, Vec& y) {
    if (x.size() != y.size())
        throw ContractError("axpy: lengths differ, " + std::to_string(x.size()) + " vs " +
                            std::to_string(y.size()));
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw ContractError("dot: lengths differ, " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Mat init_uniform(Rng& rng, int rows, int cols, double scale) {
    if (scale <= 0.0)
        throw ContractError("init_uniform: scale must be positive, got " + std::to_string(scale));
    Mat m(rows, cols);
    for (double& x : m.a) x = rng.next_uniform(scale);
    return m;
}

Vec init_uniform_vec(Rng& rng, int len, double scale) {
    if (scale <= 0.0)
        throw ContractError("init_uniform: scale must be positive, got " + std::to_string(scale));
    Vec v(len);
    for (double& x : v) x = rng.next_uniform(scale);
    return v;
}

}  // namespace seqlab
