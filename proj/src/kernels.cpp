#include "assl/kernels.hpp"

#include <cstddef>

#include "assl/error.hpp"

namespace assl::kernels {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = 1 << 15;

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
    if (!ok) throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string());
}

void prepare(Matrix& c, std::size_t rows, std::size_t cols) {
    if (c.rows() != rows || c.cols() != cols) c = Matrix(rows, cols);
}

}  // namespace

namespace serial {

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t n = a.rows(), m = b.rows(), k = a.cols();
    prepare(c, n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.data() + i * k;
        for (std::size_t j = 0; j < m; ++j) {
            const double* bj = b.data() + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            c(i, j) = acc;
        }
    }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t n = a.rows(), m = a.cols(), k = b.cols();
    prepare(c, m, k);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < n; ++p) acc += a(p, i) * b(p, j);
            c(i, j) = acc;
        }
    }
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t n = a.rows(), m = a.cols(), k = b.cols();
    prepare(c, n, k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < m; ++p) acc += a(i, p) * b(p, j);
            c(i, j) = acc;
        }
    }
}

}  // namespace serial

namespace omp {

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t m = b.rows(), k = a.cols();
    prepare(c, a.rows(), m);
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) * m * k > kParallelWork)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double* ai = ad + i * k;
        for (std::size_t j = 0; j < m; ++j) {
            const double* bj = bd + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            cd[i * m + j] = acc;
        }
    }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::size_t n = a.rows(), k = b.cols();
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.cols());
    prepare(c, a.cols(), k);
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
    const std::size_t lda = a.cols();
#pragma omp parallel for schedule(static) if (n * static_cast<std::size_t>(m) * k > kParallelWork)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        double* ci = cd + i * k;
        for (std::size_t j = 0; j < k; ++j) ci[j] = 0.0;
        // p outer keeps b row access contiguous; per-element order is still ascending p.
        for (std::size_t p = 0; p < n; ++p) {
            const double aval = ad[p * lda + i];
            const double* bp = bd + p * k;
            for (std::size_t j = 0; j < k; ++j) ci[j] += aval * bp[j];
        }
    }
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t m = a.cols(), k = b.cols();
    prepare(c, a.rows(), k);
    const double* ad = a.data();
    const double* bd = b.data();
    double* cd = c.data();
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) * m * k > kParallelWork)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double* ci = cd + i * k;
        for (std::size_t j = 0; j < k; ++j) ci[j] = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
            const double aval = ad[i * m + p];
            const double* bp = bd + p * k;
            for (std::size_t j = 0; j < k; ++j) ci[j] += aval * bp[j];
        }
    }
}

}  // namespace omp

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_nt", a, b);
    Matrix c;
    omp::gemm_nt(a, b, c);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_tn", a, b);
    Matrix c;
    omp::gemm_tn(a, b, c);
    return c;
}

Matrix matmul_nn(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul_nn", a, b);
    Matrix c;
    omp::gemm_nn(a, b, c);
    return c;
}

}  // namespace assl::kernels
