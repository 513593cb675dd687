#pragma once

#include "assl/matrix.hpp"

// Dense products used by the network forward and backward passes.
//
// Every kernel has a serial reference and an OpenMP version. Each output
// element is accumulated by exactly one thread in ascending index order, so
// the two versions agree bit-for-bit and results do not depend on the thread
// count.
namespace assl::kernels {

namespace serial {
// c = a * b^T      a: n x k, b: m x k, c: n x m
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);
// c = a^T * b      a: n x m, b: n x k, c: m x k
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
// c = a * b        a: n x m, b: m x k, c: n x k
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
}  // namespace serial

namespace omp {
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c);
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c);
}  // namespace omp

// Checked entry points used by the library (OpenMP path).
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix matmul_nn(const Matrix& a, const Matrix& b);

}  // namespace assl::kernels
