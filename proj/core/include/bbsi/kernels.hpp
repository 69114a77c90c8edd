#pragma once

#include <limits>
#include <string>
#include <vector>

#include "bbsi/dense.hpp"
#include "bbsi/errors.hpp"

#include <cblas.h>
#include <lapacke.h>

namespace bbsi {

/// Exact tallies of the three fundamental kernel invocations.
/// Per-task by convention: solvers keep one instance per unit of concurrent
/// work and merge at joins.
struct KernelCounters {
    long long n_gemm = 0;
    long long n_lu = 0;
    long long n_getrs = 0;

    KernelCounters& operator+=(const KernelCounters& o) {
        n_gemm += o.n_gemm;
        n_lu += o.n_lu;
        n_getrs += o.n_getrs;
        return *this;
    }
    friend KernelCounters operator+(KernelCounters a, const KernelCounters& b) { return a += b; }
    bool operator==(const KernelCounters&) const = default;
};

namespace backend {

inline void gemm_raw(int m, int n, int k, float alpha, const float* a, int lda, const float* b,
                     int ldb, float beta, float* c, int ldc) {
    cblas_sgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
inline void gemm_raw(int m, int n, int k, double alpha, const double* a, int lda, const double* b,
                     int ldb, double beta, double* c, int ldc) {
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}
inline void gemm_raw(int m, int n, int k, std::complex<float> alpha, const std::complex<float>* a,
                     int lda, const std::complex<float>* b, int ldb, std::complex<float> beta,
                     std::complex<float>* c, int ldc) {
    cblas_cgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, m, n, k, &alpha, a, lda, b, ldb, &beta, c, ldc);
}
inline void gemm_raw(int m, int n, int k, std::complex<double> alpha, const std::complex<double>* a,
                     int lda, const std::complex<double>* b, int ldb, std::complex<double> beta,
                     std::complex<double>* c, int ldc) {
    cblas_zgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, m, n, k, &alpha, a, lda, b, ldb, &beta, c, ldc);
}

inline int getrf_raw(int n, float* a, int lda, int* ipiv) {
    return LAPACKE_sgetrf(LAPACK_COL_MAJOR, n, n, a, lda, ipiv);
}
inline int getrf_raw(int n, double* a, int lda, int* ipiv) {
    return LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, a, lda, ipiv);
}
// std::complex and the lapacke complex types are layout-compatible
inline int getrf_raw(int n, std::complex<float>* a, int lda, int* ipiv) {
    return LAPACKE_cgetrf(LAPACK_COL_MAJOR, n, n, reinterpret_cast<lapack_complex_float*>(a), lda,
                          ipiv);
}
inline int getrf_raw(int n, std::complex<double>* a, int lda, int* ipiv) {
    return LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, reinterpret_cast<lapack_complex_double*>(a), lda,
                          ipiv);
}

inline int getrs_raw(char trans, int n, int nrhs, const float* a, int lda, const int* ipiv,
                     float* b, int ldb) {
    return LAPACKE_sgetrs(LAPACK_COL_MAJOR, trans, n, nrhs, a, lda, ipiv, b, ldb);
}
inline int getrs_raw(char trans, int n, int nrhs, const double* a, int lda, const int* ipiv,
                     double* b, int ldb) {
    return LAPACKE_dgetrs(LAPACK_COL_MAJOR, trans, n, nrhs, a, lda, ipiv, b, ldb);
}
inline int getrs_raw(char trans, int n, int nrhs, const std::complex<float>* a, int lda,
                     const int* ipiv, std::complex<float>* b, int ldb) {
    return LAPACKE_cgetrs(LAPACK_COL_MAJOR, trans, n, nrhs,
                          reinterpret_cast<const lapack_complex_float*>(a), lda, ipiv,
                          reinterpret_cast<lapack_complex_float*>(b), ldb);
}
inline int getrs_raw(char trans, int n, int nrhs, const std::complex<double>* a, int lda,
                     const int* ipiv, std::complex<double>* b, int ldb) {
    return LAPACKE_zgetrs(LAPACK_COL_MAJOR, trans, n, nrhs,
                          reinterpret_cast<const lapack_complex_double*>(a), lda, ipiv,
                          reinterpret_cast<lapack_complex_double*>(b), ldb);
}

}  // namespace backend

/// Partial-pivoted LU of a square matrix, kept in LAPACK packed form.
template <class T>
struct LUFactors {
    DenseMatrix<T> packed;     // L below the diagonal (unit), U on and above
    std::vector<int> pivots;   // 1-based row interchanges, LAPACK convention
    int dim = 0;
};

/// C <- alpha*A*B + beta*C, in place. One GEMM.
template <class T>
void gemm_into(T alpha, const DenseMatrix<T>& a, const DenseMatrix<T>& b, T beta,
               DenseMatrix<T>& c, KernelCounters& counters) {
    if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
        throw invalid_argument_error("gemm: shape mismatch");
    counters.n_gemm += 1;
    if (c.rows() == 0 || c.cols() == 0) return;
    if (a.cols() == 0) {
        // degenerate inner dimension: C <- beta*C
        for (int j = 0; j < c.cols(); ++j)
            for (int i = 0; i < c.rows(); ++i) c(i, j) *= beta;
        return;
    }
    backend::gemm_raw(a.rows(), b.cols(), a.cols(), alpha, a.data(), a.rows(), b.data(), b.rows(),
                      beta, c.data(), c.rows());
}

/// Returns alpha*A*B + beta*C. One GEMM.
template <class T>
DenseMatrix<T> gemm(T alpha, const DenseMatrix<T>& a, const DenseMatrix<T>& b, T beta,
                    const DenseMatrix<T>& c, KernelCounters& counters) {
    DenseMatrix<T> out = c;
    gemm_into(alpha, a, b, beta, out, counters);
    return out;
}

/// Returns alpha*A*B. One GEMM.
template <class T>
DenseMatrix<T> gemm(T alpha, const DenseMatrix<T>& a, const DenseMatrix<T>& b,
                    KernelCounters& counters) {
    DenseMatrix<T> out(a.rows(), b.cols());
    gemm_into(alpha, a, b, T{0}, out, counters);
    return out;
}

/// Partial-pivoted factorization A = P^T L U. One LU.
/// Throws singular_matrix_error when a pivot falls below
/// eps * dim * max|A| (the negligible-pivot threshold used library-wide).
template <class T>
LUFactors<T> lu_factor(const DenseMatrix<T>& a, KernelCounters& counters) {
    if (a.rows() != a.cols()) throw invalid_argument_error("lu_factor: matrix not square");
    counters.n_lu += 1;
    LUFactors<T> f;
    f.dim = a.rows();
    f.packed = a;
    f.pivots.assign(std::max(1, f.dim), 0);
    if (f.dim == 0) return f;
    const real_t<T> scale = a.max_abs();
    int info = backend::getrf_raw(f.dim, f.packed.data(), f.dim, f.pivots.data());
    if (info < 0) throw invalid_argument_error("lu_factor: bad argument to getrf");
    const real_t<T> tol =
        std::numeric_limits<real_t<T>>::epsilon() * real_t<T>(f.dim) * scale;
    if (info > 0) throw singular_matrix_error("lu_factor: exactly singular matrix");
    for (int i = 0; i < f.dim; ++i) {
        if (std::abs(f.packed(i, i)) <= tol)
            throw singular_matrix_error("lu_factor: negligible pivot " + std::to_string(i));
    }
    return f;
}

/// A^{-1} B from existing factors. One GETRS.
template <class T>
DenseMatrix<T> solve_left(const LUFactors<T>& f, const DenseMatrix<T>& b,
                          KernelCounters& counters) {
    if (f.dim != b.rows()) throw invalid_argument_error("solve_left: shape mismatch");
    counters.n_getrs += 1;
    DenseMatrix<T> x = b;
    if (f.dim == 0 || b.cols() == 0) return x;
    int info = backend::getrs_raw('N', f.dim, b.cols(), f.packed.data(), f.dim, f.pivots.data(),
                                  x.data(), f.dim);
    if (info != 0) throw invalid_argument_error("solve_left: getrs failed");
    return x;
}

/// B A^{-1} from existing factors, via the transposed system A^T X^T = B^T.
/// Same complexity class as solve_left; counted as one GETRS.
template <class T>
DenseMatrix<T> solve_right(const DenseMatrix<T>& b, const LUFactors<T>& f,
                           KernelCounters& counters) {
    if (f.dim != b.cols()) throw invalid_argument_error("solve_right: shape mismatch");
    counters.n_getrs += 1;
    DenseMatrix<T> xt = b.transposed();
    if (f.dim == 0 || b.rows() == 0) return xt.transposed();
    int info = backend::getrs_raw('T', f.dim, b.rows(), f.packed.data(), f.dim, f.pivots.data(),
                                  xt.data(), f.dim);
    if (info != 0) throw invalid_argument_error("solve_right: getrs failed");
    return xt.transposed();
}

/// A^{-1} from existing factors (GETRS with an identity right-hand side).
template <class T>
DenseMatrix<T> invert(const LUFactors<T>& f, KernelCounters& counters) {
    return solve_left(f, DenseMatrix<T>::identity(f.dim), counters);
}

}  // namespace bbsi
