#pragma once

#include <cmath>
#include <complex>
#include <type_traits>
#include <vector>

#include "bbsi/errors.hpp"

namespace bbsi {

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class T>
struct real_of {
    using type = T;
};
template <class T>
struct real_of<std::complex<T>> {
    using type = T;
};
template <class T>
using real_t = typename real_of<T>::type;

/// Dense column-major matrix. The library-wide entry layout is column-major
/// (LAPACK-native); every routine that touches raw storage assumes it.
template <class T>
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(size_t(rows) * cols, T{}) {
        if (rows < 0 || cols < 0) throw invalid_argument_error("DenseMatrix: negative dimension");
    }

    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

    T& operator()(int i, int j) { return data_[size_t(j) * rows_ + i]; }
    const T& operator()(int i, int j) const { return data_[size_t(j) * rows_ + i]; }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    void set_zero() { std::fill(data_.begin(), data_.end(), T{}); }

    DenseMatrix transposed() const {
        DenseMatrix out(cols_, rows_);
        for (int j = 0; j < cols_; ++j)
            for (int i = 0; i < rows_; ++i) out(j, i) = (*this)(i, j);
        return out;
    }

    DenseMatrix conj_transposed() const {
        DenseMatrix out(cols_, rows_);
        for (int j = 0; j < cols_; ++j)
            for (int i = 0; i < rows_; ++i) {
                if constexpr (is_complex<T>::value)
                    out(j, i) = std::conj((*this)(i, j));
                else
                    out(j, i) = (*this)(i, j);
            }
        return out;
    }

    DenseMatrix& operator+=(const DenseMatrix& o) {
        check_same_shape(o);
        for (size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    DenseMatrix& operator-=(const DenseMatrix& o) {
        check_same_shape(o);
        for (size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    DenseMatrix operator-() const {
        DenseMatrix out = *this;
        for (auto& v : out.data_) v = -v;
        return out;
    }

    bool operator==(const DenseMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

    real_t<T> frobenius_norm() const {
        real_t<T> s{};
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    real_t<T> max_abs() const {
        real_t<T> m{};
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void check_same_shape(const DenseMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw invalid_argument_error("DenseMatrix: shape mismatch");
    }

    int rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

/// Relative Frobenius distance, with an absolute fallback when `ref` is zero.
template <class T>
real_t<T> rel_frobenius_error(const DenseMatrix<T>& a, const DenseMatrix<T>& ref) {
    DenseMatrix<T> d = a;
    d -= ref;
    auto nref = ref.frobenius_norm();
    auto nd = d.frobenius_norm();
    return nref > real_t<T>{0} ? nd / nref : nd;
}

}  // namespace bbsi
