#pragma once

#include <stdexcept>
#include <string>

namespace bbsi {

/// Thrown when a layout, plan or argument violates a structural precondition.
class invalid_argument_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a factorization meets a negligible pivot.
///
/// `layer` identifies the principal layer whose Schur pivot failed, or -1
/// when the failure is not attributable to a layer (plain dense LU).
class singular_matrix_error : public std::runtime_error {
public:
    explicit singular_matrix_error(const std::string& what, int layer = -1)
        : std::runtime_error(what), layer_(layer) {}

    int layer() const noexcept { return layer_; }

private:
    int layer_;
};

}  // namespace bbsi
