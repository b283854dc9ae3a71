#pragma once

#include <array>

#include "pctf3d/types.hpp"

namespace pctf3d {

/// Dense order-3 tensor in column-major layout (first index fastest).
class Tensor3 {
  public:
    Tensor3() : dims_{0, 0, 0} {}

    Tensor3(Index i1, Index i2, Index i3)
        : dims_{i1, i2, i3}, data_(Vector::Zero(i1 * i2 * i3)) {}

    Tensor3(Index i1, Index i2, Index i3, Vector data);

    const std::array<Index, 3>& dims() const { return dims_; }
    Index dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }
    Index size() const { return data_.size(); }

    double operator()(Index i, Index j, Index k) const {
        return data_[i + dims_[0] * (j + dims_[1] * k)];
    }
    double& operator()(Index i, Index j, Index k) {
        return data_[i + dims_[0] * (j + dims_[1] * k)];
    }

    /// Column-major vectorization; shares the tensor's storage.
    const Vector& vec() const { return data_; }
    Vector& vec() { return data_; }

    double sum() const { return data_.sum(); }
    double min_entry() const { return data_.minCoeff(); }

    void setZero() { data_.setZero(); }

  private:
    std::array<Index, 3> dims_;
    Vector data_;
};

/// Khatri-Rao (column-wise Kronecker) product of a (Ia x R) and b (Ib x R).
/// Column r of the result is kron(a_r, b_r): the row index runs over b's
/// index fastest, matching the mode-1 matricization convention below.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Sum of R rank-one tensors: entry (i,j,k) = sum_r lambda_r A(i,r) B(j,r) C(k,r).
Tensor3 cpd3_reconstruct(const Vector& lambda, const Matrix& A, const Matrix& B,
                         const Matrix& C);

/// Mode-1 matricization, I1 x (I2*I3), columns indexed by (j,k) with j fastest.
/// Satisfies mat1(cpd3) = A * Diag(lambda) * khatri_rao(C, B)^T.
Matrix matricize_mode1(const Tensor3& t);

/// Zero-copy view of the mode-1 matricization (valid while `t` lives).
Eigen::Map<const Matrix> matricize_mode1_view(const Tensor3& t);

/// Squared Frobenius norm of (a - b).
double frobenius_sq_diff(const Tensor3& a, const Tensor3& b);

/// Moves the given mode to the front, keeping the other two modes in their
/// original relative order. `mode` is 0-based.
Tensor3 permute_mode_front(const Tensor3& t, int mode);

} // namespace pctf3d
