#include "pctf3d/tensor.hpp"

#include <stdexcept>
#include <string>

namespace pctf3d {

Tensor3::Tensor3(Index i1, Index i2, Index i3, Vector data)
    : dims_{i1, i2, i3}, data_(std::move(data)) {
    if (data_.size() != i1 * i2 * i3) {
        throw std::invalid_argument("Tensor3: data length does not match dimensions");
    }
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("khatri_rao: column counts differ (" +
                                    std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.cols()) + ")");
    }
    const Index ia = a.rows(), ib = b.rows(), r = a.cols();
    Matrix out(ia * ib, r);
    for (Index c = 0; c < r; ++c) {
        for (Index i = 0; i < ia; ++i) {
            out.col(c).segment(i * ib, ib) = a(i, c) * b.col(c);
        }
    }
    return out;
}

Tensor3 cpd3_reconstruct(const Vector& lambda, const Matrix& A, const Matrix& B,
                         const Matrix& C) {
    const Index r = lambda.size();
    if (A.cols() != r || B.cols() != r || C.cols() != r) {
        throw std::invalid_argument("cpd3_reconstruct: factor rank mismatch");
    }
    Tensor3 out(A.rows(), B.rows(), C.rows());
    // mat1(out) = A * Diag(lambda) * (C (kr) B)^T, written directly into the
    // tensor's column-major storage.
    Eigen::Map<Matrix> m1(out.vec().data(), A.rows(), B.rows() * C.rows());
    m1.noalias() = A * lambda.asDiagonal() * khatri_rao(C, B).transpose();
    return out;
}

Matrix matricize_mode1(const Tensor3& t) {
    return matricize_mode1_view(t);
}

Eigen::Map<const Matrix> matricize_mode1_view(const Tensor3& t) {
    return {t.vec().data(), t.dim(0), t.dim(1) * t.dim(2)};
}

double frobenius_sq_diff(const Tensor3& a, const Tensor3& b) {
    if (a.dims() != b.dims()) {
        throw std::invalid_argument("frobenius_sq_diff: dimension mismatch");
    }
    return (a.vec() - b.vec()).squaredNorm();
}

Tensor3 permute_mode_front(const Tensor3& t, int mode) {
    switch (mode) {
    case 0:
        return t;
    case 1: {
        Tensor3 out(t.dim(1), t.dim(0), t.dim(2));
        for (Index k = 0; k < t.dim(2); ++k)
            for (Index j = 0; j < t.dim(1); ++j)
                for (Index i = 0; i < t.dim(0); ++i)
                    out(j, i, k) = t(i, j, k);
        return out;
    }
    case 2: {
        Tensor3 out(t.dim(2), t.dim(0), t.dim(1));
        for (Index k = 0; k < t.dim(2); ++k)
            for (Index j = 0; j < t.dim(1); ++j)
                for (Index i = 0; i < t.dim(0); ++i)
                    out(k, i, j) = t(i, j, k);
        return out;
    }
    default:
        throw std::invalid_argument("permute_mode_front: mode must be 0, 1 or 2");
    }
}

} // namespace pctf3d
