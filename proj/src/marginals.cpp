#include "pctf3d/marginals.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pctf3d {

BinnedDataset bin_dataset(const Matrix& raw, int bin_count, BinningStrategy strategy) {
    if (bin_count < 2) {
        throw std::invalid_argument("bin_dataset: need at least 2 bins");
    }
    if (raw.rows() < 1 || raw.cols() < 1) {
        throw std::invalid_argument("bin_dataset: empty dataset");
    }
    if (!raw.allFinite()) {
        throw std::invalid_argument("bin_dataset: non-finite value in dataset");
    }
    BinnedDataset out;
    out.bin_count = bin_count;
    out.bins.resize(raw.rows(), raw.cols());

    if (strategy == BinningStrategy::Identity) {
        for (Index j = 0; j < raw.cols(); ++j) {
            for (Index i = 0; i < raw.rows(); ++i) {
                const double v = raw(i, j);
                const double r = std::round(v);
                if (std::abs(v - r) > 1e-9 || r < 1 || r > bin_count) {
                    throw std::invalid_argument(
                        "bin_dataset: identity binning expects integers in 1.." +
                        std::to_string(bin_count));
                }
                out.bins(i, j) = static_cast<int>(r);
            }
        }
        return out;
    }

    out.edges.reserve(static_cast<std::size_t>(raw.cols()));
    for (Index j = 0; j < raw.cols(); ++j) {
        const double lo = raw.col(j).minCoeff();
        const double hi = raw.col(j).maxCoeff();
        if (!(hi > lo)) {
            throw std::invalid_argument("bin_dataset: column " + std::to_string(j + 1) +
                                        " is constant");
        }
        const double width = (hi - lo) / bin_count;
        Vector edges(bin_count + 1);
        for (int b = 0; b <= bin_count; ++b) {
            edges[b] = lo + width * b;
        }
        edges[bin_count] = hi;
        for (Index i = 0; i < raw.rows(); ++i) {
            int b = 1 + static_cast<int>(std::floor((raw(i, j) - lo) / width));
            out.bins(i, j) = std::clamp(b, 1, bin_count);
        }
        out.edges.push_back(std::move(edges));
    }
    return out;
}

MarginalSet estimate_marginals(const BinnedDataset& data, const Coupling& c) {
    if (c.var_count() > data.var_count()) {
        throw std::invalid_argument("estimate_marginals: coupling references variable " +
                                    std::to_string(c.var_count()) + " but data has " +
                                    std::to_string(data.var_count()) + " columns");
    }
    const Index n = data.row_count();
    const int bins = data.bin_count;
    MarginalSet out;
    for (const Triplet& t : c.triplets()) {
        out.emplace(t, Tensor3(bins, bins, bins));
    }
    for (auto& [t, h] : out) {
        const auto col_a = data.bins.col(t.a - 1);
        const auto col_b = data.bins.col(t.b - 1);
        const auto col_c = data.bins.col(t.c - 1);
        for (Index i = 0; i < n; ++i) {
            h(col_a[i] - 1, col_b[i] - 1, col_c[i] - 1) += 1.0;
        }
        h.vec() /= static_cast<double>(n);
    }
    return out;
}

Tensor3 marginalize_model_3d(const FactorModel& model, const Triplet& t) {
    if (t.c > model.var_count()) {
        throw std::invalid_argument("marginalize_model_3d: triplet index out of range");
    }
    return cpd3_reconstruct(model.lambda, model.factor(t.a), model.factor(t.b),
                            model.factor(t.c));
}

MarginalSet model_marginals(const FactorModel& model, const Coupling& c) {
    MarginalSet out;
    for (const Triplet& t : c.triplets()) {
        out.emplace(t, marginalize_model_3d(model, t));
    }
    return out;
}

std::vector<Vector> empirical_marginals_1d(const BinnedDataset& data) {
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(data.var_count()));
    for (Index j = 0; j < data.bins.cols(); ++j) {
        Vector h = Vector::Zero(data.bin_count);
        for (Index i = 0; i < data.bins.rows(); ++i) {
            h[data.bins(i, j) - 1] += 1.0;
        }
        out.push_back(h / static_cast<double>(data.row_count()));
    }
    return out;
}

} // namespace pctf3d
