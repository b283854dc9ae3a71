#pragma once

#include <map>
#include <vector>

#include "pctf3d/coupling.hpp"
#include "pctf3d/model.hpp"
#include "pctf3d/tensor.hpp"
#include "pctf3d/types.hpp"

namespace pctf3d {

enum class BinningStrategy {
    EqualWidth, // equal-width bins on [min, max] per column, max maps to bin I
    Identity,   // data already holds bin indices in 1..I
};

/// N x M matrix of bin indices in 1..I plus the per-dimension bin edges
/// (empty for identity binning).
struct BinnedDataset {
    Eigen::MatrixXi bins;
    int bin_count = 0;
    std::vector<Vector> edges; // I+1 edges per dimension, strictly increasing

    Index row_count() const { return bins.rows(); }
    int var_count() const { return static_cast<int>(bins.cols()); }
};

/// Discretizes real observations into `bin_count` bins per column. A value on
/// a bin boundary is assigned to the upper bin; the column maximum maps to
/// the last bin. Constant columns are rejected under equal-width binning.
BinnedDataset bin_dataset(const Matrix& raw, int bin_count,
                          BinningStrategy strategy = BinningStrategy::EqualWidth);

/// Empirical 3-way marginal tensors, one I x I x I tensor per triplet.
using MarginalSet = std::map<Triplet, Tensor3>;

/// Counts joint bin occurrences for every triplet of the coupling in a
/// single pass over the rows; each tensor sums to 1.
MarginalSet estimate_marginals(const BinnedDataset& data, const Coupling& c);

/// Model-implied 3-way marginal of a triplet: the sum-to-one constraints make
/// marginalization exact, so this is just the rank-R reconstruction from the
/// triplet's three factors.
Tensor3 marginalize_model_3d(const FactorModel& model, const Triplet& t);

/// Model-implied marginals for every triplet of a coupling.
MarginalSet model_marginals(const FactorModel& model, const Coupling& c);

/// Empirical 1-way marginals (bin histograms), one length-I vector per column.
std::vector<Vector> empirical_marginals_1d(const BinnedDataset& data);

} // namespace pctf3d
