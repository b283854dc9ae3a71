#pragma once

#include <cstdint>
#include <vector>

#include "pctf3d/marginals.hpp"
#include "pctf3d/model.hpp"
#include "pctf3d/types.hpp"

namespace pctf3d {

/// Ground-truth generator settings. Components are product distributions on
/// [0,1]^M (independent per dimension given the latent state), discretized
/// onto a uniform grid of I bins per dimension.
struct MixtureSpec {
    enum class Kind { Gaussian, Uniform };

    Kind kind = Kind::Gaussian;
    int var_count = 0;
    int rank = 1;
    int bin_count = 2;
    std::uint64_t seed = 0;

    // gaussian: per-dimension standard deviation drawn from this range
    double sigma_min = 0.05;
    double sigma_max = 0.30;
    // uniform: interval width drawn from this range
    double width_min = 0.20;
    double width_max = 1.00;

    void validate() const;
};

/// Continuous component parameters kept alongside the discretized model, so
/// samples can be drawn either from the discretized distribution or from the
/// underlying continuous mixture.
struct MixtureModel {
    MixtureSpec spec;
    Matrix means;      // R x M (gaussian) or interval left ends (uniform)
    Matrix scales;     // R x M standard deviations or interval widths
    FactorModel discretized;
};

/// Draws component parameters and discretizes each 1-dimensional density
/// onto the bin grid; every factor column is an exact bin-mass vector.
MixtureModel gen_mixture(const MixtureSpec& spec);

/// Discretized ground truth only.
FactorModel gen_nbm(const MixtureSpec& spec);

/// i.i.d. rows from the discretized model: draw a latent state from the
/// loadings, then one bin per dimension from that state's column.
BinnedDataset sample_nbm(const FactorModel& model, Index rows, std::uint64_t seed);

/// i.i.d. real-valued rows from the continuous mixture (to be binned by the
/// caller); the alternative sampling path for trend experiments.
Matrix sample_mixture_continuous(const MixtureModel& mixture, Index rows, std::uint64_t seed);

} // namespace pctf3d
