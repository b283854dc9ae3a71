#include "pctf3d/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pctf3d/rng.hpp"

namespace pctf3d {

namespace {

double normal_cdf(double x, double mean, double sigma) {
    return 0.5 * std::erfc(-(x - mean) / (sigma * std::numbers::sqrt2));
}

// Mass of [lo, hi] under Uniform(a, a + w), as a fraction of the component.
double uniform_mass(double lo, double hi, double a, double w) {
    const double overlap = std::min(hi, a + w) - std::max(lo, a);
    return std::max(overlap, 0.0) / w;
}

} // namespace

void MixtureSpec::validate() const {
    if (var_count < 1 || rank < 1 || bin_count < 2) {
        throw std::invalid_argument("mixture spec: need M >= 1, R >= 1, I >= 2");
    }
    if (!(sigma_min > 0.0) || sigma_max < sigma_min) {
        throw std::invalid_argument("mixture spec: bad sigma range");
    }
    if (!(width_min > 0.0) || width_max < width_min || width_max > 1.0) {
        throw std::invalid_argument("mixture spec: bad width range");
    }
}

MixtureModel gen_mixture(const MixtureSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    MixtureModel mix;
    mix.spec = spec;
    mix.means.resize(spec.rank, spec.var_count);
    mix.scales.resize(spec.rank, spec.var_count);

    Vector lambda(spec.rank);
    for (int r = 0; r < spec.rank; ++r) {
        lambda[r] = rng.uniform01();
    }
    lambda /= lambda.sum();

    std::vector<Matrix> factors(static_cast<std::size_t>(spec.var_count),
                                Matrix(spec.bin_count, spec.rank));
    const double bin_width = 1.0 / spec.bin_count;
    for (int r = 0; r < spec.rank; ++r) {
        for (int m = 0; m < spec.var_count; ++m) {
            Vector column(spec.bin_count);
            if (spec.kind == MixtureSpec::Kind::Gaussian) {
                const double mean = rng.uniform01();
                const double sigma = rng.uniform(spec.sigma_min, spec.sigma_max);
                mix.means(r, m) = mean;
                mix.scales(r, m) = sigma;
                for (int b = 0; b < spec.bin_count; ++b) {
                    column[b] = normal_cdf((b + 1) * bin_width, mean, sigma) -
                                normal_cdf(b * bin_width, mean, sigma);
                }
            } else {
                const double width = rng.uniform(spec.width_min, spec.width_max);
                const double left = rng.uniform(0.0, 1.0 - width + 1e-300);
                mix.means(r, m) = left;
                mix.scales(r, m) = width;
                for (int b = 0; b < spec.bin_count; ++b) {
                    column[b] = uniform_mass(b * bin_width, (b + 1) * bin_width, left, width);
                }
            }
            const double mass = column.sum();
            if (!(mass > 1e-12)) {
                throw std::runtime_error("gen_mixture: component places no mass on the grid");
            }
            factors[static_cast<std::size_t>(m)].col(r) = column / mass;
        }
    }
    mix.discretized.lambda = std::move(lambda);
    mix.discretized.factors = std::move(factors);
    return mix;
}

FactorModel gen_nbm(const MixtureSpec& spec) {
    return gen_mixture(spec).discretized;
}

BinnedDataset sample_nbm(const FactorModel& model, Index rows, std::uint64_t seed) {
    if (rows < 1) {
        throw std::invalid_argument("sample_nbm: need at least one row");
    }
    model.validate(1e-6);
    Rng rng(seed);
    const int vars = model.var_count();
    const int bins = model.bin_count();
    const int rank = model.rank();

    // per-factor cumulative columns for inverse-CDF draws
    std::vector<Matrix> cdf(static_cast<std::size_t>(vars));
    for (int m = 1; m <= vars; ++m) {
        Matrix c = model.factor(m);
        for (Index b = 1; b < bins; ++b) {
            c.row(b) += c.row(b - 1);
        }
        cdf[static_cast<std::size_t>(m - 1)] = std::move(c);
    }
    Vector lambda_cdf(rank);
    double acc = 0.0;
    for (int r = 0; r < rank; ++r) {
        acc += model.lambda[r];
        lambda_cdf[r] = acc;
    }

    auto draw = [&](const double* col, int n) {
        const double u = rng.uniform01();
        const double* end = col + n;
        const double* it = std::upper_bound(col, end, u);
        return static_cast<int>(it == end ? n - 1 : it - col);
    };

    BinnedDataset out;
    out.bin_count = bins;
    out.bins.resize(rows, vars);
    for (Index i = 0; i < rows; ++i) {
        const int r = draw(lambda_cdf.data(), rank);
        for (int m = 0; m < vars; ++m) {
            out.bins(i, m) =
                1 + draw(cdf[static_cast<std::size_t>(m)].col(r).data(), bins);
        }
    }
    return out;
}

Matrix sample_mixture_continuous(const MixtureModel& mixture, Index rows, std::uint64_t seed) {
    if (rows < 1) {
        throw std::invalid_argument("sample_mixture_continuous: need at least one row");
    }
    Rng rng(seed);
    const int vars = mixture.spec.var_count;
    Matrix out(rows, vars);
    for (Index i = 0; i < rows; ++i) {
        const int r = rng.categorical(mixture.discretized.lambda);
        for (int m = 0; m < vars; ++m) {
            if (mixture.spec.kind == MixtureSpec::Kind::Gaussian) {
                // Box-Muller from two uniform draws
                const double u1 = std::max(rng.uniform01(), 1e-300);
                const double u2 = rng.uniform01();
                const double z =
                    std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
                out(i, m) = mixture.means(r, m) + mixture.scales(r, m) * z;
            } else {
                out(i, m) = mixture.means(r, m) + mixture.scales(r, m) * rng.uniform01();
            }
        }
    }
    return out;
}

} // namespace pctf3d
