#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pctf3d/types.hpp"

namespace pctf3d {

/// Provenance attached to serialized models.
struct ModelProvenance {
    std::uint64_t coupling_hash = 0;
    std::uint64_t seed = 0;
    int rank = 0;
    int max_outer = 0;
    int max_inner = 0;
    double eps = 0.0;
    int restarts = 1;
};

/// Latent-class (naive Bayes) model of an M-variate discrete distribution:
/// a loading vector over R hidden states and one I x R conditional
/// probability table per variable. Equivalently, the parameters of a
/// simplex-constrained rank-R canonical polyadic decomposition of the
/// probability mass tensor.
struct FactorModel {
    Vector lambda;               // R state probabilities
    std::vector<Matrix> factors; // M matrices, each I x R, columns on the simplex

    int var_count() const { return static_cast<int>(factors.size()); }
    int bin_count() const { return factors.empty() ? 0 : static_cast<int>(factors[0].rows()); }
    int rank() const { return static_cast<int>(lambda.size()); }

    const Matrix& factor(int m) const { return factors[static_cast<std::size_t>(m - 1)]; }
    Matrix& factor(int m) { return factors[static_cast<std::size_t>(m - 1)]; }

    /// Throws if any entry is negative beyond `tol` or any column (or the
    /// loading vector) misses unit sum by more than `tol`.
    void validate(double tol = 1e-9) const;
    bool is_feasible(double tol = 1e-9) const;

    /// 1-way marginal of variable m: factor(m) * lambda.
    Vector marginal_1d(int m) const;

    std::optional<ModelProvenance> provenance;
};

/// Random simplex-feasible model: i.i.d. uniform(0,1) entries, each column
/// and the loading vector normalized to unit sum. Deterministic per seed.
FactorModel init_model(int var_count, int bin_count, int rank, std::uint64_t seed);

/// Applies a column permutation consistently to the loadings and all factors.
FactorModel permute_components(const FactorModel& model, const std::vector<int>& perm);

/// Drops components whose loading is <= tol and renormalizes; keeps the
/// largest component if everything falls below the threshold.
FactorModel prune_components(const FactorModel& model, double tol = 1e-8);

/// JSON round trip at full double precision.
std::string model_to_json(const FactorModel& model);
FactorModel model_from_json(const std::string& text);

} // namespace pctf3d
