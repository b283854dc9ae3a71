#pragma once

#include <string>
#include <vector>

#include "pctf3d/marginals.hpp"
#include "pctf3d/model.hpp"
#include "pctf3d/types.hpp"

namespace pctf3d {

struct FmsResult {
    double value = 0.0;            // in [0, R] for simplex-feasible models
    std::vector<int> permutation;  // estimated column matched to truth column r
    bool degenerate_columns = false; // some cosine was forced to 0 by a zero column
};

struct MetricReport {
    double err1d = 0.0;
    double err3d = 0.0;
    double fms = 0.0;
    double fms_normalized = 0.0; // fms / R, for cross-rank comparison
    std::vector<int> permutation;
    bool has_fms = false;
    bool degenerate_columns = false;
};

/// Sum over variables of squared 2-norm differences between 1-way marginals.
double err_1d(const FactorModel& reference, const FactorModel& estimate);
double err_1d(const std::vector<Vector>& reference_marginals, const FactorModel& estimate);

/// Sum over all C(M,3) triplets of squared Frobenius differences between
/// 3-way marginals, whether or not a triplet entered the fit.
double err_3d(const FactorModel& reference, const FactorModel& estimate);

/// Same, against empirical marginals; the set must cover every triplet.
double err_3d(const MarginalSet& reference, const FactorModel& estimate);

/// Factor match score: the best permutation-matched sum over components of
/// the product across variables of factor-column cosines. Solved exactly as
/// a linear assignment on the R x R score matrix. The loading vectors play
/// no role.
FmsResult fms(const FactorModel& reference, const FactorModel& estimate);

/// Maximum-total-score assignment (O(n^3) shortest augmenting paths).
/// Returns the total and, for each row, the assigned column.
std::pair<double, std::vector<int>> solve_assignment_max(const Matrix& score);

/// Full report against a reference model (includes the match score).
MetricReport evaluate(const FactorModel& reference, const FactorModel& estimate);

/// Report against held-out data: empirical 1-way and all-triplet 3-way
/// references; no match score.
MetricReport evaluate_empirical(const BinnedDataset& reference, const FactorModel& estimate);

/// Flat key/value JSON rendering of a report.
std::string metric_report_to_json(const MetricReport& report);

} // namespace pctf3d
