#include "pctf3d/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pctf3d/tensor.hpp"

namespace pctf3d {

namespace {

void check_shapes(const FactorModel& a, const FactorModel& b, bool same_rank) {
    if (a.var_count() != b.var_count() || a.bin_count() != b.bin_count()) {
        throw std::invalid_argument("metrics: models have different shapes");
    }
    if (same_rank && a.rank() != b.rank()) {
        throw std::invalid_argument("metrics: models have different ranks");
    }
}

} // namespace

double err_1d(const FactorModel& reference, const FactorModel& estimate) {
    check_shapes(reference, estimate, false);
    double total = 0.0;
    for (int m = 1; m <= reference.var_count(); ++m) {
        total += (reference.marginal_1d(m) - estimate.marginal_1d(m)).squaredNorm();
    }
    return total;
}

double err_1d(const std::vector<Vector>& reference_marginals, const FactorModel& estimate) {
    if (static_cast<int>(reference_marginals.size()) != estimate.var_count()) {
        throw std::invalid_argument("err_1d: marginal count differs from model variables");
    }
    double total = 0.0;
    for (int m = 1; m <= estimate.var_count(); ++m) {
        const Vector& ref = reference_marginals[static_cast<std::size_t>(m - 1)];
        if (ref.size() != estimate.bin_count()) {
            throw std::invalid_argument("err_1d: marginal length differs from model bins");
        }
        total += (ref - estimate.marginal_1d(m)).squaredNorm();
    }
    return total;
}

double err_3d(const FactorModel& reference, const FactorModel& estimate) {
    check_shapes(reference, estimate, false);
    double total = 0.0;
    const int m = reference.var_count();
    for (int a = 1; a <= m - 2; ++a)
        for (int b = a + 1; b <= m - 1; ++b)
            for (int c = b + 1; c <= m; ++c) {
                const Triplet t{a, b, c};
                total += frobenius_sq_diff(marginalize_model_3d(reference, t),
                                           marginalize_model_3d(estimate, t));
            }
    return total;
}

double err_3d(const MarginalSet& reference, const FactorModel& estimate) {
    double total = 0.0;
    const int m = estimate.var_count();
    for (int a = 1; a <= m - 2; ++a)
        for (int b = a + 1; b <= m - 1; ++b)
            for (int c = b + 1; c <= m; ++c) {
                const Triplet t{a, b, c};
                const auto it = reference.find(t);
                if (it == reference.end()) {
                    throw std::invalid_argument("err_3d: reference misses a triplet marginal");
                }
                total += frobenius_sq_diff(it->second, marginalize_model_3d(estimate, t));
            }
    return total;
}

std::pair<double, std::vector<int>> solve_assignment_max(const Matrix& score) {
    if (score.rows() != score.cols() || score.rows() == 0) {
        throw std::invalid_argument("solve_assignment_max: square nonempty matrix required");
    }
    const int n = static_cast<int>(score.rows());
    // shortest-augmenting-path assignment with potentials, on negated scores
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> potential_u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> potential_v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> matched_row(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> parent(static_cast<std::size_t>(n) + 1, 0);
    auto cost = [&](int i, int j) { return -score(i - 1, j - 1); };

    for (int i = 1; i <= n; ++i) {
        matched_row[0] = i;
        int j0 = 0;
        std::vector<double> min_slack(static_cast<std::size_t>(n) + 1, inf);
        std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = matched_row[static_cast<std::size_t>(j0)];
            double delta = inf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    continue;
                }
                const double cur = cost(i0, j) - potential_u[static_cast<std::size_t>(i0)] -
                                   potential_v[static_cast<std::size_t>(j)];
                if (cur < min_slack[static_cast<std::size_t>(j)]) {
                    min_slack[static_cast<std::size_t>(j)] = cur;
                    parent[static_cast<std::size_t>(j)] = j0;
                }
                if (min_slack[static_cast<std::size_t>(j)] < delta) {
                    delta = min_slack[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    potential_u[static_cast<std::size_t>(matched_row[static_cast<std::size_t>(j)])] += delta;
                    potential_v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    min_slack[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (matched_row[static_cast<std::size_t>(j0)] != 0);
        // augment along the alternating path
        while (j0 != 0) {
            const int j1 = parent[static_cast<std::size_t>(j0)];
            matched_row[static_cast<std::size_t>(j0)] = matched_row[static_cast<std::size_t>(j1)];
            j0 = j1;
        }
    }

    std::vector<int> assignment(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        if (matched_row[static_cast<std::size_t>(j)] != 0) {
            assignment[static_cast<std::size_t>(matched_row[static_cast<std::size_t>(j)]) - 1] = j - 1;
        }
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        total += score(i, assignment[static_cast<std::size_t>(i)]);
    }
    return {total, assignment};
}

FmsResult fms(const FactorModel& reference, const FactorModel& estimate) {
    check_shapes(reference, estimate, true);
    const int rank = reference.rank();
    FmsResult result;
    Matrix score = Matrix::Ones(rank, rank);
    for (int m = 1; m <= reference.var_count(); ++m) {
        const Matrix& ar = reference.factor(m);
        const Matrix& ae = estimate.factor(m);
        for (int r = 0; r < rank; ++r) {
            for (int q = 0; q < rank; ++q) {
                const double den = ar.col(r).norm() * ae.col(q).norm();
                if (den < 1e-300) {
                    score(r, q) = 0.0;
                    result.degenerate_columns = true;
                } else {
                    score(r, q) *= ar.col(r).dot(ae.col(q)) / den;
                }
            }
        }
    }
    auto [value, permutation] = solve_assignment_max(score);
    result.value = value;
    result.permutation = std::move(permutation);
    return result;
}

MetricReport evaluate(const FactorModel& reference, const FactorModel& estimate) {
    MetricReport report;
    report.err1d = err_1d(reference, estimate);
    report.err3d = err_3d(reference, estimate);
    const FmsResult f = fms(reference, estimate);
    report.fms = f.value;
    report.fms_normalized = f.value / estimate.rank();
    report.permutation = f.permutation;
    report.has_fms = true;
    report.degenerate_columns = f.degenerate_columns;
    return report;
}

MetricReport evaluate_empirical(const BinnedDataset& reference, const FactorModel& estimate) {
    if (reference.var_count() != estimate.var_count() ||
        reference.bin_count != estimate.bin_count()) {
        throw std::invalid_argument("evaluate_empirical: data shape differs from model");
    }
    MetricReport report;
    report.err1d = err_1d(empirical_marginals_1d(reference), estimate);
    report.err3d = err_3d(estimate_marginals(reference, gen_full(estimate.var_count())),
                          estimate);
    return report;
}

std::string metric_report_to_json(const MetricReport& report) {
    nlohmann::json j;
    j["err1d"] = report.err1d;
    j["err3d"] = report.err3d;
    if (report.has_fms) {
        j["fms"] = report.fms;
        j["fms_normalized"] = report.fms_normalized;
        j["permutation"] = report.permutation;
        j["degenerate_columns"] = report.degenerate_columns;
    }
    return j.dump(2);
}

} // namespace pctf3d
