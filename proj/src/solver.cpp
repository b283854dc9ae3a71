#include "pctf3d/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "pctf3d/rng.hpp"
#include "pctf3d/tensor.hpp"

namespace pctf3d {

namespace {

constexpr double kDualFloor = 1e-30;

double ratio_or_inf(double num, double den) {
    if (den < kDualFloor) {
        return std::numeric_limits<double>::infinity();
    }
    return num / den;
}

// Position of m inside a sorted triplet (0, 1 or 2).
int position_of(const Triplet& t, int m) {
    if (t.a == m) return 0;
    if (t.b == m) return 1;
    if (t.c == m) return 2;
    throw std::invalid_argument("triplet does not contain the requested variable");
}

// The two variables of t other than m, in ascending order.
std::pair<int, int> other_two(const Triplet& t, int m) {
    if (t.a == m) return {t.b, t.c};
    if (t.b == m) return {t.a, t.c};
    return {t.a, t.b};
}

const Tensor3& marginal_for(const MarginalSet& marginals, const Triplet& t) {
    const auto it = marginals.find(t);
    if (it == marginals.end()) {
        throw std::invalid_argument("missing marginal for coupling triplet (" +
                                    std::to_string(t.a) + "," + std::to_string(t.b) + "," +
                                    std::to_string(t.c) + ")");
    }
    return it->second;
}

double relative_change(double previous, double current) {
    const double den = std::max(std::abs(previous), 1e-300);
    return std::abs(previous - current) / den;
}

std::pair<FactorModel, FitReport> fit_once(const MarginalSet& marginals,
                                           const Coupling& coupling, const SolverConfig& cfg,
                                           std::uint64_t init_seed) {
    const int var_count = coupling.var_count();
    const int bins =
        static_cast<int>(marginal_for(marginals, coupling.triplets().front()).dim(0));
    FactorModel model = init_model(var_count, bins, cfg.rank, init_seed);
    AdmmWorkspace ws;
    ws.reset(var_count, bins, cfg.rank);

    FitReport report;
    report.initial_objective = objective(model, marginals, coupling);
    double previous = report.initial_objective;
    for (int outer = 0; outer < cfg.max_outer; ++outer) {
        if (!cfg.warm_start_duals) {
            ws.reset(var_count, bins, cfg.rank);
        }
        for (int m = 1; m <= var_count; ++m) {
            model.factor(m) = update_factor(m, model, marginals, coupling, cfg, ws);
        }
        model.lambda = update_lambda(model, marginals, coupling, cfg, ws);
        const double current = objective(model, marginals, coupling);
        report.objective_trace.push_back(current);
        report.iterations = outer + 1;
        if (relative_change(previous, current) < cfg.eps) {
            report.converged = true;
            break;
        }
        previous = current;
    }
    return {std::move(model), std::move(report)};
}

} // namespace

void AdmmWorkspace::reset(int var_count, int bin_count, int rank) {
    factor_duals.assign(static_cast<std::size_t>(var_count),
                        Matrix::Zero(bin_count, rank));
    lambda_dual = Vector::Zero(rank);
    rho = 0.0;
}

Vector simplex_project(const Vector& v) {
    const Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double running = 0.0;
    double theta = 0.0;
    int support = 0;
    for (Index j = 0; j < n; ++j) {
        running += u[static_cast<std::size_t>(j)];
        const double candidate = (running - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - candidate > 0.0) {
            theta = candidate;
            support = static_cast<int>(j) + 1;
        }
    }
    if (support == 0) {
        // all-equal degenerate input; fall back to the barycenter
        return Vector::Constant(n, 1.0 / static_cast<double>(n));
    }
    return (v.array() - theta).max(0.0);
}

void simplex_project_columns(Matrix& a) {
    for (Index c = 0; c < a.cols(); ++c) {
        a.col(c) = simplex_project(a.col(c));
    }
}

bool admm_converged(const Matrix& current, const Matrix& previous, const Matrix& auxiliary,
                    const Matrix& dual, double eps) {
    const double r = ratio_or_inf((current - auxiliary).squaredNorm(), current.squaredNorm());
    const double s = ratio_or_inf((current - previous).squaredNorm(), dual.squaredNorm());
    return r < eps && s < eps;
}

Matrix update_factor(int m, const FactorModel& model, const MarginalSet& marginals,
                     const Coupling& coupling, const SolverConfig& cfg, AdmmWorkspace& ws) {
    const int rank = model.rank();
    const Index bins = model.bin_count();
    ws.gram.setZero(rank, rank);
    ws.rhs.setZero(rank, bins);

    int degree = 0;
    for (const Triplet& t : coupling.triplets()) {
        if (!t.contains(m)) {
            continue;
        }
        ++degree;
        const auto [u, v] = other_two(t, m);
        // bring m's mode to the front so the mode-1 unfolding pairs with
        // khatri_rao(A_v, A_u)
        const Tensor3 h = permute_mode_front(marginal_for(marginals, t), position_of(t, m));
        const Matrix q = khatri_rao(model.factor(v), model.factor(u));
        ws.gram.noalias() += q.transpose() * q;
        ws.rhs.noalias() += (matricize_mode1_view(h) * q).transpose();
    }
    if (degree == 0) {
        throw std::invalid_argument("update_factor: variable " + std::to_string(m) +
                                    " appears in no coupling triplet");
    }
    ws.gram = ws.gram.cwiseProduct(model.lambda * model.lambda.transpose());
    ws.rhs = model.lambda.asDiagonal() * ws.rhs;
    ws.rho = ws.gram.trace() / rank;
    if (!(ws.rho > 0.0) || !std::isfinite(ws.rho)) {
        throw std::runtime_error("update_factor: degenerate Gram matrix");
    }
    const Eigen::LLT<Matrix> chol(ws.gram + ws.rho * Matrix::Identity(rank, rank));
    if (chol.info() != Eigen::Success) {
        throw std::runtime_error("update_factor: Cholesky factorization failed");
    }

    Matrix a = model.factor(m);
    Matrix& dual = ws.factor_duals[static_cast<std::size_t>(m - 1)];
    Matrix a_prev(bins, rank), aux(rank, bins);
    for (int it = 0; it < cfg.max_inner; ++it) {
        a_prev = a;
        aux = chol.solve(ws.rhs + ws.rho * (a + dual).transpose());
        a = aux.transpose() - dual;
        simplex_project_columns(a);
        dual += a - aux.transpose();
        if (admm_converged(a, a_prev, aux.transpose(), dual, cfg.eps)) {
            break;
        }
    }
    return a;
}

Vector update_lambda(const FactorModel& model, const MarginalSet& marginals,
                     const Coupling& coupling, const SolverConfig& cfg, AdmmWorkspace& ws) {
    const int rank = model.rank();
    if (coupling.size() == 0) {
        throw std::invalid_argument("update_lambda: empty coupling");
    }
    ws.gram.setZero(rank, rank);
    ws.rhs_vec.setZero(rank);
    for (const Triplet& t : coupling.triplets()) {
        const Tensor3& h = marginal_for(marginals, t);
        const Matrix q =
            khatri_rao(khatri_rao(model.factor(t.c), model.factor(t.b)), model.factor(t.a));
        ws.gram.noalias() += q.transpose() * q;
        ws.rhs_vec.noalias() += q.transpose() * h.vec();
    }
    ws.rho = ws.gram.trace() / rank;
    if (!(ws.rho > 0.0) || !std::isfinite(ws.rho)) {
        throw std::runtime_error("update_lambda: degenerate Gram matrix");
    }
    const Eigen::LLT<Matrix> chol(ws.gram + ws.rho * Matrix::Identity(rank, rank));
    if (chol.info() != Eigen::Success) {
        throw std::runtime_error("update_lambda: Cholesky factorization failed");
    }

    Vector nu = model.lambda;
    Vector& dual = ws.lambda_dual;
    Vector nu_prev(rank), aux(rank);
    for (int it = 0; it < cfg.max_inner; ++it) {
        nu_prev = nu;
        aux = chol.solve(ws.rhs_vec + ws.rho * (nu + dual));
        nu = simplex_project(aux - dual);
        dual += nu - aux;
        if (admm_converged(nu, nu_prev, aux, dual, cfg.eps)) {
            break;
        }
    }
    return nu;
}

double objective(const FactorModel& model, const MarginalSet& marginals,
                 const Coupling& coupling) {
    double total = 0.0;
    for (const Triplet& t : coupling.triplets()) {
        total += frobenius_sq_diff(marginal_for(marginals, t), marginalize_model_3d(model, t));
    }
    return total;
}

std::pair<FactorModel, FitReport> fit(const MarginalSet& marginals, const Coupling& coupling,
                                      const SolverConfig& cfg) {
    if (cfg.rank < 1 || cfg.max_outer < 1 || cfg.max_inner < 1 || !(cfg.eps > 0.0)) {
        throw std::invalid_argument("fit: invalid solver configuration");
    }
    if (cfg.restarts < 1) {
        throw std::invalid_argument("fit: restarts must be >= 1");
    }
    if (!is_connected(coupling)) {
        throw std::invalid_argument("fit: coupling is not connected");
    }
    for (const Triplet& t : coupling.triplets()) {
        marginal_for(marginals, t); // throws on the first missing triplet
    }

    const auto start = std::chrono::steady_clock::now();
    FactorModel best_model;
    FitReport best_report;
    double best = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < cfg.restarts; ++restart) {
        const std::uint64_t s =
            cfg.restarts == 1 ? cfg.seed : derive_seed(cfg.seed, static_cast<std::uint64_t>(restart));
        auto [model, report] = fit_once(marginals, coupling, cfg, s);
        const double final_obj =
            report.objective_trace.empty() ? report.initial_objective
                                           : report.objective_trace.back();
        if (final_obj < best) {
            best = final_obj;
            best_model = std::move(model);
            best_report = std::move(report);
            best_report.best_restart = restart;
        }
    }
    best_report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(best_model), std::move(best_report)};
}

} // namespace pctf3d
