#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pctf3d/coupling.hpp"
#include "pctf3d/marginals.hpp"
#include "pctf3d/model.hpp"
#include "pctf3d/types.hpp"

namespace pctf3d {

struct SolverConfig {
    int rank = 1;
    int max_outer = 1000;
    int max_inner = 20;
    double eps = 1e-6; // outer relative-change tolerance; shared by the inner residual test
    std::uint64_t seed = 0;
    bool warm_start_duals = false;
    int restarts = 1;
};

struct FitReport {
    std::vector<double> objective_trace; // value after each outer iteration
    double initial_objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double wall_seconds = 0.0;
    int best_restart = 0;
};

/// Scratch state for the inner constrained least-squares solves: Gram matrix,
/// right-hand sides, scaled dual variables and the per-call step size
/// rho = trace(G)/R. Dual variables persist across outer iterations only when
/// the configuration enables warm starts.
struct AdmmWorkspace {
    std::vector<Matrix> factor_duals; // one I x R dual per variable
    Vector lambda_dual;               // length-R dual
    Matrix gram;                      // R x R
    Matrix rhs;                       // R x I (factor update)
    Vector rhs_vec;                   // R (loading update)
    double rho = 0.0;

    void reset(int var_count, int bin_count, int rank);
};

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}
/// (sort-and-threshold).
Vector simplex_project(const Vector& v);

/// Column-wise simplex projection in place.
void simplex_project_columns(Matrix& a);

/// Scaled residual test for the inner iterations: the primal ratio
/// ||current - auxiliary||^2 / ||current||^2 and the dual ratio
/// ||current - previous||^2 / ||dual||^2 must both fall below eps. A
/// vanishing dual norm leaves the dual ratio undefined; it is treated as
/// +infinity so the test cannot pass spuriously.
bool admm_converged(const Matrix& current, const Matrix& previous, const Matrix& auxiliary,
                    const Matrix& dual, double eps);

/// One block update of the m-th factor (1-based): accumulates the Gram and
/// right-hand side over the triplets containing m, then runs projected ADMM
/// iterations until the residual test or the inner cap. Returns a
/// simplex-feasible I x R matrix; the model is left untouched.
Matrix update_factor(int m, const FactorModel& model, const MarginalSet& marginals,
                     const Coupling& coupling, const SolverConfig& cfg, AdmmWorkspace& ws);

/// Block update of the loading vector over all coupling triplets.
Vector update_lambda(const FactorModel& model, const MarginalSet& marginals,
                     const Coupling& coupling, const SolverConfig& cfg, AdmmWorkspace& ws);

/// Coupled cost: sum over the coupling's triplets of the squared Frobenius
/// distance between the empirical marginal and the model-implied one.
double objective(const FactorModel& model, const MarginalSet& marginals,
                 const Coupling& coupling);

/// Alternating optimization: sweeps factor updates in variable order (each
/// sweep sees the factors already refreshed this round), then the loading
/// update, until the relative objective change falls below cfg.eps or
/// cfg.max_outer is reached. With cfg.restarts > 1, independent restarts run
/// from seeds derived from cfg.seed and the best final objective wins.
std::pair<FactorModel, FitReport> fit(const MarginalSet& marginals, const Coupling& coupling,
                                      const SolverConfig& cfg);

} // namespace pctf3d
