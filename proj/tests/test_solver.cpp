#include <doctest.h>

#include <cmath>
#include <limits>

#include "pctf3d/marginals.hpp"
#include "pctf3d/rng.hpp"
#include "pctf3d/solver.hpp"
#include "test_util.hpp"

using namespace pctf3d;
using test_util::kron_vec;
using test_util::random_model;
using test_util::random_simplex_vector;

namespace {

// Exhaustive active-set solver for min ||x - v||^2 on the probability
// simplex: for every support the equality-constrained minimizer is an equal
// shift of v restricted to the support.
Vector simplex_oracle(const Vector& v) {
    const int n = static_cast<int>(v.size());
    Vector best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        double sum = 0.0;
        int size = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                sum += v[i];
                ++size;
            }
        }
        const double shift = (1.0 - sum) / size;
        Vector x = Vector::Zero(n);
        bool feasible = true;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                x[i] = v[i] + shift;
                feasible = feasible && x[i] >= -1e-12;
            }
        }
        if (!feasible) {
            continue;
        }
        const double dist = (x - v).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = x;
        }
    }
    return best;
}

// Independent alternating solver for ONE tensor under simplex constraints,
// written directly against the tensor with its own Kronecker products. Used
// as the oracle for single-triplet fits.
double single_tensor_solver(const Tensor3& h, int rank, std::uint64_t seed, int outer_iters,
                            int inner_iters) {
    const Index bins = h.dim(0);
    FactorModel model = init_model(3, static_cast<int>(bins), rank, seed);

    auto kr = [](const Matrix& x, const Matrix& y) {
        Matrix out(x.rows() * y.rows(), x.cols());
        for (Index c = 0; c < x.cols(); ++c)
            out.col(c) = kron_vec(x.col(c), y.col(c));
        return out;
    };
    auto unfold = [&](int mode) {
        Matrix out(bins, bins * bins);
        for (Index i = 0; i < bins; ++i)
            for (Index j = 0; j < bins; ++j)
                for (Index k = 0; k < bins; ++k) {
                    if (mode == 0) out(i, j + bins * k) = h(i, j, k);
                    if (mode == 1) out(j, i + bins * k) = h(i, j, k);
                    if (mode == 2) out(k, i + bins * j) = h(i, j, k);
                }
        return out;
    };
    auto admm_matrix = [&](const Matrix& gram, const Matrix& rhs, Matrix a) {
        const double rho = gram.trace() / rank;
        const Eigen::LLT<Matrix> chol(gram + rho * Matrix::Identity(rank, rank));
        Matrix dual = Matrix::Zero(a.rows(), a.cols());
        for (int it = 0; it < inner_iters; ++it) {
            const Matrix aux = chol.solve(rhs + rho * (a + dual).transpose());
            a = aux.transpose() - dual;
            for (Index c = 0; c < a.cols(); ++c)
                a.col(c) = simplex_oracle(a.col(c));
            dual += a - aux.transpose();
        }
        return a;
    };

    for (int outer = 0; outer < outer_iters; ++outer) {
        for (int mode = 0; mode < 3; ++mode) {
            const int u = mode == 0 ? 2 : 1, v = mode == 2 ? 2 : 3;
            const Matrix q = kr(model.factor(v), model.factor(u));
            const Matrix gram =
                (q.transpose() * q).cwiseProduct(model.lambda * model.lambda.transpose());
            const Matrix rhs = model.lambda.asDiagonal() * (unfold(mode) * q).transpose();
            model.factor(mode + 1) = admm_matrix(gram, rhs, model.factor(mode + 1));
        }
        const Matrix q = kr(kr(model.factor(3), model.factor(2)), model.factor(1));
        const Matrix gram = q.transpose() * q;
        const Vector rhs = q.transpose() * h.vec();
        const double rho = gram.trace() / rank;
        const Eigen::LLT<Matrix> chol(gram + rho * Matrix::Identity(rank, rank));
        Vector nu = model.lambda;
        Vector dual = Vector::Zero(rank);
        for (int it = 0; it < inner_iters; ++it) {
            const Vector aux = chol.solve(rhs + rho * (nu + dual));
            nu = simplex_oracle(aux - dual);
            dual += nu - aux;
        }
        model.lambda = nu;
    }
    return frobenius_sq_diff(
        h, cpd3_reconstruct(model.lambda, model.factor(1), model.factor(2), model.factor(3)));
}

// Scalar evaluation of the coupled cost, independent of the tensor kernels.
double objective_oracle(const FactorModel& model, const MarginalSet& marginals,
                        const Coupling& coupling) {
    double total = 0.0;
    const Index bins = model.bin_count();
    for (const Triplet& t : coupling.triplets()) {
        const Tensor3& h = marginals.at(t);
        for (Index i = 0; i < bins; ++i)
            for (Index j = 0; j < bins; ++j)
                for (Index k = 0; k < bins; ++k) {
                    double entry = 0.0;
                    for (Index r = 0; r < model.lambda.size(); ++r)
                        entry += model.lambda[r] * model.factor(t.a)(i, r) *
                                 model.factor(t.b)(j, r) * model.factor(t.c)(k, r);
                    const double d = h(i, j, k) - entry;
                    total += d * d;
                }
    }
    return total;
}

} // namespace

// ---------------------------------------------------------------------------
// simplex projection
// ---------------------------------------------------------------------------

TEST_CASE("simplex_project: feasible points are fixed") {
    Vector v(3);
    v << 0.2, 0.3, 0.5;
    CHECK((simplex_project(v) - v).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("simplex_project: vertex projection") {
    Vector v(3);
    v << 2, 0, 0;
    Vector want(3);
    want << 1, 0, 0;
    CHECK((simplex_project(v) - want).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("simplex_project: matches the active-set oracle") {
    Vector v(3);
    v << 0.5, 0.5, 1.0;
    CHECK((simplex_project(v) - simplex_oracle(v)).lpNorm<Eigen::Infinity>() < 1e-12);

    Rng rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.uniform_int(6));
        Vector x(n);
        for (Index i = 0; i < n; ++i)
            x[i] = rng.uniform(-2.0, 2.0);
        const Vector got = simplex_project(x);
        CHECK((got - simplex_oracle(x)).lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK(got.minCoeff() >= 0.0);
        CHECK(got.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

// ---------------------------------------------------------------------------
// initialization
// ---------------------------------------------------------------------------

TEST_CASE("init_model: feasible, deterministic, R=1 degenerates to [1]") {
    const FactorModel a = init_model(4, 5, 3, 2024);
    a.validate(1e-12);
    const FactorModel b = init_model(4, 5, 3, 2024);
    CHECK(a.lambda == b.lambda);
    for (int m = 1; m <= 4; ++m)
        CHECK(a.factor(m) == b.factor(m));
    const FactorModel c = init_model(4, 5, 3, 2025);
    CHECK(a.lambda != c.lambda);

    const FactorModel r1 = init_model(3, 4, 1, 0);
    CHECK(r1.lambda[0] == 1.0);
}

// ---------------------------------------------------------------------------
// inner residual test
// ---------------------------------------------------------------------------

TEST_CASE("admm_converged: identical iterates with matched auxiliary pass") {
    Matrix a(2, 2);
    a << 0.5, 0.5, 0.5, 0.5;
    Matrix dual(2, 2);
    dual << 1, 0, 0, 1;
    CHECK(admm_converged(a, a, a, dual, 1e-9));
}

TEST_CASE("admm_converged: eps = 0 never passes with nonzero residuals") {
    Matrix a(2, 2), prev(2, 2), aux(2, 2), dual(2, 2);
    a << 1, 0, 0, 1;
    prev = a * 0.9;
    aux = a * 1.1;
    dual.setOnes();
    CHECK_FALSE(admm_converged(a, prev, aux, dual, 0.0));
}

TEST_CASE("admm_converged: hand-computed 2x2 ratios") {
    Matrix a(2, 1), prev(2, 1), aux(2, 1), dual(2, 1);
    a << 1.0, 0.0;
    aux << 0.9, 0.1;       // primal residual squared = 0.02, ||a||^2 = 1
    prev << 0.8, 0.2;      // dual residual squared = 0.08
    dual << 1.0, 1.0;      // ||dual||^2 = 2 -> s = 0.04
    CHECK(admm_converged(a, prev, aux, dual, 0.05));
    CHECK_FALSE(admm_converged(a, prev, aux, dual, 0.03));
    // vanishing dual norm leaves the dual ratio undefined -> treated as +inf
    CHECK_FALSE(admm_converged(a, prev, aux, Matrix::Zero(2, 1), 0.05));
}

// ---------------------------------------------------------------------------
// block updates
// ---------------------------------------------------------------------------

TEST_CASE("update_factor: recovers a rank-one factor exactly") {
    Rng rng(83);
    FactorModel truth = random_model(rng, 3, 4, 1);
    const Coupling coupling = gen_full(3);
    const MarginalSet marginals = model_marginals(truth, coupling);

    SolverConfig cfg;
    cfg.rank = 1;
    cfg.max_inner = 300;
    cfg.eps = 1e-14;
    AdmmWorkspace ws;
    ws.reset(3, 4, 1);
    FactorModel guess = truth;
    guess.factor(1) = test_util::random_simplex_matrix(rng, 4, 1);
    const Matrix recovered = update_factor(1, guess, marginals, coupling, cfg, ws);
    CHECK((recovered - truth.factor(1)).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("update_factor: matches the projected least-squares solution (R=1)") {
    // with one triplet and R=1 the subproblem Hessian is isotropic, so the
    // constrained minimizer is the simplex projection of the unconstrained one
    Rng rng(89);
    for (int trial = 0; trial < 30; ++trial) {
        const int bins = 2 + static_cast<int>(rng.uniform_int(3));
        FactorModel model = random_model(rng, 3, bins, 1);
        const Coupling coupling(3, {make_triplet(1, 2, 3)});
        MarginalSet marginals;
        Tensor3 h(bins, bins, bins);
        for (Index i = 0; i < h.size(); ++i)
            h.vec()[i] = rng.uniform01();
        h.vec() /= h.sum();
        marginals.emplace(make_triplet(1, 2, 3), h);

        SolverConfig cfg;
        cfg.rank = 1;
        cfg.max_inner = 2000;
        cfg.eps = 1e-15;
        AdmmWorkspace ws;
        ws.reset(3, bins, 1);
        const Matrix got = update_factor(1, model, marginals, coupling, cfg, ws);

        const Vector s =
            model.lambda[0] * kron_vec(model.factor(3).col(0), model.factor(2).col(0));
        const Vector unconstrained = matricize_mode1(h) * s / s.squaredNorm();
        const Vector want = simplex_oracle(unconstrained);
        CHECK((got.col(0) - want).lpNorm<Eigen::Infinity>() < 1e-6);
    }
}

TEST_CASE("update_factor: never increases the coupled objective") {
    Rng rng(97);
    for (int trial = 0; trial < 20; ++trial) {
        const int vars = 4, bins = 3, rank = 2;
        FactorModel truth = random_model(rng, vars, bins, rank);
        const Coupling coupling = gen_full(vars);
        const MarginalSet marginals = model_marginals(truth, coupling);
        FactorModel model = truth;
        const int m = 1 + static_cast<int>(rng.uniform_int(vars));
        model.factor(m) = test_util::random_simplex_matrix(rng, bins, rank);

        const double before = objective(model, marginals, coupling);
        SolverConfig cfg;
        cfg.rank = rank;
        AdmmWorkspace ws;
        ws.reset(vars, bins, rank);
        model.factor(m) = update_factor(m, model, marginals, coupling, cfg, ws);
        const double after = objective(model, marginals, coupling);
        CHECK(after <= before + 1e-12);
    }
}

TEST_CASE("update_factor: reads only marginals whose triplet contains m") {
    Rng rng(101);
    FactorModel model = random_model(rng, 5, 3, 2);
    const Coupling coupling = gen_plus1(5);
    const MarginalSet marginals = model_marginals(random_model(rng, 5, 3, 2), coupling);

    // keep only the triplets containing variable 2; the update must not notice
    MarginalSet trimmed;
    std::vector<Triplet> kept;
    for (const auto& [t, h] : marginals) {
        if (t.contains(2)) {
            trimmed.emplace(t, h);
            kept.push_back(t);
        }
    }
    const Coupling subcoupling(5, kept);

    SolverConfig cfg;
    cfg.rank = 2;
    AdmmWorkspace ws_full, ws_trim;
    ws_full.reset(5, 3, 2);
    ws_trim.reset(5, 3, 2);
    const Matrix full = update_factor(2, model, marginals, coupling, cfg, ws_full);
    const Matrix trim = update_factor(2, model, trimmed, subcoupling, cfg, ws_trim);
    CHECK(full == trim);
}

TEST_CASE("update_factor: rho follows the trace rule") {
    Rng rng(103);
    FactorModel model = random_model(rng, 4, 3, 2);
    const Coupling coupling = gen_full(4);
    const MarginalSet marginals = model_marginals(model, coupling);
    SolverConfig cfg;
    cfg.rank = 2;
    AdmmWorkspace ws;
    ws.reset(4, 3, 2);
    update_factor(1, model, marginals, coupling, cfg, ws);
    CHECK(ws.rho == ws.gram.trace() / 2.0);
    update_lambda(model, marginals, coupling, cfg, ws);
    CHECK(ws.rho == ws.gram.trace() / 2.0);
}

TEST_CASE("update_factor: absent variable is rejected") {
    Rng rng(107);
    FactorModel model = random_model(rng, 4, 3, 2);
    const Coupling partial(4, {make_triplet(1, 2, 3)});
    const MarginalSet marginals = model_marginals(model, partial);
    SolverConfig cfg;
    cfg.rank = 2;
    AdmmWorkspace ws;
    ws.reset(4, 3, 2);
    CHECK_THROWS_AS(update_factor(4, model, marginals, partial, cfg, ws),
                    std::invalid_argument);
}

TEST_CASE("update_lambda: recovers the loading vector from exact marginals") {
    Rng rng(109);
    FactorModel truth = random_model(rng, 4, 4, 2);
    const Coupling coupling = gen_full(4);
    const MarginalSet marginals = model_marginals(truth, coupling);

    FactorModel guess = truth;
    guess.lambda = random_simplex_vector(rng, 2);
    SolverConfig cfg;
    cfg.rank = 2;
    cfg.max_inner = 3000;
    cfg.eps = 1e-15;
    AdmmWorkspace ws;
    ws.reset(4, 4, 2);
    const Vector got = update_lambda(guess, marginals, coupling, cfg, ws);
    CHECK((got - truth.lambda).lpNorm<Eigen::Infinity>() < 1e-6);

    // cross-check against a grid search over the 1-simplex
    double best_obj = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double t = i / 20000.0;
        FactorModel cand = guess;
        cand.lambda << t, 1.0 - t;
        const double obj = objective(cand, marginals, coupling);
        if (obj < best_obj) {
            best_obj = obj;
            best_t = t;
        }
    }
    CHECK(std::abs(got[0] - best_t) < 1e-4);
}

TEST_CASE("update_lambda: R=1 always returns [1]") {
    Rng rng(113);
    FactorModel model = random_model(rng, 3, 3, 1);
    const Coupling coupling = gen_full(3);
    MarginalSet marginals = model_marginals(random_model(rng, 3, 3, 1), coupling);
    SolverConfig cfg;
    cfg.rank = 1;
    AdmmWorkspace ws;
    ws.reset(3, 3, 1);
    const Vector got = update_lambda(model, marginals, coupling, cfg, ws);
    REQUIRE(got.size() == 1);
    CHECK(got[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("update_lambda: never increases the coupled objective") {
    Rng rng(127);
    for (int trial = 0; trial < 20; ++trial) {
        FactorModel truth = random_model(rng, 4, 3, 3);
        const Coupling coupling = gen_plus1(4);
        const MarginalSet marginals = model_marginals(truth, coupling);
        FactorModel model = truth;
        model.lambda = random_simplex_vector(rng, 3);
        const double before = objective(model, marginals, coupling);
        SolverConfig cfg;
        cfg.rank = 3;
        AdmmWorkspace ws;
        ws.reset(4, 3, 3);
        model.lambda = update_lambda(model, marginals, coupling, cfg, ws);
        CHECK(objective(model, marginals, coupling) <= before + 1e-12);
    }
}

// ---------------------------------------------------------------------------
// objective
// ---------------------------------------------------------------------------

TEST_CASE("objective: zero when the model reproduces the marginals") {
    Rng rng(131);
    const FactorModel model = random_model(rng, 4, 3, 2);
    const Coupling coupling = gen_plus2(4);
    CHECK(objective(model, model_marginals(model, coupling), coupling) <
          1e-24);
}

TEST_CASE("objective: one-hot marginal against a zero-mass model") {
    FactorModel model;
    model.lambda = Vector::Zero(1);
    model.factors.assign(3, Matrix::Zero(2, 1));
    const Coupling coupling(3, {make_triplet(1, 2, 3)});
    MarginalSet marginals;
    Tensor3 h(2, 2, 2);
    h(0, 0, 0) = 1.0;
    marginals.emplace(make_triplet(1, 2, 3), h);
    CHECK(objective(model, marginals, coupling) == 1.0);
}

TEST_CASE("objective: matches the scalar-loop oracle") {
    Rng rng(137);
    for (int trial = 0; trial < 30; ++trial) {
        const FactorModel model = random_model(rng, 5, 3, 2);
        const Coupling coupling = gen_random(5, 6, trial);
        const MarginalSet marginals = model_marginals(random_model(rng, 5, 3, 2), coupling);
        CHECK(objective(model, marginals, coupling) ==
              doctest::Approx(objective_oracle(model, marginals, coupling)).epsilon(1e-10));
    }
}

// ---------------------------------------------------------------------------
// full fits
// ---------------------------------------------------------------------------

TEST_CASE("fit: exact marginals of a small model are matched to near zero") {
    Rng rng(139);
    const FactorModel truth = random_model(rng, 4, 5, 2);
    const Coupling coupling = gen_full(4);
    const MarginalSet marginals = model_marginals(truth, coupling);
    SolverConfig cfg;
    cfg.rank = 2;
    cfg.max_outer = 500;
    cfg.eps = 1e-12;
    cfg.restarts = 5;
    cfg.seed = 7;
    const auto [model, report] = fit(marginals, coupling, cfg);
    CHECK(report.objective_trace.back() < 1e-7);
    model.validate(1e-9);
}

TEST_CASE("fit: output is always simplex-feasible") {
    Rng rng(149);
    for (int trial = 0; trial < 5; ++trial) {
        const FactorModel truth = random_model(rng, 5, 3, 3);
        const Coupling coupling = gen_balanced(5, 6, trial);
        const MarginalSet marginals = model_marginals(truth, coupling);
        SolverConfig cfg;
        cfg.rank = 1 + static_cast<int>(rng.uniform_int(4));
        cfg.max_outer = 15;
        cfg.seed = trial;
        const auto [model, report] = fit(marginals, coupling, cfg);
        model.validate(1e-9);
        CHECK(report.objective_trace.back() <= report.initial_objective + 1e-12);
    }
}

TEST_CASE("fit: deterministic trace for a fixed seed") {
    Rng rng(151);
    const FactorModel truth = random_model(rng, 4, 4, 2);
    const Coupling coupling = gen_plus1(4);
    const MarginalSet marginals = model_marginals(truth, coupling);
    SolverConfig cfg;
    cfg.rank = 2;
    cfg.max_outer = 25;
    cfg.seed = 99;
    const auto [model_a, report_a] = fit(marginals, coupling, cfg);
    const auto [model_b, report_b] = fit(marginals, coupling, cfg);
    CHECK(report_a.iterations == report_b.iterations);
    CHECK(report_a.objective_trace == report_b.objective_trace);
    CHECK(model_a.lambda == model_b.lambda);
    for (int m = 1; m <= 4; ++m)
        CHECK(model_a.factor(m) == model_b.factor(m));
}

TEST_CASE("fit: one outer sweep equals manual in-order block updates") {
    Rng rng(157);
    const FactorModel truth = random_model(rng, 4, 3, 2);
    const Coupling coupling = gen_full(4);
    const MarginalSet marginals = model_marginals(truth, coupling);
    SolverConfig cfg;
    cfg.rank = 2;
    cfg.max_outer = 1;
    cfg.seed = 11;

    const auto [via_fit, report] = fit(marginals, coupling, cfg);

    // replay: each update must see the factors refreshed earlier in the sweep
    FactorModel manual = init_model(4, 3, 2, cfg.seed);
    AdmmWorkspace ws;
    ws.reset(4, 3, 2);
    for (int m = 1; m <= 4; ++m)
        manual.factor(m) = update_factor(m, manual, marginals, coupling, cfg, ws);
    manual.lambda = update_lambda(manual, marginals, coupling, cfg, ws);

    CHECK(via_fit.lambda == manual.lambda);
    for (int m = 1; m <= 4; ++m)
        CHECK(via_fit.factor(m) == manual.factor(m));
}

TEST_CASE("fit: single-triplet coupling equals a plain single-tensor solve") {
    Rng rng(163);
    for (int trial = 0; trial < 4; ++trial) {
        const int bins = 3, rank = 2;
        Tensor3 h(bins, bins, bins);
        for (Index i = 0; i < h.size(); ++i)
            h.vec()[i] = rng.uniform01();
        h.vec() /= h.sum();

        const Coupling coupling(3, {make_triplet(1, 2, 3)});
        MarginalSet marginals;
        marginals.emplace(make_triplet(1, 2, 3), h);
        SolverConfig cfg;
        cfg.rank = rank;
        cfg.max_outer = 40;
        cfg.max_inner = 25;
        cfg.eps = 1e-30; // run the caps exactly, like the oracle
        cfg.seed = 1000 + trial;
        const auto [model, report] = fit(marginals, coupling, cfg);

        const double oracle = single_tensor_solver(h, rank, cfg.seed, 40, 25);
        CHECK(report.objective_trace.back() == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("fit: invalid inputs are rejected") {
    Rng rng(167);
    const FactorModel truth = random_model(rng, 6, 3, 2);
    SolverConfig cfg;
    cfg.rank = 2;

    const Coupling split(6, {make_triplet(1, 2, 3), make_triplet(4, 5, 6)});
    CHECK_THROWS_AS(fit(model_marginals(truth, split), split, cfg), std::invalid_argument);

    const Coupling good = gen_plus2(6);
    MarginalSet missing = model_marginals(truth, good);
    missing.erase(missing.begin());
    CHECK_THROWS_AS(fit(missing, good, cfg), std::invalid_argument);

    SolverConfig bad = cfg;
    bad.eps = 0.0;
    CHECK_THROWS_AS(fit(model_marginals(truth, good), good, bad), std::invalid_argument);
}

TEST_CASE("prune_components drops numerically dead loadings") {
    Rng rng(173);
    FactorModel model = random_model(rng, 3, 3, 3);
    model.lambda << 0.6, 0.4, 0.0;
    const FactorModel pruned = prune_components(model, 1e-8);
    CHECK(pruned.rank() == 2);
    CHECK(pruned.lambda.sum() == doctest::Approx(1.0).epsilon(1e-12));
    pruned.validate(1e-9);
}
