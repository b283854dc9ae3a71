#include "pctf3d/model.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pctf3d/rng.hpp"

namespace pctf3d {

using nlohmann::json;

namespace {

void check_simplex(const Vector& v, double tol, const std::string& what) {
    if (v.size() == 0) {
        throw std::invalid_argument(what + ": empty");
    }
    if (v.minCoeff() < -tol) {
        throw std::invalid_argument(what + ": negative entry " + std::to_string(v.minCoeff()));
    }
    if (std::abs(v.sum() - 1.0) > tol) {
        throw std::invalid_argument(what + ": sums to " + std::to_string(v.sum()) +
                                    ", expected 1");
    }
}

Vector normalized_uniform(Rng& rng, Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v[i] = rng.uniform01();
    }
    const double total = v.sum();
    if (total <= 0.0) {
        v.setConstant(1.0 / static_cast<double>(n));
        return v;
    }
    return v / total;
}

} // namespace

void FactorModel::validate(double tol) const {
    if (factors.empty()) {
        throw std::invalid_argument("model: no factors");
    }
    check_simplex(lambda, tol, "model loading vector");
    for (int m = 1; m <= var_count(); ++m) {
        const Matrix& A = factor(m);
        if (A.cols() != lambda.size() || A.rows() != bin_count()) {
            throw std::invalid_argument("model: factor " + std::to_string(m) +
                                        " has inconsistent shape");
        }
        for (Index r = 0; r < A.cols(); ++r) {
            check_simplex(A.col(r), tol,
                          "model factor " + std::to_string(m) + " column " + std::to_string(r));
        }
    }
}

bool FactorModel::is_feasible(double tol) const {
    try {
        validate(tol);
        return true;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

Vector FactorModel::marginal_1d(int m) const {
    return factor(m) * lambda;
}

FactorModel init_model(int var_count, int bin_count, int rank, std::uint64_t seed) {
    if (var_count < 1 || bin_count < 1 || rank < 1) {
        throw std::invalid_argument("init_model: dimensions must be positive");
    }
    Rng rng(seed);
    FactorModel model;
    model.lambda = normalized_uniform(rng, rank);
    model.factors.reserve(static_cast<std::size_t>(var_count));
    for (int m = 0; m < var_count; ++m) {
        Matrix A(bin_count, rank);
        for (Index r = 0; r < rank; ++r) {
            A.col(r) = normalized_uniform(rng, bin_count);
        }
        model.factors.push_back(std::move(A));
    }
    return model;
}

FactorModel permute_components(const FactorModel& model, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != model.rank()) {
        throw std::invalid_argument("permute_components: permutation length mismatch");
    }
    FactorModel out = model;
    for (int r = 0; r < model.rank(); ++r) {
        const int src = perm[static_cast<std::size_t>(r)];
        out.lambda[r] = model.lambda[src];
        for (std::size_t m = 0; m < model.factors.size(); ++m) {
            out.factors[m].col(r) = model.factors[m].col(src);
        }
    }
    return out;
}

FactorModel prune_components(const FactorModel& model, double tol) {
    std::vector<int> keep;
    for (int r = 0; r < model.rank(); ++r) {
        if (model.lambda[r] > tol) {
            keep.push_back(r);
        }
    }
    if (keep.empty()) {
        int best = 0;
        model.lambda.maxCoeff(&best);
        keep.push_back(best);
    }
    FactorModel out;
    out.provenance = model.provenance;
    out.lambda.resize(static_cast<Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.lambda[static_cast<Index>(i)] = model.lambda[keep[i]];
    }
    out.lambda /= out.lambda.sum();
    for (const Matrix& A : model.factors) {
        Matrix B(A.rows(), static_cast<Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i) {
            B.col(static_cast<Index>(i)) = A.col(keep[i]);
        }
        out.factors.push_back(std::move(B));
    }
    return out;
}

std::string model_to_json(const FactorModel& model) {
    json j;
    j["M"] = model.var_count();
    j["I"] = model.bin_count();
    j["R"] = model.rank();
    j["lambda"] = std::vector<double>(model.lambda.data(),
                                      model.lambda.data() + model.lambda.size());
    json factors = json::array();
    for (const Matrix& A : model.factors) {
        json f;
        f["rows"] = A.rows();
        f["cols"] = A.cols();
        f["data"] = std::vector<double>(A.data(), A.data() + A.size()); // column-major
        factors.push_back(std::move(f));
    }
    j["factors"] = std::move(factors);
    if (model.provenance) {
        const ModelProvenance& p = *model.provenance;
        j["provenance"] = {{"coupling_hash", p.coupling_hash}, {"seed", p.seed},
                           {"rank", p.rank},                   {"max_outer", p.max_outer},
                           {"max_inner", p.max_inner},         {"eps", p.eps},
                           {"restarts", p.restarts}};
    }
    return j.dump(2);
}

FactorModel model_from_json(const std::string& text) {
    json j = json::parse(text);
    FactorModel model;
    const int var_count = j.at("M").get<int>();
    const int bin_count = j.at("I").get<int>();
    const int rank = j.at("R").get<int>();
    const auto lambda = j.at("lambda").get<std::vector<double>>();
    if (static_cast<int>(lambda.size()) != rank) {
        throw std::invalid_argument("model json: lambda length differs from R");
    }
    model.lambda = Eigen::Map<const Vector>(lambda.data(), rank);
    for (const json& f : j.at("factors")) {
        const auto rows = f.at("rows").get<Index>();
        const auto cols = f.at("cols").get<Index>();
        const auto data = f.at("data").get<std::vector<double>>();
        if (rows != bin_count || cols != rank ||
            static_cast<Index>(data.size()) != rows * cols) {
            throw std::invalid_argument("model json: factor shape mismatch");
        }
        model.factors.emplace_back(Eigen::Map<const Matrix>(data.data(), rows, cols));
    }
    if (model.var_count() != var_count) {
        throw std::invalid_argument("model json: factor count differs from M");
    }
    if (j.contains("provenance")) {
        const json& p = j["provenance"];
        ModelProvenance prov;
        prov.coupling_hash = p.value("coupling_hash", std::uint64_t{0});
        prov.seed = p.value("seed", std::uint64_t{0});
        prov.rank = p.value("rank", 0);
        prov.max_outer = p.value("max_outer", 0);
        prov.max_inner = p.value("max_inner", 0);
        prov.eps = p.value("eps", 0.0);
        prov.restarts = p.value("restarts", 1);
        model.provenance = prov;
    }
    return model;
}

} // namespace pctf3d
