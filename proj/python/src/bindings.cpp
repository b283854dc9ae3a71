#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pctf3d/bench.hpp"
#include "pctf3d/io.hpp"
#include "pctf3d/metrics.hpp"
#include "pctf3d/solver.hpp"
#include "pctf3d/synth.hpp"

namespace py = pybind11;
using namespace pctf3d;

namespace {

std::vector<std::tuple<int, int, int>> triplet_tuples(const Coupling& c) {
    std::vector<std::tuple<int, int, int>> out;
    out.reserve(static_cast<std::size_t>(c.size()));
    for (const Triplet& t : c.triplets()) {
        out.emplace_back(t.a, t.b, t.c);
    }
    return out;
}

Coupling coupling_from_tuples(int var_count,
                              const std::vector<std::tuple<int, int, int>>& triplets) {
    std::vector<Triplet> out;
    out.reserve(triplets.size());
    for (const auto& [a, b, c] : triplets) {
        out.push_back(make_triplet(a, b, c));
    }
    return {var_count, std::move(out)};
}

// 3-way tensors cross the boundary as Fortran-ordered numpy arrays.
py::array_t<double> tensor_to_array(const Tensor3& t) {
    py::array_t<double, py::array::f_style> out(
        {t.dim(0), t.dim(1), t.dim(2)});
    std::copy(t.vec().data(), t.vec().data() + t.size(), out.mutable_data());
    return out;
}

BinnedDataset dataset_from_array(const Eigen::MatrixXi& bins, int bin_count) {
    BinnedDataset data;
    data.bins = bins;
    data.bin_count = bin_count;
    if (bins.size() == 0) {
        throw std::invalid_argument("dataset must be nonempty");
    }
    if (bins.minCoeff() < 1 || bins.maxCoeff() > bin_count) {
        throw std::invalid_argument("bin indices must lie in 1..bins");
    }
    return data;
}

SolverConfig make_config(int rank, int max_outer, int max_inner, double eps,
                         std::uint64_t seed, int restarts, bool warm_start_duals) {
    SolverConfig cfg;
    cfg.rank = rank;
    cfg.max_outer = max_outer;
    cfg.max_inner = max_inner;
    cfg.eps = eps;
    cfg.seed = seed;
    cfg.restarts = restarts;
    cfg.warm_start_duals = warm_start_duals;
    return cfg;
}

py::dict report_to_dict(const FitReport& report) {
    py::dict out;
    out["objective_trace"] = report.objective_trace;
    out["initial_objective"] = report.initial_objective;
    out["final_objective"] = report.objective_trace.empty() ? report.initial_objective
                                                            : report.objective_trace.back();
    out["iterations"] = report.iterations;
    out["converged"] = report.converged;
    out["wall_seconds"] = report.wall_seconds;
    out["best_restart"] = report.best_restart;
    return out;
}

} // namespace

PYBIND11_MODULE(_pctf3d, m) {
    m.doc() = "Discrete PMF estimation by partially coupled factorization of 3-way "
              "marginals";

    py::class_<Coupling>(m, "Coupling")
        .def(py::init(&coupling_from_tuples), py::arg("var_count"), py::arg("triplets"))
        .def_property_readonly("var_count", &Coupling::var_count)
        .def_property_readonly("triplets", &triplet_tuples)
        .def("__len__", &Coupling::size)
        .def("degree_sequence", [](const Coupling& c) { return degree_sequence(c); })
        .def("step", [](const Coupling& c) { return step(c); })
        .def("is_connected", [](const Coupling& c) { return is_connected(c); })
        .def("__str__", &format_coupling)
        .def_static("parse", &parse_coupling, py::arg("text"));

    m.def("gen_plus2", &gen_plus2, py::arg("var_count"));
    m.def("gen_plus1", &gen_plus1, py::arg("var_count"));
    m.def("gen_full", &gen_full, py::arg("var_count"));
    m.def("gen_random", &gen_random, py::arg("var_count"), py::arg("triplets"),
          py::arg("seed") = 0);
    m.def("gen_balanced", &gen_balanced, py::arg("var_count"), py::arg("triplets"),
          py::arg("seed") = 0);
    m.def("lyndon_words", &lyndon_words, py::arg("var_count"));
    m.def("max_triplets", &max_triplets, py::arg("var_count"));
    m.def("min_triplets", &min_triplets, py::arg("var_count"));

    py::class_<FactorModel>(m, "FactorModel")
        .def_property_readonly("var_count", &FactorModel::var_count)
        .def_property_readonly("bin_count", &FactorModel::bin_count)
        .def_property_readonly("rank", &FactorModel::rank)
        .def_property_readonly("weights",
                               [](const FactorModel& model) { return model.lambda; })
        .def("factor", py::overload_cast<int>(&FactorModel::factor, py::const_),
             py::arg("m"),
             "Conditional probability table of variable m (1-based), I x R")
        .def("marginal_1d", &FactorModel::marginal_1d, py::arg("m"))
        .def("marginal_3d",
             [](const FactorModel& model, std::tuple<int, int, int> t) {
                 return tensor_to_array(marginalize_model_3d(
                     model, make_triplet(std::get<0>(t), std::get<1>(t), std::get<2>(t))));
             },
             py::arg("triplet"))
        .def("validate", &FactorModel::validate, py::arg("tol") = 1e-9)
        .def("is_feasible", &FactorModel::is_feasible, py::arg("tol") = 1e-9)
        .def("to_json", &model_to_json)
        .def_static("from_json", &model_from_json, py::arg("text"))
        .def("prune", &prune_components, py::arg("tol") = 1e-8);

    m.def("init_model", &init_model, py::arg("var_count"), py::arg("bins"), py::arg("rank"),
          py::arg("seed") = 0);
    m.def("permute_components", &permute_components, py::arg("model"), py::arg("perm"));

    m.def("khatri_rao", &khatri_rao, py::arg("a"), py::arg("b"));
    m.def("cpd3_reconstruct",
          [](const Vector& lambda, const Matrix& a, const Matrix& b, const Matrix& c) {
              return tensor_to_array(cpd3_reconstruct(lambda, a, b, c));
          },
          py::arg("weights"), py::arg("a"), py::arg("b"), py::arg("c"));
    m.def("simplex_project", &simplex_project, py::arg("v"));

    m.def("gen_nbm",
          [](const std::string& kind, int var_count, int rank, int bins, std::uint64_t seed,
             double sigma_min, double sigma_max, double width_min, double width_max) {
              MixtureSpec spec;
              if (kind == "gaussian") {
                  spec.kind = MixtureSpec::Kind::Gaussian;
              } else if (kind == "uniform") {
                  spec.kind = MixtureSpec::Kind::Uniform;
              } else {
                  throw std::invalid_argument("kind must be 'gaussian' or 'uniform'");
              }
              spec.var_count = var_count;
              spec.rank = rank;
              spec.bin_count = bins;
              spec.seed = seed;
              spec.sigma_min = sigma_min;
              spec.sigma_max = sigma_max;
              spec.width_min = width_min;
              spec.width_max = width_max;
              return gen_nbm(spec);
          },
          py::arg("kind"), py::arg("var_count"), py::arg("rank"), py::arg("bins"),
          py::arg("seed") = 0, py::arg("sigma_min") = 0.05, py::arg("sigma_max") = 0.30,
          py::arg("width_min") = 0.20, py::arg("width_max") = 1.00);

    m.def("sample_nbm",
          [](const FactorModel& model, long long rows, std::uint64_t seed) {
              return sample_nbm(model, rows, seed).bins;
          },
          py::arg("model"), py::arg("rows"), py::arg("seed") = 0,
          "i.i.d. rows of bin indices (1-based) drawn from the model");

    m.def("fit",
          [](const Eigen::MatrixXi& bins, int bin_count, const Coupling& coupling, int rank,
             int max_outer, int max_inner, double eps, std::uint64_t seed, int restarts,
             bool warm_start_duals) {
              const BinnedDataset data = dataset_from_array(bins, bin_count);
              const MarginalSet marginals = estimate_marginals(data, coupling);
              const SolverConfig cfg = make_config(rank, max_outer, max_inner, eps, seed,
                                                   restarts, warm_start_duals);
              auto [model, report] = fit(marginals, coupling, cfg);
              return py::make_tuple(std::move(model), report_to_dict(report));
          },
          py::arg("data"), py::arg("bins"), py::arg("coupling"), py::arg("rank"),
          py::arg("max_outer") = 1000, py::arg("max_inner") = 20, py::arg("eps") = 1e-6,
          py::arg("seed") = 0, py::arg("restarts") = 1, py::arg("warm_start_duals") = false,
          "Estimate a model from pre-binned data (N x M integer matrix, entries in "
          "1..bins) over the given coupling");

    m.def("objective",
          [](const FactorModel& model, const Eigen::MatrixXi& bins, int bin_count,
             const Coupling& coupling) {
              const BinnedDataset data = dataset_from_array(bins, bin_count);
              return objective(model, estimate_marginals(data, coupling), coupling);
          },
          py::arg("model"), py::arg("data"), py::arg("bins"), py::arg("coupling"));

    m.def("err_1d",
          py::overload_cast<const FactorModel&, const FactorModel&>(&err_1d),
          py::arg("reference"), py::arg("estimate"));
    m.def("err_3d", py::overload_cast<const FactorModel&, const FactorModel&>(&err_3d),
          py::arg("reference"), py::arg("estimate"));
    m.def("fms",
          [](const FactorModel& reference, const FactorModel& estimate) {
              const FmsResult r = fms(reference, estimate);
              return py::make_tuple(r.value, r.permutation);
          },
          py::arg("reference"), py::arg("estimate"),
          "Best permutation-matched factor cosine score; returns (value, permutation)");

    m.attr("__version__") = "0.1.0";
}
