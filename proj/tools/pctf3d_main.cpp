#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pctf3d/bench.hpp"
#include "pctf3d/io.hpp"
#include "pctf3d/metrics.hpp"
#include "pctf3d/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

void print_coupling_summary(const pctf3d::Coupling& coupling) {
    const std::vector<int> deg = degree_sequence(coupling);
    std::cout << "M " << coupling.var_count() << "\nT " << coupling.size() << "\ndegrees";
    for (int d : deg) {
        std::cout << ' ' << d;
    }
    std::cout << "\nstep " << step(coupling) << "\nconnected "
              << (is_connected(coupling) ? "yes" : "no") << "\n";
}

struct CoupleArgs {
    int var_count = 0;
    int triplet_count = 0;
    std::string strategy;
    std::uint64_t seed = 0;
    std::string out;
};

int run_couple(const CoupleArgs& args) {
    if ((args.strategy == "random" || args.strategy == "balanced") && args.triplet_count <= 0) {
        std::cerr << "error: --triplets is required for the " << args.strategy << " strategy\n";
        return kExitUsage;
    }
    const pctf3d::Coupling coupling =
        pctf3d::make_coupling(args.strategy, args.var_count, args.triplet_count, args.seed);
    if (!args.out.empty()) {
        pctf3d::write_coupling_file(args.out, coupling);
    } else {
        std::cout << pctf3d::format_coupling(coupling);
    }
    print_coupling_summary(coupling);
    return kExitOk;
}

struct FitArgs {
    std::string data;
    std::string coupling;
    int bins = 0;
    bool header = false;
    std::string binning = "equal-width";
    std::string out_model;
    std::string report_path;
    std::string save_binned;
    double prune = -1.0;
    pctf3d::SolverConfig solver;
};

int run_fit(const FitArgs& args) {
    const pctf3d::Coupling coupling = pctf3d::read_coupling_file(args.coupling);
    const pctf3d::Matrix raw = pctf3d::read_csv(args.data, args.header);
    if (coupling.var_count() != raw.cols()) {
        std::cerr << "error: coupling is over " << coupling.var_count()
                  << " variables but the data has " << raw.cols() << " columns\n";
        return kExitUsage;
    }
    const auto strategy = args.binning == "identity" ? pctf3d::BinningStrategy::Identity
                                                     : pctf3d::BinningStrategy::EqualWidth;
    const pctf3d::BinnedDataset data = pctf3d::bin_dataset(raw, args.bins, strategy);
    if (!args.save_binned.empty()) {
        pctf3d::write_binned_cache(args.save_binned, data);
    }
    const pctf3d::MarginalSet marginals = pctf3d::estimate_marginals(data, coupling);
    auto [model, report] = pctf3d::fit(marginals, coupling, args.solver);
    if (args.prune >= 0.0) {
        model = pctf3d::prune_components(model, args.prune);
    }

    pctf3d::ModelProvenance prov;
    prov.coupling_hash = pctf3d::coupling_hash(coupling);
    prov.seed = args.solver.seed;
    prov.rank = args.solver.rank;
    prov.max_outer = args.solver.max_outer;
    prov.max_inner = args.solver.max_inner;
    prov.eps = args.solver.eps;
    prov.restarts = args.solver.restarts;
    model.provenance = prov;
    pctf3d::write_model_file(args.out_model, model);

    nlohmann::json j;
    j["initial_objective"] = report.initial_objective;
    j["final_objective"] =
        report.objective_trace.empty() ? report.initial_objective : report.objective_trace.back();
    j["objective_trace"] = report.objective_trace;
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["wall_seconds"] = report.wall_seconds;
    j["best_restart"] = report.best_restart;
    if (!args.report_path.empty()) {
        pctf3d::write_text_file(args.report_path, j.dump(2) + "\n");
    }
    std::cout << "objective " << j["final_objective"].get<double>() << "\niterations "
              << report.iterations << "\nconverged " << (report.converged ? "yes" : "no")
              << "\nmodel " << args.out_model << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string model;
    std::string truth_model;
    std::string data;
    int bins = 0;
    bool header = false;
    std::string binning = "equal-width";
    std::string out;
};

int run_eval(const EvalArgs& args) {
    if (args.truth_model.empty() && args.data.empty()) {
        std::cerr << "error: eval needs --truth-model or --data\n";
        return kExitUsage;
    }
    const pctf3d::FactorModel estimate = pctf3d::read_model_file(args.model);
    pctf3d::MetricReport report;
    if (!args.truth_model.empty()) {
        report = pctf3d::evaluate(pctf3d::read_model_file(args.truth_model), estimate);
    } else {
        const pctf3d::Matrix raw = pctf3d::read_csv(args.data, args.header);
        const int bins = args.bins > 0 ? args.bins : estimate.bin_count();
        const auto strategy = args.binning == "identity" ? pctf3d::BinningStrategy::Identity
                                                         : pctf3d::BinningStrategy::EqualWidth;
        report = pctf3d::evaluate_empirical(pctf3d::bin_dataset(raw, bins, strategy), estimate);
    }
    std::cout << "err1d " << report.err1d << "\nerr3d " << report.err3d << "\n";
    if (report.has_fms) {
        std::cout << "fms " << report.fms << "\nfms_normalized " << report.fms_normalized
                  << "\npermutation";
        for (int p : report.permutation) {
            std::cout << ' ' << p;
        }
        std::cout << "\n";
    }
    if (!args.out.empty()) {
        pctf3d::write_text_file(args.out, pctf3d::metric_report_to_json(report) + "\n");
    }
    return kExitOk;
}

struct BenchArgs {
    std::string grid_path;
    std::string out;
    int workers = 0; // 0: take from grid file
};

long long parse_ll(const std::map<std::string, std::string>& kv, const std::string& key,
                   long long fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stoll(it->second);
}

double parse_d(const std::map<std::string, std::string>& kv, const std::string& key,
               double fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stod(it->second);
}

pctf3d::BenchGrid parse_grid(const std::map<std::string, std::string>& kv) {
    pctf3d::BenchGrid grid;
    grid.var_count = static_cast<int>(parse_ll(kv, "M", 0));
    grid.bin_count = static_cast<int>(parse_ll(kv, "bins", 0));
    grid.rank = static_cast<int>(parse_ll(kv, "rank", 1));
    grid.seeds = static_cast<int>(parse_ll(kv, "seeds", 1));
    grid.base_seed = static_cast<std::uint64_t>(parse_ll(kv, "base_seed", 0));
    grid.workers = static_cast<int>(parse_ll(kv, "workers", 1));
    const auto kind = kv.count("kind") ? kv.at("kind") : "gaussian";
    if (kind == "gaussian") {
        grid.kind = pctf3d::MixtureSpec::Kind::Gaussian;
    } else if (kind == "uniform") {
        grid.kind = pctf3d::MixtureSpec::Kind::Uniform;
    } else {
        throw std::invalid_argument("grid: kind must be gaussian or uniform");
    }
    if (!kv.count("cells")) {
        throw std::invalid_argument("grid: missing cells");
    }
    std::stringstream cells(kv.at("cells"));
    std::string cell;
    while (std::getline(cells, cell, ',')) {
        const std::size_t colon = cell.find(':');
        pctf3d::BenchCell c;
        c.strategy = cell.substr(0, colon);
        c.strategy.erase(0, c.strategy.find_first_not_of(" \t"));
        c.strategy.erase(c.strategy.find_last_not_of(" \t") + 1);
        if (colon != std::string::npos) {
            c.triplet_count = std::stoi(cell.substr(colon + 1));
        }
        grid.cells.push_back(std::move(c));
    }
    if (!kv.count("samples")) {
        throw std::invalid_argument("grid: missing samples");
    }
    std::stringstream samples(kv.at("samples"));
    std::string n;
    while (std::getline(samples, n, ',')) {
        grid.sample_sizes.push_back(std::stoll(n));
    }
    grid.solver.rank = grid.rank;
    grid.solver.max_outer = static_cast<int>(parse_ll(kv, "max_outer", 1000));
    grid.solver.max_inner = static_cast<int>(parse_ll(kv, "max_inner", 20));
    grid.solver.eps = parse_d(kv, "eps", 1e-6);
    grid.solver.restarts = static_cast<int>(parse_ll(kv, "restarts", 1));
    return grid;
}

int run_bench(const BenchArgs& args) {
    pctf3d::BenchGrid grid = parse_grid(pctf3d::read_keyvalue_file(args.grid_path));
    if (args.workers > 0) {
        grid.workers = args.workers;
    }
    std::ofstream out(args.out);
    if (!out) {
        throw pctf3d::io_error("cannot open '" + args.out + "' for writing");
    }
    const auto rows = pctf3d::run_benchmark(grid, &out);
    std::cout << "wrote " << rows.size() << " rows to " << args.out << "\n";
    return kExitOk;
}

struct ValidateArgs {
    std::string coupling;
    std::string model;
};

int run_validate(const ValidateArgs& args) {
    if (!args.coupling.empty()) {
        const pctf3d::Coupling coupling = pctf3d::read_coupling_file(args.coupling);
        print_coupling_summary(coupling);
        if (!is_connected(coupling)) {
            std::cerr << "error: coupling is not connected\n";
            return kExitUsage;
        }
    }
    if (!args.model.empty()) {
        const pctf3d::FactorModel model = pctf3d::read_model_file(args.model);
        std::cout << "M " << model.var_count() << "\nI " << model.bin_count() << "\nR "
                  << model.rank() << "\n";
        model.validate(); // throws with a message when infeasible
        std::cout << "feasible yes\n";
    }
    return kExitOk;
}

void add_solver_flags(CLI::App* cmd, pctf3d::SolverConfig& cfg) {
    cmd->add_option("--rank,-R", cfg.rank, "Decomposition rank R")->required();
    cmd->add_option("--max-outer", cfg.max_outer, "Outer iteration cap")
        ->capture_default_str();
    cmd->add_option("--max-inner", cfg.max_inner, "Inner iteration cap per block update")
        ->capture_default_str();
    cmd->add_option("--eps", cfg.eps, "Convergence tolerance")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    cmd->add_option("--restarts", cfg.restarts, "Random restarts, best objective wins")
        ->capture_default_str();
    cmd->add_flag("--warm-duals", cfg.warm_start_duals,
                  "Keep dual variables across outer iterations");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete PMF estimation by partially coupled factorization of "
                 "3-way marginals"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file");
    app.get_formatter()->column_width(30);

    CoupleArgs couple;
    CLI::App* couple_cmd = app.add_subcommand("couple", "Generate a coupling file");
    couple_cmd->configurable();
    couple_cmd->add_option("--M,-M", couple.var_count, "Number of variables")->required();
    couple_cmd
        ->add_option("--strategy", couple.strategy,
                     "One of plus2, plus1, random, balanced, full")
        ->required()
        ->check(CLI::IsMember({"plus2", "plus1", "random", "balanced", "full"}));
    couple_cmd->add_option("--triplets,-T", couple.triplet_count,
                           "Triplet count (random/balanced)");
    couple_cmd->add_option("--seed", couple.seed, "Random seed")->capture_default_str();
    couple_cmd->add_option("--out,-o", couple.out, "Output path (stdout when omitted)");

    FitArgs fitargs;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Estimate a model from data");
    fit_cmd->configurable();
    fit_cmd->add_option("--data", fitargs.data, "Observations CSV")->required();
    fit_cmd->add_option("--coupling", fitargs.coupling, "Coupling file")->required();
    fit_cmd->add_option("--bins,-I", fitargs.bins, "Bins per dimension")->required();
    fit_cmd->add_flag("--header", fitargs.header, "CSV has a header row");
    fit_cmd->add_option("--binning", fitargs.binning, "equal-width or identity")
        ->check(CLI::IsMember({"equal-width", "identity"}))
        ->capture_default_str();
    fit_cmd->add_option("--out-model", fitargs.out_model, "Output model JSON")->required();
    fit_cmd->add_option("--report", fitargs.report_path, "Output fit report JSON");
    fit_cmd->add_option("--save-binned", fitargs.save_binned,
                        "Write the binned dataset cache to <prefix>.csv/<prefix>.edges");
    fit_cmd->add_option("--prune", fitargs.prune,
                        "Drop components with loading <= this threshold after the fit");
    add_solver_flags(fit_cmd, fitargs.solver);

    EvalArgs evalargs;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a model");
    eval_cmd->configurable();
    eval_cmd->add_option("--model", evalargs.model, "Model JSON to evaluate")->required();
    CLI::Option* truth_opt =
        eval_cmd->add_option("--truth-model", evalargs.truth_model, "Reference model JSON");
    eval_cmd->add_option("--data", evalargs.data, "Reference observations CSV")
        ->excludes(truth_opt);
    eval_cmd->add_option("--bins,-I", evalargs.bins, "Bins for the reference data");
    eval_cmd->add_flag("--header", evalargs.header, "CSV has a header row");
    eval_cmd->add_option("--binning", evalargs.binning, "equal-width or identity")
        ->check(CLI::IsMember({"equal-width", "identity"}))
        ->capture_default_str();
    eval_cmd->add_option("--out,-o", evalargs.out, "Write the report JSON here");

    BenchArgs benchargs;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Run a synthetic benchmark grid");
    bench_cmd->configurable();
    bench_cmd->add_option("--grid", benchargs.grid_path, "Grid definition (key=value file)")
        ->required();
    bench_cmd->add_option("--out,-o", benchargs.out, "Results CSV path")->required();
    bench_cmd->add_option("--workers", benchargs.workers, "Concurrent grid points");

    ValidateArgs validateargs;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "Check a coupling or model file");
    validate_cmd->add_option("--coupling", validateargs.coupling, "Coupling file");
    validate_cmd->add_option("--model", validateargs.model, "Model JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (couple_cmd->parsed()) return run_couple(couple);
        if (fit_cmd->parsed()) return run_fit(fitargs);
        if (eval_cmd->parsed()) return run_eval(evalargs);
        if (bench_cmd->parsed()) return run_bench(benchargs);
        if (validate_cmd->parsed()) {
            if (validateargs.coupling.empty() && validateargs.model.empty()) {
                std::cerr << "error: validate needs --coupling and/or --model\n";
                return kExitUsage;
            }
            return run_validate(validateargs);
        }
    } catch (const pctf3d::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
