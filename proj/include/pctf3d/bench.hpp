#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pctf3d/solver.hpp"
#include "pctf3d/synth.hpp"

namespace pctf3d {

/// One coupling strategy at a given triplet budget. T is ignored where the
/// strategy fixes it (plus2, plus1, full).
struct BenchCell {
    std::string strategy; // plus2 | plus1 | random | balanced | full
    int triplet_count = 0;
};

/// Cartesian grid: cells x sample sizes x seeds. The ground truth and the
/// dataset for a given (seed, N) are shared across cells, so strategies are
/// compared on identical data.
struct BenchGrid {
    int var_count = 0;
    int bin_count = 0;
    int rank = 1;
    MixtureSpec::Kind kind = MixtureSpec::Kind::Gaussian;
    std::vector<BenchCell> cells;
    std::vector<long long> sample_sizes;
    int seeds = 1;
    std::uint64_t base_seed = 0;
    SolverConfig solver;
    int workers = 1;
};

struct BenchRow {
    std::string strategy;
    int triplet_count = 0;
    long long samples = 0;
    std::uint64_t seed = 0;
    double err1d = 0.0;
    double err3d = 0.0;
    double fms = 0.0;
    int iterations = 0;
    double wall_ms = 0.0; // solver time only; sampling and counting excluded
};

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

/// Runs every grid point: generate the truth, sample, count marginals, fit,
/// evaluate. Rows stream to `csv` (when given) in deterministic grid order,
/// flushed as each prefix completes, so an interrupted run leaves a valid
/// CSV prefix. `workers` > 1 runs grid points concurrently.
std::vector<BenchRow> run_benchmark(const BenchGrid& grid, std::ostream* csv = nullptr);

/// Resolves a strategy name to a coupling.
Coupling make_coupling(const std::string& strategy, int var_count, int triplet_count,
                       std::uint64_t seed);

} // namespace pctf3d
