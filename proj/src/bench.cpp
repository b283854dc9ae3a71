#include "pctf3d/bench.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pctf3d/metrics.hpp"
#include "pctf3d/rng.hpp"

namespace pctf3d {

namespace {

struct GridPoint {
    std::size_t cell = 0;
    std::size_t sample = 0;
    int seed = 0;
};

BenchRow run_point(const BenchGrid& grid, const GridPoint& p) {
    const BenchCell& cell = grid.cells[p.cell];
    const long long samples = grid.sample_sizes[p.sample];
    const auto seed = static_cast<std::uint64_t>(p.seed);

    MixtureSpec spec;
    spec.kind = grid.kind;
    spec.var_count = grid.var_count;
    spec.rank = grid.rank;
    spec.bin_count = grid.bin_count;
    spec.seed = derive_seed(grid.base_seed, seed);
    const FactorModel truth = gen_nbm(spec);

    // data shared across cells for a given (seed, N): strategies see the
    // same draws
    const BinnedDataset data =
        sample_nbm(truth, samples, derive_seed(grid.base_seed ^ 0x5eedULL, seed * 1000 + p.sample));

    const std::uint64_t coupling_seed =
        derive_seed(grid.base_seed ^ 0xc0421ULL, seed * 100 + p.cell);
    const Coupling coupling =
        make_coupling(cell.strategy, grid.var_count, cell.triplet_count, coupling_seed);
    const MarginalSet marginals = estimate_marginals(data, coupling);

    SolverConfig cfg = grid.solver;
    cfg.rank = grid.rank;
    cfg.seed = derive_seed(grid.base_seed ^ 0xf17ULL, seed * 100 + p.cell);
    const auto [model, report] = fit(marginals, coupling, cfg);

    BenchRow row;
    row.strategy = cell.strategy;
    row.triplet_count = coupling.size();
    row.samples = samples;
    row.seed = seed;
    row.err1d = err_1d(truth, model);
    row.err3d = err_3d(truth, model);
    row.fms = fms(truth, model).value;
    row.iterations = report.iterations;
    row.wall_ms = report.wall_seconds * 1e3;
    return row;
}

} // namespace

std::string bench_csv_header() {
    return "strategy,T,N,seed,err1d,err3d,fms,iterations,wall_ms";
}

std::string bench_csv_row(const BenchRow& row) {
    std::ostringstream out;
    out.precision(12);
    out << row.strategy << ',' << row.triplet_count << ',' << row.samples << ',' << row.seed
        << ',' << row.err1d << ',' << row.err3d << ',' << row.fms << ',' << row.iterations
        << ',' << row.wall_ms;
    return out.str();
}

Coupling make_coupling(const std::string& strategy, int var_count, int triplet_count,
                       std::uint64_t seed) {
    if (strategy == "plus2") return gen_plus2(var_count);
    if (strategy == "plus1") return gen_plus1(var_count);
    if (strategy == "full") return gen_full(var_count);
    if (strategy == "random") return gen_random(var_count, triplet_count, seed);
    if (strategy == "balanced") return gen_balanced(var_count, triplet_count, seed);
    throw std::invalid_argument("unknown coupling strategy '" + strategy + "'");
}

std::vector<BenchRow> run_benchmark(const BenchGrid& grid, std::ostream* csv) {
    if (grid.cells.empty() || grid.sample_sizes.empty() || grid.seeds < 1) {
        throw std::invalid_argument("run_benchmark: empty grid");
    }
    std::vector<GridPoint> points;
    for (std::size_t c = 0; c < grid.cells.size(); ++c)
        for (std::size_t n = 0; n < grid.sample_sizes.size(); ++n)
            for (int s = 0; s < grid.seeds; ++s)
                points.push_back({c, n, s});

    std::vector<BenchRow> rows(points.size());
    std::vector<char> done(points.size(), 0);
    std::size_t flushed = 0;
    std::mutex mu;
    std::exception_ptr failure;

    if (csv) {
        *csv << bench_csv_header() << '\n' << std::flush;
    }
    auto flush_prefix = [&]() {
        while (flushed < points.size() && done[flushed]) {
            if (csv) {
                *csv << bench_csv_row(rows[flushed]) << '\n' << std::flush;
            }
            ++flushed;
        }
    };

    const int workers = std::max(1, grid.workers);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) {
                return;
            }
            try {
                BenchRow row = run_point(grid, points[i]);
                std::lock_guard<std::mutex> lock(mu);
                rows[i] = std::move(row);
                done[i] = 1;
                flush_prefix();
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) {
                    failure = std::current_exception();
                }
                return;
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return rows;
}

} // namespace pctf3d
