// Serial reference vs OpenMP kernels on a design matrix shaped like one
// turbine-year of the simulated farm (5 causal + 1 simultaneity column).
#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "windnbm/gbdt.hpp"
#include "windnbm/kernels.hpp"

using namespace windnbm;

namespace {

constexpr std::size_t kCols = 6;

struct Fixture {
    DesignMatrix m;
    std::vector<std::vector<double>> edges;
    kernels::BinnedMatrix binned;
    std::vector<std::uint32_t> rows;
    GbdtModel model;
};

const Fixture& fixture(std::size_t n)
{
    static std::map<std::size_t, Fixture> cache;
    auto [it, fresh] = cache.try_emplace(n);
    auto& f = it->second;
    if (!fresh) return f;
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (std::size_t c = 0; c < kCols; ++c) f.m.feature_names.push_back("x" + std::to_string(c));
    f.m.turbine_ids = {"T01"};
    for (std::size_t r = 0; r < n; ++r) {
        double y = 0.0;
        for (std::size_t c = 0; c < kCols; ++c) {
            const double x = g(rng);
            f.m.values.push_back(x);
            y += (c % 2 ? 0.5 : 1.0) * x * x;
        }
        f.m.target.push_back(y + 0.1 * g(rng));
        f.m.row_turbine.push_back(0);
        f.m.row_time.push_back(Timestamp{static_cast<std::int64_t>(r) * 600});
    }
    f.edges.resize(kCols);
    for (std::size_t c = 0; c < kCols; ++c) {
        std::vector<double> col(n);
        for (std::size_t r = 0; r < n; ++r) col[r] = f.m.at(r, c);
        f.edges[c] = compute_bin_edges(col, 256);
    }
    f.binned = kernels::bin_matrix_serial(f.m.values, n, f.edges);
    for (std::uint32_t r = 0; r < n; r += 2) f.rows.push_back(r);
    TrainParams p;
    p.max_trees = 50;
    p.early_stopping_rounds = 1000;
    f.model = fit(f.m, f.m, p);
    return f;
}

template <bool Parallel>
void BM_BinMatrix(benchmark::State& state)
{
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto b = Parallel ? kernels::bin_matrix_parallel(f.m.values, f.m.rows(), f.edges)
                          : kernels::bin_matrix_serial(f.m.values, f.m.rows(), f.edges);
        benchmark::DoNotOptimize(b.bins.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(kCols));
}

template <bool Parallel>
void BM_Histogram(benchmark::State& state)
{
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<kernels::HistogramBin> hist(kCols * 256);
    for (auto _ : state) {
        if (Parallel) kernels::build_histogram_parallel(f.binned, f.rows, f.m.target, 256, hist);
        else kernels::build_histogram_serial(f.binned, f.rows, f.m.target, 256, hist);
        benchmark::DoNotOptimize(hist.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.rows.size() * kCols));
}

template <bool Parallel>
void BM_Predict(benchmark::State& state)
{
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(f.m.rows());
    for (auto _ : state) {
        if (Parallel) kernels::predict_parallel(f.model.trees, f.model.base_score, f.model.learning_rate, f.m.values, kCols, out);
        else kernels::predict_serial(f.model.trees, f.model.base_score, f.model.learning_rate, f.m.values, kCols, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_AddTree(benchmark::State& state)
{
    const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(f.m.rows(), 0.0);
    for (auto _ : state) {
        if (Parallel) kernels::add_tree_parallel(f.model.trees[0], 0.1, f.m.values, kCols, out);
        else kernels::add_tree_serial(f.model.trees[0], 0.1, f.m.values, kCols, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

// 52 560 rows is one turbine-year at 10 minutes.
BENCHMARK(BM_BinMatrix<false>)->Name("bin_matrix/serial")->Arg(52560)->Arg(262800);
BENCHMARK(BM_BinMatrix<true>)->Name("bin_matrix/parallel")->Arg(52560)->Arg(262800);
BENCHMARK(BM_Histogram<false>)->Name("histogram/serial")->Arg(52560)->Arg(262800);
BENCHMARK(BM_Histogram<true>)->Name("histogram/parallel")->Arg(52560)->Arg(262800);
BENCHMARK(BM_Predict<false>)->Name("predict/serial")->Arg(52560);
BENCHMARK(BM_Predict<true>)->Name("predict/parallel")->Arg(52560);
BENCHMARK(BM_AddTree<false>)->Name("add_tree/serial")->Arg(52560)->Arg(262800);
BENCHMARK(BM_AddTree<true>)->Name("add_tree/parallel")->Arg(52560)->Arg(262800);

BENCHMARK_MAIN();
