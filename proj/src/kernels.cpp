#include "windnbm/kernels.hpp"

#include <algorithm>
#include <cstddef>

namespace windnbm::kernels {

namespace {

void bin_column(std::span<const double> values, std::size_t rows, std::size_t cols, std::size_t f,
                const std::vector<double>& edges, std::uint8_t* out)
{
    for (std::size_t r = 0; r < rows; ++r) {
        const double x = values[r * cols + f];
        const auto b = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
        out[r] = static_cast<std::uint8_t>(std::min<std::size_t>(b, 255));
    }
}

void histogram_feature(const BinnedMatrix& m, std::span<const std::uint32_t> rows, std::span<const double> residual,
                       std::size_t f, HistogramBin* hist)
{
    const std::uint8_t* col = m.bins.data() + f * m.rows;
    for (const auto r : rows) {
        HistogramBin& b = hist[col[r]];
        b.sum += residual[r];
        ++b.count;
    }
}

double tree_sum(std::span<const RegressionTree> trees, std::span<const double> x)
{
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s;
}

} // namespace

BinnedMatrix bin_matrix_serial(std::span<const double> values, std::size_t rows,
                               const std::vector<std::vector<double>>& edges)
{
    BinnedMatrix m{rows, edges.size(), std::vector<std::uint8_t>(rows * edges.size())};
    for (std::size_t f = 0; f < m.cols; ++f) bin_column(values, rows, m.cols, f, edges[f], m.bins.data() + f * rows);
    return m;
}

BinnedMatrix bin_matrix_parallel(std::span<const double> values, std::size_t rows,
                                 const std::vector<std::vector<double>>& edges)
{
    BinnedMatrix m{rows, edges.size(), std::vector<std::uint8_t>(rows * edges.size())};
    const auto cols = static_cast<std::ptrdiff_t>(m.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < cols; ++f) {
        const auto fu = static_cast<std::size_t>(f);
        bin_column(values, rows, m.cols, fu, edges[fu], m.bins.data() + fu * rows);
    }
    return m;
}

void build_histogram_serial(const BinnedMatrix& m, std::span<const std::uint32_t> rows,
                            std::span<const double> residual, std::size_t stride, std::span<HistogramBin> out)
{
    std::fill(out.begin(), out.end(), HistogramBin{});
    for (std::size_t f = 0; f < m.cols; ++f) histogram_feature(m, rows, residual, f, out.data() + f * stride);
}

void build_histogram_parallel(const BinnedMatrix& m, std::span<const std::uint32_t> rows,
                              std::span<const double> residual, std::size_t stride, std::span<HistogramBin> out)
{
    std::fill(out.begin(), out.end(), HistogramBin{});
    const auto cols = static_cast<std::ptrdiff_t>(m.cols);
#pragma omp parallel for schedule(static) if (rows.size() > 4096)
    for (std::ptrdiff_t f = 0; f < cols; ++f) {
        const auto fu = static_cast<std::size_t>(f);
        histogram_feature(m, rows, residual, fu, out.data() + fu * stride);
    }
}

void predict_serial(std::span<const RegressionTree> trees, double base, double learning_rate,
                    std::span<const double> values, std::size_t cols, std::span<double> out)
{
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = base + learning_rate * tree_sum(trees, values.subspan(i * cols, cols));
    }
}

void predict_parallel(std::span<const RegressionTree> trees, double base, double learning_rate,
                      std::span<const double> values, std::size_t cols, std::span<double> out)
{
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        out[iu] = base + learning_rate * tree_sum(trees, values.subspan(iu * cols, cols));
    }
}

void add_tree_serial(const RegressionTree& tree, double learning_rate, std::span<const double> values,
                     std::size_t cols, std::span<double> out)
{
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += learning_rate * tree.predict(values.subspan(i * cols, cols));
}

void add_tree_parallel(const RegressionTree& tree, double learning_rate, std::span<const double> values,
                       std::size_t cols, std::span<double> out)
{
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        out[iu] += learning_rate * tree.predict(values.subspan(iu * cols, cols));
    }
}

} // namespace windnbm::kernels
