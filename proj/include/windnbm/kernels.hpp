#pragma once

// Data-parallel inner loops of the booster. Every kernel has a serial
// reference twin; the OpenMP versions split work so that each output element
// is produced by one thread in the serial order, so both give identical bits.

#include <cstdint>
#include <span>
#include <vector>

#include "windnbm/gbdt.hpp"

namespace windnbm::kernels {

// Column-major bin indices of a dense matrix.
struct BinnedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> bins;

    std::span<const std::uint8_t> column(std::size_t f) const { return {bins.data() + f * rows, rows}; }
};

struct HistogramBin {
    double sum = 0.0;
    std::uint32_t count = 0;
};

// values is row-major rows x edges.size(); bin of x is the first edge >= x.
BinnedMatrix bin_matrix_serial(std::span<const double> values, std::size_t rows,
                               const std::vector<std::vector<double>>& edges);
BinnedMatrix bin_matrix_parallel(std::span<const double> values, std::size_t rows,
                                 const std::vector<std::vector<double>>& edges);

// out has cols * stride entries; feature f uses out[f * stride, f * stride + stride).
void build_histogram_serial(const BinnedMatrix& m, std::span<const std::uint32_t> rows,
                            std::span<const double> residual, std::size_t stride, std::span<HistogramBin> out);
void build_histogram_parallel(const BinnedMatrix& m, std::span<const std::uint32_t> rows,
                              std::span<const double> residual, std::size_t stride, std::span<HistogramBin> out);

// out[i] = base + learning_rate * sum of tree outputs on row i.
void predict_serial(std::span<const RegressionTree> trees, double base, double learning_rate,
                    std::span<const double> values, std::size_t cols, std::span<double> out);
void predict_parallel(std::span<const RegressionTree> trees, double base, double learning_rate,
                      std::span<const double> values, std::size_t cols, std::span<double> out);

// out[i] += learning_rate * tree(row i)
void add_tree_serial(const RegressionTree& tree, double learning_rate, std::span<const double> values,
                     std::size_t cols, std::span<double> out);
void add_tree_parallel(const RegressionTree& tree, double learning_rate, std::span<const double> values,
                       std::size_t cols, std::span<double> out);

} // namespace windnbm::kernels
