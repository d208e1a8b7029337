#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "windnbm/features.hpp"

namespace windnbm {

// Binary regression tree stored as a flat node array; node 0 is the root.
// Internal nodes send x[feature] <= threshold to the left child.
struct RegressionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;

        bool is_leaf() const { return feature < 0; }
        bool operator==(const Node&) const = default;
    };

    std::vector<Node> nodes;

    double predict(std::span<const double> x) const;
    int depth() const;
    bool operator==(const RegressionTree&) const = default;
};

struct TrainParams {
    int max_trees = 500;
    double learning_rate = 0.1;
    int max_depth = 6;
    int min_samples_leaf = 20;
    int n_bins = 64;
    int early_stopping_rounds = 25;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TrainParams&) const = default;
};

struct GbdtModel {
    double base_score = 0.0;
    std::vector<RegressionTree> trees;
    double learning_rate = 0.1;
    std::vector<std::string> feature_names;
    int best_iteration = 0;
    TrainParams params;

    bool operator==(const GbdtModel&) const = default;
};

// Per-stage diagnostics; index 0 is the base-score-only model.
struct FitTrace {
    std::vector<double> train_mse;
    std::vector<double> validation_rmse;
};

// Least-squares boosting with histogram splits and validation early stopping.
// Only the trees up to the best validation iteration are kept.
GbdtModel fit(const DesignMatrix& train, const DesignMatrix& validation, const TrainParams& params = {},
              FitTrace* trace = nullptr);

std::vector<double> predict(const GbdtModel& model, const DesignMatrix& rows);
double predict(const GbdtModel& model, std::span<const double> x);

struct RegressionMetrics {
    double mae = 0.0;
    double rmse = 0.0;
};

RegressionMetrics regression_metrics(std::span<const double> predicted, std::span<const double> observed);

// Quantile bin upper edges of one column. When the column has at most n_bins
// distinct values every distinct value becomes an edge.
std::vector<double> compute_bin_edges(std::span<const double> column, int n_bins);

void write_model(std::ostream& out, const GbdtModel& model);
GbdtModel read_model(std::istream& in);

} // namespace windnbm
