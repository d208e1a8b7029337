#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "windnbm/scada_data.hpp"

namespace windnbm {

enum class FeatureKind { Causal, Simultaneity, AutoregressiveTarget };

enum class ModelKind { CNBM, SNBM, ACNBM, ASNBM };

std::string_view to_string(FeatureKind k);
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view name);

struct FeatureSpec {
    std::string channel;
    FeatureKind kind = FeatureKind::Causal;

    bool operator==(const FeatureSpec&) const = default;
};

// One of the four normal-behaviour feature configurations. An AutoregressiveTarget
// entry expands into one column per lag step.
struct FeatureConfig {
    ModelKind name = ModelKind::CNBM;
    std::string target;
    std::vector<FeatureSpec> features;
    std::vector<int> lag_steps;

    void validate() const;
    std::vector<std::string> column_names() const;
    bool operator==(const FeatureConfig&) const = default;
};

inline const std::vector<int> kDefaultLagSteps{1, 6};

// The five operating-regime channels the IMS bearing temperature depends on.
std::vector<std::string> causal_channels();

std::vector<FeatureConfig> standard_configs(const std::vector<int>& lag_steps = kDefaultLagSteps);
FeatureConfig standard_config(ModelKind kind, const std::vector<int>& lag_steps = kDefaultLagSteps);

// Complete-case design matrix. Rows are ordered by (turbine_id, time).
struct DesignMatrix {
    std::vector<std::string> feature_names;
    std::vector<double> values;  // row-major, rows() x cols()
    std::vector<double> target;
    std::vector<std::string> turbine_ids;
    std::vector<std::uint32_t> row_turbine;  // index into turbine_ids
    std::vector<Timestamp> row_time;

    std::size_t rows() const { return target.size(); }
    std::size_t cols() const { return feature_names.size(); }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols(), cols()}; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
};

// Product-moment correlation over pairs where both samples are present.
// Throws DataError when fewer than two pairs remain or either side is constant.
double pearson_correlation(std::span<const Sample> x, std::span<const Sample> y);
double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct ChannelCorrelation {
    std::string channel;
    double abs_r = 0.0;
};

// Pools every turbine. Descending |r|, ties by channel name; undefined channels are skipped.
std::vector<ChannelCorrelation> rank_channels_by_correlation(const FarmDataset& d, std::string_view target);

DesignMatrix build_design_matrix(const FarmDataset& d, const FeatureConfig& cfg);

} // namespace windnbm
