#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "windnbm/features.hpp"
#include "windnbm/gbdt.hpp"
#include "windnbm/scada_data.hpp"

namespace windnbm {

struct SplitSpec {
    Interval train;
    Interval validation;
    Interval test;

    bool operator==(const SplitSpec&) const = default;
};

struct TrainingMetadata {
    SplitSpec split;
    ExclusionSettings exclusion;
    TrainParams params;
    std::uint64_t data_fingerprint = 0;
    std::size_t train_rows = 0;
    std::size_t validation_rows = 0;
};

struct NbmModel {
    FeatureConfig config;
    GbdtModel model;
    TrainingMetadata metadata;
};

// Observed minus predicted target, at rows with complete inputs.
struct ResidualSeries {
    std::string turbine_id;
    std::vector<Timestamp> timestamps;
    std::vector<double> residuals;
};

// split -> exclude fault periods from train and validation -> design matrices -> fit.
NbmModel train_nbm(const FarmDataset& d, const std::vector<FailureRecord>& failures, const FeatureConfig& cfg,
                   const SplitSpec& split, const TrainParams& params = {}, const ExclusionSettings& exclusion = {});

// One series per turbine of d, in dataset order; turbines without complete rows get empty series.
std::vector<ResidualSeries> compute_residuals(const NbmModel& m, const FarmDataset& d);

// Drops residuals inside any failure's pre-failure window [F - window_days, F]
// and inside the exclusion envelope [F - before, F + after].
std::vector<ResidualSeries> healthy_residuals(const std::vector<ResidualSeries>& r,
                                              const std::vector<FailureRecord>& failures, int window_days,
                                              const ExclusionSettings& exclusion);

// MAE/RMSE of pooled residuals (prediction error is the negated residual).
RegressionMetrics residual_metrics(const std::vector<ResidualSeries>& r);

struct RegressionReport {
    RegressionMetrics train;
    RegressionMetrics test;
};

RegressionReport evaluate_regression(const NbmModel& m, const DatasetSplit& split,
                                     const std::vector<FailureRecord>& failures, int window_days = 60);

void write_nbm_model(std::ostream& out, const NbmModel& m);
NbmModel read_nbm_model(std::istream& in);

} // namespace windnbm
