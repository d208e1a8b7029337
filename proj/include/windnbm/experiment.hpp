#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "windnbm/config.hpp"
#include "windnbm/evaluation.hpp"
#include "windnbm/nbm.hpp"

namespace windnbm {

inline constexpr std::string_view kToolVersion = "windnbm 1.0.0";

// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3 };

struct ExperimentData {
    FarmDataset farm;
    std::vector<FailureRecord> failures;
    std::optional<std::uint64_t> seed;  // simulator seed actually used
};

// Simulates (applying the seed override) or loads the CSV pair.
ExperimentData load_experiment_data(const ExperimentConfig& cfg);

// Models for one configuration: one pooled model, or one per turbine.
struct TrainedConfig {
    ModelKind kind;
    std::vector<NbmModel> models;
    std::vector<std::string> scopes;  // empty string = all turbines

    std::vector<ResidualSeries> residuals(const FarmDataset& d) const;
};

TrainedConfig train_config(const ExperimentConfig& cfg, const ExperimentData& data, ModelKind kind);

struct DetectorOutcome {
    std::string name;
    std::vector<SweepPoint> sweep;
    PRCurve curve;
    std::optional<double> auprc;  // undefined with fewer than two defined PR points
};

struct ModelOutcome {
    ModelKind kind;
    RegressionReport metrics;
    std::vector<int> best_iterations;
    DetectorOutcome detection;
};

struct ExperimentResult {
    std::vector<ModelOutcome> models;
    DetectorOutcome baseline;
    std::vector<FailureRecord> test_failures;
    std::optional<std::uint64_t> seed;
    std::vector<TrainedConfig> trained;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentData& data);

const ModelOutcome& find_outcome(const ExperimentResult& r, ModelKind kind);

// CSV columns: model,train_mae,train_rmse,test_mae,test_rmse,trees
std::string format_metrics_csv(const ExperimentResult& r);
std::string format_report(const ExperimentConfig& cfg, const ExperimentResult& r);

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& r, const std::filesystem::path& dir);

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
};

// Each command reports errors on stderr and returns an ExitCode.
int cmd_simulate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                 std::optional<std::uint64_t> seed = std::nullopt);
int cmd_run_experiment(const std::filesystem::path& config, const Overrides& overrides = {});
int cmd_train(const std::filesystem::path& config, const Overrides& overrides = {});

struct DetectOptions {
    std::filesystem::path model;
    std::filesystem::path scada;
    std::filesystem::path failures;  // optional; healthy reference excludes their windows
    std::filesystem::path out;
    std::vector<double> quantiles;
    std::vector<double> thresholds;  // absolute thresholds in degC, used when non-empty
    bool baseline = false;           // threshold the raw target instead of residuals
    std::optional<Interval> interval;  // scored period; defaults to the model's test interval
    std::int64_t merge_gap_s = kDefaultMergeGap;
    int smoothing_steps = 1;
    int window_days = 60;
    std::int64_t resolution_s = kDefaultResolution;
};
int cmd_detect(const DetectOptions& opt);

struct EvaluateOptions {
    std::filesystem::path episodes;
    std::filesystem::path failures;
    std::filesystem::path scada;  // optional, enables the data-coverage check
    std::filesystem::path out_dir;
    EvalConfig eval;
    std::int64_t resolution_s = kDefaultResolution;
};
int cmd_evaluate(const EvaluateOptions& opt);

} // namespace windnbm
