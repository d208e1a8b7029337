#pragma once

// Plain-text configuration grammar shared by scenario and experiment files:
//
//   # comment                      (also after a value: key = value  # note)
//   [section]                      sections may repeat, e.g. one [fault] per scenario
//   key = value
//
// Keys are unique within one section instance. Unknown sections or keys are
// rejected with the offending line number.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "windnbm/evaluation.hpp"
#include "windnbm/features.hpp"
#include "windnbm/gbdt.hpp"
#include "windnbm/nbm.hpp"
#include "windnbm/simulator.hpp"

namespace windnbm {

class ConfigFile {
public:
    struct Entry {
        std::string key;
        std::string value;
        std::size_t line = 0;
    };
    struct Section {
        std::string name;
        std::size_t line = 0;
        std::vector<Entry> entries;
    };

    static ConfigFile parse(std::string_view text, std::string source);
    static ConfigFile load(const std::filesystem::path& path);

    const std::vector<Section>& sections() const { return sections_; }
    const std::string& source() const { return source_; }
    // "source:line: message"
    [[noreturn]] void fail(std::size_t line, const std::string& message) const;

private:
    std::string source_;
    std::vector<Section> sections_;
};

sim::SimConfig parse_scenario(const ConfigFile& file);
std::string format_scenario(const sim::SimConfig& cfg);

enum class Pooling { Pooled, PerTurbine };

struct ExperimentConfig {
    // Either a simulator scenario or a pair of CSV files.
    std::filesystem::path scenario_path;
    std::optional<sim::SimConfig> scenario;
    std::filesystem::path scada_path;
    std::filesystem::path failures_path;
    std::int64_t resolution_s = kDefaultResolution;

    SplitSpec split;
    std::vector<int> lag_steps = kDefaultLagSteps;
    Pooling pooling = Pooling::Pooled;
    std::vector<ModelKind> models{ModelKind::CNBM, ModelKind::SNBM, ModelKind::ACNBM, ModelKind::ASNBM};
    ExclusionSettings exclusion;
    TrainParams gbdt;
    std::vector<double> quantiles;
    std::int64_t merge_gap_s = kDefaultMergeGap;
    int smoothing_steps = 1;
    EvalConfig eval;
    std::optional<std::uint64_t> seed;  // overrides the scenario seed
    std::filesystem::path output_dir = "out";
};

std::vector<double> default_quantiles();

// The desk-scale experiment: default scenario, yearly train/validation/test split.
ExperimentConfig default_experiment();

// Relative paths are resolved against base_dir.
ExperimentConfig parse_experiment(const ConfigFile& file, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);
// Fully resolved form, every key written. scenario_file names the scenario path to record.
std::string format_experiment(const ExperimentConfig& cfg, const std::string& scenario_file);

} // namespace windnbm
