#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "windnbm/detection.hpp"
#include "windnbm/scada_data.hpp"

namespace windnbm {

struct EvalConfig {
    int window_days = 60;
    int lead_days = 15;
    // Episodes that only touch (F, F + blackout] are ignored like the lead zone.
    int blackout_days = 30;

    void validate() const;
};

// [F - window, F - lead) scores TPs; [F - lead, F] is the ignore zone.
struct PredictionWindow {
    std::string turbine_id;
    Interval window;
    Timestamp ignore_start;
    Timestamp ignore_end;
    Timestamp blackout_end;
};

PredictionWindow prediction_window(const FailureRecord& f, const EvalConfig& cfg);

enum class EpisodeLabel { TruePositiveSupport, FalsePositive, Ignored };

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t ignored = 0;  // episodes scored as neither TP support nor FP

    std::optional<double> precision() const;
    std::optional<double> recall() const;
    bool operator==(const ConfusionCounts&) const = default;
};

// Per-turbine covered period, used to reject episodes on turbines without data.
using Coverage = std::map<std::string, Interval>;
Coverage coverage_of(const FarmDataset& d);

EpisodeLabel label_episode(const AlarmEpisode& e, const std::vector<PredictionWindow>& windows);

ConfusionCounts label_episodes(const EpisodeMap& episodes, const std::vector<FailureRecord>& failures,
                               const EvalConfig& cfg = {}, const Coverage* coverage = nullptr);

struct PRPoint {
    double threshold = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    ConfusionCounts counts;
};

struct PRCurve {
    std::vector<PRPoint> points;  // ascending threshold
};

PRCurve pr_curve(const std::vector<SweepPoint>& sweep, const std::vector<FailureRecord>& failures,
                 const EvalConfig& cfg = {}, const Coverage* coverage = nullptr);

// Trapezoidal area over recall of the defined points; equal recalls keep the best precision.
double auprc(const PRCurve& curve);

void write_pr_curve_csv(const std::filesystem::path& path, const PRCurve& curve);
void write_counts(std::ostream& out, const PRCurve& curve);

} // namespace windnbm
