#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "windnbm/nbm.hpp"
#include "windnbm/scada_data.hpp"

namespace windnbm {

struct ThresholdRule {
    enum class Kind { Absolute, Quantile };
    enum class Reference { HealthyResiduals, RawTarget };

    Kind kind = Kind::Quantile;
    double value = 0.99;  // degC for Absolute, q in (0, 1) for Quantile
    Reference reference = Reference::HealthyResiduals;

    void validate() const;
    // Absolute value, or the empirical quantile of the reference sample.
    double resolve(std::span<const double> reference_sample) const;
};

struct AlarmEpisode {
    std::string turbine_id;
    Timestamp start;
    Timestamp end;

    bool operator==(const AlarmEpisode&) const = default;
};

using EpisodeMap = std::map<std::string, std::vector<AlarmEpisode>>;

struct SweepPoint {
    double threshold = 0.0;
    EpisodeMap episodes;  // every input turbine has an entry, possibly empty
};

inline constexpr std::int64_t kDefaultMergeGap = days(3);

// Lower nearest-rank empirical quantile: the ceil(q n)-th smallest value.
double empirical_quantile(std::span<const double> sample, double q);

// Timestamps where the residual strictly exceeds the threshold.
std::vector<Timestamp> threshold_alarms(const ResidualSeries& r, double threshold);

// Timestamps where the raw observed channel strictly exceeds the threshold.
std::vector<Timestamp> baseline_alarms(const TurbineSeries& series, std::string_view channel, double threshold);

// Consecutive alarms at most merge_gap seconds apart share an episode.
std::vector<AlarmEpisode> group_episodes(std::vector<Timestamp> alarms, std::int64_t merge_gap,
                                         const std::string& turbine_id = {});

// The raw target channel as a score series, for the temperature baseline.
std::vector<ResidualSeries> raw_scores(const FarmDataset& d, std::string_view channel);

// Trailing moving average over the last `window` samples of each series (1 = identity).
std::vector<ResidualSeries> smooth_scores(const std::vector<ResidualSeries>& r, int window);

std::vector<SweepPoint> threshold_sweep(const std::vector<ResidualSeries>& scores, std::span<const double> reference,
                                        std::span<const double> quantiles, std::int64_t merge_gap = kDefaultMergeGap);

std::vector<SweepPoint> absolute_sweep(const std::vector<ResidualSeries>& scores, std::span<const double> thresholds,
                                       std::int64_t merge_gap = kDefaultMergeGap);

// Episode CSV: turbine_id,start,end,threshold
void write_episodes_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& sweep);
std::vector<SweepPoint> load_episodes_csv(const std::filesystem::path& path);

} // namespace windnbm
