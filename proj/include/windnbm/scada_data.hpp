#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "windnbm/time.hpp"

namespace windnbm {

namespace channels {
inline constexpr std::string_view kWindSpeed = "wind_speed";
inline constexpr std::string_view kActivePower = "active_power";
inline constexpr std::string_view kRotorSpeed = "rotor_speed";
inline constexpr std::string_view kPitchAngle = "pitch_angle";
inline constexpr std::string_view kAmbientTemp = "ambient_temp";
inline constexpr std::string_view kHssBearingTemp = "gearbox_hss_bearing_temp";
inline constexpr std::string_view kImsBearingTemp = "gearbox_ims_bearing_temp";
} // namespace channels

// Channel columns of the SCADA CSV, in file order.
inline constexpr std::array<std::string_view, 7> kScadaChannels = {
    channels::kWindSpeed,   channels::kActivePower,     channels::kRotorSpeed,     channels::kPitchAngle,
    channels::kAmbientTemp, channels::kHssBearingTemp, channels::kImsBearingTemp,
};

inline constexpr std::string_view kImsBearingComponent = "gearbox_ims_bearing";

using Sample = std::optional<double>;

struct Channel {
    std::string name;
    std::vector<Sample> values;
};

// One turbine's multichannel SCADA record. Timestamps are strictly increasing
// multiples of resolution_s; gaps are allowed, missing values are explicit.
struct TurbineSeries {
    std::string turbine_id;
    std::int64_t resolution_s = kDefaultResolution;
    std::vector<Timestamp> timestamps;
    std::vector<Channel> channels;

    std::size_t size() const { return timestamps.size(); }
    bool has_channel(std::string_view name) const;
    // Throws DataError for unknown channels.
    const std::vector<Sample>& channel(std::string_view name) const;
    std::vector<Sample>& channel(std::string_view name);
    std::vector<std::string> channel_names() const;

    // Keeps the rows for which keep(index) is true.
    template <class Pred>
    TurbineSeries filter_rows(Pred keep) const;

    // Throws DataError when an invariant is broken.
    void validate() const;
};

struct FarmDataset {
    std::vector<TurbineSeries> turbines;
    // Intersection of per-turbine channel sets, in kScadaChannels order where applicable.
    std::vector<std::string> channel_catalog;

    std::size_t total_samples() const;
    const TurbineSeries* find(std::string_view turbine_id) const;
    // First and one-past-last timestamp over all turbines (empty interval when no samples).
    Interval covered_period() const;
};

// Builds a dataset, computing the channel catalog. Turbines are ordered by id.
FarmDataset make_farm(std::vector<TurbineSeries> turbines);

struct FailureRecord {
    std::string turbine_id;
    Timestamp failure_time;
    std::string component;

    bool operator==(const FailureRecord&) const = default;
};

struct DatasetSplit {
    FarmDataset train;
    FarmDataset validation;
    FarmDataset test;
    std::array<Interval, 3> boundaries;
};

FarmDataset load_scada_csv(const std::filesystem::path& path, std::int64_t resolution_s = kDefaultResolution);
void write_scada_csv(const std::filesystem::path& path, const FarmDataset& farm);

std::vector<FailureRecord> load_failures_csv(const std::filesystem::path& path);
void write_failures_csv(const std::filesystem::path& path, const std::vector<FailureRecord>& failures);

// Failures whose time lies outside the data (or whose turbine is unknown); one message each.
std::vector<std::string> check_failure_coverage(const FarmDataset& farm, const std::vector<FailureRecord>& failures);

DatasetSplit split_by_period(const FarmDataset& d, const Interval& train, const Interval& validation,
                             const Interval& test);

struct ExclusionSettings {
    int before_days = 60;
    int after_days = 30;
};

// Drops samples of the failed turbine inside [failure - before, failure + after].
FarmDataset exclude_fault_periods(const FarmDataset& d, const std::vector<FailureRecord>& failures,
                                  const ExclusionSettings& settings = {});

// 64-bit FNV-1a over ids, timestamps and sample bits.
std::uint64_t fingerprint(const FarmDataset& d);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

template <class Pred>
TurbineSeries TurbineSeries::filter_rows(Pred keep) const
{
    TurbineSeries out;
    out.turbine_id = turbine_id;
    out.resolution_s = resolution_s;
    out.channels.reserve(channels.size());
    for (const auto& c : channels) out.channels.push_back({c.name, {}});
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        if (!keep(i)) continue;
        out.timestamps.push_back(timestamps[i]);
        for (std::size_t c = 0; c < channels.size(); ++c) out.channels[c].values.push_back(channels[c].values[i]);
    }
    return out;
}

} // namespace windnbm
