#include "windnbm/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "windnbm/errors.hpp"

namespace windnbm {

void ThresholdRule::validate() const
{
    if (kind == Kind::Quantile && !(value > 0.0 && value < 1.0)) {
        throw ConfigError("quantile threshold must lie strictly between 0 and 1");
    }
    if (!std::isfinite(value)) throw ConfigError("threshold must be finite");
}

double ThresholdRule::resolve(std::span<const double> reference_sample) const
{
    validate();
    if (kind == Kind::Absolute) return value;
    return empirical_quantile(reference_sample, value);
}

double empirical_quantile(std::span<const double> sample, double q)
{
    if (sample.empty()) throw DataError("quantile of an empty sample");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile must lie strictly between 0 and 1");
    std::vector<double> sorted(sample.begin(), sample.end());
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    return sorted[rank - 1];
}

std::vector<Timestamp> threshold_alarms(const ResidualSeries& r, double threshold)
{
    std::vector<Timestamp> alarms;
    for (std::size_t i = 0; i < r.residuals.size(); ++i) {
        if (r.residuals[i] > threshold) alarms.push_back(r.timestamps[i]);
    }
    return alarms;
}

std::vector<Timestamp> baseline_alarms(const TurbineSeries& series, std::string_view channel, double threshold)
{
    const auto& col = series.channel(channel);
    std::vector<Timestamp> alarms;
    for (std::size_t i = 0; i < col.size(); ++i) {
        if (col[i] && *col[i] > threshold) alarms.push_back(series.timestamps[i]);
    }
    return alarms;
}

std::vector<AlarmEpisode> group_episodes(std::vector<Timestamp> alarms, std::int64_t merge_gap,
                                         const std::string& turbine_id)
{
    if (merge_gap < 0) throw ConfigError("merge gap must be non-negative");
    std::sort(alarms.begin(), alarms.end());
    std::vector<AlarmEpisode> episodes;
    for (const auto t : alarms) {
        if (!episodes.empty() && t - episodes.back().end <= merge_gap) {
            episodes.back().end = t;
        } else {
            episodes.push_back({turbine_id, t, t});
        }
    }
    return episodes;
}

std::vector<ResidualSeries> raw_scores(const FarmDataset& d, std::string_view channel)
{
    std::vector<ResidualSeries> out;
    for (const auto& t : d.turbines) {
        ResidualSeries s{t.turbine_id, {}, {}};
        const auto& col = t.channel(channel);
        for (std::size_t i = 0; i < col.size(); ++i) {
            if (!col[i]) continue;
            s.timestamps.push_back(t.timestamps[i]);
            s.residuals.push_back(*col[i]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ResidualSeries> smooth_scores(const std::vector<ResidualSeries>& r, int window)
{
    if (window < 1) throw ConfigError("smoothing window must be >= 1");
    if (window == 1) return r;
    std::vector<ResidualSeries> out;
    for (const auto& s : r) {
        ResidualSeries o{s.turbine_id, s.timestamps, std::vector<double>(s.residuals.size())};
        double acc = 0.0;
        for (std::size_t i = 0; i < s.residuals.size(); ++i) {
            acc += s.residuals[i];
            if (i >= static_cast<std::size_t>(window)) acc -= s.residuals[i - static_cast<std::size_t>(window)];
            o.residuals[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
        }
        out.push_back(std::move(o));
    }
    return out;
}

std::vector<SweepPoint> absolute_sweep(const std::vector<ResidualSeries>& scores, std::span<const double> thresholds,
                                       std::int64_t merge_gap)
{
    std::vector<SweepPoint> sweep(thresholds.size());
    const auto n = static_cast<std::ptrdiff_t>(thresholds.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        auto& point = sweep[static_cast<std::size_t>(k)];
        point.threshold = thresholds[static_cast<std::size_t>(k)];
        for (const auto& s : scores) {
            point.episodes[s.turbine_id] = group_episodes(threshold_alarms(s, point.threshold), merge_gap, s.turbine_id);
        }
    }
    std::stable_sort(sweep.begin(), sweep.end(),
                     [](const SweepPoint& a, const SweepPoint& b) { return a.threshold < b.threshold; });
    return sweep;
}

std::vector<SweepPoint> threshold_sweep(const std::vector<ResidualSeries>& scores, std::span<const double> reference,
                                        std::span<const double> quantiles, std::int64_t merge_gap)
{
    if (reference.empty()) throw DataError("threshold sweep needs a non-empty reference sample");
    std::vector<double> thresholds;
    for (double q : quantiles) {
        const double thr = empirical_quantile(reference, q);
        // Neighbouring quantiles can collapse onto one value; keep one point per threshold.
        if (std::find(thresholds.begin(), thresholds.end(), thr) == thresholds.end()) thresholds.push_back(thr);
    }
    return absolute_sweep(scores, thresholds, merge_gap);
}

void write_episodes_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& sweep)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "turbine_id,start,end,threshold\n";
    for (const auto& p : sweep) {
        for (const auto& [id, episodes] : p.episodes) {
            for (const auto& e : episodes) {
                out << id << ',' << format_rfc3339(e.start) << ',' << format_rfc3339(e.end) << ','
                    << format_double(p.threshold) << '\n';
            }
        }
    }
}

std::vector<SweepPoint> load_episodes_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "turbine_id,start,end,threshold") {
        throw DataError(path.string() + ":1: header must be 'turbine_id,start,end,threshold'");
    }
    std::map<double, EpisodeMap> by_threshold;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 4) throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
        try {
            AlarmEpisode e{f[0], parse_rfc3339(f[1]), parse_rfc3339(f[2])};
            if (e.end < e.start) throw DataError("episode ends before it starts");
            by_threshold[parse_double(f[3])][f[0]].push_back(e);
        } catch (const DataError& err) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + err.what());
        }
    }
    std::vector<SweepPoint> sweep;
    for (auto& [thr, episodes] : by_threshold) {
        for (auto& [id, list] : episodes) {
            std::sort(list.begin(), list.end(), [](const AlarmEpisode& a, const AlarmEpisode& b) { return a.start < b.start; });
        }
        sweep.push_back({thr, std::move(episodes)});
    }
    return sweep;
}

} // namespace windnbm
