#include "windnbm/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "windnbm/errors.hpp"

namespace windnbm {

void EvalConfig::validate() const
{
    if (!(window_days > lead_days && lead_days >= 0)) throw ConfigError("evaluation needs window_days > lead_days >= 0");
    if (blackout_days < 0) throw ConfigError("blackout_days must be non-negative");
}

PredictionWindow prediction_window(const FailureRecord& f, const EvalConfig& cfg)
{
    return {f.turbine_id,
            {f.failure_time - days(cfg.window_days), f.failure_time - days(cfg.lead_days)},
            f.failure_time - days(cfg.lead_days),
            f.failure_time,
            f.failure_time + days(cfg.blackout_days)};
}

std::optional<double> ConfusionCounts::precision() const
{
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> ConfusionCounts::recall() const
{
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

Coverage coverage_of(const FarmDataset& d)
{
    Coverage c;
    for (const auto& t : d.turbines) {
        if (t.timestamps.empty()) continue;
        c[t.turbine_id] = {t.timestamps.front(), t.timestamps.back() + t.resolution_s};
    }
    return c;
}

namespace {

// Episodes are closed [start, end]; windows are half-open.
bool touches_window(const AlarmEpisode& e, const PredictionWindow& w)
{
    return e.start < w.window.end && e.end >= w.window.start;
}

bool touches_ignore(const AlarmEpisode& e, const PredictionWindow& w)
{
    const bool lead = e.start <= w.ignore_end && e.end >= w.ignore_start;
    const bool blackout = e.start <= w.blackout_end && e.end > w.ignore_end;
    return lead || blackout;
}

} // namespace

EpisodeLabel label_episode(const AlarmEpisode& e, const std::vector<PredictionWindow>& windows)
{
    bool ignored = false;
    for (const auto& w : windows) {
        if (w.turbine_id != e.turbine_id) continue;
        if (touches_window(e, w)) return EpisodeLabel::TruePositiveSupport;
        ignored = ignored || touches_ignore(e, w);
    }
    return ignored ? EpisodeLabel::Ignored : EpisodeLabel::FalsePositive;
}

ConfusionCounts label_episodes(const EpisodeMap& episodes, const std::vector<FailureRecord>& failures,
                               const EvalConfig& cfg, const Coverage* coverage)
{
    cfg.validate();
    std::vector<PredictionWindow> windows;
    for (const auto& f : failures) windows.push_back(prediction_window(f, cfg));

    ConfusionCounts counts;
    for (const auto& [turbine, list] : episodes) {
        if (coverage && !list.empty()) {
            auto it = coverage->find(turbine);
            if (it == coverage->end()) throw DataError("episodes for turbine " + turbine + " which has no data");
            for (const auto& e : list) {
                if (e.start < it->second.start || e.end >= it->second.end) {
                    throw DataError("episode of " + turbine + " at " + format_rfc3339(e.start) +
                                    " lies outside the turbine's data coverage");
                }
            }
        }
        for (const auto& e : list) {
            AlarmEpisode keyed = e;
            keyed.turbine_id = turbine;
            switch (label_episode(keyed, windows)) {
            case EpisodeLabel::FalsePositive: ++counts.fp; break;
            case EpisodeLabel::Ignored: ++counts.ignored; break;
            case EpisodeLabel::TruePositiveSupport: break;
            }
        }
    }
    for (const auto& w : windows) {
        bool detected = false;
        if (auto it = episodes.find(w.turbine_id); it != episodes.end()) {
            detected = std::any_of(it->second.begin(), it->second.end(),
                                   [&](const AlarmEpisode& e) { return touches_window(e, w); });
        }
        if (detected) ++counts.tp;
        else ++counts.fn;
    }
    return counts;
}

PRCurve pr_curve(const std::vector<SweepPoint>& sweep, const std::vector<FailureRecord>& failures,
                 const EvalConfig& cfg, const Coverage* coverage)
{
    std::vector<const SweepPoint*> ordered;
    for (const auto& p : sweep) ordered.push_back(&p);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const SweepPoint* a, const SweepPoint* b) { return a->threshold < b->threshold; });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i]->threshold == ordered[i - 1]->threshold) throw DataError("sweep thresholds must be distinct");
    }
    PRCurve curve;
    curve.points.resize(ordered.size());
    const auto n = static_cast<std::ptrdiff_t>(ordered.size());
    // label_episodes throws only on coverage errors; check those before going parallel.
    if (coverage) {
        for (const auto* p : ordered) label_episodes(p->episodes, failures, cfg, coverage);
    }
    cfg.validate();
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto* p = ordered[static_cast<std::size_t>(i)];
        const auto counts = label_episodes(p->episodes, failures, cfg);
        curve.points[static_cast<std::size_t>(i)] = {p->threshold, counts.precision(), counts.recall(), counts};
    }
    return curve;
}

double auprc(const PRCurve& curve)
{
    std::vector<std::pair<double, double>> pts;  // (recall, precision)
    for (const auto& p : curve.points) {
        if (p.precision && p.recall) pts.emplace_back(*p.recall, *p.precision);
    }
    if (pts.size() < 2) throw DataError("AUPRC needs at least two defined precision-recall points");
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> collapsed;
    for (const auto& [r, p] : pts) {
        if (!collapsed.empty() && collapsed.back().first == r) {
            collapsed.back().second = std::max(collapsed.back().second, p);
        } else {
            collapsed.emplace_back(r, p);
        }
    }
    double area = 0.0;
    for (std::size_t i = 1; i < collapsed.size(); ++i) {
        area += (collapsed[i].first - collapsed[i - 1].first) * 0.5 * (collapsed[i].second + collapsed[i - 1].second);
    }
    return area;
}

void write_pr_curve_csv(const std::filesystem::path& path, const PRCurve& curve)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "threshold,precision,recall\n";
    for (const auto& p : curve.points) {
        out << format_double(p.threshold) << ',';
        if (p.precision) out << format_double(*p.precision);
        out << ',';
        if (p.recall) out << format_double(*p.recall);
        out << '\n';
    }
}

void write_counts(std::ostream& out, const PRCurve& curve)
{
    for (const auto& p : curve.points) {
        out << "[threshold " << format_double(p.threshold) << "]\n";
        out << "tp = " << p.counts.tp << '\n';
        out << "fp = " << p.counts.fp << '\n';
        out << "fn = " << p.counts.fn << '\n';
        out << "ignored = " << p.counts.ignored << '\n';
        out << "precision = " << (p.precision ? format_double(*p.precision) : "undefined") << '\n';
        out << "recall = " << (p.recall ? format_double(*p.recall) : "undefined") << '\n';
    }
}

} // namespace windnbm
