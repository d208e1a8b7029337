#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "support.hpp"
#include "windnbm/detection.hpp"
#include "windnbm/errors.hpp"

using namespace windnbm;

namespace {

const Timestamp kT0 = parse_rfc3339("2012-01-01T00:00:00Z");

ResidualSeries series(const std::string& id, std::vector<double> values)
{
    ResidualSeries r{id, {}, std::move(values)};
    for (std::size_t i = 0; i < r.residuals.size(); ++i) r.timestamps.push_back(kT0 + static_cast<std::int64_t>(i) * 600);
    return r;
}

// Slowly wandering AR(1) scores with occasional bursts.
ResidualSeries wandering(const std::string& id, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(n);
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        x = 0.98 * x + 0.2 * g(rng);
        v[i] = x + (i % 5000 > 4900 ? 2.0 : 0.0);
    }
    return series(id, v);
}

// Drops empty turbine entries, as the episode file does not record them.
EpisodeMap non_empty(const EpisodeMap& m)
{
    EpisodeMap out;
    for (const auto& [id, list] : m) {
        if (!list.empty()) out[id] = list;
    }
    return out;
}

} // namespace

TEST(Quantile, LowerNearestRank)
{
    const std::vector<double> v{3.0, 1.0, 2.0};
    EXPECT_EQ(empirical_quantile(v, 0.5), 2.0);
    EXPECT_EQ(empirical_quantile(v, 0.34), 2.0);
    EXPECT_EQ(empirical_quantile(v, 0.33), 1.0);
    EXPECT_EQ(empirical_quantile(v, 0.999), 3.0);
    EXPECT_THROW(empirical_quantile(std::vector<double>{}, 0.5), DataError);
    EXPECT_THROW(empirical_quantile(v, 0.0), ConfigError);
    EXPECT_THROW(empirical_quantile(v, 1.0), ConfigError);
}

TEST(ThresholdRule, ValidateAndResolve)
{
    ThresholdRule q{ThresholdRule::Kind::Quantile, 0.5, ThresholdRule::Reference::HealthyResiduals};
    const std::vector<double> ref{1.0, 2.0, 3.0};
    EXPECT_EQ(q.resolve(ref), 2.0);
    ThresholdRule a{ThresholdRule::Kind::Absolute, 4.5, ThresholdRule::Reference::RawTarget};
    EXPECT_EQ(a.resolve(ref), 4.5);
    q.value = 1.5;
    EXPECT_THROW(q.validate(), ConfigError);
    a.value = std::numeric_limits<double>::infinity();
    EXPECT_THROW(a.validate(), ConfigError);
}

TEST(ThresholdAlarms, StrictlyAbove)
{
    const auto r = series("T01", {0.1, 5.0, 0.2});
    const auto alarms = threshold_alarms(r, 1.0);
    ASSERT_EQ(alarms.size(), 1u);
    EXPECT_EQ(alarms[0], r.timestamps[1]);
    EXPECT_TRUE(threshold_alarms(r, 5.0).empty());
}

TEST(ThresholdAlarms, PercentileCountMatchesScan)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(1000);
    for (auto& x : v) x = g(rng);
    const auto r = series("T01", v);
    const double thr = empirical_quantile(v, 0.99);
    std::vector<Timestamp> expected;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] > thr) expected.push_back(r.timestamps[i]);
    }
    EXPECT_EQ(threshold_alarms(r, thr), expected);
    EXPECT_EQ(expected.size(), 10u);
}

TEST(BaselineAlarms, ThresholdExtremes)
{
    auto t = testing_support::random_series("T01", kT0, 101, 4);
    t.channel(channels::kImsBearingTemp)[7] = Sample{};
    std::vector<double> present;
    for (const auto& s : t.channel(channels::kImsBearingTemp)) {
        if (s) present.push_back(*s);
    }
    const double hi = *std::max_element(present.begin(), present.end());
    const double lo = *std::min_element(present.begin(), present.end());
    EXPECT_TRUE(baseline_alarms(t, channels::kImsBearingTemp, hi).empty());
    EXPECT_EQ(baseline_alarms(t, channels::kImsBearingTemp, lo - 1.0).size(), 100u);
    const double median = empirical_quantile(present, 0.5);
    EXPECT_EQ(baseline_alarms(t, channels::kImsBearingTemp, median).size(), 50u);
    EXPECT_THROW(baseline_alarms(t, "oil_temp", 0.0), DataError);
}

TEST(GroupEpisodes, Examples)
{
    const auto one = group_episodes({kT0 + 1200, kT0, kT0 + 600}, days(1), "T01");
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0], (AlarmEpisode{"T01", kT0, kT0 + 1200}));

    const auto two = group_episodes({kT0, kT0 + days(5)}, days(3), "T01");
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two[0].start, two[0].end);
    EXPECT_EQ(two[1].start, kT0 + days(5));

    EXPECT_TRUE(group_episodes({}, days(3)).empty());
    EXPECT_THROW(group_episodes({kT0}, -1), ConfigError);
    // A gap equal to the merge gap still merges.
    EXPECT_EQ(group_episodes({kT0, kT0 + days(3)}, days(3)).size(), 1u);
}

TEST(GroupEpisodes, CoverAndSeparationProperties)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> count(0, 60), step(0, 2000), gap_h(0, 200);
        std::vector<Timestamp> alarms;
        for (int i = count(rng); i > 0; --i) alarms.push_back(kT0 + static_cast<std::int64_t>(step(rng)) * 600);
        const std::int64_t gap = static_cast<std::int64_t>(gap_h(rng)) * 3600;
        const auto eps = group_episodes(alarms, gap, "T01");

        for (auto a : alarms) {
            const auto n = std::count_if(eps.begin(), eps.end(), [&](const AlarmEpisode& e) { return e.start <= a && a <= e.end; });
            EXPECT_EQ(n, 1);
        }
        for (const auto& e : eps) {
            EXPECT_NE(std::find(alarms.begin(), alarms.end(), e.start), alarms.end());
            EXPECT_NE(std::find(alarms.begin(), alarms.end(), e.end), alarms.end());
        }
        // Idempotence: neighbouring episodes are more than one gap apart, so regrouping merges nothing.
        for (std::size_t i = 1; i < eps.size(); ++i) EXPECT_GT(eps[i].start - eps[i - 1].end, gap);
        // Input order does not matter.
        std::shuffle(alarms.begin(), alarms.end(), rng);
        EXPECT_EQ(group_episodes(alarms, gap, "T01"), eps);
    }
}

TEST(Scores, RawScoresSkipMissing)
{
    auto t = testing_support::random_series("T01", kT0, 10, 6);
    t.channel(channels::kImsBearingTemp)[3] = Sample{};
    const auto r = raw_scores(make_farm({t}), channels::kImsBearingTemp);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].residuals.size(), 9u);
    EXPECT_EQ(r[0].residuals[3], *t.channel(channels::kImsBearingTemp)[4]);
}

TEST(Scores, TrailingMean)
{
    const auto r = series("T01", {1.0, 2.0, 3.0, 4.0, 10.0});
    EXPECT_EQ(smooth_scores({r}, 1)[0].residuals, r.residuals);
    const auto s = smooth_scores({r}, 3)[0];
    const std::vector<double> expected{1.0, 1.5, 2.0, 3.0, 17.0 / 3.0};
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(s.residuals[i], expected[i], 1e-12);
    EXPECT_EQ(s.timestamps, r.timestamps);
    EXPECT_THROW(smooth_scores({r}, 0), ConfigError);
}

TEST(Sweep, QuantileThresholdsDeduplicated)
{
    const std::vector<double> ref{1.0, 2.0, 3.0};
    const std::vector<double> qs{0.5, 0.6, 0.9};
    const auto sweep = threshold_sweep({series("T01", {0.0, 2.5, 0.0})}, ref, qs);
    ASSERT_EQ(sweep.size(), 2u);
    EXPECT_EQ(sweep[0].threshold, 2.0);
    EXPECT_EQ(sweep[1].threshold, 3.0);
    EXPECT_EQ(sweep[0].episodes.at("T01").size(), 1u);
    EXPECT_TRUE(sweep[1].episodes.at("T01").empty());
    EXPECT_THROW(threshold_sweep({}, std::vector<double>{}, qs), DataError);
}

TEST(Sweep, MatchesSingleThresholdRunsAndNests)
{
    const auto sim = sim::simulate_farm(testing_support::small_scenario());
    const auto scores = raw_scores(sim.farm, channels::kImsBearingTemp);
    std::vector<double> ref;
    for (const auto& s : scores) ref.insert(ref.end(), s.residuals.begin(), s.residuals.end());
    std::vector<double> qs;
    for (int k = 0; k < 20; ++k) qs.push_back(0.5 + 0.0249 * k);  // 0.5 .. 0.973
    const auto sweep = threshold_sweep(scores, ref, qs);
    ASSERT_EQ(sweep.size(), 20u);

    for (std::size_t k = 0; k < sweep.size(); ++k) {
        const auto& p = sweep[k];
        EXPECT_EQ(p.threshold, empirical_quantile(ref, qs[k]));
        for (const auto& s : scores) {
            EXPECT_EQ(p.episodes.at(s.turbine_id), group_episodes(threshold_alarms(s, p.threshold), kDefaultMergeGap, s.turbine_id));
        }
        if (k == 0) continue;
        EXPECT_GT(p.threshold, sweep[k - 1].threshold);
        // Every alarm at a higher threshold lies inside an episode of the lower one.
        for (const auto& s : scores) {
            const auto& lower = sweep[k - 1].episodes.at(s.turbine_id);
            for (auto a : threshold_alarms(s, p.threshold)) {
                EXPECT_TRUE(std::any_of(lower.begin(), lower.end(), [&](const AlarmEpisode& e) { return e.start <= a && a <= e.end; }));
            }
        }
    }
}

TEST(EpisodesCsv, RoundTrip)
{
    const std::vector<ResidualSeries> scores{wandering("T01", 5000, 3), wandering("T02", 5000, 4)};
    const std::vector<double> thresholds{0.5, 1.0, 1.5, 100.0};
    const auto sweep = absolute_sweep(scores, thresholds);
    const auto dir = testing_support::scratch_dir("episodes_csv");
    write_episodes_csv(dir / "e.csv", sweep);
    const auto back = load_episodes_csv(dir / "e.csv");

    std::vector<SweepPoint> kept;
    for (const auto& p : sweep) {
        if (!non_empty(p.episodes).empty()) kept.push_back(p);
    }
    ASSERT_EQ(back.size(), kept.size());
    EXPECT_LT(back.size(), sweep.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        EXPECT_EQ(back[k].threshold, kept[k].threshold);
        EXPECT_EQ(back[k].episodes, non_empty(kept[k].episodes));
    }
}

TEST(EpisodesCsv, BadInput)
{
    const auto dir = testing_support::scratch_dir("episodes_bad");
    testing_support::write_file(dir / "h.csv", "turbine,start,end\n");
    EXPECT_THROW(load_episodes_csv(dir / "h.csv"), DataError);
    testing_support::write_file(dir / "r.csv",
                                "turbine_id,start,end,threshold\nT01,2012-01-02T00:00:00Z,2012-01-01T00:00:00Z,1\n");
    try {
        load_episodes_csv(dir / "r.csv");
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
    }
    EXPECT_THROW(load_episodes_csv(dir / "missing.csv"), DataError);
}
