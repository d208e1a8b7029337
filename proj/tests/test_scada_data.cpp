#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <random>
#include <tuple>

#include "support.hpp"
#include "windnbm/errors.hpp"
#include "windnbm/scada_data.hpp"

using namespace windnbm;
using testing_support::kHeader;
using testing_support::random_series;
using testing_support::scratch_dir;
using testing_support::write_file;

namespace {

Timestamp ts(const char* s) { return parse_rfc3339(s); }

std::string row(const std::string& time, const std::string& id, double v = 1.0)
{
    std::string r = time + "," + id;
    for (int c = 0; c < 7; ++c) r += "," + format_double(v + c);
    return r + "\n";
}

// Three years of gap-free 10-minute rows for each turbine id.
FarmDataset three_year_farm(int n_turbines)
{
    std::vector<TurbineSeries> ts_list;
    const auto start = ts("2010-01-01T00:00:00Z");
    const std::size_t n = static_cast<std::size_t>((ts("2013-01-01T00:00:00Z") - start) / 600);
    for (int i = 0; i < n_turbines; ++i) {
        ts_list.push_back(random_series("T0" + std::to_string(i + 1), start, n, 7 + static_cast<std::uint64_t>(i)));
    }
    return make_farm(std::move(ts_list));
}

} // namespace

TEST(Time, Rfc3339RoundTrip)
{
    const auto t = ts("2012-01-01T00:10:00Z");
    EXPECT_EQ(t.seconds, 1325376600);
    EXPECT_EQ(format_rfc3339(t), "2012-01-01T00:10:00Z");
    EXPECT_EQ(format_rfc3339(ts("2012-02-29T23:59:59Z")), "2012-02-29T23:59:59Z");
}

TEST(Time, RejectsMalformed)
{
    EXPECT_THROW(parse_rfc3339("2012-01-01 00:00:00"), DataError);
    EXPECT_THROW(parse_rfc3339("2012-13-01T00:00:00Z"), DataError);
    EXPECT_THROW(parse_rfc3339("2011-02-29T00:00:00Z"), DataError);
    EXPECT_THROW(parse_rfc3339(""), DataError);
    EXPECT_THROW(parse_interval("2012-01-01T00:00:00Z"), DataError);
    EXPECT_THROW(parse_interval("2012-01-02T00:00:00Z/2012-01-01T00:00:00Z"), DataError);
}

TEST(Time, IntervalIsHalfOpen)
{
    const auto iv = parse_interval("2012-01-01T00:00:00Z/2012-01-02T00:00:00Z");
    EXPECT_TRUE(iv.contains(iv.start));
    EXPECT_FALSE(iv.contains(iv.end));
    EXPECT_EQ(iv.length(), kDay);
    EXPECT_EQ(format_interval(iv), "2012-01-01T00:00:00Z/2012-01-02T00:00:00Z");
}

TEST(LoadScada, ThreeRowsOneTurbine)
{
    const auto dir = scratch_dir("three_rows");
    write_file(dir / "s.csv", kHeader + row("2012-01-01T00:00:00Z", "T01") + row("2012-01-01T00:10:00Z", "T01") +
                                  row("2012-01-01T00:20:00Z", "T01"));
    const auto farm = load_scada_csv(dir / "s.csv");
    ASSERT_EQ(farm.turbines.size(), 1u);
    EXPECT_EQ(farm.turbines[0].turbine_id, "T01");
    EXPECT_EQ(farm.turbines[0].size(), 3u);
    EXPECT_EQ(farm.channel_catalog.size(), 7u);
}

TEST(LoadScada, DuplicateTimestampNamesRow)
{
    const auto dir = scratch_dir("dup");
    write_file(dir / "s.csv", kHeader + row("2012-01-01T00:00:00Z", "T01") + row("2012-01-01T00:00:00Z", "T01"));
    try {
        load_scada_csv(dir / "s.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos) << e.what();
    }
}

TEST(LoadScada, InterleavedRowsAreSortedPerTurbine)
{
    std::vector<std::pair<std::string, std::string>> raw;  // (turbine, time)
    std::mt19937_64 rng(3);
    for (int i = 0; i < 40; ++i) {
        raw.emplace_back(i % 2 ? "T02" : "T01", format_rfc3339(ts("2012-01-01T00:00:00Z") + (i / 2) * 600));
    }
    std::shuffle(raw.begin(), raw.end(), rng);
    std::string text = kHeader;
    for (const auto& [id, time] : raw) text += row(time, id);
    const auto dir = scratch_dir("interleaved");
    write_file(dir / "s.csv", text);

    const auto farm = load_scada_csv(dir / "s.csv");
    ASSERT_EQ(farm.turbines.size(), 2u);
    for (const auto& t : farm.turbines) {
        std::vector<std::string> expected;
        for (const auto& [id, time] : raw) {
            if (id == t.turbine_id) expected.push_back(time);
        }
        std::sort(expected.begin(), expected.end());
        std::vector<std::string> got;
        for (auto x : t.timestamps) got.push_back(format_rfc3339(x));
        EXPECT_EQ(got, expected);
    }
}

TEST(LoadScada, RejectsMisalignedTimestamp)
{
    const auto dir = scratch_dir("misaligned");
    write_file(dir / "s.csv", kHeader + row("2012-01-01T00:05:00Z", "T01"));
    EXPECT_THROW(load_scada_csv(dir / "s.csv"), DataError);
}

TEST(LoadScada, UnknownColumnListsSchema)
{
    const auto dir = scratch_dir("unknown_col");
    std::string header = kHeader;
    header.replace(header.find("pitch_angle"), 11, "yaw_angle");
    write_file(dir / "s.csv", header + row("2012-01-01T00:00:00Z", "T01"));
    try {
        load_scada_csv(dir / "s.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("yaw_angle"), std::string::npos) << msg;
        EXPECT_NE(msg.find("gearbox_ims_bearing_temp"), std::string::npos) << msg;
    }
}

TEST(LoadScada, EmptyCellsAreMissing)
{
    const auto dir = scratch_dir("empty_cells");
    write_file(dir / "s.csv", kHeader + "2012-01-01T00:00:00Z,T01,5,,1,2,3,4,\n");
    const auto farm = load_scada_csv(dir / "s.csv");
    const auto& t = farm.turbines[0];
    EXPECT_FALSE(t.channel(channels::kActivePower)[0].has_value());
    EXPECT_FALSE(t.channel(channels::kImsBearingTemp)[0].has_value());
    EXPECT_EQ(*t.channel(channels::kWindSpeed)[0], 5.0);
    EXPECT_EQ(t.size(), 1u);
}

TEST(LoadScada, RejectsBadNumberWithLine)
{
    const auto dir = scratch_dir("bad_number");
    write_file(dir / "s.csv", kHeader + row("2012-01-01T00:00:00Z", "T01") + "2012-01-01T00:10:00Z,T01,x,1,1,1,1,1,1\n");
    try {
        load_scada_csv(dir / "s.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
}

TEST(ScadaCsv, RoundTripIsBitExact)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    auto a = random_series("T01", ts("2012-01-01T00:00:00Z"), 300, 1);
    auto b = random_series("T02", ts("2012-01-03T00:00:00Z"), 200, 2);
    for (auto* s : {&a, &b}) {
        for (auto& c : s->channels) {
            for (auto& v : c.values) v = (rng() % 17 == 0) ? Sample{} : Sample{u(rng) * 1e-3 * static_cast<double>(rng() % 1000)};
        }
    }
    // a gap in the second turbine
    b = b.filter_rows([](std::size_t i) { return i < 50 || i > 60; });
    const auto farm = make_farm({a, b});

    const auto dir = scratch_dir("roundtrip");
    write_scada_csv(dir / "a.csv", farm);
    const auto back = load_scada_csv(dir / "a.csv");
    ASSERT_EQ(back.turbines.size(), 2u);
    for (std::size_t t = 0; t < 2; ++t) {
        const auto& x = farm.turbines[t];
        const auto& y = back.turbines[t];
        ASSERT_EQ(x.timestamps, y.timestamps);
        for (auto name : kScadaChannels) {
            const auto& cx = x.channel(name);
            const auto& cy = y.channel(name);
            ASSERT_EQ(cx.size(), cy.size());
            for (std::size_t i = 0; i < cx.size(); ++i) {
                ASSERT_EQ(cx[i].has_value(), cy[i].has_value());
                if (cx[i]) ASSERT_EQ(std::bit_cast<std::uint64_t>(*cx[i]), std::bit_cast<std::uint64_t>(*cy[i]));
            }
        }
    }
    EXPECT_EQ(fingerprint(farm), fingerprint(back));
    write_scada_csv(dir / "b.csv", back);
    EXPECT_EQ(testing_support::read_file(dir / "a.csv"), testing_support::read_file(dir / "b.csv"));
}

TEST(ScadaCsv, FormatDoubleIsShortestRoundTrip)
{
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2000), "2000");
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::bit_cast<double>((rng() & 0x3fffffffffffffffULL) | 0x3000000000000000ULL);
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
}

TEST(Fingerprint, SensitiveToOneSample)
{
    auto a = random_series("T01", ts("2012-01-01T00:00:00Z"), 100, 1);
    const auto f1 = fingerprint(make_farm({a}));
    a.channels[3].values[40] = *a.channels[3].values[40] + 1e-12;
    EXPECT_NE(f1, fingerprint(make_farm({a})));
}

TEST(TurbineSeriesInvariant, RejectsNonIncreasingTimestamps)
{
    auto a = random_series("T01", ts("2012-01-01T00:00:00Z"), 5, 1);
    std::swap(a.timestamps[1], a.timestamps[2]);
    EXPECT_THROW(a.validate(), DataError);
    auto b = random_series("T01", ts("2012-01-01T00:00:00Z"), 5, 1);
    b.channels[0].values.pop_back();
    EXPECT_THROW(b.validate(), DataError);
    EXPECT_THROW(b.channel("nacelle_temp"), DataError);
}

TEST(Catalog, IsIntersectionOfChannels)
{
    auto a = random_series("T01", ts("2012-01-01T00:00:00Z"), 5, 1);
    auto b = random_series("T02", ts("2012-01-01T00:00:00Z"), 5, 2);
    b.channels.erase(b.channels.begin() + 2);  // no rotor speed
    const auto farm = make_farm({b, a});
    EXPECT_EQ(farm.turbines[0].turbine_id, "T01");
    EXPECT_EQ(farm.channel_catalog.size(), 6u);
    EXPECT_EQ(std::count(farm.channel_catalog.begin(), farm.channel_catalog.end(), "rotor_speed"), 0);
}

TEST(LoadFailures, EmptyBody)
{
    const auto dir = scratch_dir("fail_empty");
    write_file(dir / "f.csv", "turbine_id,failure_time,component\n");
    EXPECT_TRUE(load_failures_csv(dir / "f.csv").empty());
}

TEST(LoadFailures, FiveRowsSortedAscending)
{
    const auto dir = scratch_dir("fail_five");
    write_file(dir / "f.csv",
               "turbine_id,failure_time,component\n"
               "T03,2012-07-04T00:00:00Z,gearbox_ims_bearing\n"
               "T01,2012-03-14T00:00:00Z,gearbox_ims_bearing\n"
               "T05,2012-10-24T00:00:00Z,gearbox_ims_bearing\n"
               "T02,2012-05-09T00:00:00Z,gearbox_ims_bearing\n"
               "T04,2012-08-29T00:00:00Z,gearbox_ims_bearing\n");
    const auto f = load_failures_csv(dir / "f.csv");
    ASSERT_EQ(f.size(), 5u);
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end(),
                               [](const FailureRecord& a, const FailureRecord& b) { return a.failure_time < b.failure_time; }));
    EXPECT_EQ(f.front().turbine_id, "T01");
    for (const auto& r : f) EXPECT_EQ(r.component, "gearbox_ims_bearing");

    write_failures_csv(dir / "g.csv", f);
    EXPECT_EQ(load_failures_csv(dir / "g.csv"), f);
}

TEST(LoadFailures, BadDateNamesRow)
{
    const auto dir = scratch_dir("fail_bad");
    write_file(dir / "f.csv", "turbine_id,failure_time,component\nT01,2012-03-14T00:00:00Z,x\nT02,yesterday,x\n");
    try {
        load_failures_csv(dir / "f.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
    }
}

TEST(FailureCoverage, FlagsOutsideAndUnknown)
{
    const auto farm = make_farm({random_series("T01", ts("2012-01-01T00:00:00Z"), 144, 1)});
    const std::vector<FailureRecord> f{{"T01", ts("2012-01-01T12:00:00Z"), "x"},
                                       {"T01", ts("2013-01-01T00:00:00Z"), "x"},
                                       {"T09", ts("2012-01-01T12:00:00Z"), "x"}};
    EXPECT_EQ(check_failure_coverage(farm, f).size(), 2u);
}

TEST(SplitByPeriod, AllInTrain)
{
    const auto farm = make_farm({random_series("T01", ts("2010-02-01T00:00:00Z"), 100, 1)});
    const auto s = split_by_period(farm, parse_interval("2010-01-01T00:00:00Z/2011-01-01T00:00:00Z"),
                                   parse_interval("2011-01-01T00:00:00Z/2012-01-01T00:00:00Z"),
                                   parse_interval("2012-01-01T00:00:00Z/2013-01-01T00:00:00Z"));
    EXPECT_EQ(s.train.total_samples(), 100u);
    EXPECT_EQ(s.validation.total_samples(), 0u);
    EXPECT_EQ(s.test.total_samples(), 0u);
}

TEST(SplitByPeriod, YearlyCountsMatchIndependentCount)
{
    const auto farm = three_year_farm(2);
    const Interval y1 = parse_interval("2010-01-01T00:00:00Z/2011-01-01T00:00:00Z");
    const Interval y2 = parse_interval("2011-01-01T00:00:00Z/2012-01-01T00:00:00Z");
    const Interval y3 = parse_interval("2012-01-01T00:00:00Z/2013-01-01T00:00:00Z");
    const auto s = split_by_period(farm, y1, y2, y3);
    std::size_t c1 = 0, c2 = 0, c3 = 0;
    for (const auto& t : farm.turbines) {
        for (auto x : t.timestamps) {
            c1 += y1.start <= x && x < y1.end;
            c2 += y2.start <= x && x < y2.end;
            c3 += y3.start <= x && x < y3.end;
        }
    }
    EXPECT_EQ(s.train.total_samples(), c1);
    EXPECT_EQ(s.validation.total_samples(), c2);
    EXPECT_EQ(s.test.total_samples(), c3);
    EXPECT_EQ(c1, 2u * 365 * 144);
    EXPECT_EQ(c3, 2u * 366 * 144);
    EXPECT_EQ(s.boundaries[1], y2);
}

TEST(SplitByPeriod, PartitionsWithDiscards)
{
    const auto farm = make_farm({random_series("T01", ts("2011-12-31T00:00:00Z"), 1000, 1)});
    const auto s = split_by_period(farm, parse_interval("2011-12-31T00:00:00Z/2012-01-01T00:00:00Z"),
                                   parse_interval("2012-01-02T00:00:00Z/2012-01-03T00:00:00Z"),
                                   parse_interval("2012-01-03T00:00:00Z/2012-01-04T00:00:00Z"));
    // 2012-01-01 and everything from 2012-01-04 lie in no interval
    std::size_t discarded = 0;
    for (auto x : farm.turbines[0].timestamps) {
        discarded += (ts("2012-01-01T00:00:00Z") <= x && x < ts("2012-01-02T00:00:00Z")) || x >= ts("2012-01-04T00:00:00Z");
    }
    EXPECT_EQ(s.train.total_samples() + s.validation.total_samples() + s.test.total_samples() + discarded, 1000u);
    EXPECT_EQ(s.train.total_samples(), 144u);
    EXPECT_EQ(s.validation.total_samples(), 144u);
    EXPECT_EQ(s.test.total_samples(), 144u);
}

TEST(SplitByPeriod, BoundaryInstantGoesToLaterInterval)
{
    const auto farm = make_farm({random_series("T01", ts("2011-12-31T23:50:00Z"), 2, 1)});
    const auto s = split_by_period(farm, parse_interval("2011-01-01T00:00:00Z/2012-01-01T00:00:00Z"),
                                   parse_interval("2012-01-01T00:00:00Z/2013-01-01T00:00:00Z"),
                                   parse_interval("2013-01-01T00:00:00Z/2014-01-01T00:00:00Z"));
    ASSERT_EQ(s.validation.total_samples(), 1u);
    EXPECT_EQ(s.validation.turbines[0].timestamps[0], ts("2012-01-01T00:00:00Z"));
    EXPECT_EQ(s.train.total_samples(), 1u);
}

TEST(SplitByPeriod, RejectsOverlapAndDisorder)
{
    const auto farm = make_farm({random_series("T01", ts("2012-01-01T00:00:00Z"), 10, 1)});
    const auto a = parse_interval("2010-01-01T00:00:00Z/2011-06-01T00:00:00Z");
    const auto b = parse_interval("2011-01-01T00:00:00Z/2012-01-01T00:00:00Z");
    const auto c = parse_interval("2012-01-01T00:00:00Z/2013-01-01T00:00:00Z");
    EXPECT_THROW(split_by_period(farm, a, b, c), ConfigError);
    EXPECT_THROW(split_by_period(farm, b, a, c), ConfigError);
    EXPECT_THROW(split_by_period(farm, c, b, parse_interval("2010-01-01T00:00:00Z/2010-06-01T00:00:00Z")), ConfigError);
}

TEST(ExcludeFaultPeriods, NoFailuresIsIdentity)
{
    const auto farm = three_year_farm(1);
    EXPECT_EQ(fingerprint(exclude_fault_periods(farm, {})), fingerprint(farm));
}

TEST(ExcludeFaultPeriods, MatchesMembershipScan)
{
    const auto farm = three_year_farm(2);
    const FailureRecord f{"T02", ts("2011-05-05T12:00:00Z"), "gearbox_ims_bearing"};
    const auto out = exclude_fault_periods(farm, {f}, {60, 30});
    const auto lo = f.failure_time - days(60);
    const auto hi = f.failure_time + days(30);
    for (std::size_t t = 0; t < 2; ++t) {
        std::vector<Timestamp> expected;
        for (auto x : farm.turbines[t].timestamps) {
            const bool inside = farm.turbines[t].turbine_id == "T02" && lo <= x && x <= hi;
            if (!inside) expected.push_back(x);
        }
        EXPECT_EQ(out.turbines[t].timestamps, expected);
    }
    EXPECT_EQ(farm.total_samples() - out.total_samples(), 90u * 144 + 1);
}

TEST(ExcludeFaultPeriods, OverlappingEnvelopesRemoveUnion)
{
    const auto farm = three_year_farm(1);
    const std::vector<FailureRecord> f{{"T01", ts("2011-03-01T00:00:00Z"), "x"}, {"T01", ts("2011-04-01T00:00:00Z"), "x"}};
    const auto out = exclude_fault_periods(farm, f, {60, 30});
    std::vector<Timestamp> expected;
    for (auto x : farm.turbines[0].timestamps) {
        bool inside = false;
        for (const auto& r : f) inside = inside || (r.failure_time - days(60) <= x && x <= r.failure_time + days(30));
        if (!inside) expected.push_back(x);
    }
    EXPECT_EQ(out.turbines[0].timestamps, expected);
    EXPECT_EQ(fingerprint(exclude_fault_periods(out, f, {60, 30})), fingerprint(out));
}

TEST(ExcludeFaultPeriods, FailureOutsideDataIsNoOp)
{
    const auto farm = three_year_farm(1);
    const std::vector<FailureRecord> f{{"T01", ts("2020-01-01T00:00:00Z"), "x"}, {"T07", ts("2011-01-01T00:00:00Z"), "x"}};
    EXPECT_EQ(fingerprint(exclude_fault_periods(farm, f)), fingerprint(farm));
    EXPECT_THROW(exclude_fault_periods(farm, f, {-1, 30}), ConfigError);
}
