#include "windnbm/scada_data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "windnbm/errors.hpp"

namespace windnbm {

namespace {

constexpr std::string_view kFailuresHeader = "turbine_id,failure_time,component";

std::string scada_header()
{
    std::string h = "timestamp,turbine_id";
    for (auto c : kScadaChannels) {
        h += ',';
        h += c;
    }
    return h;
}

std::vector<std::string_view> split_csv_line(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view strip_cr(std::string_view s)
{
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

std::string where(const std::filesystem::path& path, std::size_t line_no)
{
    return path.string() + ":" + std::to_string(line_no);
}

void check_header(const std::filesystem::path& path, std::string_view header, std::string_view expected)
{
    if (header == expected) return;
    const auto got = split_csv_line(header);
    const auto want = split_csv_line(expected);
    for (auto name : got) {
        if (std::find(want.begin(), want.end(), name) == want.end()) {
            throw DataError(where(path, 1) + ": unknown column '" + std::string(name) + "'; expected columns: " +
                            std::string(expected));
        }
    }
    throw DataError(where(path, 1) + ": header must be exactly '" + std::string(expected) + "'");
}

struct RawRow {
    Timestamp time;
    std::size_t line_no;
    std::array<Sample, kScadaChannels.size()> values;
};

} // namespace

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw DataError("invalid number '" + std::string(text) + "'");
    }
    return v;
}

bool TurbineSeries::has_channel(std::string_view name) const
{
    return std::any_of(channels.begin(), channels.end(), [&](const Channel& c) { return c.name == name; });
}

const std::vector<Sample>& TurbineSeries::channel(std::string_view name) const
{
    for (const auto& c : channels) {
        if (c.name == name) return c.values;
    }
    throw DataError("turbine " + turbine_id + " has no channel '" + std::string(name) + "'");
}

std::vector<Sample>& TurbineSeries::channel(std::string_view name)
{
    return const_cast<std::vector<Sample>&>(std::as_const(*this).channel(name));
}

std::vector<std::string> TurbineSeries::channel_names() const
{
    std::vector<std::string> names;
    for (const auto& c : channels) names.push_back(c.name);
    return names;
}

void TurbineSeries::validate() const
{
    if (resolution_s <= 0) throw DataError("turbine " + turbine_id + ": resolution must be positive");
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        if (timestamps[i].seconds % resolution_s != 0) {
            throw DataError("turbine " + turbine_id + ": timestamp " + format_rfc3339(timestamps[i]) +
                            " not aligned to " + std::to_string(resolution_s) + " s");
        }
        if (i > 0 && timestamps[i] <= timestamps[i - 1]) {
            throw DataError("turbine " + turbine_id + ": timestamps not strictly increasing at " +
                            format_rfc3339(timestamps[i]));
        }
    }
    for (const auto& c : channels) {
        if (c.values.size() != timestamps.size()) {
            throw DataError("turbine " + turbine_id + ": channel " + c.name + " length mismatch");
        }
    }
}

std::size_t FarmDataset::total_samples() const
{
    std::size_t n = 0;
    for (const auto& t : turbines) n += t.size();
    return n;
}

const TurbineSeries* FarmDataset::find(std::string_view turbine_id) const
{
    for (const auto& t : turbines) {
        if (t.turbine_id == turbine_id) return &t;
    }
    return nullptr;
}

Interval FarmDataset::covered_period() const
{
    Interval iv{};
    bool any = false;
    for (const auto& t : turbines) {
        if (t.timestamps.empty()) continue;
        const Interval ti{t.timestamps.front(), t.timestamps.back() + t.resolution_s};
        if (!any) {
            iv = ti;
            any = true;
        } else {
            iv.start = std::min(iv.start, ti.start);
            iv.end = std::max(iv.end, ti.end);
        }
    }
    return iv;
}

FarmDataset make_farm(std::vector<TurbineSeries> turbines)
{
    if (turbines.empty()) throw DataError("dataset has no turbines");
    std::sort(turbines.begin(), turbines.end(),
              [](const TurbineSeries& a, const TurbineSeries& b) { return a.turbine_id < b.turbine_id; });
    FarmDataset farm;
    farm.channel_catalog = turbines.front().channel_names();
    for (const auto& t : turbines) {
        t.validate();
        std::erase_if(farm.channel_catalog, [&](const std::string& name) { return !t.has_channel(name); });
    }
    for (std::size_t i = 1; i < turbines.size(); ++i) {
        if (turbines[i].turbine_id == turbines[i - 1].turbine_id) {
            throw DataError("duplicate turbine id " + turbines[i].turbine_id);
        }
    }
    if (farm.channel_catalog.empty()) throw DataError("turbines share no channels");
    farm.turbines = std::move(turbines);
    return farm;
}

FarmDataset load_scada_csv(const std::filesystem::path& path, std::int64_t resolution_s)
{
    if (resolution_s <= 0) throw ConfigError("resolution must be positive");
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(where(path, 1) + ": missing header");
    check_header(path, strip_cr(line), scada_header());

    std::map<std::string, std::vector<RawRow>> by_turbine;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = strip_cr(line);
        if (text.empty()) continue;
        const auto fields = split_csv_line(text);
        if (fields.size() != kScadaChannels.size() + 2) {
            throw DataError(where(path, line_no) + ": expected " + std::to_string(kScadaChannels.size() + 2) +
                            " fields, got " + std::to_string(fields.size()));
        }
        RawRow row;
        row.line_no = line_no;
        try {
            row.time = parse_rfc3339(fields[0]);
            for (std::size_t c = 0; c < kScadaChannels.size(); ++c) {
                if (!fields[c + 2].empty()) row.values[c] = parse_double(fields[c + 2]);
            }
        } catch (const DataError& e) {
            throw DataError(where(path, line_no) + ": " + e.what());
        }
        if (row.time.seconds % resolution_s != 0) {
            throw DataError(where(path, line_no) + ": timestamp " + std::string(fields[0]) +
                            " not aligned to resolution " + std::to_string(resolution_s) + " s");
        }
        if (fields[1].empty()) throw DataError(where(path, line_no) + ": empty turbine_id");
        by_turbine[std::string(fields[1])].push_back(row);
    }
    if (by_turbine.empty()) throw DataError(path.string() + ": no data rows");

    std::vector<TurbineSeries> turbines;
    for (auto& [id, rows] : by_turbine) {
        std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.time < b.time; });
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].time == rows[i - 1].time) {
                const auto later = std::max(rows[i].line_no, rows[i - 1].line_no);
                throw DataError(where(path, later) + ": duplicate timestamp " + format_rfc3339(rows[i].time) +
                                " for turbine " + id);
            }
        }
        TurbineSeries series;
        series.turbine_id = id;
        series.resolution_s = resolution_s;
        series.timestamps.reserve(rows.size());
        for (auto name : kScadaChannels) series.channels.push_back({std::string(name), {}});
        for (const auto& r : rows) {
            series.timestamps.push_back(r.time);
            for (std::size_t c = 0; c < kScadaChannels.size(); ++c) series.channels[c].values.push_back(r.values[c]);
        }
        turbines.push_back(std::move(series));
    }
    return make_farm(std::move(turbines));
}

void write_scada_csv(const std::filesystem::path& path, const FarmDataset& farm)
{
    auto out = open_output(path);
    out << scada_header() << '\n';
    std::string line;
    for (const auto& t : farm.turbines) {
        std::vector<const std::vector<Sample>*> cols;
        for (auto name : kScadaChannels) cols.push_back(&t.channel(name));
        for (std::size_t i = 0; i < t.size(); ++i) {
            line = format_rfc3339(t.timestamps[i]);
            line += ',';
            line += t.turbine_id;
            for (const auto* col : cols) {
                line += ',';
                if ((*col)[i]) line += format_double(*(*col)[i]);
            }
            line += '\n';
            out << line;
        }
    }
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<FailureRecord> load_failures_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(where(path, 1) + ": missing header");
    check_header(path, strip_cr(line), kFailuresHeader);
    std::vector<FailureRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = strip_cr(line);
        if (text.empty()) continue;
        const auto fields = split_csv_line(text);
        if (fields.size() != 3) throw DataError(where(path, line_no) + ": expected 3 fields");
        FailureRecord rec;
        rec.turbine_id = std::string(fields[0]);
        try {
            rec.failure_time = parse_rfc3339(fields[1]);
        } catch (const DataError& e) {
            throw DataError("row " + std::to_string(line_no) + " (" + where(path, line_no) + "): " + e.what());
        }
        rec.component = std::string(fields[2]);
        records.push_back(std::move(rec));
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const FailureRecord& a, const FailureRecord& b) { return a.failure_time < b.failure_time; });
    return records;
}

void write_failures_csv(const std::filesystem::path& path, const std::vector<FailureRecord>& failures)
{
    auto out = open_output(path);
    out << kFailuresHeader << '\n';
    for (const auto& f : failures) {
        out << f.turbine_id << ',' << format_rfc3339(f.failure_time) << ',' << f.component << '\n';
    }
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<std::string> check_failure_coverage(const FarmDataset& farm, const std::vector<FailureRecord>& failures)
{
    std::vector<std::string> messages;
    const auto period = farm.covered_period();
    for (const auto& f : failures) {
        if (!farm.find(f.turbine_id)) {
            messages.push_back("failure on unknown turbine " + f.turbine_id);
        } else if (f.failure_time < period.start || f.failure_time > period.end) {
            messages.push_back("failure of " + f.turbine_id + " at " + format_rfc3339(f.failure_time) +
                               " lies outside the data period " + format_interval(period));
        }
    }
    return messages;
}

DatasetSplit split_by_period(const FarmDataset& d, const Interval& train, const Interval& validation,
                             const Interval& test)
{
    const std::array<Interval, 3> ivs{train, validation, test};
    for (const auto& iv : ivs) {
        if (iv.end < iv.start) throw ConfigError("split interval " + format_interval(iv) + " is reversed");
    }
    if (train.end > validation.start || validation.end > test.start) {
        throw ConfigError("split intervals must be disjoint and ordered train < validation < test");
    }
    DatasetSplit split;
    split.boundaries = ivs;
    FarmDataset* parts[3] = {&split.train, &split.validation, &split.test};
    for (std::size_t p = 0; p < 3; ++p) {
        parts[p]->channel_catalog = d.channel_catalog;
        for (const auto& t : d.turbines) {
            parts[p]->turbines.push_back(
                t.filter_rows([&](std::size_t i) { return ivs[p].contains(t.timestamps[i]); }));
        }
    }
    return split;
}

FarmDataset exclude_fault_periods(const FarmDataset& d, const std::vector<FailureRecord>& failures,
                                  const ExclusionSettings& settings)
{
    if (settings.before_days < 0 || settings.after_days < 0) {
        throw ConfigError("exclusion lengths must be non-negative");
    }
    FarmDataset out;
    out.channel_catalog = d.channel_catalog;
    for (const auto& t : d.turbines) {
        std::vector<std::pair<Timestamp, Timestamp>> envelopes;
        for (const auto& f : failures) {
            if (f.turbine_id != t.turbine_id) continue;
            envelopes.emplace_back(f.failure_time - days(settings.before_days),
                                   f.failure_time + days(settings.after_days));
        }
        if (envelopes.empty()) {
            out.turbines.push_back(t);
            continue;
        }
        out.turbines.push_back(t.filter_rows([&](std::size_t i) {
            const auto ts = t.timestamps[i];
            return std::none_of(envelopes.begin(), envelopes.end(),
                                [&](const auto& e) { return e.first <= ts && ts <= e.second; });
        }));
    }
    return out;
}

std::uint64_t fingerprint(const FarmDataset& d)
{
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& t : d.turbines) {
        for (char ch : t.turbine_id) mix(static_cast<unsigned char>(ch));
        mix(static_cast<std::uint64_t>(t.resolution_s));
        for (auto ts : t.timestamps) mix(static_cast<std::uint64_t>(ts.seconds));
        for (const auto& c : t.channels) {
            for (char ch : c.name) mix(static_cast<unsigned char>(ch));
            for (const auto& v : c.values) mix(v ? std::bit_cast<std::uint64_t>(*v) : 0x7ff8dead0000beefULL);
        }
    }
    return h;
}

} // namespace windnbm
