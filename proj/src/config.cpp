#include "windnbm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "windnbm/errors.hpp"

namespace windnbm {

namespace {

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) items.emplace_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

// Typed access to one section; reports unused keys as unknown.
class SectionReader {
public:
    SectionReader(const ConfigFile& file, const ConfigFile::Section& section) : file_(file), section_(section)
    {
        std::set<std::string> seen;
        for (const auto& e : section.entries) {
            if (!seen.insert(e.key).second) file.fail(e.line, "duplicate key '" + e.key + "'");
        }
    }

    template <class T>
    void get(const std::string& key, T& out)
    {
        const auto* e = find(key);
        if (!e) return;
        used_.insert(key);
        try {
            out = convert<T>(e->value);
        } catch (const std::exception& ex) {
            file_.fail(e->line, "invalid value for '" + key + "': " + ex.what());
        }
    }

    template <class T>
    T require(const std::string& key)
    {
        if (!find(key)) file_.fail(section_.line, "[" + section_.name + "] is missing required key '" + key + "'");
        T out{};
        get(key, out);
        return out;
    }

    bool has(const std::string& key) const { return find(key) != nullptr; }

    void finish() const
    {
        for (const auto& e : section_.entries) {
            if (!used_.count(e.key)) file_.fail(e.line, "unknown key '" + e.key + "' in [" + section_.name + "]");
        }
    }

private:
    const ConfigFile::Entry* find(const std::string& key) const
    {
        for (const auto& e : section_.entries) {
            if (e.key == key) return &e;
        }
        return nullptr;
    }

    template <class T>
    static T convert(const std::string& v)
    {
        if constexpr (std::is_same_v<T, std::string>) {
            return v;
        } else if constexpr (std::is_same_v<T, double>) {
            return parse_double(v);
        } else if constexpr (std::is_same_v<T, Timestamp>) {
            return parse_rfc3339(v);
        } else if constexpr (std::is_same_v<T, Interval>) {
            return parse_interval(v);
        } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
            return std::filesystem::path(v);
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
            std::vector<int> out;
            for (const auto& item : split_list(v)) out.push_back(convert<int>(item));
            return out;
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            std::vector<double> out;
            for (const auto& item : split_list(v)) out.push_back(parse_double(item));
            return out;
        } else if constexpr (std::is_same_v<T, std::vector<ModelKind>>) {
            std::vector<ModelKind> out;
            for (const auto& item : split_list(v)) out.push_back(parse_model_kind(item));
            return out;
        } else if constexpr (std::is_same_v<T, std::optional<std::uint64_t>>) {
            return convert<std::uint64_t>(v);
        } else {
            static_assert(std::is_integral_v<T>);
            T out{};
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError("not an integer: '" + v + "'");
            return out;
        }
    }

    const ConfigFile& file_;
    const ConfigFile::Section& section_;
    std::set<std::string> used_;
};

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T>
std::string join(const std::vector<T>& items)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        if constexpr (std::is_same_v<T, double>) out += format_double(items[i]);
        else if constexpr (std::is_same_v<T, ModelKind>) out += to_string(items[i]);
        else out += std::to_string(items[i]);
    }
    return out;
}

} // namespace

void ConfigFile::fail(std::size_t line, const std::string& message) const
{
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + message);
}

ConfigFile ConfigFile::parse(std::string_view text, std::string source)
{
    ConfigFile file;
    file.source_ = std::move(source);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) file.fail(line_no, "malformed section header");
            file.sections_.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) file.fail(line_no, "expected 'key = value'");
        if (file.sections_.empty()) file.fail(line_no, "key outside of any [section]");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) file.fail(line_no, "empty key");
        file.sections_.back().entries.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
    }
    return file;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path)
{
    return parse(read_text(path), path.string());
}

sim::SimConfig parse_scenario(const ConfigFile& file)
{
    sim::SimConfig cfg;
    bool have_simulation = false;
    for (const auto& s : file.sections()) {
        SectionReader r(file, s);
        if (s.name == "simulation") {
            if (have_simulation) file.fail(s.line, "duplicate [simulation] section");
            have_simulation = true;
            r.get("seed", cfg.seed);
            r.get("n_turbines", cfg.n_turbines);
            cfg.period.start = r.require<Timestamp>("start");
            cfg.period.end = r.require<Timestamp>("end");
            r.get("resolution_s", cfg.resolution_s);
            r.get("repair_gap_days", cfg.repair_gap_days);
            r.get("missing_rate", cfg.missing_rate);
        } else if (s.name == "turbine") {
            auto& p = cfg.params;
            r.get("cut_in", p.cut_in);
            r.get("rated", p.rated);
            r.get("cut_out", p.cut_out);
            r.get("rated_power", p.rated_power);
            r.get("rated_rotor_rpm", p.rated_rotor_rpm);
            r.get("a_ims", p.a_ims);
            r.get("a_hss", p.a_hss);
            r.get("h", p.h);
            r.get("c", p.c);
        } else if (s.name == "wind") {
            auto& w = cfg.wind;
            r.get("mean", w.mean);
            r.get("stddev", w.stddev);
            r.get("lag1_correlation", w.lag1_correlation);
            r.get("seasonal_amplitude", w.seasonal_amplitude);
            r.get("diurnal_amplitude", w.diurnal_amplitude);
        } else if (s.name == "ambient") {
            auto& a = cfg.ambient;
            r.get("mean", a.mean);
            r.get("seasonal_amplitude", a.seasonal_amplitude);
            r.get("diurnal_amplitude", a.diurnal_amplitude);
            r.get("weather_stddev", a.weather_stddev);
            r.get("weather_lag1_correlation", a.weather_lag1_correlation);
        } else if (s.name == "noise") {
            auto& n = cfg.noise;
            r.get("wind_speed", n.wind_speed);
            r.get("active_power", n.active_power);
            r.get("rotor_speed", n.rotor_speed);
            r.get("pitch_angle", n.pitch_angle);
            r.get("ambient_temp", n.ambient_temp);
            r.get("hss_bearing_temp", n.hss_bearing_temp);
            r.get("ims_bearing_temp", n.ims_bearing_temp);
        } else if (s.name == "fault") {
            sim::FaultScenario f;
            f.turbine_id = r.require<std::string>("turbine_id");
            f.failure_time = r.require<Timestamp>("failure_time");
            r.get("onset_lead_days", f.onset_lead_days);
            r.get("severity", f.severity);
            cfg.faults.push_back(f);
        } else {
            file.fail(s.line, "unknown section [" + s.name + "]");
        }
        r.finish();
    }
    if (!have_simulation) throw ConfigError(file.source() + ": missing [simulation] section");
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(file.source() + ": " + e.what());
    }
    return cfg;
}

std::string format_scenario(const sim::SimConfig& cfg)
{
    std::ostringstream o;
    const auto d = [](double v) { return format_double(v); };
    o << "[simulation]\n"
      << "seed = " << cfg.seed << '\n'
      << "n_turbines = " << cfg.n_turbines << '\n'
      << "start = " << format_rfc3339(cfg.period.start) << '\n'
      << "end = " << format_rfc3339(cfg.period.end) << '\n'
      << "resolution_s = " << cfg.resolution_s << '\n'
      << "repair_gap_days = " << cfg.repair_gap_days << '\n'
      << "missing_rate = " << d(cfg.missing_rate) << "\n\n";
    const auto& p = cfg.params;
    o << "[turbine]\n"
      << "cut_in = " << d(p.cut_in) << "\nrated = " << d(p.rated) << "\ncut_out = " << d(p.cut_out)
      << "\nrated_power = " << d(p.rated_power) << "\nrated_rotor_rpm = " << d(p.rated_rotor_rpm)
      << "\na_ims = " << d(p.a_ims) << "\na_hss = " << d(p.a_hss) << "\nh = " << d(p.h) << "\nc = " << d(p.c)
      << "\n\n";
    const auto& w = cfg.wind;
    o << "[wind]\n"
      << "mean = " << d(w.mean) << "\nstddev = " << d(w.stddev) << "\nlag1_correlation = " << d(w.lag1_correlation)
      << "\nseasonal_amplitude = " << d(w.seasonal_amplitude) << "\ndiurnal_amplitude = " << d(w.diurnal_amplitude)
      << "\n\n";
    const auto& a = cfg.ambient;
    o << "[ambient]\n"
      << "mean = " << d(a.mean) << "\nseasonal_amplitude = " << d(a.seasonal_amplitude)
      << "\ndiurnal_amplitude = " << d(a.diurnal_amplitude) << "\nweather_stddev = " << d(a.weather_stddev)
      << "\nweather_lag1_correlation = " << d(a.weather_lag1_correlation) << "\n\n";
    const auto& n = cfg.noise;
    o << "[noise]\n"
      << "wind_speed = " << d(n.wind_speed) << "\nactive_power = " << d(n.active_power)
      << "\nrotor_speed = " << d(n.rotor_speed) << "\npitch_angle = " << d(n.pitch_angle)
      << "\nambient_temp = " << d(n.ambient_temp) << "\nhss_bearing_temp = " << d(n.hss_bearing_temp)
      << "\nims_bearing_temp = " << d(n.ims_bearing_temp) << '\n';
    for (const auto& f : cfg.faults) {
        o << "\n[fault]\n"
          << "turbine_id = " << f.turbine_id << "\nfailure_time = " << format_rfc3339(f.failure_time)
          << "\nonset_lead_days = " << f.onset_lead_days << "\nseverity = " << d(f.severity) << '\n';
    }
    return o.str();
}

std::vector<double> default_quantiles()
{
    // Exceedance probabilities 1 - q spaced evenly on a log scale from 0.5 down to 1e-6,
    // so most sweep points sit in the tail where the curves change.
    constexpr int n = 100;
    std::vector<double> q(n);
    for (int i = 0; i < n; ++i) {
        const double tail = 0.5 * std::pow(2e-6, static_cast<double>(i) / (n - 1));
        // Keep three significant digits of the tail so the values print cleanly.
        const int decimals = 2 - static_cast<int>(std::floor(std::log10(tail)));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, 1.0 - tail);
        q[i] = std::strtod(buf, nullptr);
    }
    return q;
}

ExperimentConfig default_experiment()
{
    ExperimentConfig cfg;
    cfg.scenario = sim::default_config();
    cfg.split = {parse_interval("2010-01-01T00:00:00Z/2011-01-01T00:00:00Z"),
                 parse_interval("2011-01-01T00:00:00Z/2012-01-01T00:00:00Z"),
                 parse_interval("2012-01-01T00:00:00Z/2013-01-01T00:00:00Z")};
    cfg.gbdt.n_bins = 256;  // fine bins keep the hot tail of the temperature channels resolved
    cfg.quantiles = default_quantiles();
    return cfg;
}

ExperimentConfig parse_experiment(const ConfigFile& file, const std::filesystem::path& base_dir)
{
    ExperimentConfig cfg;
    cfg.quantiles = default_quantiles();
    bool have_split = false;
    std::size_t data_line = 0;
    for (const auto& s : file.sections()) {
        SectionReader r(file, s);
        if (s.name == "data") {
            data_line = s.line;
            r.get("scenario", cfg.scenario_path);
            r.get("scada", cfg.scada_path);
            r.get("failures", cfg.failures_path);
            r.get("resolution_s", cfg.resolution_s);
        } else if (s.name == "split") {
            have_split = true;
            cfg.split.train = r.require<Interval>("train");
            cfg.split.validation = r.require<Interval>("validation");
            cfg.split.test = r.require<Interval>("test");
        } else if (s.name == "features") {
            r.get("lag_steps", cfg.lag_steps);
            r.get("models", cfg.models);
            std::string pooling = "pooled";
            r.get("pooling", pooling);
            if (pooling == "pooled") cfg.pooling = Pooling::Pooled;
            else if (pooling == "per_turbine") cfg.pooling = Pooling::PerTurbine;
            else file.fail(s.line, "pooling must be 'pooled' or 'per_turbine'");
        } else if (s.name == "exclusion") {
            r.get("before_days", cfg.exclusion.before_days);
            r.get("after_days", cfg.exclusion.after_days);
        } else if (s.name == "gbdt") {
            r.get("max_trees", cfg.gbdt.max_trees);
            r.get("learning_rate", cfg.gbdt.learning_rate);
            r.get("max_depth", cfg.gbdt.max_depth);
            r.get("min_samples_leaf", cfg.gbdt.min_samples_leaf);
            r.get("n_bins", cfg.gbdt.n_bins);
            r.get("early_stopping_rounds", cfg.gbdt.early_stopping_rounds);
            r.get("seed", cfg.gbdt.seed);
        } else if (s.name == "detection") {
            r.get("quantiles", cfg.quantiles);
            std::int64_t gap_hours = cfg.merge_gap_s / kHour;
            r.get("merge_gap_hours", gap_hours);
            cfg.merge_gap_s = gap_hours * kHour;
            r.get("smoothing_steps", cfg.smoothing_steps);
        } else if (s.name == "evaluation") {
            r.get("window_days", cfg.eval.window_days);
            r.get("lead_days", cfg.eval.lead_days);
            r.get("blackout_days", cfg.eval.blackout_days);
        } else if (s.name == "run") {
            r.get("seed", cfg.seed);
            r.get("output_dir", cfg.output_dir);
        } else {
            file.fail(s.line, "unknown section [" + s.name + "]");
        }
        r.finish();
    }
    if (!have_split) throw ConfigError(file.source() + ": missing [split] section");
    const bool from_scenario = !cfg.scenario_path.empty();
    const bool from_csv = !cfg.scada_path.empty() || !cfg.failures_path.empty();
    if (from_scenario == from_csv) {
        file.fail(data_line, "[data] needs either 'scenario' or both 'scada' and 'failures'");
    }
    if (from_csv && (cfg.scada_path.empty() || cfg.failures_path.empty())) {
        file.fail(data_line, "[data] needs both 'scada' and 'failures'");
    }
    auto resolve = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative()) p = base_dir / p;
    };
    resolve(cfg.scenario_path);
    resolve(cfg.scada_path);
    resolve(cfg.failures_path);
    resolve(cfg.output_dir);
    if (from_scenario) cfg.scenario = parse_scenario(ConfigFile::load(cfg.scenario_path));
    if (cfg.quantiles.empty()) throw ConfigError(file.source() + ": [detection] quantiles must not be empty");
    for (double q : cfg.quantiles) {
        if (!(q > 0.0 && q < 1.0)) throw ConfigError(file.source() + ": quantiles must lie strictly in (0, 1)");
    }
    if (cfg.models.empty()) throw ConfigError(file.source() + ": [features] models must not be empty");
    try {
        cfg.gbdt.validate();
        cfg.eval.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(file.source() + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path)
{
    return parse_experiment(ConfigFile::load(path), path.parent_path());
}

std::string format_experiment(const ExperimentConfig& cfg, const std::string& scenario_file)
{
    std::ostringstream o;
    o << "[data]\n";
    if (cfg.scenario) {
        o << "scenario = " << scenario_file << '\n';
    } else {
        o << "scada = " << cfg.scada_path.string() << "\nfailures = " << cfg.failures_path.string() << '\n';
    }
    o << "resolution_s = " << cfg.resolution_s << "\n\n";
    o << "[split]\ntrain = " << format_interval(cfg.split.train) << "\nvalidation = " << format_interval(cfg.split.validation)
      << "\ntest = " << format_interval(cfg.split.test) << "\n\n";
    o << "[features]\nlag_steps = " << join(cfg.lag_steps) << "\nmodels = " << join(cfg.models)
      << "\npooling = " << (cfg.pooling == Pooling::Pooled ? "pooled" : "per_turbine") << "\n\n";
    o << "[exclusion]\nbefore_days = " << cfg.exclusion.before_days << "\nafter_days = " << cfg.exclusion.after_days
      << "\n\n";
    const auto& g = cfg.gbdt;
    o << "[gbdt]\nmax_trees = " << g.max_trees << "\nlearning_rate = " << format_double(g.learning_rate)
      << "\nmax_depth = " << g.max_depth << "\nmin_samples_leaf = " << g.min_samples_leaf << "\nn_bins = " << g.n_bins
      << "\nearly_stopping_rounds = " << g.early_stopping_rounds << "\nseed = " << g.seed << "\n\n";
    o << "[detection]\nquantiles = " << join(cfg.quantiles) << "\nmerge_gap_hours = " << cfg.merge_gap_s / kHour
      << "\nsmoothing_steps = " << cfg.smoothing_steps << "\n\n";
    o << "[evaluation]\nwindow_days = " << cfg.eval.window_days << "\nlead_days = " << cfg.eval.lead_days
      << "\nblackout_days = " << cfg.eval.blackout_days << "\n\n";
    o << "[run]\n";
    if (cfg.seed) o << "seed = " << *cfg.seed << '\n';
    return o.str();
}

} // namespace windnbm
