#include "windnbm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "windnbm/errors.hpp"

namespace windnbm::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (seed, turbine, purpose).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t turbine, std::uint64_t purpose)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ turbine) ^ (purpose * 0x632be59bd9b4e019ULL));
}

class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : engine_(seed) {}
    double operator()(double stddev) { return stddev * unit_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> unit_{0.0, 1.0};
};

enum Stream : std::uint64_t { kWindStream = 1, kAmbientStream, kNoiseStream, kMissingStream };

std::vector<double> ambient_process(std::uint64_t seed, std::size_t n, std::int64_t res, Timestamp start,
                                    const AmbientParams& ap)
{
    Gaussian rng(seed);
    const double phi = ap.weather_lag1_correlation;
    const double innovation = ap.weather_stddev * std::sqrt(std::max(0.0, 1.0 - phi * phi));
    double weather = rng(ap.weather_stddev);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Timestamp t = start + static_cast<std::int64_t>(i) * res;
        if (i > 0) weather = phi * weather + rng(innovation);
        // coldest around day 20, warmest mid-afternoon
        const double seasonal = -ap.seasonal_amplitude * std::cos(kTwoPi * (fractional_day_of_year(t) - 20.0) / 365.25);
        const double diurnal = -ap.diurnal_amplitude * std::cos(kTwoPi * (fractional_hour_of_day(t) - 3.0) / 24.0);
        out[i] = ap.mean + seasonal + diurnal + weather;
    }
    return out;
}

} // namespace

void TurbineParams::validate() const
{
    if (!(0 < cut_in && cut_in < rated && rated < cut_out)) {
        throw ConfigError("turbine wind speeds must satisfy 0 < cut_in < rated < cut_out");
    }
    if (!(rated_power > 0) || !(rated_rotor_rpm > 0)) throw ConfigError("rated power and rotor speed must be positive");
    if (!(a_ims > 0) || !(a_hss > 0)) throw ConfigError("thermal gains a_ims and a_hss must be positive");
    if (!(h >= 0) || !(c > 0)) throw ConfigError("thermal coupling requires h >= 0 and c > 0");
    if (!(h + c < 1)) throw ConfigError("unstable thermal parameters: h + c must be < 1");
}

void FaultScenario::validate() const
{
    if (onset_lead_days <= 0) throw ConfigError("fault on " + turbine_id + ": onset_lead_days must be > 0");
    if (!(severity > 0)) throw ConfigError("fault on " + turbine_id + ": severity must be > 0");
}

void SimConfig::validate() const
{
    if (n_turbines < 1) throw ConfigError("n_turbines must be >= 1");
    if (resolution_s <= 0) throw ConfigError("resolution_s must be positive");
    if (period.length() < resolution_s) throw ConfigError("simulation period shorter than one step");
    if (period.start.seconds % resolution_s != 0) throw ConfigError("period start not aligned to the resolution");
    if (missing_rate < 0 || missing_rate >= 1) throw ConfigError("missing_rate must be in [0, 1)");
    params.validate();
    for (double sd : {noise.wind_speed, noise.active_power, noise.rotor_speed, noise.pitch_angle, noise.ambient_temp,
                      noise.hss_bearing_temp, noise.ims_bearing_temp}) {
        if (!(sd >= 0)) throw ConfigError("noise standard deviations must be >= 0");
    }
    for (const auto& f : faults) {
        f.validate();
        bool known = false;
        for (int i = 0; i < n_turbines; ++i) known = known || turbine_name(i) == f.turbine_id;
        if (!known) throw ConfigError("fault names unknown turbine '" + f.turbine_id + "'");
    }
}

std::string turbine_name(int index)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02d", index + 1);
    return buf;
}

SimConfig default_config()
{
    SimConfig cfg;
    cfg.period = {parse_rfc3339("2010-01-01T00:00:00Z"), parse_rfc3339("2013-01-01T00:00:00Z")};
    const char* failure_times[] = {"2012-03-14T00:00:00Z", "2012-05-09T00:00:00Z", "2012-07-04T00:00:00Z",
                                   "2012-08-29T00:00:00Z", "2012-10-24T00:00:00Z"};
    const double severities[] = {0.22, 0.16, 0.26, 0.13, 0.19};
    for (int i = 0; i < 5; ++i) {
        cfg.faults.push_back({turbine_name(i), parse_rfc3339(failure_times[i]), 60, severities[i]});
    }
    return cfg;
}

ThermalState thermal_step(const ThermalState& s, const ThermalInputs& in, const TurbineParams& p)
{
    ThermalState next;
    next.t_ims = s.t_ims + p.a_ims * in.power_kw * in.fault_multiplier + p.h * (s.t_hss - s.t_ims) +
                 p.c * (in.ambient - s.t_ims);
    next.t_hss = s.t_hss + p.a_hss * in.power_kw + p.h * (s.t_ims - s.t_hss) + p.c * (in.ambient - s.t_hss);
    return next;
}

ThermalState thermal_steady_state(const ThermalInputs& in, const TurbineParams& p)
{
    // (h + c) x - h y = q_ims,  -h x + (h + c) y = q_hss  with x, y the rises above ambient
    const double q_ims = p.a_ims * in.power_kw * in.fault_multiplier;
    const double q_hss = p.a_hss * in.power_kw;
    const double d = p.h + p.c;
    const double det = d * d - p.h * p.h;
    return {in.ambient + (d * q_ims + p.h * q_hss) / det, in.ambient + (p.h * q_ims + d * q_hss) / det};
}

double power_curve(double wind, const TurbineParams& p)
{
    if (wind < p.cut_in || wind > p.cut_out) return 0.0;
    if (wind >= p.rated) return p.rated_power;
    const double lo = p.cut_in * p.cut_in * p.cut_in;
    const double hi = p.rated * p.rated * p.rated;
    return p.rated_power * (wind * wind * wind - lo) / (hi - lo);
}

double rotor_speed_curve(double wind, const TurbineParams& p)
{
    if (wind < p.cut_in || wind > p.cut_out) return 0.0;
    const double x = std::min(1.0, (wind - p.cut_in) / (p.rated - p.cut_in));
    return p.rated_rotor_rpm * (0.45 + 0.55 * (1.0 - (1.0 - x) * (1.0 - x)));
}

double pitch_curve(double wind, const TurbineParams& p)
{
    if (wind < p.cut_in || wind > p.cut_out) return 90.0;
    if (wind <= p.rated) return 0.0;
    return 5.0 * std::sqrt(wind - p.rated);
}

std::vector<double> wind_process(std::uint64_t seed, std::size_t n_steps, std::int64_t resolution_s, Timestamp start,
                                 const WindParams& wp)
{
    Gaussian rng(seed);
    const double phi = wp.lag1_correlation;
    const double innovation = wp.stddev * std::sqrt(std::max(0.0, 1.0 - phi * phi));
    double anomaly = rng(wp.stddev);
    std::vector<double> out(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const Timestamp t = start + static_cast<std::int64_t>(i) * resolution_s;
        if (i > 0) anomaly = phi * anomaly + rng(innovation);
        const double seasonal = wp.seasonal_amplitude * std::cos(kTwoPi * (fractional_day_of_year(t) - 15.0) / 365.25);
        const double diurnal = wp.diurnal_amplitude * std::sin(kTwoPi * (fractional_hour_of_day(t) - 9.0) / 24.0);
        out[i] = std::max(0.0, wp.mean * (1.0 + seasonal + diurnal) + anomaly);
    }
    return out;
}

double fault_multiplier(Timestamp t, const FaultScenario& f)
{
    const Timestamp onset = f.failure_time - days(f.onset_lead_days);
    if (t < onset || t >= f.failure_time) return 1.0;
    return 1.0 + f.severity * static_cast<double>(t - onset) / static_cast<double>(f.failure_time - onset);
}

namespace {

TurbineSeries simulate_turbine(const SimConfig& cfg, int index)
{
    const auto id = turbine_name(index);
    const auto n = static_cast<std::size_t>(cfg.period.length() / cfg.resolution_s);
    const auto turbine = static_cast<std::uint64_t>(index);
    const auto wind = wind_process(stream_seed(cfg.seed, turbine, kWindStream), n, cfg.resolution_s,
                                   cfg.period.start, cfg.wind);
    const auto ambient =
        ambient_process(stream_seed(cfg.seed, turbine, kAmbientStream), n, cfg.resolution_s, cfg.period.start, cfg.ambient);
    Gaussian noise(stream_seed(cfg.seed, turbine, kNoiseStream));
    Gaussian missing(stream_seed(cfg.seed, turbine, kMissingStream));

    std::vector<FaultScenario> faults;
    for (const auto& f : cfg.faults) {
        if (f.turbine_id == id) faults.push_back(f);
    }
    auto is_down = [&](Timestamp t) {
        for (const auto& f : faults) {
            if (t < f.failure_time) continue;
            if (cfg.repair_gap_days < 0 || t < f.failure_time + days(cfg.repair_gap_days)) return true;
        }
        return false;
    };

    TurbineSeries series;
    series.turbine_id = id;
    series.resolution_s = cfg.resolution_s;
    for (auto name : kScadaChannels) series.channels.push_back({std::string(name), {}});
    auto& wind_col = series.channel(channels::kWindSpeed);
    auto& power_col = series.channel(channels::kActivePower);
    auto& rotor_col = series.channel(channels::kRotorSpeed);
    auto& pitch_col = series.channel(channels::kPitchAngle);
    auto& ambient_col = series.channel(channels::kAmbientTemp);
    auto& hss_col = series.channel(channels::kHssBearingTemp);
    auto& ims_col = series.channel(channels::kImsBearingTemp);

    const auto& p = cfg.params;
    const auto& nl = cfg.noise;
    // Start at equilibrium with the first step so there is no warm-up transient.
    ThermalState state{};
    if (n > 0) {
        const double p0 = is_down(cfg.period.start) ? 0.0 : power_curve(wind[0], p);
        double m0 = 1.0;
        for (const auto& f : faults) m0 = std::max(m0, fault_multiplier(cfg.period.start, f));
        state = thermal_steady_state({p0, ambient[0], m0}, p);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Timestamp t = cfg.period.start + static_cast<std::int64_t>(i) * cfg.resolution_s;
        const bool down = is_down(t);
        const double v = wind[i];
        const double power = down ? 0.0 : power_curve(v, p);
        double multiplier = 1.0;
        for (const auto& f : faults) multiplier = std::max(multiplier, fault_multiplier(t, f));

        // Noise is drawn every step so the streams stay aligned across downtime.
        const double e_wind = noise(nl.wind_speed);
        const double e_power = noise(nl.active_power);
        const double e_rotor = noise(nl.rotor_speed);
        const double e_pitch = noise(nl.pitch_angle);
        const double e_amb = noise(nl.ambient_temp);
        const double e_hss = noise(nl.hss_bearing_temp);
        const double e_ims = noise(nl.ims_bearing_temp);
        std::array<bool, kScadaChannels.size()> absent{};
        for (auto& a : absent) a = missing.uniform() < cfg.missing_rate;

        if (!down) {
            auto put = [&](std::vector<Sample>& col, std::size_t k, double value) {
                col.push_back(absent[k] ? Sample{} : Sample{value});
            };
            series.timestamps.push_back(t);
            put(wind_col, 0, std::max(0.0, v + e_wind));
            put(power_col, 1, std::clamp(power + e_power, 0.0, p.rated_power * 1.05));
            put(rotor_col, 2, std::max(0.0, rotor_speed_curve(v, p) + e_rotor));
            put(pitch_col, 3, pitch_curve(v, p) + e_pitch);
            put(ambient_col, 4, ambient[i] + e_amb);
            put(hss_col, 5, state.t_hss + e_hss);
            put(ims_col, 6, state.t_ims + e_ims);
        }
        state = thermal_step(state, {power, ambient[i], multiplier}, p);
    }
    return series;
}

} // namespace

SimulationResult simulate_farm(const SimConfig& cfg)
{
    cfg.validate();
    std::vector<TurbineSeries> turbines(static_cast<std::size_t>(cfg.n_turbines));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < cfg.n_turbines; ++i) {
        turbines[static_cast<std::size_t>(i)] = simulate_turbine(cfg, i);
    }
    SimulationResult result;
    result.farm = make_farm(std::move(turbines));
    for (const auto& f : cfg.faults) {
        result.failures.push_back({f.turbine_id, f.failure_time, std::string(kImsBearingComponent)});
    }
    std::stable_sort(result.failures.begin(), result.failures.end(),
                     [](const FailureRecord& a, const FailureRecord& b) { return a.failure_time < b.failure_time; });
    return result;
}

} // namespace windnbm::sim
