#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "windnbm/scada_data.hpp"
#include "windnbm/simulator.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return WINDNBM_SOURCE_DIR; }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("windnbm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const std::string kHeader =
    "timestamp,turbine_id,wind_speed,active_power,rotor_speed,pitch_angle,ambient_temp,"
    "gearbox_hss_bearing_temp,gearbox_ims_bearing_temp\n";

// Gap-free series with every channel filled from a deterministic RNG.
inline windnbm::TurbineSeries random_series(const std::string& id, windnbm::Timestamp start, std::size_t n,
                                            std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    windnbm::TurbineSeries s;
    s.turbine_id = id;
    for (std::size_t i = 0; i < n; ++i) s.timestamps.push_back(start + static_cast<std::int64_t>(i) * 600);
    for (auto name : windnbm::kScadaChannels) {
        windnbm::Channel c{std::string(name), {}};
        for (std::size_t i = 0; i < n; ++i) c.values.push_back(10.0 + g(rng));
        s.channels.push_back(std::move(c));
    }
    return s;
}

// Two turbines, three years, one fault in the last year: small enough for unit tests.
inline windnbm::sim::SimConfig small_scenario()
{
    auto cfg = windnbm::sim::default_config();
    cfg.n_turbines = 2;
    cfg.faults.resize(2);
    cfg.faults[1].severity = 0.5;
    cfg.faults[1].failure_time = windnbm::parse_rfc3339("2012-06-01T00:00:00Z");
    return cfg;
}

} // namespace testing_support
