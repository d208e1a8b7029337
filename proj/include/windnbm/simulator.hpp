#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "windnbm/scada_data.hpp"
#include "windnbm/time.hpp"

namespace windnbm::sim {

// Operating envelope and two-node gearbox thermal model of one turbine.
// The thermal coefficients are fractions per resolution step.
struct TurbineParams {
    double cut_in = 3.5;        // m/s
    double rated = 12.0;        // m/s
    double cut_out = 25.0;      // m/s
    double rated_power = 2000;  // kW
    double rated_rotor_rpm = 16.0;
    double a_ims = 1.75e-3;     // degC per kW per step
    double a_hss = 1.85e-3;
    double h = 0.85;            // IMS <-> HSS heat transfer
    double c = 0.10;            // node <-> ambient heat loss

    // Throws ConfigError, including for unstable h + c >= 1.
    void validate() const;
};

struct WindParams {
    double mean = 9.5;              // m/s
    double stddev = 2.5;            // stationary std of the AR(1) anomaly
    double lag1_correlation = 0.9995;
    double seasonal_amplitude = 0.15;  // relative, windier in winter
    double diurnal_amplitude = 0.02;   // relative, windier in the afternoon
};

struct AmbientParams {
    double mean = 9.5;
    double seasonal_amplitude = 8.0;
    double diurnal_amplitude = 0.5;
    double weather_stddev = 2.5;
    double weather_lag1_correlation = 0.9995;
};

struct FaultScenario {
    std::string turbine_id;
    Timestamp failure_time;
    int onset_lead_days = 60;
    double severity = 0.5;

    void validate() const;
};

// Standard deviations of the additive Gaussian measurement noise.
struct NoiseLevels {
    double wind_speed = 0.4;
    double active_power = 15.0;
    double rotor_speed = 0.1;
    double pitch_angle = 0.3;
    double ambient_temp = 0.2;
    double hss_bearing_temp = 0.1;
    double ims_bearing_temp = 1.0;
};

struct SimConfig {
    std::uint64_t seed = 42;
    int n_turbines = 5;
    Interval period{};
    std::int64_t resolution_s = kDefaultResolution;
    TurbineParams params;
    WindParams wind;
    AmbientParams ambient;
    NoiseLevels noise;
    std::vector<FaultScenario> faults;
    // Days the turbine stays down after a failure; negative keeps it down until the end.
    int repair_gap_days = 30;
    // Probability that an individual channel sample is reported missing.
    double missing_rate = 0.0005;

    void validate() const;
};

// Default desk-scale scenario: 5 turbines over 2010-2012, one IMS fault per turbine in 2012.
SimConfig default_config();

std::string turbine_name(int index);

struct ThermalState {
    double t_ims = 0.0;
    double t_hss = 0.0;
};

struct ThermalInputs {
    double power_kw = 0.0;
    double ambient = 0.0;
    double fault_multiplier = 1.0;
};

ThermalState thermal_step(const ThermalState& state, const ThermalInputs& in, const TurbineParams& p);

// Analytic fixed point of thermal_step for constant inputs.
ThermalState thermal_steady_state(const ThermalInputs& in, const TurbineParams& p);

double power_curve(double wind, const TurbineParams& p);
double rotor_speed_curve(double wind, const TurbineParams& p);
double pitch_curve(double wind, const TurbineParams& p);

// Nonnegative AR(1) wind with seasonal and diurnal modulation of the mean.
std::vector<double> wind_process(std::uint64_t seed, std::size_t n_steps, std::int64_t resolution_s,
                                 Timestamp start = {}, const WindParams& wp = {});

// 1 before onset, linear to 1 + severity at the failure time.
double fault_multiplier(Timestamp t, const FaultScenario& f);

struct SimulationResult {
    FarmDataset farm;
    std::vector<FailureRecord> failures;
};

SimulationResult simulate_farm(const SimConfig& cfg);

} // namespace windnbm::sim
