// Command-line front end: simulate, train, detect, evaluate, run-experiment.
#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "windnbm/errors.hpp"
#include "windnbm/experiment.hpp"

using namespace windnbm;

int main(int argc, char** argv)
{
    CLI::App app{"Normal behaviour models for SCADA-based wind turbine fault detection"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string scenario;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic wind farm and its failure log");
    simulate->add_option("scenario", scenario, "Scenario config file")->required()->check(CLI::ExistingFile);
    simulate->add_option("-o,--out", out_dir, "Output directory (created if missing)")->required();
    simulate->add_option("--seed", seed, "Override the scenario seed");

    std::string config;
    std::optional<std::string> config_out;
    auto* run = app.add_subcommand("run-experiment", "Train all models, sweep thresholds and evaluate detection");
    run->add_option("config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", config_out, "Output directory (overrides [run] output_dir)");
    run->add_option("--seed", seed, "Override the simulation seed");

    auto* train = app.add_subcommand("train", "Train the configured models and report regression metrics");
    train->add_option("config", config, "Experiment config file")->required()->check(CLI::ExistingFile);
    train->add_option("-o,--out", config_out, "Output directory (overrides [run] output_dir)");
    train->add_option("--seed", seed, "Override the simulation seed");

    DetectOptions det;
    std::string det_model, det_scada, det_failures, det_out, det_interval;
    double merge_gap_hours = 72;
    auto* detect = app.add_subcommand("detect", "Threshold residuals (or raw temperatures) into alarm episodes");
    detect->add_option("--model", det_model, "Model file written by train")->required()->check(CLI::ExistingFile);
    detect->add_option("--scada", det_scada, "SCADA CSV")->required()->check(CLI::ExistingFile);
    detect->add_option("--failures", det_failures, "Failures CSV, excluded from the healthy reference")
        ->check(CLI::ExistingFile);
    detect->add_option("-o,--out", det_out, "Episode CSV to write")->required();
    detect->add_option("--quantiles", det.quantiles, "Quantiles of the healthy training reference")->delimiter(',');
    detect->add_option("--thresholds", det.thresholds, "Absolute thresholds in degC")->delimiter(',');
    detect->add_flag("--baseline", det.baseline, "Threshold the raw target temperature");
    detect->add_option("--interval", det_interval, "Scored period START/END (default: model test period)");
    detect->add_option("--merge-gap-hours", merge_gap_hours, "Alarm merge gap");
    detect->add_option("--smoothing-steps", det.smoothing_steps, "Trailing moving-average length (1 = off)");
    detect->add_option("--resolution", det.resolution_s, "SCADA resolution in seconds");

    EvaluateOptions ev;
    std::string ev_episodes, ev_failures, ev_scada, ev_out;
    auto* evaluate = app.add_subcommand("evaluate", "Score alarm episodes against failures");
    evaluate->add_option("--episodes", ev_episodes, "Episode CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--failures", ev_failures, "Failures CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--scada", ev_scada, "SCADA CSV for the data-coverage check")->check(CLI::ExistingFile);
    evaluate->add_option("-o,--out", ev_out, "Output directory")->required();
    evaluate->add_option("--window-days", ev.eval.window_days, "Fault-state horizon before failure");
    evaluate->add_option("--lead-days", ev.eval.lead_days, "Minimum useful warning time");
    evaluate->add_option("--blackout-days", ev.eval.blackout_days, "Ignored period after a failure");
    evaluate->add_option("--resolution", ev.resolution_s, "SCADA resolution in seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    Overrides overrides;
    overrides.seed = seed;
    if (config_out) overrides.output_dir = *config_out;

    if (simulate->parsed()) return cmd_simulate(scenario, out_dir, seed);
    if (run->parsed()) return cmd_run_experiment(config, overrides);
    if (train->parsed()) return cmd_train(config, overrides);
    if (detect->parsed()) {
        det.model = det_model;
        det.scada = det_scada;
        det.failures = det_failures;
        det.out = det_out;
        det.merge_gap_s = static_cast<std::int64_t>(merge_gap_hours * kHour);
        if (!det_interval.empty()) {
            try {
                det.interval = parse_interval(det_interval);
            } catch (const DataError& e) {
                std::cerr << "error: --interval: " << e.what() << '\n';
                return kExitUsage;
            }
        }
        return cmd_detect(det);
    }
    if (evaluate->parsed()) {
        ev.episodes = ev_episodes;
        ev.failures = ev_failures;
        ev.scada = ev_scada;
        ev.out_dir = ev_out;
        return cmd_evaluate(ev);
    }
    return kExitUsage;
}
