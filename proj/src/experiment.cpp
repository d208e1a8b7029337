#include "windnbm/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "windnbm/errors.hpp"

namespace windnbm {

namespace {

FarmDataset subset(const FarmDataset& d, const std::string& turbine_id)
{
    if (turbine_id.empty()) return d;
    FarmDataset out;
    out.channel_catalog = d.channel_catalog;
    if (const auto* t = d.find(turbine_id)) out.turbines.push_back(*t);
    return out;
}

std::vector<double> pooled_values(const std::vector<ResidualSeries>& r)
{
    std::vector<double> v;
    for (const auto& s : r) v.insert(v.end(), s.residuals.begin(), s.residuals.end());
    return v;
}

std::vector<FailureRecord> failures_in(const std::vector<FailureRecord>& failures, const Interval& iv)
{
    std::vector<FailureRecord> out;
    for (const auto& f : failures) {
        if (iv.start <= f.failure_time && f.failure_time <= iv.end) out.push_back(f);
    }
    return out;
}

DetectorOutcome detect_and_evaluate(std::string name, const std::vector<ResidualSeries>& test_scores,
                                    const std::vector<double>& reference, const ExperimentConfig& cfg,
                                    const std::vector<FailureRecord>& test_failures, const Coverage& coverage)
{
    DetectorOutcome out;
    out.name = std::move(name);
    out.sweep = threshold_sweep(test_scores, reference, cfg.quantiles, cfg.merge_gap_s);
    out.curve = pr_curve(out.sweep, test_failures, cfg.eval, &coverage);
    try {
        out.auprc = auprc(out.curve);
    } catch (const DataError&) {
        out.auprc.reset();
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::uint64_t text_hash(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

int report_error(const std::exception& e, int code)
{
    std::cerr << "error: " << e.what() << '\n';
    return code;
}

template <class F>
int guarded(F&& body)
{
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        return report_error(e, kExitUsage);
    } catch (const DataError& e) {
        return report_error(e, kExitData);
    } catch (const std::exception& e) {
        return report_error(e, kExitInternal);
    }
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const Overrides& o)
{
    if (o.seed) cfg.seed = o.seed;
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    return cfg;
}

} // namespace

ExperimentData load_experiment_data(const ExperimentConfig& cfg)
{
    ExperimentData data;
    if (cfg.scenario) {
        auto scenario = *cfg.scenario;
        if (cfg.seed) scenario.seed = *cfg.seed;
        auto sim = sim::simulate_farm(scenario);
        data.farm = std::move(sim.farm);
        data.failures = std::move(sim.failures);
        data.seed = scenario.seed;
    } else {
        data.farm = load_scada_csv(cfg.scada_path, cfg.resolution_s);
        data.failures = load_failures_csv(cfg.failures_path);
    }
    for (const auto& msg : check_failure_coverage(data.farm, data.failures)) warn(msg);
    return data;
}

std::vector<ResidualSeries> TrainedConfig::residuals(const FarmDataset& d) const
{
    std::vector<ResidualSeries> out;
    for (std::size_t i = 0; i < models.size(); ++i) {
        auto part = compute_residuals(models[i], subset(d, scopes[i]));
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

TrainedConfig train_config(const ExperimentConfig& cfg, const ExperimentData& data, ModelKind kind)
{
    TrainedConfig tc{kind, {}, {}};
    const auto fc = standard_config(kind, cfg.lag_steps);
    if (cfg.pooling == Pooling::Pooled) {
        tc.models.push_back(train_nbm(data.farm, data.failures, fc, cfg.split, cfg.gbdt, cfg.exclusion));
        tc.scopes.emplace_back();
    } else {
        for (const auto& t : data.farm.turbines) {
            tc.models.push_back(
                train_nbm(subset(data.farm, t.turbine_id), data.failures, fc, cfg.split, cfg.gbdt, cfg.exclusion));
            tc.scopes.push_back(t.turbine_id);
        }
    }
    return tc;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    return run_experiment(cfg, load_experiment_data(cfg));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentData& data)
{
    ExperimentResult result;
    result.seed = data.seed;
    const auto split = split_by_period(data.farm, cfg.split.train, cfg.split.validation, cfg.split.test);
    result.test_failures = failures_in(data.failures, cfg.split.test);
    const auto coverage = coverage_of(split.test);
    const int window = cfg.eval.window_days;
    const auto train_clean = exclude_fault_periods(split.train, data.failures, cfg.exclusion);

    for (auto kind : cfg.models) {
        auto trained = train_config(cfg, data, kind);
        ModelOutcome outcome;
        outcome.kind = kind;
        for (const auto& m : trained.models) outcome.best_iterations.push_back(m.model.best_iteration);

        const auto train_healthy =
            healthy_residuals(trained.residuals(train_clean), data.failures, window, cfg.exclusion);
        const auto test_all = trained.residuals(split.test);
        const auto test_healthy = healthy_residuals(test_all, data.failures, window, cfg.exclusion);
        if (pooled_values(test_healthy).empty()) throw DataError("no healthy test samples to evaluate");
        outcome.metrics = {residual_metrics(train_healthy), residual_metrics(test_healthy)};

        const auto reference = pooled_values(smooth_scores(train_healthy, cfg.smoothing_steps));
        outcome.detection = detect_and_evaluate(std::string(to_string(kind)), smooth_scores(test_all, cfg.smoothing_steps),
                                                reference, cfg, result.test_failures, coverage);
        result.models.push_back(std::move(outcome));
        result.trained.push_back(std::move(trained));
    }

    const std::string target(channels::kImsBearingTemp);
    const auto baseline_reference = pooled_values(
        smooth_scores(healthy_residuals(raw_scores(train_clean, target), data.failures, window, cfg.exclusion),
                      cfg.smoothing_steps));
    result.baseline = detect_and_evaluate("baseline", smooth_scores(raw_scores(split.test, target), cfg.smoothing_steps),
                                          baseline_reference, cfg, result.test_failures, coverage);
    return result;
}

const ModelOutcome& find_outcome(const ExperimentResult& r, ModelKind kind)
{
    for (const auto& m : r.models) {
        if (m.kind == kind) return m;
    }
    throw DataError("experiment has no " + std::string(to_string(kind)) + " result");
}

std::string format_metrics_csv(const ExperimentResult& r)
{
    std::ostringstream o;
    o << "model,train_mae,train_rmse,test_mae,test_rmse,trees\n";
    for (const auto& m : r.models) {
        int trees = 0;
        for (int b : m.best_iterations) trees += b;
        o << to_string(m.kind) << ',' << format_double(m.metrics.train.mae) << ',' << format_double(m.metrics.train.rmse)
          << ',' << format_double(m.metrics.test.mae) << ',' << format_double(m.metrics.test.rmse) << ',' << trees
          << '\n';
    }
    return o.str();
}

namespace {

std::string auprc_text(const std::optional<double>& v) { return v ? fixed(*v, 4) : "undefined"; }

std::string format_auprc_csv(const ExperimentResult& r)
{
    std::ostringstream o;
    o << "detector,auprc\n";
    auto row = [&](const DetectorOutcome& d) {
        o << d.name << ',' << (d.auprc ? format_double(*d.auprc) : "undefined") << '\n';
    };
    for (const auto& m : r.models) row(m.detection);
    row(r.baseline);
    return o.str();
}

} // namespace

std::string format_report(const ExperimentConfig& cfg, const ExperimentResult& r)
{
    std::ostringstream o;
    o << kToolVersion << " experiment report\n";
    if (r.seed) o << "simulation seed: " << *r.seed << '\n';
    o << "train: " << format_interval(cfg.split.train) << "\nvalidation: " << format_interval(cfg.split.validation)
      << "\ntest: " << format_interval(cfg.split.test) << "\n\n";
    o << "Regression error on healthy periods (degC)\n";
    o << "              Training           Test\n";
    o << "Model      MAE     RMSE      MAE     RMSE    Trees\n";
    for (const auto& m : r.models) {
        int trees = 0;
        for (int b : m.best_iterations) trees += b;
        char line[160];
        std::snprintf(line, sizeof line, "%-7s %7.3f %8.3f %8.3f %8.3f %8d\n", std::string(to_string(m.kind)).c_str(),
                      m.metrics.train.mae, m.metrics.train.rmse, m.metrics.test.mae, m.metrics.test.rmse, trees);
        o << line;
    }
    o << "\nFault detection: prediction window " << cfg.eval.window_days << " to " << cfg.eval.lead_days
      << " days before failure, merge gap " << cfg.merge_gap_s / kHour << " h, " << cfg.quantiles.size()
      << " threshold quantiles\n";
    o << "test failures: " << r.test_failures.size() << '\n';
    if (r.test_failures.empty()) {
        o << "recall is undefined: there are no failures in the test period\n";
    }
    o << "Detector   AUPRC   max recall\n";
    auto row = [&](const DetectorOutcome& d) {
        double max_recall = 0.0;
        bool any = false;
        for (const auto& p : d.curve.points) {
            if (p.recall) {
                max_recall = std::max(max_recall, *p.recall);
                any = true;
            }
        }
        char line[160];
        std::snprintf(line, sizeof line, "%-9s %7s %12s\n", d.name.c_str(), auprc_text(d.auprc).c_str(),
                      any ? fixed(max_recall, 2).c_str() : "undefined");
        o << line;
    };
    for (const auto& m : r.models) row(m.detection);
    row(r.baseline);
    return o.str();
}

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& r, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir / "models");
    for (const auto& tc : r.trained) {
        for (std::size_t i = 0; i < tc.models.size(); ++i) {
            std::string name(to_string(tc.kind));
            if (!tc.scopes[i].empty()) name += "_" + tc.scopes[i];
            std::ofstream out(dir / "models" / (name + ".model"), std::ios::binary);
            write_nbm_model(out, tc.models[i]);
        }
    }
    write_text(dir / "metrics.csv", format_metrics_csv(r));
    write_text(dir / "auprc.csv", format_auprc_csv(r));
    for (const auto& m : r.models) {
        write_pr_curve_csv(dir / ("pr_" + m.detection.name + ".csv"), m.detection.curve);
        write_episodes_csv(dir / ("episodes_" + m.detection.name + ".csv"), m.detection.sweep);
    }
    write_pr_curve_csv(dir / "pr_baseline.csv", r.baseline.curve);
    write_episodes_csv(dir / "episodes_baseline.csv", r.baseline.sweep);
    write_text(dir / "report.txt", format_report(cfg, r));
}

int cmd_simulate(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                 std::optional<std::uint64_t> seed)
{
    return guarded([&] {
        auto cfg = parse_scenario(ConfigFile::load(scenario));
        if (seed) cfg.seed = *seed;
        const auto sim = sim::simulate_farm(cfg);
        std::filesystem::create_directories(out_dir);
        write_scada_csv(out_dir / "scada.csv", sim.farm);
        write_failures_csv(out_dir / "failures.csv", sim.failures);
        const auto resolved = format_scenario(cfg);
        write_text(out_dir / "scenario.ini", resolved);
        std::ostringstream manifest;
        manifest << "tool = " << kToolVersion << "\nseed = " << cfg.seed << "\nparameter_hash = " << std::hex
                 << text_hash(resolved) << std::dec << "\nturbines = " << sim.farm.turbines.size()
                 << "\nsamples = " << sim.farm.total_samples() << "\nfailures = " << sim.failures.size() << '\n';
        write_text(out_dir / "manifest.txt", manifest.str());
    });
}

int cmd_run_experiment(const std::filesystem::path& config, const Overrides& overrides)
{
    std::filesystem::path dir;
    const int code = guarded([&] {
        const auto cfg = apply_overrides(load_experiment(config), overrides);
        dir = cfg.output_dir;
        std::filesystem::create_directories(dir);
        std::filesystem::remove(dir / "FAILED");
        const auto data = load_experiment_data(cfg);
        auto resolved_cfg = cfg;
        resolved_cfg.seed = data.seed;
        if (cfg.scenario) {
            auto scenario = *cfg.scenario;
            if (data.seed) scenario.seed = *data.seed;
            write_text(dir / "scenario.ini", format_scenario(scenario));
        }
        const auto resolved = format_experiment(resolved_cfg, "scenario.ini");
        write_text(dir / "config.ini", resolved);
        std::ostringstream manifest;
        manifest << "tool = " << kToolVersion << '\n';
        if (data.seed) manifest << "seed = " << *data.seed << '\n';
        manifest << "config_hash = " << std::hex << text_hash(resolved) << std::dec << '\n';
        write_text(dir / "manifest.txt", manifest.str());

        const auto result = run_experiment(cfg, data);
        write_experiment_outputs(cfg, result, dir);
        std::cout << format_report(cfg, result);
    });
    if (code != kExitOk && !dir.empty()) {
        std::error_code ec;
        std::ofstream(dir / "FAILED") << "run failed with exit code " << code << "; outputs in this directory are partial\n";
        (void)ec;
    }
    return code;
}

int cmd_train(const std::filesystem::path& config, const Overrides& overrides)
{
    return guarded([&] {
        const auto cfg = apply_overrides(load_experiment(config), overrides);
        const auto data = load_experiment_data(cfg);
        const auto split = split_by_period(data.farm, cfg.split.train, cfg.split.validation, cfg.split.test);
        const auto train_clean = exclude_fault_periods(split.train, data.failures, cfg.exclusion);
        std::filesystem::create_directories(cfg.output_dir / "models");
        std::ostringstream report;
        report << kToolVersion << " training report\n";
        if (data.seed) report << "simulation seed: " << *data.seed << '\n';
        report << "gbdt: max_trees=" << cfg.gbdt.max_trees << " learning_rate=" << format_double(cfg.gbdt.learning_rate)
               << " max_depth=" << cfg.gbdt.max_depth << " min_samples_leaf=" << cfg.gbdt.min_samples_leaf
               << " n_bins=" << cfg.gbdt.n_bins << " early_stopping_rounds=" << cfg.gbdt.early_stopping_rounds << '\n';
        report << "exclusion: before_days=" << cfg.exclusion.before_days << " after_days=" << cfg.exclusion.after_days
               << "\n\nmodel,train_mae,train_rmse,test_mae,test_rmse,trees\n";
        for (auto kind : cfg.models) {
            const auto tc = train_config(cfg, data, kind);
            int trees = 0;
            for (std::size_t i = 0; i < tc.models.size(); ++i) {
                std::string name(to_string(kind));
                if (!tc.scopes[i].empty()) name += "_" + tc.scopes[i];
                std::ofstream out(cfg.output_dir / "models" / (name + ".model"), std::ios::binary);
                write_nbm_model(out, tc.models[i]);
                trees += tc.models[i].model.best_iteration;
            }
            const auto tr = healthy_residuals(tc.residuals(train_clean), data.failures, cfg.eval.window_days, cfg.exclusion);
            const auto te = healthy_residuals(tc.residuals(split.test), data.failures, cfg.eval.window_days, cfg.exclusion);
            const auto a = residual_metrics(tr);
            const auto b = residual_metrics(te);
            report << to_string(kind) << ',' << fixed(a.mae, 4) << ',' << fixed(a.rmse, 4) << ',' << fixed(b.mae, 4) << ','
                   << fixed(b.rmse, 4) << ',' << trees << '\n';
        }
        write_text(cfg.output_dir / "train_report.txt", report.str());
        std::cout << report.str();
    });
}

int cmd_detect(const DetectOptions& opt)
{
    return guarded([&] {
        std::ifstream in(opt.model);
        if (!in) throw DataError("cannot open model '" + opt.model.string() + "'");
        const auto model = read_nbm_model(in);
        const auto farm = load_scada_csv(opt.scada, opt.resolution_s);
        const auto failures = opt.failures.empty() ? std::vector<FailureRecord>{} : load_failures_csv(opt.failures);
        const auto& split = model.metadata.split;
        const auto scored_interval = opt.interval.value_or(split.test);

        auto restrict = [&](const Interval& iv) {
            FarmDataset out;
            out.channel_catalog = farm.channel_catalog;
            for (const auto& t : farm.turbines) {
                out.turbines.push_back(t.filter_rows([&](std::size_t i) { return iv.contains(t.timestamps[i]); }));
            }
            return out;
        };
        const auto scored = restrict(scored_interval);
        const auto train = exclude_fault_periods(restrict(split.train), failures, model.metadata.exclusion);

        const auto& target = model.config.target;
        std::vector<ResidualSeries> scores;
        std::vector<ResidualSeries> reference;
        if (opt.baseline) {
            scores = raw_scores(scored, target);
            reference = raw_scores(train, target);
        } else {
            scores = compute_residuals(model, scored);
            reference = compute_residuals(model, train);
        }
        reference = smooth_scores(healthy_residuals(reference, failures, opt.window_days, model.metadata.exclusion),
                                  opt.smoothing_steps);
        scores = smooth_scores(scores, opt.smoothing_steps);

        std::vector<SweepPoint> sweep;
        if (!opt.thresholds.empty()) {
            auto thresholds = opt.thresholds;
            std::sort(thresholds.begin(), thresholds.end());
            thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
            sweep = absolute_sweep(scores, thresholds, opt.merge_gap_s);
        } else {
            const auto values = pooled_values(reference);
            sweep = threshold_sweep(scores, values, opt.quantiles.empty() ? default_quantiles() : opt.quantiles,
                                    opt.merge_gap_s);
        }
        if (!opt.out.parent_path().empty()) std::filesystem::create_directories(opt.out.parent_path());
        write_episodes_csv(opt.out, sweep);
    });
}

int cmd_evaluate(const EvaluateOptions& opt)
{
    return guarded([&] {
        opt.eval.validate();
        const auto sweep = load_episodes_csv(opt.episodes);
        const auto failures = load_failures_csv(opt.failures);
        std::optional<Coverage> coverage;
        if (!opt.scada.empty()) coverage = coverage_of(load_scada_csv(opt.scada, opt.resolution_s));
        const auto curve = pr_curve(sweep, failures, opt.eval, coverage ? &*coverage : nullptr);
        std::filesystem::create_directories(opt.out_dir);
        write_pr_curve_csv(opt.out_dir / "pr.csv", curve);
        std::ostringstream counts;
        counts << "failures = " << failures.size() << "\nwindow_days = " << opt.eval.window_days
               << "\nlead_days = " << opt.eval.lead_days << "\nblackout_days = " << opt.eval.blackout_days << '\n';
        try {
            counts << "auprc = " << format_double(auprc(curve)) << "\n\n";
        } catch (const DataError&) {
            counts << "auprc = undefined\n\n";
        }
        write_counts(counts, curve);
        write_text(opt.out_dir / "counts.txt", counts.str());
        std::cout << counts.str();
    });
}

} // namespace windnbm
