#include "windnbm/nbm.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "windnbm/errors.hpp"

namespace windnbm {

NbmModel train_nbm(const FarmDataset& d, const std::vector<FailureRecord>& failures, const FeatureConfig& cfg,
                   const SplitSpec& split, const TrainParams& params, const ExclusionSettings& exclusion)
{
    const auto parts = split_by_period(d, split.train, split.validation, split.test);
    const auto train = exclude_fault_periods(parts.train, failures, exclusion);
    const auto validation = exclude_fault_periods(parts.validation, failures, exclusion);
    const auto train_m = build_design_matrix(train, cfg);
    const auto valid_m = build_design_matrix(validation, cfg);
    if (train_m.rows() == 0) {
        throw DataError(std::string(to_string(cfg.name)) + ": no complete training rows after fault exclusion");
    }
    if (valid_m.rows() == 0) {
        throw DataError(std::string(to_string(cfg.name)) + ": no complete validation rows after fault exclusion");
    }
    NbmModel m;
    m.config = cfg;
    m.model = fit(train_m, valid_m, params);
    m.metadata = {split, exclusion, params, fingerprint(d), train_m.rows(), valid_m.rows()};
    return m;
}

std::vector<ResidualSeries> compute_residuals(const NbmModel& m, const FarmDataset& d)
{
    const auto matrix = build_design_matrix(d, m.config);
    if (matrix.feature_names != m.model.feature_names) throw DataError("model and data feature columns differ");
    const auto pred = predict(m.model, matrix);

    std::vector<ResidualSeries> out;
    for (const auto& t : d.turbines) out.push_back({t.turbine_id, {}, {}});
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto& id = matrix.turbine_ids[matrix.row_turbine[i]];
        auto it = std::find_if(out.begin(), out.end(), [&](const ResidualSeries& s) { return s.turbine_id == id; });
        it->timestamps.push_back(matrix.row_time[i]);
        it->residuals.push_back(matrix.target[i] - pred[i]);
    }
    return out;
}

std::vector<ResidualSeries> healthy_residuals(const std::vector<ResidualSeries>& r,
                                              const std::vector<FailureRecord>& failures, int window_days,
                                              const ExclusionSettings& exclusion)
{
    std::vector<ResidualSeries> out;
    for (const auto& s : r) {
        std::vector<std::pair<Timestamp, Timestamp>> unhealthy;
        for (const auto& f : failures) {
            if (f.turbine_id != s.turbine_id) continue;
            unhealthy.emplace_back(f.failure_time - days(window_days), f.failure_time);
            unhealthy.emplace_back(f.failure_time - days(exclusion.before_days),
                                   f.failure_time + days(exclusion.after_days));
        }
        ResidualSeries h{s.turbine_id, {}, {}};
        for (std::size_t i = 0; i < s.timestamps.size(); ++i) {
            const auto t = s.timestamps[i];
            const bool bad =
                std::any_of(unhealthy.begin(), unhealthy.end(), [&](const auto& e) { return e.first <= t && t <= e.second; });
            if (bad) continue;
            h.timestamps.push_back(t);
            h.residuals.push_back(s.residuals[i]);
        }
        out.push_back(std::move(h));
    }
    return out;
}

RegressionMetrics residual_metrics(const std::vector<ResidualSeries>& r)
{
    std::vector<double> errors;
    for (const auto& s : r) errors.insert(errors.end(), s.residuals.begin(), s.residuals.end());
    const std::vector<double> zeros(errors.size(), 0.0);
    return regression_metrics(zeros, errors);
}

RegressionReport evaluate_regression(const NbmModel& m, const DatasetSplit& split,
                                     const std::vector<FailureRecord>& failures, int window_days)
{
    const auto train = healthy_residuals(compute_residuals(m, split.train), failures, window_days, m.metadata.exclusion);
    const auto test = healthy_residuals(compute_residuals(m, split.test), failures, window_days, m.metadata.exclusion);
    auto count = [](const std::vector<ResidualSeries>& r) {
        std::size_t n = 0;
        for (const auto& s : r) n += s.residuals.size();
        return n;
    };
    if (count(train) == 0) throw DataError("no healthy training samples to evaluate");
    if (count(test) == 0) throw DataError("no healthy test samples to evaluate");
    return {residual_metrics(train), residual_metrics(test)};
}

void write_nbm_model(std::ostream& out, const NbmModel& m)
{
    out << "windnbm-nbm 1\n";
    out << "config " << to_string(m.config.name) << " target " << m.config.target << '\n';
    out << "inputs " << m.config.features.size();
    for (const auto& f : m.config.features) out << ' ' << f.channel << ':' << to_string(f.kind);
    out << '\n';
    out << "lag_steps " << m.config.lag_steps.size();
    for (int k : m.config.lag_steps) out << ' ' << k;
    out << '\n';
    const auto& md = m.metadata;
    out << "split_train " << format_interval(md.split.train) << '\n';
    out << "split_validation " << format_interval(md.split.validation) << '\n';
    out << "split_test " << format_interval(md.split.test) << '\n';
    out << "exclusion " << md.exclusion.before_days << ' ' << md.exclusion.after_days << '\n';
    out << "data_fingerprint " << md.data_fingerprint << '\n';
    out << "rows " << md.train_rows << ' ' << md.validation_rows << '\n';
    write_model(out, m.model);
}

namespace {

std::string read_keyword_value(std::istream& in, const std::string& keyword)
{
    std::string word;
    std::string value;
    if (!(in >> word >> value) || word != keyword) throw DataError("model file: expected '" + keyword + "'");
    return value;
}

FeatureKind parse_kind(const std::string& s)
{
    for (auto k : {FeatureKind::Causal, FeatureKind::Simultaneity, FeatureKind::AutoregressiveTarget}) {
        if (to_string(k) == s) return k;
    }
    throw DataError("model file: unknown feature kind '" + s + "'");
}

} // namespace

NbmModel read_nbm_model(std::istream& in)
{
    NbmModel m;
    if (read_keyword_value(in, "windnbm-nbm") != "1") throw DataError("model file: unsupported version");
    m.config.name = parse_model_kind(read_keyword_value(in, "config"));
    m.config.target = read_keyword_value(in, "target");
    const auto n_inputs = std::stoul(read_keyword_value(in, "inputs"));
    for (std::size_t i = 0; i < n_inputs; ++i) {
        std::string item;
        in >> item;
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) throw DataError("model file: malformed input '" + item + "'");
        m.config.features.push_back({item.substr(0, colon), parse_kind(item.substr(colon + 1))});
    }
    const auto n_lags = std::stoul(read_keyword_value(in, "lag_steps"));
    for (std::size_t i = 0; i < n_lags; ++i) {
        int k = 0;
        in >> k;
        m.config.lag_steps.push_back(k);
    }
    auto& md = m.metadata;
    md.split.train = parse_interval(read_keyword_value(in, "split_train"));
    md.split.validation = parse_interval(read_keyword_value(in, "split_validation"));
    md.split.test = parse_interval(read_keyword_value(in, "split_test"));
    md.exclusion.before_days = std::stoi(read_keyword_value(in, "exclusion"));
    in >> md.exclusion.after_days;
    md.data_fingerprint = std::stoull(read_keyword_value(in, "data_fingerprint"));
    md.train_rows = std::stoull(read_keyword_value(in, "rows"));
    in >> md.validation_rows;
    if (!in) throw DataError("model file: truncated header");
    m.model = read_model(in);
    md.params = m.model.params;
    m.config.validate();
    return m;
}

} // namespace windnbm
