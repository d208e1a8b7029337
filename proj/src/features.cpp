#include "windnbm/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "windnbm/errors.hpp"

namespace windnbm {

std::string_view to_string(FeatureKind k)
{
    switch (k) {
    case FeatureKind::Causal: return "causal";
    case FeatureKind::Simultaneity: return "simultaneity";
    case FeatureKind::AutoregressiveTarget: return "autoregressive";
    }
    return "?";
}

std::string_view to_string(ModelKind k)
{
    switch (k) {
    case ModelKind::CNBM: return "CNBM";
    case ModelKind::SNBM: return "SNBM";
    case ModelKind::ACNBM: return "ACNBM";
    case ModelKind::ASNBM: return "ASNBM";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name)
{
    for (auto k : {ModelKind::CNBM, ModelKind::SNBM, ModelKind::ACNBM, ModelKind::ASNBM}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown model '" + std::string(name) + "' (expected CNBM, SNBM, ACNBM or ASNBM)");
}

void FeatureConfig::validate() const
{
    const std::string label(to_string(name));
    const bool autoregressive = name == ModelKind::ACNBM || name == ModelKind::ASNBM;
    const bool simultaneity = name == ModelKind::SNBM || name == ModelKind::ASNBM;
    if (target.empty()) throw ConfigError(label + ": empty target");
    if (features.empty()) throw ConfigError(label + ": no features");
    std::size_t n_sim = 0;
    std::size_t n_ar = 0;
    for (const auto& f : features) {
        if (f.kind == FeatureKind::Simultaneity) ++n_sim;
        if (f.kind == FeatureKind::AutoregressiveTarget) {
            ++n_ar;
            if (f.channel != target) throw ConfigError(label + ": autoregressive entry must name the target");
        } else if (f.channel == target) {
            throw ConfigError(label + ": target used as a non-autoregressive feature");
        }
    }
    if (n_sim != (simultaneity ? 1U : 0U)) {
        throw ConfigError(label + (simultaneity ? ": needs exactly one simultaneity feature"
                                                : ": must not contain simultaneity features"));
    }
    if (autoregressive) {
        if (lag_steps.empty() || n_ar != 1) throw ConfigError(label + ": needs one autoregressive entry and lag steps");
        for (int k : lag_steps) {
            if (k <= 0) throw ConfigError(label + ": lag steps must be positive");
        }
    } else if (!lag_steps.empty() || n_ar != 0) {
        throw ConfigError(label + ": non-autoregressive configuration must have no lags");
    }
}

std::vector<std::string> FeatureConfig::column_names() const
{
    std::vector<std::string> names;
    for (const auto& f : features) {
        if (f.kind == FeatureKind::AutoregressiveTarget) {
            for (int k : lag_steps) names.push_back(f.channel + "_lag" + std::to_string(k));
        } else {
            names.push_back(f.channel);
        }
    }
    return names;
}

std::vector<std::string> causal_channels()
{
    return {std::string(channels::kRotorSpeed), std::string(channels::kActivePower), std::string(channels::kPitchAngle),
            std::string(channels::kWindSpeed), std::string(channels::kAmbientTemp)};
}

FeatureConfig standard_config(ModelKind kind, const std::vector<int>& lag_steps)
{
    FeatureConfig cfg;
    cfg.name = kind;
    cfg.target = std::string(channels::kImsBearingTemp);
    for (auto& c : causal_channels()) cfg.features.push_back({c, FeatureKind::Causal});
    if (kind == ModelKind::SNBM || kind == ModelKind::ASNBM) {
        cfg.features.push_back({std::string(channels::kHssBearingTemp), FeatureKind::Simultaneity});
    }
    if (kind == ModelKind::ACNBM || kind == ModelKind::ASNBM) {
        if (lag_steps.empty()) throw ConfigError("autoregressive configurations need lag steps");
        cfg.features.push_back({cfg.target, FeatureKind::AutoregressiveTarget});
        cfg.lag_steps = lag_steps;
    }
    cfg.validate();
    return cfg;
}

std::vector<FeatureConfig> standard_configs(const std::vector<int>& lag_steps)
{
    return {standard_config(ModelKind::CNBM, lag_steps), standard_config(ModelKind::SNBM, lag_steps),
            standard_config(ModelKind::ACNBM, lag_steps), standard_config(ModelKind::ASNBM, lag_steps)};
}

double pearson_correlation(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw DataError("correlation inputs differ in length");
    if (x.size() < 2) throw DataError("correlation needs at least two samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw DataError("correlation undefined: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_correlation(std::span<const Sample> x, std::span<const Sample> y)
{
    if (x.size() != y.size()) throw DataError("correlation inputs differ in length");
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) {
            xs.push_back(*x[i]);
            ys.push_back(*y[i]);
        }
    }
    return pearson_correlation(std::span<const double>(xs), std::span<const double>(ys));
}

std::vector<ChannelCorrelation> rank_channels_by_correlation(const FarmDataset& d, std::string_view target)
{
    if (std::find(d.channel_catalog.begin(), d.channel_catalog.end(), target) == d.channel_catalog.end()) {
        throw DataError("target channel '" + std::string(target) + "' not in dataset");
    }
    std::vector<Sample> pooled_target;
    for (const auto& t : d.turbines) {
        const auto& col = t.channel(target);
        pooled_target.insert(pooled_target.end(), col.begin(), col.end());
    }
    std::vector<ChannelCorrelation> ranking;
    for (const auto& name : d.channel_catalog) {
        if (name == target) continue;
        std::vector<Sample> pooled;
        pooled.reserve(pooled_target.size());
        for (const auto& t : d.turbines) {
            const auto& col = t.channel(name);
            pooled.insert(pooled.end(), col.begin(), col.end());
        }
        try {
            ranking.push_back({name, std::abs(pearson_correlation(pooled, pooled_target))});
        } catch (const DataError& e) {
            warn("skipping channel " + name + ": " + e.what());
        }
    }
    std::sort(ranking.begin(), ranking.end(), [](const ChannelCorrelation& a, const ChannelCorrelation& b) {
        if (a.abs_r != b.abs_r) return a.abs_r > b.abs_r;
        return a.channel < b.channel;
    });
    return ranking;
}

DesignMatrix build_design_matrix(const FarmDataset& d, const FeatureConfig& cfg)
{
    cfg.validate();
    for (const auto& f : cfg.features) {
        if (std::find(d.channel_catalog.begin(), d.channel_catalog.end(), f.channel) == d.channel_catalog.end()) {
            throw DataError("unknown channel '" + f.channel + "' for " + std::string(to_string(cfg.name)));
        }
    }
    if (std::find(d.channel_catalog.begin(), d.channel_catalog.end(), cfg.target) == d.channel_catalog.end()) {
        throw DataError("unknown target channel '" + cfg.target + "'");
    }

    DesignMatrix m;
    m.feature_names = cfg.column_names();
    const std::size_t n_cols = m.feature_names.size();

    std::vector<const TurbineSeries*> order;
    for (const auto& t : d.turbines) order.push_back(&t);
    std::sort(order.begin(), order.end(),
              [](const TurbineSeries* a, const TurbineSeries* b) { return a->turbine_id < b->turbine_id; });

    std::vector<double> row(n_cols);
    for (const auto* t : order) {
        const auto turbine_index = static_cast<std::uint32_t>(m.turbine_ids.size());
        m.turbine_ids.push_back(t->turbine_id);
        const auto& target = t->channel(cfg.target);
        std::vector<const std::vector<Sample>*> inputs;
        for (const auto& f : cfg.features) inputs.push_back(&t->channel(f.channel));

        for (std::size_t i = 0; i < t->size(); ++i) {
            if (!target[i]) continue;
            bool complete = true;
            std::size_t c = 0;
            for (std::size_t f = 0; f < cfg.features.size() && complete; ++f) {
                if (cfg.features[f].kind != FeatureKind::AutoregressiveTarget) {
                    const auto& v = (*inputs[f])[i];
                    if (!v) complete = false;
                    else row[c++] = *v;
                    continue;
                }
                for (int k : cfg.lag_steps) {
                    const auto lag = static_cast<std::size_t>(k);
                    // The lagged sample must sit exactly k steps back with no gap in between.
                    if (i < lag || t->timestamps[i] - t->timestamps[i - lag] != k * t->resolution_s ||
                        !target[i - lag]) {
                        complete = false;
                        break;
                    }
                    row[c++] = *target[i - lag];
                }
            }
            if (!complete) continue;
            m.values.insert(m.values.end(), row.begin(), row.end());
            m.target.push_back(*target[i]);
            m.row_turbine.push_back(turbine_index);
            m.row_time.push_back(t->timestamps[i]);
        }
    }
    return m;
}

} // namespace windnbm
