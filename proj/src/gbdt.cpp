#include "windnbm/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "windnbm/errors.hpp"
#include "windnbm/kernels.hpp"

namespace windnbm {

double RegressionTree::predict(std::span<const double> x) const
{
    if (nodes.empty()) return 0.0;
    const Node* n = &nodes[0];
    while (!n->is_leaf()) n = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left : n->right)];
    return n->value;
}

int RegressionTree::depth() const
{
    if (nodes.empty()) return 0;
    int deepest = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const auto& n = nodes[static_cast<std::size_t>(id)];
        if (!n.is_leaf()) {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return deepest;
}

void TrainParams::validate() const
{
    if (max_trees <= 0 || max_depth <= 0 || min_samples_leaf <= 0 || early_stopping_rounds <= 0) {
        throw ConfigError("training parameters must be positive");
    }
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must be in (0, 1]");
    if (n_bins < 2 || n_bins > 256) throw ConfigError("n_bins must be in [2, 256]");
}

std::vector<double> compute_bin_edges(std::span<const double> column, int n_bins)
{
    std::vector<double> sorted(column.begin(), column.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() <= static_cast<std::size_t>(n_bins)) return distinct;

    std::vector<double> edges;
    const std::size_t n = sorted.size();
    for (int k = 1; k < n_bins; ++k) {
        const std::size_t rank = (static_cast<std::size_t>(k) * n + static_cast<std::size_t>(n_bins) - 1) /
                                 static_cast<std::size_t>(n_bins);
        const double v = sorted[std::max<std::size_t>(rank, 1) - 1];
        if (edges.empty() || v > edges.back()) edges.push_back(v);
    }
    return edges;
}

namespace {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    int bin = -1;
};

// Grows one least-squares tree over binned rows; leaf values are mean residuals.
class TreeGrower {
public:
    TreeGrower(const kernels::BinnedMatrix& binned, const std::vector<std::vector<double>>& edges,
               const TrainParams& params)
        : binned_(binned), edges_(edges), params_(params), stride_(static_cast<std::size_t>(params.n_bins))
    {
    }

    // Fills leaf_of_row-compatible row partition; returns the tree.
    RegressionTree grow(std::span<const double> residual, std::vector<std::uint32_t>& rows,
                        std::vector<std::pair<std::size_t, std::size_t>>& leaf_ranges,
                        std::vector<double>& leaf_values)
    {
        RegressionTree tree;
        leaf_ranges.clear();
        leaf_values.clear();
        struct Work {
            int node;
            std::size_t begin;
            std::size_t end;
            int depth;
            std::vector<kernels::HistogramBin> hist;
        };
        std::vector<Work> queue;
        tree.nodes.emplace_back();
        queue.push_back({0, 0, rows.size(), 0, histogram(residual, {rows.data(), rows.size()})});

        // Breadth-first, so node numbering depends only on the data.
        for (std::size_t q = 0; q < queue.size(); ++q) {
            Work w = std::move(queue[q]);
            const std::span<std::uint32_t> node_rows(rows.data() + w.begin, w.end - w.begin);
            double sum = 0.0;
            for (auto r : node_rows) sum += residual[r];
            const double mean = sum / static_cast<double>(node_rows.size());

            SplitCandidate best;
            if (w.depth < params_.max_depth && node_rows.size() >= 2 * static_cast<std::size_t>(params_.min_samples_leaf)) {
                best = find_split(w.hist, sum, node_rows.size());
            }
            if (best.feature < 0) {
                auto& node = tree.nodes[static_cast<std::size_t>(w.node)];
                node.value = mean;
                leaf_ranges.emplace_back(w.begin, w.end);
                leaf_values.push_back(mean);
                continue;
            }

            const auto f = static_cast<std::size_t>(best.feature);
            const auto col = binned_.column(f);
            const auto split_bin = static_cast<std::uint8_t>(best.bin);
            auto mid = std::stable_partition(node_rows.begin(), node_rows.end(),
                                             [&](std::uint32_t r) { return col[r] <= split_bin; });
            const std::size_t n_left = static_cast<std::size_t>(mid - node_rows.begin());

            const int left_id = static_cast<int>(tree.nodes.size());
            const int right_id = left_id + 1;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[static_cast<std::size_t>(w.node)];
            node.feature = best.feature;
            node.threshold = edges_[f][static_cast<std::size_t>(best.bin)];
            node.left = left_id;
            node.right = right_id;
            node.value = mean;

            // Build the smaller child directly and derive the sibling by subtraction.
            const std::span<const std::uint32_t> left_rows(rows.data() + w.begin, n_left);
            const std::span<const std::uint32_t> right_rows(rows.data() + w.begin + n_left, node_rows.size() - n_left);
            const bool left_small = left_rows.size() <= right_rows.size();
            auto small = histogram(residual, left_small ? left_rows : right_rows);
            auto large = std::move(w.hist);
            for (std::size_t i = 0; i < large.size(); ++i) {
                large[i].sum -= small[i].sum;
                large[i].count -= small[i].count;
            }
            auto& left_hist = left_small ? small : large;
            auto& right_hist = left_small ? large : small;
            queue.push_back({left_id, w.begin, w.begin + n_left, w.depth + 1, std::move(left_hist)});
            queue.push_back({right_id, w.begin + n_left, w.end, w.depth + 1, std::move(right_hist)});
        }
        return tree;
    }

private:
    std::vector<kernels::HistogramBin> histogram(std::span<const double> residual, std::span<const std::uint32_t> rows)
    {
        std::vector<kernels::HistogramBin> hist(binned_.cols * stride_);
        kernels::build_histogram_parallel(binned_, rows, residual, stride_, hist);
        return hist;
    }

    SplitCandidate find_split(const std::vector<kernels::HistogramBin>& hist, double sum, std::size_t n) const
    {
        const std::size_t cols = binned_.cols;
        std::vector<SplitCandidate> per_feature(cols);
        const double parent = sum * sum / static_cast<double>(n);
        const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
        const auto n_cols = static_cast<std::ptrdiff_t>(cols);
#pragma omp parallel for schedule(static) if (n > 4096)
        for (std::ptrdiff_t fi = 0; fi < n_cols; ++fi) {
            const auto f = static_cast<std::size_t>(fi);
            const auto* h = hist.data() + f * stride_;
            const std::size_t n_edges = edges_[f].size();
            double left_sum = 0.0;
            std::size_t left_n = 0;
            SplitCandidate best;
            for (std::size_t b = 0; b + 1 < std::min(n_edges + 1, stride_); ++b) {
                left_sum += h[b].sum;
                left_n += h[b].count;
                if (left_n < min_leaf) continue;
                const std::size_t right_n = n - left_n;
                if (right_n < min_leaf) break;
                const double right_sum = sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                                    right_sum * right_sum / static_cast<double>(right_n) - parent;
                if (gain > best.gain) best = {gain, static_cast<int>(f), static_cast<int>(b)};
            }
            per_feature[f] = best;
        }
        // Ordered reduction: lowest feature index wins ties.
        SplitCandidate best;
        for (const auto& c : per_feature) {
            if (c.feature >= 0 && c.gain > best.gain) best = c;
        }
        return best;
    }

    const kernels::BinnedMatrix& binned_;
    const std::vector<std::vector<double>>& edges_;
    const TrainParams& params_;
    std::size_t stride_;
};

double exact_mean(std::span<const double> y)
{
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    if (*lo == *hi) return *lo;
    long double s = 0.0L;
    for (double v : y) s += v;
    return static_cast<double>(s / static_cast<long double>(y.size()));
}

double mse(std::span<const double> pred, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = pred[i] - y[i];
        s += e * e;
    }
    return s / static_cast<double>(y.size());
}

} // namespace

GbdtModel fit(const DesignMatrix& train, const DesignMatrix& validation, const TrainParams& params, FitTrace* trace)
{
    params.validate();
    if (train.rows() == 0) throw DataError("training matrix is empty");
    if (validation.rows() == 0) throw DataError("validation matrix is empty");
    if (train.feature_names != validation.feature_names) {
        throw DataError("training and validation feature names differ");
    }
    if (train.cols() == 0) throw DataError("design matrix has no features");

    const std::size_t n = train.rows();
    const std::size_t cols = train.cols();
    std::vector<std::vector<double>> edges(cols);
    {
        std::vector<double> column(n);
        for (std::size_t f = 0; f < cols; ++f) {
            for (std::size_t r = 0; r < n; ++r) column[r] = train.at(r, f);
            edges[f] = compute_bin_edges(column, params.n_bins);
        }
    }
    const auto binned = kernels::bin_matrix_parallel(train.values, n, edges);

    GbdtModel model;
    model.learning_rate = params.learning_rate;
    model.feature_names = train.feature_names;
    model.params = params;
    model.base_score = exact_mean(train.target);

    std::vector<double> train_pred(n, model.base_score);
    std::vector<double> valid_pred(validation.rows(), model.base_score);
    std::vector<double> residual(n);
    std::vector<std::uint32_t> rows(n);
    std::vector<std::pair<std::size_t, std::size_t>> leaf_ranges;
    std::vector<double> leaf_values;
    TreeGrower grower(binned, edges, params);

    double best_rmse = std::sqrt(mse(valid_pred, validation.target));
    int best_iter = 0;
    if (trace) {
        trace->train_mse = {mse(train_pred, train.target)};
        trace->validation_rmse = {best_rmse};
    }
    for (int t = 1; t <= params.max_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) residual[i] = train.target[i] - train_pred[i];
        std::iota(rows.begin(), rows.end(), 0U);
        auto tree = grower.grow(residual, rows, leaf_ranges, leaf_values);
        for (std::size_t l = 0; l < leaf_ranges.size(); ++l) {
            const double step = params.learning_rate * leaf_values[l];
            for (std::size_t k = leaf_ranges[l].first; k < leaf_ranges[l].second; ++k) train_pred[rows[k]] += step;
        }
        kernels::add_tree_parallel(tree, params.learning_rate, validation.values, cols, valid_pred);
        model.trees.push_back(std::move(tree));

        const double rmse = std::sqrt(mse(valid_pred, validation.target));
        if (trace) {
            trace->train_mse.push_back(mse(train_pred, train.target));
            trace->validation_rmse.push_back(rmse);
        }
        if (rmse < best_rmse) {
            best_rmse = rmse;
            best_iter = t;
        }
        if (t - best_iter >= params.early_stopping_rounds) break;
    }
    model.trees.resize(static_cast<std::size_t>(best_iter));
    model.best_iteration = best_iter;
    return model;
}

std::vector<double> predict(const GbdtModel& model, const DesignMatrix& rows)
{
    if (rows.cols() != model.feature_names.size()) {
        throw DataError("prediction rows have " + std::to_string(rows.cols()) + " features, model expects " +
                        std::to_string(model.feature_names.size()));
    }
    std::vector<double> out(rows.rows());
    const std::span<const RegressionTree> used(model.trees.data(), static_cast<std::size_t>(model.best_iteration));
    kernels::predict_parallel(used, model.base_score, model.learning_rate, rows.values, rows.cols(), out);
    return out;
}

double predict(const GbdtModel& model, std::span<const double> x)
{
    if (x.size() != model.feature_names.size()) throw DataError("feature vector has the wrong dimension");
    double s = 0.0;
    for (int t = 0; t < model.best_iteration; ++t) s += model.trees[static_cast<std::size_t>(t)].predict(x);
    return model.base_score + model.learning_rate * s;
}

RegressionMetrics regression_metrics(std::span<const double> predicted, std::span<const double> observed)
{
    if (predicted.size() != observed.size()) throw DataError("metric inputs differ in length");
    if (predicted.empty()) throw DataError("metric inputs are empty");
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double e = predicted[i] - observed[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
    }
    const double n = static_cast<double>(predicted.size());
    return {abs_sum / n, std::sqrt(sq_sum / n)};
}

void write_model(std::ostream& out, const GbdtModel& m)
{
    out << "windnbm-gbdt 1\n";
    out << "features " << m.feature_names.size();
    for (const auto& f : m.feature_names) out << ' ' << f;
    out << '\n';
    out << "base_score " << format_double(m.base_score) << '\n';
    out << "learning_rate " << format_double(m.learning_rate) << '\n';
    out << "best_iteration " << m.best_iteration << '\n';
    const auto& p = m.params;
    out << "params max_trees=" << p.max_trees << " learning_rate=" << format_double(p.learning_rate)
        << " max_depth=" << p.max_depth << " min_samples_leaf=" << p.min_samples_leaf << " n_bins=" << p.n_bins
        << " early_stopping_rounds=" << p.early_stopping_rounds << " seed=" << p.seed << '\n';
    out << "trees " << m.trees.size() << '\n';
    for (const auto& t : m.trees) {
        out << "tree " << t.nodes.size() << '\n';
        for (const auto& n : t.nodes) {
            out << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
                << format_double(n.value) << '\n';
        }
    }
}

namespace {

void expect(std::istream& in, const std::string& keyword)
{
    std::string word;
    if (!(in >> word) || word != keyword) {
        throw DataError("model file: expected '" + keyword + "', found '" + word + "'");
    }
}

double read_double(std::istream& in)
{
    std::string word;
    if (!(in >> word)) throw DataError("model file: truncated");
    return parse_double(word);
}

template <class T>
T read_int(std::istream& in)
{
    T v{};
    if (!(in >> v)) throw DataError("model file: expected an integer");
    return v;
}

} // namespace

GbdtModel read_model(std::istream& in)
{
    GbdtModel m;
    expect(in, "windnbm-gbdt");
    if (read_int<int>(in) != 1) throw DataError("model file: unsupported version");
    expect(in, "features");
    const auto n_features = read_int<std::size_t>(in);
    m.feature_names.resize(n_features);
    for (auto& f : m.feature_names) in >> f;
    expect(in, "base_score");
    m.base_score = read_double(in);
    expect(in, "learning_rate");
    m.learning_rate = read_double(in);
    expect(in, "best_iteration");
    m.best_iteration = read_int<int>(in);
    expect(in, "params");
    for (int i = 0; i < 7; ++i) {
        std::string kv;
        in >> kv;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw DataError("model file: malformed parameter '" + kv + "'");
        const auto key = kv.substr(0, eq);
        const auto val = kv.substr(eq + 1);
        auto& p = m.params;
        if (key == "max_trees") p.max_trees = std::stoi(val);
        else if (key == "learning_rate") p.learning_rate = parse_double(val);
        else if (key == "max_depth") p.max_depth = std::stoi(val);
        else if (key == "min_samples_leaf") p.min_samples_leaf = std::stoi(val);
        else if (key == "n_bins") p.n_bins = std::stoi(val);
        else if (key == "early_stopping_rounds") p.early_stopping_rounds = std::stoi(val);
        else if (key == "seed") p.seed = std::stoull(val);
        else throw DataError("model file: unknown parameter '" + key + "'");
    }
    expect(in, "trees");
    const auto n_trees = read_int<std::size_t>(in);
    m.trees.resize(n_trees);
    for (auto& t : m.trees) {
        expect(in, "tree");
        t.nodes.resize(read_int<std::size_t>(in));
        for (auto& node : t.nodes) {
            node.feature = read_int<int>(in);
            node.threshold = read_double(in);
            node.left = read_int<int>(in);
            node.right = read_int<int>(in);
            node.value = read_double(in);
            if (!node.is_leaf() && (node.left <= 0 || node.right <= 0 ||
                                    static_cast<std::size_t>(std::max(node.left, node.right)) >= t.nodes.size() ||
                                    static_cast<std::size_t>(node.feature) >= n_features)) {
                throw DataError("model file: corrupt tree node");
            }
        }
    }
    if (m.best_iteration < 0 || static_cast<std::size_t>(m.best_iteration) > m.trees.size()) {
        throw DataError("model file: best_iteration exceeds stored trees");
    }
    return m;
}

} // namespace windnbm
