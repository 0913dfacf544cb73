#include "gridcast/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridcast {

namespace {

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

// A leaf under construction: the rows routed to it, presorted per feature.
struct OpenNode {
    int node_id = -1;
    int depth = 0;
    double sum = 0.0; // residual sum over rows
    std::vector<std::vector<std::uint32_t>> order;
    SplitChoice best;
};

std::size_t node_rows(const OpenNode& n) { return n.order.empty() ? 0 : n.order[0].size(); }

// Exact-greedy best split: thresholds at midpoints between consecutive
// distinct values, row routed left when x < threshold. Ties resolve to the
// lowest feature index, then the lowest threshold, by scan order.
SplitChoice find_best_split(const OpenNode& node, const Matrix& X,
                            const std::vector<double>& residual, int min_samples_leaf) {
    SplitChoice best;
    const std::size_t n = node_rows(node);
    const auto msl = static_cast<std::size_t>(min_samples_leaf);
    if (n < 2 * msl) return best;
    const double total = node.sum;
    const double parent_score = total * total / static_cast<double>(n);
    for (std::size_t f = 0; f < node.order.size(); ++f) {
        const auto& idx = node.order[f];
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_sum += residual[idx[i]];
            const double v = X(idx[i], f);
            const double next = X(idx[i + 1], f);
            if (!(v < next)) continue; // not a boundary between distinct values
            const std::size_t n_left = i + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < msl || n_right < msl) continue;
            double t = (v + next) / 2.0;
            if (!(t > v)) t = next; // midpoint rounded onto v; keep v on the left
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                right_sum * right_sum / static_cast<double>(n_right) -
                                parent_score;
            if (gain > best.gain) {
                best.gain = gain;
                best.feature = static_cast<int>(f);
                best.threshold = t;
            }
        }
    }
    return best;
}

// Builds one tree on the residuals. Returns true and appends per-feature
// gains when the root admits a positive-gain split; a rootless tree is
// reported false and the boosting loop stops.
bool build_tree(const Matrix& X, const std::vector<double>& residual,
                const std::vector<std::vector<std::uint32_t>>& root_order,
                const Hyperparams& hp, RegressionTree& tree,
                std::vector<double>& importance_gain) {
    const std::size_t p = X.cols;

    OpenNode root;
    root.node_id = 0;
    root.depth = 0;
    root.order = root_order;
    root.sum = 0.0;
    for (std::uint32_t i : root_order[0]) root.sum += residual[i];
    root.best = find_best_split(root, X, residual, hp.min_samples_leaf);
    if (!(root.best.gain > 0.0)) return false;

    tree.nodes.clear();
    tree.nodes.push_back(TreeNode{});
    std::vector<OpenNode> open;
    open.push_back(std::move(root));
    int leaves = 1;

    std::vector<char> goes_left(X.rows, 0);
    while (leaves < hp.max_leaves) {
        // Highest gain next; ties go to the node created earliest.
        std::size_t pick = open.size();
        for (std::size_t i = 0; i < open.size(); ++i) {
            if (!(open[i].best.gain > 0.0)) continue;
            if (pick == open.size() || open[i].best.gain > open[pick].best.gain ||
                (open[i].best.gain == open[pick].best.gain &&
                 open[i].node_id < open[pick].node_id))
                pick = i;
        }
        if (pick == open.size()) break;

        OpenNode node = std::move(open[pick]);
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

        TreeNode& tn = tree.nodes[static_cast<std::size_t>(node.node_id)];
        tn.feature = node.best.feature;
        tn.threshold = node.best.threshold;
        tn.left = static_cast<int>(tree.nodes.size());
        tn.right = tn.left + 1;
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        importance_gain[static_cast<std::size_t>(node.best.feature)] += node.best.gain;
        ++leaves;

        OpenNode left, right;
        left.node_id = tn.left;
        right.node_id = tn.right;
        left.depth = right.depth = node.depth + 1;
        left.order.resize(p);
        right.order.resize(p);
        const auto& split_idx = node.order[static_cast<std::size_t>(node.best.feature)];
        for (std::uint32_t i : split_idx)
            goes_left[i] = X(i, static_cast<std::size_t>(node.best.feature)) <
                           node.best.threshold;
        for (std::size_t f = 0; f < p; ++f) {
            for (std::uint32_t i : node.order[f])
                (goes_left[i] ? left.order[f] : right.order[f]).push_back(i);
        }
        // Summed directly (not parent minus sibling) so leaf values are the
        // exact means of the residuals routed to them.
        left.sum = 0.0;
        for (std::uint32_t i : left.order[0]) left.sum += residual[i];
        right.sum = 0.0;
        for (std::uint32_t i : right.order[0]) right.sum += residual[i];

        for (OpenNode* child : {&left, &right}) {
            if (child->depth < hp.max_depth)
                child->best = find_best_split(*child, X, residual, hp.min_samples_leaf);
            else
                child->best = SplitChoice{};
        }
        open.push_back(std::move(left));
        open.push_back(std::move(right));
    }

    for (const OpenNode& n : open) {
        TreeNode& tn = tree.nodes[static_cast<std::size_t>(n.node_id)];
        tn.value = n.sum / static_cast<double>(node_rows(n));
    }
    return true;
}

} // namespace

Hyperparams Hyperparams::local_defaults() {
    Hyperparams hp;
    hp.n_estimators = 200;
    return hp;
}

Hyperparams Hyperparams::global_defaults() {
    Hyperparams hp;
    hp.n_estimators = 1000;
    return hp;
}

void Hyperparams::validate() const {
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate < 2.0))
        throw ConfigError("learning_rate must lie in (0, 2)");
    if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
    if (max_leaves < 2) throw ConfigError("max_leaves must be >= 2");
    if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
}

nlohmann::json Hyperparams::to_json() const {
    return {{"alpha", alpha},
            {"n_estimators", n_estimators},
            {"learning_rate", learning_rate},
            {"max_depth", max_depth},
            {"max_leaves", max_leaves},
            {"min_samples_leaf", min_samples_leaf}};
}

Hyperparams Hyperparams::from_json(const nlohmann::json& j) {
    Hyperparams hp;
    hp.alpha = j.at("alpha").get<double>();
    hp.n_estimators = j.at("n_estimators").get<int>();
    hp.learning_rate = j.at("learning_rate").get<double>();
    hp.max_depth = j.at("max_depth").get<int>();
    hp.max_leaves = j.at("max_leaves").get<int>();
    hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    return hp;
}

double RegressionTree::predict_row(std::span<const double> x) const {
    int at = 0;
    for (;;) {
        const TreeNode& n = nodes[static_cast<std::size_t>(at)];
        if (n.feature < 0) return n.value;
        at = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
}

int RegressionTree::leaf_count() const {
    int c = 0;
    for (const TreeNode& n : nodes) c += n.feature < 0;
    return c;
}

int RegressionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].feature < 0) {
            best = std::max(best, d[i]);
            continue;
        }
        d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
        d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
    return best;
}

GbdtModel fit_gbdt(const SampleSet& data, const Hyperparams& hp, std::uint64_t seed) {
    (void)seed; // no subsampling, so the fit is seed-independent
    hp.validate();
    const std::size_t m = data.rows();
    const std::size_t p = data.cols();
    if (m < 2 * static_cast<std::size_t>(hp.min_samples_leaf))
        throw TrainError("need at least 2*min_samples_leaf = " +
                         std::to_string(2 * hp.min_samples_leaf) + " rows, got " +
                         std::to_string(m));
    for (double v : data.X.data)
        if (!std::isfinite(v)) throw TrainError("non-finite feature value");
    for (double v : data.y)
        if (!std::isfinite(v)) throw TrainError("non-finite target value");

    GbdtModel model;
    model.hp = hp;
    model.learning_rate = hp.learning_rate;
    model.feature_names = data.feature_names;
    model.importance_gain.assign(p, 0.0);

    double ysum = 0.0;
    for (double v : data.y) ysum += v;
    model.f0 = ysum / static_cast<double>(m);

    // Feature order never changes across stages; sort once. Stable sort keeps
    // equal values in row order, so the fit is deterministic.
    std::vector<std::vector<std::uint32_t>> root_order(p);
    for (std::size_t f = 0; f < p; ++f) {
        auto& idx = root_order[f];
        idx.resize(m);
        std::iota(idx.begin(), idx.end(), 0u);
        std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            return data.X(a, f) < data.X(b, f);
        });
    }

    std::vector<double> residual(m);
    for (std::size_t i = 0; i < m; ++i) residual[i] = data.y[i] - model.f0;

    for (int stage = 0; stage < hp.n_estimators; ++stage) {
        RegressionTree tree;
        if (!build_tree(data.X, residual, root_order, hp, tree, model.importance_gain))
            break;
        for (std::size_t i = 0; i < m; ++i)
            residual[i] -= hp.learning_rate * tree.predict_row(data.X.row(i));
        model.trees.push_back(std::move(tree));
        double sse = 0.0;
        for (double r : residual) sse += r * r;
        model.train_mse_trace.push_back(sse / static_cast<double>(m));
    }

    model.fitted = true;
    return model;
}

double GbdtModel::predict_row(std::span<const double> x) const {
    if (!fitted) throw TrainError("model is not fitted");
    if (x.size() != feature_names.size())
        throw EvalError("feature count mismatch: model has " +
                        std::to_string(feature_names.size()) + ", row has " +
                        std::to_string(x.size()));
    double s = f0;
    for (const RegressionTree& t : trees) s += learning_rate * t.predict_row(x);
    return s;
}

std::vector<double> GbdtModel::predict(const Matrix& X) const {
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict_row(X.row(i));
    return out;
}

std::vector<double> GbdtModel::importance() const {
    if (!fitted) throw TrainError("model is not fitted");
    double total = 0.0;
    for (double g : importance_gain) total += g;
    std::vector<double> out(importance_gain.size(), 0.0);
    if (total > 0.0)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = importance_gain[j] / total;
    return out;
}

nlohmann::json GbdtModel::to_json() const {
    if (!fitted) throw TrainError("model is not fitted");
    nlohmann::json jt = nlohmann::json::array();
    for (const RegressionTree& t : trees) {
        nlohmann::json jn = nlohmann::json::array();
        for (const TreeNode& n : t.nodes)
            jn.push_back({{"f", n.feature},
                          {"t", n.threshold},
                          {"l", n.left},
                          {"r", n.right},
                          {"v", n.value}});
        jt.push_back(std::move(jn));
    }
    return {{"format", "gbdt-v1"},
            {"f0", f0},
            {"learning_rate", learning_rate},
            {"hyperparams", hp.to_json()},
            {"trees", jt},
            {"importance_gain", importance_gain},
            {"feature_names", feature_names},
            {"train_mse_trace", train_mse_trace}};
}

GbdtModel GbdtModel::from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "gbdt-v1")
        throw DataError("unrecognized boosting container format");
    GbdtModel m;
    m.f0 = j.at("f0").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.hp = Hyperparams::from_json(j.at("hyperparams"));
    for (const auto& jn : j.at("trees")) {
        RegressionTree t;
        for (const auto& n : jn)
            t.nodes.push_back(TreeNode{n.at("f").get<int>(), n.at("t").get<double>(),
                                       n.at("l").get<int>(), n.at("r").get<int>(),
                                       n.at("v").get<double>()});
        m.trees.push_back(std::move(t));
    }
    m.importance_gain = j.at("importance_gain").get<std::vector<double>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.train_mse_trace = j.at("train_mse_trace").get<std::vector<double>>();
    if (m.importance_gain.size() != m.feature_names.size())
        throw DataError("inconsistent boosting container");
    m.fitted = true;
    return m;
}

FittedModel fit_model(const SampleSet& data, ModelKind kind, const Hyperparams& hp,
                      std::uint64_t seed) {
    if (kind == ModelKind::ridge) return FittedModel(fit_ridge(data, hp.alpha));
    return FittedModel(fit_gbdt(data, hp, seed));
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "ridge") return ModelKind::ridge;
    if (s == "gbdt") return ModelKind::gbdt;
    throw ConfigError("unknown model kind '" + s + "' (expected ridge or gbdt)");
}

std::string to_string(ModelKind k) {
    return k == ModelKind::ridge ? "ridge" : "gbdt";
}

ModelKind FittedModel::kind() const {
    if (std::holds_alternative<RidgeModel>(impl_)) return ModelKind::ridge;
    if (std::holds_alternative<GbdtModel>(impl_)) return ModelKind::gbdt;
    throw TrainError("model is not fitted");
}

double FittedModel::predict_row(std::span<const double> x) const {
    if (kind() == ModelKind::ridge) return std::get<RidgeModel>(impl_).predict_row(x);
    return std::get<GbdtModel>(impl_).predict_row(x);
}

std::vector<double> FittedModel::predict(const Matrix& X) const {
    if (kind() == ModelKind::ridge) return std::get<RidgeModel>(impl_).predict(X);
    return std::get<GbdtModel>(impl_).predict(X);
}

std::vector<double> FittedModel::importance_vector() const {
    if (kind() == ModelKind::ridge) return std::get<RidgeModel>(impl_).importance();
    return std::get<GbdtModel>(impl_).importance();
}

const std::vector<std::string>& FittedModel::feature_names() const {
    if (kind() == ModelKind::ridge) return std::get<RidgeModel>(impl_).feature_names;
    return std::get<GbdtModel>(impl_).feature_names;
}

const RidgeModel& FittedModel::as_ridge() const {
    if (kind() != ModelKind::ridge) throw TrainError("not a ridge model");
    return std::get<RidgeModel>(impl_);
}

const GbdtModel& FittedModel::as_gbdt() const {
    if (kind() != ModelKind::gbdt) throw TrainError("not a boosting model");
    return std::get<GbdtModel>(impl_);
}

nlohmann::json FittedModel::to_json() const {
    if (kind() == ModelKind::ridge) return std::get<RidgeModel>(impl_).to_json();
    return std::get<GbdtModel>(impl_).to_json();
}

FittedModel FittedModel::from_json(const nlohmann::json& j) {
    const std::string fmt = j.at("format").get<std::string>();
    if (fmt == "ridge-v1") return FittedModel(RidgeModel::from_json(j));
    if (fmt == "gbdt-v1") return FittedModel(GbdtModel::from_json(j));
    throw DataError("unrecognized model container format '" + fmt + "'");
}

} // namespace gridcast
