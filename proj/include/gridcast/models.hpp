#pragma once

#include "gridcast/core.hpp"
#include "gridcast/featurizer.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace gridcast {

struct Hyperparams {
    double alpha = 1.0;
    int n_estimators = 200;
    double learning_rate = 0.1;
    int max_depth = 4;
    int max_leaves = 32;
    int min_samples_leaf = 20;

    static Hyperparams local_defaults();  // 200 boosting rounds
    static Hyperparams global_defaults(); // 1000 boosting rounds
    void validate() const;

    nlohmann::json to_json() const;
    static Hyperparams from_json(const nlohmann::json& j);
};

// Linear model on standardized features with an unpenalized intercept.
// Standardization uses population statistics from the fit data, which makes
// the solution invariant to duplicating every row k times with alpha
// scaled by k (the pooling-consistency property).
class RidgeModel {
public:
    std::vector<double> theta; // standardized scale, one per feature
    double intercept = 0.0;    // mean of training targets
    std::vector<double> col_mean;
    std::vector<double> col_std; // constant columns carry std 1 and theta 0
    double alpha = 1.0;
    std::vector<std::string> feature_names;
    bool fitted = false;

    double predict_row(std::span<const double> x) const;
    std::vector<double> predict(const Matrix& X) const;
    // Signed coefficients on the standardized scale.
    std::vector<double> importance() const;

    nlohmann::json to_json() const;
    static RidgeModel from_json(const nlohmann::json& j);
};

RidgeModel fit_ridge(const SampleSet& data, double alpha);

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf output: mean residual of routed rows
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // node 0 is the root

    // Routing rule: x[feature] < threshold goes left.
    double predict_row(std::span<const double> x) const;
    int leaf_count() const;
    int depth() const;
};

// Squared-loss gradient boosting with exact-greedy trees grown best-first
// (highest variance-reduction gain next, ties to the older node). No row or
// column subsampling; the seed parameter is accepted for interface stability
// and does not affect the fit.
class GbdtModel {
public:
    double f0 = 0.0; // mean of training targets
    double learning_rate = 0.1;
    Hyperparams hp;
    std::vector<RegressionTree> trees;
    std::vector<double> importance_gain; // raw total gain per feature
    std::vector<std::string> feature_names;
    std::vector<double> train_mse_trace; // after each accepted stage
    bool fitted = false;

    double predict_row(std::span<const double> x) const;
    std::vector<double> predict(const Matrix& X) const;
    // Total split gain per feature, normalized to sum 1 (all zero when no
    // tree was accepted).
    std::vector<double> importance() const;

    nlohmann::json to_json() const;
    static GbdtModel from_json(const nlohmann::json& j);
};

GbdtModel fit_gbdt(const SampleSet& data, const Hyperparams& hp, std::uint64_t seed);

enum class ModelKind { ridge, gbdt };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind k);

// One handle over both learner families.
class FittedModel {
public:
    FittedModel() = default;
    explicit FittedModel(RidgeModel m) : impl_(std::move(m)) {}
    explicit FittedModel(GbdtModel m) : impl_(std::move(m)) {}

    ModelKind kind() const;
    double predict_row(std::span<const double> x) const;
    std::vector<double> predict(const Matrix& X) const;
    std::vector<double> importance_vector() const;
    const std::vector<std::string>& feature_names() const;

    const RidgeModel& as_ridge() const;
    const GbdtModel& as_gbdt() const;

    nlohmann::json to_json() const;
    static FittedModel from_json(const nlohmann::json& j);

private:
    std::variant<std::monostate, RidgeModel, GbdtModel> impl_;
};

FittedModel fit_model(const SampleSet& data, ModelKind kind, const Hyperparams& hp,
                      std::uint64_t seed);

} // namespace gridcast
