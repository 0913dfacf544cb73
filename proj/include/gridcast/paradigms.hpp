#pragma once

#include "gridcast/clustering.hpp"
#include "gridcast/featurizer.hpp"
#include "gridcast/models.hpp"
#include "gridcast/series.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gridcast {

// Three ways of spending a model budget on n series: one model per series,
// one model for the pool, or one model per cluster with 1 <= K <= n.
// Training always fits a min-max normalizer on the raw train view first;
// models see normalized values only, so series of different magnitudes are
// commensurate in the pool.

enum class ClusterVariant { model_based, instance, weighted_instance };

ClusterVariant cluster_variant_from_string(const std::string& s);
std::string to_string(ClusterVariant v);

struct LocalEnsemble {
    FeatureSpec spec;
    Normalizer normalizer;
    ModelKind kind = ModelKind::ridge;
    Hyperparams hp;
    std::map<std::string, FittedModel> models; // exactly one per series
};

struct GlobalModel {
    FeatureSpec spec;
    Normalizer normalizer;
    ModelKind kind = ModelKind::ridge;
    Hyperparams hp;
    FittedModel model;
    std::size_t pooled_rows = 0; // sum of member sample counts
};

struct ClusterwiseModel {
    FeatureSpec spec;
    Normalizer normalizer;
    ModelKind kind = ModelKind::ridge;
    Hyperparams hp; // per-cluster fits; cluster discovery derives its own
    ClusterVariant variant = ClusterVariant::model_based;
    int K = 0;
    std::uint64_t seed = 0;
    std::optional<SeriesClusters> series_clusters;     // model_based
    std::optional<InstanceClusters> instance_clusters; // instance variants
    std::map<int, FittedModel> models;                 // cluster id -> model
    std::vector<std::string> notes; // degenerate-cluster merges and the like
};

using Paradigm = std::variant<LocalEnsemble, GlobalModel, ClusterwiseModel>;

// n for local, 1 for global, K for cluster-wise.
std::size_t model_count(const Paradigm& p);

// One independent fit per series. All-or-nothing: any per-series failure
// aborts the ensemble with the series id in the message.
LocalEnsemble train_local(const SeriesCollection& train, const FeatureSpec& spec,
                          ModelKind kind, const Hyperparams& hp, int threads = 1);

// One fit on the row-concatenation of every series' samples, ordered by
// series id, then time.
GlobalModel train_global(const SeriesCollection& train, const FeatureSpec& spec,
                         ModelKind kind, const Hyperparams& hp, int threads = 1);

// Clusters first, then one pooled fit per cluster. K = 0 picks K by
// silhouette. A cluster too small for the model kind is merged into its
// nearest neighbour and noted. K = 1 reproduces train_global exactly.
ClusterwiseModel train_clusterwise(const SeriesCollection& train, const FeatureSpec& spec,
                                   ModelKind kind, const Hyperparams& hp,
                                   ClusterVariant variant, int K, std::uint64_t seed,
                                   int threads = 1);

struct ForecastResult {
    std::string series_id;
    std::vector<std::int64_t> target_hours;
    std::vector<double> yhat_norm;
    std::vector<double> y_norm;
    std::vector<double> yhat; // original scale
    std::vector<double> y;
};

// One-hour-ahead predictions over the evaluation window. eval_raw must carry
// the series on the original scale with at least 168 hours of context before
// the first target (a window of length L yields L - 168 predictions).
ForecastResult forecast_series(const Paradigm& p, const std::string& series_id,
                               const SeriesCollection& eval_raw);

// A series the paradigm never saw: raw values from start_hour onwards, with
// targets starting at eval_start_hour. History before eval_start_hour
// supplies the min-max statistics (own-history normalization; noted in
// reports) and, for model-based clusters, a throwaway local fit whose
// coefficients pick the cluster. Exogenous channels reuse training
// statistics when the normalizer knows them.
struct ZeroShotInput {
    std::string series_id;
    std::vector<double> values;
    std::int64_t start_hour = 0;
    std::map<std::string, std::vector<double>> exogenous;
    std::int64_t eval_start_hour = 0;
};

ForecastResult zero_shot_forecast(const Paradigm& p, const ZeroShotInput& in);

// Multi-step forecasting by feeding predictions back as lag inputs.
// Exogenous channels must extend `horizon` hours past the series. Opt-in,
// untested surface; one-step-ahead is the supported mode.
std::vector<double> forecast_recursive(const Paradigm& p, const std::string& series_id,
                                       const SeriesCollection& history_raw, int horizon,
                                       bool enable_recursive);

// Bundle directory: manifest.json, spec.json, normalizer.json, models.json,
// and clusters.json for cluster-wise paradigms.
void save_paradigm(const Paradigm& p, const std::string& dir);
Paradigm load_paradigm(const std::string& dir);

} // namespace gridcast
