#pragma once

#include "gridcast/featurizer.hpp"
#include "gridcast/kmeans.hpp"
#include "gridcast/models.hpp"
#include "gridcast/series.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gridcast {

// Series-level clusters from local-model coefficient vectors. The raw n x p
// coefficient matrix is kept together with the column statistics used to
// standardize it, so unseen series can be routed later by refitting a local
// model and standardizing its coefficients the same way.
struct SeriesClusters {
    std::vector<std::string> series_ids; // ascending
    std::map<std::string, int> cluster_of_series;
    Matrix coefficients;           // raw importance vectors, one row per series
    std::vector<double> col_mean;  // standardization of the coefficient matrix
    std::vector<double> col_std;
    Matrix centroids; // K x p, standardized coefficient space
    int K = 0;
    std::uint64_t seed = 0;

    int cluster_of(const std::string& id) const;
    // Nearest centroid for a raw coefficient vector; ties to the lowest id.
    int route_coefficients(std::span<const double> theta) const;

    nlohmann::json to_json() const;
    static SeriesClusters from_json(const nlohmann::json& j);
};

// Fits one local model per series of the (already normalized) train view,
// column-standardizes the coefficient matrix, and clusters it with uniform
// weights. K = 0 picks K by silhouette over {2..6}.
SeriesClusters model_based_tsc(const SeriesCollection& normalized_train,
                               const FeatureSpec& spec, ModelKind kind,
                               const Hyperparams& hp, int K, std::uint64_t seed,
                               int threads = 1);

// Row-level clusters of a pooled sample set under the importance-weighted
// Euclidean metric.
struct InstanceClusters {
    std::vector<int> row_cluster; // one entry per pooled row (not serialized)
    Matrix centroids;             // K x p, original feature space
    std::vector<double> weights;  // non-negative, sum 1
    int K = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;

    nlohmann::json to_json() const;
    static InstanceClusters from_json(const nlohmann::json& j);
};

// Weights come from the fitted global model: boosting gain shares are used
// as-is; ridge coefficients are folded to absolute values (the weighted
// metric is undefined for negative weights) and normalized to sum 1.
InstanceClusters weighted_instance_tsc(const SampleSet& pooled,
                                       const FittedModel& global_model, int K,
                                       std::uint64_t seed);

// Same clustering with uniform weights 1/p.
InstanceClusters instance_tsc_uniform(const SampleSet& pooled, int K,
                                      std::uint64_t seed);

// Nearest centroid under the stored weighted metric; ties to the lowest id.
int route_instance(const InstanceClusters& clusters, std::span<const double> x);

} // namespace gridcast
