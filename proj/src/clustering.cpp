#include "gridcast/clustering.hpp"

#include <cmath>

namespace gridcast {

namespace {

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("data").get<std::vector<double>>();
    if (m.data.size() != m.rows * m.cols) throw DataError("inconsistent matrix payload");
    return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

int nearest_weighted(const Matrix& centroids, std::span<const double> w,
                     std::span<const double> x) {
    int best = 0;
    double bd = 0.0;
    for (std::size_t c = 0; c < centroids.rows; ++c) {
        double d = 0.0;
        for (std::size_t j = 0; j < centroids.cols; ++j) {
            const double diff = x[j] - centroids(c, j);
            d += w[j] * diff * diff;
        }
        if (c == 0 || d < bd) {
            bd = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

InstanceClusters cluster_instances(const SampleSet& pooled, std::vector<double> w,
                                   int K, std::uint64_t seed) {
    if (pooled.rows() == 0) throw TrainError("no rows to cluster");
    if (K == 0)
        K = choose_k(pooled.X, w, seed);
    const auto km = weighted_kmeans(pooled.X, K, w, seed);
    InstanceClusters ic;
    ic.row_cluster = km.assignment;
    ic.centroids = km.centroids;
    ic.weights = std::move(w);
    ic.K = K;
    ic.seed = seed;
    ic.feature_names = pooled.feature_names;
    return ic;
}

} // namespace

int SeriesClusters::cluster_of(const std::string& id) const {
    auto it = cluster_of_series.find(id);
    if (it == cluster_of_series.end())
        throw DataError("series '" + id + "' is not in the cluster map");
    return it->second;
}

int SeriesClusters::route_coefficients(std::span<const double> theta) const {
    if (theta.size() != col_mean.size())
        throw EvalError("coefficient vector length " + std::to_string(theta.size()) +
                        " does not match the cluster space " +
                        std::to_string(col_mean.size()));
    std::vector<double> z(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j)
        z[j] = (theta[j] - col_mean[j]) / col_std[j];
    const std::vector<double> ones(theta.size(), 1.0);
    return nearest_weighted(centroids, ones, z);
}

nlohmann::json SeriesClusters::to_json() const {
    nlohmann::json assign = nlohmann::json::object();
    for (const auto& [id, c] : cluster_of_series) assign[id] = c;
    return {{"format", "series-clusters-v1"},
            {"series_ids", series_ids},
            {"assignment", assign},
            {"coefficients", matrix_to_json(coefficients)},
            {"col_mean", col_mean},
            {"col_std", col_std},
            {"centroids", matrix_to_json(centroids)},
            {"K", K},
            {"seed", seed}};
}

SeriesClusters SeriesClusters::from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "series-clusters-v1")
        throw DataError("unrecognized series-cluster container");
    SeriesClusters sc;
    sc.series_ids = j.at("series_ids").get<std::vector<std::string>>();
    for (const auto& [id, c] : j.at("assignment").items())
        sc.cluster_of_series[id] = c.get<int>();
    sc.coefficients = matrix_from_json(j.at("coefficients"));
    sc.col_mean = j.at("col_mean").get<std::vector<double>>();
    sc.col_std = j.at("col_std").get<std::vector<double>>();
    sc.centroids = matrix_from_json(j.at("centroids"));
    sc.K = j.at("K").get<int>();
    sc.seed = j.at("seed").get<std::uint64_t>();
    return sc;
}

SeriesClusters model_based_tsc(const SeriesCollection& normalized_train,
                               const FeatureSpec& spec, ModelKind kind,
                               const Hyperparams& hp, int K, std::uint64_t seed,
                               int threads) {
    const std::size_t n = normalized_train.series.size();
    if (n == 0) throw TrainError("no series to cluster");
    if (K < 0 || static_cast<std::size_t>(K) > n)
        throw TrainError("K = " + std::to_string(K) + " exceeds the series count " +
                         std::to_string(n));

    SeriesClusters sc;
    sc.seed = seed;
    for (const auto& [id, v] : normalized_train.series) sc.series_ids.push_back(id);

    std::vector<std::vector<double>> thetas(n);
    std::string first_error;
    parallel_for(n, threads, [&](std::size_t i) {
        const std::string& id = sc.series_ids[i];
        try {
            const auto samples = build_samples(id, normalized_train.series.at(id),
                                               normalized_train.start_hour,
                                               normalized_train.exogenous, spec);
            const FittedModel local = fit_model(samples, kind, hp, seed);
            thetas[i] = local.importance_vector();
        } catch (const std::exception& e) {
            throw TrainError("local model for series '" + id + "': " + e.what());
        }
    });

    const std::size_t p = thetas[0].size();
    sc.coefficients = Matrix(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) sc.coefficients(i, j) = thetas[i][j];

    sc.col_mean.assign(p, 0.0);
    sc.col_std.assign(p, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += sc.coefficients(i, j);
        sc.col_mean[j] = s / static_cast<double>(n);
    }
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = sc.coefficients(i, j) - sc.col_mean[j];
            s += d * d;
        }
        const double sd = std::sqrt(s / static_cast<double>(n));
        sc.col_std[j] = sd > 0.0 ? sd : 1.0;
    }

    Matrix z(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            z(i, j) = (sc.coefficients(i, j) - sc.col_mean[j]) / sc.col_std[j];

    const std::vector<double> ones(p, 1.0);
    if (K == 0) K = choose_k(z, ones, seed);
    const auto km = weighted_kmeans(z, K, ones, seed);
    sc.K = K;
    sc.centroids = km.centroids;
    for (std::size_t i = 0; i < n; ++i)
        sc.cluster_of_series[sc.series_ids[i]] = km.assignment[i];
    return sc;
}

nlohmann::json InstanceClusters::to_json() const {
    return {{"format", "instance-clusters-v1"},
            {"centroids", matrix_to_json(centroids)},
            {"weights", weights},
            {"K", K},
            {"seed", seed},
            {"feature_names", feature_names}};
}

InstanceClusters InstanceClusters::from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "instance-clusters-v1")
        throw DataError("unrecognized instance-cluster container");
    InstanceClusters ic;
    ic.centroids = matrix_from_json(j.at("centroids"));
    ic.weights = j.at("weights").get<std::vector<double>>();
    ic.K = j.at("K").get<int>();
    ic.seed = j.at("seed").get<std::uint64_t>();
    ic.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    return ic;
}

InstanceClusters weighted_instance_tsc(const SampleSet& pooled,
                                       const FittedModel& global_model, int K,
                                       std::uint64_t seed) {
    if (global_model.feature_names() != pooled.feature_names)
        throw TrainError("global model was fitted on a different feature schema");
    std::vector<double> w = global_model.importance_vector();
    double sum = 0.0;
    for (double& x : w) {
        x = std::abs(x);
        sum += x;
    }
    if (!(sum > 0.0))
        throw TrainError("global model has a zero importance vector; the weighted "
                         "metric is undefined");
    for (double& x : w) x /= sum;
    return cluster_instances(pooled, std::move(w), K, seed);
}

InstanceClusters instance_tsc_uniform(const SampleSet& pooled, int K,
                                      std::uint64_t seed) {
    const std::size_t p = pooled.cols();
    if (p == 0) throw TrainError("no feature columns");
    std::vector<double> w(p, 1.0 / static_cast<double>(p));
    return cluster_instances(pooled, std::move(w), K, seed);
}

int route_instance(const InstanceClusters& clusters, std::span<const double> x) {
    if (x.size() != clusters.centroids.cols)
        throw EvalError("row length " + std::to_string(x.size()) +
                        " does not match the cluster space " +
                        std::to_string(clusters.centroids.cols));
    return nearest_weighted(clusters.centroids, clusters.weights, x);
}

} // namespace gridcast
