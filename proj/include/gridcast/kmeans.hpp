#pragma once

#include "gridcast/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gridcast {

// Clustering under the weighted Euclidean metric
// d(a, b) = sqrt(sum_r w_r (a_r - b_r)^2). Implemented by scaling each
// coordinate by sqrt(w_r) once and running plain Lloyd iterations, which is
// the same metric without materializing any pairwise matrix.
struct WeightedKMeansResult {
    Matrix centroids; // K x p, original (unscaled) feature space: member means
    std::vector<int> assignment;
    std::vector<double> weights;
    double inertia = 0.0; // sum of weighted squared distances
    std::vector<double> inertia_trace; // one entry per Lloyd iteration
    std::uint64_t seed = 0;
    int iterations = 0;
    int k = 0;
};

// k-means++ initialization, assignment ties to the lowest cluster id, an
// empty cluster takes the point farthest from its centroid. Deterministic
// for fixed (points, K, w, seed).
WeightedKMeansResult weighted_kmeans(const Matrix& points, int K,
                                     std::span<const double> w, std::uint64_t seed,
                                     int max_iter = 100);

// Verification mode: the same procedure driven purely by a pairwise distance
// matrix D (distances, not squares), using
// ||x_i - mu_C||^2 = mean_j D_ij^2 - (1/2) mean_{j,j'} D_jj'^2.
// Restricted to small inputs; real runs use weighted_kmeans.
WeightedKMeansResult kmeans_from_distance_matrix(const Matrix& D, int K,
                                                 std::uint64_t seed,
                                                 int max_iter = 100);

// Mean silhouette width under the weighted metric. Inputs larger than
// sample_cap points are subsampled deterministically from the seed.
double silhouette_score(const Matrix& points, std::span<const double> w,
                        const std::vector<int>& assignment, int K,
                        std::uint64_t seed, std::size_t sample_cap = 2000);

// Highest-silhouette K in [k_min, min(k_max, m)]; ties go to the smaller K.
int choose_k(const Matrix& points, std::span<const double> w, std::uint64_t seed,
             int k_min = 2, int k_max = 6, int max_iter = 100);

} // namespace gridcast
