#include "gridcast/kmeans.hpp"
#include "gridcast/rng.hpp"

#include "support/oracles.hpp"
#include "support/testutil.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace gridcast;

namespace {

Matrix random_points(std::size_t m, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    Matrix X(m, p);
    for (double& v : X.data) v = rng.uniform(-4.0, 4.0);
    return X;
}

// Two well-separated blobs in p dimensions; even rows near the origin, odd
// rows shifted far away.
Matrix two_blobs(std::size_t m, std::size_t p, std::uint64_t seed) {
    Rng rng(seed);
    Matrix X(m, p);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < p; ++j)
            X(i, j) = (i % 2 == 0 ? 0.0 : 50.0) + rng.normal();
    return X;
}

std::vector<double> uniform_w(std::size_t p) {
    return std::vector<double>(p, 1.0 / static_cast<double>(p));
}

} // namespace

TEST_CASE("four corner points split into the two obvious pairs") {
    Matrix X(4, 2);
    X(0, 0) = 0.0;  X(0, 1) = 0.0;
    X(1, 0) = 0.0;  X(1, 1) = 1.0;
    X(2, 0) = 10.0; X(2, 1) = 0.0;
    X(3, 0) = 10.0; X(3, 1) = 1.0;
    for (std::uint64_t seed : {0ull, 1ull, 2ull, 7ull}) {
        WeightedKMeansResult r = weighted_kmeans(X, 2, uniform_w(2), seed);
        CHECK(r.assignment[0] == r.assignment[1]);
        CHECK(r.assignment[2] == r.assignment[3]);
        CHECK(r.assignment[0] != r.assignment[2]);
        // Centroids are the member means.
        const int ca = r.assignment[0];
        CHECK(r.centroids(ca, 0) == 0.0);
        CHECK(r.centroids(ca, 1) == 0.5);
    }
}

TEST_CASE("a zero-weight coordinate cannot change the partition") {
    Matrix X(4, 2);
    X(0, 0) = 0.0;  X(0, 1) = 90.0;
    X(1, 0) = 0.0;  X(1, 1) = -3.0;
    X(2, 0) = 10.0; X(2, 1) = 55.0;
    X(3, 0) = 10.0; X(3, 1) = 0.1;
    std::vector<double> w = {1.0, 0.0};
    WeightedKMeansResult r = weighted_kmeans(X, 2, w, 3);
    CHECK(r.assignment[0] == r.assignment[1]);
    CHECK(r.assignment[2] == r.assignment[3]);
    CHECK(r.assignment[0] != r.assignment[2]);
}

TEST_CASE("uniform weights reproduce the independent plain implementation") {
    for (std::uint64_t seed : {1ull, 5ull, 9ull}) {
        Matrix X = random_points(60, 4, 100 + seed);
        WeightedKMeansResult lib = weighted_kmeans(X, 3, uniform_w(4), seed);
        std::vector<int> ref = oracle::plain_kmeans(X, 3, seed);
        CHECK(lib.assignment == ref);
    }
}

TEST_CASE("weighted clustering equals plain clustering on sqrt-w scaled points") {
    for (std::uint64_t seed : {2ull, 3ull, 4ull}) {
        Matrix X = random_points(80, 5, 200 + seed);
        Rng wr(300 + seed);
        std::vector<double> w(5);
        double sum = 0.0;
        for (double& v : w) { v = wr.uniform(0.05, 1.0); sum += v; }
        for (double& v : w) v /= sum;

        Matrix scaled = X;
        for (std::size_t i = 0; i < X.rows; ++i)
            for (std::size_t j = 0; j < X.cols; ++j)
                scaled(i, j) = X(i, j) * std::sqrt(w[j]);

        WeightedKMeansResult lib = weighted_kmeans(X, 3, w, seed);
        std::vector<int> ref = oracle::plain_kmeans(scaled, 3, seed);
        CHECK(lib.assignment == ref);
    }
}

TEST_CASE("the weighted metric equals the plain metric on scaled coordinates") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t p = 6;
        std::vector<double> a(p), b(p), w(p);
        for (std::size_t j = 0; j < p; ++j) {
            a[j] = rng.uniform(-5.0, 5.0);
            b[j] = rng.uniform(-5.0, 5.0);
            w[j] = rng.uniform(0.0, 2.0);
        }
        double direct = 0.0, scaled = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            direct += w[j] * (a[j] - b[j]) * (a[j] - b[j]);
            const double da = a[j] * std::sqrt(w[j]) - b[j] * std::sqrt(w[j]);
            scaled += da * da;
        }
        CHECK(std::sqrt(direct) == doctest::Approx(std::sqrt(scaled)).epsilon(1e-12));
    }
}

TEST_CASE("the distance-matrix twin reproduces the coordinate implementation") {
    for (std::uint64_t seed : {0ull, 6ull}) {
        Matrix X = random_points(70, 4, 400 + seed);
        Rng wr(500 + seed);
        std::vector<double> w(4);
        double sum = 0.0;
        for (double& v : w) { v = wr.uniform(0.1, 1.0); sum += v; }
        for (double& v : w) v /= sum;

        Matrix D = oracle::weighted_distance_matrix(X, w);
        WeightedKMeansResult direct = weighted_kmeans(X, 3, w, seed);
        WeightedKMeansResult viaD = kmeans_from_distance_matrix(D, 3, seed);
        CHECK(direct.assignment == viaD.assignment);
        CHECK(direct.iterations == viaD.iterations);
    }
}

TEST_CASE("rerunning with the same inputs is bit-identical") {
    Matrix X = random_points(50, 3, 888);
    WeightedKMeansResult a = weighted_kmeans(X, 4, uniform_w(3), 17);
    WeightedKMeansResult b = weighted_kmeans(X, 4, uniform_w(3), 17);
    CHECK(a.assignment == b.assignment);
    CHECK(a.centroids.data == b.centroids.data);
    CHECK(a.inertia == b.inertia);
    CHECK(a.inertia_trace == b.inertia_trace);
}

TEST_CASE("the inertia trace never increases") {
    Matrix X = random_points(120, 4, 246);
    WeightedKMeansResult r = weighted_kmeans(X, 5, uniform_w(4), 9);
    REQUIRE(!r.inertia_trace.empty());
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i)
        CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] + 1e-9);
    CHECK(r.inertia == doctest::Approx(r.inertia_trace.back()));
    CHECK(r.iterations == static_cast<int>(r.inertia_trace.size()));
}

TEST_CASE("identical points terminate and fill every cluster") {
    Matrix X(4, 2);
    for (double& v : X.data) v = 3.0;
    WeightedKMeansResult r = weighted_kmeans(X, 2, uniform_w(2), 0);
    std::vector<int> counts(2, 0);
    for (int a : r.assignment) {
        REQUIRE(a >= 0);
        REQUIRE(a < 2);
        counts[static_cast<std::size_t>(a)]++;
    }
    CHECK(counts[0] > 0);
    CHECK(counts[1] > 0); // the empty cluster was revived
    CHECK(r.inertia == 0.0);
}

TEST_CASE("k-means input guards") {
    Matrix X = random_points(10, 2, 1);
    CHECK_THROWS_AS(weighted_kmeans(X, 0, uniform_w(2), 0), TrainError);
    CHECK_THROWS_AS(weighted_kmeans(X, 11, uniform_w(2), 0), TrainError);
    std::vector<double> zero = {0.0, 0.0};
    CHECK_THROWS_AS(weighted_kmeans(X, 2, zero, 0), TrainError);
    std::vector<double> negative = {1.0, -0.5};
    CHECK_THROWS_AS(weighted_kmeans(X, 2, negative, 0), TrainError);
    std::vector<double> short_w = {1.0};
    CHECK_THROWS_AS(weighted_kmeans(X, 2, short_w, 0), TrainError);

    Matrix big(2001, 2001);
    CHECK_THROWS_AS(kmeans_from_distance_matrix(big, 2, 0), TrainError);
    Matrix notsquare(3, 4);
    CHECK_THROWS_AS(kmeans_from_distance_matrix(notsquare, 2, 0), TrainError);
}

TEST_CASE("silhouette separates good splits from bad ones") {
    Matrix X = two_blobs(40, 3, 777);
    std::vector<double> w = uniform_w(3);
    WeightedKMeansResult good = weighted_kmeans(X, 2, w, 1);
    double s_good = silhouette_score(X, w, good.assignment, 2, 1);
    CHECK(s_good > 0.8);

    WeightedKMeansResult split = weighted_kmeans(X, 5, w, 1);
    double s_split = silhouette_score(X, w, split.assignment, 5, 1);
    CHECK(s_good > s_split);
}

TEST_CASE("choose_k finds the two blobs") {
    Matrix X = two_blobs(60, 3, 4242);
    CHECK(choose_k(X, uniform_w(3), 7) == 2);
}

TEST_CASE("one-dimensional clusters agree with the exact dynamic program") {
    // Three separated 1-D blobs: Lloyd from a k-means++ start reaches the
    // global optimum, which the O(K n^2) dynamic program certifies.
    Rng rng(55);
    std::vector<double> values;
    for (double center : {0.0, 10.0, 25.0})
        for (int i = 0; i < 15; ++i) values.push_back(center + rng.uniform(-1.0, 1.0));
    Matrix X(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) X(i, 0) = values[i];

    std::vector<double> w1 = {1.0};
    WeightedKMeansResult r = weighted_kmeans(X, 3, w1, 3);
    double sse = oracle::sse_1d(values, r.assignment, 3);
    double best = oracle::dp_kmeans_1d_sse(values, 3);
    CHECK(sse == doctest::Approx(best).epsilon(1e-9));

    // Clusters on a line are intervals: sorting by value never interleaves.
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    int switches = 0;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (r.assignment[order[i]] != r.assignment[order[i - 1]]) ++switches;
    CHECK(switches == 2);
}
