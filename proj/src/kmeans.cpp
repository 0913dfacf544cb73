#include "gridcast/kmeans.hpp"

#include "gridcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridcast {

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

// Shared k-means++ draw pattern: one uniform_int for the first seed, then one
// uniform01 per remaining seed (uniform_int when every candidate distance is
// zero). point_d2(i, j) is the squared distance from point i to seed point j.
template <typename D2>
std::vector<std::size_t> kmeanspp_indices(std::size_t m, int K, Rng& rng,
                                          const D2& point_d2) {
    std::vector<std::size_t> seeds;
    seeds.reserve(static_cast<std::size_t>(K));
    seeds.push_back(static_cast<std::size_t>(rng.uniform_int(m)));
    std::vector<double> d2(m);
    for (std::size_t i = 0; i < m; ++i) d2[i] = point_d2(i, seeds[0]);
    for (int c = 1; c < K; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double cum = 0.0;
            pick = m - 1;
            for (std::size_t i = 0; i < m; ++i) {
                cum += d2[i];
                if (cum > target) {
                    pick = i;
                    break;
                }
            }
            // Rounding can leave the walk short of the target; fall back to
            // the last point with positive mass.
            if (!(d2[pick] > 0.0))
                for (std::size_t i = m; i-- > 0;)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
        } else {
            pick = static_cast<std::size_t>(rng.uniform_int(m));
        }
        seeds.push_back(pick);
        for (std::size_t i = 0; i < m; ++i) d2[i] = std::min(d2[i], point_d2(i, pick));
    }
    return seeds;
}

struct LloydState {
    std::vector<int> assignment;
    std::vector<double> trace;
    int iterations = 0;
};

// One Lloyd pass structure shared by the coordinate and distance-matrix
// drivers: assign (ties to the lowest cluster id), revive empty clusters with
// the farthest unclaimed point, stop when the assignment repeats, update.
// assign_d2(i, c) measures point i against cluster c's current centroid;
// update() commits the pending assignment as the new centroids/member sets.
template <typename AssignD2, typename Update>
LloydState lloyd_loop(std::size_t m, int K, int max_iter, const AssignD2& assign_d2,
                      const Update& update) {
    LloydState st;
    st.assignment.assign(m, 0);
    std::vector<int> prev(m, -1);
    std::vector<std::size_t> counts(static_cast<std::size_t>(K));
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            int best = 0;
            double bd = assign_d2(i, 0);
            for (int c = 1; c < K; ++c) {
                const double d = assign_d2(i, c);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            st.assignment[i] = best;
        }
        std::fill(counts.begin(), counts.end(), 0);
        for (int a : st.assignment) ++counts[static_cast<std::size_t>(a)];
        std::vector<char> claimed(m, 0);
        for (bool dirty = true; dirty;) {
            dirty = false;
            for (int c = 0; c < K; ++c) {
                if (counts[static_cast<std::size_t>(c)] != 0) continue;
                std::size_t pick = m;
                double far_d = -1.0;
                for (std::size_t i = 0; i < m; ++i) {
                    if (claimed[i]) continue;
                    const double d = assign_d2(i, st.assignment[i]);
                    if (d > far_d) {
                        far_d = d;
                        pick = i;
                    }
                }
                if (pick == m) continue; // every point claimed: duplicate-seed case
                --counts[static_cast<std::size_t>(st.assignment[pick])];
                st.assignment[pick] = c;
                ++counts[static_cast<std::size_t>(c)];
                claimed[pick] = 1;
                dirty = true;
            }
        }
        st.iterations = it + 1;
        if (st.assignment == prev) {
            st.iterations = it;
            break;
        }
        prev = st.assignment;
        st.trace.push_back(update(st.assignment));
    }
    return st;
}

} // namespace

WeightedKMeansResult weighted_kmeans(const Matrix& points, int K,
                                     std::span<const double> w, std::uint64_t seed,
                                     int max_iter) {
    const std::size_t m = points.rows;
    const std::size_t p = points.cols;
    if (m == 0 || p == 0) throw TrainError("clustering needs a non-empty matrix");
    if (K < 1 || static_cast<std::size_t>(K) > m)
        throw TrainError("K = " + std::to_string(K) + " is out of range [1, " +
                         std::to_string(m) + "]");
    if (w.size() != p)
        throw TrainError("weight vector length " + std::to_string(w.size()) +
                         " does not match feature count " + std::to_string(p));
    double wsum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0)) throw TrainError("weights must be non-negative");
        wsum += x;
    }
    if (!(wsum > 0.0)) throw TrainError("weights are all zero");
    if (max_iter < 1) throw TrainError("max_iter must be >= 1");

    Matrix scaled(m, p);
    {
        std::vector<double> root(p);
        for (std::size_t j = 0; j < p; ++j) root[j] = std::sqrt(w[j]);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < p; ++j) scaled(i, j) = points(i, j) * root[j];
    }

    Rng rng(seed);
    const auto seeds = kmeanspp_indices(
        m, K, rng, [&](std::size_t i, std::size_t j) {
            return dist2(scaled.row(i), scaled.row(j));
        });

    Matrix centroids(static_cast<std::size_t>(K), p);
    for (int c = 0; c < K; ++c)
        std::copy_n(&scaled(seeds[static_cast<std::size_t>(c)], 0), p,
                    &centroids(static_cast<std::size_t>(c), 0));

    auto assign_d2 = [&](std::size_t i, int c) {
        return dist2(scaled.row(i), centroids.row(static_cast<std::size_t>(c)));
    };
    auto update = [&](const std::vector<int>& assignment) {
        Matrix next(static_cast<std::size_t>(K), p);
        std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
        for (std::size_t i = 0; i < m; ++i) {
            const auto c = static_cast<std::size_t>(assignment[i]);
            ++counts[c];
            for (std::size_t j = 0; j < p; ++j) next(c, j) += scaled(i, j);
        }
        for (std::size_t c = 0; c < static_cast<std::size_t>(K); ++c) {
            if (counts[c] == 0) { // unrevivable empty cluster keeps its centroid
                std::copy_n(&centroids(c, 0), p, &next(c, 0));
                continue;
            }
            for (std::size_t j = 0; j < p; ++j)
                next(c, j) /= static_cast<double>(counts[c]);
        }
        centroids = std::move(next);
        double inertia = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            inertia += dist2(scaled.row(i),
                             centroids.row(static_cast<std::size_t>(assignment[i])));
        return inertia;
    };

    const LloydState st = lloyd_loop(m, K, max_iter, assign_d2, update);

    WeightedKMeansResult res;
    res.k = K;
    res.seed = seed;
    res.assignment = st.assignment;
    res.weights.assign(w.begin(), w.end());
    res.inertia_trace = st.trace;
    res.inertia = st.trace.empty() ? 0.0 : st.trace.back();
    res.iterations = st.iterations;
    // Reported centroids are plain member means in the original space, which
    // is the weighted-metric optimum for any w.
    res.centroids = Matrix(static_cast<std::size_t>(K), p);
    std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto c = static_cast<std::size_t>(res.assignment[i]);
        ++counts[c];
        for (std::size_t j = 0; j < p; ++j) res.centroids(c, j) += points(i, j);
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(K); ++c)
        for (std::size_t j = 0; j < p; ++j)
            res.centroids(c, j) /= static_cast<double>(counts[c]);
    return res;
}

WeightedKMeansResult kmeans_from_distance_matrix(const Matrix& D, int K,
                                                 std::uint64_t seed, int max_iter) {
    const std::size_t m = D.rows;
    if (m == 0 || D.cols != m) throw TrainError("distance matrix must be square");
    if (m > 2000)
        throw TrainError("distance-matrix mode is a verification path for up to "
                         "2000 rows; use weighted_kmeans");
    if (K < 1 || static_cast<std::size_t>(K) > m)
        throw TrainError("K = " + std::to_string(K) + " is out of range [1, " +
                         std::to_string(m) + "]");
    if (max_iter < 1) throw TrainError("max_iter must be >= 1");

    auto d2 = [&](std::size_t i, std::size_t j) { return D(i, j) * D(i, j); };

    Rng rng(seed);
    const auto seeds = kmeanspp_indices(m, K, rng, d2);

    // Cluster membership stands in for centroids:
    // ||x_i - mu_C||^2 = (1/|C|) sum_j d2(i,j) - (1/(2|C|^2)) sum_jj' d2(j,j').
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(K));
    for (int c = 0; c < K; ++c)
        members[static_cast<std::size_t>(c)] = {seeds[static_cast<std::size_t>(c)]};
    std::vector<double> self_term(static_cast<std::size_t>(K), 0.0);
    auto refresh_self_terms = [&] {
        for (std::size_t c = 0; c < members.size(); ++c) {
            const auto& mem = members[c];
            if (mem.empty()) {
                self_term[c] = 0.0;
                continue;
            }
            double s = 0.0;
            for (std::size_t a : mem)
                for (std::size_t b : mem) s += d2(a, b);
            const auto n = static_cast<double>(mem.size());
            self_term[c] = s / (2.0 * n * n);
        }
    };
    refresh_self_terms();

    auto assign_d2 = [&](std::size_t i, int c) {
        const auto& mem = members[static_cast<std::size_t>(c)];
        if (mem.empty()) return 1e300; // unrevivable empty cluster attracts nothing
        double s = 0.0;
        for (std::size_t j : mem) s += d2(i, j);
        return s / static_cast<double>(mem.size()) - self_term[static_cast<std::size_t>(c)];
    };
    auto update = [&](const std::vector<int>& assignment) {
        for (auto& mem : members) mem.clear();
        for (std::size_t i = 0; i < m; ++i)
            members[static_cast<std::size_t>(assignment[i])].push_back(i);
        refresh_self_terms();
        double inertia = 0.0;
        for (std::size_t i = 0; i < m; ++i) inertia += assign_d2(i, assignment[i]);
        return inertia;
    };

    const LloydState st = lloyd_loop(m, K, max_iter, assign_d2, update);

    WeightedKMeansResult res;
    res.k = K;
    res.seed = seed;
    res.assignment = st.assignment;
    res.inertia_trace = st.trace;
    res.inertia = st.trace.empty() ? 0.0 : st.trace.back();
    res.iterations = st.iterations;
    return res;
}

double silhouette_score(const Matrix& points, std::span<const double> w,
                        const std::vector<int>& assignment, int K,
                        std::uint64_t seed, std::size_t sample_cap) {
    const std::size_t m = points.rows;
    const std::size_t p = points.cols;
    if (assignment.size() != m) throw TrainError("assignment length mismatch");
    if (K < 2) throw TrainError("silhouette needs K >= 2");

    Matrix scaled(m, p);
    for (std::size_t j = 0; j < p; ++j) {
        const double r = std::sqrt(w[j]);
        for (std::size_t i = 0; i < m; ++i) scaled(i, j) = points(i, j) * r;
    }

    std::vector<std::size_t> sample(m);
    std::iota(sample.begin(), sample.end(), 0u);
    if (m > sample_cap) {
        Rng rng(splitmix64(seed ^ 0x5a11e77eULL));
        for (std::size_t i = 0; i < sample_cap; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(m - i));
            std::swap(sample[i], sample[j]);
        }
        sample.resize(sample_cap);
    }

    const std::size_t n = sample.size();
    double total = 0.0;
    std::vector<double> mean_dist(static_cast<std::size_t>(K));
    std::vector<std::size_t> counts(static_cast<std::size_t>(K));
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t i = sample[a];
        std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const std::size_t j = sample[b];
            const auto c = static_cast<std::size_t>(assignment[j]);
            mean_dist[c] += std::sqrt(dist2(scaled.row(i), scaled.row(j)));
            ++counts[c];
        }
        const auto own = static_cast<std::size_t>(assignment[i]);
        if (counts[own] == 0) continue; // singleton in the sample: s = 0
        const double ai = mean_dist[own] / static_cast<double>(counts[own]);
        double bi = -1.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(K); ++c) {
            if (c == own || counts[c] == 0) continue;
            const double d = mean_dist[c] / static_cast<double>(counts[c]);
            if (bi < 0.0 || d < bi) bi = d;
        }
        if (bi < 0.0) continue;
        const double denom = std::max(ai, bi);
        if (denom > 0.0) total += (bi - ai) / denom;
    }
    return total / static_cast<double>(n);
}

int choose_k(const Matrix& points, std::span<const double> w, std::uint64_t seed,
             int k_min, int k_max, int max_iter) {
    const std::size_t m = points.rows;
    if (k_min < 2) k_min = 2;
    if (static_cast<std::size_t>(k_max) > m) k_max = static_cast<int>(m);
    if (k_min > k_max)
        throw TrainError("cannot choose K: need at least " + std::to_string(k_min) +
                         " points, got " + std::to_string(m));
    int best_k = k_min;
    double best_score = -2.0;
    for (int K = k_min; K <= k_max; ++K) {
        const auto res = weighted_kmeans(points, K, w, seed, max_iter);
        const double score = silhouette_score(points, w, res.assignment, K, seed);
        if (score > best_score) {
            best_score = score;
            best_k = K;
        }
    }
    return best_k;
}

} // namespace gridcast
